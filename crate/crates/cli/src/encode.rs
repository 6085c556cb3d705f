//! `encode`: solve one message-encoding request and write the envelope.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DVector;

use motioncomm::identity::{self, IdentityProblem};
use motioncomm::integrator::{self, IntegratorProblem, Trajectory};
use motioncomm::solver::{self, SolverConfig};

use crate::envelope::{
    matrix_to_rows, rows_to_matrix, MatrixSet, Meta, Mode, Residuals, ResultEnvelope,
    SeparationMetric, SolveRequest, ENVELOPE_VERSION,
};
use crate::{CliError, EncodeArgs, OutputFormat};

const TRAJECTORY_SAMPLES: usize = 101;

pub fn run(args: &EncodeArgs) -> Result<(), CliError> {
    let request = build_request(args)?;
    let started = Instant::now();
    let mut envelope = match request.mode {
        Mode::Integrator => encode_integrator(&request, !args.sequential)?,
        Mode::Identity => encode_identity(&request)?,
    };
    envelope.meta.runtime_ms = started.elapsed().as_millis() as u64;

    let out = &args.out;
    let body = serde_json::to_string_pretty(&envelope).expect("envelope serializes");
    std::fs::write(out, body).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!(
        "wrote {} (mode {:?}, {} messages, cost {:.12e})",
        out.display(),
        request.mode,
        request.messages,
        envelope.cost
    );

    if args.format == OutputFormat::Csv || args.trajectories.is_some() {
        if let Some(trajs) = &envelope.trajectories {
            let prefix = args
                .trajectories
                .clone()
                .unwrap_or_else(|| default_trajectory_prefix(out));
            write_trajectory_csvs(&prefix, trajs)?;
        }
    }
    Ok(())
}

fn build_request(args: &EncodeArgs) -> Result<SolveRequest, CliError> {
    let terminal = parse_f64_list(&args.terminal)
        .map_err(|e| CliError::Usage(format!("--terminal: {e}")))?;
    let l = match &args.l {
        Some(text) => Some(parse_matrix(text).map_err(|e| CliError::Usage(format!("--l: {e}")))?),
        None => None,
    };
    match args.mode {
        Mode::Integrator => {
            if args.order.is_none() || args.degree.is_none() {
                return Err(CliError::Usage(
                    "integrator mode needs --n and --degree".to_string(),
                ));
            }
            if l.is_some() {
                return Err(CliError::Usage(
                    "--l only applies to identity mode".to_string(),
                ));
            }
        }
        Mode::Identity => {
            if l.is_none() {
                return Err(CliError::Usage(
                    "identity mode needs --l with the endpoint-map rows".to_string(),
                ));
            }
        }
    }
    Ok(SolveRequest {
        mode: args.mode,
        order: args.order,
        degree: args.degree,
        messages: args.messages,
        epsilon: args.epsilon,
        terminal,
        l,
        starts: args.starts,
        seed: args.seed,
        tol: args.tol,
        separation_metric: args.separation_metric,
        inequality: args.inequality,
    })
}

fn solver_config(request: &SolveRequest, parallel: bool) -> SolverConfig {
    SolverConfig {
        restarts: request.starts,
        seed: request.seed,
        separation_tol: request.tol,
        inequality: request.inequality,
        parallel,
        ..Default::default()
    }
}

fn encode_integrator(request: &SolveRequest, parallel: bool) -> Result<ResultEnvelope, CliError> {
    let problem = IntegratorProblem {
        order: request.order.expect("checked in build_request"),
        degree: request.degree.expect("checked in build_request"),
        messages: request.messages,
        separation: request.epsilon,
        terminal: request.terminal.clone(),
    };
    problem.validate().map_err(integrator_error)?;
    let config = solver_config(request, parallel);
    let solution =
        solver::assemble_full_solution(&problem, &config).map_err(solver_error)?;

    let mats = integrator::problem_matrices(problem.order, problem.degree)
        .map_err(integrator_error)?;
    let trajectories: Vec<Trajectory> = solution
        .controls
        .iter()
        .map(|c| integrator::simulate(c, problem.order, TRAJECTORY_SAMPLES))
        .collect::<Result<_, _>>()
        .map_err(integrator_error)?;
    let output_l2 = match request.separation_metric {
        SeparationMetric::OutputL2 => {
            let m = request.messages;
            let mut grid = vec![vec![0.0; m]; m];
            for (i, row) in grid.iter_mut().enumerate() {
                for (j, cell) in row.iter_mut().enumerate() {
                    if i != j {
                        *cell = integrator::output_l2_separation(
                            &solution.controls[i],
                            &solution.controls[j],
                            problem.order,
                        );
                    }
                }
            }
            Some(grid)
        }
        SeparationMetric::RForm => None,
    };

    Ok(ResultEnvelope {
        version: ENVELOPE_VERSION.to_string(),
        request: request.clone(),
        matrices: Some(MatrixSet {
            l: matrix_to_rows(&mats.l),
            q: Some(matrix_to_rows(&mats.q)),
            r: Some(matrix_to_rows(&mats.r)),
        }),
        controls: solution
            .controls
            .iter()
            .map(|c| c.coefficients().to_vec())
            .collect(),
        cost: solution.cost,
        residuals: Residuals {
            endpoint: solution.endpoint_residuals.clone(),
            separation: solution.separations.clone(),
            kkt: solution.stationarity,
        },
        output_l2_separation: output_l2,
        trajectories: Some(trajectories),
        meta: Meta {
            seed: request.seed,
            starts: request.starts,
            runtime_ms: 0,
            winner_restart: solution.winner_restart,
            optimality: "best-of-restarts (general subproblem optimality is open)".to_string(),
        },
    })
}

fn encode_identity(request: &SolveRequest) -> Result<ResultEnvelope, CliError> {
    let rows = request.l.as_ref().expect("checked in build_request");
    let l = rows_to_matrix(rows)
        .ok_or_else(|| CliError::Usage("--l rows have inconsistent lengths".to_string()))?;
    let problem = IdentityProblem {
        l: l.clone(),
        target: DVector::from_column_slice(&request.terminal),
        messages: request.messages,
        separation: request.epsilon,
    };
    problem.validate().map_err(identity_error)?;
    let solution = identity::solve_identity(&problem).map_err(identity_error)?;

    let m = request.messages;
    let endpoint: Vec<f64> = solution
        .controls
        .iter()
        .map(|u| (&l * u - &problem.target).amax())
        .collect();
    let mut separation = vec![vec![0.0; m]; m];
    for (i, row) in separation.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = (&solution.controls[i] - &solution.controls[j]).norm();
            }
        }
    }
    let kkt = identity::kkt_residual(&problem, &solution);

    Ok(ResultEnvelope {
        version: ENVELOPE_VERSION.to_string(),
        request: request.clone(),
        matrices: Some(MatrixSet {
            l: matrix_to_rows(&l),
            q: None,
            r: None,
        }),
        controls: solution
            .controls
            .iter()
            .map(|u| u.as_slice().to_vec())
            .collect(),
        cost: solution.cost,
        residuals: Residuals {
            endpoint,
            separation,
            kkt,
        },
        output_l2_separation: None,
        trajectories: None,
        meta: Meta {
            seed: request.seed,
            starts: request.starts,
            runtime_ms: 0,
            winner_restart: 0,
            optimality: "closed-form".to_string(),
        },
    })
}

fn integrator_error(e: integrator::Error) -> CliError {
    use integrator::Error::*;
    match e {
        Capacity { .. } => CliError::Capacity(e.to_string()),
        OrderTooSmall | DegreeBelowOrder { .. } | DegreeCap { .. } | TerminalShape { .. }
        | BadSeparation | BadSteps => CliError::Usage(e.to_string()),
        Linalg(_) => CliError::Solver(e.to_string()),
    }
}

fn identity_error(e: identity::Error) -> CliError {
    use identity::Error::*;
    match e {
        Capacity { .. } => CliError::Capacity(e.to_string()),
        TargetShape { .. } | BadSeparation | NoMessages | BruteForceScale { .. } => {
            CliError::Usage(e.to_string())
        }
        NoFeasiblePoint { .. } | Linalg(_) => CliError::Solver(e.to_string()),
    }
}

fn solver_error(e: solver::Error) -> CliError {
    use solver::Error::*;
    match e {
        Capacity { .. } => CliError::Capacity(e.to_string()),
        Integrator(inner) => integrator_error(inner),
        NoMessages | BadSeparation | OracleNeedsTwoMessages(_) | Shape(_) => {
            CliError::Usage(e.to_string())
        }
        NoFeasiblePoint { .. } | Linalg(_) => CliError::Solver(e.to_string()),
    }
}

pub fn parse_f64_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("invalid number '{s}'")))
        .collect::<Result<Vec<_>, _>>()
        .and_then(|v| {
            if v.is_empty() {
                Err("empty list".to_string())
            } else {
                Ok(v)
            }
        })
}

/// Rows separated by ';', entries by ','.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<f64>>, String> {
    let rows: Result<Vec<Vec<f64>>, String> = text
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse_f64_list)
        .collect();
    let rows = rows?;
    if rows.is_empty() {
        return Err("empty matrix".to_string());
    }
    let width = rows[0].len();
    if rows.iter().any(|r| r.len() != width) {
        return Err("rows have different lengths".to_string());
    }
    Ok(rows)
}

fn default_trajectory_prefix(out: &Path) -> PathBuf {
    let mut prefix = out.to_path_buf();
    prefix.set_extension("");
    prefix
}

fn write_trajectory_csvs(prefix: &Path, trajectories: &[Trajectory]) -> Result<(), CliError> {
    for (msg, traj) in trajectories.iter().enumerate() {
        let path = PathBuf::from(format!("{}.msg{}.csv", prefix.display(), msg + 1));
        let order = traj.states.first().map(|s| s.len()).unwrap_or(0);
        let mut body = String::from("t");
        for j in 1..=order {
            body.push_str(&format!(",x{j}"));
        }
        body.push_str(",u\n");
        for (i, t) in traj.times.iter().enumerate() {
            body.push_str(&format!("{t}"));
            for v in &traj.states[i] {
                body.push_str(&format!(",{v}"));
            }
            body.push_str(&format!(",{}\n", traj.control[i]));
        }
        std::fs::write(&path, body)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
