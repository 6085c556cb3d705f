//! The result-envelope JSON schema shared by `encode` and `verify`, plus the
//! full re-derivation of every residual that `verify` performs.
//!
//! An envelope is self-contained: the request echo carries everything needed
//! to rebuild the problem (`L` rows for identity mode, `(order, degree)` for
//! integrator mode), so `verify` recomputes endpoints, separations and both
//! cost routes from scratch and compares them against the stored payload.

use clap::ValueEnum;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use motioncomm::identity::{self, IdentityProblem};
use motioncomm::integrator::{self, IntegratorProblem, PolynomialControl, Trajectory};

pub const ENVELOPE_VERSION: &str = "1";

/// Verification tolerances. Endpoints are absolute, separations relative to
/// `ε²` (integrator) or `ε` (identity), costs relative.
pub const ENDPOINT_TOL: f64 = 1e-8;
pub const SEPARATION_REL_TOL: f64 = 1e-8;
pub const COST_REL_TOL: f64 = 1e-8;
/// Stored-vs-recomputed payload agreement (tamper detection).
pub const ECHO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Identity,
    Integrator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationMetric {
    /// Quadratic form `(a_i-a_j)ᵀR(a_i-a_j)` (the solved constraint).
    RForm,
    /// `∫₀¹ (y_i - y_j)² dt` on the simulated outputs, reported alongside.
    OutputL2,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveRequest {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    pub messages: usize,
    pub epsilon: f64,
    pub terminal: Vec<f64>,
    /// Identity mode only: the endpoint map, row-major.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<f64>>>,
    pub starts: usize,
    pub seed: u64,
    pub tol: f64,
    pub separation_metric: SeparationMetric,
    pub inequality: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixSet {
    pub l: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Residuals {
    /// Per message: `‖endpoint − terminal‖_∞` (integrator, simulated) or
    /// `‖L u_j − x‖_∞` (identity).
    pub endpoint: Vec<f64>,
    /// Achieved pairwise separations, full `m×m`: `(a_i-a_j)ᵀR(a_i-a_j)`
    /// for integrator mode, `‖u_i-u_j‖` for identity mode.
    pub separation: Vec<Vec<f64>>,
    /// Stationarity residual of the returned solution.
    pub kkt: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    pub seed: u64,
    pub starts: usize,
    pub runtime_ms: u64,
    pub winner_restart: usize,
    /// Quality contract of the solve ("closed-form" or "best-of-restarts";
    /// global optimality of the general subproblem is an open question).
    pub optimality: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub version: String,
    pub request: SolveRequest,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrices: Option<MatrixSet>,
    /// One coefficient/control vector per message.
    pub controls: Vec<Vec<f64>>,
    pub cost: f64,
    pub residuals: Residuals,
    /// Alternative separation matrix, present when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_l2_separation: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectories: Option<Vec<Trajectory>>,
    pub meta: Meta,
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub fn rows_to_matrix(rows: &[Vec<f64>]) -> Option<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first()?.len();
    if rows.iter().any(|r| r.len() != ncols) || ncols == 0 {
        return None;
    }
    Some(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

/// Recomputes every residual in the envelope from the request echo alone and
/// returns the list of failed checks (empty means the envelope verifies).
pub fn verify(envelope: &ResultEnvelope) -> Vec<String> {
    let mut failures = Vec::new();
    if envelope.version != ENVELOPE_VERSION {
        failures.push(format!(
            "unsupported envelope version '{}'",
            envelope.version
        ));
        return failures;
    }
    if envelope.controls.len() != envelope.request.messages {
        failures.push(format!(
            "envelope carries {} controls for {} messages",
            envelope.controls.len(),
            envelope.request.messages
        ));
        return failures;
    }
    match envelope.request.mode {
        Mode::Integrator => verify_integrator(envelope, &mut failures),
        Mode::Identity => verify_identity(envelope, &mut failures),
    }
    failures
}

fn check_close(failures: &mut Vec<String>, what: &str, got: f64, want: f64, tol: f64) {
    let delta = (got - want).abs();
    // NaN anywhere is a failed check, not a pass.
    if delta.is_nan() || delta > tol {
        failures.push(format!("{what}: got {got:.12e}, expected {want:.12e} (tol {tol:.1e})"));
    }
}

fn verify_integrator(envelope: &ResultEnvelope, failures: &mut Vec<String>) {
    let request = &envelope.request;
    let (order, degree) = match (request.order, request.degree) {
        (Some(n), Some(big_n)) => (n, big_n),
        _ => {
            failures.push("integrator request missing order/degree".to_string());
            return;
        }
    };
    let problem = IntegratorProblem {
        order,
        degree,
        messages: request.messages,
        separation: request.epsilon,
        terminal: request.terminal.clone(),
    };
    if let Err(e) = problem.validate() {
        failures.push(format!("request does not validate: {e}"));
        return;
    }
    let mats = match integrator::problem_matrices(order, degree) {
        Ok(m) => m,
        Err(e) => {
            failures.push(format!("cannot rebuild matrices: {e}"));
            return;
        }
    };
    if let Some(set) = &envelope.matrices {
        for (name, stored, rebuilt) in [
            ("L", Some(&set.l), &mats.l),
            ("Q", set.q.as_ref(), &mats.q),
            ("R", set.r.as_ref(), &mats.r),
        ] {
            if let Some(rows) = stored {
                match rows_to_matrix(rows) {
                    Some(m) if m.shape() == rebuilt.shape() => {
                        let delta = (&m - rebuilt).amax();
                        if delta > ECHO_TOL {
                            failures.push(format!(
                                "embedded {name} deviates from rebuilt by {delta:.3e}"
                            ));
                        }
                    }
                    _ => failures.push(format!("embedded {name} has the wrong shape")),
                }
            }
        }
    }

    let controls: Vec<PolynomialControl> = envelope
        .controls
        .iter()
        .map(|c| PolynomialControl::new(c.clone()))
        .collect();
    for (j, c) in controls.iter().enumerate() {
        if c.coefficients().len() != degree + 1 {
            failures.push(format!(
                "control {j} has {} coefficients, expected {}",
                c.coefficients().len(),
                degree + 1
            ));
            return;
        }
    }
    let terminal = problem.terminal_vector();

    // Endpoints, by exact simulation.
    for (j, control) in controls.iter().enumerate() {
        let endpoint = integrator::simulate(control, order, 2)
            .expect("validated steps")
            .endpoint_vector();
        let residual = (endpoint - &terminal).amax();
        if residual > ENDPOINT_TOL {
            failures.push(format!(
                "endpoint residual of control {j} is {residual:.3e} (tol {ENDPOINT_TOL:.1e})"
            ));
        }
        if let Some(stored) = envelope.residuals.endpoint.get(j) {
            check_close(
                failures,
                &format!("stored endpoint residual {j}"),
                *stored,
                residual,
                ECHO_TOL,
            );
        } else {
            failures.push(format!("missing stored endpoint residual {j}"));
        }
    }

    // Pairwise separations against ε².
    let eps2 = request.epsilon * request.epsilon;
    let m = request.messages;
    for i in 0..m {
        for j in 0..m {
            let sep = if i == j {
                0.0
            } else {
                integrator::separation_r_form(&controls[i], &controls[j], &mats.r)
            };
            if i != j {
                let ok = if request.inequality {
                    sep >= eps2 * (1.0 - SEPARATION_REL_TOL)
                } else {
                    (sep - eps2).abs() <= SEPARATION_REL_TOL * eps2
                };
                if !ok {
                    failures.push(format!(
                        "separation ({i},{j}) is {sep:.12e}, required ε² = {eps2:.12e}"
                    ));
                }
            }
            let stored = envelope
                .residuals
                .separation
                .get(i)
                .and_then(|row| row.get(j));
            match stored {
                Some(&s) => check_close(
                    failures,
                    &format!("stored separation ({i},{j})"),
                    s,
                    sep,
                    ECHO_TOL * (1.0 + eps2),
                ),
                None => failures.push(format!("missing stored separation ({i},{j})")),
            }
        }
    }

    // Both cost routes from scratch.
    let base = integrator::base_control(&mats, &terminal);
    let base_vec = base.as_vector();
    let message_cost: f64 = controls
        .iter()
        .map(|a| {
            let n = a.as_vector() - &base_vec;
            (n.transpose() * &mats.q * &n)[(0, 0)]
        })
        .sum();
    let optimal_form = m as f64 * mats.context_cost(&terminal) + message_cost;
    let direct: f64 = controls
        .iter()
        .map(|a| integrator::control_energy(a, &mats.q))
        .sum();
    let scale = 1.0 + direct.abs();
    check_close(
        failures,
        "stored cost vs direct Σ aᵀQa",
        envelope.cost,
        direct,
        COST_REL_TOL * scale,
    );
    check_close(
        failures,
        "optimal-form cost vs direct Σ aᵀQa",
        optimal_form,
        direct,
        COST_REL_TOL * scale,
    );

    // Optional alternative metric: consistency with the stored matrix.
    if let Some(stored) = &envelope.output_l2_separation {
        for i in 0..m {
            for j in 0..m {
                let sep = if i == j {
                    0.0
                } else {
                    integrator::output_l2_separation(&controls[i], &controls[j], order)
                };
                match stored.get(i).and_then(|row| row.get(j)) {
                    Some(&s) => check_close(
                        failures,
                        &format!("stored output-L2 separation ({i},{j})"),
                        s,
                        sep,
                        ECHO_TOL * (1.0 + sep.abs()),
                    ),
                    None => failures.push(format!("missing output-L2 separation ({i},{j})")),
                }
            }
        }
    }
}

fn verify_identity(envelope: &ResultEnvelope, failures: &mut Vec<String>) {
    let request = &envelope.request;
    let l = match request.l.as_ref().and_then(|rows| rows_to_matrix(rows)) {
        Some(l) => l,
        None => {
            failures.push("identity request carries no valid endpoint map".to_string());
            return;
        }
    };
    if request.terminal.len() != l.nrows() {
        failures.push(format!(
            "terminal has {} entries for an endpoint map with {} rows",
            request.terminal.len(),
            l.nrows()
        ));
        return;
    }
    let target = DVector::from_column_slice(&request.terminal);
    let controls: Vec<DVector<f64>> = envelope
        .controls
        .iter()
        .map(|c| DVector::from_column_slice(c))
        .collect();
    for (j, u) in controls.iter().enumerate() {
        if u.len() != l.ncols() {
            failures.push(format!(
                "control {j} has {} entries, expected {}",
                u.len(),
                l.ncols()
            ));
            return;
        }
        let residual = (&l * u - &target).amax();
        if residual > ENDPOINT_TOL {
            failures.push(format!(
                "endpoint residual of control {j} is {residual:.3e} (tol {ENDPOINT_TOL:.1e})"
            ));
        }
        if let Some(stored) = envelope.residuals.endpoint.get(j) {
            check_close(
                failures,
                &format!("stored endpoint residual {j}"),
                *stored,
                residual,
                ECHO_TOL,
            );
        }
    }

    let m = request.messages;
    let eps = request.epsilon;
    for i in 0..m {
        for j in 0..m {
            let sep = if i == j {
                0.0
            } else {
                (&controls[i] - &controls[j]).norm()
            };
            if i != j {
                let ok = if request.inequality {
                    sep >= eps * (1.0 - SEPARATION_REL_TOL)
                } else {
                    (sep - eps).abs() <= SEPARATION_REL_TOL * eps.max(1.0)
                };
                if !ok {
                    failures.push(format!(
                        "separation ({i},{j}) is {sep:.12e}, required ε = {eps:.12e}"
                    ));
                }
            }
            if let Some(&s) = envelope
                .residuals
                .separation
                .get(i)
                .and_then(|row| row.get(j))
            {
                check_close(
                    failures,
                    &format!("stored separation ({i},{j})"),
                    s,
                    sep,
                    ECHO_TOL * (1.0 + eps),
                );
            }
        }
    }

    let direct: f64 = controls.iter().map(|u| u.norm_squared()).sum();
    let scale = 1.0 + direct.abs();
    check_close(
        failures,
        "stored cost vs direct Σ‖u‖²",
        envelope.cost,
        direct,
        COST_REL_TOL * scale,
    );
    let problem = IdentityProblem {
        l,
        target,
        messages: m,
        separation: eps,
    };
    match identity::theoretical_cost(&problem) {
        Ok(formula) if !request.inequality => check_close(
            failures,
            "direct cost vs closed form",
            direct,
            formula,
            COST_REL_TOL * scale,
        ),
        Ok(_) => {}
        Err(e) => failures.push(format!("request does not validate: {e}")),
    }
}
