//! Closed-form minimum-energy message encoding when distinguishability is
//! measured directly on the control vectors.
//!
//! For a full-row-rank endpoint map `L` and target `x`, the `m` cheapest
//! controls with `L u_j = x` and pairwise distance `ε` are
//! `u_j = u₀ + n_j`: the least-norm solution `u₀ = Lᵀ(LLᵀ)⁻¹x` plus the
//! vertices of a regular `(m-1)`-simplex of diameter `ε` in the nullspace
//! of `L`. The optimal cost splits as `m·xᵀ(LLᵀ)⁻¹x + (m-1)/2·ε²`.
//!
//! [`brute_force_identity`] is an independent multi-start augmented
//! Lagrangian search over the raw control variables, kept around as the
//! numerical cross-check for the closed form.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use thiserror::Error;

use crate::linalg::{self, NullspaceBasis};
use crate::{exec, opt};

#[derive(Debug, Error)]
pub enum Error {
    #[error("nullspace dimension {dim} cannot host {messages} pairwise-separated messages")]
    Capacity { dim: usize, messages: usize },
    #[error("target vector has {got} entries, expected {want}")]
    TargetShape { got: usize, want: usize },
    #[error("separation must be positive when encoding more than one message")]
    BadSeparation,
    #[error("need at least one message")]
    NoMessages,
    #[error(
        "brute force is desk-scale only: ambient dimension <= 6 and messages <= 3 \
         (got dimension {dim}, {messages} messages)"
    )]
    BruteForceScale { dim: usize, messages: usize },
    #[error("no feasible point found within the restart budget (best violation {violation:.3e})")]
    NoFeasiblePoint { violation: f64 },
    #[error(transparent)]
    Linalg(#[from] linalg::Error),
}

/// Message-encoding instance with the identity distinguishability operator.
#[derive(Debug, Clone)]
pub struct IdentityProblem {
    /// Full-row-rank endpoint map, `dim V x dim U`.
    pub l: DMatrix<f64>,
    /// Target vector in `V`.
    pub target: DVector<f64>,
    /// Number of messages `m`.
    pub messages: usize,
    /// Pairwise separation `ε` between encoded controls.
    pub separation: f64,
}

impl IdentityProblem {
    pub fn validate(&self) -> Result<(), Error> {
        if self.messages == 0 {
            return Err(Error::NoMessages);
        }
        if self.target.len() != self.l.nrows() {
            return Err(Error::TargetShape {
                got: self.target.len(),
                want: self.l.nrows(),
            });
        }
        if self.messages >= 2 && self.separation <= 0.0 {
            return Err(Error::BadSeparation);
        }
        let dim = self.l.ncols().saturating_sub(self.l.nrows());
        if dim + 1 < self.messages {
            return Err(Error::Capacity {
                dim,
                messages: self.messages,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct IdentitySolution {
    /// The encoded controls `u_j = u₀ + n_j`.
    pub controls: Vec<DVector<f64>>,
    /// Least-norm base solution `u₀`.
    pub base: DVector<f64>,
    /// Nullspace offsets `n_j` (canonical simplex orientation).
    pub offsets: Vec<DVector<f64>>,
    /// `Σ ‖u_j‖²`.
    pub cost: f64,
}

/// Closed-form solve: base solution plus a canonical regular simplex
/// embedded in the nullspace.
pub fn solve_identity(problem: &IdentityProblem) -> Result<IdentitySolution, Error> {
    problem.validate()?;
    let pinv = linalg::pinv_rows(&problem.l)?;
    let base = &pinv * &problem.target;
    let offsets = nullspace_offsets(&linalg::nullspace_basis(&problem.l)?, problem)?;
    let controls: Vec<DVector<f64>> = offsets.iter().map(|n| &base + n).collect();
    let cost = controls.iter().map(|u| u.norm_squared()).sum();
    Ok(IdentitySolution {
        controls,
        base,
        offsets,
        cost,
    })
}

fn nullspace_offsets(
    basis: &NullspaceBasis,
    problem: &IdentityProblem,
) -> Result<Vec<DVector<f64>>, Error> {
    if problem.messages == 1 {
        return Ok(vec![DVector::zeros(basis.ambient())]);
    }
    let simplex = linalg::regular_simplex(basis.dim(), problem.messages, problem.separation)?;
    Ok(simplex.iter().map(|s| basis.embed(s)).collect())
}

/// Evaluates the closed-form optimal cost `m·xᵀ(LLᵀ)⁻¹x + (m-1)/2·ε²`
/// without constructing a solution.
pub fn theoretical_cost(problem: &IdentityProblem) -> Result<f64, Error> {
    problem.validate()?;
    let gram = &problem.l * problem.l.transpose();
    let chol = nalgebra::Cholesky::new(gram).ok_or(linalg::Error::NotSpd)?;
    let y = chol.solve(&problem.target);
    let context = problem.target.dot(&y);
    let m = problem.messages as f64;
    let message_term = if problem.messages >= 2 {
        (m - 1.0) / 2.0 * problem.separation * problem.separation
    } else {
        0.0
    };
    Ok(m * context + message_term)
}

/// Worst KKT residual of a solution, using the closed-form multipliers
/// `λ = -2(LLᵀ)⁻¹x` and `μ = -1/m`.
pub fn kkt_residual(problem: &IdentityProblem, solution: &IdentitySolution) -> f64 {
    let gram = &problem.l * problem.l.transpose();
    let chol = nalgebra::Cholesky::new(gram).expect("validated problem");
    let lambda = chol.solve(&problem.target) * -2.0;
    let lt_lambda = problem.l.transpose() * &lambda;
    let m = problem.messages as f64;
    let mut worst = 0.0_f64;
    for (j, u_j) in solution.controls.iter().enumerate() {
        let mut r = u_j * 2.0 + &lt_lambda;
        for (i, u_i) in solution.controls.iter().enumerate() {
            if i != j {
                r += (u_j - u_i) * (2.0 * (-1.0 / m));
            }
        }
        worst = worst.max(r.amax());
    }
    worst
}

#[derive(Debug, Clone)]
pub struct BruteForceOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Solve with `‖u_i - u_j‖² >= ε²` instead of equality (used to confirm
    /// the separation constraints are active at the optimum).
    pub inequality: bool,
    /// Fan restarts out with rayon (when compiled in).
    pub parallel: bool,
    pub feas_tol: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            restarts: 16,
            seed: 0,
            inequality: false,
            parallel: true,
            feas_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceSolution {
    pub controls: Vec<DVector<f64>>,
    pub cost: f64,
    /// Worst `‖L u_j - x‖_∞` over the returned controls.
    pub endpoint_violation: f64,
    /// Worst `| ‖u_i-u_j‖² - ε² |` (or one-sided deficit in inequality mode).
    pub separation_violation: f64,
    /// Achieved pairwise distances `‖u_i - u_j‖`, row-major upper triangle.
    pub separations: Vec<f64>,
    pub winner_restart: usize,
    pub stationarity: f64,
}

struct IdentityModel<'a> {
    problem: &'a IdentityProblem,
    equality_separation: bool,
}

impl IdentityModel<'_> {
    fn dim_u(&self) -> usize {
        self.problem.l.ncols()
    }

    fn control(&self, z: &DVector<f64>, j: usize) -> DVector<f64> {
        let d = self.dim_u();
        DVector::from_column_slice(&z.as_slice()[j * d..(j + 1) * d])
    }

    fn pairs(&self) -> Vec<(usize, usize)> {
        let m = self.problem.messages;
        (0..m)
            .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
            .collect()
    }

    fn num_endpoint(&self) -> usize {
        self.problem.messages * self.problem.l.nrows()
    }
}

impl opt::ConstrainedModel for IdentityModel<'_> {
    fn dim(&self) -> usize {
        self.problem.messages * self.dim_u()
    }

    fn num_constraints(&self) -> usize {
        let m = self.problem.messages;
        self.num_endpoint() + m * (m - 1) / 2
    }

    fn is_equality(&self, k: usize) -> bool {
        k < self.num_endpoint() || self.equality_separation
    }

    fn objective(&self, z: &DVector<f64>) -> f64 {
        z.norm_squared()
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        z * 2.0
    }

    fn hessian(&self, _z: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) * 2.0
    }

    fn constraints(&self, z: &DVector<f64>) -> DVector<f64> {
        let eps2 = self.problem.separation * self.problem.separation;
        let mut c = Vec::with_capacity(self.num_constraints());
        for j in 0..self.problem.messages {
            let u = self.control(z, j);
            let res = &self.problem.l * &u - &self.problem.target;
            c.extend(res.iter());
        }
        for (i, j) in self.pairs() {
            let diff = self.control(z, i) - self.control(z, j);
            c.push(diff.norm_squared() - eps2);
        }
        DVector::from_vec(c)
    }

    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim_u();
        let rows = self.problem.l.nrows();
        let mut jac = DMatrix::zeros(self.num_constraints(), self.dim());
        for j in 0..self.problem.messages {
            for r in 0..rows {
                for cidx in 0..d {
                    jac[(j * rows + r, j * d + cidx)] = self.problem.l[(r, cidx)];
                }
            }
        }
        let base = self.num_endpoint();
        for (pair_idx, (i, j)) in self.pairs().into_iter().enumerate() {
            let diff = self.control(z, i) - self.control(z, j);
            for cidx in 0..d {
                jac[(base + pair_idx, i * d + cidx)] = 2.0 * diff[cidx];
                jac[(base + pair_idx, j * d + cidx)] = -2.0 * diff[cidx];
            }
        }
        jac
    }

    fn constraint_hessian(&self, _z: &DVector<f64>, w: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim_u();
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        let base = self.num_endpoint();
        for (pair_idx, (i, j)) in self.pairs().into_iter().enumerate() {
            let weight = 2.0 * w[base + pair_idx];
            for cidx in 0..d {
                h[(i * d + cidx, i * d + cidx)] += weight;
                h[(j * d + cidx, j * d + cidx)] += weight;
                h[(i * d + cidx, j * d + cidx)] -= weight;
                h[(j * d + cidx, i * d + cidx)] -= weight;
            }
        }
        h
    }
}

/// Multi-start augmented Lagrangian minimization of `Σ‖u_j‖²` over raw
/// control variables, constrained by `L u_j = x` and the pairwise
/// separations. Restarts are merged deterministically by `(cost, index)`.
pub fn brute_force_identity(
    problem: &IdentityProblem,
    options: &BruteForceOptions,
) -> Result<BruteForceSolution, Error> {
    problem.validate()?;
    let dim_u = problem.l.ncols();
    if dim_u > 6 || problem.messages > 3 {
        return Err(Error::BruteForceScale {
            dim: dim_u,
            messages: problem.messages,
        });
    }
    let model = IdentityModel {
        problem,
        equality_separation: !options.inequality,
    };
    let al_opts = opt::AugLagOptions {
        feas_tol: options.feas_tol * (1.0 + problem.target.amax()),
        stat_tol: 1e-8,
        ..Default::default()
    };
    let scale = problem.target.norm() + problem.separation + 1.0;
    let n_vars = problem.messages * dim_u;

    let runs = exec::map_restarts(options.restarts.max(1), options.parallel, |restart| {
        let mut rng = exec::restart_rng(options.seed, restart as u64);
        let z0 = DVector::from_fn(n_vars, |_, _| scale * rng.random_range(-1.0..1.0));
        opt::minimize(&model, &z0, &al_opts)
    });

    let mut best: Option<(usize, &opt::AugLagResult)> = None;
    let mut best_violation = f64::INFINITY;
    for (idx, run) in runs.iter().enumerate() {
        best_violation = best_violation.min(run.feasibility);
        if !run.converged {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, b)) => run.objective < b.objective,
        };
        if better {
            best = Some((idx, run));
        }
    }
    let (winner, run) = best.ok_or(Error::NoFeasiblePoint {
        violation: best_violation,
    })?;

    let controls: Vec<DVector<f64>> = (0..problem.messages)
        .map(|j| model.control(&run.z, j))
        .collect();
    let endpoint_violation = controls
        .iter()
        .map(|u| (&problem.l * u - &problem.target).amax())
        .fold(0.0_f64, f64::max);
    let eps2 = problem.separation * problem.separation;
    let mut separations = Vec::new();
    let mut separation_violation = 0.0_f64;
    for (i, j) in model.pairs() {
        let d2 = (&controls[i] - &controls[j]).norm_squared();
        separations.push(d2.sqrt());
        let v = if options.inequality {
            (eps2 - d2).max(0.0)
        } else {
            (d2 - eps2).abs()
        };
        separation_violation = separation_violation.max(v);
    }
    Ok(BruteForceSolution {
        controls,
        cost: run.objective,
        endpoint_violation,
        separation_violation,
        separations,
        winner_restart: winner,
        stationarity: run.stationarity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis_problem() -> IdentityProblem {
        IdentityProblem {
            l: DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]),
            target: DVector::from_vec(vec![2.0]),
            messages: 2,
            separation: 1.0,
        }
    }

    #[test]
    fn closed_form_axis_instance() {
        let p = axis_problem();
        let sol = solve_identity(&p).unwrap();
        assert!((sol.cost - 8.5).abs() < 1e-12);
        assert!((theoretical_cost(&p).unwrap() - 8.5).abs() < 1e-12);
        // Canonical orientation: offsets along e2.
        assert!((sol.controls[0][0] - 2.0).abs() < 1e-12);
        assert!((sol.controls[0][1] - 0.5).abs() < 1e-12);
        assert!((sol.controls[1][1] + 0.5).abs() < 1e-12);
        for u in &sol.controls {
            assert!((&p.l * u - &p.target).amax() < 1e-10);
        }
        assert!(((&sol.controls[0] - &sol.controls[1]).norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn single_message_is_least_norm() {
        let mut p = axis_problem();
        p.messages = 1;
        let sol = solve_identity(&p).unwrap();
        assert_eq!(sol.controls.len(), 1);
        assert!((sol.cost - 4.0).abs() < 1e-12);
        assert!((theoretical_cost(&p).unwrap() - 4.0).abs() < 1e-12);
        assert!(sol.offsets[0].amax() == 0.0);
    }

    #[test]
    fn tiny_separation_approaches_base() {
        let mut p = axis_problem();
        p.separation = 1e-9;
        let sol = solve_identity(&p).unwrap();
        for u in &sol.controls {
            assert!((u - &sol.base).amax() < 1e-9);
        }
        assert!((sol.cost - 2.0 * sol.base.norm_squared()).abs() < 1e-12);
    }

    #[test]
    fn zero_target_costs_only_separation() {
        let mut p = axis_problem();
        p.target = DVector::zeros(1);
        assert!((theoretical_cost(&p).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cost_decomposes_orthogonally() {
        let p = IdentityProblem {
            l: DMatrix::from_row_slice(2, 5, &[1.0, 0.2, -0.3, 0.5, 0.1, 0.0, 1.0, 0.4, -0.2, 0.3]),
            target: DVector::from_vec(vec![1.5, -0.5]),
            messages: 3,
            separation: 0.7,
        };
        let sol = solve_identity(&p).unwrap();
        let m = p.messages as f64;
        let split = m * sol.base.norm_squared()
            + sol.offsets.iter().map(|n| n.norm_squared()).sum::<f64>();
        assert!((sol.cost - split).abs() < 1e-10);
        assert!((sol.cost - theoretical_cost(&p).unwrap()).abs() < 1e-10);
        assert!(kkt_residual(&p, &sol) < 1e-10);
    }

    #[test]
    fn capacity_is_enforced() {
        let p = IdentityProblem {
            l: DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]),
            target: DVector::from_vec(vec![1.0, 1.0]),
            messages: 3,
            separation: 0.5,
        };
        assert!(matches!(p.validate(), Err(Error::Capacity { .. })));
    }

    #[test]
    fn brute_force_matches_closed_form_on_axis_instance() {
        let p = axis_problem();
        let bf = brute_force_identity(&p, &BruteForceOptions::default()).unwrap();
        assert!(
            (bf.cost - 8.5).abs() < 1e-6,
            "brute force cost {} vs 8.5",
            bf.cost
        );
        assert!(bf.endpoint_violation < 1e-8);
        assert!(bf.separation_violation < 1e-8);
    }

    #[test]
    fn brute_force_single_message_matches_least_norm() {
        let mut p = axis_problem();
        p.messages = 1;
        let bf = brute_force_identity(&p, &BruteForceOptions::default()).unwrap();
        let sol = solve_identity(&p).unwrap();
        assert!((bf.cost - sol.cost).abs() < 1e-8);
    }

    #[test]
    fn brute_force_inequality_keeps_constraints_active() {
        let p = axis_problem();
        let opts = BruteForceOptions {
            inequality: true,
            ..Default::default()
        };
        let bf = brute_force_identity(&p, &opts).unwrap();
        // At the optimum the separation bound binds.
        for s in &bf.separations {
            assert!((s - p.separation).abs() < 1e-6, "separation {s}");
        }
        assert!((bf.cost - 8.5).abs() < 1e-6);
    }

    #[test]
    fn brute_force_rejects_large_instances() {
        let p = IdentityProblem {
            l: DMatrix::from_row_slice(1, 8, &[1.0; 8]),
            target: DVector::from_vec(vec![1.0]),
            messages: 2,
            separation: 1.0,
        };
        assert!(matches!(
            brute_force_identity(&p, &BruteForceOptions::default()),
            Err(Error::BruteForceScale { .. })
        ));
    }

    #[test]
    fn brute_force_is_deterministic() {
        let p = axis_problem();
        let a = brute_force_identity(&p, &BruteForceOptions::default()).unwrap();
        let b = brute_force_identity(&p, &BruteForceOptions::default()).unwrap();
        assert_eq!(a.cost.to_bits(), b.cost.to_bits());
        for (x, y) in a.controls.iter().zip(&b.controls) {
            assert_eq!(x.as_slice(), y.as_slice());
        }
    }
}
