//! Augmented Lagrangian minimizer for smooth problems with quadratic
//! constraints. Each constraint is either an equality `c_k(z) = 0` or a
//! one-sided bound `c_k(z) >= 0`.
//!
//! The inner solver is a damped Newton iteration on the augmented
//! Lagrangian; problem dimensions here are small (tens of variables), so a
//! dense Hessian solve per step is the cheapest reliable option. The whole
//! path is deterministic.

use nalgebra::{DMatrix, DVector};

pub(crate) trait ConstrainedModel: Sync {
    fn dim(&self) -> usize;
    fn num_constraints(&self) -> usize;
    /// Whether constraint `k` is an equality (`true`) or `c_k >= 0`.
    fn is_equality(&self, k: usize) -> bool;
    fn objective(&self, z: &DVector<f64>) -> f64;
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64>;
    /// Hessian of the objective.
    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64>;
    fn constraints(&self, z: &DVector<f64>) -> DVector<f64>;
    /// Jacobian of the constraints, `num_constraints x dim`.
    fn jacobian(&self, z: &DVector<f64>) -> DMatrix<f64>;
    /// Weighted sum of constraint Hessians `Σ w_k ∇²c_k`.
    fn constraint_hessian(&self, z: &DVector<f64>, weights: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct AugLagOptions {
    pub max_outer: usize,
    pub max_inner: usize,
    /// Absolute tolerance on the worst constraint violation.
    pub feas_tol: f64,
    /// Relative tolerance on the KKT stationarity residual.
    pub stat_tol: f64,
    pub rho0: f64,
}

impl Default for AugLagOptions {
    fn default() -> Self {
        Self {
            max_outer: 60,
            max_inner: 200,
            feas_tol: 1e-10,
            stat_tol: 1e-8,
            rho0: 10.0,
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct AugLagResult {
    pub z: DVector<f64>,
    pub objective: f64,
    /// Worst constraint violation (absolute).
    pub feasibility: f64,
    /// Normalized KKT stationarity residual.
    pub stationarity: f64,
    /// Final multipliers (signed for equalities, nonnegative for bounds).
    pub multipliers: DVector<f64>,
    pub converged: bool,
}

struct AugLag<'a, M: ConstrainedModel> {
    model: &'a M,
    lambda: DVector<f64>,
    rho: f64,
}

impl<M: ConstrainedModel> AugLag<'_, M> {
    /// Per-constraint weight entering gradient and Hessian:
    /// `λ_k + ρ c_k` for equalities, `-max(0, λ_k - ρ c_k)` for bounds.
    fn weight(&self, k: usize, c_k: f64) -> f64 {
        if self.model.is_equality(k) {
            self.lambda[k] + self.rho * c_k
        } else {
            -(self.lambda[k] - self.rho * c_k).max(0.0)
        }
    }

    fn value(&self, z: &DVector<f64>) -> f64 {
        let c = self.model.constraints(z);
        let mut v = self.model.objective(z);
        for k in 0..c.len() {
            if self.model.is_equality(k) {
                v += self.lambda[k] * c[k] + 0.5 * self.rho * c[k] * c[k];
            } else {
                let t = (self.lambda[k] - self.rho * c[k]).max(0.0);
                v += (t * t - self.lambda[k] * self.lambda[k]) / (2.0 * self.rho);
            }
        }
        v
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let c = self.model.constraints(z);
        let jac = self.model.jacobian(z);
        let w = DVector::from_fn(c.len(), |k, _| self.weight(k, c[k]));
        self.model.gradient(z) + jac.transpose() * w
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let c = self.model.constraints(z);
        let jac = self.model.jacobian(z);
        let w = DVector::from_fn(c.len(), |k, _| self.weight(k, c[k]));
        let mut h = self.model.hessian(z) + self.model.constraint_hessian(z, &w);
        for k in 0..c.len() {
            // Gauss-Newton term; bounds contribute only while active.
            let active = self.model.is_equality(k) || self.lambda[k] - self.rho * c[k] > 0.0;
            if active {
                let row = jac.row(k).transpose();
                h += &row * row.transpose() * self.rho;
            }
        }
        h
    }
}

fn newton_minimize<M: ConstrainedModel>(
    al: &AugLag<'_, M>,
    mut z: DVector<f64>,
    grad_tol: f64,
    max_iter: usize,
) -> DVector<f64> {
    let n = z.len();
    let mut value = al.value(&z);
    for _ in 0..max_iter {
        let g = al.gradient(&z);
        if g.amax() <= grad_tol {
            break;
        }
        let h = al.hessian(&z);
        let scale = h.diagonal().amax().max(1.0);
        let mut tau = 0.0;
        let direction = loop {
            let mut shifted = h.clone();
            for i in 0..n {
                shifted[(i, i)] += tau;
            }
            if let Some(chol) = nalgebra::Cholesky::new(shifted) {
                break chol.solve(&(-&g));
            }
            tau = if tau == 0.0 { 1e-8 * scale } else { tau * 10.0 };
        };
        let slope = g.dot(&direction);
        let (direction, slope) = if slope < 0.0 {
            (direction, slope)
        } else {
            let slope = -g.norm_squared();
            (-&g, slope)
        };
        let mut accepted = false;
        let mut step = 1.0;
        for _ in 0..60 {
            let trial = &z + &direction * step;
            let trial_value = al.value(&trial);
            if trial_value <= value + 1e-4 * step * slope {
                z = trial;
                value = trial_value;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    z
}

fn violation_of<M: ConstrainedModel>(model: &M, c: &DVector<f64>) -> f64 {
    (0..c.len()).fold(0.0_f64, |acc, k| {
        let v = if model.is_equality(k) {
            c[k].abs()
        } else {
            (-c[k]).max(0.0)
        };
        acc.max(v)
    })
}

fn updated_multipliers<M: ConstrainedModel>(
    model: &M,
    lambda: &DVector<f64>,
    rho: f64,
    c: &DVector<f64>,
) -> DVector<f64> {
    DVector::from_fn(c.len(), |k, _| {
        if model.is_equality(k) {
            lambda[k] + rho * c[k]
        } else {
            (lambda[k] - rho * c[k]).max(0.0)
        }
    })
}

fn kkt_residual<M: ConstrainedModel>(
    model: &M,
    z: &DVector<f64>,
    multipliers: &DVector<f64>,
) -> f64 {
    let jac = model.jacobian(z);
    // Equalities enter as +λ∇c, active bounds as -λ∇c.
    let signed = DVector::from_fn(multipliers.len(), |k, _| {
        if model.is_equality(k) {
            multipliers[k]
        } else {
            -multipliers[k]
        }
    });
    (model.gradient(z) + jac.transpose() * signed).amax()
}

/// Minimizes `model.objective` subject to the model's constraints, starting
/// from `z0`.
pub(crate) fn minimize<M: ConstrainedModel>(
    model: &M,
    z0: &DVector<f64>,
    opts: &AugLagOptions,
) -> AugLagResult {
    let p = model.num_constraints();
    let mut state = AugLag {
        model,
        lambda: DVector::zeros(p),
        rho: opts.rho0,
    };
    let mut z = z0.clone();
    let grad_scale = 1.0 + model.gradient(&z).amax();
    let mut best_violation = f64::INFINITY;

    for outer in 0..opts.max_outer {
        let inner_tol = (1e-3 * 0.2_f64.powi(outer as i32)).max(1e-14) * grad_scale;
        z = newton_minimize(&state, z, inner_tol, opts.max_inner);

        let c = model.constraints(&z);
        let violation = violation_of(model, &c);
        let updated = updated_multipliers(model, &state.lambda, state.rho, &c);
        let stationarity = kkt_residual(model, &z, &updated) / grad_scale;

        if violation <= opts.feas_tol && stationarity <= opts.stat_tol {
            return AugLagResult {
                objective: model.objective(&z),
                z,
                feasibility: violation,
                stationarity,
                multipliers: updated,
                converged: true,
            };
        }
        if violation <= 0.25 * best_violation || violation <= opts.feas_tol {
            state.lambda = updated;
        } else {
            state.rho = (state.rho * 10.0).min(1e14);
        }
        best_violation = best_violation.min(violation);
    }

    let c = model.constraints(&z);
    let violation = violation_of(model, &c);
    let updated = updated_multipliers(model, &state.lambda, state.rho, &c);
    AugLagResult {
        objective: model.objective(&z),
        stationarity: kkt_residual(model, &z, &updated) / grad_scale,
        z,
        feasibility: violation,
        multipliers: updated,
        converged: false,
    }
}
