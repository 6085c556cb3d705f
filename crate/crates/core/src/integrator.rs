//! Minimum-energy steering of the n-th order integrator `x^(n) = u` on the
//! unit time horizon with polynomial controls.
//!
//! Restricting `u(s) = a₀ + a₁s + … + a_N s^N` turns the steering problem
//! into finite-dimensional linear algebra: an endpoint map `L` (row `j`
//! sends the coefficient vector to the terminal value of the `(j-1)`-th
//! derivative), the energy Gram matrix `Q` (the Hilbert matrix, so that
//! `aᵀQa = ∫₀¹ u²`), and the separation Gram matrix `R` with entries
//! `(2(n-1))! (k+ℓ)! / (2n-1+k+ℓ)!`.
//!
//! `Q` is catastrophically ill-conditioned in floating point, so all
//! constructor-built matrices carry exact rational entries and the weighted
//! pseudo-inverse, endpoint Gram inverse and projector are derived exactly
//! through the shifted-Legendre change of basis (which diagonalizes `Q` to
//! `diag(1/(2k+1))`) before rounding to `f64`. A pleasant consequence of
//! that basis is that the minimum-energy base control is exactly a
//! polynomial of degree `n - 1`: its trailing coefficients come out as true
//! zeros, not small noise.

use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::exact::{self, RatMatrix};
use crate::linalg::{self, quad};
use crate::poly;

/// Hard cap on the polynomial degree. Exact arithmetic keeps everything
/// correct beyond this, but downstream float consumers (nullspace bases,
/// solvers) start losing digits, so the constructors refuse instead.
pub const MAX_DEGREE: usize = 16;

#[derive(Debug, Error)]
pub enum Error {
    #[error("system order must be at least 1")]
    OrderTooSmall,
    #[error("polynomial degree {degree} is below the system order {order}")]
    DegreeBelowOrder { degree: usize, order: usize },
    #[error("polynomial degree {degree} exceeds the supported cap {max}")]
    DegreeCap { degree: usize, max: usize },
    #[error(
        "cannot encode {messages} messages: need degree - order >= messages - 2 \
         (degree {degree}, order {order})"
    )]
    Capacity {
        degree: usize,
        order: usize,
        messages: usize,
    },
    #[error("terminal state has {got} entries, expected {want}")]
    TerminalShape { got: usize, want: usize },
    #[error("separation must be positive when encoding more than one message")]
    BadSeparation,
    #[error("trajectory needs at least 2 samples")]
    BadSteps,
    #[error(transparent)]
    Linalg(#[from] linalg::Error),
}

/// One steering-with-messages instance for the n-th order integrator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntegratorProblem {
    /// System order `n` (number of chained integrators).
    pub order: usize,
    /// Polynomial control degree `N`.
    pub degree: usize,
    /// Number of messages `m` to encode.
    pub messages: usize,
    /// Required pairwise separation `ε` between encoded controls.
    pub separation: f64,
    /// Terminal state `(x(1), x'(1), …, x^(n-1)(1))`.
    pub terminal: Vec<f64>,
}

impl IntegratorProblem {
    pub fn validate(&self) -> Result<(), Error> {
        if self.order < 1 {
            return Err(Error::OrderTooSmall);
        }
        if self.degree < self.order {
            return Err(Error::DegreeBelowOrder {
                degree: self.degree,
                order: self.order,
            });
        }
        if self.degree > MAX_DEGREE {
            return Err(Error::DegreeCap {
                degree: self.degree,
                max: MAX_DEGREE,
            });
        }
        if self.messages == 0 {
            return Err(Error::Capacity {
                degree: self.degree,
                order: self.order,
                messages: self.messages,
            });
        }
        if self.messages >= 2 {
            if self.separation <= 0.0 {
                return Err(Error::BadSeparation);
            }
            if self.degree - self.order + 2 < self.messages {
                return Err(Error::Capacity {
                    degree: self.degree,
                    order: self.order,
                    messages: self.messages,
                });
            }
        }
        if self.terminal.len() != self.order {
            return Err(Error::TerminalShape {
                got: self.terminal.len(),
                want: self.order,
            });
        }
        Ok(())
    }

    pub fn terminal_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.terminal)
    }
}

/// Polynomial control `u(s) = a₀ + a₁ s + … + a_N s^N` on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolynomialControl {
    coeffs: Vec<f64>,
}

impl PolynomialControl {
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "control needs at least one coefficient");
        Self { coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        poly::eval(&self.coeffs, t)
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.coeffs)
    }
}

/// The reduction matrices for one `(order, degree)` pair, plus the exactly
/// derived solve products.
#[derive(Debug, Clone)]
pub struct ProblemMatrices {
    order: usize,
    degree: usize,
    /// Endpoint map, `order x (degree+1)`.
    pub l: DMatrix<f64>,
    /// Energy Gram matrix (Hilbert), `(degree+1)²`.
    pub q: DMatrix<f64>,
    /// Separation Gram matrix, `(degree+1)²`.
    pub r: DMatrix<f64>,
    weighted_pinv: DMatrix<f64>,
    endpoint_gram_inv: DMatrix<f64>,
    projector: DMatrix<f64>,
}

impl ProblemMatrices {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// `Q⁻¹Lᵀ(LQ⁻¹Lᵀ)⁻¹`, exactly derived.
    pub fn weighted_pinv(&self) -> &DMatrix<f64> {
        &self.weighted_pinv
    }

    /// `(LQ⁻¹Lᵀ)⁻¹`, exactly derived.
    pub fn endpoint_gram_inv(&self) -> &DMatrix<f64> {
        &self.endpoint_gram_inv
    }

    /// `I − Q⁻¹Lᵀ(LQ⁻¹Lᵀ)⁻¹L`, exactly derived.
    pub fn projector(&self) -> &DMatrix<f64> {
        &self.projector
    }

    /// The context cost `x̄ᵀ(LQ⁻¹Lᵀ)⁻¹x̄` of one terminal state.
    pub fn context_cost(&self, terminal: &DVector<f64>) -> f64 {
        (terminal.transpose() * &self.endpoint_gram_inv * terminal)[(0, 0)]
    }
}

/// Exact endpoint map: entry `(j, k)` (row `j` zero-based for the `(j+1)`-th
/// state) is `∫₀¹ (1-s)^p s^k / p! ds = k! / (k+p+1)!` with `p = n-1-j`.
pub fn build_l_exact(order: usize, degree: usize) -> Result<RatMatrix, Error> {
    check_shape(order, degree)?;
    Ok(RatMatrix::from_fn(order, degree + 1, |j, k| {
        let p = order - 1 - j;
        BigRational::new(exact::factorial(k), exact::factorial(k + p + 1))
    }))
}

/// Exact energy Gram matrix: the `(degree+1)` Hilbert matrix.
pub fn build_q_exact(degree: usize) -> RatMatrix {
    exact::hilbert(degree + 1)
}

/// Exact separation Gram matrix: entry `(k, ℓ)` is
/// `(2(n-1))! (k+ℓ)! / (2n-1+k+ℓ)!`.
pub fn build_r_exact(order: usize, degree: usize) -> Result<RatMatrix, Error> {
    if order < 1 {
        return Err(Error::OrderTooSmall);
    }
    let two_n_minus_2 = exact::factorial(2 * (order - 1));
    Ok(RatMatrix::from_fn(degree + 1, degree + 1, |k, l| {
        BigRational::new(
            two_n_minus_2.clone() * exact::factorial(k + l),
            exact::factorial(2 * order - 1 + k + l),
        )
    }))
}

pub fn build_l(order: usize, degree: usize) -> Result<DMatrix<f64>, Error> {
    Ok(build_l_exact(order, degree)?.to_f64())
}

pub fn build_q(degree: usize) -> DMatrix<f64> {
    build_q_exact(degree).to_f64()
}

pub fn build_r(order: usize, degree: usize) -> Result<DMatrix<f64>, Error> {
    Ok(build_r_exact(order, degree)?.to_f64())
}

fn check_shape(order: usize, degree: usize) -> Result<(), Error> {
    if order < 1 {
        return Err(Error::OrderTooSmall);
    }
    if degree < order {
        return Err(Error::DegreeBelowOrder { degree, order });
    }
    if degree > MAX_DEGREE {
        return Err(Error::DegreeCap {
            degree,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

/// Builds `L`, `Q`, `R` and the exactly derived solve products for one
/// `(order, degree)` pair.
pub fn problem_matrices(order: usize, degree: usize) -> Result<ProblemMatrices, Error> {
    check_shape(order, degree)?;
    let n = order;
    let width = degree + 1;

    let l_exact = build_l_exact(order, degree)?;
    let q_exact = build_q_exact(degree);
    let r_exact = build_r_exact(order, degree)?;

    // Work in the shifted-Legendre basis S, where SᵀQS = diag(1/(2k+1)).
    // L·S has exactly zero columns from index n on (a degree-(n-1) weight
    // integrated against higher-degree Legendre polynomials vanishes), so
    // every solve reduces to the leading n x n block.
    let s = exact::legendre_basis_matrix(degree);
    let ls = l_exact.mul(&s);
    debug_assert!((n..width).all(|k| (0..n).all(|j| ls.get(j, k).is_zero())));

    // gram = (L S) D⁻¹ (L S)ᵀ = B diag(2k+1) Bᵀ over the leading block.
    let gram = RatMatrix::from_fn(n, n, |i, j| {
        let mut acc = BigRational::zero();
        for k in 0..n {
            acc += ls.get(i, k) * exact::rat_int(2 * k as i64 + 1) * ls.get(j, k);
        }
        acc
    });
    let gram_inv = gram.inverse().expect("endpoint Gram matrix is invertible");

    // Weighted pseudo-inverse in Legendre coordinates: rows k < n hold
    // (2k+1)·(Bᵀ gram_inv), rows k >= n are exactly zero.
    let mut wp_legendre = RatMatrix::zeros(width, n);
    for k in 0..n {
        for j in 0..n {
            let mut acc = BigRational::zero();
            for i in 0..n {
                acc += ls.get(i, k) * gram_inv.get(i, j);
            }
            wp_legendre.set(k, j, exact::rat_int(2 * k as i64 + 1) * acc);
        }
    }
    let weighted_pinv = s.mul(&wp_legendre);
    debug_assert_eq!(
        l_exact.mul(&weighted_pinv),
        RatMatrix::identity(n),
        "L · weighted_pinv must be the identity"
    );
    let projector = RatMatrix::identity(width).sub(&weighted_pinv.mul(&l_exact));

    Ok(ProblemMatrices {
        order,
        degree,
        l: l_exact.to_f64(),
        q: q_exact.to_f64(),
        r: r_exact.to_f64(),
        weighted_pinv: weighted_pinv.to_f64(),
        endpoint_gram_inv: gram_inv.to_f64(),
        projector: projector.to_f64(),
    })
}

/// Minimum-energy control reaching `terminal`, `a₀ = Q⁻¹Lᵀ(LQ⁻¹Lᵀ)⁻¹x̄`.
/// Always a polynomial of degree at most `order - 1`: coefficients from
/// index `order` on are exact zeros.
pub fn base_control(mats: &ProblemMatrices, terminal: &DVector<f64>) -> PolynomialControl {
    assert_eq!(terminal.len(), mats.order, "terminal state shape");
    let a = mats.weighted_pinv() * terminal;
    PolynomialControl::new(a.as_slice().to_vec())
}

/// The complementary projector `P = I − Q⁻¹Lᵀ(LQ⁻¹Lᵀ)⁻¹L`; its range is the
/// span of the shifted Legendre polynomials of degree `order..=degree`.
pub fn projector(order: usize, degree: usize) -> Result<DMatrix<f64>, Error> {
    Ok(problem_matrices(order, degree)?.projector.clone())
}

/// Sampled state trajectory of one control.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Row per sample: `x₁(t), …, x_n(t)`.
    pub states: Vec<Vec<f64>>,
    /// Control value per sample.
    pub control: Vec<f64>,
    /// Terminal state `(x₁(1), …, x_n(1))`.
    pub endpoint: Vec<f64>,
}

impl Trajectory {
    pub fn endpoint_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.endpoint)
    }
}

/// Integrates the chain exactly by repeated polynomial antidifferentiation
/// (the trajectory of a polynomial control is itself polynomial, so no ODE
/// stepping is involved) and samples it on a uniform grid of `steps` points.
pub fn simulate(control: &PolynomialControl, order: usize, steps: usize) -> Result<Trajectory, Error> {
    if order < 1 {
        return Err(Error::OrderTooSmall);
    }
    if steps < 2 {
        return Err(Error::BadSteps);
    }
    // state_polys[j] holds x_{j+1} = (n-j)-fold antiderivative of u.
    let mut iterated = Vec::with_capacity(order);
    let mut current = control.coefficients().to_vec();
    for _ in 0..order {
        current = poly::antiderivative(&current);
        iterated.push(current.clone());
    }
    let state_polys: Vec<&Vec<f64>> = (0..order).map(|j| &iterated[order - 1 - j]).collect();

    let mut times = Vec::with_capacity(steps);
    let mut states = Vec::with_capacity(steps);
    let mut control_samples = Vec::with_capacity(steps);
    for i in 0..steps {
        let t = i as f64 / (steps - 1) as f64;
        times.push(t);
        states.push(state_polys.iter().map(|p| poly::eval(p, t)).collect());
        control_samples.push(control.eval(t));
    }
    let endpoint = state_polys.iter().map(|p| poly::eval(p, 1.0)).collect();
    Ok(Trajectory {
        times,
        states,
        control: control_samples,
        endpoint,
    })
}

/// Quadratic-form separation `(a_i - a_j)ᵀ R (a_i - a_j)`.
pub fn separation_r_form(
    a_i: &PolynomialControl,
    a_j: &PolynomialControl,
    r: &DMatrix<f64>,
) -> f64 {
    let delta = a_i.as_vector() - a_j.as_vector();
    (delta.transpose() * r * &delta)[(0, 0)]
}

/// Output separation `∫₀¹ (y_i(t) - y_j(t))² dt` with `y = x₁`, evaluated by
/// Gauss-Legendre quadrature on the simulated output difference. This is the
/// alternative separation metric; it coincides with the `R`-form only for
/// specially structured instances.
pub fn output_l2_separation(
    a_i: &PolynomialControl,
    a_j: &PolynomialControl,
    order: usize,
) -> f64 {
    let len = a_i.coefficients().len().max(a_j.coefficients().len());
    let delta: Vec<f64> = (0..len)
        .map(|k| {
            a_i.coefficients().get(k).copied().unwrap_or(0.0)
                - a_j.coefficients().get(k).copied().unwrap_or(0.0)
        })
        .collect();
    let mut y = delta;
    for _ in 0..order {
        y = poly::antiderivative(&y);
    }
    quad::integral_01_of_square(&y)
}

/// Control energy `aᵀQa = ∫₀¹ u(t)² dt`.
pub fn control_energy(control: &PolynomialControl, q: &DMatrix<f64>) -> f64 {
    let a = control.as_vector();
    (a.transpose() * q * &a)[(0, 0)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn endpoint_map_first_order() {
        let l = build_l(1, 2).unwrap();
        assert_eq!(l.nrows(), 1);
        let want = [1.0, 0.5, 1.0 / 3.0];
        for (k, &w) in want.iter().enumerate() {
            assert!((l[(0, k)] - w).abs() < 1e-15);
        }
    }

    #[test]
    fn endpoint_map_second_order() {
        let l = build_l(2, 2).unwrap();
        let want_x1 = [0.5, 1.0 / 6.0, 1.0 / 12.0];
        let want_x2 = [1.0, 0.5, 1.0 / 3.0];
        for k in 0..3 {
            assert!((l[(0, k)] - want_x1[k]).abs() < 1e-15);
            assert!((l[(1, k)] - want_x2[k]).abs() < 1e-15);
        }
    }

    #[test]
    fn endpoint_map_matches_quadrature() {
        for order in 1..=4 {
            for degree in order..=8 {
                let l = build_l(order, degree).unwrap();
                for j in 0..order {
                    let p = order - 1 - j;
                    let fact: f64 = (1..=p).map(|i| i as f64).product();
                    for k in 0..=degree {
                        let integral = quad::integrate_01(p + k, |s| {
                            (1.0 - s).powi(p as i32) * s.powi(k as i32) / fact
                        });
                        assert!(
                            (l[(j, k)] - integral).abs() < 1e-12,
                            "order {order} degree {degree} entry ({j},{k})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn q_is_hilbert() {
        let q = build_q(2);
        let want = [
            [1.0, 0.5, 1.0 / 3.0],
            [0.5, 1.0 / 3.0, 0.25],
            [1.0 / 3.0, 0.25, 0.2],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert!((q[(i, j)] - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn r_first_order_is_hilbert() {
        let r = build_r_exact(1, 6).unwrap();
        assert_eq!(r, exact::hilbert(7));
    }

    #[test]
    fn r_second_order_corner() {
        let r = build_r(2, 3).unwrap();
        assert!((r[(0, 0)] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn base_control_is_constant_for_first_order() {
        let mats = problem_matrices(1, 5).unwrap();
        let x = DVector::from_vec(vec![2.5]);
        let a = base_control(&mats, &x);
        assert!((a.coefficients()[0] - 2.5).abs() < 1e-12);
        for &c in &a.coefficients()[1..] {
            assert_eq!(c, 0.0, "trailing coefficients are exact zeros");
        }
    }

    #[test]
    fn base_control_double_integrator() {
        for degree in 2..=10 {
            let mats = problem_matrices(2, degree).unwrap();
            let x = DVector::from_vec(vec![1.0, 0.0]);
            let a = base_control(&mats, &x);
            assert!((a.coefficients()[0] - 6.0).abs() < 1e-10, "degree {degree}");
            assert!((a.coefficients()[1] + 12.0).abs() < 1e-10);
            for &c in &a.coefficients()[2..] {
                assert_eq!(c, 0.0);
            }
            assert!((control_energy(&a, &mats.q) - 12.0).abs() < 1e-9);
        }
    }

    #[test]
    fn base_control_zero_terminal() {
        let mats = problem_matrices(3, 6).unwrap();
        let a = base_control(&mats, &DVector::zeros(3));
        assert!(a.as_vector().amax() == 0.0);
    }

    #[test]
    fn projector_fixes_high_legendre_and_kills_base() {
        let mats = problem_matrices(2, 6).unwrap();
        let p = mats.projector();
        // Idempotent.
        assert!((p * p - p).amax() < 1e-9);
        // Kills the base control direction.
        let a = base_control(&mats, &DVector::from_vec(vec![0.3, -1.1]));
        assert!((p * a.as_vector()).amax() < 1e-9);
        // Fixes shifted Legendre polynomials of degree >= order.
        for k in 2..=6 {
            let v = linalg::shifted_legendre(k, 6).unwrap();
            assert!((p * &v - &v).amax() < 1e-8, "degree {k}");
        }
    }

    #[test]
    fn projector_rank_when_degree_equals_order() {
        let n = 3;
        let p = projector(n, n).unwrap();
        let trace: f64 = (0..=n).map(|i| p[(i, i)]).sum();
        assert!((trace - 1.0).abs() < 1e-9, "rank via trace");
        let v = linalg::shifted_legendre(n, n).unwrap();
        assert!((&p * &v - &v).amax() < 1e-8);
    }

    #[test]
    fn nullspace_dimension_counts_free_coefficients() {
        for order in 1..=4 {
            for degree in order..=10 {
                let l = build_l(order, degree).unwrap();
                let z = linalg::nullspace_basis(&l).unwrap();
                assert_eq!(z.dim(), degree + 1 - order);
            }
        }
    }

    #[test]
    fn simulate_trivial_cases() {
        let u = PolynomialControl::new(vec![1.0]);
        let t = simulate(&u, 1, 11).unwrap();
        assert!((t.endpoint[0] - 1.0).abs() < 1e-15);
        for (i, &time) in t.times.iter().enumerate() {
            assert!((t.states[i][0] - time).abs() < 1e-15);
        }

        let u = PolynomialControl::new(vec![0.0, 0.0, 0.0]);
        let t = simulate(&u, 3, 5).unwrap();
        assert!(t.states.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn simulate_double_integrator_analytic() {
        let u = PolynomialControl::new(vec![6.0, -12.0]);
        let t = simulate(&u, 2, 3).unwrap();
        assert!((t.endpoint[0] - 1.0).abs() < 1e-12);
        assert!(t.endpoint[1].abs() < 1e-12);
    }

    #[test]
    fn simulate_endpoint_equals_l_times_a() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for order in 1..=4 {
            for degree in order..=9 {
                let l = build_l(order, degree).unwrap();
                let coeffs: Vec<f64> =
                    (0..=degree).map(|_| rng.random_range(-2.0..2.0)).collect();
                let u = PolynomialControl::new(coeffs);
                let endpoint = simulate(&u, order, 2).unwrap().endpoint_vector();
                let via_l = &l * u.as_vector();
                assert!((endpoint - via_l).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn energy_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for degree in 1..=10 {
            let q = build_q(degree);
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.random_range(-1.0..1.0)).collect();
            let u = PolynomialControl::new(coeffs.clone());
            let direct = quad::integral_01_of_square(&coeffs);
            assert!((control_energy(&u, &q) - direct).abs() < 1e-10);
        }
    }

    #[test]
    fn separation_forms() {
        let r = build_r(2, 3).unwrap();
        let a = PolynomialControl::new(vec![1.0, 0.0, 0.0, 0.0]);
        let b = PolynomialControl::new(vec![0.0, 0.0, 0.0, 0.0]);
        assert_eq!(separation_r_form(&a, &a, &r), 0.0);
        assert_eq!(output_l2_separation(&a, &a, 2), 0.0);
        // n=2, δ = (1,0,...): δᵀRδ = ∫ (1-s)² ds = 1/3.
        assert!((separation_r_form(&a, &b, &r) - 1.0 / 3.0).abs() < 1e-12);

        // n=1: the R-form is the control-difference energy ∫ δu².
        let r1 = build_r(1, 3).unwrap();
        let c = PolynomialControl::new(vec![0.3, -0.7, 0.2, 1.1]);
        let d = PolynomialControl::new(vec![-0.5, 0.4, 0.0, -0.2]);
        let delta: Vec<f64> = c
            .coefficients()
            .iter()
            .zip(d.coefficients())
            .map(|(x, y)| x - y)
            .collect();
        let direct = quad::integral_01_of_square(&delta);
        assert!((separation_r_form(&c, &d, &r1) - direct).abs() < 1e-12);
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            build_l(2, 1),
            Err(Error::DegreeBelowOrder { .. })
        ));
        assert!(matches!(
            problem_matrices(1, MAX_DEGREE + 1),
            Err(Error::DegreeCap { .. })
        ));
        let p = IntegratorProblem {
            order: 2,
            degree: 4,
            messages: 10,
            separation: 0.1,
            terminal: vec![1.0, 0.0],
        };
        assert!(matches!(p.validate(), Err(Error::Capacity { .. })));
        let p = IntegratorProblem {
            order: 2,
            degree: 4,
            messages: 2,
            separation: 0.0,
            terminal: vec![1.0, 0.0],
        };
        assert!(matches!(p.validate(), Err(Error::BadSeparation)));
    }

    #[test]
    fn simulate_rejects_single_sample() {
        let u = PolynomialControl::new(vec![1.0]);
        assert!(matches!(simulate(&u, 1, 1), Err(Error::BadSteps)));
    }
}
