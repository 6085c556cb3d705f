//! Gauss-Legendre quadrature on `[0, 1]`.
//!
//! An `n`-node rule integrates polynomials up to degree `2n - 1` exactly,
//! which is all the encoders ever ask of it.

use crate::poly;

/// Nodes and weights of the `n`-point Gauss-Legendre rule mapped to `[0, 1]`.
pub fn gauss_legendre_01(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature rule needs at least one node");
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        // Chebyshev-like initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_value_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_value_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push(((x + 1.0) / 2.0, w / 2.0));
    }
    rule.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    rule
}

/// Integrates `f` over `[0, 1]` exactly for polynomials of degree at most
/// `degree` (rounds the node count up from the degree).
pub fn integrate_01(degree: usize, f: impl Fn(f64) -> f64) -> f64 {
    let n = degree / 2 + 1;
    gauss_legendre_01(n).iter().map(|&(x, w)| w * f(x)).sum()
}

fn legendre_value_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `∫₀¹ p(t)² dt` for a polynomial given by its monomial coefficients.
pub fn integral_01_of_square(coeffs: &[f64]) -> f64 {
    let degree = 2 * coeffs.len().saturating_sub(1);
    integrate_01(degree, |t| {
        let v = poly::eval(coeffs, t);
        v * v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials_exactly() {
        for k in 0..=20 {
            let got = integrate_01(k, |t| t.powi(k as i32));
            let want = 1.0 / (k as f64 + 1.0);
            assert!(
                (got - want).abs() < 1e-14,
                "∫ t^{k}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn node_count_matters() {
        // One node (midpoint) is exact for degree 1 but not degree 2.
        let rule = gauss_legendre_01(1);
        assert_eq!(rule.len(), 1);
        assert!((rule[0].0 - 0.5).abs() < 1e-15);
        let est: f64 = rule.iter().map(|&(x, w)| w * x * x).sum();
        assert!((est - 1.0 / 3.0).abs() > 1e-3);
    }

    #[test]
    fn matches_simpson_on_smooth_function() {
        // Cross-check against a fine composite Simpson rule.
        let f = |t: f64| (3.0 * t).sin() * (-t).exp();
        let n = 200_000;
        let h = 1.0 / n as f64;
        let mut simpson = f(0.0) + f(1.0);
        for i in 1..n {
            simpson += f(i as f64 * h) * if i % 2 == 0 { 2.0 } else { 4.0 };
        }
        simpson *= h / 3.0;
        let gauss = integrate_01(40, f);
        assert!((gauss - simpson).abs() < 1e-10);
    }
}
