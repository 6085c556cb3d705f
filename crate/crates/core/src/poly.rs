//! Small helpers for polynomials in monomial form, coefficients low to high.

/// Horner evaluation.
pub fn eval(coeffs: &[f64], t: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

/// Antiderivative with zero constant term.
pub fn antiderivative(coeffs: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(coeffs.len() + 1);
    out.push(0.0);
    out.extend(
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| c / (k as f64 + 1.0)),
    );
    out
}

pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `∫₀¹ p(t) dt`.
pub fn integral_01(coeffs: &[f64]) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .map(|(k, &c)| c / (k as f64 + 1.0))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_and_integrate() {
        // p(t) = 1 - 2t + 3t²
        let p = [1.0, -2.0, 3.0];
        assert!((eval(&p, 0.0) - 1.0).abs() < 1e-15);
        assert!((eval(&p, 1.0) - 2.0).abs() < 1e-15);
        assert!((integral_01(&p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn antiderivative_shifts_and_scales() {
        let p = [2.0, 6.0];
        let ad = antiderivative(&p);
        assert_eq!(ad, vec![0.0, 2.0, 3.0]);
    }

    #[test]
    fn product_degree() {
        let a = [1.0, 1.0];
        let b = [1.0, -1.0];
        assert_eq!(mul(&a, &b), vec![1.0, 0.0, -1.0]);
    }
}
