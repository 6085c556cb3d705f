//! Dense kernels for the encoders: pseudo-inverses, nullspace bases, regular
//! simplexes, a generalized symmetric eigensolver and shifted Legendre bases.
//!
//! Everything here is deterministic: identical input bytes produce identical
//! output bytes, which the solvers rely on for reproducible restarts.

pub mod exact;
pub mod quad;

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient (condition estimate {cond:.3e})")]
    RankDeficient { cond: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotSpd,
    #[error("nullspace too small to encode {messages} messages (dimension {dim})")]
    CapacityTooSmall { dim: usize, messages: usize },
    #[error("system too ill-conditioned to solve reliably (condition estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error("{0}")]
    BadInput(String),
}

/// Relative singular-value cutoff used for rank decisions.
const RANK_TOL: f64 = 1e-10;
/// Condition-number guard: float solves refuse to silently lose digits.
const COND_GUARD: f64 = 1e12;

/// Orthonormal basis of the nullspace of a full-row-rank matrix.
///
/// Columns satisfy `ZᵀZ = I` and `LZ = 0`; the construction is a fixed
/// Gram-Schmidt sweep so the basis is reproducible bit-for-bit.
#[derive(Debug, Clone)]
pub struct NullspaceBasis {
    z: DMatrix<f64>,
}

impl NullspaceBasis {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.z
    }

    /// Ambient dimension (rows of `Z`).
    pub fn ambient(&self) -> usize {
        self.z.nrows()
    }

    /// Nullspace dimension (columns of `Z`).
    pub fn dim(&self) -> usize {
        self.z.ncols()
    }

    /// Embeds nullspace coordinates into the ambient space.
    pub fn embed(&self, coords: &DVector<f64>) -> DVector<f64> {
        &self.z * coords
    }
}

fn condition_estimate(m: &DMatrix<f64>) -> (f64, f64, f64) {
    let svd = m.clone().svd(false, false);
    let max = svd.singular_values.max();
    let min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    (cond, max, min)
}

fn require_full_row_rank(l: &DMatrix<f64>) -> Result<(), Error> {
    if l.nrows() == 0 || l.ncols() < l.nrows() {
        return Err(Error::BadInput(format!(
            "expected a wide full-row-rank matrix, got {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    let (cond, max, min) = condition_estimate(l);
    // NaN singular values count as rank deficient.
    if min.is_nan() || min <= RANK_TOL * max {
        return Err(Error::RankDeficient { cond });
    }
    Ok(())
}

/// Right pseudo-inverse `Lᵀ(LLᵀ)⁻¹` of a full-row-rank matrix, so that
/// `L · pinv_rows(L) = I`.
pub fn pinv_rows(l: &DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
    require_full_row_rank(l)?;
    let gram = l * l.transpose();
    let chol = nalgebra::Cholesky::new(gram).ok_or(Error::NotSpd)?;
    Ok(chol.solve(l).transpose())
}

/// Weighted pseudo-inverse `Q⁻¹Lᵀ(LQ⁻¹Lᵀ)⁻¹` for symmetric positive definite
/// `Q`: among all `a` with `La = x`, `a = weighted_pinv(L,Q) · x` minimizes
/// `aᵀQa`.
pub fn weighted_pinv(l: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<DMatrix<f64>, Error> {
    require_full_row_rank(l)?;
    if q.nrows() != q.ncols() || q.nrows() != l.ncols() {
        return Err(Error::BadInput(format!(
            "weight matrix {}x{} does not match {} columns",
            q.nrows(),
            q.ncols(),
            l.ncols()
        )));
    }
    let sym_err = (q - q.transpose()).amax();
    if sym_err > 1e-12 * (1.0 + q.amax()) {
        return Err(Error::BadInput(
            "weight matrix is not symmetric".to_string(),
        ));
    }
    let chol = nalgebra::Cholesky::new(q.clone()).ok_or(Error::NotSpd)?;
    let qinv_lt = chol.solve(&l.transpose());
    let small = l * &qinv_lt;
    let (cond, _, _) = condition_estimate(&small);
    if cond > COND_GUARD {
        return Err(Error::IllConditioned { cond });
    }
    let small_chol = nalgebra::Cholesky::new(small).ok_or(Error::NotSpd)?;
    Ok(qinv_lt * small_chol.inverse())
}

/// Orthonormal nullspace basis of a full-row-rank matrix.
///
/// Sweeps the standard basis vectors in index order, projecting out the row
/// space and the columns already accepted; two Gram-Schmidt passes keep
/// orthogonality near machine precision. The fixed sweep order makes the
/// result deterministic.
pub fn nullspace_basis(l: &DMatrix<f64>) -> Result<NullspaceBasis, Error> {
    require_full_row_rank(l)?;
    let ambient = l.ncols();
    let rank = l.nrows();

    // Orthonormal basis of the row space.
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(ambient);
    for i in 0..rank {
        let mut v: DVector<f64> = l.row(i).transpose();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm <= RANK_TOL {
            return Err(Error::RankDeficient { cond: f64::INFINITY });
        }
        basis.push(v / norm);
    }

    // Extend with standard basis vectors; the survivors span the nullspace.
    let mut null_cols: Vec<DVector<f64>> = Vec::with_capacity(ambient - rank);
    for k in 0..ambient {
        if basis.len() == ambient {
            break;
        }
        let mut v = DVector::zeros(ambient);
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dot(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            let v = v / norm;
            basis.push(v.clone());
            null_cols.push(v);
        }
    }
    debug_assert_eq!(null_cols.len(), ambient - rank);
    let z = DMatrix::from_columns(&null_cols);
    Ok(NullspaceBasis { z })
}

/// Vertices of a regular `(m-1)`-simplex centered at the origin of `R^d`:
/// `m` vectors with pairwise distance `separation`, each of norm
/// `sqrt((m-1)/(2m)) · separation`, summing to zero.
///
/// The orientation is the canonical Helmert embedding (vertex `j` is column
/// `j` of the Helmert submatrix, scaled), so output is deterministic. For
/// `m = 1` the single "vertex" is the origin.
pub fn regular_simplex(d: usize, m: usize, separation: f64) -> Result<Vec<DVector<f64>>, Error> {
    if m == 0 {
        return Err(Error::BadInput("need at least one vertex".to_string()));
    }
    if separation <= 0.0 {
        return Err(Error::BadInput("separation must be positive".to_string()));
    }
    if d + 1 < m {
        return Err(Error::CapacityTooSmall {
            dim: d,
            messages: m,
        });
    }
    let scale = separation / std::f64::consts::SQRT_2;
    let mut vertices = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = DVector::zeros(d);
        // Row k of the Helmert matrix: k ones then -k, normalized.
        for k in 1..m {
            let denom = ((k * (k + 1)) as f64).sqrt();
            let entry = if j < k {
                1.0 / denom
            } else if j == k {
                -(k as f64) / denom
            } else {
                0.0
            };
            v[k - 1] = entry * scale;
        }
        vertices.push(v);
    }
    Ok(vertices)
}

/// Smallest generalized eigenpair of `Aq v = λ Br v` for symmetric positive
/// semidefinite `Aq` and symmetric positive definite `Br`. The eigenvector is
/// normalized so `vᵀ Br v = 1` and its largest-magnitude entry is positive.
pub fn gen_eig_min(aq: &DMatrix<f64>, br: &DMatrix<f64>) -> Result<(f64, DVector<f64>), Error> {
    if aq.nrows() != aq.ncols() || br.nrows() != br.ncols() || aq.nrows() != br.nrows() {
        return Err(Error::BadInput("matrices must be square and equal-sized".to_string()));
    }
    let chol = nalgebra::Cholesky::new(br.clone()).ok_or(Error::NotSpd)?;
    let lower = chol.l();
    // C = L⁻¹ Aq L⁻ᵀ, symmetrized against rounding.
    let tmp = lower
        .solve_lower_triangular(aq)
        .ok_or(Error::NotSpd)?
        .transpose();
    let c = lower.solve_lower_triangular(&tmp).ok_or(Error::NotSpd)?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(c);
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("non-empty spectrum");
    let w = eig.eigenvectors.column(idx).into_owned();
    let mut v = lower
        .transpose()
        .solve_upper_triangular(&w)
        .ok_or(Error::NotSpd)?;
    // Fix the sign so the result is canonical.
    let pivot = v.iter().cloned().fold(0.0_f64, |acc, x| {
        if x.abs() > acc.abs() {
            x
        } else {
            acc
        }
    });
    if pivot < 0.0 {
        v = -v;
    }
    Ok((lambda, v))
}

/// Monomial coefficients (length `ambient_degree + 1`) of the degree-`k`
/// shifted Legendre polynomial on `[0,1]`, normalized to 1 at the right
/// endpoint.
pub fn shifted_legendre(k: usize, ambient_degree: usize) -> Result<DVector<f64>, Error> {
    if k > ambient_degree {
        return Err(Error::BadInput(format!(
            "degree {k} exceeds ambient degree {ambient_degree}"
        )));
    }
    let coeffs = exact::shifted_legendre_coeffs(k);
    let mut v = DVector::zeros(ambient_degree + 1);
    for (j, c) in coeffs.iter().enumerate() {
        v[j] = c.to_f64().expect("legendre coefficient out of f64 range");
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
        DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn pinv_rows_identity_cases() {
        let l = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let p = pinv_rows(&l).unwrap();
        assert_eq!(p.nrows(), 3);
        assert!((p[(0, 0)] - 1.0).abs() < 1e-14);
        assert!(p[(1, 0)].abs() < 1e-14 && p[(2, 0)].abs() < 1e-14);

        let eye = DMatrix::<f64>::identity(3, 3);
        let p = pinv_rows(&eye).unwrap();
        assert!((&p - &eye).amax() < 1e-12);
    }

    #[test]
    fn pinv_rows_is_right_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let l = random_matrix(&mut rng, 2, 5);
            let p = pinv_rows(&l).unwrap();
            let residual = (&l * &p - DMatrix::<f64>::identity(2, 2)).amax();
            assert!(residual < 1e-10, "residual {residual}");
        }
    }

    #[test]
    fn pinv_rows_rejects_rank_deficient() {
        let l = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0]);
        assert!(matches!(pinv_rows(&l), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn weighted_pinv_reduces_to_unweighted() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = random_matrix(&mut rng, 2, 6);
        let q = DMatrix::<f64>::identity(6, 6);
        let a = weighted_pinv(&l, &q).unwrap();
        let b = pinv_rows(&l).unwrap();
        assert!((&a - &b).amax() < 1e-12);
    }

    #[test]
    fn weighted_pinv_minimizes_weighted_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let l = random_matrix(&mut rng, 2, 5);
            let g = random_matrix(&mut rng, 5, 5);
            let q = &g * g.transpose() + DMatrix::<f64>::identity(5, 5);
            let w = weighted_pinv(&l, &q).unwrap();
            let x = DVector::from_fn(2, |_, _| rng.random_range(-1.0..1.0));
            let a = &w * &x;
            assert!((&l * &a - &x).amax() < 1e-10);
            let base = (a.transpose() * &q * &a)[(0, 0)];
            let z = nullspace_basis(&l).unwrap();
            for _ in 0..20 {
                let coords = DVector::from_fn(z.dim(), |_, _| rng.random_range(-1.0..1.0));
                let perturbed = &a + z.embed(&coords);
                let cost = (perturbed.transpose() * &q * &perturbed)[(0, 0)];
                assert!(cost >= base - 1e-9 * (1.0 + base.abs()));
            }
        }
    }

    #[test]
    fn weighted_pinv_first_order_steering_is_constant() {
        // L = first Hilbert row, Q = Hilbert: the cheapest polynomial
        // reaching endpoint c is the constant c.
        let n = 5;
        let q = exact::hilbert(n).to_f64();
        let l = DMatrix::from_fn(1, n, |_, j| q[(0, j)]);
        let w = weighted_pinv(&l, &q).unwrap();
        let c = 2.5;
        let a = &w * DVector::from_element(1, c);
        assert!((a[0] - c).abs() < 1e-9);
        for k in 1..n {
            assert!(a[k].abs() < 1e-9, "coefficient {k} = {}", a[k]);
        }
    }

    #[test]
    fn weighted_pinv_rejects_non_spd() {
        let l = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(weighted_pinv(&l, &q), Err(Error::NotSpd)));
    }

    #[test]
    fn nullspace_of_coordinate_row() {
        let l = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let z = nullspace_basis(&l).unwrap();
        assert_eq!(z.dim(), 2);
        // Canonical sweep picks e2, e3.
        assert!((z.matrix()[(1, 0)] - 1.0).abs() < 1e-14);
        assert!((z.matrix()[(2, 1)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nullspace_invariants_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let l = random_matrix(&mut rng, 3, 8);
            let z = nullspace_basis(&l).unwrap();
            assert_eq!(z.dim(), 5);
            let ortho = (z.matrix().transpose() * z.matrix() - DMatrix::<f64>::identity(5, 5)).amax();
            assert!(ortho < 1e-10);
            let lz = (&l * z.matrix()).amax();
            assert!(lz < 1e-10);
        }
    }

    #[test]
    fn nullspace_is_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let l = random_matrix(&mut rng, 2, 6);
        let z1 = nullspace_basis(&l).unwrap();
        let z2 = nullspace_basis(&l).unwrap();
        assert_eq!(z1.matrix().as_slice(), z2.matrix().as_slice());
    }

    #[test]
    fn simplex_two_points() {
        let v = regular_simplex(2, 2, 1.0).unwrap();
        assert!((v[0][0] - 0.5).abs() < 1e-12 && v[0][1].abs() < 1e-15);
        assert!((v[1][0] + 0.5).abs() < 1e-12 && v[1][1].abs() < 1e-15);
    }

    #[test]
    fn simplex_triangle_norms() {
        let v = regular_simplex(2, 3, 1.0).unwrap();
        for p in &v {
            assert!((p.norm() - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(((&v[i] - &v[j]).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn simplex_single_message() {
        let v = regular_simplex(3, 1, 0.5).unwrap();
        assert_eq!(v.len(), 1);
        assert!(v[0].norm() < 1e-15);
    }

    #[test]
    fn simplex_capacity_error() {
        assert!(matches!(
            regular_simplex(1, 3, 1.0),
            Err(Error::CapacityTooSmall { .. })
        ));
    }

    #[test]
    fn simplex_invariants_random_sizes() {
        for m in 1..=6 {
            for d in (m.max(2) - 1)..=(m + 3) {
                let eps = 0.37;
                let v = regular_simplex(d, m, eps).unwrap();
                let mut sum = DVector::zeros(d);
                let want_norm = ((m as f64 - 1.0) / (2.0 * m as f64)).sqrt() * eps;
                for p in &v {
                    sum += p;
                    assert!((p.norm() - want_norm).abs() < 1e-10);
                }
                assert!(sum.amax() < 1e-10);
                for i in 0..m {
                    for j in (i + 1)..m {
                        assert!(((&v[i] - &v[j]).norm() - eps).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn gen_eig_identity_pair() {
        let eye = DMatrix::<f64>::identity(3, 3);
        let (lambda, v) = gen_eig_min(&eye, &eye).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!(((v.transpose() * &eye * &v)[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gen_eig_diagonal_case() {
        let aq = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let br = DMatrix::<f64>::identity(2, 2);
        let (lambda, v) = gen_eig_min(&aq, &br).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!((v[0].abs() - 1.0).abs() < 1e-10 && v[1].abs() < 1e-10);
    }

    #[test]
    fn gen_eig_residual_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4, 4);
            let aq = &a * a.transpose();
            let b = random_matrix(&mut rng, 4, 4);
            let br = &b * b.transpose() + DMatrix::<f64>::identity(4, 4) * 0.5;
            let (lambda, v) = gen_eig_min(&aq, &br).unwrap();
            let residual = (&aq * &v - &br * &v * lambda).norm();
            assert!(residual < 1e-9, "residual {residual}");
            // λ_min is a lower bound of the Rayleigh quotient over random samples.
            for _ in 0..50 {
                let w = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
                let num = (w.transpose() * &aq * &w)[(0, 0)];
                let den = (w.transpose() * &br * &w)[(0, 0)];
                assert!(num / den >= lambda - 1e-9);
            }
        }
    }

    #[test]
    fn shifted_legendre_values() {
        let p0 = shifted_legendre(0, 3).unwrap();
        assert_eq!(p0.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
        let p1 = shifted_legendre(1, 3).unwrap();
        assert_eq!(p1.as_slice(), &[-1.0, 2.0, 0.0, 0.0]);
        assert!(shifted_legendre(4, 3).is_err());
    }
}
