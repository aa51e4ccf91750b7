//! Symmetric eigensolvers: cyclic Jacobi for small matrices, shifted power
//! iteration for large nonnegative ones.

use super::SymMatrix;
use crate::error::{Error, Result};

/// Largest dimension handled by the Jacobi solver.
pub const JACOBI_MAX_DIM: usize = 256;

const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 100_000;
/// Eigenvalues closer than this (relative) are treated as one eigenspace.
const DEGENERACY_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-9;

/// Full eigendecomposition; `vectors[j]` belongs to `values[j]`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// `max |λ|`.
    pub norm: f64,
    /// The (signed) eigenvalue the vector belongs to.
    pub eigenvalue: f64,
    /// Unit eigenvector, oriented so its largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    /// `‖A v − λ v‖₂`.
    pub residual: f64,
}

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// `1e-12·‖A‖_F`.
pub fn jacobi_eigen(a: &SymMatrix) -> Result<Eigen> {
    jacobi_dense(a.entries(), a.dim())
}

/// [`jacobi_eigen`] on a row-major symmetric `n×n` buffer.
pub(crate) fn jacobi_dense(entries: &[f64], n: usize) -> Result<Eigen> {
    let mut m = entries.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = entries.iter().map(|x| x * x).sum::<f64>().sqrt();
    let off = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    s += m[p * n + q] * m[p * n + q];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = scale == 0.0 || off(&m) <= JACOBI_TOL * scale;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        for p in 0..n.saturating_sub(1) {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let (kp, kq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * kp - s * kq;
                    v[k * n + q] = s * kp + c * kq;
                }
            }
        }
        sweeps += 1;
        converged = off(&m) <= JACOBI_TOL * scale;
    }

    let eigen = Eigen {
        values: (0..n).map(|i| m[i * n + i]).collect(),
        vectors: (0..n)
            .map(|j| (0..n).map(|k| v[k * n + j]).collect())
            .collect(),
    };
    if !converged {
        let residual = (0..n)
            .map(|j| {
                let x = &eigen.vectors[j];
                (0..n)
                    .map(|r| {
                        let ax: f64 = (0..n).map(|c| entries[r * n + c] * x[c]).sum();
                        (ax - eigen.values[j] * x[r]).powi(2)
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        return Err(Error::NonConvergence { residual });
    }
    Ok(eigen)
}

fn residual(a: &SymMatrix, lambda: f64, x: &[f64]) -> f64 {
    a.mul_vec(x)
        .iter()
        .zip(x)
        .map(|(ax, xi)| (ax - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
    norm
}

/// Flips the sign so the entry of largest magnitude is positive (ties go to
/// the lowest index).
fn orient(x: &mut [f64]) {
    let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if let Some(lead) = x.iter().find(|v| v.abs() >= max - 1e-12) {
        if *lead < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Picks the eigenpair for `target` out of a decomposition. A degenerate
/// eigenspace of a nonnegative matrix is resolved by projecting the all-ones
/// vector onto it, which lands on a nonnegative combination of Perron vectors.
fn pick(a: &SymMatrix, eigen: &Eigen, target: usize) -> SpectralResult {
    let n = a.dim();
    let lambda = eigen.values[target];
    let tol = DEGENERACY_TOL * lambda.abs().max(1.0);
    let space: Vec<usize> = (0..n)
        .filter(|&j| (eigen.values[j] - lambda).abs() <= tol)
        .collect();
    let mut vector = eigen.vectors[target].clone();
    if space.len() > 1 && a.is_nonnegative() {
        let mut proj = vec![0.0; n];
        for &j in &space {
            let w = &eigen.vectors[j];
            let coef: f64 = w.iter().sum();
            proj.iter_mut().zip(w).for_each(|(p, wi)| *p += coef * wi);
        }
        if normalize(&mut proj) > 1e-8 {
            vector = proj;
        }
    }
    orient(&mut vector);
    SpectralResult {
        norm: lambda.abs(),
        eigenvalue: lambda,
        residual: residual(a, lambda, &vector),
        vector,
    }
}

fn check_finite(a: &SymMatrix) -> Result<()> {
    let n = a.dim();
    match a.entries().iter().position(|v| !v.is_finite()) {
        Some(k) => Err(Error::NonFinite {
            row: k / n,
            col: k % n,
        }),
        None => Ok(()),
    }
}

fn empty() -> SpectralResult {
    SpectralResult {
        norm: 0.0,
        eigenvalue: 0.0,
        vector: Vec::new(),
        residual: 0.0,
    }
}

/// `‖A‖ = max |λ|` with an eigenvector. When `λ` and `−λ` both attain the
/// norm the positive one is returned.
pub fn spectral_norm(a: &SymMatrix) -> Result<SpectralResult> {
    check_finite(a)?;
    if a.dim() == 0 {
        return Ok(empty());
    }
    if a.dim() > JACOBI_MAX_DIM && a.is_nonnegative() {
        return shifted_power_iteration(a);
    }
    let eigen = jacobi_eigen(a)?;
    let max = eigen.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = DEGENERACY_TOL * max.max(1.0);
    let target = (0..a.dim())
        .filter(|&j| eigen.values[j].abs() >= max - tol)
        .max_by(|&i, &j| eigen.values[i].total_cmp(&eigen.values[j]).then(j.cmp(&i)))
        .expect("nonempty");
    let mut out = pick(a, &eigen, target);
    out.norm = max;
    Ok(out)
}

/// Unit eigenvector of the largest eigenvalue of an entrywise-nonnegative
/// matrix, oriented nonnegative.
pub fn principal_eigenvector(a: &SymMatrix) -> Result<SpectralResult> {
    check_finite(a)?;
    let n = a.dim();
    if let Some(k) = a.entries().iter().position(|&v| v < 0.0) {
        return Err(Error::Negative {
            row: k / n,
            col: k % n,
        });
    }
    if n == 0 {
        return Ok(empty());
    }
    if n > JACOBI_MAX_DIM {
        return shifted_power_iteration(a);
    }
    let eigen = jacobi_eigen(a)?;
    let target = (0..n)
        .max_by(|&i, &j| eigen.values[i].total_cmp(&eigen.values[j]).then(j.cmp(&i)))
        .expect("nonempty");
    let mut out = pick(a, &eigen, target);
    out.norm = out.eigenvalue.abs();
    Ok(out)
}

/// Power iteration on `A + cI` with `c` the maximal absolute row sum, for
/// nonnegative `A`. Starting from the all-ones vector it converges to the
/// Perron root even when `A` is bipartite.
pub fn shifted_power_iteration(a: &SymMatrix) -> Result<SpectralResult> {
    let n = a.dim();
    if n == 0 {
        return Ok(empty());
    }
    if !a.is_nonnegative() {
        return Err(Error::Mismatch(
            "power iteration requires a nonnegative matrix".into(),
        ));
    }
    let shift = a.max_row_sum();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    if shift == 0.0 {
        return Ok(SpectralResult {
            norm: 0.0,
            eigenvalue: 0.0,
            vector: x,
            residual: 0.0,
        });
    }
    let mut converged = false;
    for _ in 0..POWER_MAX_ITERS {
        let mut y = a.mul_vec(&x);
        y.iter_mut().zip(&x).for_each(|(yi, xi)| *yi += shift * xi);
        normalize(&mut y);
        let delta = y
            .iter()
            .zip(&x)
            .map(|(p, q)| (p - q).powi(2))
            .sum::<f64>()
            .sqrt();
        x = y;
        if delta < POWER_TOL {
            converged = true;
            break;
        }
    }
    let ax = a.mul_vec(&x);
    let lambda: f64 = ax.iter().zip(&x).map(|(p, q)| p * q).sum();
    let res = residual(a, lambda, &x);
    if !converged && res > RESIDUAL_TOL * lambda.max(1.0) {
        return Err(Error::NonConvergence { residual: res });
    }
    orient(&mut x);
    Ok(SpectralResult {
        norm: lambda.abs(),
        eigenvalue: lambda,
        vector: x,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::BitString;

    fn labels(n: usize, len: usize) -> Vec<BitString> {
        (0..n).map(|i| BitString::from_index(i, len)).collect()
    }

    fn gadget(b1: f64, b2: f64) -> SymMatrix {
        let mut m = SymMatrix::zeros(labels(4, 2)).unwrap();
        m.set(1, 3, b1);
        m.set(2, 3, b2);
        m
    }

    #[test]
    fn identity_has_norm_one() {
        let r = spectral_norm(&SymMatrix::identity(labels(2, 1)).unwrap()).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gadget_three_four() {
        let r = spectral_norm(&gadget(3.0, 4.0)).unwrap();
        assert!((r.norm - 5.0).abs() < 1e-12);
        assert!(r.residual < 1e-9 * 5.0);
    }

    #[test]
    fn swap_matrix() {
        let m = SymMatrix::from_rows(labels(2, 1), &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        for r in [spectral_norm(&m).unwrap(), principal_eigenvector(&m).unwrap()] {
            assert!((r.norm - 1.0).abs() < 1e-14);
            let h = 1.0 / 2f64.sqrt();
            assert!((r.vector[0] - h).abs() < 1e-12 && (r.vector[1] - h).abs() < 1e-12);
        }
    }

    #[test]
    fn gadget_unit_eigenvector() {
        // eigenvector supported on {01, 10, 11} with entries (1/2, 1/2, 1/√2)
        let r = principal_eigenvector(&gadget(1.0, 1.0)).unwrap();
        assert!((r.eigenvalue - 2f64.sqrt()).abs() < 1e-12);
        let expect = [0.0, 0.5, 0.5, 1.0 / 2f64.sqrt()];
        for (got, want) in r.vector.iter().zip(expect) {
            assert!((got - want).abs() < 1e-10, "{:?}", r.vector);
        }
    }

    #[test]
    fn zero_matrix() {
        let z = SymMatrix::zeros(labels(3, 2)).unwrap();
        assert_eq!(principal_eigenvector(&z).unwrap().norm, 0.0);
        assert_eq!(spectral_norm(&z).unwrap().norm, 0.0);
    }

    #[test]
    fn negative_eigenvalue_dominates() {
        let m = SymMatrix::from_rows(labels(2, 1), &[vec![-3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = spectral_norm(&m).unwrap();
        assert!((r.norm - 3.0).abs() < 1e-14);
        assert!((r.eigenvalue + 3.0).abs() < 1e-14);
        assert!(principal_eigenvector(&m).is_err());
    }

    #[test]
    fn degenerate_perron_space_is_nonnegative() {
        // two disjoint edges with equal weight
        let mut m = SymMatrix::zeros(labels(4, 2)).unwrap();
        m.set(0, 1, 1.0);
        m.set(2, 3, 1.0);
        let r = principal_eigenvector(&m).unwrap();
        assert!(r.vector.iter().all(|&v| v >= -1e-10), "{:?}", r.vector);
        assert!(r.residual < 1e-12);
    }

    #[test]
    fn jacobi_reconstructs() {
        let m = SymMatrix::from_fn(labels(6, 3), |r, c| ((r * 7 + c * 3) % 5) as f64 - 1.5).unwrap();
        let e = jacobi_eigen(&m).unwrap();
        for (lambda, v) in e.values.iter().zip(&e.vectors) {
            assert!(residual(&m, *lambda, v) < 1e-12 * m.frobenius().max(1.0));
        }
    }

    #[test]
    fn power_iteration_agrees_with_jacobi() {
        let m = SymMatrix::from_fn(labels(20, 5), |r, c| {
            if (r + c) % 2 == 1 {
                1.0 + ((r * c) % 3) as f64
            } else {
                0.0
            }
        })
        .unwrap();
        let p = shifted_power_iteration(&m).unwrap();
        let j = principal_eigenvector(&m).unwrap();
        assert!((p.norm - j.norm).abs() < 1e-9 * j.norm);
        assert!(p.residual < 1e-8 * j.norm);
    }

    #[test]
    fn large_all_ones_uses_power_iteration() {
        let n = 300;
        let m = SymMatrix::all_ones(labels(n, 9)).unwrap();
        let r = spectral_norm(&m).unwrap();
        assert!((r.norm - n as f64).abs() < 1e-9 * n as f64);
        assert!(r.residual <= 1e-9 * n as f64);
    }
}
