//! Dense symmetric matrices indexed by bit-string labels.

mod eigen;

use std::collections::HashSet;

pub use eigen::{
    jacobi_eigen, principal_eigenvector, shifted_power_iteration, spectral_norm, Eigen,
    SpectralResult, JACOBI_MAX_DIM,
};
pub(crate) use eigen::jacobi_dense;

use crate::boolfn::BitString;
use crate::error::{Error, Result};

/// A real symmetric matrix whose rows and columns are named by bit strings.
///
/// Storage is a dense row-major square; every write goes to both `(r, c)`
/// and `(c, r)`, so symmetry holds exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    labels: Vec<BitString>,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(labels: Vec<BitString>) -> Result<Self> {
        check_labels(&labels)?;
        let n = labels.len();
        Ok(SymMatrix {
            labels,
            data: vec![0.0; n * n],
        })
    }

    /// Fills the upper triangle from `entry(r, c)` (with `r <= c`) and mirrors it.
    pub fn from_fn(labels: Vec<BitString>, mut entry: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(labels)?;
        let n = m.dim();
        for r in 0..n {
            for c in r..n {
                m.set(r, c, entry(r, c));
            }
        }
        Ok(m)
    }

    /// Builds from full rows, requiring exact symmetry and finite entries.
    pub fn from_rows(labels: Vec<BitString>, rows: &[Vec<f64>]) -> Result<Self> {
        let n = labels.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Mismatch(format!(
                "expected a {n}x{n} matrix for {n} labels"
            )));
        }
        for r in 0..n {
            for c in 0..n {
                if !rows[r][c].is_finite() {
                    return Err(Error::NonFinite { row: r, col: c });
                }
                if rows[r][c] != rows[c][r] {
                    return Err(Error::Asymmetric { row: r, col: c });
                }
            }
        }
        Self::from_fn(labels, |r, c| rows[r][c])
    }

    pub fn all_ones(labels: Vec<BitString>) -> Result<Self> {
        Self::from_fn(labels, |_, _| 1.0)
    }

    pub fn identity(labels: Vec<BitString>) -> Result<Self> {
        Self::from_fn(labels, |r, c| if r == c { 1.0 } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[BitString] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim() + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let n = self.dim();
        self.data[r * n + c] = v;
        self.data[c * n + r] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.dim();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn entries(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.data.iter().all(|&v| v >= 0.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_row_sum(&self) -> f64 {
        (0..self.dim())
            .map(|r| self.row(r).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, a: f64) -> SymMatrix {
        SymMatrix {
            labels: self.labels.clone(),
            data: self.data.iter().map(|v| v * a).collect(),
        }
    }

    /// `self + shift·I`.
    pub fn shifted(&self, shift: f64) -> SymMatrix {
        let mut out = self.clone();
        for r in 0..self.dim() {
            let v = out.get(r, r) + shift;
            out.set(r, r, v);
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim())
            .map(|r| self.row(r).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row index of a label.
    pub fn position(&self, label: &BitString) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Same entries under new labels (same count, distinct, equal length).
    pub fn relabeled(&self, labels: Vec<BitString>) -> Result<SymMatrix> {
        if labels.len() != self.dim() {
            return Err(Error::Mismatch("relabel with a different number of labels".into()));
        }
        check_labels(&labels)?;
        Ok(SymMatrix {
            labels,
            data: self.data.clone(),
        })
    }
}

fn check_labels(labels: &[BitString]) -> Result<()> {
    if let Some(first) = labels.first() {
        if let Some(bad) = labels.iter().find(|l| l.len() != first.len()) {
            return Err(Error::Mismatch(format!(
                "label {bad} has length {} but {first} has length {}",
                bad.len(),
                first.len()
            )));
        }
    }
    let mut seen = HashSet::with_capacity(labels.len());
    if let Some(dup) = labels.iter().find(|l| !seen.insert(*l)) {
        return Err(Error::Mismatch(format!("duplicate label {dup}")));
    }
    Ok(())
}

/// Entrywise product `a ∘ b`.
pub fn hadamard(a: &SymMatrix, b: &SymMatrix) -> Result<SymMatrix> {
    if a.labels != b.labels {
        return Err(Error::Mismatch(format!(
            "hadamard of {}x{} and {}x{} matrices with different labels",
            a.dim(),
            a.dim(),
            b.dim(),
            b.dim()
        )));
    }
    Ok(SymMatrix {
        labels: a.labels.clone(),
        data: a.data.iter().zip(&b.data).map(|(x, y)| x * y).collect(),
    })
}

/// `D_i[x, y] = 1` iff `x` and `y` differ in (1-based) bit `i`.
pub fn difference_mask(labels: &[BitString], i: usize) -> Result<SymMatrix> {
    let len = labels.first().map_or(0, BitString::len);
    if i == 0 || i > len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    SymMatrix::from_fn(labels.to_vec(), |r, c| {
        if labels[r].bits()[i - 1] != labels[c].bits()[i - 1] {
            1.0
        } else {
            0.0
        }
    })
}

/// `a ∘ D_i` without materialising the mask.
pub fn mask_bit(a: &SymMatrix, i: usize) -> Result<SymMatrix> {
    let len = a.labels.first().map_or(0, BitString::len);
    if i == 0 || i > len {
        return Err(Error::IndexOutOfRange { index: i, len });
    }
    let mut out = a.clone();
    let n = a.dim();
    for r in 0..n {
        for c in r..n {
            if a.labels[r].bits()[i - 1] == a.labels[c].bits()[i - 1] {
                out.set(r, c, 0.0);
            }
        }
    }
    Ok(out)
}
