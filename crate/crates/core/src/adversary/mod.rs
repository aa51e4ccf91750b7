//! Adversary matrices with costs and the two bound values built on them:
//!
//! * `ADV_α` evaluated at a fixed `Γ`: `min_i α_i ‖Γ‖ / ‖Γ∘D_i‖`;
//! * `MM_α` evaluated at a fixed set of distributions `p`:
//!   `max_{f(x)≠f(y)} 1 / Σ_{i: x_i≠y_i} √(p_x(i) p_y(i)) / α_i`.
//!
//! Any valid `Γ` gives a lower bound on the optimum and any valid `p` an upper
//! bound, so `adv_value(Γ, α) <= mm_value(p, α)` for every pair.

mod compose;

use serde::{Deserialize, Serialize};

pub use compose::{
    compose_eigenvector, compose_gamma, compose_minimax, masked_compose_check, MaskedCheckReport,
};

use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};
use crate::specmat::{mask_bit, spectral_norm, SpectralResult, SymMatrix};

/// Strictly positive, finite per-bit query costs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct CostVector(Vec<f64>);

impl CostVector {
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        if costs.is_empty() {
            return Err(Error::InvalidCost("empty cost vector".into()));
        }
        if let Some((i, c)) = costs.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(Error::InvalidCost(format!(
                "cost {} of bit {} is not a positive finite number",
                c,
                i + 1
            )));
        }
        Ok(CostVector(costs))
    }

    pub fn ones(n: usize) -> Self {
        CostVector(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn scaled(&self, a: f64) -> Result<CostVector> {
        CostVector::new(self.0.iter().map(|c| c * a).collect())
    }

    /// Costs of bits `start..start + len` (0-based).
    pub fn block(&self, start: usize, len: usize) -> CostVector {
        CostVector(self.0[start..start + len].to_vec())
    }
}

impl TryFrom<Vec<f64>> for CostVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        CostVector::new(v)
    }
}

impl From<CostVector> for Vec<f64> {
    fn from(c: CostVector) -> Self {
        c.0
    }
}

/// A symmetric matrix over the domain of `function`.
///
/// Construction only checks that the labels are the function's domain in
/// order; the adversary conditions are checked by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryMatrix {
    function: BooleanFunction,
    matrix: SymMatrix,
}

impl AdversaryMatrix {
    pub fn new(function: BooleanFunction, matrix: SymMatrix) -> Result<Self> {
        if matrix.labels() != function.domain() {
            return Err(Error::Mismatch(
                "matrix labels differ from the function domain".into(),
            ));
        }
        Ok(AdversaryMatrix { function, matrix })
    }

    pub fn zero(function: BooleanFunction) -> Result<Self> {
        let matrix = SymMatrix::zeros(function.domain().to_vec())?;
        Ok(AdversaryMatrix { function, matrix })
    }

    /// Weight `weight(r, c)` on every differing-output pair `r < c`, zero elsewhere.
    pub fn from_pair_weights(
        function: BooleanFunction,
        mut weight: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let matrix = SymMatrix::from_fn(function.domain().to_vec(), |r, c| {
            if function.value_at(r) != function.value_at(c) {
                weight(r, c)
            } else {
                0.0
            }
        })?;
        Ok(AdversaryMatrix { function, matrix })
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn into_parts(self) -> (BooleanFunction, SymMatrix) {
        (self.function, self.matrix)
    }

    /// `‖Γ‖` and `‖Γ∘D_i‖` for every bit.
    pub fn mask_norms(&self) -> Result<MaskNorms> {
        let norm = spectral_norm(&self.matrix)?.norm;
        let masked = (1..=self.function.arity())
            .map(|i| Ok(spectral_norm(&mask_bit(&self.matrix, i)?)?.norm))
            .collect::<Result<_>>()?;
        Ok(MaskNorms { norm, masked })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskNorms {
    pub norm: f64,
    pub masked: Vec<f64>,
}

impl MaskNorms {
    /// `min_i α_i ‖Γ‖/‖Γ∘D_i‖`, skipping bits with `‖Γ∘D_i‖ = 0`.
    pub fn value(&self, alpha: &CostVector) -> f64 {
        if self.norm == 0.0 {
            return 0.0;
        }
        self.masked
            .iter()
            .zip(alpha.as_slice())
            .filter(|(m, _)| **m > 0.0)
            .map(|(m, a)| a * (self.norm / m))
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Nonzero entry on a pair with equal outputs.
    SameOutput { x: String, y: String, value: f64 },
    Negative { x: String, y: String, value: f64 },
    NonFinite { x: String, y: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    /// All entries are zero.
    pub zero_matrix: bool,
    pub constant_function: bool,
}

impl ValidationReport {
    /// Entry conditions hold (a zero matrix still passes here).
    pub fn entries_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// Entry conditions hold and the matrix is nonzero unless the function is
    /// constant.
    pub fn is_valid(&self) -> bool {
        self.entries_ok() && (!self.zero_matrix || self.constant_function)
    }
}

/// Checks the zero pattern, nonnegativity and finiteness of `Γ`.
/// Symmetry holds by construction of [`SymMatrix`].
pub fn validate(gamma: &AdversaryMatrix) -> ValidationReport {
    let f = &gamma.function;
    let m = &gamma.matrix;
    let mut violations = Vec::new();
    for r in 0..m.dim() {
        for c in r..m.dim() {
            let v = m.get(r, c);
            if v == 0.0 {
                continue;
            }
            let (x, y) = (f.domain()[r].to_string(), f.domain()[c].to_string());
            if !v.is_finite() {
                violations.push(Violation::NonFinite { x, y });
                continue;
            }
            if v < 0.0 {
                violations.push(Violation::Negative {
                    x: x.clone(),
                    y: y.clone(),
                    value: v,
                });
            }
            if f.value_at(r) == f.value_at(c) {
                violations.push(Violation::SameOutput { x, y, value: v });
            }
        }
    }
    ValidationReport {
        violations,
        zero_matrix: m.is_zero(),
        constant_function: f.is_constant(),
    }
}

fn check_arity(n: usize, alpha: &CostVector) -> Result<()> {
    if alpha.len() != n {
        return Err(Error::Mismatch(format!(
            "cost vector of length {} for arity {n}",
            alpha.len()
        )));
    }
    Ok(())
}

/// `min_i α_i ‖Γ‖/‖Γ∘D_i‖`. Bits with `‖Γ∘D_i‖ = 0` count as `+∞`; the
/// zero matrix evaluates to 0.
pub fn adv_value(gamma: &AdversaryMatrix, alpha: &CostVector) -> Result<f64> {
    check_arity(gamma.function.arity(), alpha)?;
    let report = validate(gamma);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidAdversary(format!("{v:?}")));
    }
    if report.zero_matrix {
        return Ok(0.0);
    }
    Ok(gamma.mask_norms()?.value(alpha))
}

/// One probability distribution over bit positions per domain point.
#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxWitness {
    function: BooleanFunction,
    rows: Vec<Vec<f64>>,
}

/// Allowed deviation of a row sum from 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

impl MinimaxWitness {
    /// `rows[r]` is the distribution of the `r`-th domain point.
    pub fn new(function: BooleanFunction, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != function.len() {
            return Err(Error::InvalidWitness(format!(
                "{} rows for a domain of size {}",
                rows.len(),
                function.len()
            )));
        }
        for (x, p) in function.domain().iter().zip(&rows) {
            if p.len() != function.arity() {
                return Err(Error::InvalidWitness(format!(
                    "row {x} has {} entries for arity {}",
                    p.len(),
                    function.arity()
                )));
            }
            if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::InvalidWitness(format!("row {x} has a negative entry")));
            }
            let sum: f64 = p.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidWitness(format!("row {x} sums to {sum}")));
            }
        }
        Ok(MinimaxWitness { function, rows })
    }

    pub fn uniform(function: BooleanFunction) -> Self {
        let n = function.arity();
        let rows = vec![vec![1.0 / n as f64; n]; function.len()];
        MinimaxWitness { function, rows }
    }

    pub fn function(&self) -> &BooleanFunction {
        &self.function
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.rows[r]
    }
}

/// `Σ_{i: x_i≠y_i} √(p_x(i) p_y(i)) / α_i` for rows `r`, `c`.
pub(crate) fn pair_sum(w: &MinimaxWitness, alpha: &[f64], r: usize, c: usize) -> f64 {
    let (x, y) = (w.function.domain()[r].bits(), w.function.domain()[c].bits());
    let (px, py) = (&w.rows[r], &w.rows[c]);
    (0..x.len())
        .filter(|&i| x[i] != y[i])
        .map(|i| (px[i] * py[i]).sqrt() / alpha[i])
        .sum()
}

/// `max_{f(x)≠f(y)} 1 / Σ_{i: x_i≠y_i} √(p_x(i) p_y(i)) / α_i`. A pair with
/// zero sum gives `+∞`; a constant function gives 0.
pub fn mm_value(witness: &MinimaxWitness, alpha: &CostVector) -> Result<f64> {
    check_arity(witness.function.arity(), alpha)?;
    let f = &witness.function;
    let mut worst = 0.0f64;
    for r in 0..f.len() {
        for c in r + 1..f.len() {
            if f.value_at(r) == f.value_at(c) {
                continue;
            }
            let s = pair_sum(witness, alpha.as_slice(), r, c);
            if s == 0.0 {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(1.0 / s);
        }
    }
    Ok(worst)
}

/// A principal eigenvector split by output class: `half_b[x] = δ[x]` when
/// `g(x) = b`, else 0.
#[derive(Clone, Debug, PartialEq)]
pub struct EigvecParts {
    pub whole: Vec<f64>,
    pub half0: Vec<f64>,
    pub half1: Vec<f64>,
}

/// Allowed deviation of each half's squared norm from 1/2.
pub const HALF_MASS_TOL: f64 = 1e-8;

impl EigvecParts {
    pub fn split(function: &BooleanFunction, delta: &SpectralResult) -> Result<Self> {
        if delta.vector.len() != function.len() {
            return Err(Error::Mismatch(format!(
                "eigenvector of length {} for a domain of size {}",
                delta.vector.len(),
                function.len()
            )));
        }
        let pick = |b: bool| -> Vec<f64> {
            delta
                .vector
                .iter()
                .zip(function.values())
                .map(|(v, &fx)| if fx == b { *v } else { 0.0 })
                .collect()
        };
        Ok(EigvecParts {
            half0: pick(false),
            half1: pick(true),
            whole: delta.vector.clone(),
        })
    }

    pub fn from_halves(half0: Vec<f64>, half1: Vec<f64>) -> Result<Self> {
        if half0.len() != half1.len() {
            return Err(Error::Mismatch("halves of different length".into()));
        }
        let whole = half0.iter().zip(&half1).map(|(a, b)| a + b).collect();
        Ok(EigvecParts { whole, half0, half1 })
    }

    pub fn half(&self, b: bool) -> &[f64] {
        if b {
            &self.half1
        } else {
            &self.half0
        }
    }

    pub fn half_masses(&self) -> (f64, f64) {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        (sq(&self.half0), sq(&self.half1))
    }

    pub fn check_half_mass(&self) -> Result<()> {
        let (m0, m1) = self.half_masses();
        if (m0 - 0.5).abs() > HALF_MASS_TOL || (m1 - 0.5).abs() > HALF_MASS_TOL {
            return Err(Error::HalfMass { half0: m0, half1: m1 });
        }
        Ok(())
    }
}
