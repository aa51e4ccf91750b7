//! End-to-end checks of the composition law `ADV_α(f∘g) = ADV_β(f)` with
//! `β_i = ADV_{α^i}(g_i)`, and of its iterated form `ADV(f^d) = ADV(f)^d`.
//!
//! Each side is a bracket `[lower, upper]`. Brackets for the composed
//! function come from two sources: direct optimisation when the arity fits
//! the optimiser cap, and the composed certificates (`compose_gamma` for the
//! lower end, `compose_minimax` for the upper end), which are valid at any
//! size the eigensolver handles.

use serde::Serialize;

use super::{certify, BoundCertificate, SolverOptions};
use crate::adversary::{adv_value, compose_gamma, compose_minimax, mm_value, AdversaryMatrix, CostVector, MinimaxWitness};
use crate::boolfn::{compose_functions, BooleanFunction, CompositionSpec};
use crate::error::{Error, Result};

/// Slack added to the combined gaps in every comparison.
const SLACK: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub midpoint: f64,
}

impl Bracket {
    pub fn new(lower: f64, upper: f64) -> Self {
        Bracket {
            lower,
            upper,
            gap: upper - lower,
            midpoint: 0.5 * (lower + upper),
        }
    }

    /// Tightest bracket implied by two valid ones.
    pub fn intersect(&self, other: &Bracket) -> Bracket {
        Bracket::new(self.lower.max(other.lower), self.upper.min(other.upper))
    }

    pub fn contains(&self, v: f64, tol: f64) -> bool {
        v >= self.lower - tol && v <= self.upper + tol
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompositionReport {
    pub alpha: Vec<f64>,
    /// Component brackets `ADV_{α^i}(g_i)`.
    pub inner: Vec<Bracket>,
    pub beta: Vec<f64>,
    /// `ADV_β(f)` from the optimisers.
    pub rhs: Bracket,
    /// Direct optimiser bracket on `h`, absent above the optimiser cap.
    pub lhs_direct: Option<Bracket>,
    /// `adv_value` of the composed `Γ_h` and `mm_value` of the composed `p_h`.
    pub lhs_composed: Bracket,
    /// Intersection of the available `h` brackets.
    pub lhs: Bracket,
    pub tolerance: f64,
    pub difference: f64,
    pub lower_direction_ok: bool,
    pub upper_direction_ok: bool,
    /// `min β · ADV(f) ≤ ADV(h) ≤ max β · ADV(f)`.
    pub scaling_bracket: Bracket,
    pub scaling_ok: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub depth: usize,
    pub base: Bracket,
    pub expected: f64,
    pub iterate_direct: Option<Bracket>,
    pub iterate_composed: Bracket,
    pub iterate: Bracket,
    pub tolerance: f64,
    pub pass: bool,
}

fn composed_bracket(
    gamma: &AdversaryMatrix,
    witness: &MinimaxWitness,
    alpha: &CostVector,
) -> Result<Bracket> {
    Ok(Bracket::new(adv_value(gamma, alpha)?, mm_value(witness, alpha)?))
}

fn direct(f: &BooleanFunction, alpha: &CostVector, opts: &SolverOptions) -> Result<Option<Bracket>> {
    if f.arity() > opts.max_arity {
        return Ok(None);
    }
    Ok(Some(certify(f, alpha, opts)?.bracket()))
}

/// Checks the composition law on `spec` with input costs `α`.
pub fn verify_composition(
    spec: &CompositionSpec,
    alpha: &CostVector,
    opts: &SolverOptions,
) -> Result<CompositionReport> {
    opts.validate()?;
    opts.check_arity(spec.outer())?;
    if alpha.len() != spec.total_arity() {
        return Err(Error::Mismatch(format!(
            "cost vector of length {} for total arity {}",
            alpha.len(),
            spec.total_arity()
        )));
    }
    if spec.total_arity() > spec.max_arity() {
        return Err(Error::SizeCap {
            arity: spec.total_arity(),
            cap: spec.max_arity(),
        });
    }

    let inner: Vec<BoundCertificate> = spec
        .inner()
        .iter()
        .zip(spec.offsets())
        .map(|(g, &off)| certify(g, &alpha.block(off, g.arity()), opts))
        .collect::<Result<_>>()?;
    let beta = CostVector::new(inner.iter().map(BoundCertificate::midpoint).collect())?;
    let outer = certify(spec.outer(), &beta, opts)?;
    let rhs = outer.bracket();

    let h = compose_functions(spec)?;
    let lhs_direct = direct(&h, alpha, opts)?;
    let gamma_h = compose_gamma(
        &outer.lower,
        &inner.iter().map(|c| c.lower.clone()).collect::<Vec<_>>(),
        spec,
    )?;
    let p_h = compose_minimax(
        &outer.upper,
        &inner.iter().map(|c| c.upper.clone()).collect::<Vec<_>>(),
        spec,
    )?;
    let lhs_composed = composed_bracket(&gamma_h, &p_h, alpha)?;
    let lhs = lhs_direct.map_or(lhs_composed, |d| d.intersect(&lhs_composed));

    let gaps = rhs.gap.max(0.0)
        + lhs.gap.max(0.0)
        + inner.iter().map(|c| c.gap.max(0.0)).sum::<f64>();
    let tolerance = gaps + SLACK;
    let difference = (lhs.midpoint - rhs.midpoint).abs();
    let lower_direction_ok = lhs_composed.lower >= rhs.lower - tolerance;
    let upper_direction_ok = lhs_composed.upper <= rhs.upper + tolerance;

    let unit = certify(spec.outer(), &CostVector::ones(spec.k()), opts)?;
    let lo = inner.iter().map(|c| c.lower_value).fold(f64::INFINITY, f64::min);
    let hi = inner.iter().map(|c| c.upper_value).fold(f64::NEG_INFINITY, f64::max);
    let scaling_bracket = Bracket::new(lo * unit.lower_value, hi * unit.upper_value);
    let scaling_ok = lhs.lower <= scaling_bracket.upper + tolerance
        && lhs.upper >= scaling_bracket.lower - tolerance;

    Ok(CompositionReport {
        alpha: alpha.as_slice().to_vec(),
        inner: inner.iter().map(BoundCertificate::bracket).collect(),
        beta: beta.as_slice().to_vec(),
        rhs,
        lhs_direct,
        lhs_composed,
        lhs,
        tolerance,
        difference,
        lower_direction_ok,
        upper_direction_ok,
        scaling_bracket,
        scaling_ok,
        pass: difference <= tolerance && lower_direction_ok && upper_direction_ok && scaling_ok,
    })
}

/// Checks `ADV(f^d) = ADV(f)^d` with unit costs.
pub fn verify_iteration(f: &BooleanFunction, d: usize, opts: &SolverOptions) -> Result<IterationReport> {
    opts.validate()?;
    if d == 0 {
        return Err(Error::InvalidFunction("iteration depth must be positive".into()));
    }
    if !f.is_total() {
        return Err(Error::InvalidFunction("iteration requires a total function".into()));
    }
    let cap = crate::boolfn::DEFAULT_MAX_ARITY;
    let arity = f
        .arity()
        .checked_pow(d as u32)
        .filter(|&a| a <= cap)
        .ok_or(Error::SizeCap {
            arity: f.arity().saturating_pow(d as u32),
            cap,
        })?;
    let base_cert = certify(f, &CostVector::ones(f.arity()), opts)?;
    let base = base_cert.bracket();

    // uniform outer costs only rescale ADV(f), so the unit-cost certificates
    // of f serve at every level
    let mut gamma = base_cert.lower.clone();
    let mut witness = base_cert.upper.clone();
    for _ in 1..d {
        let spec = CompositionSpec::new(f.clone(), vec![gamma.function().clone(); f.arity()])?
            .with_max_arity(cap);
        let next_gamma = compose_gamma(&base_cert.lower, &vec![gamma; f.arity()], &spec)?;
        witness = compose_minimax(&base_cert.upper, &vec![witness; f.arity()], &spec)?;
        gamma = next_gamma;
    }
    let ones = CostVector::ones(arity);
    let iterate_composed = composed_bracket(&gamma, &witness, &ones)?;
    let iterate_direct = direct(gamma.function(), &ones, opts)?;
    let iterate = iterate_direct.map_or(iterate_composed, |b| b.intersect(&iterate_composed));

    let expected = base.midpoint.powi(d as i32);
    let spread = base.upper.powi(d as i32) - base.lower.powi(d as i32);
    let tolerance = iterate.gap.max(0.0) + spread.max(0.0) + 1e-9;
    Ok(IterationReport {
        depth: d,
        base,
        expected,
        iterate_direct,
        iterate_composed,
        iterate,
        tolerance,
        pass: iterate.contains(expected, tolerance),
    })
}
