//! Composition of adversary matrices, principal eigenvectors and minimax
//! distributions along a [`CompositionSpec`].
//!
//! For `h = f ∘ (g_1, …, g_k)` the composed matrix is
//!
//! ```text
//! Γ_h[x, y] = Γ_f[x̃, ỹ] · Π_i F_i[x^i, y^i],   F_i = Γ_{g_i} + ‖Γ_{g_i}‖·I
//! ```
//!
//! Pairs in the same output class of `g_i` only meet the `‖Γ_{g_i}‖·I` part
//! and pairs across classes only meet `Γ_{g_i}`, which gives the four block
//! cases at once. Its spectral norm is `‖Γ_f‖·Π‖Γ_{g_i}‖`.

use serde::Serialize;

use super::{AdversaryMatrix, EigvecParts, MinimaxWitness};
use crate::boolfn::{CompositionLayout, CompositionSpec};
use crate::error::{Error, Result};
use crate::specmat::{mask_bit, spectral_norm, SpectralResult, SymMatrix};

/// Relative tolerance of the composition identities.
pub const COMPOSE_TOL: f64 = 1e-8;

fn check_component(gamma: &AdversaryMatrix, expected: &crate::boolfn::BooleanFunction, what: &str) -> Result<()> {
    if gamma.function() != expected {
        return Err(Error::Mismatch(format!(
            "{what} adversary matrix is over a different function than the composition spec"
        )));
    }
    let m = gamma.matrix();
    if let Some(k) = m.entries().iter().position(|&v| !(v >= 0.0)) {
        return Err(Error::Negative {
            row: k / m.dim(),
            col: k % m.dim(),
        });
    }
    Ok(())
}

fn check_inputs(gamma_f: &AdversaryMatrix, gammas_g: &[AdversaryMatrix], spec: &CompositionSpec) -> Result<()> {
    if gammas_g.len() != spec.k() {
        return Err(Error::Mismatch(format!(
            "{} inner matrices for {} inner functions",
            gammas_g.len(),
            spec.k()
        )));
    }
    check_component(gamma_f, spec.outer(), "outer")?;
    for (i, (g, expected)) in gammas_g.iter().zip(spec.inner()).enumerate() {
        check_component(g, expected, &format!("inner #{}", i + 1))?;
    }
    Ok(())
}

/// `Γ_f[x̃, ỹ] · Π_i factors[i][x^i, y^i]` over the composed domain.
fn assemble(layout: &CompositionLayout, outer: &SymMatrix, factors: &[SymMatrix]) -> Result<SymMatrix> {
    SymMatrix::from_fn(layout.function.domain().to_vec(), |r, c| {
        let base = outer.get(layout.outer_rows[r], layout.outer_rows[c]);
        if base == 0.0 {
            return 0.0;
        }
        factors
            .iter()
            .zip(layout.inner_rows[r].iter().zip(&layout.inner_rows[c]))
            .fold(base, |acc, (f, (&a, &b))| acc * f.get(a, b))
    })
}

fn lifted(gamma: &SymMatrix) -> Result<SymMatrix> {
    Ok(gamma.shifted(spectral_norm(gamma)?.norm))
}

/// Builds `Γ_h` for `h = f ∘ (g_1, …, g_k)` from nonnegative component matrices.
pub fn compose_gamma(
    gamma_f: &AdversaryMatrix,
    gammas_g: &[AdversaryMatrix],
    spec: &CompositionSpec,
) -> Result<AdversaryMatrix> {
    check_inputs(gamma_f, gammas_g, spec)?;
    let layout = spec.layout()?;
    let factors = gammas_g
        .iter()
        .map(|g| lifted(g.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let matrix = assemble(&layout, gamma_f.matrix(), &factors)?;
    AdversaryMatrix::new(layout.function, matrix)
}

/// `δ_h[x] = δ_f[x̃] · Π_i δ_{g_i}^{x̃_i}[x^i]`, a principal eigenvector of
/// `Γ_h` with squared norm `1/2^k`.
///
/// Each inner part must carry squared mass 1/2 on both output classes; a
/// degenerate or disconnected input that breaks this is rejected.
pub fn compose_eigenvector(
    delta_f: &SpectralResult,
    deltas_g: &[EigvecParts],
    spec: &CompositionSpec,
) -> Result<Vec<f64>> {
    if deltas_g.len() != spec.k() {
        return Err(Error::Mismatch(format!(
            "{} inner eigenvectors for {} inner functions",
            deltas_g.len(),
            spec.k()
        )));
    }
    if delta_f.vector.len() != spec.outer().len() {
        return Err(Error::Mismatch("outer eigenvector length differs from its domain".into()));
    }
    for (parts, g) in deltas_g.iter().zip(spec.inner()) {
        if parts.whole.len() != g.len() {
            return Err(Error::Mismatch("inner eigenvector length differs from its domain".into()));
        }
        parts.check_half_mass()?;
    }
    let layout = spec.layout()?;
    Ok((0..layout.function.len())
        .map(|r| {
            let blocks = &layout.inner_rows[r];
            spec.inner()
                .iter()
                .zip(deltas_g)
                .zip(blocks)
                .fold(delta_f.vector[layout.outer_rows[r]], |acc, ((g, parts), &row)| {
                    acc * parts.half(g.value_at(row))[row]
                })
        })
        .collect())
}

/// Both sides of the masked-composition identities for one global bit `ℓ`
/// lying in block `p` at inner position `q`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaskedCheckReport {
    pub ell: usize,
    pub block: usize,
    pub inner_index: usize,
    /// `max |(Γ_h∘D_ℓ) − RHS| / max |Γ_h∘D_ℓ|` for the entrywise identity.
    pub entrywise_error: f64,
    /// `‖Γ_h∘D_ℓ‖`.
    pub masked_norm: f64,
    /// `‖Γ_f∘D_p‖ · ‖Γ_{g_p}∘D_q‖ · Π_{i≠p} ‖Γ_{g_i}‖`.
    pub masked_norm_product: f64,
    /// `‖Γ_h‖ / ‖Γ_h∘D_ℓ‖`.
    pub ratio_composed: f64,
    /// `(‖Γ_f‖/‖Γ_f∘D_p‖) · (‖Γ_{g_p}‖/‖Γ_{g_p}∘D_q‖)`.
    pub ratio_factored: f64,
    pub entrywise_ok: bool,
    pub norm_ok: bool,
    pub ratio_ok: bool,
    pub pass: bool,
}

pub(crate) fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    if !(a.is_finite() && b.is_finite()) {
        return false;
    }
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Checks the masked entrywise identity, the masked norm factorisation and
/// the resulting ratio identity for bit `ell` (1-based, global).
pub fn masked_compose_check(
    gamma_f: &AdversaryMatrix,
    gammas_g: &[AdversaryMatrix],
    spec: &CompositionSpec,
    ell: usize,
) -> Result<MaskedCheckReport> {
    check_inputs(gamma_f, gammas_g, spec)?;
    let (p, q) = spec.locate(ell)?;
    let layout = spec.layout()?;

    let factors = gammas_g
        .iter()
        .map(|g| lifted(g.matrix()))
        .collect::<Result<Vec<_>>>()?;
    let gamma_h = assemble(&layout, gamma_f.matrix(), &factors)?;
    let lhs = mask_bit(&gamma_h, ell)?;

    let outer_masked = mask_bit(gamma_f.matrix(), p)?;
    let inner_masked = mask_bit(gammas_g[p - 1].matrix(), q)?;
    let mut rhs_factors = factors;
    rhs_factors[p - 1] = inner_masked.clone();
    let rhs = assemble(&layout, &outer_masked, &rhs_factors)?;

    let scale = lhs.entries().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let diff = lhs
        .entries()
        .iter()
        .zip(rhs.entries())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let entrywise_error = if scale > 0.0 { diff / scale } else { diff };

    let norm_h = spectral_norm(&gamma_h)?.norm;
    let norm_f = spectral_norm(gamma_f.matrix())?.norm;
    let norms_g = gammas_g
        .iter()
        .map(|g| Ok(spectral_norm(g.matrix())?.norm))
        .collect::<Result<Vec<f64>>>()?;
    let masked_norm = spectral_norm(&lhs)?.norm;
    let outer_masked_norm = spectral_norm(&outer_masked)?.norm;
    let inner_masked_norm = spectral_norm(&inner_masked)?.norm;
    let masked_norm_product = outer_masked_norm
        * inner_masked_norm
        * norms_g
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p - 1)
            .map(|(_, n)| n)
            .product::<f64>();

    let ratio = |num: f64, den: f64| if den == 0.0 { f64::INFINITY } else { num / den };
    let ratio_composed = ratio(norm_h, masked_norm);
    let ratio_factored = ratio(norm_f, outer_masked_norm) * ratio(norms_g[p - 1], inner_masked_norm);

    let entrywise_ok = entrywise_error <= COMPOSE_TOL;
    let norm_ok = rel_close(masked_norm, masked_norm_product, COMPOSE_TOL);
    let ratio_ok = rel_close(ratio_composed, ratio_factored, COMPOSE_TOL);
    Ok(MaskedCheckReport {
        ell,
        block: p,
        inner_index: q,
        entrywise_error,
        masked_norm,
        masked_norm_product,
        ratio_composed,
        ratio_factored,
        entrywise_ok,
        norm_ok,
        ratio_ok,
        pass: entrywise_ok && norm_ok && ratio_ok,
    })
}

/// `p^h_x(ℓ) = p^f_{x̃}(i) · p^{g_i}_{x^i}(j)` where bit `ℓ` is bit `j` of block `i`.
pub fn compose_minimax(
    p_f: &MinimaxWitness,
    ps_g: &[MinimaxWitness],
    spec: &CompositionSpec,
) -> Result<MinimaxWitness> {
    if p_f.function() != spec.outer() {
        return Err(Error::Mismatch("outer witness is over a different function".into()));
    }
    if ps_g.len() != spec.k() {
        return Err(Error::Mismatch(format!(
            "{} inner witnesses for {} inner functions",
            ps_g.len(),
            spec.k()
        )));
    }
    if let Some(i) = ps_g.iter().zip(spec.inner()).position(|(w, g)| w.function() != g) {
        return Err(Error::Mismatch(format!(
            "inner witness #{} is over a different function",
            i + 1
        )));
    }
    let layout = spec.layout()?;
    let rows = (0..layout.function.len())
        .map(|r| {
            let outer = p_f.row(layout.outer_rows[r]);
            let mut row = Vec::with_capacity(spec.total_arity());
            for (i, (w, &inner_row)) in ps_g.iter().zip(&layout.inner_rows[r]).enumerate() {
                row.extend(w.row(inner_row).iter().map(|pj| outer[i] * pj));
            }
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= sum);
            row
        })
        .collect();
    MinimaxWitness::new(layout.function, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{adv_value, mm_value, validate, CostVector};
    use crate::boolfn::{make_family, Family};
    use crate::specmat::principal_eigenvector;

    fn and_gadget(b1: f64, b2: f64) -> AdversaryMatrix {
        let f = make_family(Family::And, 2).unwrap();
        let mut m = SymMatrix::zeros(f.domain().to_vec()).unwrap();
        m.set(1, 3, b1);
        m.set(2, 3, b2);
        AdversaryMatrix::new(f, m).unwrap()
    }

    fn swap_id() -> AdversaryMatrix {
        AdversaryMatrix::from_pair_weights(make_family(Family::Id, 1).unwrap(), |_, _| 1.0).unwrap()
    }

    fn spec(outer: Family, k: usize, inner: &[(Family, usize)]) -> CompositionSpec {
        CompositionSpec::new(
            make_family(outer, k).unwrap(),
            inner.iter().map(|&(f, n)| make_family(f, n).unwrap()).collect(),
        )
        .unwrap()
    }

    fn norm(m: &AdversaryMatrix) -> f64 {
        spectral_norm(m.matrix()).unwrap().norm
    }

    #[test]
    fn and_of_ands_gadgets() {
        let s = spec(Family::And, 2, &[(Family::And, 2), (Family::And, 2)]);
        let g = and_gadget(1.0, 1.0);
        let h = compose_gamma(&g, &[g.clone(), g.clone()], &s).unwrap();
        assert_eq!(h.matrix().dim(), 16);
        assert!(validate(&h).is_valid());
        assert!((norm(&h) - 2.0 * 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn identity_outer_wrapper() {
        let s = spec(Family::Id, 1, &[(Family::Or, 2)]);
        let or = make_family(Family::Or, 2).unwrap();
        let mut m = SymMatrix::zeros(or.domain().to_vec()).unwrap();
        m.set(0, 1, 2.0);
        m.set(0, 2, 1.0);
        m.set(0, 3, 0.5);
        let g = AdversaryMatrix::new(or, m).unwrap();
        let h = compose_gamma(&swap_id(), &[g.clone()], &s).unwrap();
        assert!((norm(&h) - norm(&g)).abs() < 1e-10 * norm(&g));
    }

    #[test]
    fn mixed_inner_arities() {
        let s = spec(Family::And, 2, &[(Family::And, 2), (Family::Id, 1)]);
        let g = and_gadget(1.0, 1.0);
        let h = compose_gamma(&g, &[g.clone(), swap_id()], &s).unwrap();
        assert_eq!(h.matrix().dim(), 8);
        assert!((norm(&h) - 2.0).abs() < 1e-10);
    }

    #[test]
    fn simple_estimate_holds() {
        let s = spec(Family::Or, 2, &[(Family::And, 2), (Family::Parity, 2)]);
        let outer = make_family(Family::Or, 2).unwrap();
        let gf = AdversaryMatrix::from_pair_weights(outer, |r, c| 1.0 + (r + c) as f64 * 0.25).unwrap();
        let par = make_family(Family::Parity, 2).unwrap();
        let gp = AdversaryMatrix::from_pair_weights(par, |r, c| 1.0 + (r * c) as f64).unwrap();
        let ga = and_gadget(0.5, 1.5);
        let h = compose_gamma(&gf, &[ga.clone(), gp.clone()], &s).unwrap();
        let product = norm(&gf) * norm(&ga) * norm(&gp);
        assert!(norm(&h) <= 4.0 * product + 1e-9);
        assert!((norm(&h) - product).abs() <= 1e-8 * product);
    }

    #[test]
    fn rejects_mismatched_and_negative_inputs() {
        let s = spec(Family::And, 2, &[(Family::And, 2), (Family::And, 2)]);
        let g = and_gadget(1.0, 1.0);
        assert!(compose_gamma(&g, &[g.clone()], &s).is_err());
        assert!(compose_gamma(&g, &[g.clone(), swap_id()], &s).is_err());
        let neg = and_gadget(-1.0, 1.0);
        assert!(matches!(
            compose_gamma(&g, &[g.clone(), neg], &s),
            Err(Error::Negative { .. })
        ));
    }

    fn parts(g: &AdversaryMatrix) -> EigvecParts {
        EigvecParts::split(g.function(), &principal_eigenvector(g.matrix()).unwrap()).unwrap()
    }

    fn residual(m: &SymMatrix, lambda: f64, v: &[f64]) -> f64 {
        m.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    #[test]
    fn eigenvector_of_identity_wrapper() {
        let s = spec(Family::Id, 1, &[(Family::And, 2)]);
        let g = and_gadget(1.0, 1.0);
        let delta_f = principal_eigenvector(swap_id().matrix()).unwrap();
        let dg = parts(&g);
        let v = compose_eigenvector(&delta_f, &[dg.clone()], &s).unwrap();
        let h = 1.0 / 2f64.sqrt();
        for (r, x) in v.iter().enumerate() {
            let expect = h * if g.function().value_at(r) { dg.half1[r] } else { dg.half0[r] };
            assert!((x - expect).abs() < 1e-15);
        }
        let sq: f64 = v.iter().map(|x| x * x).sum();
        assert!((sq - 0.5).abs() < 1e-8);
    }

    #[test]
    fn eigenvector_of_and_of_ands() {
        let s = spec(Family::And, 2, &[(Family::And, 2), (Family::And, 2)]);
        let g = and_gadget(1.0, 1.0);
        let h = compose_gamma(&g, &[g.clone(), g.clone()], &s).unwrap();
        let delta_f = principal_eigenvector(g.matrix()).unwrap();
        let v = compose_eigenvector(&delta_f, &[parts(&g), parts(&g)], &s).unwrap();
        let lambda = 2.0 * 2f64.sqrt();
        assert!(residual(h.matrix(), lambda, &v) <= 1e-8);
        let sq: f64 = v.iter().map(|x| x * x).sum();
        assert!((sq - 0.25).abs() < 1e-8);
    }

    #[test]
    fn eigenvector_rejects_bad_half_mass() {
        let s = spec(Family::Id, 1, &[(Family::Id, 1)]);
        let delta_f = principal_eigenvector(swap_id().matrix()).unwrap();
        let bad = EigvecParts::from_halves(vec![0.4f64.sqrt(), 0.0], vec![0.0, 0.6f64.sqrt()]).unwrap();
        assert!(matches!(
            compose_eigenvector(&delta_f, &[bad], &s),
            Err(Error::HalfMass { .. })
        ));
    }

    #[test]
    fn masked_check_and_of_ands() {
        let s = spec(Family::And, 2, &[(Family::And, 2), (Family::And, 2)]);
        let g = and_gadget(1.0, 1.0);
        for ell in 1..=4 {
            let r = masked_compose_check(&g, &[g.clone(), g.clone()], &s, ell).unwrap();
            assert!(r.pass, "{r:?}");
            assert!((r.ratio_composed - 2.0).abs() < 1e-8);
            assert!((r.ratio_factored - 2.0).abs() < 1e-8);
        }
        assert!(matches!(
            masked_compose_check(&g, &[g.clone(), g.clone()], &s, 5),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn masked_check_identity_wrapper() {
        let s = spec(Family::Id, 1, &[(Family::And, 2)]);
        let g = and_gadget(2.0, 3.0);
        for q in 1..=2 {
            let r = masked_compose_check(&swap_id(), &[g.clone()], &s, q).unwrap();
            let mask = spectral_norm(&mask_bit(g.matrix(), q).unwrap()).unwrap().norm;
            assert!(r.pass);
            assert!((r.ratio_composed - norm(&g) / mask).abs() < 1e-8 * r.ratio_composed);
        }
    }

    fn and_witness() -> MinimaxWitness {
        MinimaxWitness::new(
            make_family(Family::And, 2).unwrap(),
            vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![0.0, 1.0], vec![0.5, 0.5]],
        )
        .unwrap()
    }

    fn or_witness() -> MinimaxWitness {
        MinimaxWitness::new(
            make_family(Family::Or, 2).unwrap(),
            vec![vec![0.5, 0.5], vec![0.0, 1.0], vec![1.0, 0.0], vec![0.5, 0.5]],
        )
        .unwrap()
    }

    #[test]
    fn minimax_identity_inner() {
        let s = spec(Family::And, 2, &[(Family::Id, 1), (Family::Id, 1)]);
        let id = MinimaxWitness::new(make_family(Family::Id, 1).unwrap(), vec![vec![1.0]; 2]).unwrap();
        let ph = compose_minimax(&and_witness(), &[id.clone(), id], &s).unwrap();
        assert_eq!(ph.rows(), and_witness().rows());
    }

    #[test]
    fn minimax_and_of_ors() {
        let s = spec(Family::And, 2, &[(Family::Or, 2), (Family::Or, 2)]);
        let ph = compose_minimax(&and_witness(), &[or_witness(), or_witness()], &s).unwrap();
        let x = "0101".parse().unwrap();
        let r = ph.function().index_of(&x).unwrap();
        // x̃ = 11, p^f_11 = (1/2, 1/2), both blocks are 01 with p = (0, 1)
        assert_eq!(ph.row(r), [0.0, 0.5, 0.0, 0.5]);
        for row in ph.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        let composed = mm_value(&ph, &CostVector::ones(4)).unwrap();
        let beta = CostVector::new(vec![2f64.sqrt(); 2]).unwrap();
        let outer = mm_value(&and_witness(), &beta).unwrap();
        assert!((outer - 2.0).abs() < 1e-12);
        assert!(composed <= outer + 1e-12);
    }

    #[test]
    fn composed_lower_bound_matches_product() {
        // AND∘(OR, OR) with the gadget matrices gives ADV ≥ 2 directly
        let s = spec(Family::And, 2, &[(Family::Or, 2), (Family::Or, 2)]);
        let or = make_family(Family::Or, 2).unwrap();
        let mut m = SymMatrix::zeros(or.domain().to_vec()).unwrap();
        m.set(0, 1, 1.0);
        m.set(0, 2, 1.0);
        let gor = AdversaryMatrix::new(or, m).unwrap();
        let f = and_gadget(1.0, 1.0);
        let h = compose_gamma(&f, &[gor.clone(), gor], &s).unwrap();
        let v = adv_value(&h, &CostVector::ones(4)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }
}
