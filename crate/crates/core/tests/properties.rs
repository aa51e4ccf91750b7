//! Randomised laws over small functions, matrices and witnesses.

mod common;

use advbound::adversary::{adv_value, compose_gamma, compose_minimax, mm_value, AdversaryMatrix, CostVector};
use advbound::boolfn::{compose_functions, formula_to_function, parse_formula, BitString, CompositionSpec};
use advbound::io::AdversaryJson;
use advbound::solver::{readonce_bound, readonce_certificate};
use advbound::specmat::{mask_bit, spectral_norm};
use common::*;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn norm(g: &AdversaryMatrix) -> f64 {
    spectral_norm(g.matrix()).unwrap().norm
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composed_norm_is_product(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (spec, gf, gs) = random_composition(&mut rng);
        let gh = compose_gamma(&gf, &gs, &spec).unwrap();
        let want = norm(&gf) * gs.iter().map(norm).product::<f64>();
        prop_assert!(rel_err(norm(&gh), want) <= 1e-8);
    }

    #[test]
    fn composed_entries_match_definition(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (spec, gf, gs) = random_composition(&mut rng);
        let h = compose_functions(&spec).unwrap();
        let gh = compose_gamma(&gf, &gs, &spec).unwrap();
        let (diff, scale) = matrix_max_diff(gh.matrix(), &oracle_composed(&spec, &h, &gf, &gs, None));
        prop_assert!(diff <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn masked_norm_factors(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (spec, gf, gs) = random_composition(&mut rng);
        let gh = compose_gamma(&gf, &gs, &spec).unwrap();
        let ell = rng.gen_range(1..=spec.total_arity());
        let (p, q) = spec.locate(ell).unwrap();
        let lhs = spectral_norm(&mask_bit(gh.matrix(), ell).unwrap()).unwrap().norm;
        let others: f64 = gs.iter().enumerate().filter(|(i, _)| i + 1 != p).map(|(_, g)| norm(g)).product();
        let rhs = spectral_norm(&mask_bit(gf.matrix(), p).unwrap()).unwrap().norm
            * spectral_norm(&mask_bit(gs[p - 1].matrix(), q).unwrap()).unwrap().norm
            * others;
        prop_assert!(rel_err(lhs, rhs) <= 1e-8, "{lhs} vs {rhs}");
    }

    /// The composed Γ realises the outer bound at the inner values exactly.
    #[test]
    fn composed_adv_equals_outer_at_inner_values(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (spec, gf, gs) = random_composition(&mut rng);
        let alpha = random_costs(&mut rng, spec.total_arity());
        let gh = compose_gamma(&gf, &gs, &spec).unwrap();
        let beta: Vec<f64> = gs
            .iter()
            .zip(spec.offsets())
            .map(|(g, &off)| adv_value(g, &alpha.block(off, g.function().arity())).unwrap())
            .collect();
        let outer = adv_value(&gf, &CostVector::new(beta).unwrap()).unwrap();
        let composed = adv_value(&gh, &alpha).unwrap();
        prop_assert!(rel_err(composed, outer) <= 1e-8, "{composed} vs {outer}");
    }

    #[test]
    fn composed_mm_is_at_most_outer_at_inner_values(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let (spec, gf, gs) = random_composition(&mut rng);
        let alpha = random_costs(&mut rng, spec.total_arity());
        let pf = random_witness(&mut rng, gf.function());
        let ps: Vec<_> = gs.iter().map(|g| random_witness(&mut rng, g.function())).collect();
        let beta: Vec<f64> = ps
            .iter()
            .zip(spec.offsets())
            .map(|(p, &off)| mm_value(p, &alpha.block(off, p.function().arity())).unwrap())
            .collect();
        prop_assume!(beta.iter().all(|b| b.is_finite() && *b > 0.0));
        let ph = compose_minimax(&pf, &ps, &spec).unwrap();
        let outer = mm_value(&pf, &CostVector::new(beta).unwrap()).unwrap();
        let composed = mm_value(&ph, &alpha).unwrap();
        prop_assert!(composed <= outer * (1.0 + 1e-9), "{composed} > {outer}");
    }

    #[test]
    fn weak_duality(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, n);
        let gamma = random_gamma(&mut rng, &f);
        let w = random_witness(&mut rng, &f);
        let alpha = random_costs(&mut rng, n);
        let adv = adv_value(&gamma, &alpha).unwrap();
        let mm = mm_value(&w, &alpha).unwrap();
        prop_assert!(adv <= mm * (1.0 + 1e-9), "{adv} > {mm}");
        prop_assert_eq!(mm, oracle_mm(&w, &alpha));
    }

    #[test]
    fn values_scale_linearly(seed in any::<u64>(), c in 0.01f64..100.0) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, 3);
        let gamma = random_gamma(&mut rng, &f);
        let w = random_witness(&mut rng, &f);
        let alpha = random_costs(&mut rng, 3);
        let scaled = alpha.scaled(c).unwrap();
        prop_assert!(rel_err(adv_value(&gamma, &scaled).unwrap(), c * adv_value(&gamma, &alpha).unwrap()) <= 1e-12);
        let (m, ms) = (mm_value(&w, &alpha).unwrap(), mm_value(&w, &scaled).unwrap());
        prop_assert!(m.is_infinite() && ms.is_infinite() || rel_err(ms, c * m) <= 1e-12);
    }

    #[test]
    fn values_grow_with_costs(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, 3);
        let gamma = random_gamma(&mut rng, &f);
        let w = random_witness(&mut rng, &f);
        let alpha = random_costs(&mut rng, 3);
        let bigger = CostVector::new(alpha.as_slice().iter().map(|a| a * rng.gen_range(1.0..3.0)).collect()).unwrap();
        prop_assert!(adv_value(&gamma, &alpha).unwrap() <= adv_value(&gamma, &bigger).unwrap() * (1.0 + 1e-12));
        prop_assert!(mm_value(&w, &alpha).unwrap() <= mm_value(&w, &bigger).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn masking_never_increases_the_norm(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, n);
        let gamma = random_gamma(&mut rng, &f);
        let whole = norm(&gamma);
        for i in 1..=n {
            let masked = spectral_norm(&mask_bit(gamma.matrix(), i).unwrap()).unwrap().norm;
            prop_assert!(masked <= whole * (1.0 + 1e-12));
        }
    }

    #[test]
    fn negation_and_permutation_invert(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, n);
        prop_assert_eq!(f.negate().negate(), f.clone());
        let mut target: Vec<usize> = (0..n).collect();
        target.shuffle(&mut rng);
        let mut inverse = vec![0; n];
        for (k, &t) in target.iter().enumerate() {
            inverse[t] = k;
        }
        let back = f.permute_inputs(&target).unwrap().permute_inputs(&inverse).unwrap();
        prop_assert!(back.same_map(&f));
    }

    #[test]
    fn bitstring_index_round_trip(n in 1usize..=12, i in any::<usize>()) {
        let i = i % (1 << n);
        let x = BitString::from_index(i, n);
        prop_assert_eq!(x.to_index(), i);
        prop_assert_eq!(x.to_string().parse::<BitString>().unwrap(), x);
    }

    #[test]
    fn adversary_json_round_trip(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng(seed);
        let f = random_function(&mut rng, n);
        let gamma = random_gamma(&mut rng, &f);
        let text = serde_json::to_string(&AdversaryJson::from_adversary(&gamma)).unwrap();
        let back: AdversaryJson = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_adversary().unwrap(), gamma);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn read_once_unit_cost_is_sqrt_n(seed in any::<u64>(), n in 1usize..=5) {
        let mut rng = rng(seed);
        let text = random_read_once(&mut rng, n);
        let ast = parse_formula(&text).unwrap();
        let alpha = CostVector::ones(n);
        let want = (n as f64).sqrt();
        let bound = readonce_bound(&ast, &alpha).unwrap();
        prop_assert!((bound.value - want).abs() <= 1e-9, "{text}: {}", bound.value);

        let cert = readonce_certificate(&ast, &alpha).unwrap();
        prop_assert!(cert.function.same_map(&formula_to_function(&ast, n).unwrap()));
        prop_assert!((adv_value(&cert.gamma, &alpha).unwrap() - want).abs() <= 1e-9);
        prop_assert!((mm_value(&cert.witness, &alpha).unwrap() - want).abs() <= 1e-9);
    }
}

#[test]
fn composition_spec_rejects_mismatched_widths() {
    let f = advbound::boolfn::make_family_named("and", 2).unwrap();
    let g = advbound::boolfn::make_family_named("or", 2).unwrap();
    assert!(CompositionSpec::new(f, vec![g]).is_err());
}
