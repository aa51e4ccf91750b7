//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use advbound::adversary::{AdversaryMatrix, CostVector, MinimaxWitness};
use advbound::boolfn::{BitString, BooleanFunction, CompositionSpec};
use advbound::specmat::{spectral_norm, SymMatrix};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-constant function; partial with probability 1/3.
pub fn random_function(rng: &mut ChaCha8Rng, n: usize) -> BooleanFunction {
    loop {
        let partial = rng.gen_bool(1.0 / 3.0);
        let mut rows: Vec<(BitString, bool)> = Vec::new();
        for i in 0..1usize << n {
            if !partial || rng.gen_bool(0.7) {
                rows.push((BitString::from_index(i, n), rng.gen_bool(0.5)));
            }
        }
        if rows.iter().any(|r| r.1) && rows.iter().any(|r| !r.1) {
            return BooleanFunction::new(n, rows).unwrap();
        }
    }
}

/// Random nonnegative adversary matrix with at least one positive entry.
pub fn random_gamma(rng: &mut ChaCha8Rng, f: &BooleanFunction) -> AdversaryMatrix {
    loop {
        let g = AdversaryMatrix::from_pair_weights(f.clone(), |_, _| {
            if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.0..1.0)
            }
        })
        .unwrap();
        if !g.matrix().is_zero() {
            return g;
        }
    }
}

pub fn random_witness(rng: &mut ChaCha8Rng, f: &BooleanFunction) -> MinimaxWitness {
    let n = f.arity();
    let rows = (0..f.len())
        .map(|_| loop {
            let mut row: Vec<f64> = (0..n)
                .map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..1.0) })
                .collect();
            let z: f64 = row.iter().sum();
            if z > 0.0 {
                row.iter_mut().for_each(|v| *v /= z);
                break row;
            }
        })
        .collect();
    MinimaxWitness::new(f.clone(), rows).unwrap()
}

pub fn random_costs(rng: &mut ChaCha8Rng, n: usize) -> CostVector {
    CostVector::new((0..n).map(|_| rng.gen_range(0.25..4.0)).collect()).unwrap()
}

/// Outer arity `k ∈ 1..=3`, inner arities in `1..=2`.
pub fn random_composition(
    rng: &mut ChaCha8Rng,
) -> (CompositionSpec, AdversaryMatrix, Vec<AdversaryMatrix>) {
    let k = rng.gen_range(1..=3);
    let f = random_function(rng, k);
    let gs: Vec<BooleanFunction> = (0..k)
        .map(|_| {
            let m = rng.gen_range(1..=2);
            random_function(rng, m)
        })
        .collect();
    let gamma_f = random_gamma(rng, &f);
    let gammas: Vec<AdversaryMatrix> = gs.iter().map(|g| random_gamma(rng, g)).collect();
    (CompositionSpec::new(f, gs).unwrap(), gamma_f, gammas)
}

/// Splits `x` into its blocks.
fn blocks(spec: &CompositionSpec, x: &BitString) -> Vec<BitString> {
    spec.inner()
        .iter()
        .zip(spec.offsets())
        .map(|(g, &off)| x.slice(off, g.arity()))
        .collect()
}

/// `Γ_h` written out from its definition, without the library's assembly.
/// With `mask = Some((p, q))` the outer factor is masked on bit `p` and the
/// `p`-th inner factor is `Γ_{g_p}∘D_q` (both 1-based).
pub fn oracle_composed(
    spec: &CompositionSpec,
    h: &BooleanFunction,
    gamma_f: &AdversaryMatrix,
    gammas: &[AdversaryMatrix],
    mask: Option<(usize, usize)>,
) -> Vec<Vec<f64>> {
    let norms: Vec<f64> = gammas
        .iter()
        .map(|g| spectral_norm(g.matrix()).unwrap().norm)
        .collect();
    let outer = |x: &BitString, y: &BitString| -> f64 {
        let f = gamma_f.function();
        let (r, c) = (f.index_of(x).unwrap(), f.index_of(y).unwrap());
        let differs = |p: usize| x.bits()[p - 1] != y.bits()[p - 1];
        match mask {
            Some((p, _)) if !differs(p) => 0.0,
            _ => gamma_f.matrix().get(r, c),
        }
    };
    let dom = h.domain();
    (0..dom.len())
        .map(|r| {
            (0..dom.len())
                .map(|c| {
                    let (xb, yb) = (blocks(spec, &dom[r]), blocks(spec, &dom[c]));
                    let xt: BitString = BitString::new(
                        xb.iter().zip(spec.inner()).map(|(b, g)| g.value(b).unwrap()).collect(),
                    );
                    let yt: BitString = BitString::new(
                        yb.iter().zip(spec.inner()).map(|(b, g)| g.value(b).unwrap()).collect(),
                    );
                    let mut v = outer(&xt, &yt);
                    for (i, g) in gammas.iter().enumerate() {
                        let gi = g.function();
                        let (a, b) = (gi.index_of(&xb[i]).unwrap(), gi.index_of(&yb[i]).unwrap());
                        let factor = match mask {
                            Some((p, q)) if p == i + 1 => {
                                if xb[i].bits()[q - 1] != yb[i].bits()[q - 1] {
                                    g.matrix().get(a, b)
                                } else {
                                    0.0
                                }
                            }
                            _ => g.matrix().get(a, b) + if a == b { norms[i] } else { 0.0 },
                        };
                        v *= factor;
                    }
                    v
                })
                .collect()
        })
        .collect()
}

/// `MM_α(p)` by brute force over pairs of the domain.
pub fn oracle_mm(w: &MinimaxWitness, alpha: &CostVector) -> f64 {
    let f = w.function();
    let mut worst = 0.0f64;
    for r in 0..f.len() {
        for c in 0..f.len() {
            if f.value_at(r) == f.value_at(c) {
                continue;
            }
            let (x, y) = (f.domain()[r].bits(), f.domain()[c].bits());
            let s: f64 = (0..f.arity())
                .filter(|&i| x[i] != y[i])
                .map(|i| (w.row(r)[i] * w.row(c)[i]).sqrt() / alpha.get(i))
                .sum();
            worst = worst.max(if s == 0.0 { f64::INFINITY } else { 1.0 / s });
        }
    }
    worst
}

pub fn matrix_max_diff(a: &SymMatrix, b: &[Vec<f64>]) -> (f64, f64) {
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for (r, row) in b.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            diff = diff.max((a.get(r, c) - v).abs());
            scale = scale.max(v.abs());
        }
    }
    (diff, scale)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Random read-once formula over all of `x1..xn`, as text.
pub fn random_read_once(rng: &mut ChaCha8Rng, n: usize) -> String {
    let mut vars: Vec<usize> = (1..=n).collect();
    vars.shuffle(rng);
    build_formula(rng, &vars)
}

fn build_formula(rng: &mut ChaCha8Rng, vars: &[usize]) -> String {
    let body = if vars.len() == 1 {
        format!("x{}", vars[0])
    } else {
        let split = rng.gen_range(1..vars.len());
        let op = if rng.gen_bool(0.5) { "&" } else { "|" };
        format!(
            "({} {op} {})",
            build_formula(rng, &vars[..split]),
            build_formula(rng, &vars[split..])
        )
    };
    if rng.gen_bool(0.25) {
        format!("~{body}")
    } else {
        body
    }
}
