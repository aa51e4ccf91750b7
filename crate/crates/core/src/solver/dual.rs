//! Upper certificates: ascent on square roots of the distributions `p`.
//!
//! Writing `p_x = q_x²` with `q_x` a nonnegative unit vector turns
//! `s_xy = Σ_{i: x_i≠y_i} √(p_x(i) p_y(i)) / α_i` into the bilinear form
//! `Σ q_x(i) q_y(i) / α_i`, and the minimax value is `1 / min s_xy`. The
//! search maximises the soft minimum `−τ·ln Σ exp(−ln s_xy / τ)` with
//! projected steps along the sphere tangent of each row:
//!
//! ```text
//! ∂ ln s_xy / ∂q_x(i) = q_y(i) / (α_i · s_xy)
//! ```
//!
//! Unlike logits, this chart reaches zero entries exactly, which optimal
//! witnesses usually have.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolveOutcome, SolverOptions};
use crate::adversary::{mm_value, CostVector, MinimaxWitness};
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};

const STALL_ITERS: usize = 400;
const MIN_STEP: f64 = 1e-12;
const MAX_STEP: f64 = 1.0;

struct Problem<'a> {
    f: &'a BooleanFunction,
    alpha: &'a [f64],
    pairs: Vec<(usize, usize)>,
    diff_bits: Vec<Vec<usize>>,
}

struct Eval {
    /// `min s_xy` (the certificate value is its reciprocal).
    min_sum: f64,
    smooth: f64,
    grad: Vec<Vec<f64>>,
}

/// Scales a row to unit Euclidean length; `None` for the zero row.
fn unit(mut r: Vec<f64>) -> Option<Vec<f64>> {
    let z = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if z == 0.0 {
        return None;
    }
    r.iter_mut().for_each(|v| *v /= z);
    Some(r)
}

/// Rescales a row so it sums to one up to rounding.
fn renormalize(p: &mut [f64]) {
    let z: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= z);
}

fn squares(q: &[Vec<f64>]) -> Vec<Vec<f64>> {
    q.iter().map(|r| r.iter().map(|v| v * v).collect()).collect()
}

impl<'a> Problem<'a> {
    fn new(f: &'a BooleanFunction, alpha: &'a [f64]) -> Self {
        let mut pairs = Vec::new();
        let mut diff_bits = Vec::new();
        for r in 0..f.len() {
            for c in r + 1..f.len() {
                if f.value_at(r) != f.value_at(c) {
                    let (x, y) = (f.domain()[r].bits(), f.domain()[c].bits());
                    pairs.push((r, c));
                    diff_bits.push((0..x.len()).filter(|&i| x[i] != y[i]).collect());
                }
            }
        }
        Problem {
            f,
            alpha,
            pairs,
            diff_bits,
        }
    }

    fn sums(&self, p: &[Vec<f64>]) -> Vec<f64> {
        self.pairs
            .iter()
            .zip(&self.diff_bits)
            .map(|(&(r, c), bits)| {
                bits.iter()
                    .map(|&i| (p[r][i] * p[c][i]).sqrt() / self.alpha[i])
                    .sum()
            })
            .collect()
    }

    fn evaluate(&self, q: &[Vec<f64>], temp: f64) -> Eval {
        let sums = self.sums(&squares(q));
        let min_sum = sums.iter().copied().fold(f64::INFINITY, f64::min);
        let mut grad = vec![vec![0.0; self.f.arity()]; q.len()];
        if min_sum <= 0.0 {
            return Eval {
                min_sum,
                smooth: f64::NEG_INFINITY,
                grad,
            };
        }
        let lo = min_sum.ln();
        let weights: Vec<f64> = sums.iter().map(|s| (-(s.ln() - lo) / temp).exp()).collect();
        let total: f64 = weights.iter().sum();
        let smooth = lo - temp * total.ln();
        for (k, (&(r, c), bits)) in self.pairs.iter().zip(&self.diff_bits).enumerate() {
            let pi = weights[k] / total;
            if pi < 1e-300 {
                continue;
            }
            let s = sums[k];
            for &i in bits {
                grad[r][i] += pi * q[c][i] / (self.alpha[i] * s);
                grad[c][i] += pi * q[r][i] / (self.alpha[i] * s);
            }
        }
        Eval {
            min_sum,
            smooth,
            grad,
        }
    }

    fn run(&self, opts: &SolverOptions, restart: usize) -> Result<(Vec<Vec<f64>>, f64, usize)> {
        let n = self.f.arity();
        // decorrelate from the primal stream of the same restart
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64) ^ 0x9e37_79b9_7f4a_7c15);
        let mut q: Vec<Vec<f64>> = (0..self.f.len())
            .map(|_| {
                let row = if restart == 0 {
                    vec![1.0; n]
                } else {
                    (0..n).map(|_| rng.gen_range(0.1..1.0)).collect()
                };
                unit(row).expect("positive row")
            })
            .collect();

        let mut step = opts.step_size;
        let mut eval_temp = opts.temperature(0);
        let mut eval = self.evaluate(&q, eval_temp);
        let mut best = (q.clone(), eval.min_sum);
        let mut last_gain = 0;
        let mut iters = 0;
        for t in 0..opts.max_iters {
            iters = t + 1;
            let temp = opts.temperature(t);
            if temp != eval_temp {
                eval = self.evaluate(&q, temp);
                eval_temp = temp;
            }
            // tangent component of each row's gradient
            let g: Vec<Vec<f64>> = q
                .iter()
                .zip(&eval.grad)
                .map(|(r, g)| {
                    let d: f64 = r.iter().zip(g).map(|(a, b)| a * b).sum();
                    r.iter().zip(g).map(|(a, b)| b - d * a).collect()
                })
                .collect();
            let gnorm = g.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                break;
            }
            loop {
                let cand: Option<Vec<Vec<f64>>> = q
                    .iter()
                    .zip(&g)
                    .map(|(r, gr)| unit(r.iter().zip(gr).map(|(a, b)| (a + step * b / gnorm).max(0.0)).collect()))
                    .collect();
                if let Some(cand) = cand {
                    let next = self.evaluate(&cand, temp);
                    if next.smooth >= eval.smooth {
                        q = cand;
                        eval = next;
                        step = (step * 1.5).min(MAX_STEP);
                        break;
                    }
                }
                step *= 0.5;
                if step < MIN_STEP {
                    break;
                }
            }
            if eval.min_sum > best.1 * (1.0 + 1e-12) {
                best = (q.clone(), eval.min_sum);
                last_gain = t;
            }
            let settled = temp <= opts.temp_end;
            if settled
                && (step < MIN_STEP
                    || t.saturating_sub(last_gain.max(opts.max_iters / 2)) > STALL_ITERS)
            {
                break;
            }
            if step < MIN_STEP {
                step = MIN_STEP * 16.0;
            }
        }
        let mut p = squares(&best.0);
        p.iter_mut().for_each(|row| renormalize(row));
        let (p, min_sum) = self.polish(p);
        Ok((p, min_sum, iters))
    }

    /// Drops probability mass below a threshold when that raises `min s_xy`.
    /// Mass on bits that separate no relevant pair only dilutes the others.
    fn polish(&self, p: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, f64) {
        let score = |p: &[Vec<f64>]| self.sums(p).into_iter().fold(f64::INFINITY, f64::min);
        let mut best_score = score(&p);
        let mut best = p.clone();
        for k in 2..=12 {
            let cut = 10f64.powi(-k);
            let mut q = p.clone();
            for row in q.iter_mut() {
                row.iter_mut().filter(|v| **v < cut).for_each(|v| *v = 0.0);
                renormalize(row);
            }
            let s = score(&q);
            if s > best_score {
                best_score = s;
                best = q;
            }
        }
        (best, best_score)
    }
}

/// Searches for distributions minimising `mm_value(p, α)`.
pub fn minimize_mm(
    f: &BooleanFunction,
    alpha: &CostVector,
    opts: &SolverOptions,
) -> Result<SolveOutcome<MinimaxWitness>> {
    opts.validate()?;
    opts.check_arity(f)?;
    if alpha.len() != f.arity() {
        return Err(Error::Mismatch(format!(
            "cost vector of length {} for arity {}",
            alpha.len(),
            f.arity()
        )));
    }
    if f.is_constant() {
        return Ok(SolveOutcome {
            certificate: MinimaxWitness::uniform(f.clone()),
            value: 0.0,
            iterations: 0,
            best_restart: 0,
        });
    }
    let problem = Problem::new(f, alpha.as_slice());
    let best = opts.best_of(|restart| problem.run(opts, restart), |a, b| a > b)?;
    let witness = MinimaxWitness::new(f.clone(), best.item)?;
    let value = mm_value(&witness, alpha)?;
    Ok(SolveOutcome {
        certificate: witness,
        value,
        iterations: best.iterations,
        best_restart: best.restart,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{make_family, Family};

    fn quick() -> SolverOptions {
        SolverOptions {
            restarts: 2,
            max_iters: 1500,
            ..Default::default()
        }
    }

    #[test]
    fn or_two_reaches_sqrt2() {
        let f = make_family(Family::Or, 2).unwrap();
        let r = minimize_mm(&f, &CostVector::ones(2), &quick()).unwrap();
        assert!(r.value <= 2f64.sqrt() + 1e-3, "{}", r.value);
        assert!(r.value >= 2f64.sqrt() - 1e-9);
        for row in r.certificate.rows() {
            assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn identity_is_forced() {
        let f = make_family(Family::Id, 1).unwrap();
        let r = minimize_mm(&f, &CostVector::new(vec![2.5]).unwrap(), &quick()).unwrap();
        assert_eq!(r.value, 2.5);
    }

    #[test]
    fn and_with_costs() {
        // oracle: p_11 = p_00 = (9, 16)/25, p_01 = (1, 0), p_10 = (0, 1) gives 5
        let f = make_family(Family::And, 2).unwrap();
        let alpha = CostVector::new(vec![3.0, 4.0]).unwrap();
        let q = vec![9.0 / 25.0, 16.0 / 25.0];
        let explicit = MinimaxWitness::new(
            f.clone(),
            vec![q.clone(), vec![1.0, 0.0], vec![0.0, 1.0], q],
        )
        .unwrap();
        assert!((mm_value(&explicit, &alpha).unwrap() - 5.0).abs() < 1e-12);
        let r = minimize_mm(&f, &alpha, &quick()).unwrap();
        assert!(r.value <= 5.001, "{}", r.value);
    }

    #[test]
    fn zero_rows_are_rejected() {
        assert!(unit(vec![0.0, 0.0]).is_none());
        let r = unit(vec![3.0, 4.0]).unwrap();
        assert_eq!(r, [0.6, 0.8]);
    }
}
