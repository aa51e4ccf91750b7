//! Lower certificates: projected ascent on the entries of `Γ`.
//!
//! The free variables are the weights of the differing-output pairs. Each
//! step maximises the smoothed log objective
//!
//! ```text
//! ln ‖Γ‖ − τ·ln Σ_i exp(ln(‖Γ∘D_i‖/α_i) / τ)
//! ```
//!
//! whose `τ → 0` limit is `ln min_i α_i‖Γ‖/‖Γ∘D_i‖`. Derivatives of the norms
//! come from top singular vectors of the bipartite block. The iterate is clipped
//! at zero and rescaled to unit length after every step (the objective is
//! scale invariant).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SolveOutcome, SolverOptions};
use crate::adversary::{adv_value, AdversaryMatrix, CostVector};
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};
use crate::specmat::{jacobi_dense, SymMatrix};

/// Stop once the best value has not moved for this many iterations at the
/// final temperature.
const STALL_ITERS: usize = 400;
const MIN_STEP: f64 = 1e-12;
const MAX_STEP: f64 = 1.0;
/// Entries stay at least this large during the ascent. A mask that reaches
/// exactly zero drops out of the soft minimum, which the ascent would
/// otherwise exploit by collapsing onto a single edge.
const FLOOR: f64 = 1e-7;

struct Problem<'a> {
    f: &'a BooleanFunction,
    alpha: &'a [f64],
    /// Differing-output pairs `(r, c)`, `r < c`.
    pairs: Vec<(usize, usize)>,
    /// For each pair, the (0-based) bits on which its endpoints differ.
    diff_bits: Vec<Vec<usize>>,
    /// For each pair, its position `(a, b)` in the block `B` whose rows are
    /// the 0-inputs and whose columns are the 1-inputs.
    block: Vec<(usize, usize)>,
    zeros: usize,
    ones: usize,
}

struct Eval {
    value: f64,
    smooth: f64,
    grad: Vec<f64>,
}

/// Top singular triple `(σ, u, v)` of the row-major `z×o` block `b`, from a
/// Jacobi solve on the smaller Gram matrix.
fn top_singular(b: &[f64], z: usize, o: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let transpose = z > o;
    let (rows, cols) = if transpose { (o, z) } else { (z, o) };
    let at = |r: usize, c: usize| if transpose { b[c * o + r] } else { b[r * o + c] };
    let mut gram = vec![0.0; rows * rows];
    for i in 0..rows {
        for j in i..rows {
            let g: f64 = (0..cols).map(|k| at(i, k) * at(j, k)).sum();
            gram[i * rows + j] = g;
            gram[j * rows + i] = g;
        }
    }
    let eigen = jacobi_dense(&gram, rows)?;
    let top = (0..rows)
        .max_by(|&i, &j| eigen.values[i].total_cmp(&eigen.values[j]))
        .expect("nonempty block");
    let sigma = eigen.values[top].max(0.0).sqrt();
    let left = eigen.vectors[top].clone();
    let right: Vec<f64> = if sigma > 0.0 {
        (0..cols)
            .map(|k| (0..rows).map(|i| at(i, k) * left[i]).sum::<f64>() / sigma)
            .collect()
    } else {
        vec![0.0; cols]
    };
    Ok(if transpose {
        (sigma, right, left)
    } else {
        (sigma, left, right)
    })
}

impl<'a> Problem<'a> {
    fn new(f: &'a BooleanFunction, alpha: &'a [f64]) -> Self {
        let mut side = vec![0; f.len()];
        let (mut zeros, mut ones) = (0, 0);
        for (r, s) in side.iter_mut().enumerate() {
            if f.value_at(r) {
                *s = ones;
                ones += 1;
            } else {
                *s = zeros;
                zeros += 1;
            }
        }
        let mut pairs = Vec::new();
        let mut diff_bits = Vec::new();
        let mut block = Vec::new();
        for r in 0..f.len() {
            for c in r + 1..f.len() {
                if f.value_at(r) != f.value_at(c) {
                    let (x, y) = (f.domain()[r].bits(), f.domain()[c].bits());
                    pairs.push((r, c));
                    diff_bits.push((0..x.len()).filter(|&i| x[i] != y[i]).collect());
                    block.push(if f.value_at(r) {
                        (side[c], side[r])
                    } else {
                        (side[r], side[c])
                    });
                }
            }
        }
        Problem {
            f,
            alpha,
            pairs,
            diff_bits,
            block,
            zeros,
            ones,
        }
    }

    fn matrix(&self, w: &[f64]) -> Result<SymMatrix> {
        let mut m = SymMatrix::zeros(self.f.domain().to_vec())?;
        for (&(r, c), &v) in self.pairs.iter().zip(w) {
            m.set(r, c, v);
        }
        Ok(m)
    }

    /// `B` restricted to pairs differing on `bit` (all pairs for `None`).
    fn block_matrix(&self, w: &[f64], bit: Option<usize>) -> Vec<f64> {
        let mut b = vec![0.0; self.zeros * self.ones];
        for ((&(a, c), bits), &v) in self.block.iter().zip(&self.diff_bits).zip(w) {
            if bit.is_none_or(|i| bits.contains(&i)) {
                b[a * self.ones + c] = v;
            }
        }
        b
    }

    /// `Γ` is bipartite between the two output classes, so `‖Γ‖` is the top
    /// singular value of `B` and `∂‖Γ‖/∂w_ab = u_a·v_b`.
    fn evaluate(&self, w: &[f64], temp: f64) -> Result<Eval> {
        let (z, o) = (self.zeros, self.ones);
        let (norm, u, v) = top_singular(&self.block_matrix(w, None), z, o)?;
        if norm == 0.0 {
            return Ok(Eval {
                value: 0.0,
                smooth: f64::NEG_INFINITY,
                grad: vec![0.0; w.len()],
            });
        }
        let n = self.f.arity();
        let mut logs = vec![f64::NEG_INFINITY; n];
        let mut masked = vec![(0.0, Vec::new(), Vec::new()); n];
        for i in 0..n {
            let r = top_singular(&self.block_matrix(w, Some(i)), z, o)?;
            if r.0 > 0.0 {
                logs[i] = (r.0 / self.alpha[i]).ln();
                masked[i] = r;
            }
        }
        let worst = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = logs.iter().map(|z| ((z - worst) / temp).exp()).collect();
        let total: f64 = weights.iter().sum();
        let smooth = norm.ln() - (worst + temp * total.ln());
        let value = self
            .alpha
            .iter()
            .zip(&masked)
            .filter(|(_, m)| m.0 > 0.0)
            .map(|(a, m)| a * (norm / m.0))
            .fold(f64::INFINITY, f64::min);

        let grad = self
            .block
            .iter()
            .zip(&self.diff_bits)
            .map(|(&(a, b), bits)| {
                let mut g = u[a] * v[b] / norm;
                for &i in bits {
                    let (s, mu, mv) = &masked[i];
                    if *s > 0.0 {
                        g -= (weights[i] / total) * mu[a] * mv[b] / s;
                    }
                }
                g
            })
            .collect();
        Ok(Eval {
            value,
            smooth,
            grad,
        })
    }

    fn run(&self, opts: &SolverOptions, restart: usize) -> Result<(Vec<f64>, f64, usize)> {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(restart as u64));
        let mut w: Vec<f64> = if restart == 0 {
            vec![1.0; self.pairs.len()]
        } else {
            (0..self.pairs.len()).map(|_| rng.gen_range(FLOOR..1.0)).collect()
        };
        normalize(&mut w);

        let mut step = opts.step_size;
        let mut eval_temp = opts.temperature(0);
        let mut eval = self.evaluate(&w, eval_temp)?;
        let mut best = (w.clone(), eval.value);
        let mut last_gain = 0;
        let mut iters = 0;
        for t in 0..opts.max_iters {
            iters = t + 1;
            let temp = opts.temperature(t);
            if temp != eval_temp {
                eval = self.evaluate(&w, temp)?;
                eval_temp = temp;
            }
            let gnorm = eval.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm == 0.0 || !gnorm.is_finite() {
                break;
            }
            loop {
                let mut cand: Vec<f64> = w
                    .iter()
                    .zip(&eval.grad)
                    .map(|(wi, gi)| (wi + step * gi / gnorm).max(FLOOR))
                    .collect();
                if normalize(&mut cand) == 0.0 {
                    step *= 0.5;
                    continue;
                }
                let next = self.evaluate(&cand, temp)?;
                if next.smooth >= eval.smooth {
                    w = cand;
                    eval = next;
                    step = (step * 1.5).min(MAX_STEP);
                    break;
                }
                step *= 0.5;
                if step < MIN_STEP {
                    break;
                }
            }
            if eval.value > best.1 * (1.0 + 1e-12) {
                best = (w.clone(), eval.value);
                last_gain = t;
            }
            let settled = temp <= opts.temp_end;
            if settled && (step < MIN_STEP || t.saturating_sub(last_gain.max(opts.max_iters / 2)) > STALL_ITERS) {
                break;
            }
            if step < MIN_STEP {
                step = MIN_STEP * 16.0;
            }
        }
        let (w, value) = self.polish(best.0)?;
        Ok((w, value, iters))
    }

    /// Snaps entries below a threshold to zero when that raises the value.
    fn polish(&self, w: Vec<f64>) -> Result<(Vec<f64>, f64)> {
        let mut best_value = self.evaluate(&w, 1.0)?.value;
        let mut best = w.clone();
        for k in 2..=6 {
            let cut = 10f64.powi(-k);
            let q: Vec<f64> = w.iter().map(|&v| if v < cut { 0.0 } else { v }).collect();
            if q.iter().all(|&v| v == 0.0) {
                continue;
            }
            let value = self.evaluate(&q, 1.0)?.value;
            if value > best_value {
                best_value = value;
                best = q;
            }
        }
        Ok((best, best_value))
    }
}

fn normalize(w: &mut [f64]) -> f64 {
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        w.iter_mut().for_each(|v| *v /= n);
    }
    n
}

/// Searches for `Γ` maximising `adv_value(Γ, α)`. Always returns a valid
/// adversary matrix; non-convergence shows up as a weaker value.
pub fn maximize_adv(
    f: &BooleanFunction,
    alpha: &CostVector,
    opts: &SolverOptions,
) -> Result<SolveOutcome<AdversaryMatrix>> {
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
            certificate: AdversaryMatrix::zero(f.clone())?,
            value: 0.0,
            iterations: 0,
            best_restart: 0,
        });
    }
    let problem = Problem::new(f, alpha.as_slice());
    let best = opts.best_of(|restart| problem.run(opts, restart), |a, b| a > b)?;
    let gamma = AdversaryMatrix::new(f.clone(), problem.matrix(&best.item)?)?;
    // report the value exactly as the evaluator computes it
    let value = adv_value(&gamma, alpha)?;
    Ok(SolveOutcome {
        certificate: gamma,
        value,
        iterations: best.iterations,
        best_restart: best.restart,
    })
}
