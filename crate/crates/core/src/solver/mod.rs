//! Numerical search for adversary certificates.
//!
//! A lower certificate is any valid adversary matrix `Γ` (its `adv_value` is
//! a lower bound on `ADV_α(f)`), an upper certificate is any set of
//! distributions `p` (its `mm_value` is an upper bound). [`certify`] runs
//! both searches and reports the bracket; weak duality keeps the bracket
//! honest whether or not either search converged.

mod dual;
mod gadget;
mod primal;
mod readonce;
mod verify;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use dual::minimize_mm;
pub use gadget::{gadget_cost_adv, Gate, GadgetBound};
pub use primal::maximize_adv;
pub use readonce::{readonce_bound, readonce_certificate, ReadOnceBound, ReadOnceCertificate, TraceStep};
pub use verify::{
    verify_composition, verify_iteration, Bracket, CompositionReport, IterationReport,
};

use crate::adversary::{AdversaryMatrix, CostVector, MinimaxWitness};
use crate::boolfn::BooleanFunction;
use crate::error::{Error, Result};

/// Largest arity the optimisers accept by default (32-row domains).
pub const DEFAULT_OPTIMIZER_MAX_ARITY: usize = 5;

/// Slack allowed on weak duality checks.
pub const DUALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub restarts: usize,
    pub max_iters: usize,
    /// Smoothing temperature at the first iteration.
    pub temp_start: f64,
    /// Smoothing temperature reached halfway through and kept afterwards.
    pub temp_end: f64,
    /// Initial step length (in units of the normalised iterate).
    pub step_size: f64,
    pub seed: u64,
    pub target_gap: f64,
    /// Worker threads for restarts; 1 runs them in order on the caller.
    pub jobs: usize,
    pub max_arity: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            restarts: 8,
            max_iters: 5000,
            temp_start: 0.05,
            temp_end: 1e-4,
            step_size: 0.1,
            seed: 0,
            target_gap: 1e-3,
            jobs: 1,
            max_arity: DEFAULT_OPTIMIZER_MAX_ARITY,
        }
    }
}

impl SolverOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("restarts", self.restarts as f64),
            ("max_iters", self.max_iters as f64),
            ("temp_start", self.temp_start),
            ("temp_end", self.temp_end),
            ("step_size", self.step_size),
            ("target_gap", self.target_gap),
            ("jobs", self.jobs as f64),
            ("max_arity", self.max_arity as f64),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidOptions(format!("{name} must be positive")));
            }
        }
        if self.temp_end > self.temp_start {
            return Err(Error::InvalidOptions(
                "temp_end must not exceed temp_start".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_arity(&self, f: &BooleanFunction) -> Result<()> {
        if f.arity() > self.max_arity {
            return Err(Error::SizeCap {
                arity: f.arity(),
                cap: self.max_arity,
            });
        }
        Ok(())
    }

    /// Geometric schedule from `temp_start` down to `temp_end` at the halfway
    /// point, flat afterwards.
    pub(crate) fn temperature(&self, iter: usize) -> f64 {
        let half = (self.max_iters / 2).max(1);
        if iter >= half {
            return self.temp_end;
        }
        let t = iter as f64 / half as f64;
        self.temp_start * (self.temp_end / self.temp_start).powf(t)
    }

    /// Runs `run(restart)` for every restart and keeps the best score; ties go
    /// to the lowest restart index.
    pub(crate) fn best_of<T: Send>(
        &self,
        run: impl Fn(usize) -> Result<(T, f64, usize)> + Sync,
        better: impl Fn(f64, f64) -> bool,
    ) -> Result<RestartOutcome<T>> {
        let results: Vec<Result<(T, f64, usize)>> = if self.jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(self.jobs)
                .build()
                .map_err(|e| Error::InvalidOptions(e.to_string()))?;
            pool.install(|| (0..self.restarts).into_par_iter().map(&run).collect())
        } else {
            (0..self.restarts).map(&run).collect()
        };
        let mut best: Option<RestartOutcome<T>> = None;
        let mut iterations = 0;
        for (restart, r) in results.into_iter().enumerate() {
            let (item, score, iters) = r?;
            iterations += iters;
            if best.as_ref().is_none_or(|b| better(score, b.score)) {
                best = Some(RestartOutcome {
                    item,
                    score,
                    restart,
                    iterations: 0,
                });
            }
        }
        let mut best = best.expect("at least one restart");
        best.iterations = iterations;
        Ok(best)
    }
}

pub(crate) struct RestartOutcome<T> {
    pub item: T,
    pub score: f64,
    pub restart: usize,
    pub iterations: usize,
}

/// Where a certificate came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub seed: u64,
    pub restarts: usize,
    pub lower_iterations: usize,
    pub upper_iterations: usize,
    pub lower_best_restart: usize,
    pub upper_best_restart: usize,
}

/// A matched lower/upper pair for `ADV_α(f) = MM_α(f)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCertificate {
    pub function: BooleanFunction,
    pub alpha: CostVector,
    pub lower: AdversaryMatrix,
    pub lower_value: f64,
    pub upper: MinimaxWitness,
    pub upper_value: f64,
    pub gap: f64,
    /// `gap <= target_gap`.
    pub tight: bool,
    pub metadata: SolverMetadata,
}

impl BoundCertificate {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower_value + self.upper_value)
    }

    pub fn bracket(&self) -> Bracket {
        Bracket::new(self.lower_value, self.upper_value)
    }
}

/// Output of one optimiser run.
#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutcome<T> {
    pub certificate: T,
    pub value: f64,
    pub iterations: usize,
    pub best_restart: usize,
}

/// Runs both optimisers and brackets `ADV_α(f)`.
pub fn certify(f: &BooleanFunction, alpha: &CostVector, opts: &SolverOptions) -> Result<BoundCertificate> {
    let lower = maximize_adv(f, alpha, opts)?;
    let upper = minimize_mm(f, alpha, opts)?;
    let gap = upper.value - lower.value;
    Ok(BoundCertificate {
        function: f.clone(),
        alpha: alpha.clone(),
        lower_value: lower.value,
        upper_value: upper.value,
        lower: lower.certificate,
        upper: upper.certificate,
        gap,
        tight: gap <= opts.target_gap,
        metadata: SolverMetadata {
            seed: opts.seed,
            restarts: opts.restarts,
            lower_iterations: lower.iterations,
            upper_iterations: upper.iterations,
            lower_best_restart: lower.best_restart,
            upper_best_restart: upper.best_restart,
        },
    })
}
