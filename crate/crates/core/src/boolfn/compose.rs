use super::{BitString, BooleanFunction, DEFAULT_MAX_ARITY};
use crate::error::{Error, Result};

/// `h = f ∘ (g_1, …, g_k)` on disjoint consecutive input blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct CompositionSpec {
    outer: BooleanFunction,
    inner: Vec<BooleanFunction>,
    offsets: Vec<usize>,
    max_arity: usize,
}

impl CompositionSpec {
    pub fn new(outer: BooleanFunction, inner: Vec<BooleanFunction>) -> Result<Self> {
        if inner.len() != outer.arity() {
            return Err(Error::Mismatch(format!(
                "outer arity {} but {} inner functions",
                outer.arity(),
                inner.len()
            )));
        }
        let offsets = inner
            .iter()
            .scan(0, |acc, g| {
                let start = *acc;
                *acc += g.arity();
                Some(start)
            })
            .collect();
        Ok(CompositionSpec {
            outer,
            inner,
            offsets,
            max_arity: DEFAULT_MAX_ARITY,
        })
    }

    pub fn with_max_arity(mut self, cap: usize) -> Self {
        self.max_arity = cap;
        self
    }

    pub fn outer(&self) -> &BooleanFunction {
        &self.outer
    }

    pub fn inner(&self) -> &[BooleanFunction] {
        &self.inner
    }

    /// 0-based start of each block in the concatenated input.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn k(&self) -> usize {
        self.inner.len()
    }

    pub fn total_arity(&self) -> usize {
        self.inner.iter().map(BooleanFunction::arity).sum()
    }

    pub fn max_arity(&self) -> usize {
        self.max_arity
    }

    /// Maps a 1-based global bit index to (block, inner index), both 1-based.
    pub fn locate(&self, ell: usize) -> Result<(usize, usize)> {
        let n = self.total_arity();
        if ell == 0 || ell > n {
            return Err(Error::IndexOutOfRange { index: ell, len: n });
        }
        let block = self.offsets.partition_point(|&o| o < ell) - 1;
        Ok((block + 1, ell - self.offsets[block]))
    }

    /// Splits `x` into blocks and evaluates the inner functions on them.
    pub fn split_input(&self, x: &BitString) -> Result<(Vec<BitString>, BitString)> {
        if x.len() != self.total_arity() {
            return Err(Error::Mismatch(format!(
                "input {x} has length {} but total arity is {}",
                x.len(),
                self.total_arity()
            )));
        }
        let mut blocks = Vec::with_capacity(self.k());
        let mut tilde = Vec::with_capacity(self.k());
        for (i, g) in self.inner.iter().enumerate() {
            let block = x.slice(self.offsets[i], g.arity());
            let v = g.value(&block).ok_or_else(|| Error::OutsideInnerDomain {
                block: i + 1,
                bits: block.to_string(),
            })?;
            blocks.push(block);
            tilde.push(v);
        }
        Ok((blocks, BitString::new(tilde)))
    }

    /// Enumerates the composed domain with row bookkeeping.
    pub fn layout(&self) -> Result<CompositionLayout> {
        let n = self.total_arity();
        if n > self.max_arity {
            return Err(Error::SizeCap {
                arity: n,
                cap: self.max_arity,
            });
        }
        let mut rows = Vec::new();
        let mut outer_rows = Vec::new();
        let mut inner_rows = Vec::new();
        let mut choice = vec![0usize; self.k()];
        if self.inner.iter().any(BooleanFunction::is_empty) {
            return CompositionLayout::build(n, rows, outer_rows, inner_rows);
        }
        // odometer over inner domains, block 1 most significant
        loop {
            let tilde = BitString::new(
                self.inner
                    .iter()
                    .zip(&choice)
                    .map(|(g, &r)| g.value_at(r))
                    .collect(),
            );
            if let Some(o) = self.outer.index_of(&tilde) {
                let x = BitString::concat(
                    self.inner.iter().zip(&choice).map(|(g, &r)| &g.domain()[r]),
                );
                rows.push((x, self.outer.value_at(o)));
                outer_rows.push(o);
                inner_rows.push(choice.clone());
            }
            let mut pos = self.k();
            loop {
                if pos == 0 {
                    return CompositionLayout::build(n, rows, outer_rows, inner_rows);
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < self.inner[pos].len() {
                    break;
                }
                choice[pos] = 0;
            }
        }
    }
}

/// The composed function together with, for each of its rows, the row of
/// `x̃` in the outer domain and the row of each block in its inner domain.
#[derive(Clone, Debug)]
pub struct CompositionLayout {
    pub function: BooleanFunction,
    pub outer_rows: Vec<usize>,
    pub inner_rows: Vec<Vec<usize>>,
}

impl CompositionLayout {
    fn build(
        n: usize,
        rows: Vec<(BitString, bool)>,
        outer_rows: Vec<usize>,
        inner_rows: Vec<Vec<usize>>,
    ) -> Result<Self> {
        Ok(CompositionLayout {
            function: BooleanFunction::new(n, rows)?,
            outer_rows,
            inner_rows,
        })
    }
}

/// `h(x) = f(g_1(x^1), …, g_k(x^k))` on
/// `S_h = { x : x^i ∈ S_{g_i} for all i, x̃ ∈ S_f }`.
pub fn compose_functions(spec: &CompositionSpec) -> Result<BooleanFunction> {
    Ok(spec.layout()?.function)
}

/// `f^1 = f`, `f^{d+1} = f ∘ (f^d, …, f^d)`.
pub fn iterate_function(f: &BooleanFunction, d: usize, max_arity: usize) -> Result<BooleanFunction> {
    if d == 0 {
        return Err(Error::InvalidFunction("iteration depth must be positive".into()));
    }
    if !f.is_total() {
        return Err(Error::InvalidFunction("iteration requires a total function".into()));
    }
    let arity = f
        .arity()
        .checked_pow(d as u32)
        .filter(|&a| a <= max_arity)
        .ok_or(Error::SizeCap {
            arity: f.arity().saturating_pow(d as u32),
            cap: max_arity,
        })?;
    let mut current = f.clone();
    for _ in 1..d {
        let spec = CompositionSpec::new(f.clone(), vec![current; f.arity()])?
            .with_max_arity(max_arity);
        current = compose_functions(&spec)?;
    }
    debug_assert_eq!(current.arity(), arity);
    Ok(current)
}
