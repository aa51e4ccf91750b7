//! Boolean functions on explicit (possibly partial) domains.

mod bits;
mod compose;
mod formula;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

pub use bits::BitString;
pub use compose::{compose_functions, iterate_function, CompositionLayout, CompositionSpec};
pub use formula::{formula_to_function, parse_formula, Formula, FormulaAst};

use crate::error::{Error, Result};

/// Default cap on the total arity of constructed functions (4096-row domain).
pub const DEFAULT_MAX_ARITY: usize = 12;

/// A map `f: S -> {0,1}` with `S ⊆ {0,1}^n` kept in a fixed order.
#[derive(Clone)]
pub struct BooleanFunction {
    arity: usize,
    domain: Vec<BitString>,
    values: Vec<bool>,
    index: HashMap<BitString, usize>,
}

impl BooleanFunction {
    /// Builds a function from `(input, value)` rows. Rows keep their order.
    pub fn new(arity: usize, rows: impl IntoIterator<Item = (BitString, bool)>) -> Result<Self> {
        if arity == 0 {
            return Err(Error::InvalidFunction("arity must be positive".into()));
        }
        let mut domain = Vec::new();
        let mut values = Vec::new();
        let mut index = HashMap::new();
        for (x, v) in rows {
            if x.len() != arity {
                return Err(Error::InvalidFunction(format!(
                    "input {x} has length {} but arity is {arity}",
                    x.len()
                )));
            }
            if index.insert(x.clone(), domain.len()).is_some() {
                return Err(Error::InvalidFunction(format!("duplicate input {x}")));
            }
            domain.push(x);
            values.push(v);
        }
        Ok(BooleanFunction {
            arity,
            domain,
            values,
            index,
        })
    }

    /// The total function on `{0,1}^arity` given by `eval`, in lexicographic order.
    pub fn total(arity: usize, eval: impl Fn(&BitString) -> bool) -> Result<Self> {
        Self::new(arity, BitString::all(arity).map(|x| {
            let v = eval(&x);
            (x, v)
        }))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> &[BitString] {
        &self.domain
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn index_of(&self, x: &BitString) -> Option<usize> {
        self.index.get(x).copied()
    }

    pub fn value(&self, x: &BitString) -> Option<bool> {
        self.index_of(x).map(|i| self.values[i])
    }

    pub fn value_at(&self, row: usize) -> bool {
        self.values[row]
    }

    pub fn is_total(&self) -> bool {
        self.domain.len() == 1usize << self.arity
    }

    /// True when no two domain points take different values (including the
    /// empty domain).
    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn rows(&self) -> impl Iterator<Item = (&BitString, bool)> {
        self.domain.iter().zip(self.values.iter().copied())
    }

    /// Same domain, outputs flipped.
    pub fn negate(&self) -> BooleanFunction {
        BooleanFunction {
            values: self.values.iter().map(|v| !v).collect(),
            ..self.clone()
        }
    }

    /// Renames input positions: bit `k` (0-based) of each old string moves to
    /// position `target[k]` of the new string. Row order is preserved.
    pub fn permute_inputs(&self, target: &[usize]) -> Result<BooleanFunction> {
        if target.len() != self.arity {
            return Err(Error::Mismatch(format!(
                "permutation of length {} for arity {}",
                target.len(),
                self.arity
            )));
        }
        let mut seen = vec![false; self.arity];
        for &t in target {
            if t >= self.arity || std::mem::replace(&mut seen[t], true) {
                return Err(Error::Mismatch("not a permutation".into()));
            }
        }
        Self::new(
            self.arity,
            self.rows().map(|(x, v)| (permute_bits(x, target), v)),
        )
    }

    /// Equality of the underlying partial maps, ignoring row order.
    pub fn same_map(&self, other: &BooleanFunction) -> bool {
        self.arity == other.arity
            && self.len() == other.len()
            && self.rows().all(|(x, v)| other.value(x) == Some(v))
    }
}

pub(crate) fn permute_bits(x: &BitString, target: &[usize]) -> BitString {
    let mut bits = vec![false; x.len()];
    for (k, &b) in x.bits().iter().enumerate() {
        bits[target[k]] = b;
    }
    BitString::new(bits)
}

/// Row-for-row equality: same arity, same domain order, same values.
impl PartialEq for BooleanFunction {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.domain == other.domain && self.values == other.values
    }
}

impl Eq for BooleanFunction {}

impl fmt::Debug for BooleanFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .map(|(x, v)| format!("{x}:{}", v as u8))
            .collect();
        write!(f, "BooleanFunction(n={}, [{}])", self.arity, rows.join(" "))
    }
}

/// Named fixture families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    And,
    Or,
    Parity,
    Nand,
    Id,
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Family::And),
            "or" => Ok(Family::Or),
            "parity" | "xor" => Ok(Family::Parity),
            "nand" => Ok(Family::Nand),
            "id" => Ok(Family::Id),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::And => "and",
            Family::Or => "or",
            Family::Parity => "parity",
            Family::Nand => "nand",
            Family::Id => "id",
        })
    }
}

/// The named total function on `n` bits. `ID` on `n > 1` bits returns the
/// first bit.
pub fn make_family(family: Family, n: usize) -> Result<BooleanFunction> {
    if n == 0 {
        return Err(Error::InvalidFunction("family arity must be positive".into()));
    }
    BooleanFunction::total(n, |x| match family {
        Family::And => x.count_ones() == n,
        Family::Or => x.count_ones() > 0,
        Family::Parity => x.count_ones() % 2 == 1,
        Family::Nand => x.count_ones() != n,
        Family::Id => x.bits()[0],
    })
}

/// `make_family` keyed by name.
pub fn make_family_named(name: &str, n: usize) -> Result<BooleanFunction> {
    make_family(name.parse()?, n)
}
