use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryMatrix, MinimaxWitness};
use crate::boolfn::{make_family, Family};
use crate::error::{Error, Result};
use crate::specmat::SymMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    And,
    Or,
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "and" => Ok(Gate::And),
            "or" => Ok(Gate::Or),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gate::And => "and",
            Gate::Or => "or",
        })
    }
}

/// Closed-form optimum of a two-input gate with input costs `β`.
#[derive(Clone, Debug, PartialEq)]
pub struct GadgetBound {
    pub value: f64,
    pub gamma: AdversaryMatrix,
    pub witness: MinimaxWitness,
}

/// `ADV_β(AND) = ADV_β(OR) = √(β₁² + β₂²)`.
///
/// The AND matrix puts `β₁` on `{01, 11}` and `β₂` on `{10, 11}`; the
/// distributions are `p_01 = (1, 0)`, `p_10 = (0, 1)` and
/// `p_00 = p_11 = (β₁², β₂²)/(β₁² + β₂²)`. OR uses the same objects with every
/// input string complemented.
pub fn gadget_cost_adv(gate: Gate, beta: (f64, f64)) -> Result<GadgetBound> {
    let (b1, b2) = beta;
    if !(b1.is_finite() && b2.is_finite() && b1 > 0.0 && b2 > 0.0) {
        return Err(Error::InvalidCost(format!(
            "gadget costs must be positive, got ({b1}, {b2})"
        )));
    }
    let s = b1 * b1 + b2 * b2;
    let mixed = vec![b1 * b1 / s, b2 * b2 / s];
    // rows in lexicographic order 00, 01, 10, 11
    let (edges, rows) = match gate {
        Gate::And => (
            [(1, 3, b1), (2, 3, b2)],
            vec![mixed.clone(), vec![1.0, 0.0], vec![0.0, 1.0], mixed],
        ),
        Gate::Or => (
            [(2, 0, b1), (1, 0, b2)],
            vec![mixed.clone(), vec![0.0, 1.0], vec![1.0, 0.0], mixed],
        ),
    };
    let function = make_family(
        match gate {
            Gate::And => Family::And,
            Gate::Or => Family::Or,
        },
        2,
    )?;
    let mut m = SymMatrix::zeros(function.domain().to_vec())?;
    for (r, c, w) in edges {
        m.set(r, c, w);
    }
    Ok(GadgetBound {
        value: b1.hypot(b2),
        gamma: AdversaryMatrix::new(function.clone(), m)?,
        witness: MinimaxWitness::new(function, rows)?,
    })
}
