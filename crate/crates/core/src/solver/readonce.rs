//! The read-once recursion: a leaf costs its own `α_i`, negation is free, and
//! a binary gate whose children are worth `β₁`, `β₂` is worth
//! `√(β₁² + β₂²)`. With unit costs every read-once formula on `n` variables
//! evaluates to `√n`.

use serde::Serialize;

use super::gadget::{gadget_cost_adv, Gate};
use crate::adversary::{compose_gamma, compose_minimax, AdversaryMatrix, CostVector, MinimaxWitness};
use crate::boolfn::{make_family, permute_bits, BooleanFunction, CompositionSpec, Family, Formula, FormulaAst};
use crate::error::{Error, Result};

/// One node of the bottom-up evaluation, in post-order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceStep {
    pub node: String,
    pub kind: &'static str,
    pub children: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReadOnceBound {
    pub value: f64,
    pub trace: Vec<TraceStep>,
}

fn check(ast: &FormulaAst, alpha: &CostVector) -> Result<()> {
    if !ast.read_once {
        return Err(Error::NotReadOnce("a variable occurs more than once".into()));
    }
    ast.check_read_once_cover(alpha.len())
}

/// Bound of a read-once formula over `x1..xn` with costs `α` (`n = α.len()`).
pub fn readonce_bound(ast: &FormulaAst, alpha: &CostVector) -> Result<ReadOnceBound> {
    check(ast, alpha)?;
    let mut trace = Vec::new();
    let value = walk(&ast.root, alpha, &mut trace)?;
    Ok(ReadOnceBound { value, trace })
}

fn walk(node: &Formula, alpha: &CostVector, trace: &mut Vec<TraceStep>) -> Result<f64> {
    let (kind, children, value) = match node {
        Formula::Var(i) => ("leaf", vec![], alpha.get(i - 1)),
        Formula::Not(c) => {
            let v = walk(c, alpha, trace)?;
            ("not", vec![v], v)
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            let gate = if matches!(node, Formula::And(..)) { Gate::And } else { Gate::Or };
            let b1 = walk(l, alpha, trace)?;
            let b2 = walk(r, alpha, trace)?;
            let g = gadget_cost_adv(gate, (b1, b2))?;
            (if gate == Gate::And { "and" } else { "or" }, vec![b1, b2], g.value)
        }
    };
    trace.push(TraceStep {
        node: node.to_string(),
        kind,
        children,
        value,
    });
    Ok(value)
}

/// Explicit matched certificates for a read-once formula, built by composing
/// gate gadgets along the tree.
#[derive(Clone, Debug)]
pub struct ReadOnceCertificate {
    pub value: f64,
    /// The formula's truth table over `x1..xn`.
    pub function: BooleanFunction,
    pub gamma: AdversaryMatrix,
    pub witness: MinimaxWitness,
}

struct Built {
    value: f64,
    gamma: AdversaryMatrix,
    witness: MinimaxWitness,
}

/// Builds `Γ` and `p` for the formula through [`compose_gamma`] and
/// [`compose_minimax`]. Their values both equal [`readonce_bound`].
pub fn readonce_certificate(ast: &FormulaAst, alpha: &CostVector) -> Result<ReadOnceCertificate> {
    check(ast, alpha)?;
    let leaves = ast.root.leaves();
    let leaf_alpha = CostVector::new(leaves.iter().map(|&i| alpha.get(i - 1)).collect())?;
    let mut offset = 0;
    let built = build(&ast.root, &leaf_alpha, &mut offset)?;

    // leaf k of the tree is variable leaves[k]
    let target: Vec<usize> = leaves.iter().map(|&i| i - 1).collect();
    let (function, matrix) = built.gamma.into_parts();
    let function = function.permute_inputs(&target)?;
    let labels = function.domain().to_vec();
    let gamma = AdversaryMatrix::new(function.clone(), matrix.relabeled(labels)?)?;
    let rows = built
        .witness
        .rows()
        .iter()
        .map(|row| {
            let mut out = vec![0.0; row.len()];
            for (k, &v) in row.iter().enumerate() {
                out[target[k]] = v;
            }
            out
        })
        .collect();
    let witness = MinimaxWitness::new(function.clone(), rows)?;
    debug_assert!(function
        .domain()
        .iter()
        .zip(built.witness.function().domain())
        .all(|(a, b)| *a == permute_bits(b, &target)));
    Ok(ReadOnceCertificate {
        value: built.value,
        function,
        gamma,
        witness,
    })
}

fn build(node: &Formula, leaf_alpha: &CostVector, offset: &mut usize) -> Result<Built> {
    match node {
        Formula::Var(_) => {
            let id = make_family(Family::Id, 1)?;
            let value = leaf_alpha.get(*offset);
            *offset += 1;
            Ok(Built {
                value,
                gamma: AdversaryMatrix::from_pair_weights(id.clone(), |_, _| 1.0)?,
                witness: MinimaxWitness::new(id, vec![vec![1.0]; 2])?,
            })
        }
        Formula::Not(c) => {
            let inner = build(c, leaf_alpha, offset)?;
            let (f, m) = inner.gamma.into_parts();
            let negated = f.negate();
            Ok(Built {
                value: inner.value,
                gamma: AdversaryMatrix::new(negated.clone(), m)?,
                witness: MinimaxWitness::new(negated, inner.witness.rows().to_vec())?,
            })
        }
        Formula::And(l, r) | Formula::Or(l, r) => {
            let gate = if matches!(node, Formula::And(..)) { Gate::And } else { Gate::Or };
            let left = build(l, leaf_alpha, offset)?;
            let right = build(r, leaf_alpha, offset)?;
            let gadget = gadget_cost_adv(gate, (left.value, right.value))?;
            let spec = CompositionSpec::new(
                gadget.gamma.function().clone(),
                vec![left.gamma.function().clone(), right.gamma.function().clone()],
            )?;
            Ok(Built {
                value: gadget.value,
                gamma: compose_gamma(&gadget.gamma, &[left.gamma, right.gamma], &spec)?,
                witness: compose_minimax(&gadget.witness, &[left.witness, right.witness], &spec)?,
            })
        }
    }
}
