//! Read-once formula parsing and evaluation.
//!
//! Grammar (ASCII, whitespace ignored):
//!
//! ```text
//! or    := and ('|' and)*
//! and   := unary ('&' unary)*
//! unary := '~' unary | atom
//! atom  := 'x' digits | '(' or ')'
//! ```
//!
//! Variables are 1-based. Chains of the same operator associate left.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::{BitString, BooleanFunction};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    Var(usize),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn var(i: usize) -> Self {
        Formula::Var(i)
    }

    pub fn not(child: Formula) -> Self {
        Formula::Not(Box::new(child))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    /// Leaf indices in left-to-right order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<usize>) {
        match self {
            Formula::Var(i) => out.push(*i),
            Formula::Not(c) => c.collect_leaves(out),
            Formula::And(l, r) | Formula::Or(l, r) => {
                l.collect_leaves(out);
                r.collect_leaves(out);
            }
        }
    }

    /// Evaluates with `x` indexed by 1-based variable.
    pub fn eval(&self, x: &BitString) -> bool {
        match self {
            Formula::Var(i) => x.bits()[i - 1],
            Formula::Not(c) => !c.eval(x),
            Formula::And(l, r) => l.eval(x) && r.eval(x),
            Formula::Or(l, r) => l.eval(x) || r.eval(x),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Or(..) => 0,
            Formula::And(..) => 1,
            Formula::Not(_) | Formula::Var(_) => 2,
        }
    }

    fn fmt_child(&self, child: &Formula, right: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let own = self.precedence();
        let theirs = child.precedence();
        // left-associative: a right operand of equal precedence needs parens
        if theirs < own || (right && theirs == own && own < 2) {
            write!(f, "({child})")
        } else {
            write!(f, "{child}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Var(i) => write!(f, "x{i}"),
            Formula::Not(c) => {
                f.write_str("~")?;
                self.fmt_child(c, false, f)
            }
            Formula::And(l, r) | Formula::Or(l, r) => {
                self.fmt_child(l, false, f)?;
                f.write_str(if matches!(self, Formula::And(..)) { " & " } else { " | " })?;
                self.fmt_child(r, true, f)
            }
        }
    }
}

/// A parsed formula together with its read-once flag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaAst {
    pub root: Formula,
    /// Each variable index occurs in at most one leaf.
    pub read_once: bool,
}

impl FormulaAst {
    pub fn new(root: Formula) -> Self {
        let mut leaves = root.leaves();
        let total = leaves.len();
        leaves.sort_unstable();
        leaves.dedup();
        FormulaAst {
            read_once: leaves.len() == total,
            root,
        }
    }

    pub fn max_var(&self) -> usize {
        self.root.leaves().into_iter().max().unwrap_or(0)
    }

    /// Checks that every variable `1..=n` occurs exactly once.
    pub fn check_read_once_cover(&self, n: usize) -> Result<()> {
        let mut leaves = self.root.leaves();
        leaves.sort_unstable();
        if leaves != (1..=n).collect::<Vec<_>>() {
            let shown: Vec<String> = leaves.iter().map(|i| format!("x{i}")).collect();
            return Err(Error::NotReadOnce(format!(
                "leaves [{}] do not cover x1..x{n} exactly once",
                shown.join(", ")
            )));
        }
        Ok(())
    }
}

pub fn parse_formula(text: &str) -> Result<FormulaAst> {
    let mut p = Parser {
        chars: text.char_indices().collect(),
        pos: 0,
        len: text.len(),
    };
    let root = p.or_expr()?;
    p.skip_ws();
    if let Some(&(at, c)) = p.chars.get(p.pos) {
        return Err(Error::Syntax {
            position: at,
            message: format!("unexpected {c:?}"),
        });
    }
    Ok(FormulaAst::new(root))
}

struct Parser {
    chars: Vec<(usize, char)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|(_, c)| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn offset(&self) -> usize {
        self.chars.get(self.pos).map_or(self.len, |&(at, _)| at)
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn or_expr(&mut self) -> Result<Formula> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            lhs = Formula::or(lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.peek() == Some('~') {
            self.pos += 1;
            return Ok(Formula::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        let start = {
            self.skip_ws();
            self.offset()
        };
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.or_expr()?;
                if self.peek() != Some(')') {
                    return Err(Error::Syntax {
                        position: self.offset(),
                        message: "expected ')'".into(),
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            Some('x') => {
                self.pos += 1;
                let mut digits = String::new();
                while let Some(&(_, c)) = self.chars.get(self.pos) {
                    if !c.is_ascii_digit() {
                        break;
                    }
                    digits.push(c);
                    self.pos += 1;
                }
                if digits.is_empty() {
                    return Err(Error::Syntax {
                        position: self.offset(),
                        message: "expected digits after 'x'".into(),
                    });
                }
                let index: usize = digits.parse().map_err(|_| Error::Syntax {
                    position: start,
                    message: format!("variable index {digits} too large"),
                })?;
                if index == 0 {
                    return Err(Error::ZeroVariable { position: start });
                }
                Ok(Formula::Var(index))
            }
            Some(c) => Err(Error::Syntax {
                position: start,
                message: format!("unexpected {c:?}"),
            }),
            None => Err(Error::Syntax {
                position: start,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Truth table of `ast` on `{0,1}^n`.
pub fn formula_to_function(ast: &FormulaAst, n: usize) -> Result<BooleanFunction> {
    if let Some(&bad) = ast.root.leaves().iter().find(|&&i| i > n) {
        return Err(Error::LeafOutOfRange { index: bad, arity: n });
    }
    BooleanFunction::total(n, |x| ast.root.eval(x))
}
