//! Linear program representations.
//!
//! [`GeneralLp`] is what users write: either objective sense, `<=`/`=`/`>=`
//! rows, free or nonnegative variables. [`CanonicalLp`] is the single form the
//! tableau builder and the simplex referee consume:
//!
//! ```text
//! maximize c.x  subject to  A x <= b,  x >= 0
//! ```

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarBound {
    Nonnegative,
    Free,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    #[serde(with = "rational::serde_text::vec")]
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    #[serde(with = "rational::serde_text")]
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("constraint {row} has {found} coefficients, expected {expected}")]
    RowLength {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("{found} variable bounds given for {expected} variables")]
    BoundsLength { found: usize, expected: usize },
    #[error("matrix has {rows} rows but rhs has {rhs} entries")]
    RhsLength { rows: usize, rhs: usize },
    #[error("solution has {found} entries, expected {expected}")]
    SolutionLength { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralLp {
    pub sense: Sense,
    #[serde(with = "rational::serde_text::vec")]
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<VarBound>,
}

impl GeneralLp {
    pub fn new(
        sense: Sense,
        objective: Vec<Rational>,
        constraints: Vec<Constraint>,
        bounds: Vec<VarBound>,
    ) -> Result<Self, LpError> {
        let lp = GeneralLp {
            sense,
            objective,
            constraints,
            bounds,
        };
        lp.validate()?;
        Ok(lp)
    }

    /// All variables nonnegative.
    pub fn nonnegative(
        sense: Sense,
        objective: Vec<Rational>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LpError> {
        let n = objective.len();
        Self::new(sense, objective, constraints, vec![VarBound::Nonnegative; n])
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.bounds.len() != n {
            return Err(LpError::BoundsLength {
                found: self.bounds.len(),
                expected: n,
            });
        }
        for (row, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::RowLength {
                    row,
                    found: c.coeffs.len(),
                    expected: n,
                });
            }
        }
        Ok(())
    }

    /// Objective value of `x` in this problem's own sense.
    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x)
    }

    /// Exact feasibility test for a point in the original variables.
    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars() {
            return false;
        }
        let bounds_ok = self
            .bounds
            .iter()
            .zip(x)
            .all(|(b, v)| *b == VarBound::Free || !v.is_negative());
        bounds_ok
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                }
            })
    }
}

/// Where a canonical column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnOrigin {
    /// Original variable `var`, or its negative part when `negated`.
    Var { var: usize, negated: bool },
}

/// Where a canonical row came from: original constraint `constraint`,
/// multiplied by -1 when `negated`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowOrigin {
    pub constraint: usize,
    pub negated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub columns: Vec<ColumnOrigin>,
    pub rows: Vec<RowOrigin>,
    pub objective_negated: bool,
    pub original_vars: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CanonicalLp {
    #[serde(with = "rational::serde_text::matrix")]
    pub a: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_text::vec")]
    pub b: Vec<Rational>,
    #[serde(with = "rational::serde_text::vec")]
    pub c: Vec<Rational>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl CanonicalLp {
    /// Builds an instance with identity provenance.
    pub fn new(a: Vec<Vec<Rational>>, b: Vec<Rational>, c: Vec<Rational>) -> Result<Self, LpError> {
        let n = c.len();
        if a.len() != b.len() {
            return Err(LpError::RhsLength {
                rows: a.len(),
                rhs: b.len(),
            });
        }
        for (row, r) in a.iter().enumerate() {
            if r.len() != n {
                return Err(LpError::RowLength {
                    row,
                    found: r.len(),
                    expected: n,
                });
            }
        }
        let provenance = Provenance {
            columns: (0..n)
                .map(|var| ColumnOrigin::Var {
                    var,
                    negated: false,
                })
                .collect(),
            rows: (0..a.len())
                .map(|constraint| RowOrigin {
                    constraint,
                    negated: false,
                })
                .collect(),
            objective_negated: false,
            original_vars: n,
        };
        Ok(CanonicalLp { a, b, c, provenance })
    }

    pub fn from_ints(a: &[&[i64]], b: &[i64], c: &[i64]) -> Self {
        let a = a
            .iter()
            .map(|r| r.iter().map(|&v| rational::int(v)).collect())
            .collect();
        let b = b.iter().map(|&v| rational::int(v)).collect();
        let c = c.iter().map(|&v| rational::int(v)).collect();
        Self::new(a, b, c).expect("consistent shapes")
    }

    pub fn m(&self) -> usize {
        self.b.len()
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        dot(&self.c, x)
    }

    /// `A x` as a vector.
    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.a.iter().map(|row| dot(row, x)).collect()
    }

    /// `A^T y` as a vector.
    pub fn apply_transpose(&self, y: &[Rational]) -> Vec<Rational> {
        (0..self.n())
            .map(|j| {
                self.a
                    .iter()
                    .zip(y)
                    .fold(Rational::zero(), |acc, (row, yi)| acc + &row[j] * yi)
            })
            .collect()
    }

    pub fn is_primal_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.n()
            && x.iter().all(|v| !v.is_negative())
            && self.apply(x).iter().zip(&self.b).all(|(ax, b)| ax <= b)
    }

    pub fn is_dual_feasible(&self, y: &[Rational]) -> bool {
        y.len() == self.m()
            && y.iter().all(|v| !v.is_negative())
            && self
                .apply_transpose(y)
                .iter()
                .zip(&self.c)
                .all(|(aty, c)| aty >= c)
    }

    /// Maps a canonical point back to the original variables.
    pub fn to_original(&self, x: &[Rational]) -> Result<Vec<Rational>, LpError> {
        if x.len() != self.n() {
            return Err(LpError::SolutionLength {
                found: x.len(),
                expected: self.n(),
            });
        }
        let mut out = vec![Rational::zero(); self.provenance.original_vars];
        for (value, origin) in x.iter().zip(&self.provenance.columns) {
            let ColumnOrigin::Var { var, negated } = *origin;
            if negated {
                out[var] -= value;
            } else {
                out[var] += value;
            }
        }
        Ok(out)
    }

    /// Converts a canonical objective value to the original sense.
    pub fn original_objective(&self, value: &Rational) -> Rational {
        if self.provenance.objective_negated {
            -value.clone()
        } else {
            value.clone()
        }
    }

    /// The instance as an all-`<=`, all-nonnegative [`GeneralLp`].
    pub fn to_general(&self) -> GeneralLp {
        GeneralLp {
            sense: Sense::Max,
            objective: self.c.clone(),
            constraints: self
                .a
                .iter()
                .zip(&self.b)
                .map(|(row, b)| Constraint {
                    coeffs: row.clone(),
                    relation: Relation::Le,
                    rhs: b.clone(),
                })
                .collect(),
            bounds: vec![VarBound::Nonnegative; self.n()],
        }
    }
}

/// Rewrites any well-formed [`GeneralLp`] as max / `<=` / `x >= 0`.
///
/// `min` negates the objective, `>=` rows are negated, `=` rows become a
/// `<=` row and its negation, and a free variable becomes the difference of
/// two nonnegative columns placed next to each other.
pub fn canonicalize(lp: &GeneralLp) -> CanonicalLp {
    debug_assert!(lp.validate().is_ok());
    let mut columns = Vec::new();
    for (var, bound) in lp.bounds.iter().enumerate() {
        columns.push(ColumnOrigin::Var {
            var,
            negated: false,
        });
        if *bound == VarBound::Free {
            columns.push(ColumnOrigin::Var { var, negated: true });
        }
    }
    let expand = |coeffs: &[Rational], flip: bool| -> Vec<Rational> {
        columns
            .iter()
            .map(|ColumnOrigin::Var { var, negated }| {
                let v = &coeffs[*var];
                if *negated != flip {
                    -v.clone()
                } else {
                    v.clone()
                }
            })
            .collect()
    };

    let objective_negated = lp.sense == Sense::Min;
    let c = expand(&lp.objective, objective_negated);

    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut rows = Vec::new();
    for (constraint, con) in lp.constraints.iter().enumerate() {
        let signs: &[bool] = match con.relation {
            Relation::Le => &[false],
            Relation::Ge => &[true],
            Relation::Eq => &[false, true],
        };
        for &negated in signs {
            a.push(expand(&con.coeffs, negated));
            b.push(if negated { -con.rhs.clone() } else { con.rhs.clone() });
            rows.push(RowOrigin {
                constraint,
                negated,
            });
        }
    }
    CanonicalLp {
        a,
        b,
        c,
        provenance: Provenance {
            columns,
            rows,
            objective_negated,
            original_vars: lp.num_vars(),
        },
    }
}

pub(crate) fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}
