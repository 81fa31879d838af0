//! Solution-space reduction of `[M q]` to a two-column system `[P r]`, and
//! the witness constructions that justify the pivot selection rules.
//!
//! Given a solution `z` of `M z = q` and two columns `a`, `b` with positive
//! gap-row entries, every column other than `a`, `b` and the current unit
//! columns is moved to the right-hand side weighted by its component of `z`:
//!
//! ```text
//! P = [M(a) | M(b) | unit columns in row order]
//! r = q - sum_{j moved} z_j M(j)
//! ```

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{self, Rational};
use crate::tableau::{EqSolution, EqTableau};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("gap-row entry of column {col} is {value}, expected > 0")]
    NonpositiveGapEntry { col: usize, value: String },
    #[error("z_a + z_b = 0 for columns {a} and {b}")]
    PairUnused { a: usize, b: usize },
    #[error("row {row} has no basic unit column")]
    MissingBasis { row: usize },
    #[error("z does not satisfy M z = q (row {row} residual {residual})")]
    NotASolution { row: usize, residual: String },
    #[error("z has a negative component at {index}")]
    Negative { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("column {0} out of range")]
    ColumnOutOfRange(usize),
    #[error("pair columns must be distinct")]
    SameColumn,
    #[error("listed row {row} has q = {value}, expected < 0")]
    NonnegativeRow { row: usize, value: String },
    #[error("gap-row right-hand side is {0}, expected 0")]
    NonzeroGap(String),
    #[error("P is not of the form [m1 | m2 | I ; g1 g2 0]: {0}")]
    NotReduced(String),
}

/// The reduced system `P w = r` with `w = (t1, t2, x_1..x_{m+n})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrSystem {
    #[serde(with = "rational::serde_text::matrix")]
    pub p: Vec<Vec<Rational>>,
    #[serde(with = "rational::serde_text::vec")]
    pub r: Vec<Rational>,
    /// Original tableau column of each column of `P` (0-based).
    pub columns: Vec<usize>,
    /// Original columns folded into `r`.
    pub moved: Vec<usize>,
}

impl PrSystem {
    /// Builds a system from raw `P` and `r` with identity provenance,
    /// checking that columns `3..` are the unit block over a zero last row.
    pub fn new(p: Vec<Vec<Rational>>, r: Vec<Rational>) -> Result<Self, ReductionError> {
        let width = p.first().map_or(0, Vec::len);
        let pr = PrSystem {
            columns: (0..width).collect(),
            moved: Vec::new(),
            p,
            r,
        };
        pr.check_shape()?;
        Ok(pr)
    }

    pub fn rows(&self) -> usize {
        self.p.len()
    }

    fn check_shape(&self) -> Result<(), ReductionError> {
        let rows = self.p.len();
        if rows == 0 {
            return Err(ReductionError::Shape("P has no rows".into()));
        }
        if self.r.len() != rows {
            return Err(ReductionError::Shape(format!(
                "r has {} entries for {rows} rows",
                self.r.len()
            )));
        }
        let units = rows - 1;
        for (i, row) in self.p.iter().enumerate() {
            if row.len() != units + 2 {
                return Err(ReductionError::Shape(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    units + 2
                )));
            }
            for u in 0..units {
                let want = if i == u { Rational::one() } else { Rational::zero() };
                if row[u + 2] != want {
                    return Err(ReductionError::NotReduced(format!(
                        "entry ({i}, {}) is {}",
                        u + 2,
                        rational::to_text(&row[u + 2])
                    )));
                }
            }
        }
        Ok(())
    }

    /// `P w - r`.
    pub fn residuals(&self, w: &[Rational]) -> Vec<Rational> {
        self.p
            .iter()
            .zip(&self.r)
            .map(|(row, r)| crate::lp::dot(row, w) - r)
            .collect()
    }

    pub fn satisfies(&self, w: &[Rational]) -> bool {
        w.len() == self.p[0].len() && self.residuals(w).iter().all(Zero::is_zero)
    }
}

/// Builds `[P r]` from tableau `t`, a solution `z` of its equations and the
/// designated pair of columns `(a, b)` (0-based).
pub fn reduce_to_pr(
    t: &EqTableau,
    z: &EqSolution,
    (a, b): (usize, usize),
) -> Result<PrSystem, ReductionError> {
    let width = t.width();
    if z.z.len() != width {
        return Err(ReductionError::Shape(format!(
            "z has {} components, expected {width}",
            z.z.len()
        )));
    }
    for col in [a, b] {
        if col >= width {
            return Err(ReductionError::ColumnOutOfRange(col));
        }
    }
    if a == b {
        return Err(ReductionError::SameColumn);
    }
    let gap = t.gap_row();
    for col in [a, b] {
        let v = t.entry(gap, col);
        if !v.is_positive() {
            return Err(ReductionError::NonpositiveGapEntry {
                col,
                value: rational::to_text(v),
            });
        }
    }
    if let Some(index) = z.z.iter().position(Signed::is_negative) {
        return Err(ReductionError::Negative { index });
    }
    check_solution(t, &z.z)?;
    if (&z.z[a] + &z.z[b]).is_zero() {
        return Err(ReductionError::PairUnused { a, b });
    }

    let mut units = Vec::with_capacity(t.pairs());
    for (row, col) in t.basis().iter().enumerate() {
        let col = col.ok_or(ReductionError::MissingBasis { row })?;
        units.push(col);
    }
    let mut columns = vec![a, b];
    columns.extend(&units);
    let moved: Vec<usize> = (0..width).filter(|j| !columns.contains(j)).collect();

    let p = t
        .rows()
        .iter()
        .map(|row| columns.iter().map(|&j| row[j].clone()).collect())
        .collect();
    let r = t
        .rows()
        .iter()
        .map(|row| {
            moved.iter().fold(row[width].clone(), |acc, &j| {
                if z.z[j].is_zero() {
                    acc
                } else {
                    acc - &z.z[j] * &row[j]
                }
            })
        })
        .collect();
    let pr = PrSystem {
        p,
        r,
        columns,
        moved,
    };
    pr.check_shape()?;
    debug_assert!(pr.r[pr.rows() - 1].is_positive());
    Ok(pr)
}

fn check_solution(t: &EqTableau, z: &[Rational]) -> Result<(), ReductionError> {
    let res = t
        .residuals(z)
        .map_err(|e| ReductionError::Shape(e.to_string()))?;
    match res.iter().position(|r| !r.is_zero()) {
        Some(row) => Err(ReductionError::NotASolution {
            row,
            residual: rational::to_text(&res[row]),
        }),
        None => Ok(()),
    }
}

/// Result of moving the weight of the first column onto the second.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftedSolution {
    /// `(0, t2', x_1', ..)`.
    #[serde(with = "rational::serde_text::vec")]
    pub w: Vec<Rational>,
    /// Ratio of the two gap-row entries.
    #[serde(with = "rational::serde_text")]
    pub f: Rational,
    /// Indices `i` (into the unit block) whose shifted value is negative.
    pub negative: Vec<usize>,
}

impl ShiftedSolution {
    pub fn nonnegative(&self) -> bool {
        self.negative.is_empty()
    }
}

/// Given `P w = r` with `w = (t1, t2, x)`, produces a point that does not use
/// the first column: `t2' = t1 f + t2` and `x_i' = t1 (p_i1 - p_i2 f) + x_i`
/// where `f` is the ratio of the last-row entries of the two columns.
///
/// `P w' = r` holds exactly; `x'` may go negative, and those indices are
/// reported rather than hidden.
pub fn shifted_solution(pr: &PrSystem, w: &[Rational]) -> Result<ShiftedSolution, ReductionError> {
    pr.check_shape()?;
    let last = pr.rows() - 1;
    if w.len() != pr.p[0].len() {
        return Err(ReductionError::Shape(format!(
            "w has {} components, expected {}",
            w.len(),
            pr.p[0].len()
        )));
    }
    for col in [0, 1] {
        let v = &pr.p[last][col];
        if !v.is_positive() {
            return Err(ReductionError::NonpositiveGapEntry {
                col,
                value: rational::to_text(v),
            });
        }
    }
    if !pr.r[last].is_positive() {
        return Err(ReductionError::NonpositiveGapEntry {
            col: pr.p[0].len(),
            value: rational::to_text(&pr.r[last]),
        });
    }
    if let Some(index) = w.iter().position(Signed::is_negative) {
        return Err(ReductionError::Negative { index });
    }
    if let Some(row) = pr.residuals(w).iter().position(|r| !r.is_zero()) {
        return Err(ReductionError::NotASolution {
            row,
            residual: rational::to_text(&pr.residuals(w)[row]),
        });
    }

    let f = &pr.p[last][0] / &pr.p[last][1];
    let (t1, t2) = (&w[0], &w[1]);
    let mut out = Vec::with_capacity(w.len());
    out.push(Rational::zero());
    out.push(t1 * &f + t2);
    let mut negative = Vec::new();
    for i in 0..last {
        let xi = t1 * (&pr.p[i][0] - &pr.p[i][1] * &f) + &w[i + 2];
        if xi.is_negative() {
            negative.push(i);
        }
        out.push(xi);
    }
    debug_assert!(pr.satisfies(&out));
    Ok(ShiftedSolution {
        w: out,
        f,
        negative,
    })
}

/// For rows with negative right-hand side whose basic columns carry
/// positive weight in `z_star`, produces another solution of the equations
/// in which at least one of those basic components is zero.
///
/// `z_hat` puts `q_i` on the basic column of each row and zero elsewhere;
/// the result is `lambda z_star + (1 - lambda) z_hat` with the smallest
/// `lambda` keeping every listed component nonnegative. If some listed
/// component of `z_star` is already zero, `z_star` is returned unchanged.
pub fn vanishing_unit_witness(
    t: &EqTableau,
    z_star: &EqSolution,
    neg_rows: &[usize],
) -> Result<EqSolution, ReductionError> {
    if z_star.z.len() != t.width() {
        return Err(ReductionError::Shape(format!(
            "z has {} components, expected {}",
            z_star.z.len(),
            t.width()
        )));
    }
    if !t.gap_rhs().is_zero() {
        return Err(ReductionError::NonzeroGap(rational::to_text(t.gap_rhs())));
    }
    check_solution(t, &z_star.z)?;
    let basis = t
        .basis()
        .iter()
        .enumerate()
        .map(|(row, b)| b.ok_or(ReductionError::MissingBasis { row }))
        .collect::<Result<Vec<_>, _>>()?;
    let gap = t.gap_row();
    for (row, &col) in basis.iter().enumerate() {
        if !t.entry(gap, col).is_zero() {
            return Err(ReductionError::NotReduced(format!(
                "basic column {col} of row {row} has a nonzero gap-row entry"
            )));
        }
    }
    for &row in neg_rows {
        if row >= t.pairs() {
            return Err(ReductionError::Shape(format!("row {row} out of range")));
        }
        if !t.rhs(row).is_negative() {
            return Err(ReductionError::NonnegativeRow {
                row,
                value: rational::to_text(t.rhs(row)),
            });
        }
    }
    if neg_rows.is_empty() || neg_rows.iter().any(|&r| z_star.z[basis[r]].is_zero()) {
        return Ok(z_star.clone());
    }

    let lambda = neg_rows
        .iter()
        .map(|&row| {
            let q = t.rhs(row).abs();
            &q / (&z_star.z[basis[row]] + &q)
        })
        .max()
        .expect("nonempty");
    let mut z_hat = vec![Rational::zero(); t.width()];
    for (row, &col) in basis.iter().enumerate() {
        z_hat[col] = t.rhs(row).clone();
    }
    let mu = Rational::one() - &lambda;
    let z = z_star
        .z
        .iter()
        .zip(&z_hat)
        .map(|(s, h)| &lambda * s + &mu * h)
        .collect();
    Ok(EqSolution::new(z_star.m, z_star.n, z))
}
