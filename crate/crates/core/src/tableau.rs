//! The combined primal-dual tableau `[M q]`.
//!
//! For a canonical LP with `m` constraints and `n` variables the unknowns are
//! ordered `z = (y_1..y_m, x_1..x_n, s_1..s_m, t_1..t_n)` and the system is
//!
//! ```text
//!   rows 1..m      A x + s        =  b
//!   rows m+1..m+n  -A^T y + t     = -c
//!   row m+n+1      b^T y - c^T x  =  0      (duality-gap row)
//! ```
//!
//! Columns `j` and `j + (m+n)` form a complementary pair. Nonnegative
//! solutions that are also pairwise complementary are exactly the optimal
//! primal-dual pairs of the LP.
//!
//! Indices in this module are 0-based. The JSON form uses 1-based column
//! numbers to match the usual printed layout.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::CanonicalLp;
use crate::rational::{self, Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableauError {
    #[error("column {col} out of range (tableau has {cols} columns)")]
    ColumnOutOfRange { col: usize, cols: usize },
    #[error("row {row} out of range (tableau has {rows} pivotable rows)")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("zero pivot element at ({row}, {col})")]
    ZeroPivot { row: usize, col: usize },
    #[error("pivot at ({row}, {col}) would make column {col} and its complement {pair} both basic")]
    ComplementaryConflict { row: usize, col: usize, pair: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("solution has {found} components, expected {expected}")]
    SolutionLength { found: usize, expected: usize },
    #[error(transparent)]
    Rational(#[from] RationalError),
    #[error("invalid tableau JSON: {0}")]
    Json(String),
}

/// Complement of column `j` among `2 * pairs` columns.
pub fn complement(j: usize, pairs: usize) -> Result<usize, TableauError> {
    if j >= 2 * pairs {
        return Err(TableauError::ColumnOutOfRange {
            col: j,
            cols: 2 * pairs,
        });
    }
    Ok(if j < pairs { j + pairs } else { j - pairs })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EqTableau {
    m: usize,
    n: usize,
    /// `m+n+1` rows of `2(m+n)+1` entries; the last entry is `q`.
    rows: Vec<Vec<Rational>>,
    /// Basic column of each of the first `m+n` rows.
    basis: Vec<Option<usize>>,
}

impl EqTableau {
    /// Builds a tableau from raw rows (each `2(m+n)+1` wide, right-hand side
    /// last) and a basis map, checking shape and basis complementarity.
    pub fn from_rows(
        m: usize,
        n: usize,
        rows: Vec<Vec<Rational>>,
        basis: Vec<Option<usize>>,
    ) -> Result<Self, TableauError> {
        let k = m + n;
        if rows.len() != k + 1 {
            return Err(TableauError::Shape(format!(
                "{} rows, expected {}",
                rows.len(),
                k + 1
            )));
        }
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != 2 * k + 1) {
            return Err(TableauError::Shape(format!(
                "row {i} has {} entries, expected {}",
                r.len(),
                2 * k + 1
            )));
        }
        if basis.len() != k {
            return Err(TableauError::Shape(format!(
                "basis has {} entries, expected {k}",
                basis.len()
            )));
        }
        let t = EqTableau { m, n, rows, basis };
        let mut seen = vec![false; 2 * k];
        for (row, col) in t.basis.iter().enumerate() {
            let Some(col) = *col else { continue };
            if col >= 2 * k {
                return Err(TableauError::ColumnOutOfRange { col, cols: 2 * k });
            }
            let pair = t.pair(col);
            if seen[col] || seen[pair] {
                return Err(TableauError::ComplementaryConflict { row, col, pair });
            }
            seen[col] = true;
        }
        Ok(t)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of complementary pairs, `m + n`.
    pub fn pairs(&self) -> usize {
        self.m + self.n
    }

    /// Number of columns of `M` (excluding `q`).
    pub fn width(&self) -> usize {
        2 * self.pairs()
    }

    /// Index of the duality-gap row.
    pub fn gap_row(&self) -> usize {
        self.pairs()
    }

    pub fn pair(&self, j: usize) -> usize {
        let k = self.pairs();
        if j < k {
            j + k
        } else {
            j - k
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> &Rational {
        &self.rows[row][col]
    }

    pub fn rhs(&self, row: usize) -> &Rational {
        &self.rows[row][self.width()]
    }

    pub fn row(&self, row: usize) -> &[Rational] {
        &self.rows[row]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn gap_rhs(&self) -> &Rational {
        self.rhs(self.gap_row())
    }

    pub fn column(&self, col: usize) -> Vec<Rational> {
        self.rows.iter().map(|r| r[col].clone()).collect()
    }

    pub fn basis(&self) -> &[Option<usize>] {
        &self.basis
    }

    pub fn basic_row_of(&self, col: usize) -> Option<usize> {
        self.basis.iter().position(|b| *b == Some(col))
    }

    pub fn is_basic(&self, col: usize) -> bool {
        self.basic_row_of(col).is_some()
    }

    /// `M` without the right-hand side.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        self.rows
            .iter()
            .map(|r| r[..self.width()].to_vec())
            .collect()
    }

    pub fn q(&self) -> Vec<Rational> {
        self.column(self.width())
    }

    /// Multiplies `row` by -1 (elementary row operation).
    pub fn negate_row(&mut self, row: usize) {
        for v in self.rows[row].iter_mut() {
            *v = -v.clone();
        }
    }

    /// `row[target] += factor * row[source]` (elementary row operation).
    pub fn add_row_multiple(&mut self, target: usize, source: usize, factor: &Rational) {
        assert_ne!(target, source);
        if factor.is_zero() {
            return;
        }
        let src = self.rows[source].clone();
        for (v, s) in self.rows[target].iter_mut().zip(&src) {
            *v += factor * s;
        }
    }

    /// Gauss-Jordan pivot on `(row, col)`, returning the new tableau.
    pub fn gj_pivot(&self, row: usize, col: usize) -> Result<EqTableau, TableauError> {
        let mut t = self.clone();
        t.pivot_in_place(row, col)?;
        Ok(t)
    }

    /// Gauss-Jordan pivot on `(row, col)`: column `col` becomes the unit
    /// vector with its 1 in `row` (the gap row included) and `col` becomes
    /// the basic column of `row`.
    pub fn pivot_in_place(&mut self, row: usize, col: usize) -> Result<(), TableauError> {
        let k = self.pairs();
        if row >= k {
            return Err(TableauError::RowOutOfRange { row, rows: k });
        }
        if col >= self.width() {
            return Err(TableauError::ColumnOutOfRange {
                col,
                cols: self.width(),
            });
        }
        if self.rows[row][col].is_zero() {
            return Err(TableauError::ZeroPivot { row, col });
        }
        let pair = self.pair(col);
        if let Some(other) = self.basic_row_of(pair) {
            if other != row {
                return Err(TableauError::ComplementaryConflict { row, col, pair });
            }
        }

        self.raw_pivot(row, col);
        Ok(())
    }

    /// Principal pivot of order two: `first` and then `second` enter, each
    /// replacing the complement of the other's pair. Only the end state
    /// has to be complementary.
    pub fn block_pivot(
        &mut self,
        first: (usize, usize),
        second: (usize, usize),
    ) -> Result<(), TableauError> {
        let k = self.pairs();
        for &(row, col) in &[first, second] {
            if row >= k {
                return Err(TableauError::RowOutOfRange { row, rows: k });
            }
            if col >= self.width() {
                return Err(TableauError::ColumnOutOfRange {
                    col,
                    cols: self.width(),
                });
            }
        }
        let (r1, c1) = first;
        let (r2, c2) = second;
        let leaving = (self.basis[r1], self.basis[r2]);
        if r1 == r2 || leaving != (Some(self.pair(c2)), Some(self.pair(c1))) {
            return Err(TableauError::ComplementaryConflict {
                row: r1,
                col: c1,
                pair: self.pair(c1),
            });
        }
        if self.rows[r1][c1].is_zero() {
            return Err(TableauError::ZeroPivot { row: r1, col: c1 });
        }
        let mut next = self.clone();
        next.raw_pivot(r1, c1);
        if next.rows[r2][c2].is_zero() {
            return Err(TableauError::ZeroPivot { row: r2, col: c2 });
        }
        next.raw_pivot(r2, c2);
        *self = next;
        Ok(())
    }

    fn raw_pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let pivot = self.rows[row].clone();
        for (r, target) in self.rows.iter_mut().enumerate() {
            if r == row || target[col].is_zero() {
                continue;
            }
            let f = target[col].clone();
            for (v, p) in target.iter_mut().zip(&pivot) {
                if !p.is_zero() {
                    *v -= &f * p;
                }
            }
        }
        self.basis[row] = Some(col);
    }

    /// Reads off the basic solution: `q_i` in the basic column of row `i`,
    /// zero elsewhere. `None` when some row has no basic column.
    pub fn basic_solution(&self) -> Option<EqSolution> {
        let mut z = vec![Rational::zero(); self.width()];
        for (row, col) in self.basis.iter().enumerate() {
            z[(*col)?] = self.rhs(row).clone();
        }
        Some(EqSolution::new(self.m, self.n, z))
    }

    /// `M z - q`, one entry per row.
    pub fn residuals(&self, z: &[Rational]) -> Result<Vec<Rational>, TableauError> {
        if z.len() != self.width() {
            return Err(TableauError::SolutionLength {
                found: z.len(),
                expected: self.width(),
            });
        }
        Ok(self
            .rows
            .iter()
            .map(|r| {
                let lhs = r[..self.width()]
                    .iter()
                    .zip(z)
                    .fold(Rational::zero(), |acc, (a, b)| {
                        if a.is_zero() || b.is_zero() {
                            acc
                        } else {
                            acc + a * b
                        }
                    });
                lhs - &r[self.width()]
            })
            .collect())
    }

    /// True when `M z = q` holds exactly.
    pub fn satisfies(&self, z: &[Rational]) -> bool {
        self.residuals(z)
            .map(|r| r.iter().all(Zero::is_zero))
            .unwrap_or(false)
    }

    /// Drops row `row` and the complementary pair `{row, row + m + n}`,
    /// giving the tableau of the smaller system that fixes both variables of
    /// the pair at zero. Returns the new tableau; column order is preserved.
    pub fn without_pair(&self, row: usize) -> Result<EqTableau, TableauError> {
        let k = self.pairs();
        if row >= k {
            return Err(TableauError::RowOutOfRange { row, rows: k });
        }
        let (m, n) = if row < self.m {
            (self.m - 1, self.n)
        } else {
            (self.m, self.n - 1)
        };
        let drop = [row, row + k];
        let keep_col = |j: &usize| !drop.contains(j);
        let remap = |j: usize| -> usize {
            let below = drop.iter().filter(|&&d| d < j).count();
            j - below
        };
        let rows = self
            .rows
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != row)
            .map(|(_, r)| {
                (0..=self.width())
                    .filter(keep_col)
                    .map(|j| r[j].clone())
                    .collect()
            })
            .collect();
        let basis = self
            .basis
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != row)
            .map(|(_, b)| b.filter(keep_col).map(remap))
            .collect();
        EqTableau::from_rows(m, n, rows, basis)
    }

    pub fn to_json(&self) -> TableauJson {
        TableauJson {
            m: self.m,
            n: self.n,
            entries: self.rows.iter().map(|r| rational::vec_to_text(r)).collect(),
            basis: self.basis.iter().map(|b| b.map(|c| c + 1)).collect(),
            pairing: (0..self.width()).map(|j| self.pair(j) + 1).collect(),
        }
    }

    pub fn from_json(json: &TableauJson) -> Result<Self, TableauError> {
        let rows = json
            .entries
            .iter()
            .map(|r| rational::vec_from_text(r))
            .collect::<Result<Vec<_>, _>>()?;
        let basis = json
            .basis
            .iter()
            .map(|b| match *b {
                Some(0) => Err(TableauError::Json("basis columns are 1-based".into())),
                other => Ok(other.map(|c| c - 1)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = EqTableau::from_rows(json.m, json.n, rows, basis)?;
        if !json.pairing.is_empty() {
            let expected: Vec<usize> = (0..t.width()).map(|j| t.pair(j) + 1).collect();
            if json.pairing != expected {
                return Err(TableauError::Json(
                    "pairing is not the j <-> j+(m+n) involution".into(),
                ));
            }
        }
        Ok(t)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("tableau serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self, TableauError> {
        let json: TableauJson =
            serde_json::from_str(text).map_err(|e| TableauError::Json(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// On-disk tableau: row-major `p/q` entries (right-hand side last), 1-based
/// basis columns (`null` for a row without one) and the pairing map.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableauJson {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<Vec<String>>,
    pub basis: Vec<Option<usize>>,
    #[serde(default)]
    pub pairing: Vec<usize>,
}

/// Builds `[M q]` and adds `theta` times the gap row to each of the other
/// rows. The unit block sits in the last `m+n` columns and is the initial
/// basis.
pub fn build_eq(lp: &CanonicalLp, theta: &Rational) -> EqTableau {
    let shifts = vec![theta.clone(); lp.m() + lp.n()];
    build_eq_with_shifts(lp, &shifts)
}

/// Like [`build_eq`] but with an individual multiple of the gap row for each
/// row. `shifts.len()` must be `m + n`.
pub fn build_eq_with_shifts(lp: &CanonicalLp, shifts: &[Rational]) -> EqTableau {
    let (m, n) = (lp.m(), lp.n());
    let k = m + n;
    assert_eq!(shifts.len(), k, "one shift per row");
    let width = 2 * k;
    let mut rows = vec![vec![Rational::zero(); width + 1]; k + 1];

    for i in 0..m {
        for j in 0..n {
            rows[i][m + j] = lp.a[i][j].clone();
        }
        rows[i][k + i] = rational::one();
        rows[i][width] = lp.b[i].clone();
    }
    for j in 0..n {
        let r = m + j;
        for i in 0..m {
            rows[r][i] = -lp.a[i][j].clone();
        }
        rows[r][k + m + j] = rational::one();
        rows[r][width] = -lp.c[j].clone();
    }
    for i in 0..m {
        rows[k][i] = lp.b[i].clone();
    }
    for j in 0..n {
        rows[k][m + j] = -lp.c[j].clone();
    }

    let gap = rows[k].clone();
    for (row, shift) in rows.iter_mut().take(k).zip(shifts) {
        if shift.is_zero() {
            continue;
        }
        for (v, g) in row.iter_mut().zip(&gap) {
            *v += shift * g;
        }
    }
    let basis = (0..k).map(|i| Some(k + i)).collect();
    EqTableau { m, n, rows, basis }
}

/// A vector `z` over the tableau's columns, ordered `(y, x, s, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EqSolution {
    pub m: usize,
    pub n: usize,
    #[serde(with = "rational::serde_text::vec")]
    pub z: Vec<Rational>,
}

impl EqSolution {
    pub fn new(m: usize, n: usize, z: Vec<Rational>) -> Self {
        assert_eq!(z.len(), 2 * (m + n), "z must have 2(m+n) components");
        EqSolution { m, n, z }
    }

    pub fn y(&self) -> &[Rational] {
        &self.z[..self.m]
    }

    pub fn x(&self) -> &[Rational] {
        &self.z[self.m..self.m + self.n]
    }

    pub fn slack(&self) -> &[Rational] {
        let k = self.m + self.n;
        &self.z[k..k + self.m]
    }

    pub fn surplus(&self) -> &[Rational] {
        let k = self.m + self.n;
        &self.z[k + self.m..]
    }
}

/// Outcome of checking a candidate `z` against the original system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    /// `M z - q` on the unshifted tableau, one entry per row.
    #[serde(with = "rational::serde_text::vec")]
    pub residuals: Vec<Rational>,
    pub equations_hold: bool,
    pub nonnegative: bool,
    /// Complementary pairs `(j, j + m + n)` with both components nonzero.
    pub complementarity_violations: Vec<usize>,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    #[serde(with = "rational::serde_text")]
    pub primal_objective: Rational,
    #[serde(with = "rational::serde_text")]
    pub dual_objective: Rational,
}

impl CheckReport {
    pub fn complementary(&self) -> bool {
        self.complementarity_violations.is_empty()
    }

    pub fn zero_gap(&self) -> bool {
        self.primal_objective == self.dual_objective
    }

    pub fn passed(&self) -> bool {
        self.equations_hold
            && self.nonnegative
            && self.complementary()
            && self.primal_feasible
            && self.dual_feasible
            && self.zero_gap()
    }

    /// Rows whose residual is nonzero.
    pub fn failing_rows(&self) -> Vec<usize> {
        self.residuals
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Checks whether `z` solves the combined system of `lp`: equations on the
/// unshifted tableau, nonnegativity, complementarity, and (through the
/// extracted `x`, `y`) primal and dual feasibility with equal objectives.
pub fn verify_eq_solution(lp: &CanonicalLp, z: &EqSolution) -> Result<CheckReport, TableauError> {
    let base = build_eq(lp, &Rational::zero());
    if z.m != lp.m() || z.n != lp.n() {
        return Err(TableauError::Shape(format!(
            "solution is for m={}, n={} but the LP has m={}, n={}",
            z.m,
            z.n,
            lp.m(),
            lp.n()
        )));
    }
    let residuals = base.residuals(&z.z)?;
    let k = base.pairs();
    let complementarity_violations = (0..k)
        .filter(|&j| !z.z[j].is_zero() && !z.z[j + k].is_zero())
        .collect();
    Ok(CheckReport {
        equations_hold: residuals.iter().all(Zero::is_zero),
        residuals,
        nonnegative: z.z.iter().all(|v| !v.is_negative()),
        complementarity_violations,
        primal_feasible: lp.is_primal_feasible(z.x()),
        dual_feasible: lp.is_dual_feasible(z.y()),
        primal_objective: lp.objective_value(z.x()),
        dual_objective: crate::lp::dot(&lp.b, z.y()),
    })
}
