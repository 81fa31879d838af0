//! Two-phase primal simplex over exact rationals.
//!
//! Dense tableau, Bland's rule by default. Every result carries a
//! certificate that [`verify_certificate`] re-checks from the LP alone.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::lp::{dot, CanonicalLp};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OracleStatus {
    Optimal {
        #[serde(with = "rational::serde_text::vec")]
        x: Vec<Rational>,
        #[serde(with = "rational::serde_text::vec")]
        y: Vec<Rational>,
        #[serde(with = "rational::serde_text")]
        objective: Rational,
    },
    /// `u >= 0`, `u^T A >= 0`, `u^T b < 0`.
    Infeasible {
        #[serde(with = "rational::serde_text::vec")]
        certificate: Vec<Rational>,
    },
    Unbounded {
        #[serde(with = "rational::serde_text::vec")]
        point: Vec<Rational>,
        #[serde(with = "rational::serde_text::vec")]
        ray: Vec<Rational>,
    },
}

impl OracleStatus {
    pub fn name(&self) -> &'static str {
        match self {
            OracleStatus::Optimal { .. } => "optimal",
            OracleStatus::Infeasible { .. } => "infeasible",
            OracleStatus::Unbounded { .. } => "unbounded",
        }
    }

    pub fn objective(&self) -> Option<&Rational> {
        match self {
            OracleStatus::Optimal { objective, .. } => Some(objective),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleResult {
    #[serde(flatten)]
    pub status: OracleStatus,
    pub pivot_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotRule {
    /// Smallest improving index enters; ratio ties go to the smallest
    /// basic index.
    #[default]
    Bland,
    /// Largest reduced cost enters; ratio ties go to the topmost row. No
    /// protection against cycling.
    Dantzig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BudgetExceeded {
    pub pivots: usize,
}

struct Tableau {
    /// `m` rows of width `cols + 1`, last entry the right-hand side.
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// Columns: x (n), slacks (m), artificials (one per flipped row).
    n: usize,
    m: usize,
    artificial_start: usize,
    width: usize,
    pivots: usize,
}

impl Tableau {
    fn new(lp: &CanonicalLp) -> Self {
        let (m, n) = (lp.m(), lp.n());
        let flipped: Vec<usize> = (0..m).filter(|&i| lp.b[i].is_negative()).collect();
        let artificial_start = n + m;
        let width = artificial_start + flipped.len();
        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        for i in 0..m {
            let sign = if lp.b[i].is_negative() {
                -Rational::one()
            } else {
                Rational::one()
            };
            let mut row = vec![Rational::zero(); width + 1];
            for j in 0..n {
                row[j] = &sign * &lp.a[i][j];
            }
            row[n + i] = sign.clone();
            row[width] = &sign * &lp.b[i];
            match flipped.iter().position(|&f| f == i) {
                Some(p) => {
                    row[artificial_start + p] = Rational::one();
                    basis.push(artificial_start + p);
                }
                None => basis.push(n + i),
            }
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            n,
            m,
            artificial_start,
            width,
            pivots: 0,
        }
    }

    fn rhs(&self, i: usize) -> &Rational {
        &self.rows[i][self.width]
    }

    /// `c_j - c_B^T T_j` for every column.
    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        (0..self.width)
            .map(|j| {
                self.rows
                    .iter()
                    .zip(&self.basis)
                    .fold(cost[j].clone(), |acc, (row, &b)| acc - &cost[b] * &row[j])
            })
            .collect()
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.rows
            .iter()
            .zip(&self.basis)
            .fold(Rational::zero(), |acc, (row, &b)| acc + &cost[b] * &row[self.width])
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let inv = self.rows[row][col].recip();
        for v in self.rows[row].iter_mut() {
            *v *= &inv;
        }
        let p = self.rows[row].clone();
        for (r, target) in self.rows.iter_mut().enumerate() {
            if r == row || target[col].is_zero() {
                continue;
            }
            let f = target[col].clone();
            for (v, pv) in target.iter_mut().zip(&p) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        self.basis[row] = col;
        self.pivots += 1;
    }

    fn entering(&self, d: &[Rational], allowed: usize, rule: PivotRule) -> Option<usize> {
        let improving = (0..allowed).filter(|&j| d[j].is_positive());
        match rule {
            PivotRule::Bland => improving.min(),
            PivotRule::Dantzig => improving.fold(None, |best: Option<usize>, j| match best {
                Some(b) if d[b] >= d[j] => Some(b),
                _ => Some(j),
            }),
        }
    }

    fn leaving(&self, col: usize, rule: PivotRule) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for i in 0..self.m {
            let a = &self.rows[i][col];
            if !a.is_positive() {
                continue;
            }
            let ratio = self.rhs(i) / a;
            let better = match &best {
                None => true,
                Some((b, r)) => {
                    ratio < *r
                        || (ratio == *r
                            && rule == PivotRule::Bland
                            && self.basis[i] < self.basis[*b])
                }
            };
            if better {
                best = Some((i, ratio));
            }
        }
        best.map(|(i, _)| i)
    }

    fn value_of(&self, col: usize) -> Rational {
        self.basis
            .iter()
            .position(|&b| b == col)
            .map_or_else(Rational::zero, |i| self.rhs(i).clone())
    }

    fn x(&self) -> Vec<Rational> {
        (0..self.n).map(|j| self.value_of(j)).collect()
    }

    /// Negated reduced costs of the slack columns.
    fn slack_duals(&self, d: &[Rational]) -> Vec<Rational> {
        (0..self.m).map(|i| -d[self.n + i].clone()).collect()
    }
}

enum Phase {
    Optimal(Vec<Rational>),
    Unbounded(usize),
}

fn optimize(
    t: &mut Tableau,
    cost: &[Rational],
    allowed: usize,
    rule: PivotRule,
    budget: Option<usize>,
) -> Result<Phase, BudgetExceeded> {
    loop {
        let d = t.reduced_costs(cost);
        let Some(col) = t.entering(&d, allowed, rule) else {
            return Ok(Phase::Optimal(d));
        };
        let Some(row) = t.leaving(col, rule) else {
            return Ok(Phase::Unbounded(col));
        };
        if budget.is_some_and(|b| t.pivots >= b) {
            return Err(BudgetExceeded { pivots: t.pivots });
        }
        t.pivot(row, col);
    }
}

/// Solves `max c^T x, A x <= b, x >= 0` with Bland's rule.
pub fn simplex_solve(lp: &CanonicalLp) -> OracleResult {
    simplex_solve_with(lp, PivotRule::Bland, None).expect("no budget")
}

/// Same as [`simplex_solve`] with a chosen rule and an optional pivot
/// budget over both phases.
pub fn simplex_solve_with(
    lp: &CanonicalLp,
    rule: PivotRule,
    budget: Option<usize>,
) -> Result<OracleResult, BudgetExceeded> {
    let mut t = Tableau::new(lp);

    if t.width > t.artificial_start {
        let mut cost = vec![Rational::zero(); t.width];
        for c in cost.iter_mut().skip(t.artificial_start) {
            *c = -Rational::one();
        }
        let all = t.width;
        let Phase::Optimal(d) = optimize(&mut t, &cost, all, rule, budget)? else {
            unreachable!("phase one is bounded by zero");
        };
        if t.objective(&cost).is_negative() {
            return Ok(OracleResult {
                status: OracleStatus::Infeasible {
                    certificate: t.slack_duals(&d),
                },
                pivot_count: t.pivots,
            });
        }
        // Drive artificials at level zero out of the basis where possible.
        for i in 0..t.m {
            if t.basis[i] < t.artificial_start {
                continue;
            }
            if let Some(j) = (0..t.artificial_start).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, j);
            }
        }
    }

    let mut cost = vec![Rational::zero(); t.width];
    cost[..t.n].clone_from_slice(&lp.c);
    let real = t.artificial_start;
    let status = match optimize(&mut t, &cost, real, rule, budget)? {
        Phase::Optimal(d) => {
            let x = t.x();
            OracleStatus::Optimal {
                objective: lp.objective_value(&x),
                y: t.slack_duals(&d),
                x,
            }
        }
        Phase::Unbounded(col) => {
            let mut ray = vec![Rational::zero(); t.n];
            if col < t.n {
                ray[col] = Rational::one();
            }
            for (i, &b) in t.basis.iter().enumerate() {
                if b < t.n {
                    ray[b] = -t.rows[i][col].clone();
                }
            }
            OracleStatus::Unbounded { point: t.x(), ray }
        }
    };
    Ok(OracleResult {
        status,
        pivot_count: t.pivots,
    })
}

/// Complementary slackness for a primal-dual pair, checked exactly.
pub fn complementary_slackness(lp: &CanonicalLp, x: &[Rational], y: &[Rational]) -> bool {
    let ax = lp.apply(x);
    let aty = lp.apply_transpose(y);
    x.iter()
        .zip(aty.iter().zip(&lp.c))
        .all(|(xj, (a, c))| (xj * (a - c)).is_zero())
        && y.iter()
            .zip(lp.b.iter().zip(&ax))
            .all(|(yi, (b, a))| (yi * (b - a)).is_zero())
}

/// Re-checks the certificate of `r` against `lp` from scratch.
pub fn verify_certificate(lp: &CanonicalLp, r: &OracleResult) -> bool {
    let (m, n) = (lp.m(), lp.n());
    match &r.status {
        OracleStatus::Optimal { x, y, objective } => {
            lp.is_primal_feasible(x)
                && lp.is_dual_feasible(y)
                && lp.objective_value(x) == *objective
                && dot(&lp.b, y) == *objective
                && complementary_slackness(lp, x, y)
        }
        OracleStatus::Infeasible { certificate: u } => {
            u.len() == m
                && u.iter().all(|v| !v.is_negative())
                && lp.apply_transpose(u).iter().all(|v| !v.is_negative())
                && dot(u, &lp.b).is_negative()
        }
        OracleStatus::Unbounded { point, ray } => {
            ray.len() == n
                && lp.is_primal_feasible(point)
                && ray.iter().all(|v| !v.is_negative())
                && lp.apply(ray).iter().all(|v| !v.is_positive())
                && dot(&lp.c, ray).is_positive()
        }
    }
}
