//! Line-oriented instance text format.
//!
//! ```text
//! sense: max
//! vars: 2
//! c: 2 1
//! 1 1 <= 5
//! 1 0 <= 2
//! free: 2
//! ```
//!
//! Numbers are integers or `p/q`. `free:` lists 1-based indices of
//! unrestricted variables; every other variable is nonnegative. Blank lines
//! and text after `#` are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::lp::{Constraint, GeneralLp, Relation, Sense, VarBound};
use crate::rational::{self, Rational, RationalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(s: &str, offset: usize) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        if ch.is_whitespace() {
            if let Some(b) = start.take() {
                out.push(Token {
                    text: &s[b..i],
                    column: offset + s[..b].chars().count() + 1,
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(b) = start {
        out.push(Token {
            text: &s[b..],
            column: offset + s[..b].chars().count() + 1,
        });
    }
    out
}

pub fn parse_instance(text: &str) -> Result<GeneralLp, ParseError> {
    let mut sense = None;
    let mut vars: Option<usize> = None;
    let mut objective: Option<Vec<Rational>> = None;
    let mut free: Vec<usize> = Vec::new();
    let mut constraints = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let err = |column: usize, message: String| ParseError {
            line,
            column,
            message,
        };
        let lead = content.len() - content.trim_start().len();
        let body = content.trim_start();

        if let Some(colon) = body.find(':') {
            let key = body[..colon].trim();
            let rest = &body[colon + 1..];
            let toks = tokens(rest, content[..lead + colon + 1].chars().count());
            match key {
                "sense" => {
                    let [tok] = toks.as_slice() else {
                        return Err(err(lead + 1, "expected `sense: max|min`".into()));
                    };
                    sense = Some(match tok.text {
                        "max" => Sense::Max,
                        "min" => Sense::Min,
                        other => return Err(err(tok.column, format!("unknown sense {other:?}"))),
                    });
                }
                "vars" => {
                    let [tok] = toks.as_slice() else {
                        return Err(err(lead + 1, "expected `vars: n`".into()));
                    };
                    vars = Some(tok.text.parse().map_err(|_| {
                        err(tok.column, format!("invalid variable count {:?}", tok.text))
                    })?);
                }
                "c" => {
                    let n = vars.ok_or_else(|| err(lead + 1, "`c:` before `vars:`".into()))?;
                    if toks.len() != n {
                        return Err(err(
                            lead + 1,
                            format!("objective has {} entries, expected {n}", toks.len()),
                        ));
                    }
                    objective = Some(parse_numbers(&toks, line)?);
                }
                "free" => {
                    let n = vars.ok_or_else(|| err(lead + 1, "`free:` before `vars:`".into()))?;
                    for tok in &toks {
                        let i: usize = tok.text.parse().map_err(|_| {
                            err(tok.column, format!("invalid variable index {:?}", tok.text))
                        })?;
                        if i == 0 || i > n {
                            return Err(err(tok.column, format!("variable index {i} out of range 1..={n}")));
                        }
                        free.push(i - 1);
                    }
                }
                other => return Err(err(lead + 1, format!("unknown header {other:?}"))),
            }
            continue;
        }

        let n = vars.ok_or_else(|| err(lead + 1, "constraint before `vars:`".into()))?;
        let toks = tokens(content, 0);
        let rel_at = toks
            .iter()
            .position(|t| matches!(t.text, "<=" | "=" | ">="))
            .ok_or_else(|| err(lead + 1, "constraint has no relation (<=, =, >=)".into()))?;
        if rel_at != n {
            return Err(err(
                toks[rel_at].column,
                format!("constraint has {rel_at} coefficients, expected {n}"),
            ));
        }
        if toks.len() != n + 2 {
            let column = toks.get(n + 2).map_or(toks[rel_at].column, |t| t.column);
            return Err(err(column, "expected exactly one right-hand side".into()));
        }
        let relation = match toks[rel_at].text {
            "<=" => Relation::Le,
            "=" => Relation::Eq,
            _ => Relation::Ge,
        };
        let coeffs = parse_numbers(&toks[..n], line)?;
        let rhs = parse_numbers(&toks[n + 1..], line)?.pop().expect("one rhs");
        constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    let missing = |what: &str| ParseError {
        line: text.lines().count().max(1),
        column: 1,
        message: format!("missing `{what}` header"),
    };
    let sense = sense.ok_or_else(|| missing("sense:"))?;
    let n = vars.ok_or_else(|| missing("vars:"))?;
    let objective = objective.ok_or_else(|| missing("c:"))?;
    let mut bounds = vec![VarBound::Nonnegative; n];
    for i in free {
        bounds[i] = VarBound::Free;
    }
    Ok(GeneralLp {
        sense,
        objective,
        constraints,
        bounds,
    })
}

fn parse_numbers(toks: &[Token<'_>], line: usize) -> Result<Vec<Rational>, ParseError> {
    toks.iter()
        .map(|t| {
            rational::parse(t.text).map_err(|e| ParseError {
                line,
                column: t.column,
                message: match e {
                    RationalError::ZeroDenominator(s) => format!("zero denominator in {s:?}"),
                    other => other.to_string(),
                },
            })
        })
        .collect()
}

/// Canonical rendering: fixed header order, reduced fractions, single
/// spaces, `free:` indices ascending and only when present.
pub fn emit_instance(lp: &GeneralLp) -> String {
    let join = |v: &[Rational]| {
        v.iter()
            .map(rational::to_text)
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut out = String::new();
    let sense = match lp.sense {
        Sense::Max => "max",
        Sense::Min => "min",
    };
    writeln!(out, "sense: {sense}").unwrap();
    writeln!(out, "vars: {}", lp.num_vars()).unwrap();
    if lp.objective.is_empty() {
        writeln!(out, "c:").unwrap();
    } else {
        writeln!(out, "c: {}", join(&lp.objective)).unwrap();
    }
    for con in &lp.constraints {
        let lhs = join(&con.coeffs);
        let sep = if lhs.is_empty() { "" } else { " " };
        writeln!(
            out,
            "{lhs}{sep}{} {}",
            con.relation.symbol(),
            rational::to_text(&con.rhs)
        )
        .unwrap();
    }
    let free: Vec<String> = lp
        .bounds
        .iter()
        .enumerate()
        .filter(|(_, b)| **b == VarBound::Free)
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !free.is_empty() {
        writeln!(out, "free: {}", free.join(" ")).unwrap();
    }
    out
}
