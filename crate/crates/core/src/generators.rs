//! Deterministic instance generators and seeded corpora.
//!
//! Every instance has a text id from which [`regenerate`] rebuilds it:
//! `paper`, `beale`, `km-d3`, `km-d3-c3-r7`, `random-s42-m3-n4-k5-p100-d1`,
//! `degen-s42-m3-n4`.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{Constraint, GeneralLp, Relation, Sense};
use crate::rational::{int, ratio, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GeneratorSpec {
    /// `max sum coef_base^(d-j) x_j` subject to
    /// `2 sum_{j<i} coef_base^(i-j-1) x_j + x_i <= rhs_base^i`.
    KleeMinty {
        d: usize,
        coef_base: u32,
        rhs_base: u32,
    },
    Beale,
    PaperIllustration,
    Random {
        seed: u64,
        m: usize,
        n: usize,
        magnitude: u32,
        density_percent: u32,
        /// Largest denominator; 1 gives integer data.
        max_den: u32,
    },
    DegenerateRandom {
        seed: u64,
        m: usize,
        n: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("dimension must be at least 1")]
    Dimension,
    #[error("magnitude must be at least 1")]
    Magnitude,
    #[error("density must be in 1..=100 percent")]
    Density,
    #[error("denominator bound must be at least 1")]
    Denominator,
    #[error("bases must be at least 2")]
    Base,
    #[error("unrecognized instance id {0:?}")]
    Id(String),
}

impl GeneratorSpec {
    pub fn klee_minty(d: usize) -> Self {
        GeneratorSpec::KleeMinty {
            d,
            coef_base: 2,
            rhs_base: 5,
        }
    }

    pub fn random(seed: u64, m: usize, n: usize) -> Self {
        GeneratorSpec::Random {
            seed,
            m,
            n,
            magnitude: 5,
            density_percent: 100,
            max_den: 1,
        }
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        match *self {
            GeneratorSpec::KleeMinty {
                d,
                coef_base,
                rhs_base,
            } => {
                if d == 0 {
                    return Err(GeneratorError::Dimension);
                }
                if coef_base < 2 || rhs_base < 2 {
                    return Err(GeneratorError::Base);
                }
            }
            GeneratorSpec::Random {
                m,
                n,
                magnitude,
                density_percent,
                max_den,
                ..
            } => {
                if m == 0 || n == 0 {
                    return Err(GeneratorError::Dimension);
                }
                if magnitude == 0 {
                    return Err(GeneratorError::Magnitude);
                }
                if density_percent == 0 || density_percent > 100 {
                    return Err(GeneratorError::Density);
                }
                if max_den == 0 {
                    return Err(GeneratorError::Denominator);
                }
            }
            GeneratorSpec::DegenerateRandom { m, n, .. } => {
                if m == 0 || n == 0 {
                    return Err(GeneratorError::Dimension);
                }
            }
            GeneratorSpec::Beale | GeneratorSpec::PaperIllustration => {}
        }
        Ok(())
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::KleeMinty {
                d,
                coef_base: 2,
                rhs_base: 5,
            } => write!(f, "km-d{d}"),
            GeneratorSpec::KleeMinty {
                d,
                coef_base,
                rhs_base,
            } => write!(f, "km-d{d}-c{coef_base}-r{rhs_base}"),
            GeneratorSpec::Beale => f.write_str("beale"),
            GeneratorSpec::PaperIllustration => f.write_str("paper"),
            GeneratorSpec::Random {
                seed,
                m,
                n,
                magnitude,
                density_percent,
                max_den,
            } => write!(
                f,
                "random-s{seed}-m{m}-n{n}-k{magnitude}-p{density_percent}-d{max_den}"
            ),
            GeneratorSpec::DegenerateRandom { seed, m, n } => {
                write!(f, "degen-s{seed}-m{m}-n{n}")
            }
        }
    }
}

/// Splits `s5-m3` style fields into their numbers, checking the tags.
fn fields(parts: &[&str], tags: &[char]) -> Option<Vec<u64>> {
    if parts.len() != tags.len() {
        return None;
    }
    parts
        .iter()
        .zip(tags)
        .map(|(p, &t)| p.strip_prefix(t)?.parse().ok())
        .collect()
}

impl FromStr for GeneratorSpec {
    type Err = GeneratorError;

    fn from_str(id: &str) -> Result<Self, Self::Err> {
        let bad = || GeneratorError::Id(id.to_string());
        let parts: Vec<&str> = id.split('-').collect();
        let spec = match parts[0] {
            "paper" if parts.len() == 1 => GeneratorSpec::PaperIllustration,
            "beale" if parts.len() == 1 => GeneratorSpec::Beale,
            "km" => {
                let v = fields(&parts[1..], &['d'])
                    .or_else(|| fields(&parts[1..], &['d', 'c', 'r']))
                    .ok_or_else(bad)?;
                GeneratorSpec::KleeMinty {
                    d: v[0] as usize,
                    coef_base: v.get(1).map_or(Ok(2), |&c| u32::try_from(c)).map_err(|_| bad())?,
                    rhs_base: v.get(2).map_or(Ok(5), |&r| u32::try_from(r)).map_err(|_| bad())?,
                }
            }
            "random" => {
                let v = fields(&parts[1..], &['s', 'm', 'n', 'k', 'p', 'd']).ok_or_else(bad)?;
                let small = |x: u64| u32::try_from(x).map_err(|_| bad());
                GeneratorSpec::Random {
                    seed: v[0],
                    m: v[1] as usize,
                    n: v[2] as usize,
                    magnitude: small(v[3])?,
                    density_percent: small(v[4])?,
                    max_den: small(v[5])?,
                }
            }
            "degen" => {
                let v = fields(&parts[1..], &['s', 'm', 'n']).ok_or_else(bad)?;
                GeneratorSpec::DegenerateRandom {
                    seed: v[0],
                    m: v[1] as usize,
                    n: v[2] as usize,
                }
            }
            _ => return Err(bad()),
        };
        // Ids must be canonical so that they round-trip.
        if spec.to_string() != id {
            return Err(bad());
        }
        Ok(spec)
    }
}

fn le(coeffs: Vec<Rational>, rhs: Rational) -> Constraint {
    Constraint {
        coeffs,
        relation: Relation::Le,
        rhs,
    }
}

fn pow(base: u32, exp: usize) -> Rational {
    let mut v = Rational::one();
    for _ in 0..exp {
        v *= int(i64::from(base));
    }
    v
}

fn random_entry(
    rng: &mut ChaCha8Rng,
    magnitude: u32,
    density_percent: u32,
    max_den: u32,
) -> Rational {
    if rng.random_range(0..100) >= density_percent {
        return Rational::zero();
    }
    let k = i64::from(magnitude);
    let num = rng.random_range(-k..=k);
    let den = rng.random_range(1..=i64::from(max_den));
    ratio(num, den)
}

pub fn generate(spec: &GeneratorSpec) -> Result<GeneralLp, GeneratorError> {
    spec.validate()?;
    let lp = match *spec {
        GeneratorSpec::KleeMinty {
            d,
            coef_base,
            rhs_base,
        } => {
            let objective = (1..=d).map(|j| pow(coef_base, d - j)).collect();
            let constraints = (1..=d)
                .map(|i| {
                    let coeffs = (1..=d)
                        .map(|j| match j.cmp(&i) {
                            std::cmp::Ordering::Less => int(2) * pow(coef_base, i - j - 1),
                            std::cmp::Ordering::Equal => Rational::one(),
                            std::cmp::Ordering::Greater => Rational::zero(),
                        })
                        .collect();
                    le(coeffs, pow(rhs_base, i))
                })
                .collect();
            GeneralLp::nonnegative(Sense::Max, objective, constraints)
        }
        GeneratorSpec::Beale => {
            // The classical cycling example; slacks make it seven columns.
            let r = |n, d| ratio(n, d);
            GeneralLp::nonnegative(
                Sense::Max,
                vec![r(3, 4), int(-20), r(1, 2), int(-6)],
                vec![
                    le(vec![r(1, 4), int(-8), int(-1), int(9)], int(0)),
                    le(vec![r(1, 2), int(-12), r(-1, 2), int(3)], int(0)),
                    le(vec![int(0), int(0), int(1), int(0)], int(1)),
                ],
            )
        }
        GeneratorSpec::PaperIllustration => GeneralLp::nonnegative(
            Sense::Max,
            vec![int(2), int(1)],
            vec![
                le(vec![int(1), int(1)], int(5)),
                le(vec![int(1), int(0)], int(2)),
            ],
        ),
        GeneratorSpec::Random {
            seed,
            m,
            n,
            magnitude,
            density_percent,
            max_den,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let entry = |rng: &mut ChaCha8Rng| random_entry(rng, magnitude, density_percent, max_den);
            let objective = (0..n).map(|_| entry(&mut rng)).collect();
            let constraints = (0..m)
                .map(|_| {
                    let coeffs = (0..n).map(|_| entry(&mut rng)).collect();
                    le(coeffs, entry(&mut rng))
                })
                .collect();
            GeneralLp::nonnegative(Sense::Max, objective, constraints)
        }
        GeneratorSpec::DegenerateRandom { seed, m, n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let objective = (0..n).map(|_| random_entry(&mut rng, 5, 100, 1)).collect();
            let constraints = (0..m)
                .map(|i| {
                    let coeffs = (0..n).map(|_| random_entry(&mut rng, 5, 100, 1)).collect();
                    // Every other row passes through the origin.
                    let rhs = if i % 2 == 0 {
                        Rational::zero()
                    } else {
                        int(rng.random_range(0..=5))
                    };
                    le(coeffs, rhs)
                })
                .collect();
            GeneralLp::nonnegative(Sense::Max, objective, constraints)
        }
    };
    Ok(lp.expect("generated shapes are consistent"))
}

pub fn regenerate(id: &str) -> Result<GeneralLp, GeneratorError> {
    generate(&id.parse()?)
}

/// Random corpus: instance `i` uses seed `seed_base + i`, with `m` and `n`
/// drawn from that seed in `1..=max_m` and `1..=max_n`.
pub fn corpus(count: usize, seed_base: u64, max_m: usize, max_n: usize) -> Vec<GeneratorSpec> {
    (0..count as u64)
        .map(|i| {
            let seed = seed_base.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
            let m = rng.random_range(1..=max_m.max(1));
            let n = rng.random_range(1..=max_n.max(1));
            GeneratorSpec::random(seed, m, n)
        })
        .collect()
}
