//! Fixed inputs shared by the benchmarks.

use eqpivot::generators::GeneratorSpec;
use eqpivot::tableau::EqTableau;
use eqpivot::{canonicalize, generate, CanonicalLp, Rational};

pub fn klee_minty(d: usize) -> CanonicalLp {
    canonicalize(&generate(&GeneratorSpec::klee_minty(d)).expect("valid dimension"))
}

pub fn random(seed: u64, m: usize, n: usize) -> CanonicalLp {
    canonicalize(&generate(&GeneratorSpec::random(seed, m, n)).expect("valid shape"))
}

/// First nonbasic column with a nonzero entry in `row`.
pub fn pivot_column(t: &EqTableau, row: usize) -> usize {
    let zero = Rational::from_integer(0.into());
    (0..t.width())
        .find(|&c| !t.is_basic(c) && t.entry(row, c) != &zero)
        .expect("row has a nonbasic nonzero")
}
