//! Exact-rational complementary pivoting for linear programs.
//!
//! The crate builds the combined primal-dual tableau `[M q]` of a canonical
//! LP, runs a complementary Gauss-Jordan pivoting algorithm on it, and checks
//! the outcome against an independent two-phase simplex with Bland's rule.
//! All arithmetic is exact.

pub mod engine;
pub mod format;
pub mod generators;
pub mod harness;
pub mod lp;
pub mod oracle;
pub mod rational;
pub mod reduction;
pub mod rowspace;
pub mod tableau;
pub mod trace;

pub use engine::{run, EngineConfig, RunResult, RunStatus};
pub use format::{emit_instance, parse_instance};
pub use generators::{generate, regenerate, GeneratorSpec};
pub use harness::{differential_run, fuzz, ComparisonRecord, Verdict};
pub use lp::{canonicalize, CanonicalLp, GeneralLp};
pub use oracle::{simplex_solve, verify_certificate, OracleResult, OracleStatus};
pub use rational::Rational;
pub use tableau::{build_eq, EqSolution, EqTableau};
