//! Generalized integral means generated by Chebyshev pairs.
//!
//! For a pair `(f, g)` on an interval `I`, a family of means `m(x, t)` and a
//! probability measure `μ`, the mean `M(x)` is the unique `y` with
//! `∫ D(m(x, t), y) dμ(t) = 0`, where `D(u, y) = f(u)g(y) − g(u)f(y)`.
//! The crate evaluates these means (and their Gini, Hölder and
//! quasi-arithmetic special cases), computes their diagonal derivatives, and
//! decides equality of two means and homogeneity of one.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix it to `f64`.

pub mod calculus;
pub mod chebyshev;
pub mod decide;
pub mod error;
pub mod evaluate;
pub mod expr;
pub mod family;
pub mod interval;
pub mod measure;
pub mod scalar;

pub use calculus::{
    derivative_check, diag_d1, diag_d2, diag_d3, diagonal_derivatives, fd_diag, DerivativeCheck,
    DiagonalDerivatives,
};
pub use chebyshev::{recover_witness, ChebyshevClass, EquivalenceWitness, GeneratorPair, GiniParams, Monotonicity, PairInvariants};
pub use decide::{
    classify_homogeneous, classify_homogeneous_qa, decide_equality, decide_equality_qa, default_grid, dilate_pair,
    homogeneity_scan, lambda_section, ratio_set, Check, Counterexample, DecisionReport, HomogeneityScan, Verdict,
};
pub use error::{Error, Result};
pub use evaluate::{
    bisect, eval_explicit, eval_gini_closed, eval_gini_discrete, eval_holder, eval_implicit, eval_quasi_arithmetic,
    eval_weighted_qa, EvalOptions, GiniValue, Mean,
};
pub use expr::{Expr, Jet};
pub use family::{FamilyKind, MeanFamily, NondegeneracyReport, WeightFunctions};
pub use interval::Interval;
pub use measure::{gauss_legendre, Measure, MeasureKind, Node, ParameterSpace};
pub use scalar::{close, rel_dev, Scalar};

pub type Expr64 = Expr<f64>;
pub type Interval64 = Interval<f64>;
pub type GeneratorPair64 = GeneratorPair<f64>;
pub type GiniParams64 = GiniParams<f64>;
pub type Measure64 = Measure<f64>;
pub type MeanFamily64 = MeanFamily<f64>;
pub type DecisionReport64 = DecisionReport<f64>;

pub type Expr32 = Expr<f32>;
pub type Interval32 = Interval<f32>;
pub type GeneratorPair32 = GeneratorPair<f32>;
pub type GiniParams32 = GiniParams<f32>;
pub type Measure32 = Measure<f32>;
pub type MeanFamily32 = MeanFamily<f32>;
