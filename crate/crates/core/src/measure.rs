//! Probability measures represented as finite weighted node sets.
//!
//! Non-atomic measures on `[0, 1]` only exist through a quadrature rule fixed
//! at construction, so every `⟨φ⟩_μ` in the crate is an exact finite sum.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Weight-sum drift tolerated (and renormalised away) at construction.
pub const WEIGHT_SUM_TOL: f64 = 1e-10;
/// Default node count for uniform quadrature measures.
pub const DEFAULT_QUADRATURE_NODES: usize = 64;

/// A point of the parameter set `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Node<T> {
    /// `t ∈ [0, 1]`
    Point(T),
    /// `t ∈ {0, …, d-1}`
    Label(usize),
}

impl<T: Scalar> fmt::Display for Node<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Point(t) => write!(f, "t={t}"),
            Node::Label(k) => write!(f, "label {k}"),
        }
    }
}

/// The parameter set a measure lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterSpace {
    UnitInterval,
    Labels(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureKind {
    ExactDiscrete,
    /// Gauss–Legendre discretisation of the uniform density.
    UniformQuadrature { nodes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Measure<T> {
    space: ParameterSpace,
    nodes: Vec<Node<T>>,
    weights: Vec<T>,
    kind: MeasureKind,
}

impl<T: Scalar> Measure<T> {
    fn from_parts(
        space: ParameterSpace,
        nodes: Vec<Node<T>>,
        weights: Vec<T>,
        kind: MeasureKind,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes with {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for (node, w) in nodes.iter().zip(&weights) {
            if !w.is_finite() || *w < T::zero() {
                return Err(Error::InvalidMeasure(format!("weight {w} at {node}")));
            }
            let inside = match (node, space) {
                (Node::Point(t), ParameterSpace::UnitInterval) => *t >= T::zero() && *t <= T::one(),
                (Node::Label(k), ParameterSpace::Labels(d)) => *k < d,
                _ => false,
            };
            if !inside {
                return Err(Error::InvalidMeasure(format!("{node} outside {space:?}")));
            }
        }
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if (total - T::one()).abs() > lit(WEIGHT_SUM_TOL) {
            return Err(Error::InvalidMeasure(format!("weights sum to {total}, not 1")));
        }
        let weights = if total == T::one() {
            weights
        } else {
            weights.into_iter().map(|w| w / total).collect()
        };
        Ok(Measure {
            space,
            nodes,
            weights,
            kind,
        })
    }

    /// Finitely supported measure on `[0, 1]` from `(t, weight)` pairs.
    pub fn dirac_mix(atoms: &[(T, T)]) -> Result<Self> {
        let (nodes, weights) = atoms.iter().map(|&(t, w)| (Node::Point(t), w)).unzip();
        Measure::from_parts(ParameterSpace::UnitInterval, nodes, weights, MeasureKind::ExactDiscrete)
    }

    /// `δ_c` on `[0, 1]`.
    pub fn dirac(c: T) -> Result<Self> {
        Measure::dirac_mix(&[(c, T::one())])
    }

    /// `(1 - s)·δ₀ + s·δ₁`.
    pub fn two_point(s: T) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidMeasure(format!("two-point weight s = {s} outside (0, 1)")));
        }
        Measure::dirac_mix(&[(T::zero(), T::one() - s), (T::one(), s)])
    }

    /// Uniform measure on `[0, 1]` discretised by an `n`-point Gauss–Legendre rule.
    pub fn uniform_quadrature(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMeasure(format!("quadrature needs at least 2 nodes, got {n}")));
        }
        let (xs, ws) = gauss_legendre::<T>(n);
        let half = lit::<T>(0.5);
        let nodes = xs.iter().map(|&x| Node::Point(half * (x + T::one()))).collect();
        let weights = ws.iter().map(|&w| half * w).collect();
        Measure::from_parts(
            ParameterSpace::UnitInterval,
            nodes,
            weights,
            MeasureKind::UniformQuadrature { nodes: n },
        )
    }

    /// `(δ₀ + … + δ_{d-1}) / d` on the labels `{0, …, d-1}`.
    pub fn counting(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidMeasure("counting measure needs d >= 1".into()));
        }
        let w = T::one() / lit::<T>(d as f64);
        Measure::labels(&vec![w; d])
    }

    /// Arbitrary probability weights on the labels `{0, …, len-1}`.
    pub fn labels(weights: &[T]) -> Result<Self> {
        let d = weights.len();
        Measure::from_parts(
            ParameterSpace::Labels(d),
            (0..d).map(Node::Label).collect(),
            weights.to_vec(),
            MeasureKind::ExactDiscrete,
        )
    }

    pub fn space(&self) -> ParameterSpace {
        self.space
    }

    pub fn kind(&self) -> MeasureKind {
        self.kind
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(node, weight)` pairs.
    pub fn atoms(&self) -> impl Iterator<Item = (Node<T>, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `⟨φ⟩_μ = Σ w_k φ(t_k)`.
    pub fn integrate<F>(&self, phi: F) -> Result<T>
    where
        F: Fn(Node<T>) -> T,
    {
        let mut acc = T::zero();
        for (node, w) in self.atoms() {
            let v = phi(node);
            if !v.is_finite() {
                return Err(Error::Evaluation {
                    node: node.to_string(),
                    value: to_f64(v),
                });
            }
            acc = acc + w * v;
        }
        Ok(acc)
    }

    fn points(&self, what: &str) -> Result<impl Iterator<Item = (T, T)> + '_> {
        if self.space != ParameterSpace::UnitInterval {
            return Err(Error::Unsupported(format!("{what} needs a measure on [0, 1]")));
        }
        Ok(self.atoms().map(|(n, w)| match n {
            Node::Point(t) => (t, w),
            Node::Label(_) => unreachable!("unit-interval measures carry points"),
        }))
    }

    /// `μ̂₁ = ∫ t dμ(t)`.
    pub fn first_moment(&self) -> Result<T> {
        Ok(self.points("first moment")?.fold(T::zero(), |a, (t, w)| a + w * t))
    }

    /// `μ_n = ∫ (t - μ̂₁)^n dμ(t)`.
    pub fn central_moment(&self, n: u32) -> Result<T> {
        if n == 0 {
            return Err(Error::Precondition("moment order must be positive".into()));
        }
        let mean = self.first_moment()?;
        let exp = i32::try_from(n).map_err(|_| Error::Precondition(format!("moment order {n} too large")))?;
        Ok(self
            .points("central moment")?
            .fold(T::zero(), |a, (t, w)| a + w * (t - mean).powi(exp)))
    }

    /// Same nodes, weights replaced (and validated).
    pub fn reweighted(&self, weights: Vec<T>) -> Result<Self> {
        Measure::from_parts(self.space, self.nodes.clone(), weights, MeasureKind::ExactDiscrete)
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ascending.
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut xs = vec![T::zero(); n];
    let mut ws = vec![T::zero(); n];
    let nn = lit::<T>(n as f64);
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (T::PI() * (lit::<T>(i as f64) + lit(0.75)) / (nn + lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x = x - dx;
            if dx.abs() <= T::epsilon() * lit(4.0) {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        let w = lit::<T>(2.0) / ((T::one() - x * x) * dp * dp);
        xs[i] = -x;
        xs[n - 1 - i] = x;
        ws[i] = w;
        ws[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        xs[n / 2] = T::zero();
    }
    (xs, ws)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kk = lit::<T>(k as f64);
        let p2 = ((lit::<T>(2.0) * kk - T::one()) * x * p1 - (kk - T::one()) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    let nn = lit::<T>(n as f64);
    (p1, nn * (x * p1 - p0) / (x * x - T::one()))
}
