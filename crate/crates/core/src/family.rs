//! Measurable families `m(x, t)` of d-variable means.
//!
//! Three affine variants are built in: weighted arithmetic means
//! `Σ φᵢ(t) xᵢ`, the two-point family `t x + (1 - t) y`, and coordinate
//! projection `x_t` over labels. All are homogeneous and have vanishing
//! partials of order two and three; those higher partials are still exposed
//! so the diagonal-derivative formulas stay generic.
//!
//! The integrability (domination) hypotheses on the partials hold trivially
//! for node-set measures and are not checked.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::measure::{Measure, Node, ParameterSpace};
use crate::scalar::{lit, Scalar};

/// Tolerance on `Σ φᵢ(t) = 1` and `φᵢ(t) ∈ [0, 1]` at measure nodes.
pub const WEIGHT_FUNCTION_TOL: f64 = 1e-12;
/// A centered partial with magnitude at most this counts as vanishing.
pub const VANISHING_TOL: f64 = 1e-12;

/// Weight functions `φᵢ` of a weighted arithmetic family.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub enum WeightFunctions<T> {
    /// `φᵢ` as expressions in `t ∈ [0, 1]`.
    Expressions(Vec<Expr<T>>),
    /// `table[i][label]`.
    Table(Vec<Vec<T>>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub enum FamilyKind<T> {
    WeightedArithmetic(WeightFunctions<T>),
    TwoPoint,
    Projection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct MeanFamily<T> {
    d: usize,
    kind: FamilyKind<T>,
}

/// Nondegeneracy functionals at a diagonal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NondegeneracyReport<T> {
    /// μ-mass of the nodes where every centered partial vanishes.
    pub mt1_mass: T,
    /// Index triple `i ≤ j ≤ l` maximising `|⟨∂ᵢ*m ∂ⱼ*m ∂ₗ*m⟩|`.
    pub mt0_triple: (usize, usize, usize),
    pub mt0_value: T,
    pub mt1_ok: bool,
    pub mt0_ok: bool,
    pub satisfied: bool,
}

impl<T: Scalar> MeanFamily<T> {
    /// `m((x, y), t) = t x + (1 - t) y` on `T = [0, 1]`.
    pub fn two_point() -> Self {
        MeanFamily {
            d: 2,
            kind: FamilyKind::TwoPoint,
        }
    }

    /// `m(x, t) = x_t` on labels `{0, …, d-1}`.
    pub fn projection(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidFamily("projection family needs d >= 1".into()));
        }
        Ok(MeanFamily {
            d,
            kind: FamilyKind::Projection,
        })
    }

    /// `m(x, t) = Σ φᵢ(t) xᵢ` with `φᵢ` given as expressions on `[0, 1]`.
    pub fn weighted_arithmetic(phis: Vec<Expr<T>>) -> Result<Self> {
        if phis.is_empty() {
            return Err(Error::InvalidFamily("weighted arithmetic family needs d >= 1".into()));
        }
        Ok(MeanFamily {
            d: phis.len(),
            kind: FamilyKind::WeightedArithmetic(WeightFunctions::Expressions(phis)),
        })
    }

    /// `m(x, t) = Σ table[i][t] xᵢ` on labels.
    pub fn weighted_arithmetic_table(table: Vec<Vec<T>>) -> Result<Self> {
        if table.is_empty() || table.iter().any(|r| r.len() != table[0].len() || r.is_empty()) {
            return Err(Error::InvalidFamily("weight table must be a non-empty rectangle".into()));
        }
        Ok(MeanFamily {
            d: table.len(),
            kind: FamilyKind::WeightedArithmetic(WeightFunctions::Table(table)),
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &FamilyKind<T> {
        &self.kind
    }

    /// All built-in families satisfy `m(λx, t) = λ m(x, t)`.
    pub fn is_homogeneous(&self) -> bool {
        true
    }

    /// Checks that `mu` lives on this family's parameter set and, for
    /// weighted arithmetic families, that the weights form a partition of unity
    /// at every node.
    pub fn validate(&self, mu: &Measure<T>) -> Result<()> {
        match (&self.kind, mu.space()) {
            (FamilyKind::TwoPoint, ParameterSpace::UnitInterval)
            | (FamilyKind::WeightedArithmetic(WeightFunctions::Expressions(_)), ParameterSpace::UnitInterval) => {}
            (FamilyKind::Projection, ParameterSpace::Labels(n)) if n <= self.d => {}
            (FamilyKind::WeightedArithmetic(WeightFunctions::Table(t)), ParameterSpace::Labels(n))
                if n <= t[0].len() => {}
            (kind, space) => {
                return Err(Error::InvalidFamily(format!(
                    "family {} (d = {}) cannot be paired with a measure on {space:?}",
                    kind_name(kind),
                    self.d
                )))
            }
        }
        if let FamilyKind::WeightedArithmetic(_) = self.kind {
            let tol = lit::<T>(WEIGHT_FUNCTION_TOL);
            for &node in mu.nodes() {
                let mut total = T::zero();
                for i in 0..self.d {
                    let w = self.weight(i, node)?;
                    if !(w >= -tol && w <= T::one() + tol) {
                        return Err(Error::InvalidFamily(format!("φ_{i}({node}) = {w} outside [0, 1]")));
                    }
                    total = total + w;
                }
                if (total - T::one()).abs() > tol {
                    return Err(Error::InvalidFamily(format!("Σφᵢ({node}) = {total}, not 1")));
                }
            }
        }
        Ok(())
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.d {
            Ok(())
        } else {
            Err(Error::Precondition(format!("index {i} out of range for d = {}", self.d)))
        }
    }

    fn check_point(&self, x: &[T]) -> Result<()> {
        if x.len() == self.d {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "point has {} coordinates, family expects {}",
                x.len(),
                self.d
            )))
        }
    }

    fn mismatch(&self, t: Node<T>) -> Error {
        Error::InvalidFamily(format!("node {t} is not a parameter of family {}", kind_name(&self.kind)))
    }

    /// `∂ᵢ m`, which for the affine built-ins is the weight of coordinate `i` at `t`.
    fn weight(&self, i: usize, t: Node<T>) -> Result<T> {
        match (&self.kind, t) {
            (FamilyKind::TwoPoint, Node::Point(s)) => Ok(if i == 0 { s } else { T::one() - s }),
            (FamilyKind::Projection, Node::Label(k)) if k < self.d => {
                Ok(if k == i { T::one() } else { T::zero() })
            }
            (FamilyKind::WeightedArithmetic(WeightFunctions::Expressions(phis)), Node::Point(s)) => {
                Ok(phis[i].eval(s))
            }
            (FamilyKind::WeightedArithmetic(WeightFunctions::Table(tab)), Node::Label(k))
                if k < tab[i].len() =>
            {
                Ok(tab[i][k])
            }
            _ => Err(self.mismatch(t)),
        }
    }

    /// `m(x, t)`.
    pub fn eval(&self, x: &[T], t: Node<T>) -> Result<T> {
        self.check_point(x)?;
        match (&self.kind, t) {
            (FamilyKind::Projection, Node::Label(k)) if k < self.d => Ok(x[k]),
            (FamilyKind::TwoPoint, Node::Point(s)) => Ok(s * x[0] + (T::one() - s) * x[1]),
            _ => (0..self.d).try_fold(T::zero(), |acc, i| Ok(acc + self.weight(i, t)? * x[i])),
        }
    }

    /// `∂ᵢ m(x, t)`.
    pub fn partial(&self, i: usize, x: &[T], t: Node<T>) -> Result<T> {
        self.check_index(i)?;
        self.check_point(x)?;
        self.weight(i, t)
    }

    /// `∂ᵢ∂ⱼ m(x, t)`; identically zero for the affine built-ins.
    pub fn second_partial(&self, i: usize, j: usize, x: &[T], t: Node<T>) -> Result<T> {
        self.check_index(i)?;
        self.check_index(j)?;
        self.eval(x, t)?;
        Ok(T::zero())
    }

    /// `∂ᵢ∂ⱼ∂ₗ m(x, t)`; identically zero for the affine built-ins.
    pub fn third_partial(&self, i: usize, j: usize, l: usize, x: &[T], t: Node<T>) -> Result<T> {
        self.check_index(l)?;
        self.second_partial(i, j, x, t)
    }

    /// `⟨∂ᵢ m⟩_μ(x)`.
    pub fn mean_partial(&self, mu: &Measure<T>, i: usize, x: &[T]) -> Result<T> {
        self.check_index(i)?;
        self.check_point(x)?;
        let mut acc = T::zero();
        for (node, w) in mu.atoms() {
            acc = acc + w * self.weight(i, node)?;
        }
        Ok(acc)
    }

    /// `∂ᵢ*m(x, t) = ∂ᵢ m(x, t) - ⟨∂ᵢ m⟩_μ(x)`.
    pub fn centered_partial(&self, mu: &Measure<T>, i: usize, x: &[T], t: Node<T>) -> Result<T> {
        Ok(self.partial(i, x, t)? - self.mean_partial(mu, i, x)?)
    }

    /// `table[k][i] = ∂ᵢ*m(x, t_k)` over the measure's nodes.
    pub fn centered_partials(&self, mu: &Measure<T>, x: &[T]) -> Result<Vec<Vec<T>>> {
        let means = (0..self.d)
            .map(|i| self.mean_partial(mu, i, x))
            .collect::<Result<Vec<_>>>()?;
        mu.nodes()
            .iter()
            .map(|&node| {
                (0..self.d)
                    .map(|i| Ok(self.partial(i, x, node)? - means[i]))
                    .collect::<Result<Vec<_>>>()
            })
            .collect()
    }

    /// Evaluates the two nondegeneracy conditions at `x^(d)`.
    pub fn nondegeneracy(&self, mu: &Measure<T>, x: T) -> Result<NondegeneracyReport<T>> {
        let xd = vec![x; self.d];
        let c = self.centered_partials(mu, &xd)?;
        let tol = lit::<T>(VANISHING_TOL);
        let mt1_mass = c
            .iter()
            .zip(mu.weights())
            .filter(|(row, _)| row.iter().all(|v| v.abs() <= tol))
            .fold(T::zero(), |a, (_, &w)| a + w);

        let mut best = ((0, 0, 0), T::zero());
        for i in 0..self.d {
            for j in i..self.d {
                for l in j..self.d {
                    let v = c
                        .iter()
                        .zip(mu.weights())
                        .fold(T::zero(), |a, (row, &w)| a + w * row[i] * row[j] * row[l]);
                    if v.abs() > best.1.abs() {
                        best = ((i, j, l), v);
                    }
                }
            }
        }
        let mt1_ok = mt1_mass < T::one() - tol;
        let mt0_ok = best.1.abs() > tol;
        Ok(NondegeneracyReport {
            mt1_mass,
            mt0_triple: best.0,
            mt0_value: best.1,
            mt1_ok,
            mt0_ok,
            satisfied: mt1_ok && mt0_ok,
        })
    }
}

fn kind_name<T>(kind: &FamilyKind<T>) -> &'static str {
    match kind {
        FamilyKind::WeightedArithmetic(WeightFunctions::Expressions(_)) => "weighted_arithmetic",
        FamilyKind::WeightedArithmetic(WeightFunctions::Table(_)) => "weighted_arithmetic(table)",
        FamilyKind::TwoPoint => "two_point",
        FamilyKind::Projection => "projection",
    }
}
