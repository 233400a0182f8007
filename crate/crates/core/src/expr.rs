//! Closed catalog of scalar expressions with exact derivatives up to order three.
//!
//! Every node knows how to produce a [`Jet`] (value plus first three
//! derivatives). Sums, products and compositions propagate jets with the
//! Leibniz and Faà di Bruno rules, so no finite differencing ever enters
//! the invariant functions built on top of this module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::scalar::{lit, Scalar};

/// Value and first three derivatives of a function at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet<T> {
    pub v: T,
    pub d1: T,
    pub d2: T,
    pub d3: T,
}

impl<T: Scalar> Jet<T> {
    pub fn new(v: T, d1: T, d2: T, d3: T) -> Self {
        Jet { v, d1, d2, d3 }
    }

    pub fn constant(c: T) -> Self {
        Jet::new(c, T::zero(), T::zero(), T::zero())
    }

    /// Derivative of order `n` (0..=3).
    pub fn order(&self, n: usize) -> T {
        match n {
            0 => self.v,
            1 => self.d1,
            2 => self.d2,
            3 => self.d3,
            _ => panic!("jets carry derivatives up to order 3, asked for {n}"),
        }
    }

    pub fn scale(self, c: T) -> Self {
        Jet::new(c * self.v, c * self.d1, c * self.d2, c * self.d3)
    }

    pub fn add(self, o: Self) -> Self {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2, self.d3 + o.d3)
    }

    /// Leibniz rule.
    pub fn mul(self, o: Self) -> Self {
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + two * self.d1 * o.d1 + self.v * o.d2,
            self.d3 * o.v + three * self.d2 * o.d1 + three * self.d1 * o.d2 + self.v * o.d3,
        )
    }

    /// `self` holds the outer function's derivatives evaluated at `inner.v`.
    pub fn compose(self, inner: Self) -> Self {
        let three = lit::<T>(3.0);
        let g1 = inner.d1;
        Jet::new(
            self.v,
            self.d1 * g1,
            self.d2 * g1 * g1 + self.d1 * inner.d2,
            self.d3 * g1 * g1 * g1 + three * self.d2 * g1 * inner.d2 + self.d1 * inner.d3,
        )
    }
}

/// A scalar expression in one variable `x`.
///
/// Job files use the externally tagged JSON form, e.g. `{"pow": 2.0}`,
/// `{"const": 1.0}`, `"x"`, `"log"`,
/// `{"affine": {"terms": [[2.0, "x"]], "offset": 3.0}}`,
/// `{"product": ["x", "exp"]}`, `{"compose": {"outer": "sin", "inner": "log"}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr<T> {
    Const(T),
    #[serde(alias = "id", alias = "identity")]
    X,
    /// `x^r`
    Pow(T),
    Log,
    Exp,
    Sin,
    Cos,
    /// `offset + Σ c_k e_k(x)`
    Affine {
        terms: Vec<(T, Expr<T>)>,
        #[serde(default)]
        offset: T,
    },
    Product(Vec<Expr<T>>),
    /// `outer(inner(x))`
    Compose {
        outer: Box<Expr<T>>,
        inner: Box<Expr<T>>,
    },
}

impl<T: Scalar> Expr<T> {
    pub fn constant(c: T) -> Self {
        Expr::Const(c)
    }

    pub fn x() -> Self {
        Expr::X
    }

    pub fn pow(r: T) -> Self {
        Expr::Pow(r)
    }

    pub fn affine(terms: Vec<(T, Expr<T>)>, offset: T) -> Self {
        Expr::Affine { terms, offset }
    }

    /// `c * e`
    pub fn scaled(c: T, e: Expr<T>) -> Self {
        Expr::affine(vec![(c, e)], T::zero())
    }

    /// `a * x + b`
    pub fn linear(a: T, b: T) -> Self {
        Expr::affine(vec![(a, Expr::X)], b)
    }

    pub fn product(factors: Vec<Expr<T>>) -> Self {
        Expr::Product(factors)
    }

    pub fn compose(outer: Expr<T>, inner: Expr<T>) -> Self {
        Expr::Compose {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// `x ↦ self(λx)`
    pub fn dilate(&self, lambda: T) -> Self {
        Expr::compose(self.clone(), Expr::linear(lambda, T::zero()))
    }

    pub fn is_constant_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == T::one())
    }

    /// Function value only.
    pub fn eval(&self, x: T) -> T {
        match self {
            Expr::Const(c) => *c,
            Expr::X => x,
            Expr::Pow(r) => pow_value(x, *r),
            Expr::Log => x.ln(),
            Expr::Exp => x.exp(),
            Expr::Sin => x.sin(),
            Expr::Cos => x.cos(),
            Expr::Affine { terms, offset } => terms
                .iter()
                .fold(*offset, |acc, (c, e)| acc + *c * e.eval(x)),
            Expr::Product(fs) => fs.iter().fold(T::one(), |acc, e| acc * e.eval(x)),
            Expr::Compose { outer, inner } => outer.eval(inner.eval(x)),
        }
    }

    /// Value and exact derivatives up to order three.
    pub fn jet(&self, x: T) -> Jet<T> {
        match self {
            Expr::Const(c) => Jet::constant(*c),
            Expr::X => Jet::new(x, T::one(), T::zero(), T::zero()),
            Expr::Pow(r) => pow_jet(x, *r),
            Expr::Log => {
                let inv = x.recip();
                Jet::new(x.ln(), inv, -inv * inv, lit::<T>(2.0) * inv * inv * inv)
            }
            Expr::Exp => {
                let e = x.exp();
                Jet::new(e, e, e, e)
            }
            Expr::Sin => {
                let (s, c) = x.sin_cos();
                Jet::new(s, c, -s, -c)
            }
            Expr::Cos => {
                let (s, c) = x.sin_cos();
                Jet::new(c, -s, -c, s)
            }
            Expr::Affine { terms, offset } => terms
                .iter()
                .fold(Jet::constant(*offset), |acc, (c, e)| acc.add(e.jet(x).scale(*c))),
            Expr::Product(fs) => fs
                .iter()
                .fold(Jet::constant(T::one()), |acc, e| acc.mul(e.jet(x))),
            Expr::Compose { outer, inner } => {
                let g = inner.jet(x);
                outer.jet(g.v).compose(g)
            }
        }
    }

    fn render(&self, var: &str) -> String {
        match self {
            Expr::Const(c) => format!("{c}"),
            Expr::X => var.to_string(),
            Expr::Pow(r) => format!("{var}^{r}"),
            Expr::Log => format!("log({var})"),
            Expr::Exp => format!("exp({var})"),
            Expr::Sin => format!("sin({var})"),
            Expr::Cos => format!("cos({var})"),
            Expr::Affine { terms, offset } => {
                let mut parts: Vec<String> = terms
                    .iter()
                    .map(|(c, e)| {
                        if *c == T::one() {
                            e.render(var)
                        } else {
                            format!("{c}*{}", e.render(var))
                        }
                    })
                    .collect();
                if *offset != T::zero() || parts.is_empty() {
                    parts.push(format!("{offset}"));
                }
                format!("({})", parts.join(" + "))
            }
            Expr::Product(fs) => {
                let parts: Vec<String> = fs.iter().map(|e| e.render(var)).collect();
                parts.join("*")
            }
            Expr::Compose { outer, inner } => outer.render(&inner.render(var)),
        }
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("x"))
    }
}

fn is_small_nonneg_integer<T: Scalar>(r: T) -> Option<i32> {
    if r >= T::zero() && r <= lit(64.0) && r.fract() == T::zero() {
        r.to_i32()
    } else {
        None
    }
}

fn pow_value<T: Scalar>(x: T, r: T) -> T {
    match is_small_nonneg_integer(r) {
        Some(n) => x.powi(n),
        None => x.powf(r),
    }
}

// Falling-factorial coefficients vanish for small integer exponents; those
// terms are returned as exact zeros so that x = 0 never produces 0 * inf.
fn pow_jet<T: Scalar>(x: T, r: T) -> Jet<T> {
    let one = T::one();
    let two = lit::<T>(2.0);
    let c1 = r;
    let c2 = r * (r - one);
    let c3 = r * (r - one) * (r - two);
    let term = |c: T, k: T| {
        if c == T::zero() {
            T::zero()
        } else {
            c * pow_value(x, r - k)
        }
    };
    Jet::new(
        pow_value(x, r),
        term(c1, one),
        term(c2, two),
        term(c3, lit(3.0)),
    )
}
