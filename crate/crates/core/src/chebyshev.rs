//! Generator pairs `(f, g)`, their determinant `D(x, y) = f(x)g(y) - g(x)f(y)`,
//! the Wronskian and the invariant functions Φ and Ψ.
//!
//! Φ and Ψ characterise a pair up to a nonsingular linear change of basis
//! (see [`EquivalenceWitness`]); the deciders in [`crate::decide`] compare
//! them on grids. The sign of Ψ follows the determinant definition
//! `Ψ = -(f''g' - g''f') / (f'g - g'f)`, which gives `Ψ = -pq/x²` for the
//! power pair `(x^p, x^q)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::{Expr, Jet};
use crate::interval::Interval;
use crate::scalar::{lit, to_f64, Scalar};

/// Relative threshold under which a Wronskian counts as vanishing.
pub const WRONSKIAN_REL_TOL: f64 = 1e-12;
/// Relative residual accepted when verifying a recovered witness on a grid.
pub const WITNESS_RESIDUAL_TOL: f64 = 1e-8;
/// Default number of grid points for Chebyshev validation.
pub const CHEBYSHEV_GRID_POINTS: usize = 65;

const WITNESS_RETRIES: usize = 5;

/// A pair of generating functions on an open interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound(serialize = "T: Scalar + Serialize"))]
pub struct GeneratorPair<T> {
    f: Expr<T>,
    g: Expr<T>,
    interval: Interval<T>,
    smoothness: u8,
}

/// Values of the pair's invariants at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairInvariants<T> {
    pub wronskian: T,
    pub phi: T,
    pub psi: T,
    pub phi_prime: T,
    pub third_ratio: T,
}

/// Outcome of grid-based Chebyshev validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ChebyshevClass<T> {
    /// `D(x, y) > 0` for all grid pairs `x < y`.
    Positive,
    /// `D(x, y) < 0` for all grid pairs `x < y`.
    Negative,
    Violation { x: T, y: T, det: T },
}

impl<T> ChebyshevClass<T> {
    pub fn is_valid(&self) -> bool {
        !matches!(self, ChebyshevClass::Violation { .. })
    }
}

/// Whether `f/g` increases or decreases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Increasing,
    Decreasing,
}

impl<T: Scalar> GeneratorPair<T> {
    /// Pair of class `C_3` (every catalog expression has three exact derivatives).
    pub fn new(f: Expr<T>, g: Expr<T>, interval: Interval<T>) -> Self {
        GeneratorPair {
            f,
            g,
            interval,
            smoothness: 3,
        }
    }

    /// Declares a lower smoothness order `n ∈ {0, 1, 2, 3}`.
    pub fn with_smoothness(mut self, n: u8) -> Result<Self> {
        if n > 3 {
            return Err(Error::Precondition(format!(
                "smoothness must be in 0..=3, got {n}"
            )));
        }
        self.smoothness = n;
        Ok(self)
    }

    pub fn f(&self) -> &Expr<T> {
        &self.f
    }

    pub fn g(&self) -> &Expr<T> {
        &self.g
    }

    pub fn interval(&self) -> &Interval<T> {
        &self.interval
    }

    pub fn smoothness(&self) -> u8 {
        self.smoothness
    }

    pub(crate) fn require(&self, operation: &'static str, needed: u8) -> Result<()> {
        if self.smoothness < needed {
            Err(Error::Capability {
                operation,
                needed,
                declared: self.smoothness,
            })
        } else {
            Ok(())
        }
    }

    /// Jets of `f` and `g` at `x`, checked for domain and finiteness.
    pub fn jets(&self, x: T) -> Result<(Jet<T>, Jet<T>)> {
        self.interval.check("x", x)?;
        let jf = self.f.jet(x);
        let jg = self.g.jet(x);
        for (name, j) in [("f", jf), ("g", jg)] {
            for n in 0..=self.smoothness as usize {
                let v = j.order(n);
                if !v.is_finite() {
                    return Err(Error::Evaluation {
                        node: format!("{name}^({n})({x})"),
                        value: to_f64(v),
                    });
                }
            }
        }
        Ok((jf, jg))
    }

    /// Values `(f(x), g(x))` without derivatives.
    pub fn values(&self, x: T) -> Result<(T, T)> {
        self.interval.check("x", x)?;
        let (fv, gv) = (self.f.eval(x), self.g.eval(x));
        if !fv.is_finite() || !gv.is_finite() {
            return Err(Error::Evaluation {
                node: format!("(f, g)({x})"),
                value: to_f64(if fv.is_finite() { gv } else { fv }),
            });
        }
        Ok((fv, gv))
    }

    /// `D(x, y) = f(x)g(y) - g(x)f(y)`.
    pub fn det_d(&self, x: T, y: T) -> Result<T> {
        let (fx, gx) = self.values(x)?;
        let (fy, gy) = self.values(y)?;
        Ok(fx * gy - gx * fy)
    }

    /// `∂₁^a ∂₂^b D(x, y) = f^(a)(x) g^(b)(y) - g^(a)(x) f^(b)(y)`.
    pub fn det_partial(&self, a: usize, b: usize, x: T, y: T) -> Result<T> {
        let needed = a.max(b) as u8;
        self.require("det_partial", needed)?;
        let (fx, gx) = self.jets(x)?;
        let (fy, gy) = self.jets(y)?;
        Ok(fx.order(a) * gy.order(b) - gx.order(a) * fy.order(b))
    }

    /// `f'(x)g(x) - g'(x)f(x)`.
    pub fn wronskian(&self, x: T) -> Result<T> {
        self.require("wronskian", 1)?;
        let (jf, jg) = self.jets(x)?;
        Ok(jf.d1 * jg.v - jg.d1 * jf.v)
    }

    fn checked_wronskian(&self, x: T, jf: &Jet<T>, jg: &Jet<T>) -> Result<T> {
        let a = jf.d1 * jg.v;
        let b = jg.d1 * jf.v;
        let w = a - b;
        if w == T::zero() || w.abs() <= lit::<T>(WRONSKIAN_REL_TOL) * (a.abs() + b.abs()) {
            return Err(Error::Singularity {
                x: to_f64(x),
                wronskian: to_f64(w),
            });
        }
        Ok(w)
    }

    /// Wronskian, Φ, Ψ, Φ' and `∂₁³D/∂₁D` at `x` (needs smoothness 3).
    pub fn invariants(&self, x: T) -> Result<PairInvariants<T>> {
        self.require("invariants", 3)?;
        let (jf, jg) = self.jets(x)?;
        let w = self.checked_wronskian(x, &jf, &jg)?;
        // W' = f''g - g''f, which is also the numerator of Φ.
        let n_phi = jf.d2 * jg.v - jg.d2 * jf.v;
        let n_psi = jf.d2 * jg.d1 - jg.d2 * jf.d1;
        let n_phi_prime = jf.d3 * jg.v + jf.d2 * jg.d1 - jg.d3 * jf.v - jg.d2 * jf.d1;
        let phi = n_phi / w;
        Ok(PairInvariants {
            wronskian: w,
            phi,
            psi: -n_psi / w,
            phi_prime: n_phi_prime / w - phi * phi,
            third_ratio: (jf.d3 * jg.v - jg.d3 * jf.v) / w,
        })
    }

    /// `Φ(x) = (f''g - g''f) / (f'g - g'f)`.
    pub fn phi(&self, x: T) -> Result<T> {
        self.require("phi", 2)?;
        let (jf, jg) = self.jets(x)?;
        let w = self.checked_wronskian(x, &jf, &jg)?;
        Ok((jf.d2 * jg.v - jg.d2 * jf.v) / w)
    }

    /// `Ψ(x) = -(f''g' - g''f') / (f'g - g'f)`.
    pub fn psi(&self, x: T) -> Result<T> {
        self.require("psi", 2)?;
        let (jf, jg) = self.jets(x)?;
        let w = self.checked_wronskian(x, &jf, &jg)?;
        Ok(-(jf.d2 * jg.d1 - jg.d2 * jf.d1) / w)
    }

    /// `Φ'(x)`, from exact third derivatives.
    pub fn phi_prime(&self, x: T) -> Result<T> {
        Ok(self.invariants(x)?.phi_prime)
    }

    /// `∂₁³D(x,x) / ∂₁D(x,x) = (f'''g - g'''f) / (f'g - g'f)`.
    pub fn third_ratio(&self, x: T) -> Result<T> {
        Ok(self.invariants(x)?.third_ratio)
    }

    /// Pairwise sign test of `D` on a strictly increasing grid inside the interval.
    pub fn is_chebyshev(&self, grid: &[T]) -> Result<ChebyshevClass<T>> {
        if grid.len() < 2 {
            return Err(Error::Precondition("Chebyshev grid needs at least 2 points".into()));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Precondition("Chebyshev grid must be strictly increasing".into()));
        }
        let vals = grid
            .iter()
            .map(|&x| self.values(x))
            .collect::<Result<Vec<_>>>()?;
        let mut sign: Option<bool> = None;
        for i in 0..grid.len() {
            for j in i + 1..grid.len() {
                let (fx, gx) = vals[i];
                let (fy, gy) = vals[j];
                let det = fx * gy - gx * fy;
                let violation = ChebyshevClass::Violation {
                    x: grid[i],
                    y: grid[j],
                    det,
                };
                if det == T::zero() || !det.is_finite() {
                    return Ok(violation);
                }
                let positive = det > T::zero();
                match sign {
                    None => sign = Some(positive),
                    Some(s) if s != positive => return Ok(violation),
                    _ => {}
                }
            }
        }
        Ok(if sign == Some(true) {
            ChebyshevClass::Positive
        } else {
            ChebyshevClass::Negative
        })
    }

    /// Chebyshev check on the default 65-point interior grid.
    pub fn validate_chebyshev(&self) -> Result<ChebyshevClass<T>> {
        let grid = self.interval.interior_grid(CHEBYSHEV_GRID_POINTS);
        match self.is_chebyshev(&grid)? {
            ChebyshevClass::Violation { x, y, det } => Err(Error::Precondition(format!(
                "pair is not a Chebyshev system: D({x}, {y}) = {det}"
            ))),
            c => Ok(c),
        }
    }

    /// Checks `g > 0` and strict monotonicity of `f/g` on `grid`.
    pub fn normalization(&self, grid: &[T]) -> Result<Monotonicity> {
        let mut prev: Option<T> = None;
        let mut dir: Option<Monotonicity> = None;
        for &x in grid {
            let (fv, gv) = self.values(x)?;
            if !(gv > T::zero()) {
                return Err(Error::Normalization(format!("g({x}) = {gv} is not positive")));
            }
            let r = fv / gv;
            if let Some(p) = prev {
                let d = if r > p {
                    Monotonicity::Increasing
                } else if r < p {
                    Monotonicity::Decreasing
                } else {
                    return Err(Error::Normalization(format!("f/g is flat near {x}")));
                };
                match dir {
                    None => dir = Some(d),
                    Some(e) if e != d => {
                        return Err(Error::Normalization(format!("f/g changes direction near {x}")))
                    }
                    _ => {}
                }
            }
            prev = Some(r);
        }
        dir.ok_or_else(|| Error::Precondition("normalization grid needs at least 2 points".into()))
    }

    /// `(αf + βg, γf + δg)` on the same interval.
    pub fn apply_transform(&self, w: &EquivalenceWitness<T>) -> GeneratorPair<T> {
        let combo = |a: T, b: T| {
            Expr::affine(vec![(a, self.f.clone()), (b, self.g.clone())], T::zero())
        };
        GeneratorPair {
            f: combo(w.alpha, w.beta),
            g: combo(w.gamma, w.delta),
            interval: self.interval,
            smoothness: self.smoothness,
        }
    }

    /// `(f(λ·), g(λ·))` on `(1/λ)·I`.
    pub fn dilate(&self, lambda: T) -> Result<GeneratorPair<T>> {
        if !(lambda > T::zero()) {
            return Err(Error::Precondition(format!("dilation factor must be positive, got {lambda}")));
        }
        Ok(GeneratorPair {
            f: self.f.dilate(lambda),
            g: self.g.dilate(lambda),
            interval: self.interval.scaled(lambda.recip())?,
            smoothness: self.smoothness,
        })
    }
}

/// Coefficients of `(f, g) = (αh + βk, γh + δk)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceWitness<T> {
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    pub delta: T,
}

impl<T: Scalar> EquivalenceWitness<T> {
    pub fn new(alpha: T, beta: T, gamma: T, delta: T) -> Result<Self> {
        let w = EquivalenceWitness {
            alpha,
            beta,
            gamma,
            delta,
        };
        if w.det() == T::zero() || !w.det().is_finite() {
            return Err(Error::Precondition(format!(
                "witness matrix is singular: αδ - βγ = {}",
                w.det()
            )));
        }
        Ok(w)
    }

    pub fn identity() -> Self {
        EquivalenceWitness {
            alpha: T::one(),
            beta: T::zero(),
            gamma: T::zero(),
            delta: T::one(),
        }
    }

    pub fn det(&self) -> T {
        self.alpha * self.delta - self.beta * self.gamma
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        EquivalenceWitness {
            alpha: self.delta / d,
            beta: -self.beta / d,
            gamma: -self.gamma / d,
            delta: self.alpha / d,
        }
    }
}

/// Finds `w` with `pair_a = T_w(pair_b)`, i.e. `f = αh + βk`, `g = γh + δk`.
///
/// Coefficients are solved from the anchor points `x1, x2` and then verified
/// (values and first derivatives) on `grid`. When the anchor block is
/// singular, up to five alternative anchor pairs are taken from the grid.
/// Returns `Ok(None)` if no anchor pair yields a verified witness.
pub fn recover_witness<T: Scalar>(
    pair_a: &GeneratorPair<T>,
    pair_b: &GeneratorPair<T>,
    x1: T,
    x2: T,
    grid: &[T],
) -> Result<Option<EquivalenceWitness<T>>> {
    if x1 == x2 {
        return Err(Error::Precondition("witness anchors must differ".into()));
    }
    let n = grid.len();
    let mut anchors = vec![(x1, x2)];
    anchors.extend((0..WITNESS_RETRIES.min(n / 2)).map(|k| (grid[k], grid[n - 1 - k])));

    for (a1, a2) in anchors {
        let (f1, g1) = pair_a.values(a1)?;
        let (f2, g2) = pair_a.values(a2)?;
        let (h1, k1) = pair_b.values(a1)?;
        let (h2, k2) = pair_b.values(a2)?;
        let det = h1 * k2 - k1 * h2;
        if det == T::zero() || det.abs() <= lit::<T>(1e-12) * (h1 * k2).abs().max((k1 * h2).abs()) {
            continue;
        }
        let solve = |v1: T, v2: T| ((v1 * k2 - k1 * v2) / det, (h1 * v2 - v1 * h2) / det);
        let (alpha, beta) = solve(f1, f2);
        let (gamma, delta) = solve(g1, g2);
        let w = match EquivalenceWitness::new(alpha, beta, gamma, delta) {
            Ok(w) => w,
            Err(_) => return Ok(None),
        };
        let scale = (alpha * delta).abs() + (beta * gamma).abs();
        if w.det().abs() <= lit::<T>(1e-12) * scale {
            return Ok(None);
        }
        return Ok(verify_witness(pair_a, pair_b, &w, grid)?.then_some(w));
    }
    Ok(None)
}

fn verify_witness<T: Scalar>(
    pair_a: &GeneratorPair<T>,
    pair_b: &GeneratorPair<T>,
    w: &EquivalenceWitness<T>,
    grid: &[T],
) -> Result<bool> {
    let tol = lit::<T>(WITNESS_RESIDUAL_TOL);
    let order = pair_a.smoothness.min(pair_b.smoothness).min(1) as usize;
    for &x in grid {
        let (jf, jg) = pair_a.jets(x)?;
        let (jh, jk) = pair_b.jets(x)?;
        for n in 0..=order {
            let (h, k) = (jh.order(n), jk.order(n));
            for (target, a, b) in [(jf.order(n), w.alpha, w.beta), (jg.order(n), w.gamma, w.delta)] {
                let resid = (target - (a * h + b * k)).abs();
                let scale = target.abs() + (a * h).abs() + (b * k).abs();
                if resid > tol * scale + T::min_positive_value() {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Parameters `(p, q)` of a Gini mean: both real, or a conjugate pair `a ± bi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum GiniParams<T> {
    RealDistinct { p: T, q: T },
    RealEqual { p: T },
    Conjugate { a: T, b: T },
}

/// Below this separation two real parameters are treated as equal.
pub const GINI_EQUAL_TOL: f64 = 1e-8;
/// Discriminant magnitude below which the characteristic roots are merged.
pub const DISCRIMINANT_TOL: f64 = 1e-10;

impl<T: Scalar> GiniParams<T> {
    /// Real parameters; nearly equal ones collapse onto their midpoint.
    pub fn real(p: T, q: T) -> Self {
        if (p - q).abs() < lit(GINI_EQUAL_TOL) {
            GiniParams::RealEqual {
                p: (p + q) / lit(2.0),
            }
        } else {
            GiniParams::RealDistinct { p, q }
        }
    }

    /// `p = a + bi`, `q = a - bi`, with `b` normalised to be positive.
    pub fn conjugate(a: T, b: T) -> Result<Self> {
        if b == T::zero() || !b.is_finite() {
            return Err(Error::Precondition(format!(
                "conjugate Gini parameters need b != 0, got {b}"
            )));
        }
        Ok(GiniParams::Conjugate { a, b: b.abs() })
    }

    /// `H_p = G_{p,0}`.
    pub fn holder(p: T) -> Self {
        GiniParams::real(p, T::zero())
    }

    /// Roots of `r² - (α+1)r - β = 0`.
    pub fn from_characteristic(alpha: T, beta: T) -> Self {
        let s = alpha + T::one();
        let disc = s * s + lit::<T>(4.0) * beta;
        let two = lit::<T>(2.0);
        if disc.abs() < lit(DISCRIMINANT_TOL) {
            GiniParams::RealEqual { p: s / two }
        } else if disc > T::zero() {
            let r = disc.sqrt();
            GiniParams::real((s + r) / two, (s - r) / two)
        } else {
            GiniParams::Conjugate {
                a: s / two,
                b: (-disc).sqrt() / two,
            }
        }
    }

    /// `p + q`.
    pub fn sum(&self) -> T {
        match *self {
            GiniParams::RealDistinct { p, q } => p + q,
            GiniParams::RealEqual { p } => p + p,
            GiniParams::Conjugate { a, .. } => a + a,
        }
    }

    /// `pq`.
    pub fn product(&self) -> T {
        match *self {
            GiniParams::RealDistinct { p, q } => p * q,
            GiniParams::RealEqual { p } => p * p,
            GiniParams::Conjugate { a, b } => a * a + b * b,
        }
    }

    /// The two roots as `(re, im)` pairs.
    pub fn roots(&self) -> [(T, T); 2] {
        let z = T::zero();
        match *self {
            GiniParams::RealDistinct { p, q } => [(p, z), (q, z)],
            GiniParams::RealEqual { p } => [(p, z), (p, z)],
            GiniParams::Conjugate { a, b } => [(a, b), (a, -b)],
        }
    }

    /// `min over root orderings of |Δp| + |Δq|` (complex moduli).
    pub fn distance(&self, other: &GiniParams<T>) -> T {
        let [a1, a2] = self.roots();
        let [b1, b2] = other.roots();
        let d = |x: (T, T), y: (T, T)| (x.0 - y.0).hypot(x.1 - y.1);
        (d(a1, b1) + d(a2, b2)).min(d(a1, b2) + d(a2, b1))
    }

    /// For conjugate parameters, the interval `(e^{-π/(2b)}, e^{π/(2b)})` on
    /// which the closed form applies.
    pub fn closed_form_window(&self) -> Option<(T, T)> {
        match *self {
            GiniParams::Conjugate { b, .. } => {
                let r = T::FRAC_PI_2() / b;
                Some(((-r).exp(), r.exp()))
            }
            _ => None,
        }
    }

    /// The generating pair of the Gini mean on `interval`.
    ///
    /// Real parameters need `interval ⊂ (0, ∞)`. Conjugate parameters also
    /// need `hi/lo < e^{π/b}` for the pair to be a Chebyshev system.
    pub fn generator_pair(&self, interval: Interval<T>) -> Result<GeneratorPair<T>> {
        if !(interval.lo() >= T::zero()) {
            return Err(Error::Precondition(format!(
                "Gini generators live on (0, ∞), got interval ({}, {})",
                interval.lo(),
                interval.hi()
            )));
        }
        let (f, g) = match *self {
            GiniParams::RealDistinct { p, q } => (Expr::pow(p), Expr::pow(q)),
            GiniParams::RealEqual { p } => (Expr::product(vec![Expr::pow(p), Expr::Log]), Expr::pow(p)),
            GiniParams::Conjugate { a, b } => {
                if !(interval.lo() > T::zero()) || (interval.hi() / interval.lo()).ln() * b >= T::PI() {
                    return Err(Error::Precondition(format!(
                        "conjugate Gini pair with b = {b} is not a Chebyshev system on ({}, {})",
                        interval.lo(),
                        interval.hi()
                    )));
                }
                let blog = Expr::scaled(b, Expr::Log);
                (
                    Expr::product(vec![Expr::pow(a), Expr::compose(Expr::Sin, blog.clone())]),
                    Expr::product(vec![Expr::pow(a), Expr::compose(Expr::Cos, blog)]),
                )
            }
        };
        Ok(GeneratorPair::new(f, g, interval))
    }
}
