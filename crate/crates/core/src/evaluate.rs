//! Evaluation of the generalized means.
//!
//! `M(x)` is the unique `y` with `Σ_k w_k D(m(x, t_k), y) = 0` (implicit
//! route); for a normalized pair it also equals `(f/g)⁻¹(⟨f∘m⟩/⟨g∘m⟩)`
//! (explicit route). Both are solved by bracketing bisection on
//! `[min m, max m]`, which always contains the root.

use serde::Serialize;

use crate::chebyshev::{ChebyshevClass, GeneratorPair, GiniParams, Monotonicity, GINI_EQUAL_TOL};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::family::MeanFamily;
use crate::measure::Measure;
use crate::scalar::{lit, to_f64, Scalar};

/// Iteration cap for every bisection.
pub const BISECTION_MAX_ITER: usize = 200;
/// Default relative bracket-width tolerance.
pub const BISECTION_REL_TOL: f64 = 1e-13;
/// `R` may miss the range of `f/g` over the bracket by this much (relative)
/// before it is treated as a numerical failure rather than rounding.
pub const RANGE_SLACK: f64 = 1e-12;
/// Number of interior points on which normalization of a pair is checked.
pub const NORMALIZATION_GRID_POINTS: usize = 65;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions<T> {
    /// Relative bracket width at which bisection stops; `0` bisects until the
    /// bracket cannot shrink further.
    pub rel_tol: T,
}

impl<T: Scalar> Default for EvalOptions<T> {
    fn default() -> Self {
        EvalOptions {
            rel_tol: lit(BISECTION_REL_TOL),
        }
    }
}

impl<T: Scalar> EvalOptions<T> {
    /// Bisect to exhaustion.
    pub fn full_precision() -> Self {
        EvalOptions { rel_tol: T::zero() }
    }
}

fn ulp<T: Scalar>(v: T) -> T {
    (v.abs() * T::epsilon()).max(T::min_positive_value())
}

/// Finds a sign change of `f` in `[lo, hi]` by bisection.
///
/// If `f(lo)` and `f(hi)` share a sign the bracket is widened by one ulp on
/// each side; if that does not help, a numerical error carrying both
/// residuals is returned.
pub fn bisect<T, F>(mut f: F, lo: T, hi: T, rel_tol: T) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> Result<T>,
{
    if !(lo <= hi) {
        return Err(Error::Precondition(format!("bisection bracket [{lo}, {hi}] is empty")));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        a = a - ulp(a);
        b = b + ulp(b);
        fa = f(a)?;
        fb = f(b)?;
        if fa == T::zero() {
            return Ok(a);
        }
        if fb == T::zero() {
            return Ok(b);
        }
        if fa.signum() == fb.signum() {
            return Err(Error::Numerical(format!(
                "no sign change on [{a}, {b}]: residuals {fa}, {fb}"
            )));
        }
    }
    for _ in 0..BISECTION_MAX_ITER {
        if b - a <= rel_tol * a.abs().max(b.abs()) {
            break;
        }
        let mid = a + (b - a) / lit(2.0);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(a + (b - a) / lit(2.0))
}

/// A pair, family and measure bound together, validated once.
#[derive(Debug, Clone)]
pub struct Mean<'a, T: Scalar> {
    pair: &'a GeneratorPair<T>,
    fam: &'a MeanFamily<T>,
    mu: &'a Measure<T>,
    class: ChebyshevClass<T>,
    normalization: std::result::Result<Monotonicity, String>,
    opts: EvalOptions<T>,
}

impl<'a, T: Scalar> Mean<'a, T> {
    /// Checks family/measure compatibility and the Chebyshev property of the
    /// pair; records (without failing) whether the pair is normalized.
    pub fn new(pair: &'a GeneratorPair<T>, fam: &'a MeanFamily<T>, mu: &'a Measure<T>) -> Result<Self> {
        fam.validate(mu)?;
        let class = pair.validate_chebyshev()?;
        let grid = pair.interval().interior_grid(NORMALIZATION_GRID_POINTS);
        let normalization = match pair.normalization(&grid) {
            Ok(m) => Ok(m),
            Err(Error::Normalization(msg)) => Err(msg),
            Err(e) => Err(e.to_string()),
        };
        Ok(Mean {
            pair,
            fam,
            mu,
            class,
            normalization,
            opts: EvalOptions::default(),
        })
    }

    pub fn with_options(mut self, opts: EvalOptions<T>) -> Self {
        self.opts = opts;
        self
    }

    pub fn pair(&self) -> &GeneratorPair<T> {
        self.pair
    }

    pub fn family(&self) -> &MeanFamily<T> {
        self.fam
    }

    pub fn measure(&self) -> &Measure<T> {
        self.mu
    }

    pub fn chebyshev_class(&self) -> ChebyshevClass<T> {
        self.class
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization.is_ok()
    }

    /// `(m(x, t_k), w_k)` over nodes of positive weight.
    fn node_values(&self, x: &[T]) -> Result<Vec<(T, T)>> {
        if x.len() != self.fam.dim() {
            return Err(Error::Precondition(format!(
                "point has {} coordinates, family expects {}",
                x.len(),
                self.fam.dim()
            )));
        }
        for &xi in x {
            self.pair.interval().check("x_i", xi)?;
        }
        self.mu
            .atoms()
            .filter(|&(_, w)| w > T::zero())
            .map(|(t, w)| Ok((self.fam.eval(x, t)?, w)))
            .collect()
    }

    /// `(⟨f∘m⟩, ⟨g∘m⟩, min m, max m)`.
    fn moments(&self, x: &[T]) -> Result<(T, T, T, T)> {
        let vals = self.node_values(x)?;
        let (mut a, mut b) = (T::zero(), T::zero());
        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        for (m, w) in vals {
            let (fm, gm) = self.pair.values(m)?;
            a = a + w * fm;
            b = b + w * gm;
            lo = lo.min(m);
            hi = hi.max(m);
        }
        Ok((a, b, lo, hi))
    }

    /// Root of `Σ w_k D(m_k, y)` in `[min m, max m]`.
    pub fn implicit(&self, x: &[T]) -> Result<T> {
        let (a, b, lo, hi) = self.moments(x)?;
        if lo == hi {
            return Ok(lo);
        }
        // Σ w_k (f(m_k) g(y) - g(m_k) f(y)) = A g(y) - B f(y)
        bisect(
            |y| {
                let (fy, gy) = self.pair.values(y)?;
                Ok(a * gy - b * fy)
            },
            lo,
            hi,
            self.opts.rel_tol,
        )
    }

    /// `(f/g)⁻¹(⟨f∘m⟩ / ⟨g∘m⟩)`; needs a normalized pair.
    pub fn explicit(&self, x: &[T]) -> Result<T> {
        if let Err(msg) = &self.normalization {
            return Err(Error::Normalization(msg.clone()));
        }
        let (a, b, lo, hi) = self.moments(x)?;
        if lo == hi {
            return Ok(lo);
        }
        let r = a / b;
        let resid = |y: T| -> Result<T> {
            let (fy, gy) = self.pair.values(y)?;
            Ok(fy / gy - r)
        };
        let (rl, rh) = (resid(lo)?, resid(hi)?);
        if rl != T::zero() && rh != T::zero() && rl.signum() == rh.signum() {
            let slack = lit::<T>(RANGE_SLACK) * (T::one() + r.abs());
            return if rl.abs() <= slack && rl.abs() <= rh.abs() {
                Ok(lo)
            } else if rh.abs() <= slack {
                Ok(hi)
            } else {
                Err(Error::Numerical(format!(
                    "ratio {r} lies outside f/g([{lo}, {hi}]) (residuals {rl}, {rh})"
                )))
            };
        }
        bisect(resid, lo, hi, self.opts.rel_tol)
    }

    /// Explicit route when the pair is normalized, implicit otherwise.
    pub fn eval(&self, x: &[T]) -> Result<T> {
        if self.is_normalized() {
            self.explicit(x)
        } else {
            self.implicit(x)
        }
    }
}

/// Implicit-route evaluation of `M_{f,g,m;μ}(x)`.
pub fn eval_implicit<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: &[T],
) -> Result<T> {
    Mean::new(pair, fam, mu)?.implicit(x)
}

/// Explicit-route evaluation of `M_{f,g,m;μ}(x)`.
pub fn eval_explicit<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: &[T],
) -> Result<T> {
    Mean::new(pair, fam, mu)?.explicit(x)
}

/// `f⁻¹(Σ w_k f(v_k))` by bisection on `[min v, max v]`.
fn quasi_arithmetic_core<T: Scalar>(f: &Expr<T>, vals: &[(T, T)]) -> Result<T> {
    let (mut lo, mut hi, mut target) = (T::infinity(), T::neg_infinity(), T::zero());
    for &(v, w) in vals {
        let fv = f.eval(v);
        if !fv.is_finite() {
            return Err(Error::Evaluation {
                node: format!("f({v})"),
                value: to_f64(fv),
            });
        }
        target = target + w * fv;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        return Ok(lo);
    }
    let (flo, fhi) = (f.eval(lo), f.eval(hi));
    if flo == fhi {
        return Err(Error::Precondition(format!(
            "f is not strictly monotone on [{lo}, {hi}]"
        )));
    }
    let slack = lit::<T>(RANGE_SLACK) * (T::one() + target.abs());
    let (rl, rh) = (flo - target, fhi - target);
    if rl.signum() == rh.signum() && rl != T::zero() && rh != T::zero() {
        if rl.abs() <= slack {
            return Ok(lo);
        }
        if rh.abs() <= slack {
            return Ok(hi);
        }
    }
    bisect(|y| Ok(f.eval(y) - target), lo, hi, lit(BISECTION_REL_TOL))
}

/// `f⁻¹(⟨f∘m⟩_μ)`, the `g ≡ 1` specialization.
pub fn eval_quasi_arithmetic<T: Scalar>(
    f: &Expr<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: &[T],
) -> Result<T> {
    fam.validate(mu)?;
    let vals = mu
        .atoms()
        .filter(|&(_, w)| w > T::zero())
        .map(|(t, w)| Ok((fam.eval(x, t)?, w)))
        .collect::<Result<Vec<_>>>()?;
    quasi_arithmetic_core(f, &vals)
}

fn check_simplex<T: Scalar>(t: &[T], d: usize) -> Result<()> {
    if t.len() != d {
        return Err(Error::Precondition(format!("{} weights for {d} coordinates", t.len())));
    }
    let tol = lit::<T>(1e-12);
    if t.iter().any(|&w| !(w >= -tol)) {
        return Err(Error::Precondition("weights must be nonnegative".into()));
    }
    let s = t.iter().fold(T::zero(), |a, &w| a + w);
    if (s - T::one()).abs() > tol {
        return Err(Error::Precondition(format!("weights sum to {s}, not 1")));
    }
    Ok(())
}

/// `f⁻¹(Σ tᵢ f(xᵢ))` for `t` in the probability simplex.
pub fn eval_weighted_qa<T: Scalar>(f: &Expr<T>, x: &[T], t: &[T]) -> Result<T> {
    check_simplex(t, x.len())?;
    let vals: Vec<(T, T)> = x
        .iter()
        .zip(t)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, &w)| (v, w))
        .collect();
    quasi_arithmetic_core(f, &vals)
}

/// Closed-form Gini value together with the arctan-branch denominator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GiniValue<T> {
    pub value: T,
    /// `⟨m^a cos(b log m)⟩_μ` for conjugate parameters.
    pub conjugate_denominator: Option<T>,
}

fn gini_from_values<T: Scalar>(params: &GiniParams<T>, vals: &[(T, T)]) -> Result<GiniValue<T>> {
    for &(m, _) in vals {
        if !(m > T::zero()) {
            return Err(Error::Domain {
                what: "m(x, t)",
                value: to_f64(m),
                lo: 0.0,
                hi: f64::INFINITY,
            });
        }
    }
    let avg = |h: &dyn Fn(T) -> T| vals.iter().fold(T::zero(), |acc, &(m, w)| acc + w * h(m));
    let value = match *params {
        GiniParams::RealDistinct { p, q } => {
            let num = avg(&|m: T| m.powf(p));
            let den = avg(&|m: T| m.powf(q));
            (num / den).powf((p - q).recip())
        }
        GiniParams::RealEqual { p } => (avg(&|m: T| m.powf(p) * m.ln()) / avg(&|m: T| m.powf(p))).exp(),
        GiniParams::Conjugate { a, b } => {
            let half_window = T::FRAC_PI_2();
            for &(m, _) in vals {
                if (b * m.ln()).abs() >= half_window {
                    let r = half_window / b;
                    return Err(Error::Domain {
                        what: "m(x, t) (conjugate Gini window)",
                        value: to_f64(m),
                        lo: to_f64((-r).exp()),
                        hi: to_f64(r.exp()),
                    });
                }
            }
            let s = avg(&|m: T| m.powf(a) * (b * m.ln()).sin());
            let c = avg(&|m: T| m.powf(a) * (b * m.ln()).cos());
            if !(c > T::zero()) {
                return Err(Error::Numerical(format!(
                    "arctan denominator {c} is not positive"
                )));
            }
            return Ok(GiniValue {
                value: ((s / c).atan() / b).exp(),
                conjugate_denominator: Some(c),
            });
        }
    };
    Ok(GiniValue {
        value,
        conjugate_denominator: None,
    })
}

/// Closed-form Gini mean `G_{p,q,m;μ}(x)` (power-ratio, log-weighted, or arctan branch).
pub fn eval_gini_closed<T: Scalar>(
    params: &GiniParams<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: &[T],
) -> Result<GiniValue<T>> {
    fam.validate(mu)?;
    let vals = mu
        .atoms()
        .filter(|&(_, w)| w > T::zero())
        .map(|(t, w)| Ok((fam.eval(x, t)?, w)))
        .collect::<Result<Vec<_>>>()?;
    gini_from_values(params, &vals)
}

/// Hölder mean: `⟨m^p⟩^{1/p}`, or `exp⟨log m⟩` at `p = 0`.
///
/// For `0 < |p| < 1e-8` the equal-parameter limit is used to avoid the
/// `1/p` blow-up.
pub fn eval_holder<T: Scalar>(p: T, fam: &MeanFamily<T>, mu: &Measure<T>, x: &[T]) -> Result<T> {
    if p.abs() < lit(GINI_EQUAL_TOL) {
        return Ok(eval_gini_closed(&GiniParams::RealEqual { p: p / lit(2.0) }, fam, mu, x)?.value);
    }
    Ok(eval_gini_closed(&GiniParams::RealDistinct { p, q: T::zero() }, fam, mu, x)?.value)
}

/// Weighted finite-sum Gini mean; `weights` default to `1/d`.
pub fn eval_gini_discrete<T: Scalar>(params: &GiniParams<T>, x: &[T], weights: Option<&[T]>) -> Result<T> {
    if x.is_empty() {
        return Err(Error::Precondition("empty point".into()));
    }
    let uniform;
    let t = match weights {
        Some(t) => t,
        None => {
            uniform = vec![T::one() / lit((x.len()) as f64); x.len()];
            &uniform
        }
    };
    check_simplex(t, x.len())?;
    let vals: Vec<(T, T)> = x
        .iter()
        .zip(t)
        .filter(|(_, &w)| w > T::zero())
        .map(|(&v, &w)| (v, w))
        .collect();
    Ok(gini_from_values(params, &vals)?.value)
}
