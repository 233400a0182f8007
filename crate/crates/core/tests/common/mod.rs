//! Shared fixtures: a catalog of generator pairs with hand-written
//! derivatives, family/measure setups, and a stand-alone mean solver used as
//! an oracle independent of the library's evaluation code.
#![allow(dead_code)]

use meanlab_core::{Expr, GeneratorPair, GiniParams, Interval, MeanFamily, Measure};

/// `[h, h', h'', h''']` at a point.
pub type Derivs = [f64; 4];

pub struct CatalogPair {
    pub name: &'static str,
    pub pair: GeneratorPair<f64>,
    pub oracle: fn(f64) -> (Derivs, Derivs),
    pub gini: Option<GiniParams<f64>>,
}

impl CatalogPair {
    pub fn interval(&self) -> Interval<f64> {
        *self.pair.interval()
    }
}

pub fn iv(lo: f64, hi: f64) -> Interval<f64> {
    Interval::new(lo, hi).unwrap()
}

fn pow_derivs(r: f64, x: f64) -> Derivs {
    [
        x.powf(r),
        r * x.powf(r - 1.0),
        r * (r - 1.0) * x.powf(r - 2.0),
        r * (r - 1.0) * (r - 2.0) * x.powf(r - 3.0),
    ]
}

/// Leibniz rule to third order.
fn product(u: Derivs, v: Derivs) -> Derivs {
    [
        u[0] * v[0],
        u[1] * v[0] + u[0] * v[1],
        u[2] * v[0] + 2.0 * u[1] * v[1] + u[0] * v[2],
        u[3] * v[0] + 3.0 * u[2] * v[1] + 3.0 * u[1] * v[2] + u[0] * v[3],
    ]
}

fn log_derivs(x: f64) -> Derivs {
    [x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)]
}

const ONE: Derivs = [1.0, 0.0, 0.0, 0.0];

/// `x^{a+ib}` differentiated through falling factorials; returns (Im, Re).
fn complex_power(a: f64, b: f64, x: f64) -> (Derivs, Derivs) {
    let (mut fr, mut fi) = (1.0, 0.0); // c(c-1)…(c-k+1)
    let mut re = [0.0; 4];
    let mut im = [0.0; 4];
    for k in 0..4 {
        let mag = x.powf(a - k as f64);
        let ph = b * x.ln();
        let (zr, zi) = (mag * ph.cos(), mag * ph.sin());
        re[k] = fr * zr - fi * zi;
        im[k] = fr * zi + fi * zr;
        let (cr, ci) = (a - k as f64, b);
        (fr, fi) = (fr * cr - fi * ci, fr * ci + fi * cr);
    }
    (im, re)
}

fn gini_oracle(p: f64, q: f64) -> impl Fn(f64) -> (Derivs, Derivs) {
    move |x| {
        if p == q {
            (product(pow_derivs(p, x), log_derivs(x)), pow_derivs(p, x))
        } else {
            (pow_derivs(p, x), pow_derivs(q, x))
        }
    }
}

fn gini_entry(name: &'static str, params: GiniParams<f64>, interval: Interval<f64>, oracle: fn(f64) -> (Derivs, Derivs)) -> CatalogPair {
    CatalogPair {
        name,
        pair: params.generator_pair(interval).unwrap(),
        oracle,
        gini: Some(params),
    }
}

/// Every catalog pair used by the suites.
pub fn catalog() -> Vec<CatalogPair> {
    vec![
        gini_entry("gini(2,1)", GiniParams::real(2.0, 1.0), iv(0.5, 4.0), |x| gini_oracle(2.0, 1.0)(x)),
        gini_entry("gini(3,0)", GiniParams::real(3.0, 0.0), iv(0.5, 4.0), |x| gini_oracle(3.0, 0.0)(x)),
        gini_entry("gini(0,0)", GiniParams::real(0.0, 0.0), iv(0.5, 4.0), |x| gini_oracle(0.0, 0.0)(x)),
        gini_entry("gini(1.5,1.5)", GiniParams::real(1.5, 1.5), iv(0.5, 4.0), |x| gini_oracle(1.5, 1.5)(x)),
        gini_entry("gini(-1,2)", GiniParams::real(-1.0, 2.0), iv(0.5, 4.0), |x| gini_oracle(-1.0, 2.0)(x)),
        gini_entry("gini(1±2i)", GiniParams::conjugate(1.0, 2.0).unwrap(), iv(0.9, 1.1), |x| complex_power(1.0, 2.0, x)),
        CatalogPair {
            name: "(exp, 1)",
            pair: GeneratorPair::new(Expr::Exp, Expr::constant(1.0), iv(0.5, 2.0)),
            oracle: |x| {
                let e = x.exp();
                ([e; 4], ONE)
            },
            gini: None,
        },
        CatalogPair {
            name: "(x + x³, 1)",
            pair: GeneratorPair::new(
                Expr::affine(vec![(1.0, Expr::X), (1.0, Expr::pow(3.0))], 0.0),
                Expr::constant(1.0),
                iv(0.5, 2.0),
            ),
            oracle: |x| ([x + x * x * x, 1.0 + 3.0 * x * x, 6.0 * x, 6.0], ONE),
            gini: None,
        },
        CatalogPair {
            name: "(sin, cos)",
            pair: GeneratorPair::new(Expr::Sin, Expr::Cos, iv(0.2, 1.2)),
            oracle: |x| {
                let (s, c) = x.sin_cos();
                ([s, c, -s, -c], [c, -s, -c, s])
            },
            gini: None,
        },
        CatalogPair {
            name: "(eˣ, e⁻ˣ)",
            pair: GeneratorPair::new(Expr::Exp, Expr::compose(Expr::Exp, Expr::linear(-1.0, 0.0)), iv(-1.0, 1.0)),
            oracle: |x| {
                let (e, m) = (x.exp(), (-x).exp());
                ([e; 4], [m, -m, m, -m])
            },
            gini: None,
        },
    ]
}

/// Measures on `[0, 1]` as `(t, w)` atoms, or label weights.
#[derive(Debug, Clone)]
pub enum MeasureDesc {
    Atoms(Vec<(f64, f64)>),
    Labels(Vec<f64>),
    Uniform(usize),
}

impl MeasureDesc {
    pub fn build(&self) -> Measure<f64> {
        match self {
            MeasureDesc::Atoms(a) => Measure::dirac_mix(a).unwrap(),
            MeasureDesc::Labels(w) => Measure::labels(w).unwrap(),
            MeasureDesc::Uniform(n) => Measure::uniform_quadrature(*n).unwrap(),
        }
    }

    /// `(node, weight)` with nodes as `t ∈ [0, 1]` or label indices.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            MeasureDesc::Atoms(a) => a.clone(),
            MeasureDesc::Labels(w) => w.iter().enumerate().map(|(k, &w)| (k as f64, w)).collect(),
            MeasureDesc::Uniform(n) => {
                // Gauss–Legendre on [0, 1] by Newton on P_n; independent of the library's rule.
                let n = *n;
                let mut out = Vec::with_capacity(n);
                for i in 0..n {
                    let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
                    let mut dp = 0.0;
                    for _ in 0..100 {
                        let (mut p0, mut p1) = (1.0, z);
                        for k in 2..=n {
                            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                            p0 = p1;
                            p1 = p2;
                        }
                        dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                        let dz = p1 / dp;
                        z -= dz;
                        if dz.abs() < 1e-16 {
                            break;
                        }
                    }
                    let w = 2.0 / ((1.0 - z * z) * dp * dp);
                    out.push(((1.0 - z) / 2.0, w / 2.0));
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyDesc {
    TwoPoint,
    Projection3,
    /// Bernstein weights `(t², 2t(1−t), (1−t)²)`.
    Bernstein3,
}

impl FamilyDesc {
    pub fn build(self) -> MeanFamily<f64> {
        match self {
            FamilyDesc::TwoPoint => MeanFamily::two_point(),
            FamilyDesc::Projection3 => MeanFamily::projection(3).unwrap(),
            FamilyDesc::Bernstein3 => {
                let one_minus = Expr::linear(-1.0, 1.0);
                MeanFamily::weighted_arithmetic(vec![
                    Expr::pow(2.0),
                    Expr::scaled(2.0, Expr::product(vec![Expr::X, one_minus.clone()])),
                    Expr::compose(Expr::pow(2.0), one_minus),
                ])
                .unwrap()
            }
        }
    }

    pub fn dim(self) -> usize {
        match self {
            FamilyDesc::TwoPoint => 2,
            _ => 3,
        }
    }

    pub fn eval(self, x: &[f64], t: f64) -> f64 {
        match self {
            FamilyDesc::TwoPoint => t * x[0] + (1.0 - t) * x[1],
            FamilyDesc::Projection3 => x[t as usize],
            FamilyDesc::Bernstein3 => t * t * x[0] + 2.0 * t * (1.0 - t) * x[1] + (1.0 - t) * (1.0 - t) * x[2],
        }
    }

    /// Four measures compatible with the family.
    pub fn measures(self) -> Vec<MeasureDesc> {
        match self {
            FamilyDesc::Projection3 => vec![
                MeasureDesc::Labels(vec![0.2, 0.3, 0.5]),
                MeasureDesc::Labels(vec![1.0 / 3.0; 3]),
                MeasureDesc::Labels(vec![0.6, 0.3, 0.1]),
                MeasureDesc::Labels(vec![0.1, 0.1, 0.8]),
            ],
            _ => vec![
                MeasureDesc::Atoms(vec![(0.0, 0.7), (1.0, 0.3)]),
                MeasureDesc::Atoms(vec![(0.1, 0.2), (0.5, 0.5), (0.95, 0.3)]),
                MeasureDesc::Uniform(16),
                MeasureDesc::Atoms(vec![(0.25, 0.4), (0.8, 0.6)]),
            ],
        }
    }
}

pub const FAMILIES: [FamilyDesc; 3] = [FamilyDesc::TwoPoint, FamilyDesc::Projection3, FamilyDesc::Bernstein3];

/// Solves `Σ w D(m_k, y) = 0` by bisection to the last bit, from the
/// hand-written generator values.
pub fn oracle_mean(c: &CatalogPair, fam: FamilyDesc, mu: &MeasureDesc, x: &[f64]) -> f64 {
    let vals: Vec<(f64, f64, f64)> = mu
        .atoms()
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(t, w)| {
            let m = fam.eval(x, t);
            let (f, g) = (c.oracle)(m);
            (w * f[0], w * g[0], m)
        })
        .collect();
    let (a, b): (f64, f64) = vals.iter().fold((0.0, 0.0), |(a, b), v| (a + v.0, b + v.1));
    let lo = vals.iter().map(|v| v.2).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v.2).fold(f64::NEG_INFINITY, f64::max);
    let h = |y: f64| {
        let (f, g) = (c.oracle)(y);
        a * g[0] - b * f[0]
    };
    bisect_exhaust(h, lo, hi)
}

/// Bisection until the bracket cannot shrink.
pub fn bisect_exhaust(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    let mut hlo = h(lo);
    if hlo == 0.0 {
        return lo;
    }
    if h(hi) == 0.0 {
        return hi;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        let hm = h(mid);
        if hm == 0.0 {
            return mid;
        }
        if (hm > 0.0) == (hlo > 0.0) {
            lo = mid;
            hlo = hm;
        } else {
            hi = mid;
        }
    }
}

/// Composed central differences in the directions `indices` with one
/// step-halving Richardson extrapolation.
pub fn oracle_fd(mean: &dyn Fn(&[f64]) -> f64, x: f64, d: usize, indices: &[usize], h: f64) -> f64 {
    fn stencil(mean: &dyn Fn(&[f64]) -> f64, p: &mut Vec<f64>, idx: &[usize], h: f64) -> f64 {
        match idx.split_first() {
            None => mean(p),
            Some((&i, rest)) => {
                p[i] += h;
                let up = stencil(mean, p, rest, h);
                p[i] -= 2.0 * h;
                let down = stencil(mean, p, rest, h);
                p[i] += h;
                (up - down) / (2.0 * h)
            }
        }
    }
    let mut p = vec![x; d];
    let coarse = stencil(mean, &mut p, indices, h);
    let fine = stencil(mean, &mut p, indices, h / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// `|a − b| / (1 + max(|a|, |b|))`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// 33 Chebyshev points on the inner 90% of the interval.
pub fn grid33(i: &Interval<f64>) -> Vec<f64> {
    meanlab_core::default_grid(i)
}
