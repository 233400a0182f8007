//! Partial derivatives of `M_{f,g,m;μ}` on the diagonal, to order three.
//!
//! All averages are exact finite sums over the measure's nodes. A
//! finite-difference oracle on the full mean evaluation is provided for
//! validation.

use serde::Serialize;

use crate::chebyshev::GeneratorPair;
use crate::error::{Error, Result};
use crate::evaluate::{EvalOptions, Mean};
use crate::family::MeanFamily;
use crate::measure::Measure;
use crate::scalar::{lit, rel_dev, Scalar};

/// Derivative tensors of `M` at `x^(d) = (x, …, x)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalDerivatives<T> {
    pub x: T,
    pub first: Vec<T>,
    pub second: Vec<Vec<T>>,
    pub third: Option<Vec<Vec<Vec<T>>>>,
}

/// Raw and centered partial averages at one diagonal point.
struct Averages<T> {
    d: usize,
    weights: Vec<T>,
    /// `p[k][i] = ∂ᵢm(x^(d), t_k)`
    p: Vec<Vec<T>>,
    /// `∂ᵢ*m` at each node.
    c: Vec<Vec<T>>,
    mean: Vec<T>,
    // second and third partials at each node, flattened row-major
    p2: Vec<Vec<T>>,
    p3: Vec<Vec<T>>,
}

impl<T: Scalar> Averages<T> {
    fn new(pair: &GeneratorPair<T>, fam: &MeanFamily<T>, mu: &Measure<T>, x: T, order: usize) -> Result<Self> {
        fam.validate(mu)?;
        pair.interval().check("x", x)?;
        let d = fam.dim();
        let xd = vec![x; d];
        let mut p = Vec::with_capacity(mu.len());
        let mut p2 = Vec::with_capacity(mu.len());
        let mut p3 = Vec::with_capacity(mu.len());
        for &t in mu.nodes() {
            p.push((0..d).map(|i| fam.partial(i, &xd, t)).collect::<Result<Vec<_>>>()?);
            if order >= 2 {
                let mut row = Vec::with_capacity(d * d);
                for i in 0..d {
                    for j in 0..d {
                        row.push(fam.second_partial(i, j, &xd, t)?);
                    }
                }
                p2.push(row);
            }
            if order >= 3 {
                let mut row = Vec::with_capacity(d * d * d);
                for i in 0..d {
                    for j in 0..d {
                        for l in 0..d {
                            row.push(fam.third_partial(i, j, l, &xd, t)?);
                        }
                    }
                }
                p3.push(row);
            }
        }
        let weights = mu.weights().to_vec();
        let mean: Vec<T> = (0..d)
            .map(|i| p.iter().zip(&weights).fold(T::zero(), |a, (row, &w)| a + w * row[i]))
            .collect();
        let c = p
            .iter()
            .map(|row| row.iter().zip(&mean).map(|(&v, &m)| v - m).collect())
            .collect();
        Ok(Averages {
            d,
            weights,
            p,
            c,
            mean,
            p2,
            p3,
        })
    }

    fn avg(&self, h: impl Fn(usize) -> T) -> T {
        self.weights
            .iter()
            .enumerate()
            .fold(T::zero(), |a, (k, &w)| a + w * h(k))
    }

    fn check(&self, idx: &[usize]) -> Result<()> {
        match idx.iter().find(|&&i| i >= self.d) {
            Some(i) => Err(Error::Precondition(format!("index {i} out of range for d = {}", self.d))),
            None => Ok(()),
        }
    }

    fn d1(&self, i: usize) -> T {
        self.mean[i]
    }

    fn d2(&self, phi: T, i: usize, j: usize) -> T {
        phi * self.avg(|k| self.c[k][i] * self.c[k][j]) + self.avg(|k| self.p2[k][i * self.d + j])
    }

    fn d3(&self, phi: T, phi_prime: T, psi: T, i: usize, j: usize, l: usize) -> T {
        let d = self.d;
        let raw = self.avg(|k| self.p[k][i] * self.p[k][j] * self.p[k][l]) - self.mean[i] * self.mean[j] * self.mean[l];
        let mut cyc = T::zero();
        for (a, b, g) in [(i, j, l), (j, l, i), (l, i, j)] {
            let mixed = self.avg(|k| self.p2[k][a * d + b] * self.p[k][g]);
            cyc = cyc + mixed - self.d2(phi, a, b) * self.d1(g);
        }
        let centered = self.avg(|k| self.c[k][i] * self.c[k][j] * self.c[k][l]);
        let pure = self.avg(|k| self.p3[k][(i * d + j) * d + l]);
        (phi_prime + phi * phi) * raw + phi * cyc + psi * centered + pure
    }
}

/// `∂ᵢM(x^(d)) = ⟨∂ᵢm⟩_μ`.
pub fn diag_d1<T: Scalar>(pair: &GeneratorPair<T>, fam: &MeanFamily<T>, mu: &Measure<T>, x: T, i: usize) -> Result<T> {
    pair.require("diag_d1", 1)?;
    let av = Averages::new(pair, fam, mu, x, 1)?;
    av.check(&[i])?;
    Ok(av.d1(i))
}

/// `∂ᵢ∂ⱼM(x^(d)) = Φ(x)⟨∂ᵢ*m ∂ⱼ*m⟩_μ + ⟨∂ᵢ∂ⱼm⟩_μ`.
pub fn diag_d2<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: T,
    i: usize,
    j: usize,
) -> Result<T> {
    pair.require("diag_d2", 2)?;
    let av = Averages::new(pair, fam, mu, x, 2)?;
    av.check(&[i, j])?;
    Ok(av.d2(pair.phi(x)?, i, j))
}

/// Third diagonal derivative `∂ᵢ∂ⱼ∂ₗM(x^(d))`.
///
/// `(Φ'+Φ²)(⟨∂ᵢm ∂ⱼm ∂ₗm⟩ − ⟨∂ᵢm⟩⟨∂ⱼm⟩⟨∂ₗm⟩)
///  + Φ Σ_cyc (⟨∂_α∂_β m ∂_γ m⟩ − ∂_α∂_β M ∂_γ M)
///  + Ψ ⟨∂ᵢ*m ∂ⱼ*m ∂ₗ*m⟩ + ⟨∂ᵢ∂ⱼ∂ₗm⟩`,
/// the sum running over the three cyclic rotations of `(i, j, l)`.
pub fn diag_d3<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: T,
    i: usize,
    j: usize,
    l: usize,
) -> Result<T> {
    pair.require("diag_d3", 3)?;
    let av = Averages::new(pair, fam, mu, x, 3)?;
    av.check(&[i, j, l])?;
    let inv = pair.invariants(x)?;
    Ok(av.d3(inv.phi, inv.phi_prime, inv.psi, i, j, l))
}

/// All diagonal derivative tensors up to `order` (1 to 3).
pub fn diagonal_derivatives<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: T,
    order: u8,
) -> Result<DiagonalDerivatives<T>> {
    if !(1..=3).contains(&order) {
        return Err(Error::Precondition(format!("derivative order must be 1..=3, got {order}")));
    }
    pair.require("diagonal_derivatives", order.max(2))?;
    let av = Averages::new(pair, fam, mu, x, 3)?;
    let d = av.d;
    let first = (0..d).map(|i| av.d1(i)).collect();
    let phi = pair.phi(x)?;
    let second = (0..d).map(|i| (0..d).map(|j| av.d2(phi, i, j)).collect()).collect();
    let third = if order == 3 {
        let inv = pair.invariants(x)?;
        Some(
            (0..d)
                .map(|i| {
                    (0..d)
                        .map(|j| (0..d).map(|l| av.d3(inv.phi, inv.phi_prime, inv.psi, i, j, l)).collect())
                        .collect()
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(DiagonalDerivatives { x, first, second, third })
}

/// Default finite-difference step for a derivative of the given order.
pub fn default_step<T: Scalar>(x: T, order: usize) -> T {
    let base = if order <= 2 { lit::<T>(1e-4) } else { lit::<T>(1e-3) };
    base * (T::one() + x.abs())
}

fn stencil<T: Scalar>(mean: &Mean<'_, T>, point: &mut [T], idx: &[usize], h: T) -> Result<T> {
    match idx.split_first() {
        None => mean.eval(point),
        Some((&i, rest)) => {
            let x0 = point[i];
            point[i] = x0 + h;
            let up = stencil(mean, point, rest, h);
            point[i] = x0 - h;
            let down = stencil(mean, point, rest, h);
            point[i] = x0;
            Ok((up? - down?) / (h + h))
        }
    }
}

/// Central finite difference of the full mean in the directions `indices`
/// at `x^(d)`, with one step-halving Richardson extrapolation.
///
/// The stencil reaches `x ± order·h`, which must stay inside the interval.
pub fn fd_diag<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: T,
    indices: &[usize],
    h: Option<T>,
) -> Result<T> {
    let order = indices.len();
    if !(1..=3).contains(&order) {
        return Err(Error::Precondition(format!("derivative order must be 1..=3, got {order}")));
    }
    if let Some(&i) = indices.iter().find(|&&i| i >= fam.dim()) {
        return Err(Error::Precondition(format!("index {i} out of range for d = {}", fam.dim())));
    }
    let h = h.unwrap_or_else(|| default_step(x, order));
    if !(h > T::zero()) {
        return Err(Error::Precondition(format!("step must be positive, got {h}")));
    }
    let reach = h * lit::<T>(order as f64);
    pair.interval().check("finite-difference stencil", x - reach)?;
    pair.interval().check("finite-difference stencil", x + reach)?;
    let mean = Mean::new(pair, fam, mu)?.with_options(EvalOptions::full_precision());
    let mut point = vec![x; fam.dim()];
    let coarse = stencil(&mean, &mut point, indices, h)?;
    let fine = stencil(&mean, &mut point, indices, h / lit(2.0))?;
    Ok((lit::<T>(4.0) * fine - coarse) / lit(3.0))
}

/// One row of a closed-form vs finite-difference comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeCheck<T> {
    pub indices: Vec<usize>,
    pub closed_form: T,
    pub finite_difference: T,
    /// `|closed − fd| / (1 + max(|closed|, |fd|))`.
    pub deviation: T,
}

/// Compares every `i ≤ j ≤ l` entry up to `max_order` against `fd_diag`.
pub fn derivative_check<T: Scalar>(
    pair: &GeneratorPair<T>,
    fam: &MeanFamily<T>,
    mu: &Measure<T>,
    x: T,
    max_order: u8,
) -> Result<Vec<DerivativeCheck<T>>> {
    let dd = diagonal_derivatives(pair, fam, mu, x, max_order)?;
    let d = fam.dim();
    let mut rows = Vec::new();
    let mut push = |indices: Vec<usize>, closed: T| -> Result<()> {
        let fd = fd_diag(pair, fam, mu, x, &indices, None)?;
        rows.push(DerivativeCheck {
            indices,
            closed_form: closed,
            finite_difference: fd,
            deviation: rel_dev(closed, fd),
        });
        Ok(())
    };
    for i in 0..d {
        push(vec![i], dd.first[i])?;
    }
    if max_order >= 2 {
        for i in 0..d {
            for j in i..d {
                push(vec![i, j], dd.second[i][j])?;
            }
        }
    }
    if let Some(third) = &dd.third {
        for i in 0..d {
            for j in i..d {
                for l in j..d {
                    push(vec![i, j, l], third[i][j][l])?;
                }
            }
        }
    }
    Ok(rows)
}
