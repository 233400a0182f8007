use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Scalar};

/// Open real interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[T; 2]", into = "[T; 2]")]
#[serde(bound(serialize = "T: Scalar + Serialize", deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) || lo.is_nan() || hi.is_nan() {
            return Err(Error::Precondition(format!(
                "interval needs lo < hi, got ({lo}, {hi})"
            )));
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn is_positive(&self) -> bool {
        self.lo >= T::zero()
    }

    pub fn check(&self, what: &'static str, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain {
                what,
                value: to_f64(x),
                lo: to_f64(self.lo),
                hi: to_f64(self.hi),
            })
        }
    }

    /// `c·I` for `c > 0`.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) {
            return Err(Error::Precondition(format!("scale factor must be positive, got {c}")));
        }
        Interval::new(self.lo * c, self.hi * c)
    }

    /// `n` equally spaced points strictly inside the interval.
    pub fn interior_grid(&self, n: usize) -> Vec<T> {
        let w = self.width();
        let denom = lit::<T>((n + 1) as f64);
        (0..n)
            .map(|k| self.lo + w * lit::<T>((k + 1) as f64) / denom)
            .collect()
    }

    /// `n` Chebyshev-spaced points on `[lo + m·w, hi - m·w]`, ascending.
    pub fn chebyshev_grid(&self, n: usize, margin: T) -> Vec<T> {
        let w = self.width();
        let a = self.lo + margin * w;
        let b = self.hi - margin * w;
        let center = (a + b) / lit(2.0);
        let radius = (b - a) / lit(2.0);
        let nn = lit::<T>(n as f64);
        let mut pts: Vec<T> = (0..n)
            .map(|k| {
                let theta = T::PI() * lit::<T>((2 * k + 1) as f64) / (lit::<T>(2.0) * nn);
                center - radius * theta.cos()
            })
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        pts
    }
}

impl<T: Scalar> TryFrom<[T; 2]> for Interval<T> {
    type Error = Error;

    fn try_from(v: [T; 2]) -> Result<Self> {
        Interval::new(v[0], v[1])
    }
}

impl<T: Scalar> From<Interval<T>> for [T; 2] {
    fn from(i: Interval<T>) -> Self {
        [i.lo, i.hi]
    }
}
