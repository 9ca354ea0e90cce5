use serde::{Deserialize, Serialize};

use super::DaError;

/// Closed interval `[lo, hi]` with finite endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealInterval {
    pub lo: f64,
    pub hi: f64,
}

impl RealInterval {
    pub fn new(lo: f64, hi: f64) -> Result<RealInterval, DaError> {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(DaError::NonFinite);
        }
        if lo > hi {
            return Err(DaError::EmptyInterval { lo, hi });
        }
        Ok(RealInterval { lo, hi })
    }

    pub fn point(x: f64) -> RealInterval {
        RealInterval { lo: x, hi: x }
    }

    /// `[-1, 1]`
    pub fn unit() -> RealInterval {
        RealInterval { lo: -1.0, hi: 1.0 }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn hull(&self, other: &RealInterval) -> RealInterval {
        RealInterval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Largest distance from `center` to either endpoint.
    pub fn half_width_about(&self, center: f64) -> f64 {
        (self.hi - center).max(center - self.lo).max(0.0)
    }

    pub fn mul(&self, other: &RealInterval) -> RealInterval {
        let p = [
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        ];
        RealInterval {
            lo: p.iter().copied().fold(f64::INFINITY, f64::min),
            hi: p.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn powi(&self, n: u32) -> RealInterval {
        if n == 0 {
            return RealInterval::point(1.0);
        }
        let a = self.lo.powi(n as i32);
        let b = self.hi.powi(n as i32);
        if n % 2 == 1 {
            RealInterval { lo: a, hi: b }
        } else if self.lo <= 0.0 && self.hi >= 0.0 {
            RealInterval { lo: 0.0, hi: a.max(b) }
        } else {
            RealInterval { lo: a.min(b), hi: a.max(b) }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powers() {
        let i = RealInterval::new(-2.0, 1.0).unwrap();
        assert_eq!(i.powi(2), RealInterval { lo: 0.0, hi: 4.0 });
        assert_eq!(i.powi(3), RealInterval { lo: -8.0, hi: 1.0 });
        let j = RealInterval::new(2.0, 3.0).unwrap();
        assert_eq!(j.powi(2), RealInterval { lo: 4.0, hi: 9.0 });
        assert_eq!(i.mul(&j), RealInterval { lo: -6.0, hi: 3.0 });
    }

    #[test]
    fn invalid() {
        assert!(RealInterval::new(1.0, 0.0).is_err());
        assert!(RealInterval::new(f64::NAN, 0.0).is_err());
    }
}
