//! Closed intervals with outward rounding, enough to bound the force model.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "empty interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    fn widen(lo: f64, hi: f64) -> Self {
        Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// Splits into `n` equal pieces.
    pub fn split(&self, n: usize) -> Vec<Interval> {
        let w = self.width() / n as f64;
        (0..n)
            .map(|i| {
                let lo = self.lo + i as f64 * w;
                let hi = if i + 1 == n { self.hi } else { self.lo + (i + 1) as f64 * w };
                Interval { lo, hi }
            })
            .collect()
    }

    /// Image of a nonincreasing function.
    pub fn map_decreasing(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::widen(f(self.hi), f(self.lo))
    }

    /// Image of a nondecreasing function.
    pub fn map_increasing(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::widen(f(self.lo), f(self.hi))
    }

    pub fn sin(&self) -> Self {
        if self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = self.lo.sin().min(self.hi.sin());
        let mut hi = self.lo.sin().max(self.hi.sin());
        // extrema at π/2 + kπ inside the interval
        let k0 = ((self.lo - FRAC_PI_2) / PI).ceil() as i64;
        let k1 = ((self.hi - FRAC_PI_2) / PI).floor() as i64;
        for k in k0..=k1 {
            if k.rem_euclid(2) == 0 {
                hi = 1.0;
            } else {
                lo = -1.0;
            }
        }
        Self::widen(lo.max(-1.0), hi.min(1.0))
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, o: Interval) -> Interval {
        Interval::widen(self.lo + o.lo, self.hi + o.hi)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, o: Interval) -> Interval {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Interval::widen(lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn sine_encloses_samples(a in -7.0f64..7.0, w in 0.0f64..4.0, t in 0.0f64..1.0) {
            let iv = Interval::new(a, a + w);
            let s = iv.sin();
            let x = a + t * w;
            prop_assert!(s.lo <= x.sin() && x.sin() <= s.hi);
        }

        #[test]
        fn product_encloses_samples(a in -3.0f64..3.0, b in -3.0f64..3.0, s in 0.0f64..1.0, t in 0.0f64..1.0) {
            let x = Interval::new(a, a + 1.0);
            let y = Interval::new(b, b + 2.0);
            let p = x * y;
            let v = (a + s) * (b + 2.0 * t);
            prop_assert!(p.lo <= v && v <= p.hi);
        }
    }

    #[test]
    fn sine_of_quarter_turns() {
        let s = Interval::new(0.0, PI).sin();
        assert!(s.hi >= 1.0 && s.lo <= 0.0 && s.lo > -1e-15);
    }
}
