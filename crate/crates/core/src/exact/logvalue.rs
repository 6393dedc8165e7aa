use serde::{Deserialize, Serialize};

/// A non-negative quantity held as its natural logarithm, with exact zero
/// carried as a flag.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogValue {
    ln: f64,
    zero: bool,
}

impl LogValue {
    pub const ZERO: LogValue = LogValue { ln: 0.0, zero: true };
    pub const ONE: LogValue = LogValue { ln: 0.0, zero: false };

    /// Value with logarithm `ln`; `ln` must be finite.
    pub fn from_ln(ln: f64) -> Self {
        debug_assert!(ln.is_finite(), "non-finite log value {ln}");
        LogValue { ln, zero: false }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x >= 0.0 && x.is_finite(), "LogValue needs a finite non-negative value");
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(x.ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// Natural log, or `None` for zero.
    pub fn ln(&self) -> Option<f64> {
        (!self.zero).then_some(self.ln)
    }

    /// Natural log, `-inf` for zero.
    pub fn ln_or_neg_inf(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.ln
        }
    }

    /// The value as a float; may overflow to infinity.
    pub fn to_f64(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.ln.exp()
        }
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        if self.zero || other.zero {
            Self::ZERO
        } else {
            Self::from_ln(self.ln + other.ln)
        }
    }

    pub fn powi(self, p: u32) -> LogValue {
        match (self.zero, p) {
            (_, 0) => Self::ONE,
            (true, _) => Self::ZERO,
            _ => Self::from_ln(self.ln * p as f64),
        }
    }

    /// `self / other`; `None` when `other` is zero.
    pub fn div(self, other: LogValue) -> Option<LogValue> {
        if other.zero {
            None
        } else if self.zero {
            Some(Self::ZERO)
        } else {
            Some(Self::from_ln(self.ln - other.ln))
        }
    }
}

/// Log-sum-exp accumulator with a running maximum.
///
/// The result depends on the order of additions only through rounding.
#[derive(Clone, Copy, Debug, Default)]
pub struct LogSum {
    max: f64,
    scaled: f64,
    any: bool,
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_ln(&mut self, ln: f64) {
        if !self.any {
            *self = LogSum {
                max: ln,
                scaled: 1.0,
                any: true,
            };
        } else if ln > self.max {
            self.scaled = self.scaled * (self.max - ln).exp() + 1.0;
            self.max = ln;
        } else {
            self.scaled += (ln - self.max).exp();
        }
    }

    pub fn add(&mut self, x: LogValue) {
        if let Some(ln) = x.ln() {
            self.add_ln(ln);
        }
    }

    pub fn merge(&mut self, other: &LogSum) {
        if !other.any {
            return;
        }
        if !self.any {
            *self = *other;
        } else if other.max > self.max {
            self.scaled = self.scaled * (self.max - other.max).exp() + other.scaled;
            self.max = other.max;
        } else {
            self.scaled += other.scaled * (other.max - self.max).exp();
        }
    }

    pub fn value(&self) -> LogValue {
        if self.any {
            LogValue::from_ln(self.max + self.scaled.ln())
        } else {
            LogValue::ZERO
        }
    }
}

impl FromIterator<LogValue> for LogSum {
    fn from_iter<I: IntoIterator<Item = LogValue>>(iter: I) -> Self {
        let mut s = LogSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_of_huge_terms() {
        let s: LogSum = [1000.0, 1000.0, 999.0]
            .into_iter()
            .map(LogValue::from_ln)
            .collect();
        let want = 1000.0 + (2.0 + (-1.0f64).exp()).ln();
        assert!((s.value().ln().unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn zeros() {
        let s: LogSum = [LogValue::ZERO, LogValue::ZERO].into_iter().collect();
        assert!(s.value().is_zero());
        assert!(LogValue::ZERO.mul(LogValue::from_ln(5.0)).is_zero());
        assert!(LogValue::ONE.div(LogValue::ZERO).is_none());
        assert_eq!(LogValue::from_f64(8.0).powi(0), LogValue::ONE);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin() * 30.0).collect();
        let all: LogSum = xs.iter().map(|&x| LogValue::from_ln(x)).collect();
        let mut a: LogSum = xs[..20].iter().map(|&x| LogValue::from_ln(x)).collect();
        let b: LogSum = xs[20..].iter().map(|&x| LogValue::from_ln(x)).collect();
        a.merge(&b);
        let (x, y) = (all.value().ln().unwrap(), a.value().ln().unwrap());
        assert!((x - y).abs() < 1e-12 * x.abs().max(1.0));
    }
}
