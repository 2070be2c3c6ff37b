//! Compensated floating-point accumulation.
//!
//! A Neumaier-corrected Kahan sum keeps the identity residuals of the
//! kernel module at the 1e-12 level over ~1e4 terms. Parallel callers
//! accumulate chunk partials with this type and merge them in a fixed
//! chunk order, which makes every reduction independent of the worker
//! count.

/// Kahan summation with Neumaier's branch for terms larger than the
/// running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    s: f64,
    c: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    /// Folds another partial in; used to combine chunk partials in order.
    #[inline]
    pub fn merge(&mut self, other: CompensatedSum) {
        self.add(other.s);
        self.c += other.c;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.s + self.c
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}
