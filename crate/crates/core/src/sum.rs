//! Compensated summation for order-stable reductions.
//!
//! Metric means are required to agree across runs and thread counts to
//! better than 1e-12, so every reduction over per-sentence values goes
//! through a Neumaier accumulator in a fixed index order.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

pub fn compensated_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    compensated_sum(values.iter().copied()) / values.len() as f64
}

/// Sample mean and standard error of the mean (Bessel-corrected, two-pass).
///
/// The standard error is 0 for fewer than two samples.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = compensated_mean(values);
    if n < 2 {
        return (mean, 0.0);
    }
    let ss = compensated_sum(values.iter().map(|v| {
        let d = v - mean;
        d * d
    }));
    let variance = ss / (n - 1) as f64;
    (mean, (variance / n as f64).sqrt())
}
