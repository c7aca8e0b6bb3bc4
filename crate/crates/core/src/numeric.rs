//! Small numeric helpers shared across the crate.
//!
//! Every long running sum in this crate goes through [`KahanSum`]: the
//! averages and prefix sums here accumulate up to 1e6 terms of mixed
//! magnitude, and plain `+=` loses enough precision to matter at the
//! 1e-12 tolerances the tests pin.

/// Compensated (Kahan) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    /// Starts from an exact initial value.
    pub fn with_initial(value: f64) -> Self {
        Self { sum: value, compensation: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Kahan-compensated sum of an iterator.
pub fn sum_compensated<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// Decade checkpoints `1, 10, 100, ... <= max`, always ending at `max`.
pub fn decade_grid(max: usize) -> Vec<usize> {
    assert!(max >= 1, "decade grid needs max >= 1");
    let mut out = Vec::new();
    let mut p: usize = 1;
    loop {
        out.push(p);
        match p.checked_mul(10) {
            Some(next) if next <= max => p = next,
            _ => break,
        }
    }
    if *out.last().expect("nonempty") != max {
        out.push(max);
    }
    out
}

/// Up to `max_points` approximately geometrically spaced values covering
/// `lo..=hi` inclusive of both ends; exact range when it already fits.
pub(crate) fn log_spaced(lo: usize, hi: usize, max_points: usize) -> Vec<usize> {
    assert!(lo <= hi && max_points >= 2);
    if hi - lo + 1 <= max_points {
        return (lo..=hi).collect();
    }
    // Shift by one so a zero-based lo still admits a geometric ladder.
    let a = ((lo + 1) as f64).ln();
    let b = ((hi + 1) as f64).ln();
    let mut out = Vec::with_capacity(max_points);
    for i in 0..max_points {
        let t = i as f64 / (max_points - 1) as f64;
        let v = (a + t * (b - a)).exp();
        out.push((v.round() as usize).clamp(lo + 1, hi + 1) - 1);
    }
    out.dedup();
    out
}

/// Median of a slice; averages the middle pair for even lengths.
/// Panics on empty input or NaN entries.
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in median input"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Sample mean and standard error of the mean.
///
/// The standard error uses the unbiased sample variance; a single
/// observation yields a zero standard error by convention.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "mean of empty slice");
    let n = values.len() as f64;
    let mean = sum_compensated(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = sum_compensated(values.iter().map(|v| (v - mean) * (v - mean)));
    let var = ss / (n - 1.0);
    (mean, (var / n).sqrt())
}
