//! Numerically stable accumulators and the nonparametric tests used by
//! the verification harness.

/// Welford mean/variance accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut w = Self::new();
        for &x in xs {
            w.push(x);
        }
        w
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sample_variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            (self.sample_variance() / self.n as f64).sqrt()
        }
    }
}

/// Asymptotic Kolmogorov distribution tail: `Q(x) = 2 sum (-1)^{k-1} e^{-2 k^2 x^2}`.
fn kolmogorov_tail(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k as f64) * (k as f64) * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-12 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample KS p-value against a CDF given as a closure. Sorts in place.
pub fn ks_one_sample_p(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len();
    assert!(n > 0);
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        let lo = i as f64 / n as f64;
        let hi = (i + 1) as f64 / n as f64;
        d = d.max((c - lo).abs()).max((hi - c).abs());
    }
    let nf = n as f64;
    // Small-sample correction from Stephens (1970).
    let stat = d * (nf.sqrt() + 0.12 + 0.11 / nf.sqrt());
    kolmogorov_tail(stat)
}

/// Two-sample KS p-value. Sorts both inputs in place.
pub fn ks_two_sample_p(a: &mut [f64], b: &mut [f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    assert!(n > 0 && m > 0);
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let xa = a[i];
        let xb = b[j];
        if xa <= xb {
            i += 1;
        }
        if xb <= xa {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n as f64 * m as f64) / (n as f64 + m as f64);
    kolmogorov_tail(d * ne.sqrt())
}

/// Uniform CDF on `[0, hi)`.
pub fn uniform_cdf(hi: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (x / hi).clamp(0.0, 1.0)
}
