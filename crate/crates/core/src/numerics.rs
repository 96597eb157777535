//! Stable accumulation and small numeric helpers.

/// `ln(exp(a) + exp(b))` without overflow.
#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `ln(sum exp(xs))` in two passes (max, then scaled sum).
pub fn logsumexp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut s = NeumaierSum::new();
    for &x in xs {
        s.add((x - m).exp());
    }
    m + s.total().ln()
}

/// Compensated (Neumaier) summation. Results are deterministic for a fixed
/// insertion order, which is how every reduction in this crate is performed.
#[derive(Debug, Clone, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self { sum: 0.0, comp: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sum a slice with compensation.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    let mut s = NeumaierSum::new();
    for &x in xs {
        s.add(x);
    }
    s.total()
}

/// Online accumulator for `ln(sum_i exp(c_i + row_i[t]))` over many rows.
///
/// Rows are added one at a time; per slot it keeps a running maximum and a
/// rescaled sum, so mixtures of widely separated log magnitudes stay exact to
/// machine precision without a second pass.
#[derive(Debug, Clone)]
pub struct LogMixAccumulator {
    max: Vec<f64>,
    scaled: Vec<f64>,
}

impl LogMixAccumulator {
    pub fn new(len: usize) -> Self {
        Self {
            max: vec![f64::NEG_INFINITY; len],
            scaled: vec![0.0; len],
        }
    }

    /// Add a component with log-coefficient `log_coeff` and per-slot
    /// log-values `log_row`.
    pub fn add_scaled(&mut self, log_coeff: f64, log_row: &[f64]) {
        assert_eq!(log_row.len(), self.max.len());
        if log_coeff == f64::NEG_INFINITY {
            return;
        }
        for (t, &lr) in log_row.iter().enumerate() {
            let x = log_coeff + lr;
            if x == f64::NEG_INFINITY {
                continue;
            }
            if x > self.max[t] {
                self.scaled[t] = self.scaled[t] * (self.max[t] - x).exp() + 1.0;
                self.max[t] = x;
            } else {
                self.scaled[t] += (x - self.max[t]).exp();
            }
        }
    }

    /// Add a point contribution to a single slot.
    pub fn add_single(&mut self, slot: usize, log_value: f64) {
        if log_value == f64::NEG_INFINITY {
            return;
        }
        let (m, s) = (self.max[slot], self.scaled[slot]);
        if log_value > m {
            self.scaled[slot] = s * (m - log_value).exp() + 1.0;
            self.max[slot] = log_value;
        } else {
            self.scaled[slot] += (log_value - m).exp();
        }
    }

    pub fn into_log_values(self) -> Vec<f64> {
        self.max
            .into_iter()
            .zip(self.scaled)
            .map(|(m, s)| if m == f64::NEG_INFINITY { m } else { m + s.ln() })
            .collect()
    }
}

/// Maximize a unimodal function on `[a, b]` by golden-section search.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, iters: usize) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (a, b);
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Standard normal density.
#[inline]
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal cumulative distribution function.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logaddexp_matches_naive_small() {
        let v = logaddexp(0.5, 2.0);
        assert!((v - (0.5f64.exp() + 2.0f64.exp()).ln()).abs() < 1e-14);
    }

    #[test]
    fn logaddexp_handles_neg_infinity() {
        assert_eq!(logaddexp(f64::NEG_INFINITY, f64::NEG_INFINITY), f64::NEG_INFINITY);
        assert_eq!(logaddexp(f64::NEG_INFINITY, 1.5), 1.5);
    }

    #[test]
    fn logaddexp_large_magnitudes() {
        // naive exp overflows here
        let v = logaddexp(1234.0, 1232.0);
        assert!((v - (1232.0 + (1.0 + 2.0f64.exp()).ln())).abs() < 1e-12);
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::new();
        s.add(1.0);
        s.add(1e100);
        s.add(1.0);
        s.add(-1e100);
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn log_mix_accumulator_matches_logsumexp() {
        let rows = [vec![-2.0, -700.0, -0.5], vec![-1.0, -701.0, -3.0]];
        let coeffs = [(0.3f64).ln(), (0.7f64).ln()];
        let mut acc = LogMixAccumulator::new(3);
        for (c, r) in coeffs.iter().zip(rows.iter()) {
            acc.add_scaled(*c, r);
        }
        let got = acc.into_log_values();
        for t in 0..3 {
            let want = logsumexp(&[coeffs[0] + rows[0][t], coeffs[1] + rows[1][t]]);
            assert!((got[t] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 60);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(v.abs() < 1e-17);
    }

    #[test]
    fn normal_cdf_reference_points() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_cdf(1.0) - 0.841344746068543).abs() < 1e-12);
        assert!((normal_cdf(-1.0) - 0.158655253931457).abs() < 1e-12);
    }
}
