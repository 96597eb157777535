//! Exact computation on the space of n-types.
//!
//! Every exchangeable distribution on the n-fold sample space is uniform
//! within each type class, so it is fully described by one weight per type.
//! Relative entropy and variational distance between two such distributions
//! reduce to sums over types because the within-class factors cancel; the
//! brute-force sequence-space equivalence is covered by the integration
//! tests. All weights are stored and accumulated in log domain so that
//! tail types with masses far below the smallest positive double remain
//! representable.
//!
//! Conventions fixed here: `0 ln 0 = 0`, and `q ln(q/0) = +inf` (reported as
//! an infinite-divergence signal).

use std::io::Write;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::families::{Family, ParamPoint};
use crate::numerics::{compensated_sum, logsumexp, NeumaierSum};

/// Exact enumeration is used while the number of types stays at or below
/// this; larger spaces must go through the Monte Carlo estimator.
pub const EXACT_THRESHOLD: u64 = 2_000_000;

/// Count vector of an n-sample: `counts[x]` occurrences of symbol `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeIndex {
    pub counts: Vec<u32>,
}

impl TypeIndex {
    pub fn new(counts: Vec<u32>) -> Self {
        Self { counts }
    }

    /// Total sample count.
    pub fn n(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

/// The enumerated space of all n-types on k symbols, in lexicographic order.
#[derive(Debug, Clone)]
pub struct TypeSpace {
    pub n: u32,
    pub k: usize,
    /// Flattened count vectors, stride `k`, lexicographically ordered.
    pub counts: Vec<u32>,
    /// Log class size (log multinomial coefficient) per type, nats.
    pub log_sizes: Vec<f64>,
    ln_factorial: Vec<f64>,
}

impl TypeSpace {
    /// Number of n-types on k symbols, capped at `cap + 1` to avoid overflow
    /// during the feasibility check.
    pub fn count_capped(n: u32, k: usize, cap: u128) -> u128 {
        // C(n + k - 1, k - 1), multiplicative form
        let mut acc: u128 = 1;
        for i in 1..=(k as u128 - 1) {
            acc = acc * (n as u128 + i) / i;
            if acc > cap {
                return cap + 1;
            }
        }
        acc
    }

    /// Enumerate all types, in lexicographic order on the count vectors.
    pub fn enumerate(n: u32, k: usize) -> Result<Arc<TypeSpace>> {
        Self::enumerate_with_threshold(n, k, EXACT_THRESHOLD)
    }

    pub fn enumerate_with_threshold(n: u32, k: usize, threshold: u64) -> Result<Arc<TypeSpace>> {
        if n < 1 || k < 2 {
            return Err(Error::InvalidConfig(format!(
                "type space needs n >= 1 and k >= 2, got n={n} k={k}"
            )));
        }
        let size = Self::count_capped(n, k, threshold as u128);
        if size > threshold as u128 {
            return Err(Error::TypeSpaceTooLarge {
                size: Self::count_capped(n, k, u64::MAX as u128),
                threshold,
            });
        }
        let size = size as usize;

        // cumulative compensated ln-factorial table: exact enough for the
        // 1e-12 tolerances downstream
        let mut ln_factorial = Vec::with_capacity(n as usize + 1);
        let mut acc = NeumaierSum::new();
        ln_factorial.push(0.0);
        for i in 1..=n {
            acc.add((i as f64).ln());
            ln_factorial.push(acc.total());
        }

        let mut counts = Vec::with_capacity(size * k);
        let mut current = vec![0u32; k];
        fill_compositions(n, k, 0, &mut current, &mut counts);
        debug_assert_eq!(counts.len(), size * k);

        let log_sizes = (0..size)
            .map(|i| {
                let cs = &counts[i * k..(i + 1) * k];
                let mut s = ln_factorial[n as usize];
                for &c in cs {
                    s -= ln_factorial[c as usize];
                }
                s
            })
            .collect();

        Ok(Arc::new(TypeSpace {
            n,
            k,
            counts,
            log_sizes,
            ln_factorial,
        }))
    }

    pub fn len(&self) -> usize {
        self.log_sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_sizes.is_empty()
    }

    /// Count vector of the i-th type.
    pub fn counts_at(&self, i: usize) -> &[u32] {
        &self.counts[i * self.k..(i + 1) * self.k]
    }

    pub fn type_at(&self, i: usize) -> TypeIndex {
        TypeIndex::new(self.counts_at(i).to_vec())
    }

    /// Log multinomial coefficient of the i-th type class.
    pub fn log_size(&self, i: usize) -> f64 {
        self.log_sizes[i]
    }

    /// Lexicographic rank of a count vector, if present.
    pub fn index_of(&self, counts: &[u32]) -> Option<usize> {
        (0..self.len())
            .collect::<Vec<_>>()
            .binary_search_by(|&i| self.counts_at(i).cmp(counts))
            .ok()
    }

    pub fn iter_types(&self) -> impl Iterator<Item = &[u32]> + '_ {
        (0..self.len()).map(|i| self.counts_at(i))
    }

    /// `ln n! - sum ln c_i!` for an arbitrary count vector with total `n`.
    pub fn log_multinomial(&self, counts: &[u32]) -> f64 {
        let mut s = self.ln_factorial[self.n as usize];
        for &c in counts {
            s -= self.ln_factorial[c as usize];
        }
        s
    }
}

fn fill_compositions(remaining: u32, k: usize, pos: usize, current: &mut [u32], out: &mut Vec<u32>) {
    if pos == k - 1 {
        current[pos] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for c in 0..=remaining {
        current[pos] = c;
        fill_compositions(remaining - c, k, pos + 1, current, out);
    }
}

/// An exchangeable distribution on the n-fold sample space, stored as one
/// log-weight per type (`-inf` marks an exact zero).
#[derive(Debug, Clone, PartialEq)]
pub struct ExchDist {
    log_weights: Vec<f64>,
}

impl ExchDist {
    pub fn from_log_weights(log_weights: Vec<f64>) -> Self {
        Self { log_weights }
    }

    pub fn from_weights(weights: &[f64]) -> Self {
        Self {
            log_weights: weights
                .iter()
                .map(|&w| if w > 0.0 { w.ln() } else { f64::NEG_INFINITY })
                .collect(),
        }
    }

    /// Point mass on one type.
    pub fn point_mass(len: usize, idx: usize) -> Self {
        let mut lw = vec![f64::NEG_INFINITY; len];
        lw[idx] = 0.0;
        Self { log_weights: lw }
    }

    /// Uniform distribution over a subset of types.
    pub fn uniform_on(len: usize, support: &[usize]) -> Self {
        assert!(!support.is_empty());
        let mut lw = vec![f64::NEG_INFINITY; len];
        let v = -(support.len() as f64).ln();
        for &i in support {
            lw[i] = v;
        }
        Self { log_weights: lw }
    }

    /// Finite mixture `sum_i w_i P_i` computed in log domain.
    pub fn mix(components: &[(f64, &ExchDist)]) -> Result<ExchDist> {
        let len = components
            .first()
            .map(|(_, d)| d.len())
            .ok_or_else(|| Error::InvalidConfig("empty mixture".into()))?;
        let mut acc = crate::numerics::LogMixAccumulator::new(len);
        for (w, d) in components {
            if d.len() != len {
                return Err(Error::DimensionMismatch(
                    "mixture components on different type spaces".into(),
                ));
            }
            if *w > 0.0 {
                acc.add_scaled(w.ln(), &d.log_weights);
            }
        }
        Ok(ExchDist::from_log_weights(acc.into_log_values()))
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weight(&self, i: usize) -> f64 {
        self.log_weights[i]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.log_weights[i].exp()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Total mass; 1 up to accumulation error for every constructor here.
    pub fn total(&self) -> f64 {
        logsumexp(&self.log_weights).exp()
    }

    /// Two-column CSV `(type_index, weight)`, for debugging dumps.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "type_index,weight")?;
        for (i, lw) in self.log_weights.iter().enumerate() {
            writeln!(w, "{},{}", i, lw.exp())?;
        }
        Ok(())
    }
}

/// Distribution of the type of `n` i.i.d. draws from `P_z`:
/// `w(type) = multinomial(n; counts) * prod_x p_x^{counts_x}`.
pub fn product_type_dist(family: &Family, z: &ParamPoint, ts: &TypeSpace) -> Result<ExchDist> {
    if family.k() != ts.k {
        return Err(Error::DimensionMismatch(format!(
            "family has k={}, type space has k={}",
            family.k(),
            ts.k
        )));
    }
    let log_p = family.log_pmf(z)?;
    let lw = (0..ts.len())
        .map(|i| {
            let cs = ts.counts_at(i);
            let mut s = ts.log_size(i);
            for (x, &c) in cs.iter().enumerate() {
                if c > 0 {
                    s += c as f64 * log_p[x];
                }
            }
            s
        })
        .collect();
    Ok(ExchDist::from_log_weights(lw))
}

/// Exact relative entropy `D(Q || P)` in nats between two exchangeable
/// distributions on the same type space.
///
/// Equals the relative entropy of the induced distributions on the full
/// sample space: both are uniform within type classes, so the class-size
/// factors cancel. Returns `+inf` when `Q` puts mass where `P` has an exact
/// zero.
pub fn kl_exch(q: &ExchDist, p: &ExchDist) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch(
            "distributions on different type spaces".into(),
        ));
    }
    let mut s = NeumaierSum::new();
    for (&lq, &lp) in q.log_weights.iter().zip(&p.log_weights) {
        let w = lq.exp();
        if w == 0.0 {
            continue; // 0 ln 0 = 0
        }
        if lp == f64::NEG_INFINITY {
            return Ok(f64::INFINITY); // q ln(q/0) = +inf
        }
        s.add(w * (lq - lp));
    }
    // exact identity can dip epsilon-negative
    Ok(s.total().max(0.0))
}

/// Exact variational distance `sum_types |Q - P|`, in `[0, 2]`.
pub fn l1_exch(q: &ExchDist, p: &ExchDist) -> Result<f64> {
    if q.len() != p.len() {
        return Err(Error::DimensionMismatch(
            "distributions on different type spaces".into(),
        ));
    }
    let mut s = NeumaierSum::new();
    for (&lq, &lp) in q.log_weights.iter().zip(&p.log_weights) {
        s.add((lq.exp() - lp.exp()).abs());
    }
    Ok(s.total())
}

/// Seeded Monte Carlo estimators for type spaces too large to enumerate.
///
/// Both estimators sample types from the reference distribution `P_z` and
/// evaluate the two densities through caller-supplied log-weight functions,
/// so no enumeration is needed. Standard errors are reported alongside the
/// estimates.
pub mod mc {
    use super::*;
    use rand_distr::{Binomial, Distribution};

    #[derive(Debug, Clone, Copy)]
    pub struct McEstimate {
        pub value: f64,
        pub std_error: f64,
        pub samples: u64,
    }

    /// Draw the count vector of `n` i.i.d. samples from `pmf` by sequential
    /// binomial splitting.
    pub fn sample_type<R: Rng>(rng: &mut R, n: u32, pmf: &[f64]) -> Vec<u32> {
        let mut counts = vec![0u32; pmf.len()];
        let mut remaining = n as u64;
        let mut mass_left = 1.0;
        for (x, &p) in pmf.iter().enumerate() {
            if x + 1 == pmf.len() {
                counts[x] = remaining as u32;
                break;
            }
            if remaining == 0 {
                break;
            }
            let cond = (p / mass_left).clamp(0.0, 1.0);
            let draw = Binomial::new(remaining, cond).unwrap().sample(rng);
            counts[x] = draw as u32;
            remaining -= draw;
            mass_left -= p;
        }
        counts
    }

    /// Estimate `E_{T ~ P}[ f(log Q(T) - log P(T)) ]` from `samples` draws.
    fn expectation_under_p<R, Fq, Fp, G>(
        rng: &mut R,
        n: u32,
        pmf: &[f64],
        log_q: Fq,
        log_p: Fp,
        g: G,
        samples: u64,
    ) -> McEstimate
    where
        R: Rng,
        Fq: Fn(&[u32]) -> f64,
        Fp: Fn(&[u32]) -> f64,
        G: Fn(f64) -> f64,
    {
        let mut sum = NeumaierSum::new();
        let mut sumsq = NeumaierSum::new();
        for _ in 0..samples {
            let t = sample_type(rng, n, pmf);
            let v = g(log_q(&t) - log_p(&t));
            sum.add(v);
            sumsq.add(v * v);
        }
        let mean = sum.total() / samples as f64;
        let var = (sumsq.total() / samples as f64 - mean * mean).max(0.0);
        McEstimate {
            value: mean,
            std_error: (var / samples as f64).sqrt(),
            samples,
        }
    }

    /// `||Q - P||_1 = E_{T~P} |Q(T)/P(T) - 1|`.
    pub fn l1_under_p<R, Fq, Fp>(
        rng: &mut R,
        n: u32,
        pmf: &[f64],
        log_q: Fq,
        log_p: Fp,
        samples: u64,
    ) -> McEstimate
    where
        R: Rng,
        Fq: Fn(&[u32]) -> f64,
        Fp: Fn(&[u32]) -> f64,
    {
        expectation_under_p(rng, n, pmf, log_q, log_p, |r| (r.exp() - 1.0).abs(), samples)
    }

    /// `D(Q || P) = E_{T~P}[ (Q/P) ln(Q/P) ]`.
    pub fn kl_under_p<R, Fq, Fp>(
        rng: &mut R,
        n: u32,
        pmf: &[f64],
        log_q: Fq,
        log_p: Fp,
        samples: u64,
    ) -> McEstimate
    where
        R: Rng,
        Fq: Fn(&[u32]) -> f64,
        Fp: Fn(&[u32]) -> f64,
    {
        expectation_under_p(rng, n, pmf, log_q, log_p, |r| r.exp() * r, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn enumerate_small_binary() {
        let ts = TypeSpace::enumerate(2, 2).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts.counts_at(0), &[0, 2]);
        assert_eq!(ts.counts_at(1), &[1, 1]);
        assert_eq!(ts.counts_at(2), &[2, 0]);
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(TypeSpace::enumerate(4, 2).unwrap().len(), 5);
        // brute force over all 27 ternary sequences grouped by counts gives 10
        let ts = TypeSpace::enumerate(3, 3).unwrap();
        assert_eq!(ts.len(), 10);
        let mut seen = std::collections::HashSet::new();
        for x0 in 0..3u32 {
            for x1 in 0..3u32 {
                for x2 in 0..3u32 {
                    let mut c = vec![0u32; 3];
                    for x in [x0, x1, x2] {
                        c[x as usize] += 1;
                    }
                    seen.insert(c);
                }
            }
        }
        assert_eq!(seen.len(), 10);
        for i in 0..ts.len() {
            assert!(seen.contains(&ts.counts_at(i).to_vec()));
        }
    }

    #[test]
    fn enumerate_is_sorted_and_duplicate_free() {
        let ts = TypeSpace::enumerate(5, 3).unwrap();
        for i in 1..ts.len() {
            assert!(ts.counts_at(i - 1) < ts.counts_at(i));
        }
    }

    #[test]
    fn enumerate_rejects_oversized() {
        let err = TypeSpace::enumerate_with_threshold(100, 4, 1000).unwrap_err();
        assert!(matches!(err, Error::TypeSpaceTooLarge { .. }));
        assert!(err.to_string().contains("Monte Carlo"));
    }

    #[test]
    fn class_sizes_cover_all_sequences() {
        // sum over types of the class size equals k^n, checked in log domain
        for (n, k) in [(4u32, 2usize), (6, 2), (12, 2), (5, 3), (9, 3)] {
            let ts = TypeSpace::enumerate(n, k).unwrap();
            let total = logsumexp(&ts.log_sizes);
            let want = n as f64 * (k as f64).ln();
            assert!((total - want).abs() < 1e-10, "n={n} k={k}");
        }
    }

    #[test]
    fn index_of_round_trips() {
        let ts = TypeSpace::enumerate(6, 3).unwrap();
        for i in 0..ts.len() {
            assert_eq!(ts.index_of(ts.counts_at(i)), Some(i));
        }
        assert_eq!(ts.index_of(&[7, 0, 0]), None);
    }

    #[test]
    fn product_dist_fair_coin() {
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(2, 2).unwrap();
        let d = product_type_dist(&f, &ParamPoint::scalar(0.5), &ts).unwrap();
        let got: Vec<f64> = (0..3).map(|i| d.weight(i)).collect();
        for (g, w) in got.iter().zip([0.25, 0.5, 0.25]) {
            assert!((g - w).abs() < 1e-14);
        }
    }

    #[test]
    fn product_dist_clamped_boundary_parameter() {
        // direct multinomial oracle at z = 0.98, n = 2:
        // (0.02^2, 2 * 0.02 * 0.98, 0.98^2)
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(2, 2).unwrap();
        let z = f.mle(&TypeIndex::new(vec![0, 2]));
        let d = product_type_dist(&f, &z, &ts).unwrap();
        for (i, w) in [(0, 0.0004), (1, 0.0392), (2, 0.9604)] {
            assert!((d.weight(i) - w).abs() < 1e-12);
        }
        assert!((d.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_dist_uniform_trinomial_single_sample() {
        let f = Family::trinomial();
        let ts = TypeSpace::enumerate(1, 3).unwrap();
        let d =
            product_type_dist(&f, &ParamPoint::new(vec![1.0 / 3.0, 1.0 / 3.0]), &ts).unwrap();
        for i in 0..3 {
            assert!((d.weight(i) - 1.0 / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn kl_exch_identical_is_zero() {
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(4, 2).unwrap();
        let p = product_type_dist(&f, &ParamPoint::scalar(0.3), &ts).unwrap();
        assert_eq!(kl_exch(&p, &p).unwrap(), 0.0);
        assert_eq!(l1_exch(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_exch_point_mass_oracle() {
        // D(delta_(1,1) || P) = -ln P((1,1)) = -ln 0.5
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(2, 2).unwrap();
        let p = product_type_dist(&f, &ParamPoint::scalar(0.5), &ts).unwrap();
        let q = ExchDist::point_mass(3, 1);
        let got = kl_exch(&q, &p).unwrap();
        assert!((got - 0.5f64.ln().neg()).abs() < 1e-14);
    }

    #[test]
    fn kl_exch_signals_infinite_divergence() {
        let q = ExchDist::point_mass(3, 0);
        let p = ExchDist::point_mass(3, 1);
        assert!(kl_exch(&q, &p).unwrap().is_infinite());
    }

    #[test]
    fn l1_point_masses_on_distinct_types() {
        let q = ExchDist::point_mass(4, 0);
        let p = ExchDist::point_mass(4, 2);
        assert_eq!(l1_exch(&q, &p).unwrap(), 2.0);
    }

    #[test]
    fn kl_additivity_over_samples() {
        let f = Family::bernoulli();
        let z = ParamPoint::scalar(0.3);
        let z2 = ParamPoint::scalar(0.55);
        let single = f.kl(&z, &z2).unwrap();
        for n in [1u32, 2, 3, 4, 16] {
            let ts = TypeSpace::enumerate(n, 2).unwrap();
            let p = product_type_dist(&f, &z, &ts).unwrap();
            let q = product_type_dist(&f, &z2, &ts).unwrap();
            let got = kl_exch(&p, &q).unwrap();
            assert!(
                (got - n as f64 * single).abs() < 1e-10,
                "n={n}: {got} vs {}",
                n as f64 * single
            );
        }
    }

    #[test]
    fn pinsker_between_product_dists() {
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(8, 2).unwrap();
        let p = product_type_dist(&f, &ParamPoint::scalar(0.4), &ts).unwrap();
        let q = product_type_dist(&f, &ParamPoint::scalar(0.7), &ts).unwrap();
        let kl = kl_exch(&q, &p).unwrap();
        let l1 = l1_exch(&q, &p).unwrap();
        assert!(l1 <= 2.0);
        assert!(kl >= 0.5 * l1 * l1);
    }

    #[test]
    fn mixture_total_mass() {
        let f = Family::bernoulli();
        let ts = TypeSpace::enumerate(6, 2).unwrap();
        let a = product_type_dist(&f, &ParamPoint::scalar(0.2), &ts).unwrap();
        let b = product_type_dist(&f, &ParamPoint::scalar(0.8), &ts).unwrap();
        let m = ExchDist::mix(&[(0.25, &a), (0.75, &b)]).unwrap();
        assert!((m.total() - 1.0).abs() < 1e-12);
        for i in 0..m.len() {
            let want = 0.25 * a.weight(i) + 0.75 * b.weight(i);
            assert!((m.weight(i) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_dump_shape() {
        let d = ExchDist::from_weights(&[0.25, 0.5, 0.25]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "type_index,weight");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("1,0.5"));
    }

    #[test]
    fn mc_sampler_matches_exact_moments() {
        let f = Family::bernoulli();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 32u32;
        let pmf = f.pmf(&ParamPoint::scalar(0.3)).unwrap();
        let samples = 20_000u64;
        let mut mean = 0.0;
        for _ in 0..samples {
            let t = mc::sample_type(&mut rng, n, &pmf);
            assert_eq!(t.iter().sum::<u32>(), n);
            mean += t[1] as f64;
        }
        mean /= samples as f64;
        // E[count of symbol 1] = 0.3 n = 9.6, sd of the mean ~ 0.018
        assert!((mean - 9.6).abs() < 0.1, "mean={mean}");
    }

    #[test]
    fn mc_l1_matches_exact_within_error_bars() {
        let f = Family::bernoulli();
        let n = 64u32;
        let ts = TypeSpace::enumerate(n, 2).unwrap();
        let za = ParamPoint::scalar(0.4);
        let zb = ParamPoint::scalar(0.5);
        let pa = product_type_dist(&f, &za, &ts).unwrap();
        let pb = product_type_dist(&f, &zb, &ts).unwrap();
        let exact = l1_exch(&pa, &pb).unwrap();

        let log_pa = f.log_pmf(&za).unwrap();
        let log_pb = f.log_pmf(&zb).unwrap();
        let log_ratio_free = |lp: &[f64]| {
            let lp = lp.to_vec();
            move |t: &[u32]| -> f64 {
                t.iter().zip(&lp).map(|(&c, &l)| c as f64 * l).sum()
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pmf_b = f.pmf(&zb).unwrap();
        let est = mc::l1_under_p(
            &mut rng,
            n,
            &pmf_b,
            log_ratio_free(&log_pa),
            log_ratio_free(&log_pb),
            40_000,
        );
        assert!(
            (est.value - exact).abs() < 4.0 * est.std_error + 1e-3,
            "exact={exact} est={} se={}",
            est.value,
            est.std_error
        );
    }

    #[test]
    fn mc_estimator_is_seed_deterministic() {
        let f = Family::bernoulli();
        let pmf = f.pmf(&ParamPoint::scalar(0.5)).unwrap();
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            mc::l1_under_p(&mut rng, 16, &pmf, |_| 0.1, |_| 0.0, 100).value
        };
        assert_eq!(run(), run());
    }

    use std::ops::Neg;
}
