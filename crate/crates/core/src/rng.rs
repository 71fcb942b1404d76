//! Counter-based deterministic random numbers.
//!
//! Simulation code in this crate never draws from a shared sequential
//! generator. Every variate is produced from a pure function of
//! `(seed, index)`, so a simulation can be evaluated in any order — serial,
//! parallel, or resumed — and still produce bit-identical results.
//!
//! The construction is the splitmix64 finalizer applied to a seed/index
//! mixture: each `(seed, index)` pair keys an independent stream of 64-bit
//! words, and the samplers below consume words from that stream.

/// A deterministic word stream keyed by `(seed, index)`.
///
/// Equivalent to splitmix64 with an initial state derived from hashing the
/// seed and index together; successive [`next_u64`](Self::next_u64) calls
/// walk the stream.
#[derive(Clone, Debug)]
pub struct CounterStream {
    state: u64,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl CounterStream {
    pub fn new(seed: u64, index: u64) -> Self {
        // Two finalizer rounds decorrelate (seed, index) pairs that differ
        // in only a few bits, which is the common case (index = 0, 1, 2, …).
        let mixed = splitmix64(seed ^ GOLDEN.wrapping_mul(index).wrapping_add(index >> 3));
        CounterStream {
            state: splitmix64(mixed ^ index.wrapping_mul(0xd605_bbb5_8c8a_bc2d)),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        splitmix64(self.state)
    }

    /// Uniform in the open interval (0, 1); never returns 0 or 1, so it is
    /// safe to feed through logs and inverse CDFs.
    pub fn next_uniform(&mut self) -> f64 {
        // 53 random bits, then shift into (0,1) by centering on the bin.
        let bits = self.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal variate via the inverse CDF (one uniform per variate,
    /// fully deterministic — no rejection loop).
    pub fn next_normal(&mut self) -> f64 {
        crate::normal::inverse_cdf(self.next_uniform())
    }
}

/// Poisson variate with the given mean, drawn from the `(seed, index)`
/// stream. Deterministic: the same triple always yields the same count.
///
/// Small means use Knuth's product method; larger means use the PTRS
/// transformed-rejection sampler (Hörmann), which needs a handful of
/// uniforms and no table state.
pub fn poisson(mean: f64, seed: u64, index: u64) -> u64 {
    assert!(
        mean.is_finite() && mean >= 0.0,
        "poisson mean must be finite and non-negative"
    );
    let mut stream = CounterStream::new(seed, index);
    if mean < 10.0 {
        poisson_knuth(mean, &mut stream)
    } else {
        poisson_ptrs(mean, &mut stream)
    }
}

fn poisson_knuth(mean: f64, stream: &mut CounterStream) -> u64 {
    let limit = (-mean).exp();
    let mut product = 1.0;
    let mut count = 0u64;
    loop {
        product *= stream.next_uniform();
        if product <= limit {
            return count;
        }
        count += 1;
    }
}

/// Hörmann's PTRS sampler: transformed rejection with squeeze, valid for
/// mean >= 10.
fn poisson_ptrs(mean: f64, stream: &mut CounterStream) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let v_r = 0.9277 - 3.6224 / (b - 2.0);

    loop {
        let u = stream.next_uniform() - 0.5;
        let v = stream.next_uniform();
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= v_r {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_factorial(k as u64);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// ln(k!) via Stirling's series for large k, exact products below.
fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    if k < 20 {
        let mut acc = 0.0;
        for i in 2..=k {
            acc += (i as f64).ln();
        }
        return acc;
    }
    let x = (k + 1) as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x - 0.5) * x.ln() - x
        + 0.918_938_533_204_672_74 // ln(2*pi)/2
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_index_sensitive() {
        let a: Vec<u64> = (0..4u64).map(|i| CounterStream::new(7, i).next_u64()).collect();
        let b: Vec<u64> = (0..4u64).map(|i| CounterStream::new(7, i).next_u64()).collect();
        assert_eq!(a, b);
        assert_ne!(b[0], b[1]);
        assert_ne!(CounterStream::new(7, 0).next_u64(), CounterStream::new(8, 0).next_u64());
    }

    #[test]
    fn ln_factorial_matches_direct_sum() {
        let direct: f64 = (2..=80u64).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(80) - direct).abs() < 1e-9);
    }

    #[test]
    fn poisson_is_deterministic() {
        assert_eq!(poisson(350.0, 42, 9), poisson(350.0, 42, 9));
        assert_eq!(poisson(3.0, 42, 9), poisson(3.0, 42, 9));
    }

    #[test]
    fn poisson_moments_match_both_samplers() {
        // Knuth branch (mean 4) and PTRS branch (mean 300).
        for (mean, tol_mean, tol_var) in [(4.0, 0.05, 0.2), (300.0, 1.0, 15.0)] {
            let n = 20_000u64;
            let draws: Vec<f64> = (0..n).map(|i| poisson(mean, 11, i) as f64).collect();
            let m = draws.iter().sum::<f64>() / n as f64;
            let v = draws.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
            assert!((m - mean).abs() < tol_mean, "mean {m} vs {mean}");
            assert!((v - mean).abs() < tol_var, "var {v} vs {mean}");
        }
    }

    #[test]
    fn uniforms_stay_in_open_interval() {
        let mut s = CounterStream::new(1, 1);
        for _ in 0..10_000 {
            let u = s.next_uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}
