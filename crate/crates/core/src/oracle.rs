//! Seeded Monte Carlo estimators used to cross-check the closed forms.
//!
//! Samples are drawn in fixed-size batches; batch `b` always reads
//! substream `b` of a ChaCha8 generator keyed by the seed, and batch
//! statistics are merged in batch order. The estimate therefore depends
//! only on `(seed, n)`, whatever order batches are computed in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::capacity::{instantaneous_caps, OperatingPoint};
use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::sensing::{self, SensingOutcome};

/// Samples per substream batch.
pub const BATCH: usize = 1 << 14;
/// Smallest sample count accepted by the estimators.
pub const MIN_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub std_error: f64,
    pub n_samples: usize,
}

impl McEstimate {
    /// `|mean - reference| / std_error`; zero when both coincide exactly.
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }
}

/// Uniform and exponential variates from one substream.
pub struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    pub fn new(seed: RngSeed, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.0);
        rng.set_stream(stream);
        Draws { rng }
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Exponential with the given mean, by inverting the CDF.
    pub fn exponential(&mut self, mean: f64) -> f64 {
        -mean * (1.0 - self.uniform()).ln()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        self.mean += delta * other.n as f64 / n as f64;
        self.m2 += other.m2 + delta * delta * self.n as f64 * other.n as f64 / n as f64;
        self.n = n;
    }

    fn estimate(&self) -> McEstimate {
        let variance = if self.n > 1 {
            (self.m2 / (self.n - 1) as f64).max(0.0)
        } else {
            0.0
        };
        McEstimate {
            mean: self.mean,
            std_error: (variance / self.n as f64).sqrt(),
            n_samples: self.n,
        }
    }
}

/// Mean of `n` evaluations of `sample`, each fed from the batch substream.
pub fn estimate(n: usize, seed: RngSeed, mut sample: impl FnMut(&mut Draws) -> f64) -> Result<McEstimate> {
    if n < MIN_SAMPLES {
        return Err(Error::invalid(
            "mc_samples",
            format!("at least {MIN_SAMPLES} samples are required, got {n}"),
        ));
    }
    let mut total = Moments::default();
    for (batch, start) in (0..n).step_by(BATCH).enumerate() {
        let mut draws = Draws::new(seed, batch as u64);
        let mut m = Moments::default();
        for _ in start..(start + BATCH).min(n) {
            m.push(sample(&mut draws));
        }
        total.merge(&m);
    }
    Ok(total.estimate())
}

/// Monte Carlo estimate of the ergodic capacity from the instantaneous rates.
///
/// `g_ss` and `g_ps` are sampled; the sensing outcome enters through its
/// exact probabilities `α₀`, `β₀`.
pub fn mc_capacity(scenario: &Scenario, point: &OperatingPoint, n: usize, seed: RngSeed) -> Result<McEstimate> {
    let s = scenario;
    let t = s.frame.t_frame;
    if !(point.tau > 0.0 && point.tau < t) {
        return Err(Error::Domain {
            function: "mc_capacity",
            value: point.tau,
            requirement: "0 < tau < T",
        });
    }
    let o = sensing::sense(s, point.phi_t, point.sensing());
    let d_frac = (t - point.tau) / t;
    let link = s.loss_ss() * s.link_gain(point.phi_t, point.phi_r);
    let interference_scale = s.primary.p_p
        * s.loss_ps()
        * s.gain(point.phi_r - s.geometry.theta_pt_prime);
    let (gamma_ss, gamma_ps) = (s.channel.gamma_ss, s.channel.gamma_ps);
    let sigma_n2 = s.channel.sigma_n2;
    estimate(n, seed, |d| {
        let g_ss = d.exponential(gamma_ss);
        let g_ps = d.exponential(gamma_ps);
        let (c00, c10) = instantaneous_caps(g_ss * link, point.power, sigma_n2, interference_scale * g_ps);
        d_frac * (o.alpha0 * c00 + o.beta0 * c10)
    })
}

/// The interference `D β₀ P L_sp A(φ_t - θ_pr)` per unit `g_sp`.
fn interference_per_gain(scenario: &Scenario, power: f64, phi_t: f64, outcome: &SensingOutcome, tau: f64) -> f64 {
    let t = scenario.frame.t_frame;
    (t - tau) / t
        * outcome.beta0
        * power
        * scenario.loss_sp()
        * scenario.gain(phi_t - scenario.geometry.theta_pr)
}

/// Monte Carlo estimate of `Pr{D β₀ P g_sp L_sp A(φ_t - θ_pr) > I_pk}`.
pub fn mc_outage(
    scenario: &Scenario,
    power: f64,
    phi_t: f64,
    outcome: &SensingOutcome,
    tau: f64,
    n: usize,
    seed: RngSeed,
) -> Result<McEstimate> {
    let scale = interference_per_gain(scenario, power, phi_t, outcome, tau);
    let i_pk = scenario.limits.i_pk;
    let gamma_sp = scenario.channel.gamma_sp;
    estimate(n, seed, |d| {
        if scale * d.exponential(gamma_sp) > i_pk {
            1.0
        } else {
            0.0
        }
    })
}

/// `exp(-I_pk / (γ_sp D β₀ L_sp A P))`, the exact outage probability.
pub fn outage_closed_form(
    scenario: &Scenario,
    power: f64,
    phi_t: f64,
    outcome: &SensingOutcome,
    tau: f64,
) -> f64 {
    let scale = interference_per_gain(scenario, power, phi_t, outcome, tau) * scenario.channel.gamma_sp;
    if scale > 0.0 {
        (-scenario.limits.i_pk / scale).exp()
    } else {
        0.0
    }
}

/// Central difference `(f(at + step) - f(at - step)) / (2 step)`.
pub fn finite_difference(mut f: impl FnMut(f64) -> Result<f64>, at: f64, step: f64) -> Result<f64> {
    if !(step > 0.0) {
        return Err(Error::invalid("finite difference step", "must be positive"));
    }
    Ok((f(at + step)? - f(at - step)?) / (2.0 * step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_cases() {
        let d = finite_difference(|x| Ok(x * x), 3.0, 1e-5).unwrap();
        assert!((d - 6.0).abs() < 1e-9);
        assert_eq!(finite_difference(|_| Ok(4.2), 1.0, 1e-3).unwrap(), 0.0);
        assert!(finite_difference(Ok, 1.0, 0.0).is_err());
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = Moments::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut merged = Moments::default();
        for chunk in xs.chunks(333) {
            let mut m = Moments::default();
            chunk.iter().for_each(|&x| m.push(x));
            merged.merge(&m);
        }
        assert!((whole.mean - merged.mean).abs() < 1e-12);
        assert!((whole.m2 - merged.m2).abs() < 1e-9 * whole.m2);
    }

    #[test]
    fn rejects_small_sample_counts() {
        assert!(estimate(999, RngSeed(1), |_| 0.0).is_err());
        assert!(estimate(1000, RngSeed(1), |_| 0.0).is_ok());
    }

    #[test]
    fn substreams_differ() {
        let a = Draws::new(RngSeed(9), 0).uniform();
        let b = Draws::new(RngSeed(9), 1).uniform();
        let c = Draws::new(RngSeed(9), 0).uniform();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn constant_samples_have_zero_error() {
        let e = estimate(5000, RngSeed(3), |_| 2.5).unwrap();
        assert_eq!(e.mean, 2.5);
        assert_eq!(e.std_error, 0.0);
        assert_eq!(e.n_samples, 5000);
    }
}
