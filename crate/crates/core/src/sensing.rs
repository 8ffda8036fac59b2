//! Energy-detection statistics under the Gaussian (large `N_s`) approximation.

use crate::error::{Error, Result};
use crate::scenario::Scenario;
use crate::specfun::q_function;

/// Detector settings for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingConfig {
    /// Decision threshold `ξ` in watts.
    pub xi: f64,
    /// Sensing time `τ` in seconds.
    pub tau: f64,
}

impl SensingConfig {
    /// Samples collected during sensing, `τ f_s`, kept continuous.
    pub fn samples(&self, f_s: f64) -> f64 {
        self.tau * f_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingOutcome {
    pub p_f: f64,
    pub p_d: f64,
    /// `Pr{H₀, Ĥ₀}`.
    pub alpha0: f64,
    /// `Pr{H₁, Ĥ₀}`.
    pub beta0: f64,
    /// `Pr{Ĥ₀}`: probability that the band is sensed idle.
    pub pi0_hat: f64,
}

/// SNR of the primary signal at SU_tx for antenna orientation `phi_t`.
pub fn snr_at_sutx(scenario: &Scenario, phi_t: f64) -> f64 {
    let g = &scenario.geometry;
    scenario.primary.p_p
        * scenario.channel.gamma_stpt
        * scenario.gain(phi_t - g.theta_pt)
        * scenario.loss_stpt()
        / scenario.channel.sigma_n2
}

pub fn prob_false_alarm(xi: f64, tau: f64, f_s: f64, sigma_n2: f64) -> f64 {
    q_function((xi / sigma_n2 - 1.0) * (tau * f_s).sqrt())
}

pub fn prob_detection(xi: f64, tau: f64, f_s: f64, sigma_n2: f64, gamma: f64) -> f64 {
    q_function((xi / sigma_n2 - gamma - 1.0) * (tau * f_s / (2.0 * gamma + 1.0)).sqrt())
}

pub fn joint_idle_probs(pi0: f64, pi1: f64, p_f: f64, p_d: f64) -> SensingOutcome {
    let alpha0 = pi0 * (1.0 - p_f);
    let beta0 = pi1 * (1.0 - p_d);
    SensingOutcome {
        p_f,
        p_d,
        alpha0,
        beta0,
        pi0_hat: alpha0 + beta0,
    }
}

/// Threshold interval `[σ²(1+mγ), σ²(1+γ))` over which the capacity is
/// concave in the sensing time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdWindow {
    pub lo: f64,
    pub hi: f64,
    pub m: f64,
}

impl ThresholdWindow {
    /// `lo + kappa (hi - lo)`.
    pub fn interpolate(&self, kappa: f64) -> f64 {
        self.lo + kappa * (self.hi - self.lo)
    }

    pub fn midpoint(&self) -> f64 {
        self.interpolate(0.5)
    }
}

pub fn threshold_window(sigma_n2: f64, gamma: f64, pi0: f64, pi1: f64) -> Result<ThresholdWindow> {
    if !(gamma > 0.0) {
        return Err(Error::Degenerate(format!(
            "threshold window collapses for SNR {gamma}"
        )));
    }
    let m = pi1 / (pi1 + pi0 * (2.0 * gamma + 1.0).sqrt());
    Ok(ThresholdWindow {
        lo: sigma_n2 * (1.0 + m * gamma),
        hi: sigma_n2 * (1.0 + gamma),
        m,
    })
}

/// How the decision threshold is chosen for a given orientation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdRule {
    /// `ξ = lo + κ (hi - lo)` inside the concavity window of the SNR seen
    /// at the current SU_tx orientation.
    Window { kappa: f64 },
    /// A fixed threshold in watts.
    Fixed(f64),
}

impl Default for ThresholdRule {
    fn default() -> Self {
        ThresholdRule::Window { kappa: 0.5 }
    }
}

impl ThresholdRule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ThresholdRule::Window { kappa } if !(0.0..1.0).contains(&kappa) => {
                Err(Error::invalid("xi_kappa", "must lie in [0, 1)"))
            }
            ThresholdRule::Fixed(xi) if !(xi > 0.0 && xi.is_finite()) => {
                Err(Error::invalid("xi", "must be positive and finite"))
            }
            _ => Ok(()),
        }
    }

    pub fn resolve(&self, scenario: &Scenario, phi_t: f64) -> Result<f64> {
        match *self {
            ThresholdRule::Window { kappa } => {
                let gamma = snr_at_sutx(scenario, phi_t);
                let p = &scenario.primary;
                Ok(threshold_window(scenario.channel.sigma_n2, gamma, p.pi0, p.pi1)?
                    .interpolate(kappa))
            }
            ThresholdRule::Fixed(xi) => Ok(xi),
        }
    }
}

/// Full sensing outcome for orientation `phi_t`.
pub fn sense(scenario: &Scenario, phi_t: f64, config: SensingConfig) -> SensingOutcome {
    let gamma = snr_at_sutx(scenario, phi_t);
    let sigma_n2 = scenario.channel.sigma_n2;
    let f_s = scenario.frame.f_s;
    let p_f = prob_false_alarm(config.xi, config.tau, f_s, sigma_n2);
    let p_d = prob_detection(config.xi, config.tau, f_s, sigma_n2, gamma);
    joint_idle_probs(scenario.primary.pi0, scenario.primary.pi1, p_f, p_d)
}
