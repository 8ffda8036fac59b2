//! Ergodic capacity of the secondary link and its analytic derivatives.
//!
//! The capacity of a frame is
//!
//! ```text
//! C = D E_gss{ π̂₀ log₂(1 + 1/x) + β₀/ln 2 [T(y) - T(y + y/x)] }
//! ```
//!
//! with `x = σ²/(aP)`, `a = g_ss L_ss G`, `y = σ²/σ̄_p²` and `D = (T-τ)/T`.
//! The bracket already averages the interference-limited rate over the
//! exponential PU_tx→SU_rx fading; the outer expectation over `g_ss` is
//! taken with an [`ExpectationRule`]. All per-node formulas are written in
//! terms of `u = 1/x` so that `P = 0` needs no special casing.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::quadrature::ExpectationRule;
use crate::scenario::Scenario;
use crate::sensing::{self, SensingConfig, SensingOutcome};
use crate::specfun::{t_func, t_unchecked};

/// The decision variables at which capacity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    /// Transmit power in watts.
    pub power: f64,
    pub phi_t: f64,
    pub phi_r: f64,
    /// Sensing time in seconds.
    pub tau: f64,
    /// Decision threshold in watts.
    pub xi: f64,
}

impl OperatingPoint {
    pub fn sensing(&self) -> SensingConfig {
        SensingConfig {
            xi: self.xi,
            tau: self.tau,
        }
    }
}

/// Quantities feeding the closed form for one realisation of `g_ss`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityOperands {
    pub a: f64,
    pub x: f64,
    pub y: f64,
    pub sigma_p_bar2: f64,
    pub d_frac: f64,
}

/// `(c00, c10)`: rates when the band is truly idle and truly busy, both
/// sensed idle, for a given interference power.
pub fn instantaneous_caps(a: f64, power: f64, sigma_n2: f64, interference: f64) -> (f64, f64) {
    let signal = a * power;
    (
        (signal / sigma_n2).ln_1p() / LN_2,
        (signal / (sigma_n2 + interference)).ln_1p() / LN_2,
    )
}

/// `E_gps[c10] = log₂(1 + 1/x) + [T(y) - T(y + y/x)]/ln 2`.
pub fn expected_c10_over_interference(x: f64, y: f64) -> Result<f64> {
    for (value, requirement) in [(x, "x > 0"), (y, "y > 0")] {
        if !(value > 0.0) {
            return Err(Error::Domain {
                function: "expected_c10_over_interference",
                value,
                requirement,
            });
        }
    }
    let u = 1.0 / x;
    Ok(u.ln_1p() / LN_2 + (t_func(y)? - t_func(y + y * u)?) / LN_2)
}

/// Capacity evaluator bound to one scenario and one expectation rule.
#[derive(Debug, Clone, Copy)]
pub struct CapacityModel<'a> {
    scenario: &'a Scenario,
    rule: &'a ExpectationRule,
}

/// Per-point constants shared by the capacity and its derivatives.
struct Prepared {
    outcome: SensingOutcome,
    d_frac: f64,
    /// `u = k g_ss`.
    k: f64,
    /// `σ²/σ̄_p²`; infinite without interference.
    y: f64,
    t_y: f64,
}

impl<'a> CapacityModel<'a> {
    pub fn new(scenario: &'a Scenario, rule: &'a ExpectationRule) -> Self {
        CapacityModel { scenario, rule }
    }

    pub fn with_standard_rule(scenario: &'a Scenario) -> Self {
        Self::new(scenario, ExpectationRule::standard())
    }

    pub fn scenario(&self) -> &'a Scenario {
        self.scenario
    }

    pub fn rule(&self) -> &'a ExpectationRule {
        self.rule
    }

    fn prepare(&self, p: &OperatingPoint) -> Result<Prepared> {
        let s = self.scenario;
        let t = s.frame.t_frame;
        if !(p.tau > 0.0 && p.tau < t) {
            return Err(Error::Domain {
                function: "capacity",
                value: p.tau,
                requirement: "0 < tau < T",
            });
        }
        if !(p.power >= 0.0 && p.power.is_finite()) {
            return Err(Error::Domain {
                function: "capacity",
                value: p.power,
                requirement: "finite power >= 0",
            });
        }
        if !(p.xi > 0.0) {
            return Err(Error::Domain {
                function: "capacity",
                value: p.xi,
                requirement: "xi > 0",
            });
        }
        let outcome = sensing::sense(s, p.phi_t, p.sensing());
        let sigma_n2 = s.channel.sigma_n2;
        let k = s.loss_ss() * s.link_gain(p.phi_t, p.phi_r) * p.power / sigma_n2;
        let interference = s.mean_interference(p.phi_r);
        let y = if interference > 0.0 {
            sigma_n2 / interference
        } else {
            f64::INFINITY
        };
        Ok(Prepared {
            outcome,
            d_frac: (t - p.tau) / t,
            k,
            y,
            t_y: t_func(y)?,
        })
    }

    /// Operands of the closed form for a single `g_ss` realisation.
    pub fn operands(&self, p: &OperatingPoint, g_ss: f64) -> Result<CapacityOperands> {
        let s = self.scenario;
        let pre = self.prepare(p)?;
        let a = g_ss * s.loss_ss() * s.link_gain(p.phi_t, p.phi_r);
        Ok(CapacityOperands {
            a,
            x: s.channel.sigma_n2 / (a * p.power),
            y: pre.y,
            sigma_p_bar2: s.mean_interference(p.phi_r),
            d_frac: pre.d_frac,
        })
    }

    pub fn sensing_outcome(&self, p: &OperatingPoint) -> SensingOutcome {
        sensing::sense(self.scenario, p.phi_t, p.sensing())
    }

    /// Ergodic capacity in bits/s/Hz.
    pub fn capacity(&self, p: &OperatingPoint) -> Result<f64> {
        let pre = self.prepare(p)?;
        let (pi0_hat, beta0) = (pre.outcome.pi0_hat, pre.outcome.beta0);
        let mean = self.scenario.channel.gamma_ss;
        let inner = self.rule.expectation(mean, |g| {
            let u = pre.k * g;
            let mut v = pi0_hat * u.ln_1p();
            if pre.y.is_finite() {
                v += beta0 * (pre.t_y - t_unchecked(pre.y * (1.0 + u)));
            }
            v
        });
        Ok(pre.d_frac * inner / LN_2)
    }

    /// `∂C/∂τ` at fixed power, orientations and threshold.
    pub fn d_capacity_d_tau(&self, p: &OperatingPoint) -> Result<f64> {
        let pre = self.prepare(p)?;
        let s = self.scenario;
        let mean = s.channel.gamma_ss;
        let (mut c00, mut c10) = (0.0, 0.0);
        for (node, w) in self.rule.iter() {
            let u = pre.k * mean * node;
            let idle = u.ln_1p();
            let busy = if pre.y.is_finite() {
                idle + pre.t_y - t_unchecked(pre.y * (1.0 + u))
            } else {
                idle
            };
            c00 += w * idle;
            c10 += w * busy;
        }
        c00 /= LN_2;
        c10 /= LN_2;

        let (pi0, pi1) = (s.primary.pi0, s.primary.pi1);
        let capacity = pre.d_frac * (pre.outcome.alpha0 * c00 + pre.outcome.beta0 * c10);
        let sigma_n2 = s.channel.sigma_n2;
        let f_s = s.frame.f_s;
        let gamma = sensing::snr_at_sutx(s, p.phi_t);
        let big_x = (p.xi / sigma_n2 - 1.0) * f_s.sqrt();
        let big_y = (p.xi / sigma_n2 - gamma - 1.0) * (f_s / (2.0 * gamma + 1.0)).sqrt();
        let tau = p.tau;
        let sensing_gain = big_x * pi0 * c00 * (-0.5 * tau * big_x * big_x).exp()
            + big_y * pi1 * c10 * (-0.5 * tau * big_y * big_y).exp();
        Ok(-capacity / (s.frame.t_frame - tau) + pre.d_frac / (8.0 * PI * tau).sqrt() * sensing_gain)
    }

    /// `∂C/∂φ_r`.
    ///
    /// Per `g_ss` realisation the derivative is
    /// `D/ln 2 · [ (A'/A)(φ_r-π-θ) g₀ - (A'/A)(φ_r-θ'_pt) k₀ ]` with
    ///
    /// ```text
    /// g₀ = α₀/(1+x) - β₀ (y/x) T(y + y/x)
    /// k₀ = β₀ [ y T(y) - y (1 + 1/x) T(y + y/x) ]
    /// ```
    ///
    /// obtained from `d/dz T(z) = T(z) + 1/z`.
    pub fn d_capacity_d_phir(&self, p: &OperatingPoint) -> Result<f64> {
        let pre = self.prepare(p)?;
        let s = self.scenario;
        let g = &s.geometry;
        let link_offset = p.phi_r - PI - g.theta;
        let interferer_offset = p.phi_r - g.theta_pt_prime;
        let link_ratio = s.antenna.slope(link_offset) / s.gain(link_offset);
        let interferer_ratio = s.antenna.slope(interferer_offset) / s.gain(interferer_offset);
        let (alpha0, beta0) = (pre.outcome.alpha0, pre.outcome.beta0);
        let y = pre.y;
        let mean = s.channel.gamma_ss;
        let inner = self.rule.expectation(mean, |gss| {
            let u = pre.k * gss;
            let share = u / (1.0 + u);
            let (g0, k0) = if y.is_finite() {
                let t_shift = t_unchecked(y * (1.0 + u));
                (
                    alpha0 * share - beta0 * y * u * t_shift,
                    beta0 * (y * pre.t_y - y * (1.0 + u) * t_shift),
                )
            } else {
                // y T(y) -> -1 as y -> inf
                ((alpha0 + beta0) * share, 0.0)
            };
            link_ratio * g0 - interferer_ratio * k0
        });
        Ok(pre.d_frac * inner / LN_2)
    }
}

/// Capacity with the shared default quadrature rule.
pub fn ergodic_capacity(scenario: &Scenario, point: &OperatingPoint) -> Result<f64> {
    CapacityModel::with_standard_rule(scenario).capacity(point)
}

pub fn d_capacity_d_tau(scenario: &Scenario, point: &OperatingPoint) -> Result<f64> {
    CapacityModel::with_standard_rule(scenario).d_capacity_d_tau(point)
}

pub fn d_capacity_d_phir(scenario: &Scenario, point: &OperatingPoint) -> Result<f64> {
    CapacityModel::with_standard_rule(scenario).d_capacity_d_phir(point)
}
