//! Power allocation, receive-orientation solve and the outer search over
//! transmit orientation and sensing time.
//!
//! For a candidate `(φ_t, τ)` the threshold follows from the configured
//! [`ThresholdRule`], the power from the closed-form allocation and `φ_r`
//! from a bracketed solve of `∂C/∂φ_r = 0`. The outer search scans a grid
//! over `(φ_t, τ)` and then refines the best cell by coordinate-wise
//! golden-section search.

use serde::Serialize;

use crate::capacity::{CapacityModel, OperatingPoint};
use crate::error::{Error, Result};
use crate::quadrature::{ExpectationRule, RuleKind};
use crate::scenario::{Limits, Scenario};
use crate::search::{brent_root, golden_max};
use crate::sensing::{self, SensingConfig, SensingOutcome, ThresholdRule};

/// Gain of the omni-directional baseline antennas (0 dBi).
pub const OMNI_GAIN: f64 = 1.0;

/// Which limit sets the transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Binding {
    PeakPower,
    InterferenceOutage,
}

impl Binding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Binding::PeakPower => "peak-power",
            Binding::InterferenceOutage => "interference-outage",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerChoice {
    pub power: f64,
    pub binding: Binding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Grid points over `φ_t ∈ [θ - φ_3dB, θ + φ_3dB]`.
    pub grid_phi_t: usize,
    /// Grid points over the admissible sensing times.
    pub grid_tau: usize,
    /// Refinement tolerance, relative to the width of each search range.
    pub tol: f64,
    /// Maximum number of coordinate refinement sweeps.
    pub max_iter: usize,
    pub threshold: ThresholdRule,
    /// Pre-scan points for the `φ_r` root bracket.
    pub phi_r_scan: usize,
    pub quadrature: RuleKind,
    /// Minimum number of sensing samples, `τ f_s`.
    pub min_samples: f64,
    /// Upper end of the sensing-time range as a fraction of the frame.
    pub max_tau_fraction: f64,
    /// Hold the sensing time at this value instead of searching over it.
    pub fixed_tau: Option<f64>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            grid_phi_t: 33,
            grid_tau: 33,
            tol: 1e-6,
            max_iter: 50,
            threshold: ThresholdRule::default(),
            phi_r_scan: 65,
            quadrature: RuleKind::default(),
            min_samples: 30.0,
            max_tau_fraction: 0.999,
            fixed_tau: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_phi_t < 2 || self.grid_tau < 2 {
            return Err(Error::invalid("grid", "needs at least 2 points per axis"));
        }
        if !(self.tol > 0.0 && self.tol < 0.1) {
            return Err(Error::invalid("tol", "must lie in (0, 0.1)"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter", "must be at least 1"));
        }
        if self.phi_r_scan < 2 {
            return Err(Error::invalid("phi_r_scan", "needs at least 2 points"));
        }
        if !(self.min_samples >= 0.0 && self.min_samples.is_finite()) {
            return Err(Error::invalid("min_samples", "must be non-negative"));
        }
        if !(self.max_tau_fraction > 0.0 && self.max_tau_fraction < 1.0) {
            return Err(Error::invalid("max_tau_fraction", "must lie in (0, 1)"));
        }
        self.threshold.validate()
    }

    /// Admissible sensing times for a scenario.
    pub fn tau_range(&self, scenario: &Scenario) -> Result<(f64, f64)> {
        if let Some(tau) = self.fixed_tau {
            if !(tau > 0.0 && tau < scenario.frame.t_frame) {
                return Err(Error::invalid("tau", format!("{tau} is outside (0, T)")));
            }
            return Ok((tau, tau));
        }
        let lo = self.min_samples / scenario.frame.f_s;
        let hi = self.max_tau_fraction * scenario.frame.t_frame;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::invalid(
                "sensing time range",
                format!("[{lo}, {hi}] is empty; the frame is too short for the sample floor"),
            ));
        }
        Ok((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub tau_opt: f64,
    pub phi_t_opt: f64,
    pub phi_r_opt: f64,
    pub p_opt: f64,
    pub c_opt: f64,
    pub xi: f64,
    pub binding: Binding,
    /// Coordinate refinement sweeps performed.
    pub iterations: usize,
    pub converged: bool,
    /// Capacity evaluations at candidate `(φ_t, τ)` pairs.
    pub evaluations: usize,
}

/// Everything derived at one candidate `(φ_t, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub point: OperatingPoint,
    pub sensing: SensingOutcome,
    pub binding: Binding,
    pub capacity: f64,
}

/// `b̄₀ = β₀ γ_sp L_sp A(φ_t - θ_pr)`.
pub fn b_bar0(scenario: &Scenario, outcome: &SensingOutcome, phi_t: f64) -> f64 {
    outcome.beta0
        * scenario.channel.gamma_sp
        * scenario.loss_sp()
        * scenario.gain(phi_t - scenario.geometry.theta_pr)
}

/// `P = min{P_pk/(D π̂₀), -I_pk/(D b̄₀ ln ε)}`.
pub fn optimal_power(
    outcome: &SensingOutcome,
    b_bar0: f64,
    d_frac: f64,
    limits: &Limits,
) -> Result<PowerChoice> {
    if !(outcome.pi0_hat > 0.0) {
        return Err(Error::Degenerate(
            "the band is never sensed idle, so the secondary user never transmits".into(),
        ));
    }
    if !(d_frac > 0.0 && d_frac < 1.0) {
        return Err(Error::Domain {
            function: "optimal_power",
            value: d_frac,
            requirement: "0 < D < 1",
        });
    }
    let peak = limits.p_pk / (d_frac * outcome.pi0_hat);
    let interference = if b_bar0 > 0.0 {
        -limits.i_pk / (d_frac * b_bar0 * limits.epsilon.ln())
    } else {
        f64::INFINITY
    };
    Ok(if peak <= interference {
        PowerChoice {
            power: peak,
            binding: Binding::PeakPower,
        }
    } else {
        PowerChoice {
            power: interference,
            binding: Binding::InterferenceOutage,
        }
    })
}

/// Maximizer of the capacity over `φ_r ∈ [π+θ-φ_3dB, π+θ+φ_3dB]`.
///
/// Sign changes of `∂C/∂φ_r` from positive to negative in a uniform
/// pre-scan are refined with Brent's method. The roots, both endpoints and
/// the boresight orientation are compared by capacity; equal capacities go
/// to the orientation closest to boresight.
pub fn solve_phi_r(model: &CapacityModel<'_>, point: &OperatingPoint, scan: usize) -> Result<f64> {
    let s = model.scenario();
    let centre = s.phi_r_boresight();
    let Some(width) = s.antenna.half_power_width() else {
        return Ok(centre);
    };
    let (lo, hi) = (centre - width, centre + width);
    let at = |phi_r: f64| OperatingPoint { phi_r, ..*point };
    let derivative = |phi_r: f64| model.d_capacity_d_phir(&at(phi_r));

    let mut candidates = vec![lo, hi, centre];
    let scan = scan.max(2);
    let step = (hi - lo) / (scan - 1) as f64;
    let mut prev_x = lo;
    let mut prev_d = derivative(lo)?;
    for i in 1..scan {
        let x = if i == scan - 1 { hi } else { lo + i as f64 * step };
        let d = derivative(x)?;
        if d == 0.0 {
            candidates.push(x);
        } else if prev_d > 0.0 && d < 0.0 {
            candidates.push(brent_root(derivative, prev_x, x, 1e-13, 200)?);
        }
        prev_x = x;
        prev_d = d;
    }

    let mut best = (f64::NEG_INFINITY, f64::INFINITY, centre);
    for phi_r in candidates {
        let c = model.capacity(&at(phi_r))?;
        let offset = (phi_r - centre).abs();
        if c > best.0 || (c == best.0 && offset < best.1) {
            best = (c, offset, phi_r);
        }
    }
    Ok(best.2)
}

/// How the receive orientation is chosen during a search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Steering {
    Solve,
    Boresight,
}

struct Problem<'a> {
    scenario: &'a Scenario,
    config: &'a SearchConfig,
    rule: ExpectationRule,
    phi_t_range: (f64, f64),
    tau_range: (f64, f64),
    steering: Steering,
}

impl<'a> Problem<'a> {
    fn new(scenario: &'a Scenario, config: &'a SearchConfig, free_phi_t: bool, steering: Steering) -> Result<Self> {
        scenario.validate()?;
        config.validate()?;
        let theta = scenario.geometry.theta;
        let phi_t_range = match scenario.antenna.half_power_width() {
            Some(w) if free_phi_t => (theta - w, theta + w),
            _ => (theta, theta),
        };
        Ok(Problem {
            scenario,
            config,
            rule: ExpectationRule::new(config.quadrature)?,
            phi_t_range,
            tau_range: config.tau_range(scenario)?,
            steering,
        })
    }

    fn model(&self) -> CapacityModel<'_> {
        CapacityModel::new(self.scenario, &self.rule)
    }

    fn evaluate(&self, phi_t: f64, tau: f64) -> Result<Candidate> {
        evaluate_with(&self.model(), self.config, phi_t, tau, self.steering)
    }

    fn grid(range: (f64, f64), n: usize) -> Vec<f64> {
        if range.0 == range.1 {
            return vec![range.0];
        }
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    range.1
                } else {
                    range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    fn solve(&self, seeds: &[(f64, f64)]) -> Result<OptimizationResult> {
        let phi_grid = Self::grid(self.phi_t_range, self.config.grid_phi_t);
        let tau_grid = Self::grid(self.tau_range, self.config.grid_tau);
        let mut evaluations = 0;
        let mut best: Option<Candidate> = None;
        let offer = |c: Candidate, best: &mut Option<Candidate>| {
            if best.is_none_or(|b| c.capacity > b.capacity) {
                *best = Some(c);
            }
        };
        for &phi_t in &phi_grid {
            for &tau in &tau_grid {
                evaluations += 1;
                offer(self.evaluate(phi_t, tau)?, &mut best);
            }
        }
        for &(phi_t, tau) in seeds {
            evaluations += 1;
            offer(self.evaluate(phi_t, tau)?, &mut best);
        }
        let mut best = best.expect("grid is never empty");

        // Coordinate refinement within one grid cell of the incumbent.
        let cell = |range: (f64, f64), n: usize| (range.1 - range.0) / (n.max(2) - 1) as f64;
        let tau_cell = cell(self.tau_range, tau_grid.len());
        let phi_cell = cell(self.phi_t_range, phi_grid.len());
        let tau_tol = self.config.tol * (self.tau_range.1 - self.tau_range.0);
        let phi_tol = self.config.tol * (self.phi_t_range.1 - self.phi_t_range.0);
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.config.max_iter {
            iterations += 1;
            let start = best.point;

            let tau_window = (
                (best.point.tau - tau_cell).max(self.tau_range.0),
                (best.point.tau + tau_cell).min(self.tau_range.1),
            );
            if tau_cell > 0.0 {
                let phi_t = best.point.phi_t;
                let m = golden_max(
                    |tau| Ok(self.evaluate(phi_t, tau)?.capacity),
                    tau_window.0,
                    tau_window.1,
                    tau_tol,
                    200,
                )?;
                evaluations += m.evaluations;
                if m.value > best.capacity {
                    best = self.evaluate(phi_t, m.x)?;
                }
            }

            if phi_cell > 0.0 {
                let phi_window = (
                    (best.point.phi_t - phi_cell).max(self.phi_t_range.0),
                    (best.point.phi_t + phi_cell).min(self.phi_t_range.1),
                );
                let tau = best.point.tau;
                let m = golden_max(
                    |phi_t| Ok(self.evaluate(phi_t, tau)?.capacity),
                    phi_window.0,
                    phi_window.1,
                    phi_tol,
                    200,
                )?;
                evaluations += m.evaluations;
                if m.value > best.capacity {
                    best = self.evaluate(m.x, tau)?;
                }
            }

            if (best.point.tau - start.tau).abs() <= tau_tol
                && (best.point.phi_t - start.phi_t).abs() <= phi_tol
            {
                converged = true;
                break;
            }
        }

        Ok(OptimizationResult {
            tau_opt: best.point.tau,
            phi_t_opt: best.point.phi_t,
            phi_r_opt: best.point.phi_r,
            p_opt: best.point.power,
            c_opt: best.capacity,
            xi: best.point.xi,
            binding: best.binding,
            iterations,
            converged,
            evaluations,
        })
    }
}

fn evaluate_with(
    model: &CapacityModel<'_>,
    config: &SearchConfig,
    phi_t: f64,
    tau: f64,
    steering: Steering,
) -> Result<Candidate> {
    let s = model.scenario();
    let xi = config.threshold.resolve(s, phi_t)?;
    let outcome = sensing::sense(s, phi_t, SensingConfig { xi, tau });
    let d_frac = (s.frame.t_frame - tau) / s.frame.t_frame;
    let choice = optimal_power(&outcome, b_bar0(s, &outcome, phi_t), d_frac, &s.limits)?;
    let mut point = OperatingPoint {
        power: choice.power,
        phi_t,
        phi_r: s.phi_r_boresight(),
        tau,
        xi,
    };
    if steering == Steering::Solve {
        point.phi_r = solve_phi_r(model, &point, config.phi_r_scan)?;
    }
    Ok(Candidate {
        point,
        sensing: outcome,
        binding: choice.binding,
        capacity: model.capacity(&point)?,
    })
}

/// Threshold, power and receive orientation for a fixed `(φ_t, τ)`, with
/// the capacity they achieve.
pub fn evaluate_candidate(
    scenario: &Scenario,
    config: &SearchConfig,
    phi_t: f64,
    tau: f64,
) -> Result<Candidate> {
    let rule = ExpectationRule::new(config.quadrature)?;
    evaluate_with(&CapacityModel::new(scenario, &rule), config, phi_t, tau, Steering::Solve)
}

/// Like [`evaluate_candidate`] with `φ_r` held fixed; only the threshold
/// and the power are recomputed.
pub fn evaluate_fixed(
    scenario: &Scenario,
    config: &SearchConfig,
    phi_t: f64,
    phi_r: f64,
    tau: f64,
) -> Result<Candidate> {
    let rule = ExpectationRule::new(config.quadrature)?;
    let model = CapacityModel::new(scenario, &rule);
    let mut c = evaluate_with(&model, config, phi_t, tau, Steering::Boresight)?;
    c.point.phi_r = phi_r;
    c.capacity = model.capacity(&c.point)?;
    Ok(c)
}

/// Joint optimization of `(τ, φ_t, φ_r, P)` with directional antennas.
///
/// The line-of-sight optimum is offered to the search as an extra
/// candidate, so the result never falls below [`optimize_los`].
pub fn optimize(scenario: &Scenario, config: &SearchConfig) -> Result<OptimizationResult> {
    let los = optimize_los(scenario, config)?;
    let problem = Problem::new(scenario, config, true, Steering::Solve)?;
    let mut result = problem.solve(&[(los.phi_t_opt, los.tau_opt)])?;
    result.converged &= los.converged;
    Ok(result)
}

/// Both antennas pointed at each other; only `τ` and `P` are optimized.
pub fn optimize_los(scenario: &Scenario, config: &SearchConfig) -> Result<OptimizationResult> {
    Problem::new(scenario, config, false, Steering::Boresight)?.solve(&[])
}

/// Both secondary antennas replaced by isotropic ones of gain [`OMNI_GAIN`].
pub fn optimize_omni(scenario: &Scenario, config: &SearchConfig) -> Result<OptimizationResult> {
    let omni = scenario.with_isotropic_antennas(OMNI_GAIN);
    Problem::new(&omni, config, false, Steering::Boresight)?.solve(&[])
}

/// `Γ_D2O = C_opt^Dir / C_opt^Omn`.
pub fn capacity_ratio_d2o(scenario: &Scenario, config: &SearchConfig) -> Result<f64> {
    let dir = optimize(scenario, config)?;
    let omni = optimize_omni(scenario, config)?;
    ratio(dir.c_opt, omni.c_opt)
}

pub(crate) fn ratio(dir: f64, omni: f64) -> Result<f64> {
    if omni > 0.0 {
        Ok(dir / omni)
    } else {
        Err(Error::Degenerate(
            "omni-directional capacity is zero; the ratio is undefined".into(),
        ))
    }
}

/// `|φ - centre| ≤ half-width` with a little slack for round-off.
pub fn within_lobe(phi: f64, centre: f64, half_width: f64) -> bool {
    (phi - centre).abs() <= half_width * (1.0 + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::db_to_linear;

    fn outcome(beta0: f64, pi0_hat: f64) -> SensingOutcome {
        SensingOutcome {
            p_f: 0.0,
            p_d: 0.0,
            alpha0: pi0_hat - beta0,
            beta0,
            pi0_hat,
        }
    }

    #[test]
    fn b_bar0_cases() {
        let s = Scenario::default();
        let tpr = s.geometry.theta_pr;
        assert_eq!(b_bar0(&s, &outcome(0.0, 0.6), tpr), 0.0);
        assert!((b_bar0(&s, &outcome(0.03, 0.6), tpr) - 0.3).abs() < 1e-15);
        assert!((b_bar0(&s, &outcome(0.03, 0.6), tpr + 30f64.to_radians()) - 0.153).abs() < 1e-15);
    }

    #[test]
    fn optimal_power_cases() {
        let limits = Limits {
            p_pk: 10.0,
            i_pk: db_to_linear(2.0),
            epsilon: 0.05,
        };
        let o = outcome(0.03, 0.66);
        let c = optimal_power(&o, 0.3, 0.8, &limits).unwrap();
        assert_eq!(c.binding, Binding::InterferenceOutage);
        assert!((c.power - 2.204).abs() < 5e-4, "{}", c.power);
        let peak = optimal_power(&o, 0.0, 0.8, &limits).unwrap();
        assert_eq!(peak.binding, Binding::PeakPower);
        assert!((peak.power - 18.94).abs() < 5e-3);
        let loose = Limits {
            epsilon: 1.0 - 1e-12,
            ..limits.clone()
        };
        assert_eq!(optimal_power(&o, 0.3, 0.8, &loose).unwrap().binding, Binding::PeakPower);
        assert!(matches!(
            optimal_power(&outcome(0.0, 0.0), 0.3, 0.8, &limits),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn phi_r_without_interference_is_boresight() {
        let mut s = Scenario::default();
        s.channel.gamma_ps = 1e-300;
        let cfg = SearchConfig::default();
        let c = evaluate_candidate(&s, &cfg, s.geometry.theta, 0.002).unwrap();
        assert!((c.point.phi_r - s.phi_r_boresight()).abs() < 1e-9);
    }

    #[test]
    fn phi_r_tilts_away_from_an_aligned_interferer() {
        let mut s = Scenario::default();
        s.geometry.theta_pt_prime = s.phi_r_boresight() + 5f64.to_radians();
        s.primary.p_p = 30.0;
        // weak sensing channel, so missed detections keep beta0 large
        s.channel.gamma_stpt = 1e-3;
        let cfg = SearchConfig::default();
        let c = evaluate_candidate(&s, &cfg, s.geometry.theta, 0.002).unwrap();
        let centre = s.phi_r_boresight();
        let w = 30f64.to_radians();
        assert!(c.point.phi_r < centre && c.point.phi_r > centre - w, "{}", c.point.phi_r);
    }

    #[test]
    fn config_validation() {
        let cfg = SearchConfig::default();
        assert!(cfg.validate().is_ok());
        assert!(SearchConfig { grid_tau: 1, ..cfg.clone() }.validate().is_err());
        assert!(SearchConfig { tol: 0.0, ..cfg.clone() }.validate().is_err());
        let tiny = SearchConfig { min_samples: 1e6, ..cfg.clone() };
        assert!(tiny.tau_range(&Scenario::default()).is_err());
        let (lo, hi) = cfg.tau_range(&Scenario::default()).unwrap();
        assert!((lo - 1.5e-3).abs() < 1e-15 && (hi - 0.00999).abs() < 1e-15);
    }

    #[test]
    fn ratio_rejects_zero_denominator() {
        assert!(matches!(ratio(1.0, 0.0), Err(Error::Degenerate(_))));
        assert_eq!(ratio(3.0, 2.0).unwrap(), 1.5);
    }
}
