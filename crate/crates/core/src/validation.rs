//! Oracle cross-checks run by the `validate` subcommand.

use std::fmt;

use crate::capacity::{CapacityModel, OperatingPoint};
use crate::error::Result;
use crate::optimizer::{self, Binding, SearchConfig};
use crate::oracle::{self, Draws, RngSeed};
use crate::quadrature::ExpectationRule;
use crate::scenario::Scenario;
use crate::specfun;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        writeln!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Stream index reserved for drawing test points, far from the sample batches.
const POINT_STREAM: u64 = u64::MAX;

/// A random operating point inside the search domain, with the power/threshold
/// that the optimizer would use there.
pub fn random_point(scenario: &Scenario, config: &SearchConfig, draws: &mut Draws) -> Result<OperatingPoint> {
    let (lo, hi) = config.tau_range(scenario)?;
    let tau = lo + (hi - lo) * draws.uniform();
    let w = scenario.antenna.half_power_width().unwrap_or(0.0);
    let phi_t = scenario.geometry.theta + w * (2.0 * draws.uniform() - 1.0);
    let phi_r = scenario.phi_r_boresight() + w * (2.0 * draws.uniform() - 1.0);
    let c = optimizer::evaluate_fixed(scenario, config, phi_t, phi_r, tau)?;
    Ok(c.point)
}

pub fn run_checks(scenario: &Scenario, config: &SearchConfig, mc_samples: usize, seed: RngSeed) -> Result<Report> {
    scenario.validate()?;
    let mut r = Report::default();

    let ei = specfun::exp_int_ei_neg(1.0)?;
    let t = specfun::t_func(1.0)?;
    r.push(
        "special functions",
        (ei + 0.219_383_934_4).abs() <= 1e-9
            && (t + 0.596_347_362_4).abs() <= 1e-8
            && (specfun::q_function(0.0) - 0.5).abs() <= 1e-15,
        format!("Ei(-1) = {ei:.12}, T(1) = {t:.12}"),
    );

    let rule = ExpectationRule::new(config.quadrature)?;
    let model = CapacityModel::new(scenario, &rule);
    let mut draws = Draws::new(seed, POINT_STREAM);
    let dir = optimizer::optimize(scenario, config)?;
    let mut points = vec![OperatingPoint {
        power: dir.p_opt,
        phi_t: dir.phi_t_opt,
        phi_r: dir.phi_r_opt,
        tau: dir.tau_opt,
        xi: dir.xi,
    }];
    for _ in 0..4 {
        points.push(random_point(scenario, config, &mut draws)?);
    }

    for (i, p) in points.iter().enumerate() {
        let closed = model.capacity(p)?;
        let mc = oracle::mc_capacity(scenario, p, mc_samples, RngSeed(seed.0.wrapping_add(i as u64)))?;
        let z = mc.z_score(closed);
        r.push(
            format!("capacity vs Monte Carlo, point {i}"),
            z <= 3.0,
            format!("closed {closed:.9}, sampled {:.9} ± {:.2e} (z = {z:.2})", mc.mean, mc.std_error),
        );

        let h_tau = 1e-7;
        let fd = oracle::finite_difference(
            |tau| model.capacity(&OperatingPoint { tau, ..*p }),
            p.tau,
            h_tau,
        )?;
        let an = model.d_capacity_d_tau(p)?;
        r.push(
            format!("dC/dtau vs finite difference, point {i}"),
            relative(an, fd) <= 1e-4,
            format!("analytic {an:.9e}, numeric {fd:.9e}"),
        );
        let fd = oracle::finite_difference(
            |phi_r| model.capacity(&OperatingPoint { phi_r, ..*p }),
            p.phi_r,
            1e-5,
        )?;
        let an = model.d_capacity_d_phir(p)?;
        let scale = fd.abs().max(an.abs());
        r.push(
            format!("dC/dphi_r vs finite difference, point {i}"),
            relative(an, fd) <= 1e-5 || scale < 1e-9,
            format!("analytic {an:.9e}, numeric {fd:.9e}"),
        );
    }

    let outcome = model.sensing_outcome(&points[0]);
    let mc = oracle::mc_outage(scenario, dir.p_opt, dir.phi_t_opt, &outcome, dir.tau_opt, mc_samples, seed)?;
    let exact = oracle::outage_closed_form(scenario, dir.p_opt, dir.phi_t_opt, &outcome, dir.tau_opt);
    let limit = scenario.limits.epsilon;
    let z_eps = mc.z_score(limit);
    let on_limit = dir.binding != Binding::InterferenceOutage || z_eps <= 3.0;
    r.push(
        "outage at the optimum",
        mc.z_score(exact) <= 3.0 && on_limit && mc.mean <= limit + 3.0 * mc.std_error,
        format!("sampled {:.6} ± {:.2e}, exact {exact:.6}, limit {limit}", mc.mean, mc.std_error),
    );

    let d_frac = (scenario.frame.t_frame - dir.tau_opt) / scenario.frame.t_frame;
    let average = d_frac * outcome.pi0_hat * dir.p_opt;
    r.push(
        "average power at the optimum",
        average <= scenario.limits.p_pk * (1.0 + 1e-12),
        format!("{average:.9} <= {:.9}", scenario.limits.p_pk),
    );

    let los = optimizer::optimize_los(scenario, config)?;
    r.push(
        "directional optimum dominates line of sight",
        dir.c_opt >= los.c_opt - 1e-9,
        format!("dir {:.9}, los {:.9}", dir.c_opt, los.c_opt),
    );
    Ok(r)
}

fn relative(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / b.abs().max(a.abs())
    }
}
