//! Network geometry, antenna pattern, channel statistics and limits.
//!
//! Angles are radians everywhere in this module; conversion from the
//! degree-valued configuration file happens in [`crate::config`].

use std::f64::consts::{LN_2, PI, TAU};

use crate::error::{Error, Result};

/// Positions of the users relative to each other, plus path-loss parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGeometry {
    /// Direction of SU_rx seen from SU_tx.
    pub theta: f64,
    /// Direction of PU_tx seen from SU_tx.
    pub theta_pt: f64,
    /// Direction of PU_rx seen from SU_tx.
    pub theta_pr: f64,
    /// Direction of PU_tx seen from SU_rx.
    pub theta_pt_prime: f64,
    /// SU_tx to SU_rx.
    pub d_ss: f64,
    /// PU_tx to SU_rx.
    pub d_ps: f64,
    /// PU_tx to SU_tx.
    pub d_stpt: f64,
    /// SU_tx to PU_rx.
    pub d_sp: f64,
    pub d0: f64,
    pub nu: f64,
}

/// Single-lobe pattern `A(φ) = A₁ + A₀ exp(-B (φ/φ_3dB)²)` with `B = ln 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    pub a0: f64,
    pub a1: f64,
    pub phi_3db: f64,
}

impl AntennaPattern {
    /// Shape constant; fixed so that `A(φ_3dB) = A₁ + A₀/2`.
    pub const B: f64 = LN_2;

    pub fn peak(&self) -> f64 {
        self.a0 + self.a1
    }

    fn lobe(&self, offset: f64) -> (f64, f64) {
        let w = wrap_angle(offset);
        let r = w / self.phi_3db;
        (w, self.a0 * (-Self::B * r * r).exp())
    }

    pub fn gain(&self, offset: f64) -> f64 {
        // Evaluated on |offset| so that A(x) == A(-x) bit for bit.
        self.a1 + self.lobe(offset.abs()).1
    }

    /// `dA/dφ` at `offset`.
    pub fn slope(&self, offset: f64) -> f64 {
        let (w, lobe) = self.lobe(offset);
        -2.0 * Self::B * w / (self.phi_3db * self.phi_3db) * lobe
    }

    fn validate(&self) -> Result<()> {
        if !(self.a0 > 0.0 && self.a0.is_finite()) {
            return Err(Error::invalid("pattern.a0", "must be positive and finite"));
        }
        if !(self.a1 >= 0.0 && self.a1.is_finite()) {
            return Err(Error::invalid("pattern.a1", "must be non-negative and finite"));
        }
        if !(self.phi_3db > 0.0 && self.phi_3db < PI) {
            return Err(Error::invalid("pattern.phi_3db", "must lie in (0, 180) degrees"));
        }
        Ok(())
    }
}

/// The radiation model actually used by every gain evaluation of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Antenna {
    Directional(AntennaPattern),
    /// Constant gain in every direction (the omni-directional baseline).
    Isotropic { gain: f64 },
}

impl Antenna {
    pub fn gain(&self, offset: f64) -> f64 {
        match self {
            Antenna::Directional(p) => p.gain(offset),
            Antenna::Isotropic { gain } => *gain,
        }
    }

    pub fn slope(&self, offset: f64) -> f64 {
        match self {
            Antenna::Directional(p) => p.slope(offset),
            Antenna::Isotropic { .. } => 0.0,
        }
    }

    /// Half-power beam-width; `None` for an isotropic antenna.
    pub fn half_power_width(&self) -> Option<f64> {
        match self {
            Antenna::Directional(p) => Some(p.phi_3db),
            Antenna::Isotropic { .. } => None,
        }
    }
}

/// Means of the exponential fading power gains, and the noise power.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub gamma_ss: f64,
    pub gamma_sp: f64,
    pub gamma_ps: f64,
    pub gamma_stpt: f64,
    pub sigma_n2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimaryModel {
    /// PU_tx average power in watts.
    pub p_p: f64,
    /// Probability that the band is idle.
    pub pi0: f64,
    /// Probability that the band is busy.
    pub pi1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameParams {
    /// Frame length in seconds.
    pub t_frame: f64,
    /// Sampling frequency in hertz.
    pub f_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Limits {
    /// Peak transmit power (linear watts).
    pub p_pk: f64,
    /// Interference threshold at PU_rx (linear watts).
    pub i_pk: f64,
    /// Maximum interference-outage probability.
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: NetworkGeometry,
    pub antenna: Antenna,
    pub channel: ChannelStats,
    pub primary: PrimaryModel,
    pub frame: FrameParams,
    pub limits: Limits,
}

/// Tolerance on `pi0 + pi1 = 1`.
const PRIOR_SUM_TOLERANCE: f64 = 1e-9;

impl Default for Scenario {
    /// The reference parameter set: `σ_n² = 1`,
    /// `A₀ = 9.8`, `A₁ = 0.2`, unit fading means, `π₁ = 0.3`, `T = 10 ms`,
    /// `f_s = 20 kHz`, `φ_3dB = 30°`, `ε = 0.05`, `θ_pr = 90°`,
    /// `P_p = 0.4 W`, `θ'_pt = θ_pt = 130°`, `θ = 50°`, `I_pk = 2 dB`,
    /// `P_pk = 10 dB`. Every distance equals `d0`, so each path loss is 1.
    fn default() -> Self {
        let deg = PI / 180.0;
        Scenario {
            geometry: NetworkGeometry {
                theta: 50.0 * deg,
                theta_pt: 130.0 * deg,
                theta_pr: 90.0 * deg,
                theta_pt_prime: 130.0 * deg,
                d_ss: 1.0,
                d_ps: 1.0,
                d_stpt: 1.0,
                d_sp: 1.0,
                d0: 1.0,
                nu: 0.0,
            },
            antenna: Antenna::Directional(AntennaPattern {
                a0: 9.8,
                a1: 0.2,
                phi_3db: 30.0 * deg,
            }),
            channel: ChannelStats {
                gamma_ss: 1.0,
                gamma_sp: 1.0,
                gamma_ps: 1.0,
                gamma_stpt: 1.0,
                sigma_n2: 1.0,
            },
            primary: PrimaryModel {
                p_p: 0.4,
                pi0: 0.7,
                pi1: 0.3,
            },
            frame: FrameParams {
                t_frame: 0.01,
                f_s: 20_000.0,
            },
            limits: Limits {
                p_pk: db_to_linear(10.0),
                i_pk: db_to_linear(2.0),
                epsilon: 0.05,
            },
        }
    }
}

impl Scenario {
    /// Checks every type invariant, naming the first violated one.
    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        for (name, d) in [
            ("geometry.d_ss", g.d_ss),
            ("geometry.d_ps", g.d_ps),
            ("geometry.d_stpt", g.d_stpt),
            ("geometry.d_sp", g.d_sp),
            ("geometry.d0", g.d0),
        ] {
            positive(name, d)?;
        }
        if !(g.nu >= 0.0 && g.nu.is_finite()) {
            return Err(Error::invalid("geometry.nu", "must be non-negative and finite"));
        }
        for (name, a) in [
            ("geometry.theta", g.theta),
            ("geometry.theta_pt", g.theta_pt),
            ("geometry.theta_pr", g.theta_pr),
            ("geometry.theta_pt_prime", g.theta_pt_prime),
        ] {
            if !a.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        match &self.antenna {
            Antenna::Directional(p) => p.validate()?,
            Antenna::Isotropic { gain } => positive("antenna.gain", *gain)?,
        }
        let c = &self.channel;
        positive("channel.gamma_ss", c.gamma_ss)?;
        positive("channel.gamma_sp", c.gamma_sp)?;
        positive("channel.gamma_ps", c.gamma_ps)?;
        positive("channel.gamma_stpt", c.gamma_stpt)?;
        positive("channel.sigma_n2", c.sigma_n2)?;
        let p = &self.primary;
        positive("primary.p_p", p.p_p)?;
        for (name, v) in [("primary.pi0", p.pi0), ("primary.pi1", p.pi1)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::invalid(name, format!("must lie in (0, 1), got {v}")));
            }
        }
        if (p.pi0 + p.pi1 - 1.0).abs() > PRIOR_SUM_TOLERANCE {
            return Err(Error::invalid(
                "primary.pi0 + primary.pi1",
                format!("must equal 1, got {}", p.pi0 + p.pi1),
            ));
        }
        positive("frame.t_frame", self.frame.t_frame)?;
        positive("frame.f_s", self.frame.f_s)?;
        let l = &self.limits;
        positive("limits.p_pk", l.p_pk)?;
        positive("limits.i_pk", l.i_pk)?;
        if !(l.epsilon > 0.0 && l.epsilon < 1.0) {
            return Err(Error::invalid(
                "limits.epsilon",
                format!("must lie in the open interval (0, 1), got {}", l.epsilon),
            ));
        }
        Ok(())
    }

    /// Antenna gain at an angular offset from boresight.
    pub fn gain(&self, offset: f64) -> f64 {
        self.antenna.gain(offset)
    }

    /// Product of the SU_tx and SU_rx gains on the secondary link.
    pub fn link_gain(&self, phi_t: f64, phi_r: f64) -> f64 {
        let theta = self.geometry.theta;
        self.gain(phi_t - theta) * self.gain(phi_r - PI - theta)
    }

    pub fn loss_ss(&self) -> f64 {
        self.loss(self.geometry.d_ss)
    }

    pub fn loss_ps(&self) -> f64 {
        self.loss(self.geometry.d_ps)
    }

    pub fn loss_stpt(&self) -> f64 {
        self.loss(self.geometry.d_stpt)
    }

    pub fn loss_sp(&self) -> f64 {
        self.loss(self.geometry.d_sp)
    }

    fn loss(&self, d: f64) -> f64 {
        (self.geometry.d0 / d).powf(self.geometry.nu)
    }

    /// Mean PU_tx interference power at SU_rx, `σ̄_p²`.
    pub fn mean_interference(&self, phi_r: f64) -> f64 {
        self.primary.p_p
            * self.channel.gamma_ps
            * self.loss_ps()
            * self.gain(phi_r - self.geometry.theta_pt_prime)
    }

    /// The same scenario with both secondary antennas replaced by a constant gain.
    pub fn with_isotropic_antennas(&self, gain: f64) -> Scenario {
        Scenario {
            antenna: Antenna::Isotropic { gain },
            ..self.clone()
        }
    }

    /// Boresight orientation of SU_rx towards SU_tx, `π + θ`.
    pub fn phi_r_boresight(&self) -> f64 {
        PI + self.geometry.theta
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
    }
}

/// Maps an angle onto `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn antenna_gain(pattern: &AntennaPattern, offset: f64) -> f64 {
    pattern.gain(offset)
}

/// `(d0/d)^ν`.
pub fn path_loss(d: f64, d0: f64, nu: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain {
            function: "path_loss",
            value: d,
            requirement: "d > 0",
        });
    }
    if !(d0 > 0.0) {
        return Err(Error::Domain {
            function: "path_loss",
            value: d0,
            requirement: "d0 > 0",
        });
    }
    Ok((d0 / d).powf(nu))
}

/// `G(θ, φ_t, φ_r) = A(φ_t - θ) A(φ_r - π - θ)`.
pub fn combined_gain(pattern: &AntennaPattern, theta: f64, phi_t: f64, phi_r: f64) -> f64 {
    pattern.gain(phi_t - theta) * pattern.gain(phi_r - PI - theta)
}
