//! JSON scenario files.
//!
//! Angles are given in degrees. `p_pk` and `i_pk` accept either a number of
//! watts or a string such as `"10 dB"` (referenced to 1 W) or `"2.5 W"`.
//! Distances default to `d0`, `d0` to 1 and `nu` to 0. Only one of `pi0`
//! and `pi1` is required. Unknown keys are rejected.

use std::fmt;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::scenario::{
    db_to_linear, Antenna, AntennaPattern, ChannelStats, FrameParams, Limits, NetworkGeometry,
    PrimaryModel, Scenario,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    geometry: GeometryFile,
    pattern: PatternFile,
    channel: ChannelFile,
    primary: PrimaryFile,
    frame: FrameFile,
    limits: LimitsFile,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    theta: f64,
    theta_pt: f64,
    theta_pr: f64,
    theta_pt_prime: f64,
    d_ss: Option<f64>,
    d_ps: Option<f64>,
    d_stpt: Option<f64>,
    d_sp: Option<f64>,
    d0: Option<f64>,
    nu: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PatternFile {
    a0: f64,
    a1: f64,
    phi_3db: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelFile {
    gamma_ss: f64,
    gamma_sp: f64,
    gamma_ps: f64,
    gamma_stpt: f64,
    sigma_n2: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PrimaryFile {
    p_p: f64,
    pi0: Option<f64>,
    pi1: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameFile {
    t_frame: f64,
    f_s: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LimitsFile {
    p_pk: Watts,
    i_pk: Watts,
    epsilon: f64,
}

/// A power level given as watts or as a string with a `dB` or `W` unit.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Watts(f64);

impl<'de> Deserialize<'de> for Watts {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PowerVisitor;

        impl Visitor<'_> for PowerVisitor {
            type Value = Watts;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a power in watts or a string like \"10 dB\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Watts, E> {
                Ok(Watts(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Watts, E> {
                Ok(Watts(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Watts, E> {
                Ok(Watts(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Watts, E> {
                parse_power(v).map(Watts).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(PowerVisitor)
    }
}

/// Parses `"10 dB"`, `"10dB"`, `"2.5 W"` or a bare number of watts.
pub fn parse_power(text: &str) -> std::result::Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (number, db) = if let Some(n) = lower.strip_suffix("db") {
        (n, true)
    } else if let Some(n) = lower.strip_suffix('w') {
        (n, false)
    } else {
        (lower.as_str(), false)
    };
    let value: f64 = number
        .trim()
        .parse()
        .map_err(|_| format!("cannot read power {text:?}; expected watts or \"<x> dB\""))?;
    if !value.is_finite() {
        return Err(format!("power {text:?} is not finite"));
    }
    Ok(if db { db_to_linear(value) } else { value })
}

/// Reads, converts and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_scenario(&text, path)
}

/// Parses scenario JSON; `origin` labels parse errors.
pub fn parse_scenario(text: &str, origin: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let scenario = file.into_scenario()?;
    scenario.validate()?;
    Ok(scenario)
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let g = self.geometry;
        let d0 = g.d0.unwrap_or(1.0);
        let (pi0, pi1) = match (self.primary.pi0, self.primary.pi1) {
            (Some(a), Some(b)) => (a, b),
            (Some(a), None) => (a, 1.0 - a),
            (None, Some(b)) => (1.0 - b, b),
            (None, None) => {
                return Err(Error::invalid("primary", "one of pi0 and pi1 is required"));
            }
        };
        Ok(Scenario {
            geometry: NetworkGeometry {
                theta: g.theta.to_radians(),
                theta_pt: g.theta_pt.to_radians(),
                theta_pr: g.theta_pr.to_radians(),
                theta_pt_prime: g.theta_pt_prime.to_radians(),
                d_ss: g.d_ss.unwrap_or(d0),
                d_ps: g.d_ps.unwrap_or(d0),
                d_stpt: g.d_stpt.unwrap_or(d0),
                d_sp: g.d_sp.unwrap_or(d0),
                d0,
                nu: g.nu.unwrap_or(0.0),
            },
            antenna: Antenna::Directional(AntennaPattern {
                a0: self.pattern.a0,
                a1: self.pattern.a1,
                phi_3db: self.pattern.phi_3db.to_radians(),
            }),
            channel: ChannelStats {
                gamma_ss: self.channel.gamma_ss,
                gamma_sp: self.channel.gamma_sp,
                gamma_ps: self.channel.gamma_ps,
                gamma_stpt: self.channel.gamma_stpt,
                sigma_n2: self.channel.sigma_n2,
            },
            primary: PrimaryModel {
                p_p: self.primary.p_p,
                pi0,
                pi1,
            },
            frame: FrameParams {
                t_frame: self.frame.t_frame,
                f_s: self.frame.f_s,
            },
            limits: Limits {
                p_pk: self.limits.p_pk.0,
                i_pk: self.limits.i_pk.0,
                epsilon: self.limits.epsilon,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_strings() {
        assert!((parse_power("10 dB").unwrap() - 10.0).abs() < 1e-12);
        assert!((parse_power("2dB").unwrap() - 1.584_893_192_461_113_5).abs() < 1e-12);
        assert!((parse_power(" -3 DB ").unwrap() - 0.501_187_233_627_272_3).abs() < 1e-12);
        assert_eq!(parse_power("2.5 W").unwrap(), 2.5);
        assert_eq!(parse_power("4").unwrap(), 4.0);
        assert!(parse_power("ten dB").is_err());
        assert!(parse_power("inf").is_err());
    }
}
