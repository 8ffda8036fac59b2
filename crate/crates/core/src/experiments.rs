//! Parameter sweeps, figure presets and CSV output.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::optimizer::{self, Binding, OptimizationResult, SearchConfig, OMNI_GAIN};
use crate::scenario::{db_to_linear, linear_to_db, Antenna, Scenario};

/// Significant digits of every real written to CSV.
pub const CSV_DIGITS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Sensing time in seconds.
    Tau,
    Epsilon,
    /// `θ` in degrees.
    Theta,
    /// PU_tx power in watts.
    PP,
    /// Half-power beam-width in degrees.
    Phi3db,
    /// Peak transmit power in dB.
    PPk,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 6] = [
        SweepVariable::Tau,
        SweepVariable::Epsilon,
        SweepVariable::Theta,
        SweepVariable::PP,
        SweepVariable::Phi3db,
        SweepVariable::PPk,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Theta => "theta",
            SweepVariable::PP => "p_p",
            SweepVariable::Phi3db => "phi_3db",
            SweepVariable::PPk => "p_pk",
        }
    }

    /// CSV column name, with the unit of the values.
    pub fn column(&self) -> &'static str {
        match self {
            SweepVariable::Tau => "tau_s",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Theta => "theta_deg",
            SweepVariable::PP => "p_p_w",
            SweepVariable::Phi3db => "phi_3db_deg",
            SweepVariable::PPk => "p_pk_db",
        }
    }

    /// The scenario with this variable set to `value`. The sensing time is
    /// a decision variable, so it leaves the scenario untouched.
    pub fn apply(&self, scenario: &Scenario, value: f64) -> Result<Scenario> {
        let mut s = scenario.clone();
        match self {
            SweepVariable::Tau => {}
            SweepVariable::Epsilon => s.limits.epsilon = value,
            SweepVariable::Theta => s.geometry.theta = value.to_radians(),
            SweepVariable::PP => s.primary.p_p = value,
            SweepVariable::Phi3db => match &mut s.antenna {
                Antenna::Directional(p) => p.phi_3db = value.to_radians(),
                Antenna::Isotropic { .. } => {
                    return Err(Error::invalid("phi_3db", "an isotropic antenna has no beam-width"));
                }
            },
            SweepVariable::PPk => s.limits.p_pk = db_to_linear(value),
        }
        s.validate()?;
        Ok(s)
    }

    /// The current value of this variable in the scenario, in sweep units.
    pub fn current(&self, scenario: &Scenario) -> Option<f64> {
        match self {
            SweepVariable::Tau => None,
            SweepVariable::Epsilon => Some(scenario.limits.epsilon),
            SweepVariable::Theta => Some(scenario.geometry.theta.to_degrees()),
            SweepVariable::PP => Some(scenario.primary.p_p),
            SweepVariable::Phi3db => scenario.antenna.half_power_width().map(f64::to_degrees),
            SweepVariable::PPk => Some(linear_to_db(scenario.limits.p_pk)),
        }
    }

    fn check(&self, scenario: &Scenario, value: f64) -> Result<()> {
        let ok = match self {
            SweepVariable::Tau => value > 0.0 && value < scenario.frame.t_frame,
            SweepVariable::Epsilon => value > 0.0 && value < 1.0,
            SweepVariable::Theta | SweepVariable::PPk => value.is_finite(),
            SweepVariable::PP => value > 0.0 && value.is_finite(),
            SweepVariable::Phi3db => value > 0.0 && value < 180.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(self.name(), format!("value {value} is out of range")))
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepVariable::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::invalid("variable", format!("unknown sweep variable {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    /// Decisions come from one optimization at the base scenario; each row
    /// only recomputes the threshold and the power.
    EvaluateOnly,
    /// Every row is optimized afresh.
    FullReoptimize,
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evaluate" | "evaluate-only" => Ok(SweepMode::EvaluateOnly),
            "reoptimize" | "full-reoptimize" => Ok(SweepMode::FullReoptimize),
            _ => Err(Error::invalid("mode", format!("unknown sweep mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    Dir,
    Omni,
    Los,
}

impl Baseline {
    pub fn name(&self) -> &'static str {
        match self {
            Baseline::Dir => "dir",
            Baseline::Omni => "omni",
            Baseline::Los => "los",
        }
    }

    fn optimize(&self, scenario: &Scenario, config: &SearchConfig) -> Result<OptimizationResult> {
        match self {
            Baseline::Dir => optimizer::optimize(scenario, config),
            Baseline::Omni => optimizer::optimize_omni(scenario, config),
            Baseline::Los => optimizer::optimize_los(scenario, config),
        }
    }

    /// Re-evaluates fixed decisions on `scenario`.
    fn evaluate(
        &self,
        scenario: &Scenario,
        config: &SearchConfig,
        fixed: &OptimizationResult,
        tau: f64,
    ) -> Result<OptimizationResult> {
        let omni;
        let (s, phi_t, phi_r) = match self {
            Baseline::Dir => (scenario, fixed.phi_t_opt, fixed.phi_r_opt),
            Baseline::Los => (scenario, scenario.geometry.theta, scenario.phi_r_boresight()),
            Baseline::Omni => {
                omni = scenario.with_isotropic_antennas(OMNI_GAIN);
                (&omni, omni.geometry.theta, omni.phi_r_boresight())
            }
        };
        let c = optimizer::evaluate_fixed(s, config, phi_t, phi_r, tau)?;
        Ok(OptimizationResult {
            tau_opt: tau,
            phi_t_opt: phi_t,
            phi_r_opt: phi_r,
            p_opt: c.point.power,
            c_opt: c.capacity,
            xi: c.point.xi,
            binding: c.binding,
            iterations: 0,
            converged: fixed.converged,
            evaluations: 1,
        })
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dir" => Ok(Baseline::Dir),
            "omni" => Ok(Baseline::Omni),
            "los" => Ok(Baseline::Los),
            _ => Err(Error::invalid("baselines", format!("unknown baseline {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub mode: SweepMode,
    /// The first baseline supplies the decision columns of the table.
    pub baselines: Vec<Baseline>,
}

impl SweepSpec {
    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::invalid("values", "a sweep needs at least one value"));
        }
        let increasing = self.values.windows(2).all(|w| w[1] > w[0]);
        let decreasing = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("values", "must be strictly monotone"));
        }
        for &v in &self.values {
            self.variable.check(scenario, v)?;
        }
        if self.baselines.is_empty() {
            return Err(Error::invalid("baselines", "at least one baseline is required"));
        }
        for (i, b) in self.baselines.iter().enumerate() {
            if self.baselines[..i].contains(b) {
                return Err(Error::invalid("baselines", format!("{} listed twice", b.name())));
            }
        }
        if self.variable == SweepVariable::Phi3db && self.baselines == [Baseline::Omni] {
            return Err(Error::invalid("baselines", "a beam-width sweep needs a directional baseline"));
        }
        Ok(())
    }
}

/// A second parameter held at several values, one sweep per value.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub series: Option<f64>,
    pub value: f64,
    /// One capacity per requested baseline, in request order.
    pub capacities: Vec<f64>,
    /// `C_dir / C_omni` when both are requested.
    pub gamma_d2o: Option<f64>,
    pub tau: f64,
    pub phi_t: f64,
    pub phi_r: f64,
    pub power: f64,
    pub binding: Binding,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub header: Vec<String>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }

    /// Column index by name.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Rows of one series (all rows when the table has no series column).
    pub fn series_rows(&self, series: Option<f64>) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| series.is_none() || r.series == series)
    }

    /// Capacity of `baseline` in every row, if it was requested.
    pub fn capacities(&self, baseline: Baseline) -> Option<Vec<f64>> {
        let i = self.column(&format!("c_{}", baseline.name()))?;
        let offset = i - self.first_capacity_column();
        Some(self.rows.iter().map(|r| r.capacities[offset]).collect())
    }

    fn first_capacity_column(&self) -> usize {
        self.header.iter().position(|h| h.starts_with("c_")).unwrap_or(0)
    }

    /// Every cell as text.
    pub fn records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                let mut cells = Vec::with_capacity(self.header.len());
                if let Some(s) = r.series {
                    cells.push(format_real(s));
                }
                cells.push(format_real(r.value));
                cells.extend(r.capacities.iter().map(|&c| format_real(c)));
                if let Some(g) = r.gamma_d2o {
                    cells.push(format_real(g));
                }
                cells.push(format_real(r.tau));
                cells.push(format_real(r.phi_t.to_degrees()));
                cells.push(format_real(r.phi_r.to_degrees()));
                cells.push(format_real(r.power));
                cells.push(r.binding.as_str().to_string());
                cells.push(r.converged.to_string());
                cells
            })
            .collect()
    }
}

fn header(spec: &SweepSpec, series: Option<SweepVariable>) -> Vec<String> {
    let mut h = Vec::new();
    if let Some(v) = series {
        h.push(v.column().to_string());
    }
    h.push(spec.variable.column().to_string());
    for b in &spec.baselines {
        h.push(format!("c_{}", b.name()));
    }
    if has_ratio(spec) {
        h.push("gamma_d2o".into());
    }
    for c in ["tau_opt_s", "phi_t_opt_deg", "phi_r_opt_deg", "p_opt_w", "binding", "converged"] {
        h.push(c.into());
    }
    h
}

fn has_ratio(spec: &SweepSpec) -> bool {
    spec.baselines.contains(&Baseline::Dir) && spec.baselines.contains(&Baseline::Omni)
}

/// Runs one sweep over `scenario`.
pub fn run_sweep(scenario: &Scenario, spec: &SweepSpec, config: &SearchConfig) -> Result<SweepTable> {
    run_experiment(scenario, None, spec, config)
}

/// Runs `spec` once per series value (or once without a series).
pub fn run_experiment(
    scenario: &Scenario,
    series: Option<&Series>,
    spec: &SweepSpec,
    config: &SearchConfig,
) -> Result<SweepTable> {
    scenario.validate()?;
    config.validate()?;
    spec.validate(scenario)?;
    let mut rows = Vec::new();
    match series {
        None => sweep_rows(scenario, None, spec, config, &mut rows)?,
        Some(series) => {
            if series.values.is_empty() {
                return Err(Error::invalid("series", "needs at least one value"));
            }
            if series.variable == spec.variable || series.variable == SweepVariable::Tau {
                return Err(Error::invalid("series", "must differ from the swept variable and from tau"));
            }
            for &v in &series.values {
                series.variable.check(scenario, v)?;
                let base = series.variable.apply(scenario, v)?;
                sweep_rows(&base, Some(v), spec, config, &mut rows)?;
            }
        }
    }
    Ok(SweepTable {
        header: header(spec, series.map(|s| s.variable)),
        rows,
    })
}

fn sweep_rows(
    base: &Scenario,
    series: Option<f64>,
    spec: &SweepSpec,
    config: &SearchConfig,
    rows: &mut Vec<SweepRow>,
) -> Result<()> {
    let fixed: Vec<OptimizationResult> = match spec.mode {
        SweepMode::EvaluateOnly => spec
            .baselines
            .iter()
            .map(|b| b.optimize(base, config))
            .collect::<Result<_>>()?,
        SweepMode::FullReoptimize => Vec::new(),
    };
    for &value in &spec.values {
        let scenario = spec.variable.apply(base, value)?;
        let mut row_config = config.clone();
        if spec.variable == SweepVariable::Tau {
            row_config.fixed_tau = Some(value);
        }
        let results: Vec<OptimizationResult> = spec
            .baselines
            .iter()
            .enumerate()
            .map(|(i, b)| match spec.mode {
                SweepMode::FullReoptimize => b.optimize(&scenario, &row_config),
                SweepMode::EvaluateOnly => {
                    let tau = row_config.fixed_tau.unwrap_or(fixed[i].tau_opt);
                    b.evaluate(&scenario, config, &fixed[i], tau)
                }
            })
            .collect::<Result<_>>()?;
        let gamma_d2o = if has_ratio(spec) {
            let c = |want: Baseline| {
                let i = spec.baselines.iter().position(|b| *b == want).expect("checked");
                results[i].c_opt
            };
            Some(optimizer::ratio(c(Baseline::Dir), c(Baseline::Omni))?)
        } else {
            None
        };
        let lead = &results[0];
        rows.push(SweepRow {
            series,
            value,
            capacities: results.iter().map(|r| r.c_opt).collect(),
            gamma_d2o,
            tau: lead.tau_opt,
            phi_t: lead.phi_t_opt,
            phi_r: lead.phi_r_opt,
            power: lead.p_opt,
            binding: lead.binding,
            converged: results.iter().all(|r| r.converged),
        });
    }
    Ok(())
}

/// Decimal notation with [`CSV_DIGITS`] significant digits; scientific
/// notation only outside `[1e-7, 1e15)`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", CSV_DIGITS - 1, x);
    let exponent: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if !(-7..15).contains(&exponent) {
        return sci;
    }
    let rounded: f64 = sci.parse().expect("formatted float");
    let decimals = (CSV_DIGITS as i32 - 1 - exponent).max(0) as usize;
    let mut out = String::new();
    write!(out, "{:.*}", decimals, rounded).expect("write to string");
    out
}

/// Writes `table` as CSV. The file is produced in one write after the
/// whole content has been assembled.
pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    std::fs::write(path, csv_bytes(table)?).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn csv_bytes(table: &SweepTable) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e),
    };
    w.write_record(&table.header).map_err(io)?;
    for record in table.records() {
        w.write_record(&record).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io {
        path: "<csv buffer>".into(),
        source: std::io::Error::other(e.to_string()),
    })
}

/// Named sweep layouts, one per `figN` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
}

/// `θ = 0°, 10°, ..., 180°`.
pub fn theta_grid() -> Vec<f64> {
    (0..=18).map(|i| 10.0 * i as f64).collect()
}

/// `ε = 0.025, 0.05, ..., 0.5`.
pub fn epsilon_grid() -> Vec<f64> {
    (1..=20).map(|i| 0.025 * i as f64).collect()
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig3c => "fig3c",
            Preset::Fig3d => "fig3d",
        }
    }

    pub fn build(&self, scenario: &Scenario, config: &SearchConfig) -> Result<(Option<Series>, SweepSpec)> {
        let theta = |baselines: Vec<Baseline>| SweepSpec {
            variable: SweepVariable::Theta,
            values: theta_grid(),
            mode: SweepMode::FullReoptimize,
            baselines,
        };
        Ok(match self {
            Preset::Fig2a => {
                // The landscape covers (0, T) on a geometric grid from one
                // sample up, below the optimizer's sample floor.
                let lo = 1.0 / scenario.frame.f_s;
                let hi = config.max_tau_fraction * scenario.frame.t_frame;
                let n = 60;
                let values = (0..n)
                    .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
                    .collect();
                (
                    Some(Series {
                        variable: SweepVariable::PP,
                        values: vec![0.1, 5.0, 15.0],
                    }),
                    SweepSpec {
                        variable: SweepVariable::Tau,
                        values,
                        mode: SweepMode::EvaluateOnly,
                        baselines: vec![Baseline::Dir],
                    },
                )
            }
            Preset::Fig2b => (
                None,
                SweepSpec {
                    variable: SweepVariable::Epsilon,
                    values: epsilon_grid(),
                    mode: SweepMode::FullReoptimize,
                    baselines: vec![Baseline::Dir],
                },
            ),
            Preset::Fig3a => (
                Some(Series {
                    variable: SweepVariable::PP,
                    values: vec![0.4, 1.2],
                }),
                theta(vec![Baseline::Dir]),
            ),
            Preset::Fig3b => (
                Some(Series {
                    variable: SweepVariable::Phi3db,
                    values: vec![30.0, 45.0],
                }),
                theta(vec![Baseline::Dir]),
            ),
            Preset::Fig3c => (None, theta(vec![Baseline::Dir, Baseline::Los, Baseline::Omni])),
            Preset::Fig3d => (
                Some(Series {
                    variable: SweepVariable::PPk,
                    values: vec![6.0, 8.0],
                }),
                theta(vec![Baseline::Dir, Baseline::Omni]),
            ),
        })
    }

    pub fn run(&self, scenario: &Scenario, config: &SearchConfig) -> Result<SweepTable> {
        let (series, spec) = self.build(scenario, config)?;
        run_experiment(scenario, series.as_ref(), &spec, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(0.0), "0");
        assert_eq!(format_real(1.0), "1.00000000");
        assert_eq!(format_real(-2.5), "-2.50000000");
        assert_eq!(format_real(123_456_789.0), "123456789");
        assert_eq!(format_real(1_234_567_890.0), "1234567890");
        assert_eq!(format_real(0.001_234_567_891_2), "0.00123456789");
        assert_eq!(format_real(1.5e-9), "1.50000000e-9");
        assert_eq!(format_real(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_real(1_234_567_899.0), "1234567900");
        assert_eq!(format_real(9.999_999_999), "10.0000000");
    }

    #[test]
    fn spec_validation() {
        let s = Scenario::default();
        let ok = SweepSpec {
            variable: SweepVariable::Epsilon,
            values: vec![0.1, 0.2],
            mode: SweepMode::FullReoptimize,
            baselines: vec![Baseline::Dir],
        };
        assert!(ok.validate(&s).is_ok());
        let bad = |f: &dyn Fn(&mut SweepSpec)| {
            let mut spec = ok.clone();
            f(&mut spec);
            spec.validate(&s).is_err()
        };
        assert!(bad(&|x| x.values.clear()));
        assert!(bad(&|x| x.values = vec![0.1, 0.1]));
        assert!(bad(&|x| x.values = vec![0.1, 0.3, 0.2]));
        assert!(bad(&|x| x.values = vec![0.0, 0.3]));
        assert!(bad(&|x| x.baselines.clear()));
        assert!(bad(&|x| x.baselines = vec![Baseline::Dir, Baseline::Dir]));
        assert!(bad(&|x| {
            x.variable = SweepVariable::Tau;
            x.values = vec![0.001, 0.02];
        }));
    }

    #[test]
    fn names_round_trip() {
        for v in SweepVariable::ALL {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
        }
        assert!("gamma".parse::<SweepVariable>().is_err());
        assert_eq!("los".parse::<Baseline>().unwrap(), Baseline::Los);
        assert_eq!("evaluate-only".parse::<SweepMode>().unwrap(), SweepMode::EvaluateOnly);
    }

    #[test]
    fn variables_apply_in_their_units() {
        let s = Scenario::default();
        let t = SweepVariable::Theta.apply(&s, 90.0).unwrap();
        assert!((t.geometry.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        let p = SweepVariable::PPk.apply(&s, 8.0).unwrap();
        assert!((p.limits.p_pk - 6.309_573_444_801_933).abs() < 1e-12);
        assert!((SweepVariable::PPk.current(&s).unwrap() - 10.0).abs() < 1e-12);
        assert!(SweepVariable::Epsilon.apply(&s, 1.0).is_err());
        assert_eq!(SweepVariable::Tau.apply(&s, 0.004).unwrap(), s);
    }
}
