use dirsense::experiments::{
    csv_bytes, emit_csv, format_real, run_sweep, Baseline, SweepMode, SweepSpec, SweepTable, SweepVariable,
    CSV_DIGITS,
};
use dirsense::optimizer::SearchConfig;
use dirsense::scenario::Scenario;
use proptest::prelude::*;

fn small_config() -> SearchConfig {
    SearchConfig {
        grid_phi_t: 7,
        grid_tau: 7,
        ..SearchConfig::default()
    }
}

fn theta_table(values: Vec<f64>) -> SweepTable {
    let spec = SweepSpec {
        variable: SweepVariable::Theta,
        values,
        mode: SweepMode::FullReoptimize,
        baselines: vec![Baseline::Dir, Baseline::Los, Baseline::Omni],
    };
    run_sweep(&Scenario::default(), &spec, &small_config()).unwrap()
}

/// `x` rounded to the number of significant digits written to CSV.
fn rounded(x: f64) -> f64 {
    format!("{:.*e}", CSV_DIGITS - 1, x).parse().unwrap()
}

#[test]
fn round_trip() {
    let table = theta_table(vec![30.0, 50.0]);
    let bytes = csv_bytes(&table).unwrap();
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, table.header);
    let records: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(records.len(), table.rows.len());
    for (record, row) in records.iter().zip(&table.rows) {
        let cell = |name: &str| -> f64 { record[table.column(name).unwrap()].parse().unwrap() };
        let expected = [
            ("theta_deg", row.value),
            ("c_dir", row.capacities[0]),
            ("c_los", row.capacities[1]),
            ("c_omni", row.capacities[2]),
            ("gamma_d2o", row.gamma_d2o.unwrap()),
            ("tau_opt_s", row.tau),
            ("phi_t_opt_deg", row.phi_t.to_degrees()),
            ("phi_r_opt_deg", row.phi_r.to_degrees()),
            ("p_opt_w", row.power),
        ];
        for (name, value) in expected {
            let parsed = cell(name);
            let r = rounded(value);
            assert!((parsed - r).abs() <= 1e-9 * r.abs(), "{name}: {parsed} vs {r}");
            assert!((parsed - value).abs() <= 5e-9 * value.abs(), "{name}: {parsed} vs {value}");
        }
        assert_eq!(&record[table.column("binding").unwrap()], row.binding.as_str());
        assert_eq!(&record[table.column("converged").unwrap()], row.converged.to_string());
    }
}

#[test]
fn empty_table_is_a_header_line() {
    let table = SweepTable {
        header: vec!["theta_deg".into(), "c_dir".into()],
        rows: Vec::new(),
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    emit_csv(&table, &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "theta_deg,c_dir\n");
}

#[test]
fn one_row_is_two_lines() {
    let table = theta_table(vec![50.0]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    emit_csv(&table, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.ends_with('\n') && !text.ends_with("\n\n"));
    assert!(!text.contains('\r'));
}

#[test]
fn reals_use_decimal_notation() {
    assert_eq!(format_real(4.123456789012), "4.12345679");
    assert_eq!(format_real(0.0015), "0.00150000000");
    assert_eq!(format_real(12345.678901), "12345.6789");
    assert_eq!(format_real(0.0), "0");
    assert_eq!(format_real(-2.5), "-2.50000000");
}

proptest! {
    #[test]
    fn format_keeps_nine_digits(mantissa in 1.0f64..10.0, exponent in -7i32..15, negative: bool) {
        let x = if negative { -1.0 } else { 1.0 } * mantissa * 10f64.powi(exponent);
        let text = format_real(x);
        prop_assert!(!text.contains('e'), "{}", text);
        let parsed: f64 = text.parse().unwrap();
        let r = rounded(x);
        prop_assert!((parsed - r).abs() <= 1e-12 * r.abs(), "{} -> {} vs {}", x, text, r);
        let digits = text.chars().filter(char::is_ascii_digit).collect::<String>();
        // Integers longer than the precision are written out in full.
        let expected = CSV_DIGITS.max((exponent + 1).max(0) as usize);
        prop_assert_eq!(digits.trim_start_matches('0').len(), expected, "{}", text);
    }
}
