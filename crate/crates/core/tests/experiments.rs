use dirsense::experiments::{
    csv_bytes, epsilon_grid, run_sweep, theta_grid, Baseline, Preset, SweepMode, SweepSpec, SweepVariable,
};
use dirsense::optimizer::SearchConfig;
use dirsense::scenario::Scenario;

fn config() -> SearchConfig {
    SearchConfig {
        grid_phi_t: 9,
        grid_tau: 9,
        ..SearchConfig::default()
    }
}

fn argmax(c: &[f64]) -> usize {
    (0..c.len()).max_by(|&a, &b| c[a].total_cmp(&c[b])).unwrap()
}

#[test]
fn sensing_time_landscape_has_an_interior_maximum() {
    let s = Scenario::default();
    let (lo, hi) = (1.0 / s.frame.f_s, 0.999 * s.frame.t_frame);
    let spec = SweepSpec {
        variable: SweepVariable::Tau,
        values: (0..40).map(|i| lo * (hi / lo).powf(i as f64 / 39.0)).collect(),
        mode: SweepMode::EvaluateOnly,
        baselines: vec![Baseline::Dir],
    };
    let table = run_sweep(&s, &spec, &config()).unwrap();
    let c = table.capacities(Baseline::Dir).unwrap();
    let i = argmax(&c);
    assert!(i > 0 && i < c.len() - 1, "argmax {i}");
}

#[test]
fn landscape_peak_moves_to_shorter_sensing_for_stronger_primaries() {
    let s = Scenario::default();
    let table = Preset::Fig2a.run(&s, &config()).unwrap();
    assert_eq!(table.header[0], "p_p_w");
    let mut peaks = Vec::new();
    for p_p in [0.1, 5.0, 15.0] {
        let rows: Vec<_> = table.series_rows(Some(p_p)).collect();
        assert_eq!(rows.len(), 60);
        // Decisions other than tau are frozen across the sweep.
        assert!(rows.iter().all(|r| r.phi_t == rows[0].phi_t && r.phi_r == rows[0].phi_r));
        assert!(rows.iter().all(|r| r.tau == r.value));
        let c: Vec<f64> = rows.iter().map(|r| r.capacities[0]).collect();
        peaks.push((argmax(&c), c.len()));
    }
    // The weakest primary leaves the frozen orientation facing away from
    // it, and sensing never pays; the peak sits at the shortest time.
    assert_eq!(peaks[0].0, 0);
    for &(i, n) in &peaks[1..] {
        assert!(i > 0 && i < n - 1);
    }
    assert!(peaks[2].0 < peaks[1].0);
}

#[test]
fn presets_are_valid_sweeps() {
    let s = Scenario::default();
    for p in [Preset::Fig2a, Preset::Fig2b, Preset::Fig3a, Preset::Fig3b, Preset::Fig3c, Preset::Fig3d] {
        let (_, spec) = p.build(&s, &config()).unwrap();
        spec.validate(&s).unwrap();
    }
    assert_eq!(theta_grid().len(), 19);
    let eps = epsilon_grid();
    assert_eq!(eps.len(), 20);
    assert!(eps[0] > 0.0 && *eps.last().unwrap() <= 0.5);
}

#[test]
fn sweep_validation() {
    let s = Scenario::default();
    let spec = |values: Vec<f64>, baselines: Vec<Baseline>| SweepSpec {
        variable: SweepVariable::Epsilon,
        values,
        mode: SweepMode::FullReoptimize,
        baselines,
    };
    assert!(spec(vec![], vec![Baseline::Dir]).validate(&s).is_err());
    assert!(spec(vec![0.1, 0.1], vec![Baseline::Dir]).validate(&s).is_err());
    assert!(spec(vec![0.1, 0.3, 0.2], vec![Baseline::Dir]).validate(&s).is_err());
    assert!(spec(vec![0.0, 0.1], vec![Baseline::Dir]).validate(&s).is_err());
    assert!(spec(vec![0.1], vec![]).validate(&s).is_err());
    assert!(spec(vec![0.1], vec![Baseline::Dir, Baseline::Dir]).validate(&s).is_err());
    assert!(spec(vec![0.3, 0.1], vec![Baseline::Los]).validate(&s).is_ok());
}

#[test]
fn reoptimized_rows_match_direct_optimization() {
    let s = Scenario::default();
    let spec = SweepSpec {
        variable: SweepVariable::PPk,
        values: vec![6.0, 8.0],
        mode: SweepMode::FullReoptimize,
        baselines: vec![Baseline::Dir, Baseline::Omni],
    };
    let table = run_sweep(&s, &spec, &config()).unwrap();
    for row in &table.rows {
        let scenario = SweepVariable::PPk.apply(&s, row.value).unwrap();
        let dir = dirsense::optimizer::optimize(&scenario, &config()).unwrap();
        let omni = dirsense::optimizer::optimize_omni(&scenario, &config()).unwrap();
        assert_eq!(row.capacities, vec![dir.c_opt, omni.c_opt]);
        assert_eq!(row.gamma_d2o, Some(dir.c_opt / omni.c_opt));
        assert_eq!((row.tau, row.phi_t, row.power), (dir.tau_opt, dir.phi_t_opt, dir.p_opt));
    }
    let again = run_sweep(&s, &spec, &config()).unwrap();
    assert_eq!(csv_bytes(&table).unwrap(), csv_bytes(&again).unwrap());
}
