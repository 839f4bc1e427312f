//! Cross-module checks on the full pipelines.

use kerr_cavity::compare::{compare, CompareOptions};
use kerr_cavity::cumulant::{cumulant_sweep, integrate_cumulant, CorrelationState, MomentSweepOptions};
use kerr_cavity::dynamics::{uniform_roots, SettleOptions};
use kerr_cavity::lindblad::{
    build_generator, min_eigenvalue, observables, steady_state_direct, steady_state_from, vacuum, FockConfig,
};
use kerr_cavity::model::PUMP;
use kerr_cavity::phase_diagram::{ep_band, sweep, Cut, Region, SweepOptions};
use kerr_cavity::SystemParams;

#[test]
fn single_mode_oracle_converges_in_cutoff() {
    for om in [2.0, 3.3, 5.0] {
        let p = SystemParams::equally_spaced(5.0, -1.0, om);
        let a = steady_state_direct(&p, &FockConfig::new(1, 30).unwrap()).unwrap();
        let b = steady_state_direct(&p, &FockConfig::new(1, 34).unwrap()).unwrap();
        let ga = build_generator(&p, &FockConfig::new(1, 30).unwrap()).unwrap();
        let gb = build_generator(&p, &FockConfig::new(1, 34).unwrap()).unwrap();
        let (x, y) = (observables(&a.rho, &ga), observables(&b.rho, &gb));
        assert!((x - y).norm() < 1e-4, "Omega={om}");
        assert!(min_eigenvalue(&a.rho) > -1e-8);
        assert!((a.rho.trace().re - 1.0).abs() < 1e-9);
    }
}

#[test]
fn trace_is_preserved_by_time_stepping() {
    let p = SystemParams::equally_spaced(5.0, -1.0, 1.0);
    let f = FockConfig::new(1, 8).unwrap();
    let g = build_generator(&p, &f).unwrap();
    let ss = steady_state_from(&g, &vacuum(&f), 100.0, 1e-3).unwrap();
    assert!(ss.trace_error < 1e-8);
    assert!(min_eigenvalue(&ss.rho) > -1e-8);
}

#[test]
fn weak_drive_three_mode_oracle_matches_closure() {
    let p = SystemParams::equally_spaced(5.0, -1.0, 0.2);
    let f = FockConfig::new(3, 5).unwrap();
    assert_eq!(f.dim(), 216);
    let g = build_generator(&p, &f).unwrap();
    let ss = steady_state_from(&g, &vacuum(&f), 200.0, g.suggested_dt()).unwrap();
    let exact = observables(&ss.rho, &g);
    let tr = integrate_cumulant(&p, &CorrelationState::VACUUM, 60.0, 2e-3).unwrap();
    let closed = tr.states.last().unwrap();
    let (n2e, n2c) = (exact.population(PUMP), closed.population(PUMP));
    assert!(((n2c - n2e) / n2e).abs() < 0.02, "{n2c} vs {n2e}");
    assert!((closed.population(0) - exact.population(0)).abs() < 1e-3);
    assert!((closed.anomalous_at(0, 2).norm() - exact.anomalous_at(0, 2).norm()).abs() < 1e-3);
}

#[test]
fn negative_detuning_closure_stays_near_meanfield() {
    let p = SystemParams::equally_spaced(-5.0, -1.0, 3.0);
    let tr = integrate_cumulant(&p, &CorrelationState::VACUUM, 60.0, 2e-3).unwrap();
    let last = tr.states.last().unwrap();
    let mf = uniform_roots(&p);
    assert_eq!(mf.len(), 1);
    assert!((last.population(PUMP) - mf[0].n2).abs() < 0.05 * mf[0].n2);
    for s in &tr.states {
        for m in 0..3 {
            assert!(s.normal[kerr_cavity::cumulant::pair_index(m, m)].im.abs() < 1e-10);
        }
    }
    let rows = cumulant_sweep(&p, &[1.0, 2.0, 3.0, 4.0], &MomentSweepOptions { t_end: 60.0, ..Default::default() }).unwrap();
    for r in rows {
        assert!(!r.oscillating);
        assert!(r.n[0] > 0.0 && r.n[0] < 0.01 && r.abs_a13 < 0.05, "{r:?}");
    }
}

#[test]
fn linear_closure_loses_connected_correlations() {
    let p = SystemParams::equally_spaced(1.0, 0.0, 2.0);
    let mut c0 = CorrelationState::VACUUM;
    c0.normal[3].re = 1.5;
    c0.anomalous[2] = kerr_cavity::C64::new(0.4, -0.3);
    let tr = integrate_cumulant(&p, &c0, 30.0, 1e-2).unwrap();
    let s = tr.states.last().unwrap();
    let coherent = CorrelationState::coherent(&s.means());
    assert!((*s - coherent).norm() < 1e-10);
}

#[test]
fn benchmark_labels_survive_doubling_the_census() {
    let p = SystemParams::equally_spaced(0.0, -1.0, 0.0);
    let settle = SettleOptions::default();
    let small = SweepOptions { ics_per_point: 50, settle, ..Default::default() };
    let large = SweepOptions { ics_per_point: 100, settle, ..Default::default() };
    let a = sweep(&p, &[-5.0, 5.0], &[0.5, 3.0], &small).unwrap();
    let b = sweep(&p, &[-5.0, 5.0], &[0.5, 3.0], &large).unwrap();
    let labels: Vec<Region> = b.iter().map(|g| g.region).collect();
    assert_eq!(labels, vec![Region::IV, Region::IV, Region::I, Region::II]);
    assert_eq!(a.iter().map(|g| g.region).collect::<Vec<_>>(), labels);
    assert!(b.iter().all(|g| g.stability_consistent));
}

#[test]
fn no_limit_cycles_without_opposite_signs() {
    let p = SystemParams::equally_spaced(0.0, -1.0, 0.0);
    let opts = SweepOptions { ics_per_point: 20, ..Default::default() };
    let res = sweep(&p, &[-4.0, -2.0, 0.0], &[1.0, 2.5, 4.0, 5.5], &opts).unwrap();
    for g in &res {
        assert!(g.region != Region::II && g.region != Region::III, "{g:?}");
    }
}

#[test]
fn sweep_is_deterministic() {
    let p = SystemParams::equally_spaced(0.0, -1.0, 0.0);
    let opts = SweepOptions { ics_per_point: 10, seed: 7, ..Default::default() };
    let a = sweep(&p, &[1.0, 4.0], &[2.0, 3.5], &opts).unwrap();
    let b = sweep(&p, &[1.0, 4.0], &[2.0, 3.5], &opts).unwrap();
    assert_eq!(a, b);
}

#[test]
fn ep_band_is_stable_under_refinement() {
    let p = SystemParams::equally_spaced(0.0, -1.0, 0.5);
    let coarse: Vec<f64> = (0..=100).map(|k| -5.0 + 0.1 * k as f64).collect();
    let fine: Vec<f64> = (0..=200).map(|k| -5.0 + 0.05 * k as f64).collect();
    let a = ep_band(&p, Cut::AlongDelta { omega2: 0.5 }, &coarse).unwrap();
    let b = ep_band(&p, Cut::AlongDelta { omega2: 0.5 }, &fine).unwrap();
    assert_eq!(a.len(), 1);
    assert_eq!(b.len(), 1);
    assert!((a[0].0 - b[0].0).abs() <= 0.1 + 1e-9 && (a[0].1 - b[0].1).abs() <= 0.1 + 1e-9);
}

#[test]
fn compare_rows_outside_window_agree() {
    let p = SystemParams::equally_spaced(5.0, -1.0, 0.0);
    let rows = compare(&p, &[1.0, 5.5], &CompareOptions::default()).unwrap();
    for r in &rows {
        assert!(!r.in_window);
        assert!(r.rel_deviation.unwrap().abs() < 0.05, "{r:?}");
        assert_eq!(r.branches.len(), 1);
        assert!(r.branches[0].stable);
    }
}
