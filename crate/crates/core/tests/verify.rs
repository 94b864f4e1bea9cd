mod common;

use std::collections::HashSet;
use std::sync::OnceLock;

use kinlab::collision::{apply_field, apply_matrix, FieldOp, KernelParams};
use kinlab::parallel::run_with_threads;
use kinlab::verify::{
    build_levels, full_suite, lookup, registry, run_check, sample_field, Direction, FieldClass, Level, LevelSpec,
    SuiteReport, TrialSpec, VerifyConfig, VerifyGrids,
};
use kinlab::Error;

/// Coarse suite: one resolution, three trials.
fn small_config() -> VerifyConfig {
    VerifyConfig {
        trials: TrialSpec { seed: 9, n_trials: 3, ..TrialSpec::default() },
        grids: VerifyGrids {
            half_width: 5.0,
            sphere_nodes: 14,
            base: LevelSpec { x_points: 8, v_points: 6 },
            doubled: None,
            ..VerifyGrids::default()
        },
        ..VerifyConfig::default()
    }
}

fn level() -> &'static Level {
    static L: OnceLock<Level> = OnceLock::new();
    L.get_or_init(|| build_levels(&small_config()).unwrap().0)
}

#[test]
fn registry_is_complete_and_unique() {
    let reg = registry();
    assert_eq!(reg.len(), 15);
    let ids: HashSet<_> = reg.iter().map(|e| e.id).collect();
    assert_eq!(ids.len(), reg.len());
    for e in &reg {
        assert_eq!(lookup(e.id).unwrap(), *e);
        assert!(!e.anchor.is_empty());
        if e.exact {
            assert!(e.pieces.len() >= 2, "{}", e.id);
        }
    }
    assert_eq!(lookup("COERCIVITY").unwrap().direction, Direction::Lower);
    assert_eq!(lookup("APRIORI").unwrap().class, FieldClass::Trajectory);
    assert!(matches!(lookup("NOPE"), Err(Error::UnknownCheck(_))));
    assert!(matches!(full_suite(&small_config(), Some(&["NOPE".to_string()])), Err(Error::UnknownCheck(_))));
}

#[test]
fn config_validation() {
    small_config().validate().unwrap();
    let mut c = small_config();
    c.s_trilinear = 2.0;
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.time_samples = 1;
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.trials.n_trials = 0;
    assert!(c.validate().is_err());
    let json = serde_json::to_string(&small_config()).unwrap();
    assert_eq!(serde_json::from_str::<VerifyConfig>(&json).unwrap(), small_config());
    assert!(serde_json::from_str::<VerifyConfig>(r#"{"bands": 3}"#).is_err());
}

#[test]
fn linear_operator_in_span_matches_full_application() {
    let l = level();
    let spec = TrialSpec { seed: 3, ..TrialSpec::default() };
    for trial in 0..3 {
        let f = sample_field(&spec, trial, 0, &l.grid, &l.basis, &l.ops, 3).unwrap();
        let fast = l.apply_l_in_span(&f);
        let full = apply_field(&l.tables, FieldOp::L, &f, None).unwrap();
        let gap = fast.sub(&full).unwrap().coeff_norm() / full.coeff_norm();
        assert!(gap < 1e-12, "trial {trial}: {gap}");
    }
}

#[test]
fn levels_reject_mismatched_specs() {
    let l = level();
    let wrong = LevelSpec { x_points: 16, v_points: 6 };
    let grid = kinlab::lp::FourierGrid::new(1, 8).unwrap();
    let tables = common::small_tables(6, KernelParams::default());
    assert!(Level::new(grid, tables, wrong).is_err());
    assert_eq!(l.velocity().len(), 216);
}

#[test]
fn checks_are_reproducible_and_thread_independent() {
    let cfg = small_config();
    let l = level();
    let a = run_with_threads(Some(1), || run_check("K_BOUND", &cfg, l, None).unwrap()).unwrap();
    let b = run_with_threads(Some(3), || run_check("K_BOUND", &cfg, l, None).unwrap()).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_csv(), b.to_csv());
    let c = run_check("K_BOUND", &VerifyConfig { trials: TrialSpec { seed: 10, ..cfg.trials }, ..cfg }, l, None).unwrap();
    assert_ne!(a.base.trials[0].lhs, c.base.trials[0].lhs);
}

#[test]
fn small_suite_passes_and_serialises() {
    let cfg = small_config();
    let suite = full_suite(&cfg, None).unwrap();
    assert_eq!(suite.reports.len(), 15);
    for r in &suite.reports {
        assert!(r.passed, "{} failed: {:?}", r.id, r.base);
        assert!(r.refined.is_none() && r.refinement_drift.is_none());
        assert_eq!(r.base.x_points, 8);
        assert_eq!(r.base.trials.len() + r.base.skipped, 3);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), 1 + r.base.trials.len());
        assert_eq!(csv.lines().next().unwrap().split(',').count(), 6 + r.piece_labels.len());
        if let Direction::Range { lo, hi } = r.direction {
            assert!(r.base.min_ratio >= lo && r.base.max_ratio <= hi);
        }
    }
    assert!(suite.passed);
    let back: SuiteReport = serde_json::from_str(&suite.to_json().unwrap()).unwrap();
    assert_eq!(back, suite);

    let dir = tempfile::tempdir().unwrap();
    suite.write(dir.path()).unwrap();
    assert!(std::fs::read_dir(dir.path()).unwrap().count() >= 2);

    // one failing entry fails the suite
    let mut reports = suite.reports.clone();
    reports[0].passed = false;
    assert!(!SuiteReport::new(9, 3, reports).passed);
}

#[test]
fn exact_checks_hold_on_every_trial() {
    let cfg = small_config();
    let l = level();
    for id in ["CL_ORDER", "SERIES_CONV", "BERNSTEIN_EQUIV"] {
        let r = run_check(id, &cfg, l, None).unwrap();
        assert!(r.exact && r.passed, "{id}");
        assert_eq!(r.base.violations, 0);
    }
}

#[test]
fn coefficient_route_matches_velocity_grid_route() {
    let l = level();
    let spec = TrialSpec { seed: 21, ..TrialSpec::default() };
    let field = |sub| sample_field(&spec, 0, sub, &l.grid, &l.basis, &l.ops, 3).unwrap();
    let times = [0.0, 0.5, 1.0];
    let traj = |a: u64| {
        let (x, y) = (field(a), field(a + 1));
        l.trajectory(&times, times.iter().map(|t| x.add(&y.scaled(*t)).unwrap()).collect()).unwrap()
    };
    let (f, g, h) = (traj(0), traj(2), traj(4));
    for s in [0.5, 1.5] {
        let full = l.block_pairing(&l.gamma_traj(&f, &g).unwrap(), &h, s).unwrap();
        let fast = l.gamma_pairing(&f, &g, &h, s).unwrap();
        assert!((full - fast).abs() < 1e-10 * full, "s {s}: {full} vs {fast}");
    }
    let (a, b) = (&f.fields()[1], &g.fields()[2]);
    let full = apply_matrix(&l.ops.moment_matrix(), &l.gamma(a, b));
    let fast = l.gamma_moments(a, b);
    assert!(fast.sub(&full).unwrap().coeff_norm() < 1e-10 * full.coeff_norm());
    let m = l.ops.moments(&l.gamma(a, b)).unwrap();
    assert!((m.theta(1, 2).values[[0, 1]] - full.values[[5, 1]]).norm() < 1e-15);
}
