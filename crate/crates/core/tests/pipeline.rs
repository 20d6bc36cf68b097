use phytospde_core::diagnostics::estimates::{
    estimate_drift_constants, estimate_lipschitz_hs, estimate_semigroup_db_bound,
};
use phytospde_core::diagnostics::{convergence_in_n, qv_check, EstimateContext};
use phytospde_core::semigroup::verify_smoothing;
use phytospde_core::solver::{
    picard_solve, simulate, simulate_on_path, ConditionConstants, RecordOptions,
};
use phytospde_core::{
    ApproxCoefficient, Field, KernelSpec, ModelParams, NoisePath, NoiseSpec, SolverConfig,
    SolverMode, SpatialGrid,
};

fn config(lambda: f64, u0: Field) -> SolverConfig {
    let grid = *u0.grid();
    let kernel = KernelSpec::new(0.05, 0.25, grid).unwrap();
    SolverConfig {
        params: ModelParams::new(1.0, lambda, Some(kernel), u0).unwrap(),
        coefficient: ApproxCoefficient::new(16, lambda).unwrap(),
        dt: 1e-3,
        t_end: 0.05,
        modes: grid.cells() / 2,
        noise: NoiseSpec::new(3, 0),
        snapshot_every: 10,
        mode: SolverMode::ExponentialEuler,
        record: RecordOptions::default(),
    }
}

fn bump(grid: SpatialGrid) -> Field {
    Field::from_fn(grid, |x| 1.0 + 0.5 * (std::f64::consts::PI * x).cos()).unwrap()
}

#[test]
fn estimated_horizon_gives_contracting_picard() {
    let grid = SpatialGrid::new(1.0, 64).unwrap();
    let cfg = config(1.0, bump(grid));
    let basis = cfg.basis().unwrap();
    let kernel = cfg.params.kernel.clone().unwrap();
    let ctx = EstimateContext::new(&basis, &kernel).unwrap();
    let radius = simulate(&cfg).unwrap().db_norm.iter().cloned().fold(0.0, f64::max);
    let times: Vec<f64> = (0..9).map(|k| 10f64.powf(-4.0 + 0.5 * k as f64)).collect();
    let reports = vec![
        verify_smoothing(&basis, &times, 100, 1).unwrap(),
        estimate_drift_constants(&ctx, 100, radius, 1).unwrap().m,
        estimate_semigroup_db_bound(&basis, &times, 50, 1).unwrap(),
        estimate_lipschitz_hs(&basis, &cfg.coefficient, 100, 1).unwrap(),
    ];
    let k = ConditionConstants::from_reports(&reports).unwrap();
    let horizon = k.largest_dyadic_horizon(radius, 30).unwrap();
    assert!(k.value(radius, horizon) < 0.5);

    let mut cfg = cfg;
    let steps = ((horizon / cfg.dt).floor() as usize).max(1);
    cfg.t_end = steps as f64 * cfg.dt;
    cfg.snapshot_every = steps;
    let path = NoisePath::generate(cfg.noise, grid, cfg.dt, steps).unwrap();
    let res = picard_solve(&cfg, &path, 6, 0.0).unwrap();
    assert!(res.log.iter().skip(1).all(|e| e.ratio.unwrap() < 1.0), "{:?}", res.log);
}

#[test]
fn picard_fixed_point_is_the_stepper_path() {
    let grid = SpatialGrid::new(1.0, 32).unwrap();
    let mut cfg = config(0.5, bump(grid));
    cfg.t_end = 0.01;
    let path = NoisePath::generate(cfg.noise, grid, cfg.dt, cfg.steps()).unwrap();
    let direct = simulate_on_path(&cfg, &path).unwrap();
    let res = picard_solve(&cfg, &path, 40, 1e-26).unwrap();
    assert!(res.converged(), "{:?}", res.status);
    let a = direct.final_field().unwrap();
    let b = res.path.last().unwrap();
    assert!(a.difference(b).unwrap().sup_norm() < 1e-10);
}

#[test]
fn recorded_martingale_matches_predicted_variation() {
    let grid = SpatialGrid::new(1.0, 64).unwrap();
    let mut cfg = config(1.0, bump(grid));
    cfg.t_end = 0.2;
    cfg.record.martingale = true;
    let ratios: Vec<f64> = (0..20)
        .map(|s| {
            let mut c = cfg.clone();
            c.noise = c.noise.with_stream(s);
            qv_check(&simulate(&c).unwrap(), 0.0).unwrap().ratio
        })
        .collect();
    let m = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((m - 1.0).abs() < 0.05, "{m}");
}

#[test]
fn runs_are_reproducible_per_stream() {
    let grid = SpatialGrid::new(1.0, 32).unwrap();
    let cfg = config(1.0, bump(grid));
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
    let mut other = cfg.clone();
    other.noise = other.noise.with_stream(1);
    assert_ne!(simulate(&other).unwrap().mass, a.mass);
}

#[test]
fn deterministic_mode_ignores_noise() {
    let grid = SpatialGrid::new(1.0, 32).unwrap();
    let mut cfg = config(1.0, bump(grid));
    cfg.mode = SolverMode::Deterministic;
    let a = simulate(&cfg).unwrap();
    cfg.noise = cfg.noise.with_stream(7);
    let b = simulate(&cfg).unwrap();
    assert_eq!(a.mass, b.mass);

    cfg.params.kernel = None;
    let c = simulate(&cfg).unwrap();
    let drift = (c.mass.last().unwrap() - c.mass[0]).abs();
    assert!(drift < 1e-12, "{drift}");
}

#[test]
fn zero_rate_makes_all_approximations_agree() {
    let grid = SpatialGrid::new(1.0, 32).unwrap();
    let cfg = config(0.0, bump(grid));
    let t = convergence_in_n(&cfg, &[1, 4, 16]).unwrap();
    assert!(t.successive().iter().all(|&d| d == 0.0));
    assert!(t.decreasing_until_equal());
}
