//! Command implementations. Each writes its manifest first, then its
//! outputs, then finalizes the manifest with checksums.

use std::path::Path;

use phytospde_core::diagnostics::estimates::{
    estimate_conv_bounds, estimate_drift_constants, estimate_lipschitz_hs,
    estimate_semigroup_db_bound, EstimateContext,
};
use phytospde_core::diagnostics::{convergence_in_n, EstimateReport};
use phytospde_core::noise::hs_embedding_check;
use phytospde_core::semigroup::verify_smoothing;
use phytospde_core::solver::{picard_solve, simulate, ConditionConstants};
use phytospde_core::{ApproxCoefficient, KernelSpec, NoisePath};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::ensemble::{run_ensemble, EnsembleOptions};
use crate::io::{
    fmt_f64, read_table, write_json, write_snapshot, write_table, write_timeseries, IoError,
    OutputKind, OutputRecord, Table,
};
use crate::manifest::RunManifest;

/// What a command produced.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandOutput {
    pub records: Vec<OutputRecord>,
    /// Human-readable lines for the terminal.
    pub summary: Vec<String>,
    pub success: bool,
}

struct Outputs<'a> {
    dir: &'a Path,
    records: Vec<OutputRecord>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Self {
        Self {
            dir,
            records: Vec::new(),
        }
    }

    fn record(&mut self, kind: OutputKind, rel: &str) -> Result<(), IoError> {
        self.records.push(OutputRecord::of(kind, self.dir, rel)?);
        Ok(())
    }

    fn table(&mut self, kind: OutputKind, rel: &str, table: &Table) -> Result<(), IoError> {
        write_table(table, &self.dir.join(rel))?;
        self.record(kind, rel)
    }

    fn json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<(), IoError> {
        write_json(value, &self.dir.join(rel))?;
        self.record(OutputKind::Report, rel)
    }
}

/// Runs `body` between writing and finalizing the manifest.
fn with_manifest(
    command: &str,
    options: Value,
    rc: &RunConfig,
    out_dir: &Path,
    body: impl FnOnce(&mut Outputs) -> anyhow::Result<(Vec<String>, bool)>,
) -> anyhow::Result<CommandOutput> {
    std::fs::create_dir_all(out_dir)?;
    let mut manifest = RunManifest::begin(command, options, &rc.doc, out_dir)?;
    let mut outputs = Outputs::new(out_dir);
    let result = body(&mut outputs);
    let status = match &result {
        Ok((_, true)) => Ok(()),
        Ok((_, false)) => Err("checks failed".to_string()),
        Err(e) => Err(e.to_string()),
    };
    manifest.finish(status, outputs.records.clone(), out_dir)?;
    let (summary, success) = result?;
    Ok(CommandOutput {
        records: outputs.records,
        summary,
        success,
    })
}

pub fn simulate_command(rc: &RunConfig, out_dir: &Path) -> anyhow::Result<CommandOutput> {
    with_manifest("simulate", Value::Null, rc, out_dir, |out| {
        let traj = simulate(&rc.solver)?;
        write_timeseries(&traj, &out.dir.join("timeseries.csv"))?;
        out.record(OutputKind::Timeseries, "timeseries.csv")?;
        for (i, (f, t)) in traj.snapshots.iter().zip(&traj.snapshot_times).enumerate() {
            let rel = format!("snapshots/snap_{i:05}.txt");
            write_snapshot(f, *t, &out.dir.join(&rel))?;
            out.record(OutputKind::Snapshot, &rel)?;
        }
        let last = traj.times.len() - 1;
        Ok((
            vec![format!(
                "simulated {} steps: mass {} -> {}, positivity {}",
                traj.steps(),
                fmt_f64(traj.mass[0]),
                fmt_f64(traj.mass[last]),
                traj.positivity[last]
            )],
            true,
        ))
    })
}

pub fn picard_command(rc: &RunConfig, out_dir: &Path, iterations: usize, tol: f64) -> anyhow::Result<CommandOutput> {
    let options = json!({"iterations": iterations, "tol": tol});
    with_manifest("picard", options, rc, out_dir, |out| {
        let cfg = &rc.solver;
        let path = NoisePath::generate(cfg.noise, *cfg.grid(), cfg.dt, cfg.steps())?;
        let res = picard_solve(cfg, &path, iterations, tol)?;
        let mut t = Table::new(&["iteration", "h", "ratio"]);
        for e in &res.log {
            t.push(vec![e.iteration as f64, e.h, e.ratio.unwrap_or(f64::NAN)]);
        }
        out.table(OutputKind::Table, "picard_log.csv", &t)?;
        let last = res.path.last().expect("initial state present");
        write_snapshot(last, *res.times.last().expect("times"), &out.dir.join("picard_final.txt"))?;
        out.record(OutputKind::Snapshot, "picard_final.txt")?;
        let mut lines: Vec<String> = res
            .log
            .iter()
            .map(|e| format!("iteration {} h {}", e.iteration, fmt_f64(e.h)))
            .collect();
        lines.push(format!(
            "status {:?}, {} strictly decreasing steps",
            res.status,
            res.monotone_decreases()
        ));
        Ok((lines, !matches!(res.status, phytospde_core::solver::PicardStatus::Diverged { .. })))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReportRecord<'a> {
    pub name: &'a str,
    pub empirical_constant: f64,
    pub trials: usize,
    pub bound: Option<f64>,
    pub violations: usize,
    pub passed: bool,
    pub witness_scalars: &'a [f64],
    pub witness_u: &'a [f64],
    pub witness_v: &'a [f64],
}

impl<'a> From<&'a EstimateReport> for ReportRecord<'a> {
    fn from(r: &'a EstimateReport) -> Self {
        Self {
            name: &r.name,
            empirical_constant: r.empirical_constant,
            trials: r.trials,
            bound: r.bound,
            violations: r.violations,
            passed: r.passed,
            witness_scalars: &r.witness.scalars,
            witness_u: &r.witness.u,
            witness_v: &r.witness.v,
        }
    }
}

/// Log-spaced times in `[1e-4, 1]`.
pub fn smoothing_times() -> Vec<f64> {
    (0..=16).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect()
}

/// All estimate suites on the configured grid.
pub fn estimate_suite(rc: &RunConfig, trials: usize, seed: u64, radius: f64) -> anyhow::Result<Vec<EstimateReport>> {
    let cfg = &rc.solver;
    let basis = cfg.basis()?;
    let kernel = match &cfg.params.kernel {
        Some(k) => k.clone(),
        None => KernelSpec::new(rc.doc.r0, rc.doc.r1, *cfg.grid())?,
    };
    let ctx = EstimateContext::new(&basis, &kernel)?;
    let coef = ApproxCoefficient::with_fix(rc.doc.n_approx, rc.doc.lambda, rc.doc.continuity_fix)?;
    let mut reports = vec![verify_smoothing(&basis, &smoothing_times(), trials, seed)?];
    let drift = estimate_drift_constants(&ctx, trials.max(100), radius, seed)?;
    reports.push(drift.m);
    reports.push(drift.q);
    reports.extend(estimate_conv_bounds(&ctx, trials, seed));
    reports.push(estimate_semigroup_db_bound(&basis, &smoothing_times(), trials, seed)?);
    reports.push(estimate_lipschitz_hs(&basis, &coef, trials, seed)?);
    reports.push(hs_embedding_check(cfg.grid().length(), 1_000_000)?);
    Ok(reports)
}

pub fn verify_estimates_command(
    rc: &RunConfig,
    out_dir: &Path,
    trials: usize,
    radius: f64,
) -> anyhow::Result<CommandOutput> {
    let seed = rc.doc.seed;
    let options = json!({"trials": trials, "radius": radius});
    with_manifest("verify-estimates", options, rc, out_dir, |out| {
        let reports = estimate_suite(rc, trials, seed, radius)?;
        let mut lines = Vec::new();
        for r in &reports {
            out.json(&format!("reports/{}.json", r.name), &ReportRecord::from(r))?;
            lines.push(format!(
                "{:<22} {} bound {} violations {} {}",
                r.name,
                fmt_f64(r.empirical_constant),
                r.bound.map(fmt_f64).unwrap_or_else(|| "-".into()),
                r.violations,
                if r.passed { "PASS" } else { "FAIL" }
            ));
        }
        let constants = ConditionConstants::from_reports(&reports)?;
        let horizon = constants.largest_dyadic_horizon(radius, 30);
        out.json(
            "reports/condition_t.json",
            &json!({
                "M": constants.m, "C": constants.c, "C1": constants.c1, "K": constants.k,
                "R": radius, "largest_dyadic_horizon": horizon,
                "value_at_horizon": horizon.map(|t| constants.value(radius, t)),
            }),
        )?;
        lines.push(format!(
            "condition on T below 1/2 up to T = {}",
            horizon.map(fmt_f64).unwrap_or_else(|| "none".into())
        ));
        let passed = reports.iter().all(|r| r.passed);
        lines.push(format!(
            "{} of {} estimates passed",
            reports.iter().filter(|r| r.passed).count(),
            reports.len()
        ));
        Ok((lines, passed))
    })
}

pub fn converge_n_command(rc: &RunConfig, out_dir: &Path, n_list: &[u32]) -> anyhow::Result<CommandOutput> {
    let options = json!({"n_list": n_list});
    with_manifest("converge-n", options, rc, out_dir, |out| {
        let table = convergence_in_n(&rc.solver, n_list)?;
        let mut t = Table::new(&["n_a", "n_b", "distance"]);
        for a in 0..n_list.len() {
            for b in a + 1..n_list.len() {
                t.push(vec![n_list[a] as f64, n_list[b] as f64, table.distance(a, b)]);
            }
        }
        out.table(OutputKind::Table, "converge_n.csv", &t)?;
        let mut lines: Vec<String> = table
            .successive()
            .iter()
            .zip(n_list.windows(2))
            .map(|(d, w)| {
                let gap = (rc.doc.lambda).sqrt() / (4.0 * (w[0] as f64).sqrt());
                format!("d({}, {}) = {}  sup-gap {}", w[0], w[1], fmt_f64(*d), fmt_f64(gap))
            })
            .collect();
        lines.push(format!(
            "decreasing: {} (strictly: {})",
            table.decreasing_until_equal(),
            table.strictly_decreasing()
        ));
        Ok((lines, true))
    })
}

pub fn ensemble_command(rc: &RunConfig, out_dir: &Path, members: usize, workers: usize) -> anyhow::Result<CommandOutput> {
    let options = json!({"members": members});
    with_manifest("ensemble", options, rc, out_dir, |out| {
        let res = run_ensemble(&rc.solver, &EnsembleOptions::new(members, workers))
            .map_err(anyhow::Error::msg)?;
        out.table(OutputKind::Table, "ensemble.csv", &res.table())?;
        out.json("ensemble_summary.json", &res.summary)?;
        let s = &res.summary;
        let mut lines = vec![format!(
            "mass drift {} +- {} over {} members ({} sigma)",
            fmt_f64(s.mass_drift.mean),
            fmt_f64(s.mass_drift.standard_error),
            s.mass_drift.count,
            s.mass_drift.z_score()
        )];
        if let Some(q) = &s.qv_ratio {
            lines.push(format!("qv ratio {} +- {}", fmt_f64(q.mean), fmt_f64(q.standard_error)));
        }
        for f in &s.failures {
            lines.push(format!("stream {} failed: {}", f.stream_id, f.message));
        }
        Ok((lines, !res.failed()))
    })
}

/// Two columns: `x value` for a snapshot, `t <column>` for a table.
pub fn plot_data(input: &Path, column: Option<&str>) -> anyhow::Result<String> {
    let head = std::fs::read_to_string(input).map_err(|source| IoError::Io {
        path: input.to_path_buf(),
        source,
    })?;
    let mut text = String::new();
    if head.starts_with("L ") {
        let (field, _) = crate::io::read_snapshot(input, None)?;
        for (x, v) in field.grid().nodes().iter().zip(field.values()) {
            text.push_str(&format!("{} {}\n", fmt_f64(*x), fmt_f64(*v)));
        }
    } else {
        let t = read_table(input)?;
        let name = match column {
            Some(c) => c.to_string(),
            None => t
                .columns
                .get(1)
                .cloned()
                .ok_or_else(|| anyhow::anyhow!("table has a single column"))?,
        };
        let x = t.column(&t.columns[0]).expect("first column");
        let y = t
            .column(&name)
            .ok_or_else(|| anyhow::anyhow!("no column '{name}' in {}", input.display()))?;
        for (a, b) in x.iter().zip(&y) {
            text.push_str(&format!("{} {}\n", fmt_f64(*a), fmt_f64(*b)));
        }
    }
    Ok(text)
}
