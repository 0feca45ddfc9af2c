//! Config-driven experiment runner behind the CLI: executes the simulate,
//! solve and asymptotics sections and writes machine-readable outputs.
//!
//! Every output embeds the SHA-256 of the config file and the effective
//! seed; repeated runs with the same config are byte-identical except for
//! the timestamp line/field.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::asymptotics::{ratio_sweep, sweep_csv, AsymptoticsError};
use crate::config::ExperimentConfig;
use crate::estimate::{
    boundary_laplace_table, default_t_trunc, estimate_finite_ruin_all, estimate_laplace,
    FiniteRuinKind, LaplaceKind, ALL_FINITE_KINDS,
};
use crate::ide::{
    certified_rho, default_h_step, query, residual_stationary, solve_fixed_point, FieldCheckpoint,
    SolveError, SolveKind, SolverBoundary, Table1D, WedgeGrid,
};
use crate::model::{classify_regime, ordering_cross_time, InitialReserves, Regime};
use crate::rng::path_rng;
use crate::simulate::simulate_path;

/// Environment variable overriding the output directory (lowest-priority
/// override; the --out flag wins).
pub const OUT_DIR_ENV: &str = "RUIN2D_OUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Validation(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("{0}")]
    Budget(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl RunError {
    /// Stable process exit code per error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => 2,
            RunError::NonConvergence(_) => 3,
            RunError::Budget(_) => 4,
            RunError::Io { .. } | RunError::Internal(_) => 1,
        }
    }
}

/// Command-line overrides applied on top of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub force: bool,
}

impl Overrides {
    fn seed(&self, config_seed: u64) -> u64 {
        self.seed.unwrap_or(config_seed)
    }

    fn workers(&self, config_workers: usize) -> usize {
        let w = self.workers.unwrap_or(config_workers);
        if w == 0 {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        } else {
            w
        }
    }
}

/// Output directory: --out flag, then RUIN2D_OUT_DIR, then config, then ./out.
pub fn resolve_out_dir(config: &ExperimentConfig, overrides: &Overrides) -> PathBuf {
    if let Some(out) = &overrides.out {
        return out.clone();
    }
    if let Ok(env_dir) = std::env::var(OUT_DIR_ENV) {
        if !env_dir.is_empty() {
            return PathBuf::from(env_dir);
        }
    }
    config
        .output
        .dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn timestamp_unix() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn csv_header(config_hash: &str, seed: u64) -> String {
    format!(
        "# config_hash={config_hash}\n# seed={seed}\n# timestamp={}\n",
        timestamp_unix()
    )
}

fn finite_kind_name(kind: FiniteRuinKind) -> &'static str {
    match kind {
        FiniteRuinKind::Min => "min",
        FiniteRuinKind::MaxSimultaneous => "max_simultaneous",
        FiniteRuinKind::BothEvents => "both_events",
        FiniteRuinKind::Psi1 => "psi1",
        FiniteRuinKind::Psi2 => "psi2",
    }
}

fn regime_name(regime: Regime) -> &'static str {
    match regime {
        Regime::NonDegenerate => "non_degenerate",
        Regime::DegenerateMinIsPsi2MaxIsPsi1 => "degenerate",
    }
}

#[derive(Debug, Serialize)]
struct FiniteRuinRow {
    u1: f64,
    u2: f64,
    horizon: f64,
    regime: &'static str,
    kind: &'static str,
    #[serde(flatten)]
    report: crate::report::EstimateReport,
}

#[derive(Debug, Serialize)]
struct JsonEnvelope<T: Serialize> {
    config_hash: String,
    seed: u64,
    timestamp_unix: u64,
    rows: T,
}

/// Finite-horizon ruin estimation over all configured reserve pairs and
/// horizons; writes finite_ruin.csv/.json and optional path dumps.
pub fn run_simulate(
    config: &ExperimentConfig,
    config_hash: &str,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, RunError> {
    let sim = config
        .simulate
        .as_ref()
        .ok_or_else(|| RunError::Validation("config has no [simulate] section".into()))?;
    let seed = overrides.seed(sim.seed);
    let workers = overrides.workers(sim.workers);
    let out_dir = resolve_out_dir(config, overrides);

    let mut rows = Vec::new();
    for &[u1, u2] in &sim.reserves {
        let reserves = InitialReserves { u1, u2 };
        let regime = classify_regime(&config.model, &reserves);
        for &horizon in &sim.horizons {
            let all = estimate_finite_ruin_all(
                &config.model,
                &reserves,
                &config.claim,
                horizon,
                sim.n,
                seed,
                workers,
            );
            if regime == Regime::DegenerateMinIsPsi2MaxIsPsi1 {
                // the ordering never crosses: first ruin is component 2's and
                // simultaneous ruin is component 1's, exactly per path
                let min = &all[0];
                let psi2 = &all[4];
                let max_sim = &all[1];
                let psi1 = &all[3];
                if min.estimate != psi2.estimate || max_sim.estimate != psi1.estimate {
                    return Err(RunError::Internal(format!(
                        "degenerate-regime reduction violated at u=({u1}, {u2}): \
                         min={} psi2={} max={} psi1={}",
                        min.estimate, psi2.estimate, max_sim.estimate, psi1.estimate
                    )));
                }
            }
            for (kind, report) in ALL_FINITE_KINDS.iter().zip(all) {
                rows.push(FiniteRuinRow {
                    u1,
                    u2,
                    horizon,
                    regime: regime_name(regime),
                    kind: finite_kind_name(*kind),
                    report,
                });
            }
        }
    }

    let mut csv = csv_header(config_hash, seed);
    csv.push_str("u1,u2,horizon,regime,kind,estimate,std_error,ci_lo,ci_hi,n_samples,seed\n");
    for row in &rows {
        let r = &row.report;
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            row.u1,
            row.u2,
            row.horizon,
            row.regime,
            row.kind,
            r.estimate,
            r.std_error,
            r.ci95.0,
            r.ci95.1,
            r.n_samples,
            r.seed
        ));
    }
    let csv_path = out_dir.join("finite_ruin.csv");
    write_file(&csv_path, &csv)?;

    let json = serde_json::to_string_pretty(&JsonEnvelope {
        config_hash: config_hash.to_string(),
        seed,
        timestamp_unix: timestamp_unix(),
        rows: &rows,
    })
    .map_err(|e| RunError::Internal(e.to_string()))?;
    let json_path = out_dir.join("finite_ruin.json");
    write_file(&json_path, &json)?;

    let mut written = vec![csv_path, json_path];
    if sim.dump_paths > 0 {
        let mut dump = csv_header(config_hash, seed);
        dump.push_str("path,event,time,claim,u1_post,u2_post\n");
        let mut summary = csv_header(config_hash, seed);
        summary.push_str("path,tau1,tau2,t_min,t_max\n");
        let reserves = InitialReserves {
            u1: sim.reserves[0][0],
            u2: sim.reserves[0][1],
        };
        let horizon = sim.horizons[0];
        for index in 0..sim.dump_paths as u64 {
            let mut rng = path_rng(seed, index);
            let path = simulate_path(&config.model, &reserves, horizon, &config.claim, &mut rng);
            for (k, (&t, (&z, &(a, b)))) in path
                .arrivals
                .iter()
                .zip(path.claims.iter().zip(path.reserves.iter()))
                .enumerate()
            {
                dump.push_str(&format!("{index},{k},{t},{z},{a},{b}\n"));
            }
            let times = path.times;
            summary.push_str(&format!(
                "{index},{},{},{},{}\n",
                times.tau1, times.tau2, times.t_min, times.t_max
            ));
        }
        let dump_path = out_dir.join("paths.csv");
        write_file(&dump_path, &dump)?;
        let summary_path = out_dir.join("path_summary.csv");
        write_file(&summary_path, &summary)?;
        written.push(dump_path);
        written.push(summary_path);
    }
    Ok(written)
}

#[derive(Debug, Serialize)]
struct ProbeRow {
    u1: f64,
    u2: f64,
    solver_value: f64,
    mc_estimate: f64,
    mc_std_error: f64,
    abs_diff: f64,
    allowance: f64,
    pass: bool,
}

#[derive(Debug, Serialize)]
struct SolveSummary {
    config_hash: String,
    seed: u64,
    timestamp_unix: u64,
    kind: SolveKind,
    s: f64,
    vmax: f64,
    n_nodes: usize,
    h_step: f64,
    certified_rho: f64,
    iterations: usize,
    sup_diffs: Vec<f64>,
    measured_ratios: Vec<f64>,
    boundary_max_std_error: f64,
    residual_sup_norm: f64,
    probes: Vec<ProbeRow>,
}

/// Solve the integro-differential fixed-point problem: MC boundary tables,
/// contraction iteration, stationary residual, checkpoint, and a
/// solver-vs-MC probe table.
pub fn run_solve(
    config: &ExperimentConfig,
    config_hash: &str,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, RunError> {
    let solve = config
        .solve
        .as_ref()
        .ok_or_else(|| RunError::Validation("config has no [solve] section".into()))?;
    let seed = overrides.seed(solve.seed);
    let workers = overrides.workers(solve.workers);
    let out_dir = resolve_out_dir(config, overrides);
    let params = &config.model;
    let claim = &config.claim;
    let s = solve.s;
    let t_trunc = default_t_trunc(s, solve.bias_budget);

    let grid = WedgeGrid::new(solve.vmax, solve.n_nodes)
        .map_err(|e| RunError::Validation(e.to_string()))?;
    let spacing = solve.boundary_spacing.unwrap_or_else(|| grid.h());
    let n_pts = (solve.vmax / spacing).ceil() as usize + 1;
    let points: Vec<f64> = (0..n_pts)
        .map(|k| (k as f64 * spacing).min(solve.vmax))
        .collect();

    let table = |kind: LaplaceKind, tag: u64| -> Result<(Table1D, f64), RunError> {
        let rows = boundary_laplace_table(
            params,
            claim,
            s,
            kind,
            &points,
            solve.boundary_n,
            t_trunc,
            solve.bias_budget,
            seed ^ tag,
            workers,
        )
        .map_err(|e| RunError::Validation(e.to_string()))?;
        let max_se = rows
            .iter()
            .map(|(_, rep)| rep.std_error)
            .fold(0.0, f64::max);
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            rows.iter().map(|(v, rep)| (*v, rep.estimate)).unzip();
        let t = Table1D::new(xs, ys).map_err(|e| RunError::Internal(e.to_string()))?;
        Ok((t, max_se))
    };

    // diagonal Dirichlet data: on v1 = v2 the joint ruin times reduce to the
    // component that the kind singles out; the Max mixed region is populated
    // from univariate tables as a documented modeling closure
    let (boundary, boundary_max_se) = match solve.kind {
        SolveKind::Min => {
            let (diag, se) = table(LaplaceKind::Tau2, 0xd1a6)?;
            (SolverBoundary::for_min(diag), se)
        }
        SolveKind::Max => {
            let (diag, se1) = table(LaplaceKind::Tau1, 0xd1a6)?;
            let (comp1, se2) = table(LaplaceKind::Tau2, 0xc105e1)?;
            let (comp2, se3) = table(LaplaceKind::Tau1, 0xc105e2)?;
            (
                SolverBoundary::for_max(diag, comp1, comp2),
                se1.max(se2).max(se3),
            )
        }
    };

    let h_step = solve
        .h_step
        .unwrap_or_else(|| default_h_step(params, s, 0.7));
    let field = solve_fixed_point(
        params,
        claim,
        s,
        grid,
        &boundary,
        solve.kind,
        h_step,
        solve.tol,
        solve.max_iter,
    )
    .map_err(|e| match e {
        SolveError::MaxIterationsExceeded(_, _) => RunError::NonConvergence(e.to_string()),
        other => RunError::Validation(other.to_string()),
    })?;

    let residual = residual_stationary(&field, params, claim, s, &boundary, solve.kind, 2);

    let mut probes = Vec::new();
    for &[u1, u2] in &solve.probes {
        let solver_value = query(&field, params, u1, u2)
            .map_err(|e| RunError::Validation(format!("probe ({u1}, {u2}): {e}")))?;
        let mc_kind = match solve.kind {
            SolveKind::Min => LaplaceKind::Min,
            SolveKind::Max => LaplaceKind::MaxSimultaneous,
        };
        let mc = estimate_laplace(
            params,
            &InitialReserves { u1, u2 },
            claim,
            s,
            mc_kind,
            solve.probe_n,
            t_trunc,
            solve.bias_budget,
            seed,
            workers,
        )
        .map_err(|e| RunError::Validation(e.to_string()))?;
        let abs_diff = (solver_value - mc.estimate).abs();
        let allowance = 2.0 * mc.std_error + solve.tol + 2.0 * grid.h();
        probes.push(ProbeRow {
            u1,
            u2,
            solver_value,
            mc_estimate: mc.estimate,
            mc_std_error: mc.std_error,
            abs_diff,
            allowance,
            pass: abs_diff <= allowance,
        });
    }

    let kind_tag = match solve.kind {
        SolveKind::Min => "min",
        SolveKind::Max => "max",
    };
    let ckpt_path = out_dir.join(format!("field_{kind_tag}.json"));
    if let Some(parent) = ckpt_path.parent() {
        std::fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    FieldCheckpoint {
        params: *params,
        claim: claim.clone(),
        s,
        kind: solve.kind,
        boundary,
        field: field.clone(),
    }
    .write(&ckpt_path)
    .map_err(|e| RunError::Internal(e.to_string()))?;

    let summary = SolveSummary {
        config_hash: config_hash.to_string(),
        seed,
        timestamp_unix: timestamp_unix(),
        kind: solve.kind,
        s,
        vmax: solve.vmax,
        n_nodes: solve.n_nodes,
        h_step,
        certified_rho: certified_rho(params, s, h_step),
        iterations: field.meta.iterations,
        sup_diffs: field.meta.sup_diffs.clone(),
        measured_ratios: field.meta.ratios.clone(),
        boundary_max_std_error: boundary_max_se,
        residual_sup_norm: residual.sup_norm,
        probes,
    };
    let summary_path = out_dir.join(format!("solve_{kind_tag}.json"));
    write_file(
        &summary_path,
        &serde_json::to_string_pretty(&summary).map_err(|e| RunError::Internal(e.to_string()))?,
    )?;

    let mut probe_csv = csv_header(config_hash, seed);
    probe_csv
        .push_str("u1,u2,solver_value,mc_estimate,mc_std_error,abs_diff,allowance,pass\n");
    for p in &summary.probes {
        probe_csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.u1,
            p.u2,
            p.solver_value,
            p.mc_estimate,
            p.mc_std_error,
            p.abs_diff,
            p.allowance,
            p.pass
        ));
    }
    let probes_path = out_dir.join(format!("probes_{kind_tag}.csv"));
    write_file(&probes_path, &probe_csv)?;

    Ok(vec![ckpt_path, summary_path, probes_path])
}

/// Heavy-tail ratio sweep; refuses non-regularly-varying claims unless
/// forced, in which case every row carries hypothesis_met=false.
pub fn run_asymptotics(
    config: &ExperimentConfig,
    config_hash: &str,
    overrides: &Overrides,
) -> Result<Vec<PathBuf>, RunError> {
    let asy = config
        .asymptotics
        .as_ref()
        .ok_or_else(|| RunError::Validation("config has no [asymptotics] section".into()))?;
    if config.claim.as_reg_varying().is_none() && !overrides.force {
        return Err(RunError::Validation(
            "claim family is not regularly varying, so the heavy-tail approximation hypothesis \
             is not met; pass --force to run anyway (rows will be flagged out-of-hypothesis)"
                .into(),
        ));
    }
    let seed = overrides.seed(asy.seed);
    let workers = overrides.workers(asy.workers);
    let out_dir = resolve_out_dir(config, overrides);
    let grid: Vec<(f64, f64)> = asy.grid.iter().map(|p| (p[0], p[1])).collect();
    let reports = ratio_sweep(
        &config.model,
        &config.claim,
        &grid,
        asy.horizon,
        asy.kind,
        asy.n,
        seed,
        workers,
        asy.regime_threshold,
    )
    .map_err(|e| match e {
        AsymptoticsError::Budget { .. } => RunError::Budget(e.to_string()),
        other => RunError::Validation(other.to_string()),
    })?;

    let mut csv = csv_header(config_hash, seed);
    csv.push_str(&sweep_csv(&reports, asy.kind));
    let csv_path = out_dir.join("sweep.csv");
    write_file(&csv_path, &csv)?;

    let json = serde_json::to_string_pretty(&JsonEnvelope {
        config_hash: config_hash.to_string(),
        seed,
        timestamp_unix: timestamp_unix(),
        rows: &reports,
    })
    .map_err(|e| RunError::Internal(e.to_string()))?;
    let json_path = out_dir.join("sweep.json");
    write_file(&json_path, &json)?;
    Ok(vec![csv_path, json_path])
}

/// Human-readable validation summary for validate-config.
pub fn describe_config(config: &ExperimentConfig, config_hash: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("config hash: {config_hash}\n"));
    let p = &config.model;
    out.push_str(&format!(
        "model: r={} lambda={} c=({}, {}) delta=({}, {})\n",
        p.r, p.lambda, p.c1, p.c2, p.delta1, p.delta2
    ));
    out.push_str(&format!(
        "normalized premia: p1={:.6} p2={:.6}\n",
        p.p1(),
        p.p2()
    ));
    match &config.claim {
        crate::claims::ClaimDistribution::Exponential { mean } => {
            out.push_str(&format!("claims: exponential, mean {mean}\n"));
        }
        crate::claims::ClaimDistribution::RegVarying(rv) => {
            out.push_str(&format!(
                "claims: regularly varying, alpha={} beta={} splice={:.6}\n",
                rv.alpha,
                rv.beta,
                rv.splice_point()
            ));
        }
    }
    if let Some(sim) = &config.simulate {
        out.push_str(&format!(
            "simulate: {} reserve pair(s) x {} horizon(s), n={}\n",
            sim.reserves.len(),
            sim.horizons.len(),
            sim.n
        ));
        for &[u1, u2] in &sim.reserves {
            let reserves = InitialReserves { u1, u2 };
            let regime = classify_regime(p, &reserves);
            let cross = ordering_cross_time(p, &reserves);
            out.push_str(&format!(
                "  u=({u1}, {u2}): {} regime, ordering cross time {}\n",
                regime_name(regime),
                cross
            ));
        }
    }
    if let Some(solve) = &config.solve {
        let h = solve
            .h_step
            .unwrap_or_else(|| default_h_step(p, solve.s, 0.7));
        out.push_str(&format!(
            "solve: kind={:?} s={} grid {}x{} (vmax={}), h_step={:.6}, certified rho={:.6}\n",
            solve.kind,
            solve.s,
            solve.n_nodes,
            solve.n_nodes,
            solve.vmax,
            h,
            certified_rho(p, solve.s, h)
        ));
    }
    if let Some(asy) = &config.asymptotics {
        out.push_str(&format!(
            "asymptotics: kind={:?}, {} sweep point(s), horizon={}, n={}\n",
            asy.kind,
            asy.grid.len(),
            asy.horizon,
            asy.n
        ));
    }
    out.push_str("config is valid\n");
    out
}
