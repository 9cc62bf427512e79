//! Reproducible experiment runs: scenario dispatch, artifact files, and
//! the run record.
//!
//! Every command writes into one run directory. Data artifacts (CSV,
//! JSON) are byte-deterministic for a fixed (config, seed): sample
//! seeds derive from (master seed, stream, index) and all parallel
//! reductions traverse fixed index blocks, so the worker count never
//! changes an output byte. The only file with wall-clock content is
//! `run_record.json`, which is run metadata, not data.
//!
//! CSV columns are fixed: correlation series are exactly
//! `time,re,im,stderr` with a `# config_hash=...` comment line above
//! the header.

use crate::conditions::{condition_report, ConditionSystem};
use crate::config::{ExperimentConfig, SystemParams};
use crate::error::{Error, Result};
use crate::grid::{correlation_map, CharacterSystem};
use crate::modular::ModularPoint;
use crate::observables::discriminant_normalizer;
use crate::rng::{Rng, StreamId};
use crate::spectral::{
    correlation_flow, spectral_diagnostics, CorrelationSeries, EstimatorMeta, FlowSystem,
    L2Verdict, Window,
};
use crate::svg::{line_plot, PlotSpec};
use crate::time_change::{
    integrate_orbit, kushnirenko_verdict, normalize_alpha_with_tol, TimeChange, Tolerances,
};
use crate::twisted::theta_advance;
use num_complex::Complex64;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Everything a command needs to run.
pub struct RunContext {
    pub config: ExperimentConfig,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub tolerances: Tolerances,
}

impl RunContext {
    pub fn new(config: ExperimentConfig, workers: usize, out_dir: PathBuf) -> Self {
        RunContext {
            config,
            workers,
            out_dir,
            tolerances: Tolerances::default(),
        }
    }

    fn hash(&self) -> String {
        self.config.hash()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }

    /// The normalized time change for flow scenarios.
    pub fn alpha(&self) -> Result<TimeChange> {
        match &self.config.system {
            SystemParams::FlowTimechange {
                epsilon,
                observable,
            }
            | SystemParams::FlowTwisted {
                epsilon,
                observable,
                ..
            } => normalize_alpha_with_tol(
                *observable,
                *epsilon,
                self.config.estimator.norm_samples,
                self.config.master_seed,
                self.tolerances,
            ),
            _ => Err(Error::InvalidConfig(
                "scenario has no time-change function".into(),
            )),
        }
    }

    fn character_system(&self) -> Result<CharacterSystem> {
        match &self.config.system {
            SystemParams::Furstenberg(f) => Ok(CharacterSystem::Furstenberg(f.clone())),
            SystemParams::Skew(s) => Ok(CharacterSystem::Skew(s.clone())),
            SystemParams::ControlRotation { rotation, .. } => Ok(CharacterSystem::ControlRotation {
                rotation: *rotation,
            }),
            _ => Err(Error::InvalidConfig(
                "scenario is a flow, not a map system".into(),
            )),
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Update (or create) run_record.json with this command's outcome.
fn update_run_record(
    ctx: &RunContext,
    new_artifacts: &[String],
    caveats: &[String],
    manifest: &BTreeMap<String, f64>,
    started: Instant,
) -> Result<()> {
    let path = ctx.path("run_record.json");
    let mut artifacts: Vec<String> = Vec::new();
    let mut old_manifest: BTreeMap<String, f64> = BTreeMap::new();
    let mut old_caveats: Vec<String> = Vec::new();
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(v) = serde_json::from_str::<Value>(&text) {
            if let Some(list) = v.get("artifacts").and_then(|a| a.as_array()) {
                artifacts = list
                    .iter()
                    .filter_map(|x| x.as_str().map(|s| s.to_string()))
                    .collect();
            }
            if let Some(m) = v.get("manifest").and_then(|m| m.as_object()) {
                for (k, val) in m {
                    if let Some(f) = val.as_f64() {
                        old_manifest.insert(k.clone(), f);
                    }
                }
            }
            if let Some(list) = v.get("caveats").and_then(|a| a.as_array()) {
                old_caveats = list
                    .iter()
                    .filter_map(|x| x.as_str().map(|s| s.to_string()))
                    .collect();
            }
        }
    }
    for a in new_artifacts {
        if !artifacts.contains(a) {
            artifacts.push(a.clone());
        }
    }
    for c in caveats {
        if !old_caveats.contains(c) {
            old_caveats.push(c.clone());
        }
    }
    for (k, v) in manifest {
        old_manifest.insert(k.clone(), *v);
    }
    let record = json!({
        "config_hash": ctx.hash(),
        "code_version": env!("CARGO_PKG_VERSION"),
        "scenario": ctx.config.scenario.name(),
        "wall_time_secs": started.elapsed().as_secs_f64(),
        "artifacts": artifacts,
        "caveats": old_caveats,
        "manifest": old_manifest,
    });
    write_file(&path, serde_json::to_string_pretty(&record)?.as_bytes())?;
    Ok(())
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::IoFailure(format!("json: {e}"))
    }
}

fn csv_header(ctx: &RunContext, columns: &str) -> String {
    format!("# config_hash={}\n{columns}\n", ctx.hash())
}

fn flow_caveats() -> Vec<String> {
    vec![
        "finite-volume extrapolation: the base lattice is non-cocompact; diagnostics are \
         labeled accordingly"
            .to_string(),
        "cusp truncation: Monte Carlo sampling restricted to Im z <= 50 (the observable is \
         exponentially small beyond)"
            .to_string(),
    ]
}

fn flow_manifest(alpha: &TimeChange) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    m.insert("u_max".to_string(), discriminant_normalizer());
    m.insert("alpha_c".to_string(), alpha.c);
    m.insert("alpha_epsilon".to_string(), alpha.epsilon);
    m.insert(
        "alpha_mean_u_stderr".to_string(),
        alpha.normalization.stderr_mean_u,
    );
    m.insert(
        "alpha_positivity_margin".to_string(),
        alpha.positivity_margin,
    );
    // Mass of the hyperbolic measure above the cusp cap, relative to the
    // fundamental-domain mass pi/3: the sampling truncation bias bound.
    m.insert(
        "cusp_truncation_mass_bound".to_string(),
        (1.0 / 50.0) / (std::f64::consts::PI / 3.0),
    );
    m
}

/// `simulate`: write a sampled orbit for inspection.
pub fn cmd_simulate(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let path = ctx.path("orbit.csv");
    let est = &ctx.config.estimator;
    let mut out = String::new();
    let mut caveats = Vec::new();
    let mut manifest = BTreeMap::new();
    match &ctx.config.system {
        SystemParams::Furstenberg(f) => {
            out.push_str(&csv_header(
                ctx,
                &(1..=f.d).map(|i| format!("x{i}")).fold("time".to_string(), |a, b| a + "," + &b),
            ));
            let mut rng = Rng::for_sample(ctx.config.master_seed, StreamId::OrbitInit, 0);
            let mut x: Vec<f64> = (0..f.d).map(|_| rng.next_f64()).collect();
            let map = crate::torus::TorusMap::full(f);
            for n in 0..=est.n_steps.min(4096) {
                let _ = write!(out, "{n}");
                for c in &x {
                    let _ = write!(out, ",{c}");
                }
                out.push('\n');
                map.apply(&mut x);
            }
        }
        SystemParams::Skew(s) => {
            out.push_str(&csv_header(ctx, "time,x,fiber"));
            let mut rng = Rng::for_sample(ctx.config.master_seed, StreamId::OrbitInit, 0);
            let mut x = rng.next_f64();
            let mut fiber = rng.next_f64();
            for n in 0..=est.n_steps.min(4096) {
                let _ = writeln!(out, "{n},{x},{fiber}");
                fiber = (fiber + s.phi_lift(x)).rem_euclid(1.0);
                x = (x + s.rotation).rem_euclid(1.0);
            }
        }
        SystemParams::ControlRotation { rotation, .. } => {
            out.push_str(&csv_header(ctx, "time,x"));
            let mut rng = Rng::for_sample(ctx.config.master_seed, StreamId::OrbitInit, 0);
            let mut x = rng.next_f64();
            for n in 0..=est.n_steps.min(4096) {
                let _ = writeln!(out, "{n},{x}");
                x = (x + rotation).rem_euclid(1.0);
            }
        }
        SystemParams::FlowTimechange { .. } => {
            let alpha = ctx.alpha()?;
            out.push_str(&csv_header(ctx, "time,re_z,im_z,frame_angle"));
            let mut rng = Rng::for_sample(ctx.config.master_seed, StreamId::OrbitInit, 0);
            let x = ModularPoint::sample(&mut rng);
            let n_rows = ((est.t_max / est.dt).round() as usize).min(4096);
            let times: Vec<f64> = (1..=n_rows).map(|i| i as f64 * est.dt).collect();
            let _ = writeln!(out, "0,{},{},{}", x.z.re, x.z.im, x.frame_angle);
            for rec in integrate_orbit(&x, &times, &alpha, &[])? {
                let p = rec.point;
                let _ = writeln!(out, "{},{},{},{}", rec.t, p.z.re, p.z.im, p.frame_angle);
            }
            caveats = flow_caveats();
            manifest = flow_manifest(&alpha);
        }
        SystemParams::FlowTwisted { .. } => {
            let alpha = ctx.alpha()?;
            out.push_str(&csv_header(ctx, "time,re_z,im_z,frame_angle,theta"));
            let mut rng = Rng::for_sample(ctx.config.master_seed, StreamId::OrbitInit, 0);
            let x = ModularPoint::sample(&mut rng);
            let n_rows = ((est.t_max / est.dt).round() as usize).min(4096);
            let mut theta = 0.0f64;
            let mut cur = x;
            let _ = writeln!(out, "0,{},{},{},{theta}", x.z.re, x.z.im, x.frame_angle);
            for i in 1..=n_rows {
                let t = i as f64 * est.dt;
                theta = (theta + theta_advance(&cur, est.dt, &alpha)?).rem_euclid(1.0);
                cur = crate::modular::reduce(&crate::sl2::horocycle(&cur.rep, est.dt))?;
                let _ = writeln!(out, "{t},{},{},{},{theta}", cur.z.re, cur.z.im, cur.frame_angle);
            }
            caveats = flow_caveats();
            manifest = flow_manifest(&alpha);
        }
    }
    write_file(&path, out.as_bytes())?;
    update_run_record(ctx, &["orbit.csv".to_string()], &caveats, &manifest, started)?;
    Ok(vec![path, ctx.path("run_record.json")])
}

fn series_to_csv(ctx: &RunContext, series: &CorrelationSeries) -> String {
    let mut out = csv_header(ctx, "time,re,im,stderr");
    for i in 0..series.times.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            series.times[i], series.values[i].re, series.values[i].im, series.stderr[i]
        );
    }
    out
}

/// Parse a correlation CSV back into a series.
pub fn series_from_csv(text: &str, desc: &str) -> Result<CorrelationSeries> {
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut stderr = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("time") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 4 {
            return Err(Error::IoFailure(format!(
                "correlation CSV row has {} columns, expected 4",
                cols.len()
            )));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::IoFailure(format!("bad float `{s}` in correlation CSV")))
        };
        times.push(parse(cols[0])?);
        values.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        stderr.push(parse(cols[3])?);
    }
    if times.is_empty() {
        return Err(Error::MissingArtifact("correlation CSV is empty".into()));
    }
    Ok(CorrelationSeries {
        times,
        values,
        stderr,
        estimator: EstimatorMeta {
            method: "from-csv".into(),
            samples: 0,
            seed: 0,
            grid_log2: 0,
        },
        system_desc: desc.to_string(),
    })
}

/// `correlate`: estimate the correlation series and write the CSV.
pub fn cmd_correlate(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let est = &ctx.config.estimator;
    let (series, caveats, manifest) = match &ctx.config.system {
        SystemParams::FlowTimechange { observable, .. } => {
            let alpha = ctx.alpha()?;
            let series = correlation_flow(
                &FlowSystem::TimeChange(&alpha),
                *observable,
                est.t_max,
                est.dt,
                est.n_samples,
                ctx.config.master_seed,
                ctx.workers,
            )?;
            (series, flow_caveats(), flow_manifest(&alpha))
        }
        SystemParams::FlowTwisted {
            observable,
            theta_mode,
            ..
        } => {
            let alpha = ctx.alpha()?;
            let series = correlation_flow(
                &FlowSystem::Twisted {
                    alpha: &alpha,
                    theta_mode: *theta_mode,
                },
                *observable,
                est.t_max,
                est.dt,
                est.n_samples,
                ctx.config.master_seed,
                ctx.workers,
            )?;
            (series, flow_caveats(), flow_manifest(&alpha))
        }
        _ => {
            let sys = ctx.character_system()?;
            let series = correlation_map(&sys, &est.psi, est.n_steps, est.grid_log2, ctx.workers)?;
            (series, Vec::new(), BTreeMap::new())
        }
    };
    let path = ctx.path("correlation.csv");
    write_file(&path, series_to_csv(ctx, &series).as_bytes())?;
    update_run_record(
        ctx,
        &["correlation.csv".to_string()],
        &caveats,
        &manifest,
        started,
    )?;
    Ok(vec![path, ctx.path("run_record.json")])
}

/// `conditions`: evaluate the three hypotheses and write the report.
pub fn cmd_conditions(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let est = &ctx.config.estimator;
    let mut written = Vec::new();
    let mut caveats = Vec::new();
    let mut manifest = BTreeMap::new();

    let (report, kushnirenko) = match &ctx.config.system {
        SystemParams::Furstenberg(f) => {
            let times = crate::conditions::log_steps(
                est.cond_min.max(1.0) as usize,
                est.cond_max as usize,
                est.cond_per_decade,
            );
            let sys = ConditionSystem::Furstenberg(f);
            (
                condition_report(&sys, &times, est.cond_samples, ctx.config.master_seed)?,
                None,
            )
        }
        SystemParams::Skew(s) => {
            let times = crate::conditions::log_steps(
                est.cond_min.max(1.0) as usize,
                est.cond_max as usize,
                est.cond_per_decade,
            );
            let sys = ConditionSystem::Skew(s);
            (
                condition_report(&sys, &times, est.cond_samples, ctx.config.master_seed)?,
                None,
            )
        }
        SystemParams::FlowTimechange { .. } => {
            let alpha = ctx.alpha()?;
            let times =
                crate::conditions::log_times(est.cond_min, est.cond_max, est.cond_per_decade);
            let sys = ConditionSystem::FlowTimeChange { alpha: &alpha };
            let report =
                condition_report(&sys, &times, est.cond_samples, ctx.config.master_seed)?;
            let kush = kushnirenko_verdict(&alpha, est.n_samples, ctx.config.master_seed)?;
            caveats = flow_caveats();
            manifest = flow_manifest(&alpha);
            (report, Some(kush))
        }
        SystemParams::FlowTwisted { theta_mode, .. } => {
            let alpha = ctx.alpha()?;
            let times =
                crate::conditions::log_times(est.cond_min, est.cond_max, est.cond_per_decade);
            let sys = ConditionSystem::FlowTwisted {
                alpha: &alpha,
                theta_mode: *theta_mode,
            };
            let report =
                condition_report(&sys, &times, est.cond_samples, ctx.config.master_seed)?;
            let kush = kushnirenko_verdict(&alpha, est.n_samples, ctx.config.master_seed)?;
            caveats = flow_caveats();
            manifest = flow_manifest(&alpha);
            (report, Some(kush))
        }
        SystemParams::ControlRotation { .. } => {
            return Err(Error::InvalidConfig(
                "the rotation control has no fiber cocycle; condition reports are not defined"
                    .into(),
            ))
        }
    };

    let mut value = serde_json::to_value(&report)?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("config_hash".to_string(), json!(ctx.hash()));
    }
    let path = ctx.path("conditions.json");
    write_file(&path, serde_json::to_string_pretty(&value)?.as_bytes())?;
    written.push(path);

    if let Some(kush) = kushnirenko {
        let kpath = ctx.path("kushnirenko.json");
        let kvalue = json!({
            "config_hash": ctx.hash(),
            "raw_sup": kush.raw_sup,
            "sup_estimate": kush.sup_estimate,
            "spread": kush.spread,
            "verdict": if kush.pass { "PASS" } else { "FAIL" },
            "n_samples": kush.n_samples,
            "seed": kush.seed,
        });
        write_file(&kpath, serde_json::to_string_pretty(&kvalue)?.as_bytes())?;
        written.push(kpath);
    }

    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
        .collect();
    update_run_record(ctx, &names, &caveats, &manifest, started)?;
    written.push(ctx.path("run_record.json"));
    Ok(written)
}

/// `spectrum`: diagnostics of the correlation series already produced
/// by `correlate` (MissingArtifact otherwise), plus SVG plots.
pub fn cmd_spectrum(ctx: &RunContext) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let est = &ctx.config.estimator;
    let corr_path = ctx.path("correlation.csv");
    let text = std::fs::read_to_string(&corr_path)
        .map_err(|_| Error::MissingArtifact(format!("{} (run `correlate` first)", corr_path.display())))?;
    let series = series_from_csv(&text, ctx.config.scenario.name())?;
    let window = if est.hann { Window::Hann } else { Window::None };
    let diag = spectral_diagnostics(&series, window, est.pad, est.bochner_m)?;

    let mut written = Vec::new();

    let mut density_csv = csv_header(ctx, "freq,density");
    for (f, d) in diag.density.freq.iter().zip(&diag.density.density) {
        let _ = writeln!(density_csv, "{f},{d}");
    }
    let dpath = ctx.path("spectrum.csv");
    write_file(&dpath, density_csv.as_bytes())?;
    written.push(dpath);

    let mut pn_csv = csv_header(ctx, "time,cumulative");
    for (t, v) in &diag.partial_norm.curve {
        let _ = writeln!(pn_csv, "{t},{v}");
    }
    let ppath = ctx.path("partial_norm.csv");
    write_file(&ppath, pn_csv.as_bytes())?;
    written.push(ppath);

    let mut env_csv = csv_header(ctx, "time,envelope");
    if let Some(fit) = &diag.decay {
        for (t, v) in &fit.envelope {
            let _ = writeln!(env_csv, "{t},{v}");
        }
    }
    let epath = ctx.path("envelope.csv");
    write_file(&epath, env_csv.as_bytes())?;
    written.push(epath);

    // Summary JSON consumed by `report`.
    let l2_str = match diag.partial_norm.verdict {
        L2Verdict::Bounded => "BOUNDED",
        L2Verdict::Growing => "GROWING",
        L2Verdict::Indeterminate => "INDETERMINATE",
    };
    let summary = json!({
        "config_hash": ctx.hash(),
        "l2_verdict": l2_str,
        "l2_total": diag.partial_norm.total,
        "beta_hat": diag.decay.as_ref().map(|f| f.beta_hat),
        "beta_ci_lo": diag.decay.as_ref().map(|f| f.ci.0),
        "beta_ci_hi": diag.decay.as_ref().map(|f| f.ci.1),
        "beta_unreliable": diag.decay.as_ref().map(|f| f.unreliable),
        "bochner_min_eig": diag.bochner_min_eig,
        "bochner_bound": diag.bochner_bound,
        "density_min_raw": diag.density.min_raw,
        "density_nonneg": diag.density_nonneg,
        "density_mass": diag.density.mass,
        "mass_defect_rel": diag.mass_defect_rel,
        "density_ripple": diag.density.ripple,
    });
    let spath = ctx.path("spectrum_summary.json");
    write_file(&spath, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    written.push(spath);

    // Cosmetic plots; the CSVs above are authoritative.
    let hash = ctx.hash();
    let density_pts: Vec<(f64, f64)> = diag
        .density
        .freq
        .iter()
        .zip(&diag.density.density)
        .map(|(&f, &d)| (f, d))
        .collect();
    let svg1 = line_plot(
        &density_pts,
        &PlotSpec {
            title: "spectral density estimate",
            x_label: "frequency",
            y_label: "density",
            log_x: false,
            log_y: false,
            config_hash: &hash,
        },
    );
    let p1 = ctx.path("density.svg");
    write_file(&p1, svg1.as_bytes())?;
    written.push(p1);

    let svg2 = line_plot(
        &diag.partial_norm.curve,
        &PlotSpec {
            title: "partial squared norm of the correlation",
            x_label: "horizon T",
            y_label: "cumulative",
            log_x: true,
            log_y: false,
            config_hash: &hash,
        },
    );
    let p2 = ctx.path("partial_norm.svg");
    write_file(&p2, svg2.as_bytes())?;
    written.push(p2);

    let env_pts: Vec<(f64, f64)> = diag
        .decay
        .as_ref()
        .map(|f| f.envelope.clone())
        .unwrap_or_default();
    let svg3 = line_plot(
        &env_pts,
        &PlotSpec {
            title: "log-log correlation envelope",
            x_label: "time",
            y_label: "envelope",
            log_x: true,
            log_y: true,
            config_hash: &hash,
        },
    );
    let p3 = ctx.path("envelope.svg");
    write_file(&p3, svg3.as_bytes())?;
    written.push(p3);

    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
        .collect();
    update_run_record(ctx, &names, &[], &BTreeMap::new(), started)?;
    written.push(ctx.path("run_record.json"));
    Ok(written)
}

/// `report`: one human-readable summary of whatever the run produced.
pub fn cmd_report(run_dir: &Path) -> Result<String> {
    let record_path = run_dir.join("run_record.json");
    let record: Value = serde_json::from_str(
        &std::fs::read_to_string(&record_path)
            .map_err(|_| Error::MissingArtifact(format!("{}", record_path.display())))?,
    )?;

    let mut out = String::new();
    let _ = writeln!(out, "# Run report");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "- scenario: {}",
        record.get("scenario").and_then(|v| v.as_str()).unwrap_or("?")
    );
    let _ = writeln!(
        out,
        "- config hash: {}",
        record.get("config_hash").and_then(|v| v.as_str()).unwrap_or("?")
    );
    let _ = writeln!(
        out,
        "- code version: {}",
        record.get("code_version").and_then(|v| v.as_str()).unwrap_or("?")
    );

    if let Ok(text) = std::fs::read_to_string(run_dir.join("kushnirenko.json")) {
        let v: Value = serde_json::from_str(&text)?;
        let _ = writeln!(out);
        let _ = writeln!(out, "## Kushnirenko condition (sup |X alpha / alpha| < 1)");
        let _ = writeln!(
            out,
            "- sup estimate (10% inflated): {}",
            v.get("sup_estimate").and_then(|x| x.as_f64()).unwrap_or(f64::NAN)
        );
        let _ = writeln!(
            out,
            "- verdict: {}",
            v.get("verdict").and_then(|x| x.as_str()).unwrap_or("?")
        );
    }

    if let Ok(text) = std::fs::read_to_string(run_dir.join("conditions.json")) {
        let v: Value = serde_json::from_str(&text)?;
        let _ = writeln!(out);
        let _ = writeln!(out, "## Abstract spectral criterion, conditions (i)-(iii)");
        let _ = writeln!(
            out,
            "- system: {}",
            v.get("system").and_then(|x| x.as_str()).unwrap_or("?")
        );
        for (name, label) in [
            ("condition_i", "condition (i), limsup surrogate"),
            ("condition_ii", "condition (ii), bracket bound"),
            ("condition_iii", "condition (iii), commutator defect"),
        ] {
            if let Some(c) = v.get(name) {
                let _ = writeln!(
                    out,
                    "- {label}: estimate {} -> {}",
                    c.get("estimate").and_then(|x| x.as_f64()).unwrap_or(f64::NAN),
                    c.get("verdict").and_then(|x| x.as_str()).unwrap_or("?")
                );
            }
        }
        let _ = writeln!(
            out,
            "- overall: {}",
            v.get("overall").and_then(|x| x.as_str()).unwrap_or("?")
        );
    }

    if let Ok(text) = std::fs::read_to_string(run_dir.join("spectrum_summary.json")) {
        let v: Value = serde_json::from_str(&text)?;
        let _ = writeln!(out);
        let _ = writeln!(out, "## Spectral-measure diagnostics");
        let l2 = v.get("l2_verdict").and_then(|x| x.as_str()).unwrap_or("?");
        let _ = writeln!(out, "- partial-norm verdict: {l2}");
        if let Some(beta) = v.get("beta_hat").and_then(|x| x.as_f64()) {
            let _ = writeln!(
                out,
                "- decay exponent beta_hat = {beta:.3} (95% CI [{:.3}, {:.3}]){}",
                v.get("beta_ci_lo").and_then(|x| x.as_f64()).unwrap_or(f64::NAN),
                v.get("beta_ci_hi").and_then(|x| x.as_f64()).unwrap_or(f64::NAN),
                if v.get("beta_unreliable").and_then(|x| x.as_bool()).unwrap_or(false) {
                    " [flagged UNRELIABLE]"
                } else {
                    ""
                }
            );
        }
        let _ = writeln!(
            out,
            "- Toeplitz positivity: min eigenvalue {} (noise bound {})",
            v.get("bochner_min_eig").and_then(|x| x.as_f64()).unwrap_or(f64::NAN),
            v.get("bochner_bound").and_then(|x| x.as_f64()).unwrap_or(f64::NAN)
        );
        let _ = writeln!(
            out,
            "- density mass vs c(0): relative defect {}",
            v.get("mass_defect_rel").and_then(|x| x.as_f64()).unwrap_or(f64::NAN)
        );
        let _ = writeln!(out);
        match l2 {
            "BOUNDED" => {
                let _ = writeln!(
                    out,
                    "Square-integrable correlation transform at this horizon: \
                     consistent with an absolutely continuous spectral component \
                     on the tested subspace (not a proof)."
                );
            }
            "GROWING" => {
                let _ = writeln!(
                    out,
                    "Partial norm grows decade over decade: consistent with a \
                     pure point component (no correlation decay)."
                );
            }
            _ => {
                let _ = writeln!(
                    out,
                    "Partial-norm growth is indeterminate at this horizon; a \
                     longer series is needed."
                );
            }
        }
    }

    if let Some(caveats) = record.get("caveats").and_then(|v| v.as_array()) {
        if !caveats.is_empty() {
            let _ = writeln!(out);
            let _ = writeln!(out, "## Caveats");
            for c in caveats {
                if let Some(s) = c.as_str() {
                    let _ = writeln!(out, "- {s}");
                }
            }
        }
    }

    let path = run_dir.join("report.md");
    write_file(&path, out.as_bytes())?;
    Ok(out)
}

/// Minimal structural JSON-schema check (type / properties / required /
/// items / enum), enough to validate the shipped schema.
pub fn validate_schema(value: &Value, schema: &Value) -> std::result::Result<(), String> {
    if let Some(types) = schema.get("type") {
        let ok = match types {
            Value::String(t) => type_matches(value, t),
            Value::Array(list) => list
                .iter()
                .filter_map(|t| t.as_str())
                .any(|t| type_matches(value, t)),
            _ => true,
        };
        if !ok {
            return Err(format!("value {value} does not match type {types}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(|e| e.as_array()) {
        if !options.contains(value) {
            return Err(format!("value {value} not in enum {options:?}"));
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate_schema(v, sub).map_err(|e| format!("{key}: {e}"))?;
                }
            }
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        let obj = value
            .as_object()
            .ok_or_else(|| "expected object".to_string())?;
        for key in required.iter().filter_map(|k| k.as_str()) {
            if !obj.contains_key(key) {
                return Err(format!("missing required key `{key}`"));
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (i, v) in arr.iter().enumerate() {
                validate_schema(v, items).map_err(|e| format!("[{i}]: {e}"))?;
            }
        }
    }
    Ok(())
}

fn type_matches(value: &Value, t: &str) -> bool {
    match t {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => true,
    }
}
