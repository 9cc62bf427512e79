//! Experiment configuration: plain-text sections of `key = value` pairs.
//!
//! The format is deliberately minimal (human-diffable, no external
//! parser): `[section]` headers, one `key = value` per line, `#`
//! comments. Frequency-coefficient maps are written as
//! `m1,m2,...:re:im; ...` with the full spectrum spelled out, so a
//! config round-trips through `canonical()` losslessly (floats print in
//! shortest-roundtrip form).

use crate::error::{Error, Result};
use crate::observables::ObservableId;
use crate::torus::{FourierObservable, FurstenbergSpec, SkewProductSpec, GOLDEN_ROTATION};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt::Write as _;

/// The five shipped scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Furstenberg,
    Skew,
    FlowTimechange,
    FlowTwisted,
    ControlRotation,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Furstenberg => "furstenberg",
            Scenario::Skew => "skew",
            Scenario::FlowTimechange => "flow_timechange",
            Scenario::FlowTwisted => "flow_twisted",
            Scenario::ControlRotation => "control_rotation",
        }
    }

    fn from_name(s: &str) -> Result<Self> {
        match s {
            "furstenberg" => Ok(Scenario::Furstenberg),
            "skew" => Ok(Scenario::Skew),
            "flow_timechange" => Ok(Scenario::FlowTimechange),
            "flow_twisted" => Ok(Scenario::FlowTwisted),
            "control_rotation" => Ok(Scenario::ControlRotation),
            other => Err(Error::InvalidConfig(format!(
                "[run] scenario: unknown scenario `{other}` (expected furstenberg | skew | \
                 flow_timechange | flow_twisted | control_rotation)"
            ))),
        }
    }

    pub fn is_flow(&self) -> bool {
        matches!(self, Scenario::FlowTimechange | Scenario::FlowTwisted)
    }
}

/// Scenario-specific system parameters.
#[derive(Debug, Clone)]
pub enum SystemParams {
    Furstenberg(FurstenbergSpec),
    Skew(SkewProductSpec),
    FlowTimechange {
        epsilon: f64,
        observable: ObservableId,
    },
    FlowTwisted {
        epsilon: f64,
        observable: ObservableId,
        theta_mode: i64,
    },
    ControlRotation {
        rotation: f64,
        psi_mode: i64,
    },
}

/// Estimator parameters (map-side and flow-side fields coexist; each
/// scenario reads the ones it needs).
#[derive(Debug, Clone)]
pub struct EstimatorParams {
    pub n_steps: usize,
    pub grid_log2: usize,
    pub t_max: f64,
    pub dt: f64,
    pub n_samples: usize,
    pub norm_samples: usize,
    pub cond_min: f64,
    pub cond_max: f64,
    pub cond_per_decade: usize,
    pub cond_samples: usize,
    pub bochner_m: usize,
    pub pad: usize,
    pub hann: bool,
    /// Test observable for the map correlation estimators.
    pub psi: FourierObservable,
}

impl EstimatorParams {
    fn defaults(scenario: Scenario) -> Self {
        let psi_dim = 1;
        EstimatorParams {
            n_steps: 4096,
            grid_log2: 12,
            t_max: 40.0,
            dt: 0.5,
            n_samples: 400,
            norm_samples: 20_000,
            cond_min: if scenario.is_flow() { 1.0 } else { 10.0 },
            cond_max: if scenario.is_flow() { 100.0 } else { 4096.0 },
            cond_per_decade: 4,
            cond_samples: if scenario.is_flow() { 8 } else { 32 },
            bochner_m: 128,
            pad: 4,
            hann: true,
            psi: FourierObservable::constant(psi_dim, Complex64::new(1.0, 0.0)),
        }
    }
}

/// A fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub master_seed: u64,
    pub output_dir: Option<String>,
    pub system: SystemParams,
    pub estimator: EstimatorParams,
}

fn parse_sections(text: &str) -> Result<BTreeMap<String, BTreeMap<String, String>>> {
    let mut out: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(stripped) = line.strip_prefix('[') {
            let name = stripped.strip_suffix(']').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: malformed section header", lineno + 1))
            })?;
            section = name.trim().to_string();
            out.entry(section.clone()).or_default();
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        if section.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "line {}: key outside any [section]",
                lineno + 1
            )));
        }
        out.get_mut(&section)
            .unwrap()
            .insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn get_f64(sec: &BTreeMap<String, String>, section: &str, key: &str) -> Result<Option<f64>> {
    match sec.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<f64>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key}: `{v}` is not a number"))
        }),
    }
}

fn get_i64(sec: &BTreeMap<String, String>, section: &str, key: &str) -> Result<Option<i64>> {
    match sec.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<i64>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key}: `{v}` is not an integer"))
        }),
    }
}

fn get_usize(sec: &BTreeMap<String, String>, section: &str, key: &str) -> Result<Option<usize>> {
    match sec.get(key) {
        None => Ok(None),
        Some(v) => v.parse::<usize>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!(
                "[{section}] {key}: `{v}` is not a nonnegative integer"
            ))
        }),
    }
}

/// Parse `m1,m2,...:re:im; ...` into a coefficient map.
fn parse_modes(value: &str, dim: usize, section: &str, key: &str) -> Result<FourierObservable> {
    let mut coeffs = BTreeMap::new();
    for part in value.split(';') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let fields: Vec<&str> = part.split(':').collect();
        if fields.len() != 3 {
            return Err(Error::InvalidConfig(format!(
                "[{section}] {key}: mode `{part}` must be m1,m2,...:re:im"
            )));
        }
        let m: Vec<i64> = fields[0]
            .split(',')
            .map(|v| {
                v.trim().parse::<i64>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "[{section}] {key}: `{v}` is not an integer frequency"
                    ))
                })
            })
            .collect::<Result<_>>()?;
        if m.len() != dim {
            return Err(Error::InvalidConfig(format!(
                "[{section}] {key}: mode `{part}` has {} frequencies, expected {dim}",
                m.len()
            )));
        }
        let re: f64 = fields[1].trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key}: `{}` is not a number", fields[1]))
        })?;
        let im: f64 = fields[2].trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("[{section}] {key}: `{}` is not a number", fields[2]))
        })?;
        coeffs.insert(m, Complex64::new(re, im));
    }
    Ok(FourierObservable { dim, coeffs })
}

fn modes_to_string(obs: &FourierObservable) -> String {
    let mut parts = Vec::new();
    for (m, c) in &obs.coeffs {
        let freqs: Vec<String> = m.iter().map(|v| v.to_string()).collect();
        parts.push(format!("{}:{}:{}", freqs.join(","), c.re, c.im));
    }
    parts.join("; ")
}

impl ExperimentConfig {
    /// Parse and validate a config file's text.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let sections = parse_sections(text)?;
        let empty = BTreeMap::new();
        let run = sections.get("run").unwrap_or(&empty);
        let scenario = Scenario::from_name(
            run.get("scenario")
                .ok_or_else(|| Error::InvalidConfig("[run] scenario: missing".into()))?,
        )?;
        let master_seed = run
            .get("master_seed")
            .map(|v| {
                v.parse::<u64>().map_err(|_| {
                    Error::InvalidConfig(format!(
                        "[run] master_seed: `{v}` is not a 64-bit unsigned integer"
                    ))
                })
            })
            .transpose()?
            .unwrap_or(0);
        let output_dir = run.get("output_dir").cloned();

        let sys = sections.get("system").unwrap_or(&empty);
        let system = match scenario {
            Scenario::Furstenberg => {
                let d = get_usize(sys, "system", "d")?.unwrap_or(2);
                if !(2..=4).contains(&d) {
                    return Err(Error::InvalidConfig(format!(
                        "[system] d: {d} out of the supported range 2..=4"
                    )));
                }
                let rotation = get_f64(sys, "system", "rotation")?.unwrap_or(GOLDEN_ROTATION);
                let mut b = vec![vec![0i64; d]; d];
                for r in 2..=d {
                    for c in 1..r {
                        let key = format!("b_{r}_{c}");
                        if let Some(v) = get_i64(sys, "system", &key)? {
                            b[r - 1][c - 1] = v;
                        } else if c == r - 1 {
                            b[r - 1][c - 1] = 1;
                        }
                    }
                }
                let mut h = Vec::new();
                for jdx in 1..d {
                    let key = format!("h_{jdx}");
                    let obs = match sys.get(&key) {
                        Some(v) => parse_modes(v, jdx, "system", &key)?,
                        None => FourierObservable::zero(jdx),
                    };
                    h.push(obs);
                }
                let j = get_usize(sys, "system", "j")?.unwrap_or(2);
                let k = get_i64(sys, "system", "k")?.unwrap_or(1);
                let spec = FurstenbergSpec::new(d, rotation, b, h, j, k)
                    .map_err(|e| Error::InvalidConfig(format!("[system]: {e}")))?;
                SystemParams::Furstenberg(spec)
            }
            Scenario::Skew => {
                let rotation = get_f64(sys, "system", "rotation")?.unwrap_or(GOLDEN_ROTATION);
                let b = get_i64(sys, "system", "b")?.unwrap_or(1);
                let k = get_i64(sys, "system", "k")?.unwrap_or(1);
                let eta = match sys.get("eta") {
                    Some(v) => parse_modes(v, 1, "system", "eta")?,
                    None => FourierObservable::zero(1),
                };
                let spec = SkewProductSpec::new(rotation, b, eta, k)
                    .map_err(|e| Error::InvalidConfig(format!("[system]: {e}")))?;
                SystemParams::Skew(spec)
            }
            Scenario::FlowTimechange | Scenario::FlowTwisted => {
                let epsilon = get_f64(sys, "system", "epsilon")?.unwrap_or(0.1);
                if !(0.0..0.9).contains(&epsilon) {
                    return Err(Error::InvalidConfig(format!(
                        "[system] epsilon: {epsilon} outside [0, 0.9)"
                    )));
                }
                let observable = ObservableId::from_name(
                    sys.get("observable").map(|s| s.as_str()).unwrap_or("discriminant"),
                )
                .map_err(|e| Error::InvalidConfig(format!("[system] observable: {e}")))?;
                if scenario == Scenario::FlowTimechange {
                    SystemParams::FlowTimechange {
                        epsilon,
                        observable,
                    }
                } else {
                    let theta_mode = get_i64(sys, "system", "theta_mode")?.unwrap_or(1);
                    if theta_mode == 0 {
                        return Err(Error::InvalidConfig(
                            "[system] theta_mode: must be nonzero".into(),
                        ));
                    }
                    SystemParams::FlowTwisted {
                        epsilon,
                        observable,
                        theta_mode,
                    }
                }
            }
            Scenario::ControlRotation => {
                let rotation = get_f64(sys, "system", "rotation")?.unwrap_or(GOLDEN_ROTATION);
                if !(0.0 < rotation && rotation < 1.0) {
                    return Err(Error::InvalidConfig(format!(
                        "[system] rotation: {rotation} outside (0, 1)"
                    )));
                }
                let psi_mode = get_i64(sys, "system", "psi_mode")?.unwrap_or(1);
                if psi_mode == 0 {
                    return Err(Error::InvalidConfig(
                        "[system] psi_mode: must be nonzero (the constant mode has no dynamics)"
                            .into(),
                    ));
                }
                SystemParams::ControlRotation {
                    rotation,
                    psi_mode,
                }
            }
        };

        let est_sec = sections.get("estimator").unwrap_or(&empty);
        let mut est = EstimatorParams::defaults(scenario);
        if let Some(v) = get_usize(est_sec, "estimator", "n_steps")? {
            if v == 0 || v > (1 << 16) {
                return Err(Error::InvalidConfig(format!(
                    "[estimator] n_steps: {v} outside 1..=65536"
                )));
            }
            est.n_steps = v;
        }
        if let Some(v) = get_usize(est_sec, "estimator", "grid_log2")? {
            if !(2..=20).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "[estimator] grid_log2: {v} outside 2..=20"
                )));
            }
            est.grid_log2 = v;
        }
        if let Some(v) = get_f64(est_sec, "estimator", "t_max")? {
            if !(v > 0.0 && v <= 1e4) {
                return Err(Error::InvalidConfig(format!(
                    "[estimator] t_max: {v} outside (0, 1e4]"
                )));
            }
            est.t_max = v;
        }
        if let Some(v) = get_f64(est_sec, "estimator", "dt")? {
            if v <= 0.0 {
                return Err(Error::InvalidConfig("[estimator] dt: must be positive".into()));
            }
            est.dt = v;
        }
        if let Some(v) = get_usize(est_sec, "estimator", "n_samples")? {
            if v < 32 {
                return Err(Error::InvalidConfig(
                    "[estimator] n_samples: need at least 32 for batch error bars".into(),
                ));
            }
            est.n_samples = v;
        }
        if let Some(v) = get_usize(est_sec, "estimator", "norm_samples")? {
            est.norm_samples = v;
        }
        if let Some(v) = get_f64(est_sec, "estimator", "cond_min")? {
            est.cond_min = v;
        }
        if let Some(v) = get_f64(est_sec, "estimator", "cond_max")? {
            est.cond_max = v;
        }
        if est.cond_max / est.cond_min < 99.0 {
            return Err(Error::InvalidConfig(
                "[estimator] cond_max: condition profiles need at least two decades above cond_min"
                    .into(),
            ));
        }
        if let Some(v) = get_usize(est_sec, "estimator", "cond_per_decade")? {
            est.cond_per_decade = v.max(1);
        }
        if let Some(v) = get_usize(est_sec, "estimator", "cond_samples")? {
            est.cond_samples = v.max(2);
        }
        if let Some(v) = get_usize(est_sec, "estimator", "bochner_m")? {
            if v > 512 {
                return Err(Error::InvalidConfig("[estimator] bochner_m: capped at 512".into()));
            }
            est.bochner_m = v;
        }
        if let Some(v) = get_usize(est_sec, "estimator", "pad")? {
            est.pad = v.clamp(1, 16);
        }
        if let Some(v) = est_sec.get("window") {
            est.hann = match v.as_str() {
                "hann" => true,
                "none" => false,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "[estimator] window: `{other}` (expected hann | none)"
                    )))
                }
            };
        }
        let psi_dim = match &system {
            SystemParams::Furstenberg(f) => f.j - 1,
            _ => 1,
        };
        est.psi = match est_sec.get("psi") {
            Some(v) => parse_modes(v, psi_dim, "estimator", "psi")?,
            None => match &system {
                SystemParams::ControlRotation { psi_mode, .. } => {
                    FourierObservable::character(1, vec![*psi_mode])
                }
                _ => FourierObservable::constant(psi_dim, Complex64::new(1.0, 0.0)),
            },
        };
        if est.psi.is_empty() {
            return Err(Error::InvalidConfig("[estimator] psi: must be nonzero".into()));
        }

        Ok(ExperimentConfig {
            scenario,
            master_seed,
            output_dir,
            system,
            estimator: est,
        })
    }

    /// Canonical serialization: parsing it reproduces this config.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "scenario = {}", self.scenario.name());
        let _ = writeln!(s, "master_seed = {}", self.master_seed);
        if let Some(dir) = &self.output_dir {
            let _ = writeln!(s, "output_dir = {dir}");
        }
        let _ = writeln!(s, "\n[system]");
        match &self.system {
            SystemParams::Furstenberg(f) => {
                let _ = writeln!(s, "d = {}", f.d);
                let _ = writeln!(s, "rotation = {}", f.rotation);
                for r in 2..=f.d {
                    for c in 1..r {
                        let _ = writeln!(s, "b_{r}_{c} = {}", f.b[r - 1][c - 1]);
                    }
                }
                for (jdx, hj) in f.h.iter().enumerate() {
                    if !hj.is_empty() {
                        let _ = writeln!(s, "h_{} = {}", jdx + 1, modes_to_string(hj));
                    }
                }
                let _ = writeln!(s, "j = {}", f.j);
                let _ = writeln!(s, "k = {}", f.k);
            }
            SystemParams::Skew(sp) => {
                let _ = writeln!(s, "rotation = {}", sp.rotation);
                let _ = writeln!(s, "b = {}", sp.b);
                let _ = writeln!(s, "k = {}", sp.k);
                if !sp.eta_lift.is_empty() {
                    let _ = writeln!(s, "eta = {}", modes_to_string(&sp.eta_lift));
                }
            }
            SystemParams::FlowTimechange {
                epsilon,
                observable,
            } => {
                let _ = writeln!(s, "epsilon = {epsilon}");
                let _ = writeln!(s, "observable = {}", observable.name());
            }
            SystemParams::FlowTwisted {
                epsilon,
                observable,
                theta_mode,
            } => {
                let _ = writeln!(s, "epsilon = {epsilon}");
                let _ = writeln!(s, "observable = {}", observable.name());
                let _ = writeln!(s, "theta_mode = {theta_mode}");
            }
            SystemParams::ControlRotation {
                rotation,
                psi_mode,
            } => {
                let _ = writeln!(s, "rotation = {rotation}");
                let _ = writeln!(s, "psi_mode = {psi_mode}");
            }
        }
        let e = &self.estimator;
        let _ = writeln!(s, "\n[estimator]");
        let _ = writeln!(s, "n_steps = {}", e.n_steps);
        let _ = writeln!(s, "grid_log2 = {}", e.grid_log2);
        let _ = writeln!(s, "t_max = {}", e.t_max);
        let _ = writeln!(s, "dt = {}", e.dt);
        let _ = writeln!(s, "n_samples = {}", e.n_samples);
        let _ = writeln!(s, "norm_samples = {}", e.norm_samples);
        let _ = writeln!(s, "cond_min = {}", e.cond_min);
        let _ = writeln!(s, "cond_max = {}", e.cond_max);
        let _ = writeln!(s, "cond_per_decade = {}", e.cond_per_decade);
        let _ = writeln!(s, "cond_samples = {}", e.cond_samples);
        let _ = writeln!(s, "bochner_m = {}", e.bochner_m);
        let _ = writeln!(s, "pad = {}", e.pad);
        let _ = writeln!(s, "window = {}", if e.hann { "hann" } else { "none" });
        let _ = writeln!(s, "psi = {}", modes_to_string(&e.psi));
        s
    }

    /// FNV-1a 64 hash of the canonical serialization, in hex.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        format!("{h:016x}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SKEW_CFG: &str = "\
[run]
scenario = skew
master_seed = 7

[system]
rotation = 0.6180339887498949
b = 1
k = 1
eta = -1:0.025:0; 1:0.025:0

[estimator]
n_steps = 512
grid_log2 = 10
";

    #[test]
    fn parse_and_roundtrip() {
        let cfg = ExperimentConfig::parse(SKEW_CFG).unwrap();
        assert_eq!(cfg.scenario, Scenario::Skew);
        assert_eq!(cfg.master_seed, 7);
        let canon = cfg.canonical();
        let cfg2 = ExperimentConfig::parse(&canon).unwrap();
        assert_eq!(canon, cfg2.canonical());
        assert_eq!(cfg.hash(), cfg2.hash());
    }

    #[test]
    fn rejects_unknown_scenario() {
        let bad = "[run]\nscenario = kam_tori\n";
        let err = ExperimentConfig::parse(bad).unwrap_err();
        assert!(err.to_string().contains("scenario"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_bad_numbers_with_field_message() {
        let bad = "[run]\nscenario = skew\n\n[system]\nb = one\n";
        let err = ExperimentConfig::parse(bad).unwrap_err();
        assert!(err.to_string().contains("[system] b"), "{err}");
    }

    #[test]
    fn rejects_skew_with_zero_b() {
        let bad = "[run]\nscenario = skew\n\n[system]\nb = 0\n";
        assert!(ExperimentConfig::parse(bad).is_err());
    }

    #[test]
    fn rejects_epsilon_out_of_range() {
        let bad = "[run]\nscenario = flow_timechange\n\n[system]\nepsilon = 0.95\n";
        let err = ExperimentConfig::parse(bad).unwrap_err();
        assert!(err.to_string().contains("epsilon"));
    }

    #[test]
    fn furstenberg_defaults_and_hash_stability() {
        let text = "[run]\nscenario = furstenberg\nmaster_seed = 42\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        match &cfg.system {
            SystemParams::Furstenberg(f) => {
                assert_eq!(f.d, 2);
                assert_eq!(f.b[1][0], 1);
            }
            _ => panic!("wrong system"),
        }
        assert_eq!(cfg.hash(), ExperimentConfig::parse(text).unwrap().hash());
    }

    #[test]
    fn control_rotation_uses_character_psi() {
        let text = "[run]\nscenario = control_rotation\n\n[system]\npsi_mode = 2\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.estimator.psi.max_freq(0), 2);
    }
}
