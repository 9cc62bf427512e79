//! Numerical evaluation of the three hypotheses of the abstract
//! absolute-continuity criterion.
//!
//! For every system in scope the three operator conditions reduce to
//! sup-norm bounds on explicit scalar multiplier fields, so no operator
//! is ever discretized; the module estimates exactly those fields over
//! seeded samples:
//!
//! ```text
//! flows     (i): (1/t) int_0^t (X a / a) along the reparametrized orbit
//! twisted   (i): |n| * | (1/t) int_0^t (X a - a) along the orbit + 1 |
//! skew      (i): | (1/n) sum P eta~ o F^{-l} | / |xi_0|
//! Furstenberg(i): | (1/n) sum P h~ o T^{-l} | / |2 pi k b_{j,j-1}|
//! ```
//!
//! with the analogous second-derivative fields for (ii) and the
//! difference field `G o phi_t - G` for (iii) (identically zero for the
//! map systems, where the limit operator is a constant multiplier).
//!
//! A limsup over infinite time has no finite-horizon definition, so
//! condition (i) uses a conservative surrogate: the maximum over the
//! final decade of the time grid, inflated by 10%. Every report carries
//! that convention as a caveat.

use crate::error::Result;
use crate::modular::{reduce, ModularPoint};
use crate::numerics::{effective_workers, par_map_indexed};
use crate::rng::{Rng, StreamId};
use crate::sl2::horocycle;
use crate::time_change::{integrate_orbit, TimeChange};
use crate::torus::{FourierObservable, FurstenbergSpec, SkewProductSpec, TorusMap, TorusPoint};
use serde::Serialize;
use std::f64::consts::TAU;

/// Safety inflation applied to every sup estimate before the verdict.
pub const SUP_INFLATION: f64 = 1.1;

/// Systems whose condition profiles this module evaluates.
pub enum ConditionSystem<'a> {
    FlowTimeChange { alpha: &'a TimeChange },
    FlowTwisted { alpha: &'a TimeChange, theta_mode: i64 },
    Skew(&'a SkewProductSpec),
    Furstenberg(&'a FurstenbergSpec),
}

impl ConditionSystem<'_> {
    pub fn is_flow(&self) -> bool {
        matches!(
            self,
            ConditionSystem::FlowTimeChange { .. } | ConditionSystem::FlowTwisted { .. }
        )
    }

    pub fn describe(&self) -> String {
        match self {
            ConditionSystem::FlowTimeChange { alpha } => {
                format!("time-changed horocycle flow, eps = {}", alpha.epsilon)
            }
            ConditionSystem::FlowTwisted { alpha, theta_mode } => format!(
                "twisted horocycle flow, eps = {}, theta mode {}",
                alpha.epsilon, theta_mode
            ),
            ConditionSystem::Skew(s) => format!(
                "skew product over rotation y = {} (b = {}, k = {})",
                s.rotation, s.b, s.k
            ),
            ConditionSystem::Furstenberg(f) => format!(
                "Furstenberg transformation d = {}, active (j, k) = ({}, {})",
                f.d, f.j, f.k
            ),
        }
    }

    fn preliminary(&self) -> (String, String) {
        match self {
            ConditionSystem::FlowTimeChange { .. } => {
                ("(1/alpha) I".to_string(), "alpha I".to_string())
            }
            _ => ("I".to_string(), "I".to_string()),
        }
    }
}

/// Tri-state verdict with the refinement safeguard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

/// Per-time sup estimates of one multiplier field.
#[derive(Debug, Clone, Serialize)]
pub struct CommutatorProfile {
    /// Normalizing exponent of the commutator growth; 1 for every
    /// implemented system.
    pub beta: f64,
    pub times: Vec<f64>,
    /// Sup over samples of the multiplier at each time.
    pub multiplier_sup: Vec<f64>,
    /// Same sup over the first half of the sample set.
    pub multiplier_sup_half: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
}

impl CommutatorProfile {
    fn tail_indices(&self) -> Vec<usize> {
        let t_max = *self.times.last().unwrap_or(&1.0);
        (0..self.times.len())
            .filter(|&i| self.times[i] >= t_max / 10.0)
            .collect()
    }

    /// Max over the final decade, with the safety inflation.
    pub fn tail_estimate(&self) -> f64 {
        self.tail_indices()
            .iter()
            .map(|&i| self.multiplier_sup[i])
            .fold(0.0, f64::max)
            * SUP_INFLATION
    }

    fn tail_estimate_half(&self) -> f64 {
        self.tail_indices()
            .iter()
            .map(|&i| self.multiplier_sup_half[i])
            .fold(0.0, f64::max)
            * SUP_INFLATION
    }

    /// (max - min over the final decade) / (max over all times).
    pub fn tail_variation(&self) -> f64 {
        let tail = self.tail_indices();
        let max_all = self.multiplier_sup.iter().fold(0.0f64, |a, &b| a.max(b));
        if max_all == 0.0 {
            return 0.0;
        }
        let tmax = tail.iter().map(|&i| self.multiplier_sup[i]).fold(0.0, f64::max);
        let tmin = tail
            .iter()
            .map(|&i| self.multiplier_sup[i])
            .fold(f64::INFINITY, f64::min);
        (tmax - tmin) / max_all
    }
}

/// One evaluated condition: profile, headline estimate, verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionOutcome {
    pub profile: CommutatorProfile,
    pub estimate: f64,
    /// Analytic comparison value where one exists.
    pub analytic_bound: Option<f64>,
    /// |full estimate - half-sample estimate|.
    pub refinement_delta: f64,
    pub verdict: Verdict,
}

/// All multiplier fields of a flow sample evaluated in one orbit pass.
struct FlowFields {
    /// (1/t) int (X a / a) at each time.
    avg_xlog: Vec<f64>,
    /// Condition (ii) bracket value at each time.
    bracket: Vec<f64>,
    /// G = X a / a - 1 (time change) or X a - a (twisted) at the orbit
    /// point of each time.
    g_endpoint: Vec<f64>,
    /// G at the initial point.
    g_start: f64,
    /// sup of |X(X a / a)| (or the twisted analogue) seen along the orbit.
    sup_second: f64,
}

fn flow_fields(
    system: &ConditionSystem,
    x: &ModularPoint,
    times: &[f64],
) -> Result<FlowFields> {
    match system {
        ConditionSystem::FlowTimeChange { alpha } => {
            let xlog = |p: &ModularPoint| -> Result<f64> { Ok(alpha.x_log_derivative(p)?.0) };
            let xlog_sq_m = |p: &ModularPoint| -> Result<f64> {
                let v = alpha.x_log_derivative(p)?.0;
                Ok(v * v - v)
            };
            let second = |p: &ModularPoint| -> Result<f64> { Ok(alpha.x_second_derivative(p)?.0) };
            let recs = integrate_orbit(x, times, alpha, &[&xlog, &xlog_sq_m, &second])?;
            let mut avg_xlog = Vec::with_capacity(times.len());
            let mut bracket = Vec::with_capacity(times.len());
            let mut g_endpoint = Vec::with_capacity(times.len());
            let mut sup_second = 0.0f64;
            for r in &recs {
                let t = r.t;
                let xlog_end = alpha.x_log_derivative(&r.point)?.0;
                let g_t = r.integrals[0] - t; // G(alpha, t)
                avg_xlog.push((r.integrals[0] / t).abs());
                // (G/t) XLog(phi_t) - (1/t) int (XLog^2 - XLog) + (1/t) int X(XLog)
                bracket.push(
                    ((g_t / t) * xlog_end - r.integrals[1] / t + r.integrals[2] / t).abs(),
                );
                g_endpoint.push(xlog_end - 1.0);
                sup_second = sup_second.max((r.integrals[2] / t).abs());
            }
            // Direct field evaluations for the sup of the second derivative.
            sup_second = sup_second.max(alpha.x_second_derivative(x)?.0.abs());
            Ok(FlowFields {
                avg_xlog,
                bracket,
                g_endpoint,
                g_start: alpha.x_log_derivative(x)?.0 - 1.0,
                sup_second,
            })
        }
        ConditionSystem::FlowTwisted { alpha, theta_mode } => {
            // Base motion is the unit-speed horocycle; integrals are
            // plain quadratures along it, evaluated cumulatively.
            let n_abs = theta_mode.unsigned_abs() as f64;
            let g_w = |p: &ModularPoint| -> Result<f64> {
                let a = alpha.alpha(p);
                Ok(alpha.x_log_derivative(p)?.0 * a - a)
            };
            let x_g_w = |p: &ModularPoint| -> Result<f64> {
                // X(X a - a) = a (XLog^2 + X(XLog)) - a XLog
                let a = alpha.alpha(p);
                let xl = alpha.x_log_derivative(p)?.0;
                let x2 = alpha.x_second_derivative(p)?.0;
                Ok(a * (xl * xl + x2) - a * xl)
            };
            let mut avg = Vec::with_capacity(times.len());
            let mut bracket = Vec::with_capacity(times.len());
            let mut g_endpoint = Vec::with_capacity(times.len());
            let mut sup_second = 0.0f64;
            let mut acc_g = 0.0f64;
            let mut acc_xg = 0.0f64;
            let mut prev = 0.0f64;
            for &t in times {
                let seg = |f: &dyn Fn(&ModularPoint) -> Result<f64>, lo: f64, hi: f64| {
                    crate::numerics::quad::adaptive_simpson(
                        |s| {
                            let p = reduce(&horocycle(&x.rep, s)).expect("orbit point reduces");
                            f(&p).expect("field evaluates")
                        },
                        lo,
                        hi,
                        alpha.tol.quad_abs.max(alpha.tol.orbit_quad_rel * (hi - lo).abs()),
                    )
                };
                acc_g += seg(&g_w, prev, t)?;
                acc_xg += seg(&x_g_w, prev, t)?;
                prev = t;
                let p_t = reduce(&horocycle(&x.rep, t))?;
                let g_t = g_w(&p_t)?;
                let xg_here = x_g_w(&p_t)?.abs();
                sup_second = sup_second.max(xg_here);
                avg.push(n_abs * (acc_g / t + 1.0).abs());
                bracket.push(n_abs * ((acc_xg / t).abs() + (g_t - acc_g / t).abs()));
                g_endpoint.push(g_t);
            }
            Ok(FlowFields {
                avg_xlog: avg,
                bracket,
                g_endpoint,
                g_start: g_w(x)?,
                sup_second,
            })
        }
        _ => unreachable!("flow_fields is only called for flow systems"),
    }
}

/// Map-side multiplier sums along the backward orbit.
struct MapFields {
    avg_first: Vec<f64>,
    avg_second: Vec<f64>,
}

fn map_fields(system: &ConditionSystem, x: &TorusPoint, steps: &[usize]) -> MapFields {
    let (map, first, scale): (TorusMap, FourierObservable, f64) = match system {
        ConditionSystem::Skew(s) => (
            TorusMap::rotation(s.rotation),
            s.eta_tilde().derivative_p(0),
            s.xi0_abs(),
        ),
        ConditionSystem::Furstenberg(f) => {
            let h_tilde = f.h[f.j - 2].scale(TAU * f.k as f64);
            (
                f.base_map(),
                h_tilde.derivative_p(f.j - 2),
                f.h_constant_abs(),
            )
        }
        _ => unreachable!("map_fields is only called for map systems"),
    };
    let second = {
        let axis = map.dim() - 1;
        first.derivative_p(axis)
    };
    let n_max = *steps.last().unwrap_or(&1);
    let mut cur = x.coords.clone();
    let mut sum1 = num_complex::Complex64::new(0.0, 0.0);
    let mut sum2 = num_complex::Complex64::new(0.0, 0.0);
    let mut avg_first = Vec::with_capacity(steps.len());
    let mut avg_second = Vec::with_capacity(steps.len());
    let mut next_record = 0usize;
    for l in 1..=n_max {
        map.apply_inverse(&mut cur);
        sum1 += first.eval(&cur);
        sum2 += second.eval(&cur);
        while next_record < steps.len() && steps[next_record] == l {
            avg_first.push(sum1.norm() / l as f64 / scale);
            avg_second.push(sum2.norm() / l as f64 / scale);
            next_record += 1;
        }
    }
    MapFields {
        avg_first,
        avg_second,
    }
}

/// Everything needed to assemble a condition report: the three
/// outcomes, computed from a single shared pass over the samples.
pub struct ConditionProfiles {
    pub cond_i: ConditionOutcome,
    pub cond_ii: ConditionOutcome,
    pub cond_iii: ConditionOutcome,
    pub seed: u64,
    pub samples: usize,
}

/// Evaluate all three condition profiles over `samples` seeded points
/// at the given times (flows: continuous times; maps: integer steps,
/// passed as their f64 values). Times must cover at least two decades.
pub fn condition_profiles(
    system: &ConditionSystem,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConditionProfiles> {
    assert!(!times.is_empty() && samples >= 2);
    let t_first = times.first().copied().unwrap();
    let t_last = times.last().copied().unwrap();
    assert!(
        t_last / t_first >= 99.0,
        "condition profiles need at least two decades of times"
    );
    let workers = effective_workers(None);

    // Per-sample multiplier values: (cond_i row, cond_ii row, |G| row,
    // g endpoint rows for cond iii).
    struct SampleRow {
        cond_i: Vec<f64>,
        cond_ii: Vec<f64>,
        diff_iii: Vec<f64>,
        sup_g: f64,
        sup_second: f64,
    }

    let rows: Vec<Result<SampleRow>> = if system.is_flow() {
        par_map_indexed(samples, workers, |i| {
            let mut rng = Rng::for_sample(seed, StreamId::Conditions, i as u64);
            let x = ModularPoint::sample(&mut rng);
            let f = flow_fields(system, &x, times)?;
            let sup_g = f
                .g_endpoint
                .iter()
                .chain(std::iter::once(&f.g_start))
                .fold(0.0f64, |a, &b| a.max(b.abs()));
            Ok(SampleRow {
                diff_iii: f
                    .g_endpoint
                    .iter()
                    .map(|g| (g - f.g_start).abs())
                    .collect(),
                cond_i: f.avg_xlog,
                cond_ii: f.bracket,
                sup_g,
                sup_second: f.sup_second,
            })
        })
    } else {
        let steps: Vec<usize> = times.iter().map(|&t| t.round() as usize).collect();
        par_map_indexed(samples, workers, |i| {
            let mut rng = Rng::for_sample(seed, StreamId::Conditions, i as u64);
            let dim = match system {
                ConditionSystem::Skew(_) => 1,
                ConditionSystem::Furstenberg(f) => f.j - 1,
                _ => unreachable!(),
            };
            let x = TorusPoint::new((0..dim).map(|_| rng.next_f64()).collect());
            let f = map_fields(system, &x, &steps);
            Ok(SampleRow {
                cond_i: f.avg_first,
                cond_ii: f.avg_second,
                diff_iii: vec![0.0; times.len()],
                sup_g: 0.0,
                sup_second: 0.0,
            })
        })
    };
    let mut ok_rows = Vec::with_capacity(samples);
    for r in rows {
        ok_rows.push(r?);
    }

    let half = (samples / 2).max(1);
    let sup_over = |pick: &dyn Fn(&SampleRow) -> &Vec<f64>, upto: usize| -> Vec<f64> {
        (0..times.len())
            .map(|j| {
                ok_rows[..upto]
                    .iter()
                    .map(|r| pick(r)[j])
                    .fold(0.0f64, f64::max)
            })
            .collect()
    };

    let profile_of = |pick: &dyn Fn(&SampleRow) -> &Vec<f64>| CommutatorProfile {
        beta: 1.0,
        times: times.to_vec(),
        multiplier_sup: sup_over(pick, samples),
        multiplier_sup_half: sup_over(pick, half),
        seed,
        samples,
    };

    // Condition (i): tail estimate must be < 1.
    let p_i = profile_of(&|r| &r.cond_i);
    let est_i = p_i.tail_estimate();
    let est_i_half = p_i.tail_estimate_half();
    let delta_i = (est_i - est_i_half).abs();
    let margin_i = (1.0 - est_i).abs();
    let verdict_i = if est_i >= 1.0 {
        Verdict::Fail
    } else if delta_i > 0.25 * margin_i {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let cond_i = ConditionOutcome {
        estimate: est_i,
        analytic_bound: None,
        refinement_delta: delta_i,
        verdict: verdict_i,
        profile: p_i,
    };

    // Condition (ii): finite and stable (tail variation < 20%).
    let p_ii = profile_of(&|r| &r.cond_ii);
    let est_ii = p_ii
        .multiplier_sup
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
        * SUP_INFLATION;
    let bound_ii = match system {
        ConditionSystem::FlowTimeChange { .. } | ConditionSystem::FlowTwisted { .. } => {
            let sup2 = ok_rows.iter().map(|r| r.sup_second).fold(0.0f64, f64::max);
            Some(4.0 + sup2)
        }
        ConditionSystem::Skew(s) => {
            Some(s.eta_tilde().derivative_p(0).derivative_p(0).sup_bound() / s.xi0_abs())
        }
        ConditionSystem::Furstenberg(f) => Some(
            f.h[f.j - 2]
                .scale(TAU * f.k as f64)
                .derivative_p(f.j - 2)
                .derivative_p(f.j - 2)
                .sup_bound()
                / f.h_constant_abs(),
        ),
    };
    let variation = p_ii.tail_variation();
    let verdict_ii = if !est_ii.is_finite() {
        Verdict::Fail
    } else if variation < 0.20 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let est_ii_half = p_ii
        .multiplier_sup_half
        .iter()
        .fold(0.0f64, |a, &b| a.max(b))
        * SUP_INFLATION;
    let cond_ii = ConditionOutcome {
        estimate: est_ii,
        analytic_bound: bound_ii,
        refinement_delta: (est_ii - est_ii_half).abs(),
        verdict: verdict_ii,
        profile: p_ii,
    };

    // Condition (iii): exactly zero for maps; difference-field bound
    // for flows.
    let p_iii = profile_of(&|r| &r.diff_iii);
    let cond_iii = if system.is_flow() {
        let est = p_iii.multiplier_sup.iter().fold(0.0f64, |a, &b| a.max(b));
        let sup_g = ok_rows.iter().map(|r| r.sup_g).fold(0.0f64, f64::max);
        let bound = 2.0 * sup_g * SUP_INFLATION;
        let est_half = p_iii
            .multiplier_sup_half
            .iter()
            .fold(0.0f64, |a, &b| a.max(b));
        let delta = (est - est_half).abs();
        let margin = (bound - est).abs();
        let verdict = if est > bound {
            Verdict::Fail
        } else if delta > 0.25 * margin.max(1e-300) && est > 0.0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        ConditionOutcome {
            estimate: est,
            analytic_bound: Some(bound),
            refinement_delta: delta,
            verdict,
            profile: p_iii,
        }
    } else {
        // The limit operator is multiplication by a constant, so the
        // commutator vanishes identically: literal zero, not a tolerance.
        ConditionOutcome {
            estimate: 0.0,
            analytic_bound: Some(0.0),
            refinement_delta: 0.0,
            verdict: Verdict::Pass,
            profile: p_iii,
        }
    };

    Ok(ConditionProfiles {
        cond_i,
        cond_ii,
        cond_iii,
        seed,
        samples,
    })
}

/// Individual accessors matching the per-condition entry points.
pub fn cond_i_profile(
    system: &ConditionSystem,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConditionOutcome> {
    Ok(condition_profiles(system, times, samples, seed)?.cond_i)
}

pub fn cond_ii_profile(
    system: &ConditionSystem,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConditionOutcome> {
    Ok(condition_profiles(system, times, samples, seed)?.cond_ii)
}

pub fn cond_iii_profile(
    system: &ConditionSystem,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConditionOutcome> {
    Ok(condition_profiles(system, times, samples, seed)?.cond_iii)
}

/// The assembled report emitted as JSON by the experiment layer.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub system: String,
    pub preliminary: Preliminary,
    pub condition_i: ConditionOutcome,
    pub condition_ii: ConditionOutcome,
    pub condition_iii: ConditionOutcome,
    pub overall: String,
    pub caveats: Vec<String>,
    pub master_seed: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Preliminary {
    pub b1: String,
    pub b2: String,
}

/// Combine the three outcomes into the overall verdict.
pub fn assemble_report(system: &ConditionSystem, profiles: &ConditionProfiles) -> ConditionReport {
    let all_pass = [
        profiles.cond_i.verdict,
        profiles.cond_ii.verdict,
        profiles.cond_iii.verdict,
    ]
    .iter()
    .all(|v| *v == Verdict::Pass);
    let overall = if all_pass {
        "hypotheses numerically consistent".to_string()
    } else {
        "hypotheses not numerically consistent".to_string()
    };
    let mut caveats = vec![
        "limsup surrogate: max over the final decade of the time grid, inflated 10%".to_string(),
        "sup norms estimated over finite seeded samples (Monte Carlo confidence only)".to_string(),
    ];
    if system.is_flow() {
        caveats.push(
            "finite-volume extrapolation: the base lattice is non-cocompact, so \
             unique-ergodicity-based verdicts are extrapolations, not theorem checks"
                .to_string(),
        );
    }
    let (b1, b2) = system.preliminary();
    ConditionReport {
        system: system.describe(),
        preliminary: Preliminary { b1, b2 },
        condition_i: profiles.cond_i.clone(),
        condition_ii: profiles.cond_ii.clone(),
        condition_iii: profiles.cond_iii.clone(),
        overall,
        caveats,
        master_seed: profiles.seed,
        samples: profiles.samples,
    }
}

/// Full pipeline: profiles plus assembled report.
pub fn condition_report(
    system: &ConditionSystem,
    times: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ConditionReport> {
    let profiles = condition_profiles(system, times, samples, seed)?;
    Ok(assemble_report(system, &profiles))
}

/// Log-spaced times covering [t_min, t_max] with the given resolution.
pub fn log_times(t_min: f64, t_max: f64, per_decade: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min);
    let n = ((t_max / t_min).log10() * per_decade as f64).ceil() as usize;
    let mut out: Vec<f64> = (0..=n)
        .map(|i| t_min * 10f64.powf(i as f64 / per_decade as f64))
        .take_while(|&t| t <= t_max * (1.0 + 1e-12))
        .collect();
    if *out.last().unwrap() < t_max {
        out.push(t_max);
    }
    out
}

/// Log-spaced integer steps (deduplicated) covering [n_min, n_max].
pub fn log_steps(n_min: usize, n_max: usize, per_decade: usize) -> Vec<f64> {
    let mut out: Vec<usize> = log_times(n_min as f64, n_max as f64, per_decade)
        .into_iter()
        .map(|t| t.round() as usize)
        .collect();
    out.dedup();
    out.into_iter().map(|n| n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::ObservableId;
    use crate::time_change::normalize_alpha;
    use crate::torus::GOLDEN_ROTATION;

    #[test]
    fn furstenberg_h_zero_all_pass_and_iii_exactly_zero() {
        let spec =
            FurstenbergSpec::dim2(GOLDEN_ROTATION, 1, FourierObservable::zero(1), 1).unwrap();
        let sys = ConditionSystem::Furstenberg(&spec);
        let times = log_steps(10, 2000, 4);
        let report = condition_report(&sys, &times, 16, 5).unwrap();
        assert_eq!(report.condition_i.verdict, Verdict::Pass);
        assert_eq!(report.condition_i.estimate, 0.0);
        assert_eq!(report.condition_ii.verdict, Verdict::Pass);
        assert_eq!(report.condition_iii.estimate, 0.0);
        assert_eq!(report.condition_iii.verdict, Verdict::Pass);
        assert_eq!(report.overall, "hypotheses numerically consistent");
        assert_eq!(report.preliminary.b1, "I");
    }

    #[test]
    fn skew_zero_mean_trig_poly_tail_is_small() {
        let eta = FourierObservable::cosine(1, vec![1], 0.05);
        let spec = SkewProductSpec::new(GOLDEN_ROTATION, 1, eta, 1).unwrap();
        let sys = ConditionSystem::Skew(&spec);
        let times = log_steps(10, 10_000, 4);
        let profiles = condition_profiles(&sys, &times, 32, 9).unwrap();
        assert!(profiles.cond_i.estimate < 0.1, "tail {}", profiles.cond_i.estimate);
        assert_eq!(profiles.cond_i.verdict, Verdict::Pass);
        // Higher-n oracle: the sup at n = 1e4 is well below the n = 10 value.
        let sup_first = profiles.cond_i.profile.multiplier_sup[0];
        let sup_last = *profiles.cond_i.profile.multiplier_sup.last().unwrap();
        assert!(sup_last < 0.1 * sup_first + 1e-12);
    }

    #[test]
    fn skew_cond_ii_within_twice_analytic_bound() {
        let eta = FourierObservable::cosine(1, vec![2], 0.04);
        let spec = SkewProductSpec::new(GOLDEN_ROTATION, 1, eta, 1).unwrap();
        let sys = ConditionSystem::Skew(&spec);
        let times = log_steps(10, 2000, 4);
        let profiles = condition_profiles(&sys, &times, 24, 3).unwrap();
        let bound = profiles.cond_ii.analytic_bound.unwrap();
        // The Birkhoff average of the second-derivative field starts near
        // its sup and decays; the estimate stays within twice the bound.
        assert!(profiles.cond_ii.estimate <= 2.0 * bound);
        assert_eq!(profiles.cond_ii.verdict, Verdict::Pass);
    }

    #[test]
    fn flow_unit_alpha_multiplier_is_machine_zero() {
        let alpha = normalize_alpha(ObservableId::Discriminant, 0.0, 0, 1).unwrap();
        let sys = ConditionSystem::FlowTimeChange { alpha: &alpha };
        let times = log_times(1.0, 100.0, 3);
        let profiles = condition_profiles(&sys, &times, 4, 11).unwrap();
        assert_eq!(profiles.cond_i.estimate, 0.0);
        // G = -1 everywhere: the difference field vanishes identically.
        assert_eq!(profiles.cond_iii.estimate, 0.0);
        assert_eq!(profiles.cond_iii.verdict, Verdict::Pass);
    }

    #[test]
    fn twisted_unit_alpha_multiplier_is_machine_zero() {
        let alpha = normalize_alpha(ObservableId::Discriminant, 0.0, 0, 1).unwrap();
        let sys = ConditionSystem::FlowTwisted {
            alpha: &alpha,
            theta_mode: 3,
        };
        let times = log_times(1.0, 100.0, 3);
        let profiles = condition_profiles(&sys, &times, 4, 11).unwrap();
        assert!(profiles.cond_i.estimate < 1e-12);
        assert!(profiles.cond_iii.estimate < 1e-12);
    }

    #[test]
    fn flow_small_eps_tail_below_one() {
        let alpha = normalize_alpha(ObservableId::Discriminant, 0.1, 20_000, 21).unwrap();
        let sys = ConditionSystem::FlowTimeChange { alpha: &alpha };
        let times = log_times(1.0, 150.0, 3);
        let profiles = condition_profiles(&sys, &times, 6, 13).unwrap();
        assert!(profiles.cond_i.estimate < 1.0, "tail {}", profiles.cond_i.estimate);
        assert_eq!(profiles.cond_i.verdict, Verdict::Pass);
        // Condition (iii) respects the triangle-inequality bound on the
        // same samples.
        assert!(
            profiles.cond_iii.estimate <= profiles.cond_iii.analytic_bound.unwrap() + 1e-12
        );
        // Condition (ii) estimate within the analytic surrogate.
        assert!(profiles.cond_ii.estimate <= profiles.cond_ii.analytic_bound.unwrap());
    }

    #[test]
    fn seed_stability_of_verdicts() {
        let eta = FourierObservable::cosine(1, vec![1], 0.05);
        let spec = SkewProductSpec::new(GOLDEN_ROTATION, 1, eta, 1).unwrap();
        let sys = ConditionSystem::Skew(&spec);
        let times = log_steps(10, 3000, 4);
        let a = condition_profiles(&sys, &times, 24, 101).unwrap();
        let b = condition_profiles(&sys, &times, 24, 202).unwrap();
        assert_eq!(a.cond_i.verdict, b.cond_i.verdict);
        assert_eq!(a.cond_ii.verdict, b.cond_ii.verdict);
        assert_eq!(a.cond_iii.verdict, b.cond_iii.verdict);
    }

    #[test]
    fn condition_i_tail_weakly_decreasing_start() {
        // The tail estimate does not increase when the window's lower
        // end grows (Birkhoff averages of zero-mean fields decay).
        let eta = FourierObservable::cosine(1, vec![1], 0.05);
        let spec = SkewProductSpec::new(GOLDEN_ROTATION, 1, eta, 1).unwrap();
        let sys = ConditionSystem::Skew(&spec);
        let narrow = condition_profiles(&sys, &log_steps(10, 1000, 4), 16, 7).unwrap();
        let wide = condition_profiles(&sys, &log_steps(100, 10_000, 4), 16, 7).unwrap();
        assert!(wide.cond_i.estimate <= narrow.cond_i.estimate + 1e-12);
    }
}
