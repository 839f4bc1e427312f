use std::f64::consts::TAU;

use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::fixed_points::{newton_polish, uniform_roots};
use super::integrate::{Trajectory, DEFAULT_DT, DEFAULT_T_END, DIVERGENCE_GUARD};
use crate::error::{Error, Result};
use crate::model::{meanfield_rhs, ModeAmplitudes, SystemParams, C64, PUMP};
use crate::ode::{rk4_step, step_count};
use crate::stability::stability_of;

pub const DEFAULT_TRANSIENT_FRACTION: f64 = 0.5;
/// Time-averaged `|a1|` above which the side modes count as populated.
pub const LC_AMPLITUDE_THRESHOLD: f64 = 1e-3;
/// Peak-to-mean ratio of the power spectrum required for a limit cycle.
pub const LC_PROMINENCE_THRESHOLD: f64 = 10.0;
/// `|rhs|` below which the end of a trajectory is treated as stationary.
pub const FIXED_POINT_TOL: f64 = 1e-6;
/// Side-mode amplitude below which a stationary state counts as uniform.
pub const UNIFORM_TOL: f64 = 1e-6;
/// Merge radius for stationary end states (Euclidean, real coordinates).
pub const CLUSTER_TOL_FIXED: f64 = 1e-4;
/// Relative merge tolerance on `(omega_LC, <n1>)` for limit cycles.
pub const CLUSTER_TOL_LC: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum AttractorKind {
    LP,
    HP,
    LC,
    Unstable,
    Unclassified,
}

impl AttractorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttractorKind::LP => "LP",
            AttractorKind::HP => "HP",
            AttractorKind::LC => "LC",
            AttractorKind::Unstable => "unstable",
            AttractorKind::Unclassified => "unclassified",
        }
    }
}

/// Phase-locking diagnostics of a limit-cycle window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcDiagnostics {
    /// `std(|a1 a3|) / mean(|a1 a3|)`.
    pub product_rel_std: f64,
    /// Linear drift of `2 phi2 - phi1 - phi3` accumulated over one period (rad).
    pub phase_drift_per_period: f64,
    /// Spectral peak-to-mean ratio of `Re a1`.
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorLabel {
    pub kind: AttractorKind,
    pub fixed_point: Option<ModeAmplitudes>,
    pub lc_frequency: Option<f64>,
    /// Time-averaged `|a1|` in the window.
    pub lc_amplitude: Option<f64>,
    /// `|rhs|` at the reported state (last window sample for a limit cycle).
    pub residual: f64,
    /// Window-averaged populations.
    pub mean_populations: [f64; 3],
    pub lc: Option<LcDiagnostics>,
}

impl AttractorLabel {
    fn bare(kind: AttractorKind, residual: f64, mean_populations: [f64; 3]) -> Self {
        Self {
            kind,
            fixed_point: None,
            lc_frequency: None,
            lc_amplitude: None,
            residual,
            mean_populations,
            lc: None,
        }
    }

    pub fn unstable() -> Self {
        Self::bare(AttractorKind::Unstable, f64::INFINITY, [f64::NAN; 3])
    }
}

/// LP/HP name of a uniform stationary state with population `n2`.
///
/// Among coexisting uniform states the smallest population is LP and the
/// largest HP. A lone uniform state is named by the sign of `D2 + 2 U n2`,
/// the sign of the symplectic norm of its positive-frequency excitation.
pub fn uniform_kind(p: &SystemParams, n2: f64) -> AttractorKind {
    let roots = uniform_roots(p);
    if roots.len() <= 1 {
        return if p.delta[PUMP] + 2.0 * p.u0 * n2 >= 0.0 {
            AttractorKind::LP
        } else {
            AttractorKind::HP
        };
    }
    let (idx, _) = roots
        .iter()
        .enumerate()
        .map(|(i, r)| (i, (r.n2 - n2).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty");
    if idx == 0 {
        AttractorKind::LP
    } else if idx == roots.len() - 1 {
        AttractorKind::HP
    } else {
        AttractorKind::Unclassified
    }
}

/// Dominant angular frequency of a real, uniformly sampled signal.
///
/// Mean removed, zero-padded to four times the next power of two, peak refined
/// by a parabola through the three highest bins. Returns `(omega, prominence)`.
pub fn dominant_frequency(signal: &[f64], sample_dt: f64) -> Option<(f64, f64)> {
    if signal.len() < 8 {
        return None;
    }
    let mean = signal.iter().sum::<f64>() / signal.len() as f64;
    let n = signal.len().next_power_of_two() * 4;
    let mut buf: Vec<C64> = signal.iter().map(|x| C64::new(x - mean, 0.0)).collect();
    buf.resize(n, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let power: Vec<f64> = buf[..n / 2].iter().map(|z| z.norm_sqr()).collect();
    let (k, &peak) = power
        .iter()
        .enumerate()
        .skip(1)
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    let avg = power[1..].iter().sum::<f64>() / (power.len() - 1) as f64;
    if !(peak > 0.0) {
        return None;
    }
    let mut shift = 0.0;
    if k + 1 < power.len() {
        let (a, b, c) = (power[k - 1], peak, power[k + 1]);
        let den = a - 2.0 * b + c;
        if den != 0.0 {
            shift = (0.5 * (a - c) / den).clamp(-0.5, 0.5);
        }
    }
    let omega = TAU * (k as f64 + shift) / (n as f64 * sample_dt);
    Some((omega, peak / avg))
}

fn unwrap(phases: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for ph in phases {
        match out.last() {
            None => out.push(ph),
            Some(&prev) => {
                let mut d = ph - prev.rem_euclid(TAU);
                d = (d + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
                out.push(prev + d);
            }
        }
    }
    out
}

fn slope(t: &[f64], y: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in t.iter().zip(y) {
        num += (a - tm) * (b - ym);
        den += (a - tm) * (a - tm);
    }
    num / den
}

fn mean_std(x: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = x.clone().count() as f64;
    let m = x.clone().sum::<f64>() / n;
    let v = x.map(|v| (v - m) * (v - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Classify the post-transient window of a sampled trajectory.
fn classify_window(p: &SystemParams, times: &[f64], states: &[ModeAmplitudes]) -> AttractorLabel {
    let count = states.len() as f64;
    let mut mean_pop = [0.0; 3];
    for s in states {
        for (m, n) in s.populations().iter().enumerate() {
            mean_pop[m] += n / count;
        }
    }
    let last = *states.last().expect("non-empty window");
    let res = meanfield_rhs(p, &last).norm();

    if res <= FIXED_POINT_TOL {
        if let Some(fp) = newton_polish(p, &last) {
            let r = meanfield_rhs(p, &fp).norm();
            let stable = stability_of(p, &fp).map(|s| s.stable).unwrap_or(false);
            let kind = if !stable {
                AttractorKind::Unstable
            } else if fp.alpha[0].norm() < UNIFORM_TOL && fp.alpha[2].norm() < UNIFORM_TOL {
                uniform_kind(p, fp.alpha[PUMP].norm_sqr())
            } else {
                AttractorKind::Unclassified
            };
            return AttractorLabel {
                fixed_point: Some(fp),
                ..AttractorLabel::bare(kind, r, fp.populations())
            };
        }
    }

    let side = states.iter().map(|s| s.alpha[0].norm()).sum::<f64>() / count;
    if side > LC_AMPLITUDE_THRESHOLD && states.len() >= 8 {
        let dt_s = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
        let re: Vec<f64> = states.iter().map(|s| s.alpha[0].re).collect();
        if let Some((mut omega, prominence)) = dominant_frequency(&re, dt_s) {
            if prominence >= LC_PROMINENCE_THRESHOLD && omega > 0.0 {
                let (m1, s1) = mean_std(states.iter().map(|s| s.alpha[0].norm()));
                if s1 < 1e-2 * m1 {
                    let ph = unwrap(states.iter().map(|s| s.alpha[0].arg()));
                    let w = slope(times, &ph).abs();
                    let bin = TAU / (times[times.len() - 1] - times[0]);
                    if (w - omega).abs() < 2.0 * bin {
                        omega = w;
                    }
                }
                let (pm, ps) = mean_std(states.iter().map(|s| (s.alpha[0] * s.alpha[2]).norm()));
                let phi0 = unwrap(states.iter().map(|s| s.derived().phase_combo));
                let drift = slope(times, &phi0).abs() * TAU / omega;
                return AttractorLabel {
                    lc_frequency: Some(omega),
                    lc_amplitude: Some(side),
                    lc: Some(LcDiagnostics {
                        product_rel_std: if pm > 0.0 { ps / pm } else { f64::INFINITY },
                        phase_drift_per_period: drift,
                        prominence,
                    }),
                    ..AttractorLabel::bare(AttractorKind::LC, res, mean_pop)
                };
            }
        }
    }
    AttractorLabel::bare(AttractorKind::Unclassified, res, mean_pop)
}

/// Label the long-time behaviour of `traj`, discarding the leading
/// `transient_fraction` of it. The parameters are needed to name uniform
/// states and to test their stability.
pub fn detect_limit_cycle(traj: &Trajectory, transient_fraction: f64, p: &SystemParams) -> Result<AttractorLabel> {
    if traj.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    if !(0.0..1.0).contains(&transient_fraction) {
        return Err(Error::InvalidArgument(format!(
            "transient fraction must lie in [0, 1), got {transient_fraction}"
        )));
    }
    let t0 = traj.times[0] + transient_fraction * (traj.times[traj.len() - 1] - traj.times[0]);
    let start = traj.times.partition_point(|&t| t < t0).min(traj.len() - 1);
    Ok(classify_window(p, &traj.times[start..], &traj.states[start..]))
}

/// Settings for classifying the attractor reached from one initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SettleOptions {
    pub t_end: f64,
    pub dt: f64,
    pub transient_fraction: f64,
    /// Window sampling stride in integration steps.
    pub stride: usize,
    /// Stop early once `|rhs|` drops below this (checked every `check_every` steps).
    pub early_exit_residual: f64,
    pub check_every: usize,
}

impl Default for SettleOptions {
    fn default() -> Self {
        Self {
            t_end: DEFAULT_T_END,
            dt: DEFAULT_DT,
            transient_fraction: DEFAULT_TRANSIENT_FRACTION,
            stride: 10,
            early_exit_residual: 1e-9,
            check_every: 1000,
        }
    }
}

/// Integrate from `s0` and classify the end behaviour without storing the
/// transient. Divergent runs are labelled unstable.
pub fn settle(p: &SystemParams, s0: &ModeAmplitudes, opts: &SettleOptions) -> AttractorLabel {
    let steps = step_count(opts.t_end, opts.dt);
    let first_kept = ((opts.transient_fraction * steps as f64).floor() as usize).min(steps);
    let stride = opts.stride.max(1);
    let f = |s: &ModeAmplitudes| meanfield_rhs(p, s);
    let mut s = *s0;
    let mut times = Vec::new();
    let mut states = Vec::new();
    for k in 1..=steps {
        s = rk4_step(&f, &s, opts.dt);
        if !(s.max_abs() <= DIVERGENCE_GUARD) {
            return AttractorLabel::unstable();
        }
        if k >= first_kept && (k - first_kept).is_multiple_of(stride) {
            times.push(k as f64 * opts.dt);
            states.push(s);
        }
        if opts.check_every > 0 && k % opts.check_every == 0 && meanfield_rhs(p, &s).norm() < opts.early_exit_residual {
            return classify_window(p, &[k as f64 * opts.dt], &[s]);
        }
    }
    if states.is_empty() {
        times.push(steps as f64 * opts.dt);
        states.push(s);
    }
    classify_window(p, &times, &states)
}

/// One distinct attractor in a census.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttractorClass {
    pub representative: AttractorLabel,
    pub count: usize,
    /// Index of the first initial condition that reached it.
    pub first_ic: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Census {
    pub labels: Vec<AttractorLabel>,
    pub classes: Vec<AttractorClass>,
}

impl Census {
    pub fn kinds(&self) -> std::collections::BTreeSet<AttractorKind> {
        self.classes.iter().map(|c| c.representative.kind).collect()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

fn same_attractor(a: &AttractorLabel, b: &AttractorLabel) -> bool {
    if a.kind != b.kind {
        return false;
    }
    match (a.fixed_point, b.fixed_point, a.lc_frequency, b.lc_frequency) {
        (Some(x), Some(y), _, _) => (x - y).norm() <= CLUSTER_TOL_FIXED,
        (None, None, Some(w1), Some(w2)) => {
            rel_close(w1, w2, CLUSTER_TOL_LC) && rel_close(a.mean_populations[0], b.mean_populations[0], CLUSTER_TOL_LC)
        }
        (None, None, None, None) => true,
        _ => false,
    }
}

/// Group labels into distinct attractors, in order of first appearance.
pub fn cluster_labels(labels: &[AttractorLabel]) -> Vec<AttractorClass> {
    let mut classes: Vec<AttractorClass> = Vec::new();
    for (i, l) in labels.iter().enumerate() {
        match classes.iter_mut().find(|c| same_attractor(&c.representative, l)) {
            Some(c) => c.count += 1,
            None => classes.push(AttractorClass {
                representative: l.clone(),
                count: 1,
                first_ic: i,
            }),
        }
    }
    classes
}

/// Settle every initial condition (in parallel) and cluster the outcomes.
pub fn attractor_census(p: &SystemParams, ics: &[ModeAmplitudes], opts: &SettleOptions) -> Census {
    let labels: Vec<AttractorLabel> = ics.par_iter().map(|s0| settle(p, s0, opts)).collect();
    let classes = cluster_labels(&labels);
    Census { labels, classes }
}

/// Manufactured trajectory helper for tests and examples.
pub fn trajectory_from_fn(t_end: f64, dt: f64, f: impl Fn(f64) -> ModeAmplitudes) -> Trajectory {
    let steps = step_count(t_end, dt);
    let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
    let states = times.iter().map(|&t| f(t)).collect();
    Trajectory { times, states, dt }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{integrate_rk4_sampled, random_initial_conditions};

    #[test]
    fn fft_peak_of_a_cosine() {
        let dt = 0.01;
        let sig: Vec<f64> = (0..20000).map(|k| (2.7 * k as f64 * dt).cos()).collect();
        let (w, prom) = dominant_frequency(&sig, dt).unwrap();
        assert!((w - 2.7).abs() < TAU / 200.0, "{w}");
        assert!(prom > 100.0);
    }

    #[test]
    fn manufactured_limit_cycle() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let traj = trajectory_from_fn(100.0, 0.01, |t| {
            let ph = C64::from_polar(1.0, 2.7 * t);
            ModeAmplitudes::new(ph * 0.5, C64::new(0.0, -1.0), ph.conj() * 0.5)
        });
        let l = detect_limit_cycle(&traj, 0.5, &p).unwrap();
        assert_eq!(l.kind, AttractorKind::LC);
        let bin = TAU / 50.0;
        assert!((l.lc_frequency.unwrap() - 2.7).abs() < bin);
        assert!((l.lc_amplitude.unwrap() - 0.5).abs() < 1e-12);
        let d = l.lc.unwrap();
        assert!(d.product_rel_std < 1e-12 && d.phase_drift_per_period < 1e-9);
    }

    #[test]
    fn converging_trajectory_is_uniform() {
        let p = SystemParams::equally_spaced(-5.0, -1.0, 3.0);
        let traj = integrate_rk4_sampled(&p, &ModeAmplitudes::uniform(C64::new(0.5, 0.5)), 60.0, 1e-3, 10).unwrap();
        let l = detect_limit_cycle(&traj, 0.5, &p).unwrap();
        assert_eq!(l.kind, AttractorKind::HP);
        assert!(l.lc_frequency.is_none());
        assert!(l.residual <= 1e-10);
    }

    #[test]
    fn uniform_names() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 3.0);
        let roots = uniform_roots(&p);
        assert_eq!(uniform_kind(&p, roots[0].n2), AttractorKind::LP);
        assert_eq!(uniform_kind(&p, roots[1].n2), AttractorKind::Unclassified);
        assert_eq!(uniform_kind(&p, roots[2].n2), AttractorKind::HP);
        let p = SystemParams::equally_spaced(5.0, -1.0, 0.5);
        assert_eq!(uniform_kind(&p, uniform_roots(&p)[0].n2), AttractorKind::LP);
        let p = SystemParams::equally_spaced(-5.0, -1.0, 0.5);
        assert_eq!(uniform_kind(&p, uniform_roots(&p)[0].n2), AttractorKind::HP);
    }

    #[test]
    fn census_is_deterministic_and_clustered() {
        let p = SystemParams::equally_spaced(-5.0, -1.0, 3.0);
        let ics = random_initial_conditions(6, 5.0, 3).unwrap();
        let opts = SettleOptions {
            t_end: 60.0,
            ..Default::default()
        };
        let a = attractor_census(&p, &ics, &opts);
        let b = attractor_census(&p, &ics, &opts);
        assert_eq!(a, b);
        assert_eq!(a.classes.len(), 1);
        assert_eq!(a.classes[0].count, 6);
    }
}
