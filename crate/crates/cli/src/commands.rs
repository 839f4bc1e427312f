//! One function per subcommand: run the pipeline, write artifacts, return a summary.

use std::fmt::Write as _;

use kerr_cavity::closed::{boundary_pump, classify_region, landscape_extrema};
use kerr_cavity::compare::{bistable_window, compare, CompareOptions};
use kerr_cavity::cumulant::{
    cumulant_sweep, integrate_cumulant_sampled, integrate_single_mode, single_mode_sweep, CorrelationState,
    MomentSweepOptions, SingleModeState,
};
use kerr_cavity::dynamics::{
    find_fixed_points, integrate_rk4_sampled, random_initial_conditions, uniform_roots, SettleOptions,
    CLUSTER_TOL_FIXED, CLUSTER_TOL_LC, FIXED_POINT_TOL, LC_AMPLITUDE_THRESHOLD, LC_PROMINENCE_THRESHOLD, UNIFORM_TOL,
};
use kerr_cavity::keldysh::{spectral_function, SpectralMethod};
use kerr_cavity::lindblad::{build_generator, moment_trajectory, oracle_sweep, vacuum, FockConfig};
use kerr_cavity::model::PUMP;
use kerr_cavity::phase_diagram::{overlay_closed_boundary, sweep, SweepOptions};
use kerr_cavity::stability::{
    bogoliubov_matrix, exceptional_point_diagnostics, stability_eigenvalues, COALESCENCE_TOL, EP_CONDITION_TOL,
    EP_GAP_TOL, STABILITY_TOL,
};
use kerr_cavity::{Error, ModeAmplitudes, SystemParams};
use serde::Serialize;
use serde_json::json;

use crate::config::{default_cutoff, Branch, Output, RunConfig};
use crate::output::{num, opt, Artifacts, Table, WriteError};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] Error),
    #[error(transparent)]
    Write(#[from] WriteError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(e) => e.exit_code(),
            CliError::Write(_) => 1,
        }
    }
}

type Run = Result<String, CliError>;

#[derive(Serialize)]
struct Sidecar<'a, T: Serialize> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    columns: &'a [&'static str],
    config: &'a RunConfig,
    details: T,
}

fn finish<T: Serialize>(
    art: &mut Artifacts,
    cfg: &RunConfig,
    command: &str,
    schema: &str,
    table: &Table,
    details: T,
    summary: String,
) -> Run {
    art.csv(&format!("{schema}.csv"), schema, cfg.seed, table)?;
    art.json(
        &format!("{schema}.json"),
        &Sidecar {
            command,
            version: env!("CARGO_PKG_VERSION"),
            seed: cfg.seed,
            columns: &table.columns,
            config: cfg,
            details,
        },
    )?;
    art.text(&format!("{schema}.txt"), &summary)?;
    Ok(summary)
}

fn check_modes(modes: usize) -> Result<(), Error> {
    if modes == 1 || modes == 3 {
        Ok(())
    } else {
        Err(Error::Config(format!("modes must be 1 or 3, got {modes}")))
    }
}

pub fn closed(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    if p.u0 == 0.0 {
        return Err(Error::ZeroInteraction.into());
    }
    let ds = cfg.closed.delta2.values("closed.delta2")?;
    let os = cfg.closed.omega2.values("closed.omega2")?;
    let mut columns = vec!["delta2", "omega2", "n_roots", "region"];
    const SLOT: [[&str; 6]; 3] = [
        ["root1", "kind1", "omega_plus1_re", "omega_plus1_im", "norm_plus1", "norm_minus1"],
        ["root2", "kind2", "omega_plus2_re", "omega_plus2_im", "norm_plus2", "norm_minus2"],
        ["root3", "kind3", "omega_plus3_re", "omega_plus3_im", "norm_plus3", "norm_minus3"],
    ];
    for s in SLOT {
        columns.extend(s);
    }
    columns.push("error");
    let mut t = Table::new(columns);
    let mut counts = [0usize; 2];
    for &d in &ds {
        for &o in &os {
            let q = p.with_delta2(d).with_omega2(o);
            let mut row = vec![num(d), num(o)];
            match landscape_extrema(&q).and_then(|ex| Ok((classify_region(&q)?, ex))) {
                Ok((region, ex)) => {
                    counts[if ex.len() == 3 { 1 } else { 0 }] += 1;
                    row.push(region.n_real_roots.to_string());
                    row.push(format!("{:?}", region.label));
                    for k in 0..3 {
                        match ex.get(k) {
                            Some(e) => row.extend([
                                num(e.re_alpha2),
                                e.kind.as_str().to_string(),
                                num(e.eigenfrequencies[0].re),
                                num(e.eigenfrequencies[0].im),
                                num(e.norms[0]),
                                num(e.norms[1]),
                            ]),
                            None => row.extend(std::iter::repeat_n(String::new(), 6)),
                        }
                    }
                    row.push(String::new());
                }
                Err(e) => {
                    row.extend(std::iter::repeat_n(String::new(), 2 + 18));
                    row.push(e.to_string());
                }
            }
            t.push(row);
        }
    }
    let boundary: Vec<(f64, f64)> = if p.u0 < 0.0 { overlay_closed_boundary(&ds, p.u0)? } else { vec![] };
    let summary = format!(
        "closed: {} grid points, {} with one extremum, {} with three\n",
        ds.len() * os.len(),
        counts[0],
        counts[1]
    );
    finish(art, cfg, "closed", "closed", &t, json!({ "boundary": boundary }), summary)
}

fn amplitude_columns(row: &mut Vec<String>, s: &ModeAmplitudes) {
    for a in s.alpha {
        row.push(num(a.re));
        row.push(num(a.im));
    }
    for n in s.populations() {
        row.push(num(n));
    }
}

pub fn trace(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.trace;
    let ics = random_initial_conditions(c.ics, c.ic_radius, cfg.seed)?;
    let mut t = Table::new(vec![
        "ic", "t", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3", "n1", "n2", "n3",
    ]);
    let mut summary = String::new();
    for (i, s0) in ics.iter().enumerate() {
        let tr = integrate_rk4_sampled(&p, s0, c.t_end, c.dt, c.stride)?;
        for (time, s) in tr.times.iter().zip(&tr.states) {
            let mut row = vec![i.to_string(), num(*time)];
            amplitude_columns(&mut row, s);
            t.push(row);
        }
        let n = tr.last().expect("at least the initial state").populations();
        let _ = writeln!(summary, "ic {i}: final populations {:.6} {:.6} {:.6}", n[0], n[1], n[2]);
    }
    finish(art, cfg, "trace", "trace", &t, json!({ "initial_conditions": ics }), summary)
}

pub fn fixed_points(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.fixed_points;
    let mut seeds: Vec<ModeAmplitudes> = uniform_roots(&p).iter().map(|r| r.state).collect();
    if c.seeds > 0 {
        seeds.extend(random_initial_conditions(c.seeds, c.seed_radius, cfg.seed)?);
    }
    let set = find_fixed_points(&p, &seeds);
    let mut t = Table::new(vec![
        "index", "uniform", "re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3", "n1", "n2", "n3", "stable", "max_real",
    ]);
    let mut stable = 0;
    for (i, r) in set.roots.iter().enumerate() {
        let rep = stability_eigenvalues(&bogoliubov_matrix(&p, r))?;
        stable += rep.stable as usize;
        let uniform = r.alpha[0].norm() < UNIFORM_TOL && r.alpha[2].norm() < UNIFORM_TOL;
        let mut row = vec![i.to_string(), uniform.to_string()];
        amplitude_columns(&mut row, r);
        row.push(rep.stable.to_string());
        row.push(num(rep.max_real));
        t.push(row);
    }
    let summary = format!(
        "fixed-points: {} stationary states ({} stable), {} seeds did not converge\n",
        set.roots.len(),
        stable,
        set.failed_seeds
    );
    finish(art, cfg, "fixed-points", "fixed_points", &t, json!({ "failed_seeds": set.failed_seeds }), summary)
}

pub fn stability(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let omegas = match cfg.stability.omega2 {
        Some(g) => g.values("stability.omega2")?,
        None => vec![p.omega2],
    };
    let mut columns = vec!["omega2", "root", "n2", "stable", "max_real", "ep_strict", "ep_coalesced"];
    columns.extend([
        "re1", "im1", "re2", "im2", "re3", "im3", "re4", "im4", "re5", "im5", "re6", "im6",
    ]);
    let mut t = Table::new(columns);
    let mut rows = 0;
    for &o in &omegas {
        let q = p.with_omega2(o);
        for (k, r) in uniform_roots(&q).iter().enumerate() {
            let b = bogoliubov_matrix(&q, &r.state);
            let rep = stability_eigenvalues(&b)?;
            let ep = exceptional_point_diagnostics(&b)?;
            let mut row = vec![
                num(o),
                k.to_string(),
                num(r.n2),
                rep.stable.to_string(),
                num(rep.max_real),
                ep.strict.to_string(),
                ep.coalesced.to_string(),
            ];
            for l in &rep.eigenvalues {
                row.push(num(l.re));
                row.push(num(l.im));
            }
            t.push(row);
            rows += 1;
        }
    }
    let details = json!({
        "stability_tol": STABILITY_TOL,
        "ep_gap_tol": EP_GAP_TOL,
        "ep_condition_tol": EP_CONDITION_TOL,
        "coalescence_tol": COALESCENCE_TOL,
    });
    let summary = format!("stability: {rows} uniform states over {} drive values\n", omegas.len());
    finish(art, cfg, "stability", "stability", &t, details, summary)
}

pub fn spectrum(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.spectrum;
    let method: SpectralMethod = c.method.parse()?;
    let grid = c.omega.values("spectrum.omega")?;
    let roots = uniform_roots(&p);
    let root = match c.branch {
        Branch::Lowest => roots.first(),
        Branch::Highest => roots.last(),
    }
    .ok_or_else(|| Error::InvalidArgument("no uniform stationary state".into()))?;
    let curve = spectral_function(&p, &root.state, &grid, method)?;
    let mut t = Table::new(vec!["omega", "a1", "a2", "a3"]);
    for k in 0..grid.len() {
        t.push(vec![num(grid[k]), num(curve.a[0][k]), num(curve.a[1][k]), num(curve.a[2][k])]);
    }
    let peaks: Vec<f64> = (0..3).map(|m| curve.peak(m).0).collect();
    let weights: Vec<f64> = (0..3).map(|m| curve.weight(m)).collect();
    let details = json!({
        "background": {
            "branch": c.branch,
            "n2": root.n2,
            "alpha2": [root.state.alpha[PUMP].re, root.state.alpha[PUMP].im],
            "stable": stability_eigenvalues(&bogoliubov_matrix(&p, &root.state))?.stable,
        },
        "method": method,
        "normalization": "A_m(w) = -2 Im G^R_m(w), classical fields sqrt(2) times the mean field",
        "peaks": peaks,
        "weights": weights,
    });
    let mut summary = String::new();
    for m in 0..3 {
        let _ = writeln!(summary, "mode {}: peak at {:.4}, weight {:.6}", m + 1, peaks[m], weights[m]);
    }
    finish(art, cfg, "spectrum", "spectrum", &t, details, summary)
}

fn moment_options(t_end: f64, dt: f64, transient_fraction: f64, stride: usize) -> MomentSweepOptions {
    MomentSweepOptions { t_end, dt, transient_fraction, stride }
}

const SWEEP3: [&str; 5] = ["omega2", "n1", "n2", "n3", "abs_a13"];
const SWEEP1: [&str; 3] = ["omega2", "n", "abs_a"];
const TRACE3: [&str; 7] = ["t", "n1", "n2", "n3", "abs_a13", "re_a2", "im_a2"];
const TRACE1: [&str; 4] = ["t", "n", "re_a", "im_a"];

fn columns(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(tail).copied().collect()
}

fn trace3_row(t: f64, c: &CorrelationState) -> Vec<String> {
    let n = c.populations();
    let a2 = c.first[PUMP];
    vec![num(t), num(n[0]), num(n[1]), num(n[2]), num(c.anomalous_at(0, 2).norm()), num(a2.re), num(a2.im)]
}

pub fn cumulant(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.cumulant;
    check_modes(c.modes)?;
    let opts = moment_options(c.t_end, c.dt, c.transient_fraction, c.stride);
    match (c.output, c.modes) {
        (Output::Sweep, 3) => {
            let om = c.omega2.values("cumulant.omega2")?;
            let rows = cumulant_sweep(&p, &om, &opts)?;
            let mut t = Table::new(columns(&SWEEP3, &["n2_spread", "oscillating", "error"]));
            for r in &rows {
                t.push(vec![
                    num(r.omega2),
                    num(r.n[0]),
                    num(r.n[1]),
                    num(r.n[2]),
                    num(r.abs_a13),
                    num(r.n2_spread),
                    r.oscillating.to_string(),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            let osc = rows.iter().filter(|r| r.oscillating).count();
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            let summary = format!("cumulant: {} drive values, {osc} oscillating, {failed} failed\n", rows.len());
            finish(art, cfg, "cumulant", "cumulant_sweep", &t, json!({ "modes": 3 }), summary)
        }
        (Output::Sweep, _) => {
            let om = c.omega2.values("cumulant.omega2")?;
            let rows = single_mode_sweep(&p, &om, &opts)?;
            let mut t = Table::new(columns(&SWEEP1, &["n_spread", "error"]));
            for r in &rows {
                t.push(vec![
                    num(r.omega2),
                    num(r.n),
                    num(r.abs_a),
                    num(r.n_spread),
                    r.error.clone().unwrap_or_default(),
                ]);
            }
            let summary = format!("cumulant: {} drive values, single mode\n", rows.len());
            finish(art, cfg, "cumulant", "cumulant_sweep", &t, json!({ "modes": 1 }), summary)
        }
        (Output::Trace, 3) => {
            let tr = integrate_cumulant_sampled(&p, &CorrelationState::VACUUM, c.t_end, c.dt, c.stride)?;
            let mut t = Table::new(TRACE3.to_vec());
            for (time, s) in tr.times.iter().zip(&tr.states) {
                t.push(trace3_row(*time, s));
            }
            let n = tr.states.last().expect("initial state kept").populations();
            let summary = format!(
                "cumulant: trace to t = {}, final n = {:.6} {:.6} {:.6}, min population {:e}\n",
                c.t_end, n[0], n[1], n[2], tr.min_population
            );
            finish(art, cfg, "cumulant", "cumulant_trace", &t, json!({ "modes": 3 }), summary)
        }
        (Output::Trace, _) => {
            let tr = integrate_single_mode(&p, &SingleModeState::VACUUM, c.t_end, c.dt, c.stride)?;
            let mut t = Table::new(TRACE1.to_vec());
            for (time, s) in tr.times.iter().zip(&tr.states) {
                t.push(vec![num(*time), num(s.n), num(s.a.re), num(s.a.im)]);
            }
            let n = tr.states.last().expect("initial state kept").n;
            let summary = format!("cumulant: single-mode trace to t = {}, final n = {n:.6}\n", c.t_end);
            finish(art, cfg, "cumulant", "cumulant_trace", &t, json!({ "modes": 1 }), summary)
        }
    }
}

pub fn oracle(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.oracle;
    check_modes(c.modes)?;
    let cutoff = c.cutoff.unwrap_or(default_cutoff(c.modes));
    let f = FockConfig::with_cap(c.modes, cutoff, c.dim_cap)?;
    let details = json!({ "modes": c.modes, "cutoff": cutoff, "dim": f.dim() });
    match c.output {
        Output::Sweep => {
            let om = c.omega2.values("oracle.omega2")?;
            let rows = oracle_sweep(&p, &f, &om, c.t_end);
            let lead: &[&'static str] = if c.modes == 3 { &SWEEP3 } else { &SWEEP1 };
            let mut t = Table::new(columns(lead, &["residual", "error"]));
            for r in &rows {
                let mut row = vec![num(r.omega2)];
                match &r.moments {
                    Some(m) if c.modes == 3 => {
                        let n = m.populations();
                        row.extend([num(n[0]), num(n[1]), num(n[2]), num(m.anomalous_at(0, 2).norm())]);
                    }
                    Some(m) => row.extend([num(m.population(PUMP)), num(m.first[PUMP].norm())]),
                    None => row.extend(std::iter::repeat_n(String::new(), lead.len() - 1)),
                }
                row.push(num(r.residual));
                row.push(r.error.clone().unwrap_or_default());
                t.push(row);
            }
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            let summary = format!("oracle: {} drive values at dimension {}, {failed} failed\n", rows.len(), f.dim());
            finish(art, cfg, "oracle", "oracle_sweep", &t, details, summary)
        }
        Output::Trace => {
            let gen = build_generator(&p, &f)?;
            let dt = c.dt.unwrap_or_else(|| gen.suggested_dt());
            let tr = moment_trajectory(&gen, &vacuum(&f), c.t_end, dt, c.stride)?;
            let mut t = Table::new(if c.modes == 3 { TRACE3.to_vec() } else { TRACE1.to_vec() });
            for (time, m) in &tr {
                if c.modes == 3 {
                    t.push(trace3_row(*time, m));
                } else {
                    let a = m.first[PUMP];
                    t.push(vec![num(*time), num(m.population(PUMP)), num(a.re), num(a.im)]);
                }
            }
            let n = tr.last().expect("initial state kept").1.populations();
            let summary = format!(
                "oracle: trace to t = {} with dt = {dt:e}, final n = {:.6} {:.6} {:.6}\n",
                c.t_end, n[0], n[1], n[2]
            );
            finish(art, cfg, "oracle", "oracle_trace", &t, details, summary)
        }
    }
}

pub fn phase_diagram(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.phase_diagram;
    let ds = c.delta2.values("phase-diagram.delta2")?;
    let os = c.omega2.values("phase-diagram.omega2")?;
    let settle = SettleOptions {
        t_end: c.t_end,
        dt: c.dt,
        transient_fraction: c.transient_fraction,
        ..SettleOptions::default()
    };
    let opts = SweepOptions { ics_per_point: c.ics_per_point, ic_radius: c.ic_radius, seed: cfg.seed, settle };
    let res = sweep(&p, &ds, &os, &opts)?;
    let mut t = Table::new(vec![
        "delta2",
        "omega2",
        "region",
        "closed_side",
        "n_attractors",
        "kinds",
        "counts",
        "stability_consistent",
        "error",
    ]);
    let mut tally = std::collections::BTreeMap::new();
    for g in &res {
        *tally.entry(g.region.as_str()).or_insert(0usize) += 1;
        let kinds: Vec<&str> = g.attractors.iter().map(|a| a.kind.as_str()).collect();
        let counts: Vec<String> = g.counts.iter().map(|c| c.to_string()).collect();
        t.push(vec![
            num(g.delta2),
            num(g.omega2),
            g.region.as_str().to_string(),
            g.closed_boundary_side.as_str().to_string(),
            g.attractors.len().to_string(),
            kinds.join(";"),
            counts.join(";"),
            g.stability_consistent.to_string(),
            g.error.clone().unwrap_or_default(),
        ]);
    }
    let boundary: Vec<(f64, f64)> = if p.u0 < 0.0 {
        ds.iter().map(|&d| (d, if d <= 0.0 { 0.0 } else { boundary_pump(d, p.u0).unwrap_or(f64::NAN) })).collect()
    } else {
        vec![]
    };
    let details = json!({
        "settle": settle,
        "ics_per_point": c.ics_per_point,
        "ic_radius": c.ic_radius,
        "tolerances": {
            "fixed_point": FIXED_POINT_TOL,
            "uniform": UNIFORM_TOL,
            "cluster_fixed": CLUSTER_TOL_FIXED,
            "cluster_limit_cycle": CLUSTER_TOL_LC,
            "limit_cycle_amplitude": LC_AMPLITUDE_THRESHOLD,
            "limit_cycle_prominence": LC_PROMINENCE_THRESHOLD,
            "stability": STABILITY_TOL,
            "coalescence": COALESCENCE_TOL,
        },
        "closed_boundary": boundary,
    });
    let mut summary = format!("phase-diagram: {} x {} grid, {} ICs per point\n", ds.len(), os.len(), c.ics_per_point);
    for (r, n) in &tally {
        let _ = writeln!(summary, "  {r}: {n}");
    }
    finish(art, cfg, "phase-diagram", "phase_diagram", &t, details, summary)
}

pub fn compare_cmd(cfg: &RunConfig, art: &mut Artifacts) -> Run {
    let p = cfg.params();
    let c = &cfg.compare;
    check_modes(c.modes)?;
    let cutoff = c.cutoff.unwrap_or(default_cutoff(c.modes));
    let om = c.omega2.values("compare.omega2")?;
    let opts = CompareOptions {
        modes: c.modes,
        cutoff: Some(cutoff),
        oracle_t_end: c.oracle_t_end,
        moments: moment_options(c.t_end, c.dt, c.transient_fraction, c.stride),
    };
    let rows = compare(&p, &om, &opts)?;
    let mut t = Table::new(vec![
        "omega2",
        "mf_n2_1",
        "mf_stable_1",
        "mf_n2_2",
        "mf_stable_2",
        "mf_n2_3",
        "mf_stable_3",
        "cumulant_n2",
        "cumulant_spread",
        "oracle_n2",
        "rel_deviation",
        "in_window",
        "error",
    ]);
    let mut worst_out = 0.0f64;
    for r in &rows {
        let mut row = vec![num(r.omega2)];
        for k in 0..3 {
            match r.branches.get(k) {
                Some(b) => row.extend([num(b.n2), b.stable.to_string()]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        row.extend([
            num(r.cumulant_n2),
            num(r.cumulant_spread),
            opt(r.oracle_n2),
            opt(r.rel_deviation),
            r.in_window.to_string(),
            r.error.clone().unwrap_or_default(),
        ]);
        t.push(row);
        if !r.in_window {
            if let Some(d) = r.rel_deviation {
                worst_out = worst_out.max(d.abs());
            }
        }
    }
    let window = bistable_window(&p);
    let details = json!({ "modes": c.modes, "cutoff": cutoff, "bistable_window": window });
    let summary = format!(
        "compare: {} drive values, window {}, max deviation outside it {:.2}%\n",
        rows.len(),
        window.map(|(a, b)| format!("[{a:.4}, {b:.4}]")).unwrap_or_else(|| "none".into()),
        100.0 * worst_out
    );
    finish(art, cfg, "compare", "compare", &t, details, summary)
}

/// Parameters as they are used, for logging.
pub fn describe(p: &SystemParams) -> String {
    format!(
        "delta = {:?}, gamma = {:?}, u0 = {}, omega2 = {}",
        p.delta, p.gamma, p.u0, p.omega2
    )
}
