//! Truncated-Fock master-equation solver used as a brute-force reference.
//!
//! A single mode is the pumped mode (`delta[1]`, `gamma[1]`, `u0`, `omega2`);
//! three modes carry the full Hamiltonian. Density matrices are dense, operators
//! sparse.

use serde::Serialize;

use crate::cumulant::{pair_index, CorrelationState, PAIRS};
use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::model::{SystemParams, C64, I, PUMP};
use crate::ode::step_count;

pub const DEFAULT_DIM_CAP: usize = 4096;
/// Largest Hilbert dimension for which the superoperator is solved directly.
pub const DIRECT_SOLVE_MAX_DIM: usize = 40;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FockConfig {
    /// 1 (pumped mode only) or 3.
    pub n_modes: usize,
    /// Highest Fock number kept per mode.
    pub cutoff: usize,
    pub cap: usize,
}

impl FockConfig {
    pub fn new(n_modes: usize, cutoff: usize) -> Result<Self> {
        Self::with_cap(n_modes, cutoff, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(n_modes: usize, cutoff: usize, cap: usize) -> Result<Self> {
        if n_modes != 1 && n_modes != 3 {
            return Err(Error::InvalidArgument(format!("n_modes must be 1 or 3, got {n_modes}")));
        }
        if cutoff < 1 {
            return Err(Error::InvalidArgument("cutoff must be at least 1".into()));
        }
        let f = Self { n_modes, cutoff, cap };
        let dim = f.dim();
        if dim > cap {
            return Err(Error::CapExceeded { dim, cap });
        }
        Ok(f)
    }

    pub fn levels(&self) -> usize {
        self.cutoff + 1
    }

    pub fn dim(&self) -> usize {
        self.levels().pow(self.n_modes as u32)
    }

    /// Physical mode indices represented in the basis.
    pub fn modes(&self) -> &'static [usize] {
        if self.n_modes == 1 {
            &[PUMP]
        } else {
            &[0, 1, 2]
        }
    }

    /// Occupations of basis state `k`; absent modes read 0.
    pub fn occupations(&self, k: usize) -> [usize; 3] {
        let l = self.levels();
        if self.n_modes == 1 {
            [0, k, 0]
        } else {
            [k / (l * l), (k / l) % l, k % l]
        }
    }

    pub fn index(&self, occ: [usize; 3]) -> Option<usize> {
        let l = self.levels();
        if occ.iter().any(|&n| n > self.cutoff) {
            return None;
        }
        if self.n_modes == 1 {
            (occ[0] == 0 && occ[2] == 0).then_some(occ[1])
        } else {
            Some(occ[0] * l * l + occ[1] * l + occ[2])
        }
    }
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Csr {
    pub n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn from_triplets(n: usize, mut t: Vec<(usize, usize, C64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(t.len());
        let mut vals: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *vals.last_mut().expect("entry") += v;
                continue;
            }
            last = Some((r, c));
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for r in 0..n {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.cols[k])] += self.vals[k];
            }
        }
        m
    }

    /// `self * x` for dense `x`.
    pub fn mul_dense(&self, x: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n, x.ncols());
        for j in 0..x.ncols() {
            let xc = x.column(j);
            let mut oc = out.column_mut(j);
            for r in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.vals[k] * xc[self.cols[k]];
                }
                oc[r] = acc;
            }
        }
        out
    }

    /// Largest absolute row sum, a bound on the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.n)
            .map(|r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(|k| self.vals[k].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Applicator of `rho -> -i[H, rho] + D(rho)` on a truncated basis.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub config: FockConfig,
    /// `H - i sum_m g_m a_m^+ a_m`
    h_eff: Csr,
    /// `(g_m, a_m)` for every represented mode, indexed by physical mode.
    lowering: Vec<(usize, f64, Csr)>,
}

fn lowering_operator(f: &FockConfig, mode: usize) -> Csr {
    let mut t = Vec::new();
    for k in 0..f.dim() {
        let occ = f.occupations(k);
        if occ[mode] == 0 {
            continue;
        }
        let mut to = occ;
        to[mode] -= 1;
        let r = f.index(to).expect("lowering stays in the basis");
        t.push((r, k, C64::new((occ[mode] as f64).sqrt(), 0.0)));
    }
    Csr::from_triplets(f.dim(), t)
}

fn hamiltonian_triplets(p: &SystemParams, f: &FockConfig) -> Vec<(usize, usize, C64)> {
    let u = p.u0;
    let mut t = Vec::new();
    for k in 0..f.dim() {
        let n = f.occupations(k);
        let nf = n.map(|x| x as f64);
        let mut diag = 0.0;
        for &m in f.modes() {
            diag += p.delta[m] * nf[m] + 0.5 * u * nf[m] * (nf[m] - 1.0);
        }
        if f.n_modes == 3 {
            diag += 2.0 * u * (nf[0] * nf[1] + nf[0] * nf[2] + nf[1] * nf[2]);
        }
        t.push((k, k, C64::new(diag, 0.0)));

        // drive on the pumped mode, both directions
        let mut up = n;
        up[PUMP] += 1;
        if let Some(r) = f.index(up) {
            let v = C64::new(p.omega2 * (nf[PUMP] + 1.0).sqrt(), 0.0);
            t.push((r, k, v));
            t.push((k, r, v));
        }

        // U a2^+2 a1 a3 and its conjugate
        if f.n_modes == 3 && n[0] > 0 && n[2] > 0 {
            let to = [n[0] - 1, n[1] + 2, n[2] - 1];
            if let Some(r) = f.index(to) {
                let v = C64::new(u * (nf[0] * nf[2] * (nf[1] + 1.0) * (nf[1] + 2.0)).sqrt(), 0.0);
                t.push((r, k, v));
                t.push((k, r, v));
            }
        }
    }
    t
}

pub fn build_generator(p: &SystemParams, f: &FockConfig) -> Result<Liouvillian> {
    p.ensure_valid()?;
    let dim = f.dim();
    if dim > f.cap {
        return Err(Error::CapExceeded { dim, cap: f.cap });
    }
    let mut t = hamiltonian_triplets(p, f);
    for k in 0..dim {
        let n = f.occupations(k);
        let loss: f64 = f.modes().iter().map(|&m| p.gamma[m] * n[m] as f64).sum();
        t.push((k, k, C64::new(0.0, -loss)));
    }
    let lowering = f
        .modes()
        .iter()
        .map(|&m| (m, p.gamma[m], lowering_operator(f, m)))
        .collect();
    Ok(Liouvillian {
        config: *f,
        h_eff: Csr::from_triplets(dim, t),
        lowering,
    })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.config.dim()
    }

    /// Generator on a Hermitian `rho`, using `rho H^+ = (H rho)^+`.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let x = self.h_eff.mul_dense(rho);
        let mut out = (x.adjoint() - &x) * I;
        for (_, g, a) in &self.lowering {
            if *g == 0.0 {
                continue;
            }
            let y = a.mul_dense(rho).adjoint();
            out += a.mul_dense(&y) * C64::new(2.0 * g, 0.0);
        }
        out
    }

    /// Generator on an arbitrary matrix.
    pub fn apply_general(&self, rho: &CMat) -> CMat {
        let x = self.h_eff.mul_dense(rho);
        let z = self.h_eff.mul_dense(&rho.adjoint()).adjoint(); // rho H_eff^+
        let mut out = (z - x) * I;
        for (_, g, a) in &self.lowering {
            if *g == 0.0 {
                continue;
            }
            let y = a.mul_dense(&a.mul_dense(&rho.adjoint()).adjoint()); // a rho a^+
            out += y * C64::new(2.0 * g, 0.0);
        }
        out
    }

    pub fn hamiltonian(&self, p: &SystemParams) -> CMat {
        Csr::from_triplets(self.dim(), hamiltonian_triplets(p, &self.config)).to_dense()
    }

    pub fn lowering(&self, mode: usize) -> Option<&Csr> {
        self.lowering.iter().find(|(m, _, _)| *m == mode).map(|(_, _, a)| a)
    }

    /// Bound on the magnitude of the generator's eigenvalues.
    pub fn rate_bound(&self) -> f64 {
        let jump: f64 = self.lowering.iter().map(|(_, g, a)| 2.0 * g * a.max_row_sum().powi(2)).sum();
        2.0 * self.h_eff.max_row_sum() + jump
    }

    /// RK4 step that stays inside the stability region.
    pub fn suggested_dt(&self) -> f64 {
        2.0 / self.rate_bound()
    }

    /// Dense superoperator on column-stacked `rho`, built column by column.
    pub fn superoperator(&self) -> CMat {
        let d = self.dim();
        let mut s = CMat::zeros(d * d, d * d);
        for col in 0..d {
            for row in 0..d {
                let mut e = CMat::zeros(d, d);
                e[(row, col)] = C64::new(1.0, 0.0);
                let img = self.apply_general(&e);
                let j = row + col * d;
                for (i, v) in img.iter().enumerate() {
                    s[(i, j)] = *v;
                }
            }
        }
        s
    }
}

pub fn vacuum(f: &FockConfig) -> CMat {
    let mut r = CMat::zeros(f.dim(), f.dim());
    r[(0, 0)] = C64::new(1.0, 0.0);
    r
}

pub fn maximally_mixed(f: &FockConfig) -> CMat {
    CMat::identity(f.dim(), f.dim()) * C64::new(1.0 / f.dim() as f64, 0.0)
}

/// Projector on a (truncated, renormalised) product coherent state.
pub fn coherent_state(f: &FockConfig, alpha: [C64; 3]) -> CMat {
    let d = f.dim();
    let mut v = nalgebra::DVector::<C64>::zeros(d);
    for k in 0..d {
        let n = f.occupations(k);
        let mut amp = C64::new(1.0, 0.0);
        for &m in f.modes() {
            let fact: f64 = (1..=n[m]).map(|i| i as f64).product();
            amp *= alpha[m].powu(n[m] as u32) / fact.sqrt() * (-0.5 * alpha[m].norm_sqr()).exp();
        }
        v[k] = amp;
    }
    let v = v.normalize();
    &v * v.adjoint()
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    #[serde(skip)]
    pub rho: CMat,
    /// Integration time used (0 for the direct solve).
    pub time: f64,
    /// `|L(rho)|_F` at the returned state.
    pub residual: f64,
    pub trace_error: f64,
}

/// Steady state by RK4 from the vacuum.
pub fn steady_state(p: &SystemParams, f: &FockConfig, t_end: f64, dt: f64) -> Result<SteadyState> {
    let gen = build_generator(p, f)?;
    steady_state_from(&gen, &vacuum(f), t_end, dt)
}

/// One RK4 step given `k1 = L(rho)`, symmetrised so rounding keeps `rho` Hermitian.
fn rk4_rho(gen: &Liouvillian, rho: &CMat, k1: CMat, dt: f64) -> CMat {
    let h = C64::new(dt, 0.0);
    let k2 = gen.apply(&(rho + &k1 * (h * 0.5)));
    let k3 = gen.apply(&(rho + &k2 * (h * 0.5)));
    let k4 = gen.apply(&(rho + &k3 * h));
    let next = rho + (k1 + k2 * C64::new(2.0, 0.0) + k3 * C64::new(2.0, 0.0) + k4) * (h / 6.0);
    (&next + next.adjoint()) * C64::new(0.5, 0.0)
}

/// Moments along an RK4 run, every `stride` steps and at the end.
pub fn moment_trajectory(
    gen: &Liouvillian,
    rho0: &CMat,
    t_end: f64,
    dt: f64,
    stride: usize,
) -> Result<Vec<(f64, CorrelationState)>> {
    if !(dt > 0.0) || !(t_end >= dt) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end >= dt, got dt={dt}, t_end={t_end}")));
    }
    let stride = stride.max(1);
    let steps = step_count(t_end, dt);
    let mut rho = rho0.clone();
    let mut out = vec![(0.0, observables(&rho, gen))];
    for k in 1..=steps {
        let k1 = gen.apply(&rho);
        rho = rk4_rho(gen, &rho, k1, dt);
        if k % stride == 0 || k == steps {
            let t = k as f64 * dt;
            let norm = rho.norm();
            if !norm.is_finite() {
                return Err(Error::Divergence { time: t, amplitude: norm });
            }
            out.push((t, observables(&rho, gen)));
        }
    }
    Ok(out)
}

/// RK4 until `|drho/dt|_F < 1e-8`; no trace renormalisation.
pub fn steady_state_from(gen: &Liouvillian, rho0: &CMat, t_end: f64, dt: f64) -> Result<SteadyState> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t_end > 0, got dt={dt}, t_end={t_end}")));
    }
    let steps = step_count(t_end, dt);
    let mut rho = rho0.clone();
    let mut residual = f64::INFINITY;
    let mut t = 0.0;
    for k in 0..=steps {
        let k1 = gen.apply(&rho);
        residual = k1.norm();
        if !residual.is_finite() {
            return Err(Error::Divergence { time: t, amplitude: residual });
        }
        if residual < STEADY_RESIDUAL_TOL || k == steps {
            break;
        }
        rho = rk4_rho(gen, &rho, k1, dt);
        t = (k + 1) as f64 * dt;
    }
    if residual >= STEADY_RESIDUAL_TOL {
        return Err(Error::NotConverged { time: t, residual });
    }
    let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();
    Ok(SteadyState { rho, time: t, residual, trace_error })
}

/// Steady state from the null space of the superoperator, with the
/// normalisation replacing one of the linearly dependent population equations.
pub fn steady_state_direct(p: &SystemParams, f: &FockConfig) -> Result<SteadyState> {
    let d = f.dim();
    if d > DIRECT_SOLVE_MAX_DIM {
        return Err(Error::InvalidArgument(format!(
            "direct steady-state solve limited to dimension {DIRECT_SOLVE_MAX_DIM}, got {d}"
        )));
    }
    let gen = build_generator(p, f)?;
    let mut s = gen.superoperator();
    let mut b = nalgebra::DVector::<C64>::zeros(d * d);
    for j in 0..d * d {
        s[(0, j)] = C64::new(0.0, 0.0);
    }
    for k in 0..d {
        s[(0, k + k * d)] = C64::new(1.0, 0.0);
    }
    b[0] = C64::new(1.0, 0.0);
    let x = s.lu().solve(&b).ok_or(Error::NotConverged { time: 0.0, residual: f64::INFINITY })?;
    let mut rho = CMat::from_column_slice(d, d, x.as_slice());
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let residual = gen.apply(&rho).norm();
    let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();
    Ok(SteadyState { rho, time: 0.0, residual, trace_error })
}

impl Csr {
    /// `tr(self * y)`
    fn trace_product(&self, y: &CMat) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * y[(self.cols[k], r)];
            }
        }
        s
    }

    /// `tr(self^+ * y)`
    fn trace_adjoint_product(&self, y: &CMat) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k].conj() * y[(r, self.cols[k])];
            }
        }
        s
    }
}

/// First and second moments of `rho`; absent modes read 0.
pub fn observables(rho: &CMat, gen: &Liouvillian) -> CorrelationState {
    let mut c = CorrelationState::VACUUM;
    let lowered: Vec<Option<CMat>> = (0..3).map(|m| gen.lowering(m).map(|a| a.mul_dense(rho))).collect();
    for m in 0..3 {
        if let Some(y) = &lowered[m] {
            c.first[m] = y.trace();
        }
    }
    for &(m, n) in PAIRS.iter() {
        if let (Some(am), Some(yn)) = (gen.lowering(m), &lowered[n]) {
            c.normal[pair_index(m, n)] = am.trace_adjoint_product(yn);
            c.anomalous[pair_index(m, n)] = am.trace_product(yn);
        }
    }
    c
}

/// Smallest eigenvalue of the Hermitian part of `rho`.
pub fn min_eigenvalue(rho: &CMat) -> f64 {
    let h = (rho + rho.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub omega2: f64,
    pub moments: Option<CorrelationState>,
    pub residual: f64,
    pub error: Option<String>,
}

impl OracleRow {
    pub fn populations(&self) -> [f64; 3] {
        self.moments.map(|m| m.populations()).unwrap_or([f64::NAN; 3])
    }
}

/// Steady-state moments along a pump sweep. Small single-mode bases use the
/// direct solve, everything else RK4 from the vacuum up to `t_end`.
pub fn oracle_sweep(p: &SystemParams, f: &FockConfig, omega2_values: &[f64], t_end: f64) -> Vec<OracleRow> {
    use rayon::prelude::*;
    omega2_values
        .par_iter()
        .map(|&om| {
            let q = p.with_omega2(om);
            let run = || -> Result<(CorrelationState, f64)> {
                let gen = build_generator(&q, f)?;
                let ss = if f.dim() <= DIRECT_SOLVE_MAX_DIM {
                    steady_state_direct(&q, f)?
                } else {
                    steady_state_from(&gen, &vacuum(f), t_end, gen.suggested_dt())?
                };
                Ok((observables(&ss.rho, &gen), ss.residual))
            };
            match run() {
                Ok((m, r)) => OracleRow { omega2: om, moments: Some(m), residual: r, error: None },
                Err(e) => OracleRow { omega2: om, moments: None, residual: f64::NAN, error: Some(e.to_string()) },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn kron(a: &CMat, b: &CMat) -> CMat {
        a.kronecker(b)
    }

    /// `vec(A X B) = (B^T kron A) vec(X)` with column stacking.
    fn kronecker_superoperator(gen: &Liouvillian, p: &SystemParams) -> CMat {
        let d = gen.dim();
        let id = CMat::identity(d, d);
        let mut h = gen.hamiltonian(p);
        for &m in gen.config.modes() {
            let a = gen.lowering(m).unwrap().to_dense();
            h -= a.adjoint() * &a * C64::new(0.0, p.gamma[m]);
        }
        let mut l = (kron(&id, &h) - kron(&h.conjugate(), &id)) * (-I);
        for &m in gen.config.modes() {
            let a = gen.lowering(m).unwrap().to_dense();
            l += kron(&a.conjugate(), &a) * C64::new(2.0 * p.gamma[m], 0.0);
        }
        l
    }

    fn random_hermitian(d: usize, seed: u64) -> CMat {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = CMat::from_fn(d, d, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&m + m.adjoint()) * c(0.5, 0.0)
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(FockConfig::new(3, 20), Err(Error::CapExceeded { dim: 9261, cap: 4096 })));
        assert!(FockConfig::new(2, 3).is_err());
        assert_eq!(FockConfig::new(3, 5).unwrap().dim(), 216);
    }

    #[test]
    fn basis_round_trip() {
        let f = FockConfig::new(3, 3).unwrap();
        for k in 0..f.dim() {
            assert_eq!(f.index(f.occupations(k)), Some(k));
        }
    }

    #[test]
    fn photon_decay() {
        let p = SystemParams::equally_spaced(0.0, 0.0, 0.0);
        let f = FockConfig::new(1, 4).unwrap();
        let gen = build_generator(&p, &f).unwrap();
        let mut rho = CMat::zeros(5, 5);
        rho[(1, 1)] = c(1.0, 0.0);
        let d = gen.apply(&rho);
        assert!(d.trace().norm() < 1e-15);
        assert!((d[(0, 0)] - c(2.0, 0.0)).norm() < 1e-15);
        assert!((d[(1, 1)] - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn trajectory_follows_exponential_decay() {
        let p = SystemParams::equally_spaced(0.0, 0.0, 0.0);
        let f = FockConfig::new(1, 3).unwrap();
        let gen = build_generator(&p, &f).unwrap();
        let mut rho = CMat::zeros(4, 4);
        rho[(1, 1)] = c(1.0, 0.0);
        let tr = moment_trajectory(&gen, &rho, 1.0, 1e-3, 100).unwrap();
        assert_eq!(tr.len(), 11);
        for (t, m) in &tr {
            assert!((m.population(PUMP) - (-2.0 * t).exp()).abs() < 1e-10);
        }
    }

    #[test]
    fn hermitian_and_general_paths_agree() {
        let p = SystemParams::equally_spaced(2.0, -1.0, 0.7);
        for f in [FockConfig::new(1, 6).unwrap(), FockConfig::new(3, 2).unwrap()] {
            let gen = build_generator(&p, &f).unwrap();
            let rho = random_hermitian(f.dim(), 4);
            let a = gen.apply(&rho);
            let b = gen.apply_general(&rho);
            assert!((&a - &b).norm() < 1e-12);
            assert!((&a - a.adjoint()).norm() < 1e-14 * (1.0 + a.norm()));
            assert!(a.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn matches_kronecker_construction() {
        let mut p = SystemParams::equally_spaced(2.0, -0.8, 0.7);
        p.gamma = [0.6, 1.0, 1.3];
        for f in [FockConfig::new(1, 7).unwrap(), FockConfig::new(3, 2).unwrap()] {
            let gen = build_generator(&p, &f).unwrap();
            let s = kronecker_superoperator(&gen, &p);
            assert!((&s - gen.superoperator()).norm() < 1e-12);
            let d = f.dim();
            let rho = random_hermitian(d, 11) + CMat::from_fn(d, d, |i, j| c((i * j) as f64 * 0.01, 0.02 * i as f64));
            let v = nalgebra::DVector::from_column_slice(rho.as_slice());
            let want = CMat::from_column_slice(d, d, (&s * v).as_slice());
            assert!((gen.apply_general(&rho) - want).norm() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let p = SystemParams::equally_spaced(2.0, -0.8, 0.7);
        let gen = build_generator(&p, &FockConfig::new(3, 3).unwrap()).unwrap();
        let h = gen.hamiltonian(&p);
        assert!((&h - h.adjoint()).norm() < 1e-14);
    }

    #[test]
    fn linear_cavity_coherent_steady_state() {
        let mut p = SystemParams::equally_spaced(0.0, 0.0, 1.0);
        p.delta = [0.0; 3];
        let f = FockConfig::new(1, 20).unwrap();
        let ss = steady_state_direct(&p, &f).unwrap();
        let gen = build_generator(&p, &f).unwrap();
        let m = observables(&ss.rho, &gen);
        assert!((m.population(1) - 1.0).abs() < 1e-9);
        assert!((m.first[1] - c(0.0, -1.0)).norm() < 1e-9);
        assert!(ss.residual < 1e-10 && ss.trace_error < 1e-12);

        let rk = steady_state(&p, &FockConfig::new(1, 12).unwrap(), 40.0, 0.01).unwrap();
        assert!(rk.residual < STEADY_RESIDUAL_TOL);
        assert!(min_eigenvalue(&rk.rho) > -1e-8);
    }

    #[test]
    fn moments_of_known_states() {
        let f = FockConfig::new(3, 6).unwrap();
        let gen = build_generator(&SystemParams::equally_spaced(1.0, -1.0, 1.0), &f).unwrap();
        assert_eq!(observables(&vacuum(&f), &gen), CorrelationState::VACUUM);
        let alpha = [c(0.3, 0.1), c(-0.5, 0.2), c(0.1, -0.4)];
        let m = observables(&coherent_state(&f, alpha), &gen);
        let want = CorrelationState::coherent(&crate::model::ModeAmplitudes { alpha });
        // truncation at 6 photons per mode leaves ~1e-6 in the pair moments
        assert!((m - want).norm() < 1e-5);
    }

    #[test]
    fn unique_steady_state() {
        let p = SystemParams::equally_spaced(5.0, -1.0, 0.4);
        let f = FockConfig::new(3, 2).unwrap();
        let gen = build_generator(&p, &f).unwrap();
        let dt = gen.suggested_dt();
        let a = steady_state_from(&gen, &vacuum(&f), 60.0, dt).unwrap();
        let b = steady_state_from(&gen, &maximally_mixed(&f), 60.0, dt).unwrap();
        assert!((observables(&a.rho, &gen) - observables(&b.rho, &gen)).norm() < 1e-6);
        assert!(a.trace_error < 1e-8);
    }
}
