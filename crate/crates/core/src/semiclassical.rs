//! Classical large-`S` limit: precessing unit vectors, the finite-difference
//! sensitivity `C_cl(r, t)`, and Lyapunov / scrambling-time fits.
//!
//! With `S_i = S x_i`, the Hamiltonian becomes
//! `H_cl = S sum_{i<j} J_ij (x_i^x x_j^x + x_i^y x_j^y)` and the Poisson bracket
//! `{S^a, S^b} = eps_abc S^c` gives `dx_i/dt = h_i x x_i` with the in-plane
//! field `h_i = sum_j J_ij (x_j^x, x_j^y, 0)`, independent of `S`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::CouplingModel;
use crate::stats::{linear_fit, mean_and_stderr, weighted_linear_fit, LinearFit};

pub type Spin = [f64; 3];

/// Coupling graph in compressed rows: `(neighbour, amplitude)` per site.
#[derive(Debug, Clone)]
pub struct ClassicalSystem {
    n_sites: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    amps: Vec<f64>,
}

impl ClassicalSystem {
    pub fn from_model(model: &CouplingModel) -> Self {
        Self::from_bonds(model.n_sites(), &model.bonds())
    }

    /// From an undirected bond list `(i, j, amplitude)`.
    pub fn from_bonds(n_sites: usize, bonds: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_sites];
        for &(i, j, a) in bonds {
            rows[i].push((j, a));
            rows[j].push((i, a));
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut amps = Vec::new();
        for row in rows {
            for (j, a) in row {
                cols.push(j);
                amps.push(a);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n_sites,
            row_ptr,
            cols,
            amps,
        }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// In-plane local field at site `i`.
    pub fn field(&self, x: &[Spin], i: usize) -> Spin {
        let (mut hx, mut hy) = (0.0, 0.0);
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            let xj = &x[self.cols[k]];
            hx += self.amps[k] * xj[0];
            hy += self.amps[k] * xj[1];
        }
        [hx, hy, 0.0]
    }

    /// `dx_i/dt = h_i x x_i`.
    pub fn rhs(&self, x: &[Spin], out: &mut [Spin]) {
        for i in 0..self.n_sites {
            let h = self.field(x, i);
            let s = &x[i];
            out[i] = [h[1] * s[2], -h[0] * s[2], h[0] * s[1] - h[1] * s[0]];
        }
    }

    pub fn energy(&self, x: &[Spin]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n_sites {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k];
                e += self.amps[k] * (x[i][0] * x[j][0] + x[i][1] * x[j][1]);
            }
        }
        0.5 * e
    }

    /// Sum of `|J_ij|` over bonds, the scale for relative energy drift.
    pub fn energy_scale(&self) -> f64 {
        0.5 * self.amps.iter().map(|a| a.abs()).sum::<f64>()
    }
}

/// Time derivatives for every spin of `spins` under `model`.
pub fn classical_rhs(model: &CouplingModel, spins: &[Spin]) -> Vec<Spin> {
    let sys = ClassicalSystem::from_model(model);
    let mut out = vec![[0.0; 3]; spins.len()];
    sys.rhs(spins, &mut out);
    out
}

pub fn magnetization_z(x: &[Spin]) -> f64 {
    x.iter().map(|s| s[2]).sum()
}

/// Fixed-step classical Runge-Kutta with renormalisation after each step.
#[derive(Debug, Clone)]
pub struct Rk4 {
    pub dt: f64,
    k1: Vec<Spin>,
    k2: Vec<Spin>,
    k3: Vec<Spin>,
    k4: Vec<Spin>,
    tmp: Vec<Spin>,
}

impl Rk4 {
    pub fn new(n_sites: usize, dt: f64) -> Self {
        let z = vec![[0.0; 3]; n_sites];
        Self {
            dt,
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
        }
    }

    /// Advance one step; returns the largest `| |x_i| - 1 |` before renormalising.
    pub fn step(&mut self, sys: &ClassicalSystem, x: &mut [Spin]) -> f64 {
        let dt = self.dt;
        let axpy = |tmp: &mut [Spin], x: &[Spin], k: &[Spin], a: f64| {
            for ((t, xi), ki) in tmp.iter_mut().zip(x).zip(k) {
                *t = [xi[0] + a * ki[0], xi[1] + a * ki[1], xi[2] + a * ki[2]];
            }
        };
        sys.rhs(x, &mut self.k1);
        axpy(&mut self.tmp, x, &self.k1, 0.5 * dt);
        sys.rhs(&self.tmp, &mut self.k2);
        axpy(&mut self.tmp, x, &self.k2, 0.5 * dt);
        sys.rhs(&self.tmp, &mut self.k3);
        axpy(&mut self.tmp, x, &self.k3, dt);
        sys.rhs(&self.tmp, &mut self.k4);
        let mut worst: f64 = 0.0;
        for i in 0..x.len() {
            let mut v = [0.0; 3];
            for c in 0..3 {
                v[c] = x[i][c]
                    + dt / 6.0
                        * (self.k1[i][c]
                            + 2.0 * self.k2[i][c]
                            + 2.0 * self.k3[i][c]
                            + self.k4[i][c]);
            }
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            worst = worst.max((norm - 1.0).abs());
            x[i] = [v[0] / norm, v[1] / norm, v[2] / norm];
        }
        worst
    }
}

pub const DEFAULT_PHI: f64 = 1e-4;
pub const DEFAULT_DT: f64 = 0.005;
pub const DEFAULT_TRAJECTORIES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityOptions {
    pub trajectories: usize,
    /// Rotation angle of the perturbed spin about `z`.
    pub phi: f64,
    pub tmax: f64,
    pub dt: f64,
    /// Spacing of recorded times; rounded to a whole number of steps.
    pub record_every: f64,
    pub seed: u64,
    /// Pair trajectory `2p + 1` with `2p`, all initial angles shifted by pi.
    pub antithetic: bool,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        Self {
            trajectories: DEFAULT_TRAJECTORIES,
            phi: DEFAULT_PHI,
            tmax: 8.0,
            dt: DEFAULT_DT,
            record_every: 0.05,
            seed: 0,
            antithetic: true,
        }
    }
}

/// Largest conservation defects seen over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassicalConservation {
    /// Largest `| |x_i| - 1 |` before renormalisation.
    pub norm: f64,
    /// Largest `|E(t) - E(0)| / sum |J|`.
    pub energy: f64,
    /// Largest `|M_z(t) - M_z(0)| / N`.
    pub magnetization: f64,
}

impl ClassicalConservation {
    fn merge(&mut self, other: &Self) {
        self.norm = self.norm.max(other.norm);
        self.energy = self.energy.max(other.energy);
        self.magnetization = self.magnetization.max(other.magnetization);
    }

    /// Norm below 1e-8, energy and magnetization below 1e-6.
    pub fn passes(&self) -> bool {
        self.norm < 1e-8 && self.energy < 1e-6 && self.magnetization < 1e-6
    }
}

/// Ensemble-averaged sensitivity grouped by graph distance from the source.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityCurve {
    pub n_sites: usize,
    pub s: f64,
    pub phi: f64,
    pub trajectories: usize,
    pub times: Vec<f64>,
    /// `mean[r][k]` is `C_cl(r, times[k])`.
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
    /// Mean over all sites other than the source.
    pub site_average: Vec<f64>,
    pub site_average_stderr: Vec<f64>,
    /// Per-trajectory data, kept for resampling.
    pub samples: Vec<TrajectoryRecord>,
    pub conservation: ClassicalConservation,
}

/// `C_cl` of one twin pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub source: usize,
    /// `shells[r][k]`; `NaN` where the source has no site at distance `r`.
    pub shells: Vec<Vec<f64>>,
    /// Shell farthest from this source.
    pub farthest: Vec<f64>,
    pub site_average: Vec<f64>,
}

impl SensitivityCurve {
    /// Largest graph distance present.
    pub fn max_distance(&self) -> usize {
        self.mean.len() - 1
    }

    pub fn shell(&self, r: usize) -> &[f64] {
        &self.mean[r]
    }
}

fn in_plane(theta: f64) -> Spin {
    [theta.cos(), theta.sin(), 0.0]
}

fn rotate_z(x: Spin, phi: f64) -> Spin {
    let (s, c) = phi.sin_cos();
    [c * x[0] - s * x[1], s * x[0] + c * x[1], x[2]]
}

/// Run the twin-trajectory ensemble. Trajectory `tau` perturbs site `tau mod N`.
pub fn run_sensitivity(
    model: &CouplingModel,
    opts: &SensitivityOptions,
    exec: Execution,
) -> Result<SensitivityCurve> {
    if opts.trajectories == 0 {
        return Err(Error::InvalidParameter(
            "need at least one trajectory".into(),
        ));
    }
    if !(opts.phi > 0.0 && opts.phi.is_finite()) || !(opts.dt > 0.0) || !(opts.tmax > 0.0) {
        return Err(Error::InvalidParameter(
            "phi, dt and tmax must be positive".into(),
        ));
    }
    let n = model.n_sites();
    let sys = ClassicalSystem::from_model(model);
    let steps = (opts.tmax / opts.dt).round() as usize;
    let stride = ((opts.record_every / opts.dt).round() as usize).max(1);
    let times: Vec<f64> = (0..=steps)
        .step_by(stride)
        .map(|k| k as f64 * opts.dt)
        .collect();
    // distance shells from every source
    let distances: Vec<Vec<usize>> = (0..n)
        .map(|i| model.graph_distances_from(i))
        .collect::<Result<_>>()?;
    let r_max = distances.iter().flatten().copied().max().unwrap_or(0);

    let runs = exec.map_range(opts.trajectories, |tau| -> Result<_> {
        let pair = if opts.antithetic { tau / 2 } else { tau };
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(pair as u64);
        let shift = if opts.antithetic && tau % 2 == 1 {
            std::f64::consts::PI
        } else {
            0.0
        };
        let mut base: Vec<Spin> = (0..n)
            .map(|_| in_plane(rng.gen::<f64>() * std::f64::consts::TAU + shift))
            .collect();
        let source = tau % n;
        let mut twin = base.clone();
        twin[source] = rotate_z(twin[source], opts.phi);
        let shells = &distances[source];
        let mut shell_sizes = vec![0usize; r_max + 1];
        for &r in shells {
            shell_sizes[r] += 1;
        }

        let e0 = sys.energy(&base);
        let m0 = magnetization_z(&base);
        let scale = sys.energy_scale().max(f64::MIN_POSITIVE);
        let mut cons = ClassicalConservation::default();
        let mut rk_a = Rk4::new(n, opts.dt);
        let mut rk_b = Rk4::new(n, opts.dt);
        let far = shells.iter().copied().max().unwrap_or(0);
        let mut record = TrajectoryRecord {
            source,
            shells: vec![Vec::with_capacity(times.len()); r_max + 1],
            farthest: Vec::with_capacity(times.len()),
            site_average: Vec::with_capacity(times.len()),
        };
        let observe = |base: &[Spin], twin: &[Spin], record: &mut TrajectoryRecord| {
            let mut acc = vec![0.0; r_max + 1];
            for j in 0..n {
                let d = (twin[j][2] - base[j][2]) / opts.phi;
                acc[shells[j]] += d * d;
            }
            for r in 0..=r_max {
                let v = if shell_sizes[r] > 0 {
                    acc[r] / shell_sizes[r] as f64
                } else {
                    f64::NAN
                };
                record.shells[r].push(v);
            }
            record
                .farthest
                .push(record.shells[far].last().copied().unwrap_or(f64::NAN));
            let others = (n - 1).max(1) as f64;
            record
                .site_average
                .push(acc[1..].iter().sum::<f64>() / others);
        };
        observe(&base, &twin, &mut record);
        for step in 1..=steps {
            let da = rk_a.step(&sys, &mut base);
            let db = rk_b.step(&sys, &mut twin);
            cons.norm = cons.norm.max(da).max(db);
            if !base
                .iter()
                .chain(&twin)
                .all(|v| v.iter().all(|c| c.is_finite()))
            {
                return Err(Error::Integration(format!(
                    "non-finite spin at step {step} of trajectory {tau}"
                )));
            }
            if step % stride == 0 {
                observe(&base, &twin, &mut record);
                cons.energy = cons.energy.max((sys.energy(&base) - e0).abs() / scale);
                cons.magnetization = cons
                    .magnetization
                    .max((magnetization_z(&base) - m0).abs() / n as f64);
            }
        }
        Ok((record, cons))
    });

    let mut samples = Vec::with_capacity(opts.trajectories);
    let mut conservation = ClassicalConservation::default();
    for run in runs {
        let (record, cons) = run?;
        conservation.merge(&cons);
        samples.push(record);
    }
    let mut mean = vec![Vec::new(); r_max + 1];
    let mut stderr = vec![Vec::new(); r_max + 1];
    for r in 0..=r_max {
        (mean[r], stderr[r]) = column_stats(&samples, times.len(), |rec| &rec.shells[r]);
    }
    let (site_average, site_average_stderr) =
        column_stats(&samples, times.len(), |rec| &rec.site_average);
    Ok(SensitivityCurve {
        n_sites: n,
        s: model.s(),
        phi: opts.phi,
        trajectories: opts.trajectories,
        times,
        mean,
        stderr,
        site_average,
        site_average_stderr,
        samples,
        conservation,
    })
}

fn column_stats<F>(samples: &[TrajectoryRecord], n_times: usize, row: F) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(&TrajectoryRecord) -> &Vec<f64>,
{
    (0..n_times)
        .map(|k| {
            let column: Vec<f64> = samples
                .iter()
                .map(|s| row(s)[k])
                .filter(|v| v.is_finite())
                .collect();
            mean_and_stderr(&column)
        })
        .unzip()
}

/// Which sensitivity curve the scrambling time refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScramblingTarget {
    /// Average over all sites other than the perturbed one.
    #[default]
    SiteAverage,
    /// Sites at the largest graph distance from the perturbed spin.
    FarthestShell,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScramblingOptions {
    pub target: ScramblingTarget,
    /// Exponential window: `C_cl` between these values...
    pub window: (f64, f64),
    /// ...and `J0 t` at least this.
    pub min_time: f64,
    /// Level defining the scrambling time, `C_cl(t*) = level`.
    pub saturation: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for ScramblingOptions {
    fn default() -> Self {
        Self {
            target: ScramblingTarget::SiteAverage,
            window: (1e-4, 1e-1),
            min_time: 1.0,
            saturation: 1.0,
            bootstrap: 200,
            seed: 0,
        }
    }
}

/// Exponential-growth fit of one system size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovFit {
    pub n_sites: usize,
    pub lambda: f64,
    pub lambda_err: f64,
    pub t_star: f64,
    /// Bootstrap standard error of `lambda * t_star`.
    pub lambda_t_star_err: f64,
    /// Time range actually used by the fit.
    pub window: (f64, f64),
    pub points: usize,
    pub r_squared: f64,
}

impl LyapunovFit {
    pub fn lambda_t_star(&self) -> f64 {
        self.lambda * self.t_star
    }
}

fn target_row(record: &TrajectoryRecord, target: ScramblingTarget) -> &[f64] {
    match target {
        ScramblingTarget::FarthestShell => &record.farthest,
        ScramblingTarget::SiteAverage => &record.site_average,
    }
}

/// Ensemble mean of the curve selected by `target`.
pub fn target_curve(curve: &SensitivityCurve, target: ScramblingTarget) -> Vec<f64> {
    match target {
        ScramblingTarget::FarthestShell => {
            column_stats(&curve.samples, curve.times.len(), |r| &r.farthest).0
        }
        ScramblingTarget::SiteAverage => curve.site_average.clone(),
    }
}

fn resampled_curve(
    curve: &SensitivityCurve,
    picks: &[usize],
    target: ScramblingTarget,
) -> Vec<f64> {
    let n_times = curve.times.len();
    let mut out = vec![0.0; n_times];
    for &p in picks {
        for (o, v) in out.iter_mut().zip(target_row(&curve.samples[p], target)) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|o| *o /= picks.len() as f64);
    out
}

/// `lambda` from a log-linear fit inside the window, `t*` from the first
/// upward crossing of `level` (log-linear interpolation between samples).
fn lyapunov_of(
    times: &[f64],
    c: &[f64],
    opts: &ScramblingOptions,
) -> Result<(LinearFit, (f64, f64), usize, f64)> {
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(c)
        .filter(|&(&t, &v)| t >= opts.min_time && v >= opts.window.0 && v <= opts.window.1)
        .map(|(&t, &v)| (t, v.ln()))
        .unzip();
    if x.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "no exponential window: {} points with C in [{}, {}] and t >= {}",
            x.len(),
            opts.window.0,
            opts.window.1,
            opts.min_time
        )));
    }
    let fit = linear_fit(&x, &y)?;
    let t_star = first_crossing(times, c, opts.saturation).ok_or_else(|| {
        Error::InsufficientData(format!("C_cl never reaches {}", opts.saturation))
    })?;
    Ok((fit, (x[0], x[x.len() - 1]), x.len(), t_star))
}

/// First time `c` reaches `level`, interpolated in `ln c`.
pub fn first_crossing(times: &[f64], c: &[f64], level: f64) -> Option<f64> {
    for k in 1..times.len() {
        if c[k] >= level && c[k - 1] < level {
            let (a, b) = (c[k - 1], c[k]);
            if a > 0.0 {
                let f = (level.ln() - a.ln()) / (b.ln() - a.ln());
                return Some(times[k - 1] + f * (times[k] - times[k - 1]));
            }
            return Some(times[k]);
        }
    }
    if c.first().is_some_and(|&v| v >= level) {
        return times.first().copied();
    }
    None
}

/// Lyapunov exponent and scrambling time of one ensemble, with bootstrap
/// errors from resampling trajectories.
pub fn fit_lyapunov(curve: &SensitivityCurve, opts: &ScramblingOptions) -> Result<LyapunovFit> {
    let c = target_curve(curve, opts.target);
    let (fit, window, points, t_star) = lyapunov_of(&curve.times, &c, opts)?;
    if !(fit.slope > 0.0) {
        return Err(Error::Degenerate(format!(
            "non-positive growth rate {} in the exponential window",
            fit.slope
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let t = curve.samples.len();
    let mut boot = Vec::with_capacity(opts.bootstrap);
    let mut lambdas = Vec::with_capacity(opts.bootstrap);
    for _ in 0..opts.bootstrap {
        let picks: Vec<usize> = (0..t).map(|_| rng.gen_range(0..t)).collect();
        let cb = resampled_curve(curve, &picks, opts.target);
        if let Ok((f, _, _, ts)) = lyapunov_of(&curve.times, &cb, opts) {
            boot.push(f.slope * ts);
            lambdas.push(f.slope);
        }
    }
    let spread = |v: &[f64]| {
        if v.len() > 1 {
            mean_and_stderr(v).1 * (v.len() as f64).sqrt()
        } else {
            0.0
        }
    };
    Ok(LyapunovFit {
        n_sites: curve.n_sites,
        lambda: fit.slope,
        lambda_err: spread(&lambdas).max(fit.slope_err),
        t_star,
        lambda_t_star_err: spread(&boot),
        window,
        points,
        r_squared: fit.r_squared,
    })
}

/// Global fit `lambda t* = alpha ln N + beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScramblingFit {
    pub per_size: Vec<LyapunovFit>,
    /// Sizes without an identifiable exponential window, with the reason.
    pub excluded: Vec<(usize, String)>,
    pub alpha: f64,
    pub alpha_err: f64,
    pub beta: f64,
    pub beta_err: f64,
}

pub fn fit_scrambling(
    curves: &[SensitivityCurve],
    opts: &ScramblingOptions,
) -> Result<ScramblingFit> {
    let mut per_size = Vec::new();
    let mut excluded = Vec::new();
    for c in curves {
        match fit_lyapunov(c, opts) {
            Ok(f) => per_size.push(f),
            Err(e) => excluded.push((c.n_sites, e.to_string())),
        }
    }
    if per_size.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "global fit needs two sizes, {} usable",
            per_size.len()
        )));
    }
    let x: Vec<f64> = per_size.iter().map(|f| (f.n_sites as f64).ln()).collect();
    let y: Vec<f64> = per_size.iter().map(|f| f.lambda_t_star()).collect();
    let errs: Vec<f64> = per_size.iter().map(|f| f.lambda_t_star_err).collect();
    let fit = if errs.iter().all(|&e| e > 0.0) {
        let w: Vec<f64> = errs.iter().map(|e| 1.0 / (e * e)).collect();
        weighted_linear_fit(&x, &y, &w)?
    } else {
        linear_fit(&x, &y)?
    };
    Ok(ScramblingFit {
        per_size,
        excluded,
        alpha: fit.slope,
        alpha_err: fit.slope_err,
        beta: fit.intercept,
        beta_err: fit.intercept_err,
    })
}

/// Log-linear fit of `C_cl(r, t)` against `r >= 1` at the recorded time
/// closest to `t`.
pub fn decay_in_distance(curve: &SensitivityCurve, t: f64) -> Result<LinearFit> {
    let k = curve
        .times
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
        .map(|(k, _)| k)
        .ok_or_else(|| Error::InsufficientData("empty curve".into()))?;
    let (x, y): (Vec<f64>, Vec<f64>) = (1..curve.mean.len())
        .filter(|&r| curve.mean[r][k] > 0.0)
        .map(|r| (r as f64, curve.mean[r][k].ln()))
        .unzip();
    linear_fit(&x, &y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_pair_is_stationary() {
        let sys = ClassicalSystem::from_bonds(2, &[(0, 1, 1.0)]);
        let x = vec![[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]];
        let mut out = vec![[9.0; 3]; 2];
        sys.rhs(&x, &mut out);
        assert!(out.iter().flatten().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn uniform_in_plane_ring_is_stationary() {
        let model = CouplingModel::periodic(16, 0.3).unwrap();
        let x = vec![in_plane(0.7); 16];
        let d = classical_rhs(&model, &x);
        assert!(d.iter().flatten().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn perpendicular_pair_matches_closed_form() {
        // x1 = (sech Jt, 0, -tanh Jt), x2 = (0, sech Jt, tanh Jt)
        let j = 1.3;
        let sys = ClassicalSystem::from_bonds(2, &[(0, 1, j)]);
        let mut x = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let dt = 0.001;
        let mut rk = Rk4::new(2, dt);
        for step in 1..=2000 {
            rk.step(&sys, &mut x);
            let t = step as f64 * dt;
            let (sech, tanh) = (1.0 / (j * t).cosh(), (j * t).tanh());
            let expect = [[sech, 0.0, -tanh], [0.0, sech, tanh]];
            for (a, b) in x.iter().zip(&expect) {
                for c in 0..3 {
                    assert!((a[c] - b[c]).abs() < 1e-10, "t={t}");
                }
            }
        }
    }

    #[test]
    fn crossing_interpolates_in_log() {
        let t = [0.0, 1.0, 2.0];
        let c = [0.01, 0.1, 10.0];
        let ts = first_crossing(&t, &c, 1.0).unwrap();
        assert!((ts - 1.5).abs() < 1e-12);
        assert!(first_crossing(&t, &c, 100.0).is_none());
    }

    #[test]
    fn synthetic_exponential_recovered() {
        let lambda = 1.7;
        let n = 256.0f64;
        let times: Vec<f64> = (0..400).map(|k| 0.025 * k as f64).collect();
        let c: Vec<f64> = times.iter().map(|t| (lambda * t).exp() / n).collect();
        let opts = ScramblingOptions::default();
        let (fit, _, _, t_star) = lyapunov_of(&times, &c, &opts).unwrap();
        assert!((fit.slope - lambda).abs() < 1e-10);
        assert!((t_star - n.ln() / lambda).abs() < 1e-10);
    }

    #[test]
    fn small_ensemble_conserves() {
        let model = CouplingModel::periodic(32, 0.0).unwrap();
        let opts = SensitivityOptions {
            trajectories: 4,
            tmax: 2.0,
            ..SensitivityOptions::default()
        };
        let curve = run_sensitivity(&model, &opts, Execution::Sequential).unwrap();
        assert!(curve.conservation.passes(), "{:?}", curve.conservation);
        // no response away from the source at t = 0
        for r in 1..=curve.max_distance() {
            assert_eq!(curve.mean[r][0], 0.0);
        }
        assert!(curve.mean.iter().flatten().all(|&v| v >= 0.0));
    }
}
