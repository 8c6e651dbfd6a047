//! Bounds on magnon threshold times.
//!
//! Threshold times `t_eps(d)` scatter strongly with distance. They are bounded
//! below by `a d^b`, fitted to the fastest points (which sit at power-of-two
//! distances), and above by `a_u d^b_u (ln d)^c_u`, fitted to the slowest point
//! of each octave `[2^n, 2^(n+1))` subject to the curve dominating every such
//! point, `a_u >= a`, `b_u >= b` and nonnegative coefficients. For `s > 0`
//! distances are measured after the Monna map, `d_M = M(d)`.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::{monna_map, CouplingModel};
use crate::magnon::{
    evolve_magnon, threshold_times, time_grid, MagnonPropagator, Thresholds, DEFAULT_DT,
    DEFAULT_HORIZON,
};
use crate::stats::pearson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceKind {
    /// Minimal-image separation `|i - j|`, in `1..=N/2`.
    Physical,
    /// `M((j - i) mod N)`, in `1..N`.
    Monna,
}

impl DistanceKind {
    /// Physical distance for `s <= 0`, Monna distance for `s > 0`.
    pub fn natural_for(s: f64) -> Self {
        if s > 0.0 {
            DistanceKind::Monna
        } else {
            DistanceKind::Physical
        }
    }

    /// Largest distance this measure can take on `n_sites` sites.
    pub fn max_distance(self, n_sites: usize) -> usize {
        match self {
            DistanceKind::Physical => n_sites / 2,
            DistanceKind::Monna => n_sites - 1,
        }
    }
}

impl std::fmt::Display for DistanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceKind::Physical => write!(f, "physical"),
            DistanceKind::Monna => write!(f, "monna"),
        }
    }
}

impl std::str::FromStr for DistanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" => Ok(DistanceKind::Physical),
            "monna" => Ok(DistanceKind::Monna),
            other => Err(Error::Parse(format!("unknown distance kind `{other}`"))),
        }
    }
}

/// A `(distance, t_eps)` sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistancePoint {
    pub distance: usize,
    pub t_eps: f64,
}

/// Distance of `site` from `source` under the chosen measure.
pub fn distance_between(
    n_sites: usize,
    source: usize,
    site: usize,
    kind: DistanceKind,
) -> Result<usize> {
    let rel = (site + n_sites - source) % n_sites;
    match kind {
        DistanceKind::Physical => Ok(rel.min(n_sites - rel)),
        DistanceKind::Monna => monna_map(n_sites, rel),
    }
}

/// Convert threshold times to distance samples. Returns the samples and the
/// number of sites that never crossed the threshold (excluded).
pub fn distance_profile(
    thresholds: &Thresholds,
    kind: DistanceKind,
) -> Result<(Vec<DistancePoint>, usize)> {
    let n = thresholds.crossings.len();
    let src = thresholds.source_site;
    let mut points = Vec::with_capacity(n);
    let mut unreached = 0;
    for j in (0..n).filter(|&j| j != src) {
        match thresholds.time(j) {
            Some(t) => points.push(DistancePoint {
                distance: distance_between(n, src, j, kind)?,
                t_eps: t,
            }),
            None => unreached += 1,
        }
    }
    Ok((points, unreached))
}

/// Fastest point at each power-of-two distance.
pub fn fastest_points(points: &[DistancePoint]) -> Vec<DistancePoint> {
    let mut best: Vec<DistancePoint> = Vec::new();
    for p in points.iter().filter(|p| p.distance.is_power_of_two()) {
        match best.iter_mut().find(|b| b.distance == p.distance) {
            Some(b) if p.t_eps < b.t_eps => b.t_eps = p.t_eps,
            Some(_) => {}
            None => best.push(*p),
        }
    }
    best.sort_by_key(|p| p.distance);
    best
}

/// Slowest point of each complete octave `[2^n, 2^(n+1))` with `n >= 1`.
///
/// An octave is complete when it lies entirely within `1..=max_distance`.
/// The `d = 1` octave is skipped because `ln d` vanishes there and the
/// upper-bound form cannot dominate it.
pub fn slowest_points(points: &[DistancePoint], max_distance: usize) -> Vec<DistancePoint> {
    let mut out = Vec::new();
    let mut lo = 2usize;
    while 2 * lo - 1 <= max_distance {
        let slowest = points
            .iter()
            .filter(|p| p.distance >= lo && p.distance < 2 * lo)
            .max_by(|a, b| a.t_eps.total_cmp(&b.t_eps));
        if let Some(p) = slowest {
            out.push(*p);
        }
        lo *= 2;
    }
    out
}

/// `a d^b <= t_eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerFit {
    pub a: f64,
    pub b: f64,
    /// Sum of squared log-errors of the fitted (before lowering) curve.
    pub residual: f64,
}

impl LowerFit {
    pub fn eval(&self, d: f64) -> f64 {
        self.a * d.powf(self.b)
    }
}

/// Least-squares power law in log-log space, exponent clamped at zero, then
/// the prefactor lowered until the curve sits at or below every point.
pub fn fit_lower(points: &[DistancePoint]) -> Result<LowerFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "lower-bound fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.distance == 0 || !(p.t_eps > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "lower-bound fit needs d >= 1 and t > 0, got d={} t={}",
            p.distance, p.t_eps
        )));
    }
    let x: Vec<f64> = points.iter().map(|p| (p.distance as f64).ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.t_eps.ln()).collect();
    let (mut log_a, mut b) = match crate::stats::linear_fit(&x, &y) {
        Ok(fit) => (fit.intercept, fit.slope),
        Err(Error::Degenerate(_)) => (y.iter().sum::<f64>() / y.len() as f64, 0.0),
        Err(e) => return Err(e),
    };
    if b < 0.0 {
        b = 0.0;
        log_a = y.iter().sum::<f64>() / y.len() as f64;
    }
    let residual = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - log_a - b * xi).powi(2))
        .sum();
    let floor = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| yi - b * xi)
        .fold(f64::INFINITY, f64::min);
    log_a = log_a.min(floor);
    Ok(LowerFit {
        a: log_a.exp(),
        b,
        residual,
    })
}

/// `t_eps <= a_u d^b_u (ln d)^c_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperFit {
    pub a_u: f64,
    pub b_u: f64,
    pub c_u: f64,
    /// Sum of squared log-errors at the slowest points.
    pub residual: f64,
    /// All constraints hold at the returned coefficients.
    pub feasible: bool,
}

impl UpperFit {
    pub fn eval(&self, d: f64) -> f64 {
        self.a_u * d.powf(self.b_u) * d.ln().powf(self.c_u)
    }
}

/// Objective of the upper-bound search in parameters
/// `theta = (ln a_u, b_u, c_u)`: squared differences between the curve and the
/// slowest points, plus an exterior penalty on points above the curve
/// (measured in log space, where the constraint is linear in `theta`).
struct UpperObjective<'a> {
    features: &'a [[f64; 2]],
    t: &'a [f64],
    log_t: Vec<f64>,
    mu: f64,
}

impl UpperObjective<'_> {
    fn log_curve(&self, theta: &[f64; 3], k: usize) -> f64 {
        theta[0] + theta[1] * self.features[k][0] + theta[2] * self.features[k][1]
    }

    fn value(&self, theta: &[f64; 3]) -> f64 {
        let mut sq = 0.0;
        let mut pen = 0.0;
        for k in 0..self.t.len() {
            let lc = self.log_curve(theta, k);
            sq += (lc.exp() - self.t[k]).powi(2);
            let v = self.log_t[k] - lc;
            if v > 0.0 {
                pen += v * v;
            }
        }
        sq + self.mu * pen
    }

    /// Largest log-violation of the domination constraint.
    fn violation(&self, theta: &[f64; 3]) -> f64 {
        (0..self.t.len())
            .map(|k| self.log_t[k] - self.log_curve(theta, k))
            .fold(0.0, f64::max)
    }
}

/// Minimise `f` over `x >= lo` near `x0` by bracketing and golden sections.
fn line_minimize<F: Fn(f64) -> f64>(f: F, x0: f64, lo: f64, step: f64) -> f64 {
    const GOLD: f64 = 0.618_033_988_749_894_8;
    let x0 = x0.max(lo);
    let f0 = f(x0);
    let fwd = f(x0 + step);
    let h = if fwd < f0 {
        step
    } else {
        let back = (x0 - step).max(lo);
        if back < x0 && f(back) < f0 {
            -step
        } else {
            return golden(&f, back, x0 + step, GOLD);
        }
    };
    // walk downhill with doubling steps until the function rises
    let (mut prev, mut cur, mut fcur) = (x0, (x0 + h).max(lo), f((x0 + h).max(lo)));
    let mut h = h;
    for _ in 0..80 {
        h *= 2.0;
        let next = (cur + h).max(lo);
        let fnext = f(next);
        if fnext >= fcur || next == lo {
            let (l, r) = if prev < next {
                (prev, next)
            } else {
                (next, prev)
            };
            return golden(&f, l, r, GOLD);
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
    cur
}

fn golden<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, gold: f64) -> f64 {
    let mut c = b - gold * (b - a);
    let mut d = a + gold * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - gold * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gold * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Cyclic coordinate descent on `obj` with lower bounds `lo`, stopping when a
/// full sweep moves no coordinate by more than `tol`.
fn coordinate_descent(
    obj: &UpperObjective<'_>,
    start: [f64; 3],
    lo: [f64; 3],
    tol: f64,
) -> [f64; 3] {
    let mut theta = start;
    for k in 0..3 {
        theta[k] = theta[k].max(lo[k]);
    }
    for _ in 0..20_000 {
        let before = theta;
        let mut moved: f64 = 0.0;
        for k in 0..3 {
            let old = theta[k];
            let step = 0.05 * (1.0 + old.abs());
            let new = line_minimize(
                |x| {
                    let mut th = theta;
                    th[k] = x;
                    obj.value(&th)
                },
                old,
                lo[k],
                step,
            );
            let mut th = theta;
            th[k] = new;
            if obj.value(&th) <= obj.value(&theta) {
                theta = th;
                moved = moved.max((new - old).abs());
            }
        }
        if moved < tol {
            break;
        }
        // pattern move along the sweep displacement, clamped to the bounds
        let dir = [
            theta[0] - before[0],
            theta[1] - before[1],
            theta[2] - before[2],
        ];
        let along = |x: f64| {
            let mut th = theta;
            for k in 0..3 {
                th[k] = (theta[k] + x * dir[k]).max(lo[k]);
            }
            th
        };
        let x = line_minimize(|x| obj.value(&along(x)), 0.0, 0.0, 1.0);
        let th = along(x);
        if obj.value(&th) < obj.value(&theta) {
            theta = th;
        }
    }
    theta
}

/// Constrained fit of the upper-bound curve to the binned slowest points.
///
/// Minimises the squared differences between the curve and the slowest points
/// by multi-start coordinate descent over `(ln a_u, b_u, c_u)`, with
/// `a_u >= a`, `b_u >= b`, `c_u >= 0` held as bounds and domination of every
/// slowest point enforced by an exterior penalty of increasing weight. The
/// prefactor is finally lifted by the largest remaining violation, so the
/// returned curve satisfies every constraint exactly.
pub fn fit_upper(slowest: &[DistancePoint], lower: &LowerFit) -> Result<UpperFit> {
    if slowest.is_empty() {
        return Err(Error::InsufficientData(
            "no slowest points: all bins empty".into(),
        ));
    }
    if let Some(p) = slowest.iter().find(|p| p.distance < 2 || !(p.t_eps > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "upper-bound fit needs d >= 2 and t > 0, got d={} t={}",
            p.distance, p.t_eps
        )));
    }
    let features: Vec<[f64; 2]> = slowest
        .iter()
        .map(|p| {
            let ld = (p.distance as f64).ln();
            [ld, ld.ln()]
        })
        .collect();
    let t: Vec<f64> = slowest.iter().map(|p| p.t_eps).collect();
    let log_t: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let lo = [lower.a.ln(), lower.b, 0.0];

    let mut best: Option<([f64; 3], f64)> = None;
    for &b_off in &[0.0, 0.5, 1.0] {
        for &c0 in &[0.0, 0.5, 1.0, 2.0] {
            let b0 = lower.b + b_off;
            // prefactor that makes the starting curve dominate every point
            let a0 = (0..t.len())
                .map(|k| log_t[k] - b0 * features[k][0] - c0 * features[k][1])
                .fold(lo[0], f64::max);
            let mut theta = [a0, b0, c0];
            let mut mu = 1e2;
            while mu <= 1e8 {
                let obj = UpperObjective {
                    features: &features,
                    t: &t,
                    log_t: log_t.clone(),
                    mu,
                };
                theta = coordinate_descent(&obj, theta, lo, 1e-6);
                mu *= 10.0;
            }
            let probe = UpperObjective {
                features: &features,
                t: &t,
                log_t: log_t.clone(),
                mu: 0.0,
            };
            theta[0] += probe.violation(&theta);
            let value = probe.value(&theta);
            if best.map_or(true, |(_, v)| value < v) {
                best = Some((theta, value));
            }
        }
    }
    let (theta, _) = best.expect("at least one start");
    let residual = (0..t.len())
        .map(|k| {
            (theta[0] + theta[1] * features[k][0] + theta[2] * features[k][1] - log_t[k]).powi(2)
        })
        .sum();
    let feasible = theta.iter().all(|v| v.is_finite())
        && theta[0] >= lo[0] - 1e-12
        && theta[1] >= lo[1]
        && theta[2] >= 0.0
        && (0..t.len()).all(|k| {
            theta[0] + theta[1] * features[k][0] + theta[2] * features[k][1] >= log_t[k] - 1e-12
        });
    Ok(UpperFit {
        a_u: theta[0].exp(),
        b_u: theta[1],
        c_u: theta[2],
        residual,
        feasible,
    })
}

/// Options for a full light-cone fit from scratch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightconeOptions {
    /// Threshold; `None` means `1/N^2`.
    pub epsilon: Option<f64>,
    pub tmax: f64,
    pub dt: f64,
    /// Source site; `None` means `N/2`.
    pub source: Option<usize>,
    /// Bisection tolerance for threshold refinement.
    pub refine_tol: f64,
}

impl Default for LightconeOptions {
    fn default() -> Self {
        Self {
            epsilon: None,
            tmax: DEFAULT_HORIZON,
            dt: DEFAULT_DT,
            source: None,
            refine_tol: 1e-9,
        }
    }
}

/// Lower and upper bound for one exponent and distance measure.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundFit {
    pub s: f64,
    pub distance_kind: DistanceKind,
    pub lower: LowerFit,
    pub upper: UpperFit,
    pub fastest: Vec<DistancePoint>,
    pub slowest: Vec<DistancePoint>,
    /// Sites excluded because the threshold was never reached.
    pub unreached: usize,
}

impl BoundFit {
    pub fn feasible(&self) -> bool {
        self.upper.feasible
    }

    /// Total squared log-residual of both fits.
    pub fn residual(&self) -> f64 {
        self.lower.residual + self.upper.residual
    }
}

/// Fit both bounds to precomputed threshold times.
pub fn fit_bounds(thresholds: &Thresholds, s: f64, kind: DistanceKind) -> Result<BoundFit> {
    let n = thresholds.crossings.len();
    let (points, unreached) = distance_profile(thresholds, kind)?;
    let fastest = fastest_points(&points);
    let lower = fit_lower(&fastest)?;
    let slowest = slowest_points(&points, kind.max_distance(n));
    let upper = fit_upper(&slowest, &lower)?;
    Ok(BoundFit {
        s,
        distance_kind: kind,
        lower,
        upper,
        fastest,
        slowest,
        unreached,
    })
}

/// Refined threshold times for a periodic model.
pub fn model_thresholds(
    model: &CouplingModel,
    opts: &LightconeOptions,
    exec: Execution,
) -> Result<Thresholds> {
    let n = model.n_sites();
    let source = opts.source.unwrap_or(n / 2);
    let eps = opts.epsilon.unwrap_or(1.0 / (n * n) as f64);
    let times = time_grid(opts.tmax, opts.dt)?;
    let occ = evolve_magnon(model, source, &times, exec)?;
    let prop = MagnonPropagator::new(model, source)?;
    Ok(threshold_times(&occ, eps)?.refine(&prop, opts.refine_tol))
}

/// Simulate and fit one model.
pub fn bound_fit(
    model: &CouplingModel,
    kind: DistanceKind,
    opts: &LightconeOptions,
    exec: Execution,
) -> Result<BoundFit> {
    let th = model_thresholds(model, opts, exec)?;
    fit_bounds(&th, model.s(), kind)
}

/// Fit bounds for each exponent in `s_grid`, using the natural distance
/// measure for each sign of `s`. Fits run independently.
pub fn sweep(
    n_sites: usize,
    s_grid: &[f64],
    opts: &LightconeOptions,
    exec: Execution,
) -> Vec<Result<BoundFit>> {
    exec.map_slice(s_grid, |&s| {
        let model = CouplingModel::periodic(n_sites, s)?;
        bound_fit(
            &model,
            DistanceKind::natural_for(s),
            opts,
            Execution::Sequential,
        )
    })
}

/// `(graph distance, t_eps)` for every reached site and the Pearson
/// correlation between the two.
pub fn graph_distance_correlation(
    model: &CouplingModel,
    thresholds: &Thresholds,
) -> Result<(Vec<DistancePoint>, f64)> {
    let src = thresholds.source_site;
    let dist = model.graph_distances_from(src)?;
    let points: Vec<DistancePoint> = (0..model.n_sites())
        .filter(|&j| j != src)
        .filter_map(|j| {
            thresholds.time(j).map(|t| DistancePoint {
                distance: dist[j],
                t_eps: t,
            })
        })
        .collect();
    let x: Vec<f64> = points.iter().map(|p| p.distance as f64).collect();
    let y: Vec<f64> = points.iter().map(|p| p.t_eps).collect();
    let r = pearson(&x, &y)?;
    Ok((points, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(f: impl Fn(f64) -> f64, ds: &[usize]) -> Vec<DistancePoint> {
        ds.iter()
            .map(|&d| DistancePoint {
                distance: d,
                t_eps: f(d as f64),
            })
            .collect()
    }

    #[test]
    fn exact_power_law_lower() {
        let p = pts(|d| 2.0 * d, &[1, 2, 4, 8]);
        let fit = fit_lower(&p).unwrap();
        assert!((fit.a - 2.0).abs() < 1e-12);
        assert!((fit.b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_needs_three_points() {
        let p = pts(|d| d, &[1, 2]);
        assert!(matches!(fit_lower(&p), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn decreasing_points_clamp_exponent() {
        let p = pts(|d| 1.0 / d, &[1, 2, 4, 8]);
        let fit = fit_lower(&p).unwrap();
        assert_eq!(fit.b, 0.0);
        for q in &p {
            assert!(fit.eval(q.distance as f64) <= q.t_eps * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exact_upper_form_recovered() {
        let p = pts(|d| d * d.ln(), &[2, 4, 8, 16, 32, 64]);
        let lower = LowerFit {
            a: 0.5,
            b: 0.5,
            residual: 0.0,
        };
        let fit = fit_upper(&p, &lower).unwrap();
        assert!(fit.feasible);
        assert!((fit.a_u - 1.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.b_u - 1.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.c_u - 1.0).abs() < 1e-3);
    }

    #[test]
    fn upper_respects_lower_exponent() {
        let p = pts(|d| d.ln() + 1.0, &[2, 4, 8, 16]);
        let lower = LowerFit {
            a: 1.5,
            b: 0.7,
            residual: 0.0,
        };
        let fit = fit_upper(&p, &lower).unwrap();
        assert!(fit.feasible);
        assert!(fit.b_u >= 0.7 - 1e-12);
        assert!(fit.a_u >= 1.5 * (1.0 - 1e-12));
        for q in &p {
            assert!(fit.eval(q.distance as f64) >= q.t_eps * (1.0 - 1e-12));
        }
    }

    #[test]
    fn empty_bins_rejected() {
        let lower = LowerFit {
            a: 1.0,
            b: 0.0,
            residual: 0.0,
        };
        assert!(matches!(
            fit_upper(&[], &lower),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn fastest_points_at_powers_of_two() {
        let p = pts(|d| d, &[1, 2, 3, 4, 5, 6, 7, 8]);
        let f = fastest_points(&p);
        let ds: Vec<usize> = f.iter().map(|p| p.distance).collect();
        assert_eq!(ds, vec![1, 2, 4, 8]);
    }

    #[test]
    fn octave_bins() {
        let p = pts(|d| d, &(1..=8).collect::<Vec<_>>());
        let s = slowest_points(&p, 8);
        let ds: Vec<usize> = s.iter().map(|p| p.distance).collect();
        assert_eq!(ds, vec![3, 7]);
        let s = slowest_points(&pts(|d| d, &(1..16).collect::<Vec<_>>()), 15);
        assert_eq!(
            s.iter().map(|p| p.distance).collect::<Vec<_>>(),
            vec![3, 7, 15]
        );
    }

    #[test]
    fn monna_distances() {
        assert_eq!(distance_between(8, 4, 5, DistanceKind::Monna).unwrap(), 4);
        assert_eq!(distance_between(8, 4, 0, DistanceKind::Monna).unwrap(), 1);
        assert_eq!(
            distance_between(8, 4, 1, DistanceKind::Physical).unwrap(),
            3
        );
    }
}
