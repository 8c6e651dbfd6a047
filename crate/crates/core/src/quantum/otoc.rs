//! Infinite-temperature out-of-time-order correlators
//! `C(i, j; t) = <|[S^z_i(0), S^z_j(t)]|^2> / S^2` at half filling.
//!
//! With `A = S^z_i` diagonal in the product basis, the trace reduces to
//! `sum_xy (a_x - a_y)^2 |B_xy|^2` with `B = S^z_j(t)`, which avoids the
//! cancellation of the expanded four-point form. `(a_x - a_y)^2` is 1 exactly
//! when `x` and `y` differ at site `i`.

use faer::complex_native::c64;
use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::basis::SpinBasis;
use super::hamiltonian::{build_hamiltonian, site_sz, SparseOperator};
use super::propagate::{from_c64, ChebyshevPropagator, Eigensystem};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::geometry::CouplingModel;
use crate::stats::{linear_fit, mean_and_stderr};
use crate::C64;

/// `1 / S^2` for spin 1/2.
const INV_S2: f64 = 4.0;

/// Values below this are treated as numerical noise in exponent fits.
pub const OTOC_FLOOR: f64 = 1e-12;

/// Sizes up to this use the exact trace by default.
pub const EXACT_TRACE_MAX_SITES: usize = 12;

/// Sizes up to this are accepted at all.
pub const MAX_OTOC_SITES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Ensemble {
    /// `rho = P_n / Z` with `n = N/2` magnons.
    #[default]
    InfiniteTemperatureHalfFilling,
}

impl std::str::FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "infinite" | "infinite-temperature" | "half-filling" | "infinite-half-filling" => {
                Ok(Ensemble::InfiniteTemperatureHalfFilling)
            }
            other => Err(Error::Unsupported(format!("ensemble `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OtocMethod {
    /// Exact trace up to [`EXACT_TRACE_MAX_SITES`], typicality above.
    #[default]
    Auto,
    ExactTrace,
    Typicality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OtocOptions {
    pub ensemble: Ensemble,
    pub method: OtocMethod,
    /// Haar vectors for the typicality estimate.
    pub samples: usize,
    pub seed: u64,
}

impl Default for OtocOptions {
    fn default() -> Self {
        Self {
            ensemble: Ensemble::default(),
            method: OtocMethod::Auto,
            samples: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtocCurve {
    pub i: usize,
    pub j: usize,
    pub graph_distance: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Standard error of the stochastic estimate; zeros for the exact trace.
    pub stderr: Vec<f64>,
}

/// OTOC curves for each `(i, j)` pair on the given times.
pub fn otoc(
    model: &CouplingModel,
    pairs: &[(usize, usize)],
    times: &[f64],
    opts: &OtocOptions,
    exec: Execution,
) -> Result<Vec<OtocCurve>> {
    let n = model.n_sites();
    let Ensemble::InfiniteTemperatureHalfFilling = opts.ensemble;
    if n > MAX_OTOC_SITES {
        return Err(Error::DimensionOverflow {
            dim: 1 << n,
            limit: 1 << MAX_OTOC_SITES,
        });
    }
    for &(i, j) in pairs {
        for site in [i, j] {
            if site >= n {
                return Err(Error::IndexOutOfRange {
                    index: site,
                    n_sites: n,
                });
            }
        }
    }
    let exact = match opts.method {
        OtocMethod::Auto => n <= EXACT_TRACE_MAX_SITES,
        OtocMethod::ExactTrace => true,
        OtocMethod::Typicality => false,
    };
    let basis = SpinBasis::magnetization(n, n / 2)?;
    let h = build_hamiltonian(model, &basis)?;
    let mut curves = Vec::with_capacity(pairs.len());
    if exact {
        let eig = Eigensystem::new(&h)?;
        // group pairs by j so each S^z_j(t) is built once per time
        let mut js: Vec<usize> = pairs.iter().map(|p| p.1).collect();
        js.sort_unstable();
        js.dedup();
        let mut table = std::collections::HashMap::new();
        for &j in &js {
            let per_time = exact_all_sites(&basis, &eig, j, times, exec);
            table.insert(j, per_time);
        }
        for &(i, j) in pairs {
            let values: Vec<f64> = table[&j].iter().map(|row| row[i]).collect();
            curves.push(OtocCurve {
                i,
                j,
                graph_distance: model.graph_distance(i, j)?,
                times: times.to_vec(),
                stderr: vec![0.0; values.len()],
                values,
            });
        }
    } else {
        for &(i, j) in pairs {
            let (values, stderr) = typicality(&basis, &h, i, j, times, opts, exec);
            curves.push(OtocCurve {
                i,
                j,
                graph_distance: model.graph_distance(i, j)?,
                times: times.to_vec(),
                values,
                stderr,
            });
        }
    }
    Ok(curves)
}

/// `C(i, j; t)` for every `i` at each time, from one `S^z_j(t)` per time.
fn exact_all_sites(
    basis: &SpinBasis,
    eig: &Eigensystem,
    j: usize,
    times: &[f64],
    exec: Execution,
) -> Vec<Vec<f64>> {
    let d = basis.dim();
    let n = basis.n_sites();
    let v = eig.vectors();
    let z = site_sz(basis, j);
    let zv = Mat::<c64>::from_fn(d, d, |x, a| v.read(x, a) * c64::new(z[x], 0.0));
    let z_eig: Mat<c64> = v.adjoint() * &zv;
    let e = eig.values();
    let states = basis.states();
    exec.map_slice(times, |&t| {
        let m = Mat::<c64>::from_fn(d, d, |a, b| {
            let p = C64::from_polar(1.0, (e[a] - e[b]) * t);
            z_eig.read(a, b) * c64::new(p.re, p.im)
        });
        let b_t: Mat<c64> = v * &m * v.adjoint();
        let mut acc = vec![0.0; n];
        for x in 0..d {
            for y in 0..d {
                let w = from_c64(b_t.read(x, y)).norm_sqr();
                let mut diff = states[x] ^ states[y];
                while diff != 0 {
                    acc[diff.trailing_zeros() as usize] += w;
                    diff &= diff - 1;
                }
            }
        }
        acc.iter().map(|s| INV_S2 * s / d as f64).collect()
    })
}

/// Haar-vector estimate: `C ~ mean_phi |A B phi - B A phi|^2 / S^2`.
fn typicality(
    basis: &SpinBasis,
    h: &SparseOperator,
    i: usize,
    j: usize,
    times: &[f64],
    opts: &OtocOptions,
    exec: Execution,
) -> (Vec<f64>, Vec<f64>) {
    let prop = ChebyshevPropagator::new(h);
    let a = site_sz(basis, i);
    let z = site_sz(basis, j);
    let d = basis.dim();
    let diag = |w: &[f64], v: &[C64]| -> Vec<C64> { v.iter().zip(w).map(|(x, s)| x * s).collect() };
    let per_sample: Vec<Vec<f64>> = exec.map_range(opts.samples.max(1), |k| {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        let mut phi: Vec<C64> = (0..d)
            .map(|_| {
                C64::new(
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                )
            })
            .collect();
        let norm = phi.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        phi.iter_mut().for_each(|x| *x /= norm);
        let a_phi = diag(&a, &phi);
        times
            .iter()
            .map(|&t| {
                let w1 = prop.evolve(&diag(&z, &prop.evolve(&phi, t)), -t);
                let w2 = prop.evolve(&diag(&z, &prop.evolve(&a_phi, t)), -t);
                let x: f64 = w1
                    .iter()
                    .zip(&w2)
                    .zip(&a)
                    .map(|((p, q), s)| (p * s - q).norm_sqr())
                    .sum();
                INV_S2 * x
            })
            .collect()
    });
    let mut values = Vec::with_capacity(times.len());
    let mut errors = Vec::with_capacity(times.len());
    for k in 0..times.len() {
        let column: Vec<f64> = per_sample.iter().map(|s| s[k]).collect();
        let (m, e) = mean_and_stderr(&column);
        values.push(m);
        errors.push(e);
    }
    (values, errors)
}

/// Log-log power-law fit of an early-time curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub exponent: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Fit `C ~ t^p` on `t_min <= t <= t_max`, ignoring points at or below
/// [`OTOC_FLOOR`].
pub fn short_time_exponent(
    times: &[f64],
    values: &[f64],
    window: (f64, f64),
) -> Result<ExponentFit> {
    let (x, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|&(&t, &c)| t > 0.0 && t >= window.0 && t <= window.1 && c > OTOC_FLOOR)
        .map(|(&t, &c)| (t.ln(), c.ln()))
        .unzip();
    if x.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "fit window [{}, {}] keeps {} points above the floor",
            window.0,
            window.1,
            x.len()
        )));
    }
    let fit = linear_fit(&x, &y)?;
    Ok(ExponentFit {
        exponent: fit.slope,
        stderr: fit.slope_err,
        points: x.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_power_law() {
        let t: Vec<f64> = (1..20).map(|k| 0.01 * k as f64).collect();
        let c: Vec<f64> = t.iter().map(|x| x.powi(6)).collect();
        let fit = short_time_exponent(&t, &c, (0.0, 1.0)).unwrap();
        assert!((fit.exponent - 6.0).abs() < 1e-12);
    }

    #[test]
    fn empty_window_is_an_error() {
        let t = [0.1, 0.2];
        let c = [1e-20, 1e-18];
        assert!(short_time_exponent(&t, &c, (0.0, 1.0)).is_err());
    }

    #[test]
    fn starts_at_zero_and_is_even_in_time() {
        let model = CouplingModel::periodic(8, 0.0).unwrap();
        let times = [0.0, 0.4, -0.4, 1.3, -1.3];
        let curves = otoc(
            &model,
            &[(0, 1), (0, 3)],
            &times,
            &OtocOptions::default(),
            Execution::Sequential,
        )
        .unwrap();
        for c in &curves {
            assert!(c.values[0].abs() < 1e-14);
            assert!((c.values[1] - c.values[2]).abs() < 1e-12);
            assert!((c.values[3] - c.values[4]).abs() < 1e-12);
            assert!(c.values[3] > 0.0);
        }
    }

    #[test]
    fn typicality_tracks_exact() {
        let model = CouplingModel::periodic(8, 0.0).unwrap();
        let times = [0.5, 1.5];
        let exact = otoc(
            &model,
            &[(0, 2)],
            &times,
            &OtocOptions::default(),
            Execution::Sequential,
        )
        .unwrap();
        let opts = OtocOptions {
            method: OtocMethod::Typicality,
            samples: 64,
            ..OtocOptions::default()
        };
        let est = otoc(&model, &[(0, 2)], &times, &opts, Execution::Sequential).unwrap();
        for k in 0..times.len() {
            let err = (exact[0].values[k] - est[0].values[k]).abs();
            assert!(
                err < 4.0 * est[0].stderr[k] + 1e-3,
                "{err} vs {}",
                est[0].stderr[k]
            );
        }
    }

    #[test]
    fn unsupported_ensemble() {
        assert!("thermal".parse::<Ensemble>().is_err());
    }
}
