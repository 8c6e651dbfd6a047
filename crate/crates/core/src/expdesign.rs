//! Cavity implementation budget: interaction-to-decay ratio, cooperativity
//! requirements, collective decay rates and drive waveforms.
//!
//! Proportionality constants of order unity in the coupling and scattering
//! estimates are set to one, so only ratios (`rho`, required `n eta`) are
//! meaningful; absolute rates are order-of-magnitude.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::CouplingModel;
use crate::magnon::dispersion;
use crate::C64;

/// Modulation indices above this trigger a weak-modulation warning.
pub const BETA_WARNING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Single-atom cooperativity.
    pub eta: f64,
    pub n_atoms_per_site: f64,
    /// Cavity linewidth.
    pub kappa: f64,
    /// Atomic excited-state linewidth.
    pub gamma_atom: f64,
    /// Raman detuning of the carrier.
    pub delta: f64,
    /// Modulation index of every sideband.
    pub beta: f64,
    pub n_sites: usize,
}

impl CavityParams {
    /// Parameters at the optimal modulation index with unit rates.
    pub fn at_optimum(n_sites: usize, eta: f64, n_atoms_per_site: f64) -> Result<Self> {
        let mut p = Self {
            eta,
            n_atoms_per_site,
            kappa: 1.0,
            gamma_atom: 1.0,
            delta: 1.0,
            beta: 0.1,
            n_sites,
        };
        p.beta = optimal_beta(modulation_count(n_sites)?);
        p.delta = p.kappa * optimal_detuning_ratio(&p)?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eta", self.eta),
            ("n_atoms_per_site", self.n_atoms_per_site),
            ("kappa", self.kappa),
            ("gamma_atom", self.gamma_atom),
            ("delta", self.delta),
            ("beta", self.beta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.beta >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "modulation index must be below 1, got {}",
                self.beta
            )));
        }
        modulation_count(self.n_sites)?;
        Ok(())
    }

    /// Collective cooperativity `n eta`.
    pub fn collective_cooperativity(&self) -> f64 {
        self.n_atoms_per_site * self.eta
    }

    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.beta > BETA_WARNING {
            out.push(format!(
                "modulation index {} exceeds {BETA_WARNING}; the weak-modulation estimate is unreliable",
                self.beta
            ));
        }
        out
    }
}

/// Number of modulation frequencies `M = log2(N/2)`.
pub fn modulation_count(n_sites: usize) -> Result<f64> {
    if n_sites < 4 || !n_sites.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "need a power-of-two size of at least 4 sites, got {n_sites}"
        )));
    }
    Ok((n_sites as f64 / 2.0).log2())
}

/// Sideband power factor `B = 1 + 2 M beta^2`.
pub fn sideband_factor(m: f64, beta: f64) -> f64 {
    1.0 + 2.0 * m * beta * beta
}

/// Modulation index maximising `rho`: `2 M beta^2 = 1`.
pub fn optimal_beta(m: f64) -> f64 {
    (2.0 * m).sqrt().recip()
}

/// Optimal `delta / kappa = sqrt(n eta M beta / B)`.
pub fn optimal_detuning_ratio(p: &CavityParams) -> Result<f64> {
    let m = modulation_count(p.n_sites)?;
    Ok((p.collective_cooperativity() * m * p.beta / sideband_factor(m, p.beta)).sqrt())
}

/// `rho = beta / (M beta kappa/delta + B delta / (n eta kappa))` at the
/// detuning stored in `p`.
pub fn interaction_to_decay_at(p: &CavityParams) -> Result<f64> {
    p.validate()?;
    let m = modulation_count(p.n_sites)?;
    let b = sideband_factor(m, p.beta);
    let ratio = p.delta / p.kappa;
    Ok(p.beta / (m * p.beta / ratio + b * ratio / p.collective_cooperativity()))
}

/// `rho` at the optimal detuning, `(1/2) sqrt(n eta beta / (M B))`.
pub fn interaction_to_decay(p: &CavityParams) -> Result<f64> {
    p.validate()?;
    let m = modulation_count(p.n_sites)?;
    Ok(0.5 * (p.collective_cooperativity() * p.beta / (m * sideband_factor(m, p.beta))).sqrt())
}

/// Closed form at the optimal modulation index, `sqrt(n eta)/2 / (2M)^(3/4)`.
pub fn optimal_interaction_to_decay(n_sites: usize, n_eta: f64) -> Result<f64> {
    let m = modulation_count(n_sites)?;
    Ok(0.5 * n_eta.sqrt() / (2.0 * m).powf(0.75))
}

/// Collective cooperativity giving `rho = 1`: `n eta = 4 M B / beta`.
pub fn required_cooperativity(n_sites: usize, beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "modulation index must be positive, got {beta}"
        )));
    }
    let m = modulation_count(n_sites)?;
    Ok(4.0 * m * sideband_factor(m, beta) / beta)
}

/// Closed form at the optimal modulation index, `4 (2M)^(3/2)`.
pub fn optimal_required_cooperativity(n_sites: usize) -> Result<f64> {
    let m = modulation_count(n_sites)?;
    Ok(4.0 * (2.0 * m).powf(1.5))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CooperativityRow {
    pub beta: f64,
    pub n_sites: usize,
    pub required_n_eta: f64,
}

/// Required cooperativity over a grid of modulation indices and sizes.
pub fn cooperativity_table(betas: &[f64], sizes: &[usize]) -> Result<Vec<CooperativityRow>> {
    let mut out = Vec::with_capacity(betas.len() * sizes.len());
    for &n_sites in sizes {
        for &beta in betas {
            out.push(CooperativityRow {
                beta,
                n_sites,
                required_n_eta: required_cooperativity(n_sites, beta)?,
            });
        }
    }
    Ok(out)
}

/// `n` evenly spaced modulation indices on `[lo, hi]`.
pub fn beta_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Sizes `2^lo ..= 2^hi`.
pub fn size_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|p| 1usize << p).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRate {
    pub k: f64,
    /// Rate of the raising and lowering spin-wave channel.
    pub gamma: f64,
}

/// Collective decay rates `gamma_k = (kappa/delta) |E(k)|`.
pub fn collective_decay_rates(
    model: &CouplingModel,
    kappa_over_delta: f64,
) -> Result<Vec<DecayRate>> {
    let table = dispersion(model)?;
    Ok(table
        .energies
        .iter()
        .enumerate()
        .map(|(m, e)| DecayRate {
            k: table.wavenumber(m),
            gamma: kappa_over_delta * e.abs(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    /// Phases `omega t` over one period.
    pub phase: Vec<f64>,
    /// Field amplitude `|Omega|` in units of the carrier.
    pub amplitude: Vec<f64>,
}

impl Waveform {
    pub fn len(&self) -> usize {
        self.phase.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phase.is_empty()
    }

    /// Fourier amplitudes of `|Omega|^2` for harmonics `0..=n/2`.
    pub fn intensity_harmonics(&self) -> Vec<f64> {
        let n = self.len();
        let mut buf: Vec<C64> = self
            .amplitude
            .iter()
            .map(|a| C64::new(a * a, 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        (0..=n / 2)
            .map(|m| {
                let scale = if m == 0 || 2 * m == n { 1.0 } else { 2.0 };
                scale * buf[m].norm() / n as f64
            })
            .collect()
    }

    /// Largest harmonic of `|Omega|^2` at a nonzero frequency that is not a
    /// power of two.
    pub fn off_pattern_weight(&self) -> f64 {
        self.intensity_harmonics()
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(m, _)| !m.is_power_of_two())
            .map(|(_, &a)| a)
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformOptions {
    pub n_samples: usize,
    /// Modulation index of the strongest sideband.
    pub beta: f64,
    /// Minimum of `|Omega|^2` over the period.
    pub margin: f64,
}

impl Default for WaveformOptions {
    fn default() -> Self {
        Self {
            n_samples: 4096,
            beta: 0.2,
            margin: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveformPair {
    /// `sqrt(E(omega t) + c)`, whose intensity has only the intended harmonics.
    pub exact: Waveform,
    /// `1 + 2 sum_l beta_l cos(2^l omega t)`.
    pub naive: Waveform,
    /// Offset `c` under the square root.
    pub offset: f64,
    /// Per-level modulation indices `beta_l`.
    pub betas: Vec<f64>,
}

/// Drive waveforms reproducing the coupling pattern of `model`.
///
/// Sideband indices are `beta_l = beta J_l / max J`. The exact waveform has
/// intensity `c + 4 sum_l beta_l cos(2^l omega t)`, the first-order intensity
/// of the naive multi-tone drive, with `c` the smallest offset leaving
/// `margin` under the square root.
pub fn modulation_waveform(model: &CouplingModel, opts: &WaveformOptions) -> Result<WaveformPair> {
    waveform_from_strengths(model.level_strengths(), opts)
}

pub fn waveform_from_strengths(strengths: &[f64], opts: &WaveformOptions) -> Result<WaveformPair> {
    let n = opts.n_samples;
    let top = strengths.len().checked_sub(1).map_or(1, |l| 1usize << l);
    if n <= 2 * top {
        return Err(Error::InvalidParameter(format!(
            "{n} samples cannot resolve harmonic {top}"
        )));
    }
    if !(opts.beta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "modulation index must be nonnegative, got {}",
            opts.beta
        )));
    }
    let jmax = strengths.iter().fold(0.0f64, |a, j| a.max(j.abs()));
    let betas: Vec<f64> = strengths
        .iter()
        .map(|j| {
            if jmax > 0.0 {
                opts.beta * j / jmax
            } else {
                0.0
            }
        })
        .collect();
    let phase: Vec<f64> = (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
    let tones = |theta: f64| -> f64 {
        betas
            .iter()
            .enumerate()
            .map(|(l, b)| b * ((1u64 << l) as f64 * theta).cos())
            .sum()
    };
    let pattern: Vec<f64> = phase.iter().map(|&t| 4.0 * tones(t)).collect();
    let lowest = pattern.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = -lowest + opts.margin;
    let exact = pattern
        .iter()
        .map(|&e| {
            let r = e + offset;
            if r < 0.0 {
                Err(Error::InvalidParameter(format!(
                    "negative radicand {r}; margin {} is too small",
                    opts.margin
                )))
            } else {
                Ok(r.sqrt())
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let naive = phase
        .iter()
        .map(|&t| (1.0 + 2.0 * tones(t)).abs())
        .collect();
    Ok(WaveformPair {
        exact: Waveform {
            phase: phase.clone(),
            amplitude: exact,
        },
        naive: Waveform {
            phase,
            amplitude: naive,
        },
        offset,
        betas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_design_point() {
        let rho = optimal_interaction_to_decay(1 << 10, 300.0).unwrap();
        assert!((0.9..=1.1).contains(&rho), "{rho}");
        let req = optimal_required_cooperativity(1 << 10).unwrap();
        assert!((req - 305.47).abs() < 0.01, "{req}");
    }

    #[test]
    fn general_formula_reduces_at_optimum() {
        for p in 2..=12 {
            let n = 1usize << p;
            let m = modulation_count(n).unwrap();
            let b = optimal_beta(m);
            let a = required_cooperativity(n, b).unwrap();
            let c = optimal_required_cooperativity(n).unwrap();
            assert!((a - c).abs() <= 1e-9 * c);
            let params = CavityParams::at_optimum(n, 1.0, 300.0).unwrap();
            let r1 = interaction_to_decay(&params).unwrap();
            let r2 = optimal_interaction_to_decay(n, 300.0).unwrap();
            let r3 = interaction_to_decay_at(&params).unwrap();
            assert!((r1 - r2).abs() < 1e-12 && (r1 - r3).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_detuning_is_a_maximum() {
        let p = CavityParams::at_optimum(256, 1.0, 100.0).unwrap();
        let best = interaction_to_decay_at(&p).unwrap();
        for f in [0.5, 0.8, 0.95, 1.05, 1.2, 2.0] {
            let q = CavityParams {
                delta: p.delta * f,
                ..p
            };
            assert!(interaction_to_decay_at(&q).unwrap() < best);
        }
    }

    #[test]
    fn doubling_cooperativity_scales_rho() {
        let p = CavityParams::at_optimum(64, 1.0, 50.0).unwrap();
        let q = CavityParams {
            n_atoms_per_site: 100.0,
            ..p
        };
        let ratio = interaction_to_decay(&q).unwrap() / interaction_to_decay(&p).unwrap();
        assert!((ratio - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn required_cooperativity_diverges_at_small_beta() {
        let a = required_cooperativity(64, 1e-3).unwrap();
        let b = required_cooperativity(64, 1e-6).unwrap();
        assert!(b > 900.0 * a);
    }

    #[test]
    fn table_is_monotone_in_size() {
        let betas = beta_grid(0.05, 0.5, 10);
        let sizes = size_grid(4, 10);
        let table = cooperativity_table(&betas, &sizes).unwrap();
        for b in &betas {
            let col: Vec<f64> = table
                .iter()
                .filter(|r| r.beta == *b)
                .map(|r| r.required_n_eta)
                .collect();
            assert!(col.windows(2).all(|w| w[1] > w[0]));
        }
        let min_of = |n| {
            table
                .iter()
                .filter(|r| r.n_sites == n)
                .map(|r| r.required_n_eta)
                .fold(f64::INFINITY, f64::min)
        };
        assert!(min_of(16) < min_of(1024));
    }

    #[test]
    fn strong_modulation_warns() {
        let mut p = CavityParams::at_optimum(16, 1.0, 10.0).unwrap();
        assert!(p.warnings().is_empty() || p.beta > BETA_WARNING);
        p.beta = 0.7;
        assert_eq!(p.warnings().len(), 1);
        p.beta = 1.2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn exact_waveform_has_only_power_of_two_harmonics() {
        let model = CouplingModel::periodic(64, 0.0).unwrap();
        let w = modulation_waveform(&model, &WaveformOptions::default()).unwrap();
        let h = w.exact.intensity_harmonics();
        for (l, b) in w.betas.iter().enumerate() {
            assert!((h[1 << l] - 4.0 * b).abs() < 1e-6);
        }
        assert!(w.exact.off_pattern_weight() < 1e-6);
        // squaring the naive drive adds cross tones at second order in beta
        assert!(w.naive.off_pattern_weight() > 1e-3);
    }

    #[test]
    fn flat_pattern_gives_constant_waveform() {
        let w = waveform_from_strengths(&[0.0, 0.0, 0.0], &WaveformOptions::default()).unwrap();
        let a0 = w.exact.amplitude[0];
        assert!(w.exact.amplitude.iter().all(|&a| (a - a0).abs() < 1e-15));
    }

    #[test]
    fn negative_margin_rejected() {
        let opts = WaveformOptions {
            margin: -0.5,
            ..WaveformOptions::default()
        };
        assert!(waveform_from_strengths(&[1.0, 1.0], &opts).is_err());
    }
}
