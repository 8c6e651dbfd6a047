//! Statistical checks of the twin-trajectory sensitivity against short-time
//! expansions of the equations of motion.

use treescramble::semiclassical::{run_sensitivity, SensitivityCurve, SensitivityOptions};
use treescramble::stats::linear_fit;
use treescramble::{CouplingModel, Execution};

fn ensemble(model: &CouplingModel, opts: SensitivityOptions) -> SensitivityCurve {
    let c = run_sensitivity(model, &opts, Execution::Parallel).unwrap();
    assert!(c.conservation.passes(), "{:?}", c.conservation);
    c
}

/// Rotating the source by `phi` about z changes `dz_i/dt` by `phi (h_i . x_i)`,
/// and a neighbour's by `-phi J_ij cos(theta_i - theta_j)`. Averaging over
/// uniform in-plane angles gives `C(0, t) = t^2/2 sum_j J_ij^2` and
/// `C(1, t) = t^2/2 <J_ij^2>` over the first shell.
#[test]
fn short_time_sensitivity_matches_expansion() {
    let model = CouplingModel::periodic(16, 0.0).unwrap();
    let t = 0.02;
    let c = ensemble(
        &model,
        SensitivityOptions {
            trajectories: 8192,
            tmax: t,
            dt: 0.001,
            record_every: t,
            seed: 11,
            ..SensitivityOptions::default()
        },
    );
    assert_eq!(c.times.len(), 2);
    assert!(c.mean[0][0].abs() < 1e-20);
    let hop2: Vec<f64> = (1..16)
        .map(|j| model.hopping(0, j).unwrap().powi(2))
        .collect();
    let want0 = 0.5 * t * t * hop2.iter().sum::<f64>();
    let shell1: Vec<f64> = hop2.iter().copied().filter(|&h| h > 0.0).collect();
    let want1 = 0.5 * t * t * shell1.iter().sum::<f64>() / shell1.len() as f64;
    let got0 = c.mean[0][1];
    let got1 = c.mean[1][1];
    assert!((got0 / want0 - 1.0).abs() < 0.05, "r=0: {got0} vs {want0}");
    assert!((got1 / want1 - 1.0).abs() < 0.05, "r=1: {got1} vs {want1}");
    // the estimates are consistent with their own error bars
    assert!((got0 - want0).abs() < 5.0 * c.stderr[0][1]);
    assert!((got1 - want1).abs() < 5.0 * c.stderr[1][1]);
}

/// With every spin initially in the xy-plane, `dz_k/dt` depends only on the
/// in-plane components of the neighbours, and an in-plane perturbation moves
/// one shell further only through `z ~ t`. Hence `dz(r) ~ t^(2r-1)` and
/// `C(r, t) ~ t^(4r-2)`.
#[test]
fn early_growth_power_laws() {
    let model = CouplingModel::periodic(256, 0.0).unwrap();
    let c = ensemble(
        &model,
        SensitivityOptions {
            trajectories: 32,
            tmax: 0.1,
            dt: 0.0005,
            record_every: 0.01,
            seed: 5,
            ..SensitivityOptions::default()
        },
    );
    for r in 1..=3 {
        let (x, y): (Vec<f64>, Vec<f64>) = c
            .times
            .iter()
            .zip(&c.mean[r])
            .filter(|(&t, _)| t >= 0.01 - 1e-12)
            .map(|(t, v)| (t.ln(), v.ln()))
            .unzip();
        let fit = linear_fit(&x, &y).unwrap();
        let want = 4.0 * r as f64 - 2.0;
        assert!(
            (fit.slope / want - 1.0).abs() < 0.1,
            "r={r}: slope {} vs {want}",
            fit.slope
        );
    }
}

#[test]
fn linear_response_is_independent_of_phi() {
    let model = CouplingModel::periodic(64, 0.0).unwrap();
    let base = SensitivityOptions {
        trajectories: 32,
        tmax: 2.0,
        seed: 3,
        ..SensitivityOptions::default()
    };
    let a = ensemble(&model, base);
    let b = ensemble(
        &model,
        SensitivityOptions {
            phi: base.phi / 2.0,
            ..base
        },
    );
    for k in [10, 20, 30, 40] {
        let rel = (a.site_average[k] / b.site_average[k] - 1.0).abs();
        assert!(rel < 0.05, "t={}: relative change {rel}", a.times[k]);
    }
}

#[test]
fn independent_seeds_agree_within_errors() {
    let model = CouplingModel::periodic(64, 0.0).unwrap();
    let opts = SensitivityOptions {
        trajectories: 128,
        tmax: 1.5,
        ..SensitivityOptions::default()
    };
    let a = ensemble(&model, SensitivityOptions { seed: 1, ..opts });
    let b = ensemble(&model, SensitivityOptions { seed: 2, ..opts });
    let k = a.times.len() - 1;
    let diff = (a.site_average[k] - b.site_average[k]).abs();
    let sigma = a.site_average_stderr[k].hypot(b.site_average_stderr[k]);
    assert!(diff < 4.0 * sigma, "{diff} vs sigma {sigma}");
    assert!(a.site_average[k] != b.site_average[k]);
}

#[test]
fn more_trajectories_converge() {
    let model = CouplingModel::periodic(32, 0.0).unwrap();
    let opts = SensitivityOptions {
        tmax: 1.0,
        seed: 9,
        ..SensitivityOptions::default()
    };
    let a = ensemble(
        &model,
        SensitivityOptions {
            trajectories: 256,
            ..opts
        },
    );
    let b = ensemble(
        &model,
        SensitivityOptions {
            trajectories: 512,
            ..opts
        },
    );
    for k in 1..a.times.len() {
        let shift = (a.site_average[k] - b.site_average[k]).abs();
        assert!(shift < 3.0 * a.site_average_stderr[k], "t={}", a.times[k]);
    }
    let b = ensemble(
        &model,
        SensitivityOptions {
            trajectories: 1024,
            ..opts
        },
    );
    let k = a.times.len() - 1;
    let ratio = b.site_average_stderr[k] / a.site_average_stderr[k];
    assert!((ratio - 0.5).abs() < 0.15, "stderr ratio {ratio}");
}

#[test]
fn sequential_and_parallel_runs_are_identical() {
    let model = CouplingModel::periodic(32, 0.5).unwrap();
    let opts = SensitivityOptions {
        trajectories: 12,
        tmax: 1.0,
        ..SensitivityOptions::default()
    };
    let a = run_sensitivity(&model, &opts, Execution::Sequential).unwrap();
    let b = run_sensitivity(&model, &opts, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}
