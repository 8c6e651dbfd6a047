use std::str::FromStr;

use treescramble::expdesign::{
    beta_grid, collective_decay_rates, cooperativity_table, interaction_to_decay,
    modulation_waveform, optimal_detuning_ratio, optimal_interaction_to_decay,
    optimal_required_cooperativity, required_cooperativity, size_grid, CavityParams,
    WaveformOptions,
};
use treescramble::lightcone::{
    distance_between, fit_bounds, graph_distance_correlation, model_thresholds, DistanceKind,
    LightconeOptions,
};
use treescramble::magnon::{dispersion, evolve_magnon, monna_wavenumber, time_grid, DEFAULT_DT};
use treescramble::output::{format_g, Cell, RunConfig};
use treescramble::quantum::levels::{goe_surmise_pdf, LevelOptions};
use treescramble::quantum::{
    level_statistics, otoc as otoc_curves, quench_entanglement, short_time_exponent, OtocMethod,
    OtocOptions, Parity, PartitionKind,
};
use treescramble::semiclassical::{
    decay_in_distance, fit_lyapunov, fit_scrambling, run_sensitivity, ScramblingOptions,
    ScramblingTarget, SensitivityOptions, DEFAULT_DT as CLASSICAL_DT, DEFAULT_PHI,
    DEFAULT_TRAJECTORIES,
};
use treescramble::{Boundary, CouplingModel, Execution};

use crate::settings::{CliError, CliResult, Settings, Sink};
use crate::{
    DistanceChoice, ExpdesignArgs, GraphArgs, LevelsArgs, LightconeArgs, MagnonArgs, ModelArgs,
    OtocArgs, QuenchArgs, SemiclassicalArgs,
};

fn model_from(st: &mut Settings, a: &ModelArgs, n: usize, s: f64) -> CliResult<CouplingModel> {
    let n = st.get("n", a.n, n)?;
    let s = st.get("s", a.s, s)?;
    let j0 = st.get("j0", a.j0, 1.0)?;
    let boundary = st.get("boundary", a.boundary.clone(), "periodic".to_string())?;
    let boundary = Boundary::from_str(&boundary)?;
    Ok(CouplingModel::new(n, s, j0, boundary)?)
}

fn opt_usize(v: Option<usize>) -> Cell {
    match v {
        Some(v) => Cell::from(v),
        None => Cell::from("na"),
    }
}

fn parity(p: Option<Parity>) -> &'static str {
    match p {
        Some(Parity::Even) => "even",
        Some(Parity::Odd) => "odd",
        None => "none",
    }
}

pub fn graph(a: GraphArgs, file: RunConfig, sink: &mut Sink) -> CliResult<()> {
    let mut st = Settings::new("graph", file);
    let model = model_from(&mut st, &a.model, 8, 0.0)?;
    st.note("distances", a.distances);
    let mut rows = Vec::new();
    for (i, j, hop) in model.bonds() {
        let sep = model.separation(i, j)?;
        rows.push(vec![
            i.into(),
            j.into(),
            sep.into(),
            (sep.trailing_zeros() as usize).into(),
            model.coupling(i, j)?.into(),
            hop.into(),
        ]);
    }
    println!("{} sites, {} bonds", model.n_sites(), rows.len());
    let prov = st.provenance().clone();
    sink.csv(
        "graph_edges.csv",
        &prov,
        &["i", "j", "separation", "level", "coupling", "hopping"],
        rows,
    )?;
    if a.distances {
        let n = model.n_sites();
        let mut rows = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let d = model.site_distance(i, j)?;
                rows.push(vec![
                    i.into(),
                    j.into(),
                    d.archimedean.into(),
                    d.two_adic.map_or(Cell::from("na"), Cell::from),
                    opt_usize(d.tree),
                    d.graph.into(),
                ]);
            }
        }
        sink.csv(
            "graph_distances.csv",
            &prov,
            &["i", "j", "archimedean", "two_adic", "tree", "graph"],
            rows,
        )?;
    }
    Ok(())
}

pub fn magnon(a: MagnonArgs, file: RunConfig, sink: &mut Sink, exec: Execution) -> CliResult<()> {
    let mut st = Settings::new("magnon", file);
    let model = model_from(&mut st, &a.model, 16, 0.0)?;
    let n = model.n_sites();
    let source = st.get("source", a.source, n / 2)?;
    let tmax = st.get("tmax", a.tmax, 20.0)?;
    let dt = st.get("dt", a.dt, DEFAULT_DT)?;
    let monna = st.get("monna", a.monna.then_some(true), false)?;
    let times = time_grid(tmax, dt)?;
    let mut occ = evolve_magnon(&model, source, &times, exec)?;
    if monna {
        occ = occ.monna_ordered()?;
    }
    let prov = st.provenance().clone();
    let names: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|j| format!("n_{j}")))
        .collect();
    let columns: Vec<&str> = names.iter().map(String::as_str).collect();
    let rows = (0..occ.times.len()).map(|k| {
        std::iter::once(Cell::from(occ.times[k]))
            .chain(occ.row(k).iter().map(|&v| Cell::from(v)))
            .collect()
    });
    sink.csv("magnon_occupation.csv", &prov, &columns, rows)?;
    let table = dispersion(&model)?;
    let rows = table
        .energies
        .iter()
        .enumerate()
        .map(|(m, &e)| {
            Ok(vec![
                m.into(),
                table.wavenumber(m).into(),
                e.into(),
                monna_wavenumber(n, m)?.into(),
            ])
        })
        .collect::<treescramble::Result<Vec<Vec<Cell>>>>()?;
    sink.csv(
        "magnon_dispersion.csv",
        &prov,
        &["m", "k", "energy", "monna_m"],
        rows,
    )?;
    Ok(())
}

pub fn lightcone(
    a: LightconeArgs,
    file: RunConfig,
    sink: &mut Sink,
    exec: Execution,
) -> CliResult<()> {
    let mut st = Settings::new("lightcone", file);
    let n = st.get("n", a.n, 128)?;
    let s_grid: Vec<f64> = st.get_list("s", a.s, "0")?;
    let opts = LightconeOptions {
        epsilon: st.get_opt("epsilon", a.epsilon)?,
        tmax: st.get("tmax", a.tmax, 50.0)?,
        dt: st.get("dt", a.dt, treescramble::magnon::DEFAULT_DT)?,
        source: st.get_opt("source", a.source)?,
        ..LightconeOptions::default()
    };
    let choice = st.get("distance", a.distance, DistanceChoice::Natural)?;
    let results = exec.map_slice(&s_grid, |&s| -> CliResult<_> {
        let model = CouplingModel::periodic(n, s)?;
        let th = model_thresholds(&model, &opts, Execution::Sequential)?;
        let kinds = match choice {
            DistanceChoice::Natural => vec![DistanceKind::natural_for(s)],
            DistanceChoice::Physical => vec![DistanceKind::Physical],
            DistanceChoice::Monna => vec![DistanceKind::Monna],
            DistanceChoice::Both => vec![DistanceKind::Physical, DistanceKind::Monna],
        };
        let fits = kinds
            .iter()
            .map(|&k| fit_bounds(&th, s, k))
            .collect::<treescramble::Result<Vec<_>>>()?;
        let (_, pearson) = graph_distance_correlation(&model, &th)?;
        Ok((model, th, fits, pearson))
    });
    let mut threshold_rows = Vec::new();
    let mut fit_rows = Vec::new();
    for (r, &s) in results.into_iter().zip(&s_grid) {
        let (model, th, fits, pearson) = r?;
        let src = th.source_site;
        let graph = model.graph_distances_from(src)?;
        for j in (0..n).filter(|&j| j != src) {
            threshold_rows.push(vec![
                s.into(),
                j.into(),
                distance_between(n, src, j, DistanceKind::Physical)?.into(),
                distance_between(n, src, j, DistanceKind::Monna)?.into(),
                graph[j].into(),
                th.time(j).unwrap_or(f64::NAN).into(),
            ]);
        }
        for f in fits {
            println!(
                "s={} {}: b={} b_u={} c_u={} feasible={} graph_pearson={}",
                format_g(s),
                f.distance_kind,
                format_g(f.lower.b),
                format_g(f.upper.b_u),
                format_g(f.upper.c_u),
                f.feasible(),
                format_g(pearson)
            );
            fit_rows.push(vec![
                s.into(),
                f.distance_kind.to_string().into(),
                f.lower.a.into(),
                f.lower.b.into(),
                f.upper.a_u.into(),
                f.upper.b_u.into(),
                f.upper.c_u.into(),
                usize::from(f.feasible()).into(),
                f.unreached.into(),
                pearson.into(),
            ]);
        }
    }
    let prov = st.provenance().clone();
    sink.csv(
        "lightcone_thresholds.csv",
        &prov,
        &["s", "site", "physical", "monna", "graph", "t_eps"],
        threshold_rows,
    )?;
    sink.csv(
        "lightcone_fits.csv",
        &prov,
        &[
            "s",
            "distance",
            "a",
            "b",
            "a_u",
            "b_u",
            "c_u",
            "feasible",
            "unreached",
            "graph_pearson",
        ],
        fit_rows,
    )?;
    Ok(())
}

fn default_sizes(n: usize) -> String {
    let mut sizes = Vec::new();
    let mut l = 1;
    while l <= n / 2 {
        sizes.push(l.to_string());
        l *= 2;
    }
    sizes.join(",")
}

pub fn quench(a: QuenchArgs, file: RunConfig, sink: &mut Sink, exec: Execution) -> CliResult<()> {
    let mut st = Settings::new("quench-ee", file);
    let model = model_from(&mut st, &a.model, 8, 0.0)?;
    let n = model.n_sites();
    let times: Vec<f64> = st.get_list("times", a.times, "0,0.5,1,1.5,2,3")?;
    let sizes: Vec<usize> = st.get_list("sizes", a.sizes, &default_sizes(n))?;
    let default_kinds = if n.is_power_of_two() {
        "archimedean,2adic,min_all"
    } else {
        "archimedean,min_all"
    };
    let kinds: Vec<PartitionKind> = st.get_list("kinds", a.kinds, default_kinds)?;
    let res = quench_entanglement(&model, &times, &sizes, &kinds, exec)?;
    let rows = res.records.iter().map(|r| {
        vec![
            r.time.into(),
            r.size.into(),
            r.kind.to_string().into(),
            r.entropy.into(),
            subset_label(r.subset, n).into(),
        ]
    });
    let prov = st.provenance().clone();
    sink.csv(
        "quench_entropy.csv",
        &prov,
        &["t", "L", "kind", "entropy", "subset"],
        rows,
    )?;
    let c = res.conservation;
    println!(
        "drift: norm={} energy={} magnetization={}",
        format_g(c.norm),
        format_g(c.energy),
        format_g(c.magnetization)
    );
    if !(c.norm <= 1e-10 && c.energy < 1e-9 && c.magnetization < 1e-9) {
        return Err(CliError::Runtime(format!("conservation violated: {c:?}")));
    }
    Ok(())
}

/// Sites of a bipartition half, `;`-separated.
fn subset_label(mask: u64, n: usize) -> String {
    (0..n)
        .filter(|&j| mask >> j & 1 == 1)
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn default_pairs(model: &CouplingModel) -> CliResult<Vec<(usize, usize)>> {
    let dist = model.graph_distances_from(0)?;
    let rmax = dist.iter().copied().max().unwrap_or(0);
    Ok((1..=rmax)
        .filter_map(|r| dist.iter().position(|&d| d == r).map(|j| (0, j)))
        .collect())
}

fn parse_pairs(text: &str) -> CliResult<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let (i, j) = t
                .trim()
                .split_once(':')
                .ok_or_else(|| CliError::Usage(format!("pair `{t}` is not of the form i:j")))?;
            let parse = |x: &str| {
                x.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad site index `{x}`")))
            };
            Ok((parse(i)?, parse(j)?))
        })
        .collect()
}

pub fn otoc(
    a: OtocArgs,
    seed: Option<u64>,
    file: RunConfig,
    sink: &mut Sink,
    exec: Execution,
) -> CliResult<()> {
    let mut st = Settings::new("otoc-ed", file);
    let model = model_from(&mut st, &a.model, 8, 0.0)?;
    let pairs_text = st.get_opt("pairs", a.pairs)?;
    let pairs = match pairs_text {
        Some(t) => parse_pairs(&t)?,
        None => default_pairs(&model)?,
    };
    let tmin = st.get("tmin", a.tmin, 0.01)?;
    let tmax = st.get("tmax", a.tmax, 1.0)?;
    let nt = st.get("nt", a.nt, 41)?;
    let grid = st.get("grid", a.grid, "log".to_string())?;
    let method = match st.get("method", a.method, "auto".to_string())?.as_str() {
        "auto" => OtocMethod::Auto,
        "exact" => OtocMethod::ExactTrace,
        "typicality" => OtocMethod::Typicality,
        other => return Err(CliError::Usage(format!("unknown OTOC method `{other}`"))),
    };
    let samples = st.get("samples", a.samples, 32)?;
    let seed = st.get("seed", seed, 0)?;
    let window = (
        st.get("fit_tmin", a.fit_tmin, 0.01)?,
        st.get("fit_tmax", a.fit_tmax, 0.1)?,
    );
    if nt < 2 || !(tmax > tmin) || tmin < 0.0 {
        return Err(CliError::Usage("need nt >= 2 and 0 <= tmin < tmax".into()));
    }
    let times: Vec<f64> = match grid.as_str() {
        "log" => {
            if !(tmin > 0.0) {
                return Err(CliError::Usage("log grid needs tmin > 0".into()));
            }
            (0..nt)
                .map(|k| tmin * (tmax / tmin).powf(k as f64 / (nt - 1) as f64))
                .collect()
        }
        "linear" => (0..nt)
            .map(|k| tmin + (tmax - tmin) * k as f64 / (nt - 1) as f64)
            .collect(),
        other => return Err(CliError::Usage(format!("unknown grid `{other}`"))),
    };
    let opts = OtocOptions {
        method,
        samples,
        seed,
        ..OtocOptions::default()
    };
    let curves = otoc_curves(&model, &pairs, &times, &opts, exec)?;
    let mut rows = Vec::new();
    let mut fit_rows = Vec::new();
    for c in &curves {
        for k in 0..c.times.len() {
            rows.push(vec![
                c.times[k].into(),
                c.i.into(),
                c.j.into(),
                c.graph_distance.into(),
                c.values[k].into(),
                c.stderr[k].into(),
            ]);
        }
        let (p, e, m) = match short_time_exponent(&c.times, &c.values, window) {
            Ok(f) => (f.exponent, f.stderr, f.points),
            Err(_) => (f64::NAN, f64::NAN, 0),
        };
        println!(
            "({}, {}) r={} exponent={}",
            c.i,
            c.j,
            c.graph_distance,
            format_g(p)
        );
        fit_rows.push(vec![
            c.i.into(),
            c.j.into(),
            c.graph_distance.into(),
            p.into(),
            e.into(),
            m.into(),
        ]);
    }
    let prov = st.provenance().clone();
    sink.csv(
        "otoc.csv",
        &prov,
        &["t", "i", "j", "r", "C", "stderr"],
        rows,
    )?;
    sink.csv(
        "otoc_exponents.csv",
        &prov,
        &["i", "j", "r", "exponent", "stderr", "points"],
        fit_rows,
    )?;
    Ok(())
}

pub fn levels(a: LevelsArgs, file: RunConfig, sink: &mut Sink, exec: Execution) -> CliResult<()> {
    let mut st = Settings::new("levels", file);
    let n = st.get("n", a.n, 16)?;
    let s = st.get("s", a.s, 0.0)?;
    let magnons = st.get("magnons", a.magnons, n / 2)?;
    let opts = LevelOptions {
        resolve_reflection: st.get("reflection", a.no_reflection.then_some(false), true)?,
        resolve_flip: st.get("flip", a.no_flip.then_some(false), true)?,
        ..LevelOptions::default()
    };
    let model = CouplingModel::periodic(n, s)?;
    let data = level_statistics(&model, magnons, &opts, exec)?;
    let prov = st.provenance().clone();
    let rows = data.histogram.iter().map(|b| {
        vec![
            b.center.into(),
            b.count.into(),
            b.density.into(),
            goe_surmise_pdf(b.center).into(),
            (-b.center).exp().into(),
        ]
    });
    sink.csv(
        "levels_histogram.csv",
        &prov,
        &["spacing", "count", "density", "goe", "poisson"],
        rows,
    )?;
    let rows = data
        .spacings
        .iter()
        .enumerate()
        .map(|(k, &x)| vec![k.into(), x.into()]);
    sink.csv("levels_spacings.csv", &prov, &["index", "spacing"], rows)?;
    let rows = data.sectors.iter().map(|sec| {
        vec![
            sec.sector.momentum.into(),
            parity(sec.sector.reflection).into(),
            parity(sec.sector.flip).into(),
            sec.eigenvalues.len().into(),
            sec.mean.into(),
            sec.width.into(),
        ]
    });
    sink.csv(
        "levels_sectors.csv",
        &prov,
        &["momentum", "reflection", "flip", "dim", "mean", "width"],
        rows,
    )?;
    let entries = vec![
        ("spacings".to_string(), data.spacings.len().to_string()),
        (
            "raw_mean_spacing".to_string(),
            format_g(data.raw_mean_spacing),
        ),
        ("ks_goe".to_string(), format_g(data.ks_goe)),
        ("ks_poisson".to_string(), format_g(data.ks_poisson)),
        ("ratio".to_string(), format_g(data.ks_poisson / data.ks_goe)),
    ];
    println!(
        "KS distance: GOE {} Poisson {}",
        format_g(data.ks_goe),
        format_g(data.ks_poisson)
    );
    sink.summary("levels_summary.txt", &prov, &entries)?;
    Ok(())
}

fn quoted(text: &str) -> String {
    format!("\"{}\"", text.replace('"', "'"))
}

fn target_from(text: &str) -> CliResult<ScramblingTarget> {
    match text {
        "site_average" => Ok(ScramblingTarget::SiteAverage),
        "farthest" => Ok(ScramblingTarget::FarthestShell),
        other => Err(CliError::Usage(format!(
            "unknown scrambling target `{other}`"
        ))),
    }
}

pub fn semiclassical(
    a: SemiclassicalArgs,
    seed: Option<u64>,
    file: RunConfig,
    sink: &mut Sink,
    exec: Execution,
) -> CliResult<()> {
    let mut st = Settings::new("semiclassical", file);
    let sizes: Vec<usize> = st.get_list("n", a.n, "64")?;
    let s = st.get("s", a.s, 0.0)?;
    let opts = SensitivityOptions {
        trajectories: st.get("traj", a.traj, DEFAULT_TRAJECTORIES)?,
        phi: st.get("phi", a.phi, DEFAULT_PHI)?,
        tmax: st.get("tmax", a.tmax, 5.0)?,
        dt: st.get("dt", a.dt, CLASSICAL_DT)?,
        record_every: st.get("record", a.record, 0.05)?,
        seed: st.get("seed", seed, 0)?,
        antithetic: true,
    };
    let fit_opts = ScramblingOptions {
        target: target_from(&st.get("target", a.target, "site_average".to_string())?)?,
        bootstrap: st.get("bootstrap", a.bootstrap, 200)?,
        seed: opts.seed,
        ..ScramblingOptions::default()
    };
    let mut curves = Vec::new();
    for &n in &sizes {
        let model = CouplingModel::periodic(n, s)?;
        curves.push(run_sensitivity(&model, &opts, exec)?);
    }
    let prov = st.provenance().clone();
    let mut rows = Vec::new();
    let mut avg_rows = Vec::new();
    for c in &curves {
        for (k, &t) in c.times.iter().enumerate() {
            for r in 0..=c.max_distance() {
                rows.push(vec![
                    c.n_sites.into(),
                    t.into(),
                    r.into(),
                    c.mean[r][k].into(),
                    c.stderr[r][k].into(),
                ]);
            }
            avg_rows.push(vec![
                c.n_sites.into(),
                t.into(),
                c.site_average[k].into(),
                c.site_average_stderr[k].into(),
            ]);
        }
    }
    sink.csv(
        "semiclassical_sensitivity.csv",
        &prov,
        &["N", "t", "r", "C_cl", "stderr"],
        rows,
    )?;
    sink.csv(
        "semiclassical_average.csv",
        &prov,
        &["N", "t", "C_cl", "stderr"],
        avg_rows,
    )?;

    let mut entries = Vec::new();
    let mut fit_rows = Vec::new();
    let per_size: Vec<_> = match fit_scrambling(&curves, &fit_opts) {
        Ok(fit) => {
            entries.push(("alpha".into(), format_g(fit.alpha)));
            entries.push(("alpha_err".into(), format_g(fit.alpha_err)));
            entries.push(("beta".into(), format_g(fit.beta)));
            entries.push(("beta_err".into(), format_g(fit.beta_err)));
            for (n, why) in &fit.excluded {
                entries.push((format!("excluded_{n}"), quoted(why)));
            }
            fit.per_size
        }
        Err(e) => {
            entries.push(("global_fit".into(), quoted(&e.to_string())));
            curves
                .iter()
                .filter_map(|c| match fit_lyapunov(c, &fit_opts) {
                    Ok(f) => Some(f),
                    Err(e) => {
                        entries.push((format!("excluded_{}", c.n_sites), quoted(&e.to_string())));
                        None
                    }
                })
                .collect()
        }
    };
    for f in &per_size {
        println!(
            "N={} lambda={} t*={} lambda*t*={}",
            f.n_sites,
            format_g(f.lambda),
            format_g(f.t_star),
            format_g(f.lambda_t_star())
        );
        fit_rows.push(vec![
            f.n_sites.into(),
            f.lambda.into(),
            f.lambda_err.into(),
            f.t_star.into(),
            f.lambda_t_star().into(),
            f.lambda_t_star_err.into(),
            f.window.0.into(),
            f.window.1.into(),
            f.points.into(),
            f.r_squared.into(),
        ]);
    }
    sink.csv(
        "semiclassical_fit.csv",
        &prov,
        &[
            "N",
            "lambda",
            "lambda_err",
            "t_star",
            "lambda_t_star",
            "lambda_t_star_err",
            "window_start",
            "window_end",
            "points",
            "r_squared",
        ],
        fit_rows,
    )?;
    for c in &curves {
        if let Ok(d) = decay_in_distance(c, 1.0) {
            entries.push((format!("decay_slope_t1_N{}", c.n_sites), format_g(d.slope)));
            entries.push((format!("decay_r2_t1_N{}", c.n_sites), format_g(d.r_squared)));
        }
        let cons = c.conservation;
        entries.push((format!("norm_drift_N{}", c.n_sites), format_g(cons.norm)));
        entries.push((
            format!("energy_drift_N{}", c.n_sites),
            format_g(cons.energy),
        ));
        entries.push((
            format!("mz_drift_N{}", c.n_sites),
            format_g(cons.magnetization),
        ));
    }
    if let Some((k, v)) = entries.iter().find(|(k, _)| k == "alpha") {
        println!("{k} = {v}");
    }
    sink.summary("semiclassical_summary.txt", &prov, &entries)?;
    if let Some(c) = curves.iter().find(|c| !c.conservation.passes()) {
        return Err(CliError::Runtime(format!(
            "conservation violated at N={}: {:?}",
            c.n_sites, c.conservation
        )));
    }
    Ok(())
}

pub fn expdesign(a: ExpdesignArgs, file: RunConfig, sink: &mut Sink) -> CliResult<()> {
    let mut st = Settings::new("expdesign", file);
    let n = st.get("n", a.n, 1024)?;
    let eta = st.get("eta", a.eta, 1.0)?;
    let atoms = st.get("atoms", a.atoms, 300.0)?;
    let beta = st.get_opt("beta", a.beta)?;
    let samples = st.get("samples", a.samples, WaveformOptions::default().n_samples)?;
    let margin = st.get("margin", a.margin, WaveformOptions::default().margin)?;
    let s = st.get("s", a.s, 0.0)?;
    let mut p = CavityParams::at_optimum(n, eta, atoms)?;
    if let Some(b) = beta {
        p.beta = b;
        p.validate()?;
        p.delta = p.kappa * optimal_detuning_ratio(&p)?;
    }
    for w in p.warnings() {
        eprintln!("warning: {w}");
    }
    let rho = interaction_to_decay(&p)?;
    let prov = st.provenance().clone();

    let table = cooperativity_table(&beta_grid(0.05, 0.5, 46), &size_grid(4, 10))?;
    let rows = table
        .iter()
        .map(|r| vec![r.beta.into(), r.n_sites.into(), r.required_n_eta.into()]);
    sink.csv(
        "expdesign_cooperativity.csv",
        &prov,
        &["beta", "N", "required_n_eta"],
        rows,
    )?;

    let model = CouplingModel::periodic(n, s)?;
    let wave = modulation_waveform(
        &model,
        &WaveformOptions {
            n_samples: samples,
            beta: p.beta,
            margin,
        },
    )?;
    let rows = (0..wave.exact.len()).map(|k| {
        vec![
            (wave.exact.phase[k] / std::f64::consts::TAU).into(),
            wave.exact.amplitude[k].into(),
            wave.naive.amplitude[k].into(),
        ]
    });
    sink.csv(
        "expdesign_waveform.csv",
        &prov,
        &["t", "amplitude", "naive_amplitude"],
        rows,
    )?;

    let rates = collective_decay_rates(&model, p.kappa / p.delta)?;
    let rows = rates.iter().map(|r| vec![r.k.into(), r.gamma.into()]);
    sink.csv("expdesign_decay.csv", &prov, &["k", "gamma"], rows)?;

    let entries = vec![
        ("rho".to_string(), format_g(rho)),
        ("beta".to_string(), format_g(p.beta)),
        ("delta_over_kappa".to_string(), format_g(p.delta / p.kappa)),
        ("n_eta".to_string(), format_g(p.collective_cooperativity())),
        (
            "required_n_eta".to_string(),
            format_g(required_cooperativity(n, p.beta)?),
        ),
        (
            "required_n_eta_optimal_beta".to_string(),
            format_g(optimal_required_cooperativity(n)?),
        ),
        (
            "rho_optimal_beta".to_string(),
            format_g(optimal_interaction_to_decay(
                n,
                p.collective_cooperativity(),
            )?),
        ),
        ("waveform_offset".to_string(), format_g(wave.offset)),
        (
            "off_pattern_exact".to_string(),
            format_g(wave.exact.off_pattern_weight()),
        ),
        (
            "off_pattern_naive".to_string(),
            format_g(wave.naive.off_pattern_weight()),
        ),
        ("warnings".to_string(), p.warnings().len().to_string()),
    ];
    println!("rho = {} at beta = {}", format_g(rho), format_g(p.beta));
    sink.summary("expdesign_summary.txt", &prov, &entries)?;
    Ok(())
}
