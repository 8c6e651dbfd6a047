//! Desk-scale presets. Each recipe fills a config and runs the ordinary
//! subcommands with a file-name prefix, so its outputs carry the same
//! provenance headers as a hand-written run.

use treescramble::output::RunConfig;
use treescramble::Execution;

use crate::commands;
use crate::settings::{CliResult, Sink};
use crate::{
    ExpdesignArgs, Figure, LevelsArgs, LightconeArgs, QuenchArgs, ReproduceArgs, SemiclassicalArgs,
};

const S_GRID: &str = "-2,-1,-0.5,0,0.5,1,2";

fn preset(pairs: &[(&str, String)]) -> RunConfig {
    let mut cfg = RunConfig::new();
    for (k, v) in pairs {
        cfg.set(*k, v);
    }
    cfg
}

pub fn reproduce(
    a: ReproduceArgs,
    seed: Option<u64>,
    sink: &mut Sink,
    exec: Execution,
) -> CliResult<()> {
    match a.figure {
        Figure::Fig2 => {
            // threshold times and both distance fits over the exponent grid
            let n = a.n.unwrap_or_else(|| "128".into());
            sink.prefix = "fig2_".into();
            let cfg = preset(&[("n", n), ("s", S_GRID.into()), ("distance", "both".into())]);
            commands::lightcone(LightconeArgs::default(), cfg, sink, exec)?;
            // graph-distance correlation on a large hypercube-like model
            sink.prefix = "fig2_graph_".into();
            let cfg = preset(&[
                ("n", "1024".into()),
                ("s", "0".into()),
                ("distance", "physical".into()),
            ]);
            commands::lightcone(LightconeArgs::default(), cfg, sink, exec)?;
        }
        Figure::Fig3 => {
            let n = a.n.unwrap_or_else(|| "16".into());
            for s in ["-2", "-1", "-0.5", "0", "0.5", "1", "2"] {
                sink.prefix = format!("fig3_s{s}_");
                let cfg = preset(&[("n", n.clone()), ("s", s.into()), ("times", "2".into())]);
                commands::quench(QuenchArgs::default(), cfg, sink, exec)?;
            }
        }
        Figure::Fig4 => {
            sink.prefix = "fig4_".into();
            let cfg = preset(&[
                ("n", a.n.unwrap_or_else(|| "64,128,256,512,1024".into())),
                ("traj", a.traj.unwrap_or(256).to_string()),
                ("tmax", "5".into()),
            ]);
            commands::semiclassical(SemiclassicalArgs::default(), seed, cfg, sink, exec)?;
        }
        Figure::FigS2 => {
            sink.prefix = "figS2_".into();
            let cfg = preset(&[
                ("n", a.n.unwrap_or_else(|| "1024".into())),
                ("atoms", "300".into()),
            ]);
            commands::expdesign(ExpdesignArgs::default(), cfg, sink)?;
        }
        Figure::FigS3 => {
            sink.prefix = "figS3_".into();
            let cfg = preset(&[("n", a.n.unwrap_or_else(|| "16".into())), ("s", "0".into())]);
            commands::levels(LevelsArgs::default(), cfg, sink, exec)?;
        }
    }
    Ok(())
}
