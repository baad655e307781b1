use serde_json::{json, Value};

use super::commands::{
    case_report_json, cd_curve_rows, cd_estimates, finish, generator_curves, write_curves, CD_CURVE_COLUMNS,
    CD_SUMMARY_COLUMNS,
};
use super::config::{estimator_config, load_dataset, ReproduceConfig};
use super::output::{num, OutputDir};
use super::{usage, CliError, RunContext};
use crate::cine::{self, ChernoffEstimate, EstimationConfig};
use crate::classify::SweepConfig;
use crate::data::QuadSpec;
use crate::density::Density;
use crate::error::TriadError;
use crate::gaussian::{chernoff_full_gaussian, FullGaussian, DEFAULT_SKEW_TOL};
use crate::presets;
use crate::rng::{derive_seed, SeededRng};

pub const FIGURES: &[&str] = &["fig1", "fig2", "fig3"];

/// Closed-form CD grid range and fairness-curve noise levels per case.
const FIG1_CASES: [(&str, f64, &[f64]); 3] = [
    ("case1", 3.0, &[0.0, 0.5, 1.1]),
    ("case2", 10.0, &[0.0, 0.5, 1.0, 2.0]),
    ("case3", 5.0, &[0.0, 0.5, 1.0, 2.0, 4.0]),
];

const FIG1_GRID_POINTS: usize = 200;

const FIG3_ETA2: &[f64] = &[0.0, 0.25, 0.5, 1.0, 2.0];

pub(crate) fn reproduce(ctx: &RunContext, cfg: ReproduceConfig) -> Result<(), CliError> {
    match cfg.figure.as_str() {
        "fig1" => fig1(ctx, &cfg),
        "fig2" => fig2(ctx, &cfg),
        "fig3" => fig3(ctx, &cfg),
        other => Err(usage(format!("unknown figure `{other}` (known: {})", FIGURES.join(", ")))),
    }
}

fn sweep_config(ctx: &RunContext) -> SweepConfig {
    SweepConfig { seed: ctx.seed, ..SweepConfig::default() }
}

/// Three closed-form CD curves and three GNB curve families.
fn fig1(ctx: &RunContext, cfg: &ReproduceConfig) -> Result<(), CliError> {
    let n = cfg.n_per_cell.unwrap_or(20_000);
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    let sweep = sweep_config(ctx);
    let mut panels = serde_json::Map::new();
    for (case, stop, eta2s) in FIG1_CASES {
        let spec = presets::quad(&format!("gaussian-{case}"))?;
        let QuadSpec::Iso(quad) = &spec else { unreachable!("gaussian presets are isotropic") };
        let grid: Vec<f64> = (0..FIG1_GRID_POINTS).map(|i| stop * i as f64 / (FIG1_GRID_POINTS - 1) as f64).collect();
        out.csv(&format!("cd_curve_{case}.csv"), CD_CURVE_COLUMNS, &cd_curve_rows(quad, &grid)?)?;
        let curves = generator_curves(&spec, n, eta2s, &sweep)?;
        let slopes = write_curves(&mut out, &format!("curves_{case}.csv"), None, &curves)?;
        let slope_map: Vec<Value> = eta2s.iter().zip(&slopes).map(|(e, s)| json!({"eta2": e, "slope": s})).collect();
        panels.insert(
            case.to_string(),
            json!({
                "case_report": case_report_json(ctx, quad)?,
                "slopes": slope_map,
                "swept_group": curves[0].swept_group,
                "gap": curves[0].gap.name(),
            }),
        );
    }
    let extra = json!({ "figure": "fig1", "n_per_cell": n, "panels": panels });
    finish(ctx, out, &[ctx.seed], extra)
}

/// CINE against closed forms: a variance sweep in 2-D, a noise sweep in 5-D
/// and a dimension sweep.
fn fig2(ctx: &RunContext, cfg: &ReproduceConfig) -> Result<(), CliError> {
    let n = cfg.n_per_cell.unwrap_or(10_000);
    let est = estimator_config(ctx.profile, cfg.estimator.as_ref())?;
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    let columns = ["x", "closed_form", "closed_u", "estimate", "std", "optimal_u", "rel_error"];

    let mut run = |name: &str, xname: &str, pairs: Vec<(f64, FullGaussian, FullGaussian)>| -> Result<(), CliError> {
        let mut rows = Vec::new();
        for (i, (x, d0, d1)) in pairs.iter().enumerate() {
            let seed = derive_seed(ctx.seed, i as u64);
            let (e, c) = pair_estimate(ctx, &est, d0, d1, n, seed)?;
            rows.push(vec![
                num(*x),
                num(c.value),
                num(c.optimal_u),
                num(e.value),
                num(e.std),
                num(e.optimal_u),
                num((e.value - c.value) / c.value),
            ]);
            log::info!("{name}: {xname} = {x}: estimate {:.4} vs {:.4}", e.value, c.value);
        }
        let mut cols = columns;
        cols[0] = xname;
        out.csv(name, &cols, &rows)?;
        Ok(())
    };

    let iso = |d: usize, m: f64, v: f64| FullGaussian::isotropic(vec![m; d], v);
    let sigma: Vec<_> = [0.25, 0.5, 1.0, 2.0, 4.0]
        .into_iter()
        .map(|s2| Ok((s2, iso(2, 0.0, s2)?, iso(2, 1.0, s2)?)))
        .collect::<Result<_, TriadError>>()?;
    run("fig2a_sigma.csv", "sigma2", sigma)?;
    let noise: Vec<_> = [0.0, 0.5, 1.0, 2.0, 4.0]
        .into_iter()
        .map(|e2| Ok((e2, iso(5, 0.0, 0.5 + e2)?, iso(5, 1.0, 1.0 + e2)?)))
        .collect::<Result<_, TriadError>>()?;
    run("fig2b_noise.csv", "eta2", noise)?;
    let dims: Vec<_> = [5usize, 10, 20, 30, 40]
        .into_iter()
        .map(|d| Ok((d as f64, iso(d, 0.0, 0.5)?, iso(d, 1.0, 1.0)?)))
        .collect::<Result<_, TriadError>>()?;
    run("fig2c_dim.csv", "dim", dims)?;

    let extra = json!({ "figure": "fig2", "n_per_class": n, "estimator": est });
    finish(ctx, out, &[ctx.seed], extra)
}

/// Samples `n` rows from each Gaussian and estimates `C(d0, d1)` next to its
/// closed form.
fn pair_estimate(
    ctx: &RunContext,
    est: &EstimationConfig,
    d0: &FullGaussian,
    d1: &FullGaussian,
    n: usize,
    seed: u64,
) -> Result<(ChernoffEstimate, crate::gaussian::ChernoffValue), TriadError> {
    let x0 = d0.sample(n, &mut SeededRng::with_stream(seed, 0));
    let closed = chernoff_full_gaussian(d0, d1, DEFAULT_SKEW_TOL)?;
    let e = if ctx.oracle {
        cine::estimate_group_oracle(&x0, d0, d1, est.tol)?
    } else {
        let x1 = d1.sample(n, &mut SeededRng::with_stream(seed, 1));
        cine::estimate_group(&x0, &x1, est, derive_seed(seed, 2))?
    };
    Ok((e, closed))
}

/// Mixture CD estimates and curves, plus any real-data panels named in the
/// config's `datasets`.
fn fig3(ctx: &RunContext, cfg: &ReproduceConfig) -> Result<(), CliError> {
    let n = cfg.n_per_cell.unwrap_or(10_000);
    let est = estimator_config(ctx.profile, cfg.estimator.as_ref())?;
    let sweep = sweep_config(ctx);
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    let mut panels = serde_json::Map::new();
    let mut seeds = vec![ctx.seed];

    for name in ["mixture1", "mixture2"] {
        let spec = presets::quad(name)?;
        let samples = crate::data::sample_quad(&spec, n, ctx.seed)?;
        let run = cd_estimates(ctx, &samples, Some(&spec), FIG3_ETA2, &est)?;
        seeds.extend(run.seeds.iter().skip(1));
        out.csv(&format!("cd_{name}.csv"), CD_SUMMARY_COLUMNS, &run.summary)?;
        out.jsonl(&format!("estimates_{name}.jsonl"), &run.records)?;
        let curves = generator_curves(&spec, n, FIG3_ETA2, &sweep)?;
        let slopes = write_curves(&mut out, &format!("curves_{name}.csv"), None, &curves)?;
        panels.insert(name.into(), json!({ "slopes": slopes, "swept_group": curves[0].swept_group }));
    }

    for d in &cfg.datasets {
        let name = d
            .preset
            .clone()
            .or_else(|| d.path.file_stem().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| "dataset".into());
        let all = load_dataset(d, ctx, None)?;
        if ctx.oracle {
            log::warn!("{name}: no exact densities for a dataset; skipping its CD panel");
        } else {
            let run = cd_estimates(ctx, &all.train, None, FIG3_ETA2, &est)?;
            out.csv(&format!("cd_{name}.csv"), CD_SUMMARY_COLUMNS, &run.summary)?;
            out.jsonl(&format!("estimates_{name}.jsonl"), &run.records)?;
        }
        let split = load_dataset(d, ctx, Some(sweep.test_fraction))?;
        let sw = SweepConfig { swept_group: sweep.swept_group.or(split.swept_group), ..sweep.clone() };
        let curves = crate::classify::sweep_curves(&split.train, split.test.as_ref(), FIG3_ETA2, &sw)?;
        let slopes = write_curves(&mut out, &format!("curves_{name}.csv"), None, &curves)?;
        panels.insert(name, json!({ "slopes": slopes, "rows": all.report }));
    }
    seeds.dedup();

    let extra = json!({ "figure": "fig3", "n_per_cell": n, "eta2": FIG3_ETA2, "estimator": est, "panels": panels });
    finish(ctx, out, &seeds, extra)
}
