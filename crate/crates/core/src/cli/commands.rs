use rayon::prelude::*;
use serde_json::json;

use super::config::{
    eta2_or_zero, estimator_config, load_source, AnalyticConfig, CurveConfig, EstimateConfig, PrivacyConfig,
};
use super::output::{num, opt, OutputDir};
use super::{usage, CliError, RunContext};
use crate::cine::{self, EstimateRecord, EstimationConfig};
use crate::classify::{curve_slope, sweep_curves, ClassifierKind, FairnessCurve, SweepConfig};
use crate::data::{Group, QuadSamples, QuadSpec};
use crate::error::TriadError;
use crate::gaussian::{chernoff_iso_pair, classify_case, noisy_cd_signed, IsoGaussianQuad};
use crate::privacy;
use crate::rng::derive_seed;

pub(crate) const CD_CURVE_COLUMNS: &[&str] = &["eta2", "cd", "signed_cd", "ci_p", "ci_q"];

pub(crate) const CD_SUMMARY_COLUMNS: &[&str] = &[
    "eta2", "ci_p", "std_p", "u_p", "ci_q", "std_q", "u_q", "cd", "cd_std", "closed_ci_p", "closed_ci_q", "closed_cd",
];

pub(crate) const CURVE_COLUMNS: &[&str] = &[
    "eta2", "sweep_param", "accuracy", "eo_gap", "fpr_gap", "fnr_gap", "tpr_p", "tpr_q", "fpr_p", "fpr_q", "fnr_p", "fnr_q",
];

pub(crate) const SLOPE_COLUMNS: &[&str] = &["eta2", "slope", "gap", "swept_group", "classifier", "points"];

pub(crate) fn analytic(ctx: &RunContext, cfg: AnalyticConfig) -> Result<(), CliError> {
    let quad = cfg.quad.resolve_iso()?;
    let grid = cfg.grid()?;
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    out.csv("cd_curve.csv", CD_CURVE_COLUMNS, &cd_curve_rows(&quad, &grid)?)?;
    out.json("case_report.json", &case_report_json(ctx, &quad)?)?;
    finish(ctx, out, &[ctx.seed], json!({}))
}

pub(crate) fn cd_curve_rows(quad: &IsoGaussianQuad, grid: &[f64]) -> Result<Vec<Vec<String>>, TriadError> {
    grid.iter()
        .map(|&e| {
            let signed = noisy_cd_signed(quad, e)?;
            let (ci_p, ci_q) = closed_group_ci(quad, e)?;
            Ok(vec![num(e), num(signed.abs()), num(signed), num(ci_p), num(ci_q)])
        })
        .collect()
}

pub(crate) fn case_report_json(ctx: &RunContext, quad: &IsoGaussianQuad) -> Result<serde_json::Value, TriadError> {
    let r = classify_case(quad);
    Ok(json!({
        "label": r.label,
        "eta_max": r.eta_max,
        "eta_reflection": r.eta_reflection,
        "p": r.p,
        "q": r.q,
        "swapped": r.swapped,
        "cd_at_zero": noisy_cd_signed(quad, 0.0)?.abs(),
        "config_hash": ctx.config_hash,
        "version": crate::VERSION,
    }))
}

fn closed_group_ci(quad: &IsoGaussianQuad, eta2: f64) -> Result<(f64, f64), TriadError> {
    let n = quad.with_noise(eta2)?;
    Ok((chernoff_iso_pair(&n.p0, &n.p1)?.value, chernoff_iso_pair(&n.q0, &n.q1)?.value))
}

pub(crate) fn estimate(ctx: &RunContext, cfg: EstimateConfig) -> Result<(), CliError> {
    let eta2s = eta2_or_zero(&cfg.eta2)?;
    let est = estimator_config(ctx.profile, cfg.estimator.as_ref())?;
    let loaded = load_source(&cfg.source, ctx, None)?;
    if ctx.oracle && loaded.spec.is_none() {
        return Err(usage("--oracle-ratios needs a generator source with known densities"));
    }
    let run = cd_estimates(ctx, &loaded.train, loaded.spec.as_ref(), &eta2s, &est)?;
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &run.seeds)?;
    out.jsonl("estimates.jsonl", &run.records)?;
    out.csv("cd_summary.csv", CD_SUMMARY_COLUMNS, &run.summary)?;
    let failed = run.records.iter().filter(|r| r.error.is_some()).count();
    let extra = json!({ "estimator": est, "failed_records": failed, "dataset": loaded.report });
    finish(ctx, out, &run.seeds, extra)?;
    if failed == run.records.len() {
        return Err(TriadError::Diverged("every estimate failed; see estimates.jsonl".into()).into());
    }
    Ok(())
}

pub(crate) struct CdRun {
    pub records: Vec<EstimateRecord>,
    pub summary: Vec<Vec<String>>,
    pub seeds: Vec<u64>,
}

/// Per-group estimates at each noise level. A group whose training fails is
/// recorded with its error and the run moves on.
pub(crate) fn cd_estimates(
    ctx: &RunContext,
    samples: &QuadSamples,
    spec: Option<&QuadSpec>,
    eta2s: &[f64],
    est: &EstimationConfig,
) -> Result<CdRun, CliError> {
    samples.check_nonempty()?;
    let seed = ctx.seed;
    let per_eta = eta2s
        .par_iter()
        .map(|&eta2| -> Result<[Result<cine::ChernoffEstimate, TriadError>; 2], TriadError> {
            if ctx.oracle {
                let spec = spec.expect("oracle mode checked by caller");
                let cd = cine::estimate_cd_oracle(samples, spec, eta2, est.tol, seed)?;
                return Ok([Ok(cd.p), Ok(cd.q)]);
            }
            let noisy = samples.with_noise(eta2, derive_seed(seed, cine::NOISE_STREAM))?;
            let run = |g: Group| {
                let (x0, x1) = noisy.group(g);
                cine::estimate_group(x0, x1, est, cine::group_seed(seed, g))
            };
            let (p, q) = rayon::join(|| run(Group::P), || run(Group::Q));
            Ok([p, q])
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut records = Vec::new();
    let mut summary = Vec::new();
    let mut seeds = vec![seed];
    for g in [Group::P, Group::Q] {
        if !ctx.oracle {
            seeds.push(cine::group_seed(seed, g));
        }
    }
    for (&eta2, [p, q]) in eta2s.iter().zip(&per_eta) {
        let mut row = vec![num(eta2)];
        for (g, r) in [(Group::P, p), (Group::Q, q)] {
            let gseed = if ctx.oracle { seed } else { cine::group_seed(seed, g) };
            match r {
                Ok(e) => {
                    records.push(EstimateRecord::from_estimate(g.name(), eta2, e, gseed, &ctx.config_hash));
                    row.extend([num(e.value), num(e.std), num(e.optimal_u)]);
                }
                Err(err) => {
                    log::warn!("group {g} at eta2 = {eta2}: {err}");
                    let n = samples.group(g).0.rows();
                    records.push(EstimateRecord::failed(g.name(), eta2, n, gseed, &ctx.config_hash, err));
                    row.extend([String::new(), String::new(), String::new()]);
                }
            }
        }
        match (p, q) {
            (Ok(p), Ok(q)) => row.extend([num((p.value - q.value).abs()), num(p.std.hypot(q.std))]),
            _ => row.extend([String::new(), String::new()]),
        }
        match spec {
            Some(QuadSpec::Iso(quad)) => {
                let (a, b) = closed_group_ci(quad, eta2)?;
                row.extend([num(a), num(b), num((a - b).abs())]);
            }
            _ => row.extend([opt(None), opt(None), opt(None)]),
        }
        summary.push(row);
    }
    Ok(CdRun { records, summary, seeds })
}

pub(crate) fn curve(ctx: &RunContext, cfg: CurveConfig) -> Result<(), CliError> {
    let eta2s = eta2_or_zero(&cfg.eta2)?;
    let loaded = load_source(&cfg.source, ctx, Some(cfg.sweep.test_fraction))?;
    let mut sweep = cfg.sweep.clone();
    sweep.seed = ctx.seed;
    if sweep.swept_group.is_none() {
        sweep.swept_group = loaded.swept_group;
    }
    let curves = sweep_curves(&loaded.train, loaded.test.as_ref(), &eta2s, &sweep)?;
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    let slopes = write_curves(&mut out, "curves.csv", Some("slopes.csv"), &curves)?;
    let extra = json!({ "sweep": sweep, "slopes": slopes, "dataset": loaded.report });
    finish(ctx, out, &[ctx.seed], extra)
}

/// Writes the Pareto points and, if named, a per-curve slope table; returns
/// the slopes.
pub(crate) fn write_curves(
    out: &mut OutputDir,
    curves_name: &str,
    slopes_name: Option<&str>,
    curves: &[FairnessCurve],
) -> Result<Vec<Option<f64>>, CliError> {
    let mut rows = Vec::new();
    let mut slope_rows = Vec::new();
    let mut slopes = Vec::new();
    for c in curves {
        if c.points.is_empty() {
            return Err(TriadError::Empty(format!("Pareto set at eta2 = {}", c.eta2)).into());
        }
        for p in &c.points {
            rows.push(vec![
                num(c.eta2),
                num(p.sweep_param),
                num(p.accuracy),
                num(p.eo_gap),
                num(p.fpr_gap),
                num(p.fnr_gap),
                num(p.tpr_p),
                num(p.tpr_q),
                num(p.fpr_p),
                num(p.fpr_q),
                num(p.fnr_p),
                num(p.fnr_q),
            ]);
        }
        let s = curve_slope(&c.points, c.gap);
        slopes.push(s);
        slope_rows.push(vec![
            num(c.eta2),
            opt(s),
            c.gap.name().to_string(),
            c.swept_group.name().to_string(),
            classifier_name(c.classifier).to_string(),
            c.points.len().to_string(),
        ]);
    }
    out.csv(curves_name, CURVE_COLUMNS, &rows)?;
    if let Some(name) = slopes_name {
        out.csv(name, SLOPE_COLUMNS, &slope_rows)?;
    }
    Ok(slopes)
}

pub(crate) fn classifier_name(k: ClassifierKind) -> &'static str {
    match k {
        ClassifierKind::Gnb => "gnb",
        ClassifierKind::LogReg => "logreg",
    }
}

/// Curves for a generator: independent train and test draws per noise level.
pub(crate) fn generator_curves(
    spec: &QuadSpec,
    n_per_cell: usize,
    eta2s: &[f64],
    sweep: &SweepConfig,
) -> Result<Vec<FairnessCurve>, TriadError> {
    let train = crate::data::sample_quad(spec, n_per_cell, sweep.seed)?;
    let test = crate::data::sample_quad(spec, n_per_cell, derive_seed(sweep.seed, 0x74657374))?;
    sweep_curves(&train, Some(&test), eta2s, sweep)
}

pub(crate) fn privacy(ctx: &RunContext, cfg: PrivacyConfig) -> Result<(), CliError> {
    let table = privacy::budget_table(&cfg.epsilon, &cfg.delta).map_err(|e| usage(e.to_string()))?;
    let rows: Vec<Vec<String>> =
        table.iter().map(|r| vec![num(r.epsilon), num(r.delta), num(r.eta2), num(r.eta2.sqrt())]).collect();
    let mut out = OutputDir::create(&ctx.out_dir, &ctx.config_hash, &[ctx.seed])?;
    out.csv("privacy_table.csv", &["epsilon", "delta", "eta2", "eta"], &rows)?;
    finish(ctx, out, &[ctx.seed], json!({}))
}

/// Writes `manifest.json` listing everything written so far.
pub(crate) fn finish(ctx: &RunContext, mut out: OutputDir, seeds: &[u64], extra: serde_json::Value) -> Result<(), CliError> {
    let files = out.written().to_vec();
    out.json("manifest.json", &ctx.manifest(seeds, &files, extra))?;
    Ok(())
}
