use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gnb::{fit_gnb, GnbModel};
use super::logreg::{fit_logreg, LogRegConfig, LogRegModel};
use super::metrics::{fairness_metrics, pareto_filter, FairnessPoint, GapKind};
use crate::data::{Cell, Group, QuadSamples};
use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, SeededRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    /// Sweeps the class-1 log-prior shift.
    Gnb,
    /// Sweeps the class-1 training weight.
    LogReg,
}

/// 41 log-prior shifts over [−6, 6] for GNB; 25 log-spaced class weights
/// over [2⁻⁴, 2⁴] for logistic regression.
pub fn default_grid(kind: ClassifierKind) -> Vec<f64> {
    match kind {
        ClassifierKind::Gnb => (0..41).map(|i| -6.0 + 0.3 * i as f64).collect(),
        ClassifierKind::LogReg => (0..25).map(|i| 2f64.powf(-4.0 + i as f64 / 3.0)).collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub classifier: ClassifierKind,
    /// Defaults to [`default_grid`].
    pub grid: Option<Vec<f64>>,
    pub gap: GapKind,
    /// Group whose parameter is swept; `None` picks the group with the lower
    /// balanced accuracy at the baseline.
    pub swept_group: Option<Group>,
    /// Held-out fraction when no separate test set is given.
    pub test_fraction: f64,
    pub logreg: LogRegConfig,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            classifier: ClassifierKind::Gnb,
            grid: None,
            gap: GapKind::Auto,
            swept_group: None,
            test_fraction: 0.2,
            logreg: LogRegConfig::default(),
            seed: 0,
        }
    }
}

impl SweepConfig {
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone().unwrap_or_else(|| default_grid(self.classifier))
    }

    fn baseline_param(&self) -> f64 {
        match self.classifier {
            ClassifierKind::Gnb => 0.0,
            ClassifierKind::LogReg => 1.0,
        }
    }
}

/// Pareto-filtered (accuracy, gap) points at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessCurve {
    pub eta2: f64,
    pub classifier: ClassifierKind,
    pub swept_group: Group,
    pub gap: GapKind,
    pub points: Vec<FairnessPoint>,
}

/// Splits every cell into `(train, test)` with a seeded shuffle.
pub fn split_quad(q: &QuadSamples, test_fraction: f64, seed: u64) -> Result<(QuadSamples, QuadSamples)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid("test_fraction", format!("{test_fraction} must lie in (0, 1)")));
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for c in Cell::ALL {
        let m = q.cell(c);
        let perm = SeededRng::with_stream(seed, c as u64).permutation(m.rows());
        let n_test = ((m.rows() as f64) * test_fraction).round() as usize;
        test.push(m.select_rows(&perm[..n_test]));
        train.push(m.select_rows(&perm[n_test..]));
    }
    let mk = |v: Vec<Matrix>| {
        let [a, b, c, d]: [Matrix; 4] = v.try_into().expect("four cells");
        QuadSamples::new(a, b, c, d)
    };
    Ok((mk(train)?, mk(test)?))
}

fn stack(a: &Matrix, b: &Matrix) -> (Matrix, Vec<u8>) {
    let mut x = a.clone();
    for r in b.iter_rows() {
        x.push_row(r).expect("cells share a dimension");
    }
    let mut y = vec![0u8; a.rows()];
    y.resize(a.rows() + b.rows(), 1);
    (x, y)
}

enum Model {
    Gnb(GnbModel),
    LogReg(LogRegModel),
}

impl Model {
    fn predict(&self, x: &[f64], shift: f64) -> u8 {
        match self {
            Model::Gnb(m) => m.predict(x, shift),
            Model::LogReg(m) => m.predict(x),
        }
    }
}

/// Train/test data of both groups at one noise level.
struct Prepared {
    train: QuadSamples,
    test_x: Matrix,
    test_y: Vec<u8>,
    test_s: Vec<u8>,
}

impl Prepared {
    fn new(train: &QuadSamples, test: &QuadSamples, eta2: f64, seed: u64) -> Result<Self> {
        let train = train.with_noise(eta2, derive_seed(seed, 1))?;
        let test = test.with_noise(eta2, derive_seed(seed, 2))?;
        let ds = test.to_dataset()?;
        Ok(Self { train, test_x: ds.features, test_y: ds.labels, test_s: ds.groups })
    }

    fn fit(&self, g: Group, kind: ClassifierKind, param: f64, cfg: &LogRegConfig) -> Result<Model> {
        let (a, b) = self.train.group(g);
        let (x, y) = stack(a, b);
        Ok(match kind {
            ClassifierKind::Gnb => Model::Gnb(fit_gnb(&x, &y)?),
            ClassifierKind::LogReg => Model::LogReg(fit_logreg(&x, &y, (1.0, param), cfg)?),
        })
    }

    fn predict_group(&self, g: Group, m: &Model, shift: f64, preds: &mut [u8]) {
        for (i, p) in preds.iter_mut().enumerate() {
            if self.test_s[i] == g.s() {
                *p = m.predict(self.test_x.row(i), shift);
            }
        }
    }

    fn point(&self, fixed: (Group, &Model), swept: (Group, &Model), shift: f64, param: f64) -> Result<FairnessPoint> {
        let mut preds = vec![0u8; self.test_y.len()];
        self.predict_group(fixed.0, fixed.1, 0.0, &mut preds);
        self.predict_group(swept.0, swept.1, shift, &mut preds);
        let mut p = fairness_metrics(&preds, &self.test_y, &self.test_s)?;
        p.sweep_param = param;
        Ok(p)
    }

    /// Both groups at their unswept setting.
    fn baseline(&self, cfg: &SweepConfig) -> Result<(FairnessPoint, Group)> {
        let b = cfg.baseline_param();
        let mp = self.fit(Group::P, cfg.classifier, b, &cfg.logreg)?;
        let mq = self.fit(Group::Q, cfg.classifier, b, &cfg.logreg)?;
        let p = self.point((Group::P, &mp), (Group::Q, &mq), 0.0, b)?;
        let bal = |tpr: f64, fpr: f64| 0.5 * (tpr + 1.0 - fpr);
        let weaker = if bal(p.tpr_p, p.fpr_p) < bal(p.tpr_q, p.fpr_q) { Group::P } else { Group::Q };
        Ok((p, weaker))
    }

    fn sweep(&self, eta2: f64, cfg: &SweepConfig, swept: Group, gap: GapKind) -> Result<FairnessCurve> {
        let grid = cfg.grid();
        if grid.is_empty() {
            return Err(invalid("grid", "sweep grid is empty"));
        }
        let fixed = swept.other();
        let fixed_model = self.fit(fixed, cfg.classifier, cfg.baseline_param(), &cfg.logreg)?;
        let raw = match cfg.classifier {
            ClassifierKind::Gnb => {
                let m = self.fit(swept, cfg.classifier, 0.0, &cfg.logreg)?;
                grid.par_iter()
                    .map(|&s| self.point((fixed, &fixed_model), (swept, &m), s, s))
                    .collect::<Result<Vec<_>>>()?
            }
            ClassifierKind::LogReg => grid
                .par_iter()
                .map(|&w| {
                    let m = self.fit(swept, cfg.classifier, w, &cfg.logreg)?;
                    self.point((fixed, &fixed_model), (swept, &m), 0.0, w)
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(FairnessCurve {
            eta2,
            classifier: cfg.classifier,
            swept_group: swept,
            gap,
            points: pareto_filter(&raw, gap),
        })
    }
}

fn resolve_test(train: &QuadSamples, test: Option<&QuadSamples>, cfg: &SweepConfig) -> Result<(QuadSamples, QuadSamples)> {
    match test {
        Some(t) => Ok((train.clone(), t.clone())),
        None => split_quad(train, cfg.test_fraction, derive_seed(cfg.seed, 0)),
    }
}

/// One fairness–accuracy curve: both groups perturbed with `N(0, eta2 I)`,
/// one group's classifier fixed at its baseline, the other's swept over the
/// grid, evaluated on `test` (or a held-out split of `train`), then
/// Pareto-filtered.
pub fn sweep_curve(train: &QuadSamples, test: Option<&QuadSamples>, eta2: f64, cfg: &SweepConfig) -> Result<FairnessCurve> {
    train.check_nonempty()?;
    let (tr, te) = resolve_test(train, test, cfg)?;
    let prep = Prepared::new(&tr, &te, eta2, cfg.seed)?;
    let (base, weaker) = prep.baseline(cfg)?;
    let swept = cfg.swept_group.unwrap_or(weaker);
    prep.sweep(eta2, cfg, swept, cfg.gap.resolve(&base))
}

/// Curves for several noise levels sharing one swept group and one gap kind,
/// both resolved on the noise-free data.
pub fn sweep_curves(train: &QuadSamples, test: Option<&QuadSamples>, eta2s: &[f64], cfg: &SweepConfig) -> Result<Vec<FairnessCurve>> {
    train.check_nonempty()?;
    let (tr, te) = resolve_test(train, test, cfg)?;
    let clean = Prepared::new(&tr, &te, 0.0, cfg.seed)?;
    let (base, weaker) = clean.baseline(cfg)?;
    let swept = cfg.swept_group.unwrap_or(weaker);
    let gap = cfg.gap.resolve(&base);
    eta2s
        .par_iter()
        .map(|&eta2| Prepared::new(&tr, &te, eta2, cfg.seed)?.sweep(eta2, cfg, swept, gap))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{sample_quad, QuadSpec};
    use crate::gaussian::IsoGaussianQuad;

    fn case3() -> QuadSamples {
        let q = IsoGaussianQuad::scalar((-4.2, 1.3), 0.85, (0.6, 1.6), 0.6).unwrap();
        sample_quad(&QuadSpec::Iso(q), 2000, 3).unwrap()
    }

    #[test]
    fn grids() {
        let g = default_grid(ClassifierKind::Gnb);
        assert_eq!((g.len(), g[0], g[40]), (41, -6.0, 6.0));
        assert!(g[20].abs() < 1e-12);
        let w = default_grid(ClassifierKind::LogReg);
        assert_eq!(w.len(), 25);
        assert!((w[0] - 1.0 / 16.0).abs() < 1e-12 && (w[24] - 16.0).abs() < 1e-12);
    }

    #[test]
    fn gnb_curve_is_pareto_and_picks_weaker_group() {
        let c = sweep_curve(&case3(), None, 0.0, &SweepConfig::default()).unwrap();
        assert_eq!(c.swept_group, Group::Q);
        assert!(!c.points.is_empty());
        assert_eq!(pareto_filter(&c.points, c.gap), c.points);
    }

    #[test]
    fn single_point_grid_and_logreg() {
        let cfg = SweepConfig { grid: Some(vec![0.0]), ..SweepConfig::default() };
        assert_eq!(sweep_curve(&case3(), None, 0.5, &cfg).unwrap().points.len(), 1);
        let cfg = SweepConfig { classifier: ClassifierKind::LogReg, grid: Some(vec![0.5, 1.0, 2.0]), ..SweepConfig::default() };
        let curves = sweep_curves(&case3(), None, &[0.0, 1.0], &cfg).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].swept_group, curves[1].swept_group);
    }

    #[test]
    fn split_is_partition() {
        let q = case3();
        let (a, b) = split_quad(&q, 0.2, 1).unwrap();
        assert_eq!(a.sizes(), [1600; 4]);
        assert_eq!(b.sizes(), [400; 4]);
    }
}
