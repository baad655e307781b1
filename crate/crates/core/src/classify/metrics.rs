use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, TriadError};

/// Accuracy and per-group error rates of one classifier configuration.
/// Group P is `S = 0`, group Q is `S = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairnessPoint {
    pub sweep_param: f64,
    pub accuracy: f64,
    pub tpr_p: f64,
    pub tpr_q: f64,
    pub fpr_p: f64,
    pub fpr_q: f64,
    pub fnr_p: f64,
    pub fnr_q: f64,
    pub eo_gap: f64,
    pub fpr_gap: f64,
    pub fnr_gap: f64,
}

/// Which group disparity a curve trades against accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GapKind {
    /// `|TPR_P − TPR_Q|`.
    Eo,
    /// `|FPR_P − FPR_Q|`.
    Fpr,
    /// Whichever of the two is larger at the unswept baseline.
    #[default]
    Auto,
}

impl GapKind {
    /// Resolves `Auto` against a baseline point; the TPR gap wins ties.
    pub fn resolve(self, baseline: &FairnessPoint) -> GapKind {
        match self {
            GapKind::Auto if baseline.fpr_gap > baseline.eo_gap => GapKind::Fpr,
            GapKind::Auto => GapKind::Eo,
            k => k,
        }
    }

    /// The gap of `p`; `Auto` reads as `Eo`.
    pub fn of(self, p: &FairnessPoint) -> f64 {
        match self {
            GapKind::Fpr => p.fpr_gap,
            _ => p.eo_gap,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GapKind::Eo => "eo",
            GapKind::Fpr => "fpr",
            GapKind::Auto => "auto",
        }
    }
}

/// Overall accuracy and per-group TPR/FPR/FNR with their absolute gaps.
/// Every `(group, label)` cell must be nonempty.
pub fn fairness_metrics(preds: &[u8], labels: &[u8], groups: &[u8]) -> Result<FairnessPoint> {
    let n = labels.len();
    for len in [preds.len(), groups.len()] {
        if len != n {
            return Err(TriadError::DimMismatch { expected: n, got: len });
        }
    }
    // counts[s][y][pred]
    let mut counts = [[[0usize; 2]; 2]; 2];
    let mut correct = 0usize;
    for ((&p, &y), &s) in preds.iter().zip(labels).zip(groups) {
        if p > 1 || y > 1 || s > 1 {
            return Err(invalid("preds/labels/groups", "must be 0 or 1"));
        }
        counts[s as usize][y as usize][p as usize] += 1;
        correct += usize::from(p == y);
    }
    let mut empty = Vec::new();
    for (s, g) in ["P", "Q"].iter().enumerate() {
        for y in 0..2 {
            if counts[s][y][0] + counts[s][y][1] == 0 {
                empty.push(format!("{g}{y}"));
            }
        }
    }
    if !empty.is_empty() {
        return Err(TriadError::EmptyCell { cell: empty.join(", "), reason: "rates need every (group, label) cell".into() });
    }
    let rate = |s: usize, y: usize, p: usize| counts[s][y][p] as f64 / (counts[s][y][0] + counts[s][y][1]) as f64;
    let (tpr_p, tpr_q) = (rate(0, 1, 1), rate(1, 1, 1));
    let (fpr_p, fpr_q) = (rate(0, 0, 1), rate(1, 0, 1));
    let (fnr_p, fnr_q) = (rate(0, 1, 0), rate(1, 1, 0));
    Ok(FairnessPoint {
        sweep_param: 0.0,
        accuracy: correct as f64 / n as f64,
        tpr_p,
        tpr_q,
        fpr_p,
        fpr_q,
        fnr_p,
        fnr_q,
        eo_gap: (tpr_p - tpr_q).abs(),
        fpr_gap: (fpr_p - fpr_q).abs(),
        fnr_gap: (fnr_p - fnr_q).abs(),
    })
}

/// Keeps the points no other point beats in both accuracy (higher) and gap
/// (lower). Exact duplicates keep their first occurrence. Input order is
/// preserved.
pub fn pareto_filter(points: &[FairnessPoint], gap: GapKind) -> Vec<FairnessPoint> {
    let key = |p: &FairnessPoint| (p.accuracy, gap.of(p));
    let mut out: Vec<FairnessPoint> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let (a, g) = key(p);
        let dominated = points.iter().enumerate().any(|(j, q)| {
            let (qa, qg) = key(q);
            let better = qa >= a && qg <= g && (qa > a || qg < g);
            let earlier_twin = j < i && qa == a && qg == g;
            better || earlier_twin
        });
        if !dominated {
            out.push(*p);
        }
    }
    out
}

/// Least-squares slope of accuracy regressed on the gap. `None` with fewer
/// than two points or no spread in the gap.
pub fn curve_slope(points: &[FairnessPoint], gap: GapKind) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| gap.of(p)).sum::<f64>() / n;
    let my = points.iter().map(|p| p.accuracy).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (gap.of(p) - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (gap.of(p) - mx) * (p.accuracy - my)).sum();
    (sxx > 1e-15).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(acc: f64, gap: f64) -> FairnessPoint {
        FairnessPoint {
            sweep_param: 0.0,
            accuracy: acc,
            tpr_p: 0.0,
            tpr_q: gap,
            fpr_p: 0.0,
            fpr_q: 0.0,
            fnr_p: 1.0,
            fnr_q: 1.0 - gap,
            eo_gap: gap,
            fpr_gap: 0.0,
            fnr_gap: gap,
        }
    }

    #[test]
    fn metrics_examples() {
        // 10 positives per group: P gets 9 right, Q gets 7.
        let mut preds = Vec::new();
        let mut labels = Vec::new();
        let mut groups = Vec::new();
        for (s, hits) in [(0u8, 9), (1u8, 7)] {
            for i in 0..10 {
                preds.push(u8::from(i < hits));
                labels.push(1);
                groups.push(s);
            }
            preds.push(0);
            labels.push(0);
            groups.push(s);
        }
        let m = fairness_metrics(&preds, &labels, &groups).unwrap();
        assert!((m.eo_gap - 0.2).abs() < 1e-12);
        assert_eq!(m.fpr_gap, 0.0);

        let perfect = fairness_metrics(&labels, &labels, &groups).unwrap();
        assert_eq!((perfect.accuracy, perfect.eo_gap, perfect.fpr_gap, perfect.fnr_gap), (1.0, 0.0, 0.0, 0.0));

        let swapped: Vec<u8> = groups.iter().map(|g| 1 - g).collect();
        assert_eq!(fairness_metrics(&preds, &labels, &swapped).unwrap().eo_gap, m.eo_gap);
    }

    #[test]
    fn empty_cell_rejected() {
        assert!(matches!(
            fairness_metrics(&[1, 0], &[1, 0], &[0, 0]),
            Err(TriadError::EmptyCell { .. })
        ));
    }

    #[test]
    fn pareto_keeps_frontier() {
        let pts = [pt(0.9, 0.3), pt(0.8, 0.1), pt(0.85, 0.35), pt(0.8, 0.1), pt(0.95, 0.3)];
        let f = pareto_filter(&pts, GapKind::Eo);
        assert_eq!(f, vec![pt(0.8, 0.1), pt(0.95, 0.3)]);
        assert_eq!(pareto_filter(&f, GapKind::Eo), f);
        assert_eq!(pareto_filter(&pts[..1], GapKind::Eo).len(), 1);
    }

    #[test]
    fn slope_of_line() {
        let pts = [pt(0.8, 0.1), pt(0.9, 0.2), pt(1.0, 0.3)];
        assert!((curve_slope(&pts, GapKind::Eo).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(curve_slope(&pts[..1], GapKind::Eo), None);
    }
}
