use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// False-positive and false-negative rates of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupRates {
    pub fpr: f64,
    pub fnr: f64,
}

/// Class priors `(π₀, π₁)` of one group.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    pub pi0: f64,
    pub pi1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub e_fp_p: f64,
    pub e_fn_p: f64,
    pub e_fp_q: f64,
    pub e_fn_q: f64,
    pub cd_empirical: f64,
    pub prior_skew_applied: bool,
}

/// Error exponents `E = −(1/n) ln rate` per group and
/// `|min(E_FP, E_FN)_P − min(E_FP, E_FN)_Q|`. With priors, the exponents are
/// shifted to `E_FP − ln 2π₀` and `E_FN − ln 2π₁` before the minimum; the
/// reported exponents stay unshifted.
pub fn empirical_cd(p: GroupRates, q: GroupRates, n: usize, priors: Option<(Priors, Priors)>) -> Result<ExponentReport> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    for r in [p.fpr, p.fnr, q.fpr, q.fnr] {
        if !(r > 0.0 && r < 1.0) {
            return Err(invalid("rate", format!("{r} must lie strictly inside (0, 1)")));
        }
    }
    let e = |r: f64| -r.ln() / n as f64;
    let (e_fp_p, e_fn_p, e_fp_q, e_fn_q) = (e(p.fpr), e(p.fnr), e(q.fpr), e(q.fnr));
    let shift = |pr: Option<Priors>| -> Result<(f64, f64)> {
        match pr {
            None => Ok((0.0, 0.0)),
            Some(Priors { pi0, pi1 }) => {
                if !(pi0 > 0.0 && pi1 > 0.0) || ((pi0 + pi1) - 1.0).abs() > 1e-9 {
                    return Err(invalid("priors", format!("({pi0}, {pi1}) must be positive and sum to 1")));
                }
                Ok((-(2.0 * pi0).ln(), -(2.0 * pi1).ln()))
            }
        }
    };
    let (sp, sq) = (shift(priors.map(|x| x.0))?, shift(priors.map(|x| x.1))?);
    let cp = (e_fp_p + sp.0).min(e_fn_p + sp.1);
    let cq = (e_fp_q + sq.0).min(e_fn_q + sq.1);
    Ok(ExponentReport {
        e_fp_p,
        e_fn_p,
        e_fp_q,
        e_fn_q,
        cd_empirical: (cp - cq).abs(),
        prior_skew_applied: priors.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let r = GroupRates { fpr: 0.2, fnr: 0.3 };
        assert_eq!(empirical_cd(r, r, 10, None).unwrap().cd_empirical, 0.0);

        let p = GroupRates { fpr: 1e-3, fnr: (-2f64).exp() };
        let q = GroupRates { fpr: 1e-4, fnr: (-3f64).exp() };
        let rep = empirical_cd(p, q, 1, None).unwrap();
        assert!((rep.cd_empirical - 1.0).abs() < 1e-12);
        assert!((rep.e_fn_p - 2.0).abs() < 1e-12);

        let half = Priors { pi0: 0.5, pi1: 0.5 };
        let skewed = empirical_cd(p, q, 1, Some((half, half))).unwrap();
        assert_eq!(skewed.cd_empirical, rep.cd_empirical);
        assert!(skewed.prior_skew_applied);

        assert!(empirical_cd(GroupRates { fpr: 0.0, fnr: 0.5 }, r, 1, None).is_err());
        assert!(empirical_cd(GroupRates { fpr: 1.0, fnr: 0.5 }, r, 1, None).is_err());
    }

    #[test]
    fn unequal_priors_shift_the_minimum() {
        let r = GroupRates { fpr: (-2f64).exp(), fnr: (-2f64).exp() };
        let skew = Priors { pi0: 0.25, pi1: 0.75 };
        let even = Priors { pi0: 0.5, pi1: 0.5 };
        let rep = empirical_cd(r, r, 1, Some((skew, even))).unwrap();
        // P: min(2 + ln 2, 2 − ln 1.5) = 2 − ln 1.5; Q: 2.
        assert!((rep.cd_empirical - 1.5f64.ln()).abs() < 1e-12);
    }
}
