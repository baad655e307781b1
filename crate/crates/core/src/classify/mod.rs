//! Split classifiers, fairness metrics and fairness–accuracy curves.
//!
//! Each group gets its own classifier. A curve fixes one group's model and
//! sweeps the other's decision bias (a GNB log-prior shift or a logistic
//! class weight), keeping the Pareto front of accuracy against a
//! between-group rate gap.

mod exponents;
mod gnb;
mod logreg;
mod metrics;
mod sweep;

pub use exponents::{empirical_cd, ExponentReport, GroupRates, Priors};
pub use gnb::{fit_gnb, predict_gnb, GnbModel, VARIANCE_FLOOR};
pub use logreg::{fit_logreg, LogRegConfig, LogRegModel};
pub use metrics::{curve_slope, fairness_metrics, pareto_filter, FairnessPoint, GapKind};
pub use sweep::{default_grid, split_quad, sweep_curve, sweep_curves, ClassifierKind, FairnessCurve, SweepConfig};
