//! Classifies the three built-in isotropic quads and traces their noisy
//! Chernoff Difference.
//!
//!     cargo run --release --example theorem_cases

use triad::data::QuadSpec;
use triad::gaussian::{classify_case, noisy_cd_signed};
use triad::presets;

fn main() -> triad::Result<()> {
    for name in ["gaussian-case1", "gaussian-case2", "gaussian-case3"] {
        let QuadSpec::Iso(quad) = presets::quad(name)? else { unreachable!() };
        let r = classify_case(&quad);
        println!("{name}: {} (p = {:.2}, q = {:.2})", r.label, r.p, r.q);
        if let Some(m) = r.eta_max {
            println!("  CD peaks at eta2 = {m:.4}");
        }
        if let Some(z) = r.eta_reflection {
            println!("  CD touches zero at eta2 = {z:.4}");
        }
        for eta2 in [0.0, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let s = noisy_cd_signed(&quad, eta2)?;
            println!("  eta2 = {eta2:>4}: CD = {:.5}  (signed {s:+.5})", s.abs());
        }
    }
    Ok(())
}
