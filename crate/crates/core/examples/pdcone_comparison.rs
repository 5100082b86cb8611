//! Compare SGML with projected gradient descent on the PSD cone: final
//! objective, wall time and the share of time spent in eigen-solves.
//!
//! `cargo run --release --example pdcone_comparison -- [K]`

use sgml::baseline::{pdcone_pg, PdConeParams};
use sgml::data::normalize;
use sgml::objectives::ObjectiveKind;
use sgml::optimizer::{sgml, SgmlParams};
use sgml::synthetic::gaussian_two_class;

fn main() -> sgml::Result<()> {
    let k: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(20);
    let data = normalize(&gaussian_two_class(4 * k, k, 1.5, 5))?;
    for kind in [ObjectiveKind::Mcml, ObjectiveKind::Deml, ObjectiveKind::Glr] {
        let s = sgml(&data, kind, &SgmlParams::default())?;
        let p = pdcone_pg(&data, kind, &PdConeParams::default())?;
        println!(
            "{:5} sgml {:>12.5} ({:>8.1?}, eigen {:>4.1}%)   pdcone {:>12.5} ({:>8.1?}, eigen {:>4.1}%)",
            kind.name(),
            s.objective,
            s.log.timings.total,
            100.0 * s.log.timings.eigen_fraction(),
            p.objective,
            p.timings.total,
            100.0 * p.timings.eigen_fraction(),
        );
    }
    Ok(())
}
