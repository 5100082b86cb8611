//! Learn a metric with every objective and print the certificate of each run.
//!
//! `cargo run --release --example learn_metric`

use sgml::data::normalize;
use sgml::graph::check_balance_matrix;
use sgml::objectives::ObjectiveKind;
use sgml::optimizer::{sgml, SgmlParams};
use sgml::synthetic::gaussian_two_class;

fn main() -> sgml::Result<()> {
    let data = normalize(&gaussian_two_class(60, 8, 1.5, 11))?;
    let params = SgmlParams::default();
    for kind in ObjectiveKind::ALL {
        let r = sgml(&data, kind, &params)?;
        println!(
            "{:5} objective {:>12.5}  iterations {:3}  lambda_min {:+.2e}  trace {:.4}  balanced {}  {:?}",
            kind.name(),
            r.objective,
            r.main_iterations,
            r.lambda_min,
            r.trace,
            check_balance_matrix(&r.m).is_balanced(),
            r.termination,
        );
    }
    Ok(())
}
