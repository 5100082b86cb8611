//! Allowing negative edges lets the metric shrink an anti-correlated
//! within-class direction that a positive-only graph cannot express.

use sgml::data::normalize;
use sgml::objectives::ObjectiveKind;
use sgml::optimizer::{sgml, SgmlParams};
use sgml::synthetic::anti_correlated;

fn main() -> sgml::Result<()> {
    let data = normalize(&anti_correlated(40, 1))?;
    let signed = sgml(&data, ObjectiveKind::Mcml, &SgmlParams::default())?;
    let positive = sgml(
        &data,
        ObjectiveKind::Mcml,
        &SgmlParams {
            allow_negative_edges: false,
            ..SgmlParams::default()
        },
    )?;
    println!("signed   loss {:.6}  M = {:?}", signed.loss, signed.m.to_rows());
    println!("positive loss {:.6}  M = {:?}", positive.loss, positive.m.to_rows());
    println!(
        "relative gain {:.1}%",
        100.0 * (positive.loss - signed.loss) / positive.loss.abs()
    );
    Ok(())
}
