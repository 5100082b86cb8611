//! 10-NN accuracy under the Euclidean metric and under a learned metric.

use sgml::data::{cross_val_split, Normalizer};
use sgml::knn::{accuracy, DEFAULT_NEIGHBORS};
use sgml::objectives::ObjectiveKind;
use sgml::optimizer::{sgml, SgmlParams};
use sgml::synthetic::single_informative;
use sgml::MetricMatrix;

fn main() -> sgml::Result<()> {
    let data = single_informative(120, 8, 2);
    let splits = cross_val_split(data.len(), 0.9, 0..10)?;
    let (mut plain, mut learned) = (0.0, 0.0);
    for split in &splits {
        let scaler = Normalizer::fit(&data.subset(&split.train))?;
        let train = scaler.apply(&data.subset(&split.train))?;
        let test = scaler.apply(&data.subset(&split.test))?;
        let m = sgml(&train, ObjectiveKind::Deml, &SgmlParams::default())?.m;
        plain += accuracy(&train, &test, &MetricMatrix::identity(train.dim()), DEFAULT_NEIGHBORS)?;
        learned += accuracy(&train, &test, &m, DEFAULT_NEIGHBORS)?;
    }
    let n = splits.len() as f64;
    println!("euclidean accuracy {:.3}", plain / n);
    println!("learned accuracy   {:.3}", learned / n);
    Ok(())
}
