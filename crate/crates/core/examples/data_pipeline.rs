//! Generate a dataset, write it as LibSVM and CSV, read it back, normalize it
//! and split it into folds. Also writes a benchmark manifest.
//!
//! `cargo run --example data_pipeline -- [out-dir]`

use std::path::PathBuf;

use sgml::data::{
    default_fold_count, load_any, normalize, split_folds, write_csv, write_libsvm, DataFormat,
    Manifest, ManifestEntry,
};
use sgml::synthetic::{anti_correlated, gaussian_two_class};

fn main() -> sgml::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("sgml-data"));
    std::fs::create_dir_all(&dir).map_err(|e| sgml::Error::io(&dir, e))?;

    let gauss = gaussian_two_class(80, 6, 1.5, 7);
    let anti = anti_correlated(60, 3);
    write_libsvm(&gauss, dir.join("gauss.libsvm"))?;
    write_csv(&anti, dir.join("anti.csv"))?;

    let back = load_any(dir.join("gauss.libsvm"))?;
    println!("{}: {} samples, {} features", back.name, back.len(), back.dim());
    let norm = normalize(&back)?;
    println!("normalized: {}", norm.is_normalized());

    let folds = default_fold_count(norm.len());
    let plan = split_folds(norm.len(), folds, 0)?;
    println!("{folds} folds, sizes {:?}", plan.sizes());

    let manifest = Manifest {
        datasets: vec![
            ManifestEntry {
                name: "gauss".into(),
                path: "gauss.libsvm".into(),
                format: DataFormat::Libsvm,
            },
            ManifestEntry {
                name: "anti".into(),
                path: "anti.csv".into(),
                format: DataFormat::Csv,
            },
        ],
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .map_err(|e| sgml::Error::io(&path, e))?;
    println!("wrote {}", dir.display());
    Ok(())
}
