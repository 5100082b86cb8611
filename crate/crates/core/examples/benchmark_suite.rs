//! Run a small benchmark grid in-process and print the summary table.

use sgml::cli::{run_benchmark, summary_csv, Scheme, SolverArgs};
use sgml::objectives::ObjectiveKind;
use sgml::synthetic::{anti_correlated, gaussian_two_class};
use clap::Parser;

#[derive(Parser)]
struct Defaults {
    #[command(flatten)]
    solver: SolverArgs,
}

fn main() -> sgml::Result<()> {
    let solver = Defaults::parse_from(["bench"]).solver;
    let datasets = [gaussian_two_class(40, 5, 1.5, 1), anti_correlated(40, 2)];
    let (rows, summary) = run_benchmark(
        &datasets,
        &[ObjectiveKind::Mcml, ObjectiveKind::Glr],
        &[Scheme::Sgml, Scheme::Pdcone],
        &solver,
        Some(3),
    )?;
    println!("{} jobs", rows.len());
    print!("{}", summary_csv(&summary));
    Ok(())
}
