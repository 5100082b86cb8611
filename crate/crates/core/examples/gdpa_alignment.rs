//! Scale a balanced-graph Laplacian so that every Gershgorin disc left-end
//! lands on the smallest eigenvalue.

use sgml::graph::check_balance_matrix;
use sgml::spectral::{gdpa_scalars, gershgorin, lobpcg_first, scaled_gershgorin};
use sgml::MetricMatrix;

fn main() -> sgml::Result<()> {
    let m = MetricMatrix::from_rows(&[
        vec![2.0, -2.0, -1.0],
        vec![-2.0, 5.0, -2.0],
        vec![-1.0, -2.0, 4.0],
    ])?;
    let before = gershgorin(&m);
    println!("plain disc left-ends: {:?}", before.left_ends());
    println!("plain lower bound:    {}", before.lower_bound);

    let coloring = check_balance_matrix(&m)
        .coloring()
        .cloned()
        .expect("all-positive graph is balanced");
    let first = lobpcg_first(&m, None, 1e-12, 500)?.pair;
    println!("lambda_min:           {:.6}", first.value);
    println!("first eigenvector:    {:?}", first.vector);

    let s = gdpa_scalars(&m, &coloring, &first)?;
    let after = scaled_gershgorin(&m, &s);
    println!("scalars:              {:?}", s.values());
    println!("scaled left-ends:     {:?}", after.left_ends());
    Ok(())
}
