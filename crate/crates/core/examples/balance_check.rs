//! Two-color a signed graph, or find the edge that closes an odd negative cycle.

use sgml::graph::{check_balance, laplacian_from_graph, Balance, SignedGraph};

fn report(name: &str, g: &SignedGraph) {
    match check_balance(g) {
        Balance::Balanced(c) => println!("{name}: balanced, colors {:?}", c.0),
        Balance::Unbalanced { edge } => println!("{name}: unbalanced at edge {edge:?}"),
    }
}

fn main() -> sgml::Result<()> {
    let balanced = SignedGraph::new(3, [(0, 1, 1.0), (1, 2, -1.0), (2, 0, -1.0)], vec![0.0; 3])?;
    let unbalanced = SignedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (2, 0, -1.0)], vec![0.0; 3])?;
    report("one positive, two negative", &balanced);
    report("two positive, one negative", &unbalanced);

    let m = laplacian_from_graph(&balanced);
    println!("Laplacian rows: {:?}", m.to_rows());
    Ok(())
}
