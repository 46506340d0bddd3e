//! Exhaustive decomposition search on small hosts.

use treedecomp::oracle::{brute_force_decompose, OracleLimits, OracleOutcome};
use treedecomp::pseudo::write_copies;
use treedecomp::{Graph, LabelledTree};

fn run(name: &str, g: &Graph, tree: &LabelledTree) {
    match brute_force_decompose(g, tree, OracleLimits::default()) {
        OracleOutcome::Found(copies) => print!("{name}: exists\n{}", write_copies(g, &copies)),
        OracleOutcome::NoDecomposition => println!("{name}: none"),
        OracleOutcome::BudgetExhausted { nodes } => println!("{name}: undecided after {nodes} nodes"),
        OracleOutcome::TooLarge { edges, max_edges } => println!("{name}: {edges} edges exceeds {max_edges}"),
    }
}

fn main() {
    let c6 = Graph::from_edges(&[("a1", "b1"), ("b1", "a2"), ("a2", "b2"), ("b2", "a3"), ("a3", "b3"), ("b3", "a1")])
        .expect("bipartite");
    let p3 = LabelledTree::label(&[("x", "y"), ("y", "z"), ("z", "w")], "y").expect("valid tree");
    run("C6 / 3-edge path", &c6, &p3);

    let k13 = Graph::from_edges(&[("a", "b1"), ("a", "b2"), ("a", "b3")]).expect("bipartite");
    let cherry = LabelledTree::label(&[("c", "x"), ("c", "y")], "c").expect("valid tree");
    run("K13 / 2-edge path", &k13, &cherry);

    // Two claws centred in A cover K_{2,3}.
    let mut k23 = Vec::new();
    for a in ["a1", "a2"] {
        for b in ["b1", "b2", "b3"] {
            k23.push((a, b));
        }
    }
    let k23 = Graph::from_edges(&k23).expect("bipartite");
    let claw = LabelledTree::label(&[("c", "x"), ("c", "y"), ("c", "z")], "c").expect("valid tree");
    run("K23 / claw", &k23, &claw);
}
