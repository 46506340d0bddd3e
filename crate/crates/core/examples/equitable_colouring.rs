//! Exact search for equitable colourings on a few small hosts.

use treedecomp::colouring::{find_equitable, EquitableSearch};
use treedecomp::{Graph, LabelledTree};

fn show(name: &str, g: &Graph, tree: &LabelledTree) {
    match find_equitable(g, tree, 1_000_000) {
        EquitableSearch::Found(col) => {
            println!("{name}: SAT");
            print!("{}", col.to_text(g));
        }
        EquitableSearch::Unsat => println!("{name}: UNSAT"),
        EquitableSearch::BudgetExhausted { nodes } => println!("{name}: gave up after {nodes} nodes"),
    }
}

fn main() {
    let cherry = LabelledTree::label(&[("c", "x"), ("c", "y")], "c").expect("valid tree");
    let c4 = Graph::from_edges(&[("a1", "b1"), ("a1", "b2"), ("a2", "b1"), ("a2", "b2")]).expect("bipartite");
    show("C4 / 2-edge path", &c4, &cherry);

    let edge = Graph::from_edges(&[("a", "b")]).expect("bipartite");
    show("K2 / 2-edge path", &edge, &cherry);

    // K_{3,3} with the 3-edge path rooted at an inner vertex.
    let mut k33 = Vec::new();
    for a in ["a1", "a2", "a3"] {
        for b in ["b1", "b2", "b3"] {
            k33.push((a, b));
        }
    }
    let k33 = Graph::from_edges(&k33).expect("bipartite");
    let p3 = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z")], "r").expect("valid tree");
    show("K33 / 3-edge path", &k33, &p3);
}
