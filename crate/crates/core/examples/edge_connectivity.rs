//! Edge connectivity of a few hosts.

use treedecomp::colouring::synth_instance;
use treedecomp::{edge_connectivity, Graph, LabelledTree};

fn main() {
    let c6 = Graph::from_edges(&[("a1", "b1"), ("b1", "a2"), ("a2", "b2"), ("b2", "a3"), ("a3", "b3"), ("b3", "a1")])
        .expect("bipartite");
    println!("C6: {:?}", edge_connectivity(&c6));

    let mut k44 = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            k44.push((format!("a{a}"), format!("b{b}")));
        }
    }
    println!("K44: {:?}", edge_connectivity(&Graph::from_edges(&k44).expect("bipartite")));

    let two = Graph::from_edges(&[("a", "b"), ("c", "d")]).expect("bipartite");
    println!("two components: {:?}", edge_connectivity(&two));

    let tree = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r").expect("valid tree");
    for copies in [10, 50, 200] {
        let inst = synth_instance(&tree, copies, 40, 40, 0).expect("pools are large enough");
        println!("planted, {copies} copies: {:?}", edge_connectivity(&inst.graph));
    }
}
