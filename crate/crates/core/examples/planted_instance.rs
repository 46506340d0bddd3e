//! Generate a planted instance and print its files.
//!
//! cargo run --example planted_instance -- [copies] [a_pool] [b_pool] [seed]

use treedecomp::colouring::{synth_instance, verify_equitable};
use treedecomp::pseudo::write_copies;
use treedecomp::LabelledTree;

fn main() {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|s| s.parse().ok()).collect();
    let arg = |k: usize, default: usize| args.get(k).copied().unwrap_or(default);

    // A spider with legs of length 1, 2 and 2; `c` is t_0.
    let tree = LabelledTree::label(&[("c", "x"), ("c", "y1"), ("y1", "y2"), ("c", "z1"), ("z1", "z2")], "c")
        .expect("leaf x lies opposite the root");
    let inst = synth_instance(&tree, arg(0, 6), arg(1, 6), arg(2, 6), arg(3, 0) as u64)
        .unwrap_or_else(|e| panic!("generator: {e}"));

    println!("# tree\n{}", tree.to_text());
    println!("# graph ({} vertices, {} edges)\n{}", inst.graph.vertex_count(), inst.graph.edge_count(), inst.graph.to_text());
    println!("# colouring\n{}", inst.colouring.to_text(&inst.graph));
    println!("# planted decomposition\n{}", write_copies(&inst.graph, &inst.planted));
    println!(
        "equitable: {}",
        verify_equitable(&inst.graph, &tree, &inst.colouring).is_ok()
    );
}
