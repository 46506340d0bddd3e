//! Build pseudo-decompositions from a planted colouring and inspect them:
//! goodness, conflict ratios, the density check and blade arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use treedecomp::colouring::synth_instance;
use treedecomp::pseudo::{build_pseudo_decomposition, check_lemma_dense, choose_c, conflict_global, BladeMode};
use treedecomp::{LabelledTree, Rational};

fn main() {
    let path = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r").expect("valid tree");
    let inst = synth_instance(&path, 40, 14, 14, 1).expect("pools are large enough");

    for seed in 0..4 {
        let p = build_pseudo_decomposition(&inst.graph, &path, &inst.colouring, BladeMode::Whole, seed)
            .expect("planted colourings are equitable");
        let mut hist = [0usize; 5];
        for c in &p.copies {
            hist[c.goodness()] += 1;
        }
        let dense = check_lemma_dense(&inst.graph, &path, &p.copies, Rational::new(1, 2), Rational::from_integer(1));
        println!(
            "seed {seed}: {} copies, goodness histogram {:?}, conf = {}, dense check {}",
            p.len(),
            hist,
            conflict_global(4, &p.copies),
            if dense.holds() { "passes" } else { "fails" }
        );
    }

    // Blades of size c and c - 1 need every colour class above c^2 edges,
    // so the sized mode only applies to dense hosts.
    let sized = BladeMode::Sized { c: 2, require_min_degree: false };
    let p = build_pseudo_decomposition(&inst.graph, &path, &inst.colouring, sized, 0).expect("c = 2 always splits");
    println!("c = 2 blades: {} copies", p.len());

    let one = BigRational::from_integer(BigInt::from(1));
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for m in [2u64, 4, 8] {
        println!("choose_c(m = {m}, eps = 1/2, delta = 1) = {}", choose_c(m, &half, &one).expect("in range"));
    }
}
