//! The i-switch on a hand-made pair, then a full repair with its stage log.

use treedecomp::colouring::synth_instance;
use treedecomp::pseudo::build_pseudo_decomposition;
use treedecomp::repair::{repair_all, switch, RepairSchedule};
use treedecomp::{BladeMode, LabelledTree, PseudoCopy};

fn main() {
    // 4-edge path rooted at an end: t_0 - t_1 - t_2 - t_3 - t_4.
    let path = LabelledTree::from_parents(&[0, 1, 2, 3]).expect("valid parents");
    let h = PseudoCopy::new(vec![1, 2, 3, 4, 1], vec![10, 11, 12, 13]);
    let f = PseudoCopy::new(vec![7, 8, 3, 9, 10], vec![20, 21, 22, 23]);
    let (a, b) = switch(&path, &h, &f, 3).expect("both map t_2 to vertex 3");
    println!("H  {:?} goodness {}", h.images(), h.goodness());
    println!("F  {:?} goodness {}", f.images(), f.goodness());
    println!("-> {:?} goodness {}", a.images(), a.goodness());
    println!("-> {:?} goodness {}", b.images(), b.goodness());

    let tree = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r").expect("valid tree");
    let inst = synth_instance(&tree, 60, 16, 16, 2).expect("pools are large enough");
    let mut schedule = RepairSchedule::standard(4);
    schedule.relax = None;
    for seed in 0..20 {
        let p = build_pseudo_decomposition(&inst.graph, &tree, &inst.colouring, BladeMode::Whole, seed)
            .expect("equitable");
        let bad = p.copies.iter().filter(|c| !c.is_isomorphic()).count();
        if bad == 0 {
            continue;
        }
        match repair_all(&inst.graph, &tree, &p, &schedule, seed) {
            Ok(done) => {
                println!("seed {seed}: {bad} non-isomorphic copies repaired");
                for s in &done.stages {
                    println!("  stage {}: {} bad, {} switches, |I| = {}, conf(I) = {}", s.stage, s.bad_before, s.switches, s.iso_after, s.conf_iso);
                }
            }
            Err(f) => println!("seed {seed}: failed at stage {}: {}", f.stage, f.reason),
        }
        return;
    }
    println!("every draw was already a decomposition");
}
