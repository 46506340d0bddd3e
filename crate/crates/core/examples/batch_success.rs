//! Success rate of the full pipeline over a batch of planted instances.
//!
//! Usage: cargo run --release --example batch_success -- [copies] [a_pool] [b_pool] [seeds] [relax]

use treedecomp::colouring::synth_instance;
use treedecomp::pipeline::{decompose, Outcome, PipelineConfig};
use treedecomp::{LabelledTree, Rational};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |k: usize, default: usize| args.get(k).and_then(|s| s.parse().ok()).unwrap_or(default);
    let (copies, a_pool, b_pool, seeds) = (arg(0, 50), arg(1, 20), arg(2, 20), arg(3, 100));
    let relax = args.get(4).and_then(|s| s.parse::<u64>().ok()).map(Rational::from_integer);

    let path = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r")
        .expect("a path with a leaf on the far side of the root");
    let mut tally = [0usize; 4];
    for seed in 0..seeds as u64 {
        let inst = match synth_instance(&path, copies, a_pool, b_pool, seed) {
            Ok(inst) => inst,
            Err(e) => {
                tally[3] += 1;
                println!("seed={seed} generator: {e}");
                continue;
            }
        };
        let cfg = PipelineConfig {
            seed,
            relax,
            ..PipelineConfig::default()
        };
        match decompose(&inst.graph, &path, Some(&inst.colouring), &cfg) {
            Outcome::Decomposed(_) => tally[0] += 1,
            Outcome::Failed { failure, .. } => {
                tally[1] += 1;
                println!("seed={seed} FAILED at stage {}: {}", failure.stage, failure.reason);
            }
            Outcome::InfeasibleInput { reason } => {
                tally[2] += 1;
                println!("seed={seed} INFEASIBLE_INPUT: {reason}");
            }
        }
    }
    println!(
        "decomposed={} failed={} infeasible={} generator_failed={} of {seeds}",
        tally[0], tally[1], tally[2], tally[3]
    );
}
