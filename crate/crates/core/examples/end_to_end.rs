//! Full pipeline on a planted instance, printed as a report.

use treedecomp::colouring::synth_instance;
use treedecomp::oracle::verify_decomposition;
use treedecomp::pipeline::{decompose, Outcome, PipelineConfig};
use treedecomp::report::{dense_records, failure_records, instance_record, stage_record, Record, Report};
use treedecomp::LabelledTree;

fn main() {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let tree = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r").expect("valid tree");
    let inst = synth_instance(&tree, 50, 16, 16, seed).expect("pools are large enough");
    let cfg = PipelineConfig {
        seed,
        dense_attempts: 1,
        ..PipelineConfig::default()
    };

    let mut report = Report::default();
    report.push(instance_record(&inst.graph, &tree));
    let outcome = decompose(&inst.graph, &tree, Some(&inst.colouring), &cfg);
    match &outcome {
        Outcome::Decomposed(d) => {
            report.extend(dense_records(&inst.graph, &d.dense));
            report.extend(d.stages.iter().map(stage_record));
            let ok = verify_decomposition(&inst.graph, &tree, &d.decomposition.copies, None).is_empty();
            report.push(Record::new("verify").field("status", if ok { "ok" } else { "violations" }));
        }
        Outcome::Failed { failure, .. } => report.extend(failure_records(&inst.graph, failure)),
        Outcome::InfeasibleInput { reason } => report.push(Record::new("infeasible").field("reason", reason)),
    }
    report.push(Record::new("outcome").field("status", outcome.status()));
    print!("{}", report.to_text());
}
