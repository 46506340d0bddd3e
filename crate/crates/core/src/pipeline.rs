//! End-to-end driver: colouring, pseudo-decomposition, repair, verification.

use crate::colouring::{find_equitable, verify_equitable, Colouring, EquitableError, EquitableSearch};
use crate::graph::Graph;
use crate::oracle::verify_decomposition;
use crate::pseudo::{
    build_pseudo_decomposition, check_lemma_dense, BladeMode, LemmaDenseReport, PseudoDecomposition,
    PseudoError, Rational,
};
use crate::repair::{repair_all, FailureReport, RepairSchedule, StageLog, SwitchScope};
use crate::seed;
use crate::tree::LabelledTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineConfig {
    pub seed: u64,
    pub mode: BladeMode,
    /// Thresholds for the density check on the initial pseudo-decomposition.
    pub dense_eps: Rational,
    pub dense_delta: Rational,
    /// Pseudo-decompositions drawn while looking for one that passes the
    /// density check; the best is kept if none does.
    pub dense_attempts: usize,
    /// Full rounds (fresh pseudo-decomposition, then repair) before giving up.
    pub rounds: usize,
    /// Node budget for the equitable-colouring search.
    pub colour_budget: u64,
    pub relax: Option<Rational>,
    pub scope: SwitchScope,
    pub reclassify: bool,
    pub stage_retries: usize,
    pub resample_budget: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: 0,
            mode: BladeMode::Whole,
            dense_eps: Rational::new(1, 2),
            dense_delta: Rational::from_integer(1),
            dense_attempts: 64,
            rounds: 4,
            colour_budget: 10_000_000,
            relax: None,
            scope: SwitchScope::BadOnly,
            reclassify: true,
            stage_retries: 8,
            resample_budget: 10_000,
        }
    }
}

impl PipelineConfig {
    pub fn schedule(&self, m: usize) -> RepairSchedule {
        RepairSchedule {
            relax: self.relax,
            scope: self.scope,
            reclassify: self.reclassify,
            stage_retries: self.stage_retries,
            resample_budget: self.resample_budget,
            ..RepairSchedule::standard(m)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposed {
    pub decomposition: PseudoDecomposition,
    pub colouring: Colouring,
    pub dense: LemmaDenseReport,
    pub dense_attempts: usize,
    /// Round in which repair succeeded, from 1.
    pub round: usize,
    pub stages: Vec<StageLog>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Decomposed(Box<Decomposed>),
    Failed {
        dense: Option<LemmaDenseReport>,
        failure: Box<FailureReport>,
    },
    InfeasibleInput { reason: String },
}

impl Outcome {
    pub fn status(&self) -> &'static str {
        match self {
            Outcome::Decomposed(_) => "DECOMPOSED",
            Outcome::Failed { .. } => "FAILED",
            Outcome::InfeasibleInput { .. } => "INFEASIBLE_INPUT",
        }
    }
}

fn failed(stage: usize, reason: String) -> Outcome {
    Outcome::Failed {
        dense: None,
        failure: Box::new(FailureReport {
            stage,
            reason,
            pools: None,
            seeds_tried: Vec::new(),
            stages: Vec::new(),
            violations: Vec::new(),
        }),
    }
}

/// Draws pseudo-decompositions until one passes the density check. Returns
/// the chosen one, its report and the number of draws.
pub fn dense_pseudo_decomposition(
    g: &Graph,
    tree: &LabelledTree,
    col: &Colouring,
    cfg: &PipelineConfig,
) -> Result<(PseudoDecomposition, LemmaDenseReport, usize), PseudoError> {
    let mut best: Option<((usize, usize), PseudoDecomposition, LemmaDenseReport)> = None;
    let attempts = cfg.dense_attempts.max(1);
    for k in 0..attempts {
        let s = seed::derive(cfg.seed, &[seed::domain::DENSE_RETRY, k as u64]);
        let p = build_pseudo_decomposition(g, tree, col, cfg.mode, s)?;
        let rep = check_lemma_dense(g, tree, &p.copies, cfg.dense_eps, cfg.dense_delta);
        if rep.holds() {
            return Ok((p, rep, k + 1));
        }
        let score = (rep.violations.len(), p.copies.iter().filter(|c| !c.is_isomorphic()).count());
        if best.as_ref().is_none_or(|(b, _, _)| score < *b) {
            best = Some((score, p, rep));
        }
    }
    let (_, p, rep) = best.expect("at least one attempt");
    Ok((p, rep, attempts))
}

/// Runs the whole pipeline. With `colouring = None` an equitable colouring
/// is searched for first.
pub fn decompose(
    g: &Graph,
    tree: &LabelledTree,
    colouring: Option<&Colouring>,
    cfg: &PipelineConfig,
) -> Outcome {
    let m = tree.edge_count();
    if !g.edge_count().is_multiple_of(m) {
        return Outcome::InfeasibleInput {
            reason: format!("{} edges is not a multiple of m = {m}", g.edge_count()),
        };
    }
    let col = match colouring {
        Some(c) => match verify_equitable(g, tree, c) {
            Ok(()) => c.clone(),
            Err(EquitableError::UncolouredEdge(e)) => {
                return Outcome::InfeasibleInput {
                    reason: format!("edge {} is not coloured", g.edge_label(e)),
                }
            }
            Err(EquitableError::Violations(v)) => {
                return Outcome::InfeasibleInput {
                    reason: format!("colouring is not equitable ({} violations)", v.len()),
                }
            }
        },
        None => match find_equitable(g, tree, cfg.colour_budget) {
            EquitableSearch::Found(c) => c,
            EquitableSearch::Unsat => {
                return Outcome::InfeasibleInput {
                    reason: "no equitable colouring exists".into(),
                }
            }
            EquitableSearch::BudgetExhausted { nodes } => {
                return failed(0, format!("colouring search gave up after {nodes} nodes"))
            }
        },
    };
    let schedule = cfg.schedule(m);
    let mut last = None;
    for round in 0..cfg.rounds.max(1) {
        let round_cfg = PipelineConfig {
            seed: if round == 0 {
                cfg.seed
            } else {
                seed::derive(cfg.seed, &[seed::domain::ROUND, round as u64])
            },
            ..cfg.clone()
        };
        let (p, dense, attempts) = match dense_pseudo_decomposition(g, tree, &col, &round_cfg) {
            Ok(x) => x,
            Err(e @ (PseudoError::DegreeTooSmall { .. } | PseudoError::ParameterOutOfRange(_))) => {
                return Outcome::InfeasibleInput {
                    reason: e.to_string(),
                }
            }
            Err(e) => return failed(0, e.to_string()),
        };
        match repair_all(g, tree, &p, &schedule, round_cfg.seed) {
            Ok(done) => {
                debug_assert!(verify_decomposition(g, tree, &done.decomposition.copies, None).is_empty());
                return Outcome::Decomposed(Box::new(Decomposed {
                    decomposition: done.decomposition,
                    colouring: col,
                    dense,
                    dense_attempts: attempts,
                    round: round + 1,
                    stages: done.stages,
                }));
            }
            Err(failure) => {
                log::debug!("round {round}: {}", failure.reason);
                last = Some((dense, failure));
            }
        }
    }
    let (dense, failure) = last.expect("at least one round");
    Outcome::Failed {
        dense: Some(dense),
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colouring::synth_instance;

    #[test]
    fn divisibility_is_checked_first() {
        let k13 = Graph::from_edges(&[("a", "b1"), ("a", "b2"), ("a", "b3")]).unwrap();
        let cherry = LabelledTree::label(&[("c", "x"), ("c", "y")], "c").unwrap();
        let out = decompose(&k13, &cherry, None, &PipelineConfig::default());
        assert_eq!(out.status(), "INFEASIBLE_INPUT");
    }

    #[test]
    fn planted_path_decomposes() {
        let path = LabelledTree::label(&[("x", "r"), ("r", "y"), ("y", "z"), ("z", "w")], "r").unwrap();
        let inst = synth_instance(&path, 50, 30, 30, 7).unwrap();
        let out = decompose(&inst.graph, &path, Some(&inst.colouring), &PipelineConfig::default());
        match out {
            Outcome::Decomposed(d) => {
                assert_eq!(d.decomposition.len(), 50);
                assert!(verify_decomposition(&inst.graph, &path, &d.decomposition.copies, None).is_empty());
            }
            other => panic!("expected DECOMPOSED, got {other:?}"),
        }
    }
}
