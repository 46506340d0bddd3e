//! Turning a pseudo-decomposition into a genuine `T`-decomposition.
//!
//! Stage `i` makes every non-isomorphic copy `i`-good. A copy `H` that is
//! `(i-1)`-good but not `i`-good is paired with an isomorphic copy `F`
//! sharing only `v = H(t_{i'})` (with `i'` the parent of `t_i`), and the two
//! exchange the subtrees hanging below `e_i`. Both results are `i`-good and
//! the edge partition and all degrees `d(v|t)` are unchanged.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{Graph, VertexId};
use crate::oracle::{verify_decomposition, Violation};
use crate::pseudo::{ConflictTable, DegreeTable, PseudoCopy, PseudoDecomposition, Rational};
use crate::seed;
use crate::tree::{LabelledTree, TreeEdge, TreeVertex};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SwitchError {
    #[error("copies disagree at t_{tree_vertex}: {left} and {right}")]
    SharedVertexMismatch {
        tree_vertex: TreeVertex,
        left: VertexId,
        right: VertexId,
    },
    #[error("tree edge {0} outside 1..={1}")]
    IndexOutOfRange(TreeEdge, usize),
}

/// The `i`-switch of `h1` and `h2`: returns `(h1^{i+} + h2^{i-}, h1^{i-} +
/// h2^{i+})`, where `^{i-}` is the part containing `t_0` after deleting
/// `e_i` and `e_i` itself goes with the `^{i+}` part. Both copies must map
/// the parent of `t_i` to the same vertex.
pub fn switch(
    tree: &LabelledTree,
    h1: &PseudoCopy,
    h2: &PseudoCopy,
    i: TreeEdge,
) -> Result<(PseudoCopy, PseudoCopy), SwitchError> {
    let m = tree.edge_count();
    let split = tree
        .split(i)
        .map_err(|_| SwitchError::IndexOutOfRange(i, m))?;
    let j = tree.parent(i);
    if h1.image(j) != h2.image(j) {
        return Err(SwitchError::SharedVertexMismatch {
            tree_vertex: j,
            left: h1.image(j),
            right: h2.image(j),
        });
    }
    let pick = |plus_from: &PseudoCopy, minus_from: &PseudoCopy| {
        let image = (0..=m)
            .map(|t| {
                if split.in_plus[t] {
                    plus_from.image(t)
                } else {
                    minus_from.image(t)
                }
            })
            .collect();
        let edges = (1..=m)
            .map(|k| {
                if split.in_plus[k] {
                    plus_from.edge(k)
                } else {
                    minus_from.edge(k)
                }
            })
            .collect();
        PseudoCopy::new(image, edges)
    };
    Ok((pick(h1, h2), pick(h2, h1)))
}

/// `5^{i-m} / (15 m)`.
pub fn scheduled_eps(m: usize, i: usize) -> Rational {
    assert!(i <= m && m > 0);
    Rational::new(1, 15 * m as u64 * 5u64.pow((m - i) as u32))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SwitchScope {
    /// Switch only copies that are not yet `i`-good.
    BadOnly,
    /// Switch every member of `H` at every stage.
    All,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSchedule {
    /// `eps[i]` for stage `i`; index 0 unused.
    pub eps: Vec<Rational>,
    pub delta: Rational,
    /// Factor on the matching degree bound `d_f(v|t) <= relax eps d_I(v|t)`;
    /// `None` leaves the bound unenforced.
    pub relax: Option<Rational>,
    /// Pool resamples allowed per matching.
    pub resample_budget: usize,
    /// Reseeds of a failing stage.
    pub stage_retries: usize,
    pub scope: SwitchScope,
    /// Move copies to `I` as soon as they become isomorphic.
    pub reclassify: bool,
}

impl RepairSchedule {
    pub fn standard(m: usize) -> RepairSchedule {
        RepairSchedule {
            eps: std::iter::once(Rational::new(0, 1))
                .chain((1..=m).map(|i| scheduled_eps(m, i)))
                .collect(),
            delta: Rational::new(1, 1),
            relax: Some(Rational::from_integer(3)),
            resample_budget: 10_000,
            stage_retries: 8,
            scope: SwitchScope::BadOnly,
            reclassify: true,
        }
    }

    pub fn eps(&self, i: usize) -> Rational {
        self.eps[i]
    }
}

/// One switch: `targets[target]` exchanges its subtree with `iso[partner]`,
/// both mapping `t_{i'}` to `shared`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SwitchPair {
    pub target: usize,
    pub partner: usize,
    pub shared: VertexId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwitchPlan {
    pub tree_vertex: TreeVertex,
    pub pairs: Vec<SwitchPair>,
    pub resamples: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoolStats {
    pub vertex: VertexId,
    pub tree_vertex: TreeVertex,
    /// Copies of `H` at `(v, t)` needing a partner.
    pub targets: usize,
    /// Isomorphic copies at `(v, t)` meeting their target only in `v`.
    pub eligible: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize)]
pub enum MatchingFailure {
    #[error("no system of distinct partners at ({}, t_{})", .0.vertex, .0.tree_vertex)]
    NoPartner(PoolStats),
    #[error("degree bound at ({vertex}, t_{tree_vertex}) violated: {count} partners with d_I = {d_iso}, {resamples} resamples")]
    DegreeBound {
        vertex: VertexId,
        tree_vertex: TreeVertex,
        count: usize,
        d_iso: usize,
        resamples: usize,
        pools: PoolStats,
    },
}

pub struct MatchingParams {
    pub eps: Rational,
    pub delta: Rational,
    pub relax: Option<Rational>,
    pub budget: usize,
}

/// Kuhn's augmenting path step.
fn augment(
    h: usize,
    eligible: &[Vec<usize>],
    seen: &mut [bool],
    owner: &mut [Option<usize>],
) -> bool {
    for &c in &eligible[h] {
        if seen[c] {
            continue;
        }
        seen[c] = true;
        if owner[c].is_none_or(|o| augment(o, eligible, seen, owner)) {
            owner[c] = Some(h);
            return true;
        }
    }
    false
}

/// Finds distinct partners in `iso` for every copy in `targets` at tree
/// vertex `t`: the partner maps `t` to the same vertex `v` and meets the
/// target only in `v`. Each target gets a pool of candidates and draws
/// from it; while some `(v', t')` receives more than `relax eps d_I(v'|t')`
/// partners, the pools contributing to it are redrawn.
pub fn build_matching(
    targets: &[PseudoCopy],
    iso: &[PseudoCopy],
    t: TreeVertex,
    params: &MatchingParams,
    vertex_count: usize,
    master_seed: u64,
) -> Result<SwitchPlan, MatchingFailure> {
    let m = targets.first().or(iso.first()).map_or(0, PseudoCopy::tree_size);
    let mut by_vertex: BTreeMap<VertexId, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (k, h) in targets.iter().enumerate() {
        by_vertex.entry(h.image(t)).or_default().0.push(k);
    }
    for (k, f) in iso.iter().enumerate() {
        if let Some(entry) = by_vertex.get_mut(&f.image(t)) {
            entry.1.push(k);
        }
    }
    // Pool size from the matching lemma: floor((1 - delta m) / eps), at least 1.
    let lemma_pool = {
        let one = Rational::from_integer(1);
        let dm = params.delta * Rational::from_integer(m as u64);
        if dm >= one || *params.eps.numer() == 0 {
            1
        } else {
            ((one - dm) / params.eps).floor().to_integer().max(1) as usize
        }
    };

    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); targets.len()];
    let mut stats: Vec<PoolStats> = vec![
        PoolStats {
            vertex: 0,
            tree_vertex: t,
            targets: 0,
            eligible: 0,
        };
        targets.len()
    ];
    for (&v, (hs, cands)) in &by_vertex {
        let eligible: Vec<Vec<usize>> = hs
            .iter()
            .map(|&h| {
                let hv = targets[h].vertex_set();
                cands
                    .iter()
                    .copied()
                    .filter(|&c| {
                        iso[c]
                            .vertex_set()
                            .iter()
                            .all(|u| *u == v || hv.binary_search(u).is_err())
                    })
                    .collect()
            })
            .collect();
        let mut union: Vec<usize> = eligible.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        let local = |h: usize| PoolStats {
            vertex: v,
            tree_vertex: t,
            targets: hs.len(),
            eligible: eligible[h].len(),
        };
        let mut owner: Vec<Option<usize>> = vec![None; iso.len()];
        for h in 0..hs.len() {
            let mut seen = vec![false; iso.len()];
            if !augment(h, &eligible, &mut seen, &mut owner) {
                let mut s = local(h);
                s.eligible = union.len();
                return Err(MatchingFailure::NoPartner(s));
            }
        }
        let mut taken = vec![false; iso.len()];
        let mut local_pools: Vec<Vec<usize>> = vec![Vec::new(); hs.len()];
        for (c, o) in owner.iter().enumerate() {
            if let Some(h) = *o {
                local_pools[h].push(c);
                taken[c] = true;
            }
        }
        let size = lemma_pool.min(union.len() / hs.len()).max(1);
        loop {
            let mut grew = false;
            for h in 0..hs.len() {
                if local_pools[h].len() >= size {
                    continue;
                }
                if let Some(&c) = eligible[h].iter().find(|&&c| !taken[c]) {
                    taken[c] = true;
                    local_pools[h].push(c);
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for (h, pool) in local_pools.into_iter().enumerate() {
            stats[hs[h]] = local(h);
            pools[hs[h]] = pool;
        }
    }

    let mut rng = seed::rng(master_seed, &[seed::domain::MATCHING, t as u64]);
    let mut choice: Vec<usize> = pools
        .iter()
        .map(|p| p[rng.gen_range(0..p.len())])
        .collect();
    let mut resamples = 0;

    if let Some(relax) = params.relax {
        let bound = relax * params.eps;
        let d_iso = DegreeTable::new(vertex_count, m, iso);
        let tv = m + 1;
        let mut count = vec![0usize; vertex_count * tv];
        for &c in &choice {
            for (tt, &u) in iso[c].images().iter().enumerate() {
                count[u * tv + tt] += 1;
            }
        }
        let over = |count: &[usize], u: VertexId, tt: TreeVertex| -> bool {
            let n = count[u * tv + tt] as u128;
            n * (*bound.denom() as u128) > (*bound.numer() as u128) * (d_iso.get(u, tt) as u128)
        };
        let mut cursor = 0usize;
        loop {
            let slots = vertex_count * tv;
            let violated = (0..slots)
                .map(|k| (cursor + k) % slots)
                .find(|&s| count[s] > 0 && over(&count, s / tv, s % tv));
            let Some(slot) = violated else { break };
            cursor = slot + 1;
            let (u, tt) = (slot / tv, slot % tv);
            let involved: Vec<usize> = (0..choice.len())
                .filter(|&h| iso[choice[h]].image(tt) == u)
                .collect();
            let movable = involved.iter().any(|&h| pools[h].len() > 1);
            if !movable || resamples + involved.len() > params.budget {
                let h = involved[0];
                return Err(MatchingFailure::DegreeBound {
                    vertex: u,
                    tree_vertex: tt,
                    count: count[slot],
                    d_iso: d_iso.get(u, tt),
                    resamples,
                    pools: stats[h].clone(),
                });
            }
            for h in involved {
                for (t2, &w) in iso[choice[h]].images().iter().enumerate() {
                    count[w * tv + t2] -= 1;
                }
                choice[h] = pools[h][rng.gen_range(0..pools[h].len())];
                for (t2, &w) in iso[choice[h]].images().iter().enumerate() {
                    count[w * tv + t2] += 1;
                }
                resamples += 1;
            }
        }
    }

    Ok(SwitchPlan {
        tree_vertex: t,
        pairs: choice
            .iter()
            .enumerate()
            .map(|(h, &c)| SwitchPair {
                target: h,
                partner: c,
                shared: targets[h].image(t),
            })
            .collect(),
        resamples,
    })
}

/// What happened at one stage.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StageLog {
    pub stage: usize,
    pub attempts: usize,
    pub bad_before: usize,
    pub switches: usize,
    pub resamples: usize,
    pub h_after: usize,
    pub iso_after: usize,
    #[serde(serialize_with = "crate::pseudo::ser_ratio")]
    pub conf_iso: Rational,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StageError {
    #[error("copy {copy} of H is only {goodness}-good entering stage {stage}")]
    Precondition {
        stage: usize,
        copy: usize,
        goodness: usize,
    },
    #[error(transparent)]
    Matching(#[from] MatchingFailure),
    #[error(transparent)]
    Switch(#[from] SwitchError),
    #[error("copy {copy} is not {stage}-good after switching")]
    Postcondition { stage: usize, copy: usize },
}

/// Runs stage `i` once: every member of `H` must be `(i-1)`-good, and
/// every member is `i`-good afterwards.
#[allow(clippy::too_many_arguments)]
pub fn repair_stage(
    tree: &LabelledTree,
    h: &[PseudoCopy],
    iso: &[PseudoCopy],
    i: usize,
    schedule: &RepairSchedule,
    vertex_count: usize,
    stage_seed: u64,
) -> Result<(Vec<PseudoCopy>, Vec<PseudoCopy>, StageLog), StageError> {
    let m = tree.edge_count();
    for (k, c) in h.iter().enumerate() {
        if c.goodness() + 1 < i {
            return Err(StageError::Precondition {
                stage: i,
                copy: k,
                goodness: c.goodness(),
            });
        }
    }
    let bad: Vec<usize> = (0..h.len()).filter(|&k| !h[k].is_good(i)).collect();
    let chosen: Vec<usize> = match schedule.scope {
        SwitchScope::BadOnly => bad.clone(),
        SwitchScope::All => (0..h.len()).collect(),
    };
    let targets: Vec<PseudoCopy> = chosen.iter().map(|&k| h[k].clone()).collect();
    let params = MatchingParams {
        eps: schedule.eps(i),
        delta: schedule.delta,
        relax: schedule.relax,
        budget: schedule.resample_budget,
    };
    let plan = if targets.is_empty() {
        SwitchPlan {
            tree_vertex: tree.parent(i),
            pairs: Vec::new(),
            resamples: 0,
        }
    } else {
        build_matching(&targets, iso, tree.parent(i), &params, vertex_count, stage_seed)?
    };

    let mut is_target = vec![false; h.len()];
    for &k in &chosen {
        is_target[k] = true;
    }
    let mut new_h: Vec<PseudoCopy> = (0..h.len())
        .filter(|&k| !is_target[k])
        .map(|k| h[k].clone())
        .collect();
    let mut used = vec![false; iso.len()];
    for pair in &plan.pairs {
        let (a, b) = switch(tree, &targets[pair.target], &iso[pair.partner], i)?;
        used[pair.partner] = true;
        new_h.push(a);
        new_h.push(b);
    }
    let mut new_iso: Vec<PseudoCopy> = (0..iso.len())
        .filter(|&k| !used[k])
        .map(|k| iso[k].clone())
        .collect();
    if schedule.reclassify {
        let (keep, done): (Vec<_>, Vec<_>) = new_h.into_iter().partition(|c| c.goodness() < m);
        new_h = keep;
        new_iso.extend(done);
    }
    if let Some(k) = new_h.iter().position(|c| !c.is_good(i)) {
        return Err(StageError::Postcondition { stage: i, copy: k });
    }
    let log = StageLog {
        stage: i,
        attempts: 1,
        bad_before: bad.len(),
        switches: plan.pairs.len(),
        resamples: plan.resamples,
        h_after: new_h.len(),
        iso_after: new_iso.len(),
        conf_iso: ConflictTable::new(m, &new_iso).global(),
    };
    Ok((new_h, new_iso, log))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FailureReport {
    pub stage: usize,
    pub reason: String,
    pub pools: Option<PoolStats>,
    pub seeds_tried: Vec<u64>,
    pub stages: Vec<StageLog>,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepairSuccess {
    pub decomposition: PseudoDecomposition,
    pub stages: Vec<StageLog>,
}

/// Runs stages `4..=m` (every pseudo-copy in a simple bipartite host is
/// already 3-good), reseeding a failing stage up to `stage_retries` times,
/// and verifies the result.
pub fn repair_all(
    g: &Graph,
    tree: &LabelledTree,
    p: &PseudoDecomposition,
    schedule: &RepairSchedule,
    master_seed: u64,
) -> Result<RepairSuccess, Box<FailureReport>> {
    let m = tree.edge_count();
    let n = g.vertex_count();
    let (mut h, mut iso) = p.split();
    let degrees = DegreeTable::new(n, m, &p.copies);
    let mut stages = Vec::new();
    for i in 4..=m {
        let mut seeds = Vec::new();
        let mut last: Option<StageError> = None;
        let mut done = None;
        for attempt in 0..=schedule.stage_retries {
            let s = seed::derive(master_seed, &[seed::domain::STAGE_RETRY, i as u64, attempt as u64]);
            seeds.push(s);
            match repair_stage(tree, &h, &iso, i, schedule, n, s) {
                Ok(out) => {
                    done = Some(out);
                    break;
                }
                Err(e @ StageError::Matching(_)) => {
                    log::debug!("stage {i} attempt {attempt}: {e}");
                    last = Some(e);
                }
                Err(e) => {
                    last = Some(e);
                    break;
                }
            }
        }
        let Some((nh, ni, mut log)) = done else {
            let err = last.expect("a failed stage records its error");
            let pools = match &err {
                StageError::Matching(MatchingFailure::NoPartner(s)) => Some(s.clone()),
                StageError::Matching(MatchingFailure::DegreeBound { pools, .. }) => Some(pools.clone()),
                _ => None,
            };
            return Err(Box::new(FailureReport {
                stage: i,
                reason: err.to_string(),
                pools,
                seeds_tried: seeds,
                stages,
                violations: Vec::new(),
            }));
        };
        log.attempts = seeds.len();
        h = nh;
        iso = ni;
        let now = DegreeTable::new(n, m, h.iter().chain(&iso));
        if now != degrees {
            return Err(Box::new(FailureReport {
                stage: i,
                reason: "degrees d(v|t) changed".into(),
                pools: None,
                seeds_tried: seeds,
                stages,
                violations: Vec::new(),
            }));
        }
        log::info!(
            "stage {i}: {} bad, {} switches, |H| = {}, |I| = {}",
            log.bad_before,
            log.switches,
            log.h_after,
            log.iso_after
        );
        stages.push(log);
    }
    iso.extend(h);
    let violations = verify_decomposition(g, tree, &iso, None);
    if !violations.is_empty() {
        return Err(Box::new(FailureReport {
            stage: m,
            reason: format!("{} violations in the final decomposition", violations.len()),
            pools: None,
            seeds_tried: Vec::new(),
            stages,
            violations,
        }));
    }
    Ok(RepairSuccess {
        decomposition: PseudoDecomposition::new(iso),
        stages,
    })
}

/// `eps_i` as a float, for reports.
pub fn eps_f64(r: Rational) -> f64 {
    r.numer().to_f64().unwrap_or(0.0) / r.denom().to_f64().unwrap_or(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path4() -> LabelledTree {
        LabelledTree::from_parents(&[0, 1, 2, 3]).unwrap()
    }

    #[test]
    fn switch_on_a_path() {
        // H = (1,2,3,4,1), F = (7,8,3,9,10) share v_2 = 3; switching at e_3.
        let t = path4();
        let h = PseudoCopy::new(vec![1, 2, 3, 4, 1], vec![10, 11, 12, 13]);
        let f = PseudoCopy::new(vec![7, 8, 3, 9, 10], vec![20, 21, 22, 23]);
        let (a, b) = switch(&t, &h, &f, 3).unwrap();
        assert_eq!(a.images(), &[7, 8, 3, 4, 1]);
        assert_eq!(a.edges(), &[20, 21, 12, 13]);
        assert_eq!(b.images(), &[1, 2, 3, 9, 10]);
        assert_eq!(b.edges(), &[10, 11, 22, 23]);
        assert!(a.is_isomorphic() && b.is_isomorphic());
        let (back_f, back_h) = switch(&t, &b, &a, 3).unwrap();
        assert_eq!((back_f, back_h), (f, h));
    }

    #[test]
    fn switch_requires_shared_parent_image() {
        let t = path4();
        let h = PseudoCopy::new(vec![1, 2, 3, 4, 1], vec![0, 1, 2, 3]);
        let f = PseudoCopy::new(vec![7, 8, 5, 9, 10], vec![4, 5, 6, 7]);
        assert_eq!(
            switch(&t, &h, &f, 3),
            Err(SwitchError::SharedVertexMismatch {
                tree_vertex: 2,
                left: 3,
                right: 5
            })
        );
        assert!(matches!(switch(&t, &h, &f, 5), Err(SwitchError::IndexOutOfRange(5, 4))));
    }

    #[test]
    fn schedule_multiplies_by_five() {
        for m in 1..=16 {
            let s = RepairSchedule::standard(m);
            assert_eq!(s.eps(m), Rational::new(1, 15 * m as u64));
            for i in 2..=m {
                assert_eq!(s.eps(i), s.eps(i - 1) * Rational::from_integer(5));
            }
        }
    }

    #[test]
    fn matching_respects_disjointness() {
        let t = path4();
        // Target meets candidate 0 in vertex 2 besides v = 3.
        let h = vec![PseudoCopy::new(vec![1, 2, 3, 4, 1], vec![0, 1, 2, 3])];
        let iso = vec![
            PseudoCopy::new(vec![2, 8, 3, 9, 10], vec![4, 5, 6, 7]),
            PseudoCopy::new(vec![11, 12, 3, 13, 14], vec![8, 9, 10, 11]),
        ];
        let params = MatchingParams {
            eps: Rational::new(1, 2),
            delta: Rational::new(1, 1),
            relax: None,
            budget: 100,
        };
        let plan = build_matching(&h, &iso, 2, &params, 20, 0).unwrap();
        assert_eq!(plan.pairs, vec![SwitchPair { target: 0, partner: 1, shared: 3 }]);
        let only_bad = &iso[..1];
        assert!(matches!(
            build_matching(&h, only_bad, 2, &params, 20, 0),
            Err(MatchingFailure::NoPartner(PoolStats { vertex: 3, targets: 1, eligible: 0, .. }))
        ));
        let _ = t;
    }
}
