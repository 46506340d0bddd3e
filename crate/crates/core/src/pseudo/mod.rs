//! Pseudo-copies of the pattern tree and decompositions into them.
//!
//! A pseudo-copy is the image of `T` under a homomorphism into the host
//! graph that is a bijection on edges: tree vertices may be identified,
//! tree edges may not. Pseudo-decompositions are built from an equitable
//! colouring by grouping the edges at every vertex into rainbow stars and
//! gluing stars that share an edge.

mod assemble;
mod blades;
mod metrics;

pub use assemble::{assemble, Star};
pub use blades::{
    choose_c, draw_stars, make_blades, make_fans, stars_from_permutations, Blade, BladeMode, Fan,
};
pub use metrics::{
    check_lemma_dense, conflict, conflict_global, ConflictTable, DegreeTable, LemmaDenseReport,
    PairStat,
};
pub(crate) use metrics::ser_ratio;

use serde::Serialize;
use thiserror::Error;

use crate::colouring::{compatible, verify_equitable, Colouring, EquitableError, EquitableViolation};
use crate::graph::{EdgeId, Graph, VertexId};
use crate::seed;
use crate::tree::{LabelledTree, TreeEdge, TreeVertex};

pub type Rational = num_rational::Ratio<u64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PseudoError {
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("colour {colour} at vertex {vertex} has degree {degree}, too small for blades of size {c}")]
    DegreeTooSmall {
        vertex: VertexId,
        colour: TreeEdge,
        degree: usize,
        c: usize,
    },
    #[error("blade size profiles differ across S(t_{tree_vertex}) at vertex {vertex}")]
    ProfileMismatch {
        vertex: VertexId,
        tree_vertex: TreeVertex,
    },
    #[error("star {star} is malformed: {reason}")]
    MalformedStar { star: usize, reason: String },
    #[error("edge {edge} lies in {count} stars; every edge needs one star at each endpoint")]
    StarCoverage { edge: EdgeId, count: usize },
    #[error("star component at star {star} does not have the shape of T: {reason}")]
    MalformedComponent { star: usize, reason: String },
    #[error("colouring is not equitable ({} violations)", .0.len())]
    NotEquitable(Vec<EquitableViolation>),
    #[error("edge {0} is not coloured")]
    UncolouredEdge(EdgeId),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
}

/// The image of `T` in the host: `image[j]` is the host vertex `v_j` of
/// `t_j`, and `edges[i - 1]` the host edge carrying `e_i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct PseudoCopy {
    image: Vec<VertexId>,
    edges: Vec<EdgeId>,
}

impl PseudoCopy {
    pub fn new(image: Vec<VertexId>, edges: Vec<EdgeId>) -> PseudoCopy {
        assert_eq!(image.len(), edges.len() + 1, "a copy of T has m + 1 images and m edges");
        PseudoCopy { image, edges }
    }

    pub fn tree_size(&self) -> usize {
        self.edges.len()
    }

    /// `v_j`, the image of `t_j`.
    pub fn image(&self, t: TreeVertex) -> VertexId {
        self.image[t]
    }

    pub fn images(&self) -> &[VertexId] {
        &self.image
    }

    /// The host edge carrying `e_i`, for `i` in `1..=m`.
    pub fn edge(&self, i: TreeEdge) -> EdgeId {
        self.edges[i - 1]
    }

    /// Host edges in tree-edge order `e_1..e_m`.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    /// Distinct host vertices, ascending.
    pub fn vertex_set(&self) -> Vec<VertexId> {
        let mut vs = self.image.clone();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.image.contains(&v)
    }

    /// The largest `i` such that `v_0..v_i` are pairwise distinct; `m`
    /// exactly when the copy is isomorphic to `T`.
    pub fn goodness(&self) -> usize {
        for i in 1..self.image.len() {
            if self.image[..i].contains(&self.image[i]) {
                return i - 1;
            }
        }
        self.edges.len()
    }

    pub fn is_good(&self, i: usize) -> bool {
        self.goodness() >= i
    }

    pub fn is_isomorphic(&self) -> bool {
        self.goodness() == self.edges.len()
    }
}

/// A partition of the host edges into pseudo-copies.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PseudoDecomposition {
    pub copies: Vec<PseudoCopy>,
}

impl PseudoDecomposition {
    pub fn new(copies: Vec<PseudoCopy>) -> Self {
        PseudoDecomposition { copies }
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    /// Per copy: whether its images are pairwise distinct.
    pub fn iso_flags(&self) -> Vec<bool> {
        self.copies.iter().map(PseudoCopy::is_isomorphic).collect()
    }

    /// Splits into the non-isomorphic collection `H` and the isomorphic
    /// collection `I`, preserving order.
    pub fn split(&self) -> (Vec<PseudoCopy>, Vec<PseudoCopy>) {
        self.copies.iter().cloned().partition(|c| !c.is_isomorphic())
    }

    pub fn to_text(&self, g: &Graph) -> String {
        write_copies(g, &self.copies)
    }
}

/// Serializes copies as line-oriented records:
///
/// ```text
/// copy 0
/// image 0:a1 1:b1 2:b2
/// edges 1:0 2:1
/// ```
///
/// `j:vertex` pairs give the image of `t_j`; `i:edge` pairs give the host
/// edge id (input line order of the graph file) carrying `e_i`.
pub fn write_copies(g: &Graph, copies: &[PseudoCopy]) -> String {
    let mut out = String::new();
    for (k, copy) in copies.iter().enumerate() {
        out.push_str(&format!("copy {k}\nimage"));
        for (j, &v) in copy.images().iter().enumerate() {
            out.push_str(&format!(" {j}:{}", g.name(v)));
        }
        out.push_str("\nedges");
        for (i, &e) in copy.edges().iter().enumerate() {
            out.push_str(&format!(" {}:{e}", i + 1));
        }
        out.push('\n');
    }
    out
}

/// Parses the format written by [`write_copies`]. Only the record layout
/// is checked here; validity against the host is the verifier's job.
pub fn parse_copies(g: &Graph, m: usize, text: &str) -> Result<Vec<PseudoCopy>, PseudoError> {
    let mut copies = Vec::new();
    let mut image: Option<Vec<VertexId>> = None;
    let mut open = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| PseudoError::Format {
            line: lineno + 1,
            message,
        };
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("copy") => {
                if open {
                    return Err(err("previous copy has no edges record".into()));
                }
                open = true;
                image = None;
            }
            Some("image") if open => {
                let mut im = vec![usize::MAX; m + 1];
                for tok in tokens {
                    let (j, name) = tok
                        .split_once(':')
                        .ok_or_else(|| err(format!("expected j:vertex, found {tok}")))?;
                    let j: usize = j.parse().map_err(|_| err(format!("bad tree vertex {j}")))?;
                    if j > m {
                        return Err(err(format!("tree vertex {j} exceeds {m}")));
                    }
                    im[j] = g
                        .vertex(name)
                        .ok_or_else(|| err(format!("unknown vertex {name}")))?;
                }
                if im.contains(&usize::MAX) {
                    return Err(err("image record does not cover every tree vertex".into()));
                }
                image = Some(im);
            }
            Some("edges") if open => {
                let mut es = vec![usize::MAX; m];
                for tok in tokens {
                    let (i, e) = tok
                        .split_once(':')
                        .ok_or_else(|| err(format!("expected i:edge, found {tok}")))?;
                    let i: usize = i.parse().map_err(|_| err(format!("bad tree edge {i}")))?;
                    let e: usize = e.parse().map_err(|_| err(format!("bad edge id {e}")))?;
                    if i == 0 || i > m {
                        return Err(err(format!("tree edge {i} outside 1..={m}")));
                    }
                    if e >= g.edge_count() {
                        return Err(err(format!("edge id {e} out of range")));
                    }
                    es[i - 1] = e;
                }
                if es.contains(&usize::MAX) {
                    return Err(err("edges record does not cover every tree edge".into()));
                }
                let im = image
                    .take()
                    .ok_or_else(|| err("edges record before image record".into()))?;
                copies.push(PseudoCopy::new(im, es));
                open = false;
            }
            Some(other) => return Err(err(format!("unexpected record {other}"))),
            None => {}
        }
    }
    if open {
        return Err(PseudoError::Format {
            line: text.lines().count(),
            message: "unterminated copy record".into(),
        });
    }
    Ok(copies)
}

/// Builds a pseudo-decomposition from an equitable colouring: blades, fans
/// and random stars at every compatible `(v, t)`, then assembly. Each
/// `(v, t)` draws from its own stream derived from `seed`.
pub fn build_pseudo_decomposition(
    g: &Graph,
    tree: &LabelledTree,
    col: &Colouring,
    mode: BladeMode,
    master_seed: u64,
) -> Result<PseudoDecomposition, PseudoError> {
    match verify_equitable(g, tree, col) {
        Ok(()) => {}
        Err(EquitableError::UncolouredEdge(e)) => return Err(PseudoError::UncolouredEdge(e)),
        Err(EquitableError::Violations(v)) => return Err(PseudoError::NotEquitable(v)),
    }
    let mut stars = Vec::new();
    for v in g.vertices() {
        for t in 0..tree.vertex_count() {
            if !compatible(g, v, tree, t) {
                continue;
            }
            let mut rng = seed::rng(master_seed, &[seed::domain::STARS, v as u64, t as u64]);
            let blades = tree
                .incident(t)
                .iter()
                .map(|&c| make_blades(g, col, v, c, mode, &mut rng))
                .collect::<Result<Vec<_>, _>>()?;
            if blades.iter().all(Vec::is_empty) {
                continue;
            }
            for fan in make_fans(v, t, blades, &mut rng)? {
                stars.extend(draw_stars(&fan, &mut rng));
            }
        }
    }
    assemble(g, tree, col, &stars)
}
