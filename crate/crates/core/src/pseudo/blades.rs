//! Blades, fans and random rainbow stars at a single `(v, t)`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::Rng;

use super::{PseudoError, Star};
use crate::colouring::Colouring;
use crate::graph::{EdgeId, Graph, VertexId};
use crate::tree::{TreeEdge, TreeVertex};

/// How colour classes `N_i(v)` are cut into blades.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BladeMode {
    /// One blade per non-empty colour class, hence one fan per `(v, t)`.
    Whole,
    /// Blades of sizes `c` and `c - 1`, exactly `d mod (c - 1)` of size `c`.
    /// With `require_min_degree`, every non-empty class must have more
    /// than `c^2` edges; otherwise only the partition arithmetic
    /// (`d >= c * (d mod (c - 1))`) is required.
    Sized { c: usize, require_min_degree: bool },
}

/// A part of `N_i(v)`, edges sorted by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blade {
    pub vertex: VertexId,
    pub colour: TreeEdge,
    pub edges: Vec<EdgeId>,
}

/// One same-size blade per colour of `S(t)`, in the order of `S(t)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fan {
    pub vertex: VertexId,
    pub tree_vertex: TreeVertex,
    pub blades: Vec<Blade>,
}

impl Fan {
    pub fn blade_size(&self) -> usize {
        self.blades.first().map_or(0, |b| b.edges.len())
    }
}

/// `ceil((10m)^9 (eps * delta)^-3)`, exactly. Requires `0 < eps, delta <= 1`.
pub fn choose_c(m: u64, eps: &BigRational, delta: &BigRational) -> Result<BigUint, PseudoError> {
    for (name, x) in [("eps", eps), ("delta", delta)] {
        if !x.is_positive() || *x > BigRational::one() {
            return Err(PseudoError::ParameterOutOfRange(format!(
                "{name} = {x} must lie in (0, 1]"
            )));
        }
    }
    if m == 0 {
        return Err(PseudoError::ParameterOutOfRange("m must be positive".into()));
    }
    let prod = eps * delta;
    let base = BigInt::from(10u64 * m).pow(9u32);
    let num = base * prod.denom().pow(3u32);
    let den = prod.numer().pow(3u32);
    let c = num.div_ceil(&den);
    Ok(c.to_biguint().expect("positive"))
}

/// Partitions `N_i(v)` into blades. The shuffle comes from `rng`; each
/// blade is then sorted by edge id so permutations act on stable positions.
pub fn make_blades<R: Rng + ?Sized>(
    g: &Graph,
    col: &Colouring,
    v: VertexId,
    colour: TreeEdge,
    mode: BladeMode,
    rng: &mut R,
) -> Result<Vec<Blade>, PseudoError> {
    let mut class: Vec<EdgeId> = g
        .incident(v)
        .iter()
        .map(|&(_, e)| e)
        .filter(|&e| e < col.len() && col.colour(e) == colour)
        .collect();
    let d = class.len();
    if d == 0 {
        return Ok(Vec::new());
    }
    let blade = |edges: Vec<EdgeId>| Blade {
        vertex: v,
        colour,
        edges,
    };
    match mode {
        BladeMode::Whole => Ok(vec![blade(class)]),
        BladeMode::Sized {
            c,
            require_min_degree,
        } => {
            if c < 2 {
                return Err(PseudoError::ParameterOutOfRange(format!(
                    "blade size c = {c} must be at least 2"
                )));
            }
            let too_small = PseudoError::DegreeTooSmall {
                vertex: v,
                colour,
                degree: d,
                c,
            };
            if require_min_degree && (d as u128) <= (c as u128) * (c as u128) {
                return Err(too_small);
            }
            let r = d % (c - 1);
            if d < r * c {
                return Err(too_small);
            }
            class.shuffle(rng);
            let mut blades = Vec::with_capacity(d / (c - 1));
            let mut rest = class.as_slice();
            let mut taken = 0;
            while !rest.is_empty() {
                let size = if taken < r { c } else { c - 1 };
                let (head, tail) = rest.split_at(size);
                let mut edges = head.to_vec();
                edges.sort_unstable();
                blades.push(blade(edges));
                rest = tail;
                taken += 1;
            }
            Ok(blades)
        }
    }
}

/// Groups blades into fans. `blades[k]` holds the blades of the `k`-th
/// colour of `S(t)`. Within each size class the pairing across colours is
/// a uniformly random matching.
pub fn make_fans<R: Rng + ?Sized>(
    v: VertexId,
    t: TreeVertex,
    mut blades: Vec<Vec<Blade>>,
    rng: &mut R,
) -> Result<Vec<Fan>, PseudoError> {
    let profile = |bs: &[Blade]| {
        let mut sizes: Vec<usize> = bs.iter().map(|b| b.edges.len()).collect();
        sizes.sort_unstable();
        sizes
    };
    let Some(first) = blades.first() else {
        return Ok(Vec::new());
    };
    let reference = profile(first);
    if blades.iter().any(|bs| profile(bs) != reference) {
        return Err(PseudoError::ProfileMismatch {
            vertex: v,
            tree_vertex: t,
        });
    }
    let mut sizes = reference.clone();
    sizes.dedup();
    // Stable order: sort each colour's blades by size, shuffle within size.
    for bs in &mut blades {
        bs.sort_by_key(|b| b.edges.len());
        let mut start = 0;
        for &s in &sizes {
            let end = start + bs[start..].iter().take_while(|b| b.edges.len() == s).count();
            bs[start..end].shuffle(rng);
            start = end;
        }
    }
    let count = reference.len();
    let mut columns: Vec<std::vec::IntoIter<Blade>> = blades.into_iter().map(Vec::into_iter).collect();
    let mut fans = Vec::with_capacity(count);
    for _ in 0..count {
        let blades = columns
            .iter_mut()
            .map(|col| col.next().expect("equal profiles"))
            .collect();
        fans.push(Fan {
            vertex: v,
            tree_vertex: t,
            blades,
        });
    }
    Ok(fans)
}

/// Cuts a fan into rainbow stars: star `k` takes, from blade `i`, the edge
/// at position `perms[i][k]`.
pub fn stars_from_permutations(fan: &Fan, perms: &[Vec<usize>]) -> Vec<Star> {
    let s = fan.blade_size();
    assert_eq!(perms.len(), fan.blades.len(), "one permutation per blade");
    (0..s)
        .map(|k| Star {
            centre: fan.vertex,
            tree_vertex: fan.tree_vertex,
            edges: fan
                .blades
                .iter()
                .zip(perms)
                .map(|(blade, perm)| blade.edges[perm[k]])
                .collect(),
        })
        .collect()
}

/// Draws one uniform permutation per blade and cuts the fan into stars.
pub fn draw_stars<R: Rng + ?Sized>(fan: &Fan, rng: &mut R) -> Vec<Star> {
    let s = fan.blade_size();
    let perms: Vec<Vec<usize>> = fan
        .blades
        .iter()
        .map(|_| {
            let mut p: Vec<usize> = (0..s).collect();
            p.shuffle(rng);
            p
        })
        .collect();
    stars_from_permutations(fan, &perms)
}
