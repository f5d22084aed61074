//! Return vertices `W'_m`, `W_m` and the monotone vertex indexing of a level.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexId;
use crate::tower::CoverTower;

/// `W'_m` and `W_m` for one level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnVertices {
    pub level: usize,
    pub w_prime: BTreeSet<VertexId>,
    pub w: BTreeSet<VertexId>,
}

/// The bijection `V_m -> {1..s_m}` with `W_m` first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexIndexing {
    pub level: usize,
    pub w_prime: BTreeSet<VertexId>,
    pub w: BTreeSet<VertexId>,
    /// `order[i-1]` is `w^m_i`.
    order: Vec<VertexId>,
    index: BTreeMap<VertexId, usize>,
}

impl VertexIndexing {
    /// 1-based index of a level vertex.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.index.get(&v).copied()
    }

    /// `w^m_i`, 1-based.
    pub fn vertex(&self, i: usize) -> Option<VertexId> {
        i.checked_sub(1).and_then(|k| self.order.get(k)).copied()
    }

    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn in_w(&self, v: VertexId) -> bool {
        self.w.contains(&v)
    }

    /// Re-checks the indexing invariants against the tower: `W` inside `W'`,
    /// `φ_m(W)` special, every cycle meets `W`, `W` indexed first, and
    /// indices increase along every edge that does not enter `W`.
    pub fn verify(&self, tower: &CoverTower) -> Result<()> {
        let m = self.level;
        let lvl = tower.level(m);
        let fail = |msg: String| Err(Error::Construction(format!("level {m}: {msg}")));
        if !self.w.is_subset(&self.w_prime) {
            return fail("W is not contained in W'".into());
        }
        let lower_special = tower.special(m - 1);
        if let Some(w) = self.w.iter().find(|w| tower.hom(m).map[w] != lower_special) {
            return fail(format!("W vertex {w} does not map to the lower special vertex"));
        }
        if let Some(j) = lvl.cycles.iter().position(|c| !c.iter().any(|v| self.w.contains(v))) {
            return fail(format!("cycle {} contains no W vertex", j + 1));
        }
        let mut sorted = self.order.clone();
        sorted.sort_unstable();
        if sorted != lvl.graph.vertices() {
            return fail("indexing is not a bijection onto the level".into());
        }
        let nw = self.w.len();
        if self.order[..nw].iter().any(|v| !self.w.contains(v)) {
            return fail("W vertices do not occupy the smallest indices".into());
        }
        for &(u, v) in lvl.graph.edges() {
            if !self.w.contains(&v) && self.index[&u] >= self.index[&v] {
                return fail(format!("edge ({u}, {v}) outside W decreases the index"));
            }
        }
        Ok(())
    }
}

/// `W'_m` (the vertex at position `l(m-1, 1)` of every cycle) and `W_m`
/// (those with a path to the special vertex avoiding the rest of `W'_m`),
/// with the covering and image properties verified.
pub fn special_return_vertices(tower: &CoverTower, m: usize) -> Result<ReturnVertices> {
    if m == 0 || m > tower.height() {
        return Err(Error::Domain(format!("no return vertices at level {m}")));
    }
    let lvl = tower.level(m);
    let pos = tower.level(m - 1).cycle_len(1);
    let mut w_prime = BTreeSet::new();
    for (j, c) in lvl.cycles.iter().enumerate() {
        if pos + 1 >= c.len() {
            return Err(Error::Degenerate(format!(
                "level {m}: position {pos} is the end of cycle {} (length {})",
                j + 1,
                c.len() - 1
            )));
        }
        w_prime.insert(c[pos]);
    }
    let g = &lvl.graph;
    let w: BTreeSet<VertexId> = w_prime
        .iter()
        .copied()
        .filter(|&start| {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in g.successors(u) {
                    if v == lvl.special {
                        return true;
                    }
                    if !w_prime.contains(&v) && seen.insert(v) {
                        queue.push_back(v);
                    }
                }
            }
            false
        })
        .collect();
    let lower_special = tower.special(m - 1);
    if let Some(v) = w.iter().find(|v| tower.hom(m).map[v] != lower_special) {
        return Err(Error::Construction(format!(
            "level {m}: return vertex {v} does not map to the lower special vertex"
        )));
    }
    if let Some(j) = lvl.cycles.iter().position(|c| !c.iter().any(|v| w.contains(v))) {
        return Err(Error::Construction(format!(
            "level {m}: cycle {} meets no selected return vertex",
            j + 1
        )));
    }
    Ok(ReturnVertices { level: m, w_prime, w })
}

/// Topological order of the level graph with the in-edges of `W_m` removed,
/// `W_m` first and ties broken by vertex id.
pub fn index_vertices(tower: &CoverTower, m: usize) -> Result<VertexIndexing> {
    let rv = special_return_vertices(tower, m)?;
    let g = &tower.level(m).graph;
    let mut indeg: BTreeMap<VertexId, usize> = g.vertices().iter().map(|&v| (v, 0)).collect();
    for &(_, v) in g.edges() {
        if !rv.w.contains(&v) {
            *indeg.get_mut(&v).unwrap() += 1;
        }
    }
    let key = |v: VertexId| Reverse((!rv.w.contains(&v), v));
    let mut heap: BinaryHeap<_> = indeg.iter().filter(|(_, &d)| d == 0).map(|(&v, _)| key(v)).collect();
    let mut order = Vec::with_capacity(g.vertex_count());
    while let Some(Reverse((_, u))) = heap.pop() {
        order.push(u);
        for &v in g.successors(u) {
            if rv.w.contains(&v) {
                continue;
            }
            let d = indeg.get_mut(&v).unwrap();
            *d -= 1;
            if *d == 0 {
                heap.push(key(v));
            }
        }
    }
    if order.len() != g.vertex_count() {
        return Err(Error::Construction(format!(
            "level {m}: graph with W in-edges removed still has a cycle"
        )));
    }
    let index = order.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    let ix = VertexIndexing { level: m, w_prime: rv.w_prime, w: rv.w, order, index };
    ix.verify(tower)?;
    Ok(ix)
}
