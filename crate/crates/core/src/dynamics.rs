//! Points of the inverse limit at finite depth, the metric, and the shift
//! dynamics between cylinders.

use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::graph::{Graph, VertexId};
use crate::tower::CoverTower;

/// A consistent prefix `(x_0, ..., x_d)` of a point of the inverse limit,
/// one vertex per level. Determined by its top vertex.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Thread {
    prefix: Vec<VertexId>,
}

impl Thread {
    /// The unique thread of depth `depth` ending at level-`depth` vertex `top`.
    pub fn from_top(tower: &CoverTower, depth: usize, top: VertexId) -> Result<Self> {
        if depth > tower.height() {
            return Err(Error::Domain(format!(
                "depth {depth} exceeds tower height {}",
                tower.height()
            )));
        }
        if !tower.level(depth).graph.contains_vertex(top) {
            return Err(Error::Domain(format!("vertex {top} not on level {depth}")));
        }
        let mut prefix = vec![0; depth + 1];
        prefix[depth] = top;
        for i in (1..=depth).rev() {
            prefix[i - 1] = tower.hom(i).map[&prefix[i]];
        }
        Ok(Self { prefix })
    }

    /// Checks consistency of an explicit prefix.
    pub fn new(tower: &CoverTower, prefix: Vec<VertexId>) -> Result<Self> {
        let Some(&top) = prefix.last() else {
            return Err(Error::Domain("empty prefix".into()));
        };
        let t = Self::from_top(tower, prefix.len() - 1, top)?;
        if t.prefix != prefix {
            return Err(Error::Domain("prefix is not consistent with the tower maps".into()));
        }
        Ok(t)
    }

    /// The thread through the special vertex of every level.
    pub fn special(tower: &CoverTower, depth: usize) -> Result<Self> {
        Self::from_top(tower, depth, tower.special(depth.min(tower.height())))
    }

    pub fn depth(&self) -> usize {
        self.prefix.len() - 1
    }

    pub fn prefix(&self) -> &[VertexId] {
        &self.prefix
    }

    pub fn top(&self) -> VertexId {
        *self.prefix.last().unwrap()
    }

    pub fn at(&self, level: usize) -> VertexId {
        self.prefix[level]
    }

    pub fn truncate(&self, depth: usize) -> Self {
        Self { prefix: self.prefix[..=depth.min(self.depth())].to_vec() }
    }

    /// Whether `self` refines (lies inside the cylinder of) `other`.
    pub fn starts_with(&self, other: &Thread) -> bool {
        self.prefix.starts_with(&other.prefix)
    }

    /// First level where the prefixes differ, up to the shorter depth.
    pub fn first_difference(&self, other: &Thread) -> Option<usize> {
        self.prefix.iter().zip(&other.prefix).position(|(a, b)| a != b)
    }
}

/// All depth-`depth` threads, ordered by top vertex id.
pub fn enumerate_threads(tower: &CoverTower, depth: usize) -> Result<Vec<Thread>> {
    if depth > tower.height() {
        return Err(Error::Domain(format!(
            "depth {depth} exceeds tower height {}",
            tower.height()
        )));
    }
    tower
        .level(depth)
        .graph
        .vertices()
        .iter()
        .map(|&v| Thread::from_top(tower, depth, v))
        .collect()
}

/// `2^{-k}` for the first disagreeing level `k`, 0 for equal threads.
pub fn metric(x: &Thread, y: &Thread) -> Result<ExactScalar> {
    if x.depth() != y.depth() {
        return Err(Error::Domain(format!(
            "threads of depth {} and {}",
            x.depth(),
            y.depth()
        )));
    }
    Ok(match x.first_difference(y) {
        None => ExactScalar::zero(),
        Some(k) => ExactScalar::pow2_neg(k as u64),
    })
}

fn check_thread(tower: &CoverTower, x: &Thread) -> Result<()> {
    if x.depth() > tower.height() {
        return Err(Error::Domain("thread deeper than tower".into()));
    }
    Ok(())
}

/// The image of a depth-`d+1` thread under the shift, at depth `d`.
pub fn successor(tower: &CoverTower, x: &Thread) -> Result<Thread> {
    check_thread(tower, x)?;
    let d1 = x.depth();
    if d1 == 0 {
        return Err(Error::Domain("successor needs depth at least 1".into()));
    }
    let out = tower.level(d1).graph.successors(x.top());
    let &u = out
        .first()
        .ok_or_else(|| Error::Contract(format!("vertex {} has no out-neighbour", x.top())))?;
    Thread::from_top(tower, d1 - 1, tower.hom(d1).map[&u])
}

/// The preimage of a depth-`d+1` thread under the shift, at depth `d`.
/// Only defined on towers whose maps are all bidirectional.
pub fn predecessor(tower: &CoverTower, x: &Thread) -> Result<Thread> {
    check_thread(tower, x)?;
    if !tower.is_bd() {
        return Err(Error::Unsupported(
            "backward dynamics needs bidirectional maps at every level".into(),
        ));
    }
    let d1 = x.depth();
    if d1 == 0 {
        return Err(Error::Domain("predecessor needs depth at least 1".into()));
    }
    let inc = tower.level(d1).graph.predecessors(x.top());
    let &u = inc
        .first()
        .ok_or_else(|| Error::Contract(format!("vertex {} has no in-neighbour", x.top())))?;
    Thread::from_top(tower, d1 - 1, tower.hom(d1).map[&u])
}

/// One forward step that keeps the depth when the top vertex has a single
/// out-neighbour and otherwise erodes it by one like [`successor`].
pub fn step_forward(tower: &CoverTower, x: &Thread) -> Result<Thread> {
    check_thread(tower, x)?;
    let d = x.depth();
    match tower.level(d).graph.successors(x.top()) {
        [u] => Thread::from_top(tower, d, *u),
        _ => successor(tower, x),
    }
}

/// Backward counterpart of [`step_forward`].
pub fn step_backward(tower: &CoverTower, x: &Thread) -> Result<Thread> {
    check_thread(tower, x)?;
    let d = x.depth();
    match tower.level(d).graph.predecessors(x.top()) {
        [u] => Thread::from_top(tower, d, *u),
        _ => predecessor(tower, x),
    }
}

/// The finite-depth shift: arrows are `(trunc_d(x), successor(x))` over all
/// depth-`d+1` threads `x`. Nodes are the depth-`d` threads by top vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderGraph {
    pub depth: usize,
    pub nodes: Vec<Thread>,
    pub arrows: BTreeSet<(VertexId, VertexId)>,
}

impl CylinderGraph {
    pub fn build(tower: &CoverTower, depth: usize) -> Result<Self> {
        if depth >= tower.height() {
            return Err(Error::Depth(format!(
                "cylinder graph at depth {depth} needs level {}",
                depth + 1
            )));
        }
        let nodes = enumerate_threads(tower, depth)?;
        let upper = enumerate_threads(tower, depth + 1)?;
        let arrows = upper
            .par_iter()
            .map(|x| Ok((x.at(depth), successor(tower, x)?.top())))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(Self { depth, nodes, arrows })
    }

    /// The arrows as a graph on level-`depth` vertex ids.
    pub fn to_graph(&self) -> Result<Graph> {
        Graph::new(self.nodes.iter().map(Thread::top), self.arrows.iter().copied())
    }

    pub fn is_strongly_connected(&self) -> bool {
        let Ok(g) = self.to_graph() else { return false };
        let Some(&start) = g.vertices().first() else { return true };
        let reach = |fwd: bool| {
            let mut seen = BTreeSet::from([start]);
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                let next = if fwd { g.successors(v) } else { g.predecessors(v) };
                for &w in next {
                    if seen.insert(w) {
                        queue.push_back(w);
                    }
                }
            }
            seen.len()
        };
        reach(true) == g.vertex_count() && reach(false) == g.vertex_count()
    }
}

/// Strong connectivity of the depth-`depth` cylinder graph.
pub fn minimality_bruteforce(tower: &CoverTower, depth: usize) -> Result<bool> {
    if depth == 0 {
        return Ok(true);
    }
    Ok(CylinderGraph::build(tower, depth)?.is_strongly_connected())
}
