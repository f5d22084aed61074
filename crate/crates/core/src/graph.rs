//! Finite directed graphs and graph homomorphisms.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;

/// Upper bound on the number of cycles [`cycles_through`] will enumerate.
pub const CYCLE_LIMIT: usize = 1_000_000;

/// A finite directed graph without parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: Vec<VertexId>,
    edges: BTreeSet<(VertexId, VertexId)>,
    out: BTreeMap<VertexId, Vec<VertexId>>,
    inc: BTreeMap<VertexId, Vec<VertexId>>,
}

impl Graph {
    /// Builds a graph; duplicate vertices and edges are merged. Every edge
    /// endpoint must be a declared vertex.
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        let edges: BTreeSet<(VertexId, VertexId)> = edges.into_iter().collect();
        let mut out: BTreeMap<VertexId, Vec<VertexId>> =
            vertices.iter().map(|&v| (v, Vec::new())).collect();
        let mut inc = out.clone();
        for &(u, v) in &edges {
            if !vertices.contains(&u) || !vertices.contains(&v) {
                return Err(Error::Domain(format!("edge ({u}, {v}) has an undeclared endpoint")));
            }
            out.get_mut(&u).unwrap().push(v);
            inc.get_mut(&v).unwrap().push(u);
        }
        Ok(Self {
            vertices: vertices.into_iter().collect(),
            edges,
            out,
            inc,
        })
    }

    /// The directed cycle `0 -> 1 -> ... -> n-1 -> 0`.
    pub fn directed_cycle(n: usize) -> Self {
        assert!(n >= 1);
        Self::new(0..n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is well formed")
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<(VertexId, VertexId)> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.out.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.edges.contains(&(u, v))
    }

    /// Out-neighbours in increasing id order; empty for unknown vertices.
    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        self.out.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        self.inc.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.vertices.clone(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }

    pub fn from_json(json: &GraphJson) -> Result<Self> {
        Self::new(json.vertices.iter().copied(), json.edges.iter().map(|e| (e[0], e[1])))
    }
}

/// `{"vertices":[ids],"edges":[[u,v],...]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
}

/// A vertex lacking an incoming or outgoing edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityIssue {
    pub vertex: VertexId,
    pub missing_incoming: bool,
    pub missing_outgoing: bool,
}

pub fn validate_edge_surjective(g: &Graph) -> Vec<SurjectivityIssue> {
    g.vertices
        .iter()
        .filter_map(|&v| {
            let missing_incoming = g.predecessors(v).is_empty();
            let missing_outgoing = g.successors(v).is_empty();
            (missing_incoming || missing_outgoing).then_some(SurjectivityIssue {
                vertex: v,
                missing_incoming,
                missing_outgoing,
            })
        })
        .collect()
}

/// A vertex map between two graphs. Construction does not check anything;
/// see [`GraphHom::check_domain`] and [`is_homomorphism`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphHom {
    pub source: Arc<Graph>,
    pub target: Arc<Graph>,
    pub map: BTreeMap<VertexId, VertexId>,
}

impl GraphHom {
    pub fn new(source: Arc<Graph>, target: Arc<Graph>, map: BTreeMap<VertexId, VertexId>) -> Self {
        Self { source, target, map }
    }

    pub fn identity(g: Arc<Graph>) -> Self {
        let map = g.vertices().iter().map(|&v| (v, v)).collect();
        Self::new(g.clone(), g, map)
    }

    /// The wrap of a directed `n*p`-cycle onto a directed `n`-cycle, `i -> i mod n`.
    pub fn cycle_wrap(n: usize, p: usize) -> Self {
        let source = Arc::new(Graph::directed_cycle(n * p));
        let target = Arc::new(Graph::directed_cycle(n));
        let map = (0..n * p).map(|i| (i, i % n)).collect();
        Self::new(source, target, map)
    }

    pub fn apply(&self, v: VertexId) -> Option<VertexId> {
        self.map.get(&v).copied()
    }

    /// The map must be total on the source and land in the target.
    pub fn check_domain(&self) -> Result<()> {
        let domain: Vec<VertexId> = self.map.keys().copied().collect();
        if domain.as_slice() != self.source.vertices() {
            return Err(Error::Domain(
                "homomorphism map domain differs from the source vertex set".into(),
            ));
        }
        if let Some((v, w)) = self.map.iter().find(|(_, w)| !self.target.contains_vertex(**w)) {
            return Err(Error::Domain(format!("vertex {v} maps to {w}, not a target vertex")));
        }
        Ok(())
    }

    /// Images of a vertex sequence.
    pub fn image(&self, vertices: &[VertexId]) -> Result<Vec<VertexId>> {
        vertices
            .iter()
            .map(|&v| self.apply(v).ok_or_else(|| Error::Domain(format!("vertex {v} not mapped"))))
            .collect()
    }
}

pub fn is_homomorphism(h: &GraphHom) -> Result<bool> {
    h.check_domain()?;
    Ok(h.source
        .edges()
        .iter()
        .all(|&(u, v)| h.target.has_edge(h.map[&u], h.map[&v])))
}

/// Out-condition and in-condition of bidirectionality. Requires `h` to be a
/// homomorphism.
pub fn is_bidirectional(h: &GraphHom) -> Result<bool> {
    if !is_homomorphism(h)? {
        return Err(Error::Contract("is_bidirectional requires a homomorphism".into()));
    }
    let uniform = |vs: &[VertexId]| vs.windows(2).all(|w| h.map[&w[0]] == h.map[&w[1]]);
    Ok(h.source
        .vertices()
        .iter()
        .all(|&u| uniform(h.source.successors(u)) && uniform(h.source.predecessors(u))))
}

/// `h2 ∘ h1`, i.e. first `h1` then `h2`.
pub fn compose(h1: &GraphHom, h2: &GraphHom) -> Result<GraphHom> {
    if !Arc::ptr_eq(&h1.target, &h2.source) && *h1.target != *h2.source {
        return Err(Error::Domain("compose: h1 target is not h2 source".into()));
    }
    let map = h1
        .map
        .iter()
        .map(|(&v, &w)| {
            h2.apply(w)
                .map(|x| (v, x))
                .ok_or_else(|| Error::Domain(format!("vertex {w} not mapped by h2")))
        })
        .collect::<Result<_>>()?;
    Ok(GraphHom::new(h1.source.clone(), h2.target.clone(), map))
}

/// A nonempty vertex sequence whose consecutive pairs are edges.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Path {
    vertices: Vec<VertexId>,
}

impl Path {
    pub fn new(g: &Graph, vertices: Vec<VertexId>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Domain("empty path".into()));
        }
        if let Some(v) = vertices.iter().find(|v| !g.contains_vertex(**v)) {
            return Err(Error::Domain(format!("path vertex {v} not in graph")));
        }
        if let Some(w) = vertices.windows(2).find(|w| !g.has_edge(w[0], w[1])) {
            return Err(Error::Domain(format!("({}, {}) is not an edge", w[0], w[1])));
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Number of edges traversed.
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_cycle(&self) -> bool {
        self.vertices.first() == self.vertices.last() && !self.is_empty()
    }

    pub fn edge_set(&self) -> BTreeSet<(VertexId, VertexId)> {
        self.vertices.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// All cycles leaving `v` and returning to it without revisiting any vertex,
/// in lexicographic order of their vertex sequences.
pub fn cycles_through(g: &Graph, v: VertexId) -> Result<Vec<Path>> {
    if !g.contains_vertex(v) {
        return Err(Error::Domain(format!("vertex {v} not in graph")));
    }
    if !validate_edge_surjective(g).is_empty() {
        return Err(Error::Contract("cycles_through requires an edge-surjective graph".into()));
    }
    let mut found = Vec::new();
    let mut path = vec![v];
    let mut on_path: BTreeSet<VertexId> = BTreeSet::new();
    // stack of (vertex, next successor slot to try)
    let mut stack: Vec<(VertexId, usize)> = vec![(v, 0)];
    while let Some(top) = stack.last_mut() {
        let (u, i) = *top;
        top.1 += 1;
        let succ = g.successors(u);
        if i >= succ.len() {
            stack.pop();
            path.pop();
            on_path.remove(&u);
            continue;
        }
        let w = succ[i];
        if w == v {
            let mut cycle = path.clone();
            cycle.push(v);
            found.push(Path { vertices: cycle });
            if found.len() > CYCLE_LIMIT {
                return Err(Error::CycleLimit(CYCLE_LIMIT));
            }
        } else if !on_path.contains(&w) {
            on_path.insert(w);
            path.push(w);
            stack.push((w, 0));
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop1() -> Arc<Graph> {
        Arc::new(Graph::directed_cycle(1))
    }

    #[test]
    fn edge_surjectivity() {
        assert!(validate_edge_surjective(&Graph::directed_cycle(1)).is_empty());
        assert!(validate_edge_surjective(&Graph::directed_cycle(3)).is_empty());
        let g = Graph::new([0, 1], [(0, 1)]).unwrap();
        let issues = validate_edge_surjective(&g);
        assert_eq!(
            issues,
            vec![
                SurjectivityIssue { vertex: 0, missing_incoming: true, missing_outgoing: false },
                SurjectivityIssue { vertex: 1, missing_incoming: false, missing_outgoing: true },
            ]
        );
    }

    #[test]
    fn undeclared_endpoint_rejected() {
        assert!(Graph::new([0], [(0, 1)]).is_err());
    }

    #[test]
    fn homomorphism_cases() {
        let id = GraphHom::identity(Arc::new(Graph::directed_cycle(4)));
        assert!(is_homomorphism(&id).unwrap());
        let wrap = GraphHom::cycle_wrap(1, 2);
        assert!(is_homomorphism(&wrap).unwrap());

        // 2-cycle onto two vertices with only the edge (0,1)
        let two = Arc::new(Graph::directed_cycle(2));
        let broken = Arc::new(Graph::new([0, 1], [(0, 1), (1, 1)]).unwrap());
        let h = GraphHom::new(two, broken, [(0, 0), (1, 1)].into());
        assert!(!is_homomorphism(&h).unwrap());

        let partial = GraphHom::new(loop1(), loop1(), BTreeMap::new());
        assert!(matches!(is_homomorphism(&partial), Err(Error::Domain(_))));
    }

    #[test]
    fn bidirectionality_cases() {
        assert!(is_bidirectional(&GraphHom::cycle_wrap(3, 4)).unwrap());
        assert!(is_bidirectional(&GraphHom::identity(loop1())).unwrap());

        // u=0 with out-edges to 1 and 2 that land on different vertices
        let src = Arc::new(Graph::new([0, 1, 2], [(0, 1), (0, 2), (1, 0), (2, 0)]).unwrap());
        let tgt = Arc::new(Graph::new([0, 1, 2], [(0, 1), (0, 2), (1, 0), (2, 0)]).unwrap());
        let h = GraphHom::identity(src.clone());
        let h = GraphHom::new(src, tgt, h.map);
        assert!(!is_bidirectional(&h).unwrap());

        let two = Arc::new(Graph::directed_cycle(2));
        let bad = GraphHom::new(two.clone(), two, [(0, 0), (1, 0)].into());
        assert!(matches!(is_bidirectional(&bad), Err(Error::Contract(_))));
    }

    #[test]
    fn cycle_enumeration() {
        let c = cycles_through(&Graph::directed_cycle(1), 0).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 1);

        let eight = Graph::new([0], [(0, 0)]).unwrap();
        assert_eq!(cycles_through(&eight, 0).unwrap().len(), 1);
        let eight = Graph::new([0, 1, 2], [(0, 1), (1, 0), (0, 2), (2, 0)]).unwrap();
        let c = cycles_through(&eight, 0).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].vertices(), &[0, 1, 0]);
        assert_eq!(c[1].vertices(), &[0, 2, 0]);

        let c = cycles_through(&Graph::directed_cycle(7), 3).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), 7);
        assert!(c[0].is_cycle());

        assert!(matches!(cycles_through(&Graph::directed_cycle(2), 5), Err(Error::Domain(_))));
    }

    #[test]
    fn composition() {
        let h = GraphHom::cycle_wrap(3, 2);
        let id_src = GraphHom::identity(h.source.clone());
        assert_eq!(compose(&id_src, &h).unwrap().map, h.map);

        // wraps 2 then 3 compose to a wrap of factor 6
        let outer = GraphHom::cycle_wrap(2, 3); // 6-cycle -> 2-cycle
        let inner = GraphHom::cycle_wrap(1, 2); // 2-cycle -> loop
        let inner = GraphHom::new(outer.target.clone(), inner.target.clone(), inner.map);
        let both = compose(&outer, &inner).unwrap();
        assert_eq!(both.map, GraphHom::cycle_wrap(1, 6).map);
        assert!(is_homomorphism(&both).unwrap());

        let mismatch = GraphHom::cycle_wrap(5, 1);
        assert!(compose(&h, &mismatch).is_err());
    }

    #[test]
    fn paths() {
        let g = Graph::directed_cycle(3);
        let p = Path::new(&g, vec![0, 1, 2, 0]).unwrap();
        assert!(p.is_cycle());
        assert_eq!(p.edge_set().len(), 3);
        assert!(Path::new(&g, vec![0, 2]).is_err());
        assert!(Path::new(&g, vec![]).is_err());
    }
}
