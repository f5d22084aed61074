//! Gambaudo-Martens covering towers.
//!
//! Level 0 is a single special vertex with a loop. Every higher level is a
//! bouquet of cycles through its special vertex, and the map to the level
//! below sends each cycle onto a concatenation of lower cycles described by
//! a word over `{1..r}`. Towers are finite truncations; every operation takes
//! the depth it needs explicitly.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    compose, is_bidirectional, is_homomorphism, validate_edge_surjective, Graph, GraphHom,
    GraphJson, VertexId,
};

/// A word over `{1..r}`; letter `k` stands for lower cycle `c_{i-1,k}`.
pub type Word = Vec<usize>;

/// One level of a tower: the graph, its special vertex and its cycle
/// decomposition. Each cycle is stored as the full vertex sequence
/// `special, v_1, ..., v_{l-1}, special`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GmLevel {
    pub graph: Arc<Graph>,
    pub special: VertexId,
    pub cycles: Vec<Vec<VertexId>>,
}

impl GmLevel {
    fn base() -> Self {
        Self {
            graph: Arc::new(Graph::directed_cycle(1)),
            special: 0,
            cycles: vec![vec![0, 0]],
        }
    }

    /// `l(i, j)` for the 1-based cycle number `j`.
    pub fn cycle_len(&self, j: usize) -> usize {
        self.cycles[j - 1].len() - 1
    }

    pub fn cycle_count(&self) -> usize {
        self.cycles.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerMeta {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<usize>>,
}

/// Which defining property a [`Diagnostic`] reports on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// Level 0 is not a single vertex with a loop.
    #[serde(rename = "level0")]
    LevelZero,
    #[serde(rename = "edge-surjective")]
    EdgeSurjective,
    #[serde(rename = "homomorphism")]
    Homomorphism,
    /// Cycles start and end at the special vertex, length at least 1.
    #[serde(rename = "1")]
    CycleShape,
    /// The cycles cover every edge.
    #[serde(rename = "2")]
    EdgeCover,
    /// Cycles that meet agree until they return to the special vertex.
    #[serde(rename = "3")]
    Coincidence,
    /// Special vertices map to special vertices.
    #[serde(rename = "4")]
    SpecialImage,
    /// Every cycle's first step maps to `v_{i-1,1,1}`.
    #[serde(rename = "5")]
    FirstStep,
    /// Stored words disagree with the structure they describe.
    #[serde(rename = "word-form")]
    WordForm,
}

impl Condition {
    /// The numbered GM condition, when there is one.
    pub fn number(self) -> Option<u8> {
        match self {
            Condition::CycleShape => Some(1),
            Condition::EdgeCover => Some(2),
            Condition::Coincidence => Some(3),
            Condition::SpecialImage => Some(4),
            Condition::FirstStep => Some(5),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub level: usize,
    pub condition: Condition,
    pub witnesses: Vec<VertexId>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.condition.number() {
            Some(n) => write!(f, "level {}: condition ({n}): {}", self.level, self.message)?,
            None => write!(f, "level {}: {:?}: {}", self.level, self.condition, self.message)?,
        }
        if !self.witnesses.is_empty() {
            write!(f, " [witnesses {:?}]", self.witnesses)?;
        }
        Ok(())
    }
}

/// A finite GM tower: levels `0..=height` and maps `φ_i: G_i -> G_{i-1}`.
#[derive(Clone, Debug)]
pub struct CoverTower {
    levels: Vec<GmLevel>,
    homs: Vec<GraphHom>,
    words: Vec<Vec<Word>>,
    explicit: Vec<bool>,
    preimages: Vec<BTreeMap<VertexId, Vec<VertexId>>>,
    meta: TowerMeta,
    bd: OnceLock<bool>,
}

impl PartialEq for CoverTower {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels && self.homs == other.homs && self.words == other.words
    }
}

impl CoverTower {
    /// Assembles a tower without validating it. `homs[i-1]` maps level `i` to
    /// level `i-1`; `words[i-1]` is the stored word form of level `i`.
    pub fn from_parts(
        levels: Vec<GmLevel>,
        homs: Vec<GraphHom>,
        words: Vec<Vec<Word>>,
        meta: TowerMeta,
    ) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Domain("tower without levels".into()));
        }
        if homs.len() + 1 != levels.len() || words.len() + 1 != levels.len() {
            return Err(Error::Domain(format!(
                "{} levels need {} maps and word lists, got {} and {}",
                levels.len(),
                levels.len() - 1,
                homs.len(),
                words.len()
            )));
        }
        for (i, lvl) in levels.iter().enumerate() {
            if !lvl.graph.contains_vertex(lvl.special) {
                return Err(Error::Domain(format!("level {i}: special vertex not in graph")));
            }
            for c in &lvl.cycles {
                if let Some(v) = c.iter().find(|v| !lvl.graph.contains_vertex(**v)) {
                    return Err(Error::Domain(format!("level {i}: cycle vertex {v} not in graph")));
                }
            }
        }
        for (k, h) in homs.iter().enumerate() {
            let i = k + 1;
            if *h.source != *levels[i].graph || *h.target != *levels[i - 1].graph {
                return Err(Error::Domain(format!("map {i} does not connect levels {i} and {}", i - 1)));
            }
            h.check_domain()?;
        }
        let mut preimages = Vec::with_capacity(homs.len());
        for (k, h) in homs.iter().enumerate() {
            let mut pre: BTreeMap<VertexId, Vec<VertexId>> =
                levels[k].graph.vertices().iter().map(|&v| (v, Vec::new())).collect();
            for (&v, &w) in &h.map {
                pre.get_mut(&w).unwrap().push(v);
            }
            preimages.push(pre);
        }
        let explicit = vec![true; levels.len()];
        Ok(Self { levels, homs, words, explicit, preimages, meta, bd: OnceLock::new() })
    }

    /// Number of levels above level 0.
    pub fn height(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, i: usize) -> &GmLevel {
        &self.levels[i]
    }

    pub fn levels(&self) -> &[GmLevel] {
        &self.levels
    }

    /// `φ_i: G_i -> G_{i-1}`, `i >= 1`.
    pub fn hom(&self, i: usize) -> &GraphHom {
        &self.homs[i - 1]
    }

    pub fn homs(&self) -> &[GraphHom] {
        &self.homs
    }

    /// Stored words of level `i >= 1`.
    pub fn words(&self, i: usize) -> &[Word] {
        &self.words[i - 1]
    }

    pub fn meta(&self) -> &TowerMeta {
        &self.meta
    }

    pub fn set_meta(&mut self, meta: TowerMeta) {
        self.meta = meta;
    }

    /// `s_m`, the vertex count of level `m`.
    pub fn s(&self, m: usize) -> usize {
        self.levels[m].graph.vertex_count()
    }

    pub fn special(&self, m: usize) -> VertexId {
        self.levels[m].special
    }

    /// `φ_{i+1}^{-1}(v)` for a level-`i` vertex, in increasing id order.
    pub fn children(&self, i: usize, v: VertexId) -> &[VertexId] {
        self.preimages[i].get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `φ_{m,n}(v)` for a level-`m` vertex, `n <= m`.
    pub fn project(&self, m: usize, n: usize, mut v: VertexId) -> VertexId {
        for i in ((n + 1)..=m).rev() {
            v = self.homs[i - 1].map[&v];
        }
        v
    }

    /// `φ_{m,n}` as a graph homomorphism.
    pub fn composite_hom(&self, m: usize, n: usize) -> Result<GraphHom> {
        if n >= m || m > self.height() {
            return Err(Error::Domain(format!("no composite map from level {m} to level {n}")));
        }
        let mut h = self.homs[m - 1].clone();
        for i in (n + 1..m).rev() {
            h = compose(&h, &self.homs[i - 1])?;
        }
        Ok(h)
    }

    /// All maps bidirectional and all levels edge-surjective.
    pub fn is_bd(&self) -> bool {
        *self.bd.get_or_init(|| {
            self.levels.iter().all(|l| validate_edge_surjective(&l.graph).is_empty())
                && self.homs.iter().all(|h| is_bidirectional(h).unwrap_or(false))
        })
    }

    /// Reads the word form of level `i` back from the graph structure by
    /// splitting each cycle image at returns to the special vertex.
    pub fn read_words(&self, i: usize) -> Result<Vec<Word>> {
        read_level_words(&self.levels[i], &self.homs[i - 1], &self.levels[i - 1])
    }

    pub fn to_json(&self) -> TowerJson {
        let levels = (1..=self.height())
            .map(|i| {
                let words = Some(self.words[i - 1].clone());
                if self.explicit[i] {
                    let lvl = &self.levels[i];
                    LevelJson {
                        words,
                        graph: Some(lvl.graph.to_json()),
                        special: Some(lvl.special),
                        cycles: Some(lvl.cycles.clone()),
                        map: Some(self.homs[i - 1].map.iter().map(|(&a, &b)| [a, b]).collect()),
                    }
                } else {
                    LevelJson { words, graph: None, special: None, cycles: None, map: None }
                }
            })
            .collect();
        TowerJson { levels, meta: self.meta.clone() }
    }

    /// Loads a tower file; fails with the diagnostic list when the result is
    /// not a GM tower.
    pub fn from_json(json: &TowerJson) -> Result<Self> {
        let mut levels = vec![GmLevel::base()];
        let mut homs = Vec::new();
        let mut words = Vec::new();
        let mut explicit = vec![false];
        for (k, lj) in json.levels.iter().enumerate() {
            let i = k + 1;
            let lower = &levels[i - 1];
            if let Some(cycles) = &lj.cycles {
                let (Some(g), Some(special), Some(map)) = (&lj.graph, lj.special, &lj.map) else {
                    return Err(Error::Format(format!(
                        "level {i}: explicit cycles need graph, special and map"
                    )));
                };
                let graph = Arc::new(Graph::from_json(g)?);
                let map = map.iter().map(|e| (e[0], e[1])).collect();
                let hom = GraphHom::new(graph.clone(), lower.graph.clone(), map);
                let level = GmLevel { graph, special, cycles: cycles.clone() };
                let w = match &lj.words {
                    Some(w) => w.clone(),
                    None => read_level_words(&level, &hom, lower).unwrap_or_default(),
                };
                levels.push(level);
                homs.push(hom);
                words.push(w);
                explicit.push(true);
            } else {
                let w = lj
                    .words
                    .as_ref()
                    .ok_or_else(|| Error::Format(format!("level {i}: needs words or cycles")))?;
                let (level, hom) = level_from_words(lower, w, i, false)?;
                levels.push(level);
                homs.push(hom);
                words.push(w.clone());
                explicit.push(false);
            }
        }
        let mut tower = Self::from_parts(levels, homs, words, json.meta.clone())?;
        tower.explicit = explicit;
        let diags = validate_gm(&tower)?;
        if !diags.is_empty() {
            return Err(Error::Invalid(diags));
        }
        Ok(tower)
    }
}

/// Tower file: level 0 is implicit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerJson {
    pub levels: Vec<LevelJson>,
    pub meta: TowerMeta,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub words: Option<Vec<Word>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub special: Option<VertexId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<Vec<Vec<VertexId>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<Vec<[VertexId; 2]>>,
}

fn read_level_words(level: &GmLevel, hom: &GraphHom, lower: &GmLevel) -> Result<Vec<Word>> {
    let mut out = Vec::with_capacity(level.cycles.len());
    for (j, c) in level.cycles.iter().enumerate() {
        let image = hom.image(c)?;
        if image.first() != Some(&lower.special) || image.last() != Some(&lower.special) {
            return Err(Error::Construction(format!(
                "image of cycle {} does not start and end at the lower special vertex",
                j + 1
            )));
        }
        let mut word = Vec::new();
        let mut start = 0;
        for pos in 1..image.len() {
            if image[pos] == lower.special {
                let seg = &image[start..=pos];
                let letter = lower
                    .cycles
                    .iter()
                    .position(|lc| lc.as_slice() == seg)
                    .ok_or_else(|| {
                        Error::Construction(format!(
                            "image of cycle {} contains a segment that is not a lower cycle",
                            j + 1
                        ))
                    })?;
                word.push(letter + 1);
                start = pos;
            }
        }
        out.push(word);
    }
    Ok(out)
}

/// Builds level `i` over `lower` with fresh vertices per cycle.
fn level_from_words(
    lower: &GmLevel,
    words: &[Word],
    i: usize,
    require_leading_one: bool,
) -> Result<(GmLevel, GraphHom)> {
    if words.is_empty() {
        return Err(Error::Domain(format!("level {i}: no words")));
    }
    let r = lower.cycle_count();
    let mut cycles = Vec::with_capacity(words.len());
    let mut map = BTreeMap::new();
    map.insert(0, lower.special);
    let mut next: VertexId = 1;
    for (j, w) in words.iter().enumerate() {
        if w.is_empty() {
            return Err(Error::Domain(format!("level {i}: word {} is empty", j + 1)));
        }
        if let Some(&bad) = w.iter().find(|&&a| a == 0 || a > r) {
            return Err(Error::Domain(format!(
                "level {i}: letter {bad} outside alphabet 1..={r}"
            )));
        }
        if require_leading_one && w[0] != 1 {
            return Err(Error::Domain(format!(
                "level {i}: word {} starts with {} instead of 1",
                j + 1,
                w[0]
            )));
        }
        // the lower path traced by the word, without its final special vertex
        let mut lower_path: Vec<VertexId> = Vec::new();
        for &a in w {
            let lc = &lower.cycles[a - 1];
            lower_path.extend_from_slice(&lc[..lc.len() - 1]);
        }
        let mut cycle = vec![0];
        for &target in &lower_path[1..] {
            cycle.push(next);
            map.insert(next, target);
            next += 1;
        }
        cycle.push(0);
        cycles.push(cycle);
    }
    let edges: Vec<(VertexId, VertexId)> =
        cycles.iter().flat_map(|c| c.windows(2).map(|e| (e[0], e[1]))).collect();
    let graph = Arc::new(Graph::new(0..next, edges)?);
    let hom = GraphHom::new(graph.clone(), lower.graph.clone(), map);
    Ok((GmLevel { graph, special: 0, cycles }, hom))
}

fn assemble(words: &[Vec<Word>], require_leading_one: bool, meta: TowerMeta) -> Result<CoverTower> {
    let mut levels = vec![GmLevel::base()];
    let mut homs = Vec::new();
    for (k, w) in words.iter().enumerate() {
        let (lvl, hom) = level_from_words(&levels[k], w, k + 1, require_leading_one)?;
        levels.push(lvl);
        homs.push(hom);
    }
    let mut tower = CoverTower::from_parts(levels, homs, words.to_vec(), meta)?;
    tower.explicit = vec![false; tower.levels.len()];
    Ok(tower)
}

/// Tower whose level `i` has one cycle per word in `words[i-1]`, each made of
/// fresh vertices apart from the special vertex.
pub fn build_tower_from_words(words: &[Vec<Word>]) -> Result<CoverTower> {
    let meta = TowerMeta { generator: "words".into(), seed: None, bases: None };
    assemble(words, true, meta)
}

/// Same as [`build_tower_from_words`] but accepts words whose first letter is
/// not 1. The result violates condition (5); used to exercise the validator.
#[doc(hidden)]
pub fn build_tower_from_words_unchecked(words: &[Vec<Word>]) -> Result<CoverTower> {
    let meta = TowerMeta { generator: "words".into(), seed: None, bases: None };
    assemble(words, false, meta)
}

/// Single-cycle tower; level `i` wraps `bases[i-1]` times around level `i-1`.
pub fn odometer_tower(bases: &[usize]) -> Result<CoverTower> {
    if bases.is_empty() {
        return Err(Error::Domain("odometer needs at least one base".into()));
    }
    if let Some(b) = bases.iter().find(|&&b| b < 2) {
        return Err(Error::Domain(format!("odometer base {b} < 2")));
    }
    let words: Vec<Vec<Word>> = bases.iter().map(|&b| vec![vec![1; b]]).collect();
    let meta = TowerMeta {
        generator: "odometer".into(),
        seed: None,
        bases: Some(bases.to_vec()),
    };
    assemble(&words, true, meta)
}

/// Random simple GM tower: `cycle_counts[i-1]` words at level `i`, each of
/// length at most `length_budget`, starting with 1 and using every letter.
/// Generated with ChaCha8 seeded from `seed`.
pub fn random_simple_tower(
    seed: u64,
    levels: usize,
    cycle_counts: &[usize],
    length_budget: usize,
) -> Result<CoverTower> {
    if cycle_counts.len() != levels || levels == 0 {
        return Err(Error::Domain(format!(
            "need one cycle count per level ({levels} levels, {} counts)",
            cycle_counts.len()
        )));
    }
    if cycle_counts.contains(&0) {
        return Err(Error::Domain("cycle counts must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut all = Vec::with_capacity(levels);
    let mut r_prev = 1;
    for &r in cycle_counts {
        let min_len = r_prev.max(2);
        if length_budget < min_len {
            return Err(Error::Domain(format!(
                "length budget {length_budget} below required word length {min_len}"
            )));
        }
        let mut level_words = Vec::with_capacity(r);
        for _ in 0..r {
            let len = rng.gen_range(min_len..=length_budget);
            let mut rest: Vec<usize> = (2..=r_prev).collect();
            while rest.len() < len - 1 {
                rest.push(rng.gen_range(1..=r_prev));
            }
            rest.shuffle(&mut rng);
            let mut w = vec![1];
            w.extend(rest);
            level_words.push(w);
        }
        all.push(level_words);
        r_prev = r;
    }
    let meta = TowerMeta { generator: "random".into(), seed: Some(seed), bases: None };
    assemble(&all, true, meta)
}

/// Checks edge-surjectivity, the homomorphism property and conditions
/// (1)-(5) on every level. Structural breakage is an error; everything else
/// is reported as diagnostics.
pub fn validate_gm(tower: &CoverTower) -> Result<Vec<Diagnostic>> {
    let mut out = Vec::new();
    let base = &tower.levels[0];
    if base.graph.vertex_count() != 1
        || base.graph.edges().len() != 1
        || !base.graph.has_edge(base.special, base.special)
        || base.cycles != vec![vec![base.special, base.special]]
    {
        out.push(Diagnostic {
            level: 0,
            condition: Condition::LevelZero,
            witnesses: base.graph.vertices().to_vec(),
            message: "level 0 must be one special vertex with one loop".into(),
        });
    }
    for i in 1..tower.levels.len() {
        validate_level(tower, i, &mut out)?;
    }
    Ok(out)
}

fn validate_level(tower: &CoverTower, i: usize, out: &mut Vec<Diagnostic>) -> Result<()> {
    let lvl = &tower.levels[i];
    let lower = &tower.levels[i - 1];
    let g = &lvl.graph;
    let hom = &tower.homs[i - 1];
    let mut push = |condition, witnesses: Vec<VertexId>, message: String| {
        out.push(Diagnostic { level: i, condition, witnesses, message })
    };

    let issues = validate_edge_surjective(g);
    if !issues.is_empty() {
        push(
            Condition::EdgeSurjective,
            issues.iter().map(|s| s.vertex).collect(),
            "vertices without incoming or outgoing edges".into(),
        );
    }

    // (1)
    if lvl.cycles.is_empty() {
        push(Condition::CycleShape, vec![], "level has no cycles".into());
    }
    for (j, c) in lvl.cycles.iter().enumerate() {
        if c.len() < 2 || c[0] != lvl.special || c[c.len() - 1] != lvl.special {
            push(
                Condition::CycleShape,
                c.first().into_iter().copied().collect(),
                format!("cycle {} does not run from the special vertex back to it", j + 1),
            );
            continue;
        }
        if let Some(&v) = c[1..c.len() - 1].iter().find(|&&v| v == lvl.special) {
            push(
                Condition::CycleShape,
                vec![v],
                format!("cycle {} passes the special vertex before its end", j + 1),
            );
        }
        if let Some(e) = c.windows(2).find(|e| !g.has_edge(e[0], e[1])) {
            push(
                Condition::CycleShape,
                vec![e[0], e[1]],
                format!("cycle {} uses a non-edge", j + 1),
            );
        }
    }

    // (2)
    let covered: BTreeSet<(VertexId, VertexId)> = lvl
        .cycles
        .iter()
        .flat_map(|c| c.windows(2).map(|e| (e[0], e[1])))
        .collect();
    let uncovered: Vec<_> = g.edges().difference(&covered).copied().collect();
    if !uncovered.is_empty() {
        push(
            Condition::EdgeCover,
            uncovered.iter().flat_map(|&(u, v)| [u, v]).collect(),
            format!("{} edge(s) lie on no cycle", uncovered.len()),
        );
    }

    // (3): every interior occurrence of a vertex has the same tail
    let mut first_tail: BTreeMap<VertexId, &[VertexId]> = BTreeMap::new();
    let mut bad3 = BTreeSet::new();
    for c in &lvl.cycles {
        if c.len() < 2 {
            continue;
        }
        for k in 1..c.len() - 1 {
            let tail = &c[k..];
            match first_tail.get(&c[k]) {
                Some(t) if *t != tail => {
                    bad3.insert(c[k]);
                }
                Some(_) => {}
                None => {
                    first_tail.insert(c[k], tail);
                }
            }
        }
    }
    if !bad3.is_empty() {
        push(
            Condition::Coincidence,
            bad3.into_iter().collect(),
            "cycles meet at a vertex and then diverge".into(),
        );
    }

    if !is_homomorphism(hom)? {
        let bad: Vec<VertexId> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| !lower.graph.has_edge(hom.map[&u], hom.map[&v]))
            .flat_map(|&(u, v)| [u, v])
            .collect();
        push(Condition::Homomorphism, bad, "edges not preserved".into());
    }

    // (4)
    if hom.map[&lvl.special] != lower.special {
        push(
            Condition::SpecialImage,
            vec![lvl.special],
            format!("special vertex maps to {} instead of {}", hom.map[&lvl.special], lower.special),
        );
    }

    // (5)
    let target = lower.cycles.first().and_then(|c| c.get(1)).copied();
    for (j, c) in lvl.cycles.iter().enumerate() {
        if let (Some(&v1), Some(t)) = (c.get(1), target) {
            if hom.map[&v1] != t {
                push(
                    Condition::FirstStep,
                    vec![v1],
                    format!("first step of cycle {} maps to {} instead of {t}", j + 1, hom.map[&v1]),
                );
            }
        }
    }
    let stored = &tower.words[i - 1];
    for (j, w) in stored.iter().enumerate() {
        if w.first() != Some(&1) {
            push(
                Condition::FirstStep,
                vec![],
                format!("word {} does not start with letter 1", j + 1),
            );
        }
    }
    match read_level_words(lvl, hom, lower) {
        Ok(read) if read == *stored => {}
        Ok(read) => push(
            Condition::WordForm,
            vec![],
            format!("stored words {stored:?} differ from structure {read:?}"),
        ),
        Err(e) => push(Condition::WordForm, vec![], e.to_string()),
    }
    Ok(())
}

/// `E(φ_{m,i}(c_{m,j})) = E(G_i)` for every cycle at level `m`.
pub fn is_simple(tower: &CoverTower, i: usize, m: usize) -> Result<bool> {
    if i >= m {
        return Err(Error::Domain(format!("is_simple needs i < m, got i={i}, m={m}")));
    }
    if m > tower.height() {
        return Err(Error::Depth(format!("tower has no level {m}")));
    }
    let all = tower.levels[i].graph.edges();
    Ok(tower.levels[m].cycles.iter().all(|c| {
        let img: BTreeSet<(VertexId, VertexId)> = c
            .windows(2)
            .map(|e| (tower.project(m, i, e[0]), tower.project(m, i, e[1])))
            .collect();
        img == *all
    }))
}

/// Keeps the levels listed in `keep` and composes the maps between them.
pub fn telescope(tower: &CoverTower, keep: &[usize]) -> Result<CoverTower> {
    if keep.first() != Some(&0) {
        return Err(Error::Domain("telescope: kept levels must start with 0".into()));
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("telescope: kept levels must increase strictly".into()));
    }
    if *keep.last().unwrap() > tower.height() {
        return Err(Error::Depth("telescope: level beyond tower height".into()));
    }
    let diags = validate_gm(tower)?;
    if !diags.is_empty() {
        return Err(Error::Invalid(diags));
    }
    let levels: Vec<GmLevel> = keep.iter().map(|&k| tower.levels[k].clone()).collect();
    let mut homs = Vec::new();
    let mut words = Vec::new();
    for w in keep.windows(2) {
        let h = tower.composite_hom(w[1], w[0])?;
        words.push(read_level_words(&tower.levels[w[1]], &h, &tower.levels[w[0]])?);
        homs.push(h);
    }
    let mut out = CoverTower::from_parts(levels, homs, words, tower.meta.clone())?;
    out.explicit = keep.iter().map(|&k| k != 0).collect();
    Ok(out)
}

/// `s_{m+1} > 4 s_m^2` for every consecutive pair of levels `m >= 1`.
pub fn growth_check(tower: &CoverTower) -> bool {
    (1..tower.height()).all(|m| {
        let (a, b) = (tower.s(m) as u128, tower.s(m + 1) as u128);
        b > 4 * a * a
    })
}
