//! Nested exact intervals `A^{(m)}_i ⊃ D^{(m)}_i` realizing the inverse limit
//! as a Cantor set in the line.
//!
//! Only scales (`ψ`, slot diameters, `a_m`, `b_m`) are stored. They have tiny
//! numerators and huge binary exponents. Endpoints are folded from the slot
//! path on demand and memoized below the top level.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::dynamics::Thread;
use crate::embedding::indexing::{index_vertices, VertexIndexing};
use crate::error::{Error, Result};
use crate::exact::{ExactInterval, ExactScalar};
use crate::graph::VertexId;
use crate::tower::{growth_check, CoverTower, TowerJson};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtlasMode {
    /// Requires the growth condition and certifies the hole-size chain.
    Strict,
    /// Certifies margin dominance vertex by vertex instead of relying on growth.
    Checked,
}

impl std::str::FromStr for AtlasMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(AtlasMode::Strict),
            "checked" => Ok(AtlasMode::Checked),
            _ => Err(Error::Domain(format!("unknown atlas mode {s:?}"))),
        }
    }
}

/// What was certified for one level during the build.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCertificate {
    pub level: usize,
    /// `diam D < diam A / 3` for every vertex.
    pub margin_dominance: bool,
    /// The hole-size chain (strict mode only).
    pub hole_size: Option<bool>,
    /// `diam D^{(m)} <= 2^{-s_m} a_m` for every vertex.
    pub bracket_bound: bool,
}

#[derive(Clone, Debug)]
struct LevelData {
    indexing: VertexIndexing,
    slot: BTreeMap<VertexId, usize>,
    psi: BTreeMap<VertexId, ExactScalar>,
    slot_diam: BTreeMap<VertexId, ExactScalar>,
    lo_cache: BTreeMap<VertexId, OnceLock<ExactScalar>>,
}

/// The interval realization of a tower up to a fixed depth.
#[derive(Clone, Debug)]
pub struct IntervalAtlas {
    tower: Arc<CoverTower>,
    depth: usize,
    mode: AtlasMode,
    a: Vec<ExactScalar>,
    b: Vec<ExactScalar>,
    levels: Vec<LevelData>,
    succ: Vec<BTreeMap<VertexId, VertexId>>,
    certificates: Vec<LevelCertificate>,
}

/// `ψ_m(w^m_i) = 2^{-2 s_{m+1}^2 - i s_{m+1}} a_{m-1}`.
pub fn psi_formula(s_next: usize, i: usize, a_prev: &ExactScalar) -> ExactScalar {
    let s = s_next as u64;
    a_prev.div_pow2(2 * s * s + i as u64 * s)
}

fn sq(x: usize) -> u64 {
    (x as u64) * (x as u64)
}

/// Builds the atlas down to `depth`. Needs tower level `depth + 1` for the
/// last `ψ`.
pub fn build_atlas(tower: Arc<CoverTower>, depth: usize, mode: AtlasMode) -> Result<IntervalAtlas> {
    if depth == 0 {
        return Err(Error::Domain("atlas depth must be at least 1".into()));
    }
    if tower.height() < depth + 1 {
        return Err(Error::Depth(format!(
            "atlas depth {depth} needs tower height {}, tower has {}",
            depth + 1,
            tower.height()
        )));
    }
    if mode == AtlasMode::Strict && !growth_check(&tower) {
        return Err(Error::certification(
            "growth s_{m+1} > 4 s_m^2",
            0,
            "strict mode needs the growth condition; use checked mode",
        ));
    }
    let s = |m: usize| tower.s(m);
    let mut a = vec![ExactScalar::ratio(1, 6)];
    let mut b = vec![a[0].div_pow2(2 * sq(s(0)))];
    let mut levels: Vec<LevelData> = Vec::with_capacity(depth);
    let mut certificates = Vec::with_capacity(depth);

    for m in 1..=depth {
        let indexing = index_vertices(&tower, m)?;
        let mut slot = BTreeMap::new();
        let mut slot_diam = BTreeMap::new();
        if m == 1 {
            for (k, &v) in indexing.order().iter().enumerate() {
                slot.insert(v, k);
                slot_diam.insert(v, a[0].mul_int(3));
            }
        } else {
            let prev = &levels[m - 2];
            for &r in prev.indexing.order() {
                let mut kids = tower.children(m - 1, r).to_vec();
                if kids.len() > s(m) {
                    return Err(Error::Construction(format!(
                        "level {m}: vertex {r} has {} preimages, more than s_{m} = {}",
                        kids.len(),
                        s(m)
                    )));
                }
                kids.sort_by_key(|&c| indexing.index_of(c));
                let width = prev.psi[&r].div_int(s(m) as u64);
                for (k, c) in kids.into_iter().enumerate() {
                    slot.insert(c, k);
                    slot_diam.insert(c, width.clone());
                }
            }
        }
        let a_m = slot_diam.values().max().cloned().unwrap().div_int(3);
        let s_next = s(m + 1);
        let psi: BTreeMap<VertexId, ExactScalar> = indexing
            .order()
            .iter()
            .enumerate()
            .map(|(k, &v)| (v, psi_formula(s_next, k + 1, &a[m - 1])))
            .collect();

        let margin_dominance = psi.iter().all(|(v, p)| p.mul_int(3) < slot_diam[v]);
        let min_diam = slot_diam.values().min().unwrap();
        let max_psi = psi.values().max().unwrap();
        let bracket_bound = *max_psi <= a_m.div_pow2(s(m) as u64);
        let hole_size = (mode == AtlasMode::Strict).then(|| {
            let lower_ok = m < 2 || *min_diam >= a[m - 2].div_pow2(4 * sq(s(m)));
            let growth_ok = sq(s(m)) * 2 < s_next as u64;
            let hole = a[m - 1].div_pow2(2 * s_next as u64);
            lower_ok && growth_ok && *min_diam > hole.mul_int(3) && *max_psi < hole
        });
        if !margin_dominance {
            return Err(Error::certification(
                "margin dominance diam D < diam A / 3",
                m,
                "the psi formula leaves no room in some slot",
            ));
        }
        if hole_size == Some(false) {
            return Err(Error::certification("hole size", m, "hole-size chain fails"));
        }
        if mode == AtlasMode::Strict && !bracket_bound {
            return Err(Error::certification(
                "bracket bound diam D <= 2^{-s_m} a_m",
                m,
                "bracket too wide",
            ));
        }
        certificates.push(LevelCertificate { level: m, margin_dominance, hole_size, bracket_bound });
        b.push(a_m.div_pow2(sq(s_next)));
        a.push(a_m);
        let lo_cache = indexing.order().iter().map(|&v| (v, OnceLock::new())).collect();
        levels.push(LevelData { indexing, slot, psi, slot_diam, lo_cache });
    }

    let succ = (1..=depth + 1)
        .map(|m| {
            let lvl = tower.level(m);
            lvl.graph
                .vertices()
                .iter()
                .map(|&u| {
                    let out = lvl.graph.successors(u);
                    let &w = out.first().ok_or_else(|| {
                        Error::Contract(format!("level {m}: vertex {u} has no out-neighbour"))
                    })?;
                    Ok((u, tower.hom(m).map[&w]))
                })
                .collect::<Result<BTreeMap<_, _>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(IntervalAtlas { tower, depth, mode, a, b, levels, succ, certificates })
}

impl IntervalAtlas {
    pub fn tower(&self) -> &Arc<CoverTower> {
        &self.tower
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mode(&self) -> AtlasMode {
        self.mode
    }

    /// `a_m` for `0 <= m <= depth`.
    pub fn a(&self, m: usize) -> &ExactScalar {
        &self.a[m]
    }

    /// `b_m` for `0 <= m <= depth`. Stored only; nothing downstream uses it.
    pub fn b(&self, m: usize) -> &ExactScalar {
        &self.b[m]
    }

    pub fn certificates(&self) -> &[LevelCertificate] {
        &self.certificates
    }

    fn level(&self, m: usize) -> Result<&LevelData> {
        if m == 0 || m > self.depth {
            return Err(Error::Depth(format!("atlas has levels 1..={}, asked for {m}", self.depth)));
        }
        Ok(&self.levels[m - 1])
    }

    fn check_vertex(&self, m: usize, v: VertexId) -> Result<&LevelData> {
        let l = self.level(m)?;
        if !l.psi.contains_key(&v) {
            return Err(Error::Domain(format!("vertex {v} not on level {m}")));
        }
        Ok(l)
    }

    pub fn indexing(&self, m: usize) -> Result<&VertexIndexing> {
        Ok(&self.level(m)?.indexing)
    }

    /// `ψ_m(v) = diam D^{(m)}_v`.
    pub fn psi(&self, m: usize, v: VertexId) -> Result<&ExactScalar> {
        Ok(&self.check_vertex(m, v)?.psi[&v])
    }

    /// `ψ_m(w^m_i)` by 1-based index.
    pub fn psi_index(&self, m: usize, i: usize) -> Result<&ExactScalar> {
        let l = self.level(m)?;
        let v = l
            .indexing
            .vertex(i)
            .ok_or_else(|| Error::Domain(format!("no index {i} on level {m}")))?;
        Ok(&l.psi[&v])
    }

    /// `diam A^{(m)}_v`.
    pub fn slot_diam(&self, m: usize, v: VertexId) -> Result<&ExactScalar> {
        Ok(&self.check_vertex(m, v)?.slot_diam[&v])
    }

    /// One complementary component of `A^{(m)}_v \ D^{(m)}_v`.
    pub fn margin(&self, m: usize, v: VertexId) -> Result<ExactScalar> {
        let l = self.check_vertex(m, v)?;
        Ok((&l.slot_diam[&v] - &l.psi[&v]).half())
    }

    /// Slot of `v` inside its parent's `D` (level 1: index minus one).
    pub fn slot(&self, m: usize, v: VertexId) -> Result<usize> {
        Ok(self.check_vertex(m, v)?.slot[&v])
    }

    /// Slots from level 1 down to `m` along the ancestry of `v`.
    pub fn slot_path(&self, m: usize, v: VertexId) -> Result<Vec<usize>> {
        self.check_vertex(m, v)?;
        let mut path = vec![0; m];
        let mut u = v;
        for k in (1..=m).rev() {
            path[k - 1] = self.levels[k - 1].slot[&u];
            u = self.tower.hom(k).map[&u];
        }
        Ok(path)
    }

    fn lo_uncached(&self, m: usize, v: VertexId) -> ExactScalar {
        let l = &self.levels[m - 1];
        if m == 1 {
            return ExactScalar::from_integer(l.slot[&v] as i64 + 1);
        }
        let r = self.tower.hom(m).map[&v];
        let d_lo = self.d_lo(m - 1, r);
        let width = &self.levels[m - 2].psi[&r].div_int(self.tower.s(m) as u64);
        d_lo + width.mul_int(l.slot[&v] as u64)
    }

    fn a_lo(&self, m: usize, v: VertexId) -> ExactScalar {
        if m == self.depth {
            return self.lo_uncached(m, v);
        }
        self.levels[m - 1].lo_cache[&v].get_or_init(|| self.lo_uncached(m, v)).clone()
    }

    fn d_lo(&self, m: usize, v: VertexId) -> ExactScalar {
        let l = &self.levels[m - 1];
        self.a_lo(m, v) + (&l.slot_diam[&v] - &l.psi[&v]).half()
    }

    /// `A^{(m)}_v`.
    pub fn interval_a(&self, m: usize, v: VertexId) -> Result<ExactInterval> {
        let l = self.check_vertex(m, v)?;
        let lo = self.a_lo(m, v);
        let hi = &lo + &l.slot_diam[&v];
        ExactInterval::new(lo, hi)
    }

    /// `D^{(m)}_v`.
    pub fn interval_d(&self, m: usize, v: VertexId) -> Result<ExactInterval> {
        let l = self.check_vertex(m, v)?;
        let lo = self.d_lo(m, v);
        let hi = &lo + &l.psi[&v];
        ExactInterval::new(lo, hi)
    }

    /// Hull of all level-1 intervals, used as the depth-0 bracket.
    pub fn level0_bracket(&self) -> ExactInterval {
        let s1 = self.tower.s(1) as i64;
        ExactInterval { lo: ExactScalar::one(), hi: ExactScalar::from_integer(s1) + self.a[0].mul_int(3) }
    }

    /// The bracket containing `π(x)` at the thread's depth.
    pub fn pi_bracket(&self, x: &Thread) -> Result<ExactInterval> {
        let d = x.depth();
        if d > self.depth {
            return Err(Error::Domain(format!("thread depth {d} beyond atlas depth {}", self.depth)));
        }
        if d == 0 {
            return Ok(self.level0_bracket());
        }
        self.interval_d(d, x.top())
    }

    /// Level-`m-1` vertex of the image cylinder of level-`m` vertex `u`.
    pub fn image_vertex(&self, m: usize, u: VertexId) -> Result<VertexId> {
        self.succ
            .get(m.wrapping_sub(1))
            .and_then(|t| t.get(&u))
            .copied()
            .ok_or_else(|| Error::Domain(format!("no successor entry for vertex {u} at level {m}")))
    }

    /// Bracket containing `f` of the cylinder of a depth-`d+1` thread, at depth `d`.
    pub fn f_bracket(&self, x: &Thread) -> Result<ExactInterval> {
        let d1 = x.depth();
        if d1 == 0 {
            return Err(Error::Domain("f bracket needs depth at least 1".into()));
        }
        if d1 > self.depth + 1 {
            return Err(Error::Domain(format!(
                "thread depth {d1} beyond atlas depth {} + 1",
                self.depth
            )));
        }
        let target = self.image_vertex(d1, x.top())?;
        if d1 == 1 {
            return Ok(self.level0_bracket());
        }
        self.interval_d(d1 - 1, target)
    }

    /// Level vertices sorted left to right.
    pub fn positional_order(&self, m: usize) -> Result<Vec<VertexId>> {
        let l = self.level(m)?;
        let mut vs: Vec<(Vec<usize>, VertexId)> = l
            .indexing
            .order()
            .iter()
            .map(|&v| Ok((self.slot_path(m, v)?, v)))
            .collect::<Result<_>>()?;
        vs.sort();
        Ok(vs.into_iter().map(|(_, v)| v).collect())
    }

    #[doc(hidden)]
    pub fn override_successor(&mut self, m: usize, u: VertexId, target: VertexId) {
        self.succ[m - 1].insert(u, target);
    }

    #[doc(hidden)]
    pub fn override_slot(&mut self, m: usize, v: VertexId, slot: usize) {
        self.levels[m - 1].slot.insert(v, slot);
        for l in &mut self.levels {
            for c in l.lo_cache.values_mut() {
                *c = OnceLock::new();
            }
        }
    }

    pub fn to_json(&self, materialize: bool) -> Result<AtlasJson> {
        let mut levels = Vec::with_capacity(self.depth);
        for m in 1..=self.depth {
            let l = &self.levels[m - 1];
            let mut vertices = Vec::with_capacity(l.indexing.len());
            for (k, &v) in l.indexing.order().iter().enumerate() {
                let endpoints = if materialize {
                    Some(AtlasEndpoints { a: self.interval_a(m, v)?, d: self.interval_d(m, v)? })
                } else {
                    None
                };
                vertices.push(AtlasVertexJson {
                    vertex: v,
                    index: k + 1,
                    in_w: l.indexing.in_w(v),
                    slot_path: self.slot_path(m, v)?,
                    psi: l.psi[&v].clone(),
                    slot_diam: l.slot_diam[&v].clone(),
                    endpoints,
                });
            }
            levels.push(AtlasLevelJson { level: m, vertices });
        }
        Ok(AtlasJson {
            tower: self.tower.to_json(),
            depth: self.depth,
            mode: self.mode,
            a: self.a.clone(),
            b: self.b.clone(),
            certificates: self.certificates.clone(),
            levels,
        })
    }

    /// Rebuilds the atlas from the embedded tower and checks every stored
    /// quantity against the rebuild.
    pub fn from_json(json: &AtlasJson) -> Result<Self> {
        let tower = Arc::new(CoverTower::from_json(&json.tower)?);
        let atlas = build_atlas(tower, json.depth, json.mode)?;
        let mismatch = |what: &str| Err(Error::Format(format!("atlas file disagrees with rebuild: {what}")));
        if atlas.a != json.a || atlas.b != json.b {
            return mismatch("scales");
        }
        if json.levels.len() != atlas.depth {
            return mismatch("level count");
        }
        for lj in &json.levels {
            let l = atlas.level(lj.level)?;
            if lj.vertices.len() != l.indexing.len() {
                return mismatch("vertex count");
            }
            for vj in &lj.vertices {
                let m = lj.level;
                if l.indexing.index_of(vj.vertex) != Some(vj.index)
                    || atlas.slot_path(m, vj.vertex)? != vj.slot_path
                    || l.psi[&vj.vertex] != vj.psi
                    || l.slot_diam[&vj.vertex] != vj.slot_diam
                {
                    return mismatch(&format!("vertex {} on level {m}", vj.vertex));
                }
                if let Some(e) = &vj.endpoints {
                    if atlas.interval_a(m, vj.vertex)? != e.a || atlas.interval_d(m, vj.vertex)? != e.d {
                        return mismatch(&format!("endpoints of vertex {} on level {m}", vj.vertex));
                    }
                }
            }
        }
        Ok(atlas)
    }

    /// Magnitudes only, for plotting.
    pub fn summary(&self) -> AtlasSummary {
        let levels = (1..=self.depth)
            .map(|m| {
                let l = &self.levels[m - 1];
                let vertices = l
                    .indexing
                    .order()
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| SummaryVertex {
                        vertex: v,
                        index: k + 1,
                        in_w: l.indexing.in_w(v),
                        psi_pow2: l.psi[&v].pow2(),
                        psi_log2: l.psi[&v].log2_abs(),
                        slot_diam_log2: l.slot_diam[&v].log2_abs(),
                    })
                    .collect();
                SummaryLevel {
                    level: m,
                    s: self.tower.s(m),
                    a_log2: self.a[m].log2_abs(),
                    b_log2: self.b[m].log2_abs(),
                    vertices,
                }
            })
            .collect();
        AtlasSummary { depth: self.depth, mode: self.mode, levels }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasEndpoints {
    pub a: ExactInterval,
    pub d: ExactInterval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasVertexJson {
    pub vertex: VertexId,
    pub index: usize,
    pub in_w: bool,
    pub slot_path: Vec<usize>,
    pub psi: ExactScalar,
    pub slot_diam: ExactScalar,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoints: Option<AtlasEndpoints>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasLevelJson {
    pub level: usize,
    pub vertices: Vec<AtlasVertexJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasJson {
    pub tower: TowerJson,
    pub depth: usize,
    pub mode: AtlasMode,
    pub a: Vec<ExactScalar>,
    pub b: Vec<ExactScalar>,
    pub certificates: Vec<LevelCertificate>,
    pub levels: Vec<AtlasLevelJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryVertex {
    pub vertex: VertexId,
    pub index: usize,
    pub in_w: bool,
    pub psi_pow2: u64,
    pub psi_log2: f64,
    pub slot_diam_log2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryLevel {
    pub level: usize,
    pub s: usize,
    pub a_log2: f64,
    pub b_log2: f64,
    pub vertices: Vec<SummaryVertex>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtlasSummary {
    pub depth: usize,
    pub mode: AtlasMode,
    pub levels: Vec<SummaryLevel>,
}
