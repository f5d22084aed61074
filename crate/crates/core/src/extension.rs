//! A non-transitive l.r.s. extension `(Z, F)` of an embedded minimal system
//! with spiralling periodic orbits of unbounded period.
//!
//! Notation: `σ_n < κ_n` are the backward return times of the base point to
//! the neighbourhood `U_n`, and `h_n` is the certified contraction gap on
//! `U_n \ U_{n+1}`. Spiral point `z^n_j` sits over `T^{j-κ_n+1}(z)` at height
//! `-1 + (P-1-j)/(2(P-1)) (h_n + h_{n+1}) + h_n/2`, `P = κ_n - σ_n`.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{step_backward, step_forward, Thread};
use crate::embedding::atlas::IntervalAtlas;
use crate::error::{Error, Result};
use crate::exact::ExactScalar;
use crate::graph::VertexId;
use crate::tower::CoverTower;
use crate::verify::{
    contraction_floor, distance_enclosure, image_distance_upper, lrs_sample_check, quotient_exact,
    LrsReport,
};

/// The thread through every special vertex.
pub fn canonical_base_point(tower: &CoverTower, depth: usize) -> Result<Thread> {
    Thread::special(tower, depth)
}

fn require_bd(atlas: &IntervalAtlas) -> Result<()> {
    if !atlas.tower().is_bd() {
        return Err(Error::Unsupported(
            "the extension uses backward orbits and needs bidirectional maps".into(),
        ));
    }
    Ok(())
}

/// Siblings of `z` at level `k`, as depth-`k` threads.
fn siblings(tower: &CoverTower, z: &Thread, k: usize) -> Result<Vec<Thread>> {
    tower
        .children(k - 1, z.at(k - 1))
        .iter()
        .filter(|&&c| c != z.at(k))
        .map(|&c| Thread::from_top(tower, k, c))
        .collect()
}

/// Least depth `d >= 1` such that every thread first differing from `z` at
/// any level `d..=atlas depth` has a certified, crossing-free quotient bound
/// below 1.
pub fn contraction_depth(atlas: &IntervalAtlas, z: &Thread) -> Result<usize> {
    require_bd(atlas)?;
    let t = atlas.tower();
    if z.depth() < atlas.depth() {
        return Err(Error::Depth("base point shallower than the atlas".into()));
    }
    let mut d = atlas.depth() + 1;
    for k in (1..=atlas.depth()).rev() {
        let zk = z.truncate(k);
        let mut ok = true;
        for y in siblings(t, &zk, k)? {
            let r = quotient_exact(atlas, &zk, &y)?;
            if r.crossing || r.bound >= ExactScalar::one() {
                ok = false;
                break;
            }
        }
        if !ok {
            break;
        }
        d = k;
    }
    if d > atlas.depth() {
        return Err(Error::certification(
            "contraction near the base point",
            atlas.depth(),
            "no level of the atlas contracts all pairs with the base point",
        ));
    }
    Ok(d)
}

/// Backward orbit `T^{-i}(z)` for `0 <= i <= horizon`, at the deepest depth
/// the dynamics allows.
#[derive(Clone, Debug)]
pub struct BackwardOrbit {
    points: Vec<Thread>,
}

impl BackwardOrbit {
    pub fn new(tower: &CoverTower, z: &Thread, horizon: usize) -> Result<Self> {
        let mut points = Vec::with_capacity(horizon + 1);
        points.push(z.clone());
        for i in 0..horizon {
            let prev = &points[i];
            if prev.depth() == 0 {
                break;
            }
            points.push(step_backward(tower, prev)?);
        }
        Ok(Self { points })
    }

    /// `T^{-i}(z)`, if computed.
    pub fn get(&self, i: usize) -> Option<&Thread> {
        self.points.get(i)
    }

    pub fn horizon(&self) -> usize {
        self.points.len() - 1
    }

    /// Whether `T^{-i}(z)` lies in the depth-`d` cylinder of `z`; `None` when
    /// the orbit point is not known that deep.
    fn in_cylinder(&self, i: usize, d: usize) -> Option<bool> {
        let p = self.points.get(i)?;
        if p.depth() < d {
            return None;
        }
        Some(p.prefix()[..=d] == self.points[0].prefix()[..=d])
    }
}

/// Return data of one spiral level.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReturnData {
    pub n: usize,
    /// Depth of the cylinder `U_n` around `z`.
    pub depth: usize,
    /// Depth of `U_{n+1}`.
    pub next_depth: usize,
    pub sigma: usize,
    pub kappa: usize,
    /// First `i > 0` with `T^{-i}(z) ∈ U_{n+1}`, when within the horizon.
    pub next_hit: Option<usize>,
    pub h: ExactScalar,
}

impl ReturnData {
    pub fn period(&self) -> usize {
        self.kappa - self.sigma
    }
}

/// Certifies `d(z, T^{-σ} z) > d(z, T^{-κ} z)`.
fn certify_distance_order(atlas: &IntervalAtlas, z: &Thread, ys: &Thread, yk: &Thread) -> Result<bool> {
    let (low_s, _) = distance_enclosure(atlas, z, ys)?;
    let (_, up_k) = distance_enclosure(atlas, z, yk)?;
    Ok(low_s > up_k)
}

struct Found {
    sigma: usize,
    kappa: usize,
    next_depth: usize,
    next_hit: Option<usize>,
}

/// Least `(σ, κ)` for `U_n` at depth `depth`, scanning `U_{n+1}` depths
/// upward.
fn search_level(atlas: &IntervalAtlas, orbit: &BackwardOrbit, depth: usize) -> Result<Option<Found>> {
    let z = orbit.get(0).unwrap();
    for next in depth + 1..=atlas.depth() {
        let mut next_hit = None;
        let mut returns = Vec::new();
        for i in 1..=orbit.horizon() {
            match orbit.in_cylinder(i, next) {
                Some(true) => {
                    next_hit = Some(i);
                    break;
                }
                Some(false) => {}
                None => break,
            }
            if orbit.in_cylinder(i, depth) == Some(true) {
                returns.push(i);
            }
        }
        for w in returns.windows(2) {
            let (sigma, kappa) = (w[0], w[1]);
            let (ys, yk) = (orbit.get(sigma).unwrap(), orbit.get(kappa).unwrap());
            let d = atlas.depth().min(ys.depth()).min(yk.depth());
            if certify_distance_order(atlas, &z.truncate(d), &ys.truncate(d), &yk.truncate(d))? {
                return Ok(Some(Found { sigma, kappa, next_depth: next, next_hit }));
            }
        }
    }
    Ok(None)
}

/// `U_n`, `σ_n`, `κ_n` for `n = 1..=levels`, without the gaps. A level whose
/// search fails moves its neighbourhood one level deeper and retries.
pub fn find_return_times(
    atlas: &IntervalAtlas,
    z: &Thread,
    levels: usize,
    horizon: usize,
) -> Result<Vec<ReturnData>> {
    require_bd(atlas)?;
    let orbit = BackwardOrbit::new(atlas.tower(), z, horizon)?;
    let mut depth = contraction_depth(atlas, z)?;
    let mut out: Vec<ReturnData> = Vec::with_capacity(levels);
    for n in 1..=levels {
        loop {
            if depth >= atlas.depth() {
                return Err(Error::SearchFailure {
                    level: n,
                    detail: format!(
                        "no certified return pair within horizon {horizon} up to depth {}",
                        atlas.depth()
                    ),
                });
            }
            if let Some(Found { sigma, kappa, next_depth, next_hit }) = search_level(atlas, &orbit, depth)? {
                out.push(ReturnData {
                    n,
                    depth,
                    next_depth,
                    sigma,
                    kappa,
                    next_hit,
                    h: ExactScalar::zero(),
                });
                depth = next_depth;
                break;
            }
            // drop this neighbourhood and use the next deeper one
            depth += 1;
            if let Some(prev) = out.last_mut() {
                prev.next_depth = depth;
            }
        }
    }
    Ok(out)
}

/// Largest power of two strictly below a positive value.
fn pow2_below(v: &ExactScalar) -> ExactScalar {
    let mut e = (-v.log2_abs()).floor().max(0.0) as u64;
    loop {
        let p = ExactScalar::pow2_neg(e);
        if p < *v {
            // step back up while still below
            while e > 0 && ExactScalar::pow2_neg(e - 1) < *v {
                e -= 1;
            }
            return ExactScalar::pow2_neg(e);
        }
        e += 1;
    }
}

/// Certified lower bound on `min_{y ∈ U_n \ U_{n+1}} d(z, y) - d(Tz, Ty)`,
/// taken over the sub-cylinders at the first differing level and refined
/// one level at a time where the difference is not yet positive.
pub fn certified_min_difference(atlas: &IntervalAtlas, z: &Thread, depth: usize, next_depth: usize) -> Result<ExactScalar> {
    let t = atlas.tower();
    let mut best: Option<ExactScalar> = None;
    for k in depth + 1..=next_depth {
        let mut pending = siblings(t, &z.truncate(k), k)?;
        while let Some(y) = pending.pop() {
            let e = y.depth();
            let ze = z.truncate(e);
            let mut lower = distance_enclosure(atlas, &ze, &y)?.0;
            if e > k {
                lower = lower.max(atlas.pi_bracket(&ze)?.gap(&atlas.pi_bracket(&y)?));
            }
            let upper = image_distance_upper(atlas, &ze, &y)?;
            let diff = &lower - &upper;
            if diff.is_positive() {
                if best.as_ref().is_none_or(|b| diff < *b) {
                    best = Some(diff);
                }
                continue;
            }
            if e >= atlas.depth() {
                return Err(Error::certification(
                    "contraction gap on U_n minus U_{n+1}",
                    k,
                    format!("sub-cylinder {:?} not certified at atlas depth", y.prefix()),
                ));
            }
            for &c in t.children(e, y.top()) {
                pending.push(Thread::from_top(t, e + 1, c)?);
            }
        }
    }
    best.ok_or_else(|| Error::Degenerate("U_n equals U_{n+1}".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiralPoint {
    pub j: usize,
    /// Exponent `e` with base point `T^{-e}(z)`, `e = κ_n - 1 - j`.
    pub back: usize,
    pub height: ExactScalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpiralLevel {
    pub n: usize,
    pub period: usize,
    pub points: Vec<SpiralPoint>,
}

/// A point of the represented part of `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZPoint {
    /// `(x, -1)` at cylinder resolution.
    Base(Thread),
    /// `z^n_j`.
    Spiral { n: usize, j: usize },
}

#[derive(Clone, Debug)]
pub struct ExtensionSpace {
    atlas: Arc<IntervalAtlas>,
    base: Thread,
    contraction_depth: usize,
    levels: Vec<ReturnData>,
    h_next: ExactScalar,
    spirals: Vec<SpiralLevel>,
    orbit: BackwardOrbit,
}

/// `-1 + (P-1-j)/(2(P-1)) (h_n + h_{n+1}) + h_n/2`.
pub fn spiral_height(period: usize, j: usize, h_n: &ExactScalar, h_next: &ExactScalar) -> ExactScalar {
    let p1 = (period - 1) as u64;
    let frac = if p1 == 0 {
        ExactScalar::zero()
    } else {
        (h_n + h_next).mul_int(p1 - j as u64).div_int(2 * p1)
    };
    ExactScalar::from_integer(-1) + frac + h_n.half()
}

/// Builds `levels` spiral levels from backward returns within `horizon`.
pub fn build_extension(atlas: Arc<IntervalAtlas>, levels: usize, horizon: usize) -> Result<ExtensionSpace> {
    if levels == 0 {
        return Err(Error::Domain("need at least one spiral level".into()));
    }
    require_bd(&atlas)?;
    let t = atlas.tower().clone();
    let z = canonical_base_point(&t, t.height())?;
    let d_star = contraction_depth(&atlas, &z)?;
    let mut data = find_return_times(&atlas, &z, levels, horizon)?;
    let mut cap = ExactScalar::ratio(1, 2);
    for rd in &mut data {
        let m = certified_min_difference(&atlas, &z, rd.depth, rd.next_depth)?;
        rd.h = pow2_below(&m.min(cap.clone()));
        cap = rd.h.half();
    }
    let h_next = pow2_below(&cap);
    let mut spirals = Vec::with_capacity(levels);
    for (idx, rd) in data.iter().enumerate() {
        let hn1 = data.get(idx + 1).map_or(&h_next, |r| &r.h);
        let period = rd.period();
        let points = (0..period)
            .map(|j| SpiralPoint {
                j,
                back: rd.kappa - 1 - j,
                height: spiral_height(period, j, &rd.h, hn1),
            })
            .collect();
        spirals.push(SpiralLevel { n: rd.n, period, points });
    }
    let orbit = BackwardOrbit::new(&t, &z, data.last().map_or(0, |r| r.kappa))?;
    Ok(ExtensionSpace { atlas, base: z, contraction_depth: d_star, levels: data, h_next, spirals, orbit })
}

impl ExtensionSpace {
    pub fn atlas(&self) -> &Arc<IntervalAtlas> {
        &self.atlas
    }

    pub fn base_point(&self) -> &Thread {
        &self.base
    }

    pub fn contraction_depth(&self) -> usize {
        self.contraction_depth
    }

    pub fn levels(&self) -> &[ReturnData] {
        &self.levels
    }

    /// `h_{N+1}`, only clamped below `h_N / 2`.
    pub fn h_next(&self) -> &ExactScalar {
        &self.h_next
    }

    pub fn spirals(&self) -> &[SpiralLevel] {
        &self.spirals
    }

    pub fn periods(&self) -> Vec<usize> {
        self.spirals.iter().map(|s| s.period).collect()
    }

    /// `T^{-e}(z)`.
    pub fn orbit_point(&self, e: usize) -> Result<&Thread> {
        self.orbit
            .get(e)
            .ok_or_else(|| Error::Domain(format!("orbit point {e} beyond the computed range")))
    }

    fn spiral(&self, n: usize, j: usize) -> Result<&SpiralPoint> {
        self.spirals
            .get(n.wrapping_sub(1))
            .and_then(|s| s.points.get(j))
            .ok_or_else(|| Error::Domain(format!("no spiral point z^{n}_{j}")))
    }

    /// Height of a point (`-1` on the base).
    pub fn height(&self, p: &ZPoint) -> Result<ExactScalar> {
        match p {
            ZPoint::Base(_) => Ok(ExactScalar::from_integer(-1)),
            ZPoint::Spiral { n, j } => Ok(self.spiral(*n, *j)?.height.clone()),
        }
    }

    /// Base coordinate of a point.
    pub fn base_of(&self, p: &ZPoint) -> Result<Thread> {
        match p {
            ZPoint::Base(x) => Ok(x.clone()),
            ZPoint::Spiral { n, j } => Ok(self.orbit_point(self.spiral(*n, *j)?.back)?.clone()),
        }
    }

    /// `F`: the base map on `C × {-1}`, the cyclic shift on spiral levels.
    pub fn apply_f(&self, p: &ZPoint) -> Result<ZPoint> {
        match p {
            ZPoint::Base(x) => Ok(ZPoint::Base(step_forward(self.atlas.tower(), x)?)),
            ZPoint::Spiral { n, j } => {
                let period = self.spirals[n - 1].period;
                self.spiral(*n, *j)?;
                Ok(ZPoint::Spiral { n: *n, j: (j + 1) % period })
            }
        }
    }

    pub fn to_json(&self) -> ExtensionJson {
        ExtensionJson {
            atlas_depth: self.atlas.depth(),
            mode: self.atlas.mode(),
            tower: self.atlas.tower().to_json(),
            base: self.base.prefix().to_vec(),
            contraction_depth: self.contraction_depth,
            levels: self.levels.clone(),
            h_next: self.h_next.clone(),
            spirals: self.spirals.clone(),
            periods: self.periods(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionJson {
    pub tower: crate::tower::TowerJson,
    pub atlas_depth: usize,
    pub mode: crate::embedding::AtlasMode,
    pub base: Vec<VertexId>,
    pub contraction_depth: usize,
    pub levels: Vec<ReturnData>,
    pub h_next: ExactScalar,
    pub spirals: Vec<SpiralLevel>,
    pub periods: Vec<usize>,
}

/// The closing inequality chain at the junction of spiral level `n` and the
/// base point, with both sides as exact bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingCertificate {
    pub n: usize,
    /// `d(Tz, T^{1-κ}z) + h_n < d(z, T^{-κ}z)`.
    pub contraction: bool,
    /// `d(z, T^{-κ}z) + h_{n+1}/2 < d(z, T^{-σ}z) + h_n/2`.
    pub ordering: bool,
    /// Upper bound of `ρ(F(z,-1), F(z^n_{P-1}))`.
    pub lhs_upper: ExactScalar,
    /// Lower bound of `ρ((z,-1), z^n_{P-1})`.
    pub rhs_lower: ExactScalar,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionReport {
    pub closing: Vec<ClosingCertificate>,
    pub periods: Vec<usize>,
    pub periods_increasing: bool,
    pub heights_decreasing: bool,
    pub spiral_orbits_periodic: bool,
    pub base_pairs: LrsReport,
    pub base_spiral_pairs: usize,
    pub base_spiral_certified: usize,
    pub base_spiral_skipped_crossing: usize,
    pub spiral_pairs: usize,
    pub violations: Vec<String>,
}

impl ExtensionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
            && self.closing.iter().all(|c| c.holds)
            && self.periods_increasing
            && self.heights_decreasing
            && self.spiral_orbits_periodic
            && self.base_pairs.passed()
    }
}

fn closing_certificate(ext: &ExtensionSpace, idx: usize) -> Result<ClosingCertificate> {
    let atlas = &ext.atlas;
    let rd = &ext.levels[idx];
    let hn1 = ext.levels.get(idx + 1).map_or(&ext.h_next, |r| &r.h);
    let d = atlas.depth();
    let z = ext.base.truncate(d);
    let yk = ext.orbit_point(rd.kappa)?.truncate(d);
    let ys = ext.orbit_point(rd.sigma)?.truncate(d);
    // d(Tz, T(T^{-κ}z)) is bounded through the f brackets of the pair (z, T^{-κ}z)
    let image_up = image_distance_upper(atlas, &z, &yk)?;
    let (low_k, up_k) = distance_enclosure(atlas, &z, &yk)?;
    let (low_s, _) = distance_enclosure(atlas, &z, &ys)?;
    let contraction = &image_up + &rd.h < low_k;
    let ordering = &up_k + &hn1.half() < &low_s + &rd.h.half();
    let lhs_upper = &(&image_up + &rd.h) + &hn1.half();
    let rhs_lower = &low_s + &rd.h.half();
    let holds = contraction && ordering && lhs_upper < rhs_lower;
    Ok(ClosingCertificate { n: rd.n, contraction, ordering, lhs_upper, rhs_lower, holds })
}

/// A thread agreeing with `x` below level `k` and differing at `k`, extended
/// at random to `depth`.
fn random_neighbour(tower: &CoverTower, x: &Thread, k: usize, depth: usize, rng: &mut ChaCha8Rng) -> Result<Option<Thread>> {
    let kids: Vec<VertexId> = tower
        .children(k - 1, x.at(k - 1))
        .iter()
        .copied()
        .filter(|&c| c != x.at(k))
        .collect();
    let Some(&c) = kids.choose(rng) else { return Ok(None) };
    let mut top = c;
    for m in k..depth {
        top = *tower.children(m, top).choose(rng).expect("covers are onto");
    }
    Ok(Some(Thread::from_top(tower, depth, top)?))
}

/// Certifies the closing chain for every level, checks periods and heights,
/// and samples `samples` pairs: half base-base, a quarter base-spiral and
/// the rest spiral-spiral.
pub fn verify_extension(ext: &ExtensionSpace, samples: usize, seed: u64) -> Result<ExtensionReport> {
    let atlas = &ext.atlas;
    let t = atlas.tower();
    let closing = (0..ext.levels.len())
        .map(|i| closing_certificate(ext, i))
        .collect::<Result<Vec<_>>>()?;
    let periods = ext.periods();
    let periods_increasing = periods.windows(2).all(|w| w[0] < w[1]);
    let heights_decreasing = ext.spirals.iter().all(|s| {
        s.points.windows(2).all(|w| w[1].height < w[0].height)
            && s.points.iter().all(|p| p.height > ExactScalar::from_integer(-1))
    });
    let mut spiral_orbits_periodic = true;
    for s in &ext.spirals {
        let start = ZPoint::Spiral { n: s.n, j: 0 };
        let mut p = start.clone();
        for step in 1..=s.period {
            p = ext.apply_f(&p)?;
            if (p == start) != (step == s.period) {
                spiral_orbits_periodic = false;
            }
        }
    }

    let floor = contraction_floor(atlas).unwrap_or(1).max(2);
    let cap = atlas.depth().min(floor + 2).max(2);
    let n_base = samples / 2;
    let n_mixed = samples / 4;
    let n_spiral = samples - n_base - n_mixed;
    let base_pairs = lrs_sample_check(atlas, cap, n_base, seed)?;
    let mut violations: Vec<String> = base_pairs
        .violations
        .iter()
        .map(|v| format!("base pair {:?} / {:?}: quotient bound {}", v.x, v.y, v.bound))
        .collect();

    // base-spiral pairs: (y, -1) against z^n_j with j < P - 1
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut mixed = Vec::with_capacity(n_mixed);
    let eligible: Vec<&SpiralLevel> = ext.spirals.iter().filter(|s| s.period >= 2).collect();
    if !eligible.is_empty() && cap >= floor {
        while mixed.len() < n_mixed {
            let s = eligible[rng.gen_range(0..eligible.len())];
            let j = rng.gen_range(0..s.period - 1);
            let x = ext.orbit_point(s.points[j].back)?.truncate(cap);
            let k = rng.gen_range(floor..=cap);
            if let Some(y) = random_neighbour(t, &x, k, cap, &mut rng)? {
                mixed.push((s.n, j, x, y));
            }
        }
    }
    let mixed_results = mixed
        .par_iter()
        .map(|(n, j, x, y)| -> Result<Option<Option<String>>> {
            let q = quotient_exact(atlas, y, x)?;
            if q.crossing {
                return Ok(None);
            }
            let h_j = ext.height(&ZPoint::Spiral { n: *n, j: *j })?;
            let h_j1 = ext.height(&ZPoint::Spiral { n: *n, j: j + 1 })?;
            let one = ExactScalar::one();
            let lhs = &q.numerator + &(&h_j1 + &one);
            let rhs = &q.denominator + &(&h_j + &one);
            Ok(Some((lhs >= rhs).then(|| format!("base {:?} against z^{n}_{j}", y.prefix()))))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut base_spiral_certified = 0;
    let mut base_spiral_skipped_crossing = 0;
    for r in mixed_results {
        match r {
            None => base_spiral_skipped_crossing += 1,
            Some(None) => base_spiral_certified += 1,
            Some(Some(v)) => violations.push(v),
        }
    }

    // spiral-spiral pairs: isolation, certified by a positive lower bound on ρ
    let all: Vec<(usize, usize)> = ext
        .spirals
        .iter()
        .flat_map(|s| (0..s.period).map(move |j| (s.n, j)))
        .collect();
    let mut spiral_pairs = 0;
    if all.len() >= 2 {
        for _ in 0..n_spiral {
            let pair: Vec<&(usize, usize)> = all.choose_multiple(&mut rng, 2).collect();
            let (p, q) = (
                ZPoint::Spiral { n: pair[0].0, j: pair[0].1 },
                ZPoint::Spiral { n: pair[1].0, j: pair[1].1 },
            );
            spiral_pairs += 1;
            let dh = (&ext.height(&p)? - &ext.height(&q)?).abs();
            if dh.is_positive() {
                continue;
            }
            let (bp, bq) = (ext.base_of(&p)?, ext.base_of(&q)?);
            let d = atlas.depth().min(bp.depth()).min(bq.depth());
            let (bp, bq) = (bp.truncate(d), bq.truncate(d));
            let isolated = bp.first_difference(&bq).is_some()
                && atlas.pi_bracket(&bp)?.gap(&atlas.pi_bracket(&bq)?).is_positive();
            if !isolated {
                violations.push(format!("spiral points {pair:?} not separated"));
            }
        }
    }

    Ok(ExtensionReport {
        closing,
        periods,
        periods_increasing,
        heights_decreasing,
        spiral_orbits_periodic,
        base_pairs,
        base_spiral_pairs: mixed.len(),
        base_spiral_certified,
        base_spiral_skipped_crossing,
        spiral_pairs,
        violations,
    })
}
