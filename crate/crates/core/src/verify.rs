//! Certified checks on an atlas. Every inequality is decided on exact
//! enclosures: numerators from bracket diameters, denominators from gaps.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{enumerate_threads, successor, Thread};
use crate::embedding::atlas::IntervalAtlas;
use crate::error::{Error, Result};
use crate::exact::{ExactInterval, ExactScalar};
use crate::graph::VertexId;

/// `3 s / 2^s`.
pub fn theoretical_bound(s: usize) -> ExactScalar {
    ExactScalar::from_integer(3 * s as i64).div_pow2(s as u64)
}

/// Least level `k >= 1` with `3 s_k < 2^{s_k}`, if the tower has one.
pub fn contraction_floor(atlas: &IntervalAtlas) -> Option<usize> {
    let t = atlas.tower();
    (1..=t.height()).find(|&k| theoretical_bound(t.s(k)) < ExactScalar::one())
}

/// Lower bound on the distance between points of the `D`-cylinders of two
/// siblings `r != s` at level `k`: `(diam A_r - diam D_r) / 2`. Certifies that
/// it exceeds `diam A_r / 3` and that the exact gap between `D_r` and `D_s`
/// is at least as large.
pub fn separation_lower_bound(
    atlas: &IntervalAtlas,
    k: usize,
    r: VertexId,
    s: VertexId,
) -> Result<ExactScalar> {
    let t = atlas.tower();
    if k == 0 || k > atlas.depth() {
        return Err(Error::Depth(format!("no separation bound at level {k}")));
    }
    let parent = |v: VertexId| t.hom(k).map.get(&v);
    if r == s || parent(r).is_none() || parent(r) != parent(s) {
        return Err(Error::Domain(format!(
            "vertices {r} and {s} are not distinct siblings on level {k}"
        )));
    }
    let margin = atlas.margin(k, r)?;
    check_separation(atlas, k, r, s, margin)
}

fn check_separation(
    atlas: &IntervalAtlas,
    k: usize,
    r: VertexId,
    s: VertexId,
    margin: ExactScalar,
) -> Result<ExactScalar> {
    if margin <= atlas.slot_diam(k, r)?.div_int(3) {
        return Err(Error::certification(
            "separation > diam A / 3",
            k,
            format!("vertex {r}"),
        ));
    }
    let gap = atlas.interval_d(k, r)?.gap(&atlas.interval_d(k, s)?);
    if gap < margin {
        return Err(Error::certification(
            "D gap >= separation bound",
            k,
            format!("vertices {r}, {s}"),
        ));
    }
    Ok(margin)
}

/// Significant bits kept when distance bounds are rounded outward.
pub const ENCLOSURE_BITS: u64 = 64;

/// Exact `[lower, upper]` for `|π(p) - π(q)|` over all `p`, `q` in the
/// cylinders of two threads that differ at a level within the atlas.
/// The lower end is the sibling separation at the first differing level,
/// the upper end the diameter of the last shared bracket; both are rounded
/// outward to [`ENCLOSURE_BITS`] significant bits.
pub fn distance_enclosure(
    atlas: &IntervalAtlas,
    x: &Thread,
    y: &Thread,
) -> Result<(ExactScalar, ExactScalar)> {
    let k = x
        .first_difference(y)
        .ok_or_else(|| Error::Domain("threads do not differ".into()))?;
    if k > atlas.depth() {
        return Err(Error::Depth(format!(
            "first difference at level {k} beyond atlas depth {}",
            atlas.depth()
        )));
    }
    let lower = separation_lower_bound(atlas, k, x.at(k), y.at(k))?
        .max(separation_lower_bound(atlas, k, y.at(k), x.at(k))?);
    let upper = if k >= 2 {
        atlas.psi(k - 1, x.at(k - 1))?.clone()
    } else {
        atlas.level0_bracket().diam()
    };
    Ok((lower.round_down(ENCLOSURE_BITS), upper.round_up(ENCLOSURE_BITS)))
}

/// Upper bound for `|f(p) - f(q)|` over the cylinders of two threads,
/// from the `f` brackets at the first differing level, rounded up to
/// [`ENCLOSURE_BITS`] significant bits.
pub fn image_distance_upper(atlas: &IntervalAtlas, x: &Thread, y: &Thread) -> Result<ExactScalar> {
    let k = x
        .first_difference(y)
        .ok_or_else(|| Error::Domain("threads do not differ".into()))?;
    let (xk, yk) = (x.truncate(k), y.truncate(k));
    let ix = atlas.image_vertex(k, xk.top())?;
    let iy = atlas.image_vertex(k, yk.top())?;
    if ix == iy && k >= 2 {
        return Ok(atlas.psi(k - 1, ix)?.round_up(ENCLOSURE_BITS));
    }
    Ok(atlas.f_bracket(&xk)?.hull(&atlas.f_bracket(&yk)?).diam().round_up(ENCLOSURE_BITS))
}

/// Certified bound on `|f(p) - f(q)| / |p - q|` for all `p`, `q` in the
/// cylinders of two threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientReport {
    pub x: Vec<VertexId>,
    pub y: Vec<VertexId>,
    /// First level where the threads differ (`j + 1`).
    pub level: usize,
    /// Level-`j` vertices of the image cylinders.
    pub image_x: VertexId,
    pub image_y: VertexId,
    /// Index of the shared level-`j` vertex and of the image (`r_n`, `t_n`).
    pub source_index: Option<usize>,
    pub image_index: Option<usize>,
    /// Images differ or enter `W_j`; the index-increment argument is off.
    pub crossing: bool,
    pub numerator: ExactScalar,
    pub denominator: ExactScalar,
    pub bound: ExactScalar,
    pub bound_log2: f64,
    pub theoretical: ExactScalar,
    /// Comparison with the theoretical bound, when it applies.
    pub within_theoretical: Option<bool>,
}

/// Exact quotient bound for a pair of distinct threads of equal depth.
pub fn quotient_exact(atlas: &IntervalAtlas, x: &Thread, y: &Thread) -> Result<QuotientReport> {
    if x.depth() != y.depth() {
        return Err(Error::Domain("threads of different depth".into()));
    }
    let k = x
        .first_difference(y)
        .ok_or_else(|| Error::Domain("quotient of identical threads".into()))?;
    if k > atlas.depth() {
        return Err(Error::Depth(format!(
            "first difference at level {k} beyond atlas depth {}",
            atlas.depth()
        )));
    }
    let j = k - 1;
    let (xk, yk) = (x.truncate(k), y.truncate(k));
    let image_x = atlas.image_vertex(k, xk.top())?;
    let image_y = atlas.image_vertex(k, yk.top())?;
    let numerator = image_distance_upper(atlas, x, y)?;
    let denominator = distance_enclosure(atlas, x, y)?.0;
    let bound = numerator.checked_div(&denominator)?;
    let theoretical = theoretical_bound(atlas.tower().s(k));
    let (source_index, image_index, crossing) = if j >= 1 {
        let ix = atlas.indexing(j)?;
        let crossing = image_x != image_y || ix.in_w(image_x);
        (ix.index_of(x.at(j)), ix.index_of(image_x), crossing)
    } else {
        (None, None, image_x != image_y)
    };
    let within_theoretical = (j >= 1 && !crossing).then(|| bound <= theoretical);
    if atlas.mode() == crate::embedding::AtlasMode::Strict && within_theoretical == Some(false) {
        return Err(Error::certification(
            "quotient <= 3 s / 2^s",
            k,
            format!("threads {:?} and {:?}", x.prefix(), y.prefix()),
        ));
    }
    Ok(QuotientReport {
        x: x.prefix().to_vec(),
        y: y.prefix().to_vec(),
        level: k,
        image_x,
        image_y,
        source_index,
        image_index,
        crossing,
        bound_log2: bound.log2_abs(),
        numerator,
        denominator,
        bound,
        theoretical,
        within_theoretical,
    })
}

/// Per-level aggregate of certified quotient bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelQuotients {
    pub level: usize,
    pub pairs: usize,
    pub crossing: usize,
    pub max_bound: Option<ExactScalar>,
    pub max_bound_log2: Option<f64>,
    pub theoretical: ExactScalar,
    pub within_theoretical: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrsReport {
    pub depth: usize,
    pub seed: u64,
    pub samples: usize,
    pub floor: Option<usize>,
    pub certified: usize,
    pub skipped_crossing: usize,
    pub violations: Vec<QuotientReport>,
    pub max_ratio: Option<ExactScalar>,
    pub per_level: Vec<LevelQuotients>,
}

impl LrsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Random pairs of depth-`depth` threads agreeing through level `k - 1` and
/// differing at `k`, with `k` uniform in `levels`. Deterministic in `seed`.
pub fn sample_pairs(
    atlas: &IntervalAtlas,
    depth: usize,
    levels: std::ops::RangeInclusive<usize>,
    samples: usize,
    seed: u64,
) -> Result<Vec<(Thread, Thread)>> {
    let t = atlas.tower();
    if depth > t.height() {
        return Err(Error::Depth(format!("tower has no level {depth}")));
    }
    // levels with at least one vertex that has two children
    let branching: Vec<(usize, Vec<VertexId>)> = levels
        .filter(|&k| k >= 1 && k <= depth)
        .map(|k| {
            let parents: Vec<VertexId> = t
                .level(k - 1)
                .graph
                .vertices()
                .iter()
                .copied()
                .filter(|&p| t.children(k - 1, p).len() >= 2)
                .collect();
            (k, parents)
        })
        .filter(|(_, p)| !p.is_empty())
        .collect();
    if branching.is_empty() {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let extend = |rng: &mut ChaCha8Rng, k: usize, v: VertexId| -> Result<Thread> {
        let mut top = v;
        for m in k..depth {
            top = *t.children(m, top).choose(rng).expect("covers are onto");
        }
        Thread::from_top(t, depth, top)
    };
    let mut out = Vec::with_capacity(samples);
    for _ in 0..samples {
        let (k, parents) = &branching[rng.gen_range(0..branching.len())];
        let p = *parents.choose(&mut rng).unwrap();
        let kids: Vec<VertexId> = t.children(k - 1, p).choose_multiple(&mut rng, 2).copied().collect();
        let x = extend(&mut rng, *k, kids[0])?;
        let y = extend(&mut rng, *k, kids[1])?;
        out.push((x, y));
    }
    Ok(out)
}

/// Aggregates reports per first-difference level, ignoring crossings for
/// the maxima.
pub fn per_level_quotients(
    atlas: &IntervalAtlas,
    reports: &[QuotientReport],
    levels: std::ops::RangeInclusive<usize>,
) -> Vec<LevelQuotients> {
    levels
        .map(|k| {
            let at: Vec<&QuotientReport> = reports.iter().filter(|r| r.level == k).collect();
            let off: Vec<&&QuotientReport> = at.iter().filter(|r| !r.crossing).collect();
            let max_bound = off.iter().map(|r| r.bound.clone()).max();
            LevelQuotients {
                level: k,
                pairs: at.len(),
                crossing: at.len() - off.len(),
                max_bound_log2: max_bound.as_ref().map(ExactScalar::log2_abs),
                max_bound,
                theoretical: theoretical_bound(atlas.tower().s(k)),
                within_theoretical: off.iter().filter(|r| r.within_theoretical == Some(true)).count(),
            }
        })
        .collect()
}

/// Samples pairs whose first difference is at or below the contraction
/// floor and certifies that off-crossing quotient bounds are below 1.
pub fn lrs_sample_check(atlas: &IntervalAtlas, depth: usize, samples: usize, seed: u64) -> Result<LrsReport> {
    if depth < 2 || depth > atlas.depth() {
        return Err(Error::Depth(format!(
            "l.r.s. sampling needs 2 <= depth <= atlas depth {}",
            atlas.depth()
        )));
    }
    let floor = contraction_floor(atlas);
    let mut report = LrsReport {
        depth,
        seed,
        samples,
        floor,
        certified: 0,
        skipped_crossing: 0,
        violations: Vec::new(),
        max_ratio: None,
        per_level: Vec::new(),
    };
    let Some(floor) = floor.filter(|&f| f <= depth) else {
        return Ok(report);
    };
    let pairs = sample_pairs(atlas, depth, floor..=depth, samples, seed)?;
    let reports = pairs
        .par_iter()
        .map(|(x, y)| quotient_exact(atlas, x, y))
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        if r.crossing {
            report.skipped_crossing += 1;
            continue;
        }
        report.certified += 1;
        if r.bound >= ExactScalar::one() {
            report.violations.push(r.clone());
        }
        if report.max_ratio.as_ref().is_none_or(|m| r.bound > *m) {
            report.max_ratio = Some(r.bound.clone());
        }
    }
    report.per_level = per_level_quotients(atlas, &reports, floor..=depth);
    Ok(report)
}

/// At every level: `A` intervals have pairwise disjoint interiors, each `A`
/// sits inside its parent's `D`, and each `D` lies in the interior of its `A`.
pub fn disjointness_check(atlas: &IntervalAtlas) -> Result<bool> {
    let t = atlas.tower();
    for m in 1..=atlas.depth() {
        let ix = atlas.indexing(m)?;
        let mut rows: Vec<(ExactInterval, ExactInterval, VertexId)> = ix
            .order()
            .par_iter()
            .map(|&v| Ok((atlas.interval_a(m, v)?, atlas.interval_d(m, v)?, v)))
            .collect::<Result<_>>()?;
        rows.sort_by(|p, q| p.0.lo.cmp(&q.0.lo));
        for w in rows.windows(2) {
            if w[0].0.interiors_overlap(&w[1].0) {
                return Ok(false);
            }
        }
        for (a, d, v) in &rows {
            if !a.contains_in_interior(d) {
                return Ok(false);
            }
            if m >= 2 && !atlas.interval_d(m - 1, t.hom(m).map[v])?.contains(a) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// For every depth-`depth` thread: `f_bracket(x) = pi_bracket(successor(x))`,
/// and the `f` brackets of its one-level deepenings nest inside it when the
/// atlas reaches that far.
pub fn conjugacy_check(atlas: &IntervalAtlas, depth: usize) -> Result<bool> {
    let t = atlas.tower();
    if depth == 0 || depth > atlas.depth() + 1 || depth > t.height() {
        return Err(Error::Depth(format!(
            "conjugacy check at depth {depth} needs 1 <= depth <= {}",
            (atlas.depth() + 1).min(t.height())
        )));
    }
    let deepen = depth < t.height() && depth <= atlas.depth();
    let threads = enumerate_threads(t, depth)?;
    // brackets of the children's images, one per level-`depth` vertex
    let child_brackets: BTreeMap<VertexId, ExactInterval> = if deepen {
        t.level(depth)
            .graph
            .vertices()
            .par_iter()
            .map(|&v| Ok((v, atlas.interval_d(depth, v)?)))
            .collect::<Result<_>>()?
    } else {
        BTreeMap::new()
    };
    let results = threads
        .par_iter()
        .map(|x| -> Result<bool> {
            let fb = atlas.f_bracket(x)?;
            if fb != atlas.pi_bracket(&successor(t, x)?)? {
                return Ok(false);
            }
            if deepen {
                for &c in t.children(depth, x.top()) {
                    if !fb.contains(&child_brackets[&atlas.image_vertex(depth + 1, c)?]) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(results.into_iter().all(|b| b))
}

/// Every depth-`atlas.depth()` thread meets the `W` sets at most once.
pub fn w_membership_check(atlas: &IntervalAtlas) -> Result<Vec<Vec<VertexId>>> {
    let t = atlas.tower();
    let d = atlas.depth();
    let mut bad = Vec::new();
    for x in enumerate_threads(t, d)? {
        let hits = (1..=d)
            .filter(|&m| atlas.indexing(m).map(|ix| ix.in_w(x.at(m))).unwrap_or(false))
            .count();
        if hits > 1 {
            bad.push(x.prefix().to_vec());
        }
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::{build_atlas, AtlasMode};
    use crate::tower::odometer_tower;
    use std::sync::Arc;

    fn atlas(bases: &[usize], depth: usize, mode: AtlasMode) -> IntervalAtlas {
        build_atlas(Arc::new(odometer_tower(bases).unwrap()), depth, mode).unwrap()
    }

    #[test]
    fn theoretical_values() {
        assert_eq!(theoretical_bound(18), ExactScalar::ratio(27, 131072));
        assert_eq!(theoretical_bound(2), ExactScalar::ratio(3, 2));
    }

    #[test]
    fn separation_on_siblings() {
        let at = atlas(&[2, 9, 2], 2, AtlasMode::Checked);
        let t = at.tower().clone();
        let kids = t.children(1, 0).to_vec();
        for &r in &kids {
            for &s in &kids {
                if r != s {
                    let b = separation_lower_bound(&at, 2, r, s).unwrap();
                    assert!(b > at.slot_diam(2, r).unwrap().div_int(3));
                }
            }
        }
        let other = t.children(1, 1)[0];
        assert!(separation_lower_bound(&at, 2, kids[0], other).is_err());
        assert!(separation_lower_bound(&at, 2, kids[0], kids[0]).is_err());
    }

    #[test]
    fn quotient_decreases_with_depth() {
        let at = atlas(&[2, 9, 2, 2], 3, AtlasMode::Checked);
        let t = at.tower().clone();
        // x and y differ first at level 2, then at level 3, both off W
        let pairs = sample_pairs(&at, 3, 2..=3, 200, 1).unwrap();
        let reports: Vec<_> = pairs.iter().map(|(x, y)| quotient_exact(&at, x, y).unwrap()).collect();
        let lv = per_level_quotients(&at, &reports, 2..=3);
        let m2 = lv[0].max_bound.clone().unwrap();
        let m3 = lv[1].max_bound.clone().unwrap();
        assert!(m3 < m2);
        assert!(m2 <= ExactScalar::ratio(27, 131072));
        for r in reports.iter().filter(|r| !r.crossing) {
            assert_eq!(r.within_theoretical, Some(true));
            assert!(r.bound_log2 < 0.0);
        }
        let z = Thread::special(&t, 3).unwrap();
        assert!(quotient_exact(&at, &z, &z).is_err());
    }

    #[test]
    fn lrs_report_deterministic() {
        let at = atlas(&[2, 9, 2, 2], 3, AtlasMode::Checked);
        let a = lrs_sample_check(&at, 3, 100, 5).unwrap();
        let b = lrs_sample_check(&at, 3, 100, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.passed());
        assert_eq!(a.floor, Some(2));
        assert_eq!(a.certified + a.skipped_crossing, 100);
    }

    #[test]
    fn disjointness_and_mutation() {
        let mut at = atlas(&[2, 3, 3], 2, AtlasMode::Checked);
        assert!(disjointness_check(&at).unwrap());
        let t = at.tower().clone();
        let kids = t.children(1, 0).to_vec();
        let s0 = at.slot(2, kids[0]).unwrap();
        at.override_slot(2, kids[1], s0);
        assert!(!disjointness_check(&at).unwrap());
    }

    #[test]
    fn conjugacy_and_mutation() {
        let mut at = atlas(&[2, 9, 2], 2, AtlasMode::Checked);
        assert!(conjugacy_check(&at, 2).unwrap());
        assert!(conjugacy_check(&at, 3).unwrap());
        assert!(conjugacy_check(&at, 4).is_err());
        let old = at.image_vertex(2, 5).unwrap();
        at.override_successor(2, 5, (old + 1) % 2);
        assert!(!conjugacy_check(&at, 2).unwrap());
    }

    #[test]
    fn w_visited_once() {
        let at = atlas(&[2, 3, 3, 3], 3, AtlasMode::Checked);
        assert!(w_membership_check(&at).unwrap().is_empty());
    }
}
