//! Differentiable filling of the gaps between brackets.
//!
//! On each gap `[u, u + h]` between consecutive depth-`d` brackets the map is
//! the cubic Hermite interpolant `y0 + Δ (3τ²/h² - 2τ³/h³)`, `τ = t - u`, with
//! zero derivative at both ends.

use serde::{Deserialize, Serialize};

use crate::dynamics::Thread;
use crate::embedding::atlas::IntervalAtlas;
use crate::error::{Error, Result};
use crate::exact::{ExactInterval, ExactScalar};
use crate::graph::VertexId;

/// One gap and its cubic. The values are the midpoints of the `f` brackets
/// of the flanking cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapPiece {
    pub left: VertexId,
    pub right: VertexId,
    pub gap: ExactInterval,
    pub y0: ExactScalar,
    pub y1: ExactScalar,
}

/// Coefficients of `c0 + c1 τ + c2 τ² + c3 τ³` in the local variable `τ = t - u`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cubic {
    pub c0: ExactScalar,
    pub c1: ExactScalar,
    pub c2: ExactScalar,
    pub c3: ExactScalar,
}

impl GapPiece {
    pub fn width(&self) -> ExactScalar {
        self.gap.diam()
    }

    pub fn cubic(&self) -> Cubic {
        let h = self.width();
        let delta = &self.y1 - &self.y0;
        let h2 = &h * &h;
        let h3 = &h2 * &h;
        Cubic {
            c0: self.y0.clone(),
            c1: ExactScalar::zero(),
            c2: delta.mul_int(3).checked_div(&h2).expect("gap has positive width"),
            c3: -(delta.mul_int(2).checked_div(&h3).expect("gap has positive width")),
        }
    }

    /// Largest `|p'|` on the gap: `1.5 |Δ| / h`, attained at the midpoint.
    pub fn max_slope(&self) -> ExactScalar {
        (&self.y1 - &self.y0).abs().mul_int(3).half().checked_div(&self.width()).expect("positive width")
    }
}

impl Cubic {
    pub fn eval(&self, tau: &ExactScalar) -> ExactScalar {
        &(&(&(&self.c3 * tau) + &self.c2) * tau + &self.c1) * tau + &self.c0
    }

    pub fn derivative(&self, tau: &ExactScalar) -> ExactScalar {
        &(&(&self.c3.mul_int(3) * tau) + &self.c2.mul_int(2)) * tau + &self.c1
    }
}

/// The piecewise description on the gaps between consecutive depth-`depth`
/// brackets, left to right.
pub fn jarnik_extend(atlas: &IntervalAtlas, depth: usize) -> Result<Vec<GapPiece>> {
    if depth == 0 || depth > atlas.depth() {
        return Err(Error::Depth(format!(
            "gap filling at depth {depth} needs 1 <= depth <= {}",
            atlas.depth()
        )));
    }
    let tower = atlas.tower();
    let order = atlas.positional_order(depth)?;
    let mut brackets = Vec::with_capacity(order.len());
    for &v in &order {
        let x = Thread::from_top(tower, depth, v)?;
        let y = atlas.f_bracket(&x)?.midpoint();
        brackets.push((v, atlas.interval_d(depth, v)?, y));
    }
    brackets
        .windows(2)
        .map(|w| {
            let (l, r) = (&w[0], &w[1]);
            Ok(GapPiece {
                left: l.0,
                right: r.0,
                gap: ExactInterval::new(l.1.hi.clone(), r.1.lo.clone())?,
                y0: l.2.clone(),
                y1: r.2.clone(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::atlas::{build_atlas, AtlasMode};
    use crate::tower::odometer_tower;
    use std::sync::Arc;

    #[test]
    fn hermite_conditions() {
        let at = build_atlas(Arc::new(odometer_tower(&[2, 3, 3]).unwrap()), 2, AtlasMode::Checked).unwrap();
        for d in 1..=2 {
            let pieces = jarnik_extend(&at, d).unwrap();
            assert_eq!(pieces.len(), at.tower().s(d) - 1);
            for p in &pieces {
                let c = p.cubic();
                let h = p.width();
                assert!(h.is_positive());
                assert!(c.c1.is_zero());
                assert!(c.derivative(&ExactScalar::zero()).is_zero());
                assert!(c.derivative(&h).is_zero());
                assert_eq!(c.eval(&ExactScalar::zero()), p.y0);
                assert_eq!(c.eval(&h), p.y1);
                let mid = c.derivative(&h.half()).abs();
                assert_eq!(mid, p.max_slope());
                assert!(p.max_slope() <= (&p.y1 - &p.y0).abs().mul_int(3).checked_div(&h).unwrap());
            }
        }
        assert!(jarnik_extend(&at, 3).is_err());
    }
}
