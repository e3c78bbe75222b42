//! Validated iterated function systems of contracting similitudes on a
//! convex polygonal base, with level-n cell enumeration and the Moran
//! dimension.
//!
//! A structure is accepted when
//! (a) the base boundary is covered by the level-1 boundary chain, and
//! (b) distinct level-1 images have disjoint interiors,
//! with each map contracting and mapping the base into itself.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{boundary_chain, cell_boundary, Chain1, ChainError, ChainLevelSet};
use crate::geom::{
    point_segment_dist, polygon_intersection_area, ConvexPolygon, GeomError, Similitude,
    SnapGrid, MIN_EDGE_CELLS,
};
use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum StructureError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error("need at least 2 maps, got {0}")]
    TooFewMaps(usize),
    #[error("map {index} has ratio {ratio}, not in (0, 1)")]
    NonContractive { index: usize, ratio: f64 },
    #[error("map {index} sends a base vertex to ({x}, {y}), outside the base")]
    NotIntoBase { index: usize, x: f64, y: f64 },
    #[error("base boundary piece ({x0}, {y0})..({x1}, {y1}) is not covered by level-1 cell boundaries")]
    ConditionA { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("cells {i} and {j} overlap with area {area}")]
    ConditionB { i: usize, j: usize, area: f64 },
    #[error("level {requested} exceeds the depth limit {max}")]
    DepthLimit { requested: usize, max: usize },
    #[error("ratio list is empty")]
    NoRatios,
}

/// Contracting similitude system on a convex base, validated on
/// construction.
#[derive(Debug, Clone)]
pub struct CellularStructure {
    base: ConvexPolygon,
    maps: Vec<Similitude>,
    grid: SnapGrid,
    depth_limit: usize,
}

/// Scale data used in rate and error bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureConstants {
    /// Base polygon diameter.
    pub d_k: f64,
    /// Measured maximum number of next-level sub-segments a boundary
    /// 1-cell splits into.
    pub m: usize,
    /// Coarse bound for `m`: the number of maps.
    pub m_apriori: usize,
    /// Contraction ratios in map order.
    pub r_list: Vec<f64>,
}

impl CellularStructure {
    /// Validates and wraps a base polygon and its maps. `depth_limit`
    /// overrides the default cap on iteration level.
    pub fn validate(
        base: ConvexPolygon,
        maps: Vec<Similitude>,
        depth_limit: Option<usize>,
    ) -> Result<Self, StructureError> {
        if maps.len() < 2 {
            return Err(StructureError::TooFewMaps(maps.len()));
        }
        for (index, m) in maps.iter().enumerate() {
            if !(m.ratio > 0.0 && m.ratio < 1.0 && m.ratio.is_finite()) {
                return Err(StructureError::NonContractive {
                    index,
                    ratio: m.ratio,
                });
            }
        }

        let grid = SnapGrid::for_diameter(base.diameter());
        let tol = 2.0 * grid.eps();

        for (index, m) in maps.iter().enumerate() {
            for v in base.vertices() {
                let p = m.apply(*v);
                if !base.contains(p, tol) {
                    return Err(StructureError::NotIntoBase {
                        index,
                        x: p.x,
                        y: p.y,
                    });
                }
            }
        }

        let cells: Vec<ConvexPolygon> = maps.iter().map(|m| base.map(m)).collect();

        // (b) pairwise interior disjointness, up to a sliver of relative
        // area 1e-9.
        let area_tol = 1e-9 * base.area();
        for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                let a = polygon_intersection_area(&cells[i], &cells[j]);
                if a > area_tol {
                    return Err(StructureError::ConditionB { i, j, area: a });
                }
            }
        }

        // (a) every base boundary edge is covered by level-1 boundaries.
        let b1 = boundary_chain(&cells, &grid)?;
        check_boundary_coverage(&base, &b1, &grid)?;

        let depth_limit = depth_limit.unwrap_or_else(|| default_depth_limit(maps.len()));
        Ok(CellularStructure {
            base,
            maps,
            grid,
            depth_limit,
        })
    }

    /// Replaces the configured depth cap; the snap-pitch cap still applies.
    pub fn with_depth_limit(mut self, limit: usize) -> Self {
        self.depth_limit = limit;
        self
    }

    pub fn base(&self) -> &ConvexPolygon {
        &self.base
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn grid(&self) -> &SnapGrid {
        &self.grid
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.ratio).collect()
    }

    pub fn dimension(&self) -> f64 {
        moran_dimension(&self.ratios()).expect("validated maps have a Moran root")
    }

    /// Deepest admissible level: the configured cap, tightened so the
    /// shortest level-n edge stays well above the snap pitch.
    pub fn max_depth(&self) -> usize {
        let r_min = self
            .maps
            .iter()
            .map(|m| m.ratio)
            .fold(f64::INFINITY, f64::min);
        let floor_len = MIN_EDGE_CELLS * self.grid.eps();
        let snap_cap = ((self.base.min_edge_len() / floor_len).ln() / (1.0 / r_min).ln()).floor();
        let snap_cap = if snap_cap.is_finite() && snap_cap >= 0.0 {
            snap_cap as usize
        } else {
            0
        };
        self.depth_limit.min(snap_cap)
    }

    /// All level-`n` cells `F_w(base)` in lexicographic word order.
    pub fn iterate(&self, n: usize) -> Result<Vec<ConvexPolygon>, StructureError> {
        let max = self.max_depth();
        if n > max {
            return Err(StructureError::DepthLimit { requested: n, max });
        }
        if n == 0 {
            return Ok(vec![self.base.clone()]);
        }
        let m = self.maps.len();
        let count = m.checked_pow(n as u32).expect("cell count fits in usize");
        let cells = par::map_indices(count, |idx| {
            // digits of idx, most significant first, give the word; the
            // composition is left-folded so every word associates the
            // same way regardless of evaluation order
            let mut rem = idx;
            let mut digits = vec![0usize; n];
            for pos in (0..n).rev() {
                digits[pos] = rem % m;
                rem /= m;
            }
            let mut sim = self.maps[digits[0]];
            for &d in &digits[1..] {
                sim = sim.compose(&self.maps[d]);
            }
            self.base.map(&sim)
        });
        Ok(cells)
    }

    /// Boundary, outer, and inner chains at level `n`.
    pub fn level_chains(&self, n: usize) -> Result<ChainLevelSet, StructureError> {
        let cells = self.iterate(n)?;
        Ok(ChainLevelSet::build(n, &cells, &self.base, &self.grid)?)
    }

    /// Diameter, measured subdivision count, and ratio list.
    pub fn constants(&self) -> Result<StructureConstants, StructureError> {
        let b1 = self.level_chains(1)?.b;
        let cells2 = self.iterate(2.min(self.max_depth()))?;
        let mut verts: std::collections::BTreeSet<crate::geom::SnapKey> =
            std::collections::BTreeSet::new();
        for c in &cells2 {
            for v in c.vertices() {
                verts.insert(self.grid.snap(*v));
            }
        }
        let tol = 2.0 * self.grid.eps();
        let mut m_measured = 1usize;
        for (seg, _) in b1.iter() {
            let a = self.grid.unsnap(seg.tail);
            let b = self.grid.unsnap(seg.head);
            let len = a.dist(b);
            let u = b.sub(a).scale(1.0 / len);
            let mut interior = 0usize;
            for k in &verts {
                let p = self.grid.unsnap(*k);
                let t = p.sub(a).dot(u);
                if t > tol && t < len - tol && u.cross(p.sub(a)).abs() <= tol {
                    interior += 1;
                }
            }
            m_measured = m_measured.max(interior + 1);
        }
        Ok(StructureConstants {
            d_k: self.base.diameter(),
            m: m_measured,
            m_apriori: self.maps.len(),
            r_list: self.ratios(),
        })
    }
}

fn default_depth_limit(m: usize) -> usize {
    // keeps the cell count near or below 4^12 at the cap
    if m <= 4 {
        12
    } else {
        ((24.0 / (m as f64).log2()).floor() as usize).max(1)
    }
}

/// Every maximal unsplit piece of the base boundary must lie inside some
/// segment of `b1`.
fn check_boundary_coverage(
    base: &ConvexPolygon,
    b1: &Chain1,
    grid: &SnapGrid,
) -> Result<(), StructureError> {
    let tol = 2.0 * grid.eps();
    for (edge, _) in cell_boundary(base, grid) {
        let a = grid.unsnap(edge.tail);
        let b = grid.unsnap(edge.head);
        let len = a.dist(b);
        let u = b.sub(a).scale(1.0 / len);
        // split the edge at every chain endpoint that lies on it
        let mut params = vec![0.0, len];
        for (seg, _) in b1.iter() {
            for k in [seg.tail, seg.head] {
                let p = grid.unsnap(k);
                let t = p.sub(a).dot(u);
                if t > tol && t < len - tol && u.cross(p.sub(a)).abs() <= tol {
                    params.push(t);
                }
            }
        }
        params.sort_by(|x, y| x.partial_cmp(y).unwrap());
        params.dedup_by(|x, y| (*x - *y).abs() <= tol);
        for w in params.windows(2) {
            let mid = a.add(u.scale(0.5 * (w[0] + w[1])));
            let covered = b1.iter().any(|(seg, _)| {
                point_segment_dist(mid, grid.unsnap(seg.tail), grid.unsnap(seg.head)) <= tol
            });
            if !covered {
                let p = a.add(u.scale(w[0]));
                let q = a.add(u.scale(w[1]));
                return Err(StructureError::ConditionA {
                    x0: p.x,
                    y0: p.y,
                    x1: q.x,
                    y1: q.y,
                });
            }
        }
    }
    Ok(())
}

/// Unique root of `sum r_j^s = 1` by bisection to 1e-12.
pub fn moran_dimension(ratios: &[f64]) -> Result<f64, StructureError> {
    if ratios.is_empty() {
        return Err(StructureError::NoRatios);
    }
    for (index, &r) in ratios.iter().enumerate() {
        if !(r > 0.0 && r < 1.0 && r.is_finite()) {
            return Err(StructureError::NonContractive { index, ratio: r });
        }
    }
    let m = ratios.len() as f64;
    if ratios.len() == 1 {
        return Ok(0.0);
    }
    let r_max = ratios.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0f64;
    let mut hi = m.ln() / (1.0 / r_max).ln() + 64.0;
    debug_assert!(contraction_sum(ratios, hi) < 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if contraction_sum(ratios, mid) >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `sum r_j^s`.
pub fn contraction_sum(ratios: &[f64], s: f64) -> f64 {
    ratios.iter().map(|r| r.powf(s)).sum()
}
