//! Integer 1-chains over snapped segments, cell-boundary assembly, and the
//! outer/inner split.
//!
//! Storage is canonical: every segment is keyed with the lexicographically
//! smaller endpoint as tail and the traversal sign folded into the integer
//! coefficient, so equal chains have equal representations and iteration
//! order is deterministic. Chains are kept fully refined: no two stored
//! segments overlap in their interiors on a common supporting line.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{
    point_on_polygon_boundary, refine_collinear, ConvexPolygon, GeomError, OrientedSegment,
    Point2, SnapGrid, SnapKey,
};
use crate::par;

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("boundary chain coefficient {coeff} on {seg:?}; expected +1 or -1")]
    CoefficientAnomaly { seg: OrientedSegment, coeff: i64 },
    #[error("chain is not a union of closed loops near {vertex:?}")]
    NotACycle { vertex: SnapKey },
}

/// Finitely supported integer combination of oriented segments.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chain1 {
    terms: BTreeMap<OrientedSegment, i64>,
}

impl Chain1 {
    pub fn empty() -> Self {
        Chain1::default()
    }

    /// Builds a chain from arbitrary raw terms: canonicalizes orientations,
    /// merges duplicates, refines collinear overlaps, drops zeros.
    pub fn from_raw_terms<I>(raw: I, grid: &SnapGrid) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (OrientedSegment, i64)>,
    {
        let folded = fold_terms(raw);
        let refined = refine_collinear(&folded, grid)?;
        Ok(Chain1 {
            terms: fold_terms(refined).into_iter().collect(),
        })
    }

    /// Wraps terms that are already canonical and refined (e.g. a subset of
    /// an existing chain's terms).
    fn from_refined(terms: BTreeMap<OrientedSegment, i64>) -> Self {
        Chain1 { terms }
    }

    pub fn add(&self, other: &Chain1, grid: &SnapGrid) -> Result<Chain1, ChainError> {
        Chain1::from_raw_terms(
            self.iter().chain(other.iter()).map(|(s, k)| (*s, *k)),
            grid,
        )
    }

    pub fn scale(&self, factor: i64) -> Chain1 {
        if factor == 0 {
            return Chain1::empty();
        }
        Chain1 {
            terms: self.terms.iter().map(|(s, k)| (*s, k * factor)).collect(),
        }
    }

    /// Canonical-order iteration over (segment, coefficient).
    pub fn iter(&self) -> impl Iterator<Item = (&OrientedSegment, &i64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, seg: &OrientedSegment) -> i64 {
        let (canon, sign) = canonicalize(*seg);
        sign * self.terms.get(&canon).copied().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> i64 {
        self.terms.values().map(|k| k.abs()).max().unwrap_or(0)
    }

    /// Sum of |coefficient| times Euclidean segment length.
    pub fn total_length(&self, grid: &SnapGrid) -> f64 {
        self.terms
            .iter()
            .map(|(s, k)| {
                k.abs() as f64 * grid.unsnap(s.tail).dist(grid.unsnap(s.head))
            })
            .sum()
    }

    /// 0-boundary: head gets +k, tail gets -k; zero entries dropped.
    pub fn boundary0(&self) -> BTreeMap<SnapKey, i64> {
        let mut out: BTreeMap<SnapKey, i64> = BTreeMap::new();
        for (seg, k) in &self.terms {
            *out.entry(seg.head).or_insert(0) += k;
            *out.entry(seg.tail).or_insert(0) -= k;
        }
        out.retain(|_, v| *v != 0);
        out
    }

    pub fn is_cycle(&self) -> bool {
        self.boundary0().is_empty()
    }

    pub fn to_json(&self, grid: &SnapGrid) -> ChainJson {
        ChainJson {
            segments: self
                .terms
                .iter()
                .map(|(s, k)| {
                    let t = grid.unsnap(s.tail);
                    let h = grid.unsnap(s.head);
                    SegmentJson {
                        tail: [t.x, t.y],
                        head: [h.x, h.y],
                        coeff: *k,
                    }
                })
                .collect(),
        }
    }

    pub fn from_json(doc: &ChainJson, grid: &SnapGrid) -> Result<Chain1, ChainError> {
        Chain1::from_raw_terms(
            doc.segments.iter().map(|s| {
                (
                    OrientedSegment::new(
                        grid.snap(Point2::new(s.tail[0], s.tail[1])),
                        grid.snap(Point2::new(s.head[0], s.head[1])),
                    ),
                    s.coeff,
                )
            }),
            grid,
        )
    }
}

/// JSON form of a chain: explicit coordinates, one row per segment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ChainJson {
    pub segments: Vec<SegmentJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SegmentJson {
    pub tail: [f64; 2],
    pub head: [f64; 2],
    pub coeff: i64,
}

#[inline]
fn canonicalize(seg: OrientedSegment) -> (OrientedSegment, i64) {
    if seg.head < seg.tail {
        (seg.reversed(), -1)
    } else {
        (seg, 1)
    }
}

/// Canonicalize, merge, drop zeros and null segments; output sorted.
fn fold_terms<I>(raw: I) -> Vec<(OrientedSegment, i64)>
where
    I: IntoIterator<Item = (OrientedSegment, i64)>,
{
    let mut map: BTreeMap<OrientedSegment, i64> = BTreeMap::new();
    for (seg, k) in raw {
        if k == 0 || seg.tail == seg.head {
            continue;
        }
        let (canon, sign) = canonicalize(seg);
        let e = map.entry(canon).or_insert(0);
        *e += sign * k;
        if *e == 0 {
            map.remove(&canon);
        }
    }
    map.into_iter().collect()
}

/// Counterclockwise boundary of one cell as raw terms, one +1 segment per
/// polygon edge.
pub fn cell_boundary(cell: &ConvexPolygon, grid: &SnapGrid) -> Vec<(OrientedSegment, i64)> {
    let vs = cell.vertices();
    let n = vs.len();
    (0..n)
        .map(|i| {
            (
                OrientedSegment::new(grid.snap(vs[i]), grid.snap(vs[(i + 1) % n])),
                1,
            )
        })
        .collect()
}

/// Signed sum of all cell boundaries, refined and cancelled. Every
/// surviving coefficient must be +1 or -1; anything else is reported as an
/// anomaly (it indicates overlapping cells or a snapping failure).
pub fn boundary_chain(cells: &[ConvexPolygon], grid: &SnapGrid) -> Result<Chain1, ChainError> {
    let per_cell = par::map_slice(cells, |c| cell_boundary(c, grid));
    let b = Chain1::from_raw_terms(per_cell.into_iter().flatten(), grid)?;
    for (seg, k) in b.iter() {
        if k.abs() != 1 {
            return Err(ChainError::CoefficientAnomaly {
                seg: *seg,
                coeff: *k,
            });
        }
    }
    Ok(b)
}

/// Splits `b` into the part supported on the boundary of `base` and the
/// rest. A segment counts as outer when both endpoints and the midpoint
/// sit on the boundary polyline (the midpoint test rejects chords).
pub fn split_outer_inner(
    b: &Chain1,
    base: &ConvexPolygon,
    grid: &SnapGrid,
) -> (Chain1, Chain1) {
    let tol = 2.0 * grid.eps();
    let mut outer = BTreeMap::new();
    let mut inner = BTreeMap::new();
    for (seg, k) in b.iter() {
        let t = grid.unsnap(seg.tail);
        let h = grid.unsnap(seg.head);
        let on_boundary = point_on_polygon_boundary(t, base, tol)
            && point_on_polygon_boundary(h, base, tol)
            && point_on_polygon_boundary(t.midpoint(h), base, tol);
        if on_boundary {
            outer.insert(*seg, *k);
        } else {
            inner.insert(*seg, *k);
        }
    }
    (Chain1::from_refined(outer), Chain1::from_refined(inner))
}

/// The three chains tracked per iteration level.
#[derive(Debug, Clone)]
pub struct ChainLevelSet {
    pub level: usize,
    /// Signed union of cell boundaries.
    pub b: Chain1,
    /// Part of `b` on the base polygon boundary.
    pub o: Chain1,
    /// `b` minus `o`.
    pub inner: Chain1,
}

impl ChainLevelSet {
    pub fn build(
        level: usize,
        cells: &[ConvexPolygon],
        base: &ConvexPolygon,
        grid: &SnapGrid,
    ) -> Result<Self, ChainError> {
        let b = boundary_chain(cells, grid)?;
        let (o, inner) = split_outer_inner(&b, base, grid);
        Ok(ChainLevelSet { level, b, o, inner })
    }
}

/// Decomposes a cycle with coefficients +-1 into edge-disjoint closed
/// loops, each reported in traversal order. At a junction the walk picks
/// the straightest continuation (smallest absolute turning angle), with
/// ties broken by signed angle and then by key order. Diagnostic tool; the
/// decomposition is not unique in general.
pub fn cycle_decomposition(
    chain: &Chain1,
    grid: &SnapGrid,
) -> Result<Vec<Vec<OrientedSegment>>, ChainError> {
    if let Some((v, _)) = chain.boundary0().into_iter().next() {
        return Err(ChainError::NotACycle { vertex: v });
    }

    // Directed edges in traversal orientation.
    let mut edges: Vec<OrientedSegment> = Vec::with_capacity(chain.len());
    for (seg, k) in chain.iter() {
        match k {
            1 => edges.push(*seg),
            -1 => edges.push(seg.reversed()),
            _ => {
                return Err(ChainError::CoefficientAnomaly {
                    seg: *seg,
                    coeff: *k,
                })
            }
        }
    }

    let mut outgoing: BTreeMap<SnapKey, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        outgoing.entry(e.tail).or_default().push(i);
    }
    let mut used = vec![false; edges.len()];
    let mut loops = Vec::new();

    for start in 0..edges.len() {
        if used[start] {
            continue;
        }
        let mut lp = vec![edges[start]];
        used[start] = true;
        let origin = edges[start].tail;
        let mut cur = edges[start];
        while cur.head != origin {
            let d_in = grid.unsnap(cur.head).sub(grid.unsnap(cur.tail));
            let cands = outgoing.get(&cur.head).map(Vec::as_slice).unwrap_or(&[]);
            let next = cands
                .iter()
                .filter(|&&i| !used[i])
                .min_by(|&&a, &&b| {
                    let ka = turn_key(d_in, &edges[a], grid);
                    let kb = turn_key(d_in, &edges[b], grid);
                    ka.partial_cmp(&kb)
                        .unwrap()
                        .then(edges[a].head.cmp(&edges[b].head))
                })
                .copied();
            match next {
                Some(i) => {
                    used[i] = true;
                    cur = edges[i];
                    lp.push(cur);
                }
                None => return Err(ChainError::NotACycle { vertex: cur.head }),
            }
        }
        loops.push(lp);
    }
    Ok(loops)
}

fn turn_key(d_in: Point2, e: &OrientedSegment, grid: &SnapGrid) -> (f64, f64) {
    let d_out = grid.unsnap(e.head).sub(grid.unsnap(e.tail));
    let ang = d_in.cross(d_out).atan2(d_in.dot(d_out));
    (ang.abs(), ang)
}

/// Signed Euclidean length of a traversal loop's enclosed area, by the
/// shoelace formula (negative for clockwise loops).
pub fn loop_signed_area(lp: &[OrientedSegment], grid: &SnapGrid) -> f64 {
    0.5 * lp
        .iter()
        .map(|s| grid.unsnap(s.tail).cross(grid.unsnap(s.head)))
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1() -> SnapGrid {
        SnapGrid::for_diameter(1.0)
    }

    fn unit_square(grid: &SnapGrid) -> ConvexPolygon {
        let _ = grid;
        ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn chain_add_cancels_itself() {
        let g = grid1();
        let sq = unit_square(&g);
        let b = Chain1::from_raw_terms(cell_boundary(&sq, &g), &g).unwrap();
        let sum = b.add(&b.scale(-1), &g).unwrap();
        assert!(sum.is_empty());
    }

    #[test]
    fn shared_edge_cancels_between_adjacent_cells() {
        let g = grid1();
        let left = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(0.5, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap();
        let right = ConvexPolygon::new(vec![
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.5, 1.0),
        ])
        .unwrap();
        let b = boundary_chain(&[left, right], &g).unwrap();
        // interior wall gone, 6 boundary pieces remain
        assert_eq!(b.len(), 6);
        assert!(b.is_cycle());
        assert_relative_eq!(b.total_length(&g), 4.0, epsilon = 1e-9);
    }

    #[test]
    fn partial_edge_overlap_cancels_after_refinement() {
        let g = grid1();
        // tall cell 0..1 x 0..1 next to a short cell 1..2 x 0..0.5 sharing
        // only half of the wall x = 1
        let tall = unit_square(&g);
        let short = ConvexPolygon::new(vec![
            Point2::new(1.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 0.5),
            Point2::new(1.0, 0.5),
        ])
        .unwrap();
        let b = boundary_chain(&[tall, short], &g).unwrap();
        assert!(b.is_cycle());
        // perimeter of the L-shape
        assert_relative_eq!(b.total_length(&g), 6.0, epsilon = 1e-9);
        // the wall piece from y=0.5 to y=1 survives, still traversed upward
        let k = |x: f64, y: f64| g.snap(Point2::new(x, y));
        let wall = OrientedSegment::new(k(1.0, 0.5), k(1.0, 1.0));
        assert_eq!(b.coeff(&wall), 1);
    }

    #[test]
    fn split_outer_inner_keeps_chords_inner() {
        let g = grid1();
        let base = unit_square(&g);
        let k = |x: f64, y: f64| g.snap(Point2::new(x, y));
        // one edge piece on the boundary, one diagonal chord
        let chain = Chain1::from_raw_terms(
            vec![
                (OrientedSegment::new(k(0.0, 0.0), k(1.0, 0.0)), 1),
                (OrientedSegment::new(k(1.0, 0.0), k(0.0, 1.0)), 1),
                (OrientedSegment::new(k(0.0, 1.0), k(0.0, 0.0)), 1),
            ],
            &g,
        )
        .unwrap();
        let (o, i) = split_outer_inner(&chain, &base, &g);
        assert_eq!(o.len(), 2);
        assert_eq!(i.len(), 1);
    }

    #[test]
    fn cycle_decomposition_finds_two_squares() {
        let g = grid1();
        let k = |x: f64, y: f64| g.snap(Point2::new(x, y));
        let sq = |x0: f64| {
            vec![
                (OrientedSegment::new(k(x0, 0.0), k(x0 + 0.4, 0.0)), 1),
                (OrientedSegment::new(k(x0 + 0.4, 0.0), k(x0 + 0.4, 0.4)), 1),
                (OrientedSegment::new(k(x0 + 0.4, 0.4), k(x0, 0.4)), 1),
                (OrientedSegment::new(k(x0, 0.4), k(x0, 0.0)), 1),
            ]
        };
        let mut terms = sq(0.0);
        terms.extend(sq(0.5));
        let chain = Chain1::from_raw_terms(terms, &g).unwrap();
        let loops = cycle_decomposition(&chain, &g).unwrap();
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|l| l.len() == 4));
        for l in &loops {
            assert_relative_eq!(loop_signed_area(&l, &g), 0.16, epsilon = 1e-9);
        }
    }

    #[test]
    fn json_round_trip_preserves_chain() {
        let g = grid1();
        let sq = unit_square(&g);
        let b = Chain1::from_raw_terms(cell_boundary(&sq, &g), &g).unwrap();
        let doc = b.to_json(&g);
        let text = serde_json::to_string(&doc).unwrap();
        let back: ChainJson = serde_json::from_str(&text).unwrap();
        assert_eq!(Chain1::from_json(&back, &g).unwrap(), b);
    }
}
