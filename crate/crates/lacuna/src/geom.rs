//! Planar primitives: points, snap grid, similitudes, convex polygons,
//! and collinear refinement of oriented segments.
//!
//! Conventions:
//! - Polygons are counterclockwise (positive shoelace) and strictly convex.
//! - Vertices are quantized onto a uniform grid (`SnapGrid`) before any
//!   combinatorial processing; all chain bookkeeping is over `SnapKey`s,
//!   geometry is recovered with `unsnap`.
//! - A similitude is `p -> r * R(angle) * (reflect ? mirror(p) : p) + t`
//!   with `mirror(x, y) = (x, -y)` applied before the rotation.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Grid pitch as a fraction of the base polygon diameter.
pub const SNAP_REL: f64 = 1e-9;
/// Unit-direction cross product below this is treated as parallel.
pub const COLLINEAR_CROSS_TOL: f64 = 1e-9;
/// Shortest admissible edge, in grid cells; depth guards enforce it.
pub const MIN_EDGE_CELLS: f64 = 1e3;

#[derive(Debug, Error, PartialEq)]
pub enum GeomError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not strictly convex counterclockwise at vertex {0}")]
    NotConvexCcw(usize),
    #[error("non-finite coordinate")]
    NonFinite,
    #[error("snap conflict: keys {0:?} and {1:?} are closer than the grid resolves")]
    SnapConflict(SnapKey, SnapKey),
    #[error("degenerate triangle correspondence")]
    DegenerateTriangle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    #[inline]
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    #[inline]
    pub fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }

    #[inline]
    pub fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }

    #[inline]
    pub fn scale(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }

    #[inline]
    pub fn dot(self, o: Point2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// 2D cross product `self.x * o.y - self.y * o.x`.
    #[inline]
    pub fn cross(self, o: Point2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Point2) -> f64 {
        self.sub(o).norm()
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    #[inline]
    pub fn midpoint(self, o: Point2) -> Point2 {
        Point2::new(0.5 * (self.x + o.x), 0.5 * (self.y + o.y))
    }
}

/// Quantized grid coordinates; ordering is lexicographic `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SnapKey(pub i64, pub i64);

/// Uniform quantization grid.
///
/// Keys give vertices their identity at pitch resolution. Geometry keeps
/// full double precision: the grid records, per key, the smallest point
/// (by `(x, y)`) ever snapped to it and hands that representative back on
/// `unsnap`. The representative is within half a pitch of the lattice
/// node, so key identity and coordinates never disagree by more than the
/// snapping tolerance, while lengths and field evaluations do not inherit
/// the pitch as a noise floor. Minimum selection makes the stored point
/// independent of snapping order, including parallel registration.
pub struct SnapGrid {
    eps: f64,
    reps: RwLock<BTreeMap<SnapKey, Point2>>,
}

impl Clone for SnapGrid {
    fn clone(&self) -> Self {
        SnapGrid {
            eps: self.eps,
            reps: RwLock::new(self.reps.read().expect("grid lock").clone()),
        }
    }
}

impl fmt::Debug for SnapGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SnapGrid")
            .field("eps", &self.eps)
            .field("keys", &self.reps.read().expect("grid lock").len())
            .finish()
    }
}

impl SnapGrid {
    /// Grid whose pitch is `SNAP_REL` times `diameter`.
    pub fn for_diameter(diameter: f64) -> Self {
        debug_assert!(diameter > 0.0 && diameter.is_finite());
        SnapGrid {
            eps: SNAP_REL * diameter,
            reps: RwLock::new(BTreeMap::new()),
        }
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Nearest grid node. Points within half a pitch of a node share its
    /// key; finite points are recorded as representative candidates.
    pub fn snap(&self, p: Point2) -> SnapKey {
        let key = SnapKey((p.x / self.eps).round() as i64, (p.y / self.eps).round() as i64);
        if p.is_finite() {
            let mut reps = self.reps.write().expect("grid lock");
            match reps.entry(key) {
                Entry::Vacant(slot) => {
                    slot.insert(p);
                }
                Entry::Occupied(mut slot) => {
                    let q = *slot.get();
                    if (p.x, p.y) < (q.x, q.y) {
                        slot.insert(p);
                    }
                }
            }
        }
        key
    }

    /// The key's recorded representative; the lattice node for keys never
    /// seen by `snap` (e.g. read back from a serialized chain).
    pub fn unsnap(&self, k: SnapKey) -> Point2 {
        if let Some(p) = self.reps.read().expect("grid lock").get(&k) {
            return *p;
        }
        Point2::new(k.0 as f64 * self.eps, k.1 as f64 * self.eps)
    }
}

/// Directed segment between two grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrientedSegment {
    pub tail: SnapKey,
    pub head: SnapKey,
}

impl OrientedSegment {
    #[inline]
    pub fn new(tail: SnapKey, head: SnapKey) -> Self {
        OrientedSegment { tail, head }
    }

    #[inline]
    pub fn reversed(self) -> Self {
        OrientedSegment {
            tail: self.head,
            head: self.tail,
        }
    }
}

/// Orientation-aware similarity transformation of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Similitude {
    pub ratio: f64,
    pub angle: f64,
    pub reflect: bool,
    pub translation: Point2,
}

impl Similitude {
    pub fn new(ratio: f64, angle: f64, reflect: bool, translation: Point2) -> Self {
        debug_assert!(ratio > 0.0 && ratio.is_finite());
        Similitude {
            ratio,
            angle,
            reflect,
            translation,
        }
    }

    #[inline]
    pub fn identity() -> Self {
        Similitude::new(1.0, 0.0, false, Point2::new(0.0, 0.0))
    }

    /// Linear part applied to `p` (no translation).
    #[inline]
    pub fn apply_linear(&self, p: Point2) -> Point2 {
        let q = if self.reflect {
            Point2::new(p.x, -p.y)
        } else {
            p
        };
        let (s, c) = self.angle.sin_cos();
        Point2::new(
            self.ratio * (c * q.x - s * q.y),
            self.ratio * (s * q.x + c * q.y),
        )
    }

    #[inline]
    pub fn apply(&self, p: Point2) -> Point2 {
        self.apply_linear(p).add(self.translation)
    }

    /// `self . inner`: applies `inner` first.
    pub fn compose(&self, inner: &Similitude) -> Similitude {
        let angle = if self.reflect {
            self.angle - inner.angle
        } else {
            self.angle + inner.angle
        };
        Similitude {
            ratio: self.ratio * inner.ratio,
            angle,
            reflect: self.reflect != inner.reflect,
            translation: self.apply(inner.translation),
        }
    }

    /// Unique similitude sending `src[i]` to `dst[i]`.
    ///
    /// Tries the direct and the reflected branch; the third point decides.
    pub fn from_triangle_correspondence(
        src: [Point2; 3],
        dst: [Point2; 3],
    ) -> Result<Similitude, GeomError> {
        let u = src[1].sub(src[0]);
        let v = dst[1].sub(dst[0]);
        let lu = u.norm();
        let lv = v.norm();
        if lu == 0.0 || lv == 0.0 {
            return Err(GeomError::DegenerateTriangle);
        }
        let ratio = lv / lu;
        let tol = 1e-9 * (lv + dst[2].sub(dst[0]).norm());
        for reflect in [false, true] {
            let um = if reflect {
                Point2::new(u.x, -u.y)
            } else {
                u
            };
            let angle = um.cross(v).atan2(um.dot(v));
            let mut sim = Similitude::new(ratio, angle, reflect, Point2::new(0.0, 0.0));
            sim.translation = dst[0].sub(sim.apply_linear(src[0]));
            if sim.apply(src[2]).dist(dst[2]) <= tol {
                return Ok(sim);
            }
        }
        Err(GeomError::DegenerateTriangle)
    }
}

/// Strictly convex polygon, counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexPolygon {
    vertices: Vec<Point2>,
}

impl ConvexPolygon {
    /// Validates orientation and strict convexity.
    pub fn new(vertices: Vec<Point2>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::NonFinite);
        }
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if b.sub(a).cross(c.sub(b)) <= 0.0 {
                return Err(GeomError::NotConvexCcw((i + 1) % n));
            }
        }
        Ok(ConvexPolygon { vertices })
    }

    #[inline]
    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        0.5 * shoelace_sum(&self.vertices)
    }

    /// Max pairwise vertex distance.
    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(*b));
            }
        }
        d
    }

    pub fn min_edge_len(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| self.vertices[i].dist(self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed distance to the edge lines; nonnegative inside.
    pub fn signed_inset(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        let mut inset = f64::INFINITY;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let e = b.sub(a);
            inset = inset.min(e.cross(p.sub(a)) / e.norm());
        }
        inset
    }

    /// Containment up to `tol` outside the edges.
    #[inline]
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.signed_inset(p) >= -tol
    }

    /// Image under `sim`; vertex order is reversed on reflection so the
    /// result stays counterclockwise.
    pub fn map(&self, sim: &Similitude) -> ConvexPolygon {
        let mut vs: Vec<Point2> = self.vertices.iter().map(|v| sim.apply(*v)).collect();
        if sim.reflect {
            vs.reverse();
        }
        ConvexPolygon { vertices: vs }
    }
}

fn shoelace_sum(vs: &[Point2]) -> f64 {
    let n = vs.len();
    let mut s = 0.0;
    for i in 0..n {
        s += vs[i].cross(vs[(i + 1) % n]);
    }
    s
}

/// Distance from `p` to the closed polygonal boundary is at most `tol`.
pub fn point_on_polygon_boundary(p: Point2, poly: &ConvexPolygon, tol: f64) -> bool {
    let vs = poly.vertices();
    let n = vs.len();
    for i in 0..n {
        if point_segment_dist(p, vs[i], vs[(i + 1) % n]) <= tol {
            return true;
        }
    }
    false
}

/// Distance from `p` to segment `ab`.
pub fn point_segment_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a.add(ab.scale(t)))
}

/// Area of the intersection of two convex polygons (Sutherland-Hodgman
/// clipping of `p` against each half-plane of `q`). Symmetric in its
/// arguments up to rounding.
pub fn polygon_intersection_area(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    let mut subject: Vec<Point2> = p.vertices().to_vec();
    let qv = q.vertices();
    let n = qv.len();
    for i in 0..n {
        if subject.len() < 3 {
            return 0.0;
        }
        let a = qv[i];
        let b = qv[(i + 1) % n];
        let e = b.sub(a);
        let mut clipped = Vec::with_capacity(subject.len() + 1);
        for j in 0..subject.len() {
            let cur = subject[j];
            let nxt = subject[(j + 1) % subject.len()];
            let dc = e.cross(cur.sub(a));
            let dn = e.cross(nxt.sub(a));
            if dc >= 0.0 {
                clipped.push(cur);
            }
            if (dc > 0.0 && dn < 0.0) || (dc < 0.0 && dn > 0.0) {
                let t = dc / (dc - dn);
                clipped.push(cur.add(nxt.sub(cur).scale(t)));
            }
        }
        subject = clipped;
    }
    if subject.len() < 3 {
        return 0.0;
    }
    0.5 * shoelace_sum(&subject).abs()
}

/// Line-cluster assignment used by `refine_collinear`.
struct LineGroup {
    /// Unit reference direction, canonical sign.
    u: Point2,
    /// Indices into the input slice.
    members: Vec<usize>,
}

fn canonical_unit_dir(d: Point2) -> Point2 {
    let len = d.norm();
    let mut u = Point2::new(d.x / len, d.y / len);
    if u.x < 0.0 || (u.x == 0.0 && u.y < 0.0) {
        u = u.scale(-1.0);
    }
    u
}

/// Splits every segment at the union of endpoints lying on its supporting
/// line, so that per line the output pieces are pairwise interior-disjoint.
/// Orientations and coefficients are carried through unchanged; signed
/// length per line is preserved exactly because segments are only split.
///
/// Lines are clustered with tolerance: unit-direction cross products at
/// most `COLLINEAR_CROSS_TOL` and perpendicular offsets within the grid
/// pitch land in one cluster.
pub fn refine_collinear(
    terms: &[(OrientedSegment, i64)],
    grid: &SnapGrid,
) -> Result<Vec<(OrientedSegment, i64)>, GeomError> {
    let eps = grid.eps();

    // Angle in (-pi/2, pi/2] of the canonical direction, plus perpendicular
    // offset; sorted to make clustering input-order independent.
    let mut rows: Vec<(f64, f64, usize)> = Vec::with_capacity(terms.len());
    for (i, (seg, _)) in terms.iter().enumerate() {
        if seg.tail == seg.head {
            continue; // null segment, contributes nothing
        }
        let p = grid.unsnap(seg.tail);
        let q = grid.unsnap(seg.head);
        let u = canonical_unit_dir(q.sub(p));
        let theta = u.y.atan2(u.x);
        rows.push((theta, u.cross(p), i));
    }
    rows.sort_by(|a, b| {
        (a.0, a.1, terms[a.2].0)
            .partial_cmp(&(b.0, b.1, terms[b.2].0))
            .unwrap()
    });

    // Cluster by angle, with a wrap check for near-vertical lines whose
    // canonical angles straddle +-pi/2.
    let mut dir_clusters: Vec<Vec<usize>> = Vec::new();
    for (pos, row) in rows.iter().enumerate() {
        let start_new = match pos {
            0 => true,
            _ => (row.0 - rows[pos - 1].0).abs() > COLLINEAR_CROSS_TOL,
        };
        if start_new {
            dir_clusters.push(Vec::new());
        }
        dir_clusters.last_mut().unwrap().push(pos);
    }
    if dir_clusters.len() > 1 {
        let first = rows[dir_clusters[0][0]].0;
        let last = rows[*dir_clusters.last().unwrap().last().unwrap()].0;
        if (first + std::f64::consts::PI - last).abs() <= COLLINEAR_CROSS_TOL {
            let tail = dir_clusters.pop().unwrap();
            dir_clusters[0].splice(0..0, tail);
        }
    }

    // Within a direction cluster, split by perpendicular offset against the
    // cluster's reference direction.
    let mut groups: Vec<LineGroup> = Vec::new();
    for cluster in &dir_clusters {
        let u = {
            let (seg, _) = terms[rows[cluster[0]].2];
            let p = grid.unsnap(seg.tail);
            let q = grid.unsnap(seg.head);
            canonical_unit_dir(q.sub(p))
        };
        let mut offs: Vec<(f64, usize)> = cluster
            .iter()
            .map(|&pos| {
                let i = rows[pos].2;
                let p = grid.unsnap(terms[i].0.tail);
                (u.cross(p), i)
            })
            .collect();
        offs.sort_by(|a, b| (a.0, terms[a.1].0).partial_cmp(&(b.0, terms[b.1].0)).unwrap());
        for (pos, &(off, i)) in offs.iter().enumerate() {
            if pos == 0 || (off - offs[pos - 1].0).abs() > eps {
                groups.push(LineGroup {
                    u,
                    members: Vec::new(),
                });
            }
            groups.last_mut().unwrap().members.push(i);
        }
    }

    let mut out: Vec<(OrientedSegment, i64)> = Vec::with_capacity(terms.len());
    for g in &groups {
        refine_group(terms, g, grid, &mut out)?;
    }
    Ok(out)
}

fn refine_group(
    terms: &[(OrientedSegment, i64)],
    group: &LineGroup,
    grid: &SnapGrid,
    out: &mut Vec<(OrientedSegment, i64)>,
) -> Result<(), GeomError> {
    let eps = grid.eps();
    let s_of = |k: SnapKey| group.u.dot(grid.unsnap(k));

    // Breakpoints: all member endpoints, ordered along the line.
    let mut brk: Vec<(f64, SnapKey)> = Vec::with_capacity(group.members.len() * 2);
    for &i in &group.members {
        let (seg, _) = terms[i];
        brk.push((s_of(seg.tail), seg.tail));
        brk.push((s_of(seg.head), seg.head));
    }
    brk.sort_by(|a, b| a.partial_cmp(b).unwrap());
    brk.dedup_by_key(|e| e.1);
    for w in brk.windows(2) {
        if w[1].0 - w[0].0 <= 0.25 * eps && w[0].1 != w[1].1 {
            return Err(GeomError::SnapConflict(w[0].1, w[1].1));
        }
    }

    for &i in &group.members {
        let (seg, coeff) = terms[i];
        let s0 = s_of(seg.tail);
        let s1 = s_of(seg.head);
        let (lo, hi) = if s0 <= s1 { (s0, s1) } else { (s1, s0) };
        // Keys strictly interior to the span, in tail-to-head order.
        let mut inner: Vec<SnapKey> = brk
            .iter()
            .filter(|(s, k)| {
                *s > lo + 0.25 * eps && *s < hi - 0.25 * eps && *k != seg.tail && *k != seg.head
            })
            .map(|(_, k)| *k)
            .collect();
        if s0 > s1 {
            inner.reverse();
        }
        let mut prev = seg.tail;
        for k in inner {
            out.push((OrientedSegment::new(prev, k), coeff));
            prev = k;
        }
        out.push((OrientedSegment::new(prev, seg.head), coeff));
    }
    Ok(())
}
