//! Riemann-Stieltjes sums, p-variation, and Young-type bounds on [0, 1],
//! plus a polyline line-integral oracle independent of the chain machinery.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{exact_sum, ExactSum};
use crate::geom::{ConvexPolygon, Point2};

/// Refinement stops once a partition has more than this many cells.
pub const MAX_CELLS: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum YoungError {
    #[error("partition invalid at index {index}: {msg}")]
    InvalidPartition { index: usize, msg: String },
    #[error("no convergence at {cells} cells, last correction {last_diff:e}")]
    NoConvergence { cells: usize, last_diff: f64 },
    #[error("{0}")]
    Domain(String),
}

/// Tagged partition of an interval: strictly increasing points with one tag
/// inside every cell.
#[derive(Debug, Clone)]
pub struct Partition {
    points: Vec<f64>,
    tags: Vec<f64>,
}

impl Partition {
    pub fn new(points: Vec<f64>, tags: Vec<f64>) -> Result<Self, YoungError> {
        if points.len() < 2 {
            return Err(YoungError::InvalidPartition {
                index: 0,
                msg: "need at least two points".into(),
            });
        }
        if tags.len() + 1 != points.len() {
            return Err(YoungError::InvalidPartition {
                index: 0,
                msg: format!(
                    "{} tags do not fit {} points",
                    tags.len(),
                    points.len()
                ),
            });
        }
        for (i, w) in points.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(YoungError::InvalidPartition {
                    index: i + 1,
                    msg: "points must increase strictly".into(),
                });
            }
            if !(tags[i] >= w[0] && tags[i] <= w[1]) {
                return Err(YoungError::InvalidPartition {
                    index: i,
                    msg: "tag outside its cell".into(),
                });
            }
        }
        Ok(Partition { points, tags })
    }

    /// `n` equal cells of [0, 1] with midpoint tags.
    pub fn uniform_midpoint(n: usize) -> Self {
        let points: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let tags = points.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        Partition { points, tags }
    }

    /// Seeded random partition of [0, 1] with `n` cells and uniform tags.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points: Vec<f64> = vec![0.0, 1.0];
        while points.len() < n + 1 {
            let t: f64 = rng.gen_range(0.0..1.0);
            if points.iter().all(|p| (p - t).abs() > 1e-12) {
                points.push(t);
            }
        }
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let tags = points
            .windows(2)
            .map(|w| rng.gen_range(w[0]..=w[1]))
            .collect();
        Partition { points, tags }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    pub fn mesh(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

/// `sum f(tag_i) (g(t_{i+1}) - g(t_i))` over the partition.
pub fn stieltjes_sum<F, G>(f: F, g: G, partition: &Partition) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let terms: Vec<f64> = partition
        .points
        .windows(2)
        .zip(&partition.tags)
        .map(|(w, tag)| f(*tag) * (g(w[1]) - g(w[0])))
        .collect();
    exact_sum(&terms)
}

#[derive(Debug, Clone, Copy)]
pub struct YoungIntegral {
    pub value: f64,
    /// Cells of the finest partition used.
    pub cells: usize,
    /// Distance between the last two refinements.
    pub est_error: f64,
}

/// Integral of `f dg` over [0, 1] by midpoint-tagged dyadic refinement,
/// stopping when consecutive refinements agree within `tol`.
pub fn young_integral<F, G>(f: F, g: G, tol: f64) -> Result<YoungIntegral, YoungError>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut cells = 2usize;
    let mut prev = stieltjes_sum(&f, &g, &Partition::uniform_midpoint(cells));
    loop {
        cells *= 2;
        let cur = stieltjes_sum(&f, &g, &Partition::uniform_midpoint(cells));
        let diff = (cur - prev).abs();
        if diff <= tol {
            return Ok(YoungIntegral {
                value: cur,
                cells,
                est_error: diff,
            });
        }
        if cells == MAX_CELLS {
            return Err(YoungError::NoConvergence {
                cells,
                last_diff: diff,
            });
        }
        prev = cur;
    }
}

/// Grid-restricted p-variation of `f` on [0, 1].
#[derive(Debug, Clone, Copy)]
pub struct PVariation {
    /// `sup sum |increment|^p` over partitions drawn from the grid.
    pub sum: f64,
    /// `sum^(1/p)`, the seminorm entering Young-type bounds.
    pub norm: f64,
    pub mesh: f64,
    /// Always true: restricting to a grid can only undershoot the supremum.
    pub lower_bound: bool,
}

/// For `p >= 1` the grid optimum keeps only sign changes of the increments;
/// for `p < 1` the finest grid partition is optimal. Requires `p > 0` and a
/// mesh in `(0, 1]`.
pub fn p_variation<F>(f: F, p: f64, mesh: f64) -> Result<PVariation, YoungError>
where
    F: Fn(f64) -> f64,
{
    if !(p > 0.0) {
        return Err(YoungError::Domain(format!("variation exponent {p} not positive")));
    }
    if !(mesh > 0.0 && mesh <= 1.0) {
        return Err(YoungError::Domain(format!("mesh {mesh} outside (0, 1]")));
    }
    let n = (1.0 / mesh).ceil() as usize;
    let values: Vec<f64> = (0..=n).map(|i| f(i as f64 / n as f64)).collect();
    let mut terms = Vec::new();
    if p >= 1.0 {
        let mut run = 0.0f64;
        for w in values.windows(2) {
            let d = w[1] - w[0];
            if run == 0.0 || run.signum() == d.signum() || d == 0.0 {
                run += d;
            } else {
                terms.push(run.abs().powf(p));
                run = d;
            }
        }
        if run != 0.0 {
            terms.push(run.abs().powf(p));
        }
    } else {
        for w in values.windows(2) {
            let d = (w[1] - w[0]).abs();
            if d > 0.0 {
                terms.push(d.powf(p));
            }
        }
    }
    let sum = exact_sum(&terms);
    Ok(PVariation {
        sum,
        norm: sum.powf(1.0 / p),
        mesh: 1.0 / n as f64,
        lower_bound: true,
    })
}

/// Riemann zeta for `s > 1`: direct sum plus an Euler-Maclaurin tail,
/// accurate well past 1e-12 for the exponents this crate meets.
pub fn zeta(s: f64) -> Result<f64, YoungError> {
    if !(s > 1.0) {
        return Err(YoungError::Domain(format!("zeta needs s > 1, got {s}")));
    }
    let n = 100_000u64;
    let terms: Vec<f64> = (1..=n).map(|k| (k as f64).powf(-s)).collect();
    let head = exact_sum(&terms);
    let nf = n as f64;
    // Head already contains f(n), so the Euler-Maclaurin boundary term
    // enters with the opposite sign.
    let tail = nf.powf(1.0 - s) / (s - 1.0) - 0.5 * nf.powf(-s)
        + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0;
    Ok(head + tail)
}

/// Young-Loeve constant times the two variation norms: a bound on
/// `|S - integral|` for every tagged partition, valid when
/// `1/p + 1/q > 1`.
pub fn young_loeve_bound(
    v_p_norm: f64,
    v_q_norm: f64,
    p: f64,
    q: f64,
) -> Result<f64, YoungError> {
    if !(p > 0.0 && q > 0.0) {
        return Err(YoungError::Domain(format!(
            "variation exponents must be positive, got {p}, {q}"
        )));
    }
    let theta = 1.0 / p + 1.0 / q;
    if !(theta > 1.0) {
        return Err(YoungError::Domain(format!(
            "1/{p} + 1/{q} = {theta} does not exceed 1"
        )));
    }
    Ok((1.0 + zeta(theta)?) * v_p_norm * v_q_norm)
}

/// Left-tagged line integral `sum f(p_j)(g(p_{j+1}) - g(p_j))` around a
/// polygon, each edge cut into `2^depth` pieces. Runs on raw points with no
/// snapping, so it is independent of the chain pipeline. The two halves of
/// every term enter the exact accumulator separately; a constant `f`
/// therefore telescopes to exactly +0.0 around the closed loop.
pub fn polyline_stieltjes<F, G>(f: F, g: G, poly: &ConvexPolygon, depth: usize) -> Complex64
where
    F: Fn(Point2) -> Complex64,
    G: Fn(Point2) -> Complex64,
{
    let verts = poly.vertices();
    let n = 1usize << depth;
    let mut re = ExactSum::new();
    let mut im = ExactSum::new();
    for (i, a) in verts.iter().enumerate() {
        let b = verts[(i + 1) % verts.len()];
        let step = b.sub(*a);
        let mut tail = *a;
        for j in 1..=n {
            let head = if j == n {
                b
            } else {
                a.add(step.scale(j as f64 / n as f64))
            };
            let ft = f(tail);
            let pos = ft * g(head);
            let neg = ft * g(tail);
            re.add(pos.re);
            re.add(-neg.re);
            im.add(pos.im);
            im.add(-neg.im);
            tail = head;
        }
    }
    Complex64::new(re.value(), im.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn identity_integrand_is_exact() {
        let r = young_integral(|t| t, |t| t, 1e-12).unwrap();
        assert_relative_eq!(r.value, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_integrator_converges() {
        let r = young_integral(|t| t, |t| t * t, 1e-9).unwrap();
        assert_relative_eq!(r.value, 2.0 / 3.0, epsilon = 1e-8);
        assert!(r.cells <= MAX_CELLS);
    }

    #[test]
    fn oscillator_against_closed_form() {
        let r = young_integral(|t| (2.0 * t).cos(), |t| t, 1e-11).unwrap();
        assert_relative_eq!(r.value, 2f64.sin() / 2.0, epsilon = 1e-10);
    }

    #[test]
    fn rough_integrand_reports_no_convergence() {
        let err = young_integral(|t| (1.0 / (t + 1e-3)).sin(), |t| t, 0.0).unwrap_err();
        match err {
            YoungError::NoConvergence { cells, .. } => assert_eq!(cells, MAX_CELLS),
            other => panic!("expected NoConvergence, got {other}"),
        }
    }

    #[test]
    fn zeta_matches_classical_values() {
        assert_relative_eq!(zeta(2.0).unwrap(), PI * PI / 6.0, epsilon = 1e-12);
        assert_relative_eq!(zeta(4.0).unwrap(), PI.powi(4) / 90.0, epsilon = 1e-12);
        assert_relative_eq!(zeta(1.5).unwrap(), 2.612375348685488, epsilon = 1e-10);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn variation_of_monotone_and_oscillating_functions() {
        let v = p_variation(|t| t, 1.0, 1e-3).unwrap();
        assert_relative_eq!(v.sum, 1.0, epsilon = 1e-12);
        let v = p_variation(|t| t, 2.0, 1e-3).unwrap();
        assert_relative_eq!(v.sum, 1.0, epsilon = 1e-12);
        // Three full sine periods sweep |df| = 12 in total.
        let v = p_variation(|t| (6.0 * PI * t).sin(), 1.0, 1e-5).unwrap();
        assert_relative_eq!(v.sum, 12.0, epsilon = 1e-4);
        // Squared runs between extrema: 1 + five swings of 2^2 + 1.
        let v = p_variation(|t| (6.0 * PI * t).sin(), 2.0, 1e-5).unwrap();
        assert_relative_eq!(v.sum, 22.0, epsilon = 1e-3);
        assert!(p_variation(|t| t, 0.0, 0.1).is_err());
    }

    #[test]
    fn random_partitions_respect_the_young_loeve_bound() {
        let f = |t: f64| t;
        let g = |t: f64| t * t;
        let integral = young_integral(f, g, 1e-10).unwrap().value;
        let vf = p_variation(f, 1.0, 1e-3).unwrap().norm;
        let vg = p_variation(g, 1.0, 1e-3).unwrap().norm;
        let bound = young_loeve_bound(vf, vg, 1.0, 1.0).unwrap();
        for seed in 0..100 {
            let chi = Partition::random(40, seed);
            let s = stieltjes_sum(f, g, &chi);
            assert!(
                (s - integral).abs() <= bound,
                "seed {seed}: |{s} - {integral}| > {bound}"
            );
        }
        assert!(young_loeve_bound(1.0, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn partition_validation_rejects_bad_input() {
        assert!(Partition::new(vec![0.0, 0.0, 1.0], vec![0.0, 0.5]).is_err());
        assert!(Partition::new(vec![0.0, 1.0], vec![2.0]).is_err());
        assert!(Partition::new(vec![0.0], vec![]).is_err());
        assert!(Partition::new(vec![0.0, 0.4, 1.0], vec![0.2, 0.7]).is_ok());
    }

    #[test]
    fn polyline_loop_integral_matches_area() {
        let tri = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap();
        // x dy around a ccw loop sweeps the enclosed area; for this triangle
        // the left-tag defect cancels between the slanted edges, so modest
        // depth is already sharp.
        let x = |p: Point2| Complex64::new(p.x, 0.0);
        let y = |p: Point2| Complex64::new(p.y, 0.0);
        let v = polyline_stieltjes(x, y, &tri, 8);
        assert_relative_eq!(v.re, 3f64.sqrt() / 4.0, epsilon = 1e-9);
        assert_relative_eq!(v.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn polyline_constant_telescopes_exactly() {
        let tri = ConvexPolygon::new(vec![
            Point2::new(0.1, 0.2),
            Point2::new(1.3, 0.4),
            Point2::new(0.6, 1.5),
        ])
        .unwrap();
        let one = |_: Point2| Complex64::new(1.0, 0.0);
        let g = |p: Point2| (Complex64::new(p.x, p.y) * Complex64::new(0.3, 1.7)).sin();
        let v = polyline_stieltjes(one, g, &tri, 6);
        assert_eq!(v.re.to_bits(), 0);
        assert_eq!(v.im.to_bits(), 0);
    }
}
