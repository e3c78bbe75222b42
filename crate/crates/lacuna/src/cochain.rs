//! Pair integrals over inner chains and their level-by-level convergence.
//!
//! For a 1-chain `c` and scalar fields `f`, `g` the pair integral is
//!
//! ```text
//! phi(c; f, g) = sum over segments k * (f(tail) g(head) - g(tail) f(head))
//! ```
//!
//! accumulated with exactly rounded summation. Each segment contributes the
//! two addends `k f(tail) g(head)` and `-k g(tail) f(head)` as separate
//! multiset elements, which buys three identities outright:
//!
//! * swapping `f` and `g` negates every addend bitwise, so
//!   `phi(f, g) + phi(g, f)` is exactly `+0.0`;
//! * when `f` is constant on a cycle the addends cancel pairwise vertex by
//!   vertex (equal keys evaluate at identical points), so the sum is exactly
//!   `+0.0`;
//! * the sum is independent of addend order, so thread count and enumeration
//!   order never change a bit.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::Chain1;
use crate::exact::ExactSum;
use crate::expr::Expr;
use crate::geom::{OrientedSegment, Point2, SnapGrid};
use crate::par;
use crate::structure::{contraction_sum, CellularStructure, StructureError};

/// Refinement level whose cell vertices sample sup norms.
const SUP_SAMPLE_LEVEL: usize = 6;

#[derive(Debug, Error)]
pub enum CochainError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("field evaluated to a non-finite value near ({x}, {y})")]
    NonFiniteField { x: f64, y: f64 },
}

/// Hoelder constant attached to a field: `|f(p) - f(q)| <= c |p - q|^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HolderConstant {
    /// Proven bound supplied by the caller.
    Analytic(f64),
    /// Empirical bound from finite sampling; a lower bound on the true
    /// constant, an estimate of it only insofar as the sample is dense.
    Estimated(f64),
    Unknown,
}

impl HolderConstant {
    pub fn value(&self) -> Option<f64> {
        match self {
            HolderConstant::Analytic(c) | HolderConstant::Estimated(c) => Some(*c),
            HolderConstant::Unknown => None,
        }
    }
}

/// Complex-valued function of a plane point together with its declared
/// regularity.
#[derive(Clone)]
pub struct ScalarField {
    eval: Arc<dyn Fn(Point2) -> Complex64 + Send + Sync>,
    pub alpha: f64,
    pub holder: HolderConstant,
}

impl ScalarField {
    /// Panics unless `alpha` lies in `(0, 1]`.
    pub fn new<F>(alpha: f64, holder: HolderConstant, f: F) -> Self
    where
        F: Fn(Point2) -> Complex64 + Send + Sync + 'static,
    {
        assert!(
            alpha > 0.0 && alpha <= 1.0,
            "Hoelder exponent {alpha} outside (0, 1]"
        );
        ScalarField {
            eval: Arc::new(f),
            alpha,
            holder,
        }
    }

    /// Wraps a parsed expression; the exponent is what the expression
    /// declares and no constant is claimed.
    pub fn from_expr(e: &Expr) -> Self {
        let alpha = e.declared_alpha();
        let owned = e.clone();
        ScalarField::new(alpha, HolderConstant::Unknown, move |p| owned.eval(p))
    }

    /// The constant function 1.
    pub fn one() -> Self {
        ScalarField::new(1.0, HolderConstant::Analytic(0.0), |_| {
            Complex64::new(1.0, 0.0)
        })
    }

    pub fn with_holder(mut self, holder: HolderConstant) -> Self {
        self.holder = holder;
        self
    }

    #[inline]
    pub fn eval(&self, p: Point2) -> Complex64 {
        (self.eval)(p)
    }

    /// Pointwise product. When both factors carry constants the product's
    /// constant is `c_f sup|g| + c_g sup|f|` with sups sampled on cell
    /// vertices of a fixed shallow level, and the exponent is the smaller
    /// of the two.
    pub fn product(
        f: &ScalarField,
        g: &ScalarField,
        cs: &CellularStructure,
    ) -> Result<ScalarField, CochainError> {
        let alpha = f.alpha.min(g.alpha);
        let holder = match (f.holder.value(), g.holder.value()) {
            (Some(cf), Some(cg)) => {
                let level = SUP_SAMPLE_LEVEL.min(cs.max_depth());
                let pts = level_vertices(cs, level)?;
                let sup_f = par::max_mapped(&pts, |p| f.eval(*p).norm());
                let sup_g = par::max_mapped(&pts, |p| g.eval(*p).norm());
                HolderConstant::Estimated(cf * sup_g + cg * sup_f)
            }
            _ => HolderConstant::Unknown,
        };
        let (fe, ge) = (f.eval.clone(), g.eval.clone());
        Ok(ScalarField {
            eval: Arc::new(move |p| fe(p) * ge(p)),
            alpha,
            holder,
        })
    }
}

/// Deduplicated cell vertices of one refinement level, as grid nodes.
pub fn level_vertices(
    cs: &CellularStructure,
    level: usize,
) -> Result<Vec<Point2>, StructureError> {
    let cells = cs.iterate(level)?;
    let grid = cs.grid();
    let mut keys = BTreeSet::new();
    for cell in &cells {
        for v in cell.vertices() {
            keys.insert(grid.snap(*v));
        }
    }
    Ok(keys.into_iter().map(|k| grid.unsnap(k)).collect())
}

/// The two addends a segment contributes, already scaled by its coefficient.
#[inline]
fn segment_addends(
    f: &ScalarField,
    g: &ScalarField,
    tail: Point2,
    head: Point2,
    k: f64,
) -> [Complex64; 2] {
    let a = (f.eval(tail) * g.eval(head)).scale(k);
    let b = (g.eval(tail) * f.eval(head)).scale(-k);
    [a, b]
}

fn sum_addend_rows(rows: Vec<Result<[f64; 4], (f64, f64)>>) -> Result<Complex64, CochainError> {
    let mut re = ExactSum::new();
    let mut im = ExactSum::new();
    for row in rows {
        let [a, b, c, d] = row.map_err(|(x, y)| CochainError::NonFiniteField { x, y })?;
        re.add(a);
        re.add(c);
        im.add(b);
        im.add(d);
    }
    Ok(Complex64::new(re.value(), im.value()))
}

/// Pair integral of `f`, `g` over an arbitrary 1-chain.
pub fn phi_on_chain(
    chain: &Chain1,
    grid: &SnapGrid,
    f: &ScalarField,
    g: &ScalarField,
) -> Result<Complex64, CochainError> {
    let terms: Vec<(OrientedSegment, i64)> = chain.iter().map(|(s, k)| (*s, *k)).collect();
    let rows = par::map_slice(&terms, |(seg, k)| {
        let tail = grid.unsnap(seg.tail);
        let head = grid.unsnap(seg.head);
        let [a, b] = segment_addends(f, g, tail, head, *k as f64);
        if a.is_finite() && b.is_finite() {
            Ok([a.re, a.im, b.re, b.im])
        } else {
            Err((tail.x, tail.y))
        }
    });
    sum_addend_rows(rows)
}

/// Pair integral over the inner chain of level `n`.
pub fn phi_n(
    cs: &CellularStructure,
    f: &ScalarField,
    g: &ScalarField,
    n: usize,
) -> Result<Complex64, CochainError> {
    let chains = cs.level_chains(n)?;
    phi_on_chain(&chains.inner, cs.grid(), f, g)
}

/// Level-by-level record of the pair integral with a geometric-tail
/// extrapolation and an a posteriori error bound.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    /// Sum of the two Hoelder exponents; the tail is geometric when the
    /// contraction sum at this exponent is below one.
    pub alpha_sum: f64,
    pub dimension: f64,
    /// Theoretical tail ratio `sum_j r_j^(alpha_f + alpha_g)`.
    pub rho_theory: f64,
    /// Mean of the last few observed consecutive-difference ratios.
    pub rho_fitted: Option<f64>,
    /// True when `alpha_f + alpha_g` exceeds the similarity dimension,
    /// equivalently when the theoretical tail ratio is below one.
    pub certified: bool,
    /// `phi[i]` is the integral at level `i + 1`.
    pub phi: Vec<Complex64>,
    pub diffs: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
    /// Last value plus the closed geometric tail at the theoretical ratio.
    pub phi_limit: Complex64,
    /// `|phi_limit - true limit|` bound from the last difference, when the
    /// effective ratio (worse of theoretical and last observed) is below one.
    pub err_bound: Option<f64>,
}

impl ConvergenceReport {
    pub fn from_phi_sequence(
        alpha_sum: f64,
        dimension: f64,
        rho_theory: f64,
        phi: Vec<Complex64>,
    ) -> Self {
        let diffs: Vec<f64> = phi.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let ratios: Vec<Option<f64>> = diffs
            .windows(2)
            .map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None })
            .collect();
        let observed: Vec<f64> = ratios.iter().filter_map(|r| *r).collect();
        let tail = &observed[observed.len().saturating_sub(4)..];
        let rho_fitted = if tail.is_empty() {
            None
        } else {
            Some(tail.iter().sum::<f64>() / tail.len() as f64)
        };
        let certified = rho_theory < 1.0 && alpha_sum > dimension;

        let last = phi.last().copied().unwrap_or_default();
        let phi_limit = if phi.len() >= 2 && rho_theory < 1.0 {
            let d = last - phi[phi.len() - 2];
            last + d.scale(rho_theory / (1.0 - rho_theory))
        } else {
            last
        };
        let rho_eff = observed
            .last()
            .map_or(rho_theory, |r| rho_theory.max(*r));
        let err_bound = match diffs.last() {
            Some(d) if rho_eff < 1.0 => Some(d * rho_eff / (1.0 - rho_eff)),
            _ => None,
        };

        ConvergenceReport {
            alpha_sum,
            dimension,
            rho_theory,
            rho_fitted,
            certified,
            phi,
            diffs,
            ratios,
            phi_limit,
            err_bound,
        }
    }
}

/// Runs the pair integral on levels `1..=n_max` and wraps up the sequence.
pub fn phi_report(
    cs: &CellularStructure,
    f: &ScalarField,
    g: &ScalarField,
    n_max: usize,
) -> Result<ConvergenceReport, CochainError> {
    let mut phi = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        phi.push(phi_n(cs, f, g, n)?);
    }
    let alpha_sum = f.alpha + g.alpha;
    Ok(ConvergenceReport::from_phi_sequence(
        alpha_sum,
        cs.dimension(),
        contraction_sum(&cs.ratios(), alpha_sum),
        phi,
    ))
}

/// Coboundary combination `phi(fg, h) - phi(f, gh) + phi(hf, g)` at one level.
pub fn hochschild_b(
    cs: &CellularStructure,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    n: usize,
) -> Result<Complex64, CochainError> {
    let fg = ScalarField::product(f, g, cs)?;
    let gh = ScalarField::product(g, h, cs)?;
    let hf = ScalarField::product(h, f, cs)?;
    let chains = cs.level_chains(n)?;
    let grid = cs.grid();
    Ok(phi_on_chain(&chains.inner, grid, &fg, h)?
        - phi_on_chain(&chains.inner, grid, f, &gh)?
        + phi_on_chain(&chains.inner, grid, &hf, g)?)
}

#[derive(Debug, Clone)]
pub struct HochschildReport {
    /// `bphi[i]` is the coboundary combination at level `i + 1`.
    pub bphi: Vec<Complex64>,
    pub norms: Vec<f64>,
    pub ratios: Vec<Option<f64>>,
}

/// Coboundary combination on levels `1..=n_max`, products formed once.
pub fn hochschild_profile(
    cs: &CellularStructure,
    f: &ScalarField,
    g: &ScalarField,
    h: &ScalarField,
    n_max: usize,
) -> Result<HochschildReport, CochainError> {
    let fg = ScalarField::product(f, g, cs)?;
    let gh = ScalarField::product(g, h, cs)?;
    let hf = ScalarField::product(h, f, cs)?;
    let grid = cs.grid();
    let mut bphi = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let chains = cs.level_chains(n)?;
        let b = phi_on_chain(&chains.inner, grid, &fg, h)?
            - phi_on_chain(&chains.inner, grid, f, &gh)?
            + phi_on_chain(&chains.inner, grid, &hf, g)?;
        bphi.push(b);
    }
    let norms: Vec<f64> = bphi.iter().map(|v| v.norm()).collect();
    let ratios = norms
        .windows(2)
        .map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None })
        .collect();
    Ok(HochschildReport {
        bphi,
        norms,
        ratios,
    })
}

/// Largest observed `|f(p) - f(q)| / |p - q|^alpha` over vertex pairs of one
/// level. All pairs when their count stays within `max_pairs`, otherwise a
/// seeded random sample of `max_pairs` pairs.
pub fn holder_estimate(
    cs: &CellularStructure,
    f: &ScalarField,
    alpha: f64,
    level: usize,
    max_pairs: usize,
    seed: u64,
) -> Result<f64, CochainError> {
    let pts = level_vertices(cs, level)?;
    let n = pts.len();
    if n < 2 {
        return Ok(0.0);
    }
    let ratio = |p: Point2, q: Point2| {
        let d = p.dist(q);
        if d == 0.0 {
            0.0
        } else {
            (f.eval(p) - f.eval(q)).norm() / d.powf(alpha)
        }
    };
    let total = n * (n - 1) / 2;
    let best = if total <= max_pairs {
        let rows: Vec<usize> = (0..n).collect();
        par::max_mapped(&rows, |&i| {
            let mut m = 0.0f64;
            for j in (i + 1)..n {
                m = m.max(ratio(pts[i], pts[j]));
            }
            m
        })
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pairs: Vec<(Point2, Point2)> = (0..max_pairs)
            .map(|_| {
                let i = rng.gen_range(0..n);
                let mut j = rng.gen_range(0..n - 1);
                if j >= i {
                    j += 1;
                }
                (pts[i], pts[j])
            })
            .collect();
        par::max_mapped(&pairs, |(p, q)| ratio(*p, *q))
    };
    Ok(best.max(0.0))
}

/// Checks that the level-`n` integral does not depend on how its terms are
/// enumerated or on an extra midpoint subdivision of every segment.
#[derive(Debug, Clone)]
pub struct IndependenceReport {
    pub phi: Complex64,
    pub phi_permuted: Complex64,
    pub permutation_diff: f64,
    pub permutation_tol: f64,
    pub permutation_ok: bool,
    pub phi_split: Complex64,
    pub split_diff: f64,
    /// A priori bound `4 c_f c_g d^(alpha_f+alpha_g) S^n` with
    /// `S = sum_j r_j^(alpha_f+alpha_g)` and `d` the base diameter.
    pub split_bound: f64,
    /// Tighter bound summed over the actual segments,
    /// `2 c_f c_g sum |k| (len/2)^(alpha_f+alpha_g)`.
    pub split_bound_chain: f64,
    pub split_ok: bool,
}

/// `c_f`, `c_g` must be Hoelder constants valid for `f`, `g` at their
/// declared exponents; the subdivision bound is only as good as they are.
pub fn independence_check(
    cs: &CellularStructure,
    f: &ScalarField,
    g: &ScalarField,
    n: usize,
    c_f: f64,
    c_g: f64,
    seed: u64,
) -> Result<IndependenceReport, CochainError> {
    let chains = cs.level_chains(n)?;
    let grid = cs.grid();
    let inner = &chains.inner;
    let mut terms: Vec<(OrientedSegment, i64)> = inner.iter().map(|(s, k)| (*s, *k)).collect();

    let phi = phi_on_chain(inner, grid, f, g)?;

    // Re-enumerate in a shuffled order. Exactly rounded accumulation makes
    // the result provably identical; the check exercises that promise.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    terms.shuffle(&mut rng);
    let mut re = ExactSum::new();
    let mut im = ExactSum::new();
    let mut abs_sum = 0.0f64;
    for (seg, k) in &terms {
        let tail = grid.unsnap(seg.tail);
        let head = grid.unsnap(seg.head);
        for a in segment_addends(f, g, tail, head, *k as f64) {
            if !a.is_finite() {
                return Err(CochainError::NonFiniteField {
                    x: tail.x,
                    y: tail.y,
                });
            }
            re.add(a.re);
            im.add(a.im);
            abs_sum += a.norm();
        }
    }
    let phi_permuted = Complex64::new(re.value(), im.value());
    let permutation_tol = 1e-12 * abs_sum.max(1.0);
    let permutation_diff = (phi_permuted - phi).norm();

    // Midpoint subdivision at raw point level, bypassing the grid: snapping
    // the midpoints would inject quantization error unrelated to the claim
    // under test.
    let asum = f.alpha + g.alpha;
    let rows = par::map_slice(&terms, |(seg, k)| {
        let tail = grid.unsnap(seg.tail);
        let head = grid.unsnap(seg.head);
        let mid = tail.midpoint(head);
        let kf = *k as f64;
        let [a, b] = segment_addends(f, g, tail, mid, kf);
        let [c, d] = segment_addends(f, g, mid, head, kf);
        let chain_term = 2.0 * c_f * c_g * (tail.dist(head) / 2.0).powf(asum);
        if a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite() {
            Ok((
                [a.re + c.re, a.im + c.im, b.re + d.re, b.im + d.im],
                chain_term,
            ))
        } else {
            Err((tail.x, tail.y))
        }
    });
    let mut re = ExactSum::new();
    let mut im = ExactSum::new();
    let mut split_bound_chain = 0.0f64;
    for row in rows {
        let ([a, b, c, d], t) = row.map_err(|(x, y)| CochainError::NonFiniteField { x, y })?;
        re.add(a);
        re.add(c);
        im.add(b);
        im.add(d);
        split_bound_chain += t;
    }
    let phi_split = Complex64::new(re.value(), im.value());
    let split_diff = (phi_split - phi).norm();
    let split_bound = 4.0
        * c_f
        * c_g
        * cs.base().diameter().powf(asum)
        * contraction_sum(&cs.ratios(), asum).powi(n as i32);

    Ok(IndependenceReport {
        phi,
        phi_permuted,
        permutation_diff,
        permutation_tol,
        permutation_ok: permutation_diff <= permutation_tol,
        phi_split,
        split_diff,
        split_bound,
        split_bound_chain,
        split_ok: split_diff <= split_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geom::{ConvexPolygon, Similitude};
    use approx::assert_relative_eq;

    fn gasket() -> CellularStructure {
        let base = ConvexPolygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.5, 3f64.sqrt() / 2.0),
        ])
        .unwrap();
        let maps = vec![
            Similitude::new(0.5, 0.0, false, Point2::new(0.0, 0.0)),
            Similitude::new(0.5, 0.0, false, Point2::new(0.5, 0.0)),
            Similitude::new(0.5, 0.0, false, Point2::new(0.25, 3f64.sqrt() / 4.0)),
        ];
        CellularStructure::validate(base, maps, None).unwrap()
    }

    fn field(src: &str) -> ScalarField {
        ScalarField::from_expr(&parse(src).unwrap())
    }

    #[test]
    fn coordinate_pair_matches_lacuna_areas() {
        let cs = gasket();
        let (x, y) = (field("x"), field("y"));
        // Twice the signed area of the level-1 and level-2 lacuna chains.
        let s3 = 3f64.sqrt();
        let p1 = phi_n(&cs, &x, &y, 1).unwrap();
        assert_relative_eq!(p1.re, -s3 / 8.0, epsilon = 2e-10);
        assert_relative_eq!(p1.im, 0.0, epsilon = 1e-15);
        let p2 = phi_n(&cs, &x, &y, 2).unwrap();
        assert_relative_eq!(p2.re, -7.0 * s3 / 32.0, epsilon = 2e-10);
    }

    #[test]
    fn swap_is_an_exact_negation() {
        let cs = gasket();
        let f = field("x*y + sin(x)");
        let g = field("y^2 - x");
        let a = phi_n(&cs, &f, &g, 3).unwrap();
        let b = phi_n(&cs, &g, &f, 3).unwrap();
        assert!(a.re != 0.0, "want a nontrivial value for the swap test");
        assert_eq!((a.re + b.re).to_bits(), 0);
        assert_eq!((a.im + b.im).to_bits(), 0);
    }

    #[test]
    fn constant_first_slot_vanishes_exactly() {
        let cs = gasket();
        let one = ScalarField::one();
        for g in ["x", "z*z", "weier(0.8, 2, 6, x+y)"] {
            let v = phi_n(&cs, &one, &field(g), 2).unwrap();
            assert_eq!(v.re.to_bits(), 0, "re not exactly +0.0 for {g}");
            assert_eq!(v.im.to_bits(), 0, "im not exactly +0.0 for {g}");
        }
    }

    #[test]
    fn extrapolation_recovers_the_full_area_limit() {
        let cs = gasket();
        let rep = phi_report(&cs, &field("x"), &field("y"), 6).unwrap();
        assert!(rep.certified);
        assert_relative_eq!(rep.rho_theory, 0.75, epsilon = 1e-12);
        assert_relative_eq!(rep.phi_limit.re, -3f64.sqrt() / 2.0, epsilon = 1e-9);
        let err = rep.err_bound.unwrap();
        assert!((rep.phi_limit.re + 3f64.sqrt() / 2.0).abs() <= err);
        for r in rep.ratios.iter().flatten() {
            assert_relative_eq!(*r, 0.75, epsilon = 1e-6);
        }
    }

    #[test]
    fn coboundary_of_constant_vanishes_exactly() {
        let cs = gasket();
        let one = ScalarField::one();
        let b = hochschild_b(&cs, &one, &field("x"), &field("y"), 2).unwrap();
        assert_eq!(b.re.to_bits(), 0);
        assert_eq!(b.im.to_bits(), 0);
    }

    #[test]
    fn coboundary_decays_for_smooth_fields() {
        let cs = gasket();
        let rep =
            hochschild_profile(&cs, &field("x"), &field("y"), &field("x*y"), 6).unwrap();
        assert!(rep.norms[0] > 0.0);
        // Early levels are pre-asymptotic; from level 3 on the ratio has
        // settled under its limit band ceiling.
        for r in rep.ratios[2..].iter().flatten() {
            assert!(*r < 0.45, "coboundary ratio {r} fails to shrink");
        }
        let pairs: Vec<_> = rep.ratios.iter().flatten().collect();
        assert!(pairs.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn product_constant_combines_sups() {
        let cs = gasket();
        let x = field("x").with_holder(HolderConstant::Analytic(1.0));
        let y = field("y").with_holder(HolderConstant::Analytic(1.0));
        let xy = ScalarField::product(&x, &y, &cs).unwrap();
        // sup|x| = 1 at the right corner, sup|y| = sqrt(3)/2 at the apex.
        let want = 1.0 * (3f64.sqrt() / 2.0) + 1.0 * 1.0;
        match xy.holder {
            HolderConstant::Estimated(c) => assert_relative_eq!(c, want, epsilon = 1e-8),
            other => panic!("expected an estimated constant, got {other:?}"),
        }
        assert_relative_eq!(xy.alpha, 1.0);
    }

    #[test]
    fn holder_estimate_sees_the_lipschitz_slope() {
        let cs = gasket();
        let est = holder_estimate(&cs, &field("x"), 1.0, 4, 200_000, 7).unwrap();
        assert!(est > 0.99 && est <= 1.0 + 1e-9, "estimate {est}");
    }

    #[test]
    fn independence_passes_for_smooth_pair() {
        let cs = gasket();
        // |x1 y1 - x2 y2| <= 1.5 |p - q| and |x1^2 - x2^2| <= 2 |p - q|
        // on the unit-diameter base.
        let f = field("x*y");
        let g = field("x^2");
        let rep = independence_check(&cs, &f, &g, 3, 1.5, 2.0, 11).unwrap();
        assert!(rep.permutation_ok, "permutation diff {}", rep.permutation_diff);
        assert_eq!(rep.permutation_diff, 0.0);
        assert!(rep.split_ok, "split diff {} > {}", rep.split_diff, rep.split_bound);
        assert!(rep.split_bound_chain <= rep.split_bound * 1.0001);
    }
}
