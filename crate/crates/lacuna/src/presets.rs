//! Built-in structures. A preset is a list of validated structures; all but
//! the wedge have exactly one component.

use std::f64::consts::PI;

use crate::geom::{ConvexPolygon, Point2, Similitude};
use crate::structure::CellularStructure;

pub const PRESET_NAMES: &[&str] = &[
    "gasket",
    "square4",
    "pinwheel",
    "infinite-gasket",
    "gasket-wedge",
];

fn poly(pts: &[(f64, f64)]) -> ConvexPolygon {
    ConvexPolygon::new(pts.iter().map(|&(x, y)| Point2::new(x, y)).collect())
        .expect("preset polygon is convex ccw")
}

fn validated(base: ConvexPolygon, maps: Vec<Similitude>) -> CellularStructure {
    CellularStructure::validate(base, maps, None).expect("preset satisfies both conditions")
}

fn gasket_at(x0: f64) -> CellularStructure {
    let h = 3f64.sqrt() / 2.0;
    let base = poly(&[(x0, 0.0), (x0 + 1.0, 0.0), (x0 + 0.5, h)]);
    let maps = vec![
        Similitude::new(0.5, 0.0, false, Point2::new(x0 / 2.0, 0.0)),
        Similitude::new(0.5, 0.0, false, Point2::new(x0 / 2.0 + 0.5, 0.0)),
        Similitude::new(0.5, 0.0, false, Point2::new(x0 / 2.0 + 0.25, h / 2.0)),
    ];
    validated(base, maps)
}

fn gasket() -> CellularStructure {
    gasket_at(0.0)
}

fn square4() -> CellularStructure {
    let base = poly(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]);
    let maps = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)]
        .iter()
        .map(|&(x, y)| Similitude::new(0.5, 0.0, false, Point2::new(x, y)))
        .collect();
    validated(base, maps)
}

/// Right triangle with legs 2 and 1, cut into five similar copies at ratio
/// 1/sqrt(5); the middle copy is dropped, leaving a triangular hole of area
/// one fifth. The four kept copies are all mirror images.
fn pinwheel() -> CellularStructure {
    let a = Point2::new(0.0, 0.0); // right angle
    let b = Point2::new(2.0, 0.0); // long-leg end
    let c = Point2::new(0.0, 1.0); // short-leg end
    let h = Point2::new(0.4, 0.8); // foot of the altitude from a
    let mid_ha = Point2::new(0.2, 0.4);
    let mid_hb = Point2::new(1.2, 0.4);
    let mid_ab = Point2::new(1.0, 0.0);

    let src = [a, b, c];
    let tiles = [
        [h, a, c],
        [mid_ha, mid_ab, a],
        [mid_hb, b, mid_ab],
        [h, mid_hb, mid_ha],
    ];
    let maps = tiles
        .iter()
        .map(|dst| {
            Similitude::from_triangle_correspondence(src, *dst)
                .expect("pinwheel tiles are similar to the base")
        })
        .collect();
    validated(poly(&[(0.0, 0.0), (2.0, 0.0), (0.0, 1.0)]), maps)
}

/// The three gasket maps plus a fourth at ratio 1/3 whose image is the
/// middle lacuna shrunk by 2/3 about its own centroid (a half-turn keeps it
/// point-down). Its cell never touches the other three.
fn infinite_gasket() -> CellularStructure {
    let h = 3f64.sqrt() / 2.0;
    let base = poly(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]);
    let maps = vec![
        Similitude::new(0.5, 0.0, false, Point2::new(0.0, 0.0)),
        Similitude::new(0.5, 0.0, false, Point2::new(0.5, 0.0)),
        Similitude::new(0.5, 0.0, false, Point2::new(0.25, h / 2.0)),
        Similitude::new(
            1.0 / 3.0,
            PI,
            false,
            Point2::new(2.0 / 3.0, 2.0 * 3f64.sqrt() / 9.0),
        ),
    ];
    validated(base, maps)
}

/// Looks up a preset. The wedge is two gaskets joined at the corner (1, 0);
/// every other name yields a single structure.
pub fn preset(name: &str) -> Option<Vec<CellularStructure>> {
    match name {
        "gasket" => Some(vec![gasket()]),
        "square4" => Some(vec![square4()]),
        "pinwheel" => Some(vec![pinwheel()]),
        "infinite-gasket" => Some(vec![infinite_gasket()]),
        "gasket-wedge" => Some(vec![gasket_at(0.0), gasket_at(1.0)]),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{cycle_decomposition, loop_signed_area};
    use crate::structure::contraction_sum;
    use approx::assert_relative_eq;

    #[test]
    fn every_name_resolves_and_validates() {
        for name in PRESET_NAMES {
            let comps = preset(name).unwrap_or_else(|| panic!("missing preset {name}"));
            assert!(!comps.is_empty());
        }
        assert!(preset("nonesuch").is_none());
    }

    #[test]
    fn dimensions_hit_closed_forms() {
        let dim = |name: &str| preset(name).unwrap()[0].dimension();
        assert_relative_eq!(dim("gasket"), 3f64.log2(), epsilon = 1e-10);
        assert_relative_eq!(dim("square4"), 2.0, epsilon = 1e-10);
        assert_relative_eq!(
            dim("pinwheel"),
            4f64.ln() / 5f64.sqrt().ln(),
            epsilon = 1e-10
        );
        // No closed form; check the defining equation instead.
        let cs = &preset("infinite-gasket").unwrap()[0];
        let resid = contraction_sum(&cs.ratios(), cs.dimension()) - 1.0;
        assert!(resid.abs() < 1e-10, "residual {resid}");
        assert!(cs.dimension() > 3f64.log2() && cs.dimension() < 2.0);
    }

    #[test]
    fn pinwheel_hole_has_area_one_fifth() {
        let cs = &preset("pinwheel").unwrap()[0];
        let chains = cs.level_chains(1).unwrap();
        assert_eq!(chains.b.max_abs_coeff(), 1);
        let loops = cycle_decomposition(&chains.inner, cs.grid()).unwrap();
        let area: f64 = loops.iter().map(|l| loop_signed_area(l, cs.grid())).sum();
        // The hole winds clockwise: a negatively oriented fifth of area 1.
        assert_relative_eq!(area, -0.2, epsilon = 1e-8);
    }

    #[test]
    fn square_tiling_leaves_no_inner_chain() {
        let cs = &preset("square4").unwrap()[0];
        for n in 1..=4 {
            let chains = cs.level_chains(n).unwrap();
            assert!(chains.inner.is_empty(), "level {n} has inner segments");
        }
    }

    #[test]
    fn wedge_components_share_one_corner() {
        let comps = preset("gasket-wedge").unwrap();
        assert_eq!(comps.len(), 2);
        for cs in &comps {
            assert_relative_eq!(cs.dimension(), 3f64.log2(), epsilon = 1e-10);
        }
        let a = comps[0].base().vertices().to_vec();
        let b = comps[1].base().vertices().to_vec();
        let shared: Vec<_> = a
            .iter()
            .filter(|p| b.iter().any(|q| p.dist(*q) < 1e-12))
            .collect();
        assert_eq!(shared.len(), 1);
    }
}
