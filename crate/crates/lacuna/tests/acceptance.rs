//! Acceptance gate. Each test is one criterion of the build contract, run
//! at its stated tolerance; the harness prints one pass/fail line per
//! criterion. Scale is kept to a desk run: gasket levels stay at or below
//! 10, the four-map presets at or below 8, pinwheel at or below 6.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use lacuna::cochain::{
    hochschild_b, hochschild_profile, independence_check, phi_n, phi_report, ConvergenceReport,
    ScalarField,
};
use lacuna::expr;
use lacuna::presets::preset;
use lacuna::structure::CellularStructure;
use lacuna::young::{
    p_variation, polyline_stieltjes, stieltjes_sum, young_integral, young_loeve_bound, zeta,
    Partition,
};

fn one(name: &str) -> CellularStructure {
    let mut comps = preset(name).expect("known preset");
    assert_eq!(comps.len(), 1, "{name} is a single component");
    comps.remove(0)
}

fn field(src: &str) -> ScalarField {
    ScalarField::from_expr(&expr::parse(src).expect("valid expression"))
}

/// `|phi_{n+1} - phi_n| / |phi_n - phi_{n-1}|` read off a level report.
fn cauchy_ratio_at(report: &ConvergenceReport, n: usize) -> f64 {
    report.ratios[n - 2].expect("nonzero consecutive differences")
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

#[test]
fn c01_moran_dimensions() {
    let gasket = one("gasket");
    assert!(
        (gasket.dimension() - 1.584962500721156).abs() < 1e-10,
        "gasket dimension {}",
        gasket.dimension()
    );

    let pinwheel = one("pinwheel");
    assert!(
        (pinwheel.dimension() - 1.722706232293572).abs() < 1e-10,
        "pinwheel dimension {}",
        pinwheel.dimension()
    );

    // Independent oracle: bisection on the defining equation of the
    // mixed-ratio preset, 1/3 once and 1/2 three times.
    let f = |s: f64| (1f64 / 3.0).powf(s) + 3.0 * 0.5f64.powf(s) - 1.0;
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    assert!(f(lo) > 0.0 && f(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let infinite = one("infinite-gasket");
    assert!(
        (infinite.dimension() - root).abs() < 1e-10,
        "mixed-ratio dimension {} vs bisection {root}",
        infinite.dimension()
    );
}

#[test]
fn c02_chain_combinatorics() {
    let gasket = one("gasket");
    for n in 1..=8 {
        let set = gasket.level_chains(n).unwrap();
        let grid = gasket.grid();
        let expect_b = 3.0 * 1.5f64.powi(n as i32);
        let len_b = set.b.total_length(grid);
        assert!(
            (len_b - expect_b).abs() <= 1e-9 * expect_b,
            "level {n}: |b| = {len_b}, expected {expect_b}"
        );
        let len_o = set.o.total_length(grid);
        assert!(
            (len_o - 3.0).abs() <= 1e-9 * 3.0,
            "level {n}: |o| = {len_o}, expected 3"
        );
    }

    let square = one("square4");
    for n in 1..=6 {
        let set = square.level_chains(n).unwrap();
        assert!(
            set.inner.is_empty(),
            "square4 level {n} has {} inner segments",
            set.inner.len()
        );
    }

    // Both chains are exact cycles on every preset. Depth stays at the desk
    // cap of each family: 8 in general, 6 for pinwheel.
    for name in ["gasket", "square4", "pinwheel", "infinite-gasket", "gasket-wedge"] {
        let n_max = if name == "pinwheel" { 6 } else { 8 };
        for (i, comp) in preset(name).unwrap().iter().enumerate() {
            for n in 1..=n_max {
                let set = comp.level_chains(n).unwrap();
                assert!(set.b.is_cycle(), "{name}[{i}] level {n}: b not a cycle");
                assert!(set.o.is_cycle(), "{name}[{i}] level {n}: o not a cycle");
            }
        }
    }
}

#[test]
fn c03_shoelace_values_and_limit() {
    let gasket = one("gasket");
    let (f, g) = (field("x"), field("y"));
    let s3 = 3f64.sqrt();

    let phi1 = phi_n(&gasket, &f, &g, 1).unwrap();
    assert!(
        (phi1 - Complex64::new(-s3 / 8.0, 0.0)).norm() < 1e-10,
        "phi_1 = {phi1}"
    );
    let phi2 = phi_n(&gasket, &f, &g, 2).unwrap();
    assert!(
        (phi2 - Complex64::new(-7.0 * s3 / 32.0, 0.0)).norm() < 1e-10,
        "phi_2 = {phi2}"
    );

    let report = phi_report(&gasket, &f, &g, 10).unwrap();
    assert!(
        (report.phi_limit - Complex64::new(-s3 / 2.0, 0.0)).norm() < 1e-6,
        "extrapolated limit {}",
        report.phi_limit
    );
}

#[test]
fn c04_smooth_cauchy_rate() {
    let gasket = one("gasket");
    for (fs, gs) in [("x", "y"), ("x*y + sin(x)", "y^2 - x")] {
        let report = phi_report(&gasket, &field(fs), &field(gs), 10).unwrap();
        let ratios: Vec<f64> = (4..=9).map(|n| cauchy_ratio_at(&report, n)).collect();
        let m = mean(&ratios);
        assert!(
            (0.70..=0.80).contains(&m),
            "({fs}, {gs}): mean consecutive ratio {m}, window {ratios:?}"
        );
    }
}

#[test]
fn c05_coboundary_decay_and_unit_annihilation() {
    let gasket = one("gasket");
    let (f, g, h) = (field("x"), field("y"), field("x*y"));
    let profile = hochschild_profile(&gasket, &f, &g, &h, 10).unwrap();
    for n in 4..=9 {
        // norms[k] is level k+1, so this is |b phi_{n+1}| / |b phi_n|.
        let r = profile.norms[n] / profile.norms[n - 1];
        assert!(
            (0.33..=0.43).contains(&r),
            "coboundary ratio at level {n}: {r}"
        );
    }

    let unit = ScalarField::one();
    for (cs, n) in [(&gasket, 3usize), (&one("pinwheel"), 2)] {
        let b = hochschild_b(cs, &unit, &g, &h, n).unwrap();
        assert_eq!(b.re.to_bits(), 0.0f64.to_bits(), "re of b(1,g,h) at {n}");
        assert_eq!(b.im.to_bits(), 0.0f64.to_bits(), "im of b(1,g,h) at {n}");
    }
}

fn random_field(rng: &mut ChaCha8Rng) -> ScalarField {
    const SMOOTH: [&str; 10] = [
        "x",
        "y",
        "x*y",
        "x + y",
        "x^2",
        "y^2 - x",
        "sin(x)",
        "cos(y)",
        "exp(x)",
        "abs(x - y)",
    ];
    const ROUGH: [&str; 3] = [
        "weier(0.8, 2, 12, x)",
        "weier(0.6, 2, 12, y)",
        "weier(0.9, 3, 12, x + y)",
    ];
    let a = SMOOTH[rng.gen_range(0..SMOOTH.len())];
    let b = if rng.gen_bool(0.25) {
        ROUGH[rng.gen_range(0..ROUGH.len())]
    } else {
        SMOOTH[rng.gen_range(0..SMOOTH.len())]
    };
    let c = rng.gen_range(-3i32..=3);
    field(&format!("({a}) + {c} * ({b})"))
}

#[test]
fn c06_bitwise_antisymmetry() {
    let comps: Vec<CellularStructure> = ["gasket", "square4", "pinwheel", "infinite-gasket"]
        .iter()
        .map(|n| one(n))
        .chain(preset("gasket-wedge").unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..100 {
        let cs = &comps[i % comps.len()];
        let f = random_field(&mut rng);
        let g = random_field(&mut rng);
        let fg = phi_n(cs, &f, &g, 2).unwrap();
        let gf = phi_n(cs, &g, &f, 2).unwrap();
        let s = fg + gf;
        assert_eq!(
            (s.re.to_bits(), s.im.to_bits()),
            (0.0f64.to_bits(), 0.0f64.to_bits()),
            "pair {i}: phi(f,g) + phi(g,f) = {s:e}"
        );
    }
}

#[test]
fn c07_line_integral_oracle() {
    let pairs = [
        ("x", "y"),
        ("y", "x"),
        ("x^2", "y"),
        ("x", "x*y"),
        ("sin(x)", "y"),
        ("cos(y)", "x"),
        ("x*y", "y^2"),
        ("x + y", "x - y"),
        ("exp(x)", "y"),
        ("sin(x)", "cos(y)"),
    ];
    for (name, n_max) in [("gasket", 8usize), ("pinwheel", 6)] {
        let cs = one(name);
        for (fs, gs) in pairs {
            let (f, g) = (field(fs), field(gs));
            let report = phi_report(&cs, &f, &g, n_max).unwrap();
            let oracle =
                polyline_stieltjes(|p| f.eval(p), |p| g.eval(p), cs.base(), 12).scale(-2.0);
            let diff = (report.phi_limit - oracle).norm();
            let tol = report.err_bound.expect("contracting tail") + 1e-6;
            assert!(
                diff <= tol,
                "{name} ({fs}, {gs}): limit {} vs oracle {}, diff {diff} > {tol}",
                report.phi_limit,
                oracle
            );
        }
    }

    // The unit-and-coordinate pair is reported, not asserted: under this
    // construction the integral of (1, x) vanishes identically at every
    // level, so its limit is zero.
    let gasket = one("gasket");
    let report = phi_report(&gasket, &ScalarField::one(), &field("x"), 6).unwrap();
    let oracle = polyline_stieltjes(
        |_| Complex64::new(1.0, 0.0),
        |p| Complex64::new(p.x, 0.0),
        gasket.base(),
        12,
    )
    .scale(-2.0);
    println!(
        "pair (1, x): limit computed as {} (loop-integral prediction {})",
        report.phi_limit, oracle
    );
}

#[test]
fn c08_enumeration_and_subdivision_invariance() {
    let gasket = one("gasket");
    // Gradient bounds on the base triangle give these constants.
    let f = field("x*y");
    let g = field("x^2");
    let rep = independence_check(&gasket, &f, &g, 3, 1.5, 2.0, 0x9a3e).unwrap();
    assert!(
        rep.permutation_diff <= rep.permutation_tol,
        "permuted enumeration moved the value by {}",
        rep.permutation_diff
    );
    assert!(
        rep.split_diff <= rep.split_bound,
        "midpoint subdivision moved the value by {}, bound {}",
        rep.split_diff,
        rep.split_bound
    );
}

#[test]
fn c09_stieltjes_module() {
    let linear = young_integral(|t| t, |t| t, 1e-12).unwrap();
    assert!((linear.value - 0.5).abs() < 1e-10, "int x dx = {}", linear.value);

    let square = young_integral(|t| t, |t| t * t, 1e-10).unwrap();
    assert!(
        (square.value - 2.0 / 3.0).abs() < 1e-8,
        "int x d(x^2) = {}",
        square.value
    );

    let z2 = zeta(2.0).unwrap();
    assert!(
        (z2 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-12,
        "zeta(2) = {z2}"
    );

    // Identity pair: every tagged partition sum stays inside the classical
    // error envelope around the true value 1/2.
    let v1 = p_variation(|t| t, 1.0, 1e-3).unwrap().norm;
    let bound = young_loeve_bound(v1, v1, 1.0, 1.0).unwrap();
    for seed in 0..1000u64 {
        let part = Partition::random(32, seed);
        let s = stieltjes_sum(|t| t, |t| t, &part);
        assert!(
            (s - 0.5).abs() <= bound,
            "seed {seed}: sum {s} outside envelope {bound}"
        );
    }
}

#[test]
fn c10_regularity_threshold() {
    let gasket = one("gasket");
    let dim = gasket.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);

    // Above threshold: certified, and consecutive differences contract at
    // every probed level. The pair uses the scale-matched frequency 2.
    for _ in 0..5 {
        let alpha = rng.gen_range((dim + 0.1) / 2.0 + 0.005..=1.0);
        let f = field(&format!("weier({alpha}, 2, 24, x)"));
        let g = field(&format!("weier({alpha}, 2, 24, y)"));
        let report = phi_report(&gasket, &f, &g, 9).unwrap();
        assert!(report.certified, "alpha = {alpha} should certify");
        for n in 3..=8 {
            let r = cauchy_ratio_at(&report, n);
            assert!(r < 1.0, "alpha = {alpha}, level {n}: ratio {r}");
        }
    }

    // Below threshold: the report must say so. No claim about divergence.
    for _ in 0..5 {
        let alpha = rng.gen_range(0.5..(dim - 0.1) / 2.0 - 0.005);
        let f = field(&format!("weier({alpha}, 2, 24, x)"));
        let g = field(&format!("weier({alpha}, 2, 24, y)"));
        let report = phi_report(&gasket, &f, &g, 4).unwrap();
        assert!(!report.certified, "alpha = {alpha} must not certify");
    }
}
