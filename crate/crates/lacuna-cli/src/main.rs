//! `lacuna`: construct self-similar planar structures, extract their
//! boundary chains, and run the pair integrals and classical
//! Stieltjes-integral cross-checks from the companion library.
//!
//! Exit codes: 0 success, 2 a structure or computation failed validation,
//! 3 bad configuration or usage (including expression syntax), 4 a level
//! request above the configured depth cap.

mod config;
mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use lacuna::chain::ChainLevelSet;
use lacuna::cochain::{
    holder_estimate, independence_check, phi_n, ConvergenceReport, CochainError,
    HochschildReport, ScalarField,
};
use lacuna::expr;
use lacuna::geom::Point2;
use lacuna::structure::{contraction_sum, CellularStructure, StructureError};
use lacuna::young::{
    p_variation, polyline_stieltjes, stieltjes_sum, young_integral, young_loeve_bound,
    Partition, YoungError,
};

use config::Source;

#[derive(Debug)]
pub enum CliError {
    /// Bad usage, file, or expression. Exit 3.
    Config(String),
    /// A structure or computation failed its own checks. Exit 2.
    Invalid(String),
    /// Level request above the depth cap. Exit 4.
    Depth(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 3,
            CliError::Invalid(_) => 2,
            CliError::Depth(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Invalid(m) | CliError::Depth(m) => m,
        }
    }
}

impl From<StructureError> for CliError {
    fn from(e: StructureError) -> Self {
        match e {
            StructureError::DepthLimit { .. } => CliError::Depth(e.to_string()),
            _ => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<CochainError> for CliError {
    fn from(e: CochainError) -> Self {
        match e {
            CochainError::Structure(inner) => CliError::from(inner),
            CochainError::NonFiniteField { .. } => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<YoungError> for CliError {
    fn from(e: YoungError) -> Self {
        match e {
            YoungError::NoConvergence { .. } => CliError::Invalid(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "lacuna",
    version,
    about = "Boundary chains and pair integrals on self-similar planar sets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainFormat {
    Json,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the cell conditions and report each component
    Validate {
        #[command(flatten)]
        src: Source,
    },
    /// Print the similarity dimension (largest across components)
    Dim {
        #[command(flatten)]
        src: Source,
    },
    /// Emit the level chains b, o, and the inner chain as JSON or SVG
    Chains {
        #[command(flatten)]
        src: Source,
        /// Refinement level
        #[arg(long, default_value_t = 1)]
        level: usize,
        #[arg(long, value_enum, default_value_t = ChainFormat::Json)]
        format: ChainFormat,
        /// Write here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Pair integral of two fields over the inner chains, level by level,
    /// with extrapolated limit and tail certificate
    Cocycle {
        #[command(flatten)]
        src: Source,
        /// First field, e.g. "x", "x*y + sin(x)", "weier(0.7, 2, 24, x)"
        #[arg(long)]
        f: String,
        /// Second field
        #[arg(long)]
        g: String,
        /// Override the declared regularity exponent of f (in (0, 1])
        #[arg(long, value_name = "A")]
        alpha_f: Option<f64>,
        /// Override the declared regularity exponent of g
        #[arg(long, value_name = "A")]
        alpha_g: Option<f64>,
        /// Deepest level to evaluate
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Coboundary defect phi(fg,h) - phi(f,gh) + phi(hf,g) per level
    Hochschild {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long)]
        h: String,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
        format: TableFormat,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// One-dimensional Stieltjes integral of f dg on [0,1] with variation
    /// seminorms and the classical partition-error bound
    Young {
        /// Integrand, evaluated at (t, 0), real part taken
        #[arg(long)]
        f: String,
        /// Integrator, same convention
        #[arg(long)]
        g: String,
        /// Refinement stops when consecutive dyadic sums agree this well
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Variation exponent for f
        #[arg(long)]
        p: Option<f64>,
        /// Variation exponent for g
        #[arg(long)]
        q: Option<f64>,
        /// Grid mesh for the variation scan
        #[arg(long, default_value_t = 1e-3)]
        mesh: f64,
        /// Also check this many random tagged partitions against the bound
        #[arg(long, default_value_t = 0)]
        random_partitions: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Line integral of f dg around the base boundary and the limit it
    /// predicts for the pair integral
    BoundaryIntegral {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Each base edge is split into 2^depth pieces
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Also run the level-by-level pair integral and report agreement
        #[arg(long)]
        compare: bool,
        /// Levels for the comparison run
        #[arg(long, default_value_t = 8)]
        levels: usize,
    },
    /// Enumeration-order and midpoint-subdivision invariance of the pair
    /// integral at one level
    Independence {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        /// Regularity constant for f; estimated from vertex pairs if absent
        #[arg(long)]
        c_f: Option<f64>,
        /// Regularity constant for g; estimated if absent
        #[arg(long)]
        c_g: Option<f64>,
        #[arg(long, default_value_t = 3)]
        level: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Validate { src } => {
            let comps = src.load()?;
            for (i, c) in comps.iter().enumerate() {
                println!(
                    "component {i}: valid, {} maps, dimension {:.10}",
                    c.maps().len(),
                    c.dimension()
                );
            }
            Ok(())
        }
        Cmd::Dim { src } => {
            let comps = src.load()?;
            let dim = comps
                .iter()
                .map(|c| c.dimension())
                .fold(f64::NEG_INFINITY, f64::max);
            println!("{dim:.10}");
            Ok(())
        }
        Cmd::Chains {
            src,
            level,
            format,
            out,
        } => {
            let comps = src.load()?;
            let sets: Vec<ChainLevelSet> = comps
                .iter()
                .map(|c| c.level_chains(level))
                .collect::<Result<_, _>>()?;
            let parts: Vec<(&CellularStructure, &ChainLevelSet)> =
                comps.iter().zip(sets.iter()).collect();
            let text = match format {
                ChainFormat::Json => render::chains_json(level, &parts),
                ChainFormat::Svg => render::render_svg(&parts),
            };
            emit(out, text)
        }
        Cmd::Cocycle {
            src,
            f,
            g,
            alpha_f,
            alpha_g,
            levels,
            format,
            out,
        } => {
            let comps = src.load()?;
            let f = parse_field(&f, alpha_f)?;
            let g = parse_field(&g, alpha_g)?;
            let report = combined_report(&comps, &f, &g, require_levels(levels)?)?;
            let text = match format {
                TableFormat::Csv => render::cocycle_csv(&report),
                TableFormat::Json => render::cocycle_json(&report),
            };
            emit(out, text)
        }
        Cmd::Hochschild {
            src,
            f,
            g,
            h,
            levels,
            format,
            out,
        } => {
            let comps = src.load()?;
            let f = parse_field(&f, None)?;
            let g = parse_field(&g, None)?;
            let h = parse_field(&h, None)?;
            let levels = require_levels(levels)?;
            let mut bphi = vec![Complex64::new(0.0, 0.0); levels];
            for cs in &comps {
                let rep = lacuna::cochain::hochschild_profile(cs, &f, &g, &h, levels)?;
                for (acc, v) in bphi.iter_mut().zip(&rep.bphi) {
                    *acc += v;
                }
            }
            let norms: Vec<f64> = bphi.iter().map(|v| v.norm()).collect();
            let ratios = norms
                .windows(2)
                .map(|w| if w[0] > 0.0 { Some(w[1] / w[0]) } else { None })
                .collect();
            let report = HochschildReport {
                bphi,
                norms,
                ratios,
            };
            let text = match format {
                TableFormat::Csv => render::hochschild_csv(&report),
                TableFormat::Json => render::hochschild_json(&report),
            };
            emit(out, text)
        }
        Cmd::Young {
            f,
            g,
            tol,
            p,
            q,
            mesh,
            random_partitions,
            seed,
        } => {
            let ff = parse_field(&f, None)?;
            let gf = parse_field(&g, None)?;
            let f1 = move |t: f64| ff.eval(Point2::new(t, 0.0)).re;
            let g1 = move |t: f64| gf.eval(Point2::new(t, 0.0)).re;

            let integral = young_integral(&f1, &g1, tol)?;
            println!("integral {}", integral.value);
            println!("cells {}", integral.cells);
            println!("est_error {}", integral.est_error);

            let vp = match p {
                Some(p) => {
                    let v = p_variation(&f1, p, mesh)?;
                    println!("f_variation_sum {}", v.sum);
                    println!("f_variation_norm {}", v.norm);
                    Some((p, v))
                }
                None => None,
            };
            let vq = match q {
                Some(q) => {
                    let v = p_variation(&g1, q, mesh)?;
                    println!("g_variation_sum {}", v.sum);
                    println!("g_variation_norm {}", v.norm);
                    Some((q, v))
                }
                None => None,
            };
            if let (Some((p, vp)), Some((q, vq))) = (&vp, &vq) {
                let bound = young_loeve_bound(vp.norm, vq.norm, *p, *q)?;
                println!("young_loeve_bound {bound}");
                if random_partitions > 0 {
                    let mut max_dev = 0.0f64;
                    for i in 0..random_partitions {
                        let part = Partition::random(128, seed.wrapping_add(i as u64));
                        let s = stieltjes_sum(&f1, &g1, &part);
                        max_dev = max_dev.max((s - integral.value).abs());
                    }
                    println!("random_partitions {random_partitions}");
                    println!("max_deviation {max_dev}");
                    println!("deviations_within_bound {}", max_dev <= bound);
                }
            } else if random_partitions > 0 {
                return Err(CliError::Config(
                    "the random partition check needs --p and --q".into(),
                ));
            }
            Ok(())
        }
        Cmd::BoundaryIntegral {
            src,
            f,
            g,
            depth,
            compare,
            levels,
        } => {
            let comps = src.load()?;
            let f = parse_field(&f, None)?;
            let g = parse_field(&g, None)?;
            let mut loop_sum = Complex64::new(0.0, 0.0);
            for cs in &comps {
                loop_sum += polyline_stieltjes(
                    |p| f.eval(p),
                    |p| g.eval(p),
                    cs.base(),
                    depth,
                );
            }
            let predicted = loop_sum.scale(-2.0);
            println!("loop_integral {} {}", loop_sum.re, loop_sum.im);
            println!("predicted_phi_limit {} {}", predicted.re, predicted.im);
            if compare {
                let report = combined_report(&comps, &f, &g, require_levels(levels)?)?;
                let diff = (report.phi_limit - predicted).norm();
                let tol = report.err_bound.unwrap_or(0.0) + 1e-6;
                println!("phi_limit {} {}", report.phi_limit.re, report.phi_limit.im);
                match report.err_bound {
                    Some(b) => println!("err_bound {b}"),
                    None => println!("err_bound none"),
                }
                println!("difference {diff}");
                println!("tolerance {tol}");
                println!("agreement {}", if diff <= tol { "ok" } else { "mismatch" });
            }
            Ok(())
        }
        Cmd::Independence {
            src,
            f,
            g,
            c_f,
            c_g,
            level,
            seed,
        } => {
            let comps = src.load()?;
            if comps.len() != 1 {
                return Err(CliError::Config(
                    "the independence check runs on a single component".into(),
                ));
            }
            let cs = &comps[0];
            let f = parse_field(&f, None)?;
            let g = parse_field(&g, None)?;
            let cf = constant_or_estimate(cs, &f, c_f, seed, "c_f")?;
            let cg = constant_or_estimate(cs, &g, c_g, seed.wrapping_add(1), "c_g")?;
            let rep = independence_check(cs, &f, &g, level, cf.0, cg.0, seed)?;
            println!("c_f {} ({})", cf.0, cf.1);
            println!("c_g {} ({})", cg.0, cg.1);
            println!("phi {} {}", rep.phi.re, rep.phi.im);
            println!("permutation_diff {}", rep.permutation_diff);
            println!("permutation_tol {}", rep.permutation_tol);
            println!("permutation_ok {}", rep.permutation_ok);
            println!("split_diff {}", rep.split_diff);
            println!("split_bound_chain {}", rep.split_bound_chain);
            println!("split_bound {}", rep.split_bound);
            println!("split_ok {}", rep.split_ok);
            Ok(())
        }
    }
}

fn parse_field(src: &str, alpha_override: Option<f64>) -> Result<ScalarField, CliError> {
    let e = expr::parse(src)
        .map_err(|pe| CliError::Config(format!("expression {src:?}: {pe}")))?;
    let mut field = ScalarField::from_expr(&e);
    if let Some(a) = alpha_override {
        if !(a > 0.0 && a <= 1.0) {
            return Err(CliError::Config(format!(
                "regularity exponent {a} outside (0, 1]"
            )));
        }
        field.alpha = a;
    }
    Ok(field)
}

fn require_levels(levels: usize) -> Result<usize, CliError> {
    if levels == 0 {
        Err(CliError::Config("--levels must be at least 1".into()))
    } else {
        Ok(levels)
    }
}

/// Per-level integrals summed across components; the tail ratio and
/// dimension are the worst (largest) across components.
fn combined_report(
    comps: &[CellularStructure],
    f: &ScalarField,
    g: &ScalarField,
    n_max: usize,
) -> Result<ConvergenceReport, CliError> {
    let alpha_sum = f.alpha + g.alpha;
    let mut phi = vec![Complex64::new(0.0, 0.0); n_max];
    for cs in comps {
        for n in 1..=n_max {
            phi[n - 1] += phi_n(cs, f, g, n)?;
        }
    }
    let dimension = comps
        .iter()
        .map(|c| c.dimension())
        .fold(f64::NEG_INFINITY, f64::max);
    let rho = comps
        .iter()
        .map(|c| contraction_sum(&c.ratios(), alpha_sum))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(ConvergenceReport::from_phi_sequence(
        alpha_sum, dimension, rho, phi,
    ))
}

fn constant_or_estimate(
    cs: &CellularStructure,
    field: &ScalarField,
    given: Option<f64>,
    seed: u64,
    name: &str,
) -> Result<(f64, &'static str), CliError> {
    match given {
        Some(v) if v >= 0.0 && v.is_finite() => Ok((v, "given")),
        Some(v) => Err(CliError::Config(format!("{name} = {v} is not a valid constant"))),
        None => {
            let level = 4.min(cs.max_depth());
            let est = holder_estimate(cs, field, field.alpha, level, 200_000, seed)?;
            // Vertex pairs only reach a lower bound; pad it.
            Ok((est * 1.5, "estimated"))
        }
    }
}

fn emit(out: Option<PathBuf>, text: String) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(&p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
