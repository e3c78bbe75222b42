//! Output formatting: chain documents, SVG drawings, CSV and JSON tables.
//!
//! Everything here is byte-deterministic: floats go through the shortest
//! round-trip formatter (or a fixed precision for SVG coordinates), map keys
//! are already ordered by the library, and no timestamps or locale-dependent
//! pieces are emitted.

use serde::Serialize;

use lacuna::chain::{cycle_decomposition, Chain1, ChainJson, ChainLevelSet};
use lacuna::cochain::{ConvergenceReport, HochschildReport};
use lacuna::geom::SnapGrid;
use lacuna::structure::CellularStructure;

#[derive(Serialize)]
struct ChainsComponentDoc {
    eps_snap: f64,
    b: ChainJson,
    o: ChainJson,
    inner: ChainJson,
}

#[derive(Serialize)]
struct ChainsSingleDoc {
    level: usize,
    eps_snap: f64,
    b: ChainJson,
    o: ChainJson,
    inner: ChainJson,
}

#[derive(Serialize)]
struct ChainsMultiDoc {
    level: usize,
    components: Vec<ChainsComponentDoc>,
}

pub fn chains_json(level: usize, parts: &[(&CellularStructure, &ChainLevelSet)]) -> String {
    let mut components: Vec<ChainsComponentDoc> = parts
        .iter()
        .map(|(cs, set)| {
            let grid = cs.grid();
            ChainsComponentDoc {
                eps_snap: grid.eps(),
                b: set.b.to_json(grid),
                o: set.o.to_json(grid),
                inner: set.inner.to_json(grid),
            }
        })
        .collect();
    let mut s = if components.len() == 1 {
        let c = components.pop().unwrap();
        serde_json::to_string_pretty(&ChainsSingleDoc {
            level,
            eps_snap: c.eps_snap,
            b: c.b,
            o: c.o,
            inner: c.inner,
        })
        .expect("plain data serializes")
    } else {
        serde_json::to_string_pretty(&ChainsMultiDoc { level, components })
            .expect("plain data serializes")
    };
    s.push('\n');
    s
}

/// One drawing for all components: gray `b` underneath, blue `o`, red inner
/// chain on top. The y axis is flipped so the picture matches mathematical
/// orientation.
pub fn render_svg(parts: &[(&CellularStructure, &ChainLevelSet)]) -> String {
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    for (cs, _) in parts {
        for v in cs.base().vertices() {
            x0 = x0.min(v.x);
            x1 = x1.max(v.x);
            y0 = y0.min(v.y);
            y1 = y1.max(v.y);
        }
    }
    let extent = (x1 - x0).max(y1 - y0).max(f64::MIN_POSITIVE);
    let pad = 0.05 * extent;
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{} {} {} {}\">\n",
        coord(x0),
        coord(-y1),
        coord(x1 - x0),
        coord(y1 - y0)
    ));
    svg.push_str(
        "<g transform=\"matrix(1 0 0 -1 0 0)\" fill=\"none\" \
         stroke-linejoin=\"round\" stroke-linecap=\"round\">\n",
    );
    let layers: [(&str, &str, f64, fn(&ChainLevelSet) -> &Chain1); 3] = [
        ("b", "#9e9e9e", 0.006, |s| &s.b),
        ("o", "#1565c0", 0.004, |s| &s.o),
        ("I", "#c62828", 0.002, |s| &s.inner),
    ];
    for (id, color, rel_width, pick) in layers {
        svg.push_str(&format!(
            "<g id=\"{id}\" stroke=\"{color}\" stroke-width=\"{}\">\n",
            coord(rel_width * extent)
        ));
        for (cs, set) in parts {
            let d = path_data(pick(set), cs.grid());
            if !d.is_empty() {
                svg.push_str(&format!("<path d=\"{d}\"/>\n"));
            }
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</g>\n</svg>\n");
    svg
}

/// Closed subpaths when the chain decomposes into loops, individual
/// segments otherwise.
fn path_data(chain: &Chain1, grid: &SnapGrid) -> String {
    if chain.is_empty() {
        return String::new();
    }
    let mut d = String::new();
    match cycle_decomposition(chain, grid) {
        Ok(loops) => {
            for lp in loops {
                for (i, seg) in lp.iter().enumerate() {
                    let p = grid.unsnap(seg.tail);
                    let op = if i == 0 { 'M' } else { 'L' };
                    d.push_str(&format!("{op}{} {} ", coord(p.x), coord(p.y)));
                }
                d.push_str("Z ");
            }
        }
        Err(_) => {
            for (seg, _) in chain.iter() {
                let t = grid.unsnap(seg.tail);
                let h = grid.unsnap(seg.head);
                d.push_str(&format!(
                    "M{} {} L{} {} ",
                    coord(t.x),
                    coord(t.y),
                    coord(h.x),
                    coord(h.y)
                ));
            }
        }
    }
    d.trim_end().to_string()
}

fn coord(v: f64) -> String {
    let s = format!("{v:.6}");
    // Fixed precision, then strip cosmetic zeros so files stay small.
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

#[derive(Serialize)]
struct CocycleLevelRow {
    n: usize,
    re_phi: f64,
    im_phi: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    diff: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

#[derive(Serialize)]
struct CocycleDoc {
    alpha_sum: f64,
    dimension: f64,
    rho_theory: f64,
    rho_fitted: Option<f64>,
    certified: bool,
    levels: Vec<CocycleLevelRow>,
    phi_limit: [f64; 2],
    err_bound: Option<f64>,
}

fn cocycle_rows(report: &ConvergenceReport) -> Vec<CocycleLevelRow> {
    report
        .phi
        .iter()
        .enumerate()
        .map(|(i, v)| CocycleLevelRow {
            n: i + 1,
            re_phi: v.re,
            im_phi: v.im,
            diff: if i >= 1 { Some(report.diffs[i - 1]) } else { None },
            ratio: if i >= 2 {
                report.ratios[i - 2]
            } else {
                None
            },
        })
        .collect()
}

pub fn cocycle_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("n,re_phi,im_phi,diff,ratio,certified\n");
    for row in cocycle_rows(report) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.n,
            row.re_phi,
            row.im_phi,
            row.diff.map(|v| v.to_string()).unwrap_or_default(),
            row.ratio.map(|v| v.to_string()).unwrap_or_default(),
            report.certified
        ));
    }
    out
}

pub fn cocycle_json(report: &ConvergenceReport) -> String {
    let doc = CocycleDoc {
        alpha_sum: report.alpha_sum,
        dimension: report.dimension,
        rho_theory: report.rho_theory,
        rho_fitted: report.rho_fitted,
        certified: report.certified,
        levels: cocycle_rows(report),
        phi_limit: [report.phi_limit.re, report.phi_limit.im],
        err_bound: report.err_bound,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn hochschild_csv(report: &HochschildReport) -> String {
    let mut out = String::from("n,re_b,im_b,norm,ratio\n");
    for (i, v) in report.bphi.iter().enumerate() {
        let ratio = if i >= 1 {
            report.ratios[i - 1].map(|r| r.to_string()).unwrap_or_default()
        } else {
            String::new()
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i + 1,
            v.re,
            v.im,
            report.norms[i],
            ratio
        ));
    }
    out
}

#[derive(Serialize)]
struct HochschildDoc {
    levels: Vec<HochschildLevelRow>,
}

#[derive(Serialize)]
struct HochschildLevelRow {
    n: usize,
    re_b: f64,
    im_b: f64,
    norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<f64>,
}

pub fn hochschild_json(report: &HochschildReport) -> String {
    let doc = HochschildDoc {
        levels: report
            .bphi
            .iter()
            .enumerate()
            .map(|(i, v)| HochschildLevelRow {
                n: i + 1,
                re_b: v.re,
                im_b: v.im,
                norm: report.norms[i],
                ratio: if i >= 1 { report.ratios[i - 1] } else { None },
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("plain data serializes");
    s.push('\n');
    s
}
