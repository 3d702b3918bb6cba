//! SVG (planar) and OBJ (spatial) renderings of a body with simplices.

use std::f64::consts::PI;
use std::fmt::Write as _;

use simplexforge::GaugeBody;

use crate::document::SimplexRecord;

/// Boundary samples of the SVG outline.
pub const SVG_SAMPLES: usize = 512;
/// Azimuth and polar divisions of the OBJ mesh.
pub const OBJ_AZIMUTH: usize = 64;
pub const OBJ_POLAR: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GeometryFormat {
    Obj,
    Svg,
}

impl GeometryFormat {
    pub fn extension(self) -> &'static str {
        match self {
            GeometryFormat::Obj => "obj",
            GeometryFormat::Svg => "svg",
        }
    }

    fn dim(self) -> usize {
        match self {
            GeometryFormat::Obj => 3,
            GeometryFormat::Svg => 2,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExportError {
    #[error("unsupported dimension {dim} for {format} export (needs {needs})")]
    UnsupportedDimension {
        dim: usize,
        format: &'static str,
        needs: usize,
    },
    #[error("cannot write geometry: {0}")]
    Io(#[from] std::io::Error),
}

fn on_boundary(body: &dyn GaugeBody, u: &[f64]) -> Vec<f64> {
    let g = body.eval(u);
    u.iter().map(|c| c / g).collect()
}

fn check_dims(body: &dyn GaugeBody, simplices: &[&SimplexRecord], format: GeometryFormat) -> Result<(), ExportError> {
    let bad = std::iter::once(body.dim())
        .chain(simplices.iter().flat_map(|s| s.vertices.iter().map(Vec::len)))
        .find(|&d| d != format.dim());
    match bad {
        Some(dim) => Err(ExportError::UnsupportedDimension {
            dim,
            format: format.extension(),
            needs: format.dim(),
        }),
        None => Ok(()),
    }
}

/// Body outline as a closed polygon plus every simplex edge.
pub fn render_svg(body: &dyn GaugeBody, simplices: &[&SimplexRecord]) -> Result<String, ExportError> {
    check_dims(body, simplices, GeometryFormat::Svg)?;
    let outline: Vec<Vec<f64>> = (0..SVG_SAMPLES)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / SVG_SAMPLES as f64;
            on_boundary(body, &[a.cos(), a.sin()])
        })
        .collect();
    let extent = outline
        .iter()
        .chain(simplices.iter().flat_map(|s| s.vertices.iter()))
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(0.0f64, f64::max);
    let m = 1.1 * extent.max(1e-9);
    let stroke = m / 200.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="512" height="512">"#,
        -m,
        -m,
        2.0 * m,
        2.0 * m
    );
    // y up
    out.push_str("<g transform=\"scale(1,-1)\">\n");
    let pts: Vec<String> = outline.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
    let _ = writeln!(
        out,
        r#"<polygon class="body" points="{}" fill="none" stroke="black" stroke-width="{stroke}"/>"#,
        pts.join(" ")
    );
    for s in simplices {
        let mut d = String::new();
        for i in 0..s.vertices.len() {
            for j in (i + 1)..s.vertices.len() {
                let (a, b) = (&s.vertices[i], &s.vertices[j]);
                let _ = write!(d, "M{},{} L{},{} ", a[0], a[1], b[0], b[1]);
            }
        }
        let _ = writeln!(
            out,
            r#"<path class="simplex" data-label="{}" d="{}" fill="none" stroke="red" stroke-width="{stroke}"/>"#,
            xml_escape(&s.label),
            d.trim_end()
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Boundary mesh sampled over a 64 x 32 azimuth/polar grid, then one object
/// per simplex.
pub fn render_obj(body: &dyn GaugeBody, simplices: &[&SimplexRecord]) -> Result<String, ExportError> {
    check_dims(body, simplices, GeometryFormat::Obj)?;
    let mut out = String::new();
    let vertex = |out: &mut String, p: &[f64]| {
        let _ = writeln!(out, "v {} {} {}", p[0], p[1], p[2]);
    };
    out.push_str("o body\n");
    vertex(&mut out, &on_boundary(body, &[0.0, 0.0, 1.0]));
    for i in 1..OBJ_POLAR {
        let theta = PI * i as f64 / OBJ_POLAR as f64;
        for j in 0..OBJ_AZIMUTH {
            let phi = 2.0 * PI * j as f64 / OBJ_AZIMUTH as f64;
            let u = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
            vertex(&mut out, &on_boundary(body, &u));
        }
    }
    vertex(&mut out, &on_boundary(body, &[0.0, 0.0, -1.0]));
    // OBJ indices are 1-based; the north pole is 1
    let ring = |i: usize, j: usize| 2 + (i - 1) * OBJ_AZIMUTH + j % OBJ_AZIMUTH;
    let south = 2 + (OBJ_POLAR - 1) * OBJ_AZIMUTH;
    for j in 0..OBJ_AZIMUTH {
        let _ = writeln!(out, "f 1 {} {}", ring(1, j), ring(1, j + 1));
    }
    for i in 1..OBJ_POLAR - 1 {
        for j in 0..OBJ_AZIMUTH {
            let _ = writeln!(
                out,
                "f {} {} {} {}",
                ring(i, j),
                ring(i + 1, j),
                ring(i + 1, j + 1),
                ring(i, j + 1)
            );
        }
    }
    for j in 0..OBJ_AZIMUTH {
        let _ = writeln!(out, "f {} {} {}", ring(OBJ_POLAR - 1, j + 1), ring(OBJ_POLAR - 1, j), south);
    }

    let mut next = south + 1;
    for s in simplices {
        let name: String = s
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
            .collect();
        let _ = writeln!(out, "o simplex_{name}");
        for p in &s.vertices {
            vertex(&mut out, p);
        }
        let k = s.vertices.len();
        if k <= 4 {
            for a in 0..k {
                for b in (a + 1)..k {
                    for c in (b + 1)..k {
                        let _ = writeln!(out, "f {} {} {}", next + a, next + b, next + c);
                    }
                }
            }
            if k == 2 {
                let _ = writeln!(out, "l {} {}", next, next + 1);
            }
        } else {
            for a in 0..k {
                for b in (a + 1)..k {
                    let _ = writeln!(out, "l {} {}", next + a, next + b);
                }
            }
        }
        next += k;
    }
    Ok(out)
}

pub fn render(body: &dyn GaugeBody, simplices: &[&SimplexRecord], format: GeometryFormat) -> Result<String, ExportError> {
    match format {
        GeometryFormat::Obj => render_obj(body, simplices),
        GeometryFormat::Svg => render_svg(body, simplices),
    }
}
