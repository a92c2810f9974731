//! Line-oriented text formats.
//!
//! ```text
//! ascomplex v1
//! 0 1 2
//! 1 4
//! ```
//!
//! ```text
//! points v1 d=2 a=1 metric=uniform periodic=true seed=7
//! 0.25 0.5
//! ```
//!
//! Blank lines and lines starting with `#` are skipped everywhere. Point
//! headers may omit `metric` (uniform), `periodic` (true) and `seed`.

use std::io::{BufRead, Write};

use crate::complex::{Simplex, SimplicialComplex, VertexId, DEFAULT_SIMPLEX_CAP};
use crate::error::{Error, Result};
use crate::geometry::{Metric, PointConfiguration, TorusSpec};

pub const COMPLEX_HEADER: &str = "ascomplex v1";
pub const POINTS_MAGIC: &str = "points";

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, line)| match line {
        Err(e) => Some(Err(Error::Io(e))),
        Ok(l) => {
            let t = l.trim();
            (!t.is_empty() && !t.starts_with('#')).then(|| Ok((i + 1, t.to_string())))
        }
    })
}

pub fn read_complex<R: BufRead>(reader: R) -> Result<SimplicialComplex> {
    read_complex_with_cap(reader, DEFAULT_SIMPLEX_CAP)
}

pub fn read_complex_with_cap<R: BufRead>(reader: R, cap: usize) -> Result<SimplicialComplex> {
    let mut lines = content_lines(reader);
    match lines.next().transpose()? {
        Some((_, h)) if h == COMPLEX_HEADER => {}
        Some((n, h)) => return Err(Error::parse(n, format!("expected `{COMPLEX_HEADER}`, found `{h}`"))),
        None => return Err(Error::parse(1, "empty input, expected a complex header")),
    }
    let mut complex = SimplicialComplex::with_cap(cap);
    for line in lines {
        let (n, text) = line?;
        let ids = text
            .split_whitespace()
            .map(|t| t.parse::<u32>().map_err(|e| Error::parse(n, format!("vertex id `{t}`: {e}"))))
            .collect::<Result<Vec<u32>>>()?;
        let sigma = Simplex::new(ids).map_err(|e| Error::parse(n, e.to_string()))?;
        complex.insert_maximal(&sigma)?;
    }
    Ok(complex)
}

pub fn write_complex<W: Write>(mut w: W, complex: &SimplicialComplex) -> Result<()> {
    writeln!(w, "{COMPLEX_HEADER}")?;
    for s in complex.maximal_simplices() {
        let ids: Vec<String> = s.vertices().iter().map(|v| v.0.to_string()).collect();
        writeln!(w, "{}", ids.join(" "))?;
    }
    Ok(())
}

pub fn read_points<R: BufRead>(reader: R) -> Result<PointConfiguration> {
    let mut lines = content_lines(reader);
    let (n, header) = lines.next().transpose()?.ok_or_else(|| Error::parse(1, "empty input"))?;
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(POINTS_MAGIC) || tokens.next() != Some("v1") {
        return Err(Error::parse(n, format!("expected `{POINTS_MAGIC} v1 d=<d> a=<a>`, found `{header}`")));
    }
    let (mut d, mut a, mut metric, mut periodic, mut seed) = (None, None, Metric::Uniform, true, None);
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::parse(n, format!("header token `{token}` is not key=value")))?;
        let bad = |e: &dyn std::fmt::Display| Error::parse(n, format!("{key}: {e}"));
        match key {
            "d" => d = Some(value.parse::<usize>().map_err(|e| bad(&e))?),
            "a" => a = Some(value.parse::<f64>().map_err(|e| bad(&e))?),
            "metric" => metric = value.parse().map_err(|e: Error| bad(&e))?,
            "periodic" => periodic = value.parse::<bool>().map_err(|e| bad(&e))?,
            "seed" => seed = Some(value.parse::<u64>().map_err(|e| bad(&e))?),
            _ => return Err(Error::parse(n, format!("unknown header key `{key}`"))),
        }
    }
    let (Some(d), Some(a)) = (d, a) else {
        return Err(Error::parse(n, "header needs both d= and a="));
    };
    let mut torus = TorusSpec::new(d, a).map_err(|e| Error::parse(n, e.to_string()))?.with_metric(metric);
    torus.periodic = periodic;
    let mut points = Vec::new();
    for line in lines {
        let (n, text) = line?;
        let p = text
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| Error::parse(n, format!("coordinate `{t}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if p.len() != d {
            return Err(Error::parse(n, format!("expected {d} coordinates, found {}", p.len())));
        }
        if p.iter().any(|x| !x.is_finite() || *x < 0.0 || *x > a) {
            return Err(Error::parse(n, format!("coordinates must lie in [0, {a}]")));
        }
        points.push(p);
    }
    Ok(PointConfiguration { torus, points, seed })
}

pub fn write_points<W: Write>(mut w: W, config: &PointConfiguration) -> Result<()> {
    let t = &config.torus;
    write!(w, "{POINTS_MAGIC} v1 d={} a={} metric={} periodic={}", t.d, t.a, t.metric, t.periodic)?;
    if let Some(seed) = config.seed {
        write!(w, " seed={seed}")?;
    }
    writeln!(w)?;
    for p in &config.points {
        let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
        writeln!(w, "{}", coords.join(" "))?;
    }
    Ok(())
}

/// Whitespace-separated vertex ids.
pub fn read_vertex_list<R: BufRead>(reader: R) -> Result<Vec<VertexId>> {
    let mut out = Vec::new();
    for line in content_lines(reader) {
        let (n, text) = line?;
        for t in text.split_whitespace() {
            out.push(VertexId(t.parse().map_err(|e| Error::parse(n, format!("vertex id `{t}`: {e}")))?));
        }
    }
    Ok(out)
}

pub fn write_vertex_list<W: Write>(mut w: W, vertices: &[VertexId]) -> Result<()> {
    for v in vertices {
        writeln!(w, "{}", v.0)?;
    }
    Ok(())
}
