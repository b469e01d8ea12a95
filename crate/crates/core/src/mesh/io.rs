//! The `polymesh 1` text format.
//!
//! ```text
//! polymesh 1
//! nv nc
//! x y            (nv lines)
//! m v1 ... vm    (nc lines, 0-based, counter-clockwise)
//! ```
//! Everything after `#` on a line is ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::Mesh;
use crate::tensor::Vec2;
use crate::{Error, Result};

pub fn parse_polymesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };

    let (ln, header) = lines.next().ok_or_else(|| perr(0, "empty file"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["polymesh", "1"] {
        return Err(perr(ln, "expected header 'polymesh 1'"));
    }
    let (ln, counts) = lines.next().ok_or_else(|| perr(ln, "missing 'nv nc' line"))?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| perr(ln, "invalid count")))
        .collect::<Result<_>>()?;
    let [nv, nc] = counts[..] else {
        return Err(perr(ln, "expected 'nv nc'"));
    };

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of file in vertex block"))?;
        let xy: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, "invalid coordinate")))
            .collect::<Result<_>>()?;
        let [x, y] = xy[..] else {
            return Err(perr(ln, "expected 'x y'"));
        };
        coords.push(Vec2::new(x, y));
    }
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, l) = lines.next().ok_or_else(|| perr(ln, "unexpected end of file in cell block"))?;
        let ids: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(ln, "invalid vertex index")))
            .collect::<Result<_>>()?;
        if ids.is_empty() || ids[0] != ids.len() - 1 {
            return Err(perr(ln, "cell line must be 'm v1 ... vm'"));
        }
        cells.push(ids[1..].to_vec());
    }
    if let Some((ln, _)) = lines.next() {
        return Err(perr(ln, "trailing content"));
    }
    Mesh::from_polygons(coords, cells)
}

pub fn read_polymesh(path: impl AsRef<Path>) -> Result<Mesh> {
    parse_polymesh(&std::fs::read_to_string(path)?)
}

/// Coordinates are written with the shortest representation that round-trips exactly.
pub fn write_polymesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    writeln!(s, "polymesh 1").unwrap();
    writeln!(s, "{} {}", mesh.num_vertices(), mesh.num_cells()).unwrap();
    for v in &mesh.vertices {
        writeln!(s, "{:?} {:?}", v.x.x, v.x.y).unwrap();
    }
    for c in &mesh.cells {
        write!(s, "{}", c.vertices.len()).unwrap();
        for v in &c.vertices {
            write!(s, " {v}").unwrap();
        }
        s.push('\n');
    }
    s
}
