use std::fmt;
use std::str::FromStr;

use super::Mesh;
use crate::tensor::Vec2;
use crate::{Error, Result};

/// Structured mesh families on the unit square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeshGenerator {
    /// `n × n` squares, each split along its `(0,0)–(1,1)` diagonal.
    Tri { n: usize },
    /// `n × n` squares.
    Cart { n: usize },
    /// `n × n` quadrilaterals whose vertex columns are compressed piecewise-linearly
    /// towards the bottom or the top. The direction follows a triangle wave over four
    /// fixed vertical strips, so the skew of a cell stays bounded under refinement while
    /// its diameter shrinks. `distortion ∈ [0, 1)`.
    Kershaw { n: usize, distortion: f64 },
}

impl FromStr for MeshGenerator {
    type Err = Error;

    /// Accepts `tri 8`, `tri:8`, `cart:4`, `kershaw:8:0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(|c: char| c == ':' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
        let bad = || Error::InvalidParameter(format!("invalid mesh generator '{s}'"));
        let n: usize = parts.get(1).ok_or_else(bad)?.parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(bad());
        }
        match (parts[0], parts.len()) {
            ("tri", 2) => Ok(MeshGenerator::Tri { n }),
            ("cart", 2) => Ok(MeshGenerator::Cart { n }),
            ("kershaw", 3) => {
                let distortion: f64 = parts[2].parse().map_err(|_| bad())?;
                if !(0.0..1.0).contains(&distortion) {
                    return Err(Error::InvalidParameter(format!("kershaw distortion {distortion} outside [0, 1)")));
                }
                Ok(MeshGenerator::Kershaw { n, distortion })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MeshGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshGenerator::Tri { n } => write!(f, "tri:{n}"),
            MeshGenerator::Cart { n } => write!(f, "cart:{n}"),
            MeshGenerator::Kershaw { n, distortion } => write!(f, "kershaw:{n}:{distortion}"),
        }
    }
}

fn kershaw_map(y: f64, x: f64, distortion: f64) -> f64 {
    // Triangle wave: −1 at x = 0, 1/2, 1 and +1 at x = 1/4, 3/4.
    let phase = (4.0 * x).rem_euclid(2.0);
    let wave = if phase <= 1.0 { 2.0 * phase - 1.0 } else { 3.0 - 2.0 * phase };
    let b = 0.5 + wave * 0.4 * distortion;
    if y <= 0.5 {
        y * b / 0.5
    } else {
        b + (y - 0.5) * (1.0 - b) / 0.5
    }
}

pub fn generate(g: &MeshGenerator) -> Result<Mesh> {
    let n = match *g {
        MeshGenerator::Tri { n } | MeshGenerator::Cart { n } | MeshGenerator::Kershaw { n, .. } => n,
    };
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut coords = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = (i as f64 / n as f64, j as f64 / n as f64);
            let y = match *g {
                MeshGenerator::Kershaw { distortion, .. } => kershaw_map(y, x, distortion),
                _ => y,
            };
            coords.push(Vec2::new(x, y));
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match g {
                MeshGenerator::Tri { .. } => {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                }
                _ => cells.push(vec![a, b, c, d]),
            }
        }
    }
    Mesh::from_polygons(coords, cells)
}

/// Regular polygon with `n` vertices on the circle of radius `r` about `c`.
pub fn regular_polygon(n: usize, c: Vec2, r: f64) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
            c + Vec2::new(r * a.cos(), r * a.sin())
        })
        .collect()
}
