use super::{boundary_distance, is_star_point, Mesh};

#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub cell: usize,
    pub diameter: f64,
    pub min_edge_ratio: f64,
    pub max_edge_ratio: f64,
    /// Radius of the largest disk centred at `x_T` inside `T`, over `h_T`.
    pub inradius_ratio: f64,
    pub star_shaped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshReport {
    pub h: f64,
    pub min_edge_ratio: f64,
    pub max_edge_ratio: f64,
    pub min_inradius_ratio: f64,
    pub non_star_cells: Vec<usize>,
    pub euler_characteristic: isize,
    pub total_area: f64,
    pub cells: Vec<CellReport>,
}

impl MeshReport {
    pub fn lines(&self) -> Vec<String> {
        vec![
            format!("h {:e}", self.h),
            format!("min_edge_over_diameter {:e}", self.min_edge_ratio),
            format!("max_edge_over_diameter {:e}", self.max_edge_ratio),
            format!("min_inradius_over_diameter {:e}", self.min_inradius_ratio),
            format!("euler_characteristic {}", self.euler_characteristic),
            format!("total_area {:e}", self.total_area),
            format!("non_star_cells {:?}", self.non_star_cells),
        ]
    }
}

/// Geometric regularity proxies; reports only, never fails.
pub fn mesh_diagnostics(mesh: &Mesh) -> MeshReport {
    let cells: Vec<CellReport> = mesh
        .cells
        .iter()
        .map(|c| {
            let pts = mesh.cell_points(c.id);
            let lengths = c.edges.iter().map(|&(e, _)| mesh.edges[e].length);
            let (lo, hi) = lengths.fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l), hi.max(l)));
            CellReport {
                cell: c.id,
                diameter: c.diameter,
                min_edge_ratio: lo / c.diameter,
                max_edge_ratio: hi / c.diameter,
                inradius_ratio: boundary_distance(&pts, &c.center) / c.diameter,
                star_shaped: is_star_point(&pts, &c.center),
            }
        })
        .collect();
    let fold_min = |f: fn(&CellReport) -> f64| cells.iter().map(f).fold(f64::INFINITY, f64::min);
    MeshReport {
        h: mesh.h,
        min_edge_ratio: fold_min(|c| c.min_edge_ratio),
        max_edge_ratio: cells.iter().map(|c| c.max_edge_ratio).fold(0.0, f64::max),
        min_inradius_ratio: fold_min(|c| c.inradius_ratio),
        non_star_cells: cells.iter().filter(|c| !c.star_shaped).map(|c| c.cell).collect(),
        euler_characteristic: mesh.euler_characteristic(),
        total_area: mesh.total_area(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshGenerator};
    use crate::tensor::Vec2;

    #[test]
    fn equilateral_triangle_inradius() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.5, 3f64.sqrt() / 2.0)];
        let r = mesh_diagnostics(&Mesh::single_cell(&pts).unwrap());
        // inradius a/(2√3) over diameter a
        assert!((r.min_inradius_ratio - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn unit_square_ratios() {
        let pts = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        let r = mesh_diagnostics(&Mesh::single_cell(&pts).unwrap());
        assert!((r.h - 2f64.sqrt()).abs() < 1e-15);
        assert!((r.min_edge_ratio - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(r.non_star_cells.is_empty());
    }

    #[test]
    fn kershaw_strong_distortion_report() {
        let m = generate(&MeshGenerator::Kershaw { n: 8, distortion: 0.9 }).unwrap();
        let r = mesh_diagnostics(&m);
        assert_eq!(r.cells.len(), 64);
        assert_eq!(r.non_star_cells, r.cells.iter().filter(|c| !c.star_shaped).map(|c| c.cell).collect::<Vec<_>>());
        assert!(r.min_inradius_ratio > 0.0);
        assert!((r.total_area - 1.0).abs() < 1e-12);
        let mild = mesh_diagnostics(&generate(&MeshGenerator::Kershaw { n: 8, distortion: 0.1 }).unwrap());
        assert!(r.min_inradius_ratio < mild.min_inradius_ratio);
    }
}
