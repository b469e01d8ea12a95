use crate::ddr::{LocalCell, SigmaLayout};
use crate::mesh::Mesh;
use crate::polycalc::poly_dim;
use crate::Result;

/// Global numbering. Σ dofs come first: edge blocks `(τ_E, D_E)`, vertex blocks
/// `τ_V`, then the cell blocks `(Holy^{ℓ−3}, cHoly^ℓ)`. The `P^{ℓ−1}(T)` blocks of
/// `u` follow. Edge and vertex blocks form the skeleton; together with `u` they are
/// the dofs retained by static condensation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDofMap {
    pub l: usize,
    pub num_edges: usize,
    pub num_vertices: usize,
    pub num_cells: usize,
    pub edge_len: usize,
    pub cell_sigma_len: usize,
    pub u_len: usize,
}

impl GlobalDofMap {
    pub fn new(mesh: &Mesh, l: usize) -> Result<Self> {
        let layout = SigmaLayout::new(l, 3)?;
        Ok(Self {
            l,
            num_edges: mesh.num_edges(),
            num_vertices: mesh.num_vertices(),
            num_cells: mesh.num_cells(),
            edge_len: layout.edge_len(),
            cell_sigma_len: layout.cell_len(),
            u_len: poly_dim(l as isize - 1),
        })
    }

    pub fn edge_offset(&self, e: usize) -> usize {
        e * self.edge_len
    }

    pub fn vertex_offset(&self, v: usize) -> usize {
        self.num_edges * self.edge_len + 3 * v
    }

    pub fn skeleton_len(&self) -> usize {
        self.num_edges * self.edge_len + 3 * self.num_vertices
    }

    pub fn cell_sigma_offset(&self, t: usize) -> usize {
        self.skeleton_len() + t * self.cell_sigma_len
    }

    pub fn sigma_len(&self) -> usize {
        self.skeleton_len() + self.num_cells * self.cell_sigma_len
    }

    pub fn u_offset(&self, t: usize) -> usize {
        self.sigma_len() + t * self.u_len
    }

    pub fn u_total(&self) -> usize {
        self.num_cells * self.u_len
    }

    pub fn total(&self) -> usize {
        self.sigma_len() + self.u_total()
    }

    pub fn condensed_len(&self) -> usize {
        self.num_cells * self.cell_sigma_len
    }

    pub fn retained_len(&self) -> usize {
        self.total() - self.condensed_len()
    }

    /// Position of global dof `g` in the retained system, `None` for cell Σ dofs.
    pub fn retained_index(&self, g: usize) -> Option<usize> {
        if g < self.skeleton_len() {
            Some(g)
        } else if g >= self.sigma_len() {
            Some(g - self.condensed_len())
        } else {
            None
        }
    }

    /// Global indices of the local Σ dofs of `cell`, in local layout order.
    pub fn local_sigma_indices(&self, cell: &LocalCell) -> Vec<usize> {
        let layout = SigmaLayout { l: self.l, nv: cell.nv() };
        let mut idx = Vec::with_capacity(layout.dim());
        let c0 = self.cell_sigma_offset(cell.id);
        idx.extend(c0..c0 + self.cell_sigma_len);
        for edge in &cell.edges {
            let o = self.edge_offset(edge.global);
            idx.extend(o..o + self.edge_len);
        }
        for &v in &cell.vertex_ids {
            let o = self.vertex_offset(v);
            idx.extend(o..o + 3);
        }
        debug_assert_eq!(idx.len(), layout.dim());
        idx
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, MeshGenerator};

    #[test]
    fn bijection_and_sharing() {
        let mesh = generate(&MeshGenerator::Tri { n: 3 }).unwrap();
        for l in 2..=4 {
            let map = GlobalDofMap::new(&mesh, l).unwrap();
            let mut count = vec![0usize; map.total()];
            let mut local_total = 0;
            for t in 0..mesh.num_cells() {
                let cell = LocalCell::new(&mesh, t, l + 2).unwrap();
                let idx = map.local_sigma_indices(&cell);
                local_total += idx.len();
                for g in idx {
                    count[g] += 1;
                }
                for g in map.u_offset(t)..map.u_offset(t) + map.u_len {
                    count[g] += 1;
                }
            }
            assert!(count.iter().all(|&c| c >= 1));
            let duplicates: usize = count[..map.sigma_len()].iter().map(|c| c - 1).sum();
            assert_eq!(map.sigma_len(), local_total - duplicates);
            for e in &mesh.edges {
                let o = map.edge_offset(e.id);
                assert_eq!(count[o], e.cells.len());
            }
            let retained: Vec<usize> = (0..map.total()).filter_map(|g| map.retained_index(g)).collect();
            assert_eq!(retained, (0..map.retained_len()).collect::<Vec<_>>());
        }
    }
}
