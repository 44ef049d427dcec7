//! Structured simplicial meshes of the space-time cylinder.
//!
//! Points are stored with the time coordinate last, so a vertex of a mesh
//! with spatial dimension `d` is `(x_1, .., x_d, t)`. Cells are simplices of
//! dimension `d + 1`: triangles for `d = 1`, tetrahedra for `d = 2`.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Absolute tolerance used by the geometric boundary predicates.
pub const GEOMETRIC_TOLERANCE: f64 = 1e-12;

/// Space-time domains supported by the structured generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// `(0,1)_x × (0,1)_t`.
    UnitSquare,
    /// `(0,1)²_x × (0,1)_t`.
    UnitCube,
    /// The moving interval `−t < x < 0.5 + t`, `t ∈ (0,1)`.
    Trapezoid,
}

impl Geometry {
    pub fn spatial_dim(self) -> usize {
        match self {
            Geometry::UnitSquare | Geometry::Trapezoid => 1,
            Geometry::UnitCube => 2,
        }
    }

    /// Space-time volume of the domain.
    pub fn volume(self) -> f64 {
        match self {
            Geometry::UnitSquare | Geometry::UnitCube => 1.0,
            // ∫₀¹ (0.5 + 2t) dt
            Geometry::Trapezoid => 1.5,
        }
    }

    /// Maps a point of the reference unit square/cube onto the domain.
    pub fn map_reference(self, reference: &[f64], out: &mut [f64]) {
        match self {
            Geometry::UnitSquare | Geometry::UnitCube => out.copy_from_slice(reference),
            Geometry::Trapezoid => {
                let (xi, tau) = (reference[0], reference[1]);
                out[0] = -tau + xi * (0.5 + 2.0 * tau);
                out[1] = tau;
            }
        }
    }

    /// Whether `point` lies on the lateral boundary `∂Ω(t) × (0,1)`.
    pub fn on_lateral(self, point: &[f64]) -> bool {
        let tol = GEOMETRIC_TOLERANCE;
        match self {
            Geometry::UnitSquare => point[0].abs() <= tol || (point[0] - 1.0).abs() <= tol,
            Geometry::UnitCube => point[..2]
                .iter()
                .any(|&c| c.abs() <= tol || (c - 1.0).abs() <= tol),
            Geometry::Trapezoid => {
                let (x, t) = (point[0], point[1]);
                (x + t).abs() <= tol || (x - 0.5 - t).abs() <= tol
            }
        }
    }
}

/// Part of the cylinder boundary a facet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryTag {
    Lateral,
    Initial,
    Terminal,
}

impl BoundaryTag {
    /// Geometric predicate a point of a facet carrying this tag must satisfy.
    pub fn contains(self, geometry: Geometry, point: &[f64]) -> bool {
        let t = point[point.len() - 1];
        match self {
            BoundaryTag::Initial => t.abs() <= GEOMETRIC_TOLERANCE,
            BoundaryTag::Terminal => (t - 1.0).abs() <= GEOMETRIC_TOLERANCE,
            BoundaryTag::Lateral => geometry.on_lateral(point),
        }
    }
}

/// Whether a vertex carries Dirichlet data (lateral closure or initial slice).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Constrained,
    Free,
}

/// A simplicial triangulation of the space-time cylinder.
#[derive(Debug, Clone)]
pub struct SpaceTimeMesh {
    geometry: Geometry,
    spatial_dim: usize,
    subdivisions: usize,
    points: Vec<f64>,
    cells: Vec<usize>,
    facets: Vec<usize>,
    facet_tags: Vec<BoundaryTag>,
    node_kinds: Vec<NodeKind>,
    h: f64,
}

impl SpaceTimeMesh {
    /// Triangulates a unit square or the trapezoid with `n` subdivisions per
    /// reference edge. Every reference square is split along its `(+ξ,+τ)`
    /// diagonal.
    pub fn build_structured_2d(n: usize, geometry: Geometry) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of subdivisions must be positive".into()));
        }
        if geometry.spatial_dim() != 1 {
            return Err(Error::InvalidArgument(format!(
                "{geometry:?} is not a one-dimensional spatial domain"
            )));
        }
        let np = n + 1;
        let vid = |i: usize, j: usize| j * np + i;
        let scale = 1.0 / n as f64;

        let mut points = vec![0.0; 2 * np * np];
        for j in 0..np {
            for i in 0..np {
                let reference = [i as f64 * scale, j as f64 * scale];
                let v = vid(i, j);
                geometry.map_reference(&reference, &mut points[2 * v..2 * v + 2]);
            }
        }

        let mut cells = Vec::with_capacity(6 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (v00, v10, v01, v11) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
                cells.extend_from_slice(&[v00, v10, v11]);
                cells.extend_from_slice(&[v00, v11, v01]);
            }
        }

        let mut facets = Vec::with_capacity(8 * n);
        let mut facet_tags = Vec::with_capacity(4 * n);
        for i in 0..n {
            facets.extend_from_slice(&[vid(i, 0), vid(i + 1, 0)]);
            facet_tags.push(BoundaryTag::Initial);
        }
        for i in 0..n {
            facets.extend_from_slice(&[vid(i, n), vid(i + 1, n)]);
            facet_tags.push(BoundaryTag::Terminal);
        }
        for j in 0..n {
            facets.extend_from_slice(&[vid(0, j), vid(0, j + 1)]);
            facet_tags.push(BoundaryTag::Lateral);
            facets.extend_from_slice(&[vid(n, j), vid(n, j + 1)]);
            facet_tags.push(BoundaryTag::Lateral);
        }

        Ok(Self::finish(geometry, n, points, cells, facets, facet_tags))
    }

    /// Kuhn (Freudenthal) triangulation of the unit cube: every subcube is
    /// split into the 6 tetrahedra sharing its main diagonal.
    pub fn build_structured_3d(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("number of subdivisions must be positive".into()));
        }
        let np = n + 1;
        let vid = |c: [usize; 3]| (c[2] * np + c[1]) * np + c[0];
        let scale = 1.0 / n as f64;

        let mut points = Vec::with_capacity(3 * np * np * np);
        for k in 0..np {
            for j in 0..np {
                for i in 0..np {
                    points.extend_from_slice(&[i as f64 * scale, j as f64 * scale, k as f64 * scale]);
                }
            }
        }

        // Axis orderings of the monotone lattice paths from the low to the
        // high corner, with the parity of each permutation.
        const PATHS: [([usize; 3], bool); 6] = [
            ([0, 1, 2], true),
            ([0, 2, 1], false),
            ([1, 0, 2], false),
            ([1, 2, 0], true),
            ([2, 0, 1], true),
            ([2, 1, 0], false),
        ];
        let mut cells = Vec::with_capacity(24 * n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for (order, even) in PATHS {
                        let mut corner = [i, j, k];
                        let mut tet = [0usize; 4];
                        tet[0] = vid(corner);
                        for (step, &axis) in order.iter().enumerate() {
                            corner[axis] += 1;
                            tet[step + 1] = vid(corner);
                        }
                        if !even {
                            tet.swap(2, 3);
                        }
                        cells.extend_from_slice(&tet);
                    }
                }
            }
        }

        let mut facets = Vec::with_capacity(36 * n * n);
        let mut facet_tags = Vec::with_capacity(12 * n * n);
        for axis in 0..3 {
            let (b, c) = ((axis + 1) % 3, (axis + 2) % 3);
            let tag_at = |level: usize| match (axis, level) {
                (2, 0) => BoundaryTag::Initial,
                (2, _) => BoundaryTag::Terminal,
                _ => BoundaryTag::Lateral,
            };
            for level in [0, n] {
                for p in 0..n {
                    for q in 0..n {
                        let mut low = [0usize; 3];
                        low[axis] = level;
                        low[b] = p;
                        low[c] = q;
                        let mut lb = low;
                        lb[b] += 1;
                        let mut lc = low;
                        lc[c] += 1;
                        let mut lbc = lb;
                        lbc[c] += 1;
                        facets.extend_from_slice(&[vid(low), vid(lb), vid(lbc)]);
                        facets.extend_from_slice(&[vid(low), vid(lc), vid(lbc)]);
                        facet_tags.push(tag_at(level));
                        facet_tags.push(tag_at(level));
                    }
                }
            }
        }

        Ok(Self::finish(Geometry::UnitCube, n, points, cells, facets, facet_tags))
    }

    /// Builds the structured mesh appropriate for `geometry`.
    pub fn build(n: usize, geometry: Geometry) -> Result<Self> {
        match geometry {
            Geometry::UnitCube => Self::build_structured_3d(n),
            _ => Self::build_structured_2d(n, geometry),
        }
    }

    fn finish(
        geometry: Geometry,
        subdivisions: usize,
        points: Vec<f64>,
        cells: Vec<usize>,
        facets: Vec<usize>,
        facet_tags: Vec<BoundaryTag>,
    ) -> Self {
        let spatial_dim = geometry.spatial_dim();
        let n_vertices = points.len() / (spatial_dim + 1);
        let mut node_kinds = vec![NodeKind::Free; n_vertices];
        for (facet, tag) in facets.chunks_exact(spatial_dim + 1).zip(&facet_tags) {
            if *tag != BoundaryTag::Terminal {
                for &v in facet {
                    node_kinds[v] = NodeKind::Constrained;
                }
            }
        }
        let mut mesh = Self {
            geometry,
            spatial_dim,
            subdivisions,
            points,
            cells,
            facets,
            facet_tags,
            node_kinds,
            h: 0.0,
        };
        mesh.h = (0..mesh.n_cells()).map(|c| mesh.cell_diameter(c)).fold(0.0, f64::max);
        mesh
    }

    pub fn geometry(&self) -> Geometry {
        self.geometry
    }

    /// Spatial dimension `d`; the simplices have dimension `d + 1`.
    pub fn spatial_dim(&self) -> usize {
        self.spatial_dim
    }

    /// Dimension of the space-time simplices.
    pub fn simplex_dim(&self) -> usize {
        self.spatial_dim + 1
    }

    /// Number of subdivisions per reference edge.
    pub fn subdivisions(&self) -> usize {
        self.subdivisions
    }

    /// Largest vertex-pair distance over all cells.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_vertices(&self) -> usize {
        self.points.len() / self.simplex_dim()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len() / (self.simplex_dim() + 1)
    }

    pub fn n_boundary_facets(&self) -> usize {
        self.facet_tags.len()
    }

    /// Coordinates of vertex `v`, time last.
    pub fn vertex(&self, v: usize) -> &[f64] {
        let m = self.simplex_dim();
        &self.points[m * v..m * (v + 1)]
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        let k = self.simplex_dim() + 1;
        &self.cells[k * c..k * (c + 1)]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &[usize]> {
        self.cells.chunks_exact(self.simplex_dim() + 1)
    }

    /// Boundary facets together with their tags.
    pub fn boundary_facets(&self) -> impl Iterator<Item = (&[usize], BoundaryTag)> {
        self.facets
            .chunks_exact(self.simplex_dim())
            .zip(self.facet_tags.iter().copied())
    }

    /// Gathers the coordinates of the vertices of cell `c` into `out`
    /// (row-major, one row per vertex).
    pub fn cell_coordinates(&self, c: usize, out: &mut [f64]) {
        let m = self.simplex_dim();
        for (k, &v) in self.cell(c).iter().enumerate() {
            out[k * m..(k + 1) * m].copy_from_slice(self.vertex(v));
        }
    }

    /// Constrained iff the vertex lies on the closure of the lateral boundary
    /// or on the initial slice.
    pub fn classify_node(&self, v: usize) -> NodeKind {
        self.node_kinds[v]
    }

    /// Signed volume of cell `c`; positive for every cell of a valid mesh.
    pub fn signed_volume(&self, c: usize) -> f64 {
        let m = self.simplex_dim();
        let cell = self.cell(c);
        let origin = self.vertex(cell[0]);
        let mut jac = [[0.0; 3]; 3];
        for (col, &v) in cell[1..].iter().enumerate() {
            let p = self.vertex(v);
            for row in 0..m {
                jac[row][col] = p[row] - origin[row];
            }
        }
        let det = match m {
            2 => jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0],
            _ => {
                jac[0][0] * (jac[1][1] * jac[2][2] - jac[1][2] * jac[2][1])
                    - jac[0][1] * (jac[1][0] * jac[2][2] - jac[1][2] * jac[2][0])
                    + jac[0][2] * (jac[1][0] * jac[2][1] - jac[1][1] * jac[2][0])
            }
        };
        det / if m == 2 { 2.0 } else { 6.0 }
    }

    fn cell_diameter(&self, c: usize) -> f64 {
        let cell = self.cell(c);
        let mut diam: f64 = 0.0;
        for (a, &va) in cell.iter().enumerate() {
            for &vb in &cell[a + 1..] {
                let d2: f64 = self
                    .vertex(va)
                    .iter()
                    .zip(self.vertex(vb))
                    .map(|(p, q)| (p - q) * (p - q))
                    .sum();
                diam = diam.max(d2.sqrt());
            }
        }
        diam
    }

    /// Checks the structural invariants: positive orientation, facet
    /// conformity, that the tagged facets are exactly the topological
    /// boundary, and that every tagged facet satisfies its tag's predicate.
    pub fn validate(&self) -> Result<()> {
        for c in 0..self.n_cells() {
            let vol = self.signed_volume(c);
            if vol <= 0.0 {
                return Err(Error::InvalidMesh(format!("cell {c} has signed volume {vol:e}")));
            }
        }

        let m = self.simplex_dim();
        let mut incidence: HashMap<Vec<usize>, usize> = HashMap::new();
        for cell in self.cells() {
            for skip in 0..=m {
                let mut facet: Vec<usize> = cell
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect();
                facet.sort_unstable();
                *incidence.entry(facet).or_default() += 1;
            }
        }
        if let Some((facet, count)) = incidence.iter().find(|(_, &count)| count > 2) {
            return Err(Error::InvalidMesh(format!("facet {facet:?} shared by {count} cells")));
        }

        let mut tagged: HashMap<Vec<usize>, BoundaryTag> = HashMap::new();
        for (facet, tag) in self.boundary_facets() {
            let mut key = facet.to_vec();
            key.sort_unstable();
            if tagged.insert(key, tag).is_some() {
                return Err(Error::InvalidMesh(format!("boundary facet {facet:?} tagged twice")));
            }
            if let Some(&v) = facet.iter().find(|&&v| !tag.contains(self.geometry, self.vertex(v))) {
                return Err(Error::InvalidMesh(format!(
                    "vertex {v} of {tag:?} facet {facet:?} violates the tag predicate"
                )));
            }
        }
        let topological: Vec<&Vec<usize>> =
            incidence.iter().filter(|(_, &count)| count == 1).map(|(f, _)| f).collect();
        if topological.len() != tagged.len() || topological.iter().any(|f| !tagged.contains_key(*f)) {
            return Err(Error::InvalidMesh(format!(
                "{} topological boundary facets but {} tagged facets",
                topological.len(),
                tagged.len()
            )));
        }
        Ok(())
    }
}
