//! Graph families and their Laplacian matrices.
//!
//! Four topologies are supported: the path `P_m`, the cycle `D_m`, the grid
//! `P_m □ P_n` and the cylinder grid `D_m □ P_n`. The Laplacian of a
//! Cartesian product is the Kronecker sum of the factor Laplacians, and the
//! node ordering fixes the *first* factor as the outer Kronecker index:
//! node `(outer, inner) ↦ outer * n_inner + inner`. For a grid this means
//! "row r, column c" maps to `r * n + c`.
//!
//! Laplacian entries are kept as integers so that exact rank arguments can
//! be made downstream; conversion to `f64` happens only at numeric
//! boundaries.

use nalgebra::DMatrix;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Topology descriptor fixing the graph family, its dimensions and the node
/// ordering used by every other module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case")]
pub enum GraphSpec {
    Path { m: usize },
    Cycle { m: usize },
    Grid { m: usize, n: usize },
    #[serde(rename = "cylinder")]
    CylinderGrid { m: usize, n: usize },
}

impl GraphSpec {
    pub fn path(m: usize) -> Result<Self> {
        let spec = GraphSpec::Path { m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cycle(m: usize) -> Result<Self> {
        let spec = GraphSpec::Cycle { m };
        spec.validate()?;
        Ok(spec)
    }

    pub fn grid(m: usize, n: usize) -> Result<Self> {
        let spec = GraphSpec::Grid { m, n };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cylinder(m: usize, n: usize) -> Result<Self> {
        let spec = GraphSpec::CylinderGrid { m, n };
        spec.validate()?;
        Ok(spec)
    }

    /// Check the dimension invariants of the family.
    ///
    /// Cycles need `m >= 3` (fewer nodes would require a multigraph), and
    /// cylinder grids need `m >= 3, n >= 2`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            GraphSpec::Path { m } if m >= 1 => Ok(()),
            GraphSpec::Path { m } => Err(Error::Dimension(format!("path requires m >= 1, got {m}"))),
            GraphSpec::Cycle { m } if m >= 3 => Ok(()),
            GraphSpec::Cycle { m } => Err(Error::Dimension(format!(
                "cycle requires m >= 3, got {m}"
            ))),
            GraphSpec::Grid { m, n } if m >= 1 && n >= 1 => Ok(()),
            GraphSpec::Grid { m, n } => Err(Error::Dimension(format!(
                "grid requires m, n >= 1, got ({m}, {n})"
            ))),
            GraphSpec::CylinderGrid { m, n } if m >= 3 && n >= 2 => Ok(()),
            GraphSpec::CylinderGrid { m, n } => Err(Error::Dimension(format!(
                "cylinder grid requires m >= 3, n >= 2, got ({m}, {n})"
            ))),
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            GraphSpec::Path { m } | GraphSpec::Cycle { m } => m,
            GraphSpec::Grid { m, n } | GraphSpec::CylinderGrid { m, n } => m * n,
        }
    }

    /// Factor sizes `(m, n)` of the product view; single-factor graphs are
    /// treated as products with a trivial second factor `P_1`.
    pub fn factor_sizes(&self) -> (usize, usize) {
        match *self {
            GraphSpec::Path { m } | GraphSpec::Cycle { m } => (m, 1),
            GraphSpec::Grid { m, n } | GraphSpec::CylinderGrid { m, n } => (m, n),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, GraphSpec::Grid { .. } | GraphSpec::CylinderGrid { .. })
    }

    /// True when the first factor is a cycle (cycle and cylinder-grid specs).
    pub fn first_factor_is_cycle(&self) -> bool {
        matches!(self, GraphSpec::Cycle { .. } | GraphSpec::CylinderGrid { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            GraphSpec::Path { .. } => "path",
            GraphSpec::Cycle { .. } => "cycle",
            GraphSpec::Grid { .. } => "grid",
            GraphSpec::CylinderGrid { .. } => "cylinder",
        }
    }
}

impl std::fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (m, n) = self.factor_sizes();
        if self.is_product() {
            write!(f, "{}({m},{n})", self.name())
        } else {
            write!(f, "{}({m})", self.name())
        }
    }
}

/// Node index in both linear and factor-coordinate form,
/// with `linear = outer * n_inner + inner`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeIndex {
    pub linear: usize,
    pub outer: usize,
    pub inner: usize,
}

/// Map factor coordinates to the linear node index.
pub fn node_index(spec: &GraphSpec, outer: usize, inner: usize) -> Result<NodeIndex> {
    spec.validate()?;
    let (m, n) = spec.factor_sizes();
    if outer >= m || inner >= n {
        return Err(Error::Index(format!(
            "coordinate ({outer}, {inner}) outside {m} x {n} factor grid"
        )));
    }
    Ok(NodeIndex {
        linear: outer * n + inner,
        outer,
        inner,
    })
}

/// Recover factor coordinates from a linear node index.
pub fn node_coords(spec: &GraphSpec, linear: usize) -> Result<NodeIndex> {
    spec.validate()?;
    let (_, n) = spec.factor_sizes();
    if linear >= spec.node_count() {
        return Err(Error::Index(format!(
            "linear index {linear} outside {} nodes of {spec}",
            spec.node_count()
        )));
    }
    Ok(NodeIndex {
        linear,
        outer: linear / n,
        inner: linear % n,
    })
}

/// Integer-valued graph Laplacian.
///
/// Invariants: symmetric, rows sum to zero, off-diagonal entries in
/// `{0, -1}`, diagonal entries equal to node degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Laplacian {
    pub matrix: DMatrix<i64>,
}

impl Laplacian {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|v| v as f64)
    }
}

fn path_laplacian(m: usize) -> DMatrix<i64> {
    let mut l = DMatrix::zeros(m, m);
    for i in 0..m.saturating_sub(1) {
        l[(i, i)] += 1;
        l[(i + 1, i + 1)] += 1;
        l[(i, i + 1)] = -1;
        l[(i + 1, i)] = -1;
    }
    l
}

fn cycle_laplacian(m: usize) -> DMatrix<i64> {
    let mut l = DMatrix::zeros(m, m);
    for i in 0..m {
        let j = (i + 1) % m;
        l[(i, i)] += 1;
        l[(j, j)] += 1;
        l[(i, j)] -= 1;
        l[(j, i)] -= 1;
    }
    l
}

/// Build the Laplacian of the given graph family.
///
/// Products are assembled as Kronecker sums: the grid is
/// `L_P(m) ⊕ L_P(n)` and the cylinder grid `L_D(m) ⊕ L_P(n)`.
pub fn build_laplacian(spec: &GraphSpec) -> Result<Laplacian> {
    spec.validate()?;
    let matrix = match *spec {
        GraphSpec::Path { m } => path_laplacian(m),
        GraphSpec::Cycle { m } => cycle_laplacian(m),
        GraphSpec::Grid { m, n } => kronecker_sum(&path_laplacian(m), &path_laplacian(n))?,
        GraphSpec::CylinderGrid { m, n } => {
            kronecker_sum(&cycle_laplacian(m), &path_laplacian(n))?
        }
    };
    Ok(Laplacian { matrix })
}

/// Kronecker sum `P ⊕ Q = P ⊗ I_n + I_m ⊗ Q` of two square matrices.
pub fn kronecker_sum<T>(p: &DMatrix<T>, q: &DMatrix<T>) -> Result<DMatrix<T>>
where
    T: nalgebra::Scalar + Copy + Zero + std::ops::Add<Output = T>,
{
    if !p.is_square() {
        return Err(Error::Shape(format!(
            "kronecker_sum: first operand is {}x{}, not square",
            p.nrows(),
            p.ncols()
        )));
    }
    if !q.is_square() {
        return Err(Error::Shape(format!(
            "kronecker_sum: second operand is {}x{}, not square",
            q.nrows(),
            q.ncols()
        )));
    }
    let (m, n) = (p.nrows(), q.nrows());
    let mut out = DMatrix::<T>::zeros(m * n, m * n);
    for i1 in 0..m {
        for j1 in 0..m {
            let v = p[(i1, j1)];
            if !v.is_zero() {
                for k in 0..n {
                    let (r, c) = (i1 * n + k, j1 * n + k);
                    out[(r, c)] = out[(r, c)] + v;
                }
            }
        }
        for i2 in 0..n {
            for j2 in 0..n {
                let v = q[(i2, j2)];
                if !v.is_zero() {
                    let (r, c) = (i1 * n + i2, i1 * n + j2);
                    out[(r, c)] = out[(r, c)] + v;
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: Laplacian from an explicit edge list.
    fn laplacian_from_edges(n: usize, edges: &[(usize, usize)]) -> DMatrix<i64> {
        let mut l = DMatrix::zeros(n, n);
        for &(i, j) in edges {
            l[(i, i)] += 1;
            l[(j, j)] += 1;
            l[(i, j)] -= 1;
            l[(j, i)] -= 1;
        }
        l
    }

    fn all_specs_up_to(cap: usize) -> Vec<GraphSpec> {
        let mut specs = Vec::new();
        for m in 1..=20 {
            specs.push(GraphSpec::path(m).unwrap());
            if m >= 3 {
                specs.push(GraphSpec::cycle(m).unwrap());
            }
            for n in 1..=20 {
                if m * n <= cap {
                    specs.push(GraphSpec::grid(m, n).unwrap());
                    if m >= 3 && n >= 2 {
                        specs.push(GraphSpec::cylinder(m, n).unwrap());
                    }
                }
            }
        }
        specs
    }

    #[test]
    fn path3_matches_reference_matrix() {
        let l = build_laplacian(&GraphSpec::path(3).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1, -1, 0, -1, 2, -1, 0, -1, 1]);
        assert_eq!(l.matrix, expected);
    }

    #[test]
    fn cycle3_is_complete_triangle() {
        let l = build_laplacian(&GraphSpec::cycle(3).unwrap()).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[2, -1, -1, -1, 2, -1, -1, -1, 2]);
        assert_eq!(l.matrix, expected);
    }

    #[test]
    fn grid2x2_matches_edge_list() {
        let l = build_laplacian(&GraphSpec::grid(2, 2).unwrap()).unwrap();
        // nodes: (0,0)=0, (0,1)=1, (1,0)=2, (1,1)=3
        let oracle = laplacian_from_edges(4, &[(0, 1), (2, 3), (0, 2), (1, 3)]);
        assert_eq!(l.matrix, oracle);
        for i in 0..4 {
            assert_eq!(l.matrix[(i, i)], 2);
        }
    }

    #[test]
    fn grid_and_cylinder_match_edge_lists() {
        for (m, n) in [(3, 4), (4, 3), (2, 5)] {
            let spec = GraphSpec::grid(m, n).unwrap();
            let mut edges = Vec::new();
            for r in 0..m {
                for c in 0..n {
                    if c + 1 < n {
                        edges.push((r * n + c, r * n + c + 1));
                    }
                    if r + 1 < m {
                        edges.push((r * n + c, (r + 1) * n + c));
                    }
                }
            }
            let l = build_laplacian(&spec).unwrap();
            assert_eq!(l.matrix, laplacian_from_edges(m * n, &edges), "grid({m},{n})");
        }
        for (m, n) in [(3, 2), (5, 3), (4, 4)] {
            let spec = GraphSpec::cylinder(m, n).unwrap();
            let mut edges = Vec::new();
            for r in 0..m {
                for c in 0..n {
                    if c + 1 < n {
                        edges.push((r * n + c, r * n + c + 1));
                    }
                    // cycle factor wraps around
                    edges.push((r * n + c, ((r + 1) % m) * n + c));
                }
            }
            let l = build_laplacian(&spec).unwrap();
            assert_eq!(
                l.matrix,
                laplacian_from_edges(m * n, &edges),
                "cylinder({m},{n})"
            );
        }
    }

    #[test]
    fn kronecker_sum_scalar_case() {
        let p = DMatrix::from_row_slice(1, 1, &[3i64]);
        let q = DMatrix::from_row_slice(1, 1, &[4i64]);
        let s = kronecker_sum(&p, &q).unwrap();
        assert_eq!(s[(0, 0)], 7);
    }

    #[test]
    fn kronecker_sum_of_paths_is_grid() {
        let s = kronecker_sum(&path_laplacian(2), &path_laplacian(2)).unwrap();
        let grid = build_laplacian(&GraphSpec::grid(2, 2).unwrap()).unwrap();
        assert_eq!(s, grid.matrix);
    }

    #[test]
    fn kronecker_sum_spectrum_is_pairwise_sums() {
        // eigenvalues of L_P(2) ⊕ L_P(3) are all pairwise sums {0,2} + {0,1,3}
        let s = kronecker_sum(&path_laplacian(2), &path_laplacian(3)).unwrap();
        let sf = s.map(|v| v as f64);
        let mut vals: Vec<f64> = sf.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected = vec![0.0, 1.0, 3.0, 2.0, 3.0, 5.0];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in vals.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn kronecker_sum_rejects_non_square() {
        let p = DMatrix::<i64>::zeros(2, 3);
        let q = DMatrix::<i64>::zeros(2, 2);
        assert!(matches!(kronecker_sum(&p, &q), Err(Error::Shape(_))));
    }

    #[test]
    fn node_index_examples() {
        let spec = GraphSpec::grid(3, 4).unwrap();
        assert_eq!(node_index(&spec, 0, 0).unwrap().linear, 0);
        assert_eq!(node_index(&spec, 1, 2).unwrap().linear, 6);
        for lin in 0..12 {
            let idx = node_coords(&spec, lin).unwrap();
            assert_eq!(node_index(&spec, idx.outer, idx.inner).unwrap().linear, lin);
        }
        assert!(node_index(&spec, 3, 0).is_err());
        assert!(node_coords(&spec, 12).is_err());
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(GraphSpec::cycle(2).is_err());
        assert!(GraphSpec::cycle(1).is_err());
        assert!(GraphSpec::path(0).is_err());
        assert!(GraphSpec::grid(0, 3).is_err());
        assert!(GraphSpec::cylinder(2, 2).is_err());
        assert!(GraphSpec::cylinder(3, 1).is_err());
        assert!(build_laplacian(&GraphSpec::Cycle { m: 2 }).is_err());
    }

    #[test]
    fn laplacian_invariants_hold_for_all_small_specs() {
        for spec in all_specs_up_to(200) {
            let l = build_laplacian(&spec).unwrap();
            let mat = &l.matrix;
            assert_eq!(mat.nrows(), spec.node_count(), "{spec}");
            for i in 0..mat.nrows() {
                let mut row_sum = 0;
                for j in 0..mat.ncols() {
                    row_sum += mat[(i, j)];
                    assert_eq!(mat[(i, j)], mat[(j, i)], "{spec}: not symmetric");
                    if i != j {
                        assert!(
                            mat[(i, j)] == 0 || mat[(i, j)] == -1,
                            "{spec}: off-diagonal entry {}",
                            mat[(i, j)]
                        );
                    }
                }
                assert_eq!(row_sum, 0, "{spec}: row {i} sums to {row_sum}");
            }
            let min_eig = l
                .to_f64()
                .symmetric_eigenvalues()
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min_eig >= -1e-10, "{spec}: not PSD, min eig {min_eig}");
        }
    }

    #[test]
    fn spec_serde_round_trip() {
        let spec = GraphSpec::grid(8, 12).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"topology":"grid","m":8,"n":12}"#);
        let back: GraphSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let cyl: GraphSpec = serde_json::from_str(r#"{"topology":"cylinder","m":6,"n":3}"#).unwrap();
        assert_eq!(cyl, GraphSpec::cylinder(6, 3).unwrap());
    }
}
