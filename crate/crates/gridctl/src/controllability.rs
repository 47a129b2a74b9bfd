//! Controllability of Laplacian dynamics and of the second-order lifted
//! system.
//!
//! The PBH test runs per eigenspace on the closed-form orthonormal bases:
//! `(L, B)` is controllable iff for every eigenspace basis `U` the matrix
//! `U^T B` has full row rank. The Kalman test builds the rank of
//! `[B, LB, ..., L^{N-1}B]` incrementally with per-column normalization,
//! which keeps the rank decision meaningful at dimensions where raw powers
//! of `L` span dozens of orders of magnitude.
//!
//! The lifted system pairs two diffusing species per node. Its
//! controllability reduces to first-order tests: with identical control
//! node sets on both species, `(A, B~)` is controllable iff `(L, B)` is;
//! with distinct sets and nondegenerate parameters, iff `(L, [B C])` is.
//! Parameters in the degeneracy set fall back to a direct Kalman test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::graphs::{build_laplacian, node_index, GraphSpec};
use crate::multiplicity::phi;
use crate::spectra::{eigenspaces, EigenspaceBasis, ExactEigenvalue};
use crate::{Error, Result};

/// Relative singular-value threshold for all numeric rank decisions.
pub const RANK_TOL: f64 = 1e-9;

/// Tolerance below which a parameter point is treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Ordered set of controlled node indices; its control matrix stacks the
/// corresponding standard basis columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlSet {
    state_dim: usize,
    nodes: Vec<usize>,
}

impl ControlSet {
    /// A nonempty list of distinct node indices below `state_dim`.
    pub fn new(state_dim: usize, nodes: Vec<usize>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Contract("control set must not be empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for &node in &nodes {
            if node >= state_dim {
                return Err(Error::Index(format!(
                    "control node {node} outside state dimension {state_dim}"
                )));
            }
            if !seen.insert(node) {
                return Err(Error::Contract(format!("duplicate control node {node}")));
            }
        }
        Ok(ControlSet { state_dim, nodes })
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires at least one node
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    /// The `N x rho` 0/1 control matrix.
    pub fn matrix(&self) -> DMatrix<f64> {
        let mut b = DMatrix::zeros(self.state_dim, self.nodes.len());
        for (col, &node) in self.nodes.iter().enumerate() {
            b[(node, col)] = 1.0;
        }
        b
    }

    /// The set with the node at `position` removed, if any nodes remain.
    pub fn dropping(&self, position: usize) -> Option<ControlSet> {
        if self.nodes.len() <= 1 || position >= self.nodes.len() {
            return None;
        }
        let mut nodes = self.nodes.clone();
        nodes.remove(position);
        Some(ControlSet {
            state_dim: self.state_dim,
            nodes,
        })
    }

    fn node_set(&self) -> std::collections::BTreeSet<usize> {
        self.nodes.iter().copied().collect()
    }

    /// Union of two optional control sets with duplicate columns removed,
    /// in first-seen order.
    pub fn union(a: Option<&ControlSet>, b: Option<&ControlSet>) -> Result<ControlSet> {
        let state_dim = match (a, b) {
            (Some(x), _) => x.state_dim,
            (_, Some(y)) => y.state_dim,
            (None, None) => {
                return Err(Error::Contract(
                    "at least one control set must be nonempty".into(),
                ))
            }
        };
        let mut nodes = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for set in [a, b].into_iter().flatten() {
            if set.state_dim != state_dim {
                return Err(Error::Shape("control sets have different state dimensions".into()));
            }
            for &node in &set.nodes {
                if seen.insert(node) {
                    nodes.push(node);
                }
            }
        }
        ControlSet::new(state_dim, nodes)
    }
}

/// Parameters of the linearized two-species model: reaction linearization
/// `(a, b, c, d)` and positive diffusion coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub nu1: f64,
    pub nu2: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, nu1: f64, nu2: f64) -> Result<Self> {
        let p = ModelParams { a, b, c, d, nu1, nu2 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.a, self.b, self.c, self.d, self.nu1, self.nu2];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("model parameters must be finite".into()));
        }
        if self.nu1 <= 0.0 || self.nu2 <= 0.0 {
            return Err(Error::Contract(format!(
                "diffusion coefficients must be positive, got nu1 = {}, nu2 = {}",
                self.nu1, self.nu2
            )));
        }
        Ok(())
    }
}

/// Per-mode quantities of the lift: for a Laplacian eigenvalue `lambda`,
/// the two eigenvalues `s_i(lambda)` of `A` on that mode and the left
/// eigenvector slopes `k_i(lambda)`.
#[derive(Debug, Clone, Copy)]
pub struct ModeRoots {
    pub lambda: f64,
    pub delta: f64,
    pub s1: Complex64,
    pub s2: Complex64,
    /// `None` when `c = 0` and the quadratic for `k` degenerates.
    pub k: Option<(Complex64, Complex64)>,
}

/// Roots of `s^2 - ((-nu1*l + a) + (-nu2*l + d)) s
/// + ((-nu1*l + a)(-nu2*l + d) - bc) = 0` and of
/// `c k^2 + ((nu2 - nu1) l + (a - d)) k - b = 0`.
pub fn mode_roots(params: &ModelParams, lambda: f64) -> ModeRoots {
    let p = -params.nu1 * lambda + params.a;
    let q = -params.nu2 * lambda + params.d;
    let lin = (params.nu2 - params.nu1) * lambda + (params.a - params.d);
    let delta = lin * lin + 4.0 * params.b * params.c;
    let sqrt_delta = Complex64::new(delta, 0.0).sqrt();
    let trace = Complex64::new(p + q, 0.0);
    let s1 = (trace + sqrt_delta) / 2.0;
    let s2 = (trace - sqrt_delta) / 2.0;
    let k = if params.c != 0.0 {
        let two_c = Complex64::new(2.0 * params.c, 0.0);
        let neg_lin = Complex64::new(-lin, 0.0);
        Some(((neg_lin + sqrt_delta) / two_c, (neg_lin - sqrt_delta) / two_c))
    } else {
        None
    };
    ModeRoots { lambda, delta, s1, s2, k }
}

/// Membership in the measure-zero parameter set where the second-order
/// reduction is not guaranteed: `S1` collects coincidences
/// `s_j(lambda1) = s_l(lambda2)` across distinct eigenvalues, `S2` collects
/// discriminant zeros.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyReport {
    pub in_s1: bool,
    pub in_s2: bool,
    /// Pairs of distinct eigenvalues with coinciding `s` roots.
    pub s1_witnesses: Vec<(f64, f64)>,
    /// Eigenvalues where `|Delta|` falls below the tolerance.
    pub s2_witnesses: Vec<f64>,
}

impl DegeneracyReport {
    pub fn in_s(&self) -> bool {
        self.in_s1 || self.in_s2
    }
}

pub fn in_degenerate_set(
    params: &ModelParams,
    spec: &GraphSpec,
    tol: f64,
) -> Result<DegeneracyReport> {
    if !(tol > 0.0) {
        return Err(Error::Contract("tolerance must be positive".into()));
    }
    params.validate()?;
    let lambdas: Vec<f64> = eigenspaces(spec)?
        .iter()
        .map(|s| s.eigenvalue.value())
        .collect();
    let roots: Vec<ModeRoots> = lambdas.iter().map(|&l| mode_roots(params, l)).collect();
    let mut s2_witnesses = Vec::new();
    for r in &roots {
        if r.delta.abs() <= tol {
            s2_witnesses.push(r.lambda);
        }
    }
    let mut s1_witnesses = Vec::new();
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            let a = &roots[i];
            let b = &roots[j];
            let coincide = [(a.s1, b.s1), (a.s1, b.s2), (a.s2, b.s1), (a.s2, b.s2)]
                .iter()
                .any(|(x, y)| (x - y).norm() <= tol);
            if coincide {
                s1_witnesses.push((a.lambda, b.lambda));
            }
        }
    }
    Ok(DegeneracyReport {
        in_s1: !s1_witnesses.is_empty(),
        in_s2: !s2_witnesses.is_empty(),
        s1_witnesses,
        s2_witnesses,
    })
}

/// The lifted system `z' = A z + B~ u` with
/// `A = [-nu1 L + aI, bI; cI, -nu2 L + dI]` and block-diagonal
/// `B~ = [B 0; 0 C]`.
#[derive(Debug, Clone)]
pub struct SecondOrderSystem {
    pub a: DMatrix<f64>,
    pub btilde: DMatrix<f64>,
    pub node_count: usize,
    pub kappa: usize,
    pub tau: usize,
}

impl SecondOrderSystem {
    pub fn state_dim(&self) -> usize {
        2 * self.node_count
    }

    pub fn input_dim(&self) -> usize {
        self.kappa + self.tau
    }
}

pub fn build_second_order(
    params: &ModelParams,
    spec: &GraphSpec,
    b: Option<&ControlSet>,
    c: Option<&ControlSet>,
) -> Result<SecondOrderSystem> {
    params.validate()?;
    spec.validate()?;
    if b.is_none() && c.is_none() {
        return Err(Error::Contract(
            "at least one of the control sets B, C must be nonempty".into(),
        ));
    }
    let n = spec.node_count();
    for set in [b, c].into_iter().flatten() {
        if set.state_dim() != n {
            return Err(Error::Shape(format!(
                "control set is over {} nodes but {spec} has {n}",
                set.state_dim()
            )));
        }
    }
    let l = build_laplacian(spec)?.to_f64();
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = -params.nu1 * l[(i, j)];
            a[(n + i, n + j)] = -params.nu2 * l[(i, j)];
        }
        a[(i, i)] += params.a;
        a[(i, n + i)] = params.b;
        a[(n + i, i)] = params.c;
        a[(n + i, n + i)] += params.d;
    }
    let kappa = b.map_or(0, ControlSet::len);
    let tau = c.map_or(0, ControlSet::len);
    let mut btilde = DMatrix::zeros(2 * n, kappa + tau);
    if let Some(bset) = b {
        for (col, &node) in bset.nodes().iter().enumerate() {
            btilde[(node, col)] = 1.0;
        }
    }
    if let Some(cset) = c {
        for (col, &node) in cset.nodes().iter().enumerate() {
            btilde[(n + node, kappa + col)] = 1.0;
        }
    }
    Ok(SecondOrderSystem {
        a,
        btilde,
        node_count: n,
        kappa,
        tau,
    })
}

/// Which decision procedure produced a [`ControllabilityReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PbhExact,
    KalmanNumeric,
    Prop1Reduction,
    Prop2Reduction,
    DirectLift,
}

/// Outcome of a controllability test.
#[derive(Debug, Clone, Serialize)]
pub struct ControllabilityReport {
    pub controllable: bool,
    pub method: Method,
    /// The first eigenspace failing the PBH condition, when one exists.
    pub failing_eigenspace: Option<ExactEigenvalue>,
    pub rank_found: Option<usize>,
    pub rank_required: Option<usize>,
}

fn numeric_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let svals = m.clone().svd(false, false).singular_values;
    let max = svals.iter().copied().fold(0.0, f64::max);
    // PBH projections of orthonormal bases onto 0/1 columns live on the
    // unit scale, so the relative threshold is floored there; otherwise an
    // all-near-zero projection would count as full rank.
    let threshold = rel_tol * max.max(1.0);
    svals.iter().filter(|&&s| s > threshold).count()
}

/// PBH test of `(L, B)` over the closed-form eigenspaces: controllable iff
/// every eigenspace basis `U` gives `U^T B` full row rank.
pub fn pbh_test(spec: &GraphSpec, control: &ControlSet) -> Result<ControllabilityReport> {
    spec.validate()?;
    if control.state_dim() != spec.node_count() {
        return Err(Error::Shape(format!(
            "control set is over {} nodes but {spec} has {}",
            control.state_dim(),
            spec.node_count()
        )));
    }
    let b = control.matrix();
    for space in eigenspaces(spec)? {
        let r = space.multiplicity();
        // rank(U^T B) can never reach r with fewer than r columns
        let projected = space.real_basis().transpose() * &b;
        let rank = numeric_rank(&projected, RANK_TOL);
        if rank < r {
            return Ok(ControllabilityReport {
                controllable: false,
                method: Method::PbhExact,
                failing_eigenspace: Some(space.eigenvalue),
                rank_found: Some(rank),
                rank_required: Some(r),
            });
        }
    }
    Ok(ControllabilityReport {
        controllable: true,
        method: Method::PbhExact,
        failing_eigenspace: None,
        rank_found: None,
        rank_required: None,
    })
}

/// Numeric rank of the controllability matrix `[B, LB, ..., L^{N-1}B]`.
///
/// Evaluated in staircase (block-Krylov) form: each stage orthonormalizes
/// the image under `L` of the directions the previous stage added, with
/// twice-through Gram-Schmidt and the [`RANK_TOL`] relative residual
/// threshold. In exact arithmetic the accumulated basis spans exactly the
/// column space of the controllability matrix; numerically it avoids the
/// geometric loss of weak eigencomponents that raw powers of `L` suffer.
/// Iteration stops when the rank saturates at `N` or a stage adds nothing,
/// which leaves the Krylov space invariant.
pub fn kalman_rank(l: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<usize> {
    if !l.is_square() {
        return Err(Error::Shape(format!(
            "kalman_rank: system matrix is {}x{}",
            l.nrows(),
            l.ncols()
        )));
    }
    if b.nrows() != l.nrows() {
        return Err(Error::Shape(format!(
            "kalman_rank: B has {} rows, system has dimension {}",
            b.nrows(),
            l.nrows()
        )));
    }
    let n = l.nrows();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut absorb = |candidate: DVector<f64>, basis: &mut Vec<DVector<f64>>| -> Option<DVector<f64>> {
        let norm0 = candidate.norm();
        if norm0 == 0.0 {
            return None;
        }
        let mut v = candidate / norm0;
        for _ in 0..2 {
            for q in basis.iter() {
                let proj = q.dot(&v);
                v -= q * proj;
            }
        }
        let residual = v.norm();
        if residual > RANK_TOL {
            let unit = v / residual;
            basis.push(unit.clone());
            Some(unit)
        } else {
            None
        }
    };

    let mut frontier: Vec<DVector<f64>> = Vec::new();
    for j in 0..b.ncols() {
        if basis.len() == n {
            break;
        }
        if let Some(unit) = absorb(b.column(j).into_owned(), &mut basis) {
            frontier.push(unit);
        }
    }
    while !frontier.is_empty() && basis.len() < n {
        let mut next = Vec::new();
        for dir in &frontier {
            if basis.len() == n {
                break;
            }
            if let Some(unit) = absorb(l * dir, &mut basis) {
                next.push(unit);
            }
        }
        frontier = next;
    }
    Ok(basis.len())
}

/// The constructive minimal control set: the first `psi(m, n)` nodes of the
/// first grid row, or the first `psi_C(m, n)` cycle positions of the first
/// cylinder column.
pub fn min_control_set(spec: &GraphSpec) -> Result<ControlSet> {
    let count = phi(spec)?;
    let nodes: Vec<usize> = match spec {
        GraphSpec::Grid { .. } => (0..count)
            .map(|inner| node_index(spec, 0, inner).map(|ni| ni.linear))
            .collect::<Result<_>>()?,
        GraphSpec::CylinderGrid { .. } => (0..count)
            .map(|outer| node_index(spec, outer, 0).map(|ni| ni.linear))
            .collect::<Result<_>>()?,
        _ => unreachable!("phi rejects non-product specs"),
    };
    ControlSet::new(spec.node_count(), nodes)
}

/// First eigenspace whose multiplicity exceeds the number of control
/// columns: a certificate of uncontrollability.
pub fn lemma2_lower_bound(
    spec: &GraphSpec,
    control: &ControlSet,
) -> Result<Option<EigenspaceBasis>> {
    let rank = control.len();
    Ok(eigenspaces(spec)?
        .into_iter()
        .find(|space| space.multiplicity() > rank))
}

/// Controllability of the lifted pair `(A, B~)`.
///
/// Decision routing: identical node sets go through the `(L, B)` reduction;
/// distinct sets with `b, c != 0` outside the degeneracy set go through the
/// `(L, [B C])` reduction; everything else falls back to a direct Kalman
/// rank computation on `(A, B~)`. The necessary condition — `(L, [B C])`
/// controllable — is checked first in all routes.
pub fn second_order_controllable(
    params: &ModelParams,
    spec: &GraphSpec,
    b: Option<&ControlSet>,
    c: Option<&ControlSet>,
) -> Result<ControllabilityReport> {
    params.validate()?;
    spec.validate()?;
    let union = ControlSet::union(b, c)?;
    let same_sets = match (b, c) {
        (Some(x), Some(y)) => x.node_set() == y.node_set(),
        _ => false,
    };
    let method = if same_sets {
        Method::Prop1Reduction
    } else if params.b != 0.0
        && params.c != 0.0
        && !in_degenerate_set(params, spec, DEGENERACY_TOL)?.in_s()
    {
        Method::Prop2Reduction
    } else {
        Method::DirectLift
    };

    // Necessary condition: (L, [B C]) controllable. For both reduction
    // routes this is also sufficient.
    let first_order = pbh_test(spec, &union)?;
    if !first_order.controllable || method != Method::DirectLift {
        return Ok(ControllabilityReport { method, ..first_order });
    }

    let system = build_second_order(params, spec, b, c)?;
    let rank = kalman_rank(&system.a, &system.btilde)?;
    let required = system.state_dim();
    Ok(ControllabilityReport {
        controllable: rank == required,
        method,
        failing_eigenspace: None,
        rank_found: Some(rank),
        rank_required: Some(required),
    })
}
