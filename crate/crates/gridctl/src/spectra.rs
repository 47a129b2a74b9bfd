//! Closed-form spectra of the four graph families, with exact eigenvalue
//! representation and a dense numeric eigendecomposition oracle.
//!
//! Path eigenvalues are `2 - 2cos(alpha*pi/m)` with cosine eigenvectors;
//! cycle eigenvalues are `2 - 2cos(2*alpha*pi/m)` with complex exponential
//! eigenvectors. Product eigenvalues are sums of factor eigenvalues, i.e.
//! `4 - 2(cos(t1*pi) + cos(t2*pi))` for a pair of rational angles; exact
//! equality of two such values is decided by the [`crate::diophantine`]
//! module, never by comparing floats.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::diophantine::{characteristic_parts_equal, enumerate_coincidences, RationalAngle};
use crate::graphs::GraphSpec;
use crate::{Error, Result};

/// Eigenvalue `4 - 2(cos(t1*pi) + cos(t2*pi))` with reduced rational angles.
///
/// Single-factor eigenvalues carry the fixed second angle 0, so their value
/// reduces to `2 - 2cos(t1*pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactEigenvalue {
    pub t1: RationalAngle,
    pub t2: RationalAngle,
}

impl ExactEigenvalue {
    pub fn new(t1: RationalAngle, t2: RationalAngle) -> Self {
        ExactEigenvalue { t1, t2 }
    }

    pub fn value(&self) -> f64 {
        4.0 - 2.0 * (self.t1.cos_pi() + self.t2.cos_pi())
    }

    /// Exact equality of the underlying algebraic numbers.
    pub fn exactly_equals(&self, other: &ExactEigenvalue) -> bool {
        characteristic_parts_equal(self.t1, self.t2, other.t1, other.t2)
    }
}

impl Serialize for ExactEigenvalue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ExactEigenvalue", 3)?;
        s.serialize_field("t1", &self.t1)?;
        s.serialize_field("t2", &self.t2)?;
        s.serialize_field("value", &self.value())?;
        s.end()
    }
}

/// Closed-form eigenvector of a path or cycle Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenvectorFactor {
    /// `v_k = 1/sqrt(m)` for `alpha = 0`, else
    /// `sqrt(2/m) * cos(alpha*(2k-1)*pi/(2m))`, `k = 1..m`; unit norm.
    PathVector { alpha: usize, m: usize },
    /// `v_j = exp(i*2*alpha*j*pi/m)`, `j = 1..m`; norm `sqrt(m)`.
    CycleVector { alpha: usize, m: usize },
}

impl EigenvectorFactor {
    pub fn len(&self) -> usize {
        match *self {
            EigenvectorFactor::PathVector { m, .. } | EigenvectorFactor::CycleVector { m, .. } => m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entry at 0-based position `k0` (paper index `k0 + 1`).
    pub fn complex_entry(&self, k0: usize) -> Complex64 {
        match *self {
            EigenvectorFactor::PathVector { alpha, m } => {
                Complex64::new(path_entry(alpha, m, k0), 0.0)
            }
            EigenvectorFactor::CycleVector { alpha, m } => {
                let arg = 2.0 * std::f64::consts::PI * (alpha as f64) * ((k0 + 1) as f64)
                    / (m as f64);
                Complex64::new(arg.cos(), arg.sin())
            }
        }
    }

    pub fn complex_entries(&self) -> DVector<Complex64> {
        DVector::from_fn(self.len(), |k0, _| self.complex_entry(k0))
    }
}

fn path_entry(alpha: usize, m: usize, k0: usize) -> f64 {
    if alpha == 0 {
        1.0 / (m as f64).sqrt()
    } else {
        let arg = (alpha as f64) * ((2 * k0 + 1) as f64) * std::f64::consts::PI
            / (2.0 * m as f64);
        (2.0 / m as f64).sqrt() * arg.cos()
    }
}

/// Unit-norm path eigenvector for index `alpha`.
pub(crate) fn path_vector(alpha: usize, m: usize) -> DVector<f64> {
    DVector::from_fn(m, |k0, _| path_entry(alpha, m, k0))
}

/// Real orthonormal cycle eigenvectors. For `1 <= alpha < m/2` the pair
/// (cos, sin) spans the same plane as the conjugate complex exponentials;
/// `alpha = m` gives the constant vector and `alpha = m/2` (even m) the
/// alternating-sign vector.
fn cycle_cos_vector(alpha: usize, m: usize) -> DVector<f64> {
    let scale = (2.0 / m as f64).sqrt();
    DVector::from_fn(m, |j0, _| {
        let arg = 2.0 * std::f64::consts::PI * (alpha as f64) * ((j0 + 1) as f64) / (m as f64);
        scale * arg.cos()
    })
}

fn cycle_sin_vector(alpha: usize, m: usize) -> DVector<f64> {
    let scale = (2.0 / m as f64).sqrt();
    DVector::from_fn(m, |j0, _| {
        let arg = 2.0 * std::f64::consts::PI * (alpha as f64) * ((j0 + 1) as f64) / (m as f64);
        scale * arg.sin()
    })
}

fn cycle_const_vector(m: usize) -> DVector<f64> {
    DVector::from_element(m, 1.0 / (m as f64).sqrt())
}

fn cycle_alternating_vector(m: usize) -> DVector<f64> {
    let scale = 1.0 / (m as f64).sqrt();
    DVector::from_fn(m, |j0, _| if (j0 + 1) % 2 == 0 { scale } else { -scale })
}

fn kron_vec(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (m, n) = (a.len(), b.len());
    DVector::from_fn(m * n, |i, _| a[i / n] * b[i % n])
}

fn kron_vec_complex(a: &DVector<Complex64>, b: &DVector<Complex64>) -> DVector<Complex64> {
    let (m, n) = (a.len(), b.len());
    DVector::from_fn(m * n, |i, _| a[i / n] * b[i % n])
}

/// An eigenvalue class: the exact eigenvalue, the `(alpha, beta)` index
/// pairs sharing it, and closed-form eigenvector constructions.
#[derive(Debug, Clone, Serialize)]
pub struct EigenspaceBasis {
    pub spec: GraphSpec,
    pub eigenvalue: ExactEigenvalue,
    /// For grids `alpha` runs over `0..m`; for cycle factors over `1..=m`.
    /// Single-factor graphs have `beta = 0` throughout.
    pub members: Vec<(usize, usize)>,
}

impl EigenspaceBasis {
    pub fn multiplicity(&self) -> usize {
        self.members.len()
    }

    /// The paper-form eigenvectors `v_alpha ⊗ w_beta`, complex-valued for
    /// cycle factors.
    pub fn complex_vectors(&self) -> Vec<DVector<Complex64>> {
        let (m, n) = self.spec.factor_sizes();
        let cycle = self.spec.first_factor_is_cycle();
        self.members
            .iter()
            .map(|&(alpha, beta)| {
                let a = if cycle {
                    EigenvectorFactor::CycleVector { alpha, m }
                } else {
                    EigenvectorFactor::PathVector { alpha, m }
                };
                let b = EigenvectorFactor::PathVector { alpha: beta, m: n };
                kron_vec_complex(&a.complex_entries(), &b.complex_entries())
            })
            .collect()
    }

    /// Orthonormal real basis of the eigenspace, as an `N x r` matrix.
    ///
    /// Path factors use the cosine eigenvectors directly. For a cycle
    /// factor, conjugate index pairs `alpha` and `m - alpha` are replaced by
    /// the cosine/sine pair, so each class member is visited once.
    pub fn real_basis(&self) -> DMatrix<f64> {
        let (m, n) = self.spec.factor_sizes();
        let node_count = self.spec.node_count();
        let mut columns: Vec<DVector<f64>> = Vec::with_capacity(self.members.len());
        for &(alpha, beta) in &self.members {
            let w = path_vector(beta, n);
            if self.spec.first_factor_is_cycle() {
                if alpha == m {
                    columns.push(kron_vec(&cycle_const_vector(m), &w));
                } else if 2 * alpha == m {
                    columns.push(kron_vec(&cycle_alternating_vector(m), &w));
                } else if 2 * alpha < m {
                    columns.push(kron_vec(&cycle_cos_vector(alpha, m), &w));
                    columns.push(kron_vec(&cycle_sin_vector(alpha, m), &w));
                }
                // members with m/2 < alpha < m are covered by their
                // conjugate partner m - alpha
            } else {
                columns.push(kron_vec(&path_vector(alpha, m), &w));
            }
        }
        debug_assert_eq!(columns.len(), self.members.len());
        let mut basis = DMatrix::zeros(node_count, columns.len());
        for (c, col) in columns.iter().enumerate() {
            basis.set_column(c, col);
        }
        basis
    }
}

fn eigenvalue_for(spec: &GraphSpec, alpha: usize, beta: usize) -> Result<ExactEigenvalue> {
    let (m, n) = spec.factor_sizes();
    let t1 = if spec.first_factor_is_cycle() {
        RationalAngle::folded(2 * alpha as i64, m as i64)?
    } else {
        RationalAngle::new(alpha as i64, m as i64)?
    };
    let t2 = RationalAngle::new(beta as i64, n as i64)?;
    Ok(ExactEigenvalue::new(t1, t2))
}

/// Eigenvalues and eigenvectors of the path Laplacian, `alpha = 0..m-1`,
/// strictly increasing.
pub fn path_spectrum(m: usize) -> Result<Vec<(ExactEigenvalue, EigenvectorFactor)>> {
    if m < 1 {
        return Err(Error::Dimension("path requires m >= 1".into()));
    }
    (0..m)
        .map(|alpha| {
            let t1 = RationalAngle::new(alpha as i64, m as i64)?;
            Ok((
                ExactEigenvalue::new(t1, RationalAngle::ZERO),
                EigenvectorFactor::PathVector { alpha, m },
            ))
        })
        .collect()
}

/// Eigenvalues and eigenvectors of the cycle Laplacian, `alpha = 1..m`.
///
/// The zero eigenvalue appears at `alpha = m`; nonzero eigenvalues come in
/// equal pairs `alpha` and `m - alpha`.
pub fn cycle_spectrum(m: usize) -> Result<Vec<(ExactEigenvalue, EigenvectorFactor)>> {
    if m < 3 {
        return Err(Error::Dimension(format!("cycle requires m >= 3, got {m}")));
    }
    (1..=m)
        .map(|alpha| {
            let t1 = RationalAngle::folded(2 * alpha as i64, m as i64)?;
            Ok((
                ExactEigenvalue::new(t1, RationalAngle::ZERO),
                EigenvectorFactor::CycleVector { alpha, m },
            ))
        })
        .collect()
}

/// Eigenspace partition for any of the four graph families, classes sorted
/// by ascending eigenvalue.
///
/// Paths and cycles are handled through their product view with a trivial
/// `P_1` second factor; grids and cylinder grids are partitioned by the
/// exact coincidence enumeration.
pub fn eigenspaces(spec: &GraphSpec) -> Result<Vec<EigenspaceBasis>> {
    spec.validate()?;
    let classes: Vec<Vec<(usize, usize)>> = if spec.is_product() {
        enumerate_coincidences(spec)?
    } else {
        let (m, _) = spec.factor_sizes();
        if spec.first_factor_is_cycle() {
            // group alpha = 1..m by the folded angle, which is equal
            // exactly for conjugate pairs
            let mut groups: Vec<(RationalAngle, Vec<(usize, usize)>)> = Vec::new();
            for alpha in 1..=m {
                let angle = RationalAngle::folded(2 * alpha as i64, m as i64)?;
                match groups.iter_mut().find(|(a, _)| *a == angle) {
                    Some((_, members)) => members.push((alpha, 0)),
                    None => groups.push((angle, vec![(alpha, 0)])),
                }
            }
            groups.into_iter().map(|(_, members)| members).collect()
        } else {
            (0..m).map(|alpha| vec![(alpha, 0)]).collect()
        }
    };
    let mut spaces = classes
        .into_iter()
        .map(|members| {
            let (alpha, beta) = members[0];
            Ok(EigenspaceBasis {
                spec: *spec,
                eigenvalue: eigenvalue_for(spec, alpha, beta)?,
                members,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    spaces.sort_by(|a, b| {
        a.eigenvalue
            .value()
            .partial_cmp(&b.eigenvalue.value())
            .unwrap()
            .then(a.members.cmp(&b.members))
    });
    Ok(spaces)
}

/// Eigenspace partition of a product graph (grid or cylinder grid).
pub fn product_spectrum(spec: &GraphSpec) -> Result<Vec<EigenspaceBasis>> {
    if !spec.is_product() {
        return Err(Error::Usage(format!(
            "product_spectrum expects a grid or cylinder grid, got {spec}; \
             use path_spectrum/cycle_spectrum instead"
        )));
    }
    eigenspaces(spec)
}

/// A group of numerically coincident eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigGroup {
    /// Mean of the grouped values.
    pub value: f64,
    pub count: usize,
}

/// Numeric spectrum with multiplicity grouping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSpectrum {
    /// All eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Consecutive values within the grouping tolerance, merged.
    pub groups: Vec<EigGroup>,
}

impl NumericSpectrum {
    pub fn max_group_size(&self) -> usize {
        self.groups.iter().map(|g| g.count).max().unwrap_or(0)
    }
}

/// Dense symmetric eigendecomposition, the brute-force oracle for all exact
/// claims. Consecutive eigenvalues closer than `tol` are merged into one
/// group.
pub fn numeric_spectrum(l: &DMatrix<f64>, tol: f64) -> Result<NumericSpectrum> {
    if !(tol > 0.0) {
        return Err(Error::Contract(format!("tolerance must be positive, got {tol}")));
    }
    if !l.is_square() {
        return Err(Error::Contract("numeric_spectrum requires a square matrix".into()));
    }
    for i in 0..l.nrows() {
        for j in (i + 1)..l.ncols() {
            let asym = (l[(i, j)] - l[(j, i)]).abs();
            if asym > 1e-12 * (1.0 + l[(i, j)].abs()) {
                return Err(Error::Contract(format!(
                    "matrix is not symmetric at ({i}, {j}): {} vs {}",
                    l[(i, j)],
                    l[(j, i)]
                )));
            }
        }
    }
    let mut values: Vec<f64> = l.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut groups: Vec<EigGroup> = Vec::new();
    let mut start = 0;
    for i in 0..values.len() {
        let is_last = i + 1 == values.len();
        if is_last || values[i + 1] - values[i] > tol {
            let slice = &values[start..=i];
            groups.push(EigGroup {
                value: slice.iter().sum::<f64>() / slice.len() as f64,
                count: slice.len(),
            });
            start = i + 1;
        }
    }
    Ok(NumericSpectrum { values, groups })
}

/// Default grouping tolerance for the numeric oracle: the smallest nonzero
/// spectral gap at desk scale is far larger.
pub const DEFAULT_GROUP_TOL: f64 = 1e-8;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::build_laplacian;

    #[test]
    fn path_spectrum_m1_is_zero() {
        let spec = path_spectrum(1).unwrap();
        assert_eq!(spec.len(), 1);
        assert!(spec[0].0.value().abs() < 1e-15);
    }

    #[test]
    fn path_spectrum_m3_exact_values() {
        let spec = path_spectrum(3).unwrap();
        let values: Vec<f64> = spec.iter().map(|(e, _)| e.value()).collect();
        for (got, want) in values.iter().zip(&[0.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        // strictly increasing in alpha
        assert!(values.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn path_spectrum_matches_numeric_oracle() {
        let l = build_laplacian(&GraphSpec::path(5).unwrap()).unwrap().to_f64();
        let numeric = numeric_spectrum(&l, DEFAULT_GROUP_TOL).unwrap();
        let mut exact: Vec<f64> = path_spectrum(5)
            .unwrap()
            .iter()
            .map(|(e, _)| e.value())
            .collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, n) in exact.iter().zip(&numeric.values) {
            assert!((e - n).abs() < 1e-10);
        }
    }

    #[test]
    fn cycle_spectrum_exact_values() {
        let values = |m: usize| -> Vec<f64> {
            let mut v: Vec<f64> = cycle_spectrum(m)
                .unwrap()
                .iter()
                .map(|(e, _)| e.value())
                .collect();
            v.sort_by(|a, b| a.partial_cmp(b).unwrap());
            v
        };
        let v4 = values(4);
        for (got, want) in v4.iter().zip(&[0.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        let v3 = values(3);
        for (got, want) in v3.iter().zip(&[0.0, 3.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!(cycle_spectrum(2).is_err());
    }

    #[test]
    fn cycle_spectrum_structure() {
        let spec = cycle_spectrum(7).unwrap();
        // zero eigenvalue at alpha = m
        assert!(spec[6].0.value().abs() < 1e-12);
        // pairs alpha and m - alpha
        for alpha in 1..=3usize {
            let a = spec[alpha - 1].0.value();
            let b = spec[7 - alpha - 1].0.value();
            assert!((a - b).abs() < 1e-12);
        }
        let l = build_laplacian(&GraphSpec::cycle(7).unwrap()).unwrap().to_f64();
        let numeric = numeric_spectrum(&l, DEFAULT_GROUP_TOL).unwrap();
        let mut exact: Vec<f64> = spec.iter().map(|(e, _)| e.value()).collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, n) in exact.iter().zip(&numeric.values) {
            assert!((e - n).abs() < 1e-10);
        }
    }

    #[test]
    fn grid2x2_eigenspaces() {
        let spaces = product_spectrum(&GraphSpec::grid(2, 2).unwrap()).unwrap();
        let summary: Vec<(f64, usize)> = spaces
            .iter()
            .map(|s| (s.eigenvalue.value(), s.multiplicity()))
            .collect();
        assert_eq!(summary.len(), 3);
        assert!((summary[0].0 - 0.0).abs() < 1e-12 && summary[0].1 == 1);
        assert!((summary[1].0 - 2.0).abs() < 1e-12 && summary[1].1 == 2);
        assert!((summary[2].0 - 4.0).abs() < 1e-12 && summary[2].1 == 1);
    }

    #[test]
    fn grid5x5_eigenvalue_four_has_multiplicity_four() {
        let spaces = product_spectrum(&GraphSpec::grid(5, 5).unwrap()).unwrap();
        let four = spaces
            .iter()
            .find(|s| (s.eigenvalue.value() - 4.0).abs() < 1e-9)
            .unwrap();
        assert_eq!(four.multiplicity(), 4);
    }

    #[test]
    fn cylinder3x2_max_multiplicity_two() {
        let spaces = product_spectrum(&GraphSpec::cylinder(3, 2).unwrap()).unwrap();
        assert_eq!(spaces.iter().map(|s| s.multiplicity()).max().unwrap(), 2);
        assert_eq!(spaces.iter().map(|s| s.multiplicity()).sum::<usize>(), 6);
    }

    #[test]
    fn product_spectrum_rejects_single_factors() {
        assert!(matches!(
            product_spectrum(&GraphSpec::path(4).unwrap()),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn numeric_spectrum_examples() {
        let l = build_laplacian(&GraphSpec::path(3).unwrap()).unwrap().to_f64();
        let s = numeric_spectrum(&l, DEFAULT_GROUP_TOL).unwrap();
        for (v, want) in s.values.iter().zip(&[0.0, 1.0, 3.0]) {
            assert!((v - want).abs() < 1e-10);
        }

        let grid33 = build_laplacian(&GraphSpec::grid(3, 3).unwrap()).unwrap().to_f64();
        let s = numeric_spectrum(&grid33, DEFAULT_GROUP_TOL).unwrap();
        let four = s
            .groups
            .iter()
            .find(|g| (g.value - 4.0).abs() < 1e-6)
            .unwrap();
        assert_eq!(four.count, 2);

        let zero = DMatrix::<f64>::zeros(3, 3);
        let s = numeric_spectrum(&zero, DEFAULT_GROUP_TOL).unwrap();
        assert_eq!(s.groups.len(), 1);
        assert_eq!(s.groups[0].count, 3);

        let asym = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(
            numeric_spectrum(&asym, DEFAULT_GROUP_TOL),
            Err(Error::Contract(_))
        ));
        assert!(numeric_spectrum(&zero, 0.0).is_err());
    }

    #[test]
    fn exact_values_match_numeric_for_all_small_specs() {
        let mut specs = vec![
            GraphSpec::path(11).unwrap(),
            GraphSpec::cycle(9).unwrap(),
            GraphSpec::grid(4, 6).unwrap(),
            GraphSpec::grid(12, 12).unwrap(),
            GraphSpec::cylinder(6, 3).unwrap(),
            GraphSpec::cylinder(12, 10).unwrap(),
            GraphSpec::grid(20, 20).unwrap(),
        ];
        specs.retain(|s| s.node_count() <= 400);
        for spec in specs {
            let mut exact: Vec<f64> = Vec::new();
            for space in eigenspaces(&spec).unwrap() {
                for _ in 0..space.multiplicity() {
                    exact.push(space.eigenvalue.value());
                }
            }
            exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let l = build_laplacian(&spec).unwrap().to_f64();
            let numeric = numeric_spectrum(&l, DEFAULT_GROUP_TOL).unwrap();
            assert_eq!(exact.len(), numeric.values.len(), "{spec}");
            for (e, n) in exact.iter().zip(&numeric.values) {
                assert!((e - n).abs() < 1e-8, "{spec}: exact {e} vs numeric {n}");
            }
        }
    }

    #[test]
    fn closed_form_vectors_are_eigenvectors() {
        for spec in [
            GraphSpec::path(6).unwrap(),
            GraphSpec::cycle(8).unwrap(),
            GraphSpec::grid(3, 5).unwrap(),
            GraphSpec::cylinder(5, 3).unwrap(),
            GraphSpec::cylinder(6, 2).unwrap(),
        ] {
            let l = build_laplacian(&spec).unwrap().to_f64();
            for space in eigenspaces(&spec).unwrap() {
                let lambda = space.eigenvalue.value();
                // real orthonormal basis columns
                let basis = space.real_basis();
                assert_eq!(basis.ncols(), space.multiplicity(), "{spec}");
                let residual = &l * &basis - &basis * lambda;
                assert!(
                    residual.amax() <= 1e-9,
                    "{spec}: real basis residual {}",
                    residual.amax()
                );
                // orthonormality
                let gram = basis.transpose() * &basis;
                let eye = DMatrix::<f64>::identity(gram.nrows(), gram.ncols());
                assert!((gram - eye).amax() < 1e-10, "{spec}: basis not orthonormal");
                // paper-form complex vectors
                for v in space.complex_vectors() {
                    let lv = l.map(|x| Complex64::new(x, 0.0)) * &v;
                    let res = lv - v.map(|x| x * Complex64::new(lambda, 0.0));
                    let max = res.iter().map(|c| c.norm()).fold(0.0, f64::max);
                    assert!(max <= 1e-9, "{spec}: complex residual {max}");
                }
            }
        }
    }

    #[test]
    fn path_vectors_orthogonal() {
        let m = 9;
        for a in 0..m {
            for b in (a + 1)..m {
                let dot = path_vector(a, m).dot(&path_vector(b, m));
                assert!(dot.abs() <= 1e-10, "alpha {a}, {b}: dot {dot}");
            }
        }
    }

    #[test]
    fn eigenspace_partition_is_a_partition() {
        for spec in [
            GraphSpec::grid(6, 4).unwrap(),
            GraphSpec::cylinder(8, 3).unwrap(),
        ] {
            let spaces = eigenspaces(&spec).unwrap();
            let mut seen = std::collections::HashSet::new();
            for space in &spaces {
                for member in &space.members {
                    assert!(seen.insert(*member), "{spec}: duplicate member {member:?}");
                }
            }
            assert_eq!(seen.len(), spec.node_count(), "{spec}");
        }
    }

    #[test]
    fn exact_equality_of_eigenvalues() {
        let spaces = product_spectrum(&GraphSpec::grid(6, 4).unwrap()).unwrap();
        for (i, a) in spaces.iter().enumerate() {
            for (j, b) in spaces.iter().enumerate() {
                assert_eq!(
                    a.eigenvalue.exactly_equals(&b.eigenvalue),
                    i == j,
                    "classes {i} and {j}"
                );
            }
        }
    }
}
