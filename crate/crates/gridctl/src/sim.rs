//! Time integration of the lifted system, minimum-energy steering and
//! pattern export.
//!
//! Integration is classical fixed-step RK4; a dense scaling-and-squaring
//! matrix exponential serves both as the free-motion oracle and as the
//! propagator inside the steering computation. Steering inverts the
//! finite-horizon controllability Gramian
//! `W(T) = integral of exp(At) B~ B~^T exp(A^T t) dt`,
//! assembled by Simpson quadrature on snapshots of `exp(At) B~`; the
//! minimum-energy control is `u(t) = B~^T exp(A^T (T - t)) W(T)^{-1}
//! (z_target - exp(AT) z0)`.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::controllability::SecondOrderSystem;
use crate::graphs::{node_coords, GraphSpec};
use crate::{Error, Result};

/// Dense matrix exponential by Pade-13 scaling and squaring.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert!(a.is_square(), "expm requires a square matrix");
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA13: f64 = 5.371920351148152;
    let n = a.nrows();
    let norm = a
        .column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let a = a / 2f64.powi(s as i32);
    let eye = DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u_inner = &a6 * (B[13] * &a6 + B[11] * &a4 + B[9] * &a2)
        + B[7] * &a6
        + B[5] * &a4
        + B[3] * &a2
        + B[1] * &eye;
    let u = &a * u_inner;
    let v = &a6 * (B[12] * &a6 + B[10] * &a4 + B[8] * &a2)
        + B[6] * &a6
        + B[4] * &a4
        + B[2] * &a2
        + B[0] * &eye;
    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .expect("Pade denominator is nonsingular after scaling");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// A sampled state trajectory of the lifted system.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn final_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory has at least the initial state")
    }
}

fn check_finite(v: &DVector<f64>, what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Contract(format!("{what} contains non-finite entries")));
    }
    Ok(())
}

/// Fixed-step RK4 integration of `z' = A z + B~ u(t)` on `[0, T]`.
///
/// The last step is shortened when `T` is not a multiple of `dt`. For
/// `u = 0` the final state matches `exp(AT) z0` to the order of the method.
pub fn integrate<F>(
    system: &SecondOrderSystem,
    u: F,
    z0: &DVector<f64>,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory>
where
    F: Fn(f64) -> DVector<f64>,
{
    if !t_final.is_finite() || !dt.is_finite() || dt <= 0.0 || t_final <= 0.0 || dt > t_final {
        return Err(Error::Contract(format!(
            "need 0 < dt <= T with finite values, got dt = {dt}, T = {t_final}"
        )));
    }
    if z0.len() != system.state_dim() {
        return Err(Error::Shape(format!(
            "initial state has length {}, system dimension is {}",
            z0.len(),
            system.state_dim()
        )));
    }
    check_finite(z0, "initial state")?;
    let probe = u(0.0);
    if probe.len() != system.input_dim() {
        return Err(Error::Shape(format!(
            "control signal has {} entries, system expects {}",
            probe.len(),
            system.input_dim()
        )));
    }

    let rhs = |t: f64, z: &DVector<f64>| &system.a * z + &system.btilde * u(t);
    let mut times = vec![0.0];
    let mut states = vec![z0.clone()];
    let mut t = 0.0;
    let mut z = z0.clone();
    while t < t_final - 1e-12 * t_final.max(1.0) {
        let h = dt.min(t_final - t);
        let k1 = rhs(t, &z);
        let k2 = rhs(t + 0.5 * h, &(&z + &k1 * (0.5 * h)));
        let k3 = rhs(t + 0.5 * h, &(&z + &k2 * (0.5 * h)));
        let k4 = rhs(t + h, &(&z + &k3 * h));
        z += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        t += h;
        times.push(t);
        states.push(z.clone());
    }
    Ok(Trajectory { times, states })
}

/// Minimum-energy plan steering `z0` to `z_target` over `[0, T]`.
#[derive(Debug, Clone)]
pub struct SteeringPlan {
    pub horizon: f64,
    /// Control input sampled on the quadrature grid.
    pub control_samples: Vec<(f64, DVector<f64>)>,
    /// `exp(AT) z0 + W(T) eta`; equals the target up to solver precision.
    pub predicted_final: DVector<f64>,
    pub gramian_condition: f64,
    /// `eta = W(T)^{-1}(z_target - exp(AT) z0)`; the closed-loop adjoint
    /// seed from which the continuous control is reconstructed.
    pub adjoint_seed: DVector<f64>,
}

/// Condition-number ceiling above which the Gramian is reported singular.
pub const GRAMIAN_CONDITION_LIMIT: f64 = 1e14;

/// Finite-horizon controllability Gramian
/// `W(T) = integral of exp(At) B~ B~^T exp(A^T t) dt`, by Simpson
/// quadrature with `steps` subintervals (rounded up to even).
pub fn controllability_gramian(
    system: &SecondOrderSystem,
    t_final: f64,
    steps: usize,
) -> Result<DMatrix<f64>> {
    if !t_final.is_finite() || t_final <= 0.0 {
        return Err(Error::Contract(format!("horizon must be positive, got {t_final}")));
    }
    if steps < 2 {
        return Err(Error::Contract("quadrature needs at least 2 steps".into()));
    }
    let dim = system.state_dim();
    let steps = steps + steps % 2;
    let h = t_final / steps as f64;
    let e_step = expm(&(&system.a * h));

    // Simpson weights h/3 * [1, 4, 2, ..., 2, 4, 1] on exp(At) B~ snapshots.
    let mut w = DMatrix::<f64>::zeros(dim, dim);
    let mut snapshot = system.btilde.clone();
    for k in 0..=steps {
        let weight = if k == 0 || k == steps {
            h / 3.0
        } else if k % 2 == 1 {
            4.0 * h / 3.0
        } else {
            2.0 * h / 3.0
        };
        w += weight * (&snapshot * snapshot.transpose());
        if k < steps {
            snapshot = &e_step * snapshot;
        }
    }
    Ok(w)
}

/// Compute the Gramian and the minimum-energy control reaching `z_target`.
///
/// The caller is expected to have verified controllability of
/// `(A, B~)`; an uncontrollable pair surfaces here as a numerically
/// singular Gramian, reported with the deficient direction.
pub fn gramian_steer(
    system: &SecondOrderSystem,
    z0: &DVector<f64>,
    z_target: &DVector<f64>,
    t_final: f64,
    steps: usize,
) -> Result<SteeringPlan> {
    let dim = system.state_dim();
    if z0.len() != dim || z_target.len() != dim {
        return Err(Error::Shape(format!(
            "states must have length {dim}, got {} and {}",
            z0.len(),
            z_target.len()
        )));
    }
    check_finite(z0, "initial state")?;
    check_finite(z_target, "target state")?;

    let w = controllability_gramian(system, t_final, steps)?;
    let steps = steps + steps % 2;
    let h = t_final / steps as f64;
    let e_step = expm(&(&system.a * h));

    let eigen = nalgebra::SymmetricEigen::new(w.clone());
    let max_eig = eigen.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (min_idx, min_eig) = eigen
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .expect("gramian has eigenvalues");
    let condition = if min_eig.abs() > 0.0 {
        max_eig / min_eig.abs()
    } else {
        f64::INFINITY
    };
    if !(condition <= GRAMIAN_CONDITION_LIMIT) {
        let deficient = eigen.eigenvectors.column(min_idx);
        let (dom_idx, dom_weight) = deficient
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap();
        let n = system.node_count;
        return Err(Error::Infeasible(format!(
            "gramian condition {condition:.3e} exceeds {GRAMIAN_CONDITION_LIMIT:.0e}; \
             deficient direction is dominated by channel {} node {} (weight {:.3})",
            dom_idx / n + 1,
            dom_idx % n,
            dom_weight
        )));
    }

    let reach = expm(&(&system.a * t_final));
    let residual = z_target - &reach * z0;
    let eta = w
        .clone()
        .cholesky()
        .map(|ch| ch.solve(&residual))
        .or_else(|| w.clone().lu().solve(&residual))
        .ok_or_else(|| Error::Infeasible("gramian solve failed".into()))?;
    let predicted_final = &reach * z0 + &w * &eta;

    // u(t_k) = B~^T exp(A^T (T - t_k)) eta, marched backwards from t = T.
    let e_step_t = e_step.transpose();
    let mut adjoint = vec![DVector::zeros(dim); steps + 1];
    adjoint[steps] = eta.clone();
    for k in (0..steps).rev() {
        adjoint[k] = &e_step_t * &adjoint[k + 1];
    }
    let control_samples = (0..=steps)
        .map(|k| (k as f64 * h, system.btilde.transpose() * &adjoint[k]))
        .collect();

    Ok(SteeringPlan {
        horizon: t_final,
        control_samples,
        predicted_final,
        gramian_condition: condition,
        adjoint_seed: eta,
    })
}

/// Integrate the closed loop of a steering plan.
///
/// The adjoint `y(t) = exp(A^T (T - t)) eta` is sampled exactly on the RK4
/// half-step grid by marching backwards from `T` with a half-step matrix
/// exponential — integrating `y' = -A^T y` forwards would amplify roundoff
/// in the fast directions of a stable `A`. The state then runs ordinary RK4
/// with the control `u = B~^T y` evaluated without interpolation error. The
/// step is shrunk to divide the horizon evenly.
pub fn integrate_steered(
    system: &SecondOrderSystem,
    plan: &SteeringPlan,
    z0: &DVector<f64>,
    dt: f64,
) -> Result<Trajectory> {
    let dim = system.state_dim();
    if z0.len() != dim {
        return Err(Error::Shape(format!(
            "initial state has length {}, system dimension is {dim}",
            z0.len()
        )));
    }
    if !dt.is_finite() || dt <= 0.0 || dt > plan.horizon {
        return Err(Error::Contract(format!(
            "need 0 < dt <= T, got dt = {dt}, T = {}",
            plan.horizon
        )));
    }
    check_finite(z0, "initial state")?;
    let t_final = plan.horizon;
    let n_steps = (t_final / dt).ceil().max(1.0) as usize;
    let h = t_final / n_steps as f64;

    let e_half_t = expm(&(system.a.transpose() * (0.5 * h)));
    let mut adjoint = vec![DVector::<f64>::zeros(dim); 2 * n_steps + 1];
    adjoint[2 * n_steps] = plan.adjoint_seed.clone();
    for j in (0..2 * n_steps).rev() {
        adjoint[j] = &e_half_t * &adjoint[j + 1];
    }
    let control = |j: usize| system.btilde.transpose() * &adjoint[j];

    let mut times = vec![0.0];
    let mut states = vec![z0.clone()];
    let mut z = z0.clone();
    for step in 0..n_steps {
        let k1 = &system.a * &z + &system.btilde * control(2 * step);
        let u_mid = &system.btilde * control(2 * step + 1);
        let k2 = &system.a * (&z + &k1 * (0.5 * h)) + &u_mid;
        let k3 = &system.a * (&z + &k2 * (0.5 * h)) + &u_mid;
        let k4 = &system.a * (&z + &k3 * h) + &system.btilde * control(2 * step + 2);
        z += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        times.push((step + 1) as f64 * h);
        states.push(z.clone());
    }
    Ok(Trajectory { times, states })
}

/// Which of the two species channels to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    Z1,
    Z2,
}

impl TryFrom<u8> for Channel {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            1 => Ok(Channel::Z1),
            2 => Ok(Channel::Z2),
            other => Err(Error::Usage(format!("channel must be 1 or 2, got {other}"))),
        }
    }
}

/// Output format for [`export_pattern`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternFormat {
    Csv,
    Pgm,
}

/// Write one channel of a lifted state as an `m x n` pattern.
///
/// CSV carries `row,col,value` with full 17-significant-digit values; PGM
/// is binary P5 with maxval 255, min-max normalized (constant data maps to
/// mid-gray).
pub fn export_pattern(
    state: &DVector<f64>,
    spec: &GraphSpec,
    channel: Channel,
    path: &Path,
    format: PatternFormat,
) -> Result<()> {
    if !spec.is_product() {
        return Err(Error::Usage(format!(
            "pattern export needs a grid or cylinder grid, got {spec}"
        )));
    }
    let n_nodes = spec.node_count();
    if state.len() != 2 * n_nodes {
        return Err(Error::Shape(format!(
            "state has length {}, expected {} for {spec}",
            state.len(),
            2 * n_nodes
        )));
    }
    if state.iter().any(|v| v.is_nan()) {
        return Err(Error::Contract("state contains NaN".into()));
    }
    let offset = match channel {
        Channel::Z1 => 0,
        Channel::Z2 => n_nodes,
    };
    let values: Vec<f64> = (0..n_nodes).map(|i| state[offset + i]).collect();
    let (m, n) = spec.factor_sizes();
    match format {
        PatternFormat::Csv => {
            let mut out = String::from("row,col,value\n");
            for (i, v) in values.iter().enumerate() {
                let coords = node_coords(spec, i)?;
                out.push_str(&format!("{},{},{:.16e}\n", coords.outer, coords.inner, v));
            }
            std::fs::write(path, out)?;
        }
        PatternFormat::Pgm => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            let pixels: Vec<u8> = values
                .iter()
                .map(|&v| {
                    if span <= f64::EPSILON * hi.abs().max(1.0) {
                        128
                    } else {
                        ((v - lo) / span * 255.0).round() as u8
                    }
                })
                .collect();
            let mut file = std::fs::File::create(path)?;
            write!(file, "P5\n{n} {m}\n255\n")?;
            file.write_all(&pixels)?;
        }
    }
    Ok(())
}
