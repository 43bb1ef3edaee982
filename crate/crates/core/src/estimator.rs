//! The gradient-flow estimator: recover unscaled relative positions and
//! relative attitudes from static body-frame bearings.
//!
//! A reference agent `iota` and a scale agent `kappa` are fixed. The unknowns
//! are, for every agent `i`, the unscaled relative position
//! `xi_i = T(psi_iota)^T (p_i - p_iota) / ||p_iota - p_kappa||` (expressed in
//! `iota`'s body frame, in units of the unknown `iota`-`kappa` distance) and
//! the relative attitude `theta_i = wrap(psi_iota - psi_i)`.
//!
//! Estimates `(xi_hat, theta_hat)` predict the bearing of edge `(i, j)` as
//! `bhat_ij = wrap(atan2(xi_hat_j - xi_hat_i) + theta_hat_i)`; at the true
//! state this reproduces every measured bearing. The estimator descends the
//! cost
//!
//! ```text
//! J = 1/2 ( k_e |e|^2 + k1 |xi_hat_iota|^2
//!           + k2 (|xi_hat_kappa|^2 - 1)^2 + k3 (1 - cos theta_hat_iota) )
//! ```
//!
//! where `e = wrap(b - bhat)` is the wrapped bearing error and the penalty
//! terms anchor the gauge freedoms (translation, scale, rotation of the
//! estimate frame). The flow is the exact antigradient `-grad J`, integrated
//! with a fixed-step scheme.

use nalgebra::{DVector, Vector2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::framework::{rotation_matrix, wrap_angle, Angle};
use crate::{DirectedGraph, Error, Result, Se2Framework};

/// Fixed-step integration scheme for the gradient flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    /// Classical fourth-order Runge-Kutta (default).
    #[default]
    Rk4,
    /// Forward Euler; kept for step-size studies and didactic comparison.
    ExplicitEuler,
}

impl std::fmt::Display for Integrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Integrator::Rk4 => "rk4",
            Integrator::ExplicitEuler => "explicit-euler",
        })
    }
}

pub const DEFAULT_K_E: f64 = 5.0;
pub const DEFAULT_K1: f64 = 100.0;
pub const DEFAULT_K2: f64 = 100.0;
pub const DEFAULT_K3: f64 = 100.0;
pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_FINAL: f64 = 10.0;
pub const DEFAULT_EPSILON_FLOOR: f64 = 1e-9;

/// Gains, anchors and discretization of one estimator run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    /// Reference agent: the estimate frame is its body frame.
    pub iota: usize,
    /// Scale agent: `|xi_hat_kappa|` is pinned to 1.
    pub kappa: usize,
    /// Weight of the bearing-error term.
    pub k_e: f64,
    /// Weight pinning `xi_hat_iota` to the origin.
    pub k1: f64,
    /// Weight pinning `|xi_hat_kappa|` to 1.
    pub k2: f64,
    /// Weight pinning `theta_hat_iota` to 0.
    pub k3: f64,
    /// Integration step (seconds).
    pub dt: f64,
    /// Horizon (seconds).
    pub t_final: f64,
    pub integrator: Integrator,
    /// Minimum allowed `|xi_hat_j - xi_hat_i|` on any edge; crossing it
    /// aborts the run (the bearing Jacobian blows up as estimates collide).
    pub epsilon_floor: f64,
}

impl EstimatorConfig {
    /// Default gains and discretization for the given anchor pair.
    pub fn new(iota: usize, kappa: usize) -> Self {
        Self {
            iota,
            kappa,
            k_e: DEFAULT_K_E,
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            k3: DEFAULT_K3,
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            integrator: Integrator::default(),
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        }
    }

    pub fn validate(&self, n_vertices: usize) -> Result<()> {
        let fail = |reason: String| Err(Error::InvalidConfig { reason });
        if self.iota >= n_vertices || self.kappa >= n_vertices {
            return fail(format!(
                "anchor indices iota={}, kappa={} must be < {n_vertices}",
                self.iota, self.kappa
            ));
        }
        if self.iota == self.kappa {
            return fail("iota and kappa must differ".into());
        }
        if !(self.k_e >= 0.0 && self.k1 >= 0.0 && self.k2 >= 0.0 && self.k3 >= 0.0) {
            return fail("gains must be nonnegative".into());
        }
        if !(self.dt > 0.0) {
            return fail(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final >= self.dt) {
            return fail(format!(
                "t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            ));
        }
        if !(self.epsilon_floor > 0.0) {
            return fail("epsilon_floor must be positive".into());
        }
        Ok(())
    }
}

/// The estimator unknowns: one unscaled relative position and one relative
/// attitude per agent.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub xi_hat: Vec<Vector2<f64>>,
    pub theta_hat: Vec<Angle>,
}

impl EstimatorState {
    pub fn n(&self) -> usize {
        self.xi_hat.len()
    }

    /// The exact state: true unscaled positions and relative attitudes.
    pub fn truth(f: &Se2Framework, iota: usize, kappa: usize) -> Result<Self> {
        Ok(Self {
            xi_hat: true_unscaled_positions(f, iota, kappa)?,
            theta_hat: true_relative_attitudes(f, iota)?,
        })
    }

    /// Flattens to `[xi_1x, xi_1y, ..., xi_nx, xi_ny, theta_1, ..., theta_n]`
    /// — the same ordering the rigidity matrices use.
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.n();
        let mut v = DVector::zeros(3 * n);
        for (i, xi) in self.xi_hat.iter().enumerate() {
            v[2 * i] = xi.x;
            v[2 * i + 1] = xi.y;
        }
        for (i, th) in self.theta_hat.iter().enumerate() {
            v[2 * n + i] = th.radians();
        }
        v
    }

    /// Inverse of [`Self::to_vector`]; attitude entries are wrapped.
    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        if v.len() % 3 != 0 {
            return Err(Error::CountMismatch {
                what: "flat estimator state",
                expected: 3 * (v.len() / 3),
                got: v.len(),
            });
        }
        let n = v.len() / 3;
        Ok(Self {
            xi_hat: (0..n).map(|i| Vector2::new(v[2 * i], v[2 * i + 1])).collect(),
            theta_hat: (0..n).map(|i| Angle::new(v[2 * n + i])).collect(),
        })
    }
}

/// Time-stamped record of one integration: one sample at `t = 0` plus one
/// per completed step. All columns have equal length; times are strictly
/// increasing.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryTrace {
    pub times: Vec<f64>,
    pub states: Vec<EstimatorState>,
    /// Wrapped bearing error `e(t)`, one length-`m` vector per sample.
    pub bearing_errors: Vec<DVector<f64>>,
    /// `e_p(t) = sum_i |xi_i - xi_hat_i(t)|`.
    pub cumulative_position_error: Vec<f64>,
    /// Cost `J(t)`.
    pub cost: Vec<f64>,
}

impl TrajectoryTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> Option<&EstimatorState> {
        self.states.last()
    }

    pub fn final_cumulative_position_error(&self) -> Option<f64> {
        self.cumulative_position_error.last().copied()
    }

    /// Largest absolute component of the final bearing error.
    pub fn final_max_abs_bearing_error(&self) -> Option<f64> {
        self.bearing_errors.last().map(|e| e.amax())
    }

    /// The largest single-step increase of the cost along the trace
    /// (`<= 0` means the descent was monotone). Zero for traces shorter
    /// than two samples.
    pub fn max_cost_increase(&self) -> f64 {
        self.cost
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0_f64, f64::max)
    }

    fn push(&mut self, t: f64, state: EstimatorState, e: DVector<f64>, ep: f64, j: f64) {
        self.times.push(t);
        self.states.push(state);
        self.bearing_errors.push(e);
        self.cumulative_position_error.push(ep);
        self.cost.push(j);
    }
}

/// True unscaled relative positions
/// `xi_i = T(psi_iota)^T (p_i - p_iota) / ||p_iota - p_kappa||`.
///
/// By construction `xi_iota = 0` and `|xi_kappa| = 1`.
pub fn true_unscaled_positions(
    f: &Se2Framework,
    iota: usize,
    kappa: usize,
) -> Result<Vec<Vector2<f64>>> {
    let n = f.n_vertices();
    if iota >= n || kappa >= n || iota == kappa {
        return Err(Error::InvalidConfig {
            reason: format!("invalid anchor pair iota={iota}, kappa={kappa} for n={n}"),
        });
    }
    let p = f.positions();
    let scale = (p[iota] - p[kappa]).norm();
    if scale <= 0.0 {
        return Err(Error::CoincidentAnchors);
    }
    let t_iota_t = rotation_matrix(f.attitudes()[iota]).transpose();
    Ok(p.iter()
        .map(|pi| t_iota_t * (pi - p[iota]) / scale)
        .collect())
}

/// True relative attitudes `theta_i = wrap(psi_iota - psi_i)`, the rotation
/// taking agent `i`'s frame to `iota`'s frame: `T(theta_i) = T(psi_i)^T T(psi_iota)`.
pub fn true_relative_attitudes(f: &Se2Framework, iota: usize) -> Result<Vec<Angle>> {
    let n = f.n_vertices();
    if iota >= n {
        return Err(Error::VertexOutOfRange {
            vertex: iota,
            n_vertices: n,
        });
    }
    let psi_iota = f.attitudes()[iota];
    Ok(f.attitudes()
        .iter()
        .map(|&psi_i| Angle::new(psi_iota.radians() - psi_i.radians()))
        .collect())
}

/// Predicted bearings from an estimate: for edge `k = (i, j)`,
/// `bhat_k = wrap(atan2(xi_hat_j - xi_hat_i) + theta_hat_i)`.
///
/// Errors with [`Error::EstimateCollapse`] if any edge's relative estimate
/// norm falls below `epsilon_floor`.
pub fn estimated_bearings(
    s: &EstimatorState,
    g: &DirectedGraph,
    epsilon_floor: f64,
) -> Result<DVector<f64>> {
    let mut bhat = DVector::zeros(g.n_edges());
    for (k, &(head, tail)) in g.edges().iter().enumerate() {
        let d = s.xi_hat[tail] - s.xi_hat[head];
        let norm = d.norm();
        if norm < epsilon_floor {
            return Err(Error::EstimateCollapse {
                edge: k,
                head,
                tail,
                norm,
            });
        }
        bhat[k] = wrap_angle(d.y.atan2(d.x) + s.theta_hat[head].radians());
    }
    Ok(bhat)
}

/// Wrapped bearing error `e_k = wrap(b_k - bhat_k)`, each entry in
/// `(-pi, pi]`.
pub fn bearing_error(
    measured: &DVector<f64>,
    s: &EstimatorState,
    g: &DirectedGraph,
    epsilon_floor: f64,
) -> Result<DVector<f64>> {
    if measured.len() != g.n_edges() {
        return Err(Error::CountMismatch {
            what: "measured bearings",
            expected: g.n_edges(),
            got: measured.len(),
        });
    }
    let bhat = estimated_bearings(s, g, epsilon_floor)?;
    Ok(DVector::from_iterator(
        g.n_edges(),
        measured
            .iter()
            .zip(bhat.iter())
            .map(|(&b, &bh)| wrap_angle(b - bh)),
    ))
}

fn cost_from_error(e: &DVector<f64>, s: &EstimatorState, cfg: &EstimatorConfig) -> f64 {
    let xi_iota = s.xi_hat[cfg.iota];
    let xi_kappa = s.xi_hat[cfg.kappa];
    let theta_iota = s.theta_hat[cfg.iota].radians();
    0.5 * (cfg.k_e * e.norm_squared()
        + cfg.k1 * xi_iota.norm_squared()
        + cfg.k2 * (xi_kappa.norm_squared() - 1.0).powi(2)
        + cfg.k3 * (1.0 - theta_iota.cos()))
}

/// The cost `J` (see the module docs). Nonnegative; zero exactly at states
/// that reproduce every bearing with the gauge anchors satisfied.
pub fn cost(
    s: &EstimatorState,
    measured: &DVector<f64>,
    cfg: &EstimatorConfig,
    g: &DirectedGraph,
) -> Result<f64> {
    cfg.validate(g.n_vertices())?;
    let e = bearing_error(measured, s, g, cfg.epsilon_floor)?;
    Ok(cost_from_error(&e, s, cfg))
}

/// The exact antigradient `-grad J` over the flat state
/// `[xi_1x, xi_1y, ..., theta_n]`, written into `out`.
///
/// The bearing term is `k_e * (grad bhat)^T e` with the Jacobian evaluated at
/// the *estimated* configuration: per edge `(i, j)` with `d = xi_j - xi_i`,
/// the position blocks are `±d^perp / |d|^2` and the attitude entry at `i`
/// is `+1`. The penalties contribute `-k1 xi_iota` (at `iota`),
/// `-2 k2 (|xi_kappa|^2 - 1) xi_kappa` (at `kappa`) and
/// `-(k3 / 2) sin theta_iota` (at `iota`'s attitude).
fn rhs_flat(
    state: &DVector<f64>,
    measured: &DVector<f64>,
    cfg: &EstimatorConfig,
    g: &DirectedGraph,
    out: &mut DVector<f64>,
) -> Result<()> {
    let n = g.n_vertices();
    out.fill(0.0);
    for (k, &(head, tail)) in g.edges().iter().enumerate() {
        let dx = state[2 * tail] - state[2 * head];
        let dy = state[2 * tail + 1] - state[2 * head + 1];
        let l2 = dx * dx + dy * dy;
        let norm = l2.sqrt();
        if norm < cfg.epsilon_floor {
            return Err(Error::EstimateCollapse {
                edge: k,
                head,
                tail,
                norm,
            });
        }
        let bhat = wrap_angle(dy.atan2(dx) + state[2 * n + head]);
        let w = cfg.k_e * wrap_angle(measured[k] - bhat);
        let px = -dy / l2;
        let py = dx / l2;
        out[2 * tail] += px * w;
        out[2 * tail + 1] += py * w;
        out[2 * head] -= px * w;
        out[2 * head + 1] -= py * w;
        out[2 * n + head] += w;
    }
    let (xk, yk) = (state[2 * cfg.kappa], state[2 * cfg.kappa + 1]);
    let pull = 2.0 * cfg.k2 * (xk * xk + yk * yk - 1.0);
    out[2 * cfg.iota] -= cfg.k1 * state[2 * cfg.iota];
    out[2 * cfg.iota + 1] -= cfg.k1 * state[2 * cfg.iota + 1];
    out[2 * cfg.kappa] -= pull * xk;
    out[2 * cfg.kappa + 1] -= pull * yk;
    out[2 * n + cfg.iota] -= 0.5 * cfg.k3 * state[2 * n + cfg.iota].sin();
    Ok(())
}

/// The gradient-flow right-hand side `-grad J` as a length-`3n` vector in
/// the `[positions | attitudes]` ordering.
pub fn gradient_flow_rhs(
    s: &EstimatorState,
    measured: &DVector<f64>,
    cfg: &EstimatorConfig,
    g: &DirectedGraph,
) -> Result<DVector<f64>> {
    cfg.validate(g.n_vertices())?;
    if measured.len() != g.n_edges() {
        return Err(Error::CountMismatch {
            what: "measured bearings",
            expected: g.n_edges(),
            got: measured.len(),
        });
    }
    let state = s.to_vector();
    let mut out = DVector::zeros(state.len());
    rhs_flat(&state, measured, cfg, g, &mut out)?;
    Ok(out)
}

/// `e_p = sum_i |truth_i - xi_hat_i|`: the cumulative position-estimate
/// error against the true unscaled positions.
pub fn cumulative_position_error(s: &EstimatorState, truth_xi: &[Vector2<f64>]) -> Result<f64> {
    if truth_xi.len() != s.n() {
        return Err(Error::CountMismatch {
            what: "truth positions",
            expected: s.n(),
            got: truth_xi.len(),
        });
    }
    Ok(s.xi_hat
        .iter()
        .zip(truth_xi.iter())
        .map(|(est, tru)| (tru - est).norm())
        .sum())
}

/// The true state plus independent uniform perturbations in
/// `[-magnitude, magnitude]`, drawn per position coordinate and per attitude
/// (radians), in agent order, positions first. Deterministic for a fixed
/// seed.
pub fn perturb_truth(
    f: &Se2Framework,
    iota: usize,
    kappa: usize,
    magnitude: f64,
    seed: u64,
) -> Result<EstimatorState> {
    if !(magnitude >= 0.0) {
        return Err(Error::InvalidConfig {
            reason: format!("perturbation magnitude must be nonnegative, got {magnitude}"),
        });
    }
    let mut state = EstimatorState::truth(f, iota, kappa)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for xi in &mut state.xi_hat {
        xi.x += rng.random_range(-magnitude..=magnitude);
        xi.y += rng.random_range(-magnitude..=magnitude);
    }
    for th in &mut state.theta_hat {
        *th = Angle::new(th.radians() + rng.random_range(-magnitude..=magnitude));
    }
    Ok(state)
}

fn wrap_attitudes(state: &mut DVector<f64>, n: usize) {
    for i in 0..n {
        state[2 * n + i] = wrap_angle(state[2 * n + i]);
    }
}

/// Integrates the gradient flow from `s0` over `[0, t_final]` with the
/// configured fixed-step scheme, recording a sample at `t = 0` and after
/// every step. Attitude entries are wrapped after each full step.
///
/// `truth_xi` is used only to fill the trace's `e_p` column — the flow
/// itself never sees it.
///
/// An estimate collapse (any edge's relative estimate shorter than the
/// floor) or a non-finite state aborts with [`Error::IntegrationAborted`],
/// which carries the abort time, the cause, and all samples recorded so far.
pub fn integrate(
    s0: &EstimatorState,
    measured: &DVector<f64>,
    cfg: &EstimatorConfig,
    g: &DirectedGraph,
    truth_xi: &[Vector2<f64>],
) -> Result<TrajectoryTrace> {
    let n = g.n_vertices();
    cfg.validate(n)?;
    if s0.n() != n {
        return Err(Error::CountMismatch {
            what: "initial state",
            expected: n,
            got: s0.n(),
        });
    }
    if measured.len() != g.n_edges() {
        return Err(Error::CountMismatch {
            what: "measured bearings",
            expected: g.n_edges(),
            got: measured.len(),
        });
    }
    let steps = (cfg.t_final / cfg.dt).round().max(1.0) as usize;

    let mut trace = TrajectoryTrace::default();
    let mut state = s0.to_vector();
    let dim = state.len();
    let mut k1 = DVector::zeros(dim);
    let mut k2 = DVector::zeros(dim);
    let mut k3 = DVector::zeros(dim);
    let mut k4 = DVector::zeros(dim);
    let mut stage = DVector::zeros(dim);

    let abort = |step: usize, cause: Error, trace: &TrajectoryTrace| Error::IntegrationAborted {
        time: step as f64 * cfg.dt,
        step,
        cause: Box::new(cause),
        partial: Box::new(trace.clone()),
    };

    // Sample at t = 0.
    let record =
        |t: f64, state: &DVector<f64>, trace: &mut TrajectoryTrace| -> Result<()> {
            let s = EstimatorState::from_vector(state)?;
            let e = bearing_error(measured, &s, g, cfg.epsilon_floor)?;
            let j = cost_from_error(&e, &s, cfg);
            let ep = cumulative_position_error(&s, truth_xi)?;
            trace.push(t, s, e, ep, j);
            Ok(())
        };
    record(0.0, &state, &mut trace).map_err(|c| abort(0, c, &trace))?;

    for step in 0..steps {
        let dt = cfg.dt;
        let result = (|| -> Result<()> {
            match cfg.integrator {
                Integrator::ExplicitEuler => {
                    rhs_flat(&state, measured, cfg, g, &mut k1)?;
                    state.axpy(dt, &k1, 1.0);
                }
                Integrator::Rk4 => {
                    rhs_flat(&state, measured, cfg, g, &mut k1)?;
                    stage.copy_from(&state);
                    stage.axpy(0.5 * dt, &k1, 1.0);
                    rhs_flat(&stage, measured, cfg, g, &mut k2)?;
                    stage.copy_from(&state);
                    stage.axpy(0.5 * dt, &k2, 1.0);
                    rhs_flat(&stage, measured, cfg, g, &mut k3)?;
                    stage.copy_from(&state);
                    stage.axpy(dt, &k3, 1.0);
                    rhs_flat(&stage, measured, cfg, g, &mut k4)?;
                    state.axpy(dt / 6.0, &k1, 1.0);
                    state.axpy(dt / 3.0, &k2, 1.0);
                    state.axpy(dt / 3.0, &k3, 1.0);
                    state.axpy(dt / 6.0, &k4, 1.0);
                }
            }
            wrap_attitudes(&mut state, n);
            if !state.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteState);
            }
            Ok(())
        })();
        result.map_err(|c| abort(step, c, &trace))?;
        let t = (step + 1) as f64 * cfg.dt;
        record(t, &state, &mut trace).map_err(|c| abort(step + 1, c, &trace))?;
    }
    Ok(trace)
}
