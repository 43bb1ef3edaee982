//! A built-in diagnostic battery (`se2-rigidity selftest`).
//!
//! Each check re-verifies a core identity on freshly drawn random instances:
//! closed-form Jacobian/gradient against finite differences, the structural
//! identities of the factor matrices, and the estimator's equilibrium at the
//! truth. Useful as a quick install check and as a guard against numeric
//! regressions on new targets.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::estimator::{
    estimated_bearings, gradient_flow_rhs, perturb_truth, EstimatorConfig, EstimatorState,
};
use crate::fd::{bearing_jacobian_fd, cost_gradient_fd};
use crate::framework::wrap_angle;
use crate::random::random_framework;
use crate::rigidity::{
    bearing_rigidity_matrix, coordinated_rotation_vector, edge_length_squared_matrix,
    parallel_rigidity_matrix,
};
use crate::{Result, Se2Framework};

/// Outcome of one named check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst-case deviation observed and the bound it was held to.
    pub detail: String,
}

fn check<F>(name: &'static str, bound: f64, worst: F) -> CheckResult
where
    F: FnOnce() -> Result<f64>,
{
    match worst() {
        Ok(w) => CheckResult {
            name,
            passed: w <= bound,
            detail: format!("worst deviation {w:.3e} (bound {bound:.1e})"),
        },
        Err(e) => CheckResult {
            name,
            passed: false,
            detail: format!("errored: {e}"),
        },
    }
}

fn random_instance(rng: &mut ChaCha8Rng) -> Result<Se2Framework> {
    let n = rng.random_range(3..=7);
    random_framework(rng, n, true)
}

fn anchors(f: &Se2Framework, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let n = f.n_vertices();
    let iota = rng.random_range(0..n);
    let mut kappa = rng.random_range(0..n - 1);
    if kappa >= iota {
        kappa += 1;
    }
    (iota, kappa)
}

/// Runs the whole battery; results come back in a fixed order.
pub fn run_all() -> Vec<CheckResult> {
    let mut results = Vec::new();

    results.push(check("bearing-jacobian-vs-finite-differences", 1e-5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        let mut worst: f64 = 0.0;
        for _ in 0..25 {
            let f = random_instance(&mut rng)?;
            let analytic = bearing_rigidity_matrix(&f)?;
            let fd = bearing_jacobian_fd(&f, 1e-5)?;
            for r in 0..analytic.nrows() {
                for c in 0..analytic.ncols() {
                    let (a, b) = (analytic[(r, c)], fd[(r, c)]);
                    worst = worst.max((a - b).abs() / (a.abs().max(b.abs()) + 1e-2));
                }
            }
        }
        Ok(worst)
    }));

    results.push(check("cost-gradient-vs-finite-differences", 1e-5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(202);
        let mut worst: f64 = 0.0;
        for trial in 0..25 {
            let f = random_instance(&mut rng)?;
            let (iota, kappa) = anchors(&f, &mut rng);
            let cfg = EstimatorConfig::new(iota, kappa);
            let measured = f.bearing_rigidity_function()?;
            let s = perturb_truth(&f, iota, kappa, 0.1, 1000 + trial)?;
            let rhs = gradient_flow_rhs(&s, &measured, &cfg, f.graph())?;
            let fd = cost_gradient_fd(&s, &measured, &cfg, f.graph(), 1e-6)?;
            for i in 0..rhs.len() {
                let (a, b) = (-rhs[i], fd[i]);
                worst = worst.max((a - b).abs() / (a.abs().max(b.abs()) + 1e-2));
            }
        }
        Ok(worst)
    }));

    results.push(check("coordinated-rotation-identities", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(303);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let f = random_instance(&mut rng)?;
            let z = coordinated_rotation_vector(&f);
            let n = f.n_vertices();
            let zp = z.rows(0, 2 * n).into_owned();
            let r_par = parallel_rigidity_matrix(&f)?;
            let d = edge_length_squared_matrix(&f)?;
            let ones = nalgebra::DVector::from_element(f.n_edges(), 1.0);
            worst = worst.max((r_par * zp - d * ones).amax());
            worst = worst.max((bearing_rigidity_matrix(&f)? * &z).amax());
        }
        Ok(worst)
    }));

    results.push(check("out-incidence-structure", 0.0, || {
        let mut rng = ChaCha8Rng::seed_from_u64(404);
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let f = random_instance(&mut rng)?;
            let ebar = f.graph().out_incidence_matrix();
            // Each column of Ebar (row of Ebar^T) selects exactly one head.
            for k in 0..f.n_edges() {
                let col = ebar.column(k);
                worst = worst.max((col.sum() - 1.0).abs());
                worst = worst.max((col.amax() - 1.0).abs());
            }
        }
        Ok(worst)
    }));

    results.push(check("truth-is-equilibrium", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(505);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let f = random_instance(&mut rng)?;
            let (iota, kappa) = anchors(&f, &mut rng);
            let cfg = EstimatorConfig::new(iota, kappa);
            let truth = EstimatorState::truth(&f, iota, kappa)?;
            let measured = f.bearing_rigidity_function()?;
            worst = worst.max(gradient_flow_rhs(&truth, &measured, &cfg, f.graph())?.amax());
        }
        Ok(worst)
    }));

    results.push(check("truth-reproduces-measured-bearings", 1e-10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(606);
        let mut worst: f64 = 0.0;
        for _ in 0..10 {
            let f = random_instance(&mut rng)?;
            let (iota, kappa) = anchors(&f, &mut rng);
            let truth = EstimatorState::truth(&f, iota, kappa)?;
            let b = f.bearing_rigidity_function()?;
            let bhat = estimated_bearings(&truth, f.graph(), 1e-9)?;
            for k in 0..b.len() {
                worst = worst.max(wrap_angle(b[k] - bhat[k]).abs());
            }
        }
        Ok(worst)
    }));

    results
}

/// True iff every check in `results` passed.
pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}
