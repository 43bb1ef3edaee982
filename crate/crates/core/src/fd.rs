//! Finite-difference oracles for the analytic Jacobian and gradient.
//!
//! These are deliberately independent implementations: they evaluate only the
//! scalar maps (`b_G`, `J`) and differentiate them numerically, so agreement
//! with the closed-form matrices in [`crate::rigidity`] and
//! [`crate::estimator`] is a genuine cross-check rather than a tautology.

use nalgebra::{DMatrix, DVector};

use crate::estimator::{cost, EstimatorConfig, EstimatorState};
use crate::framework::{wrap_angle, Angle};
use crate::{DirectedGraph, Result, Se2Framework};

/// Rebuilds `f` with the flat coordinate vector
/// `[x_1, y_1, ..., x_n, y_n, psi_1, ..., psi_n]`.
fn framework_at(f: &Se2Framework, coords: &DVector<f64>) -> Result<Se2Framework> {
    let n = f.n_vertices();
    let positions = (0..n)
        .map(|i| nalgebra::Vector2::new(coords[2 * i], coords[2 * i + 1]))
        .collect();
    let attitudes = (0..n).map(|i| Angle::new(coords[2 * n + i])).collect();
    Se2Framework::new(f.graph().clone(), positions, attitudes)
}

fn flat_coordinates(f: &Se2Framework) -> DVector<f64> {
    let n = f.n_vertices();
    let mut v = DVector::zeros(3 * n);
    for (i, p) in f.positions().iter().enumerate() {
        v[2 * i] = p.x;
        v[2 * i + 1] = p.y;
    }
    for (i, a) in f.attitudes().iter().enumerate() {
        v[2 * n + i] = a.radians();
    }
    v
}

/// Central-difference Jacobian of the bearing rigidity function `b_G` over
/// the flat framework coordinates. Bearing differences are wrapped, so the
/// estimate is immune to the branch cut at `±pi`.
pub fn bearing_jacobian_fd(f: &Se2Framework, step: f64) -> Result<DMatrix<f64>> {
    let coords = flat_coordinates(f);
    let m = f.n_edges();
    let dim = coords.len();
    let mut jac = DMatrix::zeros(m, dim);
    let mut work = coords.clone();
    for col in 0..dim {
        work[col] = coords[col] + step;
        let plus = framework_at(f, &work)?.bearing_rigidity_function()?;
        work[col] = coords[col] - step;
        let minus = framework_at(f, &work)?.bearing_rigidity_function()?;
        work[col] = coords[col];
        for row in 0..m {
            jac[(row, col)] = wrap_angle(plus[row] - minus[row]) / (2.0 * step);
        }
    }
    Ok(jac)
}

/// Central-difference gradient of the estimator cost `J` over the flat
/// estimator state `[xi_1x, xi_1y, ..., theta_n]`.
pub fn cost_gradient_fd(
    s: &EstimatorState,
    measured: &DVector<f64>,
    cfg: &EstimatorConfig,
    g: &DirectedGraph,
    step: f64,
) -> Result<DVector<f64>> {
    let flat = s.to_vector();
    let dim = flat.len();
    let mut grad = DVector::zeros(dim);
    let mut work = flat.clone();
    for col in 0..dim {
        work[col] = flat[col] + step;
        let plus = cost(&EstimatorState::from_vector(&work)?, measured, cfg, g)?;
        work[col] = flat[col] - step;
        let minus = cost(&EstimatorState::from_vector(&work)?, measured, cfg, g)?;
        work[col] = flat[col];
        grad[col] = (plus - minus) / (2.0 * step);
    }
    Ok(grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{gradient_flow_rhs, perturb_truth};
    use crate::rigidity::bearing_rigidity_matrix;
    use nalgebra::Vector2;

    fn mixed_close(a: f64, b: f64, rel: f64, abs: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) + abs
    }

    fn sample_framework() -> Se2Framework {
        let g = DirectedGraph::new(4, vec![(0, 1), (1, 0), (1, 2), (2, 3), (3, 0), (0, 2)])
            .unwrap();
        Se2Framework::new(
            g,
            vec![
                Vector2::new(0.1, -0.4),
                Vector2::new(1.3, 0.2),
                Vector2::new(0.8, 1.5),
                Vector2::new(-0.9, 0.7),
            ],
            vec![
                Angle::new(0.3),
                Angle::new(-1.2),
                Angle::new(2.9),
                Angle::new(-2.9),
            ],
        )
        .unwrap()
    }

    #[test]
    fn fd_jacobian_matches_closed_form() {
        let f = sample_framework();
        let analytic = bearing_rigidity_matrix(&f).unwrap();
        let fd = bearing_jacobian_fd(&f, 1e-5).unwrap();
        for r in 0..analytic.nrows() {
            for c in 0..analytic.ncols() {
                assert!(
                    mixed_close(analytic[(r, c)], fd[(r, c)], 1e-5, 1e-7),
                    "({r},{c}): analytic {} vs fd {}",
                    analytic[(r, c)],
                    fd[(r, c)]
                );
            }
        }
    }

    #[test]
    fn fd_gradient_matches_negated_rhs() {
        let f = sample_framework();
        let cfg = EstimatorConfig::new(0, 2);
        let measured = f.bearing_rigidity_function().unwrap();
        let s = perturb_truth(&f, cfg.iota, cfg.kappa, 0.15, 5).unwrap();
        let rhs = gradient_flow_rhs(&s, &measured, &cfg, f.graph()).unwrap();
        let fd = cost_gradient_fd(&s, &measured, &cfg, f.graph(), 1e-6).unwrap();
        for i in 0..rhs.len() {
            assert!(
                mixed_close(-rhs[i], fd[i], 1e-5, 1e-7),
                "component {i}: -rhs {} vs fd {}",
                -rhs[i],
                fd[i]
            );
        }
    }
}
