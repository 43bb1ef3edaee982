//! Text artifacts: the trajectory CSV and the human-readable reports.
//!
//! The CSV writer is byte-deterministic: a given trace always renders to the
//! identical byte sequence (fixed column order, fixed `{:.12e}` formatting,
//! `\n` line endings), so repeated runs with the same seed can be compared
//! with a plain file diff.

use std::fmt::Write as _;
use std::path::Path;

use crate::estimator::{EstimatorConfig, TrajectoryTrace};
use crate::rigidity::RigidityReport;
use crate::{Error, Result, Se2Framework};

/// Renders a trace as CSV with header
/// `t,J,e_p,e_1,...,e_m,xi_1x,xi_1y,...,xi_nx,xi_ny,theta_1,...,theta_n`.
///
/// Every value is written as `{:.12e}` (13 significant digits), enough to
/// round-trip the trajectory for plotting and regression comparison. An
/// empty trace renders as the header line only.
pub fn trace_csv_string(trace: &TrajectoryTrace, n: usize, m: usize) -> Result<String> {
    let mut out = String::new();
    out.push_str("t,J,e_p");
    for k in 1..=m {
        let _ = write!(out, ",e_{k}");
    }
    for i in 1..=n {
        let _ = write!(out, ",xi_{i}x,xi_{i}y");
    }
    for i in 1..=n {
        let _ = write!(out, ",theta_{i}");
    }
    out.push('\n');

    for row in 0..trace.len() {
        let state = &trace.states[row];
        let errors = &trace.bearing_errors[row];
        if state.n() != n || errors.len() != m {
            return Err(Error::CountMismatch {
                what: "trace row shape",
                expected: 3 + m + 3 * n,
                got: 3 + errors.len() + 3 * state.n(),
            });
        }
        let _ = write!(
            out,
            "{:.12e},{:.12e},{:.12e}",
            trace.times[row], trace.cost[row], trace.cumulative_position_error[row]
        );
        for e in errors.iter() {
            let _ = write!(out, ",{e:.12e}");
        }
        for xi in &state.xi_hat {
            let _ = write!(out, ",{:.12e},{:.12e}", xi.x, xi.y);
        }
        for th in &state.theta_hat {
            let _ = write!(out, ",{:.12e}", th.radians());
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes [`trace_csv_string`] to `path`.
pub fn write_trace_csv(
    trace: &TrajectoryTrace,
    n: usize,
    m: usize,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, trace_csv_string(trace, n, m)?)?;
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Human-readable rigidity report.
pub fn analysis_report_text(name: &str, f: &Se2Framework, report: &RigidityReport) -> String {
    let n = f.n_vertices();
    let m = f.n_edges();
    let mut out = String::new();
    let _ = writeln!(out, "rigidity analysis: {name}");
    let _ = writeln!(out, "agents: {n}");
    let _ = writeln!(out, "directed edges: {m}");
    let _ = writeln!(out, "rank tolerance (relative): {:e}", report.tolerance_used);
    out.push('\n');
    let _ = writeln!(
        out,
        "bearing rigidity matrix: {m} x {}, rank {} (rigid iff rank = 3n - 4 = {}), nullity {}",
        3 * n,
        report.bearing_rank,
        3 * n - 4,
        report.bearing_nullity
    );
    let _ = writeln!(
        out,
        "parallel rigidity matrix: {m} x {}, rank {} (target 2n - 3 = {})",
        2 * n,
        report.parallel_rank,
        2 * n - 3
    );
    let _ = writeln!(
        out,
        "coordinated rotation subspace dimension: {}",
        report.coord_rot_dim
    );
    let _ = writeln!(
        out,
        "every agent measures at least one bearing: {}",
        yes_no(report.out_degree_ok)
    );
    out.push('\n');
    let _ = writeln!(
        out,
        "infinitesimally rigid (bearing rank test):    {}",
        yes_no(report.rigid_by_theorem)
    );
    let _ = writeln!(
        out,
        "infinitesimally rigid (parallel/rotation test): {}",
        yes_no(report.rigid_by_corollary)
    );
    out
}

/// Human-readable summary of one estimator run. Agent ids are printed
/// 1-based to match scenario files.
pub fn estimation_report_text(
    name: &str,
    cfg: &EstimatorConfig,
    seed: u64,
    magnitude: f64,
    n: usize,
    m: usize,
    trace: &TrajectoryTrace,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "estimation run: {name}");
    let _ = writeln!(out, "agents: {n}, directed edges: {m}");
    let _ = writeln!(
        out,
        "reference agent iota: {}, scale agent kappa: {} (1-based ids)",
        cfg.iota + 1,
        cfg.kappa + 1
    );
    let _ = writeln!(
        out,
        "gains: k_e = {}, k1 = {}, k2 = {}, k3 = {}",
        cfg.k_e, cfg.k1, cfg.k2, cfg.k3
    );
    let _ = writeln!(
        out,
        "integrator: {}, dt = {}, horizon = {}",
        cfg.integrator, cfg.dt, cfg.t_final
    );
    let _ = writeln!(
        out,
        "initial state: truth perturbed by up to {magnitude} (seed {seed})"
    );
    out.push('\n');
    let _ = writeln!(out, "samples recorded: {}", trace.len());
    if let (Some(&j0), Some(&jf)) = (trace.cost.first(), trace.cost.last()) {
        let _ = writeln!(out, "cost J(0):                    {j0:.6e}");
        let _ = writeln!(out, "cost J(t_final):              {jf:.6e}");
    }
    let _ = writeln!(
        out,
        "max single-step cost increase: {:.6e}",
        trace.max_cost_increase()
    );
    if let Some(ep) = trace.final_cumulative_position_error() {
        let _ = writeln!(out, "final position error e_p:     {ep:.6e}");
    }
    if let Some(e) = trace.final_max_abs_bearing_error() {
        let _ = writeln!(out, "final max |bearing error|:    {e:.6e}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{integrate, perturb_truth, true_unscaled_positions};
    use crate::framework::Angle;
    use crate::rigidity::analyze;
    use crate::DirectedGraph;
    use nalgebra::Vector2;

    fn tiny_run() -> (Se2Framework, EstimatorConfig, TrajectoryTrace) {
        let g = DirectedGraph::complete(3).unwrap();
        let f = Se2Framework::new(
            g,
            vec![
                Vector2::new(0.0, 0.0),
                Vector2::new(1.0, 0.0),
                Vector2::new(0.5, 0.8),
            ],
            vec![Angle::new(0.2), Angle::new(-0.3), Angle::new(1.1)],
        )
        .unwrap();
        let mut cfg = EstimatorConfig::new(0, 1);
        cfg.t_final = 0.01;
        let s0 = perturb_truth(&f, 0, 1, 0.05, 4).unwrap();
        let measured = f.bearing_rigidity_function().unwrap();
        let truth_xi = true_unscaled_positions(&f, 0, 1).unwrap();
        let trace = integrate(&s0, &measured, &cfg, f.graph(), &truth_xi).unwrap();
        (f, cfg, trace)
    }

    #[test]
    fn csv_header_and_shape() {
        let (f, _, trace) = tiny_run();
        let csv = trace_csv_string(&trace, f.n_vertices(), f.n_edges()).unwrap();
        let mut lines = csv.lines();
        let header = lines.next().unwrap();
        assert_eq!(
            header,
            "t,J,e_p,e_1,e_2,e_3,e_4,e_5,e_6,\
             xi_1x,xi_1y,xi_2x,xi_2y,xi_3x,xi_3y,theta_1,theta_2,theta_3"
        );
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), trace.len());
        let cols = header.split(',').count();
        for row in rows {
            assert_eq!(row.split(',').count(), cols);
        }
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn csv_is_byte_deterministic_and_high_precision() {
        let (f, _, trace) = tiny_run();
        let a = trace_csv_string(&trace, f.n_vertices(), f.n_edges()).unwrap();
        let b = trace_csv_string(&trace, f.n_vertices(), f.n_edges()).unwrap();
        assert_eq!(a, b);
        // First data value is t = 0 rendered in scientific notation.
        let first = a.lines().nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(first, "0.000000000000e0");
        // Every numeric field carries 12 digits after the point.
        for field in a.lines().nth(2).unwrap().split(',') {
            let mantissa = field.split('e').next().unwrap();
            let digits = mantissa.split('.').nth(1).unwrap();
            assert_eq!(digits.len(), 12, "field {field}");
        }
    }

    #[test]
    fn empty_trace_renders_header_only() {
        let trace = TrajectoryTrace::default();
        let csv = trace_csv_string(&trace, 2, 1).unwrap();
        assert_eq!(csv, "t,J,e_p,e_1,xi_1x,xi_1y,xi_2x,xi_2y,theta_1,theta_2\n");
    }

    #[test]
    fn report_texts_mention_the_essentials() {
        let (f, cfg, trace) = tiny_run();
        let report = analyze(&f, 1e-8).unwrap();
        let text = analysis_report_text("demo", &f, &report);
        assert!(text.contains("rigidity analysis: demo"));
        assert!(text.contains("agents: 3"));
        assert!(text.contains(&format!("rank {}", report.bearing_rank)));

        let text = estimation_report_text("demo", &cfg, 7, 0.05, 3, 6, &trace);
        assert!(text.contains("seed 7"));
        assert!(text.contains("iota: 1, scale agent kappa: 2"));
        assert!(text.contains("integrator: rk4"));
    }
}
