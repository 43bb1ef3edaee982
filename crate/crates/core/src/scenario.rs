//! Scenario files: a small TOML format describing one framework plus the
//! analysis and estimation settings to run on it.
//!
//! Agent ids, `iota`, `kappa` and edge endpoints are 1-based in files (and
//! in all rendered reports); the library's 0-based indices never appear on
//! disk. Attitudes are stored in the unit named by `angle_unit` — degrees
//! unless the file says `angle_unit = "radians"`.
//!
//! ```toml
//! name = "triangle"
//! angle_unit = "degrees"
//! iota = 1
//! kappa = 2
//! edges = [[1, 2], [2, 3], [3, 1]]
//!
//! [[agents]]
//! id = 1
//! x = 0.0
//! y = 0.0
//! psi = 45.0
//! # ... one block per agent ...
//!
//! [gains]        # optional, defaults shown in `Gains::default`
//! [sim]          # optional: dt, t_final, integrator, seed, ...
//! [analysis]     # optional: rank_tolerance
//! ```

use std::path::Path;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::estimator::{
    integrate, perturb_truth, true_unscaled_positions, EstimatorConfig, Integrator,
    DEFAULT_DT, DEFAULT_EPSILON_FLOOR, DEFAULT_K1, DEFAULT_K2, DEFAULT_K3, DEFAULT_K_E,
    DEFAULT_T_FINAL,
};
use crate::framework::Angle;
use crate::output::{analysis_report_text, estimation_report_text, write_trace_csv};
use crate::plot::{bearing_error_svg, position_error_svg, trajectory_svg};
use crate::rigidity::{analyze, RigidityReport, DEFAULT_RANK_TOLERANCE};
use crate::{DirectedGraph, Error, Result, Se2Framework};

/// Unit of the `psi` fields in a scenario file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    #[default]
    Degrees,
    Radians,
}

impl AngleUnit {
    fn to_radians(self, value: f64) -> f64 {
        match self {
            AngleUnit::Degrees => value.to_radians(),
            AngleUnit::Radians => value,
        }
    }
}

/// One `[[agents]]` row. `psi` is in the file's `angle_unit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentRow {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub psi: f64,
}

/// `[gains]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Gains {
    pub k_e: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
}

impl Default for Gains {
    fn default() -> Self {
        Self {
            k_e: DEFAULT_K_E,
            k1: DEFAULT_K1,
            k2: DEFAULT_K2,
            k3: DEFAULT_K3,
        }
    }
}

/// `[sim]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Sim {
    pub dt: f64,
    pub t_final: f64,
    pub integrator: Integrator,
    /// Half-width of the uniform perturbation applied to the truth to get
    /// the initial estimate.
    pub perturbation_magnitude: f64,
    pub seed: u64,
    pub epsilon_floor: f64,
}

impl Default for Sim {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            integrator: Integrator::default(),
            perturbation_magnitude: 0.1,
            seed: 0,
            epsilon_floor: DEFAULT_EPSILON_FLOOR,
        }
    }
}

/// `[analysis]` section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSettings {
    pub rank_tolerance: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            rank_tolerance: DEFAULT_RANK_TOLERANCE,
        }
    }
}

/// A complete scenario file. Field order matters for TOML output: scalar
/// and array fields come before the table sections.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub angle_unit: AngleUnit,
    /// Reference agent (1-based).
    pub iota: u32,
    /// Scale agent (1-based).
    pub kappa: u32,
    /// Directed edges as `[head, tail]` pairs of 1-based agent ids; the
    /// head measures the bearing of the tail.
    pub edges: Vec<(u32, u32)>,
    pub agents: Vec<AgentRow>,
    #[serde(default)]
    pub gains: Gains,
    #[serde(default)]
    pub sim: Sim,
    #[serde(default)]
    pub analysis: AnalysisSettings,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?)?;
        Ok(())
    }

    pub fn n_agents(&self) -> usize {
        self.agents.len()
    }

    /// Structural validation: ids are exactly `1..=n` (in any order), the
    /// anchors are two distinct agents, edges reference known agents with
    /// no self-loops or duplicates, and all numeric settings are sane.
    pub fn validate(&self) -> Result<()> {
        let invalid = |field: &str, reason: String| {
            Err(Error::ScenarioInvalid {
                field: field.to_string(),
                reason,
            })
        };
        let n = self.agents.len();
        if n < 2 {
            return invalid("agents", format!("need at least 2 agents, found {n}"));
        }
        let mut ids: Vec<u32> = self.agents.iter().map(|a| a.id).collect();
        ids.sort_unstable();
        for (expected, &id) in (1..=n as u32).zip(ids.iter()) {
            if id != expected {
                return invalid(
                    "agents",
                    format!("ids must be exactly 1..={n}, found id {id}"),
                );
            }
        }
        for a in &self.agents {
            if !(a.x.is_finite() && a.y.is_finite() && a.psi.is_finite()) {
                return invalid("agents", format!("agent {} has non-finite fields", a.id));
            }
        }
        let in_range = |id: u32| (1..=n as u32).contains(&id);
        for (which, id) in [("iota", self.iota), ("kappa", self.kappa)] {
            if !in_range(id) {
                return invalid(which, format!("{which} = {id} is not an agent id (1..={n})"));
            }
        }
        if self.iota == self.kappa {
            return invalid("kappa", "iota and kappa must be different agents".to_string());
        }
        if self.edges.is_empty() {
            return invalid("edges", "at least one directed edge is required".to_string());
        }
        for (k, &(head, tail)) in self.edges.iter().enumerate() {
            if !in_range(head) || !in_range(tail) {
                return invalid(
                    "edges",
                    format!("edge {} = [{head}, {tail}] references an unknown agent", k + 1),
                );
            }
            if head == tail {
                return invalid(
                    "edges",
                    format!("edge {} = [{head}, {tail}] is a self-loop", k + 1),
                );
            }
            if self.edges[..k].contains(&(head, tail)) {
                return invalid(
                    "edges",
                    format!("edge {} = [{head}, {tail}] is a duplicate", k + 1),
                );
            }
        }
        if !(self.analysis.rank_tolerance.is_finite() && self.analysis.rank_tolerance > 0.0) {
            return invalid(
                "analysis.rank_tolerance",
                format!("must be positive and finite, got {}", self.analysis.rank_tolerance),
            );
        }
        if !(self.sim.perturbation_magnitude >= 0.0) {
            return invalid(
                "sim.perturbation_magnitude",
                format!("must be nonnegative, got {}", self.sim.perturbation_magnitude),
            );
        }
        // Gains and discretization share the estimator's own constraints.
        self.estimator_config().validate(n)?;
        Ok(())
    }

    /// Builds the framework, converting attitudes to radians and ids to
    /// 0-based indices. Agents may appear in any order in the file.
    pub fn framework(&self) -> Result<Se2Framework> {
        self.validate()?;
        let n = self.agents.len();
        let mut positions = vec![Vector2::zeros(); n];
        let mut attitudes = vec![Angle::new(0.0); n];
        for a in &self.agents {
            let i = (a.id - 1) as usize;
            positions[i] = Vector2::new(a.x, a.y);
            attitudes[i] = Angle::new(self.angle_unit.to_radians(a.psi));
        }
        let edges = self
            .edges
            .iter()
            .map(|&(h, t)| ((h - 1) as usize, (t - 1) as usize))
            .collect();
        Se2Framework::new(DirectedGraph::new(n, edges)?, positions, attitudes)
    }

    /// The estimator configuration this scenario asks for (0-based anchors).
    pub fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            iota: self.iota.saturating_sub(1) as usize,
            kappa: self.kappa.saturating_sub(1) as usize,
            k_e: self.gains.k_e,
            k1: self.gains.k1,
            k2: self.gains.k2,
            k3: self.gains.k3,
            dt: self.sim.dt,
            t_final: self.sim.t_final,
            integrator: self.sim.integrator,
            epsilon_floor: self.sim.epsilon_floor,
        }
    }
}

/// The two built-in demo scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemoKind {
    /// Six agents, complete sensing graph: infinitesimally rigid, and the
    /// estimator recovers the configuration from any nearby start.
    Rigid,
    /// Same placement, but agents 5 and 6 only get *seen* (out-degree 0):
    /// they can rotate freely and their distance along the line of sight is
    /// unobservable, so the framework is not rigid and estimation stalls
    /// away from the truth.
    RotoFlexible,
}

impl DemoKind {
    pub fn name(self) -> &'static str {
        match self {
            DemoKind::Rigid => "rigid-demo",
            DemoKind::RotoFlexible => "roto-flexible-demo",
        }
    }
}

/// A fixed six-agent placement with anchors on (nearly) opposite sides of
/// the formation — that spread keeps the slowest mode of the gradient flow
/// fast enough to converge well within the default horizon.
fn demo_agents() -> Vec<AgentRow> {
    let coords: [(f64, f64, f64); 6] = [
        (1.0375, 0.1192, -0.7701),
        (0.5827, 0.7836, -0.1725),
        (-0.56, 0.9781, 0.0143),
        (-1.1484, 0.0964, 0.1681),
        (-0.4109, -0.8756, 1.5567),
        (0.4409, -0.9325, 0.9194),
    ];
    coords
        .iter()
        .enumerate()
        .map(|(i, &(x, y, psi))| AgentRow {
            id: i as u32 + 1,
            x,
            y,
            psi,
        })
        .collect()
}

fn all_ordered_pairs(ids: std::ops::RangeInclusive<u32>) -> Vec<(u32, u32)> {
    let ids: Vec<u32> = ids.collect();
    let mut edges = Vec::new();
    for &head in &ids {
        for &tail in &ids {
            if head != tail {
                edges.push((head, tail));
            }
        }
    }
    edges
}

/// The built-in demos (see [`DemoKind`]). Both use the same placement and
/// anchors `iota = 1`, `kappa = 4`; they differ only in the sensing graph.
pub fn builtin_demo(kind: DemoKind) -> Scenario {
    let edges = match kind {
        DemoKind::Rigid => all_ordered_pairs(1..=6),
        DemoKind::RotoFlexible => {
            let mut edges = all_ordered_pairs(1..=4);
            edges.push((3, 5));
            edges.push((4, 6));
            edges
        }
    };
    Scenario {
        name: kind.name().to_string(),
        angle_unit: AngleUnit::Radians,
        iota: 1,
        kappa: 4,
        edges,
        agents: demo_agents(),
        gains: Gains::default(),
        sim: Sim::default(),
        analysis: AnalysisSettings::default(),
    }
}

/// Result of [`run_analysis`]: the report plus ready-to-print renderings.
#[derive(Debug, Clone)]
pub struct AnalysisRun {
    pub report: RigidityReport,
    pub text: String,
    pub json: serde_json::Value,
}

/// Analyzes the scenario's framework with its configured rank tolerance.
pub fn run_analysis(scenario: &Scenario) -> Result<AnalysisRun> {
    let f = scenario.framework()?;
    let report = analyze(&f, scenario.analysis.rank_tolerance)?;
    let text = analysis_report_text(&scenario.name, &f, &report);
    let mut json = report.to_json();
    json["name"] = serde_json::Value::String(scenario.name.clone());
    json["n_agents"] = serde_json::Value::from(f.n_vertices());
    json["n_edges"] = serde_json::Value::from(f.n_edges());
    Ok(AnalysisRun { report, text, json })
}

/// Key numbers of a finished estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationSummary {
    pub samples: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub max_cost_increase: f64,
    pub final_cumulative_position_error: f64,
    pub final_max_abs_bearing_error: f64,
}

impl EstimationSummary {
    /// The run counts as converged when the final cumulative position error
    /// is at or below `ep_threshold`.
    pub fn converged(&self, ep_threshold: f64) -> bool {
        self.final_cumulative_position_error <= ep_threshold
    }
}

/// Runs the scenario's estimation and writes all artifacts into `out_dir`
/// (created if missing): `trace.csv`, `report.txt`, `e.svg`, `ep.svg`,
/// `traj.svg`.
///
/// If the integration aborts, the partial trace is still flushed to
/// `trace.csv` for post-mortem inspection before the error is returned.
pub fn run_estimation(scenario: &Scenario, out_dir: &Path) -> Result<EstimationSummary> {
    let f = scenario.framework()?;
    let cfg = scenario.estimator_config();
    let (n, m) = (f.n_vertices(), f.n_edges());
    std::fs::create_dir_all(out_dir)?;

    let measured = f.bearing_rigidity_function()?;
    let truth_xi = true_unscaled_positions(&f, cfg.iota, cfg.kappa)?;
    let s0 = perturb_truth(
        &f,
        cfg.iota,
        cfg.kappa,
        scenario.sim.perturbation_magnitude,
        scenario.sim.seed,
    )?;
    let trace = match integrate(&s0, &measured, &cfg, f.graph(), &truth_xi) {
        Ok(trace) => trace,
        Err(err) => {
            if let Error::IntegrationAborted { partial, .. } = &err {
                write_trace_csv(partial, n, m, &out_dir.join("trace.csv"))?;
            }
            return Err(err);
        }
    };

    write_trace_csv(&trace, n, m, &out_dir.join("trace.csv"))?;
    let report = estimation_report_text(
        &scenario.name,
        &cfg,
        scenario.sim.seed,
        scenario.sim.perturbation_magnitude,
        n,
        m,
        &trace,
    );
    std::fs::write(out_dir.join("report.txt"), report)?;
    std::fs::write(out_dir.join("e.svg"), bearing_error_svg(&trace))?;
    std::fs::write(out_dir.join("ep.svg"), position_error_svg(&trace))?;
    std::fs::write(out_dir.join("traj.svg"), trajectory_svg(&trace, &truth_xi))?;

    Ok(EstimationSummary {
        samples: trace.len(),
        initial_cost: trace.cost.first().copied().unwrap_or(f64::NAN),
        final_cost: trace.cost.last().copied().unwrap_or(f64::NAN),
        max_cost_increase: trace.max_cost_increase(),
        final_cumulative_position_error: trace
            .final_cumulative_position_error()
            .unwrap_or(f64::NAN),
        final_max_abs_bearing_error: trace.final_max_abs_bearing_error().unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn triangle_toml() -> &'static str {
        r#"
name = "triangle"
iota = 1
kappa = 2
edges = [[1, 2], [2, 3], [3, 1]]

[[agents]]
id = 1
x = 0.0
y = 0.0
psi = 90.0

[[agents]]
id = 2
x = 1.0
y = 0.0
psi = 0.0

[[agents]]
id = 3
x = 0.5
y = 1.0
psi = -45.0
"#
    }

    #[test]
    fn parses_with_defaults_and_converts_degrees() {
        let s = Scenario::from_toml_str(triangle_toml()).unwrap();
        assert_eq!(s.angle_unit, AngleUnit::Degrees);
        assert_eq!(s.gains, Gains::default());
        assert_eq!(s.sim.seed, 0);
        assert_abs_diff_eq!(s.sim.dt, 1e-3);
        let f = s.framework().unwrap();
        assert_abs_diff_eq!(f.attitudes()[0].radians(), PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f.attitudes()[2].radians(), -PI / 4.0, epsilon = 1e-15);
        assert_eq!(f.graph().edges()[0], (0, 1));
    }

    #[test]
    fn radians_unit_is_taken_verbatim() {
        let text = triangle_toml()
            .replace("name = \"triangle\"", "name = \"t\"\nangle_unit = \"radians\"");
        let s = Scenario::from_toml_str(&text).unwrap();
        let f = s.framework().unwrap();
        // psi = 90 is now 90 radians, wrapped into (-pi, pi].
        assert_abs_diff_eq!(
            f.attitudes()[0].radians(),
            crate::framework::wrap_angle(90.0),
            epsilon = 1e-12
        );
    }

    #[test]
    fn toml_round_trip_is_exact() {
        let s = builtin_demo(DemoKind::Rigid);
        let text = s.to_toml_string().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(s, back);

        let s = Scenario::from_toml_str(triangle_toml()).unwrap();
        let back = Scenario::from_toml_str(&s.to_toml_string().unwrap()).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = triangle_toml().replace("iota = 1", "iota = 1\nbogus = 3");
        assert!(matches!(
            Scenario::from_toml_str(&text),
            Err(Error::ScenarioParse(_))
        ));
    }

    #[test]
    fn agents_appearing_out_of_order_are_placed_by_id() {
        let text = r#"
name = "swap"
iota = 1
kappa = 2
edges = [[1, 2]]

[[agents]]
id = 2
x = 5.0
y = 0.0
psi = 0.0

[[agents]]
id = 1
x = 0.0
y = 0.0
psi = 0.0
"#;
        let f = Scenario::from_toml_str(text).unwrap().framework().unwrap();
        assert_abs_diff_eq!(f.positions()[1].x, 5.0);
    }

    #[test]
    fn validation_failures_name_the_field() {
        let cases: [(&str, &str, &str); 5] = [
            ("kappa = 2", "kappa = 1", "kappa"),
            ("kappa = 2", "kappa = 9", "kappa"),
            ("edges = [[1, 2], [2, 3], [3, 1]]", "edges = [[1, 1]]", "edges"),
            ("edges = [[1, 2], [2, 3], [3, 1]]", "edges = [[1, 2], [1, 2]]", "edges"),
            ("id = 3", "id = 7", "agents"),
        ];
        for (from, to, field) in cases {
            let text = triangle_toml().replace(from, to);
            match Scenario::from_toml_str(&text) {
                Err(Error::ScenarioInvalid { field: got, .. }) => {
                    assert_eq!(got, field, "case {from} -> {to}")
                }
                other => panic!("case {from} -> {to}: expected invalid, got {other:?}"),
            }
        }
    }

    #[test]
    fn builtin_demos_have_the_advertised_shape() {
        let rigid = builtin_demo(DemoKind::Rigid);
        assert_eq!(rigid.n_agents(), 6);
        assert_eq!(rigid.edges.len(), 30);
        rigid.validate().unwrap();

        let flex = builtin_demo(DemoKind::RotoFlexible);
        assert_eq!(flex.edges.len(), 14);
        flex.validate().unwrap();
        let f = flex.framework().unwrap();
        assert_eq!(f.graph().out_degree(4).unwrap(), 0);
        assert_eq!(f.graph().out_degree(5).unwrap(), 0);
    }

    #[test]
    fn demo_analysis_verdicts() {
        let rigid = run_analysis(&builtin_demo(DemoKind::Rigid)).unwrap();
        assert!(rigid.report.rigid_by_theorem);
        assert_eq!(rigid.report.bearing_rank, 14);
        assert_eq!(rigid.json["n_agents"], 6);
        assert!(rigid.text.contains("rigid-demo"));

        let flex = run_analysis(&builtin_demo(DemoKind::RotoFlexible)).unwrap();
        assert!(!flex.report.rigid_by_theorem);
        assert!(!flex.report.rigid_by_corollary);
    }

    #[test]
    fn run_estimation_writes_all_artifacts() {
        let mut s = builtin_demo(DemoKind::Rigid);
        s.sim.t_final = 0.05;
        let dir = std::env::temp_dir().join("se2-rigidity-scenario-test");
        let _ = std::fs::remove_dir_all(&dir);
        let summary = run_estimation(&s, &dir).unwrap();
        assert_eq!(summary.samples, 51);
        for file in ["trace.csv", "report.txt", "e.svg", "ep.svg", "traj.svg"] {
            assert!(dir.join(file).exists(), "{file} missing");
        }
        let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
        assert_eq!(csv.lines().count(), 52);
        assert!(csv.starts_with("t,J,e_p,e_1,"));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
