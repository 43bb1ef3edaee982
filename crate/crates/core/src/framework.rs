//! SE(2) framework configurations, the bearing measurement model, and
//! bearing-equivalence/congruence predicates.

use std::f64::consts::{PI, TAU};

use nalgebra::{DVector, Matrix2, Vector2};

use crate::{DirectedGraph, Error, Result};

/// Wraps an angle to its canonical representative in `(-pi, pi]`.
///
/// `wrap_angle(a + 2*pi*k) == wrap_angle(a)` for any integer `k`, up to
/// floating-point error in forming the argument.
pub fn wrap_angle(a: f64) -> f64 {
    let r = -((-a + PI).rem_euclid(TAU) - PI);
    // rem_euclid can round up to the modulus itself for arguments a hair
    // above pi, which would land exactly on the excluded endpoint -pi.
    if r <= -PI {
        PI
    } else {
        r
    }
}

/// An angle stored by its canonical representative in `(-pi, pi]`.
///
/// Construction wraps, so two `Angle`s compare equal iff they denote the same
/// point on the circle (up to floating-point representation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle(f64);

impl Angle {
    pub fn new(radians: f64) -> Self {
        Self(wrap_angle(radians))
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::new(degrees.to_radians())
    }

    /// The canonical value in `(-pi, pi]`.
    pub fn radians(self) -> f64 {
        self.0
    }

    /// The wrapped difference `self - other`, in `(-pi, pi]`.
    pub fn wrapped_sub(self, other: Angle) -> f64 {
        wrap_angle(self.0 - other.0)
    }
}

impl std::ops::Add for Angle {
    type Output = Angle;
    fn add(self, rhs: Angle) -> Angle {
        Angle::new(self.0 + rhs.0)
    }
}

impl std::fmt::Display for Angle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// The counterclockwise rotation matrix
/// `T(psi) = [[cos psi, -sin psi], [sin psi, cos psi]]`.
///
/// `T(psi)^T` takes world-frame vectors into the body frame of an agent with
/// attitude `psi`; `T(a) * T(b) == T(a + b)` and `det T = 1`.
pub fn rotation_matrix(psi: Angle) -> Matrix2<f64> {
    let (s, c) = psi.radians().sin_cos();
    Matrix2::new(c, -s, s, c)
}

/// Quarter-turn counterclockwise: `perp((x, y)) = (-y, x)`.
pub fn perp(v: &Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v.y, v.x)
}

/// A directed graph embedded in SE(2): one planar position and one attitude
/// per vertex.
///
/// Validated on construction: counts match the graph, all coordinates are
/// finite, and no measured pair of agents coincides (a zero-length edge has
/// no bearing). Immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Se2Framework {
    graph: DirectedGraph,
    positions: Vec<Vector2<f64>>,
    attitudes: Vec<Angle>,
}

impl Se2Framework {
    pub fn new(
        graph: DirectedGraph,
        positions: Vec<Vector2<f64>>,
        attitudes: Vec<Angle>,
    ) -> Result<Self> {
        let n = graph.n_vertices();
        if positions.len() != n {
            return Err(Error::CountMismatch {
                what: "positions",
                expected: n,
                got: positions.len(),
            });
        }
        if attitudes.len() != n {
            return Err(Error::CountMismatch {
                what: "attitudes",
                expected: n,
                got: attitudes.len(),
            });
        }
        if positions.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::NonFinite { what: "positions" });
        }
        if attitudes.iter().any(|a| !a.radians().is_finite()) {
            return Err(Error::NonFinite { what: "attitudes" });
        }
        for (k, &(head, tail)) in graph.edges().iter().enumerate() {
            if positions[head] == positions[tail] {
                return Err(Error::DegenerateEdge {
                    edge: k,
                    head,
                    tail,
                });
            }
        }
        Ok(Self {
            graph,
            positions,
            attitudes,
        })
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn positions(&self) -> &[Vector2<f64>] {
        &self.positions
    }

    pub fn attitudes(&self) -> &[Angle] {
        &self.attitudes
    }

    pub fn n_vertices(&self) -> usize {
        self.graph.n_vertices()
    }

    pub fn n_edges(&self) -> usize {
        self.graph.n_edges()
    }

    /// The stacked position vector `chi_p = [x_1, y_1, ..., x_n, y_n]`.
    pub fn position_vector(&self) -> DVector<f64> {
        let mut v = DVector::zeros(2 * self.n_vertices());
        for (i, p) in self.positions.iter().enumerate() {
            v[2 * i] = p.x;
            v[2 * i + 1] = p.y;
        }
        v
    }

    /// World-frame displacement `p(tail) - p(head)` of edge `k`, plus its
    /// squared length. Errors if the edge is degenerate.
    pub(crate) fn edge_displacement(&self, k: usize) -> Result<(Vector2<f64>, f64)> {
        let (head, tail) = self.graph.edge(k)?;
        let d = self.positions[tail] - self.positions[head];
        let l2 = d.norm_squared();
        if l2 <= 0.0 {
            return Err(Error::DegenerateEdge {
                edge: k,
                head,
                tail,
            });
        }
        Ok((d, l2))
    }

    /// The unit bearing vector of edge `k = (v, u)` in `v`'s body frame:
    /// `r_vu = T(psi_v)^T (p_u - p_v) / ||p_u - p_v||`.
    pub fn bearing_vector(&self, k: usize) -> Result<Vector2<f64>> {
        let (head, _) = self.graph.edge(k)?;
        let (d, l2) = self.edge_displacement(k)?;
        Ok(rotation_matrix(self.attitudes[head]).transpose() * (d / l2.sqrt()))
    }

    /// The bearing angle of edge `k = (v, u)`:
    /// `beta = wrap(atan2(p_u - p_v) - psi_v)`, the angle of the bearing
    /// vector measured in `v`'s body frame.
    pub fn bearing(&self, k: usize) -> Result<Angle> {
        let (head, _) = self.graph.edge(k)?;
        let (d, _) = self.edge_displacement(k)?;
        Ok(Angle::new(d.y.atan2(d.x) - self.attitudes[head].radians()))
    }

    /// The directed bearing rigidity function: all edge bearings stacked in
    /// edge order, as wrapped radians.
    pub fn bearing_rigidity_function(&self) -> Result<DVector<f64>> {
        let mut b = DVector::zeros(self.n_edges());
        for k in 0..self.n_edges() {
            b[k] = self.bearing(k)?.radians();
        }
        Ok(b)
    }

    /// True iff both frameworks share the same graph and every edge bearing
    /// agrees within `tol` radians (wrapped difference).
    ///
    /// This only constrains measured pairs; see [`Self::is_bearing_congruent`]
    /// for the all-pairs version.
    pub fn is_bearing_equivalent(&self, other: &Se2Framework, tol: f64) -> Result<bool> {
        if self.graph != other.graph {
            return Err(Error::GraphMismatch);
        }
        let ba = self.bearing_rigidity_function()?;
        let bb = other.bearing_rigidity_function()?;
        Ok(ba
            .iter()
            .zip(bb.iter())
            .all(|(&a, &b)| wrap_angle(a - b).abs() <= tol))
    }

    /// True iff the bearing-equivalence condition holds for *every* ordered
    /// vertex pair, i.e. on the complete directed graph over the same
    /// placements. Requires all vertex pairs to be non-coincident in both
    /// frameworks.
    ///
    /// Congruence checks a superset of the equivalence constraints, so
    /// congruent frameworks are always equivalent.
    pub fn is_bearing_congruent(&self, other: &Se2Framework, tol: f64) -> Result<bool> {
        if self.n_vertices() != other.n_vertices() {
            return Err(Error::CountMismatch {
                what: "vertices",
                expected: self.n_vertices(),
                got: other.n_vertices(),
            });
        }
        let complete = DirectedGraph::complete(self.n_vertices())?;
        let fa = Se2Framework::new(
            complete.clone(),
            self.positions.clone(),
            self.attitudes.clone(),
        )?;
        let fb = Se2Framework::new(complete, other.positions.clone(), other.attitudes.clone())?;
        fa.is_bearing_equivalent(&fb, tol)
    }

    /// Applies a trivial motion: scale about `pivot` by `scale > 0`, rotate
    /// about `pivot` by `rotation`, then translate by `translation`; every
    /// attitude is advanced by `rotation` as well (coordinated rotation).
    ///
    /// `p' = scale * R(rotation) * (p - pivot) + pivot + translation`,
    /// `psi' = wrap(psi + rotation)`. All bearings are preserved exactly in
    /// exact arithmetic.
    pub fn apply_trivial_motion(
        &self,
        translation: Vector2<f64>,
        scale: f64,
        rotation: Angle,
        pivot: Vector2<f64>,
    ) -> Result<Se2Framework> {
        if !(scale > 0.0) {
            return Err(Error::NonPositiveScale { scale });
        }
        let r = rotation_matrix(rotation);
        let positions = self
            .positions
            .iter()
            .map(|p| scale * (r * (p - pivot)) + pivot + translation)
            .collect();
        let attitudes = self.attitudes.iter().map(|&a| a + rotation).collect();
        Se2Framework::new(self.graph.clone(), positions, attitudes)
    }
}
