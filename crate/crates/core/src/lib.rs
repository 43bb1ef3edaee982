//! Bearing rigidity analysis and gradient-flow relative-pose estimation for
//! directed frameworks in SE(2).
//!
//! A *directed bearing framework* is a directed graph together with a planar
//! position and an attitude angle for every vertex (a point of SE(2) per
//! agent). Each directed edge `(v, u)` models agent `v` measuring the bearing
//! of agent `u` in `v`'s own body frame. This crate answers two questions
//! about such frameworks:
//!
//! 1. **Rigidity** ([`rigidity`]): is the framework infinitesimally rigid,
//!    i.e. do the bearing measurements pin the configuration up to the four
//!    trivial motions (two translations, one dilation, one coordinated
//!    rotation)? The decision is made from the rank of the directed bearing
//!    rigidity matrix — the Jacobian of the stacked bearing map — and,
//!    independently, from a parallel-rigidity rank test combined with the
//!    dimension of the coordinated rotation subspace.
//! 2. **Estimation** ([`estimator`]): given only the static body-frame
//!    bearings, recover every agent's *unscaled* relative position and
//!    relative attitude in a reference agent's frame by integrating a
//!    gradient flow on a least-squares cost with anchoring penalties.
//!
//! [`scenario`] ties both together behind human-editable scenario files and
//! produces CSV traces and SVG plots; [`batch`] runs seed sweeps and
//! Monte-Carlo rank checks, in parallel when the default `parallel` feature
//! is enabled; [`fd`] holds the finite-difference oracles used by the test
//! suite and the self-test.
//!
//! # Conventions
//!
//! These are fixed once, here, and used consistently everywhere:
//!
//! * `T(psi)` is the counterclockwise rotation matrix; a body-frame quantity
//!   is obtained from a world-frame one by multiplying with `T(psi)^T`.
//! * The bearing of edge `(v, u)` is
//!   `beta = wrap(atan2(p_u - p_v) - psi_v)`, wrapped to `(-pi, pi]`.
//! * `x^perp = (-x_y, x_x)` (quarter turn counterclockwise).
//! * State/column ordering is `[x_1, y_1, ..., x_n, y_n, psi_1, ..., psi_n]`.
//! * Rows of every edge-indexed matrix follow the graph's edge order.

pub mod batch;
mod error;
pub mod estimator;
pub mod fd;
pub mod framework;
pub mod graph;
pub mod output;
pub mod plot;
pub mod random;
pub mod rigidity;
pub mod scenario;
pub mod selftest;

pub use error::{Error, Result};
pub use framework::{wrap_angle, Angle, Se2Framework};
pub use graph::DirectedGraph;
pub use rigidity::{analyze, RigidityReport, DEFAULT_RANK_TOLERANCE};
