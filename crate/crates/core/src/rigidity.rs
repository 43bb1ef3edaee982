//! The directed bearing rigidity matrix, its factor matrices, rank/nullspace
//! analysis, and the infinitesimal-rigidity verdicts.
//!
//! For a framework on `n` vertices with `m` edges, the bearing rigidity
//! matrix `B` is the `m x 3n` Jacobian of the stacked bearing map with
//! respect to `[x_1, y_1, ..., x_n, y_n, psi_1, ..., psi_n]`. Its nullspace
//! always contains the four trivial motions (two translations, the dilation,
//! and the coordinated rotation), so the framework is infinitesimally rigid
//! exactly when `rank(B) = 3n - 4`.
//!
//! The same verdict arrives by a second route: `B = [D^-1 R_par | -Ebar^T]`
//! up to column permutation, where `R_par` is the parallel rigidity matrix,
//! `D` the diagonal of squared edge lengths, and `Ebar` the out-incidence
//! matrix. Rigidity is then equivalent to `rank(R_par) = 2n - 3` together
//! with the coordinated rotation subspace `im(R_par) ∩ im(D Ebar^T)` being
//! one-dimensional — provided every vertex measures at least one bearing.

use nalgebra::{DMatrix, DVector};

use crate::framework::perp;
use crate::{Error, Result, Se2Framework};

/// Default relative tolerance for numerical rank decisions: a singular value
/// counts as nonzero when it exceeds `tol * sigma_max`.
pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// The outcome of [`analyze`]: ranks, nullspace, and rigidity verdicts.
///
/// Rank conditions certify infinitesimal rigidity *at the analyzed
/// configuration only*. Non-generic placements (e.g. all agents collinear)
/// can be flagged non-rigid even for graphs that admit rigid placements.
#[derive(Debug, Clone)]
pub struct RigidityReport {
    /// Rank of the bearing rigidity matrix.
    pub bearing_rank: usize,
    /// `3n - bearing_rank`; at least 4 (the trivial motions).
    pub bearing_nullity: usize,
    /// Orthonormal basis of the nullspace of the bearing rigidity matrix,
    /// in the `[positions | attitudes]` coordinate order.
    pub nullspace_basis: Vec<DVector<f64>>,
    /// Rank of the parallel rigidity matrix.
    pub parallel_rank: usize,
    /// Dimension of the coordinated rotation subspace.
    pub coord_rot_dim: usize,
    /// True iff every vertex has out-degree at least 1.
    pub out_degree_ok: bool,
    /// `bearing_rank == 3n - 4`.
    pub rigid_by_theorem: bool,
    /// `parallel_rank == 2n - 3 && coord_rot_dim == 1 && out_degree_ok`.
    ///
    /// The out-degree conjunct makes the two verdicts agree on frameworks
    /// with a non-measuring vertex (such a vertex can spin freely, so the
    /// framework cannot be rigid even when the position-only conditions
    /// hold — e.g. a single directed edge on two vertices).
    pub rigid_by_corollary: bool,
    /// The relative rank tolerance the verdicts were computed with.
    pub tolerance_used: f64,
}

impl RigidityReport {
    /// Machine-readable rendering with plain scalar/array fields.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bearing_rank": self.bearing_rank,
            "bearing_nullity": self.bearing_nullity,
            "nullspace_basis": self
                .nullspace_basis
                .iter()
                .map(|v| v.iter().copied().collect::<Vec<f64>>())
                .collect::<Vec<_>>(),
            "parallel_rank": self.parallel_rank,
            "coord_rot_dim": self.coord_rot_dim,
            "out_degree_ok": self.out_degree_ok,
            "rigid_by_theorem": self.rigid_by_theorem,
            "rigid_by_corollary": self.rigid_by_corollary,
            "tolerance_used": self.tolerance_used,
        })
    }
}

/// Diagonal matrix `D` of squared edge lengths, `m x m`.
pub fn edge_length_squared_matrix(f: &Se2Framework) -> Result<DMatrix<f64>> {
    let m = f.n_edges();
    let mut d = DMatrix::zeros(m, m);
    for k in 0..m {
        let (_, l2) = f.edge_displacement(k)?;
        d[(k, k)] = l2;
    }
    Ok(d)
}

/// Parallel rigidity matrix `R_par`, `m x 2n`.
///
/// Row `k` for edge `(v, u)` carries `((p_v - p_u)^perp)^T` in the head
/// block and its negative in the tail block: motions in its nullspace keep
/// every measured inter-agent direction (world frame) fixed to first order.
/// A bidirectional pair contributes two identical rows.
pub fn parallel_rigidity_matrix(f: &Se2Framework) -> Result<DMatrix<f64>> {
    let n = f.n_vertices();
    let mut r = DMatrix::zeros(f.n_edges(), 2 * n);
    for (k, &(head, tail)) in f.graph().edges().iter().enumerate() {
        let (d, _) = f.edge_displacement(k)?;
        // (p_head - p_tail)^perp = perp(-d) = (d.y, -d.x)
        r[(k, 2 * head)] = d.y;
        r[(k, 2 * head + 1)] = -d.x;
        r[(k, 2 * tail)] = -d.y;
        r[(k, 2 * tail + 1)] = d.x;
    }
    Ok(r)
}

/// Directed bearing rigidity matrix `B`, `m x 3n`: the Jacobian of the
/// stacked bearing map.
///
/// Row `k` for edge `(v, u)` with `delta = p_u - p_v` and `l2 = |delta|^2`:
/// `d beta / d p_u = (delta^perp)^T / l2`, `d beta / d p_v` its negative,
/// and `d beta / d psi_v = -1`. Columns are ordered
/// `[x_1, y_1, ..., x_n, y_n, psi_1, ..., psi_n]`, so the position block is
/// `D^-1 R_par` and the attitude block is `-Ebar^T`.
pub fn bearing_rigidity_matrix(f: &Se2Framework) -> Result<DMatrix<f64>> {
    let n = f.n_vertices();
    let mut b = DMatrix::zeros(f.n_edges(), 3 * n);
    for (k, &(head, tail)) in f.graph().edges().iter().enumerate() {
        let (d, l2) = f.edge_displacement(k)?;
        let dp = perp(&d) / l2;
        b[(k, 2 * tail)] = dp.x;
        b[(k, 2 * tail + 1)] = dp.y;
        b[(k, 2 * head)] = -dp.x;
        b[(k, 2 * head + 1)] = -dp.y;
        b[(k, 2 * n + head)] = -1.0;
    }
    Ok(b)
}

/// The coordinated rotation direction `(z_p, 1)`: position block
/// `z_i = p_i^perp = (-y_i, x_i)`, attitude block all ones.
///
/// Rotating every position about the origin while advancing every attitude
/// at the same rate changes no bearing, so this vector satisfies both
/// `R_par * z_p = D * 1` and `B * (z_p, 1) = 0` under this crate's sign
/// conventions.
pub fn coordinated_rotation_vector(f: &Se2Framework) -> DVector<f64> {
    let n = f.n_vertices();
    let mut z = DVector::zeros(3 * n);
    for (i, p) in f.positions().iter().enumerate() {
        z[2 * i] = -p.y;
        z[2 * i + 1] = p.x;
        z[2 * n + i] = 1.0;
    }
    z
}

fn ensure_finite(m: &DMatrix<f64>) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteMatrix)
    }
}

/// Numerical rank: the number of singular values exceeding
/// `tol * sigma_max`. A zero (or empty) matrix has rank 0.
pub fn rank_with_tolerance(m: &DMatrix<f64>, tol: f64) -> Result<usize> {
    ensure_finite(m)?;
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(0);
    }
    let sv = m.clone().svd(false, false).singular_values;
    let sigma_max = sv.max();
    if sigma_max <= 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|&&s| s > tol * sigma_max).count())
}

/// Orthonormal basis of the numerical nullspace: the right singular vectors
/// whose singular values are at most `tol * sigma_max` (every such `v` has
/// `|M v| <= tol * sigma_max`).
pub fn nullspace_basis(m: &DMatrix<f64>, tol: f64) -> Result<Vec<DVector<f64>>> {
    ensure_finite(m)?;
    let cols = m.ncols();
    if cols == 0 {
        return Ok(Vec::new());
    }
    if m.nrows() == 0 {
        return Ok((0..cols)
            .map(|i| {
                let mut e = DVector::zeros(cols);
                e[i] = 1.0;
                e
            })
            .collect());
    }
    // A wide matrix must be padded with zero rows: the compact SVD only
    // returns min(rows, cols) right singular vectors, which would omit the
    // tail of the nullspace.
    let padded;
    let square = if m.nrows() < cols {
        padded = {
            let mut p = DMatrix::zeros(cols, cols);
            p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
            p
        };
        &padded
    } else {
        m
    };
    let svd = square.clone().svd(false, true);
    let v_t = svd
        .v_t
        .expect("right singular vectors were requested");
    let sv = svd.singular_values;
    let sigma_max = sv.max();
    let threshold = tol * sigma_max;
    let mut basis = Vec::new();
    for i in 0..sv.len() {
        if sv[i] <= threshold {
            basis.push(v_t.row(i).transpose());
        }
    }
    Ok(basis)
}

/// Dimension of the coordinated rotation subspace
/// `im(R_par) ∩ im(R_psi)` with `R_psi = D * Ebar^T`, computed via
/// `dim(im A ∩ im B) = rank(A) + rank(B) - rank([A B])`.
///
/// The sign convention on `R_psi` does not affect its image. For any
/// framework with at least one edge the dimension is at least 1 (the
/// coordinated rotation itself).
pub fn coordinated_rotation_subspace_dim(f: &Se2Framework, tol: f64) -> Result<usize> {
    let n = f.n_vertices();
    let m = f.n_edges();
    let r_par = parallel_rigidity_matrix(f)?;
    let mut r_psi = f.graph().out_incidence_matrix().transpose();
    for k in 0..m {
        let (_, l2) = f.edge_displacement(k)?;
        for j in 0..n {
            r_psi[(k, j)] *= l2;
        }
    }
    let mut stacked = DMatrix::zeros(m, 3 * n);
    stacked.view_mut((0, 0), (m, 2 * n)).copy_from(&r_par);
    stacked.view_mut((0, 2 * n), (m, n)).copy_from(&r_psi);
    let r1 = rank_with_tolerance(&r_par, tol)?;
    let r2 = rank_with_tolerance(&r_psi, tol)?;
    let r12 = rank_with_tolerance(&stacked, tol)?;
    Ok(r1 + r2 - r12)
}

/// The four trivial motions as length-`3n` vectors:
/// x-translation, y-translation, dilation (`chi_p` in the position block),
/// and coordinated rotation. Each lies in the nullspace of the bearing
/// rigidity matrix; for generic configurations they are independent.
///
/// Errors when there are fewer than two vertices or all positions coincide
/// (the dilation and rotation directions then degenerate against the
/// translations).
pub fn trivial_motion_basis(f: &Se2Framework) -> Result<[DVector<f64>; 4]> {
    let n = f.n_vertices();
    if n < 2 {
        return Err(Error::TooFewVertices { n, required: 2 });
    }
    let p0 = f.positions()[0];
    if f.positions().iter().all(|p| *p == p0) {
        return Err(Error::AllPositionsCoincident);
    }
    let mut tx = DVector::zeros(3 * n);
    let mut ty = DVector::zeros(3 * n);
    let mut dilation = DVector::zeros(3 * n);
    for (i, p) in f.positions().iter().enumerate() {
        tx[2 * i] = 1.0;
        ty[2 * i + 1] = 1.0;
        dilation[2 * i] = p.x;
        dilation[2 * i + 1] = p.y;
    }
    let rotation = coordinated_rotation_vector(f);
    Ok([tx, ty, dilation, rotation])
}

/// Full rigidity analysis of a framework with at least two vertices.
///
/// Both verdicts are computed independently: `rigid_by_theorem` from the
/// bearing-matrix rank, `rigid_by_corollary` from the parallel rank, the
/// coordinated-rotation dimension, and the out-degree condition. A vertex
/// with no outgoing edge forces both verdicts false.
pub fn analyze(f: &Se2Framework, tol: f64) -> Result<RigidityReport> {
    let n = f.n_vertices();
    if n < 2 {
        return Err(Error::TooFewVertices { n, required: 2 });
    }
    let b = bearing_rigidity_matrix(f)?;
    let bearing_rank = rank_with_tolerance(&b, tol)?;
    let bearing_nullity = 3 * n - bearing_rank;
    let nullspace = nullspace_basis(&b, tol)?;
    let parallel_rank = rank_with_tolerance(&parallel_rigidity_matrix(f)?, tol)?;
    let coord_rot_dim = coordinated_rotation_subspace_dim(f, tol)?;
    let out_degree_ok = f.graph().min_out_degree() >= 1;
    Ok(RigidityReport {
        bearing_rank,
        bearing_nullity,
        nullspace_basis: nullspace,
        parallel_rank,
        coord_rot_dim,
        out_degree_ok,
        rigid_by_theorem: bearing_rank == 3 * n - 4,
        rigid_by_corollary: parallel_rank == 2 * n - 3 && coord_rot_dim == 1 && out_degree_ok,
        tolerance_used: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::Angle;
    use crate::DirectedGraph;
    use nalgebra::Vector2;

    fn framework(
        n: usize,
        edges: Vec<(usize, usize)>,
        p: Vec<(f64, f64)>,
        psi: Vec<f64>,
    ) -> Se2Framework {
        Se2Framework::new(
            DirectedGraph::new(n, edges).unwrap(),
            p.into_iter().map(|(x, y)| Vector2::new(x, y)).collect(),
            psi.into_iter().map(Angle::new).collect(),
        )
        .unwrap()
    }

    fn sample_framework() -> Se2Framework {
        framework(
            4,
            vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3), (2, 0)],
            vec![(0.1, -0.4), (1.3, 0.2), (0.9, 1.5), (-0.7, 0.8)],
            vec![0.3, -1.1, 2.0, 0.7],
        )
    }

    #[test]
    fn edge_length_squared_examples() {
        let f = framework(2, vec![(0, 1)], vec![(0.0, 0.0), (1.0, 0.0)], vec![0.0, 0.0]);
        assert_eq!(edge_length_squared_matrix(&f).unwrap()[(0, 0)], 1.0);

        let f = framework(2, vec![(0, 1)], vec![(0.0, 0.0), (2.0, 0.0)], vec![0.0, 0.0]);
        assert_eq!(edge_length_squared_matrix(&f).unwrap()[(0, 0)], 4.0);

        let f = framework(
            2,
            vec![(0, 1), (1, 0)],
            vec![(0.0, 0.0), (3.0, 0.0)],
            vec![0.0, 0.0],
        );
        let d = edge_length_squared_matrix(&f).unwrap();
        assert_eq!(d[(0, 0)], 9.0);
        assert_eq!(d[(1, 1)], 9.0);
        assert_eq!(d[(0, 1)], 0.0);
    }

    #[test]
    fn parallel_matrix_single_edge_row() {
        let f = framework(2, vec![(0, 1)], vec![(0.0, 0.0), (1.0, 0.0)], vec![0.0, 0.0]);
        let r = parallel_rigidity_matrix(&f).unwrap();
        assert_eq!(r.as_slice(), &[0.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn parallel_matrix_annihilates_dilation_and_translation() {
        let f = sample_framework();
        let r = parallel_rigidity_matrix(&f).unwrap();
        let n = f.n_vertices();
        assert!((&r * f.position_vector()).amax() <= 1e-12);
        let mut shift = DVector::zeros(2 * n);
        for i in 0..n {
            shift[2 * i] = 0.8;
            shift[2 * i + 1] = -1.7;
        }
        assert!((&r * shift).amax() <= 1e-12);
    }

    #[test]
    fn bearing_matrix_single_edge_row() {
        let f = framework(2, vec![(0, 1)], vec![(0.0, 0.0), (1.0, 0.0)], vec![0.0, 0.0]);
        let b = bearing_rigidity_matrix(&f).unwrap();
        assert_eq!(b.nrows(), 1);
        assert_eq!(
            b.row(0).iter().copied().collect::<Vec<_>>(),
            vec![0.0, -1.0, 0.0, 1.0, -1.0, 0.0]
        );
    }

    #[test]
    fn bearing_matrix_annihilates_trivial_motions() {
        let f = sample_framework();
        let b = bearing_rigidity_matrix(&f).unwrap();
        for v in trivial_motion_basis(&f).unwrap() {
            assert!((&b * v).amax() <= 1e-10);
        }
    }

    #[test]
    fn factorization_into_parallel_and_out_incidence_blocks() {
        let f = sample_framework();
        let n = f.n_vertices();
        let b = bearing_rigidity_matrix(&f).unwrap();
        let r = parallel_rigidity_matrix(&f).unwrap();
        let ebar_t = f.graph().out_incidence_matrix().transpose();
        for k in 0..f.n_edges() {
            let (_, l2) = f.edge_displacement(k).unwrap();
            for j in 0..2 * n {
                assert!((b[(k, j)] - r[(k, j)] / l2).abs() <= 1e-12);
            }
            for j in 0..n {
                assert!((b[(k, 2 * n + j)] + ebar_t[(k, j)]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn coordinated_rotation_vector_components() {
        let f = framework(2, vec![(0, 1)], vec![(1.0, 0.0), (0.0, 2.0)], vec![0.0, 0.0]);
        let z = coordinated_rotation_vector(&f);
        // z_i = (-y_i, x_i), attitude block all ones.
        assert_eq!(z.as_slice(), &[0.0, 1.0, -2.0, 0.0, 1.0, 1.0]);
    }

    #[test]
    fn coordinated_rotation_identities() {
        let f = sample_framework();
        let z = coordinated_rotation_vector(&f);
        let n = f.n_vertices();
        let b = bearing_rigidity_matrix(&f).unwrap();
        assert!((&b * &z).amax() <= 1e-10);
        let r = parallel_rigidity_matrix(&f).unwrap();
        let d = edge_length_squared_matrix(&f).unwrap();
        let ones = DVector::from_element(f.n_edges(), 1.0);
        let residual = &r * z.rows(0, 2 * n).clone_owned() - d * ones;
        assert!(residual.amax() <= 1e-10);
    }

    #[test]
    fn rank_examples() {
        let zero = DMatrix::<f64>::zeros(3, 4);
        assert_eq!(rank_with_tolerance(&zero, 1e-8).unwrap(), 0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert_eq!(rank_with_tolerance(&id, 1e-8).unwrap(), 3);
        let u = DVector::from_vec(vec![0.3, -1.2, 0.9]);
        let v = DVector::from_vec(vec![2.0, 0.5, -0.4, 1.1]);
        let outer = &u * v.transpose();
        assert_eq!(rank_with_tolerance(&outer, 1e-8).unwrap(), 1);
        let nan = DMatrix::from_element(2, 2, f64::NAN);
        assert!(matches!(
            rank_with_tolerance(&nan, 1e-8),
            Err(Error::NonFiniteMatrix)
        ));
    }

    #[test]
    fn nullspace_examples() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(nullspace_basis(&id, 1e-8).unwrap().is_empty());

        let m = DMatrix::from_row_slice(1, 2, &[1.0, 0.0]);
        let basis = nullspace_basis(&m, 1e-8).unwrap();
        assert_eq!(basis.len(), 1);
        assert!(basis[0][0].abs() <= 1e-12);
        assert!((basis[0][1].abs() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn nullspace_vectors_are_orthonormal_and_annihilated() {
        let f = sample_framework();
        let b = bearing_rigidity_matrix(&f).unwrap();
        let basis = nullspace_basis(&b, 1e-8).unwrap();
        assert_eq!(basis.len(), 3 * f.n_vertices() - rank_with_tolerance(&b, 1e-8).unwrap());
        for (i, v) in basis.iter().enumerate() {
            assert!((v.norm() - 1.0).abs() <= 1e-12);
            assert!((&b * v).norm() <= 1e-8 * b.norm());
            for w in &basis[i + 1..] {
                assert!(v.dot(w).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn complete_graphs_have_one_dimensional_rotation_subspace() {
        // Deterministic generic-ish placements.
        for n in 2..=6 {
            let p: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let a = 0.9 * i as f64 + 0.3;
                    (1.5 * a.cos() + 0.05 * i as f64, 1.1 * a.sin() - 0.02 * (i * i) as f64)
                })
                .collect();
            let psi: Vec<f64> = (0..n).map(|i| 0.37 * i as f64 - 0.8).collect();
            let f = Se2Framework::new(
                DirectedGraph::complete(n).unwrap(),
                p.into_iter().map(|(x, y)| Vector2::new(x, y)).collect(),
                psi.into_iter().map(Angle::new).collect(),
            )
            .unwrap();
            assert_eq!(coordinated_rotation_subspace_dim(&f, 1e-8).unwrap(), 1);
        }
    }

    #[test]
    fn trivial_basis_is_rank_four_for_generic_pair() {
        let f = framework(2, vec![(0, 1)], vec![(0.2, -0.7), (1.4, 0.9)], vec![0.4, -0.2]);
        let basis = trivial_motion_basis(&f).unwrap();
        let mut stack = DMatrix::zeros(4, 6);
        for (i, v) in basis.iter().enumerate() {
            stack.row_mut(i).copy_from(&v.transpose());
        }
        assert_eq!(rank_with_tolerance(&stack, 1e-8).unwrap(), 4);
    }

    #[test]
    fn trivial_basis_rejects_coincident_placements() {
        let f = framework(2, vec![], vec![(1.0, 1.0), (1.0, 1.0)], vec![0.0, 0.0]);
        assert!(matches!(
            trivial_motion_basis(&f),
            Err(Error::AllPositionsCoincident)
        ));
    }

    #[test]
    fn analyze_k2_is_rigid() {
        let f = framework(
            2,
            vec![(0, 1), (1, 0)],
            vec![(0.0, 0.0), (1.0, 0.0)],
            vec![0.0, 0.0],
        );
        let report = analyze(&f, DEFAULT_RANK_TOLERANCE).unwrap();
        assert_eq!(report.bearing_rank, 2);
        assert_eq!(report.bearing_nullity, 4);
        assert!(report.rigid_by_theorem);
        assert!(report.rigid_by_corollary);
        assert!(report.out_degree_ok);
        assert_eq!(report.bearing_rank + report.bearing_nullity, 6);
    }

    #[test]
    fn analyze_flags_non_measuring_vertex() {
        // Two agents watch each other and a third that never measures.
        let f = framework(
            3,
            vec![(0, 1), (1, 0), (0, 2), (1, 2)],
            vec![(0.0, 0.0), (2.0, 0.0), (1.0, 1.6)],
            vec![0.3, -0.4, 0.7],
        );
        let report = analyze(&f, DEFAULT_RANK_TOLERANCE).unwrap();
        assert!(!report.out_degree_ok);
        assert!(!report.rigid_by_theorem);
        assert!(!report.rigid_by_corollary);
    }

    #[test]
    fn report_json_is_flat_and_complete() {
        let f = sample_framework();
        let report = analyze(&f, DEFAULT_RANK_TOLERANCE).unwrap();
        let json = report.to_json();
        assert_eq!(json["bearing_rank"], report.bearing_rank);
        assert_eq!(
            json["nullspace_basis"].as_array().unwrap().len(),
            report.bearing_nullity
        );
    }
}
