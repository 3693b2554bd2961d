//! Static condensation onto interior-face traces, the global sparse solve,
//! and recovery of element unknowns.

use std::sync::Arc;

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DVector;
use rayon::prelude::*;

use crate::basis::tri_quadrature;
use crate::error::{HdgError, Result};
use crate::hdg::{assemble_element, FaceField, HdgSpace, LocalSystem, VolumeField};
use crate::mesh::Mesh;
use crate::problems::ProblemData;

pub const SOLVER_TOLERANCE: f64 = 1e-10;

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseMatrix {
    /// Sums duplicate entries in input order, so equal inputs give bit-equal matrices.
    pub fn from_triplets(dim: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            dim,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .map(|i| self.values[i] * x[self.col_idx[i]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let range = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.col_idx[range.clone()].binary_search(&col) {
            Ok(i) => self.values[range.start + i],
            Err(_) => 0.0,
        }
    }

    /// True when some row or column has no stored nonzero entry.
    pub fn has_empty_row_or_column(&self) -> bool {
        let mut col_used = vec![false; self.dim];
        let mut row_used = vec![false; self.dim];
        for r in 0..self.dim {
            for i in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[i] != 0.0 {
                    row_used[r] = true;
                    col_used[self.col_idx[i]] = true;
                }
            }
        }
        row_used.iter().chain(&col_used).any(|u| !u)
    }
}

/// Maps `(interior face, variable, mode)` to a global trace index; variable
/// `0` is `ŷ`, `1` is `ẑ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceDofMap {
    pub modes: usize,
    pub num_faces: usize,
}

impl TraceDofMap {
    pub fn index(&self, interior_face: usize, var: usize, mode: usize) -> usize {
        (2 * interior_face + var) * self.modes + mode
    }

    pub fn dim(&self) -> usize {
        2 * self.num_faces * self.modes
    }
}

#[derive(Debug, Clone)]
pub struct GlobalTraceSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    pub dof_map: TraceDofMap,
}

impl GlobalTraceSystem {
    pub fn dim(&self) -> usize {
        self.dof_map.dim()
    }
}

/// Coefficients of every discrete unknown.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    pub mesh: Arc<Mesh>,
    pub k: usize,
    pub gamma: f64,
    pub q: VolumeField,
    pub p: VolumeField,
    pub y: VolumeField,
    pub z: VolumeField,
    pub u: VolumeField,
    /// Interior faces only, in `Mesh::interior_faces` order.
    pub y_hat: FaceField,
    pub z_hat: FaceField,
}

/// Global indices of the local trace dofs of one element (`None` on boundary faces).
fn local_to_global(sys: &LocalSystem, map: &TraceDofMap) -> Vec<Option<usize>> {
    let l = sys.layout;
    let mut out = vec![None; l.num_traces()];
    for var in 0..2 {
        for (lf, &(_, interior)) in sys.faces.iter().enumerate() {
            if let Some(i) = interior {
                for m in 0..l.nm {
                    out[l.trace(var, lf) + m] = Some(map.index(i, var, m));
                }
            }
        }
    }
    out
}

/// Assembles every element system (in parallel, ordered by element).
pub fn assemble_all(space: &HdgSpace, problem: &ProblemData) -> Result<Vec<LocalSystem>> {
    (0..space.mesh.num_elements())
        .into_par_iter()
        .map(|e| assemble_element(space, e, problem))
        .collect()
}

/// Schur complement `D - C A⁻¹ B` of every element accumulated into the trace system.
pub fn condense(locals: &[LocalSystem], mesh: &Mesh, k: usize) -> Result<GlobalTraceSystem> {
    let dof_map = TraceDofMap {
        modes: k + 1,
        num_faces: mesh.num_interior_faces(),
    };
    if let Some(sys) = locals.iter().find(|s| s.layout.nm != k + 1) {
        return Err(HdgError::InvalidArgument(format!(
            "element {} was assembled for a different degree",
            sys.element
        )));
    }
    let contributions: Vec<(Vec<(usize, usize, f64)>, Vec<(usize, f64)>)> = locals
        .par_iter()
        .map(|sys| {
            let dofs = local_to_global(sys, &dof_map);
            let ainv_b = &sys.a_inv * &sys.b;
            let ainv_f = &sys.a_inv * &sys.rhs_interior;
            let schur = &sys.d - &sys.c * ainv_b;
            let g = &sys.rhs_trace - &sys.c * ainv_f;
            let mut entries = Vec::new();
            let mut rhs = Vec::new();
            for (i, gi) in dofs.iter().enumerate() {
                let Some(gi) = *gi else { continue };
                rhs.push((gi, g[i]));
                for (j, gj) in dofs.iter().enumerate() {
                    if let Some(gj) = *gj {
                        entries.push((gi, gj, schur[(i, j)]));
                    }
                }
            }
            (entries, rhs)
        })
        .collect();

    let dim = dof_map.dim();
    let mut rhs = vec![0.0; dim];
    let mut entries = Vec::new();
    for (e, r) in contributions {
        entries.extend(e);
        for (i, v) in r {
            rhs[i] += v;
        }
    }
    Ok(GlobalTraceSystem {
        matrix: SparseMatrix::from_triplets(dim, entries),
        rhs,
        dof_map,
    })
}

fn relative_residual(system: &GlobalTraceSystem, x: &[f64]) -> (f64, Vec<f64>) {
    let ax = system.matrix.mul_vec(x);
    let r: Vec<f64> = system.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let norm = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>().sqrt();
    (norm(&r) / norm(&system.rhs).max(1.0), r)
}

/// Sparse LU solve of the trace system, with up to two refinement steps.
pub fn solve_traces(system: &GlobalTraceSystem) -> Result<Vec<f64>> {
    let dim = system.dim();
    if dim == 0 {
        return Ok(Vec::new());
    }
    let m = &system.matrix;
    let mut triplets = Vec::with_capacity(m.nnz());
    for r in 0..dim {
        for i in m.row_ptr[r]..m.row_ptr[r + 1] {
            triplets.push(Triplet::new(r, m.col_idx[i], m.values[i]));
        }
    }
    let failure = |reason: String| HdgError::SolverFailure {
        reason,
        residual: f64::NAN,
    };
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
        .map_err(|e| failure(format!("matrix construction: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| failure(format!("factorization: {e:?}")))?;

    let solve = |b: &[f64]| -> Vec<f64> {
        let rhs = Mat::<f64>::from_fn(dim, 1, |i, _| b[i]);
        let sol = lu.solve(&rhs);
        (0..dim).map(|i| sol[(i, 0)]).collect()
    };
    let mut x = solve(&system.rhs);
    let (mut res, mut r) = relative_residual(system, &x);
    for _ in 0..2 {
        if res <= SOLVER_TOLERANCE || !res.is_finite() {
            break;
        }
        let dx = solve(&r);
        x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        (res, r) = relative_residual(system, &x);
    }
    if res <= SOLVER_TOLERANCE {
        Ok(x)
    } else {
        Err(HdgError::SolverFailure {
            reason: "residual above tolerance".to_string(),
            residual: res,
        })
    }
}

/// Back-substitutes `x_K = A⁻¹(rhs_interior - B λ_K)` on every element.
pub fn recover(
    traces: &[f64],
    locals: &[LocalSystem],
    mesh: Arc<Mesh>,
    gamma: f64,
) -> Result<DiscreteSolution> {
    let Some(first) = locals.first() else {
        return Err(HdgError::InvalidArgument("no local systems".into()));
    };
    let l = first.layout;
    let k = l.nm - 1;
    let dof_map = TraceDofMap {
        modes: l.nm,
        num_faces: mesh.num_interior_faces(),
    };
    if traces.len() != dof_map.dim() || locals.len() != mesh.num_elements() {
        return Err(HdgError::InvalidArgument(
            "trace vector or local systems do not match the mesh".into(),
        ));
    }
    let interiors: Vec<DVector<f64>> = locals
        .par_iter()
        .map(|sys| {
            let dofs = local_to_global(sys, &dof_map);
            let lam = DVector::from_iterator(
                dofs.len(),
                dofs.iter().map(|d| d.map_or(0.0, |g| traces[g])),
            );
            &sys.a_inv * (&sys.rhs_interior - &sys.b * lam)
        })
        .collect();

    let ne = mesh.num_elements();
    let mut sol = DiscreteSolution {
        k,
        gamma,
        q: VolumeField::zeros(ne, 2 * l.nv),
        p: VolumeField::zeros(ne, 2 * l.nv),
        y: VolumeField::zeros(ne, l.nw),
        z: VolumeField::zeros(ne, l.nw),
        u: VolumeField::zeros(ne, l.nw),
        y_hat: FaceField::zeros(dof_map.num_faces, l.nm),
        z_hat: FaceField::zeros(dof_map.num_faces, l.nm),
        mesh,
    };
    for (e, x) in interiors.iter().enumerate() {
        sol.q.element_mut(e).copy_from_slice(x.rows(l.q(), 2 * l.nv).as_slice());
        sol.y.element_mut(e).copy_from_slice(x.rows(l.y(), l.nw).as_slice());
        sol.p.element_mut(e).copy_from_slice(x.rows(l.p(), 2 * l.nv).as_slice());
        sol.z.element_mut(e).copy_from_slice(x.rows(l.z(), l.nw).as_slice());
        for (u, z) in sol.u.element_mut(e).iter_mut().zip(x.rows(l.z(), l.nw).iter()) {
            *u = z / gamma;
        }
    }
    for f in 0..dof_map.num_faces {
        for m in 0..l.nm {
            sol.y_hat.face_mut(f)[m] = traces[dof_map.index(f, 0, m)];
            sol.z_hat.face_mut(f)[m] = traces[dof_map.index(f, 1, m)];
        }
    }
    Ok(sol)
}

/// Result of a full discretize-condense-solve-recover pass.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub space: HdgSpace,
    pub solution: DiscreteSolution,
    pub system_dim: usize,
}

/// Solves the discrete optimality system on `space`.
pub fn solve(space: HdgSpace, problem: &ProblemData) -> Result<SolveOutput> {
    let locals = assemble_all(&space, problem)?;
    let system = condense(&locals, &space.mesh, space.k)?;
    let traces = solve_traces(&system)?;
    let solution = recover(&traces, &locals, space.mesh.clone(), problem.gamma)?;
    Ok(SolveOutput {
        system_dim: system.dim(),
        space,
        solution,
    })
}

/// Discrete cost `½‖y_h - y_d‖² + (γ/2)‖u_h‖²`.
pub fn compute_cost(solution: &DiscreteSolution, problem: &ProblemData) -> Result<f64> {
    let basis = crate::basis::TriBasis::new(solution.k + 1)?;
    let rule = tri_quadrature(2 * (solution.k + 2) + 6)?;
    let mesh = &solution.mesh;
    let mut w = vec![0.0; basis.dim];
    let mut tracking = 0.0;
    let mut control = 0.0;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e);
        let (y, u) = (solution.y.element(e), solution.u.element(e));
        for (&xi, &wq) in rule.points.iter().zip(&rule.weights) {
            basis.values_into(xi, &mut w);
            let yh: f64 = y.iter().zip(&w).map(|(c, b)| c * b).sum();
            let uh: f64 = u.iter().zip(&w).map(|(c, b)| c * b).sum();
            let d = yh - (problem.y_d)(geo.map(xi));
            tracking += wq * geo.det * d * d;
            control += wq * geo.det * uh * uh;
        }
    }
    Ok(0.5 * tracking + 0.5 * problem.gamma * control)
}
