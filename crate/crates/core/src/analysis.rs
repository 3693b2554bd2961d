//! Error norms, convergence rates, and independent evaluations of the
//! identities the discretization must satisfy.

use std::fmt;

use crate::assembly::DiscreteSolution;
use crate::basis::{tri_quadrature, TriBasis};
use crate::error::{HdgError, Result};
use crate::hdg::{FaceField, HdgSpace, VolumeField};
use crate::mesh::Point;
use crate::problems::ProblemData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    Q,
    P,
    Y,
    Z,
    U,
}

impl Variable {
    pub const ALL: [Variable; 5] = [Variable::Q, Variable::P, Variable::Y, Variable::Z, Variable::U];

    pub fn name(self) -> &'static str {
        match self {
            Variable::Q => "q",
            Variable::P => "p",
            Variable::Y => "y",
            Variable::Z => "z",
            Variable::U => "u",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn eval(coeffs: &[f64], basis_values: &[f64]) -> f64 {
    coeffs.iter().zip(basis_values).map(|(c, b)| c * b).sum()
}

/// `‖exact - discrete‖_{L2(Ω)}` with element quadrature of exactness `2(k+2)+6`.
pub fn l2_error(solution: &DiscreteSolution, problem: &ProblemData, variable: Variable) -> Result<f64> {
    let exact = problem.exact.as_ref().ok_or_else(|| {
        HdgError::InvalidArgument(format!("problem {} has no exact solution", problem.name))
    })?;
    let k = solution.k;
    let rule = tri_quadrature(2 * (k + 2) + 6)?;
    let flux_basis = TriBasis::new(k)?;
    let state_basis = TriBasis::new(k + 1)?;
    let mesh = &solution.mesh;
    let mut vals = vec![0.0; state_basis.dim];
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e);
        let mut local = 0.0;
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(xi);
            let err2 = match variable {
                Variable::Q | Variable::P => {
                    let (field, grad) = if variable == Variable::Q {
                        (&solution.q, (exact.grad_y)(x))
                    } else {
                        (&solution.p, (exact.grad_z)(x))
                    };
                    flux_basis.values_into(xi, &mut vals[..flux_basis.dim]);
                    let c = field.element(e);
                    let nv = flux_basis.dim;
                    let d0 = -grad[0] - eval(&c[..nv], &vals[..nv]);
                    let d1 = -grad[1] - eval(&c[nv..], &vals[..nv]);
                    d0 * d0 + d1 * d1
                }
                Variable::Y | Variable::Z | Variable::U => {
                    let (field, value) = match variable {
                        Variable::Y => (&solution.y, (exact.y)(x)),
                        Variable::Z => (&solution.z, (exact.z)(x)),
                        _ => (&solution.u, (exact.z)(x) / problem.gamma),
                    };
                    state_basis.values_into(xi, &mut vals);
                    let d = value - eval(field.element(e), &vals);
                    d * d
                }
            };
            local += w * err2;
        }
        total += local * geo.det;
    }
    Ok(total.sqrt())
}

/// `‖f - Π f‖` for a scalar field of the given degree.
pub fn scalar_projection_error(
    mesh: &crate::mesh::Mesh,
    degree: usize,
    f: &dyn Fn(Point) -> f64,
) -> Result<f64> {
    let proj = crate::hdg::project_scalar(mesh, degree, f)?;
    let basis = TriBasis::new(degree)?;
    let rule = tri_quadrature((2 * degree + 8).min(crate::basis::MAX_EXACTNESS))?;
    let mut v = vec![0.0; basis.dim];
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e);
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            basis.values_into(xi, &mut v);
            let d = f(geo.map(xi)) - eval(proj.element(e), &v);
            total += w * geo.det * d * d;
        }
    }
    Ok(total.sqrt())
}

/// Errors at or below this are round-off and carry no rate information.
pub const ERROR_FLOOR: f64 = 1e-12;

/// `log₂(e_{i-1}/e_i)` for consecutive levels; `None` where either error is
/// at the round-off floor.
pub fn compute_rates(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| {
            if w[0] > ERROR_FLOOR && w[1] > ERROR_FLOOR {
                Some((w[0] / w[1]).log2())
            } else {
                None
            }
        })
        .collect()
}

/// Errors of all five variables on one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    pub q: f64,
    pub p: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
}

impl LevelErrors {
    pub fn get(&self, v: Variable) -> f64 {
        match v {
            Variable::Q => self.q,
            Variable::P => self.p,
            Variable::Y => self.y,
            Variable::Z => self.z,
            Variable::U => self.u,
        }
    }

    pub fn measure(solution: &DiscreteSolution, problem: &ProblemData) -> Result<Self> {
        Ok(LevelErrors {
            q: l2_error(solution, problem, Variable::Q)?,
            p: l2_error(solution, problem, Variable::P)?,
            y: l2_error(solution, problem, Variable::Y)?,
            z: l2_error(solution, problem, Variable::Z)?,
            u: l2_error(solution, problem, Variable::U)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub problem: String,
    pub k: usize,
    pub gamma: f64,
    pub tau2: f64,
    pub levels: Vec<usize>,
    pub h_values: Vec<f64>,
    pub errors: Vec<LevelErrors>,
}

impl ConvergenceReport {
    /// Rate at level index `i` (`None` for the first level or a zero error).
    pub fn rate(&self, i: usize, v: Variable) -> Option<f64> {
        if i == 0 || i >= self.errors.len() {
            return None;
        }
        compute_rates(&[self.errors[i - 1].get(v), self.errors[i].get(v)])[0]
    }

    pub fn final_rate(&self, v: Variable) -> Option<f64> {
        self.rate(self.errors.len().checked_sub(1)?, v)
    }
}

/// Right-hand side of the energy identity for `B1` (`Operator::B1`) or `B2`,
/// evaluated directly from the fields:
///
/// ```text
/// (v, v) + <(τ - s β·n/2)(w - μ), w - μ>° - ½(∇·β w, w) + <h⁻¹(P_M w - μ), P_M w - μ>°
///        + <(τ - s β·n/2) w, w>∂ + <h⁻¹ P_M w, P_M w>∂
/// ```
///
/// with `(τ, s) = (τ₁, 1)` for `B1` and `(τ₂, -1)` for `B2`.
pub fn energy_identity_rhs(
    space: &HdgSpace,
    adjoint: bool,
    v: &VolumeField,
    w: &VolumeField,
    mu: &FaceField,
) -> f64 {
    let mesh = &space.mesh;
    let nv = space.layout.nv;
    let sign = if adjoint { -1.0 } else { 1.0 };
    let h_inv = 1.0 / space.h;
    let mut vv = vec![0.0; nv];
    let mut ww = vec![0.0; space.layout.nw];
    let mut mm = vec![0.0; space.layout.nm];
    let mut total = 0.0;
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e);
        let (vc, wc) = (v.element(e), w.element(e));
        for (&xi, &wq) in space.volume_rule.points.iter().zip(&space.volume_rule.weights) {
            space.flux_basis.values_into(xi, &mut vv);
            space.state_basis.values_into(xi, &mut ww);
            let x = geo.map(xi);
            let (a, b) = (eval(&vc[..nv], &vv), eval(&vc[nv..], &vv));
            let wx = eval(wc, &ww);
            total += wq * geo.det * (a * a + b * b - 0.5 * (space.div_beta)(x) * wx * wx);
        }
        for lf in 0..3 {
            let fg = mesh.face_geometry(e, lf).expect("face in range");
            let face = mesh.elem_faces[e][lf].0;
            let interior = mesh.interior_index[face];
            // P_M w on this face
            let mut pm = vec![0.0; space.layout.nm];
            let samples: Vec<(Point, f64, f64, Vec<f64>)> = space
                .edge_rule
                .points
                .iter()
                .zip(&space.edge_rule.weights)
                .map(|(&t, &wt)| {
                    let x = fg.point(t);
                    space.state_basis.values_into(geo.pull_back(x), &mut ww);
                    space.trace_basis.values_into(t, &mut mm);
                    (x, wt * fg.length, eval(wc, &ww), mm.clone())
                })
                .collect();
            for (_, om, wx, m) in &samples {
                for (c, mi) in pm.iter_mut().zip(m) {
                    *c += om * wx * mi / fg.length;
                }
            }
            for (x, om, wx, m) in &samples {
                let beta_n = (space.beta)(*x)[0] * fg.normal[0] + (space.beta)(*x)[1] * fg.normal[1];
                let (tau1, tau2) = space.stabilization.values(*x, fg.normal, beta_n);
                let tau = if adjoint { tau2 } else { tau1 };
                let weight = tau - sign * 0.5 * beta_n;
                let pmw = eval(&pm, m);
                let lam = interior.map_or(0.0, |i| eval(mu.face(i), m));
                total += om * (weight * (wx - lam).powi(2) + h_inv * (pmw - lam).powi(2));
            }
        }
    }
    total
}

/// Per interior face and mode, the sum over both neighbours of
/// `<q̂·n + β·n ŷ, μ>` (state) and `<p̂·n - β·n ẑ, μ>` (adjoint).
pub fn flux_jumps(space: &HdgSpace, solution: &DiscreteSolution) -> (FaceField, FaceField) {
    let mesh = &space.mesh;
    let l = space.layout;
    let h_inv = 1.0 / space.h;
    let mut state = FaceField::zeros(mesh.num_interior_faces(), l.nm);
    let mut adjoint = FaceField::zeros(mesh.num_interior_faces(), l.nm);
    let mut vv = vec![0.0; l.nv];
    let mut ww = vec![0.0; l.nw];
    let mut mm = vec![0.0; l.nm];
    for (i, &face) in mesh.interior_faces.iter().enumerate() {
        for &(e, lf) in &mesh.face_elements[face] {
            let geo = mesh.element_geometry(e);
            let fg = mesh.face_geometry(e, lf).expect("face in range");
            let n = fg.normal;
            let pts: Vec<(Point, f64, Vec<f64>, Vec<f64>, Vec<f64>)> = space
                .edge_rule
                .points
                .iter()
                .zip(&space.edge_rule.weights)
                .map(|(&t, &wt)| {
                    let x = fg.point(t);
                    let xi = geo.pull_back(x);
                    space.flux_basis.values_into(xi, &mut vv);
                    space.state_basis.values_into(xi, &mut ww);
                    space.trace_basis.values_into(t, &mut mm);
                    (x, wt * fg.length, vv.clone(), ww.clone(), mm.clone())
                })
                .collect();
            for (var, out) in [(0, &mut state), (1, &mut adjoint)] {
                let (flux, scal, hat) = if var == 0 {
                    (&solution.q, &solution.y, &solution.y_hat)
                } else {
                    (&solution.p, &solution.z, &solution.z_hat)
                };
                let (fc, sc, hc) = (flux.element(e), scal.element(e), hat.face(i));
                let mut pm = vec![0.0; l.nm];
                for (_, om, _, w, m) in &pts {
                    let s = eval(sc, w);
                    for (c, mi) in pm.iter_mut().zip(m) {
                        *c += om * s * mi / fg.length;
                    }
                }
                for (x, om, v, w, m) in &pts {
                    let beta_n = (space.beta)(*x)[0] * n[0] + (space.beta)(*x)[1] * n[1];
                    let (tau1, tau2) = space.stabilization.values(*x, n, beta_n);
                    let (tau, sigma) = if var == 0 { (tau1, 1.0) } else { (tau2, -1.0) };
                    let fln = eval(&fc[..l.nv], v) * n[0] + eval(&fc[l.nv..], v) * n[1];
                    let s = eval(sc, w);
                    let lam = eval(hc, m);
                    let numerical =
                        fln + h_inv * (eval(&pm, m) - lam) + tau * (s - lam) + sigma * beta_n * lam;
                    for (o, mi) in out.face_mut(i).iter_mut().zip(m) {
                        *o += om * numerical * mi;
                    }
                }
            }
        }
    }
    (state, adjoint)
}
