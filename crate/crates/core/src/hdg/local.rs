use nalgebra::{DMatrix, DVector};

use super::{dot, ElementTable, HdgSpace, LocalLayout};
use crate::error::{HdgError, Result};
use crate::problems::ProblemData;

const MIN_RCOND: f64 = 1e-13;

/// Element equations split into interior (`x_K`) and trace (`λ_K`) blocks:
///
/// ```text
/// [ A  B ] [ x_K ]   [ rhs_interior ]
/// [ C  D ] [ λ_K ] = [ rhs_trace    ]
/// ```
///
/// Trace rows and columns of boundary faces are zero; the boundary data
/// `ŷ = P_M g`, `ẑ = 0` is already folded into `rhs_interior`.
#[derive(Debug, Clone)]
pub struct LocalSystem {
    pub element: usize,
    pub layout: LocalLayout,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub rhs_interior: DVector<f64>,
    pub rhs_trace: DVector<f64>,
    pub a_inv: DMatrix<f64>,
    /// Per local face: (global face, position among interior faces).
    pub faces: [(usize, Option<usize>); 3],
}

/// Which of the two coupled first-order systems a block belongs to.
#[derive(Clone, Copy)]
enum Field {
    /// `(q, y, ŷ)` tested by `(r1, w1, μ1)`.
    State,
    /// `(p, z, ẑ)` tested by `(r2, w2, μ2)`.
    Adjoint,
}

/// Adds the `B1` (state) or `B2` (adjoint) bilinear form of one element to
/// `m`, over all three faces.
fn add_operator_block(
    space: &HdgSpace,
    table: &ElementTable,
    field: Field,
    m: &mut DMatrix<f64>,
) {
    let l = space.layout;
    let (nv, nw, nm) = (l.nv, l.nw, l.nm);
    let ni = l.num_interior();
    let (flux, scalar, var, sigma) = match field {
        Field::State => (l.q(), l.y(), 0, 1.0),
        Field::Adjoint => (l.p(), l.z(), 1, -1.0),
    };
    let h_inv = 1.0 / space.h;

    for pt in &table.volume {
        let beta = (space.beta)(pt.x);
        let div_beta = match field {
            Field::State => (space.div_beta)(pt.x),
            Field::Adjoint => 0.0,
        };
        let om = pt.weight;
        for c in 0..2 {
            for i in 0..nv {
                let row = flux + c * nv + i;
                // (q, r)
                for j in 0..nv {
                    m[(row, flux + c * nv + j)] += om * pt.v[i] * pt.v[j];
                }
                // -(y, ∇·r)
                for j in 0..nw {
                    m[(row, scalar + j)] -= om * pt.w[j] * pt.grad_v[i][c];
                }
            }
        }
        for i in 0..nw {
            let row = scalar + i;
            // -(q, ∇w)
            for c in 0..2 {
                for j in 0..nv {
                    m[(row, flux + c * nv + j)] -= om * pt.v[j] * pt.grad_w[i][c];
                }
            }
            // ∓(β y, ∇w) - (∇·β y, w)
            let conv = dot(beta, pt.grad_w[i]);
            for j in 0..nw {
                m[(row, scalar + j)] -= om * pt.w[j] * (sigma * conv + div_beta * pt.w[i]);
            }
        }
    }

    for (lf, ft) in table.faces.iter().enumerate() {
        let n = ft.normal;
        let trace = ni + l.trace(var, lf);
        // <P_M s, w> = Σ_m <s, μ_m><w, μ_m> / |e|
        let mut moments = DMatrix::<f64>::zeros(nm, nw);
        for pt in &ft.points {
            let beta_n = dot((space.beta)(pt.x), n);
            let (tau1, tau2) = space.stabilization.values(pt.x, n, beta_n);
            let tau = match field {
                Field::State => tau1,
                Field::Adjoint => tau2,
            };
            let om = pt.weight;
            for mm in 0..nm {
                for j in 0..nw {
                    moments[(mm, j)] += om * pt.mu[mm] * pt.w[j];
                }
            }
            for c in 0..2 {
                for i in 0..nv {
                    // <λ, r·n>
                    for mm in 0..nm {
                        m[(flux + c * nv + i, trace + mm)] += om * pt.mu[mm] * pt.v[i] * n[c];
                    }
                }
            }
            for i in 0..nw {
                let row = scalar + i;
                // <q·n + τ s, w>
                for c in 0..2 {
                    for j in 0..nv {
                        m[(row, flux + c * nv + j)] += om * pt.v[j] * n[c] * pt.w[i];
                    }
                }
                for j in 0..nw {
                    m[(row, scalar + j)] += om * tau * pt.w[j] * pt.w[i];
                }
                // <(±β·n - h⁻¹ - τ) λ, w>
                for mm in 0..nm {
                    m[(row, trace + mm)] +=
                        om * (sigma * beta_n - h_inv - tau) * pt.mu[mm] * pt.w[i];
                }
            }
            // -<q·n ± β·n λ + h⁻¹(P_M s - λ) + τ(s - λ), μ>
            for mu_i in 0..nm {
                let row = trace + mu_i;
                for c in 0..2 {
                    for j in 0..nv {
                        m[(row, flux + c * nv + j)] -= om * pt.v[j] * n[c] * pt.mu[mu_i];
                    }
                }
                for j in 0..nw {
                    m[(row, scalar + j)] -= om * (h_inv + tau) * pt.w[j] * pt.mu[mu_i];
                }
                for mm in 0..nm {
                    m[(row, trace + mm)] -=
                        om * (sigma * beta_n - h_inv - tau) * pt.mu[mm] * pt.mu[mu_i];
                }
            }
        }
        let penalty = moments.transpose() * &moments * (h_inv / ft.length);
        for i in 0..nw {
            for j in 0..nw {
                m[(scalar + i, scalar + j)] += penalty[(i, j)];
            }
        }
    }
}

/// Reciprocal 1-norm condition number from an explicit inverse.
fn rcond(a: &DMatrix<f64>, a_inv: &DMatrix<f64>) -> f64 {
    let norm1 = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    1.0 / (norm1(a) * norm1(a_inv))
}

/// Assembles the full HDG element system of `elem`.
///
/// The state control `u_h` is eliminated as `z_h / γ`.
pub fn assemble_element(
    space: &HdgSpace,
    elem: usize,
    problem: &ProblemData,
) -> Result<LocalSystem> {
    space.check_stabilization_element(elem)?;
    let l = space.layout;
    let (ni, nt) = (l.num_interior(), l.num_traces());
    let table = space.element_table(elem);

    let mut m = DMatrix::<f64>::zeros(ni + nt, ni + nt);
    let mut rhs = DVector::<f64>::zeros(ni + nt);
    add_operator_block(space, &table, Field::State, &mut m);
    add_operator_block(space, &table, Field::Adjoint, &mut m);

    let inv_gamma = 1.0 / problem.gamma;
    for pt in &table.volume {
        let om = pt.weight;
        let f = (problem.f)(pt.x);
        let y_d = (problem.y_d)(pt.x);
        for i in 0..l.nw {
            for j in 0..l.nw {
                let mass = om * pt.w[i] * pt.w[j];
                // -(u_h, w1) with u_h = z_h/γ
                m[(l.y() + i, l.z() + j)] -= inv_gamma * mass;
                // +(y_h, w2)
                m[(l.z() + i, l.y() + j)] += mass;
            }
            rhs[l.y() + i] += om * f * pt.w[i];
            rhs[l.z() + i] += om * y_d * pt.w[i];
        }
    }

    let mut faces = [(0usize, None); 3];
    for (lf, ft) in table.faces.iter().enumerate() {
        faces[lf] = (ft.face, space.mesh.interior_index[ft.face]);
        if !ft.boundary {
            continue;
        }
        // ŷ = P_M g moves to the right-hand side; ẑ = 0 contributes nothing.
        let mut g_coeffs = vec![0.0; l.nm];
        for pt in &ft.points {
            let g = (problem.g)(pt.x);
            for (c, mu) in g_coeffs.iter_mut().zip(&pt.mu) {
                *c += pt.weight * g * mu / ft.length;
            }
        }
        for var in 0..2 {
            let base = ni + l.trace(var, lf);
            for mm in 0..l.nm {
                let col = base + mm;
                if var == 0 {
                    for row in 0..ni + nt {
                        rhs[row] -= m[(row, col)] * g_coeffs[mm];
                    }
                }
                m.column_mut(col).fill(0.0);
                m.row_mut(col).fill(0.0);
                rhs[col] = 0.0;
            }
        }
    }

    let a = m.view((0, 0), (ni, ni)).into_owned();
    let a_inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(HdgError::LocalSingularity {
            element: elem,
            rcond: 0.0,
        })?;
    let rc = rcond(&a, &a_inv);
    if !(rc >= MIN_RCOND) {
        return Err(HdgError::LocalSingularity {
            element: elem,
            rcond: rc,
        });
    }

    Ok(LocalSystem {
        element: elem,
        layout: l,
        b: m.view((0, ni), (ni, nt)).into_owned(),
        c: m.view((ni, 0), (nt, ni)).into_owned(),
        d: m.view((ni, ni), (nt, nt)).into_owned(),
        rhs_interior: rhs.rows(0, ni).into_owned(),
        rhs_trace: rhs.rows(ni, nt).into_owned(),
        a,
        a_inv,
        faces,
    })
}
