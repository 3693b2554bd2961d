//! Direct quadrature evaluation of the HDG operators
//!
//! ```text
//! B1(q, y, ŷ; r, w, μ) = (q, r) - (y, ∇·r) + <ŷ, r·n>° - (q + βy, ∇w) - (∇·β y, w)
//!                      + <q·n + h⁻¹P_M y + τ₁y, w> + <(β·n - h⁻¹ - τ₁)ŷ, w>°
//!                      - <q·n + β·n ŷ + h⁻¹(P_M y - ŷ) + τ₁(y - ŷ), μ>°
//! B2(p, z, ẑ; r, w, μ) = (p, r) - (z, ∇·r) + <ẑ, r·n>° - (p - βz, ∇w)
//!                      + <p·n + h⁻¹P_M z + τ₂z, w> - <(β·n + h⁻¹ + τ₂)ẑ, w>°
//!                      - <p·n - β·n ẑ + h⁻¹(P_M z - ẑ) + τ₂(z - ẑ), μ>°
//! ```
//!
//! where `°` marks sums over element faces that are interior to the mesh.
//! This path evaluates fields pointwise and does not share code with the
//! element matrix assembly.

use rayon::prelude::*;

use super::{dot, FaceField, HdgSpace, VolumeField};
use crate::error::{HdgError, Result};

/// Flux, scalar and interior-trace coefficients of one first-order system.
#[derive(Debug, Clone, Copy)]
pub struct FieldTriple<'a> {
    pub flux: &'a VolumeField,
    pub scalar: &'a VolumeField,
    pub trace: &'a FaceField,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Operator {
    B1,
    B2,
}

fn check_dims(space: &HdgSpace, t: &FieldTriple<'_>, what: &str) -> Result<()> {
    let l = space.layout;
    let ne = space.mesh.num_elements();
    let nf = space.mesh.num_interior_faces();
    let ok = t.flux.dofs_per_element == 2 * l.nv
        && t.flux.values.len() == ne * 2 * l.nv
        && t.scalar.dofs_per_element == l.nw
        && t.scalar.values.len() == ne * l.nw
        && t.trace.dofs_per_face == l.nm
        && t.trace.values.len() == nf * l.nm;
    if ok {
        Ok(())
    } else {
        Err(HdgError::InvalidArgument(format!(
            "{what} coefficients do not match the mesh and degree {}",
            space.k
        )))
    }
}

fn combine(c: &[f64], b: &[f64]) -> f64 {
    c.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn apply(
    space: &HdgSpace,
    op: Operator,
    trial: FieldTriple<'_>,
    test: FieldTriple<'_>,
) -> Result<f64> {
    check_dims(space, &trial, "trial")?;
    check_dims(space, &test, "test")?;
    let nv = space.layout.nv;
    let nm = space.layout.nm;
    let sigma = if op == Operator::B1 { 1.0 } else { -1.0 };
    let h_inv = 1.0 / space.h;

    let per_element: Vec<f64> = (0..space.mesh.num_elements())
        .into_par_iter()
        .map(|e| {
            let table = space.element_table(e);
            let (q, y) = (trial.flux.element(e), trial.scalar.element(e));
            let (r, w) = (test.flux.element(e), test.scalar.element(e));
            let mut acc = 0.0;

            for pt in &table.volume {
                let qv = [combine(&q[..nv], &pt.v), combine(&q[nv..], &pt.v)];
                let rv = [combine(&r[..nv], &pt.v), combine(&r[nv..], &pt.v)];
                let yv = combine(y, &pt.w);
                let wv = combine(w, &pt.w);
                let div_r: f64 = (0..nv)
                    .map(|i| r[i] * pt.grad_v[i][0] + r[nv + i] * pt.grad_v[i][1])
                    .sum();
                let grad_w = pt
                    .grad_w
                    .iter()
                    .zip(w)
                    .fold([0.0; 2], |g, (gi, c)| [g[0] + c * gi[0], g[1] + c * gi[1]]);
                let beta = (space.beta)(pt.x);
                let div_beta = if op == Operator::B1 {
                    (space.div_beta)(pt.x)
                } else {
                    0.0
                };
                let flux_plus = [qv[0] + sigma * beta[0] * yv, qv[1] + sigma * beta[1] * yv];
                acc += pt.weight
                    * (dot(qv, rv) - yv * div_r - dot(flux_plus, grad_w) - div_beta * yv * wv);
            }

            for ft in &table.faces {
                let n = ft.normal;
                let interior = space.mesh.interior_index[ft.face];
                let zeros = vec![0.0; nm];
                let (lam, mu) = match interior {
                    Some(i) => (trial.trace.face(i), test.trace.face(i)),
                    None => (&zeros[..], &zeros[..]),
                };
                let mut pm = vec![0.0; nm];
                for pt in &ft.points {
                    let yv = combine(y, &pt.w);
                    for (c, m) in pm.iter_mut().zip(&pt.mu) {
                        *c += pt.weight * yv * m / ft.length;
                    }
                }
                for pt in &ft.points {
                    let beta_n = dot((space.beta)(pt.x), n);
                    let (tau1, tau2) = space.stabilization.values(pt.x, n, beta_n);
                    let tau = if op == Operator::B1 { tau1 } else { tau2 };
                    let qn = combine(&q[..nv], &pt.v) * n[0] + combine(&q[nv..], &pt.v) * n[1];
                    let rn = combine(&r[..nv], &pt.v) * n[0] + combine(&r[nv..], &pt.v) * n[1];
                    let yv = combine(y, &pt.w);
                    let wv = combine(w, &pt.w);
                    let pmy = combine(&pm, &pt.mu);
                    let lv = combine(lam, &pt.mu);
                    let mv = combine(mu, &pt.mu);
                    let trace_flux = qn
                        + sigma * beta_n * lv
                        + h_inv * (pmy - lv)
                        + tau * (yv - lv);
                    acc += pt.weight
                        * (lv * rn
                            + (qn + h_inv * pmy + tau * yv) * wv
                            + (sigma * beta_n - h_inv - tau) * lv * wv
                            - trace_flux * mv);
                }
            }
            acc
        })
        .collect();
    Ok(per_element.iter().sum())
}

/// `B1(q, y, ŷ; r₁, w₁, μ₁)` summed over the mesh.
pub fn b1_apply(space: &HdgSpace, trial: FieldTriple<'_>, test: FieldTriple<'_>) -> Result<f64> {
    apply(space, Operator::B1, trial, test)
}

/// `B2(p, z, ẑ; r₂, w₂, μ₂)` summed over the mesh.
pub fn b2_apply(space: &HdgSpace, trial: FieldTriple<'_>, test: FieldTriple<'_>) -> Result<f64> {
    apply(space, Operator::B2, trial, test)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::hdg::StabilizationConfig;
    use crate::mesh::Mesh;
    use crate::problems::example2;

    #[test]
    fn zero_inputs_give_zero() {
        let space = HdgSpace::new(
            Arc::new(Mesh::build_uniform(2).unwrap()),
            1,
            &example2(),
            StabilizationConfig::default(),
        )
        .unwrap();
        let (q, y, t) = (
            space.flux_field_zeros(),
            space.state_field_zeros(),
            space.trace_field_zeros(),
        );
        let z = FieldTriple {
            flux: &q,
            scalar: &y,
            trace: &t,
        };
        assert_eq!(b1_apply(&space, z, z).unwrap(), 0.0);
        assert_eq!(b2_apply(&space, z, z).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let space = HdgSpace::new(
            Arc::new(Mesh::build_uniform(2).unwrap()),
            1,
            &example2(),
            StabilizationConfig::default(),
        )
        .unwrap();
        let q = space.flux_field_zeros();
        let y = space.state_field_zeros();
        let bad = VolumeField::zeros(3, 6);
        let t = space.trace_field_zeros();
        let good = FieldTriple {
            flux: &q,
            scalar: &y,
            trace: &t,
        };
        let wrong = FieldTriple {
            flux: &q,
            scalar: &bad,
            trace: &t,
        };
        assert!(matches!(
            b1_apply(&space, good, wrong),
            Err(HdgError::InvalidArgument(_))
        ));
    }
}
