//! Element- and face-wise `L2` projections `Π`, `𝚷` and `P_M`.

use super::{FaceField, HdgSpace, VolumeField};
use crate::basis::{edge_quadrature, tri_quadrature, EdgeBasis, TriBasis, MAX_EXACTNESS};
use crate::error::Result;
use crate::mesh::{Mesh, Point};

fn projection_exactness(degree: usize) -> usize {
    (2 * degree + 8).min(MAX_EXACTNESS)
}

/// Projection of `f` onto discontinuous `P^degree` on every element.
pub fn project_scalar(mesh: &Mesh, degree: usize, f: &dyn Fn(Point) -> f64) -> Result<VolumeField> {
    let basis = TriBasis::new(degree)?;
    let rule = tri_quadrature(projection_exactness(degree))?;
    let mut out = VolumeField::zeros(mesh.num_elements(), basis.dim);
    let mut v = vec![0.0; basis.dim];
    for e in 0..mesh.num_elements() {
        let geo = mesh.element_geometry(e);
        let coeffs = out.element_mut(e);
        // mass matrix is det(J) I, so the det cancels against the weights
        for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
            basis.values_into(xi, &mut v);
            let fx = f(geo.map(xi));
            for (c, vi) in coeffs.iter_mut().zip(&v) {
                *c += w * fx * vi;
            }
        }
    }
    Ok(out)
}

/// Projection of `f` onto `P^degree(e)` on every mesh face (all faces, face index order).
pub fn project_scalar_faces(
    mesh: &Mesh,
    degree: usize,
    f: &dyn Fn(Point) -> f64,
) -> Result<FaceField> {
    let basis = EdgeBasis::new(degree);
    let rule = edge_quadrature(projection_exactness(degree))?;
    let mut out = FaceField::zeros(mesh.num_faces(), basis.dim);
    let mut mu = vec![0.0; basis.dim];
    for face in 0..mesh.num_faces() {
        let [a, b] = mesh.faces[face].map(|v| mesh.vertices[v]);
        let coeffs = out.face_mut(face);
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            basis.values_into(t, &mut mu);
            let fx = f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
            for (c, m) in coeffs.iter_mut().zip(&mu) {
                *c += w * fx * m;
            }
        }
    }
    Ok(out)
}

/// `Π f` onto the state space `W_h`.
pub fn project_volume(space: &HdgSpace, f: &dyn Fn(Point) -> f64) -> VolumeField {
    project_scalar(&space.mesh, space.k + 1, f).expect("degree within quadrature range")
}

/// `𝚷 f` onto the flux space `V_h`, component-wise.
pub fn project_flux(space: &HdgSpace, f: impl Fn(Point) -> Point) -> VolumeField {
    let mesh = &space.mesh;
    let fx = project_scalar(mesh, space.k, &|x| f(x)[0]).expect("degree within range");
    let fy = project_scalar(mesh, space.k, &|x| f(x)[1]).expect("degree within range");
    let nv = space.layout.nv;
    let mut out = space.flux_field_zeros();
    for e in 0..mesh.num_elements() {
        let dst = out.element_mut(e);
        dst[..nv].copy_from_slice(fx.element(e));
        dst[nv..].copy_from_slice(fy.element(e));
    }
    out
}

/// `P_M f` on all mesh faces.
pub fn project_face(space: &HdgSpace, f: &dyn Fn(Point) -> f64) -> FaceField {
    project_scalar_faces(&space.mesh, space.k, f).expect("degree within range")
}

/// Restricts an all-faces field to the interior faces, in `Mesh::interior_faces` order.
pub fn restrict_to_interior(mesh: &Mesh, all: &FaceField) -> FaceField {
    let mut out = FaceField::zeros(mesh.num_interior_faces(), all.dofs_per_face);
    for (i, &face) in mesh.interior_faces.iter().enumerate() {
        out.face_mut(i).copy_from_slice(all.face(face));
    }
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn face_projection_of_linear_is_mean() {
        let mesh = Mesh::from_triangles(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let proj = project_scalar_faces(&mesh, 0, &|x| x[0]).unwrap();
        // face 0 runs from (0,0) to (1,0): f(t) = t, mean 1/2, basis value 1
        assert_eq!(mesh.faces[0], [0, 1]);
        assert!((proj.face(0)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polynomial_is_reproduced() {
        let mesh = Mesh::build_uniform(3).unwrap();
        let f = |x: Point| 1.0 + 2.0 * x[0] - x[1] + 3.0 * x[0] * x[1] - x[1] * x[1];
        let proj = project_scalar(&mesh, 2, &f).unwrap();
        let basis = TriBasis::new(2).unwrap();
        for e in 0..mesh.num_elements() {
            let geo = mesh.element_geometry(e);
            for xi in [[0.1, 0.2], [0.5, 0.4], [0.0, 0.0]] {
                let v = basis.eval_basis(xi).unwrap();
                let val: f64 = proj.element(e).iter().zip(&v).map(|(c, b)| c * b).sum();
                assert!((val - f(geo.map(xi))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn residual_is_orthogonal() {
        let mesh = Mesh::build_uniform(4).unwrap();
        let f = |x: Point| (PI * x[0]).sin() * (1.0 + x[1]).exp();
        for degree in 0..=3 {
            let proj = project_scalar(&mesh, degree, &f).unwrap();
            let basis = TriBasis::new(degree).unwrap();
            let rule = tri_quadrature(MAX_EXACTNESS).unwrap();
            for e in 0..mesh.num_elements() {
                let geo = mesh.element_geometry(e);
                for i in 0..basis.dim {
                    let r = rule.integrate(|xi| {
                        let v = basis.eval_basis(xi).unwrap();
                        let ph: f64 = proj.element(e).iter().zip(&v).map(|(c, b)| c * b).sum();
                        (f(geo.map(xi)) - ph) * v[i]
                    }) * geo.det;
                    assert!(r.abs() < 1e-12, "degree {degree}: {r:e}");
                }
            }
        }
    }
}
