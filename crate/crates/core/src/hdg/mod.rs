//! HDG discretization: spaces, stabilization, local element systems, the
//! bilinear operators `B1`/`B2`, and `L2` projections.
//!
//! Fluxes live in `[P^k(K)]^2`, states and control in `P^{k+1}(K)`, and
//! traces in `P^k(e)`. Physical basis functions are the orthonormal reference
//! functions composed with the inverse affine map, so the element mass matrix
//! is `det(J) * I`; face basis functions follow the global face
//! parametrization, so the face mass matrix is `|e| * I`.

mod local;
mod operators;
mod projection;
mod stabilization;

use std::sync::Arc;

use crate::basis::{edge_quadrature, tri_quadrature, EdgeBasis, EdgeRule, TriBasis, TriangleRule};
use crate::error::{HdgError, Result};
use crate::mesh::{Mesh, Point};
use crate::problems::{ProblemData, ScalarFn, VectorFn};

pub use local::{assemble_element, LocalSystem};
pub use operators::{b1_apply, b2_apply, FieldTriple};
pub use projection::{
    project_face, project_flux, project_scalar, project_scalar_faces, project_volume,
    restrict_to_interior,
};
pub use stabilization::{StabilizationConfig, Tau1Rule, Tau2Fn};

/// Coefficients of a discontinuous volume field, element-major.
///
/// Flux fields store the `x` components of all basis functions first, then
/// the `y` components.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeField {
    pub dofs_per_element: usize,
    pub values: Vec<f64>,
}

impl VolumeField {
    pub fn zeros(num_elements: usize, dofs_per_element: usize) -> Self {
        VolumeField {
            dofs_per_element,
            values: vec![0.0; num_elements * dofs_per_element],
        }
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.values[e * self.dofs_per_element..(e + 1) * self.dofs_per_element]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.values[e * self.dofs_per_element..(e + 1) * self.dofs_per_element]
    }

    pub fn num_elements(&self) -> usize {
        self.values.len() / self.dofs_per_element.max(1)
    }

    pub fn scaled(&self, s: f64) -> Self {
        VolumeField {
            dofs_per_element: self.dofs_per_element,
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }
}

/// Coefficients of a face field, face-major. Which faces are stored (all
/// mesh faces, or interior faces in `Mesh::interior_faces` order) is fixed
/// by the producer.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub dofs_per_face: usize,
    pub values: Vec<f64>,
}

impl FaceField {
    pub fn zeros(num_faces: usize, dofs_per_face: usize) -> Self {
        FaceField {
            dofs_per_face,
            values: vec![0.0; num_faces * dofs_per_face],
        }
    }

    pub fn face(&self, f: usize) -> &[f64] {
        &self.values[f * self.dofs_per_face..(f + 1) * self.dofs_per_face]
    }

    pub fn face_mut(&mut self, f: usize) -> &mut [f64] {
        &mut self.values[f * self.dofs_per_face..(f + 1) * self.dofs_per_face]
    }

    pub fn num_faces(&self) -> usize {
        self.values.len() / self.dofs_per_face.max(1)
    }

    pub fn scaled(&self, s: f64) -> Self {
        FaceField {
            dofs_per_face: self.dofs_per_face,
            values: self.values.iter().map(|v| s * v).collect(),
        }
    }
}

/// Local dof layout: interior `[q (2nv), y (nw), p (2nv), z (nw)]`, traces
/// `[ŷ on faces 0..3, ẑ on faces 0..3]` with `nm` modes each. Test functions
/// use the same layout (`r1, w1, r2, w2, μ1, μ2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalLayout {
    pub nv: usize,
    pub nw: usize,
    pub nm: usize,
}

impl LocalLayout {
    pub fn new(k: usize) -> Self {
        LocalLayout {
            nv: (k + 1) * (k + 2) / 2,
            nw: (k + 2) * (k + 3) / 2,
            nm: k + 1,
        }
    }
    pub fn q(&self) -> usize {
        0
    }
    pub fn y(&self) -> usize {
        2 * self.nv
    }
    pub fn p(&self) -> usize {
        2 * self.nv + self.nw
    }
    pub fn z(&self) -> usize {
        4 * self.nv + self.nw
    }
    pub fn num_interior(&self) -> usize {
        4 * self.nv + 2 * self.nw
    }
    /// Offset of ŷ (`var = 0`) or ẑ (`var = 1`) on local face `f` within the trace block.
    pub fn trace(&self, var: usize, f: usize) -> usize {
        (3 * var + f) * self.nm
    }
    pub fn num_traces(&self) -> usize {
        6 * self.nm
    }
}

pub(crate) struct VolumePoint {
    pub x: Point,
    pub weight: f64,
    pub v: Vec<f64>,
    pub grad_v: Vec<Point>,
    pub w: Vec<f64>,
    pub grad_w: Vec<Point>,
}

pub(crate) struct FacePoint {
    pub x: Point,
    pub weight: f64,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    pub mu: Vec<f64>,
}

pub(crate) struct FaceTable {
    pub face: usize,
    pub boundary: bool,
    pub normal: Point,
    pub length: f64,
    pub points: Vec<FacePoint>,
}

/// Basis values at the physical quadrature points of one element.
pub(crate) struct ElementTable {
    pub volume: Vec<VolumePoint>,
    pub faces: Vec<FaceTable>,
}

/// Everything needed to evaluate the discrete forms on a mesh at degree `k`.
#[derive(Clone)]
pub struct HdgSpace {
    pub mesh: Arc<Mesh>,
    pub k: usize,
    pub layout: LocalLayout,
    pub flux_basis: TriBasis,
    pub state_basis: TriBasis,
    pub trace_basis: EdgeBasis,
    pub volume_rule: TriangleRule,
    pub edge_rule: EdgeRule,
    pub beta: VectorFn,
    pub div_beta: ScalarFn,
    pub stabilization: StabilizationConfig,
    /// Mesh parameter used in the `h^{-1}` penalty.
    pub h: f64,
}

impl std::fmt::Debug for HdgSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HdgSpace")
            .field("k", &self.k)
            .field("elements", &self.mesh.num_elements())
            .field("h", &self.h)
            .finish()
    }
}

impl HdgSpace {
    /// Default rules: exactness `2(k+2)+2` on triangles and `2(k+1)+2` on edges.
    pub fn new(
        mesh: Arc<Mesh>,
        k: usize,
        problem: &ProblemData,
        stabilization: StabilizationConfig,
    ) -> Result<HdgSpace> {
        Self::with_convection(
            mesh,
            k,
            problem.beta.clone(),
            problem.div_beta.clone(),
            stabilization,
        )
    }

    pub fn with_convection(
        mesh: Arc<Mesh>,
        k: usize,
        beta: VectorFn,
        div_beta: ScalarFn,
        stabilization: StabilizationConfig,
    ) -> Result<HdgSpace> {
        if k > 8 {
            return Err(HdgError::InvalidArgument(format!(
                "degree {k} is above the supported maximum 8"
            )));
        }
        let h = mesh.h;
        Ok(HdgSpace {
            mesh,
            k,
            layout: LocalLayout::new(k),
            flux_basis: TriBasis::new(k)?,
            state_basis: TriBasis::new(k + 1)?,
            trace_basis: EdgeBasis::new(k),
            volume_rule: tri_quadrature(2 * (k + 2) + 2)?,
            edge_rule: edge_quadrature(2 * (k + 1) + 2)?,
            beta,
            div_beta,
            stabilization,
            h,
        })
    }

    pub fn flux_field_zeros(&self) -> VolumeField {
        VolumeField::zeros(self.mesh.num_elements(), 2 * self.layout.nv)
    }

    pub fn state_field_zeros(&self) -> VolumeField {
        VolumeField::zeros(self.mesh.num_elements(), self.layout.nw)
    }

    pub fn trace_field_zeros(&self) -> FaceField {
        FaceField::zeros(self.mesh.num_interior_faces(), self.layout.nm)
    }

    pub(crate) fn element_table(&self, elem: usize) -> ElementTable {
        self.element_table_with(elem, &self.volume_rule, &self.edge_rule)
    }

    pub(crate) fn element_table_with(
        &self,
        elem: usize,
        volume_rule: &TriangleRule,
        edge_rule: &EdgeRule,
    ) -> ElementTable {
        let mesh = &self.mesh;
        let geometry = mesh.element_geometry(elem);
        let (nv, nw, nm) = (self.layout.nv, self.layout.nw, self.layout.nm);

        let volume = volume_rule
            .points
            .iter()
            .zip(&volume_rule.weights)
            .map(|(&xi, &wq)| {
                let mut v = vec![0.0; nv];
                let mut w = vec![0.0; nw];
                let mut grad_v = vec![[0.0; 2]; nv];
                let mut grad_w = vec![[0.0; 2]; nw];
                self.flux_basis.values_into(xi, &mut v);
                self.state_basis.values_into(xi, &mut w);
                self.flux_basis.gradients_into(xi, &mut grad_v);
                self.state_basis.gradients_into(xi, &mut grad_w);
                for g in grad_v.iter_mut().chain(grad_w.iter_mut()) {
                    *g = geometry.push_gradient(*g);
                }
                VolumePoint {
                    x: geometry.map(xi),
                    weight: wq * geometry.det,
                    v,
                    grad_v,
                    w,
                    grad_w,
                }
            })
            .collect();

        let faces = (0..3)
            .map(|lf| {
                let fg = mesh
                    .face_geometry(elem, lf)
                    .expect("element and local face are in range");
                let face = mesh.elem_faces[elem][lf].0;
                let points = edge_rule
                    .points
                    .iter()
                    .zip(&edge_rule.weights)
                    .map(|(&t, &wt)| {
                        let x = fg.point(t);
                        let xi = geometry.pull_back(x);
                        let mut v = vec![0.0; nv];
                        let mut w = vec![0.0; nw];
                        let mut mu = vec![0.0; nm];
                        self.flux_basis.values_into(xi, &mut v);
                        self.state_basis.values_into(xi, &mut w);
                        self.trace_basis.values_into(t, &mut mu);
                        FacePoint {
                            x,
                            weight: wt * fg.length,
                            v,
                            w,
                            mu,
                        }
                    })
                    .collect();
                FaceTable {
                    face,
                    boundary: mesh.is_boundary(face),
                    normal: fg.normal,
                    length: fg.length,
                    points,
                }
            })
            .collect();

        ElementTable {
            volume,
            faces,
        }
    }
}

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}
