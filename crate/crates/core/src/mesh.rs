//! Conforming triangulations of polygonal domains with classified faces.
//!
//! Local face `f` of an element joins its vertices `f` and `(f + 1) % 3`.
//! Every face stores its vertex pair with the smaller global index first,
//! and that order fixes the face parametrization seen by both neighbours.

use std::collections::HashMap;

use crate::error::{HdgError, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    Interior,
    Boundary,
}

/// Outward geometry of one element face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceGeometry {
    pub normal: Point,
    pub length: f64,
    /// Image of `t = 0` under the global face parametrization.
    pub origin: Point,
    /// `x(1) - x(0)` of the global face parametrization.
    pub direction: Point,
}

impl FaceGeometry {
    /// Point on the face at reference edge coordinate `t` in `[0, 1]`.
    pub fn point(&self, t: f64) -> Point {
        [
            self.origin[0] + t * self.direction[0],
            self.origin[1] + t * self.direction[1],
        ]
    }
}

/// Affine map `x = origin + jacobian * xi` from the reference triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementGeometry {
    pub origin: Point,
    /// Column-major: `jacobian[c]` is the image of the `c`-th reference axis.
    pub jacobian: [Point; 2],
    pub det: f64,
    /// Rows of `J^{-1}`.
    pub inverse: [Point; 2],
}

impl ElementGeometry {
    pub fn map(&self, xi: Point) -> Point {
        [
            self.origin[0] + self.jacobian[0][0] * xi[0] + self.jacobian[1][0] * xi[1],
            self.origin[1] + self.jacobian[0][1] * xi[0] + self.jacobian[1][1] * xi[1],
        ]
    }

    pub fn pull_back(&self, x: Point) -> Point {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        [
            self.inverse[0][0] * d[0] + self.inverse[0][1] * d[1],
            self.inverse[1][0] * d[0] + self.inverse[1][1] * d[1],
        ]
    }

    /// Physical gradient from a reference gradient (`J^{-T} g`).
    pub fn push_gradient(&self, g: Point) -> Point {
        [
            self.inverse[0][0] * g[0] + self.inverse[1][0] * g[1],
            self.inverse[0][1] * g[0] + self.inverse[1][1] * g[1],
        ]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    /// Counter-clockwise vertex triples.
    pub elements: Vec<[usize; 3]>,
    /// Vertex pairs, smaller index first.
    pub faces: Vec<[usize; 2]>,
    pub face_class: Vec<FaceClass>,
    /// Per element and local face: (global face, +1 if the local edge runs
    /// along the global face orientation, -1 otherwise).
    pub elem_faces: Vec<[(usize, i8); 3]>,
    /// Per face: incident (element, local face) pairs, ascending element.
    pub face_elements: Vec<Vec<(usize, usize)>>,
    /// Position of each face among the interior faces, if interior.
    pub interior_index: Vec<Option<usize>>,
    pub interior_faces: Vec<usize>,
    pub h: f64,
}

impl Mesh {
    /// Uniform `n x n` split-square triangulation of the unit square.
    ///
    /// Every square is cut along the diagonal from its lower-left to its
    /// upper-right corner, so every element has diameter `sqrt(2)/n`.
    pub fn build_uniform(n: usize) -> Result<Mesh> {
        if n == 0 {
            return Err(HdgError::InvalidArgument(
                "uniform mesh needs n >= 1".to_string(),
            ));
        }
        let stride = n + 1;
        let mut vertices = Vec::with_capacity(stride * stride);
        for j in 0..=n {
            for i in 0..=n {
                vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
            }
        }
        let mut elements = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let v00 = j * stride + i;
                let v10 = v00 + 1;
                let v01 = v00 + stride;
                let v11 = v01 + 1;
                elements.push([v00, v10, v11]);
                elements.push([v00, v11, v01]);
            }
        }
        Mesh::from_triangles(vertices, elements)
    }

    /// Builds face connectivity for an arbitrary conforming triangulation.
    pub fn from_triangles(vertices: Vec<Point>, elements: Vec<[usize; 3]>) -> Result<Mesh> {
        if elements.is_empty() {
            return Err(HdgError::InvalidArgument("mesh has no elements".into()));
        }
        let mut face_lookup: HashMap<[usize; 2], usize> = HashMap::new();
        let mut faces: Vec<[usize; 2]> = Vec::new();
        let mut face_elements: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut elem_faces = Vec::with_capacity(elements.len());
        let mut h: f64 = 0.0;

        for (e, tri) in elements.iter().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(HdgError::InvalidArgument(format!(
                    "element {e} references a missing vertex"
                )));
            }
            let [a, b, c] = tri.map(|v| vertices[v]);
            let signed = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
            if signed <= 0.0 {
                return Err(HdgError::InvalidArgument(format!(
                    "element {e} is not counter-clockwise"
                )));
            }
            let mut local = [(0usize, 1i8); 3];
            for (f, slot) in local.iter_mut().enumerate() {
                let (va, vb) = (tri[f], tri[(f + 1) % 3]);
                let key = [va.min(vb), va.max(vb)];
                let sign = if va < vb { 1 } else { -1 };
                let idx = *face_lookup.entry(key).or_insert_with(|| {
                    faces.push(key);
                    face_elements.push(Vec::new());
                    faces.len() - 1
                });
                face_elements[idx].push((e, f));
                *slot = (idx, sign);
                let (pa, pb) = (vertices[va], vertices[vb]);
                h = h.max((pb[0] - pa[0]).hypot(pb[1] - pa[1]));
            }
            elem_faces.push(local);
        }

        let mut face_class = Vec::with_capacity(faces.len());
        let mut interior_index = Vec::with_capacity(faces.len());
        let mut interior_faces = Vec::new();
        for (idx, incident) in face_elements.iter().enumerate() {
            match incident.len() {
                1 => {
                    face_class.push(FaceClass::Boundary);
                    interior_index.push(None);
                }
                2 => {
                    face_class.push(FaceClass::Interior);
                    interior_index.push(Some(interior_faces.len()));
                    interior_faces.push(idx);
                }
                m => {
                    return Err(HdgError::InvalidArgument(format!(
                        "face {idx} is shared by {m} elements"
                    )))
                }
            }
        }

        Ok(Mesh {
            vertices,
            elements,
            faces,
            face_class,
            elem_faces,
            face_elements,
            interior_index,
            interior_faces,
            h,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn num_interior_faces(&self) -> usize {
        self.interior_faces.len()
    }

    pub fn num_boundary_faces(&self) -> usize {
        self.faces.len() - self.interior_faces.len()
    }

    pub fn is_boundary(&self, face: usize) -> bool {
        self.face_class[face] == FaceClass::Boundary
    }

    pub fn element_geometry(&self, elem: usize) -> ElementGeometry {
        let [a, b, c] = self.elements[elem].map(|v| self.vertices[v]);
        let j0 = [b[0] - a[0], b[1] - a[1]];
        let j1 = [c[0] - a[0], c[1] - a[1]];
        let det = j0[0] * j1[1] - j1[0] * j0[1];
        let inverse = [[j1[1] / det, -j1[0] / det], [-j0[1] / det, j0[0] / det]];
        ElementGeometry {
            origin: a,
            jacobian: [j0, j1],
            det,
            inverse,
        }
    }

    /// Compensated sum of all element areas.
    pub fn total_area(&self) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for e in 0..self.num_elements() {
            let a = self.signed_area(e);
            let t = sum + a;
            comp += if sum.abs() >= a.abs() { (sum - t) + a } else { (a - t) + sum };
            sum = t;
        }
        sum + comp
    }

    /// Signed area (positive for counter-clockwise elements).
    pub fn signed_area(&self, elem: usize) -> f64 {
        self.element_geometry(elem).area()
    }

    pub fn face_geometry(&self, elem: usize, local_face: usize) -> Result<FaceGeometry> {
        if elem >= self.elements.len() || local_face >= 3 {
            return Err(HdgError::InvalidArgument(format!(
                "no face {local_face} on element {elem}"
            )));
        }
        let tri = self.elements[elem];
        let a = self.vertices[tri[local_face]];
        let b = self.vertices[tri[(local_face + 1) % 3]];
        let t = [b[0] - a[0], b[1] - a[1]];
        let length = t[0].hypot(t[1]);
        let normal = [t[1] / length, -t[0] / length];
        let [g0, g1] = self.faces[self.elem_faces[elem][local_face].0];
        let (p0, p1) = (self.vertices[g0], self.vertices[g1]);
        Ok(FaceGeometry {
            normal,
            length,
            origin: p0,
            direction: [p1[0] - p0[0], p1[1] - p0[1]],
        })
    }
}
