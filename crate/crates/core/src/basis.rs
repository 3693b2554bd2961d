//! Reference-element polynomial spaces and quadrature.
//!
//! The reference triangle is `{(x, y) : x, y >= 0, x + y <= 1}` (area 1/2)
//! and the reference edge is `[0, 1]`. Both bases are orthonormal in the
//! reference `L2` inner product.

use nalgebra::DMatrix;

use crate::error::{HdgError, Result};
use crate::mesh::Point;

pub const MAX_EXACTNESS: usize = 20;
const DOMAIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule<P> {
    pub points: Vec<P>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl<P: Copy> QuadratureRule<P> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(P) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }
}

pub type TriangleRule = QuadratureRule<Point>;
pub type EdgeRule = QuadratureRule<f64>;

/// Gauss-Legendre nodes and weights on `[0, 1]`.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in 0..m {
        // Newton iteration on P_m in [-1, 1] from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(0.5 * (1.0 - x));
        weights.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss rule on `[0, 1]` exact for polynomials of degree `exactness`.
pub fn edge_quadrature(exactness: usize) -> Result<EdgeRule> {
    if exactness > MAX_EXACTNESS {
        return Err(HdgError::UnsupportedDegree {
            requested: exactness,
            max: MAX_EXACTNESS,
        });
    }
    let m = exactness / 2 + 1;
    let (points, weights) = gauss_legendre(m);
    Ok(QuadratureRule {
        points,
        weights,
        exactness,
    })
}

/// Collapsed (Duffy) Gauss product rule on the reference triangle.
pub fn tri_quadrature(exactness: usize) -> Result<TriangleRule> {
    if exactness > MAX_EXACTNESS {
        return Err(HdgError::UnsupportedDegree {
            requested: exactness,
            max: MAX_EXACTNESS,
        });
    }
    // The collapse factor (1 - u) raises the degree in u by one.
    let (us, wu) = gauss_legendre((exactness + 1) / 2 + 1);
    let (vs, wv) = gauss_legendre(exactness / 2 + 1);
    let mut points = Vec::with_capacity(us.len() * vs.len());
    let mut weights = Vec::with_capacity(us.len() * vs.len());
    for (&u, &a) in us.iter().zip(&wu) {
        for (&v, &b) in vs.iter().zip(&wv) {
            points.push([u, v * (1.0 - u)]);
            weights.push(a * b * (1.0 - u));
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        exactness,
    })
}

/// `dim P^k` on a triangle.
pub fn tri_dim(degree: usize) -> usize {
    (degree + 1) * (degree + 2) / 2
}

fn monomial_exponents(degree: usize) -> Vec<(u32, u32)> {
    (0..=degree as u32)
        .flat_map(|d| (0..=d).map(move |b| (d - b, b)))
        .collect()
}

const CENTROID: f64 = 1.0 / 3.0;

/// Orthonormal basis of `P^degree` on the reference triangle, stored as
/// coefficients over centroid-shifted monomials.
#[derive(Debug, Clone)]
pub struct TriBasis {
    pub degree: usize,
    pub dim: usize,
    exponents: Vec<(u32, u32)>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: DMatrix<f64>,
}

impl TriBasis {
    pub fn new(degree: usize) -> Result<TriBasis> {
        let exponents = monomial_exponents(degree);
        let dim = exponents.len();
        let rule = tri_quadrature((2 * degree).min(MAX_EXACTNESS))?;
        let mut raw = TriBasis {
            degree,
            dim,
            exponents,
            coeffs: DMatrix::identity(dim, dim),
        };
        // Two Cholesky passes: the second removes the roundoff left by the
        // conditioning of the monomial Gram matrix.
        for _ in 0..2 {
            let gram = raw.gram(&rule);
            let chol = gram.cholesky().ok_or_else(|| {
                HdgError::InvalidArgument(format!("degree {degree} Gram matrix not SPD"))
            })?;
            let l_inv = chol
                .l()
                .try_inverse()
                .expect("Cholesky factor is invertible");
            raw.coeffs = l_inv * &raw.coeffs;
        }
        Ok(raw)
    }

    fn gram(&self, rule: &TriangleRule) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.dim, self.dim);
        let mut v = vec![0.0; self.dim];
        for (&p, &w) in rule.points.iter().zip(&rule.weights) {
            self.values_into(p, &mut v);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    g[(i, j)] += w * v[i] * v[j];
                }
            }
        }
        g
    }

    /// Values at `p` without the domain check.
    pub fn values_into(&self, p: Point, out: &mut [f64]) {
        let (x, y) = (p[0] - CENTROID, p[1] - CENTROID);
        let mono: Vec<f64> = self
            .exponents
            .iter()
            .map(|&(a, b)| x.powi(a as i32) * y.powi(b as i32))
            .collect();
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            *o = (0..self.dim).map(|j| self.coeffs[(i, j)] * mono[j]).sum();
        }
    }

    /// Reference gradients at `p` without the domain check.
    pub fn gradients_into(&self, p: Point, out: &mut [Point]) {
        let (x, y) = (p[0] - CENTROID, p[1] - CENTROID);
        let mono: Vec<Point> = self
            .exponents
            .iter()
            .map(|&(a, b)| {
                let dx = if a == 0 {
                    0.0
                } else {
                    a as f64 * x.powi(a as i32 - 1) * y.powi(b as i32)
                };
                let dy = if b == 0 {
                    0.0
                } else {
                    b as f64 * x.powi(a as i32) * y.powi(b as i32 - 1)
                };
                [dx, dy]
            })
            .collect();
        for (i, o) in out.iter_mut().enumerate().take(self.dim) {
            let mut g = [0.0; 2];
            for (j, m) in mono.iter().enumerate() {
                let c = self.coeffs[(i, j)];
                g[0] += c * m[0];
                g[1] += c * m[1];
            }
            *o = g;
        }
    }

    pub fn eval_basis(&self, p: Point) -> Result<Vec<f64>> {
        check_in_triangle(p)?;
        let mut out = vec![0.0; self.dim];
        self.values_into(p, &mut out);
        Ok(out)
    }

    pub fn eval_grad(&self, p: Point) -> Result<Vec<Point>> {
        check_in_triangle(p)?;
        let mut out = vec![[0.0; 2]; self.dim];
        self.gradients_into(p, &mut out);
        Ok(out)
    }
}

fn check_in_triangle(p: Point) -> Result<()> {
    if p[0] < -DOMAIN_TOL || p[1] < -DOMAIN_TOL || p[0] + p[1] > 1.0 + DOMAIN_TOL {
        return Err(HdgError::InvalidArgument(format!(
            "point ({}, {}) outside the reference triangle",
            p[0], p[1]
        )));
    }
    Ok(())
}

/// Orthonormal scaled Legendre polynomials `sqrt(2n+1) P_n(2t-1)` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeBasis {
    pub degree: usize,
    pub dim: usize,
}

impl EdgeBasis {
    pub fn new(degree: usize) -> EdgeBasis {
        EdgeBasis {
            degree,
            dim: degree + 1,
        }
    }

    pub fn values_into(&self, t: f64, out: &mut [f64]) {
        let x = 2.0 * t - 1.0;
        let (mut p0, mut p1) = (1.0, x);
        for (n, o) in out.iter_mut().enumerate().take(self.dim) {
            let pn = match n {
                0 => 1.0,
                1 => x,
                _ => {
                    let nf = n as f64;
                    let p2 = ((2.0 * nf - 1.0) * x * p1 - (nf - 1.0) * p0) / nf;
                    p0 = p1;
                    p1 = p2;
                    p2
                }
            };
            *o = (2.0 * n as f64 + 1.0).sqrt() * pn;
        }
    }

    pub fn eval_basis(&self, t: f64) -> Result<Vec<f64>> {
        if !(-DOMAIN_TOL..=1.0 + DOMAIN_TOL).contains(&t) {
            return Err(HdgError::InvalidArgument(format!(
                "point {t} outside the reference edge"
            )));
        }
        let mut out = vec![0.0; self.dim];
        self.values_into(t, &mut out);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// Closed form of the reference-triangle moment of `x^a y^b`.
    fn monomial_moment(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_examples() {
        let rule = tri_quadrature(4).unwrap();
        assert!((rule.integrate(|_| 1.0) - 0.5).abs() < 1e-15);
        assert!((rule.integrate(|p| p[0] * p[1]) - 1.0 / 24.0).abs() < 1e-15);
        assert!((rule.integrate(|p| p[0].powi(4)) - 1.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_exactness_all_degrees() {
        for e in 0..=MAX_EXACTNESS {
            let rule = tri_quadrature(e).unwrap();
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            for d in 0..=e as u32 {
                for b in 0..=d {
                    let a = d - b;
                    let q = rule.integrate(|p| p[0].powi(a as i32) * p[1].powi(b as i32));
                    let exact = monomial_moment(a, b);
                    assert!(
                        (q - exact).abs() < 1e-13,
                        "exactness {e}: x^{a} y^{b}: {q} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn edge_examples() {
        let rule = edge_quadrature(2).unwrap();
        assert!((rule.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        assert!((rule.integrate(|t| t * t) - 1.0 / 3.0).abs() < 1e-15);
        let three = edge_quadrature(5).unwrap();
        assert_eq!(three.len(), 3);
        assert!((three.integrate(|t| t.powi(5)) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn edge_exactness_all_degrees() {
        for e in 0..=MAX_EXACTNESS {
            let rule = edge_quadrature(e).unwrap();
            for d in 0..=e as i32 {
                let q = rule.integrate(|t| t.powi(d));
                assert!((q - 1.0 / (d as f64 + 1.0)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn unsupported_exactness() {
        assert!(matches!(
            tri_quadrature(21),
            Err(HdgError::UnsupportedDegree { requested: 21, .. })
        ));
        assert!(edge_quadrature(21).is_err());
    }

    #[test]
    fn dimensions() {
        assert_eq!(TriBasis::new(0).unwrap().dim, 1);
        assert_eq!(TriBasis::new(1).unwrap().dim, 3);
        assert_eq!(TriBasis::new(2).unwrap().dim, 6);
        assert_eq!(tri_dim(5), 21);
        assert_eq!(EdgeBasis::new(3).dim, 4);
    }

    #[test]
    fn constant_is_sqrt_two() {
        let b = TriBasis::new(0).unwrap();
        let v = b.eval_basis([0.2, 0.1]).unwrap();
        assert!((v[0] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn triangle_gram_is_identity() {
        for degree in 0..=6 {
            let b = TriBasis::new(degree).unwrap();
            let rule = tri_quadrature(2 * degree).unwrap();
            let g = b.gram(&rule);
            let err = (g - DMatrix::<f64>::identity(b.dim, b.dim)).amax();
            assert!(err < 1e-12, "degree {degree}: {err:e}");
        }
    }

    #[test]
    fn edge_gram_is_identity() {
        for degree in 0..=6 {
            let b = EdgeBasis::new(degree);
            let rule = edge_quadrature(2 * degree).unwrap();
            let mut v = vec![0.0; b.dim];
            let mut g = DMatrix::<f64>::zeros(b.dim, b.dim);
            for (&t, &w) in rule.points.iter().zip(&rule.weights) {
                b.values_into(t, &mut v);
                g += w * DMatrix::from_fn(b.dim, b.dim, |i, j| v[i] * v[j]);
            }
            assert!((g - DMatrix::identity(b.dim, b.dim)).amax() < 1e-12);
        }
    }

    #[test]
    fn edge_constant_mode_symmetric() {
        let b = EdgeBasis::new(1);
        let a = b.eval_basis(0.3).unwrap();
        let c = b.eval_basis(0.7).unwrap();
        assert_eq!(a[0], c[0]);
    }

    #[test]
    fn gradients_match_central_differences() {
        let step = 1e-6;
        for degree in 0..=5 {
            let b = TriBasis::new(degree).unwrap();
            for p in [[0.2, 0.3], [0.6, 0.1], [0.1, 0.1], [0.33, 0.5]] {
                let g = b.eval_grad(p).unwrap();
                let xp = b.eval_basis([p[0] + step, p[1]]).unwrap();
                let xm = b.eval_basis([p[0] - step, p[1]]).unwrap();
                let yp = b.eval_basis([p[0], p[1] + step]).unwrap();
                let ym = b.eval_basis([p[0], p[1] - step]).unwrap();
                for i in 0..b.dim {
                    let fd = [(xp[i] - xm[i]) / (2.0 * step), (yp[i] - ym[i]) / (2.0 * step)];
                    for c in 0..2 {
                        let scale = g[i][c].abs().max(1.0);
                        assert!((fd[c] - g[i][c]).abs() < 1e-6 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn outside_points_rejected() {
        let b = TriBasis::new(1).unwrap();
        assert!(b.eval_basis([0.8, 0.3]).is_err());
        assert!(b.eval_grad([-0.1, 0.3]).is_err());
        assert!(b.eval_basis([1.0, 0.0]).is_ok());
        assert!(EdgeBasis::new(2).eval_basis(1.5).is_err());
    }
}
