//! Problem data for the optimality system
//!
//! ```text
//!   -Δy + β·∇y   = f + u   in Ω,    y = g on Γ,
//!   -Δz - ∇·(βz) = y_d - y in Ω,    z = 0 on Γ,
//!    z - γu      = 0.
//! ```
//!
//! Built-in problems carry closed-form data derived by hand from chosen exact
//! states; [`ProblemData::consistency_residual`] re-derives both PDE residuals
//! by finite differences so a derivation slip shows up in tests.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::mesh::Point;

pub type ScalarFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(Point) -> Point + Send + Sync>;

#[derive(Clone)]
pub struct ExactSolution {
    pub y: ScalarFn,
    pub grad_y: VectorFn,
    pub z: ScalarFn,
    pub grad_z: VectorFn,
}

#[derive(Clone)]
pub struct ProblemData {
    pub name: String,
    pub beta: VectorFn,
    pub div_beta: ScalarFn,
    pub gamma: f64,
    pub f: ScalarFn,
    pub g: ScalarFn,
    pub y_d: ScalarFn,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("name", &self.name)
            .field("gamma", &self.gamma)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

fn scalar(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarFn {
    Arc::new(f)
}

fn vector(f: impl Fn(Point) -> Point + Send + Sync + 'static) -> VectorFn {
    Arc::new(f)
}

/// Exact state `sin(πx₁)` and adjoint `sin(πx₁)sin(πx₂)` shared by both examples.
fn sine_exact() -> ExactSolution {
    ExactSolution {
        y: scalar(|x| (PI * x[0]).sin()),
        grad_y: vector(|x| [PI * (PI * x[0]).cos(), 0.0]),
        z: scalar(|x| (PI * x[0]).sin() * (PI * x[1]).sin()),
        grad_z: vector(|x| {
            [
                PI * (PI * x[0]).cos() * (PI * x[1]).sin(),
                PI * (PI * x[0]).sin() * (PI * x[1]).cos(),
            ]
        }),
    }
}

/// Constant convection `β = (1, 1)`.
pub fn example1() -> ProblemData {
    example1_with_gamma(1.0)
}

pub fn example1_with_gamma(gamma: f64) -> ProblemData {
    ProblemData {
        name: "example1".to_string(),
        beta: vector(|_| [1.0, 1.0]),
        div_beta: scalar(|_| 0.0),
        gamma,
        f: scalar(move |x| {
            let (s, c) = (PI * x[0]).sin_cos();
            PI * PI * s + PI * c - s * (PI * x[1]).sin() / gamma
        }),
        g: scalar(|x| (PI * x[0]).sin()),
        y_d: scalar(|x| {
            let (sa, ca) = (PI * x[0]).sin_cos();
            let (sb, cb) = (PI * x[1]).sin_cos();
            sa + 2.0 * PI * PI * sa * sb - PI * ca * sb - PI * sa * cb
        }),
        exact: Some(sine_exact()),
    }
}

/// Divergence-free rotational convection `β = (x₂, x₁)`.
pub fn example2() -> ProblemData {
    example2_with_gamma(1.0)
}

pub fn example2_with_gamma(gamma: f64) -> ProblemData {
    ProblemData {
        name: "example2".to_string(),
        beta: vector(|x| [x[1], x[0]]),
        div_beta: scalar(|_| 0.0),
        gamma,
        f: scalar(move |x| {
            let (s, c) = (PI * x[0]).sin_cos();
            PI * PI * s + x[1] * PI * c - s * (PI * x[1]).sin() / gamma
        }),
        g: scalar(|x| (PI * x[0]).sin()),
        y_d: scalar(|x| {
            let (sa, ca) = (PI * x[0]).sin_cos();
            let (sb, cb) = (PI * x[1]).sin_cos();
            sa + 2.0 * PI * PI * sa * sb - x[1] * PI * ca * sb - x[0] * PI * sa * cb
        }),
        exact: Some(sine_exact()),
    }
}

/// `y = x₁`, `z = 0`: reproduced exactly by the discretization for `k >= 1`.
pub fn poly_debug() -> ProblemData {
    ProblemData {
        name: "poly_debug".to_string(),
        beta: vector(|_| [1.0, 1.0]),
        div_beta: scalar(|_| 0.0),
        gamma: 1.0,
        f: scalar(|_| 1.0),
        g: scalar(|x| x[0]),
        y_d: scalar(|x| x[0]),
        exact: Some(ExactSolution {
            y: scalar(|x| x[0]),
            grad_y: vector(|_| [1.0, 0.0]),
            z: scalar(|_| 0.0),
            grad_z: vector(|_| [0.0, 0.0]),
        }),
    }
}

/// All data identically zero; `β = (1, 1)`.
pub fn zero_data() -> ProblemData {
    ProblemData {
        name: "zero".to_string(),
        beta: vector(|_| [1.0, 1.0]),
        div_beta: scalar(|_| 0.0),
        gamma: 1.0,
        f: scalar(|_| 0.0),
        g: scalar(|_| 0.0),
        y_d: scalar(|_| 0.0),
        exact: Some(ExactSolution {
            y: scalar(|_| 0.0),
            grad_y: vector(|_| [0.0, 0.0]),
            z: scalar(|_| 0.0),
            grad_z: vector(|_| [0.0, 0.0]),
        }),
    }
}

/// Fourth-order central difference of `f` along axis `axis`.
fn diff4(f: impl Fn(Point) -> f64, x: Point, axis: usize, step: f64) -> f64 {
    let at = |s: f64| {
        let mut p = x;
        p[axis] += s * step;
        f(p)
    };
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * step)
}

impl ProblemData {
    pub fn control_exact(&self, x: Point) -> Option<f64> {
        self.exact.as_ref().map(|e| (e.z)(x) / self.gamma)
    }

    /// Pointwise residuals of the state and adjoint equations for the exact
    /// solution, with second derivatives taken by finite differences of the
    /// supplied gradients. `None` when no exact solution is attached.
    pub fn consistency_residual(&self, x: Point) -> Option<[f64; 2]> {
        let exact = self.exact.as_ref()?;
        let step = 1e-3;
        let lap = |grad: &VectorFn| {
            diff4(|p| grad(p)[0], x, 0, step) + diff4(|p| grad(p)[1], x, 1, step)
        };
        let beta = (self.beta)(x);
        let gy = (exact.grad_y)(x);
        let gz = (exact.grad_z)(x);
        let (y, z) = ((exact.y)(x), (exact.z)(x));
        let state = -lap(&exact.grad_y) + beta[0] * gy[0] + beta[1] * gy[1]
            - (self.f)(x)
            - z / self.gamma;
        let adjoint = (self.y_d)(x) - y
            + lap(&exact.grad_z)
            + beta[0] * gz[0]
            + beta[1] * gz[1]
            + (self.div_beta)(x) * z;
        Some([state, adjoint])
    }

    /// Maximum mismatch between supplied derivatives (gradients, divergence)
    /// and finite differences of the supplied functions.
    pub fn derivative_mismatch(&self, x: Point) -> f64 {
        let step = 1e-3;
        let div_fd = diff4(|p| (self.beta)(p)[0], x, 0, step)
            + diff4(|p| (self.beta)(p)[1], x, 1, step);
        let mut worst = (div_fd - (self.div_beta)(x)).abs();
        if let Some(e) = &self.exact {
            for (fun, grad) in [(&e.y, &e.grad_y), (&e.z, &e.grad_z)] {
                let g = grad(x);
                for axis in 0..2 {
                    let fd = diff4(|p| fun(p), x, axis, step);
                    worst = worst.max((fd - g[axis]).abs());
                }
            }
        }
        worst
    }
}

/// Halton points in the open unit square (bases 2 and 3).
pub fn halton_points(count: usize) -> Vec<Point> {
    fn radical_inverse(mut i: usize, base: usize) -> f64 {
        let inv = 1.0 / base as f64;
        let mut r = 0.0;
        let mut scale = inv;
        while i > 0 {
            r += (i % base) as f64 * scale;
            i /= base;
            scale *= inv;
        }
        r
    }
    (1..=count)
        .map(|i| [radical_inverse(i, 2), radical_inverse(i, 3)])
        .collect()
}
