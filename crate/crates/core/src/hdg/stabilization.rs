use std::fmt;
use std::sync::Arc;

use super::{dot, HdgSpace};
use crate::error::{HdgError, Result};
use crate::mesh::Point;

/// `τ₂(x, n)` on element boundaries.
pub type Tau2Fn = Arc<dyn Fn(Point, Point) -> f64 + Send + Sync>;

/// How `τ₁` is derived from `τ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau1Rule {
    /// `τ₁ = τ₂ + β·n`, which makes the state and adjoint operators mutually adjoint.
    PlusConvection,
    /// `τ₁ = τ₂`. Breaks the adjoint identity; kept for checks.
    EqualToTau2,
}

#[derive(Clone)]
pub struct StabilizationConfig {
    pub tau2: Tau2Fn,
    pub tau1: Tau1Rule,
}

impl fmt::Debug for StabilizationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StabilizationConfig")
            .field("tau1", &self.tau1)
            .finish_non_exhaustive()
    }
}

impl Default for StabilizationConfig {
    fn default() -> Self {
        Self::constant(1.0)
    }
}

impl StabilizationConfig {
    pub fn constant(tau2: f64) -> Self {
        StabilizationConfig {
            tau2: Arc::new(move |_, _| tau2),
            tau1: Tau1Rule::PlusConvection,
        }
    }

    pub fn with_tau1_rule(mut self, rule: Tau1Rule) -> Self {
        self.tau1 = rule;
        self
    }

    /// `(τ₁, τ₂)` at `x` on a face with outward normal `n` and `β·n = beta_n`.
    pub fn values(&self, x: Point, n: Point, beta_n: f64) -> (f64, f64) {
        let tau2 = (self.tau2)(x, n);
        let tau1 = match self.tau1 {
            Tau1Rule::PlusConvection => tau2 + beta_n,
            Tau1Rule::EqualToTau2 => tau2,
        };
        (tau1, tau2)
    }
}

impl HdgSpace {
    /// Minimum of `τ₁ - β·n/2` over the face quadrature points of `elem`.
    pub fn stabilization_margin(&self, elem: usize) -> f64 {
        let mut min = f64::INFINITY;
        for lf in 0..3 {
            let fg = self
                .mesh
                .face_geometry(elem, lf)
                .expect("local face index in range");
            for &t in &self.edge_rule.points {
                let x = fg.point(t);
                let beta_n = dot((self.beta)(x), fg.normal);
                let (tau1, _) = self.stabilization.values(x, fg.normal, beta_n);
                min = min.min(tau1 - 0.5 * beta_n);
            }
        }
        min
    }

    pub fn check_stabilization_element(&self, elem: usize) -> Result<()> {
        let margin = self.stabilization_margin(elem);
        if margin > 0.0 {
            Ok(())
        } else {
            Err(HdgError::StabilizationInvalid {
                element: elem,
                min_value: margin,
            })
        }
    }

    /// Checks `min (τ₁ - β·n/2) > 0` on every element boundary.
    pub fn validate_stabilization(&self) -> Result<()> {
        (0..self.mesh.num_elements()).try_for_each(|e| self.check_stabilization_element(e))
    }
}
