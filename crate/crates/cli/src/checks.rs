use std::fmt;
use std::sync::Arc;

use hdg_core::analysis::{energy_identity_rhs, flux_jumps};
use hdg_core::assembly::solve;
use hdg_core::basis::{tri_quadrature, TriBasis};
use hdg_core::hdg::{
    b1_apply, b2_apply, project_scalar, FaceField, FieldTriple, HdgSpace, StabilizationConfig,
    Tau1Rule, VolumeField,
};
use hdg_core::mesh::Mesh;
use hdg_core::problems::{example1, example2, zero_data, ProblemData};
use hdg_core::Result;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const IDENTITY_TOLERANCE: f64 = 1e-10;
pub const UNIQUENESS_TOLERANCE: f64 = 1e-9;
pub const CONSERVATION_TOLERANCE: f64 = 1e-10;
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-11;
const TUPLES: u64 = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOptions {
    pub seed: u64,
    pub tau2: f64,
    /// Use `τ₁ = τ₂` instead of `τ₁ = τ₂ + β·n`.
    pub break_a1: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { seed: 0, tau2: 1.0, break_a1: false }
    }
}

impl CheckOptions {
    fn stabilization(&self) -> StabilizationConfig {
        let rule = if self.break_a1 { Tau1Rule::EqualToTau2 } else { Tau1Rule::PlusConvection };
        StabilizationConfig::constant(self.tau2).with_tau1_rule(rule)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn outcome(name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: e.to_string() },
    }
}

fn build_space(n: usize, k: usize, problem: &ProblemData, stab: StabilizationConfig) -> Result<HdgSpace> {
    HdgSpace::new(Arc::new(Mesh::build_uniform(n)?), k, problem, stab)
}

struct Tuple {
    flux: VolumeField,
    scalar: VolumeField,
    trace: FaceField,
}

impl Tuple {
    fn random(space: &HdgSpace, rng: &mut ChaCha8Rng) -> Tuple {
        let mut t = Tuple {
            flux: space.flux_field_zeros(),
            scalar: space.state_field_zeros(),
            trace: space.trace_field_zeros(),
        };
        for v in t.flux.values.iter_mut().chain(&mut t.scalar.values).chain(&mut t.trace.values) {
            *v = rng.random_range(-1.0..1.0);
        }
        t
    }

    fn fields(&self) -> FieldTriple<'_> {
        FieldTriple { flux: &self.flux, scalar: &self.scalar, trace: &self.trace }
    }
}

/// Largest relative gap between `B(x; x)` and the energy expression.
pub fn energy_identity(options: &CheckOptions) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut worst = 0.0f64;
    for problem in [example1(), example2()] {
        for k in [0, 1] {
            let space = build_space(4, k, &problem, options.stabilization())?;
            for _ in 0..TUPLES {
                let t = Tuple::random(&space, &mut rng);
                for adjoint in [false, true] {
                    let b = if adjoint { b2_apply } else { b1_apply }(&space, t.fields(), t.fields())?;
                    let e = energy_identity_rhs(&space, adjoint, &t.flux, &t.scalar, &t.trace);
                    worst = worst.max((b - e).abs() / e.abs().max(f64::MIN_POSITIVE));
                }
            }
        }
    }
    Ok(worst)
}

/// Largest `|B1(a; b') + B2(b; a')| / scale` over random pairs.
pub fn adjoint_identity(options: &CheckOptions) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed.wrapping_add(1));
    let mut worst = 0.0f64;
    for problem in [example1(), example2()] {
        for k in [0, 1] {
            let space = build_space(4, k, &problem, options.stabilization())?;
            for _ in 0..TUPLES / 4 {
                let a = Tuple::random(&space, &mut rng);
                let b = Tuple::random(&space, &mut rng);
                let (neg_z, neg_zh, neg_q) =
                    (b.scalar.scaled(-1.0), b.trace.scaled(-1.0), a.flux.scaled(-1.0));
                let t1 = b1_apply(
                    &space,
                    a.fields(),
                    FieldTriple { flux: &b.flux, scalar: &neg_z, trace: &neg_zh },
                )?;
                let t2 = b2_apply(
                    &space,
                    b.fields(),
                    FieldTriple { flux: &neg_q, scalar: &a.scalar, trace: &a.trace },
                )?;
                worst = worst.max((t1 + t2).abs() / t1.abs().max(t2.abs()));
            }
        }
    }
    Ok(worst)
}

/// Largest coefficient of the solution for zero data.
pub fn uniqueness(options: &CheckOptions) -> Result<f64> {
    let problem = zero_data();
    let mut worst = 0.0f64;
    for n in [2, 4] {
        for k in [0, 1] {
            let space = build_space(n, k, &problem, options.stabilization())?;
            space.validate_stabilization()?;
            let s = solve(space, &problem)?.solution;
            let fields = [&s.q, &s.p, &s.y, &s.z, &s.u];
            let volume = fields.iter().flat_map(|f| f.values.iter());
            let traces = s.y_hat.values.iter().chain(&s.z_hat.values);
            worst = volume.chain(traces).fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(worst)
}

/// Largest imbalance of the numerical fluxes across interior faces.
pub fn flux_conservation(options: &CheckOptions) -> Result<f64> {
    let problem = example2();
    let mut worst = 0.0f64;
    for k in [0, 1] {
        let space = build_space(6, k, &problem, options.stabilization())?;
        space.validate_stabilization()?;
        let out = solve(space, &problem)?;
        let (state, adjoint) = flux_jumps(&out.space, &out.solution);
        worst = state.values.iter().chain(&adjoint.values).fold(worst, |m, v| m.max(v.abs()));
    }
    Ok(worst)
}

/// Largest `|(f - Πf, φ)|` over basis functions of degrees 0 to 3.
pub fn projection_orthogonality() -> Result<f64> {
    let mesh = Mesh::build_uniform(4)?;
    let f = |x: [f64; 2]| (3.0 * x[0]).sin() * (1.0 + x[1] * x[1]).ln() + x[0].exp();
    let rule = tri_quadrature(20)?;
    let mut worst = 0.0f64;
    for degree in 0..4 {
        let proj = project_scalar(&mesh, degree, &f)?;
        let basis = TriBasis::new(degree)?;
        let mut phi = vec![0.0; basis.dim];
        for e in 0..mesh.num_elements() {
            let geo = mesh.element_geometry(e);
            let c = proj.element(e);
            let mut moments = vec![0.0; basis.dim];
            for (&xi, &w) in rule.points.iter().zip(&rule.weights) {
                basis.values_into(xi, &mut phi);
                let ph: f64 = c.iter().zip(&phi).map(|(a, b)| a * b).sum();
                let r = f(geo.map(xi)) - ph;
                for (m, p) in moments.iter_mut().zip(&phi) {
                    *m += w * geo.det * r * p;
                }
            }
            worst = moments.iter().fold(worst, |m, v| m.max(v.abs()));
        }
    }
    Ok(worst)
}

/// Every check of the suite, in a fixed order.
pub fn run_checks(options: &CheckOptions) -> Vec<CheckOutcome> {
    let stabilization = (|| {
        let mut worst = f64::INFINITY;
        for problem in [example1(), example2()] {
            let space = build_space(4, 1, &problem, options.stabilization())?;
            worst = worst.min((0..space.mesh.num_elements()).map(|e| space.stabilization_margin(e)).fold(f64::INFINITY, f64::min));
        }
        Ok((worst > 0.0, format!("min tau1 - beta.n/2 = {worst:.3e}")))
    })();
    let below = |name: &'static str, value: Result<f64>, tol: f64| {
        outcome(name, value.map(|v| (v <= tol, format!("{v:.3e} (tolerance {tol:.0e})"))))
    };
    vec![
        outcome("stabilization", stabilization),
        below("energy-identity", energy_identity(options), IDENTITY_TOLERANCE),
        below("adjoint-identity", adjoint_identity(options), IDENTITY_TOLERANCE),
        below("uniqueness", uniqueness(options), UNIQUENESS_TOLERANCE),
        below("flux-conservation", flux_conservation(options), CONSERVATION_TOLERANCE),
        below("projection-orthogonality", projection_orthogonality(), ORTHOGONALITY_TOLERANCE),
    ]
}
