#![allow(dead_code)]

use std::sync::Arc;

use hdg_core::hdg::{FaceField, HdgSpace, StabilizationConfig, VolumeField};
use hdg_core::mesh::Mesh;
use hdg_core::problems::ProblemData;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn space(n: usize, k: usize, problem: &ProblemData) -> HdgSpace {
    space_with(n, k, problem, StabilizationConfig::default())
}

pub fn space_with(n: usize, k: usize, problem: &ProblemData, stab: StabilizationConfig) -> HdgSpace {
    let mesh = Arc::new(Mesh::build_uniform(n).unwrap());
    HdgSpace::new(mesh, k, problem, stab).unwrap()
}

/// Random flux, scalar and interior-trace coefficients in `[-1, 1]`.
pub struct RandomTriple {
    pub flux: VolumeField,
    pub scalar: VolumeField,
    pub trace: FaceField,
}

impl RandomTriple {
    pub fn new(space: &HdgSpace, rng: &mut ChaCha8Rng) -> Self {
        let mut fill = |mut values: Vec<f64>| {
            values.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
            values
        };
        let mut flux = space.flux_field_zeros();
        let mut scalar = space.state_field_zeros();
        let mut trace = space.trace_field_zeros();
        flux.values = fill(flux.values);
        scalar.values = fill(scalar.values);
        trace.values = fill(trace.values);
        RandomTriple { flux, scalar, trace }
    }

    pub fn as_triple(&self) -> hdg_core::hdg::FieldTriple<'_> {
        hdg_core::hdg::FieldTriple {
            flux: &self.flux,
            scalar: &self.scalar,
            trace: &self.trace,
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}
