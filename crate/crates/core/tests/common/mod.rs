#![allow(dead_code)]

use polygate_core::gate::{MaterialDesign, Ports};
use polygate_core::{build_lattice, relax_fire, FireParams, InteractionLaw, LatticeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source and output share a lattice column; the inputs sit mirror-wise
/// on either side of it two rows up.
pub const MIRROR_PORTS: Ports = Ports {
    inputs: [13, 15],
    source: 2,
    output: 26,
};

pub fn relaxed_design(stiffness: Vec<f64>, ports: Ports) -> MaterialDesign {
    let lattice = build_lattice(&LatticeSpec::default()).unwrap();
    let packing = relax_fire(&lattice, &stiffness, &InteractionLaw::wca(0.1), &FireParams::default()).unwrap();
    MaterialDesign {
        packing,
        stiffness,
        ports,
    }
}

pub fn uniform_mirror_design() -> MaterialDesign {
    relaxed_design(vec![1.0; 30], MIRROR_PORTS)
}

pub fn random_design(seed: u64) -> MaterialDesign {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = (0..30).map(|_| rng.random_range(1.0..=10.0)).collect();
    relaxed_design(k, MIRROR_PORTS)
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
