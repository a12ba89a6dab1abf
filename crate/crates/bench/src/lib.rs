//! Fixtures shared by the benchmarks.

use polygate_core::gate::{MaterialDesign, Ports};
use polygate_core::{build_lattice, relax_fire, FireParams, InteractionLaw, LatticeSpec, Packing};

/// Deterministic stiffness pattern spanning the admissible range.
pub fn graded_stiffness(n: usize) -> Vec<f64> {
    (0..n).map(|i| 1.0 + ((i * 7) % 10) as f64).collect()
}

pub fn lattice() -> Packing {
    build_lattice(&LatticeSpec::default()).expect("default lattice")
}

pub fn design() -> MaterialDesign {
    let k = graded_stiffness(30);
    let packing = relax_fire(&lattice(), &k, &InteractionLaw::default(), &FireParams::default()).expect("relaxes");
    MaterialDesign {
        packing,
        stiffness: k,
        ports: Ports::default(),
    }
}
