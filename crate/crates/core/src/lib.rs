//! Simulation, analysis and evolutionary design of two-dimensional granular
//! materials whose vibrational response computes NAND.
//!
//! The pipeline: [`packing`] builds and relaxes a triangular disk packing,
//! [`dynamics`] drives it with prescribed sinusoidal port motion and
//! integrates the damped response, [`spectral`] reads single-frequency
//! amplitudes, [`gate`] turns the four truth-table runs into gains, a
//! minimax fitness and NAND-ness, and [`evolve`] searches stiffness vectors
//! and input-port placements with Age-Fitness Pareto Optimization.

pub mod dynamics;
pub mod error;
pub mod evolve;
pub mod field;
pub mod gate;
pub mod geometry;
pub mod law;
pub mod modes;
pub mod packing;
pub mod plot;
pub mod seeding;
pub mod sentinel;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{BoundaryX, BoundaryY, SimBox, Vec2};
pub use law::{pair_force, InteractionLaw, LawKind, StiffnessMixing};
pub use packing::{build_lattice, packing_fraction, relax_fire, FireParams, LatticeSpec, Packing};
pub use dynamics::{simulate, DriveSignals, DriveSpec, SimParams, SimTiming, Trajectory};
pub use modes::{normal_modes, NormalModes};
pub use spectral::{add_awgn, amplitude_at, measured_snr, Spectrum};
pub use evolve::{
    dominates, knee_point, pareto_front, AfpoParams, Checkpoint, Evaluator, Evolution, EvolutionConfig,
    GateEvaluator, Genome, GenomeSpace, Individual,
};
pub use gate::{
    evaluate_gate, fitness, nandness, nandness_sweep, noise_robustness, per_particle_map, read_bit,
    GateResult, GateSettings, MaterialDesign, Ports,
};
