//! Vibrational normal modes from the mass-normalized Hessian.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ForceField;
use crate::geometry::Vec2;
use crate::law::InteractionLaw;
use crate::packing::Packing;

/// Eigenvalues with magnitude below this are zero modes.
pub const ZERO_MODE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    /// Eigenfrequencies in cycles per unit time, ascending. Zero modes are 0.
    pub frequencies: Vec<f64>,
    /// Eigenvalues of the mass-normalized Hessian, ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `m` is the unit mode shape of `frequencies[m]`, ordered
    /// `(x_0, y_0, x_1, y_1, ...)`.
    #[serde(skip)]
    pub shapes: DMatrix<f64>,
}

impl NormalModes {
    pub fn zero_mode_count(&self) -> usize {
        self.eigenvalues.iter().filter(|l| l.abs() < ZERO_MODE_TOL).count()
    }
}

pub fn mass_normalized_hessian(field: &ForceField, positions: &[Vec2], mass: f64) -> Result<DMatrix<f64>> {
    Ok(field.hessian(positions)? / mass)
}

/// Builds and diagonalizes the mass-normalized Hessian of a relaxed packing.
pub fn normal_modes(packing: &Packing, stiffness: &[f64], law: &InteractionLaw) -> Result<NormalModes> {
    let field = packing.force_field(stiffness, *law)?;
    let h = mass_normalized_hessian(&field, &packing.positions, packing.lattice.mass)?;
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    if let Some(&lowest) = order.first() {
        let l = eig.eigenvalues[lowest];
        if l < -ZERO_MODE_TOL {
            return Err(Error::UnstablePacking(l));
        }
    }
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let frequencies = eigenvalues
        .iter()
        .map(|&l| if l.abs() < ZERO_MODE_TOL { 0.0 } else { l.sqrt() / (2.0 * PI) })
        .collect();
    let shapes = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok(NormalModes {
        frequencies,
        eigenvalues,
        shapes,
    })
}

/// Largest angular normal-mode frequency, used for the time-step bound.
/// Negative eigenvalues are ignored rather than rejected.
pub fn max_angular_frequency(field: &ForceField, positions: &[Vec2], mass: f64) -> Result<f64> {
    let h = mass_normalized_hessian(field, positions, mass)?;
    let lmax = h.symmetric_eigenvalues().iter().copied().fold(0.0, f64::max);
    Ok(lmax.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryY, SimBox};
    use crate::packing::{build_lattice, relax_fire, FireParams, LatticeSpec};

    #[test]
    fn two_body_relative_mode() {
        // Harmonic contact at (numerically) zero overlap so the pair is in
        // equilibrium; the relative mode has reduced mass m/2.
        let law = InteractionLaw::harmonic(0.1);
        let k_i = 3.0;
        let k_j = 6.0;
        let k_ij = law.pair_stiffness(k_i, k_j);
        let packing = Packing {
            positions: vec![[0.3, 0.5], [0.3 + 0.1 * (1.0 - 1e-12), 0.5]],
            lattice: LatticeSpec::default(),
            sim_box: SimBox {
                width: 1.0,
                height: 1.0,
                boundary_y: BoundaryY::Periodic,
            },
            residual_force: 0.0,
            relax_iterations: 0,
        };
        let modes = normal_modes(&packing, &[k_i, k_j], &law).unwrap();
        let nonzero: Vec<f64> = modes.frequencies.iter().copied().filter(|f| *f > 0.0).collect();
        assert_eq!(nonzero.len(), 1);
        let expected = (2.0 * k_ij / 1.0).sqrt() / (2.0 * PI);
        assert!((nonzero[0] - expected).abs() < 1e-9 * expected);
        // relative x motion
        let shape = modes.shapes.column(3);
        assert!((shape[0] + shape[2]).abs() < 1e-9);
    }

    #[test]
    fn periodic_x_lattice_has_translation_zero_mode() {
        let law = InteractionLaw::wca(0.1);
        let k = vec![1.0; 30];
        let p = build_lattice(&LatticeSpec::default()).unwrap();
        let p = relax_fire(&p, &k, &law, &FireParams::default()).unwrap();
        let modes = normal_modes(&p, &k, &law).unwrap();
        assert!(modes.zero_mode_count() >= 1);
        assert_eq!(modes.frequencies[0], 0.0);
        assert!(modes.frequencies.windows(2).all(|w| w[0] <= w[1]));
        // the zero mode is a uniform x translation
        let shape = modes.shapes.column(0);
        let x0 = shape[0];
        for i in 0..30 {
            assert!((shape[2 * i] - x0).abs() < 1e-6);
            assert!(shape[2 * i + 1].abs() < 1e-6);
        }
    }

    #[test]
    fn compressed_unrelaxed_pair_is_unstable() {
        let law = InteractionLaw::harmonic(0.1);
        let packing = Packing {
            positions: vec![[0.3, 0.5], [0.38, 0.5]],
            lattice: LatticeSpec::default(),
            sim_box: SimBox {
                width: 1.0,
                height: 1.0,
                boundary_y: BoundaryY::Periodic,
            },
            residual_force: 0.0,
            relax_iterations: 0,
        };
        assert!(matches!(
            normal_modes(&packing, &[1.0, 1.0], &law),
            Err(Error::UnstablePacking(_))
        ));
    }
}
