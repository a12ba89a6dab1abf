//! Pair interaction laws between disks.
//!
//! Both laws are purely repulsive and truncated at `cutoff`, where the
//! potential and the force vanish. The per-pair energy scale is obtained from
//! the per-particle stiffness values with the series-spring rule
//! `k_ij = 2 k_i k_j / (k_i + k_j)`, and every pair quantity scales linearly
//! in `k_ij`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LawKind {
    /// Lennard-Jones truncated at its minimum and shifted to zero
    /// (Weeks-Chandler-Andersen form), with `sigma = cutoff / 2^(1/6)`.
    #[default]
    RepulsiveWca,
    /// One-sided spring `V = k_ij (cutoff - r)^2 / 2`.
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StiffnessMixing {
    #[default]
    Series,
}

impl StiffnessMixing {
    #[inline]
    pub fn combine(self, k_i: f64, k_j: f64) -> f64 {
        match self {
            StiffnessMixing::Series => 2.0 * k_i * k_j / (k_i + k_j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionLaw {
    pub kind: LawKind,
    pub cutoff: f64,
    #[serde(default)]
    pub stiffness_mixing: StiffnessMixing,
}

/// Potential and its first two radial derivatives at one separation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radial {
    pub energy: f64,
    /// dV/dr
    pub d1: f64,
    /// d2V/dr2
    pub d2: f64,
}

const ZERO: Radial = Radial {
    energy: 0.0,
    d1: 0.0,
    d2: 0.0,
};

impl Default for InteractionLaw {
    /// WCA with the default 0.1 diameter.
    fn default() -> Self {
        Self::wca(0.1)
    }
}

impl InteractionLaw {
    /// WCA law whose cutoff equals the disk diameter.
    pub fn wca(diameter: f64) -> Self {
        Self {
            kind: LawKind::RepulsiveWca,
            cutoff: diameter,
            stiffness_mixing: StiffnessMixing::Series,
        }
    }

    pub fn harmonic(diameter: f64) -> Self {
        Self {
            kind: LawKind::Harmonic,
            cutoff: diameter,
            stiffness_mixing: StiffnessMixing::Series,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0 && self.cutoff.is_finite()) {
            return Err(Error::invalid(format!("cutoff must be positive, got {}", self.cutoff)));
        }
        Ok(())
    }

    pub fn pair_stiffness(&self, k_i: f64, k_j: f64) -> f64 {
        self.stiffness_mixing.combine(k_i, k_j)
    }

    /// Potential and radial derivatives for a pair with energy scale `k`.
    #[inline]
    pub fn radial(&self, r: f64, k: f64) -> Radial {
        if r >= self.cutoff {
            return ZERO;
        }
        match self.kind {
            LawKind::RepulsiveWca => {
                // sigma^6 = cutoff^6 / 2
                let c2 = self.cutoff * self.cutoff;
                let sigma6 = 0.5 * c2 * c2 * c2;
                let r2 = r * r;
                let s6 = sigma6 / (r2 * r2 * r2);
                let s12 = s6 * s6;
                Radial {
                    energy: 4.0 * k * (s12 - s6) + k,
                    d1: -24.0 * k * (2.0 * s12 - s6) / r,
                    d2: 4.0 * k * (156.0 * s12 - 42.0 * s6) / r2,
                }
            }
            LawKind::Harmonic => {
                let overlap = self.cutoff - r;
                Radial {
                    energy: 0.5 * k * overlap * overlap,
                    d1: -k * overlap,
                    d2: k,
                }
            }
        }
    }
}

/// Central force on particle `i` from particle `j`, where `r_vec = x_i - x_j`.
pub fn pair_force(r_vec: Vec2, k_i: f64, k_j: f64, law: &InteractionLaw) -> Result<Vec2> {
    let r = norm(r_vec);
    if r == 0.0 {
        return Err(Error::CoincidentCenters(0, 1));
    }
    let rad = law.radial(r, law.pair_stiffness(k_i, k_j));
    let scale = -rad.d1 / r;
    Ok([scale * r_vec[0], scale * r_vec[1]])
}
