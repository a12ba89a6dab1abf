//! Triangular-lattice disk packings and FIRE relaxation.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{max_force, ForceField};
use crate::geometry::{BoundaryX, BoundaryY, SimBox, Vec2};
use crate::law::InteractionLaw;

const ROW_RATIO: f64 = 0.866_025_403_784_438_6; // sqrt(3)/2

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
    pub diameter: f64,
    pub mass: f64,
    pub packing_fraction: f64,
    #[serde(default)]
    pub boundary_x: BoundaryX,
    #[serde(default)]
    pub boundary_y: BoundaryY,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            rows: 5,
            cols: 6,
            diameter: 0.1,
            mass: 1.0,
            packing_fraction: 0.91,
            boundary_x: BoundaryX::Periodic,
            boundary_y: BoundaryY::RigidWall,
        }
    }
}

impl LatticeSpec {
    pub fn particle_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 2 || self.cols < 2 {
            return Err(Error::invalid(format!(
                "lattice needs at least 2 rows and 2 columns, got {}x{}",
                self.rows, self.cols
            )));
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err(Error::invalid("diameter must be positive"));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::invalid("mass must be positive"));
        }
        if !(self.packing_fraction > 0.0 && self.packing_fraction < 1.0) {
            return Err(Error::invalid(format!(
                "packing fraction must lie in (0, 1), got {}",
                self.packing_fraction
            )));
        }
        Ok(())
    }

    /// Total disk area divided by the target packing fraction.
    pub fn target_box_area(&self) -> f64 {
        self.particle_count() as f64 * PI * self.diameter * self.diameter
            / (4.0 * self.packing_fraction)
    }

    /// Row index of particle `i` (particles are numbered row-major).
    pub fn row_of(&self, i: usize) -> usize {
        i / self.cols
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Packing {
    pub positions: Vec<Vec2>,
    pub lattice: LatticeSpec,
    #[serde(rename = "box")]
    pub sim_box: SimBox,
    /// Largest per-particle net force after the last relaxation.
    pub residual_force: f64,
    /// FIRE iterations spent in the last relaxation.
    #[serde(default)]
    pub relax_iterations: usize,
}

impl Packing {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn force_field(&self, stiffness: &[f64], law: InteractionLaw) -> Result<ForceField> {
        if stiffness.len() != self.len() {
            return Err(Error::LengthMismatch(stiffness.len(), self.len()));
        }
        ForceField::new(self.sim_box, law, stiffness.to_vec())
    }

    /// Translates every particle by `dx` along the periodic axis.
    pub fn translated_x(&self, dx: f64) -> Packing {
        let mut out = self.clone();
        for p in &mut out.positions {
            *p = self.sim_box.wrap([p[0] + dx, p[1]]);
        }
        out
    }
}

/// Places `rows x cols` disks on a triangular lattice whose spacing is set
/// so that total disk area over box area equals the packing fraction.
///
/// With periodic y the box is `cols*a` by `rows*a*sqrt(3)/2`. With rigid
/// walls the first and last rows start tangent to the walls, so the height is
/// `(rows-1)*a*sqrt(3)/2 + D` and `a` solves the resulting quadratic.
pub fn build_lattice(spec: &LatticeSpec) -> Result<Packing> {
    spec.validate()?;
    let d = spec.diameter;
    let area = spec.target_box_area();
    let (rows, cols) = (spec.rows as f64, spec.cols as f64);
    let (spacing, height, y0) = match spec.boundary_y {
        BoundaryY::Periodic => {
            let a = (area / (cols * rows * ROW_RATIO)).sqrt();
            (a, rows * a * ROW_RATIO, 0.5 * a * ROW_RATIO)
        }
        BoundaryY::RigidWall => {
            let qa = cols * (rows - 1.0) * ROW_RATIO;
            let qb = cols * d;
            let a = (-qb + (qb * qb + 4.0 * qa * area).sqrt()) / (2.0 * qa);
            (a, (rows - 1.0) * a * ROW_RATIO + d, 0.5 * d)
        }
    };
    if spacing < 0.5 * d {
        return Err(Error::invalid(format!(
            "packing fraction {} forces lattice spacing {spacing} below half a diameter",
            spec.packing_fraction
        )));
    }
    let sim_box = SimBox {
        width: cols * spacing,
        height,
        boundary_y: spec.boundary_y,
    };
    let mut positions = Vec::with_capacity(spec.particle_count());
    for r in 0..spec.rows {
        let shift = if r % 2 == 1 { 0.5 } else { 0.0 };
        for c in 0..spec.cols {
            let x = (c as f64 + shift) * spacing;
            let y = y0 + r as f64 * spacing * ROW_RATIO;
            positions.push(sim_box.wrap([x, y]));
        }
    }
    Ok(Packing {
        positions,
        lattice: *spec,
        sim_box,
        residual_force: f64::NAN,
        relax_iterations: 0,
    })
}

pub fn packing_fraction(packing: &Packing) -> f64 {
    let d = packing.lattice.diameter;
    packing.len() as f64 * PI * d * d / (4.0 * packing.sim_box.area())
}

/// FIRE settings. Time steps left as `None` are derived from the stiffest
/// contact so the defaults work across stiffness ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FireParams {
    pub force_tol: f64,
    pub max_iters: usize,
    pub dt_initial: Option<f64>,
    pub dt_max: Option<f64>,
    pub f_inc: f64,
    pub f_dec: f64,
    pub alpha_start: f64,
    pub f_alpha: f64,
    pub n_min: usize,
}

impl Default for FireParams {
    fn default() -> Self {
        Self {
            force_tol: 1e-10,
            max_iters: 200_000,
            dt_initial: None,
            dt_max: None,
            f_inc: 1.1,
            f_dec: 0.5,
            alpha_start: 0.1,
            f_alpha: 0.99,
            n_min: 5,
        }
    }
}

/// Relaxes `packing` to mechanical equilibrium under `stiffness` with FIRE.
///
/// Succeeds once the largest per-particle net force is at most
/// `fire.force_tol`; otherwise reports [`Error::NonConvergence`] with the last
/// residual.
pub fn relax_fire(
    packing: &Packing,
    stiffness: &[f64],
    law: &InteractionLaw,
    fire: &FireParams,
) -> Result<Packing> {
    let field = packing.force_field(stiffness, *law)?;
    let n = packing.len();
    let mass = packing.lattice.mass;

    let mut x = packing.positions.clone();
    let mut v = vec![[0.0; 2]; n];
    let mut f = vec![[0.0; 2]; n];
    field.forces(&x, &mut f)?;
    let mut residual = max_force(&f);

    let (dt_max, dt_initial) = fire_steps(&field, mass, fire);
    let dt_min = 0.02 * dt_max;
    let mut dt = dt_initial;
    let mut alpha = fire.alpha_start;
    let mut n_pos = 0usize;
    let mut iterations = 0usize;

    while residual > fire.force_tol {
        if iterations >= fire.max_iters {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        iterations += 1;

        let power: f64 = f.iter().zip(&v).map(|(f, v)| f[0] * v[0] + f[1] * v[1]).sum();
        if power > 0.0 {
            n_pos += 1;
            if n_pos > fire.n_min {
                dt = (dt * fire.f_inc).min(dt_max);
                alpha *= fire.f_alpha;
            }
        } else {
            n_pos = 0;
            dt = (dt * fire.f_dec).max(dt_min);
            alpha = fire.alpha_start;
            for (xi, vi) in x.iter_mut().zip(&v) {
                xi[0] -= 0.5 * dt * vi[0];
                xi[1] -= 0.5 * dt * vi[1];
            }
            v.iter_mut().for_each(|vi| *vi = [0.0, 0.0]);
        }

        for (vi, fi) in v.iter_mut().zip(&f) {
            vi[0] += dt * fi[0] / mass;
            vi[1] += dt * fi[1] / mass;
        }
        let vnorm = v.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>().sqrt();
        let fnorm = f.iter().map(|f| f[0] * f[0] + f[1] * f[1]).sum::<f64>().sqrt();
        if fnorm > 0.0 {
            let mix = alpha * vnorm / fnorm;
            for (vi, fi) in v.iter_mut().zip(&f) {
                vi[0] = (1.0 - alpha) * vi[0] + mix * fi[0];
                vi[1] = (1.0 - alpha) * vi[1] + mix * fi[1];
            }
        }
        for (xi, vi) in x.iter_mut().zip(&v) {
            xi[0] += dt * vi[0];
            xi[1] += dt * vi[1];
        }
        field.forces(&x, &mut f)?;
        residual = max_force(&f);
    }

    let mut out = packing.clone();
    out.positions = x.into_iter().map(|p| packing.sim_box.wrap(p)).collect();
    out.residual_force = residual;
    out.relax_iterations = iterations;
    Ok(out)
}

fn fire_steps(field: &ForceField, mass: f64, fire: &FireParams) -> (f64, f64) {
    let k_max = field.stiffness.iter().copied().fold(0.0, f64::max);
    let curvature = field.law.radial(field.law.cutoff * (1.0 - 1e-12), k_max).d2;
    // up to six neighbours plus a wall can load one disk
    let omega = (8.0 * curvature / mass).sqrt();
    let dt_max = fire.dt_max.unwrap_or(1.0 / omega);
    let dt_initial = fire.dt_initial.unwrap_or(0.1 * dt_max);
    (dt_max, dt_initial)
}
