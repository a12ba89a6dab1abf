//! Total potential energy, forces and Hessian of a disk assembly.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryY, SimBox, Vec2};
use crate::law::InteractionLaw;

/// Energy landscape of one packing: box, pair law and per-particle stiffness.
///
/// Rigid walls interact with a disk through the pair law evaluated at the
/// distance to the disk's mirror image (twice the center-to-wall distance),
/// with the disk's own stiffness as energy scale. Contact therefore begins
/// exactly when the disk edge touches the wall.
#[derive(Debug, Clone)]
pub struct ForceField {
    pub sim_box: SimBox,
    pub law: InteractionLaw,
    pub stiffness: Vec<f64>,
}

impl ForceField {
    pub fn new(sim_box: SimBox, law: InteractionLaw, stiffness: Vec<f64>) -> Result<Self> {
        law.validate()?;
        if sim_box.width < 2.0 * law.cutoff {
            return Err(Error::invalid(format!(
                "box width {} must be at least twice the cutoff {}",
                sim_box.width, law.cutoff
            )));
        }
        if sim_box.boundary_y == BoundaryY::Periodic && sim_box.height < 2.0 * law.cutoff {
            return Err(Error::invalid(format!(
                "periodic box height {} must be at least twice the cutoff {}",
                sim_box.height, law.cutoff
            )));
        }
        if let Some(k) = stiffness.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::invalid(format!("stiffness must be positive, got {k}")));
        }
        Ok(Self {
            sim_box,
            law,
            stiffness,
        })
    }

    pub fn len(&self) -> usize {
        self.stiffness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stiffness.is_empty()
    }

    fn check_len(&self, positions: &[Vec2]) -> Result<()> {
        if positions.len() != self.len() {
            return Err(Error::LengthMismatch(positions.len(), self.len()));
        }
        Ok(())
    }

    /// All pairs whose minimum-image distance is below `radius`.
    pub fn neighbor_pairs(&self, positions: &[Vec2], radius: f64) -> Vec<(usize, usize)> {
        let r2 = radius * radius;
        let mut pairs = Vec::new();
        for i in 0..positions.len() {
            for j in (i + 1)..positions.len() {
                let d = self.sim_box.separation(positions[i], positions[j]);
                if d[0] * d[0] + d[1] * d[1] < r2 {
                    pairs.push((i, j));
                }
            }
        }
        pairs
    }

    fn all_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.len();
        (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j)))
    }

    pub fn energy(&self, positions: &[Vec2]) -> Result<f64> {
        self.check_len(positions)?;
        let mut e = 0.0;
        for (i, j) in self.all_pairs() {
            let d = self.sim_box.separation(positions[i], positions[j]);
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if r >= self.law.cutoff {
                continue;
            }
            if r == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            let k = self.law.pair_stiffness(self.stiffness[i], self.stiffness[j]);
            e += self.law.radial(r, k).energy;
        }
        if self.sim_box.boundary_y == BoundaryY::RigidWall {
            for (i, p) in positions.iter().enumerate() {
                let k = self.stiffness[i];
                for h in [p[1], self.sim_box.height - p[1]] {
                    if h <= 0.0 {
                        return Err(Error::WallPenetration(i));
                    }
                    e += self.law.radial(2.0 * h, k).energy;
                }
            }
        }
        Ok(e)
    }

    /// Forces over every pair; returns the potential energy.
    pub fn forces(&self, positions: &[Vec2], out: &mut [Vec2]) -> Result<f64> {
        self.check_len(positions)?;
        let n = self.len();
        let pairs: Vec<(usize, usize)> = self.all_pairs().collect();
        debug_assert_eq!(pairs.len(), n * n.saturating_sub(1) / 2);
        self.forces_over(positions, &pairs, out)
    }

    /// Forces restricted to the given candidate pairs plus walls; returns the
    /// potential energy. Pairs beyond the cutoff contribute nothing.
    pub fn forces_over(
        &self,
        positions: &[Vec2],
        pairs: &[(usize, usize)],
        out: &mut [Vec2],
    ) -> Result<f64> {
        for f in out.iter_mut() {
            *f = [0.0, 0.0];
        }
        let cutoff2 = self.law.cutoff * self.law.cutoff;
        let mut e = 0.0;
        for &(i, j) in pairs {
            let d = self.sim_box.separation(positions[i], positions[j]);
            let r2 = d[0] * d[0] + d[1] * d[1];
            if r2 >= cutoff2 {
                continue;
            }
            if r2 == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            let r = r2.sqrt();
            let k = self.law.pair_stiffness(self.stiffness[i], self.stiffness[j]);
            let rad = self.law.radial(r, k);
            e += rad.energy;
            let s = -rad.d1 / r;
            out[i][0] += s * d[0];
            out[i][1] += s * d[1];
            out[j][0] -= s * d[0];
            out[j][1] -= s * d[1];
        }
        if self.sim_box.boundary_y == BoundaryY::RigidWall {
            let height = self.sim_box.height;
            for (i, p) in positions.iter().enumerate() {
                let (bottom, top) = (p[1], height - p[1]);
                if bottom <= 0.0 || top <= 0.0 {
                    return Err(Error::WallPenetration(i));
                }
                if 2.0 * bottom < self.law.cutoff {
                    let rad = self.law.radial(2.0 * bottom, self.stiffness[i]);
                    e += rad.energy;
                    out[i][1] -= 2.0 * rad.d1;
                }
                if 2.0 * top < self.law.cutoff {
                    let rad = self.law.radial(2.0 * top, self.stiffness[i]);
                    e += rad.energy;
                    out[i][1] += 2.0 * rad.d1;
                }
            }
        }
        Ok(e)
    }

    /// Analytic 2N x 2N Hessian of the potential energy, ordered
    /// `(x_0, y_0, x_1, y_1, ...)`.
    pub fn hessian(&self, positions: &[Vec2]) -> Result<DMatrix<f64>> {
        self.check_len(positions)?;
        let n = self.len();
        let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for (i, j) in self.all_pairs() {
            let d = self.sim_box.separation(positions[i], positions[j]);
            let r = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if r >= self.law.cutoff {
                continue;
            }
            if r == 0.0 {
                return Err(Error::CoincidentCenters(i, j));
            }
            let k = self.law.pair_stiffness(self.stiffness[i], self.stiffness[j]);
            let rad = self.law.radial(r, k);
            let u = [d[0] / r, d[1] / r];
            let t = rad.d1 / r;
            let mut block = [[0.0; 2]; 2];
            for a in 0..2 {
                for b in 0..2 {
                    let delta = if a == b { 1.0 } else { 0.0 };
                    block[a][b] = rad.d2 * u[a] * u[b] + t * (delta - u[a] * u[b]);
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    h[(2 * i + a, 2 * i + b)] += block[a][b];
                    h[(2 * j + a, 2 * j + b)] += block[a][b];
                    h[(2 * i + a, 2 * j + b)] -= block[a][b];
                    h[(2 * j + a, 2 * i + b)] -= block[a][b];
                }
            }
        }
        if self.sim_box.boundary_y == BoundaryY::RigidWall {
            for (i, p) in positions.iter().enumerate() {
                for hgt in [p[1], self.sim_box.height - p[1]] {
                    if hgt <= 0.0 {
                        return Err(Error::WallPenetration(i));
                    }
                    let rad = self.law.radial(2.0 * hgt, self.stiffness[i]);
                    h[(2 * i + 1, 2 * i + 1)] += 4.0 * rad.d2;
                }
            }
        }
        Ok(h)
    }
}

/// Largest absolute per-particle force magnitude.
pub fn max_force(forces: &[Vec2]) -> f64 {
    forces
        .iter()
        .map(|f| (f[0] * f[0] + f[1] * f[1]).sqrt())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(boundary_y: BoundaryY) -> ForceField {
        ForceField::new(
            SimBox {
                width: 0.5,
                height: 0.4,
                boundary_y,
            },
            InteractionLaw::wca(0.1),
            vec![1.0, 3.0, 7.0, 2.0],
        )
        .unwrap()
    }

    fn positions() -> Vec<Vec2> {
        vec![[0.02, 0.06], [0.47, 0.1], [0.08, 0.13], [0.3, 0.34]]
    }

    #[test]
    fn forces_are_negative_energy_gradient() {
        for by in [BoundaryY::RigidWall, BoundaryY::Periodic] {
            let ff = field(by);
            let x = positions();
            let mut f = vec![[0.0; 2]; 4];
            ff.forces(&x, &mut f).unwrap();
            let h = 1e-7;
            for i in 0..4 {
                for a in 0..2 {
                    let mut xp = x.clone();
                    xp[i][a] += h;
                    let mut xm = x.clone();
                    xm[i][a] -= h;
                    let g = (ff.energy(&xp).unwrap() - ff.energy(&xm).unwrap()) / (2.0 * h);
                    assert!((f[i][a] + g).abs() < 1e-5 * (1.0 + g.abs()), "{by:?} {i} {a}: {} vs {}", f[i][a], -g);
                }
            }
        }
    }

    #[test]
    fn hessian_is_symmetric_and_matches_force_differences() {
        let ff = field(BoundaryY::RigidWall);
        let x = positions();
        let hess = ff.hessian(&x).unwrap();
        assert!((&hess - hess.transpose()).amax() < 1e-9);
        let h = 1e-7;
        for i in 0..4 {
            for a in 0..2 {
                let mut xp = x.clone();
                xp[i][a] += h;
                let mut xm = x.clone();
                xm[i][a] -= h;
                let mut fp = vec![[0.0; 2]; 4];
                let mut fm = vec![[0.0; 2]; 4];
                ff.forces(&xp, &mut fp).unwrap();
                ff.forces(&xm, &mut fm).unwrap();
                for j in 0..4 {
                    for b in 0..2 {
                        let fd = -(fp[j][b] - fm[j][b]) / (2.0 * h);
                        let an = hess[(2 * j + b, 2 * i + a)];
                        assert!((fd - an).abs() < 1e-4 * (1.0 + an.abs()), "{fd} vs {an}");
                    }
                }
            }
        }
    }

    #[test]
    fn wall_penetration_is_an_error() {
        let ff = field(BoundaryY::RigidWall);
        let mut x = positions();
        x[0][1] = -0.01;
        assert_eq!(ff.energy(&x), Err(Error::WallPenetration(0)));
    }

    #[test]
    fn narrow_box_is_rejected() {
        let r = ForceField::new(
            SimBox {
                width: 0.15,
                height: 1.0,
                boundary_y: BoundaryY::RigidWall,
            },
            InteractionLaw::wca(0.1),
            vec![1.0],
        );
        assert!(r.is_err());
    }
}
