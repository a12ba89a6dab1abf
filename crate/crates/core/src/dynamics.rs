//! Driven, damped time integration of a disk packing.
//!
//! Driven ports follow a prescribed x displacement exactly and are held at
//! their equilibrium y. Inputs whose bit is 0 are clamped at equilibrium.
//! Every other particle moves freely under pair forces, wall forces and the
//! viscous drag `-b v`, integrated with velocity Verlet.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ForceField;
use crate::geometry::Vec2;
use crate::law::InteractionLaw;
use crate::modes::max_angular_frequency;
use crate::packing::Packing;

/// Stability margin on `dt * omega_max`.
pub const STABILITY_MARGIN: f64 = 0.1;

/// A free particle displaced further than this many diameters aborts the run.
pub const BLOW_UP_DIAMETERS: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimParams {
    /// Upper bound on the time step; refined downward when `refine_dt` is set.
    pub dt: f64,
    pub total_steps: usize,
    /// When set, overrides `total_steps` with `ceil(duration / dt)`.
    pub duration: Option<f64>,
    pub damping: f64,
    pub transient_fraction: f64,
    /// Halve `dt` until `dt * omega_max < 0.1`, then snap it so one drive
    /// period is an integer number of steps.
    pub refine_dt: bool,
    pub law: InteractionLaw,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 1e-2,
            total_steps: 10_000,
            duration: None,
            damping: 0.05,
            transient_fraction: 0.5,
            refine_dt: true,
            law: InteractionLaw::wca(0.1),
        }
    }
}

/// Time grid resolved for one packing and drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimTiming {
    pub dt: f64,
    pub total_steps: usize,
    /// First sample of the analysis window; the window runs to `total_steps`
    /// inclusive and spans an integer number of drive periods when possible.
    pub analysis_start: usize,
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid("dt must be positive"));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(Error::invalid("damping must be non-negative"));
        }
        if !(0.0..1.0).contains(&self.transient_fraction) {
            return Err(Error::invalid("transient_fraction must lie in [0, 1)"));
        }
        if let Some(t) = self.duration {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::invalid("duration must be positive"));
            }
        }
        if self.duration.is_none() && self.total_steps == 0 {
            return Err(Error::invalid("total_steps must be positive"));
        }
        self.law.validate()
    }

    /// Resolves the time step and analysis window for a system whose largest
    /// angular normal-mode frequency is `omega_max`, driven at `frequency`
    /// (cycles per unit time; non-positive means undriven).
    pub fn resolve(&self, omega_max: f64, frequency: f64) -> Result<SimTiming> {
        self.validate()?;
        let mut dt = self.dt;
        if self.refine_dt {
            while dt * omega_max >= STABILITY_MARGIN {
                dt *= 0.5;
            }
            if frequency > 0.0 {
                let per_period = (1.0 / (frequency * dt) - 1e-9).ceil();
                dt = 1.0 / (frequency * per_period);
            }
        } else if dt * omega_max >= STABILITY_MARGIN {
            return Err(Error::invalid(format!(
                "dt * omega_max = {} violates the stability margin {STABILITY_MARGIN}",
                dt * omega_max
            )));
        }
        let total_steps = match self.duration {
            Some(t) => (t / dt - 1e-9).ceil() as usize,
            None => self.total_steps,
        };
        let raw_start = (self.transient_fraction * total_steps as f64).ceil() as usize;
        let mut analysis_start = raw_start;
        if frequency > 0.0 {
            let per_period = 1.0 / (frequency * dt);
            let window = (total_steps + 1 - raw_start) as f64;
            let periods = (window / per_period + 1e-9).floor();
            if periods >= 1.0 {
                let samples = (periods * per_period).round() as usize;
                analysis_start = total_steps + 1 - samples;
            }
        }
        Ok(SimTiming {
            dt,
            total_steps,
            analysis_start,
        })
    }
}

/// Port roles, drive amplitudes and the input bit pair for one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub input_ports: [usize; 2],
    pub source_port: usize,
    pub output_port: usize,
    pub a1: f64,
    pub a2: f64,
    pub a_s: f64,
    /// Cycles per unit time.
    pub frequency: f64,
    #[serde(default)]
    pub phase1: f64,
    #[serde(default)]
    pub phase2: f64,
    pub bits: [u8; 2],
}

impl DriveSpec {
    pub fn validate(&self, particle_count: usize) -> Result<()> {
        let ports = [
            self.input_ports[0],
            self.input_ports[1],
            self.source_port,
            self.output_port,
        ];
        for (i, &p) in ports.iter().enumerate() {
            if p >= particle_count {
                return Err(Error::invalid(format!("port index {p} out of range")));
            }
            if ports[..i].contains(&p) {
                return Err(Error::invalid(format!("port index {p} used twice")));
            }
        }
        for a in [self.a1, self.a2, self.a_s] {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(Error::invalid(format!("amplitude must be non-negative, got {a}")));
            }
        }
        if self.bits.iter().any(|&b| b > 1) {
            return Err(Error::invalid(format!("bits must be 0 or 1, got {:?}", self.bits)));
        }
        if !self.frequency.is_finite() || self.frequency < 0.0 {
            return Err(Error::invalid("frequency must be non-negative"));
        }
        Ok(())
    }

    /// Effective amplitude of input `which` (0 or 1) after applying its bit.
    pub fn input_amplitude(&self, which: usize) -> f64 {
        let a = if which == 0 { self.a1 } else { self.a2 };
        if self.bits[which] == 1 {
            a
        } else {
            0.0
        }
    }

    pub fn with_bits(mut self, bits: [u8; 2]) -> Self {
        self.bits = bits;
        self
    }
}

/// Prescribed x displacement of every kinematically driven particle, one
/// sample per time step (`total_steps + 1` samples).
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSignals {
    pub entries: Vec<(usize, Vec<f64>)>,
}

impl DriveSignals {
    /// Sinusoids `A sin(2 pi f t + phase)` for the source and both inputs;
    /// a 0-bit input gets an all-zero (clamped) signal.
    pub fn sinusoidal(drive: &DriveSpec, timing: &SimTiming) -> Self {
        let wave = |amp: f64, phase: f64| -> Vec<f64> {
            (0..=timing.total_steps)
                .map(|n| {
                    if amp == 0.0 {
                        0.0
                    } else {
                        let t = n as f64 * timing.dt;
                        amp * (2.0 * PI * drive.frequency * t + phase).sin()
                    }
                })
                .collect()
        };
        DriveSignals {
            entries: vec![
                (drive.source_port, wave(drive.a_s, 0.0)),
                (drive.input_ports[0], wave(drive.input_amplitude(0), drive.phase1)),
                (drive.input_ports[1], wave(drive.input_amplitude(1), drive.phase2)),
            ],
        }
    }

    pub fn signal(&self, particle: usize) -> Option<&[f64]> {
        self.entries
            .iter()
            .find(|(i, _)| *i == particle)
            .map(|(_, s)| s.as_slice())
    }

    pub fn signal_mut(&mut self, particle: usize) -> Option<&mut Vec<f64>> {
        self.entries.iter_mut().find(|(i, _)| *i == particle).map(|(_, s)| s)
    }
}

/// Per-particle displacement history relative to the equilibrium positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub analysis_start: usize,
    pub particle_count: usize,
    /// Row-major `[step][particle]`, `total_steps + 1` rows.
    pub displacements: Vec<Vec2>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.displacements.len() / self.particle_count
    }

    pub fn is_empty(&self) -> bool {
        self.displacements.is_empty()
    }

    pub fn total_steps(&self) -> usize {
        self.len() - 1
    }

    pub fn at(&self, step: usize, particle: usize) -> Vec2 {
        self.displacements[step * self.particle_count + particle]
    }

    pub fn x_series(&self, particle: usize) -> Vec<f64> {
        (0..self.len()).map(|s| self.at(s, particle)[0]).collect()
    }

    pub fn y_series(&self, particle: usize) -> Vec<f64> {
        (0..self.len()).map(|s| self.at(s, particle)[1]).collect()
    }

    /// Analysis-window slice of one axis (0 = x, 1 = y).
    pub fn window(&self, particle: usize, axis: usize) -> Vec<f64> {
        (self.analysis_start..self.len())
            .map(|s| self.at(s, particle)[axis])
            .collect()
    }

    /// Writes one row per step, `t,dx_0,dy_0,dx_1,dy_1,...`, so the file
    /// has a header plus `total_steps + 1` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::invalid(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        for p in 0..self.particle_count {
            header.push(format!("dx_{p}"));
            header.push(format!("dy_{p}"));
        }
        w.write_record(&header).map_err(io)?;
        let mut row = Vec::with_capacity(header.len());
        for s in 0..self.len() {
            row.clear();
            row.push(s as f64 * self.dt);
            for p in 0..self.particle_count {
                row.extend(self.at(s, p));
            }
            w.serialize(&row).map_err(io)?;
        }
        w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
        Ok(())
    }
}

/// Velocity-Verlet integrator state for one driven run.
#[derive(Debug)]
pub struct Integrator<'a> {
    field: ForceField,
    signals: &'a DriveSignals,
    origin: Vec<Vec2>,
    x: Vec<Vec2>,
    v: Vec<Vec2>,
    f: Vec<Vec2>,
    free: Vec<bool>,
    mass: f64,
    damping: f64,
    dt: f64,
    step: usize,
    blow_up: f64,
    skin: f64,
    pairs: Vec<(usize, usize)>,
    list_origin: Vec<Vec2>,
    potential: f64,
}

impl<'a> Integrator<'a> {
    pub fn new(
        packing: &Packing,
        stiffness: &[f64],
        law: InteractionLaw,
        signals: &'a DriveSignals,
        dt: f64,
        damping: f64,
        initial_velocities: Option<&[Vec2]>,
    ) -> Result<Self> {
        let field = packing.force_field(stiffness, law)?;
        let n = packing.len();
        let mut free = vec![true; n];
        for (i, s) in &signals.entries {
            if *i >= n {
                return Err(Error::invalid(format!("driven particle {i} out of range")));
            }
            if s.is_empty() {
                return Err(Error::invalid("empty drive signal"));
            }
            free[*i] = false;
        }
        let origin = packing.positions.clone();
        let mut x = origin.clone();
        for (i, s) in &signals.entries {
            x[*i][0] += s[0];
        }
        let mut v = match initial_velocities {
            Some(v0) if v0.len() != n => return Err(Error::LengthMismatch(v0.len(), n)),
            Some(v0) => v0.to_vec(),
            None => vec![[0.0; 2]; n],
        };
        for (i, s) in &signals.entries {
            let next = s.get(1).copied().unwrap_or(s[0]);
            v[*i] = [(next - s[0]) / dt, 0.0];
        }
        let skin = 0.3 * law.cutoff;
        let mut me = Self {
            pairs: field.neighbor_pairs(&x, law.cutoff + skin),
            list_origin: x.clone(),
            field,
            signals,
            origin,
            x,
            v,
            f: vec![[0.0; 2]; n],
            free,
            mass: packing.lattice.mass,
            damping,
            dt,
            step: 0,
            blow_up: BLOW_UP_DIAMETERS * packing.lattice.diameter,
            skin,
            potential: 0.0,
        };
        me.potential = me.field.forces_over(&me.x, &me.pairs, &mut me.f)?;
        Ok(me)
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn displacement(&self, i: usize) -> Vec2 {
        [self.x[i][0] - self.origin[i][0], self.x[i][1] - self.origin[i][1]]
    }

    pub fn velocities(&self) -> &[Vec2] {
        &self.v
    }

    pub fn potential_energy(&self) -> f64 {
        self.potential
    }

    pub fn kinetic_energy(&self) -> f64 {
        0.5 * self.mass * self.v.iter().map(|v| v[0] * v[0] + v[1] * v[1]).sum::<f64>()
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        let (dt, m, b) = (self.dt, self.mass, self.damping);
        for i in 0..self.x.len() {
            if !self.free[i] {
                continue;
            }
            for a in 0..2 {
                self.v[i][a] += 0.5 * dt * (self.f[i][a] - b * self.v[i][a]) / m;
                self.x[i][a] += dt * self.v[i][a];
            }
        }
        let next = self.step + 1;
        for (i, s) in &self.signals.entries {
            let cur = s.get(self.step).copied().unwrap_or(0.0);
            let nxt = s.get(next).copied().unwrap_or(cur);
            self.x[*i] = [self.origin[*i][0] + nxt, self.origin[*i][1]];
            self.v[*i] = [(nxt - cur) / dt, 0.0];
        }
        self.maybe_rebuild_list();
        self.potential = self.field.forces_over(&self.x, &self.pairs, &mut self.f)?;
        let denom = 1.0 + 0.5 * dt * b / m;
        for i in 0..self.x.len() {
            if !self.free[i] {
                continue;
            }
            for a in 0..2 {
                self.v[i][a] = (self.v[i][a] + 0.5 * dt * self.f[i][a] / m) / denom;
            }
            let d = self.displacement(i);
            let mag = (d[0] * d[0] + d[1] * d[1]).sqrt();
            if !(mag <= self.blow_up) {
                return Err(Error::BlowUp {
                    step: next,
                    particle: i,
                    displacement: mag,
                });
            }
        }
        self.step = next;
        Ok(())
    }

    fn maybe_rebuild_list(&mut self) {
        let limit = 0.25 * self.skin * self.skin;
        let moved = self.x.iter().zip(&self.list_origin).any(|(x, o)| {
            let d = self.field.sim_box.separation(*x, *o);
            d[0] * d[0] + d[1] * d[1] > limit
        });
        if moved {
            self.pairs = self
                .field
                .neighbor_pairs(&self.x, self.field.law.cutoff + self.skin);
            self.list_origin.clone_from(&self.x);
        }
    }
}

/// Integrates `total_steps` steps with precomputed drive signals.
pub fn simulate_with_signals(
    packing: &Packing,
    stiffness: &[f64],
    law: InteractionLaw,
    timing: &SimTiming,
    damping: f64,
    signals: &DriveSignals,
) -> Result<Trajectory> {
    let n = packing.len();
    for (_, s) in &signals.entries {
        if s.len() != timing.total_steps + 1 {
            return Err(Error::LengthMismatch(s.len(), timing.total_steps + 1));
        }
    }
    let mut integ = Integrator::new(packing, stiffness, law, signals, timing.dt, damping, None)?;
    let mut displacements = Vec::with_capacity((timing.total_steps + 1) * n);
    displacements.extend((0..n).map(|i| integ.displacement(i)));
    for _ in 0..timing.total_steps {
        integ.step()?;
        displacements.extend((0..n).map(|i| integ.displacement(i)));
    }
    Ok(Trajectory {
        dt: timing.dt,
        analysis_start: timing.analysis_start,
        particle_count: n,
        displacements,
    })
}

/// Resolves the time grid for `packing` under `stiffness` and `drive`.
pub fn resolve_timing(
    packing: &Packing,
    stiffness: &[f64],
    drive: &DriveSpec,
    params: &SimParams,
) -> Result<SimTiming> {
    let field = packing.force_field(stiffness, params.law)?;
    let omega_max = max_angular_frequency(&field, &packing.positions, packing.lattice.mass)?;
    params.resolve(omega_max, drive.frequency)
}

/// Runs one driven, damped simulation of a relaxed packing.
pub fn simulate(
    packing: &Packing,
    stiffness: &[f64],
    drive: &DriveSpec,
    params: &SimParams,
) -> Result<Trajectory> {
    drive.validate(packing.len())?;
    let timing = resolve_timing(packing, stiffness, drive, params)?;
    let signals = DriveSignals::sinusoidal(drive, &timing);
    simulate_with_signals(packing, stiffness, params.law, &timing, params.damping, &signals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{BoundaryY, SimBox};
    use crate::packing::{build_lattice, relax_fire, FireParams, LatticeSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn relaxed() -> Packing {
        let p = build_lattice(&LatticeSpec::default()).unwrap();
        relax_fire(&p, &[1.0; 30], &InteractionLaw::wca(0.1), &FireParams::default()).unwrap()
    }

    fn drive(a: f64) -> DriveSpec {
        DriveSpec {
            input_ports: [13, 15],
            source_port: 2,
            output_port: 26,
            a1: a,
            a2: a,
            a_s: a,
            frequency: 10.0,
            phase1: 0.0,
            phase2: 0.0,
            bits: [1, 1],
        }
    }

    #[test]
    fn resolve_snaps_to_whole_periods() {
        let p = SimParams::default();
        let t = p.resolve(500.0, 10.0).unwrap();
        assert!(t.dt * 500.0 < STABILITY_MARGIN);
        let per_period = 1.0 / (10.0 * t.dt);
        assert!((per_period - per_period.round()).abs() < 1e-9);
        let window = (t.total_steps + 1 - t.analysis_start) as f64;
        assert!((window / per_period - (window / per_period).round()).abs() < 1e-9);
        assert!(t.analysis_start >= 5000);
    }

    #[test]
    fn resolve_without_refinement_rejects_unstable_dt() {
        let p = SimParams {
            refine_dt: false,
            ..SimParams::default()
        };
        assert!(p.resolve(500.0, 10.0).is_err());
    }

    #[test]
    fn duration_overrides_step_count() {
        let p = SimParams {
            duration: Some(2.0),
            ..SimParams::default()
        };
        let t = p.resolve(1.0, 0.0).unwrap();
        assert_eq!(t.total_steps, 200);
    }

    #[test]
    fn drive_validation() {
        let n = 30;
        assert!(drive(0.01).validate(n).is_ok());
        let mut d = drive(0.01);
        d.output_port = 2;
        assert!(d.validate(n).is_err());
        let mut d = drive(0.01);
        d.input_ports[1] = 30;
        assert!(d.validate(n).is_err());
        let mut d = drive(0.01);
        d.bits = [2, 0];
        assert!(d.validate(n).is_err());
        let mut d = drive(0.01);
        d.a_s = -1.0;
        assert!(d.validate(n).is_err());
    }

    #[test]
    fn zero_bit_input_is_clamped() {
        let d = drive(0.01).with_bits([0, 1]);
        let timing = SimTiming {
            dt: 1e-3,
            total_steps: 100,
            analysis_start: 0,
        };
        let s = DriveSignals::sinusoidal(&d, &timing);
        assert!(s.signal(13).unwrap().iter().all(|&x| x == 0.0));
        assert!(s.signal(15).unwrap().iter().any(|&x| x != 0.0));
        assert!(s.signal(2).unwrap().iter().any(|&x| x != 0.0));
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = relaxed();
        let params = SimParams {
            total_steps: 2000,
            ..SimParams::default()
        };
        let traj = simulate(&p, &[1.0; 30], &drive(0.0), &params).unwrap();
        assert_eq!(traj.len(), 2001);
        let worst = traj
            .displacements
            .iter()
            .map(|d| d[0].abs().max(d[1].abs()))
            .fold(0.0, f64::max);
        // residual forces of 1e-10 allow only round-off sized motion
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let p = relaxed();
        let k: Vec<f64> = (0..30).map(|i| 1.0 + (i % 7) as f64).collect();
        let p = relax_fire(&p, &k, &InteractionLaw::wca(0.1), &FireParams::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let v0: Vec<Vec2> = (0..30)
            .map(|_| [rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3)])
            .collect();
        let timing = SimTiming {
            dt: 2e-6,
            total_steps: 10_000,
            analysis_start: 0,
        };
        let signals = DriveSignals::sinusoidal(&drive(0.0), &timing);
        let mut integ =
            Integrator::new(&p, &k, InteractionLaw::wca(0.1), &signals, timing.dt, 0.0, Some(&v0))
                .unwrap();
        let e0 = integ.kinetic_energy() + integ.potential_energy();
        let mut worst: f64 = 0.0;
        for _ in 0..timing.total_steps {
            integ.step().unwrap();
            let e = integ.kinetic_energy() + integ.potential_energy();
            worst = worst.max((e - e0).abs() / e0);
        }
        assert!(worst < 1e-6, "relative drift {worst}");
    }

    #[test]
    fn contact_bounce_frequency_matches_harmonic_oscillator() {
        // A free disk bounces off a pinned one through a harmonic contact; the
        // contact lasts half a period of sqrt(k/m).
        let law = InteractionLaw::harmonic(0.1);
        let packing = Packing {
            positions: vec![[0.5, 0.5], [0.6, 0.5], [0.1, 0.2], [0.1, 0.8], [0.9, 0.9]],
            lattice: LatticeSpec::default(),
            sim_box: SimBox {
                width: 1.0,
                height: 1.0,
                boundary_y: BoundaryY::Periodic,
            },
            residual_force: 0.0,
            relax_iterations: 0,
        };
        let k = [1.0; 5];
        let d = DriveSpec {
            input_ports: [2, 3],
            source_port: 0,
            output_port: 1,
            a1: 0.0,
            a2: 0.0,
            a_s: 0.0,
            frequency: 0.0,
            phase1: 0.0,
            phase2: 0.0,
            bits: [0, 0],
        };
        let dt = 1e-4;
        let steps = 60_000;
        let timing = SimTiming {
            dt,
            total_steps: steps,
            analysis_start: 0,
        };
        let signals = DriveSignals::sinusoidal(&d, &timing);
        let mut v0 = vec![[0.0; 2]; 5];
        v0[1] = [-1e-3, 0.0];
        let mut integ = Integrator::new(&packing, &k, law, &signals, dt, 0.0, Some(&v0)).unwrap();
        let sep = |it: &Integrator| 0.1 + it.displacement(1)[0];
        let (mut t_in, mut t_out) = (None, None);
        let mut prev = sep(&integ);
        for n in 1..=steps {
            integ.step().unwrap();
            let s = sep(&integ);
            let t = |prev: f64, s: f64| ((n - 1) as f64 + (prev - 0.1) / (prev - s)) * dt;
            if t_in.is_none() && prev >= 0.1 && s < 0.1 {
                t_in = Some(t(prev, s));
            } else if t_in.is_some() && prev < 0.1 && s >= 0.1 {
                t_out = Some(t(prev, s));
                break;
            }
            prev = s;
        }
        let contact = t_out.unwrap() - t_in.unwrap();
        let measured = 1.0 / (2.0 * contact);
        let expected = (1.0f64).sqrt() / (2.0 * PI);
        assert!((measured / expected - 1.0).abs() < 1e-3, "{measured} vs {expected}");
    }

    #[test]
    fn trajectory_csv_has_header_and_rows() {
        let traj = Trajectory {
            dt: 0.5,
            analysis_start: 0,
            particle_count: 2,
            displacements: vec![[0.0, 0.0], [1.0, 2.0], [3.0, 4.0], [5.0, 6.0]],
        };
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "t,dx_0,dy_0,dx_1,dy_1");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[2], "0.5,3.0,4.0,5.0,6.0");
    }

    #[test]
    fn blow_up_is_reported() {
        let p = relaxed();
        let params = SimParams {
            total_steps: 3000,
            ..SimParams::default()
        };
        let mut d = drive(0.3);
        d.frequency = 10.0;
        match simulate(&p, &[1.0; 30], &d, &params) {
            Err(Error::BlowUp { step, .. }) => assert!(step > 0),
            Err(Error::CoincidentCenters(..)) | Err(Error::WallPenetration(_)) => {}
            other => panic!("expected a blow-up, got {:?}", other.map(|t| t.len())),
        }
    }
}
