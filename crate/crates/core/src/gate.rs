//! Logic-gate evaluation of a material: the four truth-table runs, gains,
//! minimax NAND fitness, NAND-ness, frequency sweeps, per-particle maps and
//! noise robustness.
//!
//! Gains normalize the output's spectral amplitude at the drive frequency by
//! the sum of the two input drive amplitudes. An input whose bit is 0 is not
//! driven, so the source drive's amplitude stands in for it as the baseline.
//! With equal drive amplitudes all four denominators are `2 A_s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{resolve_timing, simulate_with_signals, DriveSignals, DriveSpec, SimParams, Trajectory};
use crate::error::{Error, Result};
use crate::packing::{relax_fire, FireParams, Packing};
use crate::seeding;
use crate::sentinel;
use crate::spectral::{add_awgn, amplitude_at, Spectrum};

/// Bit pairs in evaluation order: 00, 01, 10, 11.
pub const TRUTH_TABLE: [[u8; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];

/// Admissible per-particle stiffness.
pub const STIFFNESS_RANGE: (f64, f64) = (1.0, 10.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ports {
    pub inputs: [usize; 2],
    pub source: usize,
    pub output: usize,
}

impl Default for Ports {
    /// Mirror-symmetric placement on the default 5x6 lattice: source and
    /// output share a column at opposite walls, inputs flank it mid-height.
    fn default() -> Self {
        Self {
            inputs: [13, 15],
            source: 2,
            output: 26,
        }
    }
}

impl Ports {
    pub fn all(&self) -> [usize; 4] {
        [self.inputs[0], self.inputs[1], self.source, self.output]
    }

    pub fn is_driven(&self, particle: usize) -> bool {
        self.inputs.contains(&particle) || self.source == particle
    }

    pub fn validate(&self, particle_count: usize) -> Result<()> {
        let all = self.all();
        for (i, &p) in all.iter().enumerate() {
            if p >= particle_count {
                return Err(Error::invalid(format!("port {p} out of range")));
            }
            if all[..i].contains(&p) {
                return Err(Error::invalid(format!("port {p} assigned twice")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialDesign {
    pub packing: Packing,
    pub stiffness: Vec<f64>,
    pub ports: Ports,
}

impl MaterialDesign {
    pub fn validate(&self) -> Result<()> {
        if self.stiffness.len() != self.packing.len() {
            return Err(Error::LengthMismatch(self.stiffness.len(), self.packing.len()));
        }
        let (lo, hi) = STIFFNESS_RANGE;
        if let Some(k) = self.stiffness.iter().find(|k| !(**k >= lo && **k <= hi)) {
            return Err(Error::invalid(format!("stiffness {k} outside [{lo}, {hi}]")));
        }
        self.ports.validate(self.packing.len())
    }
}

/// Which displacement signal is read as a particle's vibration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// x displacement (the drive axis).
    #[default]
    X,
    /// Spectral magnitude of the 2D displacement, `sqrt(|X_x|^2 + |X_y|^2)`.
    Magnitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RelaxPolicy {
    /// Relax the packing under the design's own stiffness before evaluating.
    #[default]
    PerDesign,
    /// Use the stored packing positions as they are.
    Reuse,
}

/// Default amplitude of every drive. The WCA contact is strongly anharmonic
/// near its cutoff and transients amplify the drive several-fold inside the
/// packing, so gains stay amplitude-independent only well below the contact
/// overlap.
pub const DEFAULT_DRIVE_AMPLITUDE: f64 = 1e-5;

/// Drive amplitudes and phases; ports come from the design and the frequency
/// from the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveTemplate {
    pub a1: f64,
    pub a2: f64,
    pub a_s: f64,
    pub phase1: f64,
    pub phase2: f64,
}

impl Default for DriveTemplate {
    fn default() -> Self {
        Self {
            a1: DEFAULT_DRIVE_AMPLITUDE,
            a2: DEFAULT_DRIVE_AMPLITUDE,
            a_s: DEFAULT_DRIVE_AMPLITUDE,
            phase1: 0.0,
            phase2: 0.0,
        }
    }
}

impl DriveTemplate {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            a1: self.a1 * factor,
            a2: self.a2 * factor,
            a_s: self.a_s * factor,
            ..*self
        }
    }

    pub fn spec(&self, ports: &Ports, frequency: f64, bits: [u8; 2]) -> DriveSpec {
        DriveSpec {
            input_ports: ports.inputs,
            source_port: ports.source,
            output_port: ports.output,
            a1: self.a1,
            a2: self.a2,
            a_s: self.a_s,
            frequency,
            phase1: self.phase1,
            phase2: self.phase2,
            bits,
        }
    }
}

/// Everything needed to evaluate a design besides the design itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct GateSettings {
    pub sim: SimParams,
    pub drive: DriveTemplate,
    pub readout: Readout,
    pub relax: RelaxPolicy,
    pub fire: FireParams,
}

impl GateSettings {
    /// Applies the relaxation policy, returning a design ready to simulate.
    pub fn prepare(&self, design: &MaterialDesign) -> Result<MaterialDesign> {
        design.validate()?;
        match self.relax {
            RelaxPolicy::Reuse => Ok(design.clone()),
            RelaxPolicy::PerDesign => {
                let packing = relax_fire(&design.packing, &design.stiffness, &self.sim.law, &self.fire)?;
                Ok(MaterialDesign {
                    packing,
                    ..design.clone()
                })
            }
        }
    }

    fn reuse(&self) -> Self {
        Self {
            relax: RelaxPolicy::Reuse,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub frequency: f64,
    /// O_00, O_01, O_10, O_11.
    pub output_amplitudes: [f64; 4],
    /// G_00, G_01, G_10, G_11.
    #[serde(with = "sentinel::array4")]
    pub gains: [f64; 4],
    #[serde(with = "sentinel")]
    pub fitness: f64,
    #[serde(with = "sentinel")]
    pub nandness: f64,
}

impl GateResult {
    pub fn from_gains(frequency: f64, output_amplitudes: [f64; 4], gains: [f64; 4]) -> Self {
        Self {
            frequency,
            output_amplitudes,
            gains,
            fitness: fitness(&gains),
            nandness: nandness(&gains),
        }
    }
}

/// Minimax distance to the ideal NAND gains (1, 1, 1, 0); 0 is perfect.
pub fn fitness(gains: &[f64; 4]) -> f64 {
    let [g00, g01, g10, g11] = *gains;
    (1.0 - g00)
        .abs()
        .max((1.0 - g01).abs())
        .max((1.0 - g10).abs())
        .max(g11.abs())
}

/// `G_00 G_01 G_10 / G_11`. A vanishing `G_11` gives `+inf`, or NaN
/// ("undefined") when the numerator vanishes as well.
pub fn nandness(gains: &[f64; 4]) -> f64 {
    let [g00, g01, g10, g11] = *gains;
    let num = g00 * g01 * g10;
    if g11 > 0.0 {
        num / g11
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        f64::NAN
    }
}

/// Output bit: 1 iff `output / reference >= threshold` (ties read as 1).
/// `reference` must be positive.
pub fn read_bit(output_amplitude: f64, reference_amplitude: f64, threshold: f64) -> u8 {
    u8::from(output_amplitude >= threshold * reference_amplitude)
}

/// Noise injected into the active input drive signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InputNoise {
    pub snr_db: f64,
    pub seed: u64,
}

/// The four truth-table trajectories of one design at one frequency.
#[derive(Debug, Clone)]
pub struct CaseRuns {
    pub frequency: f64,
    pub ports: Ports,
    pub readout: Readout,
    pub trajectories: Vec<Trajectory>,
    /// Gain denominators per case.
    pub denominators: [f64; 4],
}

impl CaseRuns {
    /// Drive-frequency bin of one displacement component (0 = x, 1 = y).
    pub fn spectrum(&self, case: usize, particle: usize, axis: usize) -> Result<Spectrum> {
        let tr = &self.trajectories[case];
        amplitude_at(&tr.window(particle, axis), tr.dt, self.frequency)
    }

    /// Spectral amplitude of `particle` at the drive frequency in `case`.
    pub fn amplitude(&self, case: usize, particle: usize) -> Result<f64> {
        let x = self.spectrum(case, particle, 0)?;
        match self.readout {
            Readout::X => Ok(x.magnitude),
            Readout::Magnitude => {
                let y = self.spectrum(case, particle, 1)?;
                Ok(x.magnitude.hypot(y.magnitude))
            }
        }
    }

    /// Gate metrics reading `particle` as the output.
    pub fn result_for(&self, particle: usize) -> Result<GateResult> {
        let mut out = [0.0; 4];
        let mut gains = [0.0; 4];
        for c in 0..4 {
            out[c] = self.amplitude(c, particle)?;
            gains[c] = out[c] / self.denominators[c];
        }
        Ok(GateResult::from_gains(self.frequency, out, gains))
    }
}

/// Runs the four truth-table simulations of a design, optionally with noisy
/// input drives. Cases run concurrently and are returned in 00, 01, 10, 11
/// order.
pub fn run_cases(
    design: &MaterialDesign,
    settings: &GateSettings,
    frequency: f64,
    noise: Option<InputNoise>,
) -> Result<CaseRuns> {
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(Error::invalid(format!("frequency must be positive, got {frequency}")));
    }
    let design = settings.prepare(design)?;
    let ports = design.ports;
    let probe = settings.drive.spec(&ports, frequency, [1, 1]);
    probe.validate(design.packing.len())?;
    let timing = resolve_timing(&design.packing, &design.stiffness, &probe, &settings.sim)?;

    let cases: Vec<Result<(Trajectory, f64)>> = TRUTH_TABLE
        .par_iter()
        .enumerate()
        .map(|(case, &bits)| {
            let drive = settings.drive.spec(&ports, frequency, bits);
            let mut signals = DriveSignals::sinusoidal(&drive, &timing);
            if let Some(noise) = noise {
                let mut rng = seeding::stream(noise.seed, &[case as u64]);
                for which in 0..2 {
                    if bits[which] == 1 {
                        let sig = signals.signal_mut(ports.inputs[which]).expect("input signal");
                        *sig = add_awgn(sig, noise.snr_db, &mut rng)?;
                    }
                }
            }
            let window_amp = |p: usize| -> Result<f64> {
                let s = signals.signal(p).expect("driven signal");
                Ok(amplitude_at(&s[timing.analysis_start..], timing.dt, frequency)?.magnitude)
            };
            let source = window_amp(ports.source)?;
            let mut denom = 0.0;
            for which in 0..2 {
                denom += if bits[which] == 1 {
                    window_amp(ports.inputs[which])?
                } else {
                    source
                };
            }
            let traj = simulate_with_signals(
                &design.packing,
                &design.stiffness,
                settings.sim.law,
                &timing,
                settings.sim.damping,
                &signals,
            )?;
            Ok((traj, denom))
        })
        .collect();

    let mut trajectories = Vec::with_capacity(4);
    let mut denominators = [0.0; 4];
    for (c, r) in cases.into_iter().enumerate() {
        let (t, d) = r?;
        trajectories.push(t);
        denominators[c] = d;
    }
    Ok(CaseRuns {
        frequency,
        ports,
        readout: settings.readout,
        trajectories,
        denominators,
    })
}

/// Gains, fitness and NAND-ness of the design's output port at `frequency`.
pub fn evaluate_gate(design: &MaterialDesign, settings: &GateSettings, frequency: f64) -> Result<GateResult> {
    let runs = run_cases(design, settings, frequency, None)?;
    runs.result_for(design.ports.output)
}

/// Like [`evaluate_gate`] with AWGN on the active input drive signals.
pub fn evaluate_gate_noisy(
    design: &MaterialDesign,
    settings: &GateSettings,
    frequency: f64,
    noise: InputNoise,
) -> Result<GateResult> {
    let runs = run_cases(design, settings, frequency, Some(noise))?;
    runs.result_for(design.ports.output)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub frequency: f64,
    pub result: Option<GateResult>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub points: Vec<SweepPoint>,
    /// Indices into `points` of detected NAND-ness peaks.
    pub peaks: Vec<usize>,
}

impl Sweep {
    /// Index of the largest NAND-ness (`+inf` ranks above every finite
    /// value; undefined values never win).
    pub fn global_peak(&self) -> Option<usize> {
        self.points
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.result.map(|r| (i, r.nandness)))
            .filter(|(_, m)| !m.is_nan())
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Inclusive frequency grid `low, low + step, ..., <= high`.
pub fn frequency_grid(low: f64, high: f64, step: f64) -> Result<Vec<f64>> {
    if !(low > 0.0 && high >= low && step > 0.0) {
        return Err(Error::invalid(format!(
            "need 0 < low <= high and step > 0, got ({low}, {high}, {step})"
        )));
    }
    let n = ((high - low) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| low + i as f64 * step).collect())
}

/// Peaks are points strictly above both neighbours whose NAND-ness is at
/// least `threshold_ratio` times the sweep median. Failed points are
/// skipped when looking for neighbours.
pub fn find_peaks(points: &[SweepPoint], threshold_ratio: f64) -> Vec<usize> {
    let valid: Vec<(usize, f64)> = points
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.result.map(|r| (i, r.nandness)))
        .filter(|(_, m)| !m.is_nan())
        .collect();
    if valid.len() < 3 {
        return Vec::new();
    }
    let mut sorted: Vec<f64> = valid.iter().map(|v| v.1).collect();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    };
    valid
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 > w[2].1 && w[1].1 >= threshold_ratio * median)
        .map(|w| w[1].0)
        .collect()
}

/// Default peak threshold relative to the sweep median.
pub const PEAK_MEDIAN_RATIO: f64 = 1.5;

/// Evaluates the gate across a frequency grid. Per-frequency failures are
/// recorded and the sweep continues.
pub fn nandness_sweep(
    design: &MaterialDesign,
    settings: &GateSettings,
    frequencies: &[f64],
    threshold_ratio: f64,
) -> Result<Sweep> {
    let prepared = settings.prepare(design)?;
    let reuse = settings.reuse();
    let points: Vec<SweepPoint> = frequencies
        .par_iter()
        .map(|&f| match evaluate_gate(&prepared, &reuse, f) {
            Ok(r) => SweepPoint {
                frequency: f,
                result: Some(r),
                error: None,
            },
            Err(e) => SweepPoint {
                frequency: f,
                result: None,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let peaks = find_peaks(&points, threshold_ratio);
    Ok(Sweep { points, peaks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRow {
    pub index: usize,
    #[serde(with = "sentinel::array4")]
    pub gains: [f64; 4],
    #[serde(with = "sentinel")]
    pub nandness: f64,
    /// False for kinematically driven ports, whose values are reported but
    /// do not reflect free motion.
    pub free: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleMap {
    pub frequency: f64,
    pub output: usize,
    pub rows: Vec<ParticleRow>,
}

impl ParticleMap {
    pub fn from_runs(runs: &CaseRuns) -> Result<Self> {
        let n = runs.trajectories[0].particle_count;
        let rows = (0..n)
            .map(|i| {
                let r = runs.result_for(i)?;
                Ok(ParticleRow {
                    index: i,
                    gains: r.gains,
                    nandness: r.nandness,
                    free: !runs.ports.is_driven(i),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            frequency: runs.frequency,
            output: runs.ports.output,
            rows,
        })
    }

    /// Free particle with the highest NAND-ness.
    pub fn best_free(&self) -> Option<&ParticleRow> {
        self.rows
            .iter()
            .filter(|r| r.free && !r.nandness.is_nan())
            .max_by(|a, b| a.nandness.total_cmp(&b.nandness))
    }
}

/// Reads every particle as a candidate output from one set of four runs.
pub fn per_particle_map(design: &MaterialDesign, settings: &GateSettings, frequency: f64) -> Result<ParticleMap> {
    ParticleMap::from_runs(&run_cases(design, settings, frequency, None)?)
}

/// Per-particle maps at two drive frequencies.
pub fn dual_frequency_map(
    design: &MaterialDesign,
    settings: &GateSettings,
    frequencies: [f64; 2],
) -> Result<[ParticleMap; 2]> {
    let prepared = settings.prepare(design)?;
    let reuse = settings.reuse();
    let a = per_particle_map(&prepared, &reuse, frequencies[0])?;
    let b = per_particle_map(&prepared, &reuse, frequencies[1])?;
    Ok([a, b])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    #[serde(with = "sentinel")]
    pub snr_db: f64,
    pub trials: usize,
    pub dropouts: usize,
    #[serde(with = "sentinel::array4")]
    pub mean_gains: [f64; 4],
    #[serde(with = "sentinel")]
    pub mean_nandness: f64,
    #[serde(with = "sentinel")]
    pub std_nandness: f64,
}

/// Evaluates the design `trials` times per SNR with independent noise on the
/// active input drives, aggregating over the trials that did not fail.
pub fn noise_robustness(
    design: &MaterialDesign,
    settings: &GateSettings,
    frequency: f64,
    snr_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<NoiseRow>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be at least 1"));
    }
    let prepared = settings.prepare(design)?;
    let reuse = settings.reuse();
    snr_list
        .iter()
        .enumerate()
        .map(|(si, &snr)| {
            let results: Vec<Result<GateResult>> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let noise = InputNoise {
                        snr_db: snr,
                        seed: seeding::derive_seed(seed, &[si as u64, t as u64]),
                    };
                    evaluate_gate_noisy(&prepared, &reuse, frequency, noise)
                })
                .collect();
            let ok: Vec<GateResult> = results.into_iter().filter_map(|r| r.ok()).collect();
            Ok(aggregate_noise(snr, trials, &ok))
        })
        .collect()
}

fn aggregate_noise(snr_db: f64, trials: usize, ok: &[GateResult]) -> NoiseRow {
    let n = ok.len() as f64;
    let mut mean_gains = [f64::NAN; 4];
    let (mut mean_m, mut std_m) = (f64::NAN, f64::NAN);
    if !ok.is_empty() {
        for (c, g) in mean_gains.iter_mut().enumerate() {
            *g = ok.iter().map(|r| r.gains[c]).sum::<f64>() / n;
        }
        mean_m = ok.iter().map(|r| r.nandness).sum::<f64>() / n;
        std_m = if ok.len() > 1 {
            (ok.iter().map(|r| (r.nandness - mean_m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
    }
    NoiseRow {
        snr_db,
        trials,
        dropouts: trials - ok.len(),
        mean_gains,
        mean_nandness: mean_m,
        std_nandness: std_m,
    }
}
