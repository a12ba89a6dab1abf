//! Per-command JSON configuration documents.
//!
//! A config file only needs the keys it changes: it is merged key by key
//! over the command's defaults, and any key the command does not know is
//! rejected.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polygate_core::gate::{GateSettings, MaterialDesign, Ports};
use polygate_core::{build_lattice, relax_fire, EvolutionConfig, FireParams, InteractionLaw, LatticeSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::UsageError;

/// Where a command gets its material from: a design file, or a lattice
/// relaxed under the given stiffness with the given ports.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct DesignSource {
    pub file: Option<PathBuf>,
    pub lattice: LatticeSpec,
    /// Per-particle stiffness; uniform 1 when absent.
    pub stiffness: Option<Vec<f64>>,
    pub ports: Ports,
}

impl DesignSource {
    pub fn load(&self, gate: &GateSettings) -> Result<MaterialDesign> {
        if let Some(path) = &self.file {
            let text = fs::read_to_string(path).with_context(|| format!("reading design {}", path.display()))?;
            let design: MaterialDesign = serde_json::from_str(&text)
                .map_err(|e| UsageError(format!("design {}: {e}", path.display())))?;
            design.validate()?;
            return Ok(design);
        }
        let lattice = build_lattice(&self.lattice)?;
        let stiffness = self.stiffness.clone().unwrap_or_else(|| vec![1.0; lattice.len()]);
        let packing = relax_fire(&lattice, &stiffness, &gate.sim.law, &gate.fire)?;
        let design = MaterialDesign {
            packing,
            stiffness,
            ports: self.ports,
        };
        design.validate()?;
        Ok(design)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxConfig {
    pub lattice: LatticeSpec,
    pub stiffness: Option<Vec<f64>>,
    pub law: InteractionLaw,
    pub fire: FireParams,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    pub design: DesignSource,
    pub gate: GateSettings,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvaluateConfig {
    pub design: DesignSource,
    pub gate: GateSettings,
    pub frequency: f64,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            design: DesignSource::default(),
            gate: GateSettings::default(),
            frequency: 10.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub design: DesignSource,
    pub gate: GateSettings,
    pub low: f64,
    pub high: f64,
    pub step: f64,
    /// Peaks must reach this multiple of the sweep median.
    pub peak_ratio: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            design: DesignSource::default(),
            gate: GateSettings::default(),
            low: 2.5,
            high: 30.0,
            step: 0.5,
            peak_ratio: polygate_core::gate::PEAK_MEDIAN_RATIO,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapConfig {
    pub design: DesignSource,
    pub gate: GateSettings,
    /// Fill encodes NAND-ness at the first, outline width at the second.
    pub frequencies: [f64; 2],
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            design: DesignSource::default(),
            gate: GateSettings::default(),
            frequencies: [10.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub design: DesignSource,
    pub gate: GateSettings,
    pub frequency: f64,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            design: DesignSource::default(),
            gate: GateSettings::default(),
            frequency: 10.0,
            snr_db: vec![40.0, 20.0, 0.0, -20.0, -40.0],
            trials: 20,
            seed: 0,
        }
    }
}

pub fn poly_defaults() -> EvolutionConfig {
    EvolutionConfig {
        population_size: 100,
        frequencies: vec![10.0, 20.0],
        ..EvolutionConfig::default()
    }
}

/// Overlays `patch` onto `base`, recursing into objects.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads a config, returning it with the raw file bytes (if any).
pub fn load<T: Serialize + DeserializeOwned>(path: Option<&Path>, defaults: T) -> Result<(T, Option<Vec<u8>>)> {
    let Some(path) = path else {
        return Ok((defaults, None));
    };
    let bytes = fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
    let patch: Value =
        serde_json::from_slice(&bytes).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
    if !patch.is_object() {
        return Err(UsageError(format!("config {} must be a JSON object", path.display())).into());
    }
    let mut merged = serde_json::to_value(&defaults)?;
    merge(&mut merged, patch);
    let cfg = serde_json::from_value(merged).map_err(|e| UsageError(format!("config {}: {e}", path.display())))?;
    Ok((cfg, Some(bytes)))
}
