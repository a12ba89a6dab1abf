use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use polygate_core::dynamics::Trajectory;
use polygate_core::evolve::{knee_point, Checkpoint, Evolution, GateEvaluator, GenerationRecord, Individual};
use polygate_core::gate::{
    dual_frequency_map, frequency_grid, nandness_sweep, noise_robustness, run_cases, GateResult, GateSettings,
    MaterialDesign, RelaxPolicy, TRUTH_TABLE,
};
use polygate_core::plot::{lattice_heatmap, line_chart, Series};
use polygate_core::sentinel::display;
use polygate_core::spectral::full_spectrum;
use polygate_core::{build_lattice, normal_modes, packing_fraction, relax_fire, EvolutionConfig};
use serde::Serialize;

use crate::artifacts::{record_run, ArtifactDir};
use crate::config::{self, DesignSource, EvaluateConfig, HeatmapConfig, ModesConfig, NoiseConfig, RelaxConfig, SweepConfig};
use crate::{Common, DesignArg, UsageError};

fn raw<'a>(common: &'a Common, bytes: &'a Option<Vec<u8>>) -> Option<(&'a Path, &'a [u8])> {
    common.config.as_deref().zip(bytes.as_deref())
}

fn bits_label(bits: [u8; 2]) -> String {
    format!("{}{}", bits[0], bits[1])
}

fn fmt_gains(g: &[f64; 4]) -> String {
    g.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

/// Loads the design and applies the relaxation policy once, returning
/// settings that reuse the prepared geometry.
fn prepared(source: &mut DesignSource, arg: &DesignArg, gate: &GateSettings) -> Result<(MaterialDesign, GateSettings)> {
    if let Some(path) = &arg.design {
        source.file = Some(path.clone());
    }
    let design = gate.prepare(&source.load(gate)?)?;
    let reuse = GateSettings {
        relax: RelaxPolicy::Reuse,
        ..*gate
    };
    Ok((design, reuse))
}

fn design_inputs(source: &DesignSource) -> Vec<&Path> {
    source.file.as_deref().into_iter().collect()
}

#[derive(Serialize)]
struct RelaxReport {
    particles: usize,
    packing_fraction: f64,
    residual_force: f64,
    iterations: usize,
    force_tol: f64,
}

pub fn relax(common: &Common, force_tol: Option<f64>) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), RelaxConfig::default())?;
    if let Some(tol) = force_tol {
        cfg.fire.force_tol = tol;
    }
    let dir = ArtifactDir::create(common.out_dir("relax"), common.overwrite)?;
    record_run(&dir, "relax", &cfg, raw(common, &bytes), &[], vec![])?;

    let lattice = build_lattice(&cfg.lattice)?;
    let stiffness = cfg.stiffness.clone().unwrap_or_else(|| vec![1.0; lattice.len()]);
    let packing = relax_fire(&lattice, &stiffness, &cfg.law, &cfg.fire)?;
    let report = RelaxReport {
        particles: packing.len(),
        packing_fraction: packing_fraction(&packing),
        residual_force: packing.residual_force,
        iterations: packing.relax_iterations,
        force_tol: cfg.fire.force_tol,
    };
    dir.write_json("packing.json", &packing)?;
    dir.write_json("relax_report.json", &report)?;
    println!(
        "relaxed {} particles in {} iterations: residual force {:.3e}, packing fraction {:.6}",
        report.particles, report.iterations, report.residual_force, report.packing_fraction
    );
    Ok(())
}

pub fn modes(common: &Common, arg: &DesignArg) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), ModesConfig::default())?;
    let (design, _) = prepared(&mut cfg.design, arg, &cfg.gate)?;
    let dir = ArtifactDir::create(common.out_dir("modes"), common.overwrite)?;
    record_run(&dir, "modes", &cfg, raw(common, &bytes), &design_inputs(&cfg.design), vec![])?;

    let modes = normal_modes(&design.packing, &design.stiffness, &cfg.gate.sim.law)?;
    dir.write_json("modes.json", &modes)?;
    let rows: Vec<Vec<String>> = modes
        .eigenvalues
        .iter()
        .zip(&modes.frequencies)
        .enumerate()
        .map(|(i, (l, f))| vec![i.to_string(), display(*l), display(*f)])
        .collect();
    dir.write_csv("modes.csv", &["mode", "eigenvalue", "frequency"], &rows)?;
    let top = modes.frequencies.last().copied().unwrap_or(0.0);
    println!(
        "{} modes ({} zero), highest frequency {top:.3}",
        modes.frequencies.len(),
        modes.zero_mode_count()
    );
    Ok(())
}

fn case_rows(result: &GateResult, denominators: &[f64; 4]) -> Vec<Vec<String>> {
    TRUTH_TABLE
        .iter()
        .enumerate()
        .map(|(c, &bits)| {
            vec![
                bits_label(bits),
                display(result.output_amplitudes[c]),
                display(denominators[c]),
                display(result.gains[c]),
            ]
        })
        .collect()
}

fn write_trajectory(dir: &ArtifactDir, name: &str, traj: &Trajectory) -> Result<()> {
    traj.write_csv(dir.writer(name)?)?;
    Ok(())
}

pub fn evaluate(
    common: &Common,
    arg: &DesignArg,
    frequency: Option<f64>,
    bits: [u8; 2],
    emit_trajectories: bool,
) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), EvaluateConfig::default())?;
    if let Some(f) = frequency {
        cfg.frequency = f;
    }
    let (design, reuse) = prepared(&mut cfg.design, arg, &cfg.gate)?;
    let dir = ArtifactDir::create(common.out_dir("evaluate"), common.overwrite)?;
    record_run(&dir, "evaluate", &cfg, raw(common, &bytes), &design_inputs(&cfg.design), vec![])?;

    let runs = run_cases(&design, &reuse, cfg.frequency, None)?;
    let output = design.ports.output;
    let result = runs.result_for(output)?;
    dir.write_json("design.json", &design)?;
    dir.write_json("gate_result.json", &result)?;
    dir.write_csv(
        "cases.csv",
        &["bits", "output_amplitude", "denominator", "gain"],
        &case_rows(&result, &runs.denominators),
    )?;

    let case = TRUTH_TABLE.iter().position(|b| *b == bits).expect("validated bits");
    let traj = &runs.trajectories[case];
    let spectrum = full_spectrum(&traj.window(output, 0), traj.dt);
    let rows: Vec<Vec<String>> = spectrum.iter().map(|(f, m)| vec![display(*f), display(*m)]).collect();
    dir.write_csv("spectrum.csv", &["f", "magnitude"], &rows)?;

    let t: Vec<f64> = (0..traj.len()).map(|s| s as f64 * traj.dt).collect();
    let pts = |p: usize| -> Vec<(f64, f64)> { t.iter().copied().zip(traj.x_series(p)).collect() };
    let (in1, in2, out) = (pts(design.ports.inputs[0]), pts(design.ports.inputs[1]), pts(output));
    let svg = line_chart(
        &format!("response, inputs {}", bits_label(bits)),
        "t",
        "x displacement",
        &[
            Series { label: "input 1", color: "blue", points: &in1 },
            Series { label: "input 2", color: "green", points: &in2 },
            Series { label: "output", color: "red", points: &out },
        ],
    );
    dir.write_bytes("response.svg", svg.as_bytes())?;

    if emit_trajectories {
        for (c, &b) in TRUTH_TABLE.iter().enumerate() {
            write_trajectory(&dir, &format!("trajectory_{}.csv", bits_label(b)), &runs.trajectories[c])?;
        }
    }
    println!(
        "f = {}: gains [{}], F = {}, M = {}",
        cfg.frequency,
        fmt_gains(&result.gains),
        display(result.fitness),
        display(result.nandness)
    );
    Ok(())
}

pub fn sweep(common: &Common, arg: &DesignArg) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), SweepConfig::default())?;
    let grid = frequency_grid(cfg.low, cfg.high, cfg.step)?;
    let (design, reuse) = prepared(&mut cfg.design, arg, &cfg.gate)?;
    let dir = ArtifactDir::create(common.out_dir("sweep"), common.overwrite)?;
    record_run(&dir, "sweep", &cfg, raw(common, &bytes), &design_inputs(&cfg.design), vec![])?;

    let sweep = nandness_sweep(&design, &reuse, &grid, cfg.peak_ratio)?;
    dir.write_json("sweep.json", &sweep)?;
    let rows: Vec<Vec<String>> = sweep
        .points
        .iter()
        .map(|p| {
            let (g, m) = p.result.map_or(([f64::NAN; 4], f64::NAN), |r| (r.gains, r.nandness));
            let mut row = vec![display(p.frequency)];
            row.extend(g.iter().map(|x| display(*x)));
            row.push(display(m));
            row
        })
        .collect();
    dir.write_csv("sweep.csv", &["f", "G00", "G01", "G10", "G11", "M"], &rows)?;
    let pts: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .map(|p| (p.frequency, p.result.map_or(f64::NAN, |r| r.nandness)))
        .collect();
    let svg = line_chart("NAND-ness sweep", "f", "M", &[Series { label: "M", color: "black", points: &pts }]);
    dir.write_bytes("sweep.svg", svg.as_bytes())?;

    let failed = sweep.points.iter().filter(|p| p.result.is_none()).count();
    let peaks: Vec<f64> = sweep.peaks.iter().map(|&i| sweep.points[i].frequency).collect();
    match sweep.global_peak() {
        Some(i) => println!(
            "{} frequencies ({failed} failed); global peak M = {} at f = {}; peaks at {peaks:?}",
            grid.len(),
            display(sweep.points[i].result.expect("peak has a result").nandness),
            sweep.points[i].frequency
        ),
        None => println!("{} frequencies ({failed} failed); no defined NAND-ness", grid.len()),
    }
    Ok(())
}

pub fn heatmap(common: &Common, arg: &DesignArg) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), HeatmapConfig::default())?;
    let (design, reuse) = prepared(&mut cfg.design, arg, &cfg.gate)?;
    let dir = ArtifactDir::create(common.out_dir("heatmap"), common.overwrite)?;
    record_run(&dir, "heatmap", &cfg, raw(common, &bytes), &design_inputs(&cfg.design), vec![])?;

    let maps = dual_frequency_map(&design, &reuse, cfg.frequencies)?;
    dir.write_json("heatmap.json", &maps)?;
    let rows: Vec<Vec<String>> = maps[0]
        .rows
        .iter()
        .zip(&maps[1].rows)
        .map(|(a, b)| {
            let p = design.packing.positions[a.index];
            vec![
                a.index.to_string(),
                display(p[0]),
                display(p[1]),
                a.free.to_string(),
                display(a.nandness),
                display(b.nandness),
            ]
        })
        .collect();
    let [f1, f2] = cfg.frequencies;
    dir.write_csv("heatmap.csv", &["index", "x", "y", "free", "M_f1", "M_f2"], &rows)?;
    let fill: Vec<f64> = maps[0].rows.iter().map(|r| r.nandness).collect();
    let stroke: Vec<f64> = maps[1].rows.iter().map(|r| r.nandness).collect();
    let svg = lattice_heatmap(
        &design.packing,
        &fill,
        &stroke,
        &design.ports.all(),
        &format!("NAND-ness: fill at f = {f1}, outline at f = {f2}"),
    );
    dir.write_bytes("heatmap.svg", svg.as_bytes())?;
    for (map, f) in maps.iter().zip([f1, f2]) {
        let out = &map.rows[design.ports.output];
        match map.best_free() {
            Some(best) => println!(
                "f = {f}: output M = {}, best free particle {} with M = {}",
                display(out.nandness),
                best.index,
                display(best.nandness)
            ),
            None => println!("f = {f}: output M = {}", display(out.nandness)),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct NoiseReport<'a> {
    frequency: f64,
    noiseless: GateResult,
    rows: &'a [polygate_core::gate::NoiseRow],
}

pub fn noise(common: &Common, arg: &DesignArg) -> Result<()> {
    let (mut cfg, bytes) = config::load(common.config.as_deref(), NoiseConfig::default())?;
    let (design, reuse) = prepared(&mut cfg.design, arg, &cfg.gate)?;
    let dir = ArtifactDir::create(common.out_dir("noise"), common.overwrite)?;
    record_run(&dir, "noise", &cfg, raw(common, &bytes), &design_inputs(&cfg.design), vec![cfg.seed])?;

    let noiseless = polygate_core::evaluate_gate(&design, &reuse, cfg.frequency)?;
    let rows = noise_robustness(&design, &reuse, cfg.frequency, &cfg.snr_db, cfg.trials, cfg.seed)?;
    dir.write_json(
        "noise.json",
        &NoiseReport {
            frequency: cfg.frequency,
            noiseless,
            rows: &rows,
        },
    )?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![display(r.snr_db), r.trials.to_string(), r.dropouts.to_string()];
            row.extend(r.mean_gains.iter().map(|g| display(*g)));
            row.push(display(r.mean_nandness));
            row.push(display(r.std_nandness));
            row
        })
        .collect();
    dir.write_csv(
        "noise.csv",
        &["snr_db", "trials", "dropouts", "G00", "G01", "G10", "G11", "M_mean", "M_std"],
        &table,
    )?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.snr_db, r.mean_nandness)).collect();
    let svg = line_chart("noise robustness", "SNR (dB)", "mean M", &[Series { label: "M", color: "black", points: &pts }]);
    dir.write_bytes("noise.svg", svg.as_bytes())?;
    println!("noiseless M = {}", display(noiseless.nandness));
    for r in &rows {
        println!(
            "SNR {:>6} dB: M = {} +/- {} ({} of {} trials failed)",
            display(r.snr_db),
            display(r.mean_nandness),
            display(r.std_nandness),
            r.dropouts,
            r.trials
        );
    }
    Ok(())
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Continue from a checkpoint; its embedded config is used.
    #[arg(long, conflicts_with_all = ["config", "seed", "generations", "population"])]
    pub resume: Option<PathBuf>,
    /// Stop once this generation is complete, leaving a checkpoint.
    #[arg(long)]
    pub stop_after: Option<usize>,
    /// Run seed, overriding the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Generation count, overriding the config.
    #[arg(long)]
    pub generations: Option<usize>,
    /// Population size, overriding the config.
    #[arg(long)]
    pub population: Option<usize>,
}

const HISTORY: &str = "history.jsonl";

fn write_checkpoint(dir: &ArtifactDir, cfg: &EvolutionConfig, evo: &Evolution<GateEvaluator>) -> Result<()> {
    let ck = Checkpoint {
        config: cfg.clone(),
        state: evo.state().clone(),
    };
    let named = format!("checkpoints/gen_{:06}.json", evo.generation());
    dir.write_json(&named, &ck)?;
    // write-then-rename so a crash never leaves a truncated latest checkpoint
    dir.write_json("checkpoint.json.tmp", &ck)?;
    fs::rename(dir.path("checkpoint.json.tmp"), dir.path("checkpoint.json"))?;
    Ok(())
}

/// Keeps the first `keep` history lines, for continuing after a resume.
fn truncate_history(path: &Path, keep: usize) -> Result<()> {
    let file = fs::File::open(path).with_context(|| format!("resuming needs {}", path.display()))?;
    let lines: Vec<String> = BufReader::new(file).lines().take(keep).collect::<std::io::Result<_>>()?;
    if lines.len() < keep {
        return Err(UsageError(format!(
            "{} has {} records but the checkpoint needs {keep}",
            path.display(),
            lines.len()
        ))
        .into());
    }
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_history(path: &Path) -> Result<Vec<GenerationRecord>> {
    let file = fs::File::open(path)?;
    BufReader::new(file)
        .lines()
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}

#[derive(Serialize)]
struct FrontMember<'a> {
    id: u64,
    age: u32,
    lineage_id: u64,
    #[serde(with = "polygate_core::sentinel::vec")]
    objectives: Vec<f64>,
    genome: &'a polygate_core::Genome,
}

impl<'a> From<&'a Individual> for FrontMember<'a> {
    fn from(i: &'a Individual) -> Self {
        Self {
            id: i.id,
            age: i.age,
            lineage_id: i.lineage_id,
            objectives: i.objectives.clone(),
            genome: &i.genome,
        }
    }
}

#[derive(Serialize)]
struct Champion<'a> {
    individual: FrontMember<'a>,
    results: Vec<GateResult>,
}

fn champion<'a>(
    ev: &GateEvaluator,
    ind: &'a Individual,
    frequencies: &[f64],
) -> Result<(MaterialDesign, Champion<'a>)> {
    let design = ev.settings.prepare(&ev.design(&ind.genome))?;
    let reuse = GateSettings {
        relax: RelaxPolicy::Reuse,
        ..ev.settings
    };
    let results = frequencies
        .iter()
        .map(|&f| polygate_core::evaluate_gate(&design, &reuse, f))
        .collect::<polygate_core::Result<Vec<_>>>()?;
    Ok((
        design,
        Champion {
            individual: ind.into(),
            results,
        },
    ))
}

fn fitness_chart(history: &[GenerationRecord], frequencies: &[f64]) -> String {
    let colors = ["red", "blue"];
    let mut curves: Vec<(String, &str, Vec<(f64, f64)>)> = Vec::new();
    for (d, f) in frequencies.iter().enumerate() {
        let best = history.iter().map(|r| (r.generation as f64, r.best[d])).collect();
        let mean = history.iter().map(|r| (r.generation as f64, r.mean[d])).collect();
        curves.push((format!("best F at f = {f}"), colors[d % 2], best));
        curves.push((format!("mean F at f = {f}"), "gray", mean));
    }
    let series: Vec<Series> = curves
        .iter()
        .map(|(label, color, pts)| Series { label, color, points: pts })
        .collect();
    line_chart("fitness", "generation", "F", &series)
}

pub fn evolve(common: &Common, args: &RunArgs, poly: bool) -> Result<()> {
    let command = if poly { "evolve-poly" } else { "evolve" };
    let (cfg, state, bytes) = match &args.resume {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let ck: Checkpoint =
                serde_json::from_str(&text).map_err(|e| UsageError(format!("checkpoint {}: {e}", path.display())))?;
            (ck.config, Some(ck.state), None)
        }
        None => {
            let defaults = if poly { config::poly_defaults() } else { EvolutionConfig::default() };
            let (mut cfg, bytes) = config::load(common.config.as_deref(), defaults)?;
            if let Some(s) = args.seed {
                cfg.seed = s;
            }
            if let Some(g) = args.generations {
                cfg.generations = g;
            }
            if let Some(p) = args.population {
                cfg.population_size = p;
            }
            (cfg, None, bytes)
        }
    };
    let wanted = if poly { 2 } else { 1 };
    if cfg.frequencies.len() != wanted {
        return Err(UsageError(format!("{command} needs {wanted} frequencies, got {:?}", cfg.frequencies)).into());
    }
    cfg.validate()?;
    if cfg.checkpoint_every == 0 {
        return Err(UsageError("checkpoint_every must be at least 1".into()).into());
    }

    let dir = ArtifactDir::create(common.out_dir(command), common.overwrite || args.resume.is_some())?;
    let evaluator = GateEvaluator::from_config(&cfg)?;
    let space = cfg.space()?;
    let history_path = dir.path(HISTORY);
    let mut evo = match state {
        Some(state) => {
            truncate_history(&history_path, state.generation + 1)?;
            Evolution::resume(cfg.afpo(), space, &evaluator, state)?
        }
        None => {
            record_run(&dir, command, &cfg, raw(common, &bytes), &[], vec![cfg.seed])?;
            let (evo, first) = Evolution::start(cfg.afpo(), space, &evaluator)?;
            let mut h = dir.writer(HISTORY)?;
            writeln!(h, "{}", serde_json::to_string(&first)?)?;
            h.flush()?;
            evo
        }
    };

    let mut history = fs::OpenOptions::new().append(true).open(&history_path)?;
    let stop = args.stop_after.unwrap_or(usize::MAX);
    while !evo.is_finished() && evo.generation() < stop {
        let record = evo.step();
        writeln!(history, "{}", serde_json::to_string(&record)?)?;
        history.flush()?;
        if record.generation % cfg.checkpoint_every == 0 {
            write_checkpoint(&dir, &cfg, &evo)?;
        }
        eprintln!(
            "generation {}: best F {}",
            record.generation,
            record.best.iter().map(|x| display(*x)).collect::<Vec<_>>().join(" / ")
        );
    }
    write_checkpoint(&dir, &cfg, &evo)?;
    if !evo.is_finished() {
        println!(
            "stopped after generation {}; resume with --resume {}",
            evo.generation(),
            dir.path("checkpoint.json").display()
        );
        return Ok(());
    }

    dir.write_json("population.json", evo.population())?;
    let records = read_history(&history_path)?;
    dir.write_bytes("fitness.svg", fitness_chart(&records, &cfg.frequencies).as_bytes())?;

    let (design, best) = champion(&evaluator, evo.best(), &cfg.frequencies)?;
    dir.write_json("best_design.json", &design)?;
    dir.write_json("best.json", &best)?;
    println!(
        "best after {} generations: F = {}",
        evo.generation(),
        best.individual.objectives.iter().map(|x| display(*x)).collect::<Vec<_>>().join(" / ")
    );

    if poly {
        let front = evo.front();
        let members: Vec<FrontMember> = front.iter().map(|i| FrontMember::from(*i)).collect();
        dir.write_json("pareto_front.json", &members)?;
        let rows: Vec<Vec<String>> = front
            .iter()
            .map(|i| vec![i.id.to_string(), display(i.objectives[0]), display(i.objectives[1])])
            .collect();
        dir.write_csv("pareto_front.csv", &["id", "F_f1", "F_f2"], &rows)?;
        let points: Vec<Vec<f64>> = front.iter().map(|i| i.objectives.clone()).collect();
        let knee = front[knee_point(&points)?];
        let (knee_design, knee_report) = champion(&evaluator, knee, &cfg.frequencies)?;
        dir.write_json("knee_design.json", &knee_design)?;
        dir.write_json("knee.json", &knee_report)?;
        let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let svg = line_chart(
            "Pareto front",
            &format!("F at f = {}", cfg.frequencies[0]),
            &format!("F at f = {}", cfg.frequencies[1]),
            &[Series { label: "front", color: "black", points: &sorted }],
        );
        dir.write_bytes("pareto.svg", svg.as_bytes())?;
        println!(
            "front of {} designs; knee F = {} / {}",
            front.len(),
            display(knee.objectives[0]),
            display(knee.objectives[1])
        );
    }
    Ok(())
}
