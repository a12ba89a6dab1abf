mod common;

use common::*;
use polygate_core::gate::{
    evaluate_gate, evaluate_gate_noisy, frequency_grid, nandness_sweep, per_particle_map, GateSettings, InputNoise,
    RelaxPolicy, PEAK_MEDIAN_RATIO,
};

#[test]
fn mirror_design_has_equal_single_input_gains() {
    let r = evaluate_gate(&uniform_mirror_design(), &GateSettings::default(), 10.0).unwrap();
    let [_, g01, g10, _] = r.gains;
    assert!((g01 - g10).abs() < 1e-3, "G01 {g01} G10 {g10}");
}

#[test]
fn evaluation_is_bit_identical() {
    let d = random_design(11);
    let s = GateSettings::default();
    let a = evaluate_gate(&d, &s, 10.0).unwrap();
    let b = evaluate_gate(&d, &s, 10.0).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn infinite_snr_matches_noiseless() {
    let d = random_design(12);
    let s = GateSettings::default();
    let clean = evaluate_gate(&d, &s, 10.0).unwrap();
    let noise = InputNoise {
        snr_db: f64::INFINITY,
        seed: 5,
    };
    assert_eq!(evaluate_gate_noisy(&d, &s, 10.0, noise).unwrap(), clean);
}

#[test]
fn noisy_evaluation_depends_only_on_seed() {
    let d = random_design(13);
    let s = GateSettings::default();
    let noise = |seed| InputNoise { snr_db: 20.0, seed };
    let a = evaluate_gate_noisy(&d, &s, 10.0, noise(1)).unwrap();
    let b = evaluate_gate_noisy(&d, &s, 10.0, noise(1)).unwrap();
    let c = evaluate_gate_noisy(&d, &s, 10.0, noise(2)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.gains, c.gains);
}

#[test]
fn gains_are_scale_invariant_in_linear_regime() {
    let d = random_design(14);
    let mut s = GateSettings::default();
    s.drive = s.drive.scaled(0.5);
    let base = evaluate_gate(&d, &s, 10.0).unwrap();
    for alpha in [0.5, 2.0] {
        let scaled = GateSettings {
            drive: s.drive.scaled(alpha),
            ..s
        };
        let r = evaluate_gate(&d, &scaled, 10.0).unwrap();
        for c in 0..4 {
            let e = rel_diff(r.gains[c], base.gains[c]);
            assert!(e < 0.01, "alpha {alpha} case {c}: {e}");
        }
    }
}

#[test]
fn per_design_relaxation_is_idempotent_on_relaxed_input() {
    let d = random_design(15);
    let per = evaluate_gate(&d, &GateSettings::default(), 10.0).unwrap();
    let reuse = GateSettings {
        relax: RelaxPolicy::Reuse,
        ..Default::default()
    };
    let kept = evaluate_gate(&d, &reuse, 10.0).unwrap();
    for c in 0..4 {
        assert!(rel_diff(per.gains[c], kept.gains[c]) < 1e-6);
    }
}

#[test]
fn particle_map_agrees_with_output_evaluation() {
    let d = random_design(16);
    let s = GateSettings::default();
    let map = per_particle_map(&d, &s, 10.0).unwrap();
    let r = evaluate_gate(&d, &s, 10.0).unwrap();
    assert_eq!(map.rows.len(), 30);
    assert_eq!(map.rows[26].gains, r.gains);
    for p in [2, 13, 15] {
        assert!(!map.rows[p].free);
    }
    assert_eq!(map.rows.iter().filter(|r| r.free).count(), 27);
    assert!(map.best_free().unwrap().free);
}

#[test]
fn sweep_records_failures_and_continues() {
    let d = random_design(17);
    let grid = [1.0, 9.0, 10.0, 11.0];
    let sweep = nandness_sweep(&d, &GateSettings::default(), &grid, PEAK_MEDIAN_RATIO).unwrap();
    assert_eq!(sweep.points.len(), 4);
    assert!(sweep.points[0].result.is_none() && sweep.points[0].error.is_some());
    assert!(sweep.points[1..].iter().all(|p| p.result.is_some()));
    assert_eq!(frequency_grid(9.0, 11.0, 1.0).unwrap().len(), 3);
}
