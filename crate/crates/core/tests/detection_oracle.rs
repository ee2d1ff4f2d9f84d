mod common;

use std::f64::consts::PI;

use common::{ProductSpace, C};
use hatcat::detection::{apply_detection, detection_density, replay, rng_from_seed, sample_detection, LoweredStates};
use hatcat::{run_sequence, EtaDistribution, QuantumState, RunOptions};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn assert_matches_oracle(state: &QuantumState, space: &ProductSpace, v: &nalgebra::DVector<C>, tol: f64) {
    let mut seen = 0.0;
    for (occ, a) in state.basis().iter().zip(state.amplitudes()) {
        let Some(idx) = space.index(occ) else {
            assert!(
                a.norm() < tol,
                "{occ:?} lies beyond the oracle cutoff but has amplitude {a}"
            );
            continue;
        };
        let b = v[idx];
        assert!((a - b).norm() < tol, "{occ:?}: {a} vs {b}");
        seen += b.norm_sqr();
    }
    assert!((seen - 1.0).abs() < tol, "oracle mass outside the sector");
}

#[test]
fn detections_match_dense_operators() {
    let space = ProductSpace { n: 3, cutoff: 2 };
    let us = [0.4, -2.2, 1.7, 3.0];
    let start = QuantumState::uniform_fock(3, 2).unwrap();
    for k in 1..=us.len() {
        let lib = replay(&start, &us[..k]).unwrap();
        let oracle = common::detect_sequence(&space, &[2, 2, 2], &us[..k]);
        assert_matches_oracle(&lib, &space, &oracle, 1e-12);
    }
}

#[test]
fn four_mode_detection_matches_dense_operators() {
    let space = ProductSpace { n: 4, cutoff: 1 };
    let us = [1.1, -0.3];
    let lib = replay(&QuantumState::uniform_fock(4, 1).unwrap(), &us).unwrap();
    let oracle = common::detect_sequence(&space, &[1, 1, 1, 1], &us);
    assert_matches_oracle(&lib, &space, &oracle, 1e-12);
}

#[test]
fn density_matches_dense_expectation() {
    let space = ProductSpace { n: 3, cutoff: 2 };
    let us = [0.9, -1.4];
    let lib = replay(&QuantumState::uniform_fock(3, 2).unwrap(), &us).unwrap();
    let oracle = common::detect_sequence(&space, &[2, 2, 2], &us);
    let d = detection_density(&lib, 64).unwrap();
    for i in 0..64 {
        let expected = common::detection_density(&space, &oracle, d.angle(i));
        assert!((d.values()[i] - expected).abs() < 1e-12, "{i}");
    }
}

#[test]
fn gram_matrix_is_hermitian_with_atom_number_trace() {
    let s = replay(&QuantumState::uniform_fock(3, 4).unwrap(), &[0.2, 2.5, -1.0]).unwrap();
    let l = LoweredStates::new(&s).unwrap();
    let mut trace = 0.0;
    for j in 0..3 {
        for k in 0..3 {
            assert!((l.correlation(j, k) - l.correlation(k, j).conj()).norm() < 1e-13);
        }
        trace += l.correlation(j, j).re;
    }
    assert!((trace - s.total_atoms() as f64).abs() < 1e-12);
}

/// Reversing the mode order maps the density at `u` to the density at `−u`.
#[test]
fn mode_reversal_mirrors_the_density() {
    let s = replay(&QuantumState::uniform_fock(3, 3).unwrap(), &[0.7, -2.0]).unwrap();
    let reversed = s.permute_modes(&[2, 1, 0]).unwrap();
    let a = detection_density(&s, 128).unwrap();
    let b = detection_density(&reversed, 128).unwrap();
    for i in 1..128 {
        // grid point i sits at −π + 2πi/128, its mirror is point 128 − i
        assert!((a.values()[i] - b.values()[128 - i]).abs() < 1e-12);
    }
}

/// Multiplying amplitudes by `e^{iφ Σ_j j s_j}` shifts the density by `φ`.
#[test]
fn phase_rereference_shifts_the_density() {
    let s = replay(&QuantumState::uniform_fock(3, 3).unwrap(), &[1.3]).unwrap();
    let shift_cells = 16;
    let phi = 2.0 * PI * shift_cells as f64 / 128.0;
    let amps: Vec<C> = s
        .basis()
        .iter()
        .zip(s.amplitudes())
        .map(|(occ, a)| {
            let weight: u32 = occ.iter().enumerate().map(|(j, k)| j as u32 * k).sum();
            a * C::from_polar(1.0, phi * weight as f64)
        })
        .collect();
    let shifted = QuantumState::new(s.basis_arc().clone(), amps).unwrap();
    let a = detection_density(&s, 128).unwrap();
    let b = detection_density(&shifted, 128).unwrap();
    for i in 0..128 {
        assert!((b.values()[(i + shift_cells) % 128] - a.values()[i]).abs() < 1e-12);
    }
}

#[test]
fn first_detection_on_triple_fock_is_uniform_in_distribution() {
    // the first detection from |N,N,N⟩ is uniform on [−π, π): Kolmogorov–Smirnov against the identity CDF
    let s = QuantumState::uniform_fock(3, 3).unwrap();
    let mut rng = rng_from_seed(11);
    let mut us: Vec<f64> = (0..2000)
        .map(|_| {
            sample_detection(&s, &EtaDistribution::default(), 1024, 1, &mut rng)
                .unwrap()
                .0
                .u
        })
        .collect();
    us.sort_by(f64::total_cmp);
    let n = us.len() as f64;
    let ks = us
        .iter()
        .enumerate()
        .map(|(i, u)| {
            let f = (u + PI) / (2.0 * PI);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value
    assert!(ks < 1.63 / n.sqrt(), "KS statistic {ks}");
}

#[test]
fn sampled_positions_follow_the_density() {
    let s = apply_detection(&QuantumState::uniform_fock(3, 4).unwrap(), 0.6).unwrap();
    let density = detection_density(&s, 1024).unwrap();
    let cdf = density.cdf();
    let bins = 24;
    let per_bin = 1024 / bins;
    let expected: Vec<f64> = (0..bins)
        .map(|b| cdf[(b + 1) * per_bin.min(1024)] - cdf[b * per_bin])
        .collect();
    let draws = 20_000;
    let mut counts = vec![0usize; bins];
    let mut rng = rng_from_seed(2024);
    for _ in 0..draws {
        let u = density.quantile(rng.random::<f64>());
        let cell = (((u + PI) / (2.0 * PI)) * bins as f64).floor() as usize;
        counts[cell.min(bins - 1)] += 1;
    }
    let total_expected: f64 = expected.iter().sum();
    let chi2: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| {
            let e = e / total_expected * draws as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    let p = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p > 1e-3, "chi² = {chi2}, p = {p}");
}

#[test]
fn identical_seeds_give_identical_runs() {
    let s = QuantumState::uniform_fock(3, 6).unwrap();
    let opts = RunOptions {
        eta: "gauss:1.0,0.05".parse().unwrap(),
        ..Default::default()
    };
    let a = run_sequence(&s, 10, &opts, 77).unwrap();
    let b = run_sequence(&s, 10, &opts, 77).unwrap();
    assert_eq!(a, b);
    let bits = |r: &hatcat::DetectionRun| -> Vec<u64> {
        r.events
            .iter()
            .flat_map(|e| [e.u.to_bits(), e.eta.to_bits(), e.theta.to_bits()])
            .chain(
                r.final_state
                    .amplitudes()
                    .iter()
                    .flat_map(|z| [z.re.to_bits(), z.im.to_bits()]),
            )
            .collect()
    };
    assert_eq!(bits(&a), bits(&b));
    let other = run_sequence(&s, 10, &opts, 78).unwrap();
    assert_ne!(a.events, other.events);
}

#[test]
fn theta_is_u_over_eta() {
    let s = QuantumState::uniform_fock(3, 4).unwrap();
    let opts = RunOptions {
        eta: "table:0.5=1,2=1".parse().unwrap(),
        ..Default::default()
    };
    let run = run_sequence(&s, 8, &opts, 3).unwrap();
    for e in &run.events {
        assert!(e.eta == 0.5 || e.eta == 2.0);
        assert_eq!(e.theta, e.u / e.eta);
        assert!((-PI..PI).contains(&e.u));
    }
}

#[test]
fn run_state_equals_replay_of_its_events() {
    let s = QuantumState::uniform_fock(3, 5).unwrap();
    let run = run_sequence(&s, 6, &RunOptions::default(), 19).unwrap();
    let us: Vec<f64> = run.events.iter().map(|e| e.u).collect();
    let replayed = replay(&s, &us).unwrap();
    for (a, b) in replayed.amplitudes().iter().zip(run.final_state.amplitudes()) {
        assert!((a - b).norm() < 1e-14);
    }
    assert_eq!(run.final_state.total_atoms(), 9);
}
