mod common;

use common::*;
use matryoshka::euler::{euler_solve, EulerConfig};
use matryoshka::processes::*;
use matryoshka::*;
use proptest::prelude::*;

const H: f64 = 1e-4;

#[test]
fn finite_differences_match_the_system() {
    for (name, spec, _) in fixtures() {
        for n in [1, 4, 10] {
            let p = spec.build(n).unwrap();
            for &t in &[0.5, 2.0, 10.0] {
                let s = transient_vector(&p.system, &p.init, t).unwrap();
                let ahead = transient_vector(&p.system, &p.init, t + H).unwrap();
                let behind = transient_vector(&p.system, &p.init, t - H).unwrap();
                let rhs = p.system.derivative(&s.values).unwrap();
                for k in 0..n {
                    let fd = (ahead.values[k] - behind.values[k]) / (2.0 * H);
                    let scale = rhs[k].abs().max(s.values[k].abs()).max(1.0);
                    assert!(
                        (fd - rhs[k]).abs() <= 1e-5 * scale,
                        "{name} n={n} t={t} k={}: {fd} vs {}",
                        k + 1,
                        rhs[k]
                    );
                }
            }
        }
    }
}

#[test]
fn transient_converges_to_steady_state() {
    for (name, spec) in stable_fixtures() {
        let p = spec.build(8).unwrap();
        // the slowest growth-collapse mode decays like t^7 e^{-t/4}; at t = 100
        // the exact eighth moment is still 1.4e-8 short of stationary
        let horizon = if name == "growthcollapse" {
            200.0
        } else {
            100.0
        };
        let late = transient_vector(&p.system, &p.init, horizon).unwrap();
        let steady = steady_vector(&p.system).unwrap();
        for k in 1..=8 {
            assert!(
                rel_close(late.moment(k), steady.moment(k), 1e-8),
                "{name} k={k}: {} vs {}",
                late.moment(k),
                steady.moment(k)
            );
        }
    }
}

#[test]
fn steady_state_paths_agree() {
    for (name, spec) in stable_fixtures() {
        let p = spec.build(12).unwrap();
        let vector = steady_vector(&p.system).unwrap();
        let recursive = steady_recursive(&p.system).unwrap();
        for k in 1..=12 {
            let nth = steady_nth(&p.system, k).unwrap();
            assert!(
                rel_err(nth, vector.moment(k)) <= 1e-12,
                "{name} k={k}: {nth} vs {}",
                vector.moment(k)
            );
            assert!(
                rel_err(recursive.moment(k), vector.moment(k)) <= 1e-12,
                "{name} k={k}"
            );
        }
    }
}

#[test]
fn scalar_formula_matches_vector_solution() {
    for (name, spec, horizon) in fixtures() {
        let p = spec.build(10).unwrap();
        for &t in &[0.1, 1.0, horizon] {
            let v = transient_vector(&p.system, &p.init, t).unwrap();
            for k in 1..=10 {
                let s = transient_scalar(&p.system, &p.init, t, k).unwrap();
                assert!(
                    rel_err(s, v.moment(k)) <= 1e-10,
                    "{name} t={t} k={k}: {s} vs {}",
                    v.moment(k)
                );
            }
        }
    }
}

#[test]
fn nonnegative_processes_have_log_convex_moments() {
    for (name, spec) in stable_fixtures() {
        if !spec.nonnegative() {
            continue;
        }
        let n = 10;
        let p = spec.build(n).unwrap();
        let mut vectors = vec![steady_vector(&p.system).unwrap()];
        for &t in &[0.5, 2.0, 10.0] {
            vectors.push(transient_vector(&p.system, &p.init, t).unwrap());
        }
        for v in vectors {
            for k in 2..n {
                let lhs = v.moment(k + 1) * v.moment(k - 1);
                let rhs = v.moment(k) * v.moment(k);
                assert!(lhs >= rhs * (1.0 - 1e-9), "{name} {:?} k={k}", v.time);
            }
        }
    }
}

#[test]
fn hawkes_second_moment_matches_fine_euler() {
    let p = build_hawkes(&hawkes(), 2).unwrap();
    let exact = transient_scalar(&p.system, &p.init, 10.0, 2).unwrap();
    let cfg = EulerConfig::new(1e-6, 10.0).unwrap();
    let euler = euler_solve(&p.system, &p.init, &cfg).unwrap();
    assert!(rel_err(euler.moment(2), exact) <= 1e-5);
}

#[test]
fn stationary_means_match_closed_forms() {
    let e = 1.0f64.exp();
    let mean = |spec: ProcessSpec| steady_nth(&spec.build(1).unwrap().system, 1).unwrap();
    assert!(rel_err(mean(ProcessSpec::Hawkes(hawkes())), 2.0) <= 1e-15);
    assert!(rel_err(mean(ProcessSpec::ShotNoise(shot_noise())), e.sqrt() / 4.0) <= 1e-15);
    assert!(rel_err(mean(ProcessSpec::Ephemeral(ephemeral())), 1.0) <= 1e-15);
    let ou = ItoSpec {
        mu: 0.7,
        theta: -1.6,
        sigma: 1.0,
        gamma: 0.0,
        initial: 0.0,
    };
    assert!(rel_err(mean(ProcessSpec::Ito(ou)), 0.7 / 1.6) <= 1e-15);
}

#[test]
fn growth_collapse_stationary_moments_are_erlang() {
    let (growth, rate) = (1.0, 0.5);
    let p = build_growth_collapse(&GrowthCollapseSpec::uniform(growth, rate), 10).unwrap();
    let steady = steady_vector(&p.system).unwrap();
    let mut expected = 1.0;
    for n in 1..=10 {
        expected *= (n + 1) as f64 * growth / rate;
        assert!(rel_err(steady.moment(n), expected) <= 1e-12, "n={n}");
    }
}

#[test]
fn scalar_formula_handles_order_one() {
    let p = build_shot_noise(&shot_noise(), 1).unwrap();
    let t = 0.8;
    let v = transient_vector(&p.system, &p.init, t).unwrap();
    let s = transient_scalar(&p.system, &p.init, t, 1).unwrap();
    let e = 1.0f64.exp();
    let expected = e.sqrt() / 4.0 * (1.0 - (-4.0 * t).exp());
    assert!(rel_err(s, expected) <= 1e-14);
    assert!(rel_err(v.moment(1), expected) <= 1e-14);
}

#[test]
fn order_mismatch_is_rejected() {
    let p = build_hawkes(&hawkes(), 3).unwrap();
    let short = InitialMomentVector::new(1.0, 2);
    assert!(matches!(
        transient_vector(&p.system, &short, 1.0),
        Err(Error::InvalidDimension { .. })
    ));
    assert!(transient_scalar(&p.system, &p.init, 1.0, 4).is_err());
    assert!(steady_nth(&p.system, 0).is_err());
}

#[test]
fn moment_vectors_round_trip_through_json() {
    let p = build_hawkes(&hawkes(), 3).unwrap();
    for v in [
        transient_vector(&p.system, &p.init, 1.5).unwrap(),
        steady_vector(&p.system).unwrap(),
    ] {
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<MomentVector>(&text).unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hawkes_moments_follow_their_system(
        base in 0.2f64..3.0,
        jump in 0.1f64..2.0,
        gap in 0.2f64..2.0,
        x0 in 0.1f64..4.0,
        t in 0.05f64..5.0,
    ) {
        let spec = HawkesSpec { baseline: base, jump, decay: jump + gap, initial: x0 };
        let p = build_hawkes(&spec, 5).unwrap();
        let s = transient_vector(&p.system, &p.init, t).unwrap();
        let ahead = transient_vector(&p.system, &p.init, t + H).unwrap();
        let behind = transient_vector(&p.system, &p.init, t - H).unwrap();
        let rhs = p.system.derivative(&s.values).unwrap();
        for k in 0..5 {
            let fd = (ahead.values[k] - behind.values[k]) / (2.0 * H);
            let scale = rhs[k].abs().max(s.values[k].abs()).max(1.0);
            prop_assert!((fd - rhs[k]).abs() <= 1e-5 * scale);
        }
        // mean has the scalar closed form
        let r = jump - spec.decay;
        let mean = x0 * (r * t).exp() - spec.decay * base * (1.0 - (r * t).exp()) / r;
        prop_assert!(rel_err(s.moment(1), mean) <= 1e-12);
    }

    #[test]
    fn steady_paths_agree_on_random_shot_noise(
        rate in 0.1f64..5.0,
        decay in 0.5f64..6.0,
        mean_jump in 0.2f64..3.0,
    ) {
        let spec = ShotNoiseSpec {
            rate,
            decay,
            jumps: JumpMoments::Exponential { rate: 1.0 / mean_jump },
            initial: 0.0,
        };
        let p = build_shot_noise(&spec, 8).unwrap();
        let v = steady_vector(&p.system).unwrap();
        let r = steady_recursive(&p.system).unwrap();
        prop_assert!(rel_err(v.moment(1), rate * mean_jump / decay) <= 1e-14);
        for k in 1..=8 {
            prop_assert!(rel_err(steady_nth(&p.system, k).unwrap(), v.moment(k)) <= 1e-12);
            prop_assert!(rel_err(r.moment(k), v.moment(k)) <= 1e-12);
        }
    }
}
