use cyclab_core::entropy::{entropy_trend, kappa_entropy, make_cantor_set};
use cyclab_core::measures::{arc_mass, extract_fraction, make_cantor_measure};
use cyclab_core::roberts::{build_level_density, decompose};
use cyclab_core::schedules::{build_disdini_schedule, build_w_adapted_grid, CoefficientSchedule};
use cyclab_core::transforms::{build_outer, herglotz_indicator, singular_inner};
use cyclab_core::{Arc, ArcMass, AtomicMeasure, CantorSpec, HybridSignedMeasure, PiecewiseConstantDensity, Weight};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig {
        cases: n,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn weight_strategy() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (0.2f64..3.0).prop_map(|a| Weight::power(a).unwrap()),
        (0.3f64..3.0).prop_map(|c| Weight::exp_inverse_log(c).unwrap()),
        (0.3f64..3.0, 0.1f64..0.9).prop_map(|(c, b)| Weight::exp_inverse_power(c, b).unwrap()),
    ]
}

/// Dini-regular families, so dyadic grids have several levels.
fn regular_weight() -> impl Strategy<Value = Weight> {
    prop_oneof![
        (0.3f64..3.0).prop_map(|a| Weight::power(a).unwrap()),
        (0.3f64..3.0, 0.2f64..0.8).prop_map(|(c, b)| Weight::exp_inverse_power(c, b).unwrap()),
    ]
}

fn measure_strategy() -> impl Strategy<Value = AtomicMeasure> {
    prop::collection::vec((0.0f64..1.0, 0.001f64..1.0), 1..40).prop_map(|atoms| AtomicMeasure::new(atoms).unwrap())
}

fn disk_point() -> impl Strategy<Value = Complex64> {
    (0.0f64..0.999, 0.0f64..1.0).prop_map(|(r, a)| Complex64::from_polar(r, 2.0 * PI * a))
}

fn partition() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 1..30).prop_map(|mut cuts| {
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts
    })
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn sampled_doubling_respects_reported_constant(weight in weight_strategy()) {
        let c = weight.classify(20).unwrap();
        for &t in &c.traces.t {
            let w = weight.log_inv(t).unwrap();
            let half = weight.log_inv(t / 2.0).unwrap();
            prop_assert!(half <= c.good.constant * w * (1.0 + 1e-12));
        }
    }

    #[test]
    fn classification_is_power_invariant(weight in weight_strategy(), s in prop::sample::select(vec![0.5, 2.0])) {
        let a = weight.classify(20).unwrap();
        let b = weight.powered(s).unwrap().classify(20).unwrap();
        prop_assert_eq!(a.good.verdict, b.good.verdict);
        prop_assert_eq!(a.dini_regular.verdict, b.dini_regular.verdict);
        prop_assert_eq!(a.log_divergent, b.log_divergent);
        prop_assert_eq!(a.beurling_divergent, b.beurling_divergent);
    }

    #[test]
    fn entropy_verdict_is_power_invariant(depth in 8u32..=16, s in prop::sample::select(vec![0.5, 2.0])) {
        let weight = Weight::power(1.0).unwrap();
        for spec in [CantorSpec::MiddleThird, CantorSpec::EntropyDivergent] {
            let set = make_cantor_set(&spec, depth).unwrap();
            let base = entropy_trend(&kappa_entropy(&set, &weight).unwrap().partial_sums);
            let powered = entropy_trend(&kappa_entropy(&set, &weight.powered(s).unwrap()).unwrap().partial_sums);
            prop_assert_eq!(base, powered);
        }
    }
}

proptest! {
    #![proptest_config(cases(64))]

    #[test]
    fn extraction_conserves_mass(mu in measure_strategy(), start in 0.0f64..1.0, len in 0.001f64..1.0, cap in 0.0f64..2.0) {
        let arc = Arc::new(start, len).unwrap();
        let (taken, rest) = extract_fraction(&mu, &arc, cap);
        let total = mu.total_mass();
        prop_assert!((taken.total_mass() + rest.total_mass() - total).abs() <= 1e-12 * total);
        prop_assert!(taken.total_mass() <= cap * (1.0 + 1e-12));
    }

    #[test]
    fn arc_mass_is_additive(mu in measure_strategy(), cuts in partition(), offset in 0.0f64..1.0) {
        let sum: f64 = cuts
            .windows(2)
            .map(|p| arc_mass(&mu, &Arc::new(offset + p[0], p[1] - p[0]).unwrap()))
            .sum();
        prop_assert!((sum - mu.total_mass()).abs() <= 1e-12 * mu.total_mass());
    }

    #[test]
    fn cantor_atoms_avoid_gaps(depth in 1u32..=12, ratio in 0.05f64..0.45, pick in 0usize..3) {
        let spec = match pick {
            0 => CantorSpec::MiddleThird,
            1 => CantorSpec::EntropyDivergent,
            _ => CantorSpec::Geometric { ratio },
        };
        let set = make_cantor_set(&spec, depth).unwrap();
        let mu = make_cantor_measure(&spec, depth, 1.0).unwrap();
        for atom in mu.atoms() {
            for gap in set.gaps() {
                let (s, e) = (gap.arc.start(), gap.arc.end());
                let inside = if e > s { atom.position > s && atom.position < e } else { atom.position > s || atom.position < e };
                prop_assert!(!inside, "atom {} in gap ({}, {})", atom.position, s, e);
            }
        }
    }

    #[test]
    fn entropy_partial_sums_monotone(depth in 2u32..=20, pick in 0usize..2, weight in weight_strategy()) {
        let spec = if pick == 0 { CantorSpec::MiddleThird } else { CantorSpec::EntropyDivergent };
        let sums = kappa_entropy(&make_cantor_set(&spec, depth).unwrap(), &weight).unwrap().partial_sums;
        prop_assert!(sums.windows(2).all(|p| p[1] >= p[0]));
    }

    #[test]
    fn dyadic_grids_are_certified(weight in regular_weight(), n0 in 1u32..8) {
        let grid = build_w_adapted_grid(&weight, n0, 12).unwrap();
        let w: Vec<f64> = grid.levels.iter().map(|&n| weight.log_inv_dyadic(n as u32)).collect();
        let mut acc = 0.0;
        for p in w.windows(2) {
            prop_assert!(p[1] / p[0] >= 10.0);
            acc += p[0];
            prop_assert!(acc <= p[1]);
        }
        prop_assert!(grid.certificate.passed);
    }

    #[test]
    fn uniform_schedules_are_thinned(c in 0.3f64..3.0, a in 1.5f64..8.0, m0 in 2u64..6, count in 2usize..7) {
        let weight = Weight::exp_inverse_log(c).unwrap();
        let grid = build_disdini_schedule(&weight, a, m0, count).unwrap();
        prop_assert_eq!(grid.levels.len(), count);
        for p in grid.levels.windows(2) {
            prop_assert!(p[1] as f64 >= a * p[0] as f64);
        }
    }

    #[test]
    fn epsilon_schedules_sum_to_one(mut w in prop::collection::vec(0.001f64..10.0, 1..12), eps0 in 0.01f64..0.99) {
        w.sort_by(|a, b| b.total_cmp(a));
        let sched = CoefficientSchedule::from_w_values(w, eps0).unwrap();
        prop_assert!((sched.total() - 1.0).abs() <= 1e-12);
        prop_assert!(sched.epsilons.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn herglotz_positive_and_normalized(cuts in partition(), offset in 0.0f64..1.0, z in disk_point()) {
        let mut sum = Complex64::new(0.0, 0.0);
        for p in cuts.windows(2) {
            let h = herglotz_indicator(&Arc::new(offset + p[0], p[1] - p[0]).unwrap(), z).unwrap();
            prop_assert!(h.re >= -1e-10);
            sum += h;
        }
        prop_assert!((sum - 1.0).norm() <= 1e-10);
    }

    #[test]
    fn singular_inner_bounded(mu in measure_strategy(), z in disk_point()) {
        prop_assert!(singular_inner(&mu, z).unwrap().norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn outer_value_at_origin(cells in prop::collection::vec((0.0f64..1.0, 0.0f64..0.2, 0.0f64..5.0), 1..10)) {
        let levels: Vec<PiecewiseConstantDensity> = cells
            .iter()
            .map(|&(s, l, v)| PiecewiseConstantDensity::from_cells(vec![(s * 0.8, s * 0.8 + l, v)]).unwrap())
            .collect();
        let outer = build_outer(&levels);
        let expected: f64 = levels.iter().map(|d| d.integral()).sum::<f64>().exp();
        let got = outer.eval(Complex64::new(0.0, 0.0)).unwrap();
        prop_assert!((got - expected).norm() <= 1e-12 * expected);
    }
}

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn roberts_conserves_mass_and_caps(mu in measure_strategy(), weight in regular_weight(), eta in 0.01f64..1.0) {
        let grid = build_w_adapted_grid(&weight, 4, 12).unwrap();
        let dec = decompose(&mu, &weight, &grid, eta).unwrap();
        let total = mu.total_mass();
        prop_assert!((dec.extracted_mass() + dec.residual_mass() - total).abs() <= 1e-12 * total);
        for (k, level) in dec.pieces.iter().enumerate() {
            prop_assert!(level.arcs.iter().all(|a| a.mass <= level.cap * (1.0 + 1e-12)));
            // nu_k annihilates every dyadic arc of its level
            let nu = HybridSignedMeasure::balanced(build_level_density(&dec, k).unwrap(), level.piece.clone());
            for arc in &level.arcs {
                let m = nu.arc_mass(&Arc::dyadic(level.level, arc.index));
                prop_assert!(m.abs() <= 1e-12 * total.max(1.0));
            }
        }
    }

    #[test]
    fn residual_shrinks_as_eta_grows(mu in measure_strategy(), weight in regular_weight(), eta in 0.01f64..0.5, factor in 1.0f64..4.0) {
        let grid = build_w_adapted_grid(&weight, 4, 12).unwrap();
        let small = decompose(&mu, &weight, &grid, eta).unwrap();
        let large = decompose(&mu, &weight, &grid, eta * factor).unwrap();
        prop_assert!(large.residual_mass() <= small.residual_mass() * (1.0 + 1e-12) + 1e-15);
    }
}

#[test]
fn residual_trend_separates_cantor_sets() {
    let weight = Weight::power(1.0).unwrap();
    let fraction = |spec: &CantorSpec, depth: u32| {
        let mu = make_cantor_measure(spec, depth, 1.0).unwrap();
        let grid = build_w_adapted_grid(&weight, 1, 12).unwrap();
        decompose(&mu, &weight, &grid, 0.5).unwrap().residual_fraction()
    };
    let finite: Vec<f64> = [4, 6, 8, 10].iter().map(|&d| fraction(&CantorSpec::MiddleThird, d)).collect();
    assert!(finite.iter().all(|&f| f > 0.1), "{finite:?}");
    let divergent: Vec<f64> = [4, 6, 8, 10].iter().map(|&d| fraction(&CantorSpec::EntropyDivergent, d)).collect();
    assert!(divergent.windows(2).all(|p| p[1] <= p[0]), "{divergent:?}");
    assert!(divergent[3] < finite[3] / 2.0, "{divergent:?} vs {finite:?}");
}

#[test]
fn radial_limit_of_delta_decreases() {
    let delta = AtomicMeasure::dirac(0.0, 1.0).unwrap();
    let values: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&r| singular_inner(&delta, Complex64::new(r, 0.0)).unwrap().norm())
        .collect();
    assert!(values.windows(2).all(|p| p[1] < p[0]));
    assert!(values[2] < 1e-100);
}

#[test]
fn deeper_grids_extract_more() {
    let weight = Weight::exp_inverse_power(1.0, 0.5).unwrap();
    let mu = make_cantor_measure(&CantorSpec::EntropyDivergent, 10, 1.0).unwrap();
    let extracted: Vec<f64> = (1..=6)
        .map(|depth| {
            let grid = build_w_adapted_grid(&weight, 4, depth).unwrap();
            decompose(&mu, &weight, &grid, 0.2).unwrap().extracted_mass()
        })
        .collect();
    assert!(extracted.windows(2).all(|p| p[1] >= p[0] * (1.0 - 1e-12)), "{extracted:?}");
    assert!(extracted[5] > extracted[0]);
}
