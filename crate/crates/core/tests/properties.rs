use std::f64::consts::PI;

use photon_echo::detection::{simulate_counts, visibility_model, DetectorModel, Signal};
use photon_echo::echo::{
    afc_efficiency, afc_efficiency_order, crib_efficiency, max_time_step, multimode_capacity,
    simulate_storage, wrap_phase, FieldSchedule, Protocol, Pulse, TimeGrid,
};
use photon_echo::harness::sub_seed;
use photon_echo::pumping::{relax, MaterialParams, PopulationField, Populations};
use photon_echo::spectral::{
    make_comb, make_single_line, stark_broaden, CombSpec, SpectralProfile, StarkCalibration,
};
use photon_echo::units::{format_quantity, parse_quantity, Dim};
use proptest::prelude::*;

fn mixed_field(g2: f64, e: f64, p: f64) -> PopulationField {
    let raw = SpectralProfile::new(-1e6, 1e5, vec![3.0; 21], 0.0).unwrap();
    let mut f = PopulationField::unpumped(&raw);
    for c in f.classes.iter_mut() {
        let g1 = 1.0 - g2 - e - p;
        *c = Populations { g1, g2, e, p };
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn broadening_keeps_area(fwhm in 0.2e6..3e6f64, depth in 0.1..10.0f64, factor in 1.0..12.0f64) {
        let line = make_single_line(fwhm, depth, 0.5, 40e6, 2048).unwrap();
        let b = stark_broaden(&line, factor).unwrap();
        prop_assert!((b.area() / line.area() - 1.0).abs() < 1e-9);
        prop_assert!(b.max_depth() <= line.max_depth() * (1.0 + 1e-9));
    }

    #[test]
    fn crib_efficiency_is_bounded(d in 0.0..20.0f64, d0 in 0.0..5.0f64, t in 0.0..1e-5f64, g in 0.0..1e6f64) {
        let eta = crib_efficiency(d, d0, t, g);
        prop_assert!(eta >= 0.0);
        prop_assert!(eta <= 4.0 * (-2.0f64).exp() + 1e-15);
    }

    #[test]
    fn afc_orders_decrease(d in 0.01..10.0f64, f in 1.1..20.0f64, d0 in 0.0..5.0f64) {
        let e1 = afc_efficiency(d, f, d0);
        prop_assert!((0.0..=1.0).contains(&e1));
        prop_assert!(afc_efficiency_order(d, f, d0, 2) <= e1);
        prop_assert!((afc_efficiency_order(d, f, d0, 1) - e1).abs() <= 1e-15);
    }

    #[test]
    fn visibility_scales_with_order_squared(v1 in 0.05..1.0f64, m in 1u32..5) {
        let sigma = (-2.0 * v1.ln()).sqrt();
        let vm = visibility_model(sigma, m);
        prop_assert!((vm - v1.powi((m * m) as i32)).abs() < 1e-12);
    }

    #[test]
    fn wrapped_phase_is_principal(phi in -100.0..100.0f64) {
        let w = wrap_phase(phi);
        prop_assert!(w > -PI && w <= PI);
        let turns = (phi - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn capacity_is_monotone(b in 0.0..50.0f64, n in 1usize..100) {
        let crib = |b| multimode_capacity(Protocol::Crib { broadening: b });
        prop_assert!(crib(b) <= crib(b + 1.0));
        let afc = |n| multimode_capacity(Protocol::Afc { n_peaks: n, modes_per_peak: 1.0 });
        prop_assert_eq!(afc(n), n);
    }

    #[test]
    fn relaxation_conserves_population(
        g2 in 0.0..0.4f64,
        e in 0.0..0.3f64,
        p in 0.0..0.3f64,
        pf in 0.0..=1.0f64,
        beta in 0.0..=1.0f64,
        t in 0.0..2.0f64,
    ) {
        let mat = MaterialParams { branch_beta: beta, ..MaterialParams::erbium(pf) };
        let f = relax(&mixed_field(g2, e, p), &mat, t);
        prop_assert!(f.conservation_error() < 1e-9);
        for c in &f.classes {
            prop_assert!(c.g1 >= -1e-12 && c.g2 >= -1e-12 && c.e >= -1e-12 && c.p >= -1e-12);
        }
    }

    #[test]
    fn quantities_round_trip(x in 1e-3..1e9f64) {
        let text = format_quantity(x, Dim::Frequency);
        let back = parse_quantity(&text, Dim::Frequency).unwrap();
        prop_assert!((back / x - 1.0).abs() < 1e-9, "{} -> {}", text, back);
    }

    #[test]
    fn counts_are_reproducible(seed in any::<u64>(), rate in 1.0..1e5f64) {
        let det = DetectorModel::default();
        let empty = Signal { times: &[], flux: &[] };
        let fluor = move |_t: f64| rate;
        let a = simulate_counts(empty, &fluor, &det, 1000, (0.0, 1e-3), 1e-5, seed).unwrap();
        let b = simulate_counts(Signal { times: &[], flux: &[] }, &fluor, &det, 1000, (0.0, 1e-3), 1e-5, seed).unwrap();
        prop_assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn sub_seeds_do_not_collide(seed in any::<u64>(), i in 0u64..1000, j in 0u64..1000) {
        prop_assume!(i != j);
        prop_assert_ne!(sub_seed(seed, i), sub_seed(seed, j));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn storage_never_creates_energy(
        d in 0.1..3.0f64,
        finesse in 1.5..6.0f64,
        d0 in 0.0..2.0f64,
        offset in -0.5..0.5f64,
    ) {
        let delta = 2.78e6;
        let spec = CombSpec::from_finesse(delta, finesse, d, d0, 9).with_offset(offset * delta);
        let comb = make_comb(&spec, spec.min_window() + delta, 4096).unwrap();
        let pulse = Pulse::new(300e-9, 100e-9, 1.0);
        let sched = FieldSchedule::off(StarkCalibration::new(1.0, 2.0, delta).unwrap());
        let step = max_time_step(&comb, &pulse, &sched);
        let r = simulate_storage(&comb, &pulse, &sched, TimeGrid::new(step, 1.2e-6)).unwrap();
        prop_assert!(r.total_output <= 1.0 + 1e-6, "total output {}", r.total_output);
        prop_assert!(r.echoes.iter().all(|e| e.efficiency >= 0.0));
    }
}
