use super::*;
use crate::wavefunction::RadialWaveFunction;
use proptest::prelude::*;
use std::f64::consts::PI;

fn he2() -> DimerSpecies {
    DimerSpecies::helium_dimer()
}

fn beam_1km_s(species: &DimerSpecies) -> BeamState {
    BeamState::from_speed(species.total_mass_u(), 1000.0).unwrap()
}

fn grating(d: f64, s: f64, n: u32) -> GratingGeometry {
    GratingGeometry::new(d, s, n).unwrap()
}

#[test]
fn geometry_validation() {
    assert!(GratingGeometry::new(100.0, 50.0, 30).is_ok());
    assert!(GratingGeometry::new(100.0, 100.0, 30).is_err());
    assert!(GratingGeometry::new(100.0, 0.0, 30).is_err());
    assert!(GratingGeometry::new(0.0, 0.0, 30).is_err());
    assert!(GratingGeometry::new(100.0, 50.0, 0).is_err());
    let g = grating(100.0, 40.0, 5);
    assert!((g.bar_width_nm() - 60.0).abs() < 1e-15);
    assert!((g.peak_position(3) - 6.0 * PI / 100.0).abs() < 1e-16);
}

#[test]
fn beam_validation_and_momentum_transfer() {
    assert!(BeamState::new(0.0).is_err());
    assert!(BeamState::from_speed(-1.0, 100.0).is_err());
    assert!(BeamState::from_speed(8.0, 0.0).is_err());
    let beam = BeamState::new(120.0).unwrap();
    let q = MomentumTransfer::lateral(0.3);
    assert_eq!(q.k3(), 0.0);
    assert!(q.small_angle_ok(&beam));
    assert!(!MomentumTransfer::lateral(60.0).small_angle_ok(&beam));
}

#[test]
fn grating_function_peaks_and_zeros() {
    let g = grating(100.0, 50.0, 30);
    let n = 30.0;
    // k₂ = 0 is the zeroth-order peak.
    assert!((grating_function(0.0, &g) - n).abs() < 1e-12 * n);
    // First zero of the N-slit pattern.
    let h0 = grating_function(2.0 * PI / (n * 100.0), &g);
    assert!(h0.abs() < 1e-11, "H at first zero: {h0}");
    // Principal peaks carry magnitude N and sign (-1)^{n(N-1)}.
    let h1 = grating_function(g.peak_position(1), &g);
    assert!((h1 + n).abs() < 1e-12 * n, "order 1: {h1}");
    let h2 = grating_function(g.peak_position(2), &g);
    assert!((h2 - n).abs() < 1e-12 * n, "order 2: {h2}");
    // Odd N keeps every peak positive.
    let g7 = grating(40.0, 20.0, 7);
    for order in 1..=4 {
        let h = grating_function(g7.peak_position(order), &g7);
        assert!((h - 7.0).abs() < 1e-12 * 7.0, "order {order}: {h}");
    }
}

#[test]
fn point_bar_amplitude_limits_and_zeros() {
    let g = grating(100.0, 50.0, 30);
    let beam = BeamState::new(126.0).unwrap();
    let w = g.bar_width_nm();

    // k₂ → 0 limit is -i·pf·(d-s)/2.
    let t0 = point_bar_amplitude(0.0, &g, &beam, AmplitudeMode::Reduced);
    assert_eq!(t0.value.re, 0.0);
    assert!((t0.value.im + 0.5 * w).abs() < 1e-15 * w);
    let t0_lit = point_bar_amplitude(0.0, &g, &beam, AmplitudeMode::Literal);
    let pf = 2.0 * 126.0 / (2.0 * PI).powi(2);
    assert!((t0_lit.value.im + pf * 0.5 * w).abs() < 1e-12 * pf * w);

    // Continuity across the sinc series switch.
    let eps = 1e-4 / (0.5 * w);
    let below = point_bar_amplitude(eps * 0.999, &g, &beam, AmplitudeMode::Reduced);
    let above = point_bar_amplitude(eps * 1.001, &g, &beam, AmplitudeMode::Reduced);
    assert!((below.value.im - above.value.im).abs() < 1e-10 * w);

    // Zero of the bar sine at k₂ = 2π/(d-s).
    let tz = point_bar_amplitude(2.0 * PI / w, &g, &beam, AmplitudeMode::Reduced);
    assert!(tz.value.norm() < 1e-13 * (0.5 * w), "|t| = {}", tz.value.norm());

    // s = d/2 puts those zeros exactly on the even-order peaks.
    for order in [2u32, 4] {
        let t = point_bar_amplitude(g.peak_position(order), &g, &beam, AmplitudeMode::Reduced);
        assert!(
            t.value.norm() < 1e-12 * (0.5 * w),
            "order {order}: |t| = {}",
            t.value.norm()
        );
    }
}

#[test]
fn form_factor_normalization_and_closed_form() {
    let kappa = 0.104;
    let wf = RadialWaveFunction::zero_range(kappa).unwrap();

    // F(0) = 1 by normalization.
    let f0 = form_factor(&wf, &wf, 0.0).unwrap();
    assert!((f0 - 1.0).abs() < 1e-8, "F(0) = {f0}");

    // Zero-range closed form F(q) = (2κ/q)·arctan(q/2κ).
    for &q in &[1e-3 * kappa, 0.05, 0.208, 1.7, 40.0, 100.0] {
        let want = (2.0 * kappa / q) * (q / (2.0 * kappa)).atan();
        let got = form_factor(&wf, &wf, q).unwrap();
        assert!(
            (got - want).abs() <= 1e-8 * want.abs(),
            "q={q}: {got} vs {want}"
        );
    }

    // q = 2κ gives arctan(1) → π/4 exactly.
    let got = form_factor(&wf, &wf, 2.0 * kappa).unwrap();
    assert!((got - PI / 4.0).abs() < 1e-8);

    // Large-q falloff F ~ πκ/q.
    let q = 2000.0 * kappa;
    let got = form_factor(&wf, &wf, q).unwrap();
    assert!((got - PI * kappa / q).abs() < 1e-3 * PI * kappa / q);

    // Evenness is structural (|q| path).
    assert_eq!(
        form_factor(&wf, &wf, 0.37).unwrap(),
        form_factor(&wf, &wf, -0.37).unwrap()
    );
}

#[test]
fn form_factor_accepts_two_different_wavefunctions() {
    let a = RadialWaveFunction::zero_range(0.1).unwrap();
    let b = RadialWaveFunction::parametrized(&[(1.0, 0.2), (-0.1, 1.0)]).unwrap();
    let f = form_factor(&a, &b, 0.25).unwrap();
    assert!(f.is_finite());
    // Cross form factor at q = 0 is the overlap ∫4πr²φ_aφ_b, not 1.
    let overlap = form_factor(&a, &b, 0.0).unwrap();
    assert!((overlap.abs() - 1.0).abs() > 1e-6);
}

#[test]
fn molecular_amplitude_mass_symmetry() {
    let g = grating(50.0, 25.0, 30);
    let k2 = g.peak_position(1);
    let wf = RadialWaveFunction::zero_range(0.15).unwrap();
    let s12 = DimerSpecies::new(3.0, 5.0, -0.1, wf.clone()).unwrap();
    let s21 = DimerSpecies::new(5.0, 3.0, -0.1, wf.clone()).unwrap();
    let beam = BeamState::new(100.0).unwrap();
    let t12 = molecular_bar_amplitude(&s12, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
    let t21 = molecular_bar_amplitude(&s21, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
    assert!((t12.value - t21.value).norm() <= 1e-14 * t12.value.norm());

    // Equal masses make the two form factors coincide bitwise.
    let eq = DimerSpecies::new(4.0, 4.0, -0.1, wf).unwrap();
    let parts = molecular_bar_amplitude_parts(&eq, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
    assert_eq!(parts.form_factor_1, parts.form_factor_2);
}

#[test]
fn molecular_amplitude_is_even_in_k2() {
    let species = he2();
    let g = grating(50.0, 25.0, 30);
    let beam = beam_1km_s(&species);
    for &k2 in &[0.05, g.peak_position(1), 0.3] {
        let plus = molecular_bar_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced)
            .unwrap()
            .value;
        let minus = molecular_bar_amplitude(&species, &g, &beam, -k2, AmplitudeMode::Reduced)
            .unwrap()
            .value;
        assert!((plus - minus).norm() <= 1e-13 * plus.norm(), "k2={k2}");
    }
}

#[test]
fn point_particle_limit_of_molecular_amplitude() {
    // Shrinking the wave function (κ → ∞) must drive the molecular
    // amplitude to the point-particle one.
    let base = he2();
    let g = grating(100.0, 50.0, 30);
    let beam = beam_1km_s(&base);
    let kappa0 = 0.10357;
    let mut prev_dev = f64::INFINITY;
    for &scale in &[1.0, 64.0] {
        let wf = RadialWaveFunction::zero_range(kappa0 * scale).unwrap();
        let species = base.with_wavefunction(wf);
        let mut dev: f64 = 0.0;
        for order in [1u32, 3] {
            let k2 = g.peak_position(order);
            let t_mol =
                molecular_bar_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
            let t_pp = point_bar_amplitude(k2, &g, &beam, AmplitudeMode::Reduced);
            dev = dev.max((t_mol.value - t_pp.value).norm() / t_pp.value.norm());
        }
        assert!(dev < prev_dev, "deviation not shrinking: {dev} vs {prev_dev}");
        prev_dev = dev;
    }
    assert!(prev_dev < 2e-4, "κ×64 deviation {prev_dev}");
}

#[test]
fn even_order_reappearance_at_half_duty_cycle() {
    let species = he2();
    let beam = beam_1km_s(&species);
    for &d in &[50.0, 25.0] {
        let g = grating(d, d / 2.0, 30);
        let k2 = g.peak_position(2);
        let t_pp = point_bar_amplitude(k2, &g, &beam, AmplitudeMode::Reduced);
        let scale = 0.5 * g.bar_width_nm();
        assert!(t_pp.value.norm() < 1e-12 * scale, "d={d}");
        let t_mol =
            molecular_bar_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
        assert!(
            t_mol.value.norm() > 1e-4 * scale,
            "d={d}: |t_mol| = {} not clearly nonzero",
            t_mol.value.norm()
        );
    }
}

#[test]
fn ratio_is_speed_invariant_in_literal_mode() {
    let species = he2();
    let g = grating(50.0, 25.0, 30);
    let k2 = g.peak_position(1);
    let b1 = BeamState::new(126.0).unwrap();
    let b2 = BeamState::new(252.0).unwrap();
    let r1 = molecular_bar_amplitude(&species, &g, &b1, k2, AmplitudeMode::Literal)
        .unwrap()
        .ratio_to(&point_bar_amplitude(k2, &g, &b1, AmplitudeMode::Literal))
        .unwrap();
    let r2 = molecular_bar_amplitude(&species, &g, &b2, k2, AmplitudeMode::Literal)
        .unwrap()
        .ratio_to(&point_bar_amplitude(k2, &g, &b2, AmplitudeMode::Literal))
        .unwrap();
    assert!((r1 - r2).norm() <= 1e-12 * r1.norm());
    // Literal amplitudes themselves scale linearly with K.
    let t1 = point_bar_amplitude(k2, &g, &b1, AmplitudeMode::Literal);
    let t2 = point_bar_amplitude(k2, &g, &b2, AmplitudeMode::Literal);
    assert!((t2.value / t1.value - 2.0).norm() < 1e-12);
}

#[test]
fn mode_mismatch_is_rejected() {
    let g = grating(50.0, 25.0, 30);
    let beam = BeamState::new(126.0).unwrap();
    let a = point_bar_amplitude(0.1, &g, &beam, AmplitudeMode::Literal);
    let b = point_bar_amplitude(0.1, &g, &beam, AmplitudeMode::Reduced);
    assert!(matches!(
        a.ratio_to(&b),
        Err(KernelError::ModeMismatch(_, _))
    ));
}

#[test]
fn coherent_amplitude_factorizes_exactly() {
    let species = he2();
    let g = grating(100.0, 50.0, 30);
    let beam = beam_1km_s(&species);
    for &k2 in &[0.0, 0.03, g.peak_position(1), 0.2] {
        let bar = molecular_bar_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
        let coh = coherent_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced).unwrap();
        let h = grating_function(k2, &g);
        assert_eq!(coh.value, bar.value * h, "k2={k2}");
        let pp_bar = point_bar_amplitude(k2, &g, &beam, AmplitudeMode::Reduced);
        let pp_coh = point_coherent_amplitude(&g, &beam, k2, AmplitudeMode::Reduced);
        assert_eq!(pp_coh.value, pp_bar.value * h, "k2={k2}");
    }
    // H zero kills the coherent amplitude.
    let z = 2.0 * PI / (30.0 * 100.0);
    let coh = coherent_amplitude(&species, &g, &beam, z, AmplitudeMode::Reduced).unwrap();
    assert!(coh.value.norm() < 1e-9);
}

#[test]
fn bruteforce_agrees_with_fast_path() {
    let species = he2();
    let beam = beam_1km_s(&species);
    let g = grating(50.0, 25.0, 30);
    let spec = BruteForceSpec {
        grading_levels: 22,
        tail_relative_cut: 1e-7,
        max_evaluations: 400_000_000,
    };
    for order in [1u32, 2] {
        let k2 = g.peak_position(order);
        let fast = molecular_bar_amplitude(&species, &g, &beam, k2, AmplitudeMode::Reduced)
            .unwrap()
            .value;
        let brute =
            molecular_bar_amplitude_bruteforce_with(&species, &g, &beam, k2, AmplitudeMode::Reduced, &spec)
                .unwrap()
                .value;
        let rel = (fast - brute).norm() / fast.norm().max(brute.norm());
        assert!(rel < 1e-3, "order {order}: fast {fast}, brute {brute}, rel {rel}");
    }
}

#[test]
fn bruteforce_conjugate_symmetry() {
    let species = he2();
    let beam = beam_1km_s(&species);
    let g = grating(50.0, 25.0, 30);
    let spec = BruteForceSpec {
        grading_levels: 18,
        tail_relative_cut: 1e-6,
        max_evaluations: 100_000_000,
    };
    let k2 = g.peak_position(1);
    let plus =
        molecular_bar_amplitude_bruteforce_with(&species, &g, &beam, k2, AmplitudeMode::Reduced, &spec)
            .unwrap()
            .value;
    let minus =
        molecular_bar_amplitude_bruteforce_with(&species, &g, &beam, -k2, AmplitudeMode::Reduced, &spec)
            .unwrap()
            .value;
    assert!((minus + plus.conj()).norm() <= 1e-13 * plus.norm());
}

#[test]
fn bruteforce_respects_budget() {
    let species = he2();
    let beam = beam_1km_s(&species);
    let g = grating(50.0, 25.0, 30);
    let spec = BruteForceSpec {
        max_evaluations: 1000,
        ..BruteForceSpec::default()
    };
    assert!(matches!(
        molecular_bar_amplitude_bruteforce_with(
            &species,
            &g,
            &beam,
            0.1,
            AmplitudeMode::Reduced,
            &spec
        ),
        Err(KernelError::BudgetExceeded { .. })
    ));
}

#[test]
fn regime_check_flags_each_condition() {
    let species = he2();
    let geometry = grating(100.0, 50.0, 30);

    // A 1 km/s He₂ beam through a d = 100 nm grating is clean.
    let beam = beam_1km_s(&species);
    let warnings = regime_check(&species, &geometry, &beam);
    assert!(warnings.is_empty(), "unexpected warnings: {warnings:?}");

    // K·s = 10 violates the diffraction-domain condition.
    let slow = BeamState::new(0.2).unwrap();
    let warnings = regime_check(&species, &geometry, &slow);
    assert!(warnings
        .iter()
        .any(|w| matches!(w, RegimeWarning::SlitDiffraction { product } if (*product - 10.0).abs() < 1e-9)));
    assert!(warnings
        .iter()
        .any(|w| matches!(w, RegimeWarning::LowIncidentEnergy { .. })));

    // A 5 nm slit is below twice the ~4.8 nm mean size.
    let narrow = grating(10.0, 5.0, 30);
    let warnings = regime_check(&species, &narrow, &beam);
    assert!(warnings
        .iter()
        .any(|w| matches!(w, RegimeWarning::SlitComparableToMolecule { .. })));

    // Mass ratio beyond 4.
    let lopsided = DimerSpecies::new(
        1.0,
        5.0,
        -0.1,
        RadialWaveFunction::zero_range(0.1).unwrap(),
    )
    .unwrap();
    let warnings = regime_check(&lopsided, &geometry, &beam);
    assert!(warnings
        .iter()
        .any(|w| matches!(w, RegimeWarning::MassRatio { ratio } if *ratio == 5.0)));
    // Warnings render as text.
    for w in &warnings {
        assert!(!w.to_string().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grating_function_bounded_by_bar_count(k2 in -10.0_f64..10.0, n in 1u32..60) {
        let g = GratingGeometry::new(100.0, 50.0, n).unwrap();
        let h = grating_function(k2, &g);
        prop_assert!(h.abs() <= n as f64 * (1.0 + 1e-12));
    }

    #[test]
    fn form_factor_bounded_for_zero_range(log_q in -3.0_f64..3.0) {
        let kappa = 0.1036;
        let wf = RadialWaveFunction::zero_range(kappa).unwrap();
        let q = kappa * 10.0_f64.powf(log_q);
        let f = form_factor(&wf, &wf, q).unwrap();
        prop_assert!(f > 0.0 && f <= 1.0 + 1e-9, "F({}) = {}", q, f);
    }
}
