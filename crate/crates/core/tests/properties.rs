use std::f64::consts::PI;

use negen_core::energy::*;
use negen_core::families::*;
use negen_core::optimizer::{ascend_traced, multi_start, SearchConfig, SearchSpace};
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn complex(max_abs: f64) -> impl Strategy<Value = C64> {
    (0.0..max_abs, -PI..PI).prop_map(|(r, t)| C64::from_polar(r, t))
}

fn angle() -> impl Strategy<Value = f64> {
    -PI..PI
}

fn any_family() -> impl Strategy<Value = FamilyParams> {
    prop_oneof![
        (complex(3.0), complex(3.0), complex(4.0))
            .prop_map(|(alpha, beta, eta)| FamilyParams::CoherentPair { alpha, beta, eta }),
        (0.0..4.0f64, angle()).prop_map(|(r, delta)| FamilyParams::SqueezedVacuum { r, delta }),
        (0.0..4.0f64, complex(4.0)).prop_map(|(r, eta)| FamilyParams::SqueezedPair { r, eta }),
        (0.0..3.0f64, angle(), complex(3.0), complex(4.0)).prop_map(|(r, delta, alpha, eta)| {
            FamilyParams::CoherentSqueezed {
                r,
                delta,
                alpha,
                eta,
            }
        }),
        (0.0..4.0f64, complex(4.0)).prop_map(|(r, eta)| FamilyParams::VacuumSqueezed { r, eta }),
        (0.0..3.0f64, angle()).prop_map(|(r, delta)| FamilyParams::BarnettRadmore { r, delta }),
        (0.0..3.0f64, angle()).prop_map(|(r, theta)| FamilyParams::ZhangReal { r, theta }),
        (0.0..3.0f64, angle(), angle(), angle()).prop_map(|(sigma, theta, delta1, delta2)| {
            FamilyParams::EntangledCoherent {
                sigma,
                theta,
                delta1,
                delta2,
            }
        }),
    ]
}

fn cauchy_schwarz_holds(n: f64, amp: f64) -> bool {
    amp <= (n * (n + 1.0)).sqrt() + 1e-9 * (1.0 + n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn pair_amplitude_bounded_by_number(p in any_family()) {
        if let Ok(m) = p.moments() {
            let m = m.as_two_mode();
            prop_assert!(cauchy_schwarz_holds(m.n1, m.amp[0]), "{p:?} {m:?}");
            prop_assert!(cauchy_schwarz_holds(m.n2, m.amp[1]), "{p:?} {m:?}");
            prop_assert!(m.n1 >= -1e-12 && m.n2 >= -1e-12);
            prop_assert!(m.depth() <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn phases_in_half_open_interval(p in any_family()) {
        if let Ok(m) = p.moments() {
            for g in m.as_two_mode().phase {
                prop_assert!(g > -PI && g <= PI);
            }
        }
    }

    #[test]
    fn coherent_pair_relabeling(alpha in complex(2.5), beta in complex(2.5), eta in complex(3.0)) {
        prop_assume!(eta.norm() > 0.05);
        let a = coherent_superposition_moments(alpha, beta, eta);
        let b = coherent_superposition_moments(beta, alpha, eta.inv());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert!((a.n - b.n).abs() < 1e-10 * (1.0 + a.n));
            prop_assert!((a.amp - b.amp).abs() < 1e-10 * (1.0 + a.amp));
        }
    }

    #[test]
    fn coherent_pair_common_phase(a in 0.0..2.5f64, b in 0.0..2.5f64, d1 in angle(), d2 in angle(),
                                  eta in complex(3.0), chi in angle()) {
        let base = coherent_superposition_moments(C64::from_polar(a, d1), C64::from_polar(b, d2), eta);
        let shifted = coherent_superposition_moments(
            C64::from_polar(a, d1 + chi), C64::from_polar(b, d2 + chi), eta);
        if let (Ok(x), Ok(y)) = (base, shifted) {
            prop_assert!((x.n - y.n).abs() < 1e-12 * (1.0 + x.n));
            prop_assert!((x.amp - y.amp).abs() < 1e-12 * (1.0 + x.amp));
        }
    }

    #[test]
    fn zero_weight_second_term(r in 0.0..3.0f64, delta in angle(), alpha in complex(3.0), beta in complex(3.0)) {
        let zero = C64::new(0.0, 0.0);
        let sq = squeezed_vacuum_moments(r, 0.0).unwrap();
        let sqd = squeezed_vacuum_moments(r, delta).unwrap();
        let close = |x: &OneModeMoments, y: &OneModeMoments| {
            (x.n - y.n).abs() < 1e-12 * (1.0 + x.n) && (x.a2() - y.a2()).norm() < 1e-12 * (1.0 + x.amp)
        };
        prop_assert!(close(&superposed_squeezed_moments(r, zero).unwrap(), &sq));
        prop_assert!(close(&vacuum_plus_squeezed_moments(r, zero).unwrap(), &sq));
        prop_assert!(close(&coherent_plus_squeezed_moments(r, delta, alpha, zero).unwrap(), &sqd));
        let coh = coherent_superposition_moments(alpha, beta, zero).unwrap();
        prop_assert!((coh.n - alpha.norm_sqr()).abs() < 1e-12 * (1.0 + coh.n));
        prop_assert!((coh.a2() - alpha * alpha).norm() < 1e-12 * (1.0 + coh.amp));
    }

    #[test]
    fn identical_coherent_terms_have_zero_depth(alpha in complex(3.0)) {
        let m = coherent_superposition_moments(alpha, alpha, C64::new(1.0, 0.0)).unwrap();
        prop_assert!(m.depth().abs() < 1e-12 * (1.0 + m.n));
    }

    #[test]
    fn deleting_second_mode_recovers_one_mode(n in 0.0..5.0f64, amp in 0.0..5.0f64, phase in angle(),
                                              w1 in 0.1..5.0f64, w2 in 0.1..5.0f64, c in -1.0..1.0f64,
                                              s in -10.0..10.0f64, t in -10.0..10.0f64) {
        let one = OneModeMoments { n, amp, phase };
        let two = one.to_two_mode();
        let g = ModeGeometry::traveling_at_angle(w1, w2, c).unwrap();
        let p = g.point_on_axis(s, t);
        let u = 2.0 * (w1 * (s - t));
        prop_assert_eq!(rho_two_mode_traveling(&two, &g, &p), rho_one_mode(&one, w1, u));
        let g = ModeGeometry::standing(w1, w2).unwrap();
        let p = SpacetimePoint::new([s, 0.0, 0.0], t);
        prop_assert_eq!(rho_two_mode_standing(&two, &g, &p), rho_one_mode_standing(&one, w1, s, t));
    }

    #[test]
    fn one_mode_minimum_is_phase_infimum(n in 0.0..5.0f64, amp in 0.0..5.0f64, phase in angle(), w in 0.1..5.0f64) {
        let m = OneModeMoments { n, amp, phase };
        let k = 4096;
        let du = 2.0 * PI / k as f64;
        let sampled = (0..k).map(|i| rho_one_mode(&m, w, i as f64 * du)).fold(f64::INFINITY, f64::min);
        let exact = rho_min_one_mode(&m, w);
        prop_assert!(exact <= sampled + 1e-12);
        prop_assert!(sampled - exact <= w * amp * du * du / 2.0 + 1e-12);
    }

    #[test]
    fn br_gap_non_negative(r in 0.0..3.0f64, w1 in 0.1..10.0f64, w2 in 0.1..10.0f64) {
        let gap = br_vs_2sq_gap(r, w1, w2);
        prop_assert!(gap >= 0.0);
        let sq = squeezed_vacuum_moments(r, 0.0).unwrap();
        let separate = rho_min_one_mode(&sq, w1) + rho_min_one_mode(&sq, w2);
        let joint = rho_min_br_closed(r, 0.0, w1, w2);
        prop_assert!((joint - separate - gap).abs() < 1e-9 * (1.0 + gap.abs()));
    }

    #[test]
    fn spacetime_average_matches_quadrature(p in any_family(), ratio in prop::sample::select(vec![(2u32, 1u32), (3, 2), (3, 1), (5, 4)]),
                                            standing in any::<bool>(), x in -3.0..3.0f64) {
        if let Ok(m) = p.moments() {
            let m = m.as_two_mode();
            // ω₁ = q, ω₂ = p: every time frequency is an integer, period 2π
            let (w1, w2) = (ratio.1 as f64, ratio.0 as f64);
            let g = if standing {
                ModeGeometry::standing(w1, w2).unwrap()
            } else {
                ModeGeometry::traveling_at_angle(w1, w2, 0.3).unwrap()
            };
            let avg = spacetime_average(&m, &g);
            prop_assert!(avg >= 0.0);
            let q = time_average(&m, &g, [x, 0.0, 0.0], 2.0 * PI, 64);
            let scale = 1.0 + m.n1 + m.n2 + m.amp.iter().sum::<f64>();
            prop_assert!((q - avg).abs() <= 1e-9 * scale, "{q} vs {avg}");
        }
    }
}

#[test]
fn br_gap_zero_only_for_equal_frequencies() {
    for r in [0.1, 0.5, 1.0, 2.0] {
        for w1 in [0.5, 1.0, 2.0, 3.0] {
            for w2 in [0.5, 1.0, 2.0, 3.0] {
                let gap = br_vs_2sq_gap(r, w1, w2);
                assert!(gap >= 0.0);
                assert_eq!(gap == 0.0, w1 == w2, "r={r} w=({w1},{w2})");
            }
        }
    }
}

#[test]
fn numeric_minimum_below_average() {
    let states = [
        barnett_radmore_moments(0.8, 0.3).unwrap(),
        zhang_moments(0.2, 2.5).unwrap(),
        entangled_coherent_moments(0.9, 0.4, 0.2, -1.0).unwrap(),
    ];
    let geometries = [
        ModeGeometry::aligned(1.0, 2.0).unwrap(),
        ModeGeometry::traveling_at_angle(1.0, 1.5, 0.0).unwrap(),
        ModeGeometry::standing(1.0, 3.0).unwrap(),
    ];
    for m in &states {
        for g in &geometries {
            let (_, v) = rho_min_two_mode_numeric(m, g, 4.0 * PI, 32).unwrap();
            assert!(v <= spacetime_average(m, g) + 1e-12);
        }
    }
}

#[test]
fn ascent_is_monotone() {
    let space = SearchSpace::default_for(FamilyKind::CoherentPair);
    let cfg = SearchConfig::default();
    for start in [
        [0.7, 0.9, 1.1, 3.0, 0.1],
        [0.1, 1.4, 0.9, 0.2, -0.1],
        [2.0, 0.3, 3.0, -1.0, 2.0],
    ] {
        let (e, trace) = ascend_traced(&space, &start, &cfg).unwrap();
        assert!(trace.windows(2).all(|w| w[1] >= w[0]));
        assert_eq!(*trace.last().unwrap(), e.f);
        assert!(!e.converged || e.grad_norm <= cfg.grad_tol);
    }
}

#[test]
fn search_is_deterministic_and_bounded() {
    let space = SearchSpace::default_for(FamilyKind::CoherentPair);
    let cfg = SearchConfig {
        starts: 16,
        seed: 3,
        ..Default::default()
    };
    let a = multi_start(&space, &cfg).unwrap();
    let b = multi_start(&space, &cfg).unwrap();
    assert_eq!(a, b);
    assert!(a.extrema.iter().all(|c| c.extremum.f <= 0.5 + 1e-9));
    let hits: usize = a.extrema.iter().map(|c| c.hits).sum();
    assert_eq!(hits + a.failed_starts, 16);
}
