use std::f64::consts::PI;

use negen_core::families::*;
use negen_core::fock::*;
use negen_core::verify::{oracle_moments, verify_family, VerifyConfig};
use num_complex::Complex64 as C64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn oracle(p: FamilyParams) -> OracleMoments {
    oracle_moments(&p, DEFAULT_CUTOFF_ONE, DEFAULT_CUTOFF_TWO)
        .unwrap()
        .moments
}

#[test]
fn squeezed_pair_with_opposite_sign() {
    let cut = squeezed_cutoff(1.0, 64, AUTO_TAIL).unwrap();
    let plus = squeezed_vacuum_vector(1.0, 0.0, cut).unwrap();
    let minus = squeezed_vacuum_vector(-1.0, 0.0, cut).unwrap();
    let v = superpose(&[(c(1.0), &plus), (c(-1.0), &minus)]).unwrap();
    let closed = superposed_squeezed_moments(1.0, c(-1.0))
        .unwrap()
        .to_oracle();
    assert!(closed.max_deviation(&one_mode_moments(&v)) < 1e-8);
}

#[test]
fn zhang_number_matches() {
    let p = FamilyParams::ZhangReal {
        r: 0.5,
        theta: PI / 2.0,
    };
    let m = p.moments().unwrap().to_oracle();
    assert!(m.max_deviation(&oracle(p)) < 1e-8);
}

#[test]
fn ecs_sum_moment_is_sigma_squared() {
    let p = FamilyParams::EntangledCoherent {
        sigma: 0.7,
        theta: 0.0,
        delta1: 0.0,
        delta2: 0.0,
    };
    let o = oracle(p);
    assert!((o.ab.norm() - 0.49).abs() < 1e-10);
    // both interference terms carry the partner overlap
    assert!((o.n_a - 0.49 * 0.98f64.tanh()).abs() < 1e-10);
    assert!((o.adag_b.norm() - o.n_a).abs() < 1e-10);
}

#[test]
fn squeezed_coherent_overlap_matches() {
    let cut = 96;
    let xi = squeezed_vacuum_vector(0.8, 0.0, cut).unwrap();
    let coh = coherent_vector(c(0.6), cut).unwrap();
    let closed = elements::squeezed_coherent_overlap(0.8, 0.0, c(0.6));
    assert!((inner(&xi, &coh).unwrap() - closed).norm() < 1e-10);
}

#[test]
fn product_and_two_mode_squeezed_moments() {
    let cut = 160;
    let sq = squeezed_vacuum_vector(1.0, 0.0, cut).unwrap();
    let m = two_mode_moments(&TwoModeFockVector::product(&sq, &sq));
    let sc = 1f64.sinh() * 1f64.cosh();
    assert!((m.a2 + sc).norm() < 1e-10 && (m.b2 + sc).norm() < 1e-10);
    assert!(m.adag_b.norm() < 1e-12 && m.ab.norm() < 1e-12);

    let br = two_mode_moments(&two_mode_squeezed_vector(0.5, 0.0, 64).unwrap());
    assert!(br.a2.norm() < 1e-15 && br.b2.norm() < 1e-15 && br.adag_b.norm() < 1e-15);
    assert!((br.ab.norm() - 0.5f64.sinh() * 0.5f64.cosh()).abs() < 1e-12);
}

#[test]
fn vacuum_squeezed_near_two_photon_limit() {
    // close to the singular point but still resolvable by the oracle
    let p = FamilyParams::VacuumSqueezed {
        r: 0.05,
        eta: c(-1.0),
    };
    let m = p.moments().unwrap().to_oracle();
    assert!(m.max_deviation(&oracle(p)) < 1e-8);
}

#[test]
fn large_amplitudes_need_larger_cutoffs() {
    let p = FamilyParams::CoherentSqueezed {
        r: 2.5,
        delta: 1.0,
        alpha: C64::new(2.0, -1.0),
        eta: c(0.7),
    };
    let res = oracle_moments(&p, DEFAULT_CUTOFF_ONE, DEFAULT_CUTOFF_TWO).unwrap();
    assert!(res.tail <= AUTO_TAIL);
    let m = p.moments().unwrap().to_oracle();
    assert!(m.max_deviation(&res.moments) < 1e-8);
}

#[test]
fn seeded_draws_agree_for_every_family() {
    let cfg = VerifyConfig {
        draws: 25,
        seed: 11,
        ..Default::default()
    };
    for kind in FamilyKind::ALL {
        let report = verify_family(kind, &cfg).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.max_deviation < 1e-8);
    }
}
