//! Reference values computed once from independent routes (direct arithmetic, the mode series,
//! the truncated-matrix oracle) and frozen here.

use dressed_ring::oracle::{build, compare};
use dressed_ring::resonance::{epsilon_tuning, resonant_energies, Region};
use dressed_ring::selfenergy::{beta, beta0_bound, beta1_bound, sigma_matrix, sigma_series_partial, sigma_single, series_tail_estimate};
use dressed_ring::spectrum::{solve_single, solve_subthreshold, solve_two, solve_two_subthreshold};
use dressed_ring::{ModeIndex, SolveMode, SystemParams, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn close(a: f64, b: f64, eps: f64) -> bool {
    (a - b).abs() <= eps
}

#[test]
fn dispersion_and_form_factor() {
    let p = SystemParams::<f64>::single(10.0, 1e-4, 2.0).unwrap();
    // sqrt((2π/10)² + 1) by hand: sqrt(1.394784176) = 1.181009812
    assert!(close(p.mode_frequency(ModeIndex(1)), 1.181_009_812, 1e-9));
    // sqrt(1e-4/10)
    assert!(close(p.form_factor(ModeIndex(0)), 3.162_277_660e-3, 1e-12));
}

#[test]
fn beta_bounds_at_reference_points() {
    let p = SystemParams::<f64>::single(10.0, 1e-2, 2.0).unwrap();
    let bound = beta0_bound(&p);
    assert!(close(bound, 0.318_338_8, 1e-7));
    let b0 = beta(0, 1.0, &p, &tol()).unwrap();
    assert!(b0.abs() <= bound);

    let q = SystemParams::<f64>::pair(40.0, 1e-2, 2.0, 20.0).unwrap();
    let b1 = beta1_bound(&q).unwrap();
    assert!(close(b1, 2.0 * (-20f64).exp() / std::f64::consts::PI, 1e-15));
    assert!(b1 < 1.32e-9);
    for e in [0.5, 1.0, 1.7, 3.0] {
        assert!(beta(1, e, &q, &tol()).unwrap().abs() <= b1);
    }
}

/// `2S(2K) − S(K)` of the mode series at K = 10⁶, which removes the `1/K` truncation term.
const SERIES_SINGLE: [(f64, f64); 3] = [
    (0.5, -7.701_829_580_223_276e-3),
    (1.5, -8.030_664_321_585_002e-3),
    (2.0, -3.599_401_170_548_413e-3),
];

const SERIES_PAIR_OFFDIAG: [(f64, f64); 2] = [(0.5, -7.495_901_825_901_501e-4), (1.5, 8.708_176_922_988_314e-3)];

#[test]
fn closed_form_matches_frozen_series() {
    let p = SystemParams::<f64>::single(10.0, 1e-2, 2.3).unwrap();
    for (e, frozen) in SERIES_SINGLE {
        let v = sigma_single(e, &p, &tol()).unwrap().value.diagonal();
        assert!(close(v, frozen, 1e-13), "E={e}: {v} vs {frozen}");
    }
    let q = SystemParams::<f64>::pair(10.0, 1e-2, 2.3, 3.0).unwrap();
    for (e, frozen) in SERIES_PAIR_OFFDIAG {
        let v = sigma_matrix(e, &q, &tol()).unwrap().value.off_diagonal();
        assert!(close(v, frozen, 1e-13), "E={e}: {v} vs {frozen}");
    }
}

#[test]
fn series_deviation_shrinks_with_cutoff() {
    let p = SystemParams::<f64>::single(10.0, 1e-2, 2.3).unwrap();
    let closed = sigma_single(1.5, &p, &tol()).unwrap().value.diagonal();
    let mut last = f64::INFINITY;
    for k in [1_000, 4_000, 16_000, 64_000] {
        let dev = (sigma_series_partial(1.5, &p, k, (1, 1)).unwrap() - closed).abs();
        assert!(dev < last);
        assert!(dev <= 1.2 * series_tail_estimate(&p, k));
        last = dev;
    }
}

/// Truncated-matrix eigenvalues at K = 1000 and 2000, extrapolated as `2E(2000) − E(1000)`.
const MATRIX_SINGLE: [f64; 8] = [
    9.992_229_009_598_617e-1,
    1.179_498_214_310_440_7,
    1.604_183_604_224_274_8,
    2.128_387_672_039_007_6,
    2.305_615_981_135_76,
    2.706_737_487_911_789,
    3.297_517_480_237_184_7,
    3.900_606_615_171_747_6,
];

const MATRIX_PAIR: [f64; 9] = [
    9.984_514_697_150_889e-1,
    1.179_019_213_150_45,
    1.179_971_508_806_959_6,
    1.602_750_339_661_088,
    1.605_626_887_640_802_4,
    2.124_163_609_582_162_3,
    2.132_740_968_338_96,
    2.302_520_821_328_157_4,
    2.308_570_607_321_865_7,
];

#[test]
fn single_emitter_roots_match_frozen_matrix_spectrum() {
    let p = SystemParams::<f64>::single(10.0, 1e-2, 2.3).unwrap();
    let sub = solve_subthreshold(&p, &tol()).unwrap();
    let report = solve_single(&p, 0..=6, &tol()).unwrap().extend([sub]);
    assert_eq!(report.states.len(), MATRIX_SINGLE.len());
    for (s, frozen) in report.states.iter().zip(MATRIX_SINGLE) {
        // the extrapolation is least accurate next to ε, where |a|² is largest
        assert!(close(s.energy, frozen, 1e-8), "{} vs {frozen}", s.energy);
    }
}

#[test]
fn two_emitter_roots_match_frozen_matrix_spectrum() {
    let p = SystemParams::<f64>::pair(10.0, 1e-2, 2.3, 3.0).unwrap();
    let subs = solve_two_subthreshold(&p, SolveMode::FullDeterminant, &tol()).unwrap();
    let report = solve_two(&p, 0..=3, SolveMode::FullDeterminant, &tol()).unwrap().extend(subs);
    assert_eq!(report.states.len(), MATRIX_PAIR.len());
    for (s, frozen) in report.states.iter().zip(MATRIX_PAIR) {
        assert!(close(s.energy, frozen, 1e-8), "{} vs {frozen}", s.energy);
    }
}

#[test]
fn weak_coupling_subthreshold_root_approaches_threshold() {
    let base = SystemParams::<f64>::single(10.0, 1e-2, 2.3).unwrap();
    let mut last = (0.0, 1.0);
    for g in [1e-2, 1e-3, 1e-4, 1e-5] {
        let p = base.with_gamma(g).unwrap();
        let s = solve_subthreshold(&p, &tol()).unwrap();
        assert!(s.energy < 1.0 && s.energy > last.0);
        assert!(s.atomic_weight < last.1);
        last = (s.energy, s.atomic_weight);
        if g >= 1e-4 {
            let level = compare(&build(&p, 400).unwrap(), &solve_single(&p, 0..=2, &tol()).unwrap().extend([s])).unwrap();
            let lowest = level.eigenvalues[0];
            assert!(lowest < 1.0);
            assert!(close(lowest, last.0, 1e-5 * g / 1e-2));
        }
    }
    // |a|² ∝ γ as γ → 0
    assert!(close(last.1 / 1e-5, 5.917e-2, 1e-4));
}

#[test]
fn approximate_and_full_branches_differ_by_beta1() {
    let p = SystemParams::<f64>::pair(60.0, 1e-2, 2.0, 20.0).unwrap();
    let full = solve_two(&p, 0..=8, SolveMode::FullDeterminant, &tol()).unwrap();
    let approx = solve_two(&p, 0..=8, SolveMode::Approximate, &tol()).unwrap();
    let scale = p.gamma() * beta1_bound(&p).unwrap();
    for (a, b) in full.states.iter().zip(&approx.states) {
        assert_eq!(a.parity(), b.parity());
        assert!((a.energy - b.energy).abs() <= 10.0 * scale, "{} {}", a.energy, b.energy);
    }
}

#[test]
fn first_inner_resonance_and_round_trip() {
    let p = SystemParams::<f64>::pair(60.0, 1e-2, 2.0, 4.0).unwrap();
    let c = resonant_energies(&p, 1, &tol()).unwrap();
    assert!(close(c[0].energy, (std::f64::consts::PI / 4.0).hypot(1.0), 1e-15));
    assert!(close(c[0].energy, 1.2716, 1e-4));

    let q = SystemParams::<f64>::pair(70.0, 1e-2, 2.0, 20.0).unwrap();
    for c in resonant_energies(&q, 4, &tol()).unwrap() {
        if c.region == Region::Inner && c.chi_branch == 1 {
            epsilon_tuning(&c, &q, &tol()).unwrap();
        }
    }
}
