//! Property tests for the invariants the modules promise.

use proptest::prelude::*;

use dmcvqkd::channel::{
    gaussian_vector, read_batch_csv, simulate_rounds, write_batch_csv, OrthogonalTransform,
};
use dmcvqkd::definetti::{energy_scaling, symmetric_dim, volume_t};
use dmcvqkd::finite_key::{delta_aep, key_length, mle_entropy, DeltaEntMode, SecurityBudget};
use dmcvqkd::gaussian::holevo_f;
use dmcvqkd::hash::toeplitz_hash;
use dmcvqkd::modulation::{correlation_z, gaussian_epr_correlation, lambda_weights};
use dmcvqkd::pe::{gamma_estimates, pe_thresholds, LogBase, PeStatistics};
use dmcvqkd::{symplectic_eigenvalues, ChannelParams, RoundCounts, TwoModeCovariance};

fn physical() -> impl Strategy<Value = TwoModeCovariance> {
    (0.01f64..10.0, 0.01f64..1.0, 0.0f64..0.5, 0.0f64..1.0).prop_map(|(va, t, xi, s)| {
        let v = va + 1.0;
        TwoModeCovariance::new(v, t * va + 1.0 + t * xi, s * (t * (v * v - 1.0)).sqrt()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn symplectic_invariants(cov in physical()) {
        let s = symplectic_eigenvalues(&cov).unwrap();
        prop_assert!(s.nu1 >= 1.0 && s.nu2 >= 1.0 && s.nu3 >= 1.0);
        prop_assert!(s.nu1 >= s.nu2);
        let det = cov.determinant();
        prop_assert!(((s.nu1 * s.nu2).powi(2) - det).abs() <= 1e-9 * det.max(1.0));
        prop_assert!((s.nu1.powi(2) + s.nu2.powi(2) - cov.delta()).abs() <= 1e-9 * cov.delta());
    }

    #[test]
    fn holevo_decreases_with_correlation(cov in physical(), frac in 0.0f64..1.0) {
        let lower = TwoModeCovariance::new(cov.x, cov.y, cov.z * frac).unwrap();
        prop_assert!(holevo_f(lower.x, lower.y, lower.z).unwrap() >= holevo_f(cov.x, cov.y, cov.z).unwrap() - 1e-12);
    }

    #[test]
    fn constellation_weights(alpha in 0.01f64..3.0) {
        let w = lambda_weights(alpha).unwrap();
        prop_assert!((w.sum() - 1.0).abs() < 1e-12);
        prop_assert!(w.0.iter().all(|&l| l >= 0.0));
        let va = 2.0 * alpha * alpha;
        prop_assert!(correlation_z(alpha).unwrap() < gaussian_epr_correlation(va));
    }

    #[test]
    fn gamma_a_monotone(k in 2000.0f64..1e6, ratio in 1.0f64..5.0, bump in 1.0001f64..2.0) {
        let stats = |nx: f64, k: f64| PeStatistics { norm_x2: nx, norm_y2: 2.0 * k, ip_xy: 0.5 * k, k };
        let eps = 1e-5;
        let g = gamma_estimates(&stats(2.0 * k * ratio, k), eps, LogBase::Natural).unwrap();
        let more = gamma_estimates(&stats(2.0 * k * ratio * bump, k), eps, LogBase::Natural).unwrap();
        prop_assert!(more.gamma_a > g.gamma_a);
        let bigger_k = gamma_estimates(&stats(2.0 * 2.0 * k * ratio, 2.0 * k), eps, LogBase::Natural).unwrap();
        prop_assert!(bigger_k.gamma_a < g.gamma_a);
    }

    #[test]
    fn thresholds_ordered(k in 2000.0f64..1e6, nx in 1.0f64..5.0, ny in 1.0f64..5.0, rho in -1.0f64..1.0, le in -12.0f64..-1.0) {
        let eps = 10f64.powf(le);
        let (norm_x2, norm_y2) = (2.0 * k * nx, 2.0 * k * ny);
        let stats = PeStatistics { norm_x2, norm_y2, ip_xy: rho * (norm_x2 * norm_y2).sqrt(), k };
        let t = pe_thresholds(&stats, eps, LogBase::Natural).unwrap();
        prop_assert!(t.a < t.b || (t.b - t.a).abs() <= 1e-12 * t.a);
        prop_assert!(t.d < t.c);
    }

    #[test]
    fn hash_is_linear_and_sized(bits in prop::collection::vec(any::<bool>(), 1..300), other_seed in any::<u64>(), seed in any::<u64>(), frac in 0.0f64..1.0) {
        let out = (bits.len() as f64 * frac) as usize;
        let other: Vec<bool> = gaussian_vector(bits.len(), other_seed).iter().map(|v| *v > 0.0).collect();
        let x: Vec<bool> = bits.iter().zip(&other).map(|(a, b)| a ^ b).collect();
        let h = toeplitz_hash(&bits, seed, out).unwrap();
        let ho = toeplitz_hash(&other, seed, out).unwrap();
        let hx = toeplitz_hash(&x, seed, out).unwrap();
        prop_assert_eq!(h.len(), out);
        prop_assert_eq!(hx, h.iter().zip(&ho).map(|(a, b)| a ^ b).collect::<Vec<_>>());
    }

    #[test]
    fn entropy_bounded_and_merge_concave(c in prop::array::uniform4(0u64..1000)) {
        prop_assume!(c.iter().sum::<u64>() > 0);
        let h = mle_entropy(&c).unwrap();
        prop_assert!((0.0..=2.0).contains(&h));
        let merged = mle_entropy(&[c[0] + c[1], 0, c[2], c[3]]).unwrap();
        prop_assert!(merged <= h + 1e-12);
    }

    #[test]
    fn key_length_audit(n in 1u64..1_000_000_000, h in 0.0f64..2.0, leak in 0.0f64..1e9, sc in 0.0f64..0.77) {
        let b = SecurityBudget::split(4e-10, 1e-2).unwrap();
        for mode in [DeltaEntMode::Paper, DeltaEntMode::Alphabet, DeltaEntMode::Derived] {
            let r = key_length(n, &b, h, (1.5, 1.26, sc), leak, mode).unwrap();
            prop_assert_eq!(r.l, r.audit());
            prop_assert_eq!(r.feasible, r.l > 0.0);
        }
    }

    #[test]
    fn aep_decreasing_in_eps(n in 1.0f64..1e10, le in -15.0f64..-1.0) {
        let e = 10f64.powf(le);
        prop_assert!(delta_aep(n, e, 0.9).unwrap() > delta_aep(n, 2.0 * e, 0.9).unwrap());
    }

    #[test]
    fn transform_is_orthogonal(half in 1usize..300, seed in any::<u64>()) {
        let dim = 2 * half;
        let t = OrthogonalTransform::random(dim, seed);
        let v = gaussian_vector(dim, seed ^ 1);
        let mut w = v.clone();
        t.apply_conjugate(&mut w).unwrap();
        let n0: f64 = v.iter().map(|x| x * x).sum();
        let n1: f64 = w.iter().map(|x| x * x).sum();
        prop_assert!((n0 - n1).abs() <= 1e-10 * n0);
        t.apply_conjugate_inverse(&mut w).unwrap();
        for (a, b) in v.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn volume_bound(n in 5u64..10_000, eta in 0.0f64..0.99) {
        let v = volume_t(n, eta).unwrap();
        prop_assert!(v.t <= v.k4_bound);
    }

    #[test]
    fn energy_scaling_at_least_one(n in 1.0f64..1e9, k in 100.0f64..1e9, le in -12.0f64..-1.0) {
        let eps = 10f64.powf(le);
        prop_assume!(k > 4.5 * (2.0 / eps).ln());
        let g = energy_scaling(n, k, eps).unwrap();
        prop_assert!(g >= 1.0);
        prop_assert!(energy_scaling(2.0 * n, k, eps).unwrap() < g);
        prop_assert!(energy_scaling(n, 2.0 * k, eps).unwrap() < g);
    }
}

#[test]
fn symmetric_dim_examples() {
    assert_eq!(symmetric_dim(0).unwrap(), 1);
    assert_eq!(symmetric_dim(4).unwrap(), 70);
    // Multiplicative binomial in exact integers.
    let mut c: u128 = 1;
    for i in 1..=4u128 {
        c = c * (100 + i) / i;
    }
    assert_eq!(symmetric_dim(100).unwrap(), c);
}

#[test]
fn gamma_c_coefficient_inequality() {
    for i in 0..=200 {
        let eps = 10f64.powf(-20.0 + 20.0 * i as f64 / 200.0).min(0.999_999);
        let l72 = (72.0 / eps).ln();
        let l144 = (144.0 / eps).ln();
        assert!((9.0 * l72).sqrt() + (4.0 * l144).sqrt() <= 6.0 * l144.sqrt());
    }
}

#[test]
fn batch_csv_round_trip() {
    let ch = ChannelParams::new(0.4, 0.7, 0.02).unwrap();
    let b = simulate_rounds(&ch, 5, RoundCounts { n: 30, m: 7, k: 11 }).unwrap();
    let mut buf = Vec::new();
    write_batch_csv(&b, &mut buf).unwrap();
    assert!(buf.starts_with(b"round,role,ax,ap,bx,bp\n"));
    assert_eq!(read_batch_csv(buf.as_slice()).unwrap(), b);
}
