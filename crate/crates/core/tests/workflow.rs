use dmcvqkd::channel::{eb_scale, simulate_rounds, Role};
use dmcvqkd::config::RunConfig;
use dmcvqkd::definetti::energy_test;
use dmcvqkd::workflow::{simulate, RunStatus};
use dmcvqkd::{ChannelParams, RoundCounts};

/// Honest channel, thresholds at three times the expected per-mode energy,
/// 10³ tested modes: the test should essentially never fail.
#[test]
fn honest_energy_test_passes() {
    let cfg = RunConfig::from_json(
        r#"{"alpha":0.5,"transmittance":0.6,"excess_noise":0.05,"beta":0.95,"n":1,"m":1,"k":500}"#,
    )
    .unwrap();
    let et = cfg.energy_test().unwrap();
    assert_eq!(et.k_test, 1000);
    let ch = ChannelParams::new(0.5, 0.6, 0.05).unwrap();
    let c = eb_scale(ch.modulation_variance()).unwrap();
    let passes = (0..1000u64)
        .filter(|&seed| {
            let b = simulate_rounds(&ch, seed, RoundCounts { n: 1, m: 1, k: 500 }).unwrap();
            let g = b.indices(Role::Gaussian);
            let alice: Vec<(f64, f64)> = g.iter().map(|&i| (c * b.alice_x[i], c * b.alice_p[i])).collect();
            let bob: Vec<(f64, f64)> = g.iter().map(|&i| (b.bob_x[i], b.bob_p[i])).collect();
            energy_test(&alice, &bob, &et).unwrap().pass
        })
        .count();
    assert!(passes >= 999, "{passes}/1000");
}

#[test]
fn simulate_is_reproducible_and_consistent() {
    let cfg = RunConfig::from_json(
        r#"{"alpha":0.5,"transmittance":0.6,"excess_noise":0.05,"beta":0.95,
            "n":5000,"m":50,"k":10000,"seed":8}"#,
    )
    .unwrap();
    let a = simulate(&cfg).unwrap();
    let b = simulate(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.key.l, a.key.audit());
    assert!(a.ec.success && a.ec.hash_ok && a.energy.pass);
    // Far too few rounds for a positive length at these margins.
    assert_eq!(a.status, RunStatus::NoKey);
    assert!(a.final_key.is_empty());
}
