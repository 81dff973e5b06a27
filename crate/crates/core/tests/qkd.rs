mod common;

use lowsnr_raptor::codec::{BlockSchedule, PrecodeSpec, DEFAULT_RATE};
use lowsnr_raptor::exit::{capacity, CapacityModel};
use lowsnr_raptor::qkd::*;
use proptest::prelude::*;

fn config(k: usize, gamma: f64) -> ReconciliationConfig {
    ReconciliationConfig::new(PrecodeSpec::new(k, DEFAULT_RATE).unwrap(), common::published(100, 30.0), gamma)
}

#[test]
fn sessions_reconcile_and_follow_the_schedule() {
    let gamma = 0.05;
    let cfg = config(950, gamma);
    let c = capacity(gamma, CapacityModel::BiAwgnExact).unwrap();
    let schedule = BlockSchedule::new(950, c).unwrap();
    for seed in 0..3 {
        let t = run_reconciliation_at_snr(gamma, &cfg, seed).unwrap();
        assert!(t.success, "seed {seed}");
        assert!(t.keys_match());
        assert_eq!(t.block_sizes[0], (950.0 / c).ceil() as usize);
        assert_eq!(t.block_sizes[..], schedule.block_sizes()[..t.blocks]);
        assert_eq!(t.n_total, t.block_sizes.iter().sum::<usize>());
        assert!((t.efficiency() - 950.0 / t.n_total as f64 / c).abs() < 1e-12);
        assert!(t.efficiency() > 0.5 && t.efficiency() < 1.0);
    }
}

#[test]
fn sessions_are_reproducible() {
    let cfg = config(190, 0.2);
    let a = run_reconciliation_at_snr(0.2, &cfg, 4).unwrap();
    let b = run_reconciliation_at_snr(0.2, &cfg, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn strong_channel_needs_more_than_one_block() {
    // The first block carries only k symbols, fewer than the k' unknowns.
    let cfg = config(950, 100.0);
    let t = run_reconciliation_at_snr(100.0, &cfg, 1).unwrap();
    assert!(t.keys_match());
    assert_eq!(t.block_sizes[0], (950.0 / t.capacity).ceil() as usize);
    assert!(t.blocks > 1);
}

#[test]
fn block_cap_yields_failed_transcript() {
    let mut cfg = config(950, 0.01);
    cfg.max_blocks = 1;
    let t = run_reconciliation_at_snr(0.01, &cfg, 2).unwrap();
    assert!(!t.success);
    assert!(!t.keys_match());
    assert_eq!(t.blocks, 1);
    assert_eq!(t.n_total, t.block_sizes[0]);
}

#[test]
fn link_parameters_map_to_snr() {
    let p = CvqkdParams::fiber(2.0, 50.0);
    let g = equivalent_snr(&p).unwrap();
    assert!((g - 0.12 / 2.0206).abs() < 1e-12);
    let t = run_reconciliation(&p, &config(190, g), 3).unwrap();
    assert_eq!(t.gamma, g);
    assert!(equivalent_snr(&p.with_distance(5000.0)).unwrap() < 1e-90);
    assert!(equivalent_snr(&p.with_va(-1.0)).is_err());
}

fn sweep(efficiency: EfficiencyModel, p_w: f64) -> SweepConfig {
    SweepConfig {
        params: CvqkdParams::fiber(2.0, 0.0),
        distances_km: (0..=30).map(|i| 5.0 * i as f64).collect(),
        va_grid: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
        efficiency,
        p_w,
        capacity_model: CapacityModel::BiAwgnExact,
    }
}

/// A stand-in for Eve's information that grows with V_A and loss.
fn toy_eve(p: &CvqkdParams) -> f64 {
    let g = equivalent_snr(p).unwrap();
    0.9 * capacity(g, CapacityModel::BiAwgnExact).unwrap() * (1.0 - 0.5 * p.transmittance())
}

#[test]
fn key_rate_falls_with_distance() {
    for eve in [&toy_eve as &dyn EveInformation, &IeTable::zero()] {
        let r = key_rate_vs_distance(&sweep(EfficiencyModel::Constant(0.95), 0.0), eve).unwrap();
        assert!(r.windows(2).all(|w| w[1].key_rate <= w[0].key_rate));
        assert!(r.windows(2).all(|w| w[0].distance_km < w[1].distance_km));
    }
}

#[test]
fn zero_eve_gives_efficiency_times_mutual_information() {
    let r = key_rate_vs_distance(&sweep(EfficiencyModel::Constant(0.95), 0.0), &IeTable::zero()).unwrap();
    for rec in &r {
        assert_eq!(rec.i_e, 0.0);
        assert!((rec.key_rate - 0.95 * rec.i_ab).abs() < 1e-15);
        // With nothing to lose, the largest V_A wins.
        assert_eq!(rec.va, 16.0);
    }
}

#[test]
fn rateless_curve_dominates_fixed_rate_baseline() {
    let fixed = EfficiencyModel::Table(vec![(-30.0, 0.80), (-20.0, 0.90), (-10.0, 0.95), (0.0, 0.95)]);
    let raptor = key_rate_vs_distance(&sweep(EfficiencyModel::Constant(0.95), 0.0), &toy_eve).unwrap();
    let baseline = key_rate_vs_distance(&sweep(fixed, 0.1), &toy_eve).unwrap();
    let mut compared = 0;
    for (a, b) in raptor.iter().zip(&baseline) {
        assert!(a.key_rate >= b.key_rate, "{} km", a.distance_km);
        if a.key_rate > 0.0 && b.key_rate > 0.0 {
            compared += 1;
        }
    }
    assert!(compared > 3);
}

#[test]
fn ie_table_limits_the_sweep() {
    let table = IeTable::new(vec![(0.0, 0.01), (50.0, 0.001)]).unwrap();
    let mut cfg = sweep(EfficiencyModel::Constant(0.95), 0.0);
    cfg.distances_km = vec![0.0, 25.0, 50.0];
    let r = key_rate_vs_distance(&cfg, &table).unwrap();
    assert!((r[1].i_e - 0.0055).abs() < 1e-15);
    cfg.distances_km.push(60.0);
    assert!(key_rate_vs_distance(&cfg, &table).is_err());
    assert!(IeTable::new(vec![]).is_err());
}

#[test]
fn key_rate_formula_cases() {
    assert!((key_rate(0.95, 0.1, 0.05, 0.0).unwrap() - 0.045).abs() < 1e-15);
    assert_eq!(key_rate(0.5, 0.1, 0.06, 0.0).unwrap(), 0.0);
    assert!((key_rate(1.0, 0.2, 0.1, 0.5).unwrap() - 0.05).abs() < 1e-15);
    assert!(key_rate(-0.1, 0.1, 0.0, 0.0).is_err());
    assert!(key_rate(0.9, 0.1, 0.0, 1.5).is_err());
}

proptest! {
    #[test]
    fn frame_errors_only_lower_the_rate(
        eta in 0.0f64..1.0, i_ab in 0.0f64..2.0, i_e in 0.0f64..2.0, p_w in 0.0f64..1.0
    ) {
        let rateless = key_rate(eta, i_ab, i_e, 0.0).unwrap();
        let fixed = key_rate(eta, i_ab, i_e, p_w).unwrap();
        prop_assert!(fixed <= rateless);
        prop_assert!((fixed - (1.0 - p_w) * rateless).abs() < 1e-12);
    }
}
