use ffrelay::altopt::{algorithm1, AltOptions};
use ffrelay::oracle::{simulate_frames, transmit_frame, verify_frequency_model};
use ffrelay::quadforms::{relay_power, weighted_mse_direct, WeightMatrices};
use ffrelay::sample;
use ffrelay::sysmodel::{generate_channel, ChainMatrices, RelayFilter, SystemConfig};
use ffrelay::{CMat, CVec};

#[test]
fn single_tap_relay_is_memoryless() {
    let cfg = SystemConfig::<f64>::reference().with_relay_taps(1);
    let ch = generate_channel(&cfg, 4);
    let mut rng = sample::rng(5);
    let relay = sample::relay(&cfg, &mut rng);
    let v = sample::precoders(&cfg, &mut rng);
    let u = sample::receivers(&cfg, &mut rng);
    let s: Vec<CVec<f64>> = (0..cfg.n).map(|_| ffrelay::sysmodel::random_cn_matrix(&mut rng, cfg.gamma, 1, 1.0).column(0).clone_owned()).collect();
    let n_r = ffrelay::sysmodel::random_cn_matrix(&mut rng, cfg.relay_in_blocks() * cfg.m_r, 1, 1.0).column(0).clone_owned();
    let n_d = CVec::<f64>::zeros(cfg.n * cfg.n_r);
    // With an identity relay the transmit samples are the relay input.
    let pass = RelayFilter { taps: vec![CMat::<f64>::identity(cfg.m_t, cfg.m_r)] };
    let input = transmit_frame(&cfg, &ch, &pass, &v, &u, &s, &n_r, &n_d).unwrap().y_t;
    let out = transmit_frame(&cfg, &ch, &relay, &v, &u, &s, &n_r, &n_d).unwrap().y_t;
    for k in 0..cfg.relay_out_blocks() {
        let expect = &relay.taps[0] * input.rows(k * cfg.m_r, cfg.m_r);
        assert!((out.rows(k * cfg.m_t, cfg.m_t) - expect).norm() < 1e-12);
    }
}

#[test]
fn frequency_model_holds_for_all_small_shapes() {
    let mut rng = sample::rng(77);
    for i in 0..10 {
        let cfg = sample::small_config::<f64>(&mut rng);
        let ch = generate_channel(&cfg, i);
        let relay = sample::relay(&cfg, &mut rng);
        let dev = verify_frequency_model(&cfg, &ch, &relay).unwrap();
        assert!(dev <= 1e-9, "{cfg:?}: {dev}");
    }
}

#[test]
fn prefix_longer_than_needed_changes_nothing() {
    let mut cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
    let ch = generate_channel(&cfg, 3);
    let relay = sample::relay(&cfg, &mut sample::rng(3));
    cfg.n_cp += 3;
    assert!(verify_frequency_model(&cfg, &ch, &relay).unwrap() <= 1e-9);
}

#[test]
fn designed_system_matches_simulation() {
    let cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
    let ch = generate_channel(&cfg, 12);
    let theta = WeightMatrices::identity(cfg.n, cfg.gamma);
    let res = algorithm1(&cfg, &ch, &theta, &AltOptions { max_iters: 6, ..AltOptions::default() }).unwrap();
    let (v, u) = (res.precoders(), res.receivers());
    let stats = simulate_frames(&cfg, &ch, &res.relay, &v, &u, &theta, 3000, 99).unwrap();
    let direct: f64 = weighted_mse_direct(&cfg, &ch, &res.relay, &v, &u, &theta).unwrap().iter().sum();
    let chain = ChainMatrices::new(&cfg, &ch).unwrap();
    let power = relay_power(&cfg, &chain, &res.relay, &v).unwrap();
    assert!((stats.weighted_mse_mean - direct).abs() <= 4.0 * stats.weighted_mse_se);
    assert!((stats.relay_power_mean - power).abs() <= 4.0 * stats.relay_power_se);
    let sub: f64 = stats.weighted_mse.iter().sum();
    assert!((sub - stats.weighted_mse_mean).abs() < 1e-9 * sub);
}

#[test]
fn simulation_is_deterministic_and_rejects_bad_input() {
    let cfg = SystemConfig::<f64>::reference().with_relay_taps(1);
    let ch = generate_channel(&cfg, 1);
    let mut rng = sample::rng(2);
    let relay = sample::relay(&cfg, &mut rng);
    let v = sample::precoders(&cfg, &mut rng);
    let u = sample::receivers(&cfg, &mut rng);
    let theta = WeightMatrices::identity(cfg.n, cfg.gamma);
    let a = simulate_frames(&cfg, &ch, &relay, &v, &u, &theta, 64, 5).unwrap();
    let b = simulate_frames(&cfg, &ch, &relay, &v, &u, &theta, 64, 5).unwrap();
    assert_eq!(a.weighted_mse_mean.to_bits(), b.weighted_mse_mean.to_bits());
    assert_eq!(a.relay_power_mean.to_bits(), b.relay_power_mean.to_bits());
    assert!(simulate_frames(&cfg, &ch, &relay, &v, &u, &theta, 0, 5).is_err());
    assert!(simulate_frames(&cfg, &ch, &relay, &v[1..], &u, &theta, 4, 5).is_err());
}
