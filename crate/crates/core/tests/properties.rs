use ffrelay::altopt::{algorithm1, AltOptions};
use ffrelay::blockmat::{blk_circulant, blkdiag, circulant_diag_blocks, dft_matrix, selection_matrices, BlockRow};
use ffrelay::linalg::{kron, vec_of};
use ffrelay::quadforms::{instance_objective, power_of, QcqpInstance};
use ffrelay::relayopt::solve_relay_qcqp;
use ffrelay::sample;
use ffrelay::scalar::{cdiag, fro, hermitize};
use ffrelay::sysmodel::{channels_from_chain, channels_via_circulant, generate_channel, random_cn_matrix, ChainMatrices};
use ffrelay::txrxopt::{allocate_power_mse, allocate_power_rate, design_transceiver, kkt_report_mse};
use ffrelay::{CMat, CVec};
use proptest::prelude::*;
use rand::Rng;

fn eye(n: usize) -> CMat<f64> {
    CMat::identity(n, n)
}

fn random_instance(seed: u64, dim: usize) -> QcqpInstance<f64> {
    let mut rng = sample::rng(seed);
    let rank = rng.random_range(1..=dim);
    let a = random_cn_matrix::<f64>(&mut rng, dim, rank, 1.0);
    let b = random_cn_matrix::<f64>(&mut rng, dim, dim, 1.0);
    let q = random_cn_matrix::<f64>(&mut rng, dim, 1, 1.0).column(0).clone_owned();
    QcqpInstance {
        q_mat: hermitize(&(&a * a.adjoint())),
        z: q.norm_squared() + 1.0,
        q,
        pi: hermitize(&(&b * b.adjoint() + eye(dim) * ffrelay::scalar::cr(0.1))),
        p_r_max: rng.random_range(0.05..5.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dft_is_unitary(n in 1usize..24) {
        let w = dft_matrix::<f64>(n).unwrap();
        prop_assert!(fro(&(w.adjoint() * &w - eye(n))) < 1e-12 * n as f64);
    }

    #[test]
    fn block_circulant_is_diagonalized(seed in any::<u64>(), n in 1usize..9, br in 1usize..4, bc in 1usize..4) {
        let mut rng = sample::rng(seed);
        let blocks: Vec<CMat<f64>> = (0..n).map(|_| random_cn_matrix(&mut rng, br, bc, 1.0)).collect();
        let row = BlockRow::new(blocks).unwrap();
        let c = blk_circulant(&row);
        let w = dft_matrix::<f64>(n).unwrap();
        let lhs = kron(&w, &eye(br)).adjoint() * c * kron(&w, &eye(bc));
        let mut diag = circulant_diag_blocks(&row, n).unwrap();
        diag.reverse();
        let rhs = blkdiag(&diag);
        prop_assert!(fro(&(&lhs - &rhs)) <= 1e-9 * fro(&rhs).max(1.0));
    }

    #[test]
    fn selection_matrices_vectorize_relay(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cfg = sample::small_config::<f64>(&mut rng);
        let relay = sample::relay(&cfg, &mut rng);
        let big = relay.toeplitz(&cfg).unwrap();
        let sel = selection_matrices(&cfg).unwrap();
        let r = relay.to_vec();
        prop_assert!((vec_of(&big.transpose()) - sel.e1_complex().transpose() * &r).norm() < 1e-12);
        prop_assert!((vec_of(&big) - sel.e2_complex().transpose() * &r).norm() < 1e-12);
        // Each tap entry appears once per output block row.
        for e in [sel.e1_complex(), sel.e2_complex()] {
            let gram = &e * e.transpose();
            prop_assert!(fro(&(gram - eye(cfg.relay_dim()) * ffrelay::scalar::cr(cfg.relay_out_blocks() as f64))) < 1e-12);
        }
    }

    #[test]
    fn chain_channels_match_circulant_route(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cfg = sample::small_config::<f64>(&mut rng);
        let ch = generate_channel(&cfg, seed ^ 0x5a5a);
        let relay = sample::relay(&cfg, &mut rng);
        let chain = ChainMatrices::new(&cfg, &ch).unwrap();
        let fast = channels_from_chain(&cfg, &chain, &relay).unwrap();
        let circ = channels_via_circulant(&cfg, &ch, &relay).unwrap();
        for (a, b) in fast.iter().zip(&circ) {
            prop_assert!(fro(&(&a.h - b)) <= 1e-9 * fro(b).max(1e-12));
        }
    }

    #[test]
    fn relay_qcqp_meets_kkt(seed in any::<u64>(), dim in 1usize..10) {
        let inst = random_instance(seed, dim);
        let s = solve_relay_qcqp(&inst).unwrap();
        let scale = inst.q.norm().max(1e-300);
        prop_assert!(s.kkt_residual <= 1e-7 * scale);
        prop_assert!(s.mu >= 0.0);
        prop_assert!(s.constraint_slack >= -1e-8 * inst.p_r_max);
        prop_assert!((s.mu * s.constraint_slack).abs() <= 1e-7 * (1.0 + s.mu) * inst.p_r_max);
        let mut rng = sample::rng(seed.wrapping_add(1));
        for _ in 0..50 {
            let x: CVec<f64> = random_cn_matrix(&mut rng, dim, 1, 1.0).column(0).clone_owned();
            let x = &x * ffrelay::scalar::cr((inst.p_r_max / power_of(&inst.pi, &x)).sqrt() * rng.random::<f64>());
            prop_assert!(s.objective <= instance_objective(&inst, &x) + 1e-9 * (1.0 + s.objective.abs()));
        }
    }

    #[test]
    fn relay_qcqp_scaling(seed in any::<u64>(), dim in 1usize..8, c in 0.1f64..10.0) {
        let inst = random_instance(seed, dim);
        let base = solve_relay_qcqp(&inst).unwrap();
        let mut obj = inst.clone();
        obj.q_mat *= ffrelay::scalar::cr(c);
        obj.q *= ffrelay::scalar::cr(c);
        obj.z *= c;
        let so = solve_relay_qcqp(&obj).unwrap();
        prop_assert!((&so.r - &base.r).norm() <= 1e-7 * (1.0 + base.r.norm()));
        prop_assert!((so.objective - c * base.objective).abs() <= 1e-7 * (1.0 + c * base.objective.abs()));
        let mut con = inst.clone();
        con.pi *= ffrelay::scalar::cr(c);
        con.p_r_max *= c;
        let sc = solve_relay_qcqp(&con).unwrap();
        prop_assert!((&sc.r - &base.r).norm() <= 1e-7 * (1.0 + base.r.norm()));
    }

    #[test]
    fn transceiver_diagonalizes_and_whitens(seed in any::<u64>(), nr in 1usize..5, nt in 1usize..5) {
        let mut rng = sample::rng(seed);
        let gamma = rng.random_range(1..=nr.min(nt));
        let h = random_cn_matrix::<f64>(&mut rng, nr, nt, 1.0);
        let a = random_cn_matrix::<f64>(&mut rng, nr, nr, 1.0);
        let sigma = hermitize(&(&a * a.adjoint() + eye(nr)));
        let (v, u, d) = design_transceiver(&h, &sigma, gamma).unwrap();
        prop_assert!(fro(&(&u * &h * &v - cdiag(&d))) < 1e-8 * (1.0 + d[0]));
        prop_assert!(fro(&(&u * &sigma * u.adjoint() - eye(gamma))) < 1e-8);
        prop_assert!(d.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn mse_allocation_meets_kkt(seed in any::<u64>(), n in 1usize..5, g in 1usize..3, p in 0.1f64..200.0) {
        let mut rng = sample::rng(seed);
        let theta: Vec<Vec<f64>> = (0..n).map(|_| (0..g).map(|_| rng.random_range(0.1..3.0)).collect()).collect();
        let d: Vec<Vec<f64>> = (0..n).map(|_| (0..g).map(|_| rng.random_range(0.01..4.0)).collect()).collect();
        let a = allocate_power_mse(&theta, &d, p);
        let k = kkt_report_mse(&theta, &d, p, &a);
        let scale = theta.iter().flatten().zip(d.iter().flatten()).map(|(t, x)| t * x).fold(0.0, f64::max);
        prop_assert!(k.primal <= 1e-8);
        prop_assert!(k.dual <= 1e-7 && k.slackness <= 1e-7 * scale.max(1.0) && k.stationarity <= 1e-7 * scale.max(1.0));
    }

    #[test]
    fn water_filling_levels(seed in any::<u64>(), n in 1usize..6, g in 1usize..3, p in 0.01f64..100.0) {
        let mut rng = sample::rng(seed);
        let d: Vec<Vec<f64>> = (0..n).map(|_| (0..g).map(|_| rng.random_range(0.05..3.0)).collect()).collect();
        let a = allocate_power_rate(&d, p);
        prop_assert!((a.total_power() - p).abs() <= 1e-9 * p);
        let levels: Vec<f64> = d.iter().flatten().zip(a.p.iter().flatten()).filter(|(_, &pk)| pk > 0.0).map(|(&dk, &pk)| pk * pk + 1.0 / (dk * dk)).collect();
        let level = levels[0];
        prop_assert!(levels.iter().all(|&l| (l - level).abs() <= 1e-9 * level));
        for (dk, pk) in d.iter().flatten().zip(a.p.iter().flatten()) {
            if *pk == 0.0 {
                prop_assert!(1.0 / (dk * dk) >= level * (1.0 - 1e-9));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn alternation_is_monotone_and_feasible(seed in any::<u64>()) {
        let mut rng = sample::rng(seed);
        let cfg = sample::small_config::<f64>(&mut rng);
        let ch = generate_channel(&cfg, seed);
        let theta = sample::weights(&cfg, &mut rng);
        let r = algorithm1(&cfg, &ch, &theta, &AltOptions { max_iters: 8, ..AltOptions::default() }).unwrap();
        for w in r.trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]));
        }
        prop_assert!(r.relay_power <= cfg.p_r_max * (1.0 + 1e-8));
        prop_assert!(r.allocation.total_power() <= cfg.p_s_max * (1.0 + 1e-8));
    }
}
