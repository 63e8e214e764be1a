//! Alternating optimization drivers.
//!
//! Each sweep solves the relay subproblem exactly for fixed transceivers,
//! then redesigns the per-subcarrier eigenmode transceivers for the new relay
//! and reallocates source power.
//!
//! The receive filter applied after the eigenmode decoder is the per-stream
//! MMSE scaling, so every step minimizes the same weighted MSE. If the new
//! precoders push the relay above its budget, the relay is scaled back and
//! the receivers re-derived; a candidate that would raise the weighted MSE is
//! discarded in favour of a receiver-only update. This keeps the MSE
//! trace monotone and both budgets satisfied after every step.

use crate::error::{Error, Result};
use crate::quadforms::{assemble_instance, relay_power, WeightMatrices};
use crate::relayopt::solve_relay_qcqp;
use crate::sample;
use crate::scalar::{cdiag, tr_re, CMat, Real};
use crate::sysmodel::{channels_from_chain, ChainMatrices, ChannelRealization, RelayFilter, SubcarrierChannel, SystemConfig};
use crate::txrxopt::{
    allocate_power_mse, allocate_power_rate_relay, design_transceiver, mmse_receiver, mmse_scaling, rate_weights, scale_rows,
    stream_sinr, subcarrier_mmse_powers, PowerAllocation, SubcarrierTransceiver,
};

#[derive(Clone, Debug)]
pub struct AltOptions<T> {
    /// Stop when the relative change of the sweep-end weighted MSE drops below this.
    pub tol: T,
    pub max_iters: usize,
    /// Number of starts; the first uses the fixed initialization, the rest random ones.
    pub restarts: usize,
    /// Seed for the random restarts.
    pub seed: u64,
}

impl<T: Real> Default for AltOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-6), max_iters: 50, restarts: 1, seed: 0 }
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinkMetrics<T> {
    pub sum_mse: T,
    pub weighted_sum_mse: T,
    pub sum_rate_bits: T,
    pub mean_ber: T,
    /// `[n][k]` per-stream SNR.
    pub per_stream_snr: Vec<Vec<T>>,
}

#[derive(Clone, Debug)]
pub struct DesignResult<T: Real> {
    pub relay: RelayFilter<T>,
    pub transceivers: Vec<SubcarrierTransceiver<T>>,
    pub allocation: PowerAllocation<T>,
    /// Weighted sum MSE after the relay update and after the transceiver update of every sweep.
    pub trace: Vec<T>,
    /// Sum rate (bits) at the end of every sweep.
    pub rate_trace: Vec<T>,
    /// Completed relay/transceiver sweeps.
    pub iterations: usize,
    pub converged: bool,
    pub metrics: LinkMetrics<T>,
    pub relay_power: T,
    /// Sweeps in which the relay had to be scaled back to its budget.
    pub relay_rescales: usize,
    /// Sweeps in which the transceiver candidate was rejected.
    pub fallbacks: usize,
}

impl<T: Real> DesignResult<T> {
    pub fn precoders(&self) -> Vec<CMat<T>> {
        self.transceivers.iter().map(|t| t.precoder()).collect()
    }

    pub fn receivers(&self) -> Vec<CMat<T>> {
        self.transceivers.iter().map(|t| t.u.clone()).collect()
    }

    pub fn weights(&self) -> WeightMatrices<T> {
        WeightMatrices { diag: self.transceivers.iter().map(|t| t.theta.clone()).collect() }
    }

    /// Sweep-end values of the trace.
    pub fn sweep_trace(&self) -> Vec<T> {
        self.trace.iter().skip(1).step_by(2).copied().collect()
    }
}

/// Gaussian tail `Q(x) = erfc(x/√2)/2`.
pub fn gaussian_tail<T: Real>(x: T) -> T {
    T::lit(0.5 * libm::erfc(x.to_f64_lossy() / std::f64::consts::SQRT_2))
}

/// Rate and QPSK bit error rate from per-stream SNR.
pub fn metrics_from_snr<T: Real>(snr: &[Vec<T>]) -> (T, T) {
    let mut rate = T::zero();
    let mut ber = T::zero();
    let mut count = 0usize;
    for s in snr.iter().flatten() {
        let s = s.max(T::zero());
        rate += (T::one() + s).log2();
        ber += gaussian_tail(s.sqrt());
        count += 1;
    }
    (rate, ber / T::lit(count.max(1) as f64))
}

/// Rate and mean BER with `SNR = d²p²`.
pub fn compute_metrics<T: Real>(d: &[Vec<T>], p: &[Vec<T>]) -> (T, T, Vec<Vec<T>>) {
    let snr: Vec<Vec<T>> = d.iter().zip(p).map(|(dn, pn)| dn.iter().zip(pn).map(|(&a, &b)| a * a * b * b).collect()).collect();
    let (rate, ber) = metrics_from_snr(&snr);
    (rate, ber, snr)
}

fn mse_matrix<T: Real>(ch: &SubcarrierChannel<T>, v: &CMat<T>, u: &CMat<T>) -> CMat<T> {
    let g = v.ncols();
    let e = u * &ch.h * v - CMat::<T>::identity(g, g);
    &e * e.adjoint() + u * &ch.sigma * u.adjoint()
}

fn weighted_mse<T: Real>(chans: &[SubcarrierChannel<T>], v: &[CMat<T>], u: &[CMat<T>], theta: &WeightMatrices<T>) -> T {
    (0..chans.len()).fold(T::zero(), |acc, n| acc + tr_re(&(theta.theta(n) * mse_matrix(&chans[n], &v[n], &u[n]))))
}

/// Exact link metrics of a design on its own channels.
pub fn link_metrics<T: Real>(
    chans: &[SubcarrierChannel<T>],
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> LinkMetrics<T> {
    let snr: Vec<Vec<T>> = (0..chans.len()).map(|n| stream_sinr(&chans[n].h, &chans[n].sigma, &v[n], &u[n])).collect();
    let (rate, ber) = metrics_from_snr(&snr);
    let sum_mse = (0..chans.len()).fold(T::zero(), |acc, n| acc + tr_re(&mse_matrix(&chans[n], &v[n], &u[n])));
    LinkMetrics { sum_mse, weighted_sum_mse: weighted_mse(chans, v, u, theta), sum_rate_bits: rate, mean_ber: ber, per_stream_snr: snr }
}

#[derive(Clone)]
struct State<T: Real> {
    relay: RelayFilter<T>,
    vt: Vec<CMat<T>>,
    p: Vec<Vec<T>>,
    u: Vec<CMat<T>>,
    decoder: Vec<CMat<T>>,
    d: Vec<Vec<T>>,
}

impl<T: Real> State<T> {
    fn precoders(&self) -> Vec<CMat<T>> {
        self.vt.iter().zip(&self.p).map(|(v, p)| v * cdiag(p)).collect()
    }

    fn initial(cfg: &SystemConfig<T>, restart: usize, seed: u64) -> Self {
        let (n, g) = (cfg.n, cfg.gamma);
        let amp = (cfg.p_s_max / T::lit((n * g) as f64)).sqrt();
        let (vt, u) = if restart == 0 {
            (vec![CMat::<T>::identity(cfg.n_t, g); n], vec![CMat::<T>::identity(g, cfg.n_r); n])
        } else {
            let mut rng = sample::stream_rng(seed, restart as u64);
            let mut orth = |rows: usize, cols: usize| {
                let m = crate::sysmodel::random_cn_matrix::<T>(&mut rng, rows, cols, T::one());
                m.qr().q().columns(0, cols).clone_owned()
            };
            let vt = (0..n).map(|_| orth(cfg.n_t, g)).collect();
            let u = (0..n).map(|_| orth(cfg.n_r, g).adjoint()).collect();
            (vt, u)
        };
        Self {
            relay: RelayFilter::zero(cfg),
            vt,
            p: vec![vec![amp; g]; n],
            decoder: u.clone(),
            u,
            d: vec![vec![T::zero(); g]; n],
        }
    }
}

fn check_step<T: Real>(prev: Option<T>, next: T, what: &str) -> Result<()> {
    if let Some(p) = prev {
        if next > p + T::lit(1e-9) * (T::one() + p.abs()) {
            return Err(Error::InternalConsistency(format!("weighted MSE increased at {what}: {p} -> {next}")));
        }
    }
    Ok(())
}

fn check_budgets<T: Real>(cfg: &SystemConfig<T>, chain: &ChainMatrices<T>, st: &State<T>) -> Result<T> {
    let v = st.precoders();
    let pr = relay_power(cfg, chain, &st.relay, &v)?;
    if pr > cfg.p_r_max * (T::one() + T::lit(1e-8)) {
        return Err(Error::InternalConsistency(format!("relay power {pr} exceeds budget {}", cfg.p_r_max)));
    }
    let ps = st.p.iter().flatten().fold(T::zero(), |a, &x| a + x * x);
    if ps > cfg.p_s_max * (T::one() + T::lit(1e-8)) {
        return Err(Error::InternalConsistency(format!("source power {ps} exceeds budget {}", cfg.p_s_max)));
    }
    Ok(pr)
}

/// Exact relay update for fixed transceivers.
fn relay_step<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    st: &mut State<T>,
    theta: &WeightMatrices<T>,
) -> Result<Vec<SubcarrierChannel<T>>> {
    let v = st.precoders();
    let inst = assemble_instance(cfg, chain, &v, &st.u, theta)?;
    let sol = solve_relay_qcqp(&inst)?;
    st.relay = RelayFilter::from_vec(cfg, &sol.r)?;
    channels_from_chain(cfg, chain, &st.relay)
}

struct Eigenmodes<T: Real> {
    vt: Vec<CMat<T>>,
    decoder: Vec<CMat<T>>,
    d: Vec<Vec<T>>,
}

fn eigenmodes<T: Real>(cfg: &SystemConfig<T>, chans: &[SubcarrierChannel<T>]) -> Result<Eigenmodes<T>> {
    let mut out = Eigenmodes { vt: Vec::with_capacity(cfg.n), decoder: Vec::with_capacity(cfg.n), d: Vec::with_capacity(cfg.n) };
    for c in chans {
        let (vt, dec, d) = design_transceiver(&c.h, &c.sigma, cfg.gamma)?;
        out.vt.push(vt);
        out.decoder.push(dec);
        out.d.push(d);
    }
    Ok(out)
}

fn mmse_receivers<T: Real>(chans: &[SubcarrierChannel<T>], v: &[CMat<T>]) -> Result<Vec<CMat<T>>> {
    chans.iter().zip(v).map(|(c, vn)| mmse_receiver(&c.h, &c.sigma, vn)).collect()
}

/// Transceiver and power update of the weighted-MSE algorithm. Returns the new weighted MSE and
/// whether the relay was rescaled / the candidate rejected.
fn transceiver_step_mse<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    st: &mut State<T>,
    chans: &[SubcarrierChannel<T>],
    theta: &WeightMatrices<T>,
    m2: T,
) -> Result<(T, bool, bool, Option<PowerAllocation<T>>)> {
    let modes = eigenmodes(cfg, chans)?;
    let mut u = Vec::with_capacity(cfg.n);
    let mut d_eff = Vec::with_capacity(cfg.n);
    for n in 0..cfg.n {
        let p_n = st.p[n].iter().fold(T::zero(), |a, &x| a + x * x);
        let phi = subcarrier_mmse_powers(&theta.diag[n], &modes.d[n], p_n);
        let beta = mmse_scaling(&modes.d[n], &phi);
        u.push(scale_rows(&modes.decoder[n], &beta));
        d_eff.push(modes.d[n].iter().zip(&beta).map(|(&a, &b)| a * b).collect::<Vec<T>>());
    }
    let alloc = allocate_power_mse(&theta.diag, &d_eff, cfg.p_s_max);
    let v_new: Vec<CMat<T>> = modes.vt.iter().zip(&alloc.p).map(|(v, p)| v * cdiag(p)).collect();
    let pr = relay_power(cfg, chain, &st.relay, &v_new)?;
    let mut relay = st.relay.clone();
    let mut cand_chans = None;
    let rescaled = pr > cfg.p_r_max;
    if rescaled {
        let s = (cfg.p_r_max / pr).sqrt() * (T::one() - T::lit(1e-12));
        relay = relay.scaled(s);
        let c2 = channels_from_chain(cfg, chain, &relay)?;
        u = mmse_receivers(&c2, &v_new)?;
        cand_chans = Some(c2);
    }
    let m_cand = weighted_mse(cand_chans.as_deref().unwrap_or(chans), &v_new, &u, theta);
    if m_cand <= m2 {
        st.relay = relay;
        st.vt = modes.vt;
        st.decoder = modes.decoder;
        st.d = modes.d;
        st.p = alloc.p.clone();
        st.u = u;
        Ok((m_cand, rescaled, false, Some(alloc)))
    } else {
        let v_old = st.precoders();
        st.u = mmse_receivers(chans, &v_old)?;
        Ok((weighted_mse(chans, &v_old, &st.u, theta), rescaled, true, None))
    }
}

fn result_from_state<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    st: State<T>,
    theta: &WeightMatrices<T>,
    allocation: PowerAllocation<T>,
    run: RunLog<T>,
) -> Result<DesignResult<T>> {
    let chans = channels_from_chain(cfg, chain, &st.relay)?;
    let v = st.precoders();
    let metrics = link_metrics(&chans, &v, &st.u, theta);
    let relay_power = relay_power(cfg, chain, &st.relay, &v)?;
    let transceivers = (0..cfg.n)
        .map(|n| SubcarrierTransceiver {
            v_tilde: st.vt[n].clone(),
            p: st.p[n].clone(),
            u: st.u[n].clone(),
            decoder: st.decoder[n].clone(),
            theta: theta.diag[n].clone(),
            d: st.d[n].clone(),
        })
        .collect();
    Ok(DesignResult {
        relay: st.relay,
        transceivers,
        allocation,
        trace: run.trace,
        rate_trace: run.rate_trace,
        iterations: run.iterations,
        converged: run.converged,
        metrics,
        relay_power,
        relay_rescales: run.rescales,
        fallbacks: run.fallbacks,
    })
}

struct RunLog<T> {
    trace: Vec<T>,
    rate_trace: Vec<T>,
    iterations: usize,
    converged: bool,
    rescales: usize,
    fallbacks: usize,
}

impl<T> RunLog<T> {
    fn new() -> Self {
        Self { trace: Vec::new(), rate_trace: Vec::new(), iterations: 0, converged: false, rescales: 0, fallbacks: 0 }
    }
}

fn converged<T: Real>(prev: Option<T>, next: T, tol: T) -> bool {
    match prev {
        Some(p) => (p - next).abs() <= tol * next.abs().max(T::eps()),
        None => false,
    }
}

fn initial_allocation<T: Real>(st: &State<T>) -> PowerAllocation<T> {
    PowerAllocation {
        p: st.p.clone(),
        mu: T::zero(),
        lambda: st.p.iter().map(|v| vec![T::zero(); v.len()]).collect(),
        nu_relay: T::zero(),
        degenerate: false,
    }
}

fn algorithm1_single<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    theta: &WeightMatrices<T>,
    opts: &AltOptions<T>,
    restart: usize,
) -> Result<DesignResult<T>> {
    let mut st = State::initial(cfg, restart, opts.seed);
    let mut log = RunLog::new();
    let mut alloc = initial_allocation(&st);
    let mut prev_end = None;
    for it in 1..=opts.max_iters {
        let chans = relay_step(cfg, chain, &mut st, theta)?;
        let m2 = weighted_mse(&chans, &st.precoders(), &st.u, theta);
        check_step(log.trace.last().copied(), m2, "relay update")?;
        check_budgets(cfg, chain, &st)?;
        log.trace.push(m2);

        let (m4, rescaled, fell_back, new_alloc) = transceiver_step_mse(cfg, chain, &mut st, &chans, theta, m2)?;
        check_step(Some(m2), m4, "transceiver update")?;
        check_budgets(cfg, chain, &st)?;
        log.trace.push(m4);
        log.rescales += rescaled as usize;
        log.fallbacks += fell_back as usize;
        if let Some(a) = new_alloc {
            alloc = a;
        }
        log.iterations = it;
        if converged(prev_end, m4, opts.tol) {
            log.converged = true;
            break;
        }
        prev_end = Some(m4);
    }
    result_from_state(cfg, chain, st, theta, alloc, log)
}

/// Weighted sum-MSE design with fixed weights `Θ`.
pub fn algorithm1<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    theta: &WeightMatrices<T>,
    opts: &AltOptions<T>,
) -> Result<DesignResult<T>> {
    cfg.validate()?;
    let chain = ChainMatrices::new(cfg, ch)?;
    let mut best: Option<DesignResult<T>> = None;
    for restart in 0..opts.restarts.max(1) {
        let res = algorithm1_single(cfg, &chain, theta, opts, restart)?;
        let better = best.as_ref().is_none_or(|b| res.metrics.weighted_sum_mse < b.metrics.weighted_sum_mse);
        if better {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one start"))
}

/// Per-stream relay power coefficients `a_{n,k} = ‖R X_n ṽ_{n,k}‖²`.
fn relay_coefficients<T: Real>(cfg: &SystemConfig<T>, chain: &ChainMatrices<T>, relay: &RelayFilter<T>, vt: &[CMat<T>]) -> Result<(Vec<Vec<T>>, T)> {
    let r = relay.toeplitz(cfg)?;
    let a = (0..cfg.n)
        .map(|n| {
            let m = &r * &chain.x_n[n] * &vt[n];
            (0..cfg.gamma).map(|k| m.column(k).norm_squared()).collect()
        })
        .collect();
    let noise = cfg.sigma_r2 * crate::scalar::fro2(&r);
    Ok((a, cfg.p_r_max - noise))
}

fn algorithm2_single<T: Real>(cfg: &SystemConfig<T>, chain: &ChainMatrices<T>, opts: &AltOptions<T>, restart: usize) -> Result<DesignResult<T>> {
    let mut st = State::initial(cfg, restart, opts.seed);
    let mut theta = WeightMatrices::identity(cfg.n, cfg.gamma);
    let mut log = RunLog::new();
    let mut alloc = initial_allocation(&st);
    let mut prev_end = None;
    for it in 1..=opts.max_iters {
        let chans = relay_step(cfg, chain, &mut st, &theta)?;
        let m2 = weighted_mse(&chans, &st.precoders(), &st.u, &theta);
        // Only this step keeps Θ fixed relative to the previous entry.
        check_step(log.trace.last().copied(), m2, "relay update")?;
        check_budgets(cfg, chain, &st)?;
        log.trace.push(m2);

        let weights: Vec<Vec<T>> = chans.iter().map(|c| rate_weights(&c.h, &c.sigma, cfg.gamma)).collect::<Result<_>>()?;
        theta = WeightMatrices { diag: weights };
        let modes = eigenmodes(cfg, &chans)?;
        let (a, b) = relay_coefficients(cfg, chain, &st.relay, &modes.vt)?;
        let new_alloc = allocate_power_rate_relay(&modes.d, &a, b, cfg.p_s_max);
        st.u = (0..cfg.n).map(|n| scale_rows(&modes.decoder[n], &mmse_scaling(&modes.d[n], &new_alloc.p[n]))).collect();
        st.vt = modes.vt;
        st.decoder = modes.decoder;
        st.p = new_alloc.p.clone();
        let rate = crate::txrxopt::sum_rate_bits(&modes.d, &st.p);
        st.d = modes.d;
        alloc = new_alloc;
        check_budgets(cfg, chain, &st)?;
        let m4 = weighted_mse(&chans, &st.precoders(), &st.u, &theta);
        log.trace.push(m4);
        log.rate_trace.push(rate);
        log.iterations = it;
        if converged(prev_end, m4, opts.tol) {
            log.converged = true;
            break;
        }
        prev_end = Some(m4);
    }
    result_from_state(cfg, chain, st, &theta, alloc, log)
}

/// Sum-rate design: weights re-derived from the channel after every relay update.
pub fn algorithm2<T: Real>(cfg: &SystemConfig<T>, ch: &ChannelRealization<T>, opts: &AltOptions<T>) -> Result<DesignResult<T>> {
    cfg.validate()?;
    let chain = ChainMatrices::new(cfg, ch)?;
    let mut best: Option<DesignResult<T>> = None;
    for restart in 0..opts.restarts.max(1) {
        let res = algorithm2_single(cfg, &chain, opts, restart)?;
        let better = best.as_ref().is_none_or(|b| res.metrics.sum_rate_bits > b.metrics.sum_rate_bits);
        if better {
            best = Some(res);
        }
    }
    Ok(best.expect("at least one start"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysmodel::generate_channel;

    #[test]
    fn metric_examples() {
        let (rate, ber, _) = compute_metrics::<f64>(&[vec![0.0]], &[vec![1.0]]);
        assert_eq!((rate, ber), (0.0, 0.5));
        let (_, ber, _) = compute_metrics::<f64>(&[vec![1.0]], &[vec![1.0]]);
        assert!((ber - 0.158_655_253_931_457).abs() < 1e-12);
        let (rate, _, snr) = compute_metrics::<f64>(&[vec![3f64.sqrt(), 1.0]], &[vec![1.0, 1.0]]);
        assert!((rate - 3.0).abs() < 1e-12);
        assert!((snr[0][0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_channel_stops_at_first_check() {
        let cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
        let ch = ChannelRealization::zero(&cfg);
        let theta = crate::sample::weights(&cfg, &mut crate::sample::rng(4));
        let total: f64 = (0..cfg.n).map(|n| theta.trace(n)).sum();
        let r = algorithm1(&cfg, &ch, &theta, &AltOptions::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 2);
        assert!((r.metrics.weighted_sum_mse - total).abs() < 1e-9 * total);
        let r2 = algorithm2(&cfg, &ch, &AltOptions::default()).unwrap();
        assert_eq!(r2.metrics.sum_rate_bits, 0.0);
    }

    #[test]
    fn trace_monotone_and_budgets_hold() {
        let cfg = SystemConfig::<f64>::reference().with_relay_taps(2);
        let ch = generate_channel(&cfg, 21);
        let theta = WeightMatrices::identity(cfg.n, cfg.gamma);
        let opts = AltOptions { max_iters: 8, ..AltOptions::default() };
        let r = algorithm1(&cfg, &ch, &theta, &opts).unwrap();
        for w in r.trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-9 * (1.0 + w[0]));
        }
        assert!(r.relay_power <= cfg.p_r_max * (1.0 + 1e-8));
        assert!(r.allocation.total_power() <= cfg.p_s_max * (1.0 + 1e-8));
        assert_eq!(r.sweep_trace().len(), r.iterations);
    }

    #[test]
    fn restarts_never_worse() {
        let cfg = SystemConfig::<f64>::reference().with_relay_taps(1);
        let ch = generate_channel(&cfg, 2);
        let theta = WeightMatrices::identity(cfg.n, cfg.gamma);
        let one = algorithm1(&cfg, &ch, &theta, &AltOptions { max_iters: 4, ..AltOptions::default() }).unwrap();
        let three = algorithm1(&cfg, &ch, &theta, &AltOptions { max_iters: 4, restarts: 3, ..AltOptions::default() }).unwrap();
        assert!(three.metrics.weighted_sum_mse <= one.metrics.weighted_sum_mse);
    }

    #[test]
    fn scalar_rate_matches_grid_search() {
        let mut cfg = SystemConfig::<f64>::scalar(1);
        cfg.p_s_max = 10.0;
        cfg.p_r_max = 5.0;
        cfg.sigma_d2 = 0.5;
        for seed in 0..5 {
            let ch = generate_channel(&cfg, seed);
            let f2 = ch.f_taps[0][(0, 0)].norm_sqr();
            let g2 = ch.g_taps[0][(0, 0)].norm_sqr();
            let rho_max = (cfg.p_r_max / cfg.sigma_r2).sqrt();
            let mut best = 0f64;
            for i in 1..=200_000 {
                let rho = rho_max * i as f64 / 200_000.0;
                let p2 = cfg.p_s_max.min((cfg.p_r_max / (rho * rho) - cfg.sigma_r2) / f2);
                if p2 < 0.0 {
                    continue;
                }
                let snr = g2 * rho * rho * f2 * p2 / (cfg.sigma_r2 * g2 * rho * rho + cfg.sigma_d2);
                best = best.max((1.0 + snr).log2());
            }
            let r = algorithm2(&cfg, &ch, &AltOptions::default()).unwrap();
            assert!((r.metrics.sum_rate_bits - best).abs() <= 1e-3 * best, "seed {seed}: {} vs {best}", r.metrics.sum_rate_bits);
        }
    }
}
