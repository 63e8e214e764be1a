//! Brute-force time-domain simulator.
//!
//! Frames are pushed through the signal chain one sample at a time: DFT
//! synthesis, cyclic prefix, source-relay convolution plus relay noise, the
//! relay FIR bank, relay-destination convolution plus destination noise,
//! prefix removal, DFT analysis and per-subcarrier receive filters. None of
//! the block Toeplitz or Kronecker machinery is used, so agreement with the
//! analytic model is an independent check.
//!
//! Stacked vectors follow the frame convention: block `k` of an `N`-block
//! vector holds time index `N-1-k`, and subcarrier `n` sits in frequency
//! block `N-1-n`.

use crate::blockmat::dft_matrix;
use crate::error::{dim_err, Result};
use crate::quadforms::WeightMatrices;
use crate::sample::stream_rng;
use crate::scalar::{cr, czeros, fro2, tr_re, CMat, CVec, Real};
use crate::sysmodel::{channels_from_chain, random_cn_matrix, ChainMatrices, ChannelRealization, RelayFilter, SystemConfig};
use rayon::prelude::*;

/// One frame through the chain. Stacked vectors use the frame convention.
#[derive(Clone, Debug)]
pub struct TimeDomainFrame<T: Real> {
    /// Symbols per subcarrier, ascending `n`.
    pub s: Vec<CVec<T>>,
    /// `N N_t` time-domain symbol.
    pub x: CVec<T>,
    /// `(N+N_cp) N_t` prefixed symbol.
    pub x_cp: CVec<T>,
    /// `(N+L_g+L_r-2) M_r` relay noise.
    pub n_r: CVec<T>,
    /// `(N+L_g-1) M_t` relay transmit samples.
    pub y_t: CVec<T>,
    /// `N N_r` destination noise.
    pub n_d: CVec<T>,
    /// `N N_r` destination samples after prefix removal.
    pub y_d: CVec<T>,
    /// Estimates per subcarrier, ascending `n`.
    pub s_hat: Vec<CVec<T>>,
}

/// Sample averages over a batch of frames.
#[derive(Clone, Debug)]
pub struct FrameStats<T: Real> {
    pub frames: usize,
    /// Empirical `E{(ŝ_n - s_n)(ŝ_n - s_n)^H}` per subcarrier.
    pub mse: Vec<CMat<T>>,
    /// Empirical `tr(Θ_n M_n)` per subcarrier.
    pub weighted_mse: Vec<T>,
    /// Mean and standard error of the per-frame `Σ_n ‖Θ_n^{1/2}(ŝ_n - s_n)‖²`.
    pub weighted_mse_mean: T,
    pub weighted_mse_se: T,
    /// Mean and standard error of the per-frame `‖y_t‖²`.
    pub relay_power_mean: T,
    pub relay_power_se: T,
}

/// Samples indexed by integer time, zero outside `[start, start + len)`.
struct Timeline<T: Real> {
    start: isize,
    dim: usize,
    samples: Vec<CVec<T>>,
}

impl<T: Real> Timeline<T> {
    fn zeros(start: isize, end: isize, dim: usize) -> Self {
        let len = (end - start).max(0) as usize;
        Self { start, dim, samples: vec![CVec::<T>::zeros(dim); len] }
    }

    fn get(&self, t: isize) -> CVec<T> {
        let i = t - self.start;
        if i < 0 || i as usize >= self.samples.len() {
            CVec::<T>::zeros(self.dim)
        } else {
            self.samples[i as usize].clone()
        }
    }

    /// Stacked vector, newest sample first.
    fn stacked(&self) -> CVec<T> {
        let mut out = CVec::<T>::zeros(self.samples.len() * self.dim);
        for (k, smp) in self.samples.iter().rev().enumerate() {
            out.rows_mut(k * self.dim, self.dim).copy_from(smp);
        }
        out
    }

    /// Inverse of [`Timeline::stacked`], ending at time `end - 1`.
    fn from_stacked(v: &CVec<T>, dim: usize, end: isize) -> Self {
        let blocks = v.len() / dim;
        let samples = (0..blocks).rev().map(|k| v.rows(k * dim, dim).clone_owned()).collect();
        Self { start: end - blocks as isize, dim, samples }
    }
}

fn convolve<T: Real>(taps: &[CMat<T>], input: &Timeline<T>, start: isize, end: isize) -> Timeline<T> {
    let dim = taps[0].nrows();
    let mut out = Timeline::zeros(start, end, dim);
    for t in start..end {
        let acc = &mut out.samples[(t - start) as usize];
        for (l, tap) in taps.iter().enumerate() {
            *acc += tap * input.get(t - l as isize);
        }
    }
    out
}

struct Propagated<T: Real> {
    x: CVec<T>,
    x_cp: CVec<T>,
    y_t: Timeline<T>,
    y_d: CVec<T>,
    /// Frequency-domain output per subcarrier, ascending `n`.
    y: Vec<CVec<T>>,
}

/// Pushes frequency-domain inputs (ascending `n`) through the chain.
fn propagate<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    w: &CMat<T>,
    freq_in: &[CVec<T>],
    n_r: &CVec<T>,
    n_d: &CVec<T>,
) -> Propagated<T> {
    let n = cfg.n;
    let ni = n as isize;
    // Time block k = Σ_j W(k, j) X_j with X_j the input of subcarrier N-1-j.
    let mut x_blocks = vec![CVec::<T>::zeros(cfg.n_t); n];
    for (k, xb) in x_blocks.iter_mut().enumerate() {
        for j in 0..n {
            *xb += &freq_in[n - 1 - j] * w[(k, j)];
        }
    }
    let mut x = CVec::<T>::zeros(n * cfg.n_t);
    for (k, xb) in x_blocks.iter().enumerate() {
        x.rows_mut(k * cfg.n_t, cfg.n_t).copy_from(xb);
    }
    let sym = Timeline::from_stacked(&x, cfg.n_t, ni);

    let mut x_cp = Timeline::zeros(-(cfg.n_cp as isize), ni, cfg.n_t);
    for t in x_cp.start..ni {
        x_cp.samples[(t - x_cp.start) as usize] = sym.get(t.rem_euclid(ni));
    }

    let in_start = -((cfg.l_g + cfg.l_r) as isize - 2);
    let mut received = convolve(&ch.f_taps, &x_cp, in_start, ni);
    let noise = Timeline::from_stacked(n_r, cfg.m_r, ni);
    for t in in_start..ni {
        received.samples[(t - in_start) as usize] += noise.get(t);
    }

    let y_t = convolve(&relay.taps, &received, -(cfg.l_g as isize - 1), ni);
    let mut y_d_line = convolve(&ch.g_taps, &y_t, 0, ni);
    let dnoise = Timeline::from_stacked(n_d, cfg.n_r, ni);
    for t in 0..ni {
        y_d_line.samples[t as usize] += dnoise.get(t);
    }
    let y_d = y_d_line.stacked();

    let y = (0..n)
        .map(|sub| {
            let a = n - 1 - sub;
            let mut acc = CVec::<T>::zeros(cfg.n_r);
            for k in 0..n {
                acc += y_d.rows(k * cfg.n_r, cfg.n_r) * w[(k, a)].conj();
            }
            acc
        })
        .collect();
    Propagated { x, x_cp: x_cp.stacked(), y_t, y_d, y }
}

fn check_inputs<T: Real>(cfg: &SystemConfig<T>, ch: &ChannelRealization<T>, relay: &RelayFilter<T>, v: &[CMat<T>], u: &[CMat<T>]) -> Result<()> {
    cfg.validate_dimensions()?;
    ch.check(cfg)?;
    relay.check(cfg)?;
    if v.len() != cfg.n || u.len() != cfg.n {
        return dim_err(format!("expected {} precoders and receivers, got {} and {}", cfg.n, v.len(), u.len()));
    }
    for n in 0..cfg.n {
        if v[n].shape() != (cfg.n_t, cfg.gamma) || u[n].shape() != (cfg.gamma, cfg.n_r) {
            return dim_err(format!("subcarrier {n}: precoder {:?}, receiver {:?}", v[n].shape(), u[n].shape()));
        }
    }
    Ok(())
}

/// Sends one frame with the given symbols and noise draws.
#[allow(clippy::too_many_arguments)]
pub fn transmit_frame<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    s: &[CVec<T>],
    n_r: &CVec<T>,
    n_d: &CVec<T>,
) -> Result<TimeDomainFrame<T>> {
    check_inputs(cfg, ch, relay, v, u)?;
    if s.len() != cfg.n || s.iter().any(|sn| sn.len() != cfg.gamma) {
        return dim_err("symbol frame must hold N vectors of length Γ");
    }
    if n_r.len() != cfg.relay_in_blocks() * cfg.m_r || n_d.len() != cfg.n * cfg.n_r {
        return dim_err(format!("noise lengths {} and {}", n_r.len(), n_d.len()));
    }
    let w = dft_matrix::<T>(cfg.n)?;
    let freq_in: Vec<CVec<T>> = (0..cfg.n).map(|n| &v[n] * &s[n]).collect();
    let p = propagate(cfg, ch, relay, &w, &freq_in, n_r, n_d);
    let s_hat = (0..cfg.n).map(|n| &u[n] * &p.y[n]).collect();
    Ok(TimeDomainFrame {
        s: s.to_vec(),
        x: p.x,
        x_cp: p.x_cp,
        n_r: n_r.clone(),
        y_t: p.y_t.stacked(),
        n_d: n_d.clone(),
        y_d: p.y_d,
        s_hat,
    })
}

struct FrameSample<T: Real> {
    err: Vec<CMat<T>>,
    weighted: Vec<T>,
    power: T,
}

fn cn_vec<T: Real>(rng: &mut rand_chacha::ChaCha8Rng, len: usize, var: T) -> CVec<T> {
    random_cn_matrix(rng, len, 1, var).column(0).clone_owned()
}

/// Monte Carlo estimate of per-subcarrier MSE and relay power. Frame `f`
/// draws from stream `f` of `seed`, so results do not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn simulate_frames<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
    num_frames: usize,
    seed: u64,
) -> Result<FrameStats<T>> {
    check_inputs(cfg, ch, relay, v, u)?;
    theta.check(cfg)?;
    if num_frames == 0 {
        return Err(crate::Error::Precondition("num_frames must be at least 1".into()));
    }
    let w = dft_matrix::<T>(cfg.n)?;
    let n_r_len = cfg.relay_in_blocks() * cfg.m_r;
    let samples: Vec<FrameSample<T>> = (0..num_frames)
        .into_par_iter()
        .map(|f| {
            let mut rng = stream_rng(seed, f as u64);
            let s: Vec<CVec<T>> = (0..cfg.n).map(|_| cn_vec(&mut rng, cfg.gamma, T::one())).collect();
            let n_r = cn_vec(&mut rng, n_r_len, cfg.sigma_r2);
            let n_d = cn_vec(&mut rng, cfg.n * cfg.n_r, cfg.sigma_d2);
            let freq_in: Vec<CVec<T>> = (0..cfg.n).map(|n| &v[n] * &s[n]).collect();
            let p = propagate(cfg, ch, relay, &w, &freq_in, &n_r, &n_d);
            let mut err = Vec::with_capacity(cfg.n);
            let mut weighted = Vec::with_capacity(cfg.n);
            for n in 0..cfg.n {
                let e = &u[n] * &p.y[n] - &s[n];
                weighted.push(e.iter().zip(&theta.diag[n]).fold(T::zero(), |acc, (z, &th)| acc + th * z.norm_sqr()));
                err.push(&e * e.adjoint());
            }
            let power = p.y_t.samples.iter().fold(T::zero(), |acc, y| acc + y.norm_squared());
            FrameSample { err, weighted, power }
        })
        .collect();

    let k = T::lit(num_frames as f64);
    let mut mse = vec![czeros::<T>(cfg.gamma, cfg.gamma); cfg.n];
    let mut wsub = vec![T::zero(); cfg.n];
    let totals: Vec<T> = samples.iter().map(|s| s.weighted.iter().fold(T::zero(), |a, &b| a + b)).collect();
    let powers: Vec<T> = samples.iter().map(|s| s.power).collect();
    for smp in &samples {
        for n in 0..cfg.n {
            mse[n] += &smp.err[n];
            wsub[n] += smp.weighted[n];
        }
    }
    for n in 0..cfg.n {
        mse[n] /= cr(k);
        wsub[n] /= k;
    }
    let (wm, wse) = mean_se(&totals);
    let (pm, pse) = mean_se(&powers);
    Ok(FrameStats {
        frames: num_frames,
        mse,
        weighted_mse: wsub,
        weighted_mse_mean: wm,
        weighted_mse_se: wse,
        relay_power_mean: pm,
        relay_power_se: pse,
    })
}

/// Sample mean and standard error of the mean.
pub fn mean_se<T: Real>(xs: &[T]) -> (T, T) {
    let k = T::lit(xs.len() as f64);
    let mean = xs.iter().fold(T::zero(), |a, &b| a + b) / k;
    if xs.len() < 2 {
        return (mean, T::zero());
    }
    let var = xs.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / (k - T::one());
    (mean, (var / k).sqrt())
}

/// Largest relative deviation between the time-domain chain and the
/// per-subcarrier model `y_n = H_n x_n`, over unit inputs on every
/// subcarrier and transmit antenna. Noise is off.
///
/// Only dimensions are validated, so a prefix shorter than the channel span
/// can be passed deliberately; the deviation then reports the ISI.
pub fn verify_frequency_model<T: Real>(cfg: &SystemConfig<T>, ch: &ChannelRealization<T>, relay: &RelayFilter<T>) -> Result<T> {
    cfg.validate_dimensions()?;
    let chain = ChainMatrices::new(cfg, ch)?;
    let model = channels_from_chain(cfg, &chain, relay)?;
    let w = dft_matrix::<T>(cfg.n)?;
    let n_r = CVec::<T>::zeros(cfg.relay_in_blocks() * cfg.m_r);
    let n_d = CVec::<T>::zeros(cfg.n * cfg.n_r);
    let scale = model.iter().fold(T::zero(), |acc, c| acc.max(fro2(&c.h).sqrt()));
    let mut worst = T::zero();
    for sub in 0..cfg.n {
        for i in 0..cfg.n_t {
            let mut freq_in = vec![CVec::<T>::zeros(cfg.n_t); cfg.n];
            freq_in[sub][i] = cr(T::one());
            let p = propagate(cfg, ch, relay, &w, &freq_in, &n_r, &n_d);
            let mut dev = T::zero();
            for m in 0..cfg.n {
                let expect = if m == sub { model[m].h.column(i).clone_owned() } else { CVec::<T>::zeros(cfg.n_r) };
                dev += (&p.y[m] - expect).norm_squared();
            }
            let denom = model[sub].h.column(i).norm().max(scale * T::eps());
            let rel = if denom > T::zero() { dev.sqrt() / denom } else { dev.sqrt() };
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

/// Analytic weighted MSE `Σ_n tr(Θ_n M_n)` of a design, for comparison with
/// [`FrameStats::weighted_mse_mean`].
pub fn analytic_weighted_mse<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
    v: &[CMat<T>],
    u: &[CMat<T>],
    theta: &WeightMatrices<T>,
) -> Result<T> {
    let chain = ChainMatrices::new(cfg, ch)?;
    let chans = channels_from_chain(cfg, &chain, relay)?;
    let mut acc = T::zero();
    for n in 0..cfg.n {
        let e = &u[n] * &chans[n].h * &v[n] - CMat::<T>::identity(cfg.gamma, cfg.gamma);
        let m = &e * e.adjoint() + &u[n] * &chans[n].sigma * u[n].adjoint();
        acc += tr_re(&(theta.theta(n) * m));
    }
    Ok(acc)
}
