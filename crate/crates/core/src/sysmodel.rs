//! System configuration, channel draws and the signal-chain matrices.
//!
//! The source sends `N` subcarriers of `Γ` streams from `N_t` antennas. The
//! relay receives on `M_r` antennas, filters with an `L_r`-tap MIMO FIR bank
//! and retransmits on `M_t` antennas; the destination has `N_r` antennas.
//! All chain matrices follow the `[x_{N-1}; ...; x_0]` stacking described in
//! [`crate::blockmat`].

use crate::blockmat::{relay_index, subcarrier_column, toeplitz_from_taps};
use crate::error::{dim_err, Error, Result};
use crate::scalar::{ceye, cr, czeros, CMat, CVec, Real};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// All dimensions, noise levels and budgets of the link. Powers are linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig<T> {
    pub n: usize,
    pub n_t: usize,
    pub m_r: usize,
    pub m_t: usize,
    pub n_r: usize,
    pub gamma: usize,
    pub l_f: usize,
    pub l_r: usize,
    pub l_g: usize,
    pub n_cp: usize,
    pub sigma_r2: T,
    pub sigma_d2: T,
    pub p_s_max: T,
    pub p_r_max: T,
    pub sigma_f2: T,
    pub sigma_g2: T,
}

impl<T: Real> SystemConfig<T> {
    /// 16 subcarriers, 2x2x2x2 antennas, two streams, 3-tap hops, a 4-tap
    /// relay, unit noise, 20 dB source and relay budgets, minimal prefix.
    pub fn reference() -> Self {
        let mut c = Self {
            n: 16,
            n_t: 2,
            m_r: 2,
            m_t: 2,
            n_r: 2,
            gamma: 2,
            l_f: 3,
            l_r: 4,
            l_g: 3,
            n_cp: 0,
            sigma_r2: T::one(),
            sigma_d2: T::one(),
            p_s_max: T::lit(100.0),
            p_r_max: T::lit(100.0),
            sigma_f2: T::one(),
            sigma_g2: T::one(),
        };
        c.n_cp = c.min_cp();
        c
    }

    /// Single-antenna, single-tap link with `n` subcarriers and unit powers.
    pub fn scalar(n: usize) -> Self {
        Self {
            n,
            n_t: 1,
            m_r: 1,
            m_t: 1,
            n_r: 1,
            gamma: 1,
            l_f: 1,
            l_r: 1,
            l_g: 1,
            n_cp: 0,
            sigma_r2: T::one(),
            sigma_d2: T::one(),
            p_s_max: T::one(),
            p_r_max: T::one(),
            sigma_f2: T::one(),
            sigma_g2: T::one(),
        }
    }

    /// Smallest prefix that keeps the end-to-end chain circular.
    pub fn min_cp(&self) -> usize {
        (self.l_f + self.l_r + self.l_g).saturating_sub(3)
    }

    /// Copy with the relay tap count changed and the prefix kept minimal.
    pub fn with_relay_taps(&self, l_r: usize) -> Self {
        let mut c = self.clone();
        c.l_r = l_r;
        c.n_cp = c.min_cp();
        c
    }

    /// Number of `M_r`-blocks at the relay input, `N + L_g + L_r - 2`.
    pub fn relay_in_blocks(&self) -> usize {
        self.n + self.l_g + self.l_r - 2
    }

    /// Number of `M_t`-blocks at the relay output, `N + L_g - 1`.
    pub fn relay_out_blocks(&self) -> usize {
        self.n + self.l_g - 1
    }

    /// Number of `N_t`-blocks seen by the source-relay Toeplitz matrix.
    pub fn window_blocks(&self) -> usize {
        self.n + self.min_cp()
    }

    /// Length of the relay tap vector `r`.
    pub fn relay_dim(&self) -> usize {
        self.m_t * self.l_r * self.m_r
    }

    /// Checks counts and stream limits, but not the prefix bound.
    pub fn validate_dimensions(&self) -> Result<()> {
        let counts = [
            ("n", self.n),
            ("n_t", self.n_t),
            ("m_r", self.m_r),
            ("m_t", self.m_t),
            ("n_r", self.n_r),
            ("gamma", self.gamma),
            ("l_f", self.l_f),
            ("l_r", self.l_r),
            ("l_g", self.l_g),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        let min_dim = self.n_t.min(self.m_r).min(self.m_t).min(self.n_r);
        if self.gamma > min_dim {
            return Err(Error::InvalidConfig(format!(
                "gamma = {} exceeds min antenna count {min_dim}",
                self.gamma
            )));
        }
        Ok(())
    }

    /// Full validity: dimensions, prefix bound, positive powers.
    pub fn validate(&self) -> Result<()> {
        self.validate_dimensions()?;
        if self.n_cp < self.min_cp() {
            return Err(Error::InvalidConfig(format!(
                "n_cp = {} below l_f + l_r + l_g - 3 = {}",
                self.n_cp,
                self.min_cp()
            )));
        }
        let powers = [
            ("sigma_r2", self.sigma_r2),
            ("sigma_d2", self.sigma_d2),
            ("p_s_max", self.p_s_max),
            ("p_r_max", self.p_r_max),
            ("sigma_f2", self.sigma_f2),
            ("sigma_g2", self.sigma_g2),
        ];
        for (name, v) in powers {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive and finite")));
            }
        }
        Ok(())
    }
}

impl<T: Real + Serialize + for<'de> Deserialize<'de>> SystemConfig<T> {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Source-relay taps `F_k` (`M_r × N_t`) and relay-destination taps `G_k`
/// (`N_r × M_t`).
#[derive(Clone, Debug)]
pub struct ChannelRealization<T: Real> {
    pub f_taps: Vec<CMat<T>>,
    pub g_taps: Vec<CMat<T>>,
}

impl<T: Real> ChannelRealization<T> {
    pub fn check(&self, cfg: &SystemConfig<T>) -> Result<()> {
        if self.f_taps.len() != cfg.l_f || self.g_taps.len() != cfg.l_g {
            return dim_err("channel tap counts do not match configuration");
        }
        if self.f_taps.iter().any(|f| f.shape() != (cfg.m_r, cfg.n_t)) {
            return dim_err("source-relay tap shape");
        }
        if self.g_taps.iter().any(|g| g.shape() != (cfg.n_r, cfg.m_t)) {
            return dim_err("relay-destination tap shape");
        }
        Ok(())
    }

    pub fn zero(cfg: &SystemConfig<T>) -> Self {
        Self {
            f_taps: vec![czeros(cfg.m_r, cfg.n_t); cfg.l_f],
            g_taps: vec![czeros(cfg.n_r, cfg.m_t); cfg.l_g],
        }
    }
}

/// Relay FIR taps `R_k` (`M_t × M_r`).
#[derive(Clone, Debug)]
pub struct RelayFilter<T: Real> {
    pub taps: Vec<CMat<T>>,
}

impl<T: Real> RelayFilter<T> {
    pub fn zero(cfg: &SystemConfig<T>) -> Self {
        Self { taps: vec![czeros(cfg.m_t, cfg.m_r); cfg.l_r] }
    }

    /// Rebuilds the taps from `r = vec(R̄^T)`.
    pub fn from_vec(cfg: &SystemConfig<T>, r: &CVec<T>) -> Result<Self> {
        if r.len() != cfg.relay_dim() {
            return dim_err(format!("relay vector length {} != {}", r.len(), cfg.relay_dim()));
        }
        let mut taps = vec![czeros(cfg.m_t, cfg.m_r); cfg.l_r];
        for (j, tap) in taps.iter_mut().enumerate() {
            for a in 0..cfg.m_t {
                for b in 0..cfg.m_r {
                    tap[(a, b)] = r[relay_index(cfg.l_r, cfg.m_r, j, a, b)];
                }
            }
        }
        Ok(Self { taps })
    }

    /// `r = vec(R̄^T)`.
    pub fn to_vec(&self) -> CVec<T> {
        let lr = self.taps.len();
        let (mt, mr) = self.taps[0].shape();
        let mut r = CVec::<T>::zeros(mt * lr * mr);
        for (j, tap) in self.taps.iter().enumerate() {
            for a in 0..mt {
                for b in 0..mr {
                    r[relay_index(lr, mr, j, a, b)] = tap[(a, b)];
                }
            }
        }
        r
    }

    pub fn check(&self, cfg: &SystemConfig<T>) -> Result<()> {
        if self.taps.len() != cfg.l_r || self.taps.iter().any(|t| t.shape() != (cfg.m_t, cfg.m_r)) {
            return dim_err("relay tap shape/count does not match configuration");
        }
        Ok(())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { taps: self.taps.iter().map(|t| t * cr(s)).collect() }
    }

    /// Full relay matrix `R = blkToeplitz(R̄, N + L_g - 1)`.
    pub fn toeplitz(&self, cfg: &SystemConfig<T>) -> Result<CMat<T>> {
        toeplitz_from_taps(&self.taps, cfg.relay_out_blocks())
    }
}

/// Effective channel and noise covariance seen on one subcarrier.
#[derive(Clone, Debug)]
pub struct SubcarrierChannel<T: Real> {
    pub h: CMat<T>,
    pub sigma: CMat<T>,
}

fn cn_matrix<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, var: T) -> CMat<T> {
    let s = (var.to_f64_lossy() / 2.0).sqrt();
    let mut m = czeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            m[(i, j)] = crate::scalar::cx(T::lit(re * s), T::lit(im * s));
        }
    }
    m
}

/// Draws i.i.d. circularly symmetric Gaussian taps, reproducible from `seed`.
pub fn generate_channel<T: Real>(cfg: &SystemConfig<T>, seed: u64) -> ChannelRealization<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f_taps = (0..cfg.l_f).map(|_| cn_matrix(&mut rng, cfg.m_r, cfg.n_t, cfg.sigma_f2)).collect();
    let g_taps = (0..cfg.l_g).map(|_| cn_matrix(&mut rng, cfg.n_r, cfg.m_t, cfg.sigma_g2)).collect();
    ChannelRealization { f_taps, g_taps }
}

/// Draws a complex Gaussian matrix with i.i.d. `CN(0, var)` entries.
pub fn random_cn_matrix<T: Real>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, var: T) -> CMat<T> {
    cn_matrix(rng, rows, cols, var)
}

/// Prefix insertion `T_cp` (`(N+N_cp)N_t × N N_t`, block `c` copies block
/// `c mod N`) and the truncation `T = [I; 0]` (`(N+L_min)N_t × N N_t`).
///
/// When the end-to-end span `L_min + 1` exceeds `N`, the truncation no longer
/// captures the wrapped taps and `T` becomes the circular fold (block `k`
/// copies block `k mod N`). Both agree on `G̃ R F T` whenever `L_min < N`.
pub fn build_cp_matrices<T: Real>(cfg: &SystemConfig<T>) -> (CMat<T>, CMat<T>) {
    let (n, nt) = (cfg.n, cfg.n_t);
    let wrap = cfg.min_cp() >= n;
    let fold = |blocks: usize, wrap: bool| {
        let mut m = czeros(blocks * nt, n * nt);
        for k in 0..blocks {
            if k >= n && !wrap {
                break;
            }
            let src = k % n;
            for i in 0..nt {
                m[(k * nt + i, src * nt + i)] = cr(T::one());
            }
        }
        m
    };
    (fold(n + cfg.n_cp, true), fold(cfg.window_blocks(), wrap))
}

/// Selects the first `N + L_min` blocks of the prefixed signal; blocks beyond
/// the prefix are zero (a silent preceding symbol).
pub fn window_matrix<T: Real>(cfg: &SystemConfig<T>) -> CMat<T> {
    let nt = cfg.n_t;
    let rows = cfg.window_blocks();
    let cols = cfg.n + cfg.n_cp;
    let mut m = czeros(rows * nt, cols * nt);
    for k in 0..rows.min(cols) {
        for i in 0..nt {
            m[(k * nt + i, k * nt + i)] = cr(T::one());
        }
    }
    m
}

/// Relay-independent chain matrices for one channel draw.
#[derive(Clone, Debug)]
pub struct ChainMatrices<T: Real> {
    /// DFT matrix `W_N`.
    pub w: CMat<T>,
    /// `G = blkToeplitz(Ḡ, N)`.
    pub g: CMat<T>,
    /// First row block of `G`, zero padded: `N_r × (N+L_g-1)M_t`.
    pub g_tilde: CMat<T>,
    /// `F = blkToeplitz(F̄, N+L_g+L_r-2)`.
    pub f: CMat<T>,
    /// `F T`.
    pub ft: CMat<T>,
    /// `F W_in T_cp` with the literal prefix.
    pub ft_cp: CMat<T>,
    /// `√N (F T)(w_n ⊗ I)` per subcarrier: `(N+L_g+L_r-2)M_r × N_t`.
    pub b_n: Vec<CMat<T>>,
    /// `(w_n^H ⊗ I) G` per subcarrier: `N_r × (N+L_g-1)M_t`.
    pub wg_n: Vec<CMat<T>>,
    /// `(F W_in T_cp)(W ⊗ I)` restricted to subcarrier `n`: one `N_t` block column.
    pub x_n: Vec<CMat<T>>,
}

impl<T: Real> ChainMatrices<T> {
    pub fn new(cfg: &SystemConfig<T>, ch: &ChannelRealization<T>) -> Result<Self> {
        cfg.validate_dimensions()?;
        ch.check(cfg)?;
        let n = cfg.n;
        let w = crate::blockmat::dft_matrix::<T>(n)?;
        let g = toeplitz_from_taps(&ch.g_taps, n)?;
        let g_tilde = g.rows(0, cfg.n_r).clone_owned();
        let f = toeplitz_from_taps(&ch.f_taps, cfg.relay_in_blocks())?;
        let (t_cp, t_fold) = build_cp_matrices(cfg);
        let ft = &f * &t_fold;
        let ft_cp = &f * window_matrix(cfg) * t_cp;
        let sqrt_n = cr(T::lit(n as f64).sqrt());
        let mut b_n = Vec::with_capacity(n);
        let mut wg_n = Vec::with_capacity(n);
        let mut x_n = Vec::with_capacity(n);
        for sub in 0..n {
            let wn = subcarrier_column(&w, sub);
            let tau = crate::linalg::kron(&wn, &ceye::<T>(cfg.n_t, cfg.n_t));
            b_n.push(&ft * &tau * sqrt_n);
            x_n.push(&ft_cp * &tau);
            let wr = crate::linalg::kron(&wn.adjoint(), &ceye::<T>(cfg.n_r, cfg.n_r));
            wg_n.push(wr * &g);
        }
        Ok(Self { w, g, g_tilde, f, ft, ft_cp, b_n, wg_n, x_n })
    }
}

/// Effective channels `H_n = √N G̃ R F T (w_n ⊗ I)` and noise covariances
/// `Σ_n = σ_r² (w_n^H ⊗ I) G R R^H G^H (w_n ⊗ I) + σ_d² I`.
pub fn effective_subcarrier_channels<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
) -> Result<Vec<SubcarrierChannel<T>>> {
    let chain = ChainMatrices::new(cfg, ch)?;
    channels_from_chain(cfg, &chain, relay)
}

/// Same as [`effective_subcarrier_channels`] with precomputed chain matrices.
pub fn channels_from_chain<T: Real>(
    cfg: &SystemConfig<T>,
    chain: &ChainMatrices<T>,
    relay: &RelayFilter<T>,
) -> Result<Vec<SubcarrierChannel<T>>> {
    relay.check(cfg)?;
    let r = relay.toeplitz(cfg)?;
    let gr = &chain.g_tilde * &r;
    let eye = ceye::<T>(cfg.n_r, cfg.n_r) * cr(cfg.sigma_d2);
    Ok((0..cfg.n)
        .map(|sub| {
            let h = &gr * &chain.b_n[sub];
            let wgr = &chain.wg_n[sub] * &r;
            let sigma = crate::scalar::hermitize(&(&wgr * wgr.adjoint() * cr(cfg.sigma_r2) + &eye));
            SubcarrierChannel { h, sigma }
        })
        .collect())
}

/// Circulant route: diagonalize the block circulant built from `G̃ R F T`.
pub fn channels_via_circulant<T: Real>(
    cfg: &SystemConfig<T>,
    ch: &ChannelRealization<T>,
    relay: &RelayFilter<T>,
) -> Result<Vec<CMat<T>>> {
    let chain = ChainMatrices::new(cfg, ch)?;
    let h_c = &chain.g_tilde * relay.toeplitz(cfg)? * &chain.ft;
    let blocks = (0..cfg.n)
        .map(|k| h_c.columns(k * cfg.n_t, cfg.n_t).clone_owned())
        .collect();
    crate::blockmat::circulant_diag_blocks(&crate::blockmat::BlockRow::new(blocks)?, cfg.n)
}
