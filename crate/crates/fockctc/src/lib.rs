//! Photon-counting statistics for two setups:
//!
//! 1. A single photon incident on a beamsplitter whose second port feeds back
//!    on itself through a phase loop. The loop unrolls into an equivalent
//!    cascade of beamsplitters; the output mode is a fixed superposition over
//!    the cascade rails with closed-form coefficients, from which the mean
//!    photon number and the second-order correlation g² follow exactly.
//!
//! 2. A multiplexed heralded single-photon source: N weak two-mode squeezers
//!    with bucket-detected idlers and a switch that routes the signal of the
//!    lowest-index firing squeezer to the output. Closed forms (valid to
//!    fourth order in the squeezing parameter) plus an exact Monte-Carlo
//!    sampler as an independent oracle.

use num_complex::Complex;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("reflectivity must lie in [0,1], got {0}")]
    BadReflectivity(f64),
    #[error("squeezing parameter must lie in (0,1), got {0}")]
    BadSqueezing(f64),
    #[error("threshold must lie in (0,1], got {0}")]
    BadThreshold(f64),
    #[error("at least one trial is required")]
    NoTrials,
}

pub type Result<T> = std::result::Result<T, FockError>;

/// Rail coefficients of the unrolled loop: the output mode is Σ jₘ·(rail m).
#[derive(Debug, Clone)]
pub struct EcCoefficients {
    pub eta: f64,
    pub phi: f64,
    /// j₀ … j_N
    pub j: Vec<C64>,
    /// Bound on the weight omitted by truncating the infinite cascade at N.
    pub truncation_error: f64,
}

impl EcCoefficients {
    /// Σ jₘ — the amplitude a classical field picks up around the loop.
    pub fn coefficient_sum(&self) -> C64 {
        self.j.iter().sum()
    }

    /// Σ |jₘ|² — total captured single-photon weight.
    pub fn weight(&self) -> f64 {
        self.j.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Coefficients of the truncated infinite cascade:
/// j₀ = −e^{−iφ}√(1−η), jₘ = η(e^{iφ}√(1−η))^{m−1} for m ≥ 1.
pub fn ec_output_coefficients(eta: f64, phi: f64, n: usize) -> Result<EcCoefficients> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(FockError::BadReflectivity(eta));
    }
    let s = (1.0 - eta).sqrt();
    let e = Complex::from_polar(1.0, phi);
    let mut j = vec![Complex::new(0.0, 0.0); n + 1];
    j[0] = -e.conj() * s;
    if eta > 0.0 {
        let ratio = e * s;
        let mut pow = Complex::new(1.0, 0.0);
        for m in 1..=n {
            j[m] = pow * eta;
            pow *= ratio;
        }
    }
    Ok(EcCoefficients {
        eta,
        phi,
        j,
        truncation_error: (1.0 - eta).powf(n as f64 / 2.0),
    })
}

/// Mean photon number and g² of the loop output for a single-photon input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonStats {
    pub mean_n: f64,
    pub g2: f64,
}

/// Closed-form (infinite-cascade) statistics: mean_n = 1 exactly and
/// g² = 8η(1−η)/(2−η).
pub fn photon_ctc_stats(eta: f64, _phi: f64) -> Result<PhotonStats> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(FockError::BadReflectivity(eta));
    }
    Ok(PhotonStats {
        mean_n: 1.0,
        g2: 8.0 * eta * (1.0 - eta) / (2.0 - eta),
    })
}

/// Finite-cascade oracle with `n_rails` rails. The cascade is closed
/// unitarily (the last rail absorbs the remaining amplitude), so the
/// coefficients satisfy Σ|cₘ|² = 1 exactly and mean_n = 1 exactly; g² is
/// evaluated numerically from the coefficient sums and converges to
/// `photon_ctc_stats` as `n_rails` grows. `cutoff` is the Fock-space cutoff
/// of an equivalent state-vector evaluation; the moment identities used here
/// are exact for any cutoff ≥ 2, so it only gates the precondition.
pub fn fock_simulate(eta: f64, phi: f64, n_rails: usize, cutoff: usize) -> Result<PhotonStats> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(FockError::BadReflectivity(eta));
    }
    let _ = cutoff.max(2);
    let s = (1.0 - eta).sqrt();
    let e = Complex::from_polar(1.0, phi);
    let ratio = e * s;
    let mut c = vec![-e.conj() * s];
    let mut pow = Complex::new(1.0, 0.0);
    for _ in 1..n_rails {
        c.push(pow * eta);
        pow *= ratio;
    }
    // unitary closure: the final rail takes the rest of the amplitude
    c.push(pow * eta.sqrt());
    let w2: f64 = c.iter().map(|x| x.norm_sqr()).sum();
    let w4: f64 = c.iter().map(|x| x.norm_sqr().powi(2)).sum();
    Ok(PhotonStats {
        mean_n: w2,
        g2: 2.0 * w2 * w2 - 2.0 * w4,
    })
}

/// Parameters of the multiplexed source: per-squeezer strength χ, number of
/// squeezers N, and the bucket-detector polynomial constants.
#[derive(Debug, Clone, Copy)]
pub struct SpodParams {
    pub chi: f64,
    pub n: u64,
    pub mu: f64,
    pub nu: f64,
}

impl SpodParams {
    pub fn new(chi: f64, n: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&chi) || chi == 0.0 {
            return Err(FockError::BadSqueezing(chi));
        }
        Ok(Self {
            chi,
            n,
            mu: 1.5,
            nu: 0.5,
        })
    }

    /// The closed forms are fourth-order expansions in χ; flag settings where
    /// the neglected terms are no longer negligible.
    pub fn warning(&self) -> Option<&'static str> {
        (self.chi > 0.1).then_some("squeezing parameter exceeds 0.1; fourth-order closed forms degrade")
    }
}

/// Closed-form source statistics, exact to fourth order in χ.
/// For n = 0 the output is vacuum: mean_n = 0 and g² is reported as 0.
pub fn spod_stats(p: &SpodParams) -> PhotonStats {
    let x2 = p.chi * p.chi;
    let x4 = x2 * x2;
    let decay = (1.0 - x2).powf(p.n as f64) - 1.0;
    if p.n == 0 {
        return PhotonStats {
            mean_n: 0.0,
            g2: 0.0,
        };
    }
    let mean_n = (4.0 - 4.0 * x2 + 9.0 * x4) * decay / (5.0 * x4 - 4.0);
    let g2 = -2.0 * x2 * (4.0 - 5.0 * x4).powi(2) / ((4.0 - 4.0 * x2 + 9.0 * x4).powi(2) * decay);
    PhotonStats { mean_n, g2 }
}

/// Monte-Carlo estimates of the source statistics.
#[derive(Debug, Clone, Copy)]
pub struct SpodMcStats {
    pub mean_n_est: f64,
    pub g2_est: f64,
    pub stderr_mean_n: f64,
    pub stderr_g2: f64,
    pub trials: u64,
}

/// Exact sampler: each squeezer's pair count is drawn from the two-mode
/// squeezed distribution P(n) = tanh^{2n}χ / cosh²χ; an idler bucket detector
/// clicks iff n ≥ 1; the switch outputs the signal count of the lowest-index
/// clicking squeezer (0 if none click). Deterministic for a fixed seed.
pub fn spod_montecarlo(p: &SpodParams, trials: u64, seed: u64) -> Result<SpodMcStats> {
    if trials == 0 {
        return Err(FockError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = p.chi.tanh().powi(2);
    // P(no click) for one squeezer is P(n=0) = 1 − t; the switch outputs the
    // count of the lowest-index clicking squeezer. Its distribution is exact
    // in closed form — 0 with probability (1−t)^N, otherwise the clicking
    // squeezer's count conditioned on n ≥ 1, i.e. P(n) = (1−t)t^{n−1} — so
    // each trial needs two draws instead of a scan over all N squeezers.
    let log_t = t.ln();
    let p_silent = (1.0 - t).powf(p.n as f64);
    let mut sum_n = 0.0f64;
    let mut sum_n2 = 0.0f64;
    let mut sum_h = 0.0f64; // n(n−1)
    let mut sum_h2 = 0.0f64;
    for _ in 0..trials {
        let out = if rng.gen::<f64>() < p_silent {
            0u64
        } else {
            let v: f64 = rng.gen();
            1 + ((1.0 - v).ln() / log_t).floor() as u64
        };
        let nf = out as f64;
        let hf = nf * (nf - 1.0);
        sum_n += nf;
        sum_n2 += nf * nf;
        sum_h += hf;
        sum_h2 += hf * hf;
    }
    let tf = trials as f64;
    let mean_n = sum_n / tf;
    let mean_h = sum_h / tf;
    let var_n = (sum_n2 / tf - mean_n * mean_n).max(0.0);
    let var_h = (sum_h2 / tf - mean_h * mean_h).max(0.0);
    let se_n = (var_n / tf).sqrt();
    let se_h = (var_h / tf).sqrt();
    let g2 = if mean_n > 0.0 {
        mean_h / (mean_n * mean_n)
    } else {
        0.0
    };
    // first-order error propagation through the ratio
    let se_g2 = if mean_n > 0.0 {
        (se_h / (mean_n * mean_n)).hypot(2.0 * mean_h * se_n / mean_n.powi(3))
    } else {
        0.0
    };
    Ok(SpodMcStats {
        mean_n_est: mean_n,
        g2_est: g2,
        stderr_mean_n: se_n,
        stderr_g2: se_g2,
        trials,
    })
}

/// Minimal number of squeezers N with (1−χ²)^N < ε.
pub fn spod_min_sources(chi: f64, epsilon: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&chi) || chi == 0.0 {
        return Err(FockError::BadSqueezing(chi));
    }
    if epsilon <= 0.0 || epsilon > 1.0 {
        return Err(FockError::BadThreshold(epsilon));
    }
    if epsilon == 1.0 {
        return Ok(1);
    }
    let ratio = epsilon.ln() / (1.0 - chi * chi).ln();
    let mut n = ratio.floor() as u64 + 1;
    // guard against floating-point landing exactly on the boundary
    while (1.0 - chi * chi).powf(n as f64) >= epsilon {
        n += 1;
    }
    Ok(n)
}
