//! Continuous-variable engine for a beamsplitter whose second port is a
//! self-consistent loop mode: closed-form output moments, squeezed-state
//! covariance, the correlation-breaking (open-loop) squeezing circuit with
//! its iterated variance formula, uncertainty-product bookkeeping, and
//! Wigner-function grids.
//!
//! Conventions: quadratures Q = A† + A, P = i(A† − A); vacuum covariance is
//! the identity; the uncertainty bound is σ_Q·σ_P ≥ 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;

#[derive(Debug, Error)]
pub enum GaussianError {
    #[error("covariance must be {expected}×{expected}, got {got} rows")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("covariance is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("covariance violates the uncertainty relation (min eigenvalue of cov + iΩ is {0:.3e})")]
    Unphysical(f64),
    #[error("covariance is singular (det {0:.3e})")]
    SingularCovariance(f64),
    #[error("operation requires a single mode, state has {0}")]
    NotSingleMode(usize),
}

pub type Result<T> = std::result::Result<T, GaussianError>;

/// A Gaussian state of `n_modes` modes: mean vector (Q₁,P₁,…,Qₙ,Pₙ) and
/// real symmetric covariance with vacuum = identity.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub n_modes: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(n_modes: usize, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.len() != 2 * n_modes || cov.nrows() != 2 * n_modes || cov.ncols() != 2 * n_modes {
            return Err(GaussianError::DimensionMismatch {
                expected: 2 * n_modes,
                got: cov.nrows().max(mean.len()),
            });
        }
        Ok(Self { n_modes, mean, cov })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            n_modes,
            mean: DVector::zeros(2 * n_modes),
            cov: DMatrix::identity(2 * n_modes, 2 * n_modes),
        }
    }

    pub fn coherent(alpha: C64) -> Self {
        let mut s = Self::vacuum(1);
        s.mean[0] = 2.0 * alpha.re;
        s.mean[1] = 2.0 * alpha.im;
        s
    }

    /// Symplectic form Ω for this convention: per-mode block [[0,1],[−1,0]].
    pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
        let mut o = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for m in 0..n_modes {
            o[(2 * m, 2 * m + 1)] = 1.0;
            o[(2 * m + 1, 2 * m)] = -1.0;
        }
        o
    }

    pub fn validate(&self) -> Result<()> {
        let n = 2 * self.n_modes;
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((self.cov[(i, j)] - self.cov[(j, i)]).abs());
            }
        }
        if asym > 1e-12 {
            return Err(GaussianError::NotSymmetric(asym));
        }
        // cov + iΩ must be positive semidefinite (up to −1e−8).
        let omega = Self::symplectic_form(self.n_modes);
        let m = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(self.cov[(i, j)], omega[(i, j)])
        });
        let eig = m.symmetric_eigen();
        let min = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-8 {
            return Err(GaussianError::Unphysical(min));
        }
        Ok(())
    }

    /// Marginal state of one mode.
    pub fn mode(&self, m: usize) -> GaussianState {
        let mean = DVector::from_vec(vec![self.mean[2 * m], self.mean[2 * m + 1]]);
        let cov = self.cov.view((2 * m, 2 * m), (2, 2)).into_owned();
        GaussianState {
            n_modes: 1,
            mean,
            cov,
        }
    }
}

/// Preparation of the input mode: displaced, rotated, squeezed.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPrep {
    pub alpha: C64,
    pub r: f64,
    pub theta_r: f64,
    pub theta_s: f64,
}

impl GaussianPrep {
    pub fn coherent(alpha: C64) -> Self {
        Self {
            alpha,
            r: 0.0,
            theta_r: 0.0,
            theta_s: 0.0,
        }
    }

    /// Bogoliubov coefficients of the prepared mode: V = p·a + q·a†.
    pub fn pq(&self) -> (C64, C64) {
        let p = Complex::from_polar(self.r.cosh(), self.theta_r);
        let q = -Complex::from_polar(self.r.sinh(), self.theta_r - 2.0 * self.theta_s);
        (p, q)
    }

    /// Input-state Gaussian form (before any loop interaction).
    pub fn state(&self) -> GaussianState {
        let (p, q) = self.pq();
        let vv = p * q; // ⟨δV δV⟩
        let vdv = self.r.sinh().powi(2); // ⟨δV† δV⟩
        state_from_moments(self.alpha, vv, vdv)
    }
}

/// Beamsplitter parameters: reflectivity η and loop phase φ.
#[derive(Debug, Clone, Copy)]
pub struct BsParams {
    pub eta: f64,
    pub phi: f64,
}

/// Assemble a single-mode Gaussian state from the mean field ⟨V⟩ and the
/// fluctuation moments ⟨δVδV⟩, ⟨δV†δV⟩ (vacuum covariance is the identity).
pub fn state_from_moments(mean_v: C64, vv_fluct: C64, vdv_fluct: f64) -> GaussianState {
    let var_q = 1.0 + 2.0 * vdv_fluct + 2.0 * vv_fluct.re;
    let var_p = 1.0 + 2.0 * vdv_fluct - 2.0 * vv_fluct.re;
    let cov_qp = 2.0 * vv_fluct.im;
    let mean = DVector::from_vec(vec![2.0 * mean_v.re, 2.0 * mean_v.im]);
    let cov = DMatrix::from_row_slice(2, 2, &[var_q, cov_qp, cov_qp, var_p]);
    GaussianState {
        n_modes: 1,
        mean,
        cov,
    }
}

/// Overall phase e^{iΦ} picked up by the mean field: the sum of the
/// loop-unrolling coefficients.
pub fn loop_phase(bs: BsParams) -> C64 {
    let s = (1.0 - bs.eta).sqrt();
    let e = Complex::from_polar(1.0, bs.phi);
    if bs.eta == 0.0 {
        // the fraction below degenerates to 0/0 at φ = 0; its limit is −e^{−iφ}
        return -e.conj();
    }
    (Complex::new(1.0, 0.0) - e.conj() * s) / (Complex::new(1.0, 0.0) - e * s)
}

/// Σ jₘ² over the loop-unrolling coefficients (closed form of the
/// geometric series).
fn coeff_square_sum(bs: BsParams) -> C64 {
    let e2 = Complex::from_polar(1.0, 2.0 * bs.phi);
    let one = Complex::new(1.0, 0.0);
    if bs.eta == 0.0 {
        return e2.conj();
    }
    e2.conj() * (1.0 - bs.eta) + Complex::new(bs.eta * bs.eta, 0.0) / (one - e2 * (1.0 - bs.eta))
}

/// First and second moments of the output mode, plus its Gaussian form.
#[derive(Debug, Clone)]
pub struct CtcMoments {
    /// ⟨V′⟩
    pub mean_v: C64,
    /// ⟨V′V′⟩
    pub vv: C64,
    /// ⟨V′†V′⟩
    pub vdv: f64,
    /// e^{iΦ}
    pub phase: C64,
    pub state: GaussianState,
}

/// Closed-form (unrolled-series) output moments of the loop beamsplitter.
pub fn ctc_beamsplitter_moments(bs: BsParams, prep: &GaussianPrep) -> CtcMoments {
    let phase = loop_phase(bs);
    let s2 = coeff_square_sum(bs);
    let (p, q) = prep.pq();
    let mean_v = phase * prep.alpha;
    let vdv = prep.r.sinh().powi(2) + prep.alpha.norm_sqr();
    let vv_fluct = p * q * s2;
    let vv = vv_fluct + phase * phase * prep.alpha * prep.alpha;
    let state = state_from_moments(mean_v, vv_fluct, vdv - prep.alpha.norm_sqr());
    CtcMoments {
        mean_v,
        vv,
        vdv,
        phase,
        state,
    }
}

/// Finite-series oracle for the closed forms: sums the loop-unrolling
/// coefficients explicitly up to n terms.
pub fn ctc_beamsplitter_moments_series(bs: BsParams, prep: &GaussianPrep, n: usize) -> CtcMoments {
    let s = (1.0 - bs.eta).sqrt();
    let e = Complex::from_polar(1.0, bs.phi);
    let j0 = -e.conj() * s;
    let mut sum_j = j0;
    let mut sum_j2 = j0 * j0;
    let mut sum_abs2 = j0.norm_sqr();
    let mut geom = Complex::new(1.0, 0.0);
    for _ in 1..=n {
        let jm = Complex::new(bs.eta, 0.0) * geom;
        sum_j += jm;
        sum_j2 += jm * jm;
        sum_abs2 += jm.norm_sqr();
        geom *= e * s;
    }
    let (p, q) = prep.pq();
    let mean_v = sum_j * prep.alpha;
    let vdv = sum_abs2 * prep.r.sinh().powi(2) + prep.alpha.norm_sqr();
    let vv_fluct = p * q * sum_j2;
    let vv = vv_fluct + sum_j * sum_j * prep.alpha * prep.alpha;
    let state = state_from_moments(mean_v, vv_fluct, vdv - prep.alpha.norm_sqr());
    CtcMoments {
        mean_v,
        vv,
        vdv,
        phase: sum_j,
        state,
    }
}

/// Output covariance for the squeezed preparation (θ_R = θ_S + π/2, α = 0):
/// [[cosh2r − K₁ sinh2r, K₂ sinh2r], [K₂ sinh2r, cosh2r + K₁ sinh2r]].
/// At η = 0 the loop is never entered and the input covariance is returned.
pub fn ctc_squeezed_covariance(bs: BsParams, r: f64) -> DMatrix<f64> {
    let (k1, k2) = if bs.eta == 0.0 {
        (1.0, 0.0)
    } else {
        let k = coeff_square_sum(bs);
        (k.re, k.im)
    };
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    DMatrix::from_row_slice(
        2,
        2,
        &[c - k1 * s, k2 * s, k2 * s, c + k1 * s],
    )
}

/// Closed-form variances after M passes of the correlation-breaking
/// squeezing circuit: VarQ = (1 + 2^{M−R} − 2^{−R})/2^M with R = 2r/ln2,
/// and VarP the mirror image with R → −R.
pub fn otc_variances(m: u32, r: f64) -> (f64, f64) {
    let cap_r = 2.0 * r / std::f64::consts::LN_2;
    let m = f64::from(m);
    let var_q = (1.0 + 2f64.powf(m - cap_r) - 2f64.powf(-cap_r)) / 2f64.powf(m);
    let var_p = (1.0 + 2f64.powf(m + cap_r) - 2f64.powf(cap_r)) / 2f64.powf(m);
    (var_q, var_p)
}

/// 50:50 beamsplitter symplectic on (Q_A,P_A,Q_B,P_B).
fn balanced_bs() -> DMatrix<f64> {
    let c = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, c, 0.0, //
            0.0, c, 0.0, c, //
            -c, 0.0, c, 0.0, //
            0.0, -c, 0.0, c,
        ],
    )
}

/// Explicit pass-by-pass simulation of the correlation-breaking squeezing
/// circuit: each pass mixes the arm with a fresh Q-squeezed ancilla on a
/// 50:50 beamsplitter, destroys all arm–ancilla correlations, and unmixes.
/// Returns the arm's single-mode state after M passes.
pub fn otc_circuit_simulate(m: u32, r: f64, alpha: C64) -> GaussianState {
    assert!(m >= 1, "need at least one pass");
    let bs = balanced_bs();
    let bs_inv = bs.transpose(); // orthogonal
    let mut arm = GaussianState::coherent(alpha);
    for _ in 0..m {
        // two-mode state (arm, fresh ancilla squeezed in Q)
        let mut mean = DVector::zeros(4);
        mean[0] = arm.mean[0];
        mean[1] = arm.mean[1];
        let mut cov = DMatrix::zeros(4, 4);
        cov.view_mut((0, 0), (2, 2)).copy_from(&arm.cov);
        cov[(2, 2)] = (-2.0 * r).exp();
        cov[(3, 3)] = (2.0 * r).exp();

        let mut mean2 = &bs * mean;
        let mut cov2 = &bs * cov * bs.transpose();
        // correlation break between the two arms: zero the cross blocks
        for i in 0..2 {
            for j in 2..4 {
                cov2[(i, j)] = 0.0;
                cov2[(j, i)] = 0.0;
            }
        }
        mean2 = &bs_inv * mean2;
        cov2 = &bs_inv * cov2 * bs_inv.transpose();
        arm = GaussianState {
            n_modes: 2,
            mean: mean2,
            cov: cov2,
        }
        .mode(0);
    }
    arm
}

#[derive(Debug, Clone, Copy)]
pub struct HupReport {
    /// Product of the Q standard deviation in one arm and the P standard
    /// deviation in the mirror arm (ancilla squeezed in P there).
    pub sigma_product: f64,
    /// Mean ancilla photons consumed per arm: M·sinh²r.
    pub mean_photons_per_arm: f64,
}

/// Two-arm uncertainty demonstration: one arm reduces Var(Q), the mirror arm
/// (with P-squeezed ancillas) reduces Var(P) by symmetry; both measure the
/// same displacement. The product can drop below the bound of 1.
pub fn hup_demo(m: u32, r: f64, _alpha: C64) -> HupReport {
    let (var_q, _) = otc_variances(m, r);
    // mirror arm: swapping the ancilla squeezing axis swaps the roles of the
    // quadratures, so Var(P) there equals Var(Q) here
    let sigma_product = (var_q * var_q).sqrt();
    HupReport {
        sigma_product,
        mean_photons_per_arm: f64::from(m) * r.sinh().powi(2),
    }
}

/// Dense Wigner-function samples of a single-mode Gaussian state.
#[derive(Debug, Clone)]
pub struct WignerGrid {
    pub qs: Vec<f64>,
    pub ps: Vec<f64>,
    /// values[i][j] = W(qs[i], ps[j])
    pub values: Vec<Vec<f64>>,
}

pub fn wigner_grid(state: &GaussianState, half_range: f64, resolution: usize) -> Result<WignerGrid> {
    if state.n_modes != 1 {
        return Err(GaussianError::NotSingleMode(state.n_modes));
    }
    let det = state.cov[(0, 0)] * state.cov[(1, 1)] - state.cov[(0, 1)] * state.cov[(1, 0)];
    if det < 1e-14 {
        return Err(GaussianError::SingularCovariance(det));
    }
    let inv = [
        state.cov[(1, 1)] / det,
        -state.cov[(0, 1)] / det,
        -state.cov[(1, 0)] / det,
        state.cov[(0, 0)] / det,
    ];
    let norm = 1.0 / (std::f64::consts::PI * det.sqrt());
    let axis = |c: f64| -> Vec<f64> {
        (0..resolution)
            .map(|i| c - half_range + 2.0 * half_range * i as f64 / (resolution - 1) as f64)
            .collect()
    };
    let qs = axis(state.mean[0]);
    let ps = axis(state.mean[1]);
    let mut values = Vec::with_capacity(resolution);
    for q in &qs {
        let dq = q - state.mean[0];
        let mut row = Vec::with_capacity(resolution);
        for p in &ps {
            let dp = p - state.mean[1];
            let quad = inv[0] * dq * dq + (inv[1] + inv[2]) * dq * dp + inv[3] * dp * dp;
            row.push(norm * (-quad).exp());
        }
        values.push(row);
    }
    Ok(WignerGrid { qs, ps, values })
}
