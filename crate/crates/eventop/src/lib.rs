//! Finite-overlap generalization of the loop-beamsplitter optics.
//!
//! The loop unrolls into a ladder of rails indexed by `m`; rails `m` and `n`
//! overlap with a commutator kernel `C_mn ∈ [0, 1]`. A sharply peaked kernel
//! (`C ≈ δ_mn`) reproduces the fixed-point loop results, a flat kernel
//! (`C ≡ 1`) reproduces ordinary single-mode optics, and intermediate kernels
//! interpolate smoothly between the two. Every output mode is assembled as a
//! coefficient list over the rails, so the ordered-mode structure is explicit
//! and reconstructable.

use gaussianctc::{loop_phase, state_from_moments, BsParams, GaussianPrep, GaussianState};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use rayon::prelude::*;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Result<T> = std::result::Result<T, EventOpError>;

/// Per-term cutoff for the rail coefficient series.
const COEFF_TOL: f64 = 1e-12;
/// Kernel entries below this are treated as exactly zero.
const KERNEL_TOL: f64 = 1e-12;
/// Hard cap on the rail series length.
const MAX_TERMS: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum EventOpError {
    #[error("invalid kernel: {0}")]
    BadKernel(String),
    #[error("coupling parameters out of range (need sigma_t > 0, delta_tau >= 0)")]
    BadCoupling,
    #[error("mode overlap must lie in [0, 1]")]
    BadOverlap,
    #[error("truncation too small: estimated dropped tail {tail:.3e} exceeds 1e-8")]
    TruncationTooSmall { tail: f64 },
}

/// Pairwise rail-overlap kernel `C_mn`.
#[derive(Debug, Clone)]
pub enum KernelKind {
    /// `C_mn = exp(−κ²(m−n)²)`.
    Gaussian { kappa: f64 },
    /// Arbitrary symmetric overlap table (unit diagonal, entries in [0, 1]).
    Explicit { c: DMatrix<f64> },
}

#[derive(Debug, Clone)]
pub struct CommutatorKernel {
    pub kind: KernelKind,
}

impl CommutatorKernel {
    pub fn gaussian(kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(EventOpError::BadKernel(format!(
                "kappa must be a finite non-negative real, got {kappa}"
            )));
        }
        Ok(Self {
            kind: KernelKind::Gaussian { kappa },
        })
    }

    pub fn explicit(c: DMatrix<f64>) -> Result<Self> {
        if c.nrows() != c.ncols() || c.nrows() == 0 {
            return Err(EventOpError::BadKernel(
                "overlap table must be square and non-empty".into(),
            ));
        }
        for i in 0..c.nrows() {
            if (c[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(EventOpError::BadKernel("diagonal must be 1".into()));
            }
            for j in 0..c.ncols() {
                let v = c[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(EventOpError::BadKernel(format!(
                        "entry ({i},{j}) = {v} outside [0, 1]"
                    )));
                }
                if (v - c[(j, i)]).abs() > 1e-12 {
                    return Err(EventOpError::BadKernel("table must be symmetric".into()));
                }
            }
        }
        Ok(Self {
            kind: KernelKind::Explicit { c },
        })
    }

    /// Overlap between rails `m` and `n` (zero outside an explicit table).
    pub fn value(&self, m: usize, n: usize) -> f64 {
        match &self.kind {
            KernelKind::Gaussian { kappa } => {
                let d = m.abs_diff(n) as f64;
                (-kappa * kappa * d * d).exp()
            }
            KernelKind::Explicit { c } => {
                if m < c.nrows() && n < c.ncols() {
                    c[(m, n)]
                } else {
                    0.0
                }
            }
        }
    }

    /// Separation beyond which the kernel is below `KERNEL_TOL`; `None` when
    /// it never decays that far (e.g. κ = 0).
    fn decay_band(&self) -> Option<usize> {
        match &self.kind {
            KernelKind::Gaussian { kappa } => {
                if *kappa <= 0.0 {
                    None
                } else {
                    let d = (-KERNEL_TOL.ln()).sqrt() / kappa;
                    Some(d.ceil() as usize)
                }
            }
            KernelKind::Explicit { .. } => None,
        }
    }

    /// Largest rail index an explicit table can serve.
    fn max_index(&self) -> Option<usize> {
        match &self.kind {
            KernelKind::Gaussian { .. } => None,
            KernelKind::Explicit { c } => Some(c.nrows() - 1),
        }
    }

    fn check_covers(&self, terms: usize) -> Result<()> {
        if let Some(mx) = self.max_index() {
            if terms > mx + 1 {
                return Err(EventOpError::TruncationTooSmall {
                    tail: COEFF_TOL * (terms - mx - 1) as f64,
                });
            }
        }
        Ok(())
    }
}

/// Physical origin of a Gaussian kernel: a detector of temporal resolution
/// `sigma_t` looking at a loop of temporal size `delta_tau`.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalCoupling {
    pub sigma_t: f64,
    pub delta_tau: f64,
}

impl PhysicalCoupling {
    pub fn new(sigma_t: f64, delta_tau: f64) -> Result<Self> {
        if !(sigma_t > 0.0) || !(delta_tau >= 0.0) {
            return Err(EventOpError::BadCoupling);
        }
        Ok(Self { sigma_t, delta_tau })
    }

    /// Dimensionless decay rate: κ² = Δτ²/(8σ_t²).
    pub fn kappa(&self) -> f64 {
        self.delta_tau / (8f64.sqrt() * self.sigma_t)
    }
}

/// Gaussian kernel generated by a physical detector/loop pairing.
pub fn kernel_from_physical(p: PhysicalCoupling) -> CommutatorKernel {
    CommutatorKernel {
        kind: KernelKind::Gaussian { kappa: p.kappa() },
    }
}

/// Truncation controls: `x` bounds the kernel window |m−n| ≤ x used by the
/// fast factored evaluators; `direct_n` is the rail count for brute-force
/// quadruple sums.
#[derive(Debug, Clone, Copy)]
pub struct TruncationSpec {
    pub x: usize,
    pub direct_n: usize,
}

/// Rail coefficients of the loop output mode: `j₀ = −e^{−iφ}√(1−η)`,
/// `jₘ = η(e^{iφ}√(1−η))^{m−1}` for m ≥ 1, truncated at `COEFF_TOL`.
pub fn loop_coefficients(bs: BsParams) -> Result<Vec<C64>> {
    let s = (1.0 - bs.eta).sqrt();
    let e = Complex::from_polar(1.0, bs.phi);
    let t = e * s;
    let mut j = vec![-e.conj() * s];
    let mut geom = Complex::new(1.0, 0.0);
    loop {
        let jm = bs.eta * geom;
        if jm.norm() < COEFF_TOL {
            break;
        }
        j.push(jm);
        geom *= t;
        if j.len() >= MAX_TERMS {
            let tail = jm.norm() / (1.0 - t.norm()).max(f64::MIN_POSITIVE);
            return Err(EventOpError::TruncationTooSmall { tail });
        }
    }
    Ok(j)
}

/// Unitarily closed rail coefficients on `n + 1` rails: identical to
/// `loop_coefficients` except the last rail absorbs the remaining amplitude
/// so that Σ|c|² = 1 exactly.
pub fn closed_coefficients(bs: BsParams, n: usize) -> Vec<C64> {
    let s = (1.0 - bs.eta).sqrt();
    let e = Complex::from_polar(1.0, bs.phi);
    let t = e * s;
    let mut c = vec![-e.conj() * s];
    let mut geom = Complex::new(1.0, 0.0);
    for _ in 1..n {
        c.push(bs.eta * geom);
        geom *= t;
    }
    c.push(geom * bs.eta.sqrt());
    c
}

/// Kernel-weighted pair sums over a rail coefficient list:
/// `pair = Σ jₘjₙC_mn`, `flux = Σ j̄ₘjₙC_mn`,
/// `ortho = Σ j̄ₘjₙ√(1−C_mn²)`.
struct PairSums {
    pair: C64,
    flux: C64,
    ortho: C64,
}

fn kernel_pair_sums(j: &[C64], k: &CommutatorKernel) -> Result<PairSums> {
    k.check_covers(j.len())?;
    let l = j.len();
    let band = k.decay_band();
    let sum_j: C64 = j.iter().sum();
    let mut pair = C64::default();
    let mut flux = C64::default();
    // √(1−C²) tends to 1 at large separation, so sum its deviation from 1
    // (which decays like C²/2) and add |Σj|² afterwards
    let mut ortho_corr = C64::default();
    for m in 0..l {
        let (lo, hi) = match band {
            Some(b) => (m.saturating_sub(b), (m + b).min(l - 1)),
            None => (0, l - 1),
        };
        for n in lo..=hi {
            let c = k.value(m, n);
            pair += j[m] * j[n] * c;
            flux += j[m].conj() * j[n] * c;
            ortho_corr += j[m].conj() * j[n] * (1.0 - (1.0 - c * c).sqrt());
        }
    }
    let ortho = C64::new(sum_j.norm_sqr(), 0.0) - ortho_corr;
    Ok(PairSums { pair, flux, ortho })
}

/// Output moments of a Gaussian preparation sent through the loop
/// beamsplitter under a finite-overlap kernel.
#[derive(Debug, Clone)]
pub struct EoMoments {
    /// ⟨V′⟩ = e^{iΦ}α (kernel independent).
    pub mean_v: C64,
    /// ⟨V′V′⟩ including the coherent part.
    pub vv: C64,
    /// ⟨V′†V′⟩ including the coherent part.
    pub vdv: f64,
    /// e^{iΦ}, the summed rail amplitude.
    pub phase: C64,
    /// Σ jₘjₙC_mn — multiplies the ⟨δVδV⟩ fluctuation.
    pub pair_sum: C64,
    /// Re Σ j̄ₘjₙC_mn — multiplies the ⟨δV†δV⟩ fluctuation.
    pub flux_sum: f64,
    /// Single-mode Gaussian form of the output (Wigner grids via
    /// `gaussianctc::wigner_grid`).
    pub state: GaussianState,
    /// Number of rail coefficients kept.
    pub terms: usize,
}

/// Gaussian output moments for a loop beamsplitter whose rails overlap with
/// kernel `k`. The kernel window is chosen automatically so that every entry
/// above `KERNEL_TOL` is included; the truncation spec is accepted for
/// interface uniformity with the g² evaluators.
pub fn eo_gaussian_moments(
    bs: BsParams,
    prep: &GaussianPrep,
    k: &CommutatorKernel,
    _t: &TruncationSpec,
) -> Result<EoMoments> {
    let j = loop_coefficients(bs)?;
    let sums = kernel_pair_sums(&j, k)?;
    let phase = loop_phase(bs);
    let (p, q) = prep.pq();
    let mean_v = phase * prep.alpha;
    let vv_fluct = p * q * sums.pair;
    let vdv_fluct = q.norm_sqr() * sums.flux.re;
    let vv = vv_fluct + phase * phase * prep.alpha * prep.alpha;
    let vdv = vdv_fluct + prep.alpha.norm_sqr();
    let state = state_from_moments(mean_v, vv_fluct, vdv_fluct);
    Ok(EoMoments {
        mean_v,
        vv,
        vdv,
        phase,
        pair_sum: sums.pair,
        flux_sum: sums.flux.re,
        state,
        terms: j.len(),
    })
}

/// Photon-number conservation report for a single-photon input.
#[derive(Debug, Clone, Copy)]
pub struct PhotonConservation {
    /// ⟨n⟩ at the output; equals `x_factor` for a single photon.
    pub mean_n: f64,
    /// Σ j̄ₘjₙC_mn — multiplies ⟨V†V⟩; identically 1 for unitary rails.
    pub x_factor: f64,
    /// Σ j̄ₘjₙ√(1−C_mn²) — multiplies |⟨V⟩|²; identically 0.
    pub y_factor: f64,
}

pub fn eo_photon_number(
    bs: BsParams,
    k: &CommutatorKernel,
    _t: &TruncationSpec,
) -> Result<PhotonConservation> {
    let j = loop_coefficients(bs)?;
    let sums = kernel_pair_sums(&j, k)?;
    Ok(PhotonConservation {
        mean_n: sums.flux.re,
        x_factor: sums.flux.re,
        y_factor: sums.ortho.re,
    })
}

/// Evaluation strategy for the second-order correlation.
#[derive(Debug, Clone, Copy)]
pub enum G2Method {
    /// Brute-force quadruple sum over `n + 1` unitarily closed rails.
    Direct(usize),
    /// Factored pair-sum form with kernel window |m−n| ≤ x.
    Truncated(usize),
}

/// Second-order correlation g² of a single photon through the loop
/// beamsplitter (loop phase fixed at π/2), under overlap kernel `k`.
///
/// Both paths evaluate Σ c̄ₘc̄ₙcᵣcₛ⟨A†ₘA†ₙAᵣAₛ⟩ with the four-point overlap
/// `C_mr·C_ns + C_ms·C_nr − 2·C_mn·C_mr·C_ms`, normalized by ⟨n⟩². The
/// direct path enumerates all index quadruples (partitioned over the outer
/// index across workers, reduced in index order so results do not depend on
/// the worker count); the truncated path factors the sum through
/// `Bₘ = Σᵣ jᵣC_mr` as 2X̃² − 2Σ j̄ₘBₘ|Bₘ|² with X̃ = Σ j̄ₘBₘ.
pub fn eo_g2(eta: f64, k: &CommutatorKernel, method: G2Method) -> Result<f64> {
    let bs = BsParams {
        eta,
        phi: std::f64::consts::FRAC_PI_2,
    };
    match method {
        G2Method::Direct(n) => {
            let c = closed_coefficients(bs, n);
            k.check_covers(c.len())?;
            let len = c.len();
            let mut tab = DMatrix::zeros(len, len);
            for m in 0..len {
                for nn in 0..len {
                    tab[(m, nn)] = k.value(m, nn);
                }
            }
            let partial: Vec<C64> = (0..len)
                .into_par_iter()
                .map(|m| {
                    let mut acc = C64::default();
                    for nn in 0..len {
                        let cmn = tab[(m, nn)];
                        for r in 0..len {
                            let cmr = tab[(m, r)];
                            let cnr = tab[(nn, r)];
                            for s in 0..len {
                                let w = cmr * tab[(nn, s)] + tab[(m, s)] * cnr
                                    - 2.0 * cmn * cmr * tab[(m, s)];
                                acc += c[m].conj() * c[nn].conj() * c[r] * c[s] * w;
                            }
                        }
                    }
                    acc
                })
                .collect();
            let num: C64 = partial.iter().sum();
            let mut den = C64::default();
            for m in 0..len {
                for nn in 0..len {
                    den += c[m].conj() * c[nn] * tab[(m, nn)];
                }
            }
            Ok(num.re / (den.re * den.re))
        }
        G2Method::Truncated(x) => {
            let j = loop_coefficients(bs)?;
            k.check_covers(j.len())?;
            let s1: f64 = j.iter().map(|c| c.norm()).sum();
            let dropped = match &k.kind {
                KernelKind::Gaussian { kappa } => {
                    let d = (x + 1) as f64;
                    (-kappa * kappa * d * d).exp()
                }
                KernelKind::Explicit { .. } => 0.0,
            };
            let tail = dropped * s1.powi(4);
            if tail > 1e-8 {
                return Err(EventOpError::TruncationTooSmall { tail });
            }
            let l = j.len();
            let b: Vec<C64> = (0..l)
                .map(|m| {
                    let lo = m.saturating_sub(x);
                    let hi = (m + x).min(l - 1);
                    (lo..=hi).map(|r| j[r] * k.value(m, r)).sum()
                })
                .collect();
            let x_tilde: C64 = (0..l).map(|m| j[m].conj() * b[m]).sum();
            let third: C64 = (0..l).map(|m| j[m].conj() * b[m] * b[m].norm_sqr()).sum();
            let num = 2.0 * x_tilde * x_tilde - 2.0 * third;
            Ok(num.re / (x_tilde.re * x_tilde.re))
        }
    }
}

/// Which evaluation path to use for the open-loop interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OtcPath {
    /// Coefficient algebra on the eigenmode basis {A₀, B₀, D, E}.
    Generalized,
    /// Explicit four-rail circuit: preparations, copy beamsplitters, then a
    /// mismatch beamsplitter of transmission `C10` on the (A₀, D) pair.
    ExtendedCircuit,
}

/// Two-arm Gaussian output of the open-loop interpolation.
#[derive(Debug, Clone)]
pub struct OtcOutputs {
    /// Joint two-mode state (arm order: signal arm, ancilla arm).
    pub joint: GaussianState,
    pub arm_a: GaussianState,
    pub arm_b: GaussianState,
}

/// Operator in coefficient form c₀ + Σᵢ (uᵢ aᵢ + vᵢ aᵢ†) over four vacuum
/// modes, with substitution maps for each circuit element.
#[derive(Clone)]
struct ModeCoeffs {
    c0: C64,
    u: [C64; 4],
    v: [C64; 4],
}

impl ModeCoeffs {
    fn rail(i: usize) -> Self {
        let mut u = [C64::default(); 4];
        u[i] = C64::new(1.0, 0.0);
        Self {
            c0: C64::default(),
            u,
            v: [C64::default(); 4],
        }
    }

    /// Substitute aᵢ → Σⱼ M[i][j] aⱼ.
    fn linear(&self, m: &[[C64; 4]; 4]) -> Self {
        let mut u = [C64::default(); 4];
        let mut v = [C64::default(); 4];
        for i in 0..4 {
            for jj in 0..4 {
                u[jj] += self.u[i] * m[i][jj];
                v[jj] += self.v[i] * m[i][jj].conj();
            }
        }
        Self { c0: self.c0, u, v }
    }

    /// Substitute aᵢ → pᵢ aᵢ + qᵢ aᵢ† + dᵢ.
    fn prepare(&self, p: &[C64; 4], q: &[C64; 4], d: &[C64; 4]) -> Self {
        let mut out = Self {
            c0: self.c0,
            u: [C64::default(); 4],
            v: [C64::default(); 4],
        };
        for i in 0..4 {
            out.c0 += self.u[i] * d[i] + self.v[i] * d[i].conj();
            out.u[i] = self.u[i] * p[i] + self.v[i] * q[i].conj();
            out.v[i] = self.u[i] * q[i] + self.v[i] * p[i].conj();
        }
        out
    }
}

fn identity4() -> [[C64; 4]; 4] {
    let mut m = [[C64::default(); 4]; 4];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = C64::new(1.0, 0.0);
    }
    m
}

/// Assemble the joint two-mode Gaussian state from the coefficient forms of
/// the two output arms (symmetrized quadrature covariance).
fn joint_state(a: &ModeCoeffs, b: &ModeCoeffs) -> GaussianState {
    let mean = DVector::from_vec(vec![
        2.0 * a.c0.re,
        2.0 * a.c0.im,
        2.0 * b.c0.re,
        2.0 * b.c0.im,
    ]);
    // quadrature coefficient vectors: Q = Σ fᵢaᵢ + h.c., P = Σ gᵢaᵢ + h.c.
    let quad = |m: &ModeCoeffs| {
        let mut f = [C64::default(); 4];
        let mut g = [C64::default(); 4];
        for i in 0..4 {
            f[i] = m.u[i] + m.v[i].conj();
            g[i] = C64::new(0.0, -1.0) * (m.u[i] - m.v[i].conj());
        }
        [f, g]
    };
    let [fa, ga] = quad(a);
    let [fb, gb] = quad(b);
    let rows = [fa, ga, fb, gb];
    let mut cov = DMatrix::zeros(4, 4);
    for r in 0..4 {
        for c in 0..4 {
            let dot: C64 = (0..4).map(|i| rows[r][i] * rows[c][i].conj()).sum();
            cov[(r, c)] = dot.re;
        }
    }
    GaussianState {
        n_modes: 2,
        mean,
        cov,
    }
}

fn otc_coefficients(
    c10: f64,
    prep_a: &GaussianPrep,
    prep_b: &GaussianPrep,
    bs: BsParams,
    path: OtcPath,
) -> (ModeCoeffs, ModeCoeffs) {
    let zs = (1.0 - c10 * c10).max(0.0).sqrt();
    let (pa, qa) = prep_a.pq();
    let (pb, qb) = prep_b.pq();
    let se = bs.eta.sqrt();
    let so = (1.0 - bs.eta).sqrt();
    let e = Complex::from_polar(1.0, bs.phi);
    match path {
        OtcPath::Generalized => {
            // signal arm: h-coefficients split across the matched (A₀, B₀)
            // and orthogonal (D, E) parts of its rails
            let h = [
                se * prep_a.alpha + e * so * prep_b.alpha,
                se * pa,
                se * qa,
                e * so * pb,
                e * so * qb,
            ];
            let k = [
                se * prep_b.alpha - e.conj() * so * prep_a.alpha,
                -e.conj() * so * pa,
                -e.conj() * so * qa,
                se * pb,
                se * qb,
            ];
            let a = ModeCoeffs {
                c0: h[0],
                u: [c10 * h[1], c10 * h[3], zs * h[1], zs * h[3]],
                v: [c10 * h[2], c10 * h[4], zs * h[2], zs * h[4]],
            };
            let b = ModeCoeffs {
                c0: k[0],
                u: [k[1], k[3], C64::default(), C64::default()],
                v: [k[2], k[4], C64::default(), C64::default()],
            };
            (a, b)
        }
        OtcPath::ExtendedCircuit => {
            // rails [A₀, B₀, D, E]; gates in time order: per-rail
            // preparations (reduced displacements on the extra rails), copy
            // beamsplitters on (A₀,B₀) and (D,E), then the mismatch
            // beamsplitter on (A₀, D). Outputs read on D and B₀.
            let bar = if zs > 0.0 { (1.0 - c10) / zs } else { 0.0 };
            let mut mix = identity4();
            mix[0][0] = C64::new(zs, 0.0);
            mix[0][2] = C64::new(-c10, 0.0);
            mix[2][0] = C64::new(c10, 0.0);
            mix[2][2] = C64::new(zs, 0.0);
            let mut copy = [[C64::default(); 4]; 4];
            for (x, y) in [(0usize, 1usize), (2, 3)] {
                copy[x][x] = C64::new(se, 0.0);
                copy[x][y] = e * so;
                copy[y][y] = C64::new(se, 0.0);
                copy[y][x] = -e.conj() * so;
            }
            let p = [pa, pb, pa, pb];
            let q = [qa, qb, qa, qb];
            let d = [
                prep_a.alpha,
                prep_b.alpha,
                bar * prep_a.alpha,
                bar * prep_b.alpha,
            ];
            // Heisenberg evolution: substitute the last gate first
            let run = |start: usize| {
                ModeCoeffs::rail(start)
                    .linear(&mix)
                    .linear(&copy)
                    .prepare(&p, &q, &d)
            };
            (run(2), run(1))
        }
    }
}

/// Open-loop ("no self-interaction") outputs as a function of the rail
/// overlap `c10`: `c10 = 0` gives the full anomalous-squeezing outputs,
/// `c10 = 1` gives ordinary displacement-only evolution, and both evaluation
/// paths agree componentwise in between.
pub fn eo_otc_interpolation(
    c10: f64,
    prep_a: &GaussianPrep,
    prep_b: &GaussianPrep,
    bs: BsParams,
    path: OtcPath,
) -> Result<OtcOutputs> {
    if !(0.0..=1.0).contains(&c10) {
        return Err(EventOpError::BadOverlap);
    }
    let (a, b) = otc_coefficients(c10, prep_a, prep_b, bs, path);
    let joint = joint_state(&a, &b);
    let arm_a = joint.mode(0);
    let arm_b = joint.mode(1);
    Ok(OtcOutputs {
        joint,
        arm_a,
        arm_b,
    })
}

pub const GRAVITATIONAL_CONSTANT: f64 = 6.674e-11;
pub const EARTH_MASS_KG: f64 = 5.972e24;
pub const EARTH_RADIUS_M: f64 = 6.371e6;
pub const SPEED_OF_LIGHT_M_PER_S: f64 = 2.998e8;

/// Gravitational time-dilation scenario: a vertical loop of height `h`
/// accumulates a round-trip time offset Δt, which a detector of resolution
/// `sigma_t` converts into a rail-overlap decay rate κ and a nearest-rail
/// overlap `C01 = exp(−κ²)`.
#[derive(Debug, Clone, Copy)]
pub struct GravityScenario {
    pub h: f64,
    pub delta_t: f64,
    pub kappa: f64,
    pub c01: f64,
}

pub fn gravity_scenario(h: f64, sigma_t: f64) -> Result<GravityScenario> {
    if !(h >= 0.0) || !(sigma_t > 0.0) {
        return Err(EventOpError::BadCoupling);
    }
    let gm2_c3 = 2.0 * GRAVITATIONAL_CONSTANT * EARTH_MASS_KG / SPEED_OF_LIGHT_M_PER_S.powi(3);
    let delta_t = gm2_c3 * ((EARTH_RADIUS_M + h) / EARTH_RADIUS_M).ln();
    let kappa = PhysicalCoupling::new(sigma_t, delta_t)?.kappa();
    Ok(GravityScenario {
        h,
        delta_t,
        kappa,
        c01: (-kappa * kappa).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gaussian_kernel_matches_the_advertised_values() {
        let k = kernel_from_physical(PhysicalCoupling::new(1.0, 0.0).unwrap());
        assert_eq!(k.value(3, 7), 1.0);
        let k1 = CommutatorKernel::gaussian(1.0).unwrap();
        assert_abs_diff_eq!(k1.value(4, 5), (-1.0f64).exp(), epsilon = 1e-15);
        let k10 = CommutatorKernel::gaussian(10.0).unwrap();
        assert!(k10.value(0, 1) < 1e-43);
        assert_eq!(k10.value(2, 2), 1.0);
    }

    #[test]
    fn physical_coupling_sets_kappa_squared_to_delta_tau_sq_over_eight_sigma_sq() {
        let p = PhysicalCoupling::new(2e-13, 4.6e-13).unwrap();
        let kappa = p.kappa();
        assert_abs_diff_eq!(
            kappa * kappa,
            p.delta_tau * p.delta_tau / (8.0 * p.sigma_t * p.sigma_t),
            epsilon = 1e-15
        );
    }

    #[test]
    fn explicit_kernels_are_validated() {
        assert!(CommutatorKernel::explicit(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.5, 0.5, 1.0]
        ))
        .is_ok());
        assert!(CommutatorKernel::explicit(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 1.5, 1.5, 1.0]
        ))
        .is_err());
        assert!(CommutatorKernel::explicit(DMatrix::from_row_slice(
            2,
            2,
            &[1.0, 0.4, 0.5, 1.0]
        ))
        .is_err());
        assert!(CommutatorKernel::explicit(DMatrix::from_row_slice(
            2,
            2,
            &[0.9, 0.5, 0.5, 1.0]
        ))
        .is_err());
    }

    #[test]
    fn rail_coefficients_rebuild_the_summed_loop_amplitude() {
        for (eta, phi) in [(0.3, 0.7), (0.8, 2.4), (0.5, std::f64::consts::PI)] {
            let bs = BsParams { eta, phi };
            let j = loop_coefficients(bs).unwrap();
            let sum: C64 = j.iter().sum();
            assert!((sum - loop_phase(bs)).norm() < 1e-10);
        }
    }

    #[test]
    fn closed_coefficients_are_exactly_unit_norm() {
        for n in [1usize, 5, 40] {
            for eta in [0.1, 0.5, 1.0] {
                let c = closed_coefficients(BsParams { eta, phi: 1.0 }, n);
                assert_eq!(c.len(), n + 1);
                let w: f64 = c.iter().map(|x| x.norm_sqr()).sum();
                assert_abs_diff_eq!(w, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn g2_vanishes_at_the_decoupled_endpoints() {
        let k = CommutatorKernel::gaussian(1.3).unwrap();
        for eta in [0.0, 1.0] {
            assert!(eo_g2(eta, &k, G2Method::Truncated(10)).unwrap().abs() < 1e-10);
            assert!(eo_g2(eta, &k, G2Method::Direct(20)).unwrap().abs() < 1e-10);
        }
    }

    #[test]
    fn window_too_small_for_a_flat_kernel_is_reported() {
        let k = CommutatorKernel::gaussian(0.001).unwrap();
        match eo_g2(0.4, &k, G2Method::Truncated(5)) {
            Err(EventOpError::TruncationTooSmall { tail }) => assert!(tail > 1e-8),
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn gravity_scenario_limits() {
        let g = gravity_scenario(0.0, 2e-13).unwrap();
        assert_eq!(g.delta_t, 0.0);
        assert_eq!(g.c01, 1.0);
        // a tabletop-height loop: κ² ≈ 6.7e−11, far below any observable
        // decorrelation
        let g1 = gravity_scenario(1.0, 2e-13).unwrap();
        assert!((g1.c01 - 1.0).abs() < 1e-9);
        assert!(gravity_scenario(-1.0, 2e-13).is_err());
        assert!(gravity_scenario(1.0, 0.0).is_err());
    }

    #[test]
    fn interpolation_rejects_overlaps_outside_the_unit_interval() {
        let prep = GaussianPrep::coherent(C64::new(0.2, 0.0));
        let bs = BsParams { eta: 0.5, phi: 0.0 };
        assert!(eo_otc_interpolation(1.2, &prep, &prep, bs, OtcPath::Generalized).is_err());
        assert!(eo_otc_interpolation(-0.1, &prep, &prep, bs, OtcPath::Generalized).is_err());
    }
}
