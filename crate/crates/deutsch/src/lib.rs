//! Self-consistent closed-loop circuit model: a circuit rail whose output
//! state must equal its input state. Provides the induced channel on the
//! loop rail, a fixed-point solver with maximum-entropy seeding, an explicit
//! unrolled-circuit oracle, entanglement-breaking maps, ancilla extensions
//! and two-loop variants.

use nalgebra::DMatrix;
use num_complex::Complex;
use qcore::{kets, standard_gate, CMat, DensityMatrix, QuantumChannel, UnitaryOp};
use thiserror::Error;

pub use qcore;

#[derive(Debug, Error)]
pub enum DeutschError {
    #[error(transparent)]
    Core(#[from] qcore::QcoreError),
    #[error("fixed-point iteration did not converge: residual {residual:.3e} after {iterations} iterations")]
    NotConverged {
        residual: f64,
        iterations: usize,
        last: Box<DensityMatrix>,
    },
    #[error("no simultaneous solution found for the two-loop system (residuals {residual_a:.3e}, {residual_b:.3e})")]
    NoSolution { residual_a: f64, residual_b: f64 },
}

pub type Result<T> = std::result::Result<T, DeutschError>;

fn cr(x: f64) -> Complex<f64> {
    Complex::new(x, 0.0)
}

/// A unitary interaction between a chronology-respecting register and a
/// looped register whose state is fixed by self-consistency.
#[derive(Debug, Clone)]
pub struct CtcCircuit {
    u: UnitaryOp,
    dims_cr: Vec<usize>,
    dims_ctc: Vec<usize>,
}

impl CtcCircuit {
    pub fn new(u: UnitaryOp, dims_cr: Vec<usize>, dims_ctc: Vec<usize>) -> Result<Self> {
        let d: usize = dims_cr.iter().chain(dims_ctc.iter()).product();
        if u.dim() != d {
            return Err(qcore::QcoreError::DimensionMismatch {
                expected: d,
                got: u.dim(),
            }
            .into());
        }
        Ok(Self { u, dims_cr, dims_ctc })
    }

    pub fn unitary(&self) -> &UnitaryOp {
        &self.u
    }

    pub fn dims_cr(&self) -> &[usize] {
        &self.dims_cr
    }

    pub fn dims_ctc(&self) -> &[usize] {
        &self.dims_ctc
    }

    pub fn d_cr(&self) -> usize {
        self.dims_cr.iter().product()
    }

    pub fn d_ctc(&self) -> usize {
        self.dims_ctc.iter().product()
    }

    fn joint_dims(&self) -> Vec<usize> {
        let mut dims = self.dims_cr.clone();
        dims.extend_from_slice(&self.dims_ctc);
        dims
    }

    fn ctc_indices(&self) -> Vec<usize> {
        (self.dims_cr.len()..self.dims_cr.len() + self.dims_ctc.len()).collect()
    }

    fn cr_indices(&self) -> Vec<usize> {
        (0..self.dims_cr.len()).collect()
    }

    /// One application of the induced loop-rail map x ↦ Tr_CR[U(ρ₁⊗x)U†].
    pub fn apply_loop_map(&self, rho1: &DensityMatrix, x: &DensityMatrix) -> Result<DensityMatrix> {
        let joint = DensityMatrix::new(
            self.joint_dims(),
            rho1.data().kronecker(x.data()),
        )?;
        let evolved = joint.evolve(&self.u)?;
        Ok(evolved.partial_trace(&self.ctc_indices())?)
    }

    /// The open-register output Tr_loop[U(ρ₁⊗ρ₂)U†] for a given loop state ρ₂.
    pub fn output_given(&self, rho1: &DensityMatrix, rho2: &DensityMatrix) -> Result<DensityMatrix> {
        let joint = DensityMatrix::new(
            self.joint_dims(),
            rho1.data().kronecker(rho2.data()),
        )?;
        let evolved = joint.evolve(&self.u)?;
        Ok(evolved.partial_trace(&self.cr_indices())?)
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointConfig {
    /// Trace-distance residual below which the iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Seed for the iteration; `None` means the maximally mixed state,
    /// which selects the maximum-entropy solution at degenerate points.
    pub seed_state: Option<DensityMatrix>,
    /// Averaging weight on the previous iterate (0 = plain iteration).
    pub damping: f64,
    /// Weight of the maximally-mixed admixture applied before each
    /// application of the loop map.
    pub noise_eps: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 100_000,
            seed_state: None,
            damping: 0.0,
            noise_eps: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub rho_ctc: DensityMatrix,
    pub iterations: usize,
    /// trace_distance(rho_ctc, M(rho_ctc)) against the noiseless loop map,
    /// recomputed at return.
    pub residual: f64,
    pub converged: bool,
}

/// Number of consecutive non-improving iterations before the iteration is
/// declared oscillatory.
const OSCILLATION_WINDOW: usize = 100;
/// Noise ladder used to recover a unique limit at degenerate points; the
/// solutions are extrapolated linearly back to zero noise.
const NOISE_LADDER: [f64; 3] = [1e-6, 1e-7, 1e-8];

enum IterOutcome {
    Converged(DensityMatrix, usize),
    Oscillating(DensityMatrix, usize),
    MaxIter(DensityMatrix, usize),
}

fn iterate_loop(
    circuit: &CtcCircuit,
    rho1: &DensityMatrix,
    seed: &DensityMatrix,
    tol: f64,
    max_iter: usize,
    damping: f64,
    noise_eps: f64,
) -> Result<IterOutcome> {
    let mixed = DensityMatrix::maximally_mixed(circuit.dims_ctc.clone());
    let mut x = seed.clone();
    let mut best = f64::INFINITY;
    let mut stall = 0usize;
    for it in 1..=max_iter {
        let input = if noise_eps > 0.0 {
            x.mix(&mixed, noise_eps)?
        } else {
            x.clone()
        };
        let mut y = circuit.apply_loop_map(rho1, &input)?;
        if damping > 0.0 {
            y = y.mix(&x, damping)?;
        }
        let r = y.trace_distance(&x)?;
        x = y;
        if r <= tol {
            return Ok(IterOutcome::Converged(x, it));
        }
        if r < best - tol {
            best = r;
            stall = 0;
        } else {
            stall += 1;
            if stall >= OSCILLATION_WINDOW {
                return Ok(IterOutcome::Oscillating(x, it));
            }
        }
    }
    Ok(IterOutcome::MaxIter(x, max_iter))
}

/// Entrywise linear extrapolation of the noise ladder solutions to zero noise.
fn extrapolate_to_zero(points: &[(f64, DensityMatrix)]) -> Result<DensityMatrix> {
    let dims = points[0].1.dims().to_vec();
    let d = points[0].1.dim();
    let n = points.len() as f64;
    let xbar = points.iter().map(|(e, _)| e).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|(e, _)| (e - xbar).powi(2)).sum();
    let mut out = CMat::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let ybar = points.iter().map(|(_, r)| r.data()[(i, j)]).sum::<Complex<f64>>() / cr(n);
            let sxy = points
                .iter()
                .map(|(e, r)| (r.data()[(i, j)] - ybar) * cr(e - xbar))
                .sum::<Complex<f64>>();
            let slope = sxy / cr(sxx);
            out[(i, j)] = ybar - slope * cr(xbar);
        }
    }
    // Re-hermitize; the fit is entrywise and can leave tiny asymmetries.
    let herm = (&out + out.adjoint()) * cr(0.5);
    Ok(DensityMatrix::new(dims, herm)?)
}

/// Solves the self-consistency condition ρ₂ = Tr_CR[U(ρ₁⊗ρ₂)U†] by iterating
/// the loop map from the maximally mixed seed. If the plain iteration
/// oscillates (degenerate loop map), retries with a small maximally-mixed
/// admixture over a decreasing ladder and extrapolates the admixture to zero;
/// the averaging step used in the retries preserves fixed points exactly.
pub fn solve_fixed_point(
    circuit: &CtcCircuit,
    rho1: &DensityMatrix,
    cfg: &FixedPointConfig,
) -> Result<FixedPointResult> {
    let seed = cfg
        .seed_state
        .clone()
        .unwrap_or_else(|| DensityMatrix::maximally_mixed(circuit.dims_ctc.clone()));

    let finish = |circuit: &CtcCircuit, rho: DensityMatrix, iters: usize, tol: f64| -> Result<FixedPointResult> {
        let residual = circuit.apply_loop_map(rho1, &rho)?.trace_distance(&rho)?;
        Ok(FixedPointResult {
            converged: residual <= tol.max(10.0 * cfg.noise_eps),
            rho_ctc: rho,
            iterations: iters,
            residual,
        })
    };

    match iterate_loop(
        circuit,
        rho1,
        &seed,
        cfg.tol,
        cfg.max_iter,
        cfg.damping,
        cfg.noise_eps,
    )? {
        IterOutcome::Converged(rho, it) => finish(circuit, rho, it, cfg.tol),
        IterOutcome::MaxIter(rho, it) => {
            let res = finish(circuit, rho, it, cfg.tol)?;
            if res.converged {
                Ok(res)
            } else {
                Err(DeutschError::NotConverged {
                    residual: res.residual,
                    iterations: it,
                    last: Box::new(res.rho_ctc),
                })
            }
        }
        IterOutcome::Oscillating(last, mut total_iters) => {
            if cfg.noise_eps > 0.0 {
                // Caller already requested noise; report honestly.
                let res = finish(circuit, last, total_iters, cfg.tol)?;
                if res.converged {
                    return Ok(res);
                }
                return Err(DeutschError::NotConverged {
                    residual: res.residual,
                    iterations: total_iters,
                    last: Box::new(res.rho_ctc),
                });
            }
            let mut ladder = Vec::with_capacity(NOISE_LADDER.len());
            for &eps in &NOISE_LADDER {
                let damping = cfg.damping.max(0.5);
                match iterate_loop(circuit, rho1, &seed, cfg.tol, cfg.max_iter, damping, eps)? {
                    IterOutcome::Converged(rho, it) => {
                        total_iters += it;
                        ladder.push((eps, rho));
                    }
                    IterOutcome::Oscillating(rho, it) | IterOutcome::MaxIter(rho, it) => {
                        total_iters += it;
                        let residual =
                            circuit.apply_loop_map(rho1, &rho)?.trace_distance(&rho)?;
                        return Err(DeutschError::NotConverged {
                            residual,
                            iterations: total_iters,
                            last: Box::new(rho),
                        });
                    }
                }
            }
            let rho0 = extrapolate_to_zero(&ladder)?;
            let res = finish(circuit, rho0, total_iters, cfg.tol)?;
            if res.converged {
                Ok(res)
            } else {
                Err(DeutschError::NotConverged {
                    residual: res.residual,
                    iterations: total_iters,
                    last: Box::new(res.rho_ctc),
                })
            }
        }
    }
}

/// The loop-rail channel x ↦ Tr_CR[U(ρ₁⊗x)U†] in explicit Kraus form
/// F_{i,k} = √p_k (⟨i|_CR ⊗ I) U (|ψ_k⟩_CR ⊗ I).
pub fn deutsch_map_channel(circuit: &CtcCircuit, rho1: &DensityMatrix) -> Result<QuantumChannel> {
    if rho1.dim() != circuit.d_cr() {
        return Err(qcore::QcoreError::DimensionMismatch {
            expected: circuit.d_cr(),
            got: rho1.dim(),
        }
        .into());
    }
    let (evals, evecs) = qcore::hermitian_eigen(rho1.data());
    let d_cr = circuit.d_cr();
    let d_ctc = circuit.d_ctc();
    let u = circuit.u.data();
    let mut kraus = Vec::new();
    for (k, &p) in evals.iter().enumerate() {
        if p < 1e-14 {
            continue;
        }
        let psi = evecs.column(k);
        // U · (|ψ_k⟩ ⊗ I): D×D_ctc, rows grouped into D_cr blocks of D_ctc.
        let mut m = DMatrix::zeros(d_cr * d_ctc, d_ctc);
        for row in 0..d_cr * d_ctc {
            for b in 0..d_ctc {
                let mut acc = Complex::new(0.0, 0.0);
                for j in 0..d_cr {
                    acc += u[(row, j * d_ctc + b)] * psi[j];
                }
                m[(row, b)] = acc;
            }
        }
        for i in 0..d_cr {
            let block = m.rows(i * d_ctc, d_ctc).into_owned() * cr(p.sqrt());
            kraus.push(block);
        }
    }
    Ok(QuantumChannel::new(kraus)?)
}

/// Full input–output map: solve the loop state, then read out the open register.
pub fn deutsch_output(
    circuit: &CtcCircuit,
    rho1: &DensityMatrix,
    cfg: &FixedPointConfig,
) -> Result<DensityMatrix> {
    let fp = solve_fixed_point(circuit, rho1, cfg)?;
    circuit.output_given(rho1, &fp.rho_ctc)
}

/// Replaces a bipartite state by the product of its marginals across the cut,
/// destroying all correlations while leaving each side's statistics intact.
/// Subsystems keep their original positions, so the map is idempotent for any cut.
pub fn otc_break(rho: &DensityMatrix, cut: &[usize]) -> Result<DensityMatrix> {
    let n = rho.dims().len();
    for &i in cut {
        if i >= n {
            return Err(qcore::QcoreError::IndexOutOfRange { index: i, count: n }.into());
        }
    }
    let side_a: Vec<usize> = cut.to_vec();
    let side_b: Vec<usize> = (0..n).filter(|i| !side_a.contains(i)).collect();
    if side_b.is_empty() {
        return Ok(rho.clone());
    }
    let rho_a = rho.partial_trace(&side_a)?;
    let rho_b = rho.partial_trace(&side_b)?;
    let product = rho_a.tensor(&rho_b);
    // product order is [A..., B...]; permute back to the original layout.
    let mut order: Vec<usize> = side_a.clone();
    order.extend_from_slice(&side_b);
    let mut perm = vec![0usize; n];
    for (slot_in_product, &orig) in order.iter().enumerate() {
        perm[orig] = slot_in_product;
    }
    Ok(product.permute_subsystems(&perm)?)
}

/// Sends subsystem A of σ_AR through the loop interaction U (acting on A and
/// the loop rail) while the ancilla R rides along untouched. The loop state is
/// solved from the reduced state of A alone, which is what makes the overall
/// map nonlinear and entanglement-sensitive.
pub fn extend_with_ancilla(
    circuit: &CtcCircuit,
    sigma_ar: &DensityMatrix,
    dims_a: &[usize],
    cfg: &FixedPointConfig,
) -> Result<DensityMatrix> {
    let n_a = dims_a.len();
    if sigma_ar.dims().len() < n_a || &sigma_ar.dims()[..n_a] != dims_a {
        return Err(qcore::QcoreError::DimensionMismatch {
            expected: dims_a.iter().product(),
            got: sigma_ar.dims().iter().take(n_a).product(),
        }
        .into());
    }
    let d_a: usize = dims_a.iter().product();
    if d_a != circuit.d_cr() {
        return Err(qcore::QcoreError::DimensionMismatch {
            expected: circuit.d_cr(),
            got: d_a,
        }
        .into());
    }
    let n_r = sigma_ar.dims().len() - n_a;
    let a_idx: Vec<usize> = (0..n_a).collect();
    let rho_a = sigma_ar.partial_trace(&a_idx)?;
    let fp = solve_fixed_point(circuit, &rho_a, cfg)?;

    // Build (A, R, loop) then reorder to (A, loop, R) so U⊗I_R applies directly.
    let full = sigma_ar.tensor(&fp.rho_ctc);
    let n_c = circuit.dims_ctc.len();
    let mut perm: Vec<usize> = (0..n_a).collect();
    perm.extend(n_a + n_r..n_a + n_r + n_c); // loop rails
    perm.extend(n_a..n_a + n_r); // ancilla
    let arranged = full.permute_subsystems(&perm)?;
    let id_r = UnitaryOp::identity(sigma_ar.dims()[n_a..].to_vec());
    let op = circuit.u.tensor(&id_r);
    let evolved = arranged.evolve(&op)?;
    // Trace out the loop rails and restore (A, R) order.
    let keep: Vec<usize> = (0..n_a).chain(n_a + n_c..n_a + n_c + n_r).collect();
    Ok(evolved.partial_trace(&keep)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiLoopPolicy {
    /// One consistency condition on the joint state of both loop rails.
    Joint,
    /// Independent consistency conditions on each rail's reduced state,
    /// enforced by alternating updates.
    Separate,
}

#[derive(Debug, Clone)]
pub enum MultiLoopResult {
    Joint(FixedPointResult),
    Separate {
        rail_a: FixedPointResult,
        rail_b: FixedPointResult,
    },
}

#[derive(Debug, Clone)]
pub struct MultiLoopCircuit {
    pub u: UnitaryOp,
    pub dims_cr: Vec<usize>,
    pub dims_ctc_a: Vec<usize>,
    pub dims_ctc_b: Vec<usize>,
}

pub fn multi_ctc_solve(
    circuit: &MultiLoopCircuit,
    rho1: &DensityMatrix,
    policy: MultiLoopPolicy,
    cfg: &FixedPointConfig,
) -> Result<MultiLoopResult> {
    match policy {
        MultiLoopPolicy::Joint => {
            let mut dims_ctc = circuit.dims_ctc_a.clone();
            dims_ctc.extend_from_slice(&circuit.dims_ctc_b);
            let single = CtcCircuit::new(circuit.u.clone(), circuit.dims_cr.clone(), dims_ctc)?;
            Ok(MultiLoopResult::Joint(solve_fixed_point(&single, rho1, cfg)?))
        }
        MultiLoopPolicy::Separate => {
            let n_cr = circuit.dims_cr.len();
            let n_a = circuit.dims_ctc_a.len();
            let n_b = circuit.dims_ctc_b.len();
            let a_idx: Vec<usize> = (n_cr..n_cr + n_a).collect();
            let b_idx: Vec<usize> = (n_cr + n_a..n_cr + n_a + n_b).collect();
            let mut joint_dims = circuit.dims_cr.clone();
            joint_dims.extend_from_slice(&circuit.dims_ctc_a);
            joint_dims.extend_from_slice(&circuit.dims_ctc_b);

            let step = |ra: &DensityMatrix, rb: &DensityMatrix, keep: &[usize]| -> Result<DensityMatrix> {
                let joint = DensityMatrix::new(
                    joint_dims.clone(),
                    rho1.data().kronecker(ra.data()).kronecker(rb.data()),
                )?;
                let reduced = joint.evolve(&circuit.u)?.partial_trace(keep)?;
                // Project back onto the physical set: the alternating scheme
                // feeds each rail's rounding error into the other rail through
                // the tensor product, where trace and Hermiticity deviations
                // compound multiplicatively and eventually overflow. The exact
                // dynamics preserve both, so removing them is loss-free.
                let herm = (reduced.data() + reduced.data().adjoint()) * cr(0.5);
                let tr = herm.trace().re;
                Ok(DensityMatrix::new(
                    reduced.dims().to_vec(),
                    herm * cr(1.0 / tr),
                )?)
            };

            let mut ra = DensityMatrix::maximally_mixed(circuit.dims_ctc_a.clone());
            let mut rb = DensityMatrix::maximally_mixed(circuit.dims_ctc_b.clone());
            let mut best = f64::INFINITY;
            let mut stall = 0usize;
            let mut iters = 0usize;
            loop {
                iters += 1;
                let ra_next = step(&ra, &rb, &a_idx)?;
                let rb_next = step(&ra_next, &rb, &b_idx)?;
                let res_a = step(&ra_next, &rb_next, &a_idx)?.trace_distance(&ra_next)?;
                let res_b = step(&ra_next, &rb_next, &b_idx)?.trace_distance(&rb_next)?;
                ra = ra_next;
                rb = rb_next;
                let r = res_a.max(res_b);
                if r <= cfg.tol {
                    return Ok(MultiLoopResult::Separate {
                        rail_a: FixedPointResult {
                            rho_ctc: ra,
                            iterations: iters,
                            residual: res_a,
                            converged: true,
                        },
                        rail_b: FixedPointResult {
                            rho_ctc: rb,
                            iterations: iters,
                            residual: res_b,
                            converged: true,
                        },
                    });
                }
                if r < best - cfg.tol {
                    best = r;
                    stall = 0;
                } else {
                    stall += 1;
                }
                if iters >= cfg.max_iter || stall >= OSCILLATION_WINDOW {
                    return Err(DeutschError::NoSolution {
                        residual_a: res_a,
                        residual_b: res_b,
                    });
                }
            }
        }
    }
}

/// The loop map as a matrix acting on column-stacked operators:
/// vec(M(x)) = S · vec(x). Intended for small loop dimensions (≤ 16) as an
/// independent cross-check of the iterative solver.
pub fn loop_superoperator(circuit: &CtcCircuit, rho1: &DensityMatrix) -> Result<CMat> {
    let d = circuit.d_ctc();
    let mut s = CMat::zeros(d * d, d * d);
    for k in 0..d {
        for l in 0..d {
            let mut unit = CMat::zeros(d, d);
            unit[(k, l)] = cr(1.0);
            // apply_loop_map is linear in x, so matrix units are fine even
            // though they are not states.
            let joint = rho1.data().kronecker(&unit);
            let u = circuit.u.data();
            let evolved = u * joint * u.adjoint();
            let d_cr = circuit.d_cr();
            let mut col = CMat::zeros(d, d);
            for a in 0..d {
                for b in 0..d {
                    let mut acc = Complex::new(0.0, 0.0);
                    for m in 0..d_cr {
                        acc += evolved[(m * d + a, m * d + b)];
                    }
                    col[(a, b)] = acc;
                }
            }
            for a in 0..d {
                for b in 0..d {
                    s[(b * d + a, l * d + k)] = col[(a, b)];
                }
            }
        }
    }
    Ok(s)
}

/// Orthonormal basis (as column-stacked operators) of the fixed-point
/// subspace of the loop map, computed from the null space of S − I via SVD.
pub fn spectral_fixed_point_basis(
    circuit: &CtcCircuit,
    rho1: &DensityMatrix,
    tol: f64,
) -> Result<Vec<CMat>> {
    let d = circuit.d_ctc();
    let s = loop_superoperator(circuit, rho1)?;
    let shifted = &s - CMat::identity(d * d, d * d);
    let svd = shifted.svd(false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let mut basis = Vec::new();
    for (i, sv) in svd.singular_values.iter().enumerate() {
        if *sv < tol {
            let row = vt.row(i);
            let mut m = CMat::zeros(d, d);
            for k in 0..d {
                for l in 0..d {
                    m[(k, l)] = row[l * d + k].conj();
                }
            }
            basis.push(m);
        }
    }
    Ok(basis)
}

/// Explicit linear oracle: feeds `n` fresh copies of ρ₁ through the
/// interaction, threading the loop rail from copy to copy starting at ρ₀,
/// optionally mixing in maximally mixed noise between copies. The final
/// copy's open-register output approximates the self-consistent output.
pub fn unroll_equivalent_circuit(
    circuit: &CtcCircuit,
    rho1: &DensityMatrix,
    n: usize,
    rho0: &DensityMatrix,
    noise_eps: f64,
) -> Result<DensityMatrix> {
    assert!(n >= 1, "need at least one copy");
    let mixed = DensityMatrix::maximally_mixed(circuit.dims_ctc.clone());
    let mut rail = rho0.clone();
    for _ in 0..n - 1 {
        let input = if noise_eps > 0.0 {
            rail.mix(&mixed, noise_eps)?
        } else {
            rail
        };
        rail = circuit.apply_loop_map(rho1, &input)?;
    }
    circuit.output_given(rho1, &rail)
}

/// CNOT with the open register as target, controlled by the loop rail,
/// followed by a SWAP of the two rails. With input |1⟩ the induced loop map
/// is bit-flip-plus-dephasing, whose unique fixed point is maximally mixed.
pub fn grandfather_circuit() -> CtcCircuit {
    let cnot_rev = standard_gate("CNOT")
        .unwrap()
        .permute_subsystems(&[1, 0])
        .unwrap();
    let swap = standard_gate("SWAP").unwrap();
    let u = swap.compose(&cnot_rev).unwrap();
    CtcCircuit::new(u, vec![2], vec![2]).unwrap()
}

/// The conjugate-basis orientation of the same two-gate circuit: CNOT with
/// the open register as control, then SWAP. With input |+⟩ the whole family
/// (I + b·X)/2 is self-consistent, exhibiting an underdetermined output.
pub fn info_paradox_circuit() -> CtcCircuit {
    let cnot = standard_gate("CNOT").unwrap();
    let swap = standard_gate("SWAP").unwrap();
    let u = swap.compose(&cnot).unwrap();
    CtcCircuit::new(u, vec![2], vec![2]).unwrap()
}

/// A loop rail the system itself traverses without self-interaction:
/// U = SWAP between a d-dimensional register and the loop.
pub fn pass_through_circuit(d: usize) -> CtcCircuit {
    let mut m = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = cr(1.0);
        }
    }
    let u = UnitaryOp::new(vec![d, d], m).unwrap();
    CtcCircuit::new(u, vec![d], vec![d]).unwrap()
}

/// A four-qubit loop circuit that maps the four preparations
/// {|00⟩, |10⟩, |+0⟩, |−0⟩} of (data, ancilla) to the computational basis
/// {|00⟩, |01⟩, |10⟩, |11⟩}: rotate the register conditioned on the loop
/// rail's basis state, then swap register and loop.
pub fn state_discrimination_circuit() -> CtcCircuit {
    let i2 = standard_gate("I").unwrap();
    let x = standard_gate("X").unwrap();
    let h = standard_gate("H").unwrap();
    let w0 = UnitaryOp::identity(vec![2, 2]);
    let w1 = standard_gate("SWAP").unwrap();
    let w2 = x.tensor(&i2).compose(&h.tensor(&i2)).unwrap();
    let w3 = i2.tensor(&x).compose(&h.tensor(&i2)).unwrap();

    let mut controlled = CMat::zeros(16, 16);
    for (j, w) in [w0, w1, w2, w3].iter().enumerate() {
        for r in 0..4 {
            for c in 0..4 {
                controlled[(r * 4 + j, c * 4 + j)] = w.data()[(r, c)];
            }
        }
    }
    let uc = UnitaryOp::new(vec![2, 2, 2, 2], controlled).unwrap();
    let swap_blocks = UnitaryOp::permutation(vec![2, 2, 2, 2], &[2, 3, 0, 1]).unwrap();
    let u = swap_blocks.compose(&uc).unwrap();
    CtcCircuit::new(u, vec![2, 2], vec![2, 2]).unwrap()
}

/// |Φ⁺⟩⟨Φ⁺| on two qubits.
pub fn bell_pair() -> DensityMatrix {
    let ket = kets::kron(&kets::ket0(), &kets::ket0()) + kets::kron(&kets::ket1(), &kets::ket1());
    DensityMatrix::from_pure(vec![2, 2], &ket).unwrap()
}
