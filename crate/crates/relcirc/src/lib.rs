//! Mode-mismatch effects in single-photon circuits.
//!
//! A photonic qubit is a single photon shared across two rails; its gates are
//! implemented against a reference pump amplitude. When a photon's wavepacket
//! does not perfectly overlap the reference — because of timing errors or
//! relativistic distortion — the qubit behaves as a superposition of a
//! perfectly matched component (which sees every gate) and a perfectly
//! orthogonal component (which slips through entangling gates untouched).
//! This crate provides the overlap amplitude for Lorentz-boosted Gaussian
//! wavepackets, the doubled-space circuit simulation that propagates both
//! components, and the worked two-qubit CNOT example.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type Result<T> = std::result::Result<T, RelError>;

#[derive(Debug, Error)]
pub enum RelError {
    #[error("invalid envelope: need sigma > 0, k0 > 0, |v| < 1")]
    BadEnvelope,
    #[error("invalid circuit: {0}")]
    BadCircuit(String),
    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),
}

/// Gaussian momentum-space envelope `h(k) ∝ exp(−(k−k0)²/σ²)` carried by a
/// wavepacket moving at velocity `v` (units c = 1, 1+1 dimensions).
#[derive(Debug, Clone, Copy)]
pub struct GaussianEnvelope {
    /// Momentum-space width in the wavepacket's rest frame.
    pub sigma: f64,
    /// Carrier momentum.
    pub k0: f64,
    /// Wavepacket center position.
    pub x_center: f64,
    /// Velocity relative to the lab.
    pub v: f64,
}

impl GaussianEnvelope {
    pub fn new(sigma: f64, k0: f64, x_center: f64, v: f64) -> Result<Self> {
        if !(sigma > 0.0) || !(k0 > 0.0) || !(v.abs() < 1.0) {
            return Err(RelError::BadEnvelope);
        }
        Ok(Self {
            sigma,
            k0,
            x_center,
            v,
        })
    }

    /// Width as seen from a frame in which the packet moves at `v_rel`:
    /// σ̄ = σ/(γ(1+v)) — Doppler compression toward the observer.
    pub fn boosted_width(sigma: f64, v_rel: f64) -> f64 {
        let gamma = 1.0 / (1.0 - v_rel * v_rel).sqrt();
        sigma / (gamma * (1.0 + v_rel))
    }
}

/// Relative velocity of `a` with respect to `b` (relativistic composition).
fn relative_velocity(a: f64, b: f64) -> f64 {
    (a - b) / (1.0 - a * b)
}

/// Overlap amplitude ζ between a (possibly boosted) source wavepacket and a
/// reference wavepacket, displaced by `dx` on the interaction hypersurface:
/// ζ = √(2σσ̄/(σ²+σ̄²))·exp(−σ²σ̄²dx²/(4(σ²+σ̄²)) + ik₀dx), with σ̄ the
/// source width Doppler-compressed by the relative velocity. Because only
/// the relative velocity enters, the overlap is frame-symmetric.
pub fn lorentz_overlap(source: &GaussianEnvelope, reference: &GaussianEnvelope, dx: f64) -> C64 {
    let v_rel = relative_velocity(source.v, reference.v);
    let sig = reference.sigma;
    let bar = GaussianEnvelope::boosted_width(source.sigma, v_rel);
    let dx_total = dx + (reference.x_center - source.x_center);
    let denom = sig * sig + bar * bar;
    let modulus = (2.0 * sig * bar / denom).sqrt()
        * (-(sig * sig * bar * bar * dx_total * dx_total) / (4.0 * denom)).exp();
    Complex::from_polar(modulus, reference.k0 * dx_total)
}

/// Independent numerical evaluation of the same overlap as a momentum-space
/// integral ∫dk √(2/(πσσ̄))·exp(−(k−k0)²(σ²+σ̄²)/(σσ̄)² + ik·dx), via
/// composite Simpson quadrature. Serves as an oracle for `lorentz_overlap`.
pub fn lorentz_overlap_quadrature(
    source: &GaussianEnvelope,
    reference: &GaussianEnvelope,
    dx: f64,
) -> C64 {
    let v_rel = relative_velocity(source.v, reference.v);
    let sig = reference.sigma;
    let bar = GaussianEnvelope::boosted_width(source.sigma, v_rel);
    let dx_total = dx + (reference.x_center - source.x_center);
    let k0 = reference.k0;
    let a = (sig * sig + bar * bar) / (sig * sig * bar * bar);
    let width = 1.0 / a.sqrt();
    let half_range = 12.0 * width;
    // resolve both the Gaussian width and the e^{ik·dx} oscillation
    let oscillations = (half_range * dx_total.abs() / std::f64::consts::PI).ceil() as usize;
    let mut n = (4000 + 40 * oscillations).max(4000);
    if n % 2 == 1 {
        n += 1;
    }
    let lo = k0 - half_range;
    let step = 2.0 * half_range / n as f64;
    let norm = (2.0 / (std::f64::consts::PI * sig * bar)).sqrt();
    let f = |k: f64| -> C64 {
        let d = k - k0;
        norm * (C64::new(-a * d * d, k * dx_total)).exp()
    };
    let mut acc = f(lo) + f(lo + 2.0 * half_range);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + step * i as f64);
    }
    acc * (step / 3.0)
}

/// Dual-rail Pauli operators built from the two-mode single-photon sector.
#[derive(Debug, Clone)]
pub struct PauliTable {
    pub i: Matrix2<C64>,
    pub x: Matrix2<C64>,
    pub y: Matrix2<C64>,
    pub z: Matrix2<C64>,
}

/// Construct the Pauli operators of a dual-rail qubit from the mode algebra:
/// J_x = a†b + b†a, J_y = −i(a†b − b†a), J_z = a†a − b†b, restricted to the
/// single-photon sector {|10⟩, |01⟩}.
pub fn pauli_from_modes() -> PauliTable {
    // two modes, occupation cutoff 1 per mode in the single-photon sector;
    // build the mode operators on the 4-dim {|00⟩,|01⟩,|10⟩,|11⟩} space
    let dim = 4;
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    let mut b = DMatrix::<C64>::zeros(dim, dim);
    // basis index = 2·n_a + n_b
    for na in 0..2 {
        for nb in 0..2 {
            let idx = 2 * na + nb;
            if na == 1 {
                a[(2 * (na - 1) + nb, idx)] = C64::new(1.0, 0.0);
            }
            if nb == 1 {
                b[(2 * na + (nb - 1), idx)] = C64::new(1.0, 0.0);
            }
        }
    }
    let ad = a.adjoint();
    let bd = b.adjoint();
    let jx = &ad * &b + &bd * &a;
    let jy = (&ad * &b - &bd * &a) * C64::new(0.0, -1.0);
    let jz = &ad * &a - &bd * &b;
    // single-photon sector: |1⟩_L = |10⟩ (index 2), |0⟩_L... the logical
    // basis is ordered {|10⟩, |01⟩} = indices {2, 1}
    let sector = [2usize, 1usize];
    let restrict = |m: &DMatrix<C64>| {
        Matrix2::from_fn(|r, c| m[(sector[r], sector[c])])
    };
    PauliTable {
        i: Matrix2::identity(),
        x: restrict(&jx),
        y: restrict(&jy),
        z: restrict(&jz),
    }
}

/// Pauli label for building observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> Matrix2<C64> {
        let t = pauli_from_modes();
        match self {
            Pauli::I => t.i,
            Pauli::X => t.x,
            Pauli::Y => t.y,
            Pauli::Z => t.z,
        }
    }
}

/// Circuit element: arbitrary single-qubit unitaries plus the entangling
/// CSIGN (controlled sign flip).
#[derive(Debug, Clone)]
pub enum Gate {
    Single { qubit: usize, u: Matrix2<C64> },
    CSign { a: usize, b: usize },
}

/// A circuit whose qubits each carry a scalar overlap ζ with the gate
/// reference amplitude.
#[derive(Debug, Clone)]
pub struct MismatchCircuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub zetas: Vec<C64>,
}

impl MismatchCircuit {
    fn validate(&self) -> Result<()> {
        if self.zetas.len() != self.n_qubits {
            return Err(RelError::BadCircuit(format!(
                "{} overlaps for {} qubits",
                self.zetas.len(),
                self.n_qubits
            )));
        }
        for z in &self.zetas {
            if z.norm() > 1.0 + 1e-12 {
                return Err(RelError::BadCircuit(format!("|zeta| = {} > 1", z.norm())));
            }
        }
        for g in &self.gates {
            match g {
                Gate::Single { qubit, u } => {
                    if *qubit >= self.n_qubits {
                        return Err(RelError::BadCircuit(format!("qubit {qubit} out of range")));
                    }
                    let dev = (u.adjoint() * u - Matrix2::identity()).norm();
                    if dev > 1e-10 {
                        return Err(RelError::UnsupportedGate(format!(
                            "single-qubit gate is not unitary (deviation {dev:.2e})"
                        )));
                    }
                }
                Gate::CSign { a, b } => {
                    if *a >= self.n_qubits || *b >= self.n_qubits || a == b {
                        return Err(RelError::BadCircuit(format!(
                            "CSIGN pair ({a},{b}) invalid"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Local basis of the doubled space per qubit: index = 2·sector + logical,
/// where sector 0 is the matched component and sector 1 the orthogonal one.
fn local_index(sector: usize, logical: usize) -> usize {
    2 * sector + logical
}

fn apply_local(state: &mut DVector<C64>, n: usize, q: usize, m: &Matrix4<C64>) {
    let dim = state.len();
    let shift = 2 * q;
    let mask = 3usize << shift;
    let mut out = DVector::<C64>::zeros(dim);
    for idx in 0..dim {
        let amp = state[idx];
        if amp == C64::default() {
            continue;
        }
        let loc = (idx & mask) >> shift;
        for new_loc in 0..4 {
            let coeff = m[(new_loc, loc)];
            if coeff != C64::default() {
                let new_idx = (idx & !mask) | (new_loc << shift);
                out[new_idx] += coeff * amp;
            }
        }
    }
    let _ = n;
    *state = out;
}

/// Expectation of a per-qubit Pauli observable on the mismatch circuit.
///
/// Each qubit lives on a 4-dim doubled space (matched ⊕ orthogonal). The
/// input is all-|0⟩ matched; the mismatch rotation V(ζ) moves amplitude
/// √(1−|ζ|²) into the orthogonal sector. Single-qubit gates act on both
/// sectors; CSIGN flips the sign only when both participating qubits are
/// logical 1 *and* both are in the matched sector. Detectors are blind to
/// the sector, so observables act on the logical part of both sectors.
pub fn extended_expectation(circ: &MismatchCircuit, observable: &[Pauli]) -> Result<f64> {
    circ.validate()?;
    if observable.len() != circ.n_qubits {
        return Err(RelError::BadCircuit(format!(
            "{} observable labels for {} qubits",
            observable.len(),
            circ.n_qubits
        )));
    }
    let n = circ.n_qubits;
    let dim = 1usize << (2 * n);
    let mut state = DVector::<C64>::zeros(dim);
    state[0] = C64::new(1.0, 0.0);
    // mismatch rotations
    for q in 0..n {
        let z = circ.zetas[q];
        let s = (1.0 - z.norm_sqr()).max(0.0).sqrt();
        let mut v = Matrix4::<C64>::zeros();
        for logical in 0..2 {
            let m0 = local_index(0, logical);
            let m1 = local_index(1, logical);
            v[(m0, m0)] = z;
            v[(m0, m1)] = C64::new(s, 0.0);
            v[(m1, m0)] = C64::new(-s, 0.0);
            v[(m1, m1)] = z.conj();
        }
        apply_local(&mut state, n, q, &v);
    }
    // circuit proper
    for g in &circ.gates {
        match g {
            Gate::Single { qubit, u } => {
                let mut m = Matrix4::<C64>::zeros();
                for sector in 0..2 {
                    for r in 0..2 {
                        for c in 0..2 {
                            m[(local_index(sector, r), local_index(sector, c))] = u[(r, c)];
                        }
                    }
                }
                apply_local(&mut state, n, *qubit, &m);
            }
            Gate::CSign { a, b } => {
                for idx in 0..dim {
                    let la = (idx >> (2 * a)) & 3;
                    let lb = (idx >> (2 * b)) & 3;
                    // local index 1 = matched sector, logical 1
                    if la == 1 && lb == 1 {
                        state[idx] = -state[idx];
                    }
                }
            }
        }
    }
    // observable: Pauli on the logical part, identity on the sector
    let mut obs_state = state.clone();
    for (q, p) in observable.iter().enumerate() {
        if *p == Pauli::I {
            continue;
        }
        let u = p.matrix();
        let mut m = Matrix4::<C64>::zeros();
        for sector in 0..2 {
            for r in 0..2 {
                for c in 0..2 {
                    m[(local_index(sector, r), local_index(sector, c))] = u[(r, c)];
                }
            }
        }
        apply_local(&mut obs_state, n, q, &m);
    }
    let val: C64 = state
        .iter()
        .zip(obs_state.iter())
        .map(|(s, o)| s.conj() * o)
        .sum();
    Ok(val.re)
}

fn hadamard() -> Matrix2<C64> {
    let h = 1.0 / 2f64.sqrt();
    Matrix2::new(
        C64::new(h, 0.0),
        C64::new(h, 0.0),
        C64::new(h, 0.0),
        C64::new(-h, 0.0),
    )
}

/// The worked example: Alice prepares √(1−α²)|0⟩ + α|1⟩ and applies a CNOT
/// onto Bob's |0⟩ qubit, but Bob's photon is boosted by `v` and displaced by
/// `dx`, so the entangling gate only couples to the overlapping part of his
/// wavepacket. Returns ⟨I₁Z₂⟩ = 1 − 2α²|ζ|².
pub fn relativistic_cnot(alpha: f64, v: f64, dx: f64, sigma: f64, k0: f64) -> Result<f64> {
    if alpha.abs() > 1.0 {
        return Err(RelError::BadCircuit(format!(
            "preparation amplitude {alpha} outside [-1, 1]"
        )));
    }
    let reference = GaussianEnvelope::new(sigma, k0, 0.0, 0.0)?;
    let source = GaussianEnvelope::new(sigma, k0, 0.0, v)?;
    let zeta = lorentz_overlap(&source, &reference, dx);
    let c = (1.0 - alpha * alpha).sqrt();
    let prep = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-alpha, 0.0),
        C64::new(alpha, 0.0),
        C64::new(c, 0.0),
    );
    let circ = MismatchCircuit {
        n_qubits: 2,
        gates: vec![
            Gate::Single { qubit: 0, u: prep },
            Gate::Single {
                qubit: 1,
                u: hadamard(),
            },
            Gate::CSign { a: 0, b: 1 },
            Gate::Single {
                qubit: 1,
                u: hadamard(),
            },
        ],
        zetas: vec![C64::new(1.0, 0.0), zeta],
    };
    extended_expectation(&circ, &[Pauli::I, Pauli::Z])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dual_rail_paulis_act_as_expected() {
        let t = pauli_from_modes();
        // X exchanges the rails: |1⟩_L = |10⟩ ↔ |0⟩_L = |01⟩
        assert_abs_diff_eq!((t.x * Matrix2::identity().column(0)).norm(), 1.0);
        assert_eq!(t.x[(1, 0)], C64::new(1.0, 0.0));
        assert_eq!(t.x[(0, 1)], C64::new(1.0, 0.0));
        assert_eq!(t.z[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(t.z[(1, 1)], C64::new(-1.0, 0.0));
        let comm = t.x * t.y - t.y * t.x;
        let want = t.z * C64::new(0.0, 2.0);
        assert!((comm - want).norm() < 1e-12);
        let comm_yz = t.y * t.z - t.z * t.y;
        assert!((comm_yz - t.x * C64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn perfect_match_gives_unit_overlap() {
        let e = GaussianEnvelope::new(1.3, 5.0, 0.0, 0.0).unwrap();
        let z = lorentz_overlap(&e, &e, 0.0);
        assert!((z - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn stationary_displacement_matches_the_closed_form() {
        let sigma = 0.8;
        let e = GaussianEnvelope::new(sigma, 4.0, 0.0, 0.0).unwrap();
        for dx in [0.5, 1.0, 3.0] {
            let z = lorentz_overlap(&e, &e, dx);
            assert_abs_diff_eq!(
                z.norm(),
                (-sigma * sigma * dx * dx / 8.0).exp(),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn extreme_boost_kills_the_overlap() {
        let reference = GaussianEnvelope::new(1.0, 5.0, 0.0, 0.0).unwrap();
        // the prefactor falls off like √(σ̄/σ) ~ 1/√(γ(1+v))
        let fast = GaussianEnvelope::new(1.0, 5.0, 0.0, 0.999_999).unwrap();
        assert!(lorentz_overlap(&fast, &reference, 0.0).norm() < 5e-2);
        let faster = GaussianEnvelope::new(1.0, 5.0, 0.0, 0.999_999_999_9).unwrap();
        assert!(lorentz_overlap(&faster, &reference, 0.0).norm() < 5e-3);
    }

    #[test]
    fn no_mismatch_reproduces_the_ideal_circuit() {
        // Bell-type circuit, ⟨Z₁Z₂⟩ on (|00⟩+|11⟩)/√2 = 1
        let circ = MismatchCircuit {
            n_qubits: 2,
            gates: vec![
                Gate::Single {
                    qubit: 0,
                    u: hadamard(),
                },
                Gate::Single {
                    qubit: 1,
                    u: hadamard(),
                },
                Gate::CSign { a: 0, b: 1 },
                Gate::Single {
                    qubit: 1,
                    u: hadamard(),
                },
            ],
            zetas: vec![C64::new(1.0, 0.0); 2],
        };
        let zz = extended_expectation(&circ, &[Pauli::Z, Pauli::Z]).unwrap();
        assert_abs_diff_eq!(zz, 1.0, epsilon = 1e-12);
        let zi = extended_expectation(&circ, &[Pauli::Z, Pauli::I]).unwrap();
        assert_abs_diff_eq!(zi, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_overlap_deletes_the_entangler() {
        let mut circ = MismatchCircuit {
            n_qubits: 2,
            gates: vec![
                Gate::Single {
                    qubit: 0,
                    u: hadamard(),
                },
                Gate::Single {
                    qubit: 1,
                    u: hadamard(),
                },
                Gate::CSign { a: 0, b: 1 },
                Gate::Single {
                    qubit: 1,
                    u: hadamard(),
                },
            ],
            zetas: vec![C64::default(); 2],
        };
        let with = extended_expectation(&circ, &[Pauli::Z, Pauli::Z]).unwrap();
        circ.gates.remove(2);
        circ.zetas = vec![C64::new(1.0, 0.0); 2];
        let without = extended_expectation(&circ, &[Pauli::Z, Pauli::Z]).unwrap();
        assert_abs_diff_eq!(with, without, epsilon = 1e-12);
    }

    #[test]
    fn single_qubit_circuits_ignore_the_mismatch() {
        let u = Matrix2::new(
            C64::new(0.6, 0.0),
            C64::new(-0.8, 0.0),
            C64::new(0.8, 0.0),
            C64::new(0.6, 0.0),
        );
        let mut vals = vec![];
        for z in [1.0, 0.7, 0.0] {
            let circ = MismatchCircuit {
                n_qubits: 1,
                gates: vec![Gate::Single { qubit: 0, u }],
                zetas: vec![C64::new(z, 0.0)],
            };
            vals.push(extended_expectation(&circ, &[Pauli::Z]).unwrap());
        }
        assert_abs_diff_eq!(vals[0], vals[1], epsilon = 1e-12);
        assert_abs_diff_eq!(vals[0], vals[2], epsilon = 1e-12);
    }

    #[test]
    fn non_unitary_gates_are_rejected() {
        let circ = MismatchCircuit {
            n_qubits: 1,
            gates: vec![Gate::Single {
                qubit: 0,
                u: Matrix2::new(
                    C64::new(1.0, 0.0),
                    C64::new(1.0, 0.0),
                    C64::new(0.0, 0.0),
                    C64::new(1.0, 0.0),
                ),
            }],
            zetas: vec![C64::new(1.0, 0.0)],
        };
        assert!(matches!(
            extended_expectation(&circ, &[Pauli::Z]),
            Err(RelError::UnsupportedGate(_))
        ));
    }

    #[test]
    fn cnot_endpoints() {
        let a = 0.6;
        let ideal = relativistic_cnot(a, 0.0, 0.0, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(ideal, 1.0 - 2.0 * a * a, epsilon = 1e-12);
        // α = 0: Z on |0⟩ regardless of mismatch
        let z0 = relativistic_cnot(0.0, 0.9, 3.0, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(z0, 1.0, epsilon = 1e-12);
        // huge displacement: the gate never happens
        let gone = relativistic_cnot(a, 0.0, 200.0, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(gone, 1.0, epsilon = 1e-9);
    }
}
