//! Dense complex linear algebra and finite-dimensional quantum primitives:
//! density matrices with subsystem structure, unitaries, Kraus channels,
//! partial traces, entropies and trace distances.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use thiserror::Error;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGENVALUE_TOL: f64 = -1e-10;
pub const UNITARITY_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros inside `entropy`.
pub const ENTROPY_CLAMP: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("subsystem index out of range: {index} (have {count} subsystems)")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("unknown gate: {0}")]
    UnknownGate(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
}

pub type Result<T> = std::result::Result<T, QcoreError>;

pub fn c(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    Complex::new(re, 0.0)
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let mut evs: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    evs.sort_by(f64::total_cmp);
    evs
}

/// Eigendecomposition of a Hermitian matrix: (eigenvalues, eigenvector columns).
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = m.clone().symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// A density matrix over a list of finite-dimensional subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMat,
}

impl DensityMatrix {
    /// Wraps a matrix without validating positivity; call `validate` to check
    /// the full invariants (intermediate arithmetic may transiently violate them).
    pub fn new(dims: Vec<usize>, data: CMat) -> Result<Self> {
        let d: usize = dims.iter().product();
        if data.nrows() != d || data.ncols() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                got: data.nrows(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn from_pure(dims: Vec<usize>, ket: &CVec) -> Result<Self> {
        let d: usize = dims.iter().product();
        if ket.len() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                got: ket.len(),
            });
        }
        let norm = ket.norm();
        let psi = ket / cr(norm);
        let rho = &psi * psi.adjoint();
        Self::new(dims, rho)
    }

    pub fn basis_state(dims: Vec<usize>, index: usize) -> Result<Self> {
        let d: usize = dims.iter().product();
        if index >= d {
            return Err(QcoreError::IndexOutOfRange {
                index,
                count: d,
            });
        }
        let mut ket = CVec::zeros(d);
        ket[index] = cr(1.0);
        Self::from_pure(dims, &ket)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        let data = CMat::identity(d, d) * cr(1.0 / d as f64);
        Self { dims, data }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Checks Hermiticity, unit trace and positivity (within tolerances).
    pub fn validate(&self) -> Result<()> {
        let herm = max_abs_diff(&self.data, &self.data.adjoint());
        if herm > HERMITICITY_TOL {
            return Err(QcoreError::InvalidState(format!(
                "not Hermitian: deviation {herm:.3e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(QcoreError::InvalidState(format!("trace {tr} != 1")));
        }
        let min_ev = hermitian_eigenvalues(&self.data)
            .first()
            .copied()
            .unwrap_or(0.0);
        if min_ev < EIGENVALUE_TOL {
            return Err(QcoreError::InvalidState(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            data: self.data.kronecker(&other.data),
        }
    }

    /// Partial trace keeping the listed subsystems (in their original order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        for &k in keep {
            if k >= n {
                return Err(QcoreError::IndexOutOfRange { index: k, count: n });
            }
        }
        let mut keep_sorted: Vec<usize> = keep.to_vec();
        keep_sorted.sort_unstable();
        keep_sorted.dedup();
        let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();

        let keep_dims: Vec<usize> = keep_sorted.iter().map(|&i| self.dims[i]).collect();
        let dk: usize = keep_dims.iter().product();
        let dt: usize = traced.iter().map(|&i| self.dims[i]).product();

        // Strides of each subsystem in the row-major composite index.
        let mut strides = vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.dims[i + 1];
        }
        let flatten = |multi_keep: usize, multi_tr: usize| -> usize {
            let mut idx = 0;
            let mut mk = multi_keep;
            for (pos, &s) in keep_sorted.iter().enumerate().rev() {
                let d = self.dims[s];
                let _ = pos;
                idx += (mk % d) * strides[s];
                mk /= d;
            }
            let mut mt = multi_tr;
            for &s in traced.iter().rev() {
                let d = self.dims[s];
                idx += (mt % d) * strides[s];
                mt /= d;
            }
            idx
        };

        let mut out = CMat::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = c(0.0, 0.0);
                for t in 0..dt {
                    acc += self.data[(flatten(i, t), flatten(j, t))];
                }
                out[(i, j)] = acc;
            }
        }
        DensityMatrix::new(keep_dims, out)
    }

    pub fn evolve(&self, u: &UnitaryOp) -> Result<DensityMatrix> {
        if u.dim() != self.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                got: u.dim(),
            });
        }
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            data: &u.data * &self.data * u.data.adjoint(),
        })
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        hermitian_eigenvalues(&self.data)
            .into_iter()
            .filter(|&l| l >= ENTROPY_CLAMP)
            .map(|l| -l * l.log2())
            .sum()
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        let diff = &self.data - &other.data;
        Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
    }

    /// Reorders subsystems: `perm[k]` is the original index that moves to slot `k`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<DensityMatrix> {
        let (new_dims, p) = permutation_matrix(&self.dims, perm)?;
        Ok(DensityMatrix {
            dims: new_dims,
            data: &p * &self.data * p.adjoint(),
        })
    }

    /// Convex mixture (1−w)·self + w·other.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(DensityMatrix {
            dims: self.dims.clone(),
            data: &self.data * cr(1.0 - w) + &other.data * cr(w),
        })
    }
}

/// A unitary operator over a list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp {
    dims: Vec<usize>,
    data: CMat,
}

impl UnitaryOp {
    pub fn new(dims: Vec<usize>, data: CMat) -> Result<Self> {
        let d: usize = dims.iter().product();
        if data.nrows() != d || data.ncols() != d {
            return Err(QcoreError::DimensionMismatch {
                expected: d,
                got: data.nrows(),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            dims,
            data: CMat::identity(d, d),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        let dev = max_abs_diff(&(self.data.adjoint() * &self.data), &CMat::identity(d, d));
        if dev > UNITARITY_TOL {
            return Err(QcoreError::InvalidState(format!(
                "not unitary: deviation {dev:.3e}"
            )));
        }
        Ok(())
    }

    pub fn tensor(&self, other: &UnitaryOp) -> UnitaryOp {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        UnitaryOp {
            dims,
            data: self.data.kronecker(&other.data),
        }
    }

    /// self ∘ other (apply `other` first).
    pub fn compose(&self, other: &UnitaryOp) -> Result<UnitaryOp> {
        if self.dim() != other.dim() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(UnitaryOp {
            dims: self.dims.clone(),
            data: &self.data * &other.data,
        })
    }

    pub fn adjoint(&self) -> UnitaryOp {
        UnitaryOp {
            dims: self.dims.clone(),
            data: self.data.adjoint(),
        }
    }

    /// Reorders subsystems: `perm[k]` is the original index that moves to slot `k`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<UnitaryOp> {
        let (new_dims, p) = permutation_matrix(&self.dims, perm)?;
        Ok(UnitaryOp {
            dims: new_dims,
            data: &p * &self.data * p.adjoint(),
        })
    }

    /// The wire-permutation unitary P|i_0 i_1 …⟩ = |i_{perm[0]} i_{perm[1]} …⟩.
    pub fn permutation(dims: Vec<usize>, perm: &[usize]) -> Result<UnitaryOp> {
        let (_, p) = permutation_matrix(&dims, perm)?;
        Ok(UnitaryOp { dims, data: p })
    }
}

/// Permutation matrix P with P|i_0 i_1 …⟩ = |i_{perm[0]} i_{perm[1]} …⟩.
fn permutation_matrix(dims: &[usize], perm: &[usize]) -> Result<(Vec<usize>, CMat)> {
    let n = dims.len();
    if perm.len() != n {
        return Err(QcoreError::DimensionMismatch {
            expected: n,
            got: perm.len(),
        });
    }
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n {
            return Err(QcoreError::IndexOutOfRange { index: p, count: n });
        }
        if seen[p] {
            return Err(QcoreError::InvalidState(format!("duplicate index {p} in permutation")));
        }
        seen[p] = true;
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let d: usize = dims.iter().product();

    let mut old_strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    let mut new_strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        new_strides[i] = new_strides[i + 1] * new_dims[i + 1];
    }

    let mut p_mat = CMat::zeros(d, d);
    for old in 0..d {
        let mut new_idx = 0usize;
        for (slot, &src) in perm.iter().enumerate() {
            let digit = (old / old_strides[src]) % dims[src];
            new_idx += digit * new_strides[slot];
        }
        p_mat[(new_idx, old)] = cr(1.0);
    }
    Ok((new_dims, p_mat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

/// Builds a standard gate by name. Rotations take `ROT(theta, axis)` via
/// `rotation_gate`; here `name` covers the fixed set.
pub fn standard_gate(name: &str) -> Result<UnitaryOp> {
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let m = match name {
        "I" => CMat::identity(2, 2),
        "X" => CMat::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        "Y" => CMat::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]),
        "Z" => CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
        "H" => CMat::from_row_slice(2, 2, &[cr(s2), cr(s2), cr(s2), cr(-s2)]),
        "CNOT" => {
            let mut m = CMat::identity(4, 4);
            m[(2, 2)] = cr(0.0);
            m[(3, 3)] = cr(0.0);
            m[(2, 3)] = cr(1.0);
            m[(3, 2)] = cr(1.0);
            m
        }
        "SWAP" => {
            let mut m = CMat::zeros(4, 4);
            m[(0, 0)] = cr(1.0);
            m[(1, 2)] = cr(1.0);
            m[(2, 1)] = cr(1.0);
            m[(3, 3)] = cr(1.0);
            m
        }
        "CSIGN" => {
            let mut m = CMat::identity(4, 4);
            m[(3, 3)] = cr(-1.0);
            m
        }
        other => return Err(QcoreError::UnknownGate(other.to_string())),
    };
    let dims = if m.nrows() == 2 { vec![2] } else { vec![2, 2] };
    UnitaryOp::new(dims, m)
}

/// exp(−iθ·σ_axis/2) on a single qubit.
pub fn rotation_gate(theta: f64, axis: RotationAxis) -> UnitaryOp {
    let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let m = match axis {
        RotationAxis::X => CMat::from_row_slice(
            2,
            2,
            &[cr(ct), c(0.0, -st), c(0.0, -st), cr(ct)],
        ),
        RotationAxis::Y => CMat::from_row_slice(2, 2, &[cr(ct), cr(-st), cr(st), cr(ct)]),
        RotationAxis::Z => CMat::from_row_slice(
            2,
            2,
            &[c(ct, -st), cr(0.0), cr(0.0), c(ct, st)],
        ),
    };
    UnitaryOp::new(vec![2], m).expect("2x2 rotation")
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(QcoreError::InvalidState("no Kraus operators".into()));
        }
        Ok(Self { kraus })
    }

    pub fn kraus_ops(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn dim_in(&self) -> usize {
        self.kraus[0].ncols()
    }

    pub fn dim_out(&self) -> usize {
        self.kraus[0].nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.dim_in();
        let mut acc = CMat::zeros(d, d);
        for f in &self.kraus {
            acc += f.adjoint() * f;
        }
        let dev = max_abs_diff(&acc, &CMat::identity(d, d));
        if dev > UNITARITY_TOL {
            return Err(QcoreError::InvalidState(format!(
                "Kraus completeness deviation {dev:.3e}"
            )));
        }
        Ok(())
    }

    pub fn apply(&self, rho: &DensityMatrix, out_dims: Vec<usize>) -> Result<DensityMatrix> {
        if rho.dim() != self.dim_in() {
            return Err(QcoreError::DimensionMismatch {
                expected: self.dim_in(),
                got: rho.dim(),
            });
        }
        let mut out = CMat::zeros(self.dim_out(), self.dim_out());
        for f in &self.kraus {
            out += f * rho.data() * f.adjoint();
        }
        DensityMatrix::new(out_dims, out)
    }
}

/// Common single-qubit kets.
pub mod kets {
    use super::{c, cr, CVec};

    pub fn ket0() -> CVec {
        CVec::from_vec(vec![cr(1.0), cr(0.0)])
    }
    pub fn ket1() -> CVec {
        CVec::from_vec(vec![cr(0.0), cr(1.0)])
    }
    pub fn ket_plus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![cr(s), cr(s)])
    }
    pub fn ket_minus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![cr(s), cr(-s)])
    }
    pub fn ket_y_plus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![cr(s), c(0.0, s)])
    }
    pub fn ket_y_minus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CVec::from_vec(vec![cr(s), c(0.0, -s)])
    }
    pub fn kron(a: &CVec, b: &CVec) -> CVec {
        let mut out = CVec::zeros(a.len() * b.len());
        for i in 0..a.len() {
            for j in 0..b.len() {
                out[i * b.len() + j] = a[i] * b[j];
            }
        }
        out
    }
}
