//! Dense complex linear algebra helpers built on nalgebra.

use std::sync::RwLock;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest operator dimension that is ever materialized densely.
pub const DENSE_DIM_LIMIT: usize = 1 << 12;

/// Numeric tolerances used by validating constructors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericPolicy {
    pub hermitian_tol: f64,
    pub trace_tol: f64,
    pub normalization_tol: f64,
    pub psd_tol: f64,
    pub op_norm_slack: f64,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        hermitian_tol: 1e-10,
        trace_tol: 1e-10,
        normalization_tol: 1e-10,
        psd_tol: 1e-9,
        op_norm_slack: 1e-9,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

static POLICY: RwLock<NumericPolicy> = RwLock::new(NumericPolicy::DEFAULT);

pub fn numeric_policy() -> NumericPolicy {
    *POLICY.read().unwrap_or_else(|e| e.into_inner())
}

pub fn set_numeric_policy(policy: NumericPolicy) {
    *POLICY.write().unwrap_or_else(|e| e.into_inner()) = policy;
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

pub fn hadamard() -> ComplexMatrix {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[h, h, h, -h])
}

pub fn phase_s() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I])
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn tensor_all<'a>(ms: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    ms.into_iter().fold(identity(1), |acc, m| acc.kronecker(m))
}

pub fn tensor_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// `tr[a b]` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermiticity_defect(m) <= tol
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    u.is_square() && max_abs_diff(&(u.adjoint() * u), &identity(u.nrows())) <= tol
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let h = hermitian_part(m);
    let eig = nalgebra::SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = ComplexMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_column(k, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = nalgebra::SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V f(D) V†` for a Hermitian input.
pub fn hermitian_function(m: &ComplexMatrix, f: impl Fn(f64) -> C64) -> ComplexMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let mut scaled = vecs.clone();
    for (k, v) in vals.iter().enumerate() {
        let fv = f(*v);
        for r in 0..scaled.nrows() {
            scaled[(r, k)] *= fv;
        }
    }
    scaled * vecs.adjoint()
}

/// Matrix square root of a positive semidefinite matrix (negative
/// eigenvalues clipped to zero).
pub fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    hermitian_function(m, |v| C64::new(v.max(0.0).sqrt(), 0.0))
}

/// `exp(-i t H)` for Hermitian `H`.
pub fn unitary_evolution(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    hermitian_function(h, |v| C64::from_polar(1.0, -t * v))
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

/// Largest singular value.
pub fn op_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if is_hermitian(m, 1e-12) {
        let v = hermitian_eigenvalues(m);
        return v[0].abs().max(v[v.len() - 1].abs());
    }
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Sum of singular values.
pub fn trace_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().sum()
}

pub fn frobenius_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn check_square(m: &ComplexMatrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::DimensionMismatch {
            expected: m.nrows(),
            got: m.ncols(),
        })
    }
}

pub fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub fn check_finite(m: &ComplexMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "matrix has non-finite entries".into(),
        ))
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubits_of(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

pub fn mat_vec(m: &ComplexMatrix, v: &[C64]) -> Vec<C64> {
    let n = m.nrows();
    let mut out = vec![ZERO; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = ZERO;
        for (j, x) in v.iter().enumerate() {
            acc += m[(i, j)] * x;
        }
        *o = acc;
    }
    out
}

/// `⟨v|m|v⟩` (real part).
pub fn quadratic_form(m: &ComplexMatrix, v: &[C64]) -> f64 {
    let mv = mat_vec(m, v);
    inner(v, &mv).re
}

/// Outer product `|a⟩⟨b|`.
pub fn outer(a: &[C64], b: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
}

/// Apply a single-qubit or two-qubit gate to a state vector in place.
/// Qubit 0 is the most significant bit of the basis index.
pub fn apply_gate(state: &mut [C64], n: usize, gate: &ComplexMatrix, qubits: &[usize]) {
    let k = qubits.len();
    debug_assert_eq!(gate.nrows(), 1 << k);
    let masks: Vec<usize> = qubits.iter().map(|&q| 1usize << (n - 1 - q)).collect();
    let all: usize = masks.iter().sum();
    let dim = 1usize << n;
    let sub = 1usize << k;
    let mut idx = vec![0usize; sub];
    let mut buf = vec![ZERO; sub];
    for base in 0..dim {
        if base & all != 0 {
            continue;
        }
        for (s, slot) in idx.iter_mut().enumerate() {
            let mut i = base;
            for (b, m) in masks.iter().enumerate() {
                if (s >> (k - 1 - b)) & 1 == 1 {
                    i |= m;
                }
            }
            *slot = i;
        }
        for (s, &i) in idx.iter().enumerate() {
            buf[s] = state[i];
        }
        for (r, &i) in idx.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += gate[(r, c)] * b;
            }
            state[i] = acc;
        }
    }
}

/// Fast Walsh-Hadamard transform (applies `H^{⊗n}` in place).
pub fn walsh_hadamard(state: &mut [C64]) {
    let n = state.len();
    let scale = 1.0 / (n as f64).sqrt();
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let a = state[j];
                let b = state[j + h];
                state[j] = a + b;
                state[j + h] = a - b;
            }
        }
        h *= 2;
    }
    for z in state.iter_mut() {
        *z *= scale;
    }
}
