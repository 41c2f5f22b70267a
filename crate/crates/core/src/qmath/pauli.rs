use serde::{Deserialize, Serialize};

use super::linalg::{ComplexMatrix, C64, I, ONE, ZERO};
use crate::error::{invalid_arg, Result};

/// Maximum qubit count of a bit-mask Pauli label.
pub const MAX_PAULI_QUBITS: usize = 64;

/// Signed Weyl operator `sign · i^{a·b} X^{a_1}Z^{b_1} ⊗ … ⊗ X^{a_n}Z^{b_n}`.
///
/// Bit `k` of the masks (counted from the most significant of the `n` bits)
/// belongs to qubit `k`, matching the basis-index convention of the dense
/// routines. With this phase every label is Hermitian and squares to the
/// identity: `(1,1)` on one qubit is `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliWeyl {
    n: usize,
    x: u64,
    z: u64,
    sign: i8,
}

fn pow_i(k: u32) -> C64 {
    match k % 4 {
        0 => ONE,
        1 => I,
        2 => -ONE,
        _ => -I,
    }
}

impl PauliWeyl {
    pub fn from_masks(n: usize, x: u64, z: u64, sign: i8) -> Result<Self> {
        if n > MAX_PAULI_QUBITS {
            return invalid_arg(format!(
                "Pauli labels support at most {MAX_PAULI_QUBITS} qubits"
            ));
        }
        if sign != 1 && sign != -1 {
            return invalid_arg("Pauli sign must be +1 or -1");
        }
        let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        if x & !full != 0 || z & !full != 0 {
            return invalid_arg("Pauli mask has bits beyond the qubit count");
        }
        Ok(PauliWeyl { n, x, z, sign })
    }

    /// Build from bit vectors `a` (X part) and `b` (Z part).
    pub fn new(a: &[bool], b: &[bool], sign: i8) -> Result<Self> {
        if a.len() != b.len() {
            return invalid_arg("Weyl label parts must have equal length");
        }
        let n = a.len();
        let mut x = 0u64;
        let mut z = 0u64;
        for k in 0..n {
            let bit = 1u64 << (n - 1 - k);
            if a[k] {
                x |= bit;
            }
            if b[k] {
                z |= bit;
            }
        }
        Self::from_masks(n, x, z, sign)
    }

    pub fn identity(n: usize) -> Self {
        PauliWeyl {
            n,
            x: 0,
            z: 0,
            sign: 1,
        }
    }

    /// Parse labels such as `"XIZ"`, `"-YY"` or `"+ZZ"`.
    pub fn from_label(label: &str) -> Result<Self> {
        let (sign, body) = match label.as_bytes().first() {
            Some(b'-') => (-1, &label[1..]),
            Some(b'+') => (1, &label[1..]),
            _ => (1, label),
        };
        let mut a = Vec::with_capacity(body.len());
        let mut b = Vec::with_capacity(body.len());
        for c in body.chars() {
            let (xa, zb) = match c {
                'I' => (false, false),
                'X' => (true, false),
                'Y' => (true, true),
                'Z' => (false, true),
                other => return invalid_arg(format!("unknown Pauli letter {other:?}")),
            };
            a.push(xa);
            b.push(zb);
        }
        Self::new(&a, &b, sign)
    }

    /// Single-qubit Pauli letter at qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: char) -> Result<Self> {
        let mut s = vec!['I'; n];
        s[q] = letter;
        Self::from_label(&s.into_iter().collect::<String>())
    }

    pub fn label(&self) -> String {
        let mut s = String::with_capacity(self.n + 1);
        if self.sign < 0 {
            s.push('-');
        }
        for k in 0..self.n {
            let bit = 1u64 << (self.n - 1 - k);
            s.push(match (self.x & bit != 0, self.z & bit != 0) {
                (false, false) => 'I',
                (true, false) => 'X',
                (true, true) => 'Y',
                (false, true) => 'Z',
            });
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1usize << self.n
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn a(&self) -> Vec<bool> {
        (0..self.n)
            .map(|k| self.x >> (self.n - 1 - k) & 1 == 1)
            .collect()
    }

    pub fn b(&self) -> Vec<bool> {
        (0..self.n)
            .map(|k| self.z >> (self.n - 1 - k) & 1 == 1)
            .collect()
    }

    pub fn with_sign(mut self, sign: i8) -> Self {
        self.sign = if sign < 0 { -1 } else { 1 };
        self
    }

    pub fn negated(mut self) -> Self {
        self.sign = -self.sign;
        self
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Index of the unsigned label among the `4^n` labels.
    pub fn label_index(&self) -> u128 {
        ((self.x as u128) << self.n) | self.z as u128
    }

    /// All `4^n` unsigned labels.
    pub fn all(n: usize) -> impl Iterator<Item = PauliWeyl> {
        let count = 1u64 << (2 * n);
        let low = (1u64 << n) - 1;
        (0..count).map(move |i| PauliWeyl {
            n,
            x: i >> n,
            z: i & low,
            sign: 1,
        })
    }

    pub fn commutes_with(&self, other: &PauliWeyl) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Product `self · other = i^k · W` with `W` positively signed times the
    /// returned sign folded in; `k` is returned separately when odd.
    pub fn mul(&self, other: &PauliWeyl) -> (u32, PauliWeyl) {
        debug_assert_eq!(self.n, other.n);
        let x = self.x ^ other.x;
        let z = self.z ^ other.z;
        let mut k = (self.x & self.z).count_ones()
            + (other.x & other.z).count_ones()
            + 2 * (self.z & other.x).count_ones()
            + 4 * self.n as u32
            - (x & z).count_ones();
        if self.sign * other.sign < 0 {
            k += 2;
        }
        let k = k % 4;
        let sign = if k >= 2 { -1 } else { 1 };
        (
            k % 2,
            PauliWeyl {
                n: self.n,
                x,
                z,
                sign,
            },
        )
    }

    /// Product of commuting labels, which is again a signed label.
    pub fn mul_commuting(&self, other: &PauliWeyl) -> Result<PauliWeyl> {
        let (odd, p) = self.mul(other);
        if odd != 0 {
            return invalid_arg("product of anticommuting Paulis is not Hermitian");
        }
        Ok(p)
    }

    /// Matrix entry coefficient for the column `col`: `W|col⟩ = c |col ⊕ x⟩`.
    #[inline]
    pub fn column_coefficient(&self, col: usize) -> C64 {
        let phase = (self.x & self.z).count_ones() + 2 * (self.z & col as u64).count_ones();
        let c = pow_i(phase);
        if self.sign < 0 {
            -c
        } else {
            c
        }
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; v.len()];
        for (col, amp) in v.iter().enumerate() {
            out[col ^ self.x as usize] = self.column_coefficient(col) * amp;
        }
        out
    }

    /// `⟨v|W|v⟩`.
    pub fn expectation_vec(&self, v: &[C64]) -> f64 {
        let xm = self.x as usize;
        v.iter()
            .enumerate()
            .map(|(col, amp)| (v[col ^ xm].conj() * self.column_coefficient(col) * amp).re)
            .sum()
    }

    /// `tr[ρ W]` for a dense matrix `ρ`.
    pub fn trace_with(&self, rho: &ComplexMatrix) -> C64 {
        let xm = self.x as usize;
        (0..rho.nrows())
            .map(|col| rho[(col, col ^ xm)] * self.column_coefficient(col))
            .sum()
    }

    pub fn dense(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for col in 0..d {
            m[(col ^ self.x as usize, col)] = self.column_coefficient(col);
        }
        m
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &PauliWeyl) -> Result<PauliWeyl> {
        let n = self.n + other.n;
        Self::from_masks(
            n,
            (self.x << other.n) | other.x,
            (self.z << other.n) | other.z,
            self.sign * other.sign,
        )
    }
}

/// `W_x` for `x = (a, b)` as an observable.
pub fn weyl_operator(a: &[bool], b: &[bool], sign: i8) -> Result<super::states::Observable> {
    Ok(super::states::Observable::pauli(PauliWeyl::new(
        a, b, sign,
    )?))
}

impl std::fmt::Display for PauliWeyl {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{identity, max_abs_diff, pauli_x, pauli_y, pauli_z, trace};

    #[test]
    fn single_qubit_labels() {
        let y = PauliWeyl::new(&[true], &[true], 1).unwrap();
        assert!(max_abs_diff(&y.dense(), &pauli_y()) < 1e-15);
        assert!(max_abs_diff(&PauliWeyl::from_label("X").unwrap().dense(), &pauli_x()) < 1e-15);
        assert!(max_abs_diff(&PauliWeyl::from_label("Z").unwrap().dense(), &pauli_z()) < 1e-15);
        assert!(max_abs_diff(&PauliWeyl::identity(1).dense(), &identity(2)) < 1e-15);
        assert_eq!(y.label(), "Y");
    }

    #[test]
    fn weyl_orthogonality_and_involution() {
        let n = 2;
        let labels: Vec<_> = PauliWeyl::all(n).collect();
        assert_eq!(labels.len(), 16);
        for p in &labels {
            let d = p.dense();
            assert!(max_abs_diff(&(&d * &d), &identity(4)) < 1e-14);
            assert!(max_abs_diff(&d, &d.adjoint()) < 1e-14);
            for q in &labels {
                let t = trace(&(&d * q.dense()));
                let expect = if p == q { 4.0 } else { 0.0 };
                assert!((t.re - expect).abs() < 1e-12 && t.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_matches_dense() {
        let labels: Vec<_> = PauliWeyl::all(2).collect();
        for p in &labels {
            for q in &labels {
                for s in [1, -1] {
                    let ps = p.with_sign(s);
                    let (odd, r) = ps.mul(q);
                    let phase = if odd == 1 { I } else { ONE };
                    let expect = ps.dense() * q.dense();
                    let got = r.dense() * phase;
                    assert!(max_abs_diff(&expect, &got) < 1e-14, "{ps} * {q}");
                    assert_eq!(p.commutes_with(q), odd == 0);
                }
            }
        }
    }

    #[test]
    fn expectation_routes_agree() {
        let v: Vec<C64> = (0..8)
            .map(|i| C64::new(0.1 * i as f64, 0.3 - 0.05 * i as f64))
            .collect();
        let rho = crate::qmath::linalg::outer(&v, &v);
        for p in PauliWeyl::all(3) {
            let e1 = p.expectation_vec(&v);
            let e2 = p.trace_with(&rho).re;
            let e3 = crate::qmath::linalg::quadratic_form(&p.dense(), &v);
            assert!((e1 - e2).abs() < 1e-12 && (e1 - e3).abs() < 1e-12);
        }
    }

    #[test]
    fn weyl_mean_identity() {
        // Σ_{x,y}⟨W_x⟩⟨W_y⟩tr[W_x W_y] / 4^n equals Σ_x⟨W_x⟩² / 2^n, both 1.
        let v: Vec<C64> = (0..4)
            .map(|i| C64::new(1.0 + i as f64, 0.5 * i as f64))
            .collect();
        let norm = crate::qmath::linalg::norm_sqr(&v).sqrt();
        let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
        let labels: Vec<_> = PauliWeyl::all(2).collect();
        let ev: Vec<f64> = labels.iter().map(|p| p.expectation_vec(&v)).collect();
        let mut lhs = 0.0;
        for (p, ep) in labels.iter().zip(&ev) {
            for (q, eq) in labels.iter().zip(&ev) {
                lhs += ep * eq * trace(&(p.dense() * q.dense())).re;
            }
        }
        lhs /= 16.0;
        let rhs: f64 = ev.iter().map(|e| e * e).sum::<f64>() / 4.0;
        assert!((lhs - rhs).abs() < 1e-12 && (rhs - 1.0).abs() < 1e-12);
        let id = weyl_operator(&[false, false], &[false, false], 1).unwrap();
        assert!(max_abs_diff(&id.matrix().unwrap(), &identity(4)) < 1e-15);
    }

    #[test]
    fn label_round_trip() {
        for l in ["XIZ", "-YY", "IIII", "ZXZX"] {
            assert_eq!(PauliWeyl::from_label(l).unwrap().label(), l);
        }
        assert!(PauliWeyl::from_label("XQ").is_err());
    }
}
