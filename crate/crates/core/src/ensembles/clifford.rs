//! Clifford unitaries as Pauli conjugation tables, uniform sampling and
//! stabilizer groups.

use std::collections::{HashSet, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_budget, invalid_arg, Error, Result};
use crate::qmath::linalg::{self, ComplexMatrix, C64, ZERO};
use crate::qmath::pauli::PauliWeyl;
use crate::qmath::states::PureState;

/// Largest qubit count for dense Clifford synthesis.
pub const MAX_DENSE_CLIFFORD_QUBITS: usize = 6;

type Sv = (u64, u64);

fn sform(a: Sv, b: Sv) -> bool {
    ((a.0 & b.1).count_ones() + (a.1 & b.0).count_ones()) % 2 == 1
}

fn sv_xor(a: Sv, b: Sv) -> Sv {
    (a.0 ^ b.0, a.1 ^ b.1)
}

fn sv_key(v: Sv) -> u128 {
    ((v.0 as u128) << 64) | v.1 as u128
}

/// Independent subset spanning the same space.
fn span_basis(vs: &[Sv]) -> Vec<Sv> {
    let mut pivots: Vec<(u128, Sv)> = Vec::new();
    let mut out = Vec::new();
    for &v in vs {
        let mut r = v;
        for &(p, pv) in &pivots {
            if sv_key(r) & p != 0 {
                r = sv_xor(r, pv);
            }
        }
        let k = sv_key(r);
        if k != 0 {
            let top = 1u128 << (127 - k.leading_zeros());
            for entry in pivots.iter_mut() {
                if sv_key(entry.1) & top != 0 {
                    entry.1 = sv_xor(entry.1, r);
                }
            }
            pivots.push((top, r));
            out.push(v);
        }
    }
    out
}

/// Clifford unitary up to global phase, stored as the images
/// `U X_j U†` and `U Z_j U†` of the single-qubit generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliffordTableau {
    n: usize,
    x_images: Vec<PauliWeyl>,
    z_images: Vec<PauliWeyl>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let one = |k: usize, letter| PauliWeyl::single(n, k, letter).expect("valid qubit");
        CliffordTableau {
            n,
            x_images: (0..n).map(|k| one(k, 'X')).collect(),
            z_images: (0..n).map(|k| one(k, 'Z')).collect(),
        }
    }

    /// Validates the canonical commutation relations of the images.
    pub fn from_images(x_images: Vec<PauliWeyl>, z_images: Vec<PauliWeyl>) -> Result<Self> {
        let n = x_images.len();
        if z_images.len() != n || x_images.iter().chain(&z_images).any(|p| p.n() != n) {
            return invalid_arg("tableau needs n X-images and n Z-images on n qubits");
        }
        for i in 0..n {
            for j in 0..n {
                let ok = x_images[i].commutes_with(&x_images[j])
                    && z_images[i].commutes_with(&z_images[j])
                    && (x_images[i].commutes_with(&z_images[j]) != (i == j));
                if !ok {
                    return invalid_arg("images violate the Pauli commutation relations");
                }
            }
        }
        Ok(CliffordTableau {
            n,
            x_images,
            z_images,
        })
    }

    /// Uniformly random Clifford (up to phase).
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || n > crate::qmath::pauli::MAX_PAULI_QUBITS {
            return invalid_arg("Clifford sampling needs 1 <= n <= 64");
        }
        let bit = |k: usize| 1u64 << (n - 1 - k);
        let mut basis: Vec<Sv> = (0..n).flat_map(|k| [(bit(k), 0), (0, bit(k))]).collect();
        let mut xs = Vec::with_capacity(n);
        let mut zs = Vec::with_capacity(n);
        for _ in 0..n {
            let combo = |rng: &mut R| {
                basis.iter().fold((0u64, 0u64), |acc, &b| {
                    if rng.random::<bool>() {
                        sv_xor(acc, b)
                    } else {
                        acc
                    }
                })
            };
            let p = loop {
                let v = combo(rng);
                if v != (0, 0) {
                    break v;
                }
            };
            let q = loop {
                let v = combo(rng);
                if sform(p, v) {
                    break v;
                }
            };
            let projected: Vec<Sv> = basis
                .iter()
                .map(|&b| {
                    let mut c = b;
                    if sform(b, q) {
                        c = sv_xor(c, p);
                    }
                    if sform(b, p) {
                        c = sv_xor(c, q);
                    }
                    c
                })
                .collect();
            basis = span_basis(&projected);
            let sign = |rng: &mut R| if rng.random::<bool>() { 1 } else { -1 };
            xs.push(PauliWeyl::from_masks(n, p.0, p.1, sign(rng))?);
            zs.push(PauliWeyl::from_masks(n, q.0, q.1, sign(rng))?);
        }
        Ok(CliffordTableau {
            n,
            x_images: xs,
            z_images: zs,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_images(&self) -> &[PauliWeyl] {
        &self.x_images
    }

    pub fn z_images(&self) -> &[PauliWeyl] {
        &self.z_images
    }

    /// `U P U†`.
    pub fn conjugate(&self, p: &PauliWeyl) -> PauliWeyl {
        let n = self.n;
        let mut acc = PauliWeyl::identity(n);
        let mut k = (p.x_mask() & p.z_mask()).count_ones();
        for j in 0..n {
            if p.x_mask() >> (n - 1 - j) & 1 == 1 {
                let (odd, r) = acc.mul(&self.x_images[j]);
                k += odd;
                acc = r;
            }
        }
        for j in 0..n {
            if p.z_mask() >> (n - 1 - j) & 1 == 1 {
                let (odd, r) = acc.mul(&self.z_images[j]);
                k += odd;
                acc = r;
            }
        }
        debug_assert_eq!(k % 2, 0, "conjugated Pauli stays Hermitian");
        if k % 4 == 2 {
            acc = acc.negated();
        }
        if p.sign() < 0 {
            acc = acc.negated();
        }
        acc
    }

    /// `other · self`, i.e. apply `self` first.
    pub fn then(&self, other: &CliffordTableau) -> Result<CliffordTableau> {
        if other.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        Ok(CliffordTableau {
            n: self.n,
            x_images: self.x_images.iter().map(|p| other.conjugate(p)).collect(),
            z_images: self.z_images.iter().map(|p| other.conjugate(p)).collect(),
        })
    }

    /// Stabilizer group of `U|0…0⟩`.
    pub fn stabilizer_group(&self) -> StabilizerGroup {
        StabilizerGroup::new(self.z_images.clone()).expect("images of Z_j form a stabilizer group")
    }

    /// `U|0…0⟩` as a vector, up to phase.
    pub fn state(&self) -> Result<PureState> {
        self.stabilizer_group().state()
    }

    /// Dense unitary, fixed up to a global phase.
    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        check_budget(
            "dense Clifford qubits",
            self.n as u128,
            MAX_DENSE_CLIFFORD_QUBITS as u128,
        )?;
        let s = self.state()?.into_amplitudes();
        let dim = 1usize << self.n;
        let mut u = ComplexMatrix::zeros(dim, dim);
        for col in 0..dim {
            let mut v = s.clone();
            for j in 0..self.n {
                if col >> (self.n - 1 - j) & 1 == 1 {
                    v = self.x_images[j].apply(&v);
                }
            }
            for (r, z) in v.into_iter().enumerate() {
                u[(r, col)] = z;
            }
        }
        Ok(u)
    }

    /// Recovers the tableau of a dense Clifford unitary.
    pub fn from_dense(u: &ComplexMatrix) -> Result<Self> {
        let dim = linalg::check_square(u)?;
        let n = linalg::qubits_of(dim)
            .ok_or_else(|| Error::InvalidArgument("dimension is not a power of two".into()))?;
        check_budget(
            "dense Clifford qubits",
            n as u128,
            MAX_DENSE_CLIFFORD_QUBITS as u128,
        )?;
        let decompose = |m: &ComplexMatrix| -> Result<PauliWeyl> {
            for p in PauliWeyl::all(n) {
                let c = p.trace_with(m) / dim as f64;
                if (c.norm() - 1.0).abs() < 1e-8 {
                    if c.im.abs() > 1e-8 {
                        break;
                    }
                    return Ok(p.with_sign(if c.re > 0.0 { 1 } else { -1 }));
                }
            }
            invalid_arg("unitary does not map Paulis to signed Paulis")
        };
        let mut xs = Vec::with_capacity(n);
        let mut zs = Vec::with_capacity(n);
        for j in 0..n {
            for (letter, out) in [('X', &mut xs), ('Z', &mut zs)] {
                let g = PauliWeyl::single(n, j, letter)?.dense();
                out.push(decompose(&(u * g * u.adjoint()))?);
            }
        }
        Self::from_images(xs, zs)
    }
}

/// Uniform Clifford sample with its dense form when `n ≤ 6`.
pub fn sample_clifford<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
) -> Result<(CliffordTableau, Option<ComplexMatrix>)> {
    let t = CliffordTableau::sample(n, rng)?;
    let dense = if n <= MAX_DENSE_CLIFFORD_QUBITS {
        Some(t.to_dense()?)
    } else {
        None
    };
    Ok((t, dense))
}

/// Abelian group generated by independent commuting Paulis not containing
/// `-I`.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n: usize,
    gens: Vec<PauliWeyl>,
    // Echelon rows: (pivot bit, vector, generator combination mask).
    rows: Vec<(u128, Sv, u64)>,
}

impl StabilizerGroup {
    pub fn new(gens: Vec<PauliWeyl>) -> Result<Self> {
        let n = gens.first().map(|g| g.n()).unwrap_or(0);
        if gens.iter().any(|g| g.n() != n) || gens.len() > n.max(1) {
            return invalid_arg("stabilizer generators must act on n qubits, at most n of them");
        }
        for (i, a) in gens.iter().enumerate() {
            for b in &gens[i + 1..] {
                if !a.commutes_with(b) {
                    return invalid_arg(format!("generators {a} and {b} anticommute"));
                }
            }
        }
        let mut rows: Vec<(u128, Sv, u64)> = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            let (mut v, mut mask) = ((g.x_mask(), g.z_mask()), 1u64 << i);
            for &(p, rv, rm) in &rows {
                if sv_key(v) & p != 0 {
                    v = sv_xor(v, rv);
                    mask ^= rm;
                }
            }
            let k = sv_key(v);
            if k == 0 {
                return invalid_arg("stabilizer generators are dependent");
            }
            let top = 1u128 << (127 - k.leading_zeros());
            for row in rows.iter_mut() {
                if sv_key(row.1) & top != 0 {
                    row.1 = sv_xor(row.1, v);
                    row.2 ^= mask;
                }
            }
            rows.push((top, v, mask));
        }
        Ok(StabilizerGroup { n, gens, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliWeyl] {
        &self.gens
    }

    /// Group element with the same unsigned label as `p`, if any.
    pub fn element_like(&self, p: &PauliWeyl) -> Option<PauliWeyl> {
        let mut v = (p.x_mask(), p.z_mask());
        let mut mask = 0u64;
        for &(piv, rv, rm) in &self.rows {
            if sv_key(v) & piv != 0 {
                v = sv_xor(v, rv);
                mask ^= rm;
            }
        }
        if v != (0, 0) {
            return None;
        }
        let mut acc = PauliWeyl::identity(self.n);
        for (i, g) in self.gens.iter().enumerate() {
            if mask >> i & 1 == 1 {
                acc = acc.mul_commuting(g).expect("generators commute");
            }
        }
        Some(acc)
    }

    /// `⟨P⟩` on the stabilizer state of a maximal group: `±1` or `0`.
    pub fn expectation(&self, p: &PauliWeyl) -> f64 {
        if self.gens.iter().any(|g| !g.commutes_with(p)) {
            return 0.0;
        }
        match self.element_like(p) {
            Some(g) => (g.sign() * p.sign()) as f64,
            None => 0.0,
        }
    }

    /// The stabilized vector (requires `n` generators), up to phase.
    pub fn state(&self) -> Result<PureState> {
        if self.gens.len() != self.n {
            return invalid_arg("state needs a maximal stabilizer group");
        }
        check_budget("stabilizer state dimension", 1u128 << self.n, 1 << 24)?;
        let dim = 1usize << self.n;
        let project = |mut v: Vec<C64>| {
            for g in &self.gens {
                let gv = g.apply(&v);
                for (a, b) in v.iter_mut().zip(gv) {
                    *a = (*a + b) * 0.5;
                }
            }
            v
        };
        // A generic start vector has overlap 2^{-n} with every stabilizer state.
        let seed: Vec<C64> = (0..dim)
            .map(|i| C64::from_polar(1.0, 0.7548776662466927 * i as f64 * (i as f64 + 1.0)))
            .collect();
        let v = project(seed);
        if linalg::norm_sqr(&v) > 1e-12 {
            return PureState::normalized(v);
        }
        for b in 0..dim {
            let mut e = vec![ZERO; dim];
            e[b] = linalg::ONE;
            let v = project(e);
            if linalg::norm_sqr(&v) > 1e-12 {
                return PureState::normalized(v);
            }
        }
        Err(Error::InvalidState("empty stabilizer code space".into()))
    }
}

fn phase_key(v: &[C64]) -> Vec<i64> {
    let pivot = v
        .iter()
        .find(|z| z.norm() > 1e-6)
        .copied()
        .unwrap_or(linalg::ONE);
    let ph = pivot.conj() / pivot.norm();
    v.iter()
        .flat_map(|z| {
            let w = z * ph;
            [(w.re * 1e6).round() as i64, (w.im * 1e6).round() as i64]
        })
        .collect()
}

/// The 24 single-qubit Cliffords modulo phase, generated from `H` and `S`.
pub fn single_qubit_cliffords() -> Vec<ComplexMatrix> {
    let gens = [linalg::hadamard(), linalg::phase_s()];
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([linalg::identity(2)]);
    while let Some(u) = queue.pop_front() {
        if !seen.insert(phase_key(u.as_slice())) {
            continue;
        }
        for g in &gens {
            queue.push_back(g * &u);
        }
        out.push(u);
    }
    out
}

/// All `n`-qubit stabilizer states up to phase (`n ≤ 3`).
pub fn stabilizer_states(n: usize) -> Result<Vec<PureState>> {
    if n == 0 || n > 3 {
        return invalid_arg("stabilizer state enumeration supports 1 <= n <= 3");
    }
    let dim = 1usize << n;
    let mut gates: Vec<(ComplexMatrix, Vec<usize>)> = Vec::new();
    for q in 0..n {
        gates.push((linalg::hadamard(), vec![q]));
        gates.push((linalg::phase_s(), vec![q]));
        for r in 0..n {
            if r != q {
                let mut cnot = ComplexMatrix::zeros(4, 4);
                for (a, b) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                    cnot[(b, a)] = linalg::ONE;
                }
                gates.push((cnot, vec![q, r]));
            }
        }
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::from([PureState::basis(dim, 0).into_amplitudes()]);
    while let Some(v) = queue.pop_front() {
        if !seen.insert(phase_key(&v)) {
            continue;
        }
        for (g, qs) in &gates {
            let mut w = v.clone();
            linalg::apply_gate(&mut w, n, g, qs);
            queue.push_back(w);
        }
        out.push(PureState::normalized(v)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use crate::qmath::linalg::{is_unitary, max_abs_diff};

    #[test]
    fn conjugation_matches_dense() {
        let mut rng = stream_rng(5, 0);
        for n in 1..=3 {
            for _ in 0..5 {
                let (t, dense) = sample_clifford(n, &mut rng).unwrap();
                let u = dense.unwrap();
                assert!(is_unitary(&u, 1e-9));
                for p in PauliWeyl::all(n) {
                    for s in [1, -1] {
                        let p = p.with_sign(s);
                        let expect = &u * p.dense() * u.adjoint();
                        assert!(max_abs_diff(&expect, &t.conjugate(&p).dense()) < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn dense_round_trip() {
        let mut rng = stream_rng(6, 0);
        for n in 1..=4 {
            let t = CliffordTableau::sample(n, &mut rng).unwrap();
            let back = CliffordTableau::from_dense(&t.to_dense().unwrap()).unwrap();
            assert_eq!(back, t);
        }
        assert!(CliffordTableau::identity(7).to_dense().is_err());
    }

    #[test]
    fn composition() {
        let mut rng = stream_rng(7, 0);
        let a = CliffordTableau::sample(2, &mut rng).unwrap();
        let b = CliffordTableau::sample(2, &mut rng).unwrap();
        let ab = a.then(&b).unwrap();
        let dense = b.to_dense().unwrap() * a.to_dense().unwrap();
        assert_eq!(CliffordTableau::from_dense(&dense).unwrap(), ab);
    }

    #[test]
    fn counts() {
        assert_eq!(single_qubit_cliffords().len(), 24);
        assert_eq!(stabilizer_states(1).unwrap().len(), 6);
        assert_eq!(stabilizer_states(2).unwrap().len(), 60);
    }

    #[test]
    fn stabilizer_expectations() {
        let mut rng = stream_rng(8, 0);
        for n in 1..=4 {
            let t = CliffordTableau::sample(n, &mut rng).unwrap();
            let g = t.stabilizer_group();
            let psi = g.state().unwrap();
            for p in PauliWeyl::all(n) {
                let e = p.expectation_vec(psi.amplitudes());
                assert!((e - g.expectation(&p)).abs() < 1e-9, "{p}");
            }
        }
    }

    #[test]
    fn stabilizer_overlaps_are_powers_of_two() {
        let states = stabilizer_states(2).unwrap();
        for a in &states {
            for b in &states {
                let o = a.overlap_sqr(b);
                let ok = o < 1e-12 || [1.0, 0.5, 0.25].iter().any(|v| (o - v).abs() < 1e-9);
                assert!(ok, "overlap {o}");
            }
        }
    }
}
