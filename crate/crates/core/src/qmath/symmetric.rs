//! Permutation operators on `t` copies of `C^N`.

use super::linalg::{ComplexMatrix, C64, DENSE_DIM_LIMIT, ONE};
use super::states::Observable;
use crate::error::{check_budget, invalid_arg, Result};

/// All permutations of `0..t` (Heap's algorithm).
pub fn permutations(t: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            heap(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        heap(k - 1, a, out);
    }
    let mut a: Vec<usize> = (0..t).collect();
    let mut out = Vec::new();
    heap(t, &mut a, &mut out);
    out
}

fn digits(mut idx: usize, n: usize, t: usize) -> Vec<usize> {
    let mut d = vec![0; t];
    for k in (0..t).rev() {
        d[k] = idx % n;
        idx /= n;
    }
    d
}

fn undigits(d: &[usize], n: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * n + x)
}

/// Operator permuting tensor factors: copy `k` of the input lands in slot
/// `perm[k]` of the output.
pub fn permutation_operator(n: usize, perm: &[usize]) -> Result<ComplexMatrix> {
    let t = perm.len();
    let dim = (n as u128).pow(t as u32);
    check_budget(
        "permutation operator dimension",
        dim,
        DENSE_DIM_LIMIT as u128,
    )?;
    let dim = dim as usize;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let d = digits(col, n, t);
        let mut out = vec![0; t];
        for (k, &p) in perm.iter().enumerate() {
            out[p] = d[k];
        }
        m[(undigits(&out, n), col)] = ONE;
    }
    Ok(m)
}

/// The flip `F|i,j⟩ = |j,i⟩` on `C^N ⊗ C^N`.
pub fn flip_operator(n: usize) -> Result<Observable> {
    if n < 2 {
        return invalid_arg("flip operator needs N >= 2");
    }
    Observable::dense(permutation_operator(n, &[1, 0])?)
}

/// Projector onto the symmetric subspace of `t` copies.
pub fn symmetric_projector_matrix(n: usize, t: usize) -> Result<ComplexMatrix> {
    let dim = (n as u128).pow(t as u32);
    check_budget(
        "symmetric projector dimension",
        dim,
        DENSE_DIM_LIMIT as u128,
    )?;
    let dim = dim as usize;
    let perms = permutations(t);
    let w = C64::new(1.0 / perms.len() as f64, 0.0);
    let mut m = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let d = digits(col, n, t);
        for p in &perms {
            let mut out = vec![0; t];
            for (k, &pk) in p.iter().enumerate() {
                out[pk] = d[k];
            }
            m[(undigits(&out, n), col)] += w;
        }
    }
    Ok(m)
}

pub fn symmetric_projector(n: usize, t: usize) -> Result<Observable> {
    Observable::dense(symmetric_projector_matrix(n, t)?)
}

/// `binom(n, k)` as a float.
pub fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Dimension of the symmetric subspace, `binom(N+t-1, t)`.
pub fn symmetric_dimension(n: usize, t: usize) -> f64 {
    binomial((n + t - 1) as u64, t as u64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::{identity, max_abs_diff, trace};
    use crate::qmath::states::{expectation, PureState};

    #[test]
    fn flip_properties() {
        let f = flip_operator(2).unwrap().matrix().unwrap();
        let swap = ComplexMatrix::from_row_slice(
            4,
            4,
            &[
                ONE,
                C64::default(),
                C64::default(),
                C64::default(),
                C64::default(),
                C64::default(),
                ONE,
                C64::default(),
                C64::default(),
                ONE,
                C64::default(),
                C64::default(),
                C64::default(),
                C64::default(),
                C64::default(),
                ONE,
            ],
        );
        assert_eq!(f, swap);
        for n in 2..5 {
            let f = flip_operator(n).unwrap().matrix().unwrap();
            assert!(max_abs_diff(&(&f * &f), &identity(n * n)) < 1e-15);
            assert!((trace(&f).re - n as f64).abs() < 1e-15);
        }
        assert!(flip_operator(1).is_err());
    }

    #[test]
    fn flip_gives_purity() {
        let psi = PureState::normalized(vec![
            C64::new(1.0, 0.0),
            C64::new(0.5, -0.2),
            C64::new(0.1, 0.3),
        ])
        .unwrap();
        let mix = crate::qmath::states::DensityMatrix::mixture(
            &[0.7, 0.3],
            &[psi.clone(), PureState::basis(3, 2)],
        )
        .unwrap();
        let f = flip_operator(3).unwrap();
        let two = mix.tensor(&mix).unwrap();
        assert!((expectation(&two, &f).unwrap() - mix.purity()).abs() < 1e-12);
    }

    #[test]
    fn symmetric_projector_properties() {
        assert!(max_abs_diff(&symmetric_projector_matrix(3, 1).unwrap(), &identity(3)) < 1e-15);
        for n in 2..5 {
            let p = symmetric_projector_matrix(n, 2).unwrap();
            let f = flip_operator(n).unwrap().matrix().unwrap();
            let expect = (identity(n * n) + f) * C64::new(0.5, 0.0);
            assert!(max_abs_diff(&p, &expect) < 1e-12);
        }
        let p = symmetric_projector_matrix(2, 2).unwrap();
        assert!((trace(&p).re - 3.0).abs() < 1e-12);
        for (n, t) in [(2, 3), (3, 3), (2, 4)] {
            let p = symmetric_projector_matrix(n, t).unwrap();
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-12);
            assert!((trace(&p).re - symmetric_dimension(n, t)).abs() < 1e-9);
        }
        assert!(symmetric_projector_matrix(64, 3).is_err());
    }

    #[test]
    fn permutation_count() {
        assert_eq!(permutations(4).len(), 24);
        let mut all = permutations(3);
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 6);
    }
}
