use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid_arg, Result};
use crate::qmath::linalg::{self, ComplexMatrix, C64};
use crate::qmath::states::{Observable, PureState};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random `N x N` unitary.
pub fn sample_haar<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ComplexMatrix> {
    if n < 2 {
        return invalid_arg("Haar sampling needs N >= 2");
    }
    Ok(haar_unchecked(n, rng))
}

pub(crate) fn haar_unchecked<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..n {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            linalg::ONE
        };
        for row in 0..n {
            q[(row, k)] *= phase;
        }
    }
    q
}

/// Haar-random pure state, same law as `U|0⟩` for Haar `U`.
pub fn haar_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    loop {
        let v: Vec<C64> = (0..dim).map(|_| gaussian(rng)).collect();
        if let Ok(s) = PureState::normalized(v) {
            return s;
        }
    }
}

/// Random Hermitian matrix from the Gaussian unitary ensemble.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    linalg::hermitian_part(&g)
}

/// Random observable rescaled to operator norm 1.
pub fn random_observable<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Observable {
    let h = random_hermitian(dim, rng);
    let norm = linalg::op_norm(&h);
    let m = if norm > 0.0 {
        h / C64::new(norm, 0.0)
    } else {
        h
    };
    Observable::dense(linalg::hermitian_part(&m)).expect("Hermitian by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::stream_rng;
    use crate::qmath::linalg::{is_unitary, pauli_z};

    #[test]
    fn samples_are_unitary() {
        let mut rng = stream_rng(1, 0);
        for n in [2, 3, 8] {
            let u = sample_haar(n, &mut rng).unwrap();
            assert!(is_unitary(&u, 1e-9));
        }
        assert!(sample_haar(1, &mut rng).is_err());
    }

    #[test]
    fn first_moment_statistics() {
        let mut rng = stream_rng(2, 0);
        let samples = 10_000;
        let z = pauli_z();
        let (mut ez, mut e0) = (0.0, 0.0);
        for _ in 0..samples {
            let u = sample_haar(2, &mut rng).unwrap();
            let col = u.column(0);
            ez += (col[0].norm_sqr() - col[1].norm_sqr()) * z[(0, 0)].re;
            e0 += col[0].norm_sqr();
        }
        ez /= samples as f64;
        e0 /= samples as f64;
        // |⟨0|U|0⟩|² is uniform on [0,1] for N = 2: sd 1/√12.
        let se = (1.0f64 / 12.0).sqrt() / (samples as f64).sqrt();
        assert!(ez.abs() < 5.0 * 2.0 * se);
        assert!((e0 - 0.5).abs() < 5.0 * se);
    }

    #[test]
    fn random_observable_has_unit_norm() {
        let mut rng = stream_rng(3, 0);
        let o = random_observable(4, &mut rng);
        assert!((o.op_norm() - 1.0).abs() < 1e-9);
        o.check_query_norm().unwrap();
    }

    #[test]
    fn reproducible_under_seed() {
        let a = sample_haar(4, &mut stream_rng(9, 3)).unwrap();
        let b = sample_haar(4, &mut stream_rng(9, 3)).unwrap();
        assert_eq!(a, b);
    }
}
