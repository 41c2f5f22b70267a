use super::linalg::{self, check_dims, ComplexMatrix, ZERO};
use super::states::DensityMatrix;
use crate::error::{Error, Result};

/// `½‖ρ − σ‖_tr`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let diff = rho.matrix() - sigma.matrix();
    Ok((0.5 * linalg::trace_norm(&diff)).clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(tr √(√σ ρ √σ))²`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_dims(rho.dim(), sigma.dim())?;
    let s = linalg::psd_sqrt(sigma.matrix());
    let inner = &s * rho.matrix() * &s;
    let root_trace: f64 = linalg::hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok((root_trace * root_trace).clamp(0.0, 1.0))
}

/// Reduced state on the subsystems listed in `keep` (kept in ascending
/// order). `local_dims` lists the subsystem dimensions, first subsystem is
/// the most significant tensor factor.
pub fn partial_trace(
    rho: &DensityMatrix,
    keep: &[usize],
    local_dims: &[usize],
) -> Result<DensityMatrix> {
    let total: usize = local_dims.iter().product();
    check_dims(total, rho.dim())?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() || kept.iter().any(|&k| k >= local_dims.len()) {
        return Err(Error::InvalidArgument(format!(
            "bad subsystem index set {keep:?} for {} subsystems",
            local_dims.len()
        )));
    }
    let traced: Vec<usize> = (0..local_dims.len())
        .filter(|i| !kept.contains(i))
        .collect();
    let keep_dim: usize = kept.iter().map(|&i| local_dims[i]).product();
    let trace_dim: usize = traced.iter().map(|&i| local_dims[i]).product();

    let strides: Vec<usize> = (0..local_dims.len())
        .map(|i| local_dims[i + 1..].iter().product())
        .collect();
    let compose = |sys: &[usize], mut idx: usize| -> usize {
        // Expand a mixed-radix index over `sys` into a full-space offset.
        let mut off = 0;
        for &s in sys.iter().rev() {
            let d = local_dims[s];
            off += (idx % d) * strides[s];
            idx /= d;
        }
        off
    };
    let keep_off: Vec<usize> = (0..keep_dim).map(|i| compose(&kept, i)).collect();
    let trace_off: Vec<usize> = (0..trace_dim).map(|i| compose(&traced, i)).collect();

    let m = rho.matrix();
    let mut out = ComplexMatrix::from_element(keep_dim, keep_dim, ZERO);
    for (r, &kr) in keep_off.iter().enumerate() {
        for (c, &kc) in keep_off.iter().enumerate() {
            out[(r, c)] = trace_off.iter().map(|&t| m[(kr + t, kc + t)]).sum();
        }
    }
    DensityMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::linalg::C64;
    use crate::qmath::states::PureState;

    fn bell() -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureState::new(vec![C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]).unwrap()
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = PureState::basis(2, 0).to_density();
        let z1 = PureState::basis(2, 1).to_density();
        assert!((trace_distance(&z0, &z1).unwrap() - 1.0).abs() < 1e-12);
        assert!(trace_distance(&z0, &z0).unwrap().abs() < 1e-12);
        assert!(trace_distance(&z0, &DensityMatrix::maximally_mixed(4)).is_err());
    }

    #[test]
    fn fidelity_examples() {
        let z0 = PureState::basis(2, 0).to_density();
        let z1 = PureState::basis(2, 1).to_density();
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity(&z0, &z0).unwrap() - 1.0).abs() < 1e-10);
        assert!(fidelity(&z0, &z1).unwrap().abs() < 1e-10);
        assert!((fidelity(&z0, &mixed).unwrap() - 0.5).abs() < 1e-10);
        assert!((fidelity(&mixed, &z0).unwrap() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn partial_trace_examples() {
        let b = bell().to_density();
        let red = partial_trace(&b, &[0], &[2, 2]).unwrap();
        assert!(
            linalg::max_abs_diff(red.matrix(), DensityMatrix::maximally_mixed(2).matrix()) < 1e-14
        );

        let rho = PureState::normalized(vec![C64::new(1.0, 0.0), C64::new(0.3, 0.4)])
            .unwrap()
            .to_density();
        let sigma = DensityMatrix::maximally_mixed(3);
        let joint = rho.tensor(&sigma).unwrap();
        let r0 = partial_trace(&joint, &[0], &[2, 3]).unwrap();
        let r1 = partial_trace(&joint, &[1], &[2, 3]).unwrap();
        assert!(linalg::max_abs_diff(r0.matrix(), rho.matrix()) < 1e-14);
        assert!(linalg::max_abs_diff(r1.matrix(), sigma.matrix()) < 1e-14);
        assert!((linalg::trace(r1.matrix()).re - 1.0).abs() < 1e-14);
        assert!(partial_trace(&joint, &[2], &[2, 3]).is_err());
        assert!(partial_trace(&joint, &[0, 0], &[2, 3]).is_err());
    }
}
