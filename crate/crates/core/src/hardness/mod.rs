//! Numerical checks of variance and concentration bounds, and gradient probes
//! for parametrized models.

pub mod circuits;
pub mod models;
pub mod variance;

use crate::error::{invalid_arg, Result};
use crate::problems::{basis_state_report, BoundReport};

pub use circuits::{
    bp_probe, finite_difference_gradient, gradient, parameter_shift_gradient, BPReport, BPRow,
    Gate, ModelLoss, ParameterMeasure, ParametrizedModel, AUDIT_STEP,
};
pub use models::{
    data_reupload_variance, linear_model_variance, random_init_expected_variance,
    selflearn_loss_variance_check, DataReupload, DesignMode, Encoder, LinearModel,
    LossVarianceCheck,
};
pub use variance::{
    adversarial_pool, analytic_bound, functional_samples, haar_single_copy_variance, levy_bound,
    levy_tail_check, pauli_cost_identity, pool_max_variance, random_product_observable,
    scaling_envelope, state_variance, KCopyObservable, LevyReport, ScalingEnvelope, VarianceReport,
};

/// Closed-form quantities for self-learning `n`-qubit basis states:
/// `triv = frac = 2^{-n}` and the bound `(β − 2^{-n})2^n`.
pub fn selflearn_basis_quantities(n: usize, beta: f64, tau: f64) -> Result<BoundReport> {
    if n == 0 || n > 30 {
        return invalid_arg("basis-state quantities are tabulated for 1 <= n <= 30");
    }
    basis_state_report(n, beta, tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_quantities() {
        let r = selflearn_basis_quantities(1, 1.0, 0.1).unwrap();
        assert_eq!(r.lower_bound_value, 1.0);
        let r = selflearn_basis_quantities(10, 1.0, 0.1).unwrap();
        assert_eq!(r.lower_bound_value, (1.0 - 2f64.powi(-10)) * 1024.0);
        assert_eq!((r.triv, r.frac), (2f64.powi(-10), 2f64.powi(-10)));
        let r = selflearn_basis_quantities(5, 2f64.powi(-5), 0.1).unwrap();
        assert_eq!(r.lower_bound_value, 0.0);
    }
}
