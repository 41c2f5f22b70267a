//! Learners and testers driven by evaluation oracles.

pub mod gaussian;
pub mod linear;
pub mod mirror;
pub mod parity;
pub mod testers;
pub mod tree;
pub mod zx;

use std::collections::BTreeMap;

use serde::Serialize;

pub use gaussian::{gaussian_state_learner, random_pure_gaussian, GaussianEstimate};
pub use linear::{kl_radius, mmw_state_learner, mw_distribution_learner, update_budget};
pub use mirror::{md_update, regret_audit, Constraint, MDState, MirrorMap, Point, RegretAudit};
pub use parity::{parity_learner, parity_observable, qpac_parity_state};
pub use testers::{
    far_pure_state, pure_state_tester, purity_instance, purity_tester, stabilizer_test_povm,
    stabilizer_tester, TestOutcome,
};
pub use tree::{multicopy_tree_learner, noisy_basis_povm, PovmTree};
pub use zx::{zx_loss_oracle, zx_query_groups, zx_string, zx_string_learner};

/// One step of an iterative learner.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub step: usize,
    pub query: usize,
    pub response: f64,
    pub prediction: f64,
    pub gap: f64,
}

/// Per-run bookkeeping exported with a [`LearnerResult`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub iterations: Vec<IterationRecord>,
    pub values: BTreeMap<String, f64>,
    pub regret: Option<RegretAudit>,
}

impl Diagnostics {
    pub(crate) fn set(&mut self, key: &str, value: f64) {
        self.values.insert(key.to_string(), value);
    }
}

/// Output of a learner or tester.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnerResult<H> {
    pub hypothesis: H,
    pub queries_used: usize,
    pub success: bool,
    pub diagnostics: Diagnostics,
}

impl<H> LearnerResult<H> {
    /// JSON export with the hypothesis rendered by `render`.
    pub fn to_json_with(&self, render: impl Fn(&H) -> serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "hypothesis": render(&self.hypothesis),
            "queries_used": self.queries_used,
            "success": self.success,
            "diagnostics": self.diagnostics,
        })
    }
}

impl<H: Serialize> LearnerResult<H> {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("learner results serialize")
    }
}
