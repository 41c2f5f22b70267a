//! Linear algebra, states, observables and operator constructions.

pub mod fermion;
pub mod linalg;
pub mod metrics;
pub mod pauli;
pub mod states;
pub mod symmetric;

pub use fermion::{
    covariance_of_pure, covariance_of_state, majorana_labels, majorana_operators, CovarianceMatrix,
    MajoranaSet,
};
pub use linalg::{ComplexMatrix, ComplexVector, NumericPolicy, C64, DENSE_DIM_LIMIT};
pub use metrics::{fidelity, partial_trace, trace_distance};
pub use pauli::PauliWeyl;
pub use states::{expectation, DensityMatrix, Frame, Observable, ObservableRepr, PureState};
pub use symmetric::{flip_operator, symmetric_projector};
