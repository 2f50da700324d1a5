//! Reduced dynamics of an N-qubit all-to-all network carrying a single
//! excitation.
//!
//! Everything follows from two amplitudes of the global unitary. On top of
//! them the crate builds reduced states of K-qubit subsystems, propagators
//! between arbitrary instants (which need not be positive), positivity tests,
//! single-qubit Bloch maps, entanglement entropy, Fisher information for the
//! coupling and network size, and inference of both from local data. The
//! [`oracle`] module recomputes the key objects by brute force.
//!
//! The numerics are generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the scalar to `f64`.

pub mod amplitudes;
pub mod bloch;
pub mod error;
pub mod fisher;
pub mod inference;
pub mod linalg;
pub mod oracle;
pub mod positivity;
pub mod propagator;
pub mod scalar;
pub mod states;

pub use amplitudes::{amplitudes, global_state, q1_unitary_oracle, Amplitudes, NetworkParams};
pub use bloch::{affine_map, axial_positivity_band, ball_membership, evolve_bloch, BlochAffineMap, Interval};
pub use error::{Error, Result};
pub use fisher::{process_state_split, qfi_closed_form, qfi_numeric_oracle, FisherBreakdown, ProcessStateSplit, Theta};
pub use inference::{
    conservation_residual, infer_coupling, infer_network_size, two_qubit_consistency, FlowObservation, SizeEstimate,
};
pub use linalg::CMatrix;
pub use oracle::{dynamical_map_oracle, propagator_oracle, reduced_density_oracle, GlobalVector};
pub use positivity::{choi_matrix, classify, positivity_transition_time, PositivityVerdict, Verdict};
pub use propagator::{apply, build_propagator, compose_residual, flow_amplitude, is_singular, FlowKind, PropagatorOps};
pub use scalar::{Real, C};
pub use states::{
    entanglement_entropy, excitation_probability, materialize_density, reduced_state, trace_distance_to_fixed,
    DynClass, ReducedState, SubsystemSelector,
};

pub type NetworkParams64 = NetworkParams<f64>;
pub type Amplitudes64 = Amplitudes<f64>;
pub type ReducedState64 = ReducedState<f64>;
pub type PropagatorOps64 = PropagatorOps<f64>;
pub type PositivityVerdict64 = PositivityVerdict<f64>;
pub type BlochAffineMap64 = BlochAffineMap<f64>;
pub type FisherBreakdown64 = FisherBreakdown<f64>;
pub type ProcessStateSplit64 = ProcessStateSplit<f64>;
pub type FlowObservation64 = FlowObservation<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type GlobalVector64 = GlobalVector<f64>;
