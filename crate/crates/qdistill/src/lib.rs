//! `qdistill` - single-copy entanglement distillation toolkit.
//!
//! The crate simulates what one shared copy of a noisy bipartite state can be
//! turned into under local filtering: it computes and maximizes singlet
//! fractions over filter classes, runs quasi-distillation sequences, converts
//! singlet fraction to teleportation fidelity, maps channels to their dual
//! states and classifies when probabilistic error correction is feasible.
//!
//! Modules:
//! - [`densmat`]: dense complex linear algebra and validated state types.
//! - [`states`]: constructors for the concrete state families.
//! - [`locc`]: conclusive local filters, trace-preserving channels, twirling.
//! - [`optimize`]: numerical singlet-fraction maximization and the two-qubit
//!   correlation-matrix machinery.
//! - [`protocols`]: end-to-end procedures (quasi-distillation, single-copy
//!   distillation certificates, duality, error-correction feasibility).

pub mod densmat;
pub mod locc;
pub mod optimize;
pub mod protocols;
pub mod states;

pub use densmat::{
    partial_trace, schmidt, singlet_fraction, validate_density, Complex64, ComplexMatrix,
    DensityMatrix, DensmatError, PureState, SchmidtDecomposition, Side,
};
pub use locc::{
    apply_channel, apply_filter_pair, apply_one_way, twirl, FilterNorm, KrausChannel, LoccError,
    LoccOutcome, LocalFilter,
};
pub use optimize::{
    correlation_matrix, fidelity_via_n, fsup_estimate, oneway_analytic_optimum, Budget,
    CorrelationMatrix, FilterClass, FilterClassTag, OptimizationReport, OptimizeError,
};
pub use protocols::{
    channel_dual_state, ec_feasibility, ec_feasibility_from_dual, quasidistill_sequence,
    rank_condition, scd_check, scd_search, teleport_fidelity, EcFeasibility, EcVerdict,
    ProtocolError, QuasiDistillRow, RankFeasibility, ScdCertificate, ScdCheck, ScdSearchOutcome,
};
pub use states::{StateError, StateFamilySpec};
