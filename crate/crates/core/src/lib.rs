//! Gaussian covariance-matrix engine for entanglement distribution through
//! one-side Gaussian channels.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases at the bottom of this file fix it to
//! `f64`, which is what the tolerances in the docs assume.

pub mod channels;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod nelder_mead;
pub mod protocol;
pub mod scalar;
pub mod suites;

pub use channels::{
    apply_filter_tmss, apply_oneside_channel, beamsplitter_channel, cm_from_quadexp,
    det_a_closed_form, filtered_coeffs, pre_process, FilterOp, GaussianChannel, OneSideMap,
    QuadExpState,
};
pub use entanglement::{
    char_ent_pure, geof, geof_detailed, log_negativity, theorem2_ratio, CharacteristicEntanglement,
    EntanglementReport, GeofOptions, GeofSolution, Measure, Theorem2Ratio,
};
pub use error::{Error, Result};
pub use gaussian::{
    apply_symplectic, euler_decompose, partial_trace, symplectic_eigenvalues, symplectic_generator,
    tensor, tmss_state, williamson, EulerAngles, GaussianState, Generator, SymplecticOp,
};
pub use protocol::{
    fact1_equivalent_v, lemma2_invariance_check, optimize_preprocessing, probe_channel,
    sweep_entanglement, MeasureSet, Optimum, ProbeReport, SearchMode, SweepResult, SweepRow,
    TrendReport, UGrid, Verdict,
};
pub use scalar::Real;

pub type GaussianState64 = GaussianState<f64>;
pub type SymplecticOp64 = SymplecticOp<f64>;
pub type GaussianChannel64 = GaussianChannel<f64>;
pub type OneSideMap64 = OneSideMap<f64>;
pub type QuadExpState64 = QuadExpState<f64>;
pub type ProbeReport64 = ProbeReport<f64>;
pub type SweepResult64 = SweepResult<f64>;
pub type FockVector64 = fock::FockVector<f64>;

pub type GaussianState32 = GaussianState<f32>;
pub type SymplecticOp32 = SymplecticOp<f32>;
pub type GaussianChannel32 = GaussianChannel<f32>;
