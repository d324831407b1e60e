//! Quantum reference frame transformations over finite symmetry groups.
//!
//! The crate builds perspectival and passive frame-change operators for a
//! set of `L²(G)` reference frames and a sector of physical systems that
//! transform under representations of `G`, and ships seeded suites that
//! check, trial by trial, that passive frame changes never create
//! entanglement between physical systems.

pub mod entanglement;
pub mod group;
pub mod hilbert;
pub mod linalg;
pub mod qrf;
pub mod random;
pub mod repr;
pub mod scenario;
pub mod verify;

pub use group::{FiniteGroup, GroupElement, GroupError, GroupSpec};
pub use hilbert::{DensityOp, FactorSpec, HilbertError, PureState, Role};

pub use repr::{RepSpec, Representation, ReprError};
pub use qrf::{FrameConfig, QrfError, QrfTransform, StandardForm, TransformKind};
