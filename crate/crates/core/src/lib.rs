//! Discrete-time control design toolkit: complete PI/PID stabilizing sets via
//! the Tchebychev signature procedure, exact maps between PID and iPD
//! (model-free control) parameter spaces, frequency/time-response filtering,
//! and a genuine time-domain iPD runtime — applied out of the box to the
//! lateral dynamics of an automated car.
//!
//! The pipeline, end to end:
//!
//! 1. [`plant`] builds the bicycle-model lateral-error dynamics and
//!    discretizes them with a zero-order hold into a [`plant::DiscreteTF`].
//! 2. [`stabset`] computes the complete stabilizing set of Two Term (PI) or
//!    Three Term (PID) controllers for that transfer function.
//! 3. [`bridge`] maps PID parameters exactly into iPD parameter space and
//!    back, and builds controller transfer functions.
//! 4. [`analysis`] filters controller sets by gain/phase margins and
//!    step-response metrics.
//! 5. [`sim`] runs the model-free control loop (ultra-local model, online
//!    disturbance estimate, filtered derivatives) against the discrete plant.

pub mod analysis;
pub mod bridge;
pub mod plant;
pub mod poly;
pub mod sim;
pub mod stabset;

use thiserror::Error as ThisError;

/// Errors shared across the toolkit.
#[derive(Debug, Clone, PartialEq, ThisError)]
pub enum Error {
    /// Precondition violation on an operation's inputs.
    #[error("domain_error: {0}")]
    Domain(String),
    /// A root lies within tolerance of the unit circle; the design procedure
    /// assumes no unit-circle roots.
    #[error("marginal_root: root within tolerance of the unit circle")]
    MarginalRoot,
    /// The lateral model is singular (vx = 0 makes 1/vx terms blow up).
    #[error("singular_model: vx must be strictly positive")]
    SingularModel,
    /// Derivative-filter constant C < 1 puts the filter pole outside [0, 1).
    #[error("unstable_filter: filter constant C must be >= 1")]
    UnstableFilter,
    /// Two transfer functions disagree on the sample time.
    #[error("ts_mismatch: sample times {0} and {1} differ")]
    TsMismatch(f64, f64),
    /// alpha = 0 is outside the iPD gain domain.
    #[error("alpha_zero: ultra-local gain alpha must be nonzero")]
    AlphaZero,
    /// The PID point has no finite iPD image (singular inverse transform).
    #[error("transform_singular: the point has no finite iPD image")]
    TransformSingular,
    /// String enumeration was asked for more zeros than the resource cap.
    #[error("resource_limit: {0}")]
    ResourceLimit(String),
    /// Step metrics are undefined (nonpositive final value).
    #[error("metrics_undefined: final value must be positive")]
    MetricsUndefined,
    /// A controller-set operation received the wrong controller kind.
    #[error("kind_mismatch: {0}")]
    KindMismatch(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
