//! Error type shared by every module of the crate.

use crate::geometry::SpaceParams;

/// Errors raised by spacetree, curve, partition and generator operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// `k < 2`, `d == 0`, or a dimension too large for the face bitmasks.
    #[error("invalid space parameters: {0}")]
    InvalidParams(String),
    /// Two operands live in different `(k, d)` spaces.
    #[error("parameter mismatch: {0} vs {1}")]
    ParamMismatch(SpaceParams, SpaceParams),
    /// A box or face description violates its coordinate invariants.
    #[error("invalid box: {0}")]
    InvalidBox(String),
    /// The root box was asked for its parent.
    #[error("the root box has no parent")]
    NoParent,
    /// A subdivision would exceed the exact-arithmetic depth cap.
    #[error("depth cap {cap} exceeded")]
    DepthCap {
        /// The cap for the current `k`.
        cap: u32,
    },
    /// A codimension outside `0..=d` was requested.
    #[error("codimension {c} out of range 0..={d}")]
    CodimOutOfRange {
        /// Requested codimension.
        c: u32,
        /// Dimension of the space.
        d: u32,
    },
    /// The box is not a cell of the grid it was used with.
    #[error("box {0} is not a cell of the grid")]
    NotACell(String),
    /// A cell subset is not contained in the grid it was used with.
    #[error("cell set is not a subset of the grid")]
    NotSubset,
    /// The content of a box set is not a union of cells of the grid.
    #[error("box set is not representable as a union of grid cells")]
    NotRepresentable,
    /// A grid was expected to refine another one but does not.
    #[error("grid does not refine the reference grid")]
    NotARefinement,
    /// The box set is not a grid (antichain with full exact coverage).
    #[error("not a grid: {0}")]
    NotAGrid(String),
    /// Curve family and space parameters are incompatible.
    #[error("curve family {family} does not support k={k}, d={d}")]
    CurveMismatch {
        /// Curve family name.
        family: String,
        /// Requested `k`.
        k: u32,
        /// Requested `d`.
        d: u32,
    },
    /// The operation needs a continuous curve family.
    #[error("curve family {0} is not continuous")]
    NonContinuous(String),
    /// An explicit cell list is not an interval of the curve order.
    #[error("cells are not consecutive along the curve")]
    NotConsecutive,
    /// An index range is empty or out of bounds.
    #[error("invalid range [{i}, {j}] for {n} cells")]
    InvalidRange {
        /// First index (1-based).
        i: usize,
        /// Last index (1-based, inclusive).
        j: usize,
        /// Number of cells available.
        n: usize,
    },
    /// An operation that needs at least one box received none.
    #[error("empty box set")]
    Empty,
    /// A generator specification is out of range.
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    /// A volume is not admissible for the requested construction.
    #[error("inadmissible volume {v}: {reason}")]
    InadmissibleVolume {
        /// Requested volume.
        v: u64,
        /// Explanation.
        reason: String,
    },
    /// An enumeration would exceed its configured budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    /// Malformed serialized input.
    #[error("malformed input: {0}")]
    Format(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
