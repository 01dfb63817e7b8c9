use thiserror::Error;

/// Errors raised by the physics and design routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Bodies overlap or a distance is non-physical.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// Input outside the domain where a formula is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// The drifting branch reached the plate during free fall.
    #[error("collision with the plate at t = {time:.6e} s (gap {gap:.6e} m)")]
    Collision { time: f64, gap: f64 },
    /// A root or search bracket has no admissible solution.
    #[error("no solution: {0}")]
    NoSolution(String),
    /// A value failed an invariant check.
    #[error("validation error: {0}")]
    Validation(String),
    /// Unknown material preset.
    #[error("unknown material preset `{0}`")]
    UnknownPreset(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure(cond: bool, err: impl FnOnce() -> Error) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(err())
    }
}
