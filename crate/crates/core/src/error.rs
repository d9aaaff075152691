use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter violates its domain invariant. `name` is the field name.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A time bin carries too little intensity to fit a phase ramp to it.
    #[error("degenerate fit for {bin} time bin: intensity fraction {fraction:.3e}")]
    FitDegenerate { bin: &'static str, fraction: f64 },

    /// A grid too coarse to resolve the requested filter.
    #[error("insufficient resolution: {0}")]
    Resolution(String),

    /// Singular value decomposition failed or produced non-finite values.
    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("infeasible heralded bin {offset}: needs {needed:.4e} Hz shift, design provides {available:.4e} Hz")]
    InfeasibleBin {
        offset: i64,
        needed: f64,
        available: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN/inf and anything failing `ok`.
pub(crate) fn check(
    name: &'static str,
    value: f64,
    ok: impl FnOnce(f64) -> bool,
    expect: &str,
) -> Result<()> {
    if value.is_finite() && ok(value) {
        Ok(())
    } else {
        Err(invalid(name, format!("expected {expect}, got {value}")))
    }
}
