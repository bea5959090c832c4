use thiserror::Error;

use crate::topology::GeometryReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("path loss undefined between coincident points")]
    CoincidentPoints,

    #[error("invalid geometry: {0}")]
    Geometry(GeometryReport),

    #[error("`{name}` = {value} is out of range (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("quadrature did not converge within depth {max_depth}: achieved relative error {achieved:e}")]
    Quadrature { achieved: f64, max_depth: u32 },

    #[error("no rate bracket found after {doublings} doublings")]
    NoBracket { doublings: u32 },

    #[error("no relay can decode at rate {rate}: decode probability is zero")]
    NoDecoding { rate: f64 },

    #[error("{0} is undefined for alpha = 0")]
    ZeroAlpha(&'static str),

    #[error("high-SNR rate loss is unbounded at p = 1")]
    UnboundedLoss,

    #[error("high-SNR formula used outside its regime (attack-free rate {0} bits is not positive)")]
    OutsideRegime(f64),
}

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            expected,
        })
    }
}
