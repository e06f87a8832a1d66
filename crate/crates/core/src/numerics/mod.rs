//! Exact-exponent real and log-polar complex arithmetic.
//!
//! Magnitudes that reach `2^(2^60)` are only ever handled through their base-2
//! logarithm. [`Rho`] stores that logarithm as an exact dyadic rational, so power
//! maps and power-of-two roots never round. [`Angle`] does the same for arguments.
//! [`Flt`] supplies the working-precision kernels used wherever a genuine
//! transcendental value is needed.

pub mod angle;
pub mod cplx;
pub mod dyadic;
pub mod flt;
pub mod logpolar;
pub mod rho;

pub use angle::Angle;
pub use cplx::Cx;
pub use dyadic::{BigExp, DyadicReal};
pub use flt::Flt;
pub use logpolar::{lp_add, lp_sub, AddFlag, LogPolar};
pub use rho::Rho;

/// Precision settings shared by every evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct NumCtx {
    /// Significand bits of reported values.
    pub p_sig: u32,
    /// Fraction-bit cap for angles.
    pub p_ang: u64,
    /// Rho gap beyond which a sum drops its smaller term.
    pub guard: u64,
}

impl Default for NumCtx {
    fn default() -> Self {
        NumCtx { p_sig: 128, p_ang: 4096, guard: 256 }
    }
}

impl NumCtx {
    /// Working precision for intermediate kernels.
    pub fn wp(&self) -> u32 {
        self.p_sig + 64
    }
}
