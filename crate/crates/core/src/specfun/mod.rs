//! Special functions.

mod gamma;
mod mittag_leffler;

pub use gamma::{gamma_fn, ln_gamma, rgamma};
pub use mittag_leffler::{ml, ml2, mittag_leffler, mittag_leffler_real, mittleff, MittagLefflerParams};
