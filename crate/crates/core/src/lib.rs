// Index loops follow the component notation of the formulas, and negated
// comparisons are how argument checks reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::type_complexity)]

pub mod error;
pub mod fem;
pub mod forms;
pub mod krylov;
pub mod mesh;
pub mod newton;
pub mod postproc;
pub mod scenario;

pub use error::{Error, Result};

/// Version of the solver library.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
