//! Small hand-written optimizers shared by the SQL search and tomography.

mod bfgs;
mod golden;
mod halton;
mod lm;
mod nelder_mead;

pub use bfgs::{bfgs, central_gradient, BfgsOptions, BfgsReport};
pub use golden::{golden_section_min, refine_extremum};
pub use halton::{halton, HaltonSequence};
pub use lm::{levenberg_marquardt, LmOptions, LmReport};
pub use nelder_mead::{nelder_mead, NelderMeadOptions, NelderMeadReport};
