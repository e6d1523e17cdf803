pub mod config;
pub mod dixon;
pub mod error;
pub mod forward;
pub mod hyperbolicity;
pub mod intersection;
pub mod invariant;
pub mod numrange;
pub mod poly;
pub mod represent;
pub mod roots;
pub mod shift;

pub use config::Config;
pub use error::{Error, Result};
pub use invariant::InvariantForm;
pub use poly::{Monomial, TrivariatePoly};
pub use shift::ShiftMatrix;
