pub mod error;
pub mod lasso_select;
pub mod oracle;
pub mod quadrature;
pub mod quantile_ci;
pub mod rand_cond_normal;
pub mod scalar_normal;
pub mod sim;
pub mod selective_designs;
pub mod trunc_set;

pub use error::{Error, Result};
