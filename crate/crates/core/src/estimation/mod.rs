//! Likelihoods, Yule–Walker warm starts, maximum likelihood and BIC.

pub(crate) mod likelihood;
mod mixture;
pub(crate) mod mle;
pub mod transform;
mod yule_walker;

pub use likelihood::{
    loglik_dar, loglik_dar_gradient, loglik_vdar1, loglik_vdar1_gradient, loglik_vdar_bivariate,
    loglik_vdar_bivariate_gradient, MAX_ORDER,
};
pub use mle::{bic, mle_dar, mle_vdar1, mle_vdar_bivariate, select_order_bic, FitResult};
pub use yule_walker::{
    map_var1_to_vdar1, yule_walker_bivariate, yule_walker_dar, yule_walker_vdar1, YuleWalker,
};
