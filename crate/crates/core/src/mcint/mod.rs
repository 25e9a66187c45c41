//! Monte Carlo machinery: estimators, proposal densities and the idler
//! sampler.

pub mod estimator;
pub mod mixture;
pub mod sampler;

pub use estimator::{mc_integrate, stream_rng, McEstimate, MomentAccumulator};
pub use mixture::{GaussianMixture3, SincSqProposal};
pub use sampler::{sample_idler, IdlerSample};
