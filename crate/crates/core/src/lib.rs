//! Kramers-diffusion model of heavy-nucleus decay half-lives (α, cluster and
//! spontaneous fission), its 20-parameter inverse problem, a Gamow tunneling
//! comparator and a Langevin Monte Carlo check of the Kramers escape rate.

pub mod data;
pub mod error;
pub mod gamow;
pub mod inverse;
pub mod kramers;
pub mod langevin;
pub mod params;

pub use data::{load_dataset, Dataset, DecayClass, NuclideRecord, PhysicalConstants, Role};
pub use error::{Error, Estimate, Result, Warning};
pub use inverse::{fit, FitConfig, FitResult, Weighting};
pub use kramers::{kramers_rate_full, Convention, KramersBreakdown, KramersModel, RadiusVariant};
pub use langevin::{potential_features, simulate_escape, EscapeStats, PotentialFeatures, PotentialSpec, SimConfig};
pub use params::{parse_params, ParameterSet, N_PARAMS};
