//! European option pricing with operator-stable Lévy log-price fluctuations.
//!
//! The log-price follows `alpha dt + sigma . dL_t` where `L` is an
//! operator-stable Lévy process with exponent matrix `E`. Prices come from
//! the Fourier-space solution of the resulting pricing equation; a Monte
//! Carlo oracle with exact terminal sampling cross-checks them.

pub mod charfn;
pub mod config;
pub mod error;
pub mod exec;
pub mod mc_oracle;
pub mod moments;
pub mod pde_coeffs;
pub mod pricer;
pub mod quad;
pub mod special;
pub mod stable_index;

pub use charfn::{AngularFn, Branch, ContinuationMode, LogCharFn, MarketModel, Projection};
pub use config::ModelConfig;
pub use error::{Error, Result};
pub use exec::Execution;
pub use mc_oracle::{Measure, SimConfig};
pub use pricer::{OptionContract, OptionStyle, PriceReport};
pub use quad::QuadratureConfig;
pub use stable_index::{Regime, StableIndex};
