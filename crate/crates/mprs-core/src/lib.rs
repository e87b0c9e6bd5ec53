//! MPRS spatial regression toolkit.
//!
//! MPRS ("modified planar rotator for scattered data") is a non-parametric
//! interpolator for scattered or gridded data in any dimension. Sample values
//! are mapped to spin angles on `[0, 2pi]`, prediction sites interact with
//! their nearest sample neighbors through exponentially distance-decaying
//! couplings, and the unknown angles are relaxed to thermal equilibrium by
//! restricted Metropolis Monte Carlo. Predictions are the per-site means over
//! a sequence of equilibrium states, back-transformed to data units.
//!
//! The crate also ships the pieces needed to benchmark the method end to end:
//!
//! * [`baselines`] — inverse distance weighting and dense ordinary kriging;
//! * [`synth`] — Gaussian/lognormal random fields with Whittle-Matern
//!   covariance on scattered sites;
//! * [`validation`] — train/validation splits, error measures and a
//!   cross-validation driver.
//!
//! ```
//! use mprs_core::{engine, Hyperparams, ModelParams, PointSet};
//!
//! let samples = PointSet::new(1, vec![0.0, 1.0, 2.0, 3.0, 4.0],
//!                             Some(vec![10.0, 12.0, 14.0, 16.0, 18.0])).unwrap();
//! let queries = PointSet::new(1, vec![1.5, 2.5], None).unwrap();
//! let params = ModelParams { n_b: 4, ..ModelParams::default() };
//! let result = engine::predict(&samples, &queries, &params, &Hyperparams::default()).unwrap();
//! assert!(result.mean.iter().all(|z| (10.0..=18.0).contains(z)));
//! ```

pub mod baselines;
pub mod bessel;
pub mod engine;
mod error;
pub mod neighbor;
mod params;
mod point;
pub mod rng;
pub mod synth;
mod transform;
pub mod validation;

pub use error::{Error, Result};
pub use params::{BandwidthRule, EquilibriumPerturbation, Hyperparams, InitMode, ModelParams};
pub use point::PointSet;
pub use transform::{from_spin_angles, to_spin_angles, SpinState, TransformBounds};

pub use engine::{McTrace, PredictionResult};
pub use neighbor::NeighborGraph;
pub use synth::WmParams;
pub use validation::{MeasureReport, Measures, Method, SplitPlan};
