use crate::error::{Error, Result};

/// How the per-prediction-point decay length (bandwidth) is obtained.
///
/// Only one rule is currently defined: the median distance to the four
/// nearest sample neighbors, applied regardless of `n_b`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum BandwidthRule {
    #[default]
    MedianNearest4,
}

/// Model parameters of the spin interpolator.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Number of interacting sample neighbors per prediction point.
    pub n_b: usize,
    /// Dimensionless simulation temperature (k_B T / J_0).
    pub temperature: f64,
    /// Bandwidth rule producing the coupling decay lengths.
    pub bandwidth_rule: BandwidthRule,
    /// Coupling prefactor; the interaction scale is set by `j0 / temperature`.
    pub j0: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            n_b: 8,
            temperature: 1e-3,
            bandwidth_rule: BandwidthRule::MedianNearest4,
            j0: 1.0,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_b == 0 {
            return Err(Error::InvalidParameter("n_b must be >= 1".into()));
        }
        if !(self.temperature > 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter("temperature must be positive".into()));
        }
        if !(self.j0 > 0.0) || !self.j0.is_finite() {
            return Err(Error::InvalidParameter("j0 must be positive".into()));
        }
        Ok(())
    }
}

/// Initial spin assignment at prediction points.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum InitMode {
    /// Angles drawn uniformly from `[0, 2pi)`.
    #[default]
    RandomUniform,
    /// Each prediction point copies the angle of its nearest sample.
    NearestNeighbor,
}

/// Perturbation factor used while generating equilibrium realizations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EquilibriumPerturbation {
    /// The literal constant 1: full-width proposals, mostly rejected at low
    /// temperature, so realizations stay close to the relaxed state.
    #[default]
    LiteralOne,
    /// Carry the perturbation factor adapted during relaxation, so the
    /// equilibrium phase keeps mixing at the relaxed acceptance level.
    CarryAdapted,
}

/// Hyperparameters steering the learning loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparams {
    /// Number of equilibrium realizations averaged into the prediction.
    pub realizations: usize,
    /// Cap on the number of relaxation sweeps.
    pub max_relax_sweeps: usize,
    /// Target Metropolis acceptance ratio.
    pub target_acceptance: f64,
    /// Variation rate of the perturbation control factor.
    pub adapt_rate: f64,
    /// Equilibrium checks run every this many sweeps.
    pub check_interval: usize,
    /// Number of trailing energy values entering each slope fit.
    pub fit_window: usize,
    pub init_mode: InitMode,
    /// When true, prediction points coinciding with a sample copy the sample
    /// value and are excluded from updating (exact interpolation).
    pub respect_samples: bool,
    pub equilibrium_perturbation: EquilibriumPerturbation,
    /// Keep the full realization matrix in the prediction result.
    pub keep_realizations: bool,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            realizations: 100,
            max_relax_sweeps: 500,
            target_acceptance: 0.3,
            adapt_rate: 3.0,
            check_interval: 5,
            fit_window: 20,
            init_mode: InitMode::default(),
            respect_samples: true,
            equilibrium_perturbation: EquilibriumPerturbation::default(),
            keep_realizations: false,
            seed: 0,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::InvalidParameter("realizations must be >= 1".into()));
        }
        if self.fit_window < 2 {
            return Err(Error::InvalidParameter(
                "fit_window must be >= 2 (slope fit needs two points)".into(),
            ));
        }
        if self.check_interval == 0 {
            return Err(Error::InvalidParameter("check_interval must be >= 1".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::InvalidParameter(
                "target_acceptance must lie in (0, 1)".into(),
            ));
        }
        if !(self.adapt_rate > 0.0) || !self.adapt_rate.is_finite() {
            return Err(Error::InvalidParameter("adapt_rate must be positive".into()));
        }
        Ok(())
    }
}
