//! The bidirectional map between data values and spin angles.
//!
//! Training values are mapped affinely onto `[0, 2pi]`: the training minimum
//! lands exactly on 0 and the training maximum exactly on `2pi`. The two
//! endpoints are *not* identified — an angle difference of `2pi` is the
//! maximally distant pair in the pairwise energy, which divides angle
//! differences by two before taking the cosine.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Data range of the training samples, fixed for the whole prediction run.
///
/// Computed exclusively from training values; validation data never enter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformBounds {
    pub z_min: f64,
    pub z_max: f64,
}

impl TransformBounds {
    pub fn from_training(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter(
                "cannot derive transform bounds from an empty training set".into(),
            ));
        }
        if let Some(bad) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFiniteInput(format!("training value at {bad}")));
        }
        let z_min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let z_max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(TransformBounds { z_min, z_max })
    }

    /// Constant training data: the angle transform is undefined and callers
    /// short-circuit to a constant prediction.
    pub fn is_degenerate(&self) -> bool {
        self.z_max == self.z_min
    }

    pub fn range(&self) -> f64 {
        self.z_max - self.z_min
    }
}

/// Map data values onto spin angles in `[0, 2pi]`.
///
/// Strictly increasing and affine; `z_min` maps exactly to 0 and `z_max`
/// exactly to `2pi`. Fails with [`Error::DegenerateRange`] when the bounds
/// coincide.
pub fn to_spin_angles(values: &[f64], bounds: &TransformBounds) -> Result<Vec<f64>> {
    if bounds.is_degenerate() {
        return Err(Error::DegenerateRange(bounds.z_min));
    }
    let range = bounds.range();
    values
        .iter()
        .map(|&z| {
            if !z.is_finite() {
                return Err(Error::NonFiniteInput(format!("value {z}")));
            }
            // unit ratio first: z in [z_min, z_max] then gives phi <= 2pi
            // exactly, with the endpoints mapping to exactly 0 and 2pi
            Ok(TAU * ((z - bounds.z_min) / range))
        })
        .collect()
}

/// Invert [`to_spin_angles`]: angles back to data units.
///
/// The output always lies inside `[z_min, z_max]` for angles in `[0, 2pi]`,
/// which is what makes every prediction of the pipeline range-bounded.
pub fn from_spin_angles(angles: &[f64], bounds: &TransformBounds) -> Result<Vec<f64>> {
    angles
        .iter()
        .map(|&phi| {
            if !phi.is_finite() {
                return Err(Error::NonFiniteInput(format!("angle {phi}")));
            }
            Ok(value_from_angle(phi, bounds))
        })
        .collect()
}

#[inline]
pub(crate) fn value_from_angle(phi: f64, bounds: &TransformBounds) -> f64 {
    // clamp: the affine map can overshoot the bounds by one ulp
    (bounds.z_min + bounds.range() * (phi / TAU)).clamp(bounds.z_min, bounds.z_max)
}

/// Spin angles at sample sites (fixed) and prediction sites (mutable).
#[derive(Debug, Clone)]
pub struct SpinState {
    sample_angles: Vec<f64>,
    pub pred_angles: Vec<f64>,
    bounds: TransformBounds,
}

impl SpinState {
    pub fn new(sample_angles: Vec<f64>, pred_angles: Vec<f64>, bounds: TransformBounds) -> Self {
        debug_assert!(sample_angles.iter().all(|&a| (0.0..=TAU).contains(&a)));
        debug_assert!(pred_angles.iter().all(|&a| (0.0..=TAU).contains(&a)));
        SpinState {
            sample_angles,
            pred_angles,
            bounds,
        }
    }

    /// Sample angles never change after construction.
    pub fn sample_angles(&self) -> &[f64] {
        &self.sample_angles
    }

    /// Simultaneous read access to the fixed sample angles and write access
    /// to the prediction angles (the only mutation a sweep performs).
    pub fn split_mut(&mut self) -> (&[f64], &mut [f64]) {
        (&self.sample_angles, &mut self.pred_angles)
    }

    pub fn bounds(&self) -> &TransformBounds {
        &self.bounds
    }

    pub fn n_pred(&self) -> usize {
        self.pred_angles.len()
    }
}
