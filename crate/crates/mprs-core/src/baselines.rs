//! Reference interpolators: inverse distance weighting and dense ordinary
//! kriging.
//!
//! Both are applied with the entire training set per prediction point, no
//! search neighborhood. Ordinary kriging takes its covariance parameters as
//! input; no variogram fitting happens here.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::point::{dist_sq, PointSet};
use crate::synth::{wm_covariance, WmParams};

/// Shepard inverse-distance-weighted prediction over all samples.
///
/// A query coinciding with a sample returns that sample's value exactly (the
/// lowest-index match wins); everywhere else the result is the convex
/// combination with weights `r^-power`, so predictions always stay inside
/// the sample value range.
pub fn idw_predict(samples: &PointSet, queries: &PointSet, power: f64) -> Result<Vec<f64>> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidParameter("power must be positive".into()));
    }
    if samples.dim() != queries.dim() {
        return Err(Error::DimensionMismatch(format!(
            "samples are {}-d but queries are {}-d",
            samples.dim(),
            queries.dim()
        )));
    }
    let values = samples
        .values()
        .ok_or_else(|| Error::InvalidParameter("sample set carries no values".into()))?;
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }

    let out: Vec<f64> = (0..queries.len())
        .into_par_iter()
        .map(|q| {
            let qc = queries.coord(q);
            let mut num = 0.0;
            let mut den = 0.0;
            for i in 0..samples.len() {
                let d2 = dist_sq(qc, samples.coord(i));
                if d2 == 0.0 {
                    return values[i];
                }
                let w = d2.powf(-0.5 * power);
                num += w * values[i];
                den += w;
            }
            num / den
        })
        .collect();
    Ok(out)
}

/// Ordinary kriging with a user-supplied Whittle-Matern covariance.
///
/// One dense `(n+1) x (n+1)` system (sample covariances plus the
/// unbiasedness row of ones) is factorized once and re-solved per query.
/// Returns the predictions and the kriging variances.
///
/// Duplicate sample sites make the system singular and are reported with
/// their indices.
pub fn ok_predict(
    samples: &PointSet,
    queries: &PointSet,
    cov: &WmParams,
) -> Result<(Vec<f64>, Vec<f64>)> {
    cov.validate()?;
    if samples.dim() != queries.dim() {
        return Err(Error::DimensionMismatch(format!(
            "samples are {}-d but queries are {}-d",
            samples.dim(),
            queries.dim()
        )));
    }
    let values = samples
        .values()
        .ok_or_else(|| Error::InvalidParameter("sample set carries no values".into()))?;
    let n = samples.len();
    if n == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }

    // Coinciding samples give identical covariance rows; report them rather
    // than let the factorization blow up.
    let duplicates = duplicate_sites(samples);
    if !duplicates.is_empty() {
        return Err(Error::SingularSystem { duplicates });
    }

    // Augmented system: [C 1; 1^T 0] [w; lambda] = [c_q; 1]
    let mut system = DMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        system[(i, i)] = cov.sigma * cov.sigma;
        for j in 0..i {
            let c = wm_covariance(dist_sq(samples.coord(i), samples.coord(j)).sqrt(), cov);
            system[(i, j)] = c;
            system[(j, i)] = c;
        }
        system[(i, n)] = 1.0;
        system[(n, i)] = 1.0;
    }

    let lu = system.lu();
    let sigma2 = cov.sigma * cov.sigma;
    let results: Vec<Result<(f64, f64)>> = (0..queries.len())
        .into_par_iter()
        .map(|q| {
            let qc = queries.coord(q);
            let mut rhs = DVector::zeros(n + 1);
            for i in 0..n {
                rhs[i] = wm_covariance(dist_sq(qc, samples.coord(i)).sqrt(), cov);
            }
            rhs[n] = 1.0;
            let sol = lu
                .solve(&rhs)
                .filter(|s| s.iter().all(|v| v.is_finite()))
                .ok_or(Error::SingularSystem { duplicates: Vec::new() })?;
            let mut value = 0.0;
            let mut variance = sigma2 - sol[n]; // sigma^2 - lambda
            for i in 0..n {
                value += sol[i] * values[i];
                variance -= sol[i] * rhs[i];
            }
            Ok((value, variance.max(0.0)))
        })
        .collect();

    let mut out_val = Vec::with_capacity(queries.len());
    let mut out_var = Vec::with_capacity(queries.len());
    for r in results {
        let (v, s) = r?;
        out_val.push(v);
        out_var.push(s);
    }
    Ok((out_val, out_var))
}

fn duplicate_sites(samples: &PointSet) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| {
        samples
            .coord(a)
            .partial_cmp(samples.coord(b))
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut dups = Vec::new();
    for w in order.windows(2) {
        if samples.coord(w[0]) == samples.coord(w[1]) {
            dups.push((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    dups.sort_unstable();
    dups
}
