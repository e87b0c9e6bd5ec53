//! Train/validation splits, error measures and the cross-validation driver.
//!
//! Measures follow the double-average convention: each is computed per
//! split over the validation sites, then averaged over all splits. The
//! relative error keeps the *signed* truth value in the denominator, so
//! data that are entirely negative produce a negative mean relative error;
//! this is deliberate and matches how skewed geophysical benchmarks are
//! usually reported with this family of methods.

use std::time::Instant;

use crate::baselines::{idw_predict, ok_predict};
use crate::engine::predict;
use crate::error::{Error, Result};
use crate::params::{Hyperparams, ModelParams};
use crate::point::PointSet;
use crate::rng::{derive_seed, CounterRng, Phase};
use crate::synth::WmParams;

/// Deterministic train/validation partitions of `n` sites.
#[derive(Debug, Clone)]
pub struct SplitPlan {
    pub tr: f64,
    pub n_splits: usize,
    pub seed: u64,
    splits: Vec<(Vec<usize>, Vec<usize>)>,
}

impl SplitPlan {
    pub fn train(&self, split: usize) -> &[usize] {
        &self.splits[split].0
    }

    pub fn validation(&self, split: usize) -> &[usize] {
        &self.splits[split].1
    }
}

/// `n_splits` independent uniform partitions with `floor(tr * n)` training
/// sites each. Identical seeds give identical plans.
pub fn make_splits(n: usize, tr: f64, n_splits: usize, seed: u64) -> Result<SplitPlan> {
    if !(tr > 0.0 && tr < 1.0) || !tr.is_finite() {
        return Err(Error::InvalidSplit(format!(
            "training fraction {tr} outside (0, 1)"
        )));
    }
    if n_splits == 0 {
        return Err(Error::InvalidSplit("need at least one split".into()));
    }
    let n_train = (tr * n as f64).floor() as usize;
    if n_train < 1 || n_train > n.saturating_sub(1) {
        return Err(Error::InvalidSplit(format!(
            "floor({tr} * {n}) = {n_train} leaves no validation or no training data"
        )));
    }

    let splits = (0..n_splits)
        .map(|v| {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = CounterRng::for_stream(seed, Phase::Split, v as u64);
            // Fisher-Yates
            for i in (1..n).rev() {
                let j = rng.next_below((i + 1) as u64) as usize;
                order.swap(i, j);
            }
            let mut train = order[..n_train].to_vec();
            let mut validation = order[n_train..].to_vec();
            train.sort_unstable();
            validation.sort_unstable();
            (train, validation)
        })
        .collect();

    Ok(SplitPlan {
        tr,
        n_splits,
        seed,
        splits,
    })
}

/// Error measures of one prediction against the ground truth.
///
/// `are` is absent when any truth value is zero; `r` is absent when either
/// side has no variance or fewer than two points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measures {
    /// Mean absolute error.
    pub ae: f64,
    /// Mean relative error: `|truth - pred| / truth` with signed denominator.
    pub are: Option<f64>,
    /// Root mean square error.
    pub rse: f64,
    /// Pearson correlation coefficient.
    pub r: Option<f64>,
}

pub fn compute_measures(truth: &[f64], pred: &[f64]) -> Result<Measures> {
    if truth.len() != pred.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} truth values vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::InvalidParameter("no validation points".into()));
    }
    let n = truth.len() as f64;

    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut rel_sum = 0.0;
    let mut rel_defined = true;
    for (&z, &zh) in truth.iter().zip(pred) {
        let eps = z - zh;
        abs_sum += eps.abs();
        sq_sum += eps * eps;
        if z == 0.0 {
            rel_defined = false;
        } else {
            rel_sum += eps.abs() / z;
        }
    }
    let ae = abs_sum / n;
    let rse = (sq_sum / n).sqrt();
    let are = rel_defined.then_some(rel_sum / n);

    let r = if truth.len() < 2 {
        None
    } else {
        let tm = truth.iter().sum::<f64>() / n;
        let pm = pred.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut tv = 0.0;
        let mut pv = 0.0;
        for (&z, &zh) in truth.iter().zip(pred) {
            cov += (z - tm) * (zh - pm);
            tv += (z - tm) * (z - tm);
            pv += (zh - pm) * (zh - pm);
        }
        (tv > 0.0 && pv > 0.0).then(|| cov / (tv * pv).sqrt())
    };

    Ok(Measures { ae, are, rse, r })
}

/// Measures plus wall time for one split.
#[derive(Debug, Clone, Copy)]
pub struct SplitOutcome {
    pub measures: Measures,
    /// Wall-clock seconds of the prediction call only.
    pub t_cpu: f64,
}

/// Per-split outcomes and their aggregates over all splits.
#[derive(Debug, Clone)]
pub struct MeasureReport {
    pub per_split: Vec<SplitOutcome>,
    /// Mean absolute error averaged over splits.
    pub mae: f64,
    /// Mean relative error averaged over splits; absent if any split's is.
    pub mare: Option<f64>,
    /// Per-split root mean square errors averaged over splits (the root is
    /// taken inside each split, not over the pool).
    pub mrse: f64,
    /// Mean Pearson correlation; absent if any split's is.
    pub mr: Option<f64>,
    pub t_cpu_mean: f64,
    pub t_cpu_std: f64,
}

impl MeasureReport {
    fn from_splits(per_split: Vec<SplitOutcome>) -> Self {
        let v = per_split.len() as f64;
        let mae = per_split.iter().map(|s| s.measures.ae).sum::<f64>() / v;
        let mrse = per_split.iter().map(|s| s.measures.rse).sum::<f64>() / v;
        let mare = per_split
            .iter()
            .map(|s| s.measures.are)
            .sum::<Option<f64>>()
            .map(|t| t / v);
        let mr = per_split
            .iter()
            .map(|s| s.measures.r)
            .sum::<Option<f64>>()
            .map(|t| t / v);
        let t_mean = per_split.iter().map(|s| s.t_cpu).sum::<f64>() / v;
        let t_var = per_split
            .iter()
            .map(|s| (s.t_cpu - t_mean) * (s.t_cpu - t_mean))
            .sum::<f64>()
            / v;
        MeasureReport {
            per_split,
            mae,
            mare,
            mrse,
            mr,
            t_cpu_mean: t_mean,
            t_cpu_std: t_var.sqrt(),
        }
    }
}

/// Interpolation method run inside cross-validation.
#[derive(Debug, Clone)]
pub enum Method {
    /// The spin interpolator; each split derives its own seed from the plan.
    Mprs(ModelParams, Hyperparams),
    /// Ordinary kriging with the given covariance.
    OrdinaryKriging(WmParams),
    /// Inverse distance weighting with the given power.
    Idw { power: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mprs(..) => "mprs",
            Method::OrdinaryKriging(_) => "ok",
            Method::Idw { .. } => "idw",
        }
    }
}

/// Run `method` on every split of the plan: train on the training subset,
/// predict the validation sites, measure against the held-out truth.
///
/// Only the prediction call is timed. A failing split aborts the whole
/// report with the split index attached.
pub fn crossval(data: &PointSet, plan: &SplitPlan, method: &Method) -> Result<MeasureReport> {
    let values = data
        .values()
        .ok_or_else(|| Error::InvalidParameter("cross-validation data carries no values".into()))?;

    let mut per_split = Vec::with_capacity(plan.n_splits);
    for v in 0..plan.n_splits {
        let train = data.subset(plan.train(v));
        let queries = data.subset(plan.validation(v)).without_values();
        let truth: Vec<f64> = plan.validation(v).iter().map(|&i| values[i]).collect();

        let started = Instant::now();
        let pred = match method {
            Method::Mprs(params, hyper) => {
                let mut h = hyper.clone();
                h.seed = derive_seed(plan.seed, Phase::SplitSeed, v as u64);
                predict(&train, &queries, params, &h)?.mean
            }
            Method::OrdinaryKriging(cov) => ok_predict(&train, &queries, cov)?.0,
            Method::Idw { power } => idw_predict(&train, &queries, *power)?,
        };
        let t_cpu = started.elapsed().as_secs_f64();

        let measures = compute_measures(&truth, &pred)
            .map_err(|e| Error::InvalidParameter(format!("split {v}: {e}")))?;
        per_split.push(SplitOutcome { measures, t_cpu });
    }
    Ok(MeasureReport::from_splits(per_split))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    #[test]
    fn split_sizes_follow_floor() {
        let plan = make_splits(10, 0.5, 3, 1).unwrap();
        for v in 0..3 {
            assert_eq!(plan.train(v).len(), 5);
            assert_eq!(plan.validation(v).len(), 5);
        }
        let plan = make_splits(1000, 0.10, 2, 1).unwrap();
        assert_eq!(plan.train(0).len(), 100);
        assert_eq!(plan.validation(0).len(), 900);
    }

    #[test]
    fn splits_partition_the_indices() {
        let plan = make_splits(57, 0.33, 5, 9).unwrap();
        for v in 0..5 {
            let mut all: Vec<usize> = plan.train(v).iter().chain(plan.validation(v)).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..57).collect::<Vec<_>>());
        }
    }

    #[test]
    fn plans_are_deterministic_and_distinct() {
        let a = make_splits(100, 0.3, 4, 7).unwrap();
        let b = make_splits(100, 0.3, 4, 7).unwrap();
        for v in 0..4 {
            assert_eq!(a.train(v), b.train(v));
        }
        assert_ne!(a.train(0), a.train(1));
    }

    #[test]
    fn degenerate_fractions_are_rejected() {
        assert!(make_splits(10, 0.0, 1, 0).is_err());
        assert!(make_splits(10, 1.0, 1, 0).is_err());
        assert!(make_splits(10, 0.05, 1, 0).is_err()); // floor = 0
        // floor(0.99 * 3) = 2 still leaves one validation point
        assert!(make_splits(3, 0.99, 1, 0).is_ok());
    }

    #[test]
    fn measures_hand_example() {
        // errors {1, -1, 2} on truths {10, 10, 10}
        let truth = [10.0, 10.0, 10.0];
        let pred = [9.0, 11.0, 8.0];
        let m = compute_measures(&truth, &pred).unwrap();
        assert!((m.ae - 4.0 / 3.0).abs() < 1e-15);
        assert!((m.rse - 2f64.sqrt()).abs() < 1e-15);
        assert!((m.are.unwrap() - (0.1 + 0.1 + 0.2) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_prediction() {
        let truth = [1.0, 2.0, 3.0, 4.0];
        let m = compute_measures(&truth, &truth).unwrap();
        assert_eq!(m.ae, 0.0);
        assert_eq!(m.rse, 0.0);
        assert!((m.r.unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negative_truths_give_negative_relative_error() {
        let truth = [-0.4, -0.2, -0.3];
        let pred = [-0.35, -0.25, -0.28];
        let m = compute_measures(&truth, &pred).unwrap();
        assert!(m.are.unwrap() < 0.0);
    }

    #[test]
    fn zero_truth_suppresses_relative_error() {
        let m = compute_measures(&[0.0, 1.0], &[0.1, 1.1]).unwrap();
        assert!(m.are.is_none());
    }

    #[test]
    fn constant_series_has_no_correlation() {
        let m = compute_measures(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]).unwrap();
        assert!(m.r.is_none());
        let m = compute_measures(&[5.0], &[4.0]).unwrap();
        assert!(m.r.is_none());
    }

    #[test]
    fn mae_bounded_by_rse() {
        let mut rng = CounterRng::from_key(&[71]);
        for _ in 0..50 {
            let truth: Vec<f64> = (0..30).map(|_| rng.next_f64() * 10.0 + 1.0).collect();
            let pred: Vec<f64> = truth.iter().map(|z| z + rng.next_f64() - 0.5).collect();
            let m = compute_measures(&truth, &pred).unwrap();
            assert!(m.ae <= m.rse + 1e-12);
        }
    }

    fn toy_data(n: usize, key: u64) -> PointSet {
        let mut rng = CounterRng::from_key(&[key]);
        let coords: Vec<f64> = (0..2 * n).map(|_| rng.next_f64() * 10.0).collect();
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let x = coords[2 * i];
                let y = coords[2 * i + 1];
                20.0 + x + 0.5 * y + rng.next_f64()
            })
            .collect();
        PointSet::new(2, coords, Some(values)).unwrap()
    }

    #[test]
    fn single_split_report_equals_split_measures() {
        let data = toy_data(60, 81);
        let plan = make_splits(60, 0.5, 1, 3).unwrap();
        let report = crossval(&data, &plan, &Method::Idw { power: 2.0 }).unwrap();
        assert_eq!(report.per_split.len(), 1);
        assert_eq!(report.mae, report.per_split[0].measures.ae);
        assert_eq!(report.mrse, report.per_split[0].measures.rse);
        assert_eq!(report.mr, report.per_split[0].measures.r);
    }

    #[test]
    fn idw_report_is_reproducible() {
        let data = toy_data(50, 82);
        let plan = make_splits(50, 0.4, 6, 11).unwrap();
        let a = crossval(&data, &plan, &Method::Idw { power: 2.0 }).unwrap();
        let b = crossval(&data, &plan, &Method::Idw { power: 2.0 }).unwrap();
        assert_eq!(a.mae, b.mae);
        assert_eq!(a.mrse, b.mrse);
        assert!(a.t_cpu_mean >= 0.0 && a.t_cpu_std >= 0.0);
    }

    #[test]
    fn mprs_crossval_runs_and_is_deterministic() {
        let data = toy_data(80, 83);
        let plan = make_splits(80, 0.5, 2, 17).unwrap();
        let method = Method::Mprs(ModelParams::default(), Hyperparams::default());
        let a = crossval(&data, &plan, &method).unwrap();
        let b = crossval(&data, &plan, &method).unwrap();
        assert_eq!(a.mae, b.mae);
        assert!(a.mae > 0.0);
    }

    proptest! {
        #[test]
        fn measures_are_permutation_invariant(key in 0u64..30) {
            let mut rng = CounterRng::from_key(&[900 + key]);
            let n = 25;
            let truth: Vec<f64> = (0..n).map(|_| rng.next_f64() * 9.0 + 1.0).collect();
            let pred: Vec<f64> = truth.iter().map(|z| z + rng.next_f64() - 0.5).collect();
            let m1 = compute_measures(&truth, &pred).unwrap();

            let perm: Vec<usize> = {
                let mut p: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    let j = rng.next_below((i + 1) as u64) as usize;
                    p.swap(i, j);
                }
                p
            };
            let t2: Vec<f64> = perm.iter().map(|&i| truth[i]).collect();
            let p2: Vec<f64> = perm.iter().map(|&i| pred[i]).collect();
            let m2 = compute_measures(&t2, &p2).unwrap();
            prop_assert!((m1.ae - m2.ae).abs() < 1e-12);
            prop_assert!((m1.rse - m2.rse).abs() < 1e-12);
            prop_assert!((m1.r.unwrap() - m2.r.unwrap()).abs() < 1e-12);
        }

        #[test]
        fn correlation_affine_invariance(a in 0.1f64..5.0, b in -10.0f64..10.0, key in 0u64..30) {
            let mut rng = CounterRng::from_key(&[950 + key]);
            let truth: Vec<f64> = (0..20).map(|_| rng.next_f64() * 10.0 + 1.0).collect();
            let pred: Vec<f64> = truth.iter().map(|z| z + 2.0 * rng.next_f64() - 1.0).collect();
            let r0 = compute_measures(&truth, &pred).unwrap().r.unwrap();

            let scaled: Vec<f64> = pred.iter().map(|z| a * z + b).collect();
            let r1 = compute_measures(&truth, &scaled).unwrap().r.unwrap();
            prop_assert!((r0 - r1).abs() < 1e-10);

            let negated: Vec<f64> = pred.iter().map(|z| -a * z + b).collect();
            let r2 = compute_measures(&truth, &negated).unwrap().r.unwrap();
            prop_assert!((r0 + r2).abs() < 1e-10);
        }
    }
}
