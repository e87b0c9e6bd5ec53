//! The MPRS learner: local energy evaluation, restricted Metropolis sweeps
//! with adaptive perturbation control, equilibrium detection through the
//! fitted energy-trend slope, and equilibrium averaging into predictions.
//!
//! # Structure of a prediction run
//!
//! 1. Training values are mapped to spin angles; prediction angles are
//!    initialized randomly or from the nearest sample.
//! 2. *Relaxation*: Metropolis sweeps drive the total energy downhill. Every
//!    sweep proposes one restricted move per prediction point; the proposal
//!    width `pi / a` shrinks as the control factor `a` adapts whenever the
//!    acceptance ratio falls below its target. Every `check_interval` sweeps
//!    (once `fit_window` energies exist) a degree-one Savitzky-Golay trend —
//!    the least-squares slope over the trailing window — is fitted; the loop
//!    ends when the slope turns non-negative or the sweep cap is reached.
//! 3. *Equilibrium*: a further `realizations` sweeps are taken and each state
//!    is back-transformed to data units; per-point mean and standard
//!    deviation over those realizations form the prediction.
//!
//! Because prediction points never interact with each other, the energy
//! change of a proposal involves only that point's fixed sample neighbors.
//! Updates within a sweep therefore commute, and with one counter-based
//! random stream per `(sweep, point)` the result is bitwise identical no
//! matter how many threads execute the sweep or in what order.

use std::f64::consts::TAU;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::neighbor::{build_graph, NeighborGraph};
use crate::params::{EquilibriumPerturbation, Hyperparams, InitMode, ModelParams};
use crate::point::PointSet;
use crate::rng::{CounterRng, Phase};
use crate::transform::{to_spin_angles, value_from_angle, SpinState, TransformBounds};

/// Per-sweep record of the relaxation phase.
#[derive(Debug, Clone, Default)]
pub struct McTrace {
    /// Total energy after each sweep.
    pub energy: Vec<f64>,
    /// Fraction of accepted proposals per sweep.
    pub acceptance: Vec<f64>,
    /// Perturbation control factor in effect during each sweep.
    pub a_factor: Vec<f64>,
    /// Fitted energy slope at each equilibrium check: `(sweep, slope)`.
    pub slope: Vec<(usize, f64)>,
    /// Number of non-equilibrium sweeps performed.
    pub relax_sweeps: usize,
}

impl McTrace {
    /// Perturbation factor after the last relaxation sweep (1 if none ran).
    pub fn final_a(&self) -> f64 {
        self.a_factor.last().copied().unwrap_or(1.0)
    }
}

/// Prediction output in data units.
#[derive(Debug, Clone)]
pub struct PredictionResult {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Full `M x P` realization matrix (row-major), when requested.
    pub realizations: Option<Vec<f64>>,
    pub trace: McTrace,
}

/// Below this many prediction points the sweep loops run sequentially; the
/// parallel dispatch overhead would dominate the arithmetic. Results are
/// bitwise identical either way (per-point streams, fixed-order reductions).
const PAR_THRESHOLD: usize = 4096;

/// Addresses the random stream of every point within one sweep.
#[derive(Debug, Clone, Copy)]
pub struct SweepRng {
    seed: u64,
    phase: Phase,
    sweep: u64,
}

impl SweepRng {
    pub fn new(seed: u64, phase: Phase, sweep: u64) -> Self {
        SweepRng { seed, phase, sweep }
    }

    #[inline]
    pub fn point_stream(&self, point: usize) -> CounterRng {
        CounterRng::for_point(self.seed, self.phase, self.sweep, point as u64)
    }
}

/// Interaction energy of one prediction point at a candidate angle:
/// `-sum_j J_{p,j} cos((angle - phi_j) / 2)` over its sample neighbors.
#[inline]
pub fn local_energy(p: usize, angle: f64, state: &SpinState, graph: &NeighborGraph) -> f64 {
    let samples = state.sample_angles();
    let mut e = 0.0;
    for (&j, &coupling) in graph.neighbors(p).iter().zip(graph.couplings(p)) {
        e -= coupling * (0.5 * (angle - samples[j])).cos();
    }
    e
}

fn local_energies(state: &SpinState, graph: &NeighborGraph) -> Vec<f64> {
    let n = state.n_pred();
    if n < PAR_THRESHOLD {
        (0..n)
            .map(|p| local_energy(p, state.pred_angles[p], state, graph))
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|p| local_energy(p, state.pred_angles[p], state, graph))
            .collect()
    }
}

/// Total energy over all prediction points. The constant sample-to-sample
/// part of the Hamiltonian is omitted throughout; only trends matter.
pub fn total_energy(state: &SpinState, graph: &NeighborGraph) -> f64 {
    // Summation in fixed index order keeps the result thread-count invariant.
    local_energies(state, graph).iter().sum()
}

/// Restricted proposal: offset the angle by at most `pi / a` and wrap to
/// `[0, 2pi)`.
#[inline]
pub fn propose(angle: f64, a: f64, u: f64) -> f64 {
    debug_assert!(a >= 1.0);
    (angle + TAU * (u - 0.5) / a).rem_euclid(TAU)
}

/// Metropolis acceptance probability `min(1, exp(-dH/T))`: moves that do not
/// raise the energy are always accepted.
#[inline]
pub fn acceptance_probability(delta_h: f64, temperature: f64) -> f64 {
    if delta_h <= 0.0 {
        1.0
    } else {
        (-delta_h / temperature).exp()
    }
}

/// One restricted Metropolis sweep: every prediction point receives exactly
/// one proposal, accepted iff `min(1, exp(-dH/T))` exceeds a fresh uniform
/// deviate. Returns the acceptance ratio. The state is mutated in place.
pub fn metropolis_sweep(
    state: &mut SpinState,
    graph: &NeighborGraph,
    a: f64,
    temperature: f64,
    rng: &SweepRng,
) -> f64 {
    let mut cache = local_energies(state, graph);
    sweep_cached(state, graph, a, temperature, rng, &mut cache, None)
}

/// Sweep with a per-point local-energy cache (avoids re-evaluating the
/// current configuration) and an optional mask of frozen points.
fn sweep_cached(
    state: &mut SpinState,
    graph: &NeighborGraph,
    a: f64,
    temperature: f64,
    rng: &SweepRng,
    local: &mut [f64],
    frozen: Option<&[bool]>,
) -> f64 {
    let n = state.n_pred();
    if n == 0 {
        return 1.0;
    }
    // Split borrows: proposals read sample angles and the graph, write only
    // their own slot of pred_angles and the cache.
    let (samples_ref, pred_angles) = state.split_mut();
    let update_point = |p: usize, angle: &mut f64, e_cur: &mut f64| -> usize {
        if frozen.is_some_and(|f| f[p]) {
            return 0;
        }
        let mut stream = rng.point_stream(p);
        let u = stream.next_f64();
        let candidate = propose(*angle, a, u);
        let mut e_new = 0.0;
        for (&j, &coupling) in graph.neighbors(p).iter().zip(graph.couplings(p)) {
            e_new -= coupling * (0.5 * (candidate - samples_ref[j])).cos();
        }
        let ap = acceptance_probability(e_new - *e_cur, temperature);
        let r = stream.next_f64();
        if ap > r {
            *angle = candidate;
            *e_cur = e_new;
            1
        } else {
            0
        }
    };
    let accepted: usize = if n < PAR_THRESHOLD {
        pred_angles
            .iter_mut()
            .zip(local.iter_mut())
            .enumerate()
            .map(|(p, (angle, e_cur))| update_point(p, angle, e_cur))
            .sum()
    } else {
        pred_angles
            .par_iter_mut()
            .zip(local.par_iter_mut())
            .enumerate()
            .map(|(p, (angle, e_cur))| update_point(p, angle, e_cur))
            .sum()
    };

    let active = match frozen {
        Some(f) => f.iter().filter(|&&x| !x).count(),
        None => n,
    };
    if active == 0 {
        1.0
    } else {
        accepted as f64 / active as f64
    }
}

/// Least-squares straight-line slope of the trailing energy window — the
/// trend estimate of a degree-one Savitzky-Golay filter, in energy units per
/// sweep.
pub fn sg_slope(energies: &[f64]) -> Result<f64> {
    let n = energies.len();
    if n < 2 {
        return Err(Error::InsufficientHistory { got: n });
    }
    let nf = n as f64;
    let x_mean = 0.5 * (nf - 1.0);
    let y_mean = energies.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, &y) in energies.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

fn relax_masked(
    state: &mut SpinState,
    graph: &NeighborGraph,
    params: &ModelParams,
    hyper: &Hyperparams,
    frozen: Option<&[bool]>,
    local: &mut [f64],
) -> McTrace {
    let mut trace = McTrace::default();
    let mut a = 1.0;
    let mut slope = -1.0;
    let mut i = 0usize;

    while slope < 0.0 && i < hyper.max_relax_sweeps {
        let rng = SweepRng::new(hyper.seed, Phase::Relax, i as u64);
        let acceptance = sweep_cached(state, graph, a, params.temperature, &rng, local, frozen);
        trace.a_factor.push(a);
        trace.acceptance.push(acceptance);
        if acceptance < hyper.target_acceptance {
            a = 1.0 + (i + 1) as f64 / hyper.adapt_rate;
        }
        trace.energy.push(local.iter().sum());
        if i >= hyper.fit_window && i % hyper.check_interval == 0 {
            let window = &trace.energy[trace.energy.len() - hyper.fit_window..];
            slope = sg_slope(window).expect("window holds >= 2 energies");
            trace.slope.push((i, slope));
        }
        i += 1;
    }
    trace.relax_sweeps = i;
    trace
}

/// Non-equilibrium relaxation: sweeps until the fitted energy slope turns
/// non-negative or `max_relax_sweeps` is reached. The state must already be
/// initialized (see [`init_state`]).
pub fn relax(
    state: &mut SpinState,
    graph: &NeighborGraph,
    params: &ModelParams,
    hyper: &Hyperparams,
) -> McTrace {
    let mut local: Vec<f64> = (0..state.n_pred())
        .into_par_iter()
        .map(|p| local_energy(p, state.pred_angles[p], state, graph))
        .collect();
    relax_masked(state, graph, params, hyper, None, &mut local)
}

/// Streaming per-point statistics over the equilibrium realizations.
struct RunningStats {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl RunningStats {
    fn new(n: usize) -> Self {
        RunningStats {
            count: 0.0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    fn update(&mut self, values: &[f64]) {
        self.count += 1.0;
        let count = self.count;
        let step = |mean: &mut f64, m2: &mut f64, z: f64| {
            let delta = z - *mean;
            *mean += delta / count;
            *m2 += delta * (z - *mean);
        };
        if values.len() < PAR_THRESHOLD {
            for ((mean, m2), &z) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
                step(mean, m2, z);
            }
        } else {
            self.mean
                .par_iter_mut()
                .zip(self.m2.par_iter_mut())
                .zip(values.par_iter())
                .for_each(|((mean, m2), &z)| step(mean, m2, z));
        }
    }

    /// Sample standard deviation (n-1 denominator); zero for a single draw.
    fn std(&self) -> Vec<f64> {
        if self.count < 2.0 {
            return vec![0.0; self.m2.len()];
        }
        self.m2
            .iter()
            .map(|&m2| (m2 / (self.count - 1.0)).max(0.0).sqrt())
            .collect()
    }
}

fn collect_masked(
    state: &mut SpinState,
    graph: &NeighborGraph,
    params: &ModelParams,
    hyper: &Hyperparams,
    a_eq: f64,
    frozen: Option<&[bool]>,
    frozen_values: Option<&[f64]>,
    local: &mut [f64],
    keep: bool,
) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let n = state.n_pred();
    let bounds = *state.bounds();
    let mut stats = RunningStats::new(n);
    let mut rows = keep.then(|| Vec::with_capacity(hyper.realizations * n));
    let mut z_row = vec![0.0; n];

    for j in 0..hyper.realizations {
        let rng = SweepRng::new(hyper.seed, Phase::Equilibrium, j as u64);
        sweep_cached(state, graph, a_eq, params.temperature, &rng, local, frozen);
        z_row
            .par_iter_mut()
            .enumerate()
            .for_each(|(p, z)| *z = value_from_angle(state.pred_angles[p], &bounds));
        if let (Some(f), Some(fv)) = (frozen, frozen_values) {
            for p in 0..n {
                if f[p] {
                    z_row[p] = fv[p];
                }
            }
        }
        stats.update(&z_row);
        if let Some(rows) = rows.as_mut() {
            rows.extend_from_slice(&z_row);
        }
    }
    let std = stats.std();
    (stats.mean, std, rows)
}

/// Generate `realizations` equilibrium states and return them back-transformed
/// to data units as a flat `M x P` row-major matrix.
///
/// `a_eq` is the perturbation factor used for the equilibrium sweeps; the
/// standard schedule passes the literal constant 1, while carrying the factor
/// adapted during relaxation keeps the chain mixing (see
/// [`EquilibriumPerturbation`]).
pub fn collect_equilibrium(
    state: &mut SpinState,
    graph: &NeighborGraph,
    params: &ModelParams,
    hyper: &Hyperparams,
    a_eq: f64,
) -> Vec<f64> {
    let mut local: Vec<f64> = (0..state.n_pred())
        .into_par_iter()
        .map(|p| local_energy(p, state.pred_angles[p], state, graph))
        .collect();
    let (_, _, rows) = collect_masked(
        state, graph, params, hyper, a_eq, None, None, &mut local, true,
    );
    rows.expect("keep = true")
}

/// Initial spin state: sample angles from the training values, prediction
/// angles per `hyper.init_mode`.
pub fn init_state(
    samples: &PointSet,
    graph: &NeighborGraph,
    hyper: &Hyperparams,
) -> Result<SpinState> {
    let values = samples
        .values()
        .ok_or_else(|| Error::InvalidParameter("sample set carries no values".into()))?;
    let bounds = TransformBounds::from_training(values)?;
    let sample_angles = to_spin_angles(values, &bounds)?;
    let pred_angles = initial_pred_angles(&sample_angles, graph, hyper);
    Ok(SpinState::new(sample_angles, pred_angles, bounds))
}

fn initial_pred_angles(sample_angles: &[f64], graph: &NeighborGraph, hyper: &Hyperparams) -> Vec<f64> {
    match hyper.init_mode {
        InitMode::RandomUniform => {
            let rng = SweepRng::new(hyper.seed, Phase::Init, 0);
            (0..graph.len())
                .map(|p| rng.point_stream(p).next_f64() * TAU)
                .collect()
        }
        InitMode::NearestNeighbor => (0..graph.len())
            .map(|p| sample_angles[graph.neighbors(p)[0]])
            .collect(),
    }
}

/// Full prediction pipeline: transform, neighbor graph, initialization,
/// relaxation, equilibrium averaging.
///
/// Deterministic for a fixed seed regardless of thread count. Constant
/// training data short-circuits to a constant prediction with zero spread.
pub fn predict(
    samples: &PointSet,
    queries: &PointSet,
    params: &ModelParams,
    hyper: &Hyperparams,
) -> Result<PredictionResult> {
    params.validate()?;
    hyper.validate()?;
    let values = samples
        .values()
        .ok_or_else(|| Error::InvalidParameter("sample set carries no values".into()))?;
    let bounds = TransformBounds::from_training(values)?;
    let p = queries.len();

    if bounds.is_degenerate() {
        let constant = bounds.z_min;
        return Ok(PredictionResult {
            mean: vec![constant; p],
            std: vec![0.0; p],
            realizations: hyper
                .keep_realizations
                .then(|| vec![constant; hyper.realizations * p]),
            trace: McTrace::default(),
        });
    }

    let graph = build_graph(samples, queries, params)?;
    let mut state = init_state(samples, &graph, hyper)?;

    // Points coinciding with a sample copy its value and are excluded from
    // updating when the interpolator is exact (respect_samples).
    let mut frozen_mask = None;
    let mut frozen_values = None;
    if hyper.respect_samples {
        let mask: Vec<bool> = (0..p).map(|q| graph.coincides_with_sample(q)).collect();
        if mask.iter().any(|&f| f) {
            let fv: Vec<f64> = (0..p)
                .map(|q| {
                    if mask[q] {
                        let s = graph.neighbors(q)[0];
                        state.pred_angles[q] = state.sample_angles()[s];
                        values[s]
                    } else {
                        0.0
                    }
                })
                .collect();
            frozen_mask = Some(mask);
            frozen_values = Some(fv);
        }
    }
    let frozen = frozen_mask.as_deref();

    let mut local: Vec<f64> = (0..p)
        .into_par_iter()
        .map(|q| local_energy(q, state.pred_angles[q], &state, &graph))
        .collect();

    let trace = relax_masked(&mut state, &graph, params, hyper, frozen, &mut local);

    let a_eq = match hyper.equilibrium_perturbation {
        EquilibriumPerturbation::LiteralOne => 1.0,
        EquilibriumPerturbation::CarryAdapted => trace.final_a(),
    };
    let (mut mean, mut std, realizations) = collect_masked(
        &mut state,
        &graph,
        params,
        hyper,
        a_eq,
        frozen,
        frozen_values.as_deref(),
        &mut local,
        hyper.keep_realizations,
    );

    if let (Some(mask), Some(fv)) = (frozen, frozen_values.as_deref()) {
        for q in 0..p {
            if mask[q] {
                mean[q] = fv[q];
                std[q] = 0.0;
            }
        }
    }

    Ok(PredictionResult {
        mean,
        std,
        realizations,
        trace,
    })
}
