//! End-to-end checks of the synthetic-field -> cross-validation pipeline.
//! Small versions of the full benchmark runs; the `acceptance` suite in the
//! CLI crate runs the complete configurations.

use mprs_core::engine::{self, predict};
use mprs_core::rng::{CounterRng, Phase};
use mprs_core::synth::{sample_gaussian_field, scatter_sites};
use mprs_core::validation::{crossval, make_splits, Method};
use mprs_core::{EquilibriumPerturbation, Hyperparams, ModelParams, PointSet, WmParams};

fn table2_field(seed: u64) -> PointSet {
    let mut site_rng = CounterRng::for_stream(seed, Phase::Scatter, 0);
    let sites = scatter_sites(1000, 50.0, 2, &mut site_rng).unwrap();
    let wm = WmParams::new(25.0, 0.5, 0.2, 150.0).unwrap();
    let mut field_rng = CounterRng::for_stream(seed, Phase::Field, 0);
    let values = sample_gaussian_field(&sites, &wm, &mut field_rng).unwrap();
    PointSet::new(2, sites.coords().to_vec(), Some(values)).unwrap()
}

/// Down-scaled version of the dense-field benchmark: correlated Gaussian
/// field, 10% training data. The error level is known from independent runs
/// of the same configuration; a short 10-split average must land near it.
#[test]
fn gaussian_field_error_level() {
    let data = table2_field(42);
    let plan = make_splits(data.len(), 0.10, 10, 7).unwrap();
    let method = Method::Mprs(ModelParams::default(), Hyperparams::default());
    let report = crossval(&data, &plan, &method).unwrap();

    assert!(
        (11.0..19.0).contains(&report.mae),
        "MAE {} far from the expected ~14.7 level",
        report.mae
    );
    assert!(report.mrse > report.mae);
    assert!(report.mr.unwrap() > 0.4);
}

#[test]
fn prediction_is_thread_count_invariant() {
    let data = table2_field(43);
    let train_idx: Vec<usize> = (0..200).collect();
    let query_idx: Vec<usize> = (200..500).collect();
    let samples = data.subset(&train_idx);
    let queries = data.subset(&query_idx).without_values();
    let params = ModelParams::default();
    let hyper = Hyperparams::default();

    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| predict(&samples, &queries, &params, &hyper).unwrap())
    };
    let single = run(1);
    let quad = run(4);
    let eight = run(8);
    assert_eq!(single.mean, quad.mean);
    assert_eq!(single.mean, eight.mean);
    assert_eq!(single.std, quad.std);
    assert_eq!(single.std, eight.std);
    assert_eq!(single.trace.energy, quad.trace.energy);
}

/// At very low temperature each predicted angle should settle at the global
/// minimizer of its local energy; compare against a brute-force angle grid.
#[test]
fn low_temperature_matches_grid_minimizer() {
    let tau = std::f64::consts::TAU;
    let mut hits = 0usize;
    let mut total = 0usize;
    for inst in 0..10u64 {
        let dim = (inst % 3 + 1) as usize;
        let mut rng = CounterRng::from_key(&[500, inst]);
        let sites = scatter_sites(50, 10.0, dim, &mut rng).unwrap();
        let values: Vec<f64> = (0..50).map(|_| 100.0 + 20.0 * rng.next_f64()).collect();
        let samples = PointSet::new(dim, sites.coords().to_vec(), Some(values)).unwrap();
        let mut qrng = CounterRng::from_key(&[501, inst]);
        let queries = scatter_sites(20, 10.0, dim, &mut qrng).unwrap();

        let params = ModelParams {
            temperature: 1e-6,
            ..ModelParams::default()
        };
        let hyper = Hyperparams {
            max_relax_sweeps: 2000,
            realizations: 1000,
            adapt_rate: 1.0,
            equilibrium_perturbation: EquilibriumPerturbation::CarryAdapted,
            seed: inst,
            ..Hyperparams::default()
        };
        let result = predict(&samples, &queries, &params, &hyper).unwrap();

        let graph = mprs_core::neighbor::build_graph(&samples, &queries, &params).unwrap();
        let state = engine::init_state(&samples, &graph, &hyper).unwrap();
        let bounds = state.bounds();
        let range = bounds.z_max - bounds.z_min;
        for p in 0..queries.len() {
            // brute-force minimizer over a 1e5-point angle grid
            let mut best = (f64::INFINITY, 0.0);
            for g in 0..100_000 {
                let phi = g as f64 * tau / 100_000.0;
                let e = engine::local_energy(p, phi, &state, &graph);
                if e < best.0 {
                    best = (e, phi);
                }
            }
            let z_star = range * best.1 / tau + bounds.z_min;
            if (result.mean[p] - z_star).abs() <= range * 1e-4 {
                hits += 1;
            }
            total += 1;
        }
    }
    let rate = hits as f64 / total as f64;
    assert!(rate >= 0.99, "only {hits}/{total} points at the grid minimizer");
}
