use std::path::PathBuf;
use std::time::Instant;

use mprs_core::rng::{CounterRng, Phase};
use mprs_core::synth::{sample_gaussian_field, sample_lognormal_field, scatter_sites};
use mprs_core::validation::{crossval, make_splits, Method};
use mprs_core::{engine, PointSet, WmParams};

use crate::config::{
    echo_start, install_thread_pool, resolve, resolve_opt_path, resolve_path, resolve_required,
    ConfigFile,
};
use crate::error::{CliError, CliResult};
use crate::io::{self, coord_header, fmt_f64, table_to_points, CsvWriter};
use crate::{CliArgs, CliCommand};

pub fn run(cli: CliArgs) -> CliResult<()> {
    let mut cfg = ConfigFile::load(cli.config.as_ref())?;
    let threads_cfg = cfg.get::<usize>("threads")?;
    let threads = cli.threads.or(threads_cfg).unwrap_or(0);
    install_thread_pool(threads)?;

    match cli.command {
        CliCommand::Predict {
            train,
            query,
            out,
            trace,
            seed,
            model,
        } => run_predict(&mut cfg, threads, train, query, out, trace, seed, model),
        CliCommand::Crossval {
            data,
            method,
            tr,
            splits,
            seed,
            out,
            sigma,
            nu,
            kappa,
            power,
            model,
        } => run_crossval(
            &mut cfg, threads, data, method, tr, splits, seed, out, sigma, nu, kappa, power, model,
        ),
        CliCommand::Synth {
            n,
            l,
            dim,
            kappa,
            nu,
            sigma,
            mean,
            lognormal,
            seed,
            out,
        } => run_synth(
            &mut cfg, threads, n, l, dim, kappa, nu, sigma, mean, lognormal, seed, out,
        ),
        CliCommand::Bench {
            sizes,
            tr,
            seed,
            out,
            model,
        } => run_bench(&mut cfg, threads, sizes, tr, seed, out, model),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_predict(
    cfg: &mut ConfigFile,
    threads: usize,
    train: Option<PathBuf>,
    query: Option<PathBuf>,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    seed: Option<u64>,
    model: crate::config::ModelFlags,
) -> CliResult<()> {
    let mut echo = echo_start("predict");
    let train_path = resolve_path(train, cfg, "train", &mut echo)?;
    let query_path = resolve_path(query, cfg, "query", &mut echo)?;
    let out_path = resolve_path(out, cfg, "out", &mut echo)?;
    let trace_path = resolve_opt_path(trace, cfg, "trace", &mut echo)?;
    let seed = resolve(seed, cfg, "seed", 0u64, &mut echo)?;
    let (params, hyper) = model.resolve(cfg, seed, &mut echo)?;
    echo.push(format!("threads = {threads}"));
    cfg.reject_unknown()?;

    let samples = table_to_points(&train_path, &io::read_table(&train_path)?, true)?;
    let queries =
        table_to_points(&query_path, &io::read_table(&query_path)?, false)?.without_values();

    let result = engine::predict(&samples, &queries, &params, &hyper)?;

    io::write_predictions(&out_path, &echo, &queries, &result.mean, &result.std)?;
    if let Some(trace_path) = trace_path {
        io::write_trace(&trace_path, &echo, &result.trace)?;
    }
    Ok(())
}

fn measure_fields(m: &mprs_core::Measures, t_cpu: f64) -> Vec<String> {
    vec![
        fmt_f64(m.ae),
        m.are.map(fmt_f64).unwrap_or_default(),
        fmt_f64(m.rse),
        m.r.map(fmt_f64).unwrap_or_default(),
        fmt_f64(t_cpu),
    ]
}

#[allow(clippy::too_many_arguments)]
fn run_crossval(
    cfg: &mut ConfigFile,
    threads: usize,
    data: Option<PathBuf>,
    method: Option<String>,
    tr: Option<f64>,
    splits: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    sigma: Option<f64>,
    nu: Option<f64>,
    kappa: Option<f64>,
    power: Option<f64>,
    model: crate::config::ModelFlags,
) -> CliResult<()> {
    let mut echo = echo_start("crossval");
    let data_path = resolve_path(data, cfg, "data", &mut echo)?;
    let method_name: String = resolve_required(method, cfg, "method", &mut echo)?;
    let tr = resolve_required(tr, cfg, "tr", &mut echo)?;
    let n_splits = resolve(splits, cfg, "splits", 100usize, &mut echo)?;
    let seed = resolve(seed, cfg, "seed", 0u64, &mut echo)?;
    let out_path = resolve_path(out, cfg, "out", &mut echo)?;

    let method = match method_name.as_str() {
        "mprs" => {
            let (params, hyper) = model.resolve(cfg, seed, &mut echo)?;
            Method::Mprs(params, hyper)
        }
        "ok" => {
            let sigma = resolve_required(sigma, cfg, "sigma", &mut echo)?;
            let nu = resolve_required(nu, cfg, "nu", &mut echo)?;
            let kappa = resolve_required(kappa, cfg, "kappa", &mut echo)?;
            Method::OrdinaryKriging(WmParams::new(sigma, nu, kappa, 0.0)?)
        }
        "idw" => {
            let power = resolve(power, cfg, "power", 2.0f64, &mut echo)?;
            Method::Idw { power }
        }
        other => {
            return Err(CliError::Usage(format!(
                "--method must be one of mprs | ok | idw, got '{other}'"
            )))
        }
    };
    echo.push(format!("threads = {threads}"));
    cfg.reject_unknown()?;

    let dataset = table_to_points(&data_path, &io::read_table(&data_path)?, true)?;
    let plan = make_splits(dataset.len(), tr, n_splits, seed)?;
    let report = crossval(&dataset, &plan, &method)?;

    let mut w = CsvWriter::create(&out_path, &echo, "split,method,AE,ARE,RSE,R,t_cpu_s")?;
    for (v, split) in report.per_split.iter().enumerate() {
        let mut fields = vec![v.to_string(), method.name().to_string()];
        fields.extend(measure_fields(&split.measures, split.t_cpu));
        w.row(&fields)?;
    }
    let mut fields = vec!["aggregate".to_string(), method.name().to_string()];
    fields.push(fmt_f64(report.mae));
    fields.push(report.mare.map(fmt_f64).unwrap_or_default());
    fields.push(fmt_f64(report.mrse));
    fields.push(report.mr.map(fmt_f64).unwrap_or_default());
    fields.push(fmt_f64(report.t_cpu_mean));
    w.row(&fields)?;
    w.finish()
}

#[allow(clippy::too_many_arguments)]
fn run_synth(
    cfg: &mut ConfigFile,
    threads: usize,
    n: Option<usize>,
    l: Option<f64>,
    dim: Option<usize>,
    kappa: Option<f64>,
    nu: Option<f64>,
    sigma: Option<f64>,
    mean: Option<f64>,
    lognormal: bool,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let mut echo = echo_start("synth");
    let n = resolve_required(n, cfg, "n", &mut echo)?;
    let l = resolve_required(l, cfg, "L", &mut echo)?;
    let dim = resolve(dim, cfg, "dim", 2usize, &mut echo)?;
    let kappa = resolve_required(kappa, cfg, "kappa", &mut echo)?;
    let nu = resolve_required(nu, cfg, "nu", &mut echo)?;
    let sigma = resolve_required(sigma, cfg, "sigma", &mut echo)?;
    let mean = resolve(mean, cfg, "mean", 0.0f64, &mut echo)?;
    let lognormal = lognormal || cfg.get::<bool>("lognormal")?.unwrap_or(false);
    echo.push(format!("lognormal = {lognormal}"));
    let seed = resolve(seed, cfg, "seed", 0u64, &mut echo)?;
    let out_path = resolve_path(out, cfg, "out", &mut echo)?;
    echo.push(format!("threads = {threads}"));
    cfg.reject_unknown()?;

    let wm = WmParams::new(sigma, nu, kappa, mean)?;
    let mut site_rng = CounterRng::for_stream(seed, Phase::Scatter, 0);
    let sites = scatter_sites(n, l, dim, &mut site_rng)?;
    let mut field_rng = CounterRng::for_stream(seed, Phase::Field, 0);
    let values = if lognormal {
        sample_lognormal_field(&sites, &wm, &mut field_rng)?
    } else {
        sample_gaussian_field(&sites, &wm, &mut field_rng)?
    };

    let mut header = coord_header(dim);
    header.push("value".into());
    let mut w = CsvWriter::create(&out_path, &echo, &header.join(","))?;
    for i in 0..sites.len() {
        let mut fields: Vec<String> = sites.coord(i).iter().map(|&c| fmt_f64(c)).collect();
        fields.push(fmt_f64(values[i]));
        w.row(&fields)?;
    }
    w.finish()
}

/// Accepts `2^A..2^B` (inclusive, powers of two) or a comma list of sizes
/// where each entry may be a plain integer or `2^k`.
fn parse_sizes(spec: &str) -> CliResult<Vec<usize>> {
    let parse_one = |tok: &str| -> CliResult<usize> {
        let tok = tok.trim();
        if let Some(exp) = tok.strip_prefix("2^") {
            let e: u32 = exp
                .parse()
                .map_err(|_| CliError::Usage(format!("bad size token '{tok}'")))?;
            Ok(1usize << e)
        } else {
            tok.parse()
                .map_err(|_| CliError::Usage(format!("bad size token '{tok}'")))
        }
    };
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(CliError::Usage("empty size list".into()));
    }
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo = parse_one(lo)?;
        let hi = parse_one(hi)?;
        if !(lo.is_power_of_two() && hi.is_power_of_two() && lo <= hi) {
            return Err(CliError::Usage(format!(
                "size range '{spec}' must be ascending powers of two"
            )));
        }
        let mut sizes = Vec::new();
        let mut n = lo;
        while n <= hi {
            sizes.push(n);
            n <<= 1;
        }
        Ok(sizes)
    } else {
        let sizes: Vec<usize> = spec
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(parse_one)
            .collect::<CliResult<_>>()?;
        if sizes.is_empty() {
            return Err(CliError::Usage("empty size list".into()));
        }
        Ok(sizes)
    }
}

fn run_bench(
    cfg: &mut ConfigFile,
    threads: usize,
    sizes: Option<String>,
    tr: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    model: crate::config::ModelFlags,
) -> CliResult<()> {
    let mut echo = echo_start("bench");
    let sizes_spec: String = resolve_required(sizes, cfg, "sizes", &mut echo)?;
    let tr = resolve_required(tr, cfg, "tr", &mut echo)?;
    let seed = resolve(seed, cfg, "seed", 0u64, &mut echo)?;
    let out_path = resolve_path(out, cfg, "out", &mut echo)?;
    let (params, hyper) = model.resolve(cfg, seed, &mut echo)?;
    echo.push(format!("threads = {threads}"));
    cfg.reject_unknown()?;

    if !(tr > 0.0 && tr < 1.0) {
        return Err(CliError::Usage(format!("--tr must lie in (0, 1), got {tr}")));
    }
    let sizes = parse_sizes(&sizes_spec)?;

    let mut w = CsvWriter::create(&out_path, &echo, "N,P,t_cpu_s")?;
    for (i, &n) in sizes.iter().enumerate() {
        let n_train = (tr * n as f64).floor() as usize;
        let p = n - n_train;
        if n_train < params.n_b.max(4) || p == 0 {
            return Err(CliError::Usage(format!(
                "size {n} with tr {tr} leaves too few training points"
            )));
        }

        // Surrogate data: uniform sites, i.i.d. values. Timing does not
        // depend on the field structure, only on the counts.
        let mut site_rng = CounterRng::for_stream(seed, Phase::Surrogate, 2 * i as u64);
        let sites = scatter_sites(n, 1.0, 2, &mut site_rng)?;
        let mut value_rng = CounterRng::for_stream(seed, Phase::Surrogate, 2 * i as u64 + 1);
        let values: Vec<f64> = (0..n_train).map(|_| value_rng.next_f64()).collect();

        let train_idx: Vec<usize> = (0..n_train).collect();
        let query_idx: Vec<usize> = (n_train..n).collect();
        let samples = PointSet::new(
            2,
            sites.subset(&train_idx).coords().to_vec(),
            Some(values),
        )?;
        let queries = sites.subset(&query_idx);

        let started = Instant::now();
        let result = engine::predict(&samples, &queries, &params, &hyper)?;
        let elapsed = started.elapsed().as_secs_f64();
        // keep the optimizer honest
        std::hint::black_box(&result.mean);

        w.row(&[n.to_string(), p.to_string(), fmt_f64(elapsed)])?;
    }
    w.finish()
}
