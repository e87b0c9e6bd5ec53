//! Config-file handling and flag resolution.
//!
//! Precedence: command-line flags override config-file entries, which
//! override built-in defaults. Config files are plain `key = value` text with
//! keys identical to the long flag names; `#` starts a comment. The fully
//! resolved configuration is echoed as comment lines into every output file,
//! so any output header suffices to re-run the command.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use mprs_core::{EquilibriumPerturbation, Hyperparams, InitMode, ModelParams};

use crate::error::{CliError, CliResult};

/// Parsed `key = value` file; tracks which keys the command consumed so
/// leftovers (typos, keys of another command) can be rejected.
pub struct ConfigFile {
    map: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
}

impl ConfigFile {
    pub fn load(path: Option<&PathBuf>) -> CliResult<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    CliError::input(path, lineno + 1, "expected 'key = value'")
                })?;
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(ConfigFile {
            map,
            consumed: BTreeSet::new(),
        })
    }

    /// Value for `key`, parsed as `T`.
    pub fn get<T: FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        self.consumed.insert(key.to_string());
        match self.map.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key '{key}': cannot parse '{raw}'"))
            }),
        }
    }

    /// Error on config keys the command never looked at.
    pub fn reject_unknown(&self) -> CliResult<()> {
        let unknown: Vec<&String> = self
            .map
            .keys()
            .filter(|k| !self.consumed.contains(*k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(format!(
                "unknown config key(s): {}",
                unknown
                    .iter()
                    .map(|s| s.as_str())
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
    }
}

/// Resolve one setting and append its echo line. The config key is consumed
/// even when a flag overrides it.
pub fn resolve<T: Copy + std::fmt::Display + FromStr>(
    flag: Option<T>,
    cfg: &mut ConfigFile,
    key: &str,
    default: T,
    echo: &mut Vec<String>,
) -> CliResult<T> {
    let from_cfg = cfg.get::<T>(key)?;
    let v = flag.or(from_cfg).unwrap_or(default);
    echo.push(format!("{key} = {v}"));
    Ok(v)
}

/// Like [`resolve`] but without a default: missing values are a usage error.
pub fn resolve_required<T: std::fmt::Display + FromStr>(
    flag: Option<T>,
    cfg: &mut ConfigFile,
    key: &str,
    echo: &mut Vec<String>,
) -> CliResult<T> {
    let from_cfg = cfg.get::<T>(key)?;
    let v = flag
        .or(from_cfg)
        .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))?;
    echo.push(format!("{key} = {v}"));
    Ok(v)
}

pub fn resolve_path(
    flag: Option<PathBuf>,
    cfg: &mut ConfigFile,
    key: &str,
    echo: &mut Vec<String>,
) -> CliResult<PathBuf> {
    let from_cfg = cfg.get::<PathBuf>(key)?;
    let v = flag
        .or(from_cfg)
        .ok_or_else(|| CliError::Usage(format!("missing required option --{key}")))?;
    echo.push(format!("{key} = {}", v.display()));
    Ok(v)
}

pub fn resolve_opt_path(
    flag: Option<PathBuf>,
    cfg: &mut ConfigFile,
    key: &str,
    echo: &mut Vec<String>,
) -> CliResult<Option<PathBuf>> {
    let from_cfg = cfg.get::<PathBuf>(key)?;
    let v = flag.or(from_cfg);
    if let Some(p) = &v {
        echo.push(format!("{key} = {}", p.display()));
    }
    Ok(v)
}

/// Model and learning flags shared by the `predict`, `crossval` and `bench`
/// commands.
#[derive(Debug, Clone, clap::Args)]
pub struct ModelFlags {
    /// Interacting sample neighbors per prediction point
    #[arg(long)]
    pub nb: Option<usize>,
    /// Simulation temperature (dimensionless)
    #[arg(long)]
    pub temp: Option<f64>,
    /// Coupling prefactor
    #[arg(long)]
    pub j0: Option<f64>,
    /// Equilibrium realizations averaged into the prediction
    #[arg(long = "M", value_name = "M")]
    pub realizations: Option<usize>,
    /// Cap on relaxation sweeps
    #[arg(long)]
    pub imax: Option<usize>,
    /// Target Metropolis acceptance ratio
    #[arg(long = "a-targ")]
    pub a_targ: Option<f64>,
    /// Adaptation rate of the perturbation control factor
    #[arg(long = "k-a")]
    pub k_a: Option<f64>,
    /// Sweeps between equilibrium checks
    #[arg(long = "n-f")]
    pub n_f: Option<usize>,
    /// Energy values per slope fit
    #[arg(long = "n-fit")]
    pub n_fit: Option<usize>,
    /// Initial prediction state: random | nn
    #[arg(long)]
    pub init: Option<String>,
    /// Copy sample values at coinciding prediction points: true | false
    #[arg(long = "respect-samples")]
    pub respect_samples: Option<bool>,
    /// Perturbation factor for equilibrium sweeps: literal_one | carry_adapted
    #[arg(long = "equilibrium-a")]
    pub equilibrium_a: Option<String>,
}

impl ModelFlags {
    pub fn resolve(
        &self,
        cfg: &mut ConfigFile,
        seed: u64,
        echo: &mut Vec<String>,
    ) -> CliResult<(ModelParams, Hyperparams)> {
        let defaults_m = ModelParams::default();
        let defaults_h = Hyperparams::default();

        let params = ModelParams {
            n_b: resolve(self.nb, cfg, "nb", defaults_m.n_b, echo)?,
            temperature: resolve(self.temp, cfg, "temp", defaults_m.temperature, echo)?,
            j0: resolve(self.j0, cfg, "j0", defaults_m.j0, echo)?,
            ..defaults_m
        };

        let init_cfg = cfg.get::<String>("init")?;
        let init_raw = self
            .init
            .clone()
            .or(init_cfg)
            .unwrap_or_else(|| "random".into());
        let init_mode = match init_raw.as_str() {
            "random" => InitMode::RandomUniform,
            "nn" => InitMode::NearestNeighbor,
            other => {
                return Err(CliError::Usage(format!(
                    "--init must be 'random' or 'nn', got '{other}'"
                )))
            }
        };
        echo.push(format!("init = {init_raw}"));

        let eq_cfg = cfg.get::<String>("equilibrium-a")?;
        let eq_raw = self
            .equilibrium_a
            .clone()
            .or(eq_cfg)
            .unwrap_or_else(|| "literal_one".into());
        let equilibrium_perturbation = match eq_raw.as_str() {
            "literal_one" => EquilibriumPerturbation::LiteralOne,
            "carry_adapted" => EquilibriumPerturbation::CarryAdapted,
            other => {
                return Err(CliError::Usage(format!(
                    "--equilibrium-a must be 'literal_one' or 'carry_adapted', got '{other}'"
                )))
            }
        };
        echo.push(format!("equilibrium-a = {eq_raw}"));

        let hyper = Hyperparams {
            realizations: resolve(self.realizations, cfg, "M", defaults_h.realizations, echo)?,
            max_relax_sweeps: resolve(self.imax, cfg, "imax", defaults_h.max_relax_sweeps, echo)?,
            target_acceptance: resolve(
                self.a_targ,
                cfg,
                "a-targ",
                defaults_h.target_acceptance,
                echo,
            )?,
            adapt_rate: resolve(self.k_a, cfg, "k-a", defaults_h.adapt_rate, echo)?,
            check_interval: resolve(self.n_f, cfg, "n-f", defaults_h.check_interval, echo)?,
            fit_window: resolve(self.n_fit, cfg, "n-fit", defaults_h.fit_window, echo)?,
            init_mode,
            respect_samples: resolve(
                self.respect_samples,
                cfg,
                "respect-samples",
                defaults_h.respect_samples,
                echo,
            )?,
            equilibrium_perturbation,
            keep_realizations: false,
            seed,
        };

        params.validate().map_err(CliError::from)?;
        hyper.validate().map_err(CliError::from)?;
        Ok((params, hyper))
    }
}

/// Install the global worker pool; 0 means the library default.
pub fn install_thread_pool(threads: usize) -> CliResult<()> {
    if threads == 0 {
        return Ok(());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot configure {threads} threads: {e}")))
}

/// Echo header shared by every command: the command name first, then the
/// resolved keys in flag order.
pub fn echo_start(command: &str) -> Vec<String> {
    vec![format!("command = {command}")]
}

pub fn path_display(p: &Path) -> String {
    p.display().to_string()
}
