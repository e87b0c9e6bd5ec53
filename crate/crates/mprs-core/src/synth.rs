//! Gaussian and lognormal random fields with Whittle-Matern covariance on
//! scattered sites.
//!
//! Fields are generated by dense Cholesky factorization of the site
//! covariance matrix — exact and perfectly adequate at desk scale (a few
//! thousand sites). Near-singular matrices (rough fields, clustered sites)
//! get an escalating diagonal jitter before the factorization is declared
//! failed.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bessel::bessel_k;
use crate::error::{Error, Result};
use crate::point::{dist_sq, PointSet};
use crate::rng::CounterRng;

/// Whittle-Matern covariance parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WmParams {
    /// Field standard deviation (data units).
    pub sigma: f64,
    /// Smoothness; small values give rough fields.
    pub nu: f64,
    /// Inverse correlation length (1 / coordinate units).
    pub kappa: f64,
    /// Field mean (data units); the log-mean for lognormal fields.
    pub mean: f64,
}

impl WmParams {
    pub fn new(sigma: f64, nu: f64, kappa: f64, mean: f64) -> Result<Self> {
        let p = WmParams {
            sigma,
            nu,
            kappa,
            mean,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma", self.sigma), ("nu", self.nu), ("kappa", self.kappa)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !self.mean.is_finite() {
            return Err(Error::InvalidParameter("mean must be finite".into()));
        }
        Ok(())
    }
}

/// Whittle-Matern covariance at lag `h >= 0`:
/// `sigma^2 2^{1-nu} / Gamma(nu) (kappa h)^nu K_nu(kappa h)`,
/// with the analytic limit `sigma^2` at `h = 0`.
pub fn wm_covariance(h: f64, p: &WmParams) -> f64 {
    debug_assert!(h >= 0.0);
    if h == 0.0 {
        return p.sigma * p.sigma;
    }
    let x = p.kappa * h;
    let prefactor =
        2f64.powf(1.0 - p.nu) * p.sigma * p.sigma / statrs::function::gamma::gamma(p.nu);
    prefactor * x.powf(p.nu) * bessel_k(p.nu, x)
}

/// Jitter schedule: start at `1e-10 sigma^2`, escalate tenfold up to
/// `1e-4 sigma^2` before giving up.
const JITTER_START_REL: f64 = 1e-10;
const JITTER_MAX_REL: f64 = 1e-4;

fn cholesky_with_jitter(cov: DMatrix<f64>, sigma2: f64) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    if let Some(chol) = Cholesky::new(cov.clone()) {
        return Ok(chol);
    }
    let mut jitter = JITTER_START_REL * sigma2;
    while jitter <= JITTER_MAX_REL * sigma2 {
        let mut jittered = cov.clone();
        for i in 0..jittered.nrows() {
            jittered[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(jittered) {
            return Ok(chol);
        }
        jitter *= 10.0;
    }
    Err(Error::FactorizationFailure)
}

fn covariance_matrix(sites: &PointSet, p: &WmParams) -> DMatrix<f64> {
    let n = sites.len();
    let mut cov = DMatrix::zeros(n, n);
    for i in 0..n {
        cov[(i, i)] = p.sigma * p.sigma;
        for j in 0..i {
            let h = dist_sq(sites.coord(i), sites.coord(j)).sqrt();
            let c = wm_covariance(h, p);
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    cov
}

/// Draw one Gaussian field realization at the given sites: `mean + L xi` with
/// `L L^T` the (jittered) site covariance and `xi` standard normal.
pub fn sample_gaussian_field(
    sites: &PointSet,
    p: &WmParams,
    rng: &mut CounterRng,
) -> Result<Vec<f64>> {
    p.validate()?;
    let n = sites.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let chol = cholesky_with_jitter(covariance_matrix(sites, p), p.sigma * p.sigma)?;
    let xi = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
    let correlated = chol.l() * xi;
    Ok(correlated.iter().map(|&v| p.mean + v).collect())
}

/// Draw one lognormal field realization: the exponential of a Gaussian field
/// whose log-mean and log-std are given by `p`. The median is `exp(p.mean)`.
pub fn sample_lognormal_field(
    sites: &PointSet,
    p: &WmParams,
    rng: &mut CounterRng,
) -> Result<Vec<f64>> {
    Ok(sample_gaussian_field(sites, p, rng)?
        .into_iter()
        .map(f64::exp)
        .collect())
}

/// `n` sites drawn i.i.d. uniformly from `[0, extent]^dim`.
pub fn scatter_sites(n: usize, extent: f64, dim: usize, rng: &mut CounterRng) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one site".into()));
    }
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(Error::InvalidParameter("extent must be positive".into()));
    }
    let coords: Vec<f64> = (0..n * dim.max(1)).map(|_| rng.next_f64() * extent).collect();
    PointSet::new(dim, coords, None)
}
