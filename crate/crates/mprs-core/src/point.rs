use crate::error::{Error, Result};

/// Sites in `d`-dimensional space, optionally carrying a value per site.
///
/// Coordinates are stored row-major (`N x d`). A `PointSet` with values is a
/// sampling set; one without values is a prediction (query) set.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    values: Option<Vec<f64>>,
}

impl PointSet {
    /// Validates finiteness and shape: `coords.len()` must be a multiple of
    /// `dim`, and `values` (when present) must have one entry per site.
    pub fn new(dim: usize, coords: Vec<f64>, values: Option<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::DimensionMismatch(format!(
                "coordinate buffer of length {} is not a multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        if let Some(bad) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteInput(format!(
                "coordinate {} of site {}",
                bad % dim,
                bad / dim
            )));
        }
        let n = coords.len() / dim;
        if let Some(v) = &values {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "{} values for {} sites",
                    v.len(),
                    n
                )));
            }
            if let Some(bad) = v.iter().position(|z| !z.is_finite()) {
                return Err(Error::NonFiniteInput(format!("value at site {bad}")));
            }
        }
        Ok(PointSet { dim, coords, values })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of site `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn values(&self) -> Option<&[f64]> {
        self.values.as_deref()
    }

    /// Subset of the sites (and values, when present) at `indices`.
    pub fn subset(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.coord(i));
        }
        let values = self
            .values
            .as_ref()
            .map(|v| indices.iter().map(|&i| v[i]).collect());
        PointSet {
            dim: self.dim,
            coords,
            values,
        }
    }

    /// Drop the values, keeping only site locations.
    pub fn without_values(&self) -> PointSet {
        PointSet {
            dim: self.dim,
            coords: self.coords.clone(),
            values: None,
        }
    }

    /// Length of the diagonal of the axis-aligned bounding box.
    pub fn bounding_diagonal(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for i in 0..self.len() {
            for (k, &c) in self.coord(i).iter().enumerate() {
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

/// Squared Euclidean distance between two coordinate slices.
#[inline]
pub(crate) fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}
