use std::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerance on the total mass of a cloud.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// An empirical distribution: `len()` weighted atoms in `R^dim`.
///
/// Points are stored row-major. Zero-weight atoms are dropped at
/// construction, so every stored weight is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Cloud {
    points: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
    uniform: bool,
}

impl Cloud {
    /// Uniform weights `1/m` over the rows of a row-major `m x dim` buffer.
    pub fn uniform(points: Vec<f64>, dim: usize) -> Result<Self> {
        check_shape(&points, dim)?;
        let m = points.len() / dim;
        let w = 1.0 / m as f64;
        Ok(Self {
            points,
            weights: vec![w; m],
            dim,
            uniform: true,
        })
    }

    /// Weighted cloud. Weights must be nonnegative and sum to one within
    /// [`WEIGHT_SUM_TOL`]; atoms of weight zero are removed.
    pub fn weighted(points: Vec<f64>, dim: usize, weights: Vec<f64>) -> Result<Self> {
        check_shape(&points, dim)?;
        let m = points.len() / dim;
        if weights.len() != m {
            return Err(Error::LengthMismatch {
                left: m,
                right: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidCloud(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let total: f64 = crate::numeric::exact_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidCloud(format!(
                "weights sum to {total}, expected 1"
            )));
        }

        let (mut kept_points, mut kept_weights) =
            (Vec::with_capacity(points.len()), Vec::with_capacity(m));
        for (row, &w) in points.chunks_exact(dim).zip(&weights) {
            if w > 0.0 {
                kept_points.extend_from_slice(row);
                kept_weights.push(w);
            }
        }
        let uniform = kept_weights
            .iter()
            .all(|&w| w == 1.0 / kept_weights.len() as f64);
        Ok(Self {
            points: kept_points,
            weights: kept_weights,
            dim,
            uniform,
        })
    }

    /// Uniform cloud from a list of rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
            points.extend_from_slice(r);
        }
        Self::uniform(points, dim)
    }

    /// Single atom of mass one.
    pub fn dirac(point: &[f64]) -> Result<Self> {
        Self::uniform(point.to_vec(), point.len())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.points.chunks_exact(self.dim)
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// True when every atom carries mass exactly `1/len()`.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// Applies `f` to every point, keeping weights.
    pub fn map_points<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64]) -> Vec<f64>,
    {
        let mut points = Vec::with_capacity(self.points.len());
        let mut dim = None;
        for row in self.rows() {
            let image = f(row);
            if *dim.get_or_insert(image.len()) != image.len() {
                return Err(Error::InvalidCloud(
                    "map changed dimension between rows".into(),
                ));
            }
            points.extend(image);
        }
        let dim = dim.unwrap_or(self.dim);
        check_shape(&points, dim)?;
        Ok(Self {
            points,
            weights: self.weights.clone(),
            dim,
            uniform: self.uniform,
        })
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Vec<f64> {
        let mut mu = vec![0.0; self.dim];
        for (row, w) in self.rows().zip(&self.weights) {
            for (m, x) in mu.iter_mut().zip(row) {
                *m += w * x;
            }
        }
        mu
    }

    /// Total order on clouds by content. Used to pick one orientation for
    /// every transport problem so that `solve(a, b)` and `solve(b, a)` are
    /// exact transposes of each other.
    pub fn content_cmp(&self, other: &Cloud) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then(self.dim.cmp(&other.dim))
            .then_with(|| cmp_slices(&self.weights, &other.weights))
            .then_with(|| cmp_slices(&self.points, &other.points))
    }
}

fn cmp_slices(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

fn check_shape(points: &[f64], dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidCloud("dimension must be at least 1".into()));
    }
    if points.is_empty() {
        return Err(Error::InvalidCloud("cloud has no atoms".into()));
    }
    if points.len() % dim != 0 {
        return Err(Error::InvalidCloud(format!(
            "{} coordinates do not split into rows of {dim}",
            points.len()
        )));
    }
    if let Some(pos) = points.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidCloud(format!(
            "non-finite coordinate at atom {}, column {}",
            pos / dim,
            pos % dim
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_empty() {
        assert!(matches!(
            Cloud::uniform(vec![], 2),
            Err(Error::InvalidCloud(_))
        ));
        assert!(matches!(
            Cloud::uniform(vec![1.0, f64::NAN], 2),
            Err(Error::InvalidCloud(_))
        ));
        assert!(matches!(
            Cloud::uniform(vec![1.0, f64::INFINITY], 1),
            Err(Error::InvalidCloud(_))
        ));
        assert!(matches!(
            Cloud::uniform(vec![1.0, 2.0, 3.0], 2),
            Err(Error::InvalidCloud(_))
        ));
        assert!(matches!(
            Cloud::uniform(vec![1.0], 0),
            Err(Error::InvalidCloud(_))
        ));
    }

    #[test]
    fn drops_zero_weight_atoms() {
        let c = Cloud::weighted(vec![0.0, 1.0, 2.0], 1, vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points(), &[0.0, 2.0]);
        assert!(c.is_uniform());
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = Cloud::weighted(vec![0.0, 1.0], 1, vec![0.5, 0.6]).unwrap_err();
        assert!(matches!(err, Error::InvalidCloud(_)));
        let err = Cloud::weighted(vec![0.0, 1.0], 1, vec![1.5, -0.5]).unwrap_err();
        assert!(matches!(err, Error::InvalidCloud(_)));
    }

    #[test]
    fn from_rows_checks_widths() {
        let err = Cloud::from_rows(&[vec![1.0, 2.0], vec![3.0]]).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 1 });
        let c = Cloud::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert_eq!(c.point(1), &[3.0, 4.0]);
        assert_eq!(c.weight(0), 0.5);
    }

    #[test]
    fn content_order_is_total() {
        let a = Cloud::from_rows(&[[0.0], [1.0]]).unwrap();
        let b = Cloud::from_rows(&[[0.0], [2.0]]).unwrap();
        assert_eq!(a.content_cmp(&b), Ordering::Less);
        assert_eq!(b.content_cmp(&a), Ordering::Greater);
        assert_eq!(a.content_cmp(&a.clone()), Ordering::Equal);
    }
}
