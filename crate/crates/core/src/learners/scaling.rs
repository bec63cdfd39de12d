use crate::linalg::Matrix;
use crate::scalar::{mean, Real};

/// Per-feature z-score parameters. Zero-variance features keep scale 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler<T> {
    means: Vec<T>,
    scales: Vec<T>,
}

impl<T: Real> Scaler<T> {
    pub fn identity(p: usize) -> Self {
        Self {
            means: vec![T::zero(); p],
            scales: vec![T::one(); p],
        }
    }

    pub fn fit(x: &Matrix<T>) -> Self {
        let (means, scales) = (0..x.cols())
            .map(|j| {
                let col = x.column(j);
                let (m, s) = standardize_target(&col);
                (m, s)
            })
            .unzip();
        Self { means, scales }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    #[inline]
    pub fn params(&self, j: usize) -> (T, T) {
        (self.means[j], self.scales[j])
    }

    #[inline]
    pub fn transform(&self, j: usize, v: T) -> T {
        (v - self.means[j]) / self.scales[j]
    }

    pub fn apply(&self, x: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(x.rows(), x.cols(), |r, c| self.transform(c, x[(r, c)]))
    }
}

/// Mean and population standard deviation (1 when degenerate).
pub(crate) fn standardize_target<T: Real>(y: &[T]) -> (T, T) {
    let m = mean(y);
    let var = y.iter().map(|&v| (v - m) * (v - m)).sum::<T>() / T::from_usize_lossy(y.len().max(1));
    let sd = var.sqrt();
    let scale = if sd > T::epsilon() * (T::one() + m.abs()) {
        sd
    } else {
        T::one()
    };
    (m, scale)
}

/// Offset and range mapping `y` onto `[0, 1]` (range 1 when degenerate).
pub(crate) fn unit_interval_target<T: Real>(y: &[T]) -> (T, T) {
    let lo = y.iter().copied().fold(T::infinity(), T::min);
    let hi = y.iter().copied().fold(T::neg_infinity(), T::max);
    let range = hi - lo;
    if range > T::epsilon() * (T::one() + lo.abs()) {
        (lo, range)
    } else {
        (lo - T::lit(0.5), T::one())
    }
}
