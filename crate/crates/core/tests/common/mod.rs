#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use slcf::linalg::Matrix;
use slcf::panel::{TransformKind, TransformedPanel};

pub fn to_na(m: &Matrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

/// Applies the transform to one series, written out independently of the crate.
pub fn tau(kind: TransformKind, v: &[f64]) -> Vec<f64> {
    match kind {
        TransformKind::FirstDifference => (1..v.len()).map(|t| v[t] - v[t - 1]).collect(),
        TransformKind::Within => {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            v.iter().map(|x| x - m).collect()
        }
    }
}

/// `[τx₁, τX̃, control]` for block `i`.
pub fn design_rows(tp: &TransformedPanel<f64>, i: usize, control: &[f64]) -> DMatrix<f64> {
    let b = &tp.blocks[i];
    let kx = b.tx_exog.cols();
    DMatrix::from_fn(b.rows(), kx + 2, |r, c| {
        if c == 0 {
            b.tx1[r]
        } else if c <= kx {
            b.tx_exog[(r, c - 1)]
        } else {
            control[r]
        }
    })
}

/// Normal-equations GLS `(Σ H'WH)⁻¹ Σ H'Wy` over the listed individuals.
pub fn gls_oracle(
    tp: &TransformedPanel<f64>,
    individuals: &[usize],
    controls: &[Vec<f64>],
) -> Vec<f64> {
    let k = tp.blocks[0].tx_exog.cols() + 2;
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DVector::<f64>::zeros(k);
    for &i in individuals {
        let h = design_rows(tp, i, &controls[i]);
        let w = to_na(&tp.blocks[i].weight);
        let y = DVector::from_column_slice(&tp.blocks[i].ty);
        a += h.transpose() * &w * &h;
        rhs += h.transpose() * &w * y;
    }
    a.lu()
        .solve(&rhs)
        .expect("nonsingular oracle system")
        .iter()
        .copied()
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn var(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0)
}

pub fn cov(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - ma) * (y - mb))
        .sum::<f64>()
        / (a.len() as f64 - 1.0)
}

pub fn corr(a: &[f64], b: &[f64]) -> f64 {
    cov(a, b) / (var(a) * var(b)).sqrt()
}
