//! Cross-validated stacking of base learners.
//!
//! Out-of-fold predictions of every library member form the level-one matrix
//! `Z`. Meta-weights minimize `‖y − Z w‖²`, by default over the probability
//! simplex. Folds are drawn over units (individuals), so all rows of a unit
//! land in the same fold.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{fit, FittedLearner, LearnerKind, LearnerSpec};
use crate::linalg::{Cholesky, Lu, Matrix};
use crate::rng::{derive_seed, rng_from_seed};
use crate::scalar::Real;

/// Largest library solved by exhaustive support enumeration.
const ENUMERATION_LIMIT: usize = 12;

/// Assignment of units to `k` folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    fold_of: Vec<usize>,
    k: usize,
}

impl FoldAssignment {
    /// Every unit in a single fold.
    pub fn single(n_units: usize) -> Self {
        Self {
            fold_of: vec![0; n_units],
            k: 1,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_units(&self) -> usize {
        self.fold_of.len()
    }

    pub fn fold_of(&self, unit: usize) -> usize {
        self.fold_of[unit]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.fold_of
    }

    /// Units in fold `f`, ascending.
    pub fn members(&self, f: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&u| self.fold_of[u] == f)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_of {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Seeded permutation of `0..n_units` cut into `k` parts whose sizes differ by at most one.
pub fn cv_folds(n_units: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if n_units < k {
        return Err(Error::InvalidInput(format!(
            "cannot split {n_units} units into {k} folds"
        )));
    }
    let mut perm: Vec<usize> = (0..n_units).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    let (base, extra) = (n_units / k, n_units % k);
    let mut fold_of = vec![0; n_units];
    let mut pos = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        for &u in &perm[pos..pos + size] {
            fold_of[u] = f;
        }
        pos += size;
    }
    Ok(FoldAssignment { fold_of, k })
}

/// How the level-one predictions are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetaLearner {
    /// Non-negative weights summing to one.
    #[default]
    Simplex,
    /// Ordinary least squares of `y` on `Z` without intercept.
    Unconstrained,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperLearnerConfig {
    #[serde(default = "LearnerKind::default_library")]
    pub library: Vec<LearnerKind>,
    #[serde(default = "SuperLearnerConfig::default_folds")]
    pub folds: usize,
    #[serde(default)]
    pub meta: MetaLearner,
}

impl SuperLearnerConfig {
    fn default_folds() -> usize {
        5
    }

    pub fn with_library(library: Vec<LearnerKind>) -> Self {
        Self {
            library,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.library.is_empty() {
            return Err(Error::InvalidInput("super learner library is empty".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidInput(format!(
                "super learner needs at least 2 folds, got {}",
                self.folds
            )));
        }
        self.library.iter().try_for_each(LearnerKind::validate)
    }
}

impl Default for SuperLearnerConfig {
    fn default() -> Self {
        Self {
            library: LearnerKind::default_library(),
            folds: Self::default_folds(),
            meta: MetaLearner::Simplex,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuperLearnerModel<T> {
    base_models: Vec<FittedLearner<T>>,
    weights: Vec<T>,
    cv_risks: Vec<T>,
    level_one: Matrix<T>,
    folds: FoldAssignment,
    degenerate: bool,
}

impl<T: Real> SuperLearnerModel<T> {
    pub fn base_models(&self) -> &[FittedLearner<T>] {
        &self.base_models
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Cross-validated mean squared error of each library member.
    pub fn cv_risks(&self) -> &[T] {
        &self.cv_risks
    }

    /// Out-of-fold predictions, one column per library member.
    pub fn level_one(&self) -> &Matrix<T> {
        &self.level_one
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    /// Set when the level-one columns were indistinguishable and uniform weights were used.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }

    /// Cross-validated mean squared error of the weighted combination.
    pub fn ensemble_cv_risk(&self, y: &[T]) -> Result<T> {
        let fitted = self.level_one.mat_vec(&self.weights)?;
        Ok(mse(&fitted, y))
    }

    pub fn predict(&self, x: &Matrix<T>) -> Result<Vec<T>> {
        sl_predict(self, x)
    }
}

fn mse<T: Real>(fitted: &[T], y: &[T]) -> T {
    let sse: T = fitted.iter().zip(y).map(|(&f, &v)| (v - f) * (v - f)).sum();
    sse / T::from_usize_lossy(y.len())
}

fn learner_seed(seed: u64, learner: usize, fold: usize) -> u64 {
    derive_seed(derive_seed(seed, learner as u64), fold as u64)
}

/// Fits the stacked ensemble.
///
/// `groups[r]` is the unit of row `r`; rows sharing a unit stay in one fold.
/// With `None` every row is its own unit.
pub fn fit_super_learner<T: Real>(
    x: &Matrix<T>,
    y: &[T],
    groups: Option<&[usize]>,
    config: &SuperLearnerConfig,
    seed: u64,
) -> Result<SuperLearnerModel<T>> {
    config.validate()?;
    let n = x.rows();
    if y.len() != n {
        return Err(Error::Dimension(format!(
            "{n} feature rows but {} targets",
            y.len()
        )));
    }
    let k = config.folds;
    if n < 2 * k {
        return Err(Error::InvalidInput(format!(
            "super learner with {k} folds needs at least {} rows, got {n}",
            2 * k
        )));
    }

    // Dense unit labels in order of first appearance.
    let unit_of: Vec<usize> = match groups {
        Some(g) => {
            if g.len() != n {
                return Err(Error::Dimension(format!(
                    "{n} rows but {} group labels",
                    g.len()
                )));
            }
            let mut dense = std::collections::HashMap::new();
            g.iter()
                .map(|&label| {
                    let next = dense.len();
                    *dense.entry(label).or_insert(next)
                })
                .collect()
        }
        None => (0..n).collect(),
    };
    let n_units = unit_of.iter().max().map_or(0, |&m| m + 1);
    let folds = cv_folds(n_units, k, derive_seed(seed, u64::MAX))?;

    let m = config.library.len();
    let mut level_one = Matrix::zeros(n, m);
    for f in 0..k {
        let (train, test): (Vec<usize>, Vec<usize>) =
            (0..n).partition(|&r| folds.fold_of(unit_of[r]) != f);
        let x_train = x.select_rows(&train);
        let y_train: Vec<T> = train.iter().map(|&r| y[r]).collect();
        let x_test = x.select_rows(&test);
        for (j, kind) in config.library.iter().enumerate() {
            let spec = LearnerSpec::new(kind.clone(), learner_seed(seed, j, f));
            let model = fit(&spec, &x_train, &y_train)?;
            for (&r, p) in test.iter().zip(model.predict(&x_test)?) {
                level_one[(r, j)] = p;
            }
        }
    }
    let cv_risks: Vec<T> = (0..m).map(|j| mse(&level_one.column(j), y)).collect();

    let degenerate = columns_identical(&level_one);
    let weights = if degenerate {
        vec![T::one() / T::from_usize_lossy(m); m]
    } else {
        match config.meta {
            MetaLearner::Simplex => simplex_nnls(&level_one, y)?,
            MetaLearner::Unconstrained => unconstrained_weights(&level_one, y)?,
        }
    };

    let base_models = config
        .library
        .iter()
        .enumerate()
        .map(|(j, kind)| {
            fit(
                &LearnerSpec::new(kind.clone(), learner_seed(seed, j, k)),
                x,
                y,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SuperLearnerModel {
        base_models,
        weights,
        cv_risks,
        level_one,
        folds,
        degenerate,
    })
}

/// Weighted sum of the base learners' predictions.
pub fn sl_predict<T: Real>(model: &SuperLearnerModel<T>, x: &Matrix<T>) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); x.rows()];
    for (learner, &w) in model.base_models.iter().zip(&model.weights) {
        if w == T::zero() {
            if learner.n_features() != x.cols() {
                return Err(Error::Dimension(format!(
                    "model trained on {} features, got {}",
                    learner.n_features(),
                    x.cols()
                )));
            }
            continue;
        }
        for (o, p) in out.iter_mut().zip(learner.predict(x)?) {
            *o = *o + w * p;
        }
    }
    Ok(out)
}

fn columns_identical<T: Real>(z: &Matrix<T>) -> bool {
    if z.cols() < 2 {
        return false;
    }
    let scale = z
        .as_slice()
        .iter()
        .fold(T::zero(), |a, v| a.max(v.abs()))
        .max(T::one());
    let tol = T::epsilon() * T::lit(1e3) * scale;
    (0..z.rows()).all(|r| {
        let row = z.row(r);
        row.iter().all(|&v| (v - row[0]).abs() <= tol)
    })
}

fn objective<T: Real>(z: &Matrix<T>, y: &[T], w: &[T]) -> T {
    (0..z.rows())
        .map(|r| {
            let e = y[r]
                - z.row(r)
                    .iter()
                    .zip(w)
                    .fold(T::zero(), |a, (&zv, &wv)| a + zv * wv);
            e * e
        })
        .sum()
}

/// Least squares over the probability simplex.
///
/// Small libraries are solved exactly by enumerating candidate supports and
/// solving each equality-constrained KKT system; supports whose system is
/// singular are skipped. Larger libraries use accelerated projected gradient.
pub fn simplex_nnls<T: Real>(z: &Matrix<T>, y: &[T]) -> Result<Vec<T>> {
    let m = z.cols();
    if m == 0 {
        return Err(Error::InvalidInput(
            "level-one matrix has no columns".into(),
        ));
    }
    if z.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "{} rows but {} targets",
            z.rows(),
            y.len()
        )));
    }
    if m == 1 {
        return Ok(vec![T::one()]);
    }
    let gram = z.tr_matmul(z)?;
    let zty = z.tr_vec(y)?;
    let mut w = if m <= ENUMERATION_LIMIT {
        enumerate_supports(z, y, &gram, &zty)
    } else {
        projected_gradient(&gram, &zty)
    };
    clean_simplex(&mut w);
    Ok(w)
}

fn enumerate_supports<T: Real>(z: &Matrix<T>, y: &[T], gram: &Matrix<T>, zty: &[T]) -> Vec<T> {
    let m = gram.rows();
    let tol = T::lit(1e-12);
    let mut best: Option<(T, Vec<T>)> = None;
    for mask in 1u32..(1 << m) {
        let support: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        let s = support.len();
        let mut kkt = Matrix::zeros(s + 1, s + 1);
        let mut rhs = vec![T::zero(); s + 1];
        for (a, &ja) in support.iter().enumerate() {
            for (b, &jb) in support.iter().enumerate() {
                kkt[(a, b)] = T::lit(2.0) * gram[(ja, jb)];
            }
            kkt[(a, s)] = T::one();
            kkt[(s, a)] = T::one();
            rhs[a] = T::lit(2.0) * zty[ja];
        }
        rhs[s] = T::one();
        let Ok(sol) = Lu::factor(&kkt).and_then(|lu| lu.solve_vec(&rhs)) else {
            continue;
        };
        if sol[..s].iter().any(|&v| !(v >= -tol)) {
            continue;
        }
        let mut w = vec![T::zero(); m];
        for (a, &j) in support.iter().enumerate() {
            w[j] = sol[a].max(T::zero());
        }
        let total: T = w.iter().copied().sum();
        w.iter_mut().for_each(|v| *v = *v / total);
        let obj = objective(z, y, &w);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, w));
        }
    }
    // Vertices always have a solvable 2x2 system, so `best` is set.
    best.map(|(_, w)| w).unwrap_or_else(|| {
        let mut w = vec![T::zero(); m];
        w[0] = T::one();
        w
    })
}

fn projected_gradient<T: Real>(gram: &Matrix<T>, zty: &[T]) -> Vec<T> {
    let m = gram.rows();
    // Lipschitz constant of the gradient bounded by the trace.
    let lip = T::lit(2.0)
        * gram
            .diagonal()
            .into_iter()
            .sum::<T>()
            .max(T::min_positive_value());
    let mut w = vec![T::one() / T::from_usize_lossy(m); m];
    let mut v = w.clone();
    let mut t = T::one();
    for _ in 0..20_000 {
        let g = gram.mat_vec(&v).expect("square gram");
        let step: Vec<T> = (0..m)
            .map(|j| v[j] - (T::lit(2.0) * (g[j] - zty[j])) / lip)
            .collect();
        let next = project_simplex(&step);
        let t_next = (T::one() + (T::one() + T::lit(4.0) * t * t).sqrt()) / T::lit(2.0);
        let momentum = (t - T::one()) / t_next;
        let delta: T = next.iter().zip(&w).map(|(a, b)| (*a - *b).abs()).sum();
        v = (0..m)
            .map(|j| next[j] + momentum * (next[j] - w[j]))
            .collect();
        w = next;
        t = t_next;
        if delta < T::lit(1e-15) {
            break;
        }
    }
    w
}

/// Euclidean projection onto the probability simplex.
fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite weights"));
    let mut cumsum = T::zero();
    let mut theta = T::zero();
    for (i, &s) in sorted.iter().enumerate() {
        cumsum = cumsum + s;
        let candidate = (cumsum - T::one()) / T::from_usize_lossy(i + 1);
        if s - candidate > T::zero() {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(T::zero())).collect()
}

fn clean_simplex<T: Real>(w: &mut [T]) {
    w.iter_mut().for_each(|v| *v = v.max(T::zero()));
    let total: T = w.iter().copied().sum();
    w.iter_mut().for_each(|v| *v = *v / total);
}

fn unconstrained_weights<T: Real>(z: &Matrix<T>, y: &[T]) -> Result<Vec<T>> {
    let gram = z.tr_matmul(z)?;
    let names: Vec<String> = (0..z.cols()).map(|j| format!("learner {j}")).collect();
    Cholesky::factor(&gram, Some(&names))?.solve_vec(&z.tr_vec(y)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::{ForestParams, NeuralNetParams};
    use proptest::prelude::*;
    use rand::Rng;

    fn grid_minimum(z: &Matrix<f64>, y: &[f64]) -> f64 {
        let steps = 1000;
        let mut best = f64::INFINITY;
        match z.cols() {
            1 => best = objective(z, y, &[1.0]),
            2 => {
                for i in 0..=steps {
                    let a = i as f64 / steps as f64;
                    best = best.min(objective(z, y, &[a, 1.0 - a]));
                }
            }
            3 => {
                for i in 0..=steps {
                    for j in 0..=(steps - i) {
                        let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                        best = best.min(objective(z, y, &[a, b, (1.0 - a - b).max(0.0)]));
                    }
                }
            }
            _ => unreachable!(),
        }
        best
    }

    #[test]
    fn fold_sizes() {
        let f = cv_folds(10, 5, 1).unwrap();
        assert_eq!(f.sizes(), vec![2; 5]);
        let mut sizes = cv_folds(11, 5, 1).unwrap().sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 2, 2, 2, 3]);
        assert_eq!(cv_folds(11, 5, 9), cv_folds(11, 5, 9));
        assert!(cv_folds(4, 5, 0).is_err());
    }

    #[test]
    fn simplex_known_answers() {
        let y = [1.0, -2.0, 0.5, 3.0];
        let z = Matrix::column_vector(&y);
        assert_eq!(simplex_nnls(&z, &y).unwrap(), vec![1.0]);

        let neg: Vec<f64> = y.iter().map(|v| -v).collect();
        let z = Matrix::from_columns(4, &[&y, &neg]).unwrap();
        let w = simplex_nnls(&z, &y).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12);

        // e orthogonal to y: the two columns are mirror images around y.
        let y = [1.0, 2.0, 0.0, -1.0];
        let e = [2.0, -1.0, 3.0, 0.0];
        let plus: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a + b).collect();
        let minus: Vec<f64> = y.iter().zip(&e).map(|(a, b)| a - b).collect();
        let z = Matrix::from_columns(4, &[&plus, &minus]).unwrap();
        let w = simplex_nnls(&z, &y).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-12 && (w[1] - 0.5).abs() < 1e-12);
        assert!((objective(&z, &y, &w) - grid_minimum(&z, &y)).abs() < 1e-10);
    }

    #[test]
    fn projection_and_large_library_agree_with_enumeration() {
        let mut rng = rng_from_seed(4);
        let (n, m) = (40, 5);
        let z = Matrix::from_fn(n, m, |_, _| rng.gen_range(-1.0f64..1.0));
        let y: Vec<f64> = (0..n)
            .map(|r| 0.3 * z[(r, 0)] + 0.7 * z[(r, 3)] + rng.gen_range(-0.1..0.1))
            .collect();
        let gram = z.tr_matmul(&z).unwrap();
        let zty = z.tr_vec(&y).unwrap();
        let exact = enumerate_supports(&z, &y, &gram, &zty);
        let pg = projected_gradient(&gram, &zty);
        assert!((objective(&z, &y, &exact) - objective(&z, &y, &pg)).abs() < 1e-9);
        let p = project_simplex(&[0.2, 2.0, -1.0]);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn singleton_library_has_unit_weight() {
        let x = Matrix::from_fn(20, 1, |r, _| r as f64);
        let y: Vec<f64> = (0..20).map(|r| (r as f64).sin()).collect();
        let model = fit_super_learner(
            &x,
            &y,
            None,
            &SuperLearnerConfig::with_library(vec![LearnerKind::Mean]),
            3,
        )
        .unwrap();
        assert_eq!(model.weights(), &[1.0]);
    }

    #[test]
    fn exact_linear_target_puts_all_weight_on_linear() {
        let x = Matrix::from_fn(30, 2, |r, c| ((r * (c + 2)) as f64 * 0.7).sin());
        let y: Vec<f64> = (0..30).map(|r| 1.0 + 2.0 * x[(r, 0)] - x[(r, 1)]).collect();
        let config = SuperLearnerConfig::with_library(vec![LearnerKind::Mean, LearnerKind::Linear]);
        let model = fit_super_learner(&x, &y, None, &config, 7).unwrap();
        assert!((model.weights()[1] - 1.0).abs() < 1e-6);
        let pred = model.predict(&x).unwrap();
        for (p, v) in pred.iter().zip(&y) {
            assert!((p - v).abs() < 1e-6);
        }
    }

    #[test]
    fn identical_constant_learners_fall_back_to_uniform() {
        let x = Matrix::from_fn(12, 1, |r, _| r as f64);
        let y = vec![2.5; 12];
        let config = SuperLearnerConfig::with_library(vec![LearnerKind::Mean, LearnerKind::Mean]);
        let model = fit_super_learner(&x, &y, None, &config, 0).unwrap();
        assert!(model.degenerate());
        assert_eq!(model.weights(), &[0.5, 0.5]);
        assert!(model.predict(&x).unwrap().iter().all(|&p| p == 2.5));
    }

    #[test]
    fn groups_keep_units_together() {
        let x = Matrix::from_fn(40, 1, |r, _| r as f64);
        let y: Vec<f64> = (0..40).map(|r| r as f64 * 0.5).collect();
        let groups: Vec<usize> = (0..40).map(|r| 100 + r / 2).collect();
        let model =
            fit_super_learner(&x, &y, Some(&groups), &SuperLearnerConfig::default(), 1).unwrap();
        assert_eq!(model.folds().n_units(), 20);
        assert_eq!(model.folds().sizes(), vec![4; 5]);
    }

    #[test]
    fn unconstrained_meta_matches_least_squares() {
        let x = Matrix::from_fn(30, 2, |r, c| ((r + 3 * c) as f64 * 0.37).cos());
        let y: Vec<f64> = (0..30).map(|r| x[(r, 0)].powi(2) + x[(r, 1)]).collect();
        let config = SuperLearnerConfig {
            library: vec![LearnerKind::Mean, LearnerKind::Linear],
            folds: 3,
            meta: MetaLearner::Unconstrained,
        };
        let model = fit_super_learner(&x, &y, None, &config, 2).unwrap();
        let z = model.level_one();
        let g = z.tr_matmul(z).unwrap().inverse().unwrap();
        let oracle = g.mat_vec(&z.tr_vec(&y).unwrap()).unwrap();
        for (a, b) in model.weights().iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn simplex_matches_grid_search(seed in 0u64..10_000, m in 1usize..=3, n in 3usize..25) {
            let mut rng = rng_from_seed(seed);
            let z = Matrix::from_fn(n, m, |_, _| rng.gen_range(-1.0f64..1.0));
            let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let w = simplex_nnls(&z, &y).unwrap();
            prop_assert!(w.iter().all(|&v| v >= -1e-12));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            let obj = objective(&z, &y, &w);
            prop_assert!(obj <= grid_minimum(&z, &y) + 1e-5);
        }

        #[test]
        fn ensemble_risk_dominates_members(seed in 0u64..1000) {
            let mut rng = rng_from_seed(seed);
            let x = Matrix::from_fn(40, 2, |_, _| rng.gen_range(-2.0f64..2.0));
            let y: Vec<f64> = (0..40).map(|r| x[(r, 0)].abs() + 0.5 * x[(r, 1)] + rng.gen_range(-0.2..0.2)).collect();
            let config = SuperLearnerConfig::with_library(vec![
                LearnerKind::Linear,
                LearnerKind::NeuralNet(NeuralNetParams::default()),
                LearnerKind::Mean,
                LearnerKind::RandomForest(ForestParams { n_trees: 10, ..Default::default() }),
            ]);
            let model = fit_super_learner(&x, &y, None, &config, seed).unwrap();
            let w = model.weights();
            prop_assert!(w.iter().all(|&v| v >= -1e-12));
            prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            let risk = model.ensemble_cv_risk(&y).unwrap();
            for &r in model.cv_risks() {
                prop_assert!(risk <= r + 1e-12);
            }
            let again = fit_super_learner(&x, &y, None, &config, seed).unwrap();
            prop_assert_eq!(again.predict(&x).unwrap(), model.predict(&x).unwrap());
        }
    }
}
