//! One-hidden-layer sigmoid network trained by full-batch gradient descent.
//!
//! Each iteration starts from the configured step size and halves it until
//! the squared-error loss strictly decreases; an iteration that finds no
//! decreasing step ends training. The loss is therefore non-increasing.

use rand::Rng;

use super::{NeuralNetParams, OutputActivation};
use crate::linalg::Matrix;
use crate::rng::rng_from_seed;
use crate::scalar::Real;

const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    hidden: usize,
    inputs: usize,
    output: OutputActivation,
    /// `hidden × inputs` input weights followed by `hidden` biases,
    /// `hidden` output weights and the output bias.
    theta: Vec<T>,
    loss_trace: Vec<T>,
}

#[inline]
fn sigmoid<T: Real>(v: T) -> T {
    T::one() / (T::one() + (-v).exp())
}

impl<T: Real> Network<T> {
    fn n_params(hidden: usize, inputs: usize) -> usize {
        hidden * inputs + 2 * hidden + 1
    }

    /// Training loss after initialization and after every accepted step.
    pub fn loss_trace(&self) -> &[T] {
        &self.loss_trace
    }

    pub fn parameters(&self) -> &[T] {
        &self.theta
    }

    /// Network output on a standardized input row (before de-standardizing).
    pub fn output(&self, x: &[T]) -> T {
        forward(
            &self.theta,
            self.hidden,
            self.inputs,
            self.output,
            x,
            &mut [],
        )
    }
}

/// Forward pass; fills `act` with hidden activations when it has room.
#[inline]
fn forward<T: Real>(
    theta: &[T],
    h: usize,
    p: usize,
    out: OutputActivation,
    x: &[T],
    act: &mut [T],
) -> T {
    let (w1, rest) = theta.split_at(h * p);
    let (b1, rest) = rest.split_at(h);
    let (w2, b2) = rest.split_at(h);
    let mut o = b2[0];
    for j in 0..h {
        let mut z = b1[j];
        for (&w, &v) in w1[j * p..(j + 1) * p].iter().zip(x) {
            z = z + w * v;
        }
        let a = sigmoid(z);
        if j < act.len() {
            act[j] = a;
        }
        o = o + w2[j] * a;
    }
    match out {
        OutputActivation::Linear => o,
        OutputActivation::Logistic => sigmoid(o),
    }
}

fn loss<T: Real>(
    theta: &[T],
    h: usize,
    p: usize,
    out: OutputActivation,
    l2: T,
    x: &Matrix<T>,
    y: &[T],
) -> T {
    let n = T::from_usize_lossy(y.len());
    let sse = (0..x.rows())
        .map(|r| {
            let e = forward(theta, h, p, out, x.row(r), &mut []) - y[r];
            e * e
        })
        .sum::<T>();
    sse / (T::lit(2.0) * n) + penalty(theta, h, p, l2)
}

fn penalty<T: Real>(theta: &[T], h: usize, p: usize, l2: T) -> T {
    if l2 == T::zero() {
        return T::zero();
    }
    let w1 = &theta[..h * p];
    let w2 = &theta[h * p + h..h * p + 2 * h];
    let ss: T = w1.iter().chain(w2).map(|&w| w * w).sum();
    l2 * ss / T::lit(2.0)
}

fn gradient<T: Real>(
    theta: &[T],
    h: usize,
    p: usize,
    out: OutputActivation,
    l2: T,
    x: &Matrix<T>,
    y: &[T],
    grad: &mut [T],
) {
    grad.iter_mut().for_each(|g| *g = T::zero());
    let mut act = vec![T::zero(); h];
    let w2_off = h * p + h;
    for r in 0..x.rows() {
        let row = x.row(r);
        let pred = forward(theta, h, p, out, row, &mut act);
        let d_out = match out {
            OutputActivation::Linear => pred - y[r],
            OutputActivation::Logistic => (pred - y[r]) * pred * (T::one() - pred),
        };
        grad[w2_off + h] = grad[w2_off + h] + d_out;
        for j in 0..h {
            let a = act[j];
            grad[w2_off + j] = grad[w2_off + j] + d_out * a;
            let d_hidden = d_out * theta[w2_off + j] * a * (T::one() - a);
            grad[h * p + j] = grad[h * p + j] + d_hidden;
            for (g, &v) in grad[j * p..(j + 1) * p].iter_mut().zip(row) {
                *g = *g + d_hidden * v;
            }
        }
    }
    let n = T::from_usize_lossy(y.len());
    grad.iter_mut().for_each(|g| *g = *g / n);
    if l2 > T::zero() {
        for k in (0..h * p).chain(w2_off..w2_off + h) {
            grad[k] = grad[k] + l2 * theta[k];
        }
    }
}

pub(crate) fn train<T: Real>(
    params: &NeuralNetParams,
    x: &Matrix<T>,
    y: &[T],
    seed: u64,
) -> Network<T> {
    let (h, p) = (params.hidden_units, x.cols());
    let out = params.output;
    let l2 = T::lit(params.l2);
    let mut rng = rng_from_seed(seed);
    let half = T::lit(0.5);
    let mut theta: Vec<T> = (0..Network::<T>::n_params(h, p))
        .map(|_| rng.gen_range(-half..half))
        .collect();

    let lr = T::lit(params.learning_rate);
    let mut grad = vec![T::zero(); theta.len()];
    let mut trial = theta.clone();
    let mut current = loss(&theta, h, p, out, l2, x, y);
    let mut trace = vec![current];
    for _ in 0..params.max_iter {
        gradient(&theta, h, p, out, l2, x, y, &mut grad);
        let mut step = lr;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            for ((t, &th), &g) in trial.iter_mut().zip(&theta).zip(&grad) {
                *t = th - step * g;
            }
            let candidate = loss(&trial, h, p, out, l2, x, y);
            if candidate < current {
                std::mem::swap(&mut theta, &mut trial);
                current = candidate;
                accepted = true;
                break;
            }
            step = step * half;
        }
        if !accepted {
            break;
        }
        trace.push(current);
    }
    Network {
        hidden: h,
        inputs: p,
        output: out,
        theta,
        loss_trace: trace,
    }
}
