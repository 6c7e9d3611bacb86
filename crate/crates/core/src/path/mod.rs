//! Timestamped multivariate paths, interpreted as piecewise-linear
//! interpolants of their samples, and the path-level operations on them.

mod preprocess;
mod warp;

pub use preprocess::{gaussian_smooth, preprocess, NormalizeMode, PreprocessConfig, Preprocessed};
pub use warp::Warp;

use crate::error::{Error, Result};

/// Relative tolerance used to recognise exact backtracks and repeated vertices.
const REDUCE_EPS: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    /// Row-major `T x N`.
    values: Vec<f64>,
    n: usize,
    names: Vec<String>,
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl Path {
    /// Builds a path from sample rows. Empty `names` selects `x1, x2, ...`.
    pub fn new(times: Vec<f64>, rows: Vec<Vec<f64>>, names: Vec<String>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some((k, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::InvalidPath(format!(
                "row {k} has {} values, expected {n}",
                r.len()
            )));
        }
        let values = rows.into_iter().flatten().collect();
        Self::from_flat(times, values, n, names)
    }

    /// Builds a path from a row-major `T x n` buffer.
    pub fn from_flat(times: Vec<f64>, values: Vec<f64>, n: usize, names: Vec<String>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::InvalidPath("a path needs at least one sample".into()));
        }
        if n == 0 {
            return Err(Error::InvalidPath("a path needs at least one channel".into()));
        }
        if values.len() != times.len() * n {
            return Err(Error::InvalidPath(format!(
                "{} values do not fill {} rows of {n} channels",
                values.len(),
                times.len()
            )));
        }
        if let Some(k) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidPath(format!("time at row {k} is not finite")));
        }
        if let Some(k) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPath(format!(
                "times must be strictly increasing (row {})",
                k + 1
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!(
                "value at row {}, channel {} is not finite",
                k / n,
                k % n
            )));
        }
        let names = if names.is_empty() { default_names(n) } else { names };
        if names.len() != n {
            return Err(Error::InvalidPath(format!(
                "{} channel names for {n} channels",
                names.len()
            )));
        }
        Ok(Path { times, values, n, names })
    }

    /// Path through `points` at times `0, 1, 2, ...`.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let times = (0..points.len()).map(|k| k as f64).collect();
        Self::new(times, points.to_vec(), Vec::new())
    }

    /// Builds a path from per-channel columns sharing one time axis.
    pub fn from_columns(times: Vec<f64>, columns: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let t = times.len();
        if let Some(c) = columns.iter().find(|c| c.len() != t) {
            return Err(Error::InvalidPath(format!(
                "column of length {} for {t} times",
                c.len()
            )));
        }
        let n = columns.len();
        let mut values = Vec::with_capacity(t * n);
        for k in 0..t {
            values.extend(columns.iter().map(|c| c[k]));
        }
        Self::from_flat(times, values, n, names)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn channels(&self) -> usize {
        self.n
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.values.chunks_exact(self.n)
    }

    pub fn channel(&self, i: usize) -> Vec<f64> {
        self.points().map(|p| p[i]).collect()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    pub fn first(&self) -> &[f64] {
        self.point(0)
    }

    pub fn last(&self) -> &[f64] {
        self.point(self.len() - 1)
    }

    /// Increments between successive samples.
    pub fn increments(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.values
            .chunks_exact(self.n)
            .zip(self.values.chunks_exact(self.n).skip(1))
            .map(|(a, b)| b.iter().zip(a).map(|(y, x)| y - x).collect())
    }

    pub(crate) fn check_channel(&self, i: usize) -> Result<()> {
        if i >= self.n {
            return Err(Error::InvalidArgument(format!(
                "channel {i} out of range for {} channels",
                self.n
            )));
        }
        Ok(())
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.n {
            return Err(Error::InvalidPath(format!(
                "{} channel names for {} channels",
                names.len(),
                self.n
            )));
        }
        self.names = names;
        Ok(self)
    }

    /// Replaces every value with `f(channel, value)`.
    pub fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        let n = self.n;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % n, v))
            .collect();
        Self::from_flat(self.times.clone(), values, n, self.names.clone())
    }

    /// `self + c` for a constant vector `c`.
    pub fn translate(&self, c: &[f64]) -> Result<Self> {
        if c.len() != self.n {
            return Err(Error::Dimension(format!(
                "translation of length {} for {} channels",
                c.len(),
                self.n
            )));
        }
        self.map_values(|i, v| v + c[i])
    }

    /// `lambda * self`.
    pub fn scale(&self, lambda: f64) -> Result<Self> {
        self.map_values(|_, v| lambda * v)
    }

    /// Keeps only the listed channels, in the given order.
    pub fn select_channels(&self, channels: &[usize]) -> Result<Self> {
        for &c in channels {
            self.check_channel(c)?;
        }
        let values = self
            .points()
            .flat_map(|p| channels.iter().map(move |&c| p[c]))
            .collect();
        let names = channels.iter().map(|&c| self.names[c].clone()).collect();
        Self::from_flat(self.times.clone(), values, channels.len(), names)
    }

    /// Linear interpolation of the path at time `t`, clamped to the domain.
    pub fn value_at(&self, t: f64) -> Vec<f64> {
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.first().to_vec();
        }
        if k >= self.len() {
            return self.last().to_vec();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.point(k - 1)
            .iter()
            .zip(self.point(k))
            .map(|(a, b)| a + w * (b - a))
            .collect()
    }

    /// Exact restriction of the piecewise-linear path to `[start, end]`, with
    /// interpolated samples at the endpoints.
    pub fn restrict(&self, start: f64, end: f64) -> Result<Self> {
        if !(end > start) {
            return Err(Error::InvalidArgument(format!(
                "empty restriction interval [{start}, {end}]"
            )));
        }
        let tol = 1e-12 * self.duration().abs().max(1.0);
        let start = start.max(self.start_time());
        let end = end.min(self.end_time());
        let mut times = vec![start];
        let mut values = self.value_at(start);
        let lo = self.times.partition_point(|&s| s <= start + tol);
        let hi = self.times.partition_point(|&s| s < end - tol);
        for k in lo..hi {
            times.push(self.times[k]);
            values.extend_from_slice(self.point(k));
        }
        if end > *times.last().unwrap() {
            times.push(end);
            values.extend(self.value_at(end));
        }
        Self::from_flat(times, values, self.n, self.names.clone())
    }

    /// Uniform sampling step, if the grid is uniform to relative `rel_tol`.
    pub fn uniform_step(&self, rel_tol: f64) -> Option<f64> {
        if self.len() < 2 {
            return None;
        }
        let dt = self.duration() / (self.len() - 1) as f64;
        self.times
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= rel_tol * dt)
            .then_some(dt)
    }

    /// Median inter-sample step; 1 for single-sample paths.
    pub fn median_step(&self) -> f64 {
        if self.len() < 2 {
            return 1.0;
        }
        let mut steps: Vec<f64> = self.times.windows(2).map(|w| w[1] - w[0]).collect();
        steps.sort_by(f64::total_cmp);
        let m = steps.len();
        if m % 2 == 1 {
            steps[m / 2]
        } else {
            0.5 * (steps[m / 2 - 1] + steps[m / 2])
        }
    }

    /// `self * other`: `other` is translated to start at `self`'s endpoint and
    /// its clock shifted to continue `self`'s; the junction sample is merged.
    pub fn concat(&self, other: &Path) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Dimension(format!(
                "cannot concatenate paths with {} and {} channels",
                self.n, other.n
            )));
        }
        let end = self.last();
        let start = other.first();
        let shift: Vec<f64> = end.iter().zip(start).map(|(e, s)| e - s).collect();
        let dt = self.end_time() - other.start_time();
        let mut times = self.times.clone();
        let mut values = self.values.clone();
        for k in 1..other.len() {
            times.push(other.times[k] + dt);
            values.extend(other.point(k).iter().zip(&shift).map(|(v, s)| v + s));
        }
        Self::from_flat(times, values, self.n, self.names.clone())
    }

    /// The reversed path. Times are negated and reversed, which keeps the
    /// reversed increments and makes `inverse` an exact involution.
    pub fn inverse(&self) -> Self {
        let times = self.times.iter().rev().map(|t| -t).collect();
        let values = self.values.chunks_exact(self.n).rev().flatten().copied().collect();
        Path {
            times,
            values,
            n: self.n,
            names: self.names.clone(),
        }
    }

    /// Cancels exact backtracks (including partial ones along the same ray)
    /// and repeated vertices until the polygon is irreducible.
    pub fn reduce(&self) -> Self {
        let scale = self
            .values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        let n = self.n;
        let mut stack: Vec<(f64, Vec<f64>)> = vec![(self.times[0], self.first().to_vec())];
        for k in 1..self.len() {
            let t = self.times[k];
            let v = self.point(k).to_vec();
            loop {
                let w = &stack.last().unwrap().1;
                let d2: Vec<f64> = v.iter().zip(w).map(|(a, b)| a - b).collect();
                if norm(&d2) <= REDUCE_EPS * scale {
                    break;
                }
                if stack.len() < 2 {
                    stack.push((t, v));
                    break;
                }
                let u = &stack[stack.len() - 2].1;
                let d1: Vec<f64> = w.iter().zip(u).map(|(a, b)| a - b).collect();
                if !is_backtrack(&d1, &d2) {
                    stack.push((t, v));
                    break;
                }
                let residual: Vec<f64> = v.iter().zip(u).map(|(a, b)| a - b).collect();
                let (l1, l2) = (norm(&d1), norm(&d2));
                if norm(&residual) <= REDUCE_EPS * scale {
                    // full cancellation: v coincides with u
                    stack.pop();
                    break;
                } else if l2 < l1 {
                    // partial retreat along the incoming ray
                    stack.pop();
                    stack.push((t, v));
                    break;
                } else {
                    // overshoot past u: drop w and re-examine u -> v
                    stack.pop();
                }
            }
        }
        let times = stack.iter().map(|(t, _)| *t).collect();
        let values = stack.into_iter().flat_map(|(_, p)| p).collect();
        Path {
            times,
            values,
            n,
            names: self.names.clone(),
        }
    }

    /// Exact 1-variation of the interpolant: the polygon's total length.
    pub fn one_variation(&self) -> f64 {
        self.increments().map(|d| norm(&d)).sum()
    }

    /// Same samples on the time axis `warp(times)`.
    pub fn reparametrize(&self, warp: &Warp) -> Result<Self> {
        let (t0, t1) = (self.start_time(), self.end_time());
        let times: Vec<f64> = self.times.iter().map(|&t| warp.apply(t, t0, t1)).collect();
        if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "warp {warp} is not strictly increasing on the path's domain"
            )));
        }
        Self::from_flat(times, self.values.clone(), self.n, self.names.clone())
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Colinear with opposite direction, up to rounding.
fn is_backtrack(d1: &[f64], d2: &[f64]) -> bool {
    let dot: f64 = d1.iter().zip(d2).map(|(a, b)| a * b).sum();
    if dot >= 0.0 {
        return false;
    }
    let mut cross2 = 0.0;
    for i in 0..d1.len() {
        for j in i + 1..d1.len() {
            let c = d1[i] * d2[j] - d1[j] * d2[i];
            cross2 += c * c;
        }
    }
    cross2.sqrt() <= REDUCE_EPS * norm(d1) * norm(d2)
}
