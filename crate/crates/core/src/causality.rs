//! Windowed lead-lag statistics, time-shuffled null models, and the classical
//! cross-correlation and VAR-Granger baselines.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::leadlag::signed_area_unchecked;
use crate::path::{preprocess, Path, PreprocessConfig};
use crate::signature::signature_derivative;
use crate::stats::{quantile_sorted, replicate_seed, Welford};

/// Relative tolerance for uniform-grid checks.
const UNIFORM_TOL: f64 = 1e-6;

/// Replicates evaluated per parallel batch. Fixed so that the accumulation
/// order never depends on the thread count.
const BATCH: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Window length in the path's time units.
    pub length: f64,
    pub stride: f64,
}

impl WindowSpec {
    pub fn new(length: f64, stride: f64) -> Result<Self> {
        if !(length > 0.0) || !(stride > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "window length and stride must be positive, got {length} and {stride}"
            )));
        }
        Ok(WindowSpec { length, stride })
    }

    /// Window start times on the stride grid that fit inside `a`'s domain.
    pub fn starts(&self, a: &Path) -> Result<Vec<f64>> {
        let duration = a.duration();
        let tol = 1e-9 * duration.max(self.length);
        if !(self.length > 0.0) || !(self.stride > 0.0) {
            return Err(Error::InvalidArgument("window length and stride must be positive".into()));
        }
        if self.length > duration + tol {
            return Err(Error::WindowTooLong {
                length: self.length,
                duration,
            });
        }
        let t0 = a.start_time();
        let count = ((duration - self.length + tol) / self.stride).floor() as usize + 1;
        Ok((0..count).map(|k| t0 + k as f64 * self.stride).collect())
    }

    fn bounds(&self, a: &Path, start: f64) -> (f64, f64) {
        (start, (start + self.length).min(a.end_time()))
    }
}

/// A sampled curve; `times` may be window centres, midpoints or lags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Signed area of each window restriction, stamped at the window centre.
/// The area is taken about the window's own first sample.
pub fn sliding_signed_area(a: &Path, pair: (usize, usize), w: &WindowSpec) -> Result<TimeSeries> {
    a.check_channel(pair.0)?;
    a.check_channel(pair.1)?;
    let mut out = TimeSeries::default();
    for s in w.starts(a)? {
        let (lo, hi) = w.bounds(a, s);
        let piece = a.restrict(lo, hi)?;
        out.times.push(0.5 * (lo + hi));
        out.values.push(signed_area_unchecked(&piece, pair.0, pair.1));
    }
    Ok(out)
}

/// `∫ γ_i dγ_j` over the whole path, exact for polygons.
fn influence_integral(a: &Path, i: usize, j: usize) -> f64 {
    (0..a.len().saturating_sub(1))
        .map(|k| {
            let (p, q) = (a.point(k), a.point(k + 1));
            0.5 * (p[i] + q[i]) * (q[j] - p[j])
        })
        .sum()
}

/// The stream `γ_i γ_j'` at segment midpoints, or its mean over each window.
pub fn sliding_signature_derivative(
    a: &Path,
    pair: (usize, usize),
    w: Option<&WindowSpec>,
) -> Result<TimeSeries> {
    a.check_channel(pair.0)?;
    a.check_channel(pair.1)?;
    if a.len() < 2 {
        return Err(Error::InvalidPath(
            "signature derivative needs at least two samples".into(),
        ));
    }
    match w {
        None => {
            let s = signature_derivative(a, pair.0, pair.1)?;
            Ok(TimeSeries {
                times: s.times,
                values: s.values,
            })
        }
        Some(w) => {
            let mut out = TimeSeries::default();
            for s in w.starts(a)? {
                let (lo, hi) = w.bounds(a, s);
                let piece = a.restrict(lo, hi)?;
                out.times.push(0.5 * (lo + hi));
                out.values.push(influence_integral(&piece, pair.0, pair.1) / (hi - lo));
            }
            Ok(out)
        }
    }
}

/// A pipeline from raw samples to one statistic curve; re-run unchanged on
/// every shuffled replicate.
pub trait Statistic: Sync {
    fn name(&self) -> String;
    /// 0-based channel pair.
    fn pair(&self) -> (usize, usize);
    fn evaluate(&self, raw: &Path) -> Result<TimeSeries>;
}

/// Preprocess, then sliding-window signed area.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlidingAreaStatistic {
    pub pair: (usize, usize),
    pub window: WindowSpec,
    pub preprocess: PreprocessConfig,
}

impl Statistic for SlidingAreaStatistic {
    fn name(&self) -> String {
        "sliding_signed_area".into()
    }

    fn pair(&self) -> (usize, usize) {
        self.pair
    }

    fn evaluate(&self, raw: &Path) -> Result<TimeSeries> {
        let p = preprocess(raw, &self.preprocess)?.path;
        sliding_signed_area(&p, self.pair, &self.window)
    }
}

/// Preprocess, then the signature-derivative stream (optionally windowed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceStatistic {
    pub pair: (usize, usize),
    pub window: Option<WindowSpec>,
    pub preprocess: PreprocessConfig,
}

impl Statistic for InfluenceStatistic {
    fn name(&self) -> String {
        "signature_derivative".into()
    }

    fn pair(&self) -> (usize, usize) {
        self.pair
    }

    fn evaluate(&self, raw: &Path) -> Result<TimeSeries> {
        let p = preprocess(raw, &self.preprocess)?.path;
        sliding_signature_derivative(&p, self.pair, self.window.as_ref())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMode {
    /// `mean ± k·std`, pointwise.
    #[default]
    Gaussian,
    /// Empirical quantiles at the Gaussian tail mass of `±k σ`, pointwise.
    Quantile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullModelSpec {
    pub replicates: usize,
    pub seed: u64,
    pub band_sigmas: f64,
    pub min_run_length: usize,
    pub band_mode: BandMode,
}

impl NullModelSpec {
    pub fn new(replicates: usize, seed: u64) -> Self {
        NullModelSpec {
            replicates,
            seed,
            band_sigmas: 3.0,
            min_run_length: 5,
            band_mode: BandMode::Gaussian,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidArgument(format!(
                "null model needs at least 2 replicates, got {}",
                self.replicates
            )));
        }
        if !(self.band_sigmas > 0.0) {
            return Err(Error::InvalidArgument("band width must be positive".into()));
        }
        if self.min_run_length == 0 {
            return Err(Error::InvalidArgument("minimum run length must be >= 1".into()));
        }
        Ok(())
    }
}

/// A maximal stretch of consecutive band exceedances with one sign.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub start_time: f64,
    pub end_time: f64,
    /// +1 above the band, -1 below.
    pub sign: i8,
    pub start_index: usize,
    pub len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub statistic: String,
    /// 0-based channel pair.
    pub pair: (usize, usize),
    pub channels: (String, String),
    pub replicates: usize,
    pub seed: u64,
    pub band_sigmas: f64,
    pub band_mode: BandMode,
    pub min_run_length: usize,
    pub times: Vec<f64>,
    pub observed: Vec<f64>,
    pub null_mean: Vec<f64>,
    pub null_std: Vec<f64>,
    pub band_lo: Vec<f64>,
    pub band_hi: Vec<f64>,
    pub significant_mask: Vec<bool>,
    pub runs: Vec<Run>,
}

impl SignificanceReport {
    pub fn positive_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| r.sign > 0)
    }

    pub fn negative_runs(&self) -> impl Iterator<Item = &Run> {
        self.runs.iter().filter(|r| r.sign < 0)
    }

    /// Tidy rows: `statistic,pair,time,observed,null_mean,null_std,band_lo,band_hi,significant`.
    pub fn tidy_rows(&self) -> impl Iterator<Item = String> + '_ {
        let pair = format!("{}-{}", self.channels.0, self.channels.1);
        (0..self.times.len()).map(move |k| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                self.statistic,
                pair,
                self.times[k],
                self.observed[k],
                self.null_mean[k],
                self.null_std[k],
                self.band_lo[k],
                self.band_hi[k],
                u8::from(self.significant_mask[k]),
            )
        })
    }
}

pub const TIDY_HEADER: &str = "statistic,pair,time,observed,null_mean,null_std,band_lo,band_hi,significant";

/// Independently permutes every channel's samples; times are kept.
pub fn shuffle_channels(raw: &Path, seed: u64) -> Path {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = raw.channels();
    let mut columns: Vec<Vec<f64>> = (0..n).map(|i| raw.channel(i)).collect();
    for c in columns.iter_mut() {
        c.shuffle(&mut rng);
    }
    Path::from_columns(raw.times().to_vec(), &columns, raw.names().to_vec())
        .expect("permuting samples keeps the path valid")
}

/// Maximal constant-sign stretches of nonzero `signs` with at least
/// `min_len` points.
pub fn find_runs(times: &[f64], signs: &[i8], min_len: usize) -> Vec<Run> {
    let mut runs = Vec::new();
    let mut k = 0;
    while k < signs.len() {
        let s = signs[k];
        let start = k;
        while k < signs.len() && signs[k] == s {
            k += 1;
        }
        if s != 0 && k - start >= min_len {
            runs.push(Run {
                start_time: times[start],
                end_time: times[k - 1],
                sign: s,
                start_index: start,
                len: k - start,
            });
        }
    }
    runs
}

/// Time-shuffled null model for a single statistic.
pub fn shuffle_null<S: Statistic>(raw: &Path, statistic: &S, spec: &NullModelSpec) -> Result<SignificanceReport> {
    let mut reports = shuffle_null_many(raw, std::slice::from_ref(statistic), spec)?;
    Ok(reports.remove(0))
}

/// Time-shuffled null model for several statistics that share each
/// replicate's shuffle.
///
/// Replicate `r` shuffles with seed `replicate_seed(spec.seed, r)`, so the
/// report depends only on `(raw, statistics, spec)`; batches run in parallel
/// and are folded in replicate order.
pub fn shuffle_null_many<S: Statistic>(
    raw: &Path,
    statistics: &[S],
    spec: &NullModelSpec,
) -> Result<Vec<SignificanceReport>> {
    spec.validate()?;
    let observed: Vec<TimeSeries> = statistics
        .iter()
        .map(|s| s.evaluate(raw))
        .collect::<Result<_>>()?;

    let keep_all = spec.band_mode == BandMode::Quantile;
    let mut moments: Vec<Vec<Welford>> = observed
        .iter()
        .map(|o| vec![Welford::default(); o.len()])
        .collect();
    let mut samples: Vec<Vec<Vec<f64>>> = observed
        .iter()
        .map(|o| if keep_all { vec![Vec::with_capacity(spec.replicates); o.len()] } else { Vec::new() })
        .collect();

    let mut r0 = 0;
    while r0 < spec.replicates {
        let r1 = (r0 + BATCH).min(spec.replicates);
        let batch: Vec<Vec<TimeSeries>> = (r0..r1)
            .into_par_iter()
            .map(|r| {
                let shuffled = shuffle_channels(raw, replicate_seed(spec.seed, r as u64));
                statistics.iter().map(|s| s.evaluate(&shuffled)).collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        for rep in &batch {
            for (s, series) in rep.iter().enumerate() {
                if series.len() != observed[s].len() {
                    return Err(Error::Dimension(format!(
                        "replicate statistic has {} points, observed has {}",
                        series.len(),
                        observed[s].len()
                    )));
                }
                for (k, &v) in series.values.iter().enumerate() {
                    moments[s][k].push(v);
                    if keep_all {
                        samples[s][k].push(v);
                    }
                }
            }
        }
        r0 = r1;
    }

    let tail = Normal::new(0.0, 1.0)
        .expect("standard normal")
        .cdf(-spec.band_sigmas);
    let reports = statistics
        .iter()
        .zip(observed)
        .enumerate()
        .map(|(s, (stat, obs))| {
            let null_mean: Vec<f64> = moments[s].iter().map(Welford::mean).collect();
            let null_std: Vec<f64> = moments[s].iter().map(Welford::std).collect();
            let (band_lo, band_hi): (Vec<f64>, Vec<f64>) = match spec.band_mode {
                BandMode::Gaussian => null_mean
                    .iter()
                    .zip(&null_std)
                    .map(|(m, sd)| (m - spec.band_sigmas * sd, m + spec.band_sigmas * sd))
                    .unzip(),
                BandMode::Quantile => samples[s]
                    .iter_mut()
                    .map(|xs| {
                        xs.sort_by(f64::total_cmp);
                        (quantile_sorted(xs, tail), quantile_sorted(xs, 1.0 - tail))
                    })
                    .unzip(),
            };
            let signs: Vec<i8> = obs
                .values
                .iter()
                .zip(band_lo.iter().zip(&band_hi))
                .map(|(&v, (&lo, &hi))| if v > hi { 1 } else if v < lo { -1 } else { 0 })
                .collect();
            let runs = find_runs(&obs.times, &signs, spec.min_run_length);
            let (i, j) = stat.pair();
            SignificanceReport {
                statistic: stat.name(),
                pair: (i, j),
                channels: (raw.names()[i].clone(), raw.names()[j].clone()),
                replicates: spec.replicates,
                seed: spec.seed,
                band_sigmas: spec.band_sigmas,
                band_mode: spec.band_mode,
                min_run_length: spec.min_run_length,
                times: obs.times,
                observed: obs.values,
                null_mean,
                null_std,
                band_lo,
                band_hi,
                significant_mask: signs.iter().map(|&s| s != 0).collect(),
                runs,
            }
        })
        .collect();
    Ok(reports)
}

/// Lag window in time units, inclusive; rounded inward to the sample grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LagRange {
    pub min: f64,
    pub max: f64,
}

impl LagRange {
    pub fn symmetric(max: f64) -> Self {
        LagRange { min: -max, max }
    }
}

/// Unbiased cross-correlation `r(t_d) = 1/(T - |t_d|) Σ γ_i(t) γ_j(t - t_d) dt`
/// with the series zero outside its domain. `T` counts samples, so
/// `r(0)` for `i = j` is the mean of `γ_i²`. The returned `times` are lags.
pub fn cross_correlation(a: &Path, pair: (usize, usize), lags: LagRange) -> Result<TimeSeries> {
    a.check_channel(pair.0)?;
    a.check_channel(pair.1)?;
    let dt = a.uniform_step(UNIFORM_TOL).ok_or_else(|| {
        Error::Unsupported("cross-correlation requires a uniform time grid".into())
    })?;
    if lags.min > lags.max {
        return Err(Error::InvalidArgument(format!(
            "empty lag range [{}, {}]",
            lags.min, lags.max
        )));
    }
    let n = a.len() as i64;
    let k_min = (lags.min / dt - 1e-9).ceil() as i64;
    let k_max = (lags.max / dt + 1e-9).floor() as i64;
    for k in [k_min, k_max] {
        if k.abs() >= n {
            return Err(Error::LagOutOfRange {
                lag: k,
                samples: n as usize,
            });
        }
    }
    let x = a.channel(pair.0);
    let y = a.channel(pair.1);
    let mut out = TimeSeries::default();
    for k in k_min..=k_max {
        let lo = k.max(0);
        let hi = n.min(n + k);
        let s: f64 = (lo..hi).map(|t| x[t as usize] * y[(t - k) as usize]).sum();
        out.times.push(k as f64 * dt);
        out.values.push(s / (n - k.abs()) as f64);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerResult {
    /// `ln(var(restricted) / var(full))` for the caused channel.
    pub measure: f64,
    pub var_full: f64,
    pub var_restricted: f64,
    pub order: usize,
    pub rows: usize,
    pub caused: usize,
    pub covariates: Vec<usize>,
}

/// Granger measure for `caused`: a VAR(`order`) least-squares fit with an
/// intercept on all channels of `a`, against one on `caused` plus
/// `covariates` only. Channels absent from both are the candidate causes.
pub fn granger_var(a: &Path, caused: usize, covariates: &[usize], order: usize) -> Result<GrangerResult> {
    a.check_channel(caused)?;
    for &c in covariates {
        a.check_channel(c)?;
    }
    if order == 0 {
        return Err(Error::InvalidArgument("VAR order must be >= 1".into()));
    }
    let n = a.channels();
    if a.len() <= n * order + 5 {
        return Err(Error::InvalidArgument(format!(
            "{} samples are too few for a VAR({order}) on {n} channels",
            a.len()
        )));
    }
    if a.uniform_step(UNIFORM_TOL).is_none() {
        return Err(Error::Unsupported("granger fit requires a uniform time grid".into()));
    }
    let full: Vec<usize> = (0..n).collect();
    let mut restricted = vec![caused];
    restricted.extend(covariates.iter().copied().filter(|&c| c != caused));
    restricted.sort_unstable();
    restricted.dedup();

    let var_full = residual_variance(a, caused, &full, order)?;
    let var_restricted = residual_variance(a, caused, &restricted, order)?;
    Ok(GrangerResult {
        measure: (var_restricted / var_full).ln(),
        var_full,
        var_restricted,
        order,
        rows: a.len() - order,
        caused,
        covariates: restricted.into_iter().filter(|&c| c != caused).collect(),
    })
}

/// Granger measure for `cause -> caused` conditioned on every other channel.
pub fn granger_pair(a: &Path, cause: usize, caused: usize, order: usize) -> Result<GrangerResult> {
    a.check_channel(cause)?;
    if cause == caused {
        return Err(Error::InvalidArgument("cause and caused channel coincide".into()));
    }
    let covariates: Vec<usize> = (0..a.channels()).filter(|&c| c != cause && c != caused).collect();
    granger_var(a, caused, &covariates, order)
}

fn residual_variance(a: &Path, target: usize, regressors: &[usize], order: usize) -> Result<f64> {
    let rows = a.len() - order;
    let cols = 1 + regressors.len() * order;
    let x = DMatrix::from_fn(rows, cols, |r, c| {
        if c == 0 {
            return 1.0;
        }
        let lag = (c - 1) / regressors.len() + 1;
        let ch = regressors[(c - 1) % regressors.len()];
        a.point(r + order - lag)[ch]
    });
    let y = DVector::from_fn(rows, |r, _| a.point(r + order)[target]);
    let svd = x.clone().svd(true, true);
    let sv = &svd.singular_values;
    let (smax, smin) = (sv.max(), sv.min());
    if !(smin > 1e-10 * smax) {
        return Err(Error::SingularFit(format!(
            "design matrix condition exceeds 1e10 (singular values {smin:e} .. {smax:e})"
        )));
    }
    let beta = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::SingularFit(e.to_string()))?;
    let resid = y - x * beta;
    Ok(resid.norm_squared() / rows as f64)
}
