//! Truncated signatures of polygonal paths.
//!
//! The production engine multiplies per-segment exponentials in segment order
//! (Chen's identity), which is exact for piecewise-linear paths up to rounding.
//! [`signature_oracle`] evaluates single coefficients straight from the simplex
//! integral and exists as an independent reference.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::path::{Path, PreprocessConfig};
use crate::tensor::{outer_acc, TruncatedTensor, Word};

/// Highest truncation level accepted by [`signature`].
pub const DEFAULT_LEVEL_CAP: usize = 6;

/// Longest word accepted by [`signature_oracle`].
pub const ORACLE_MAX_WORD: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureMeta {
    pub channels: usize,
    pub samples: usize,
    pub level: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<PreprocessConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignatureResult {
    pub tensor: TruncatedTensor,
    pub meta: SignatureMeta,
}

impl SignatureResult {
    pub fn coeff(&self, word: &Word) -> Option<f64> {
        self.tensor.coeff(word)
    }

    pub fn with_preprocessing(mut self, cfg: PreprocessConfig) -> Self {
        self.meta.preprocessing = Some(cfg);
        self
    }
}

/// Signature of `a` truncated at `level` (at most [`DEFAULT_LEVEL_CAP`]).
pub fn signature(a: &Path, level: usize) -> Result<SignatureResult> {
    signature_with_cap(a, level, DEFAULT_LEVEL_CAP)
}

pub fn signature_with_cap(a: &Path, level: usize, cap: usize) -> Result<SignatureResult> {
    if level == 0 {
        return Err(Error::InvalidArgument("signature level must be >= 1".into()));
    }
    if level > cap {
        return Err(Error::InvalidArgument(format!(
            "signature level {level} exceeds cap {cap}"
        )));
    }
    let n = a.channels();
    if n.checked_pow(level as u32).is_none() {
        return Err(Error::InvalidArgument(format!(
            "{n}^{level} coefficients overflow"
        )));
    }
    let mut sig = TruncatedTensor::unit(n, level);
    let mut powers: Vec<Vec<f64>> = (0..=level).map(|k| vec![0.0; n.pow(k as u32)]).collect();
    powers[0][0] = 1.0;
    for delta in a.increments() {
        if delta.iter().all(|&d| d == 0.0) {
            continue;
        }
        segment_powers(&delta, &mut powers);
        chen_step(&mut sig, &powers);
    }
    Ok(SignatureResult {
        tensor: sig,
        meta: SignatureMeta {
            channels: n,
            samples: a.len(),
            level,
            preprocessing: None,
        },
    })
}

/// Logarithm of the truncated signature, in the word basis.
pub fn log_signature(a: &Path, level: usize) -> Result<TruncatedTensor> {
    signature(a, level)?.tensor.log()
}

/// `powers[j] = delta^{⊗j} / j!`
fn segment_powers(delta: &[f64], powers: &mut [Vec<f64>]) {
    if powers.len() > 1 {
        powers[1].copy_from_slice(delta);
    }
    for j in 2..powers.len() {
        let (lo, hi) = powers.split_at_mut(j);
        let dst = &mut hi[0];
        dst.iter_mut().for_each(|x| *x = 0.0);
        outer_acc(dst, &lo[j - 1], delta, 1.0 / j as f64);
    }
}

/// `sig <- sig ⊗ exp(delta)`, updating grades from the top down so lower
/// grades still hold their old values when read.
fn chen_step(sig: &mut TruncatedTensor, powers: &[Vec<f64>]) {
    let levels = sig.levels_mut();
    for k in (1..levels.len()).rev() {
        let (lo, hi) = levels.split_at_mut(k);
        let dst = &mut hi[0];
        for (p, grade) in lo.iter().enumerate() {
            outer_acc(dst, grade, &powers[k - p], 1.0);
        }
    }
}

/// Reference evaluation of one signature coefficient from the simplex form of
/// the iterated integral.
///
/// Each segment is parametrised over a unit interval, so `γ'` is the segment
/// increment. The simplex splits into cells indexed by non-decreasing segment
/// tuples `s_1 <= ... <= s_k`; a cell in which one segment repeats `r` times
/// has volume factor `1 / r!`. Cost is `O(M^k)` for `M` segments.
pub fn signature_oracle(a: &Path, word: &Word) -> Result<f64> {
    if word.len() > ORACLE_MAX_WORD {
        return Err(Error::WordTooLong {
            len: word.len(),
            max: ORACLE_MAX_WORD,
        });
    }
    if word.letters().iter().any(|&l| l > a.channels()) {
        return Err(Error::InvalidArgument(format!(
            "word {word} uses letters beyond {} channels",
            a.channels()
        )));
    }
    let increments: Vec<Vec<f64>> = a.increments().collect();
    let letters: Vec<usize> = word.letters().iter().map(|l| l - 1).collect();
    if letters.is_empty() {
        return Ok(1.0);
    }
    Ok(oracle_cells(&increments, &letters, 0, 0, 1, 1.0))
}

fn oracle_cells(
    incs: &[Vec<f64>],
    letters: &[usize],
    pos: usize,
    min_seg: usize,
    run: usize,
    acc: f64,
) -> f64 {
    if pos == letters.len() {
        return acc;
    }
    let mut total = 0.0;
    for s in min_seg..incs.len() {
        // run length of the segment currently being repeated
        let r = if pos > 0 && s == min_seg { run + 1 } else { 1 };
        let w = acc * incs[s][letters[pos]] / r as f64;
        total += oracle_cells(incs, letters, pos + 1, s, r, w);
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingCheck {
    pub lambda: f64,
    pub level: usize,
    /// Max `|S(λa)_w - λ^k S(a)_w|` over words of grade `k`, for `k = 0..=L`.
    pub max_deviation: Vec<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

/// Verifies the grade-wise scaling law `S(λa)_k = λ^k S(a)_k`.
pub fn scale_path_signature_check(a: &Path, lambda: f64, level: usize) -> Result<ScalingCheck> {
    const TOL: f64 = 1e-10;
    let base = signature(a, level)?.tensor;
    let scaled = signature(&a.scale(lambda)?, level)?.tensor;
    let max_deviation: Vec<f64> = (0..=level)
        .map(|k| {
            let f = lambda.powi(k as i32);
            base.grade(k)
                .iter()
                .zip(scaled.grade(k))
                .map(|(b, s)| (s - f * b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let passed = max_deviation.iter().all(|&d| d < TOL);
    Ok(ScalingCheck {
        lambda,
        level,
        max_deviation,
        tolerance: TOL,
        passed,
    })
}

/// Piecewise-constant stream `γ_i(t) γ_j'(t)`, one value per segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeStream {
    /// Segment midpoints.
    pub times: Vec<f64>,
    /// Segment durations.
    pub dt: Vec<f64>,
    pub values: Vec<f64>,
    pub starts_at_origin: bool,
}

impl DerivativeStream {
    /// Exact integral of the stream over the whole domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().zip(&self.dt).map(|(v, d)| v * d).sum()
    }

    /// Running integral at each segment end.
    pub fn cumulative(&self) -> Vec<f64> {
        self.values
            .iter()
            .zip(&self.dt)
            .scan(0.0, |acc, (v, d)| {
                *acc += v * d;
                Some(*acc)
            })
            .collect()
    }
}

/// Derivative of the level-2 coefficient `S^{i,j}` in time: the value of
/// channel `i` at each segment midpoint times the slope of channel `j`.
/// Channels are 0-based.
pub fn signature_derivative(a: &Path, i: usize, j: usize) -> Result<DerivativeStream> {
    a.check_channel(i)?;
    a.check_channel(j)?;
    if a.len() < 2 {
        return Err(Error::InvalidPath(
            "signature derivative needs at least two samples".into(),
        ));
    }
    let starts_at_origin = a.first().iter().all(|v| v.abs() <= 1e-12);
    if !starts_at_origin {
        log::warn!("signature derivative of a path that does not start at the origin");
    }
    let t = a.times();
    let mut out = DerivativeStream {
        times: Vec::with_capacity(a.len() - 1),
        dt: Vec::with_capacity(a.len() - 1),
        values: Vec::with_capacity(a.len() - 1),
        starts_at_origin,
    };
    for k in 0..a.len() - 1 {
        let (p, q) = (a.point(k), a.point(k + 1));
        let dt = t[k + 1] - t[k];
        out.times.push(0.5 * (t[k] + t[k + 1]));
        out.dt.push(dt);
        out.values.push(0.5 * (p[i] + q[i]) * (q[j] - p[j]) / dt);
    }
    Ok(out)
}
