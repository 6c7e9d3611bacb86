use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::Path;
use crate::error::{Error, Result};

/// Relative tolerance on time steps for a grid to count as uniform.
const UNIFORM_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizeMode {
    /// Each channel scaled to unit range.
    #[serde(rename = "per")]
    PerChannel,
    /// All channels divided by the largest channel range.
    Global,
    #[default]
    None,
}

impl fmt::Display for NormalizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizeMode::PerChannel => "per",
            NormalizeMode::Global => "global",
            NormalizeMode::None => "none",
        })
    }
}

impl FromStr for NormalizeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per" | "per-channel" => Ok(NormalizeMode::PerChannel),
            "global" => Ok(NormalizeMode::Global),
            "none" => Ok(NormalizeMode::None),
            _ => Err(Error::InvalidArgument(format!(
                "normalize mode must be per, global or none, got '{s}'"
            ))),
        }
    }
}

/// Preprocessing steps, applied in the order smooth, center, normalize,
/// prepend origin.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub center: bool,
    pub normalize: NormalizeMode,
    pub prepend_zero: bool,
    /// Gaussian width in time units; 0 disables smoothing.
    pub smooth_sigma: f64,
}

impl PreprocessConfig {
    /// Center, normalize each channel to unit range, start at the origin.
    pub fn influence() -> Self {
        PreprocessConfig {
            center: true,
            normalize: NormalizeMode::PerChannel,
            prepend_zero: true,
            smooth_sigma: 0.0,
        }
    }

    pub fn smoothing(sigma: f64) -> Self {
        PreprocessConfig {
            smooth_sigma: sigma,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub path: Path,
    pub warnings: Vec<String>,
}

pub fn preprocess(a: &Path, cfg: &PreprocessConfig) -> Result<Preprocessed> {
    if !(cfg.smooth_sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing sigma must be non-negative, got {}",
            cfg.smooth_sigma
        )));
    }
    let mut warnings = Vec::new();
    let mut path = if cfg.smooth_sigma > 0.0 {
        gaussian_smooth(a, cfg.smooth_sigma)?
    } else {
        a.clone()
    };
    let n = path.channels();
    let t = path.len() as f64;

    if cfg.center {
        let means: Vec<f64> = (0..n)
            .map(|i| path.points().map(|p| p[i]).sum::<f64>() / t)
            .collect();
        path = path.map_values(|i, v| v - means[i])?;
    }

    if cfg.normalize != NormalizeMode::None {
        let ranges: Vec<f64> = (0..n)
            .map(|i| {
                let (lo, hi) = path
                    .points()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[i]), hi.max(p[i]))
                    });
                hi - lo
            })
            .collect();
        let divisors: Vec<f64> = match cfg.normalize {
            NormalizeMode::PerChannel => ranges
                .iter()
                .enumerate()
                .map(|(i, &r)| {
                    if r > 0.0 {
                        r
                    } else {
                        let msg = format!("channel '{}' is constant; left unscaled", path.names()[i]);
                        log::warn!("{msg}");
                        warnings.push(msg);
                        1.0
                    }
                })
                .collect(),
            NormalizeMode::Global => {
                let r = ranges.iter().copied().fold(0.0, f64::max);
                let r = if r > 0.0 {
                    r
                } else {
                    let msg = "all channels are constant; left unscaled".to_string();
                    log::warn!("{msg}");
                    warnings.push(msg);
                    1.0
                };
                vec![r; n]
            }
            NormalizeMode::None => unreachable!(),
        };
        path = path.map_values(|i, v| v / divisors[i])?;
    }

    if cfg.prepend_zero {
        let t0 = path.start_time() - path.median_step();
        let mut times = vec![t0];
        times.extend_from_slice(path.times());
        let mut values = vec![0.0; n];
        values.extend_from_slice(path.values());
        path = Path::from_flat(times, values, n, path.names().to_vec())?;
    }

    Ok(Preprocessed { path, warnings })
}

/// Gaussian smoothing of every channel on a uniform grid. The kernel is
/// truncated at three standard deviations, renormalised to unit sum, and
/// applied with half-sample symmetric (reflect) padding.
pub fn gaussian_smooth(a: &Path, sigma: f64) -> Result<Path> {
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "smoothing sigma must be non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 || a.len() < 2 {
        return Ok(a.clone());
    }
    let dt = a.uniform_step(UNIFORM_TOL).ok_or_else(|| {
        Error::Unsupported("gaussian smoothing requires a uniform time grid".into())
    })?;
    let s = sigma / dt;
    let radius = (3.0 * s).ceil() as i64;
    let mut kernel: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / (2.0 * s * s)).exp())
        .collect();
    let total: f64 = kernel.iter().sum();
    kernel.iter_mut().for_each(|w| *w /= total);

    let len = a.len() as i64;
    let n = a.channels();
    let reflect = |idx: i64| -> usize {
        let period = 2 * len;
        let m = idx.rem_euclid(period);
        (if m >= len { period - 1 - m } else { m }) as usize
    };
    let src = a.values();
    let mut values = vec![0.0; src.len()];
    for k in 0..len {
        let dst = &mut values[k as usize * n..(k as usize + 1) * n];
        for (off, w) in (-radius..=radius).zip(&kernel) {
            let j = reflect(k + off);
            for (d, s) in dst.iter_mut().zip(&src[j * n..(j + 1) * n]) {
                *d += w * s;
            }
        }
    }
    Path::from_flat(a.times().to_vec(), values, n, a.names().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn sample() -> Path {
        Path::new(
            vec![0.0, 1.0, 2.0, 3.0, 4.0],
            vec![
                vec![1.0, 5.0],
                vec![3.0, 5.0],
                vec![2.0, 5.0],
                vec![6.0, 5.0],
                vec![0.0, 5.0],
            ],
            vec!["a".into(), "b".into()],
        )
        .unwrap()
    }

    #[test]
    fn all_off_is_identity() {
        let a = sample();
        let p = preprocess(&a, &PreprocessConfig::default()).unwrap();
        assert_eq!(p.path, a);
        assert!(p.warnings.is_empty());
    }

    #[test]
    fn center_and_normalize() {
        let a = sample();
        let cfg = PreprocessConfig {
            center: true,
            normalize: NormalizeMode::PerChannel,
            ..Default::default()
        };
        let p = preprocess(&a, &cfg).unwrap();
        let x = p.path.channel(0);
        let mean: f64 = x.iter().sum::<f64>() / x.len() as f64;
        assert!(mean.abs() < 1e-12);
        let range = x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - x.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(range, 1.0);
        // constant channel left unscaled
        assert_eq!(p.warnings.len(), 1);
        assert!(p.path.channel(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn normalization_is_idempotent() {
        let cfg = PreprocessConfig {
            center: true,
            normalize: NormalizeMode::PerChannel,
            ..Default::default()
        };
        let once = preprocess(&sample(), &cfg).unwrap().path;
        let twice = preprocess(&once, &cfg).unwrap().path;
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn global_normalization_uses_largest_range() {
        let a = Path::from_points(&[vec![0.0, 0.0], vec![2.0, 4.0], vec![1.0, 1.0]]).unwrap();
        let cfg = PreprocessConfig {
            normalize: NormalizeMode::Global,
            ..Default::default()
        };
        let p = preprocess(&a, &cfg).unwrap().path;
        assert_eq!(p.channel(0), vec![0.0, 0.5, 0.25]);
        assert_eq!(p.channel(1), vec![0.0, 1.0, 0.25]);
    }

    #[test]
    fn prepend_origin_one_step_earlier() {
        let a = sample();
        let cfg = PreprocessConfig {
            prepend_zero: true,
            ..Default::default()
        };
        let p = preprocess(&a, &cfg).unwrap().path;
        assert_eq!(p.len(), a.len() + 1);
        assert_eq!(p.start_time(), -1.0);
        assert_eq!(p.first(), &[0.0, 0.0]);
    }

    #[test]
    fn smoothing_basics() {
        let a = sample();
        assert_eq!(gaussian_smooth(&a, 0.0).unwrap(), a);
        let c = Path::new(
            (0..50).map(|k| k as f64 * 0.1).collect(),
            vec![vec![2.5]; 50],
            vec![],
        )
        .unwrap();
        let s = gaussian_smooth(&c, 0.7).unwrap();
        assert!(s.values().iter().all(|v| (v - 2.5).abs() < 1e-12));
        let nonuniform = Path::new(vec![0.0, 1.0, 3.0], vec![vec![0.0]; 3], vec![]).unwrap();
        assert!(matches!(
            gaussian_smooth(&nonuniform, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn smoothing_reduces_noise_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xs: Vec<Vec<f64>> = (0..2000)
            .map(|_| vec![StandardNormal.sample(&mut rng)])
            .collect();
        let a = Path::from_points(&xs).unwrap();
        let var = |p: &Path| {
            let x = p.channel(0);
            let m = x.iter().sum::<f64>() / x.len() as f64;
            x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
        };
        let smooth = gaussian_smooth(&a, 10.0).unwrap();
        assert!(var(&smooth) < var(&a));
    }
}
