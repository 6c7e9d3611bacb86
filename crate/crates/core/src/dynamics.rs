//! Deterministic data generators: the Lorenz system and synthetic lead-lag
//! series.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Path, Warp};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LorenzParams {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
    pub x0: [f64; 3],
    pub dt: f64,
    pub steps: usize,
    /// Record every `sample_every`-th step; integration still uses `dt`.
    pub sample_every: usize,
}

impl Default for LorenzParams {
    fn default() -> Self {
        LorenzParams {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
            x0: [1.0, 1.0, 1.0],
            dt: 0.005,
            steps: 10_000,
            sample_every: 1,
        }
    }
}

impl LorenzParams {
    fn field(&self, s: [f64; 3]) -> [f64; 3] {
        [
            self.sigma * (s[1] - s[0]),
            s[0] * (self.rho - s[2]) - s[1],
            s[0] * s[1] - self.beta * s[2],
        ]
    }
}

fn axpy(s: [f64; 3], h: f64, k: [f64; 3]) -> [f64; 3] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]]
}

/// Classical fixed-step RK4 integration with channels `x, y, z`, sampled at
/// `t = k dt` for every step `k` divisible by `sample_every`.
pub fn lorenz(p: &LorenzParams) -> Result<Path> {
    if !(p.dt > 0.0) || p.steps == 0 || p.sample_every == 0 {
        return Err(Error::InvalidArgument(format!(
            "lorenz needs dt > 0, steps >= 1 and sample_every >= 1, got dt={} steps={} sample_every={}",
            p.dt, p.steps, p.sample_every
        )));
    }
    let h = p.dt;
    let mut s = p.x0;
    let mut times = vec![0.0];
    let mut values = Vec::with_capacity(3 * (p.steps / p.sample_every + 1));
    values.extend_from_slice(&s);
    for step in 1..=p.steps {
        let k1 = p.field(s);
        let k2 = p.field(axpy(s, 0.5 * h, k1));
        let k3 = p.field(axpy(s, 0.5 * h, k2));
        let k4 = p.field(axpy(s, h, k3));
        for c in 0..3 {
            s[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if !s.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence { step });
        }
        if step % p.sample_every == 0 {
            times.push(step as f64 * h);
            values.extend_from_slice(&s);
        }
    }
    Path::from_flat(times, values, 3, vec!["x".into(), "y".into(), "z".into()])
}

/// Raised-cosine bump of support `[center - width/2, center + width/2]`, peak 1.
pub fn raised_cosine(t: f64, center: f64, width: f64) -> f64 {
    let s = (t - center) / width;
    if s.abs() >= 0.5 {
        0.0
    } else {
        0.5 * (1.0 + (2.0 * PI * s).cos())
    }
}

fn add_noise(columns: &mut [Vec<f64>], sigma: f64, seed: u64) -> Result<()> {
    if sigma == 0.0 {
        return Ok(());
    }
    let dist = Normal::new(0.0, sigma)
        .map_err(|e| Error::InvalidArgument(format!("noise sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in columns.iter_mut() {
        for v in c.iter_mut() {
            *v += dist.sample(&mut rng);
        }
    }
    Ok(())
}

fn unit_grid(samples: usize) -> Vec<f64> {
    (0..samples).map(|k| k as f64 / (samples - 1) as f64).collect()
}

/// Two channels of `n_events` periodic bumps on `t in [0, 1]`; channel 2 is
/// channel 1 delayed by `phase_lag` event periods. Values are evaluated at
/// the warped clock `warp(t)`, so warping only reparametrizes the curve.
///
/// Without noise the signed area is `n_events * pi/4 * sin(2 pi phase_lag)`.
pub fn cyclic_pair(
    n_events: usize,
    phase_lag: f64,
    warp: &Warp,
    samples: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Path> {
    if samples < 16 {
        return Err(Error::InvalidArgument(format!(
            "cyclic pair needs at least 16 samples, got {samples}"
        )));
    }
    let times = unit_grid(samples);
    let w = 2.0 * PI * n_events as f64;
    let phase = 2.0 * PI * phase_lag;
    let mut cols = vec![Vec::with_capacity(samples), Vec::with_capacity(samples)];
    for &t in &times {
        let u = warp.apply(t, 0.0, 1.0);
        cols[0].push(0.5 * (1.0 - (w * u).cos()));
        cols[1].push(0.5 * (1.0 - (w * u - phase).cos()));
    }
    add_noise(&mut cols, noise_sigma, seed)?;
    Path::from_columns(times, &cols, vec!["a".into(), "b".into()])
}

/// One localized lead-lag episode: `leader` carries a bump at `center`, and
/// `follower` the same bump `lag` later, scaled by `amplitude`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSpec {
    /// 0-based channel index.
    pub leader: usize,
    pub follower: usize,
    pub center: f64,
    pub width: f64,
    pub lag: f64,
    pub amplitude: f64,
}

impl EventSpec {
    pub fn new(leader: usize, follower: usize, center: f64) -> Self {
        EventSpec {
            leader,
            follower,
            center,
            width: 0.06,
            lag: 0.02,
            amplitude: 1.0,
        }
    }
}

/// The default episode set: channel 1 leads channel 2 early on, channel 3
/// leads channel 2 later, and channels 1 and 3 never interact.
pub fn default_events() -> Vec<EventSpec> {
    vec![EventSpec::new(0, 1, 0.3), EventSpec::new(2, 1, 0.7)]
}

/// Three channels on `t in [0, 1]`: Gaussian noise plus the bumps of
/// `events`. Overlapping events simply add.
pub fn three_channel_event_series(
    events: &[EventSpec],
    samples: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<Path> {
    if samples < 2 {
        return Err(Error::InvalidArgument("event series needs at least 2 samples".into()));
    }
    for e in events {
        if e.leader >= 3 || e.follower >= 3 {
            return Err(Error::InvalidArgument(format!(
                "event channels must be 0, 1 or 2, got {} -> {}",
                e.leader, e.follower
            )));
        }
        if !(e.width > 0.0) || !(0.0..=1.0).contains(&e.center) || !(0.0..=1.0).contains(&(e.center + e.lag)) {
            return Err(Error::InvalidArgument(format!(
                "event at {} (lag {}, width {}) lies outside [0, 1]",
                e.center, e.lag, e.width
            )));
        }
    }
    let times = unit_grid(samples);
    let mut cols = vec![vec![0.0; samples]; 3];
    add_noise(&mut cols, noise_sigma, seed)?;
    for e in events {
        for (k, &t) in times.iter().enumerate() {
            cols[e.leader][k] += e.amplitude * raised_cosine(t, e.center, e.width);
            cols[e.follower][k] += e.amplitude * raised_cosine(t, e.center + e.lag, e.width);
        }
    }
    Path::from_columns(times, &cols, vec!["g1".into(), "g2".into(), "g3".into()])
}
