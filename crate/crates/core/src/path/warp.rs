use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monotone maps of a time axis. Except for `Affine`, warps act on the
/// normalised coordinate `u = (t - t0) / (t1 - t0)` and map `[0, 1]` onto
/// itself, so the domain endpoints are preserved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Warp {
    Identity,
    /// `u -> u^p`, `p > 0`.
    Power(f64),
    /// `t -> scale * t + offset` on absolute times.
    Affine { scale: f64, offset: f64 },
    /// `u -> u + a sin(2 pi m u) / (2 pi m)`; monotone for `|a| < 1`.
    Sine { amplitude: f64, cycles: f64 },
    /// Piecewise-linear through `(0,0)`, the given knots, and `(1,1)`.
    Knots(Vec<(f64, f64)>),
}

impl Warp {
    /// Evaluates the warp on the normalised coordinate `u`.
    pub fn eval_unit(&self, u: f64) -> f64 {
        match self {
            Warp::Identity | Warp::Affine { .. } => u,
            Warp::Power(p) => u.signum() * u.abs().powf(*p),
            Warp::Sine { amplitude, cycles } => {
                let w = 2.0 * std::f64::consts::PI * cycles;
                u + amplitude * (w * u).sin() / w
            }
            Warp::Knots(knots) => {
                let mut xs = vec![(0.0, 0.0)];
                xs.extend(knots.iter().copied());
                xs.push((1.0, 1.0));
                let k = xs.partition_point(|&(x, _)| x <= u).clamp(1, xs.len() - 1);
                let ((x0, y0), (x1, y1)) = (xs[k - 1], xs[k]);
                y0 + (u - x0) * (y1 - y0) / (x1 - x0)
            }
        }
    }

    /// Applies the warp to an absolute time `t` on the domain `[t0, t1]`.
    pub fn apply(&self, t: f64, t0: f64, t1: f64) -> f64 {
        match self {
            Warp::Identity => t,
            Warp::Affine { scale, offset } => scale * t + offset,
            _ => {
                let span = t1 - t0;
                if span <= 0.0 {
                    return t;
                }
                t0 + span * self.eval_unit((t - t0) / span)
            }
        }
    }
}

impl fmt::Display for Warp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warp::Identity => write!(f, "identity"),
            Warp::Power(p) => write!(f, "power:{p}"),
            Warp::Affine { scale, offset } => write!(f, "affine:{scale}:{offset}"),
            Warp::Sine { amplitude, cycles } => write!(f, "sine:{amplitude}:{cycles}"),
            Warp::Knots(k) => {
                write!(f, "knots")?;
                for (x, y) in k {
                    write!(f, ":{x},{y}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Warp {
    type Err = Error;

    /// Parses `identity`, `power:P`, `affine:S:O`, `sine:A:M` or
    /// `knots:x,y:x,y...`.
    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let kind = parts.next().unwrap_or_default();
        let rest: Vec<&str> = parts.collect();
        let num = |x: &str| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad number '{x}' in warp '{s}'")))
        };
        let arity = |n: usize| {
            if rest.len() == n {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!(
                    "warp '{kind}' takes {n} parameter(s): '{s}'"
                )))
            }
        };
        match kind {
            "identity" | "none" => {
                arity(0)?;
                Ok(Warp::Identity)
            }
            "power" => {
                arity(1)?;
                let p = num(rest[0])?;
                if !(p > 0.0) {
                    return Err(Error::InvalidArgument("power warp needs p > 0".into()));
                }
                Ok(Warp::Power(p))
            }
            "affine" => {
                arity(2)?;
                Ok(Warp::Affine {
                    scale: num(rest[0])?,
                    offset: num(rest[1])?,
                })
            }
            "sine" => {
                arity(2)?;
                Ok(Warp::Sine {
                    amplitude: num(rest[0])?,
                    cycles: num(rest[1])?,
                })
            }
            "knots" => {
                let knots = rest
                    .iter()
                    .map(|kv| {
                        let (x, y) = kv.split_once(',').ok_or_else(|| {
                            Error::InvalidArgument(format!("knot '{kv}' must be x,y"))
                        })?;
                        Ok((num(x)?, num(y)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Warp::Knots(knots))
            }
            _ => Err(Error::InvalidArgument(format!("unknown warp '{s}'"))),
        }
    }
}
