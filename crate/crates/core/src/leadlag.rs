//! Signed areas and lead matrices, plus the winding-number and
//! family-of-paths area integrals used to cross-check them.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::Path;
use crate::stats::{pairwise_sum, CompensatedSum};

/// `A^{i,j} = (S^{i,j} - S^{j,i}) / 2`, from half the cross products of the
/// increments about the starting point. Channels are 0-based.
pub fn signed_area(a: &Path, i: usize, j: usize) -> Result<f64> {
    a.check_channel(i)?;
    a.check_channel(j)?;
    Ok(signed_area_unchecked(a, i, j))
}

pub(crate) fn signed_area_unchecked(a: &Path, i: usize, j: usize) -> f64 {
    if i == j {
        return 0.0;
    }
    let (x0, y0) = (a.first()[i], a.first()[j]);
    let mut acc = 0.0;
    for k in 0..a.len().saturating_sub(1) {
        let (p, q) = (a.point(k), a.point(k + 1));
        let (x, y) = (p[i] - x0, p[j] - y0);
        acc += x * (q[j] - p[j]) - y * (q[i] - p[i]);
    }
    0.5 * acc
}

/// Appends one segment from the final sample back to the first.
pub fn close_path(a: &Path) -> Path {
    let mut times = a.times().to_vec();
    times.push(a.end_time() + a.median_step());
    let mut values = a.values().to_vec();
    values.extend_from_slice(a.first());
    Path::from_flat(times, values, a.channels(), a.names().to_vec())
        .expect("closing a valid path keeps it valid")
}

/// Winding number of the closed `(i, j)` projection of `closed` around `x`.
/// A final closing segment is implied when the path does not end where it
/// started.
pub fn winding_number(closed: &Path, i: usize, j: usize, x: [f64; 2]) -> Result<i64> {
    closed.check_channel(i)?;
    closed.check_channel(j)?;
    let pts = planar_loop(closed, i, j);
    if min_distance(&pts, x) <= 1e-12 {
        return Err(Error::PointOnCurve { x: x[0], y: x[1] });
    }
    Ok(winding_unchecked(&pts, x))
}

fn planar_loop(a: &Path, i: usize, j: usize) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = a.points().map(|p| [p[i], p[j]]).collect();
    if pts.first() != pts.last() {
        pts.push(pts[0]);
    }
    pts
}

fn winding_unchecked(pts: &[[f64; 2]], x: [f64; 2]) -> i64 {
    let mut angle = 0.0;
    for w in pts.windows(2) {
        let (ax, ay) = (w[0][0] - x[0], w[0][1] - x[1]);
        let (bx, by) = (w[1][0] - x[0], w[1][1] - x[1]);
        angle += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    (angle / (2.0 * PI)).round() as i64
}

fn segment_distance(a: [f64; 2], b: [f64; 2], x: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x[0] - a[0]) * dx + (x[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (px, py) = (a[0] + t * dx - x[0], a[1] + t * dy - x[1]);
    (px * px + py * py).sqrt()
}

fn min_distance(pts: &[[f64; 2]], x: [f64; 2]) -> f64 {
    pts.windows(2)
        .map(|w| segment_distance(w[0], w[1], x))
        .fold(f64::INFINITY, f64::min)
}

/// Resolution of the cell grid for [`signed_area_via_winding`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        GridSpec { nx: n, ny: n }
    }
}

/// Outcome of a winding-number area integration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindingArea {
    pub area: f64,
    pub cell_width: f64,
    pub cell_height: f64,
    /// Perimeter of the closed planar curve.
    pub perimeter: f64,
}

impl WindingArea {
    pub fn cell_diagonal(&self) -> f64 {
        self.cell_width.hypot(self.cell_height)
    }

    /// Error bound `perimeter x cell diagonal` for the Riemann sum.
    pub fn error_bound(&self) -> f64 {
        self.perimeter * self.cell_diagonal()
    }
}

/// Riemann sum of the winding number of the closed `(i, j)` projection over a
/// grid covering its bounding box with a 5% margin. Cell centres within 1e-9
/// of the curve are shifted by half a cell.
pub fn signed_area_via_winding(a: &Path, i: usize, j: usize, grid: GridSpec) -> Result<WindingArea> {
    a.check_channel(i)?;
    a.check_channel(j)?;
    if grid.nx == 0 || grid.ny == 0 {
        return Err(Error::InvalidArgument("grid needs at least one cell".into()));
    }
    let pts = planar_loop(a, i, j);
    let perimeter: f64 = pts
        .windows(2)
        .map(|w| (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]))
        .sum();
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &pts {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let diag = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
    if diag == 0.0 {
        return Ok(WindingArea {
            area: 0.0,
            cell_width: 0.0,
            cell_height: 0.0,
            perimeter,
        });
    }
    let margin = 0.05 * diag;
    let (x0, y0) = (lo[0] - margin, lo[1] - margin);
    let w = (hi[0] - lo[0] + 2.0 * margin) / grid.nx as f64;
    let h = (hi[1] - lo[1] + 2.0 * margin) / grid.ny as f64;

    let rows: Vec<f64> = (0..grid.ny)
        .into_par_iter()
        .map(|r| {
            let y = y0 + (r as f64 + 0.5) * h;
            let cells: Vec<f64> = (0..grid.nx)
                .map(|c| {
                    let mut x = [x0 + (c as f64 + 0.5) * w, y];
                    if min_distance(&pts, x) <= 1e-9 {
                        x[0] += 0.5 * w;
                        x[1] += 0.5 * h;
                    }
                    winding_unchecked(&pts, x) as f64
                })
                .collect();
            pairwise_sum(&cells)
        })
        .collect();
    Ok(WindingArea {
        area: pairwise_sum(&rows) * w * h,
        cell_width: w,
        cell_height: h,
        perimeter,
    })
}

/// Skew-symmetric matrix of pairwise signed areas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadMatrix {
    pub channels: Vec<String>,
    #[serde(rename = "A")]
    pub entries: Vec<Vec<f64>>,
}

impl LeadMatrix {
    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    /// CSV with channel names as header row and first column.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("channel");
        for c in &self.channels {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (name, row) in self.channels.iter().zip(&self.entries) {
            s.push_str(name);
            for v in row {
                s.push(',');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        }
        s
    }
}

pub fn lead_matrix(a: &Path) -> LeadMatrix {
    let n = a.channels();
    let mut entries = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = signed_area_unchecked(a, i, j);
            entries[i][j] = v;
            entries[j][i] = -v;
        }
    }
    LeadMatrix {
        channels: a.names().to_vec(),
        entries,
    }
}

/// A map `[0,1]^2 -> R^N` sampled on a uniform `ns x nt` grid, with
/// `values[(a * nt + b) * N + c]` holding channel `c` at `s = a/(ns-1)`,
/// `t = b/(nt-1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyGrid {
    pub ns: usize,
    pub nt: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl FamilyGrid {
    pub fn sample(ns: usize, nt: usize, channels: usize, f: impl Fn(f64, f64) -> Vec<f64>) -> Result<Self> {
        if ns < 2 || nt < 2 {
            return Err(Error::InvalidArgument(format!(
                "family grid must be at least 2x2, got {ns}x{nt}"
            )));
        }
        let mut values = Vec::with_capacity(ns * nt * channels);
        for a in 0..ns {
            for b in 0..nt {
                let v = f(a as f64 / (ns - 1) as f64, b as f64 / (nt - 1) as f64);
                if v.len() != channels {
                    return Err(Error::Dimension(format!(
                        "family map returned {} values, expected {channels}",
                        v.len()
                    )));
                }
                values.extend(v);
            }
        }
        Ok(FamilyGrid { ns, nt, channels, values })
    }

    fn at(&self, a: usize, b: usize, c: usize) -> f64 {
        self.values[(a * self.nt + b) * self.channels + c]
    }
}

/// `∫∫ (∂_s α_i ∂_t α_j - ∂_t α_i ∂_s α_j) dt ds` over the unit square.
///
/// Each cell contributes the determinant of its edge differences, averaged
/// over opposite edges (the midpoint rule, with the `ds dt` factors
/// cancelled). Products and sums are error-compensated, so affine families
/// are reproduced to the last bit whenever the exact answer is representable.
pub fn family_area(alpha: &FamilyGrid, i: usize, j: usize) -> Result<f64> {
    if alpha.ns < 2 || alpha.nt < 2 || alpha.values.len() != alpha.ns * alpha.nt * alpha.channels {
        return Err(Error::InvalidArgument("degenerate family grid".into()));
    }
    if i >= alpha.channels || j >= alpha.channels {
        return Err(Error::InvalidArgument(format!(
            "channel out of range for {} channels",
            alpha.channels
        )));
    }
    let d_s = |a: usize, b: usize, c: usize| {
        0.5 * ((alpha.at(a + 1, b, c) - alpha.at(a, b, c)) + (alpha.at(a + 1, b + 1, c) - alpha.at(a, b + 1, c)))
    };
    let d_t = |a: usize, b: usize, c: usize| {
        0.5 * ((alpha.at(a, b + 1, c) - alpha.at(a, b, c)) + (alpha.at(a + 1, b + 1, c) - alpha.at(a + 1, b, c)))
    };
    let mut acc = CompensatedSum::default();
    for a in 0..alpha.ns - 1 {
        for b in 0..alpha.nt - 1 {
            acc.add_product(d_s(a, b, i), d_t(a, b, j));
            acc.add_product(-d_t(a, b, i), d_s(a, b, j));
        }
    }
    Ok(acc.value())
}
