//! Overlapping window layout over the frames × views latent grid.
//!
//! The temporal branch tiles frames with long windows (`t_long`, overlap
//! `t_ol`) and views with short ones (`n_short`); the view branch tiles
//! frames with `t_short` and views with long windows (`n_long`, overlap
//! `n_ol`). A segment is one frame window crossed with one view window, and
//! its per-cell fusion weight is the product of the two axis weights.
//!
//! Along one axis, a window that shares `L` cells with a neighbour ramps its
//! weight over those cells from `1/(L+1)` at the outer edge to `L/(L+1)` at
//! the inner edge, so two overlapping windows sum to one on every shared
//! cell. Where anchoring the last window makes a cell fall in three or more
//! windows, the axis weights are renormalized per cell, which keeps the sum
//! at one.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    #[default]
    Linear,
    /// `sin²(π/2 · a)` of the linear ramp value `a`; still sums to one.
    Cosine,
}

impl RampShape {
    fn apply(self, a: f64) -> f64 {
        match self {
            RampShape::Linear => a,
            RampShape::Cosine => (std::f64::consts::FRAC_PI_2 * a).sin().powi(2),
        }
    }
}

impl std::str::FromStr for RampShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(RampShape::Linear),
            "cosine" => Ok(RampShape::Cosine),
            other => Err(Error::Config(format!("unknown ramp shape {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WindowConfig {
    pub t_long: usize,
    pub t_ol: usize,
    pub t_short: usize,
    pub n_long: usize,
    pub n_ol: usize,
    pub n_short: usize,
    pub ramp: RampShape,
    pub cyclic_views: bool,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self {
            t_long: 16,
            t_ol: 8,
            t_short: 8,
            n_long: 6,
            n_ol: 2,
            n_short: 3,
            ramp: RampShape::Linear,
            cyclic_views: true,
        }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("t_long", self.t_long),
            ("t_short", self.t_short),
            ("n_long", self.n_long),
            ("n_short", self.n_short),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive")));
            }
        }
        if self.t_ol >= self.t_long {
            return Err(Error::Config(format!(
                "temporal overlap {} must be smaller than the window {}",
                self.t_ol, self.t_long
            )));
        }
        if self.n_ol >= self.n_long {
            return Err(Error::Config(format!(
                "view overlap {} must be smaller than the window {}",
                self.n_ol, self.n_long
            )));
        }
        Ok(())
    }
}

/// Linear ramp weights for one window with the given overlaps.
pub fn ramp_weights(
    window_len: usize,
    overlap_left: usize,
    overlap_right: usize,
) -> Result<Vec<f64>> {
    ramp_weights_with(RampShape::Linear, window_len, overlap_left, overlap_right)
}

pub fn ramp_weights_with(
    shape: RampShape,
    window_len: usize,
    overlap_left: usize,
    overlap_right: usize,
) -> Result<Vec<f64>> {
    if window_len == 0 {
        return Err(Error::Config("window length must be positive".into()));
    }
    if overlap_left + overlap_right > window_len {
        return Err(Error::Config(format!(
            "overlaps {overlap_left} + {overlap_right} exceed window length {window_len}"
        )));
    }
    Ok(raw_ramp(shape, window_len, overlap_left, overlap_right))
}

/// Ramp without the overlap-sum precondition: each position takes the
/// smaller of its left and right ramp values.
fn raw_ramp(shape: RampShape, n: usize, left: usize, right: usize) -> Vec<f64> {
    (0..n)
        .map(|p| {
            let l = if p < left {
                (p + 1) as f64 / (left + 1) as f64
            } else {
                1.0
            };
            let r = if p + right >= n {
                (n - p) as f64 / (right + 1) as f64
            } else {
                1.0
            };
            shape.apply(l.min(r))
        })
        .collect()
}

/// A window along one axis of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisWindow {
    /// Grid indices covered, in window order (may wrap on a cyclic axis).
    pub indices: Vec<usize>,
    /// Fusion weight of each covered index.
    pub weights: Vec<f64>,
    /// Cells shared with the previous window (0 for the first window of a
    /// non-cyclic axis).
    pub overlap_prev: usize,
    /// Cells shared with the next window.
    pub overlap_next: usize,
}

impl AxisWindow {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn start(&self) -> usize {
        self.indices[0]
    }
}

/// Tiles an axis of `len` cells with windows of `window` cells that overlap
/// by `overlap`. The last window of a non-cyclic axis is anchored to the end.
pub fn tile_axis(
    len: usize,
    window: usize,
    overlap: usize,
    cyclic: bool,
    shape: RampShape,
) -> Result<Vec<AxisWindow>> {
    if len == 0 {
        return Err(Error::Config("axis has no cells".into()));
    }
    if window == 0 {
        return Err(Error::Config("window length must be positive".into()));
    }
    if overlap >= window {
        return Err(Error::Config(format!(
            "overlap {overlap} must be smaller than window {window}"
        )));
    }
    if window >= len {
        return Ok(vec![AxisWindow {
            indices: (0..len).collect(),
            weights: vec![1.0; len],
            overlap_prev: 0,
            overlap_next: 0,
        }]);
    }
    let stride = window - overlap;
    let starts: Vec<usize> = if cyclic {
        (0..len.div_ceil(stride)).map(|k| k * stride).collect()
    } else {
        let mut starts = Vec::new();
        let mut s = 0;
        loop {
            if s + window >= len {
                starts.push(len - window);
                break;
            }
            starts.push(s);
            s += stride;
        }
        starts
    };
    let n = starts.len();
    // overlap between window i and window i + 1 (wrapping when cyclic)
    let shared: Vec<usize> = (0..n)
        .map(|i| {
            if i + 1 < n {
                window - (starts[i + 1] - starts[i])
            } else if cyclic {
                window - (len - starts[i])
            } else {
                0
            }
        })
        .collect();
    let mut windows: Vec<AxisWindow> = (0..n)
        .map(|i| {
            let prev = if i > 0 {
                shared[i - 1]
            } else if cyclic {
                shared[n - 1]
            } else {
                0
            };
            AxisWindow {
                indices: (0..window).map(|p| (starts[i] + p) % len).collect(),
                weights: raw_ramp(shape, window, prev, shared[i]),
                overlap_prev: prev,
                overlap_next: shared[i],
            }
        })
        .collect();

    let mut total = vec![0.0; len];
    for w in &windows {
        for (&i, &x) in w.indices.iter().zip(&w.weights) {
            total[i] += x;
        }
    }
    for w in &mut windows {
        for (&i, x) in w.indices.iter().zip(w.weights.iter_mut()) {
            *x /= total[i];
        }
    }
    Ok(windows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Temporal,
    View,
}

/// Windows of one branch; segments are their Cartesian product.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchPlan {
    pub frame_windows: Vec<AxisWindow>,
    pub view_windows: Vec<AxisWindow>,
}

/// One segment of a branch: a frame window crossed with a view window.
#[derive(Debug, Clone, Copy)]
pub struct Segment<'a> {
    pub index: usize,
    pub frames: &'a AxisWindow,
    pub views: &'a AxisWindow,
}

impl Segment<'_> {
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.frames.weights[i] * self.views.weights[j]
    }
}

impl BranchPlan {
    pub fn segments(&self) -> impl Iterator<Item = Segment<'_>> + '_ {
        let per_row = self.view_windows.len();
        self.frame_windows
            .iter()
            .enumerate()
            .flat_map(move |(a, fw)| {
                self.view_windows
                    .iter()
                    .enumerate()
                    .map(move |(b, vw)| Segment {
                        index: a * per_row + b,
                        frames: fw,
                        views: vw,
                    })
            })
    }

    pub fn len(&self) -> usize {
        self.frame_windows.len() * self.view_windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowPlan {
    pub frames: usize,
    pub views: usize,
    pub config: WindowConfig,
    pub temporal: BranchPlan,
    pub view: BranchPlan,
}

impl WindowPlan {
    pub fn branch(&self, branch: Branch) -> &BranchPlan {
        match branch {
            Branch::Temporal => &self.temporal,
            Branch::View => &self.view,
        }
    }

    /// Summed fusion weight of every `(frame, view)` cell, row-major.
    pub fn accumulated_weights(&self, branch: Branch) -> Vec<f64> {
        let mut acc = vec![0.0; self.frames * self.views];
        for seg in self.branch(branch).segments() {
            for (i, &f) in seg.frames.indices.iter().enumerate() {
                for (j, &v) in seg.views.indices.iter().enumerate() {
                    acc[f * self.views + v] += seg.weight(i, j);
                }
            }
        }
        acc
    }

    /// Number of segments containing each cell, row-major.
    pub fn coverage_counts(&self, branch: Branch) -> Vec<usize> {
        let mut acc = vec![0; self.frames * self.views];
        for seg in self.branch(branch).segments() {
            for &f in &seg.frames.indices {
                for &v in &seg.views.indices {
                    acc[f * self.views + v] += 1;
                }
            }
        }
        acc
    }
}

pub fn plan_windows(frames: usize, views: usize, cfg: &WindowConfig) -> Result<WindowPlan> {
    cfg.validate()?;
    if frames == 0 || views == 0 {
        return Err(Error::Config(format!("empty grid {frames}x{views}")));
    }
    let cyc = cfg.cyclic_views;
    let temporal = BranchPlan {
        frame_windows: tile_axis(frames, cfg.t_long, cfg.t_ol, false, cfg.ramp)?,
        view_windows: tile_axis(views, cfg.n_short, 0, cyc, cfg.ramp)?,
    };
    let view = BranchPlan {
        frame_windows: tile_axis(frames, cfg.t_short, 0, false, cfg.ramp)?,
        view_windows: tile_axis(views, cfg.n_long, cfg.n_ol, cyc, cfg.ramp)?,
    };
    Ok(WindowPlan {
        frames,
        views,
        config: *cfg,
        temporal,
        view,
    })
}
