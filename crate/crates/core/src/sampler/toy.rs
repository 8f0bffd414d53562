//! Toy denoisers for exercising the scheduler without a network.

use ndarray::Array5;

use crate::error::{Error, Result};

use super::denoiser::{Conditioning, Denoiser, SegmentContext};
use super::plan::Branch;

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Denoiser for Identity {
    fn denoise(
        &self,
        z: Array5<f64>,
        _: &SegmentContext<'_>,
        _: &Conditioning,
    ) -> Result<Array5<f64>> {
        Ok(z)
    }
}

/// Cell-wise `scale · z + offset`.
#[derive(Debug, Clone, Copy)]
pub struct Affine {
    pub scale: f64,
    pub offset: f64,
}

impl Affine {
    pub fn contract(scale: f64) -> Self {
        Self { scale, offset: 0.0 }
    }
}

impl Denoiser for Affine {
    fn denoise(
        &self,
        z: Array5<f64>,
        _: &SegmentContext<'_>,
        _: &Conditioning,
    ) -> Result<Array5<f64>> {
        Ok(z.mapv(|v| self.scale * v + self.offset))
    }
}

/// Pulls every value toward the mean of its segment by `pull`. Adjacent
/// segments see different means, so seams appear where they stop
/// overlapping.
#[derive(Debug, Clone, Copy)]
pub struct Coupled {
    pub pull: f64,
}

impl Default for Coupled {
    fn default() -> Self {
        Self { pull: 0.5 }
    }
}

impl Denoiser for Coupled {
    fn denoise(
        &self,
        z: Array5<f64>,
        _: &SegmentContext<'_>,
        _: &Conditioning,
    ) -> Result<Array5<f64>> {
        let mean = z.mean().unwrap_or(0.0);
        Ok(z.mapv(|v| v + self.pull * (mean - v)))
    }
}

/// Adds `step · (index + 1)` to every value of a temporal segment and
/// leaves view segments untouched.
#[derive(Debug, Clone, Copy)]
pub struct SegmentBias {
    pub step: f64,
}

impl Denoiser for SegmentBias {
    fn denoise(
        &self,
        z: Array5<f64>,
        ctx: &SegmentContext<'_>,
        _: &Conditioning,
    ) -> Result<Array5<f64>> {
        match ctx.branch {
            Branch::Temporal => Ok(z + self.step * (ctx.index + 1) as f64),
            Branch::View => Ok(z),
        }
    }
}

/// Named toy denoisers selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToyKind {
    Identity,
    Contract,
    Coupled,
}

impl std::str::FromStr for ToyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(ToyKind::Identity),
            "contract" => Ok(ToyKind::Contract),
            "coupled" => Ok(ToyKind::Coupled),
            other => Err(Error::Config(format!("unknown denoiser {other:?}"))),
        }
    }
}

impl ToyKind {
    pub fn build(self) -> Box<dyn Denoiser> {
        match self {
            ToyKind::Identity => Box::new(Identity),
            ToyKind::Contract => Box::new(Affine::contract(0.9)),
            ToyKind::Coupled => Box::new(Coupled::default()),
        }
    }
}
