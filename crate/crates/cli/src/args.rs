use std::path::PathBuf;

use bonemap4d::camera::DepthMode;
use bonemap4d::sampler::toy::ToyKind;
use bonemap4d::sampler::RampShape;
use clap::{Args, Parser, Subcommand};

use crate::config::{AlignConfig, InspectConfig, RenderConfig, SampleConfig};

#[derive(Debug, Parser)]
#[command(
    name = "bonemap4d",
    version,
    about = "Bone-map rendering, view alignment and windowed sampling demos"
)]
pub struct Cli {
    /// JSON file with per-subcommand defaults; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Print the effective configuration as JSON and exit.
    #[arg(long, global = true)]
    pub print_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render depth and normal bone maps for every frame and view.
    Render(RenderArgs),
    /// Compute per-view pelvis alignment shifts.
    Align(AlignArgs),
    /// Dump intermediate quantities as JSON.
    #[command(subcommand)]
    Inspect(InspectCommand),
    /// Run windowed sampling with a toy denoiser.
    SampleDemo(SampleArgs),
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected U,V, got {s:?}"))?;
    let a: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let b: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(format!("non-finite coordinate in {s:?}"));
    }
    Ok((a, b))
}

fn parse_depth_mode(s: &str) -> Result<DepthMode, String> {
    s.parse().map_err(|e: bonemap4d::Error| e.to_string())
}

fn parse_toy(s: &str) -> Result<ToyKind, String> {
    s.parse().map_err(|e: bonemap4d::Error| e.to_string())
}

fn parse_ramp(s: &str) -> Result<RampShape, String> {
    s.parse().map_err(|e: bonemap4d::Error| e.to_string())
}

fn parse_mix(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|_| format!("bad number {s:?}"))?;
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(format!("{x} is outside [0, 1]"))
    }
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub poses: Option<PathBuf>,
    /// Bone topology JSON; defaults to the built-in tree.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Square output size in pixels; intrinsics are rescaled.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=16384))]
    pub size: Option<u32>,
    /// euclidean | z
    #[arg(long, value_parser = parse_depth_mode)]
    pub depth_mode: Option<DepthMode>,
    /// Skip the PNG previews.
    #[arg(long)]
    pub no_png: bool,
    /// Shift each map so the pelvis sits at the image center.
    #[arg(long)]
    pub align: bool,
}

impl RenderArgs {
    pub fn apply(&self, c: &mut RenderConfig) {
        override_opt(&mut c.poses, &self.poses);
        override_opt(&mut c.topology, &self.topology);
        override_opt(&mut c.cameras, &self.cameras);
        override_opt(&mut c.out, &self.out);
        if let Some(s) = self.size {
            c.size = Some(s as usize);
        }
        if let Some(m) = self.depth_mode {
            c.depth_mode = m;
        }
        if self.no_png {
            c.previews = false;
        }
        if self.align {
            c.align = true;
        }
    }
}

#[derive(Debug, Args)]
pub struct AlignArgs {
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    /// Output JSON file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Target pixel `U,V`; defaults to the image center.
    #[arg(long, value_parser = parse_pair)]
    pub target: Option<(f64, f64)>,
    /// Pelvis pixel `U,V` in the reference image.
    #[arg(long, value_parser = parse_pair)]
    pub reference_pelvis: Option<(f64, f64)>,
    /// View the reference image was taken from.
    #[arg(long)]
    pub reference_view: Option<usize>,
}

impl AlignArgs {
    pub fn apply(&self, c: &mut AlignConfig) {
        override_opt(&mut c.poses, &self.poses);
        override_opt(&mut c.cameras, &self.cameras);
        override_opt(&mut c.out, &self.out);
        override_opt(&mut c.target, &self.target);
        override_opt(&mut c.reference_pelvis, &self.reference_pelvis);
        if let Some(v) = self.reference_view {
            c.reference_view = v;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum InspectCommand {
    /// Ellipsoid parameters of one pose frame.
    Ellipsoids(InspectArgs),
    /// Camera and frame embeddings.
    Embeddings(InspectArgs),
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub poses: Option<PathBuf>,
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub cameras: Option<PathBuf>,
    /// Pose frame to inspect.
    #[arg(long)]
    pub frame: Option<usize>,
    /// Number of frame embeddings to emit.
    #[arg(long)]
    pub frames: Option<usize>,
    /// Embedding width per scalar (even).
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub max_period: Option<f64>,
    /// Output JSON file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl InspectArgs {
    pub fn apply(&self, c: &mut InspectConfig) {
        override_opt(&mut c.poses, &self.poses);
        override_opt(&mut c.topology, &self.topology);
        override_opt(&mut c.cameras, &self.cameras);
        override_opt(&mut c.out, &self.out);
        set(&mut c.frame, self.frame);
        set(&mut c.frames, self.frames);
        set(&mut c.dim, self.dim);
        set(&mut c.max_period, self.max_period);
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub frames: Option<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub views: Option<u32>,
    #[arg(long)]
    pub t_long: Option<usize>,
    #[arg(long)]
    pub t_ol: Option<usize>,
    #[arg(long)]
    pub t_short: Option<usize>,
    #[arg(long)]
    pub n_long: Option<usize>,
    #[arg(long)]
    pub n_ol: Option<usize>,
    #[arg(long)]
    pub n_short: Option<usize>,
    /// linear | cosine
    #[arg(long, value_parser = parse_ramp)]
    pub ramp: Option<RampShape>,
    /// Treat views as an open arc instead of a closed circle.
    #[arg(long)]
    pub open_views: bool,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub steps: Option<u32>,
    /// identity | contract | coupled
    #[arg(long, value_parser = parse_toy)]
    pub denoiser: Option<ToyKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Weight of the temporal branch in [0, 1].
    #[arg(long, value_parser = parse_mix)]
    pub branch_mix: Option<f64>,
    /// Final latent container file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-step seam metrics CSV; stdout when absent.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

impl SampleArgs {
    pub fn apply(&self, c: &mut SampleConfig) {
        set(&mut c.frames, self.frames.map(|x| x as usize));
        set(&mut c.views, self.views.map(|x| x as usize));
        let w = &mut c.windows;
        set(&mut w.t_long, self.t_long);
        set(&mut w.t_ol, self.t_ol);
        set(&mut w.t_short, self.t_short);
        set(&mut w.n_long, self.n_long);
        set(&mut w.n_ol, self.n_ol);
        set(&mut w.n_short, self.n_short);
        set(&mut w.ramp, self.ramp);
        if self.open_views {
            w.cyclic_views = false;
        }
        set(&mut c.steps, self.steps.map(|x| x as usize));
        set(&mut c.denoiser, self.denoiser);
        set(&mut c.seed, self.seed);
        set(&mut c.branch_mix, self.branch_mix);
        override_opt(&mut c.out, &self.out);
        override_opt(&mut c.metrics, &self.metrics);
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn override_opt<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        slot.clone_from(flag);
    }
}
