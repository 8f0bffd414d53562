use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use bonemap4d::alignment::{
    apply_alignment, compute_temporal_alignment, compute_view_alignment, image_center,
};
use bonemap4d::camera::{load_cameras, CameraRig};
use bonemap4d::ellipsoid::{build_skeleton_ellipsoids, EllipsoidRecord};
use bonemap4d::embeddings::{embed_cameras, embed_frame_index, EmbeddingConfig};
use bonemap4d::export::{write_atomic, write_bone_map};
use bonemap4d::renderer::{render_sequence_each, RenderOptions};
use bonemap4d::sampler::{
    max_seam_discontinuity, plan_windows, sample_observed, write_latent, Conditioning, LatentGrid,
};
use bonemap4d::skeleton::{default_topology, load_pose_sequence, load_topology, BoneTopology};
use bonemap4d::Error;
use serde::Serialize;

use crate::config::{required, AlignConfig, InspectConfig, RenderConfig, SampleConfig};
use crate::CliError;

fn topology(path: &Option<std::path::PathBuf>) -> Result<BoneTopology, CliError> {
    Ok(match path {
        Some(p) => load_topology(p)?,
        None => default_topology(),
    })
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.into(),
        source: e,
    })?;
    Ok(())
}

fn create_parent(file: &Path) -> Result<(), CliError> {
    match file.parent() {
        Some(d) if !d.as_os_str().is_empty() => create_dir(d),
        _ => Ok(()),
    }
}

/// Writes JSON to `out`, or to stdout when no path is given.
fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable output");
    text.push('\n');
    emit_text(&text, out)
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            create_parent(path)?;
            write_atomic(path, text.as_bytes())?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn render(c: &RenderConfig) -> Result<(), CliError> {
    let poses = load_pose_sequence(required(&c.poses, "poses")?)?;
    let topo = topology(&c.topology)?;
    let mut rigs = load_cameras(required(&c.cameras, "cameras")?)?;
    let out = required(&c.out, "out")?;
    if let Some(s) = c.size {
        rigs = rigs
            .iter()
            .map(|r| r.resized(s, s))
            .collect::<bonemap4d::Result<_>>()?;
    }
    create_dir(out)?;
    let options = RenderOptions {
        depth_mode: c.depth_mode,
    };
    render_sequence_each(&poses, &topo, &rigs, options, |t, v, map| {
        let rig = &rigs[v];
        let map = if c.align {
            let target = image_center(rig.width(), rig.height());
            let xf = compute_view_alignment(&poses.frames()[t], rig, target)?;
            apply_alignment(&map, &xf)
        } else {
            map
        };
        write_bone_map(out, &format!("f{t:03}_v{v:02}"), &map, c.previews)
    })?;
    Ok(())
}

#[derive(Serialize)]
struct ViewShift {
    view: usize,
    target: (f64, f64),
    dx: i64,
    dy: i64,
}

#[derive(Serialize)]
struct FrameShifts {
    frame: usize,
    views: Vec<ViewShift>,
}

#[derive(Serialize)]
struct TemporalShift {
    view: usize,
    reference_pelvis: (f64, f64),
    dx: i64,
    dy: i64,
}

#[derive(Serialize)]
struct Transforms {
    frames: Vec<FrameShifts>,
    temporal: Option<TemporalShift>,
}

pub fn align(c: &AlignConfig) -> Result<(), CliError> {
    let poses = load_pose_sequence(required(&c.poses, "poses")?)?;
    let rigs = load_cameras(required(&c.cameras, "cameras")?)?;
    let out = required(&c.out, "out")?;
    let target_for = |rig: &CameraRig| {
        c.target
            .unwrap_or_else(|| image_center(rig.width(), rig.height()))
    };
    let mut frames = Vec::with_capacity(poses.len());
    for (t, pose) in poses.frames().iter().enumerate() {
        let views = rigs
            .iter()
            .enumerate()
            .map(|(v, rig)| {
                let target = target_for(rig);
                compute_view_alignment(pose, rig, target).map(|xf| ViewShift {
                    view: v,
                    target,
                    dx: xf.dx,
                    dy: xf.dy,
                })
            })
            .collect::<bonemap4d::Result<_>>()?;
        frames.push(FrameShifts { frame: t, views });
    }
    let temporal = match c.reference_pelvis {
        Some(uv) => {
            let rig = rigs.get(c.reference_view).ok_or_else(|| {
                Error::Value(format!(
                    "reference view {} of {} cameras",
                    c.reference_view,
                    rigs.len()
                ))
            })?;
            let xf = compute_temporal_alignment(uv, &poses.frames()[0], rig)?;
            Some(TemporalShift {
                view: c.reference_view,
                reference_pelvis: uv,
                dx: xf.dx,
                dy: xf.dy,
            })
        }
        None => None,
    };
    emit_json(&Transforms { frames, temporal }, Some(out))
}

pub fn inspect_ellipsoids(c: &InspectConfig) -> Result<(), CliError> {
    let poses = load_pose_sequence(required(&c.poses, "poses")?)?;
    let topo = topology(&c.topology)?;
    let pose = poses
        .frames()
        .get(c.frame)
        .ok_or_else(|| Error::Value(format!("frame {} of {}", c.frame, poses.len())))?;
    let records: Vec<EllipsoidRecord> = build_skeleton_ellipsoids(pose, &topo)?
        .iter()
        .map(|e| EllipsoidRecord::new(e, &topo))
        .collect();
    emit_json(&records, c.out.as_deref())
}

#[derive(Serialize)]
struct Embeddings {
    config: EmbeddingConfig,
    cameras: Vec<Vec<f64>>,
    frames: Vec<Vec<f64>>,
}

pub fn inspect_embeddings(c: &InspectConfig) -> Result<(), CliError> {
    let cfg = EmbeddingConfig::new(c.dim, c.max_period)?;
    let rigs = load_cameras(required(&c.cameras, "cameras")?)?;
    let frame_count = match &c.poses {
        Some(p) if c.frames == 0 => load_pose_sequence(p)?.len(),
        _ => c.frames,
    };
    let cameras = embed_cameras(&rigs, &cfg)?
        .into_iter()
        .map(|e| e.0)
        .collect();
    let frames = (0..frame_count as u64)
        .map(|t| embed_frame_index(t, &cfg))
        .collect();
    emit_json(
        &Embeddings {
            config: cfg,
            cameras,
            frames,
        },
        c.out.as_deref(),
    )
}

pub fn sample_demo(c: &SampleConfig) -> Result<(), CliError> {
    if c.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&c.branch_mix) {
        return Err(CliError::Usage(format!(
            "--branch-mix {} is outside [0, 1]",
            c.branch_mix
        )));
    }
    let plan = plan_windows(c.frames, c.views, &c.windows)?;
    let noise = LatentGrid::gaussian(c.frames, c.views, c.latent_shape, c.steps, c.seed);
    let den = c.denoiser.build();
    let cyclic = c.windows.cyclic_views;
    let mut csv = String::from("step,timestep,max_seam\n");
    writeln!(
        csv,
        "0,{},{}",
        noise.timestep(),
        max_seam_discontinuity(&noise, cyclic)
    )
    .unwrap();
    let mut step = 0;
    let z0 = sample_observed(
        &noise,
        c.steps,
        &plan,
        den.as_ref(),
        &Conditioning::default(),
        c.branch_mix,
        |g| {
            step += 1;
            writeln!(
                csv,
                "{step},{},{}",
                g.timestep(),
                max_seam_discontinuity(g, cyclic)
            )
            .unwrap();
        },
    )?;
    if let Some(out) = &c.out {
        create_parent(out)?;
        write_latent(out, &z0)?;
    }
    emit_text(&csv, c.metrics.as_deref())
}
