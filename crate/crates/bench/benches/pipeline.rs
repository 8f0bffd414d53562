use std::path::PathBuf;

use bonemap4d::camera::load_cameras;
use bonemap4d::ellipsoid::build_skeleton_ellipsoids;
use bonemap4d::renderer::{render_bone_map, RenderOptions};
use bonemap4d::sampler::toy::Coupled;
use bonemap4d::sampler::{denoise_step, plan_windows, Conditioning, LatentGrid, WindowConfig};
use bonemap4d::skeleton::{default_topology, load_pose_sequence};
use criterion::{criterion_group, criterion_main, Criterion};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ellipsoids(c: &mut Criterion) {
    let walk = load_pose_sequence(fixture("walk.json")).unwrap();
    let topo = default_topology();
    c.bench_function("build_skeleton_ellipsoids/24 frames", |b| {
        b.iter(|| {
            for pose in walk.frames() {
                std::hint::black_box(build_skeleton_ellipsoids(pose, &topo).unwrap());
            }
        })
    });
}

fn render(c: &mut Criterion) {
    let tpose = load_pose_sequence(fixture("tpose.json")).unwrap();
    let es = build_skeleton_ellipsoids(&tpose.frames()[0], &default_topology()).unwrap();
    let rig = load_cameras(fixture("cameras_8view.json"))
        .unwrap()
        .remove(0);
    c.bench_function("render_bone_map/tpose 576x576", |b| {
        b.iter(|| render_bone_map(&es, &rig, RenderOptions::default()).unwrap())
    });
}

fn sampler(c: &mut Criterion) {
    let plan = plan_windows(24, 8, &WindowConfig::default()).unwrap();
    let grid = LatentGrid::gaussian(24, 8, (4, 32, 32), 1, 7);
    let cond = Conditioning::default();
    c.bench_function("denoise_step/24x8 coupled 4x32x32", |b| {
        b.iter(|| denoise_step(&grid, &plan, &Coupled::default(), &cond, 0.5).unwrap())
    });
}

criterion_group!(benches, ellipsoids, render, sampler);
criterion_main!(benches);
