use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use hocc_core::mesh::{chamfer, fscore, marching_cubes, sample_surface, OccupancyGrid};
use hocc_core::occnet::{attach_silhouette_features, NetworkConfig, OccupancyMlp};
use hocc_core::scene::{generate_sequence, AnalyticShape, CameraRig, HandTemplate};
use hocc_core::seed;
use hocc_core::supervision::{hull_label, sample_training_points, SamplingConfig};

fn views(n: usize) -> Vec<hocc_core::ViewObservation> {
    let mut rng = seed::rng(1, 0);
    let traj = CameraRig::default().orbit(n, &mut rng).unwrap();
    let mut v = generate_sequence(&AnalyticShape::sphere(0.4), &traj, &HandTemplate::default(), 0.0, 0).unwrap();
    for x in &mut v {
        attach_silhouette_features(x, 4, 16).unwrap();
    }
    v
}

fn bench_supervision(c: &mut Criterion) {
    let v = views(8);
    let pts: Vec<_> =
        (0..1000).map(|i| hocc_core::Vec3::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), 0.1)).collect();
    c.bench_function("hull_label 1k points x 8 views", |b| {
        b.iter(|| pts.iter().map(|p| hull_label(*p, black_box(&v)) as usize).sum::<usize>())
    });
    let cfg = SamplingConfig { hull_positive_target: 1024, ..SamplingConfig::default() };
    c.bench_function("sample_training_points 8192", |b| {
        b.iter(|| sample_training_points(black_box(&v), &v[0].hand, &cfg, 3).unwrap())
    });
}

fn bench_network(c: &mut Criterion) {
    let v = views(1);
    let mut rng = seed::rng(2, 0);
    let net = OccupancyMlp::new(NetworkConfig { width: 64, ..NetworkConfig::default() }, &mut rng).unwrap();
    let pts = OccupancyGrid::lattice(16);
    c.bench_function("predict 16^3 width 64", |b| b.iter(|| net.predict(black_box(&pts), &v[0]).unwrap()));
}

fn bench_mesh(c: &mut Criterion) {
    let grid = OccupancyGrid::from_sdf(&AnalyticShape::sphere(0.5), 64);
    c.bench_function("marching_cubes sphere 64^3", |b| b.iter(|| marching_cubes(black_box(&grid), 0.5).unwrap()));
    let mesh = marching_cubes(&grid, 0.5).unwrap();
    let a = sample_surface(&mesh, 10_000, 0).unwrap();
    let b_pts = AnalyticShape::sphere(0.5).sample_surface(10_000, &mut seed::rng(3, 0));
    c.bench_function("chamfer 10k x 10k", |b| b.iter(|| chamfer(black_box(&a), black_box(&b_pts)).unwrap()));
    c.bench_function("fscore 10k x 10k", |b| b.iter(|| fscore(black_box(&a), black_box(&b_pts), 5.0).unwrap()));
}

criterion_group!(benches, bench_supervision, bench_network, bench_mesh);
criterion_main!(benches);
