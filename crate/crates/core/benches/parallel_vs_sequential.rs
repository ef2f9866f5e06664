use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use inkblend::blending::{compose_with, landmark_depth_fallback, BlendConfig};
use inkblend::dataset::{generate_dataset, DatasetConfig};
use inkblend::exec::Mode;
use inkblend::geometry::{build_regions, extend_forehead};
use inkblend::imaging::save_png;
use inkblend::placement::{plan_placements, GenerationStrategy};
use inkblend::quality::{evaluate_removal, SsimConfig};
use inkblend::synthetic;

const MODES: [(&str, Mode); 2] = [("sequential", Mode::Sequential), ("parallel", Mode::Parallel)];

fn compose(c: &mut Criterion) {
    let (face, lm) = synthetic::frontal_face(512, 512);
    let ext = extend_forehead(&lm).unwrap();
    let rs = build_regions(&ext, 512, 512).unwrap();
    let depth = landmark_depth_fallback(&ext, 512, 512);
    let catalog = synthetic::template_pack();
    let cfg = BlendConfig::default();
    let plan = plan_placements(&GenerationStrategy::coverage(0.2, 0.2).unwrap(), &rs, &catalog, 1).unwrap();

    let mut g = c.benchmark_group("compose_512");
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| compose_with(&face, &plan, &catalog, &rs, &depth, &cfg, 1, mode).unwrap())
        });
    }
    g.finish();
}

fn corpus(dir: &std::path::Path, n: u64) {
    for i in 0..n {
        let (face, lm) = synthetic::face(192, 192, i);
        save_png(&face, dir.join(format!("faces/f{i}.png"))).unwrap();
        lm.save(dir.join(format!("landmarks/f{i}.json"))).unwrap();
    }
}

fn batches(c: &mut Criterion) {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    corpus(root, 8);

    let mut g = c.benchmark_group("generate_8_faces");
    g.sample_size(10);
    for (name, mode) in MODES {
        let cfg = DatasetConfig::new(root.join("faces"), root.join("landmarks"), root.join(name));
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| generate_dataset(&cfg, mode).unwrap())
        });
    }
    g.finish();

    let truth = root.join("faces");
    let candidate = root.join("sequential/tattooed");
    let renamed = root.join("candidates");
    std::fs::create_dir_all(&renamed).unwrap();
    for e in std::fs::read_dir(&candidate).unwrap() {
        let p = e.unwrap().path();
        let stem = p.file_stem().unwrap().to_string_lossy();
        let subject = stem.rsplit_once('_').map_or(stem.as_ref(), |(s, _)| s);
        let img = inkblend::imaging::load_image(&p).unwrap();
        save_png(&img, renamed.join(format!("{subject}.png"))).unwrap();
    }
    let mut g = c.benchmark_group("quality_8_pairs");
    g.sample_size(10);
    for (name, mode) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| evaluate_removal(&truth, &renamed, root.join("landmarks"), &SsimConfig::default(), mode).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, compose, batches);
criterion_main!(benches);
