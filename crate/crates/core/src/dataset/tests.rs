use super::*;
use crate::geometry::{combine_regions, RegionId};
use crate::imaging::save_png;

fn corpus(dir: &Path, n: u64, size: u32) -> (PathBuf, PathBuf) {
    let (img, lm) = (dir.join("faces"), dir.join("landmarks"));
    for i in 0..n {
        let (face, l) = synthetic::face(size, size, i);
        save_png(&face, img.join(format!("s{i:02}.png"))).unwrap();
        l.save(lm.join(format!("s{i:02}.json"))).unwrap();
    }
    (img, lm)
}

fn config(dir: &Path, out: &str, faces: u64, count: u32) -> DatasetConfig {
    let (img, lm) = corpus(dir, faces, 128);
    let mut cfg = DatasetConfig::new(img, lm, dir.join(out));
    cfg.tattooed_per_bona_fide = count;
    cfg.seed = Some(11);
    cfg
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["", "bonafide", "tattooed"] {
        let d = dir.join(sub);
        let mut names: Vec<_> = std::fs::read_dir(&d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.is_file())
            // both record the output directory
            .filter(|p| !p.ends_with("config.json") && !p.ends_with("run.json"))
            .collect();
        names.sort();
        for p in names {
            out.push((format!("{sub}/{}", p.file_name().unwrap().to_string_lossy()), std::fs::read(&p).unwrap()));
        }
    }
    out
}

#[test]
fn counts_and_field_names() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "out", 3, 2);
    let run = generate_dataset(&cfg, Mode::Parallel).unwrap();
    let m = &run.manifest;
    assert!(m.skips.is_empty(), "{:?}", m.skips);
    assert_eq!((m.tattooed_count(), m.bona_fide_count()), (6, 3));
    for r in &m.records {
        assert!(cfg.output_dir.join(&r.bona_fide).is_file());
        assert!(cfg.output_dir.join(&r.tattooed).is_file());
        assert_eq!(r.seed, record_seed(11, &r.subject, r.variant));
        assert_eq!(
            Path::new(&r.bona_fide).extension(),
            Path::new(&r.tattooed).extension()
        );
        assert!(Augmentation::from_parts(&r.augmentation, r.aug_param).is_ok());
    }
    let first = std::fs::read_to_string(cfg.output_dir.join(MANIFEST_FILE)).unwrap();
    let line: serde_json::Value = serde_json::from_str(first.lines().next().unwrap()).unwrap();
    for key in [
        "subject",
        "bona_fide",
        "tattooed",
        "strategy",
        "seed",
        "coverage",
        "augmentation",
        "aug_param",
        "tool_version",
        "jpeg_encoder",
    ] {
        assert!(line.get(key).is_some(), "missing {key}");
    }
    for f in ["config.json", "triangulation.json", "run.json", SKIPS_FILE] {
        assert!(cfg.output_dir.join(f).is_file());
    }
    assert_eq!(DatasetManifest::load(cfg.output_dir.join(MANIFEST_FILE)).unwrap(), *m);
}

#[test]
fn reruns_and_modes_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), "a", 3, 2);
    generate_dataset(&cfg, Mode::Parallel).unwrap();
    let a = tree(&cfg.output_dir);
    cfg.output_dir = tmp.path().join("b");
    generate_dataset(&cfg, Mode::Sequential).unwrap();
    assert_eq!(a, tree(&cfg.output_dir));
    cfg.seed = Some(12);
    cfg.output_dir = tmp.path().join("c");
    generate_dataset(&cfg, Mode::Sequential).unwrap();
    assert_ne!(a, tree(&cfg.output_dir));
}

#[test]
fn every_record_regenerates() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "out", 2, 3);
    let run = generate_dataset(&cfg, Mode::Parallel).unwrap();
    for r in &run.manifest.records {
        let check = regenerate_record(r, &cfg.output_dir).unwrap();
        assert!(check.ok(), "{check:?}");
    }
    let mut tampered = run.manifest.records[0].clone();
    tampered.seed ^= 1;
    assert!(!regenerate_record(&tampered, &cfg.output_dir).unwrap().ok());
}

#[test]
fn skips_do_not_abort() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = config(tmp.path(), "out", 3, 2);
    let lm_path = cfg.landmark_dir.join("s01.json");
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&lm_path).unwrap()).unwrap();
    v["points"].as_array_mut().unwrap().pop();
    std::fs::write(&lm_path, v.to_string()).unwrap();
    std::fs::remove_file(cfg.landmark_dir.join("s02.json")).unwrap();
    let run = generate_dataset(&cfg, Mode::Parallel).unwrap();
    assert_eq!(run.manifest.tattooed_count(), 2);
    assert_eq!(run.manifest.skips.len(), 4);
    assert!(run.manifest.skips[0].reason.contains("landmarks"));
}

#[test]
fn missing_dirs_are_config_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), "out", 1, 1);
    cfg.landmark_dir = tmp.path().join("nope");
    assert!(matches!(generate_dataset(&cfg, Mode::Parallel), Err(Error::Config(_))));
    let mut cfg = config(tmp.path(), "out", 1, 1);
    cfg.tattooed_per_bona_fide = 0;
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    cfg.tattooed_per_bona_fide = 1;
    cfg.strategies[0].weight = 0.0;
    assert!(matches!(cfg.validate(), Err(Error::Config(_))));
}

#[test]
fn config_json_roundtrip_and_defaults() {
    let text = r#"{"input_dir":"a","landmark_dir":"b","output_dir":"c"}"#;
    let cfg: DatasetConfig = serde_json::from_str(text).unwrap();
    assert_eq!(cfg.tattooed_per_bona_fide, 1);
    assert_eq!(cfg.augmentation, AugmentConfig::default());
    assert_eq!(cfg.strategies[0].strategy.to_string(), "coverage:0.05-0.25");
    let back: DatasetConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
    assert!(serde_json::from_str::<DatasetConfig>(r#"{"input_dir":"a","landmark_dir":"b","output_dir":"c","x":1}"#).is_err());
    assert_eq!(config_hash(&cfg).unwrap().len(), 64);
}

#[test]
fn depth_files_are_used_when_present() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = config(tmp.path(), "out", 2, 1);
    let depth_dir = tmp.path().join("depth");
    DepthMap::uniform(128, 128, 127.5).unwrap().save(depth_dir.join("s00.png")).unwrap();
    cfg.depth_dir = Some(depth_dir.clone());
    let run = generate_dataset(&cfg, Mode::Parallel).unwrap();
    let recs = &run.manifest.records;
    assert_eq!(recs[0].depth.as_deref(), Some(depth_dir.join("s00.png").to_str().unwrap()));
    assert_eq!(recs[1].depth, None);
    assert!(regenerate_record(&recs[0], &cfg.output_dir).unwrap().ok());
}

#[test]
fn fixed_region_changes_stay_near_the_region() {
    let (face, lm) = synthetic::frontal_face(256, 256);
    let catalog = synthetic::template_pack();
    let blend = BlendConfig::default();
    for region in [RegionId::Forehead, RegionId::LeftUpperCheek, RegionId::Chin] {
        let strategy = GenerationStrategy::Region(vec![region]);
        let a = generate_pair(&face, &lm, None, &strategy, 5, &catalog, &blend).unwrap();
        let b = generate_pair(&face, &lm, None, &strategy, 5, &catalog, &blend).unwrap();
        assert_eq!(a.tattooed, b.tattooed);
        assert_eq!(a.bona_fide, face);
        let ctx = FaceContext::new(face.clone(), lm.clone(), None, &blend).unwrap();
        let reach = (blend.c.ceil() + (3.0 * blend.blur_sigma).ceil()) as u32 + 1;
        let allowed = combine_regions(&ctx.regions, &[region]).unwrap().dilate(reach);
        let mut changed = 0;
        for y in 0..256 {
            for x in 0..256 {
                if a.tattooed.pixel(x, y) != face.pixel(x, y) {
                    changed += 1;
                    assert!(allowed.get(x, y), "{region}: change at ({x}, {y})");
                }
            }
        }
        assert!(changed > 0);
    }
}

#[test]
fn strategy_mix_follows_weights() {
    let mix = vec![
        WeightedStrategy { strategy: GenerationStrategy::FullFace, weight: 3.0 },
        WeightedStrategy { strategy: GenerationStrategy::Portrait, weight: 1.0 },
    ];
    let full = (0..4000u64)
        .filter(|&s| draw_strategy(s, &mix) == GenerationStrategy::FullFace)
        .count();
    assert!((2850..3150).contains(&full), "{full}");
}
