mod common;

use std::fs;

use common::{code, fixture, run, stderr};
use heterorep::stacking::write_drm;
use ndarray::Array2;

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_pipeline_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), "");
    let out = dir.path().join("out");
    for cmd in ["featurize", "train", "ablate", "rank", "words", "stats"] {
        let o = run(&["--config", s(&cfg), cmd]);
        assert_eq!(code(&o), 0, "{cmd}: {}", stderr(&o));
    }
    let manifest = fs::read_to_string(out.join("blocks/manifest.json")).unwrap();
    for name in ["stylometric", "LSA", "TransE", "TransE-entity"] {
        assert!(manifest.contains(&format!("\"{name}\"")), "{manifest}");
        assert!(out.join(format!("blocks/{name}.train.drm")).exists());
    }
    let ablation = fs::read_to_string(out.join("ablation.tsv")).unwrap();
    assert!(ablation.starts_with("bitmask\tblocks\tdimension\taccuracy\tf1\tprecision\trecall\n"));
    assert_eq!(ablation.lines().count(), 1 + 15);
    assert!(fs::read_to_string(out.join("ablation_scatter.csv"))
        .unwrap()
        .starts_with("dimension,f1\n"));
    let radial = fs::read_to_string(out.join("ranking_radial.csv")).unwrap();
    assert!(radial.starts_with("block,count\n"));
    let total: usize = radial
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse::<usize>().unwrap())
        .sum();
    assert_eq!(total, 20);
    let words = fs::read_to_string(out.join("variance_words.tsv")).unwrap();
    assert!(words.starts_with("class\tword\tvariance\n"));
    assert_eq!(words.lines().count(), 1 + 2 * 3);
    let train_dir = out.join("train/LM_KG_KG-ENTITY");
    for f in ["model.mdl", "trials.tsv", "report.json", "report.tsv"] {
        assert!(train_dir.join(f).exists(), "missing {f}");
    }
    assert!(out.join("stats.json").exists());
}

#[test]
fn seeded_train_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), "");
    assert_eq!(code(&run(&["--config", s(&cfg), "featurize"])), 0);
    let report = |out: &str| {
        let o = run(&[
            "--config",
            s(&cfg),
            "--out",
            out,
            "--scenario",
            "LM",
            "train",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let d = dir.path().join(out).join("train/LM");
        (
            fs::read(d.join("report.json")).unwrap(),
            fs::read(d.join("model.mdl")).unwrap(),
        )
    };
    // A second output directory needs the blocks too.
    fs::create_dir_all(dir.path().join("again")).unwrap();
    copy_dir(
        &dir.path().join("out/blocks"),
        &dir.path().join("again/blocks"),
    );
    let a = report(s(&dir.path().join("out")));
    let b = report(s(&dir.path().join("again")));
    assert_eq!(a, b);
}

fn copy_dir(from: &std::path::Path, to: &std::path::Path) {
    fs::create_dir_all(to).unwrap();
    for e in fs::read_dir(from).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), to.join(e.file_name())).unwrap();
    }
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), "");
    assert_eq!(code(&run(&["train"])), 2, "missing config");
    assert_eq!(
        code(&run(&["--config", s(&cfg), "bogus"])),
        2,
        "unknown subcommand"
    );
    assert_eq!(
        code(&run(&["--config", s(&cfg), "--scenario", "nope", "train"])),
        2
    );
    assert_eq!(
        code(&run(&["--config", s(&cfg), "--block", "bad", "ablate"])),
        2
    );
    assert_eq!(code(&run(&["inspect"])), 2);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "unknown = 1\n").unwrap();
    assert_eq!(code(&run(&["--config", s(&bad), "stats"])), 2);
    let o = common::bin()
        .env("HETEROREP_THREADS", "zero")
        .args(["--config", s(&cfg), "stats"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn data_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), "");
    // Blocks were never featurized.
    let o = run(&["--config", s(&cfg), "train"]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    // Misaligned external block.
    let m = Array2::<f32>::zeros((3, 2));
    for split in ["train", "validation", "test"] {
        write_drm(&dir.path().join(format!("ext.{split}.drm")), &m, None).unwrap();
    }
    let flag = format!("ext={}:text", s(&dir.path().join("ext.drm")));
    let o = run(&[
        "--config",
        s(&cfg),
        "--block",
        &flag,
        "--scenario",
        "custom:ext",
        "train",
    ]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn ablation_over_eleven_external_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), "");
    let mut args = vec!["--config".to_owned(), s(&cfg).to_owned()];
    for b in 0..11 {
        for (split, rows) in [("train", 80), ("validation", 30)] {
            let m =
                Array2::from_shape_fn((rows, 2), |(r, c)| ((r * 31 + c * 17 + b * 7) % 13) as f32);
            write_drm(&dir.path().join(format!("b{b}.{split}.drm")), &m, None).unwrap();
        }
        args.push("--block".into());
        args.push(format!(
            "b{b}={}:text",
            s(&dir.path().join(format!("b{b}.drm")))
        ));
    }
    args.push("ablate".into());
    let o = common::bin().args(&args).output().unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let t = fs::read_to_string(dir.path().join("out/ablation.tsv")).unwrap();
    let masks: std::collections::BTreeSet<u64> = t
        .lines()
        .skip(1)
        .map(|l| l.split('\t').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(masks.len(), 2047);
    assert_eq!(*masks.iter().next().unwrap(), 1);
    assert_eq!(*masks.iter().last().unwrap(), 2047);
}

#[test]
fn inspect_reports_shape() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("m.drm");
    write_drm(
        &p,
        &Array2::<f32>::ones((4, 3)),
        Some(&["a", "b", "c", "d"].map(String::from)),
    )
    .unwrap();
    let o = run(&["inspect", s(&p)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("\t4\t3\t4"), "{stdout}");
    let o = run(&["inspect", s(&dir.path().join("missing.drm"))]);
    assert_eq!(code(&o), 1);
}
