use heterorep::corpus::Document;
use heterorep::learners::{
    evaluate, grid_search, logreg_grid, mlp_grid, Averaging, MlpSpec, TrainedModel,
};
use heterorep::stacking::{
    apply_standardizer, compose_scenario, fit_standardizer, load_matrix, lsa_block,
    stylometric_block, to_f64, BlockKind, BlockRegistry, Scenario,
};
use heterorep::textrep::{fit_lsa, preprocess, LsaConfig, StyloProfile};
use indexmap::IndexMap;

fn docs(start: usize, n: usize) -> (Vec<Document>, Vec<usize>) {
    let real = ["study", "vaccine", "hospital", "trial", "research"];
    let fake = ["hoax", "secret", "shocking", "plot", "cover"];
    let mut out = Vec::new();
    let mut y = Vec::new();
    for i in start..start + n {
        let label = i % 2;
        let cues = if label == 1 { fake } else { real };
        let words: Vec<&str> = (0..12)
            .map(|j| {
                if j % 3 == 0 {
                    "city"
                } else {
                    cues[(i + j) % 5]
                }
            })
            .collect();
        let mut text = words.join(" ");
        if label == 1 {
            text.push_str("!!!");
        }
        out.push(Document {
            id: format!("d{i}"),
            text,
            label: if label == 1 { "fake" } else { "real" }.into(),
            metadata: IndexMap::new(),
        });
        y.push(label);
    }
    (out, y)
}

fn registry(docs: &[Document], lsa: &heterorep::textrep::LsaModel) -> BlockRegistry {
    let mut reg = BlockRegistry::new();
    reg.register(stylometric_block("stylometric", docs, StyloProfile::Full16).unwrap())
        .unwrap();
    reg.register(lsa_block("LSA", lsa, docs).unwrap()).unwrap();
    reg
}

#[test]
fn blocks_compose_train_and_persist() {
    let (train, yt) = docs(0, 60);
    let (val, yv) = docs(60, 20);
    let tokens: Vec<Vec<String>> = train.iter().map(|d| preprocess(&d.text)).collect();
    let cfg = LsaConfig {
        n_word_features: 40,
        n_char_features: 40,
        svd_dim: 6,
        ..LsaConfig::default()
    };
    let lsa = fit_lsa(&tokens, &cfg).unwrap();
    let (rt, rv) = (registry(&train, &lsa), registry(&val, &lsa));

    let ct = compose_scenario(&Scenario::Lm, &rt).unwrap();
    assert_eq!(ct.matrix.ncols(), 16 + 6);
    assert_eq!(ct.block_of(16), Some("LSA"));
    let st = fit_standardizer(&to_f64(&ct.matrix)).unwrap();
    let xt = apply_standardizer(&st, &to_f64(&ct.matrix)).unwrap();
    let xv = apply_standardizer(
        &st,
        &to_f64(&compose_scenario(&Scenario::Lm, &rv).unwrap().matrix),
    )
    .unwrap();

    let labels = vec!["real".to_owned(), "fake".to_owned()];
    let mut specs = logreg_grid(&[0.1, 0.01], 300);
    specs.extend(mlp_grid(
        &[MlpSpec {
            max_epochs: 30,
            ..MlpSpec::snn(8)
        }],
        &[0.01],
        &[0.0],
    ));
    let avg = Averaging::Binary { positive: 1 };
    let result = grid_search(&specs, (&xt, &yt), (&xv, &yv), &labels, avg, 5).unwrap();
    assert_eq!(result.trials.len(), 3);
    let m = evaluate(&result.best, &xv, &yv, avg).unwrap();
    assert!(m.f1 > 0.9, "validation F1 {}", m.f1);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.mdl");
    result.best.save(&path).unwrap();
    let back = TrainedModel::load(&path).unwrap();
    assert_eq!(back, result.best);
    assert_eq!(
        back.predict(&xv).unwrap(),
        result.best.predict(&xv).unwrap()
    );
}

#[test]
fn saved_blocks_reload_with_id_checks() {
    let (train, _) = docs(0, 5);
    let block = stylometric_block("stylometric", &train, StyloProfile::Char10).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.train.drm");
    block.save(&path).unwrap();
    let ids: Vec<String> = train.iter().map(|d| d.id.clone()).collect();
    let back = load_matrix(&path, "stylometric", BlockKind::Text, Some(&ids)).unwrap();
    assert_eq!(back.matrix, block.matrix);

    let mut shuffled = ids.clone();
    shuffled.swap(0, 1);
    assert!(load_matrix(&path, "stylometric", BlockKind::Text, Some(&shuffled)).is_err());
}
