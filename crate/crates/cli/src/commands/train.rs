use std::fs::File;
use std::io::BufWriter;

use heterorep::corpus::SplitName;
use heterorep::learners::{
    evaluate, grid_search, logreg_grid, mlp_grid, sgd_grid, write_trials_tsv, MetricsRecord,
    ModelSpec,
};
use heterorep::seed;
use heterorep::stacking::{apply_standardizer, compose, fit_standardizer, to_f64};
use serde::Serialize;

use crate::config::{LearnerKind, TrainConfig};
use crate::context::{require_split, slug, write_file, Context};
use crate::error::{usage, CliError, CliResult};

#[derive(Serialize)]
struct Report<'a> {
    scenario: String,
    blocks: &'a [String],
    dimension: usize,
    learner: &'static str,
    trials: usize,
    best_trial: usize,
    best_params: String,
    labels: &'a [String],
    validation: MetricsRecord,
    test: MetricsRecord,
}

fn grid(cfg: &TrainConfig) -> CliResult<(Vec<ModelSpec>, &'static str)> {
    let (specs, name) = match cfg.learner {
        LearnerKind::Logreg => (logreg_grid(&cfg.lambdas, cfg.max_epochs), "logreg"),
        LearnerKind::Sgd => {
            let s = &cfg.sgd;
            (
                sgd_grid(
                    &s.losses,
                    &s.l1_ratios,
                    &s.power_ts,
                    &s.alphas,
                    s.eta0,
                    s.max_epochs,
                ),
                "sgd",
            )
        }
        LearnerKind::Mlp => (
            mlp_grid(&cfg.mlp.templates(), &cfg.mlp.lrs, &cfg.mlp.dropouts),
            "mlp",
        ),
    };
    if specs.is_empty() {
        return Err(usage("the [train] grid is empty"));
    }
    for s in &specs {
        let check = match s {
            ModelSpec::Linear(l) => l.validate(),
            ModelSpec::Mlp(m) => m.validate(),
        };
        check.map_err(|e| usage(format!("[train] grid: {e}")))?;
    }
    Ok((specs, name))
}

pub fn train(ctx: &Context) -> CliResult<()> {
    let scenario = ctx.config.scenario(ctx.scenario_flag.as_deref())?;
    let (specs, learner) = grid(&ctx.config.train)?;
    let dataset = ctx.load_dataset()?;
    let train = require_split(&dataset, SplitName::Train)?;
    let val = require_split(&dataset, SplitName::Validation)?;
    let test = require_split(&dataset, SplitName::Test)?;
    let averaging = ctx.averaging(&dataset)?;

    let decls = ctx.block_decls()?;
    let reg_train = ctx.load_registry(&decls, train)?;
    let names = scenario.resolve(&reg_train)?;
    let chosen: Vec<_> = decls
        .iter()
        .filter(|d| names.contains(&d.name))
        .cloned()
        .collect();
    let reg_val = ctx.load_registry(&chosen, val)?;
    let reg_test = ctx.load_registry(&chosen, test)?;

    let xt = to_f64(&compose(&names, &reg_train)?.matrix);
    let st = fit_standardizer(&xt)?;
    let xt = apply_standardizer(&st, &xt)?;
    let xv = apply_standardizer(&st, &to_f64(&compose(&names, &reg_val)?.matrix))?;
    let xs = apply_standardizer(&st, &to_f64(&compose(&names, &reg_test)?.matrix))?;
    let yt = train.class_ids(&dataset.labels)?;
    let yv = val.class_ids(&dataset.labels)?;
    let ys = test.class_ids(&dataset.labels)?;
    let labels = dataset.labels.labels().to_vec();

    let result = grid_search(
        &specs,
        (&xt, &yt),
        (&xv, &yv),
        &labels,
        averaging,
        seed::derive(ctx.seed, "grid", 0),
    )?;
    let test_metrics = evaluate(&result.best, &xs, &ys, averaging)?;
    let best = &result.trials[result.best_trial];

    let dir = ctx.ensure_out(Some(&format!("train/{}", slug(&scenario.to_string()))))?;
    result.best.save(&dir.join("model.mdl"))?;
    let trials_path = dir.join("trials.tsv");
    let f = File::create(&trials_path).map_err(|e| CliError::io(&trials_path, e))?;
    write_trials_tsv(&result.trials, BufWriter::new(f))
        .map_err(|e| CliError::io(&trials_path, e))?;

    let report = Report {
        scenario: scenario.to_string(),
        blocks: &names,
        dimension: xt.ncols(),
        learner,
        trials: result.trials.len(),
        best_trial: result.best_trial,
        best_params: best.params.clone(),
        labels: &labels,
        validation: best.validation.expect("best trial has metrics"),
        test: test_metrics,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    write_file(&dir.join("report.json"), format!("{json}\n").as_bytes())?;
    let tsv = format!(
        "split\taccuracy\tf1\tprecision\trecall\n{}{}",
        metrics_row("validation", &report.validation),
        metrics_row("test", &test_metrics)
    );
    write_file(&dir.join("report.tsv"), tsv.as_bytes())?;
    print!(
        "scenario\t{}\nbest\t{}\n{tsv}",
        report.scenario, report.best_params
    );
    Ok(())
}

fn metrics_row(split: &str, m: &MetricsRecord) -> String {
    format!(
        "{split}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
        m.accuracy, m.f1, m.precision, m.recall
    )
}
