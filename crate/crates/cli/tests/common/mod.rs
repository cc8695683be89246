#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_heterorep"));
    c.env("HETEROREP_THREADS", "2").env_remove("RUST_LOG");
    c
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const REAL: [&str; 6] = [
    "vaccine", "study", "hospital", "doctors", "research", "trial",
];
const FAKE: [&str; 6] = [
    "hoax",
    "secret",
    "conspiracy",
    "shocking",
    "microchip",
    "cover",
];
const FILLER: [&str; 8] = [
    "the", "report", "says", "people", "today", "new", "city", "week",
];
const ENTITIES: [&str; 4] = [
    "Donald Trump",
    "World Health Organization",
    "Bill Gates",
    "Pfizer",
];

fn doc(i: usize, fake: bool) -> String {
    let cues = if fake { FAKE } else { REAL };
    let mut s = String::new();
    for j in 0..14 {
        let w = match (i * 7 + j * 3) % 4 {
            0 | 1 => cues[(i + j) % cues.len()],
            _ => FILLER[(i * 3 + j) % FILLER.len()],
        };
        s.push_str(w);
        s.push_str(if j % 5 == 4 { ". " } else { " " });
        if j == 6 {
            s.push_str(ENTITIES[(i + usize::from(fake) * 2) % 4]);
            s.push(' ');
        }
    }
    if fake {
        s.push_str(" WOW!!");
    }
    s
}

fn split_file(dir: &Path, name: &str, start: usize, n: usize) {
    let mut s = String::from("id\ttext\tlabel\tspeaker\n");
    for i in start..start + n {
        let fake = i % 2 == 1;
        let speaker = ENTITIES[(i / 2 + usize::from(fake)) % 4];
        writeln!(
            s,
            "d{i}\t{}\t{}\t{speaker}",
            doc(i, fake),
            if fake { "fake" } else { "real" }
        )
        .unwrap();
    }
    std::fs::write(dir.join(format!("{name}.tsv")), s).unwrap();
}

fn entities(dir: &Path) {
    let mut s = format!("#method=TransE dim=8 count={}\n", ENTITIES.len());
    for (e, name) in ENTITIES.iter().enumerate() {
        let v: Vec<String> = (0..8)
            .map(|k| format!("{:.3}", ((e * 8 + k) as f32 * 0.37).sin()))
            .collect();
        writeln!(s, "{name}\t{}", v.join(" ")).unwrap();
    }
    std::fs::write(dir.join("entities.txt"), s).unwrap();
}

/// Writes a small labelled corpus, an entity file and a config that enables
/// every built-in block. Returns the config path.
pub fn fixture(dir: &Path, extra: &str) -> PathBuf {
    split_file(dir, "train", 0, 80);
    split_file(dir, "validation", 80, 30);
    split_file(dir, "test", 110, 30);
    entities(dir);
    let cfg = format!(
        r#"seed = 7
out = "out"
scenario = "LM+KG+KG-ENTITY"

[dataset]
format = "tsv"
train = "train.tsv"
validation = "validation.tsv"
test = "test.tsv"
positive_label = "fake"

[dataset.schema]
id = "id"
text = "text"
label = "label"
metadata = ["speaker"]

[featurize]
stylometric = true
lsa = true

[featurize.lsa_config]
n_word_features = 60
n_char_features = 60
svd_dim = 8

[[featurize.kg]]
name = "TransE"
path = "entities.txt"

[[featurize.entity]]
name = "TransE-entity"
path = "entities.txt"

[train]
lambdas = [0.1, 0.01]
max_epochs = 200

[analysis]
k = 20
top_k_words = 3
{extra}
"#
    );
    let p = dir.join("config.toml");
    std::fs::write(&p, cfg).unwrap();
    p
}
