//! Pretrained entity embedding files.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::binio;
use crate::error::{Error, Result};

/// Knowledge-graph embedding method that produced a store.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KgMethod {
    TransE,
    DistMult,
    ComplEx,
    RotatE,
    QuatE,
    SimplE,
}

impl KgMethod {
    pub const ALL: [KgMethod; 6] = [
        KgMethod::TransE,
        KgMethod::DistMult,
        KgMethod::ComplEx,
        KgMethod::RotatE,
        KgMethod::QuatE,
        KgMethod::SimplE,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            KgMethod::TransE => "TransE",
            KgMethod::DistMult => "DistMult",
            KgMethod::ComplEx => "ComplEx",
            KgMethod::RotatE => "RotatE",
            KgMethod::QuatE => "QuatE",
            KgMethod::SimplE => "SimplE",
        }
    }
}

impl fmt::Display for KgMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KgMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KgMethod::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Format(format!("unknown KG embedding method `{s}`")))
    }
}

/// `n_entities × dim` float32 embeddings plus the raw alias of each row.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityEmbeddingStore {
    pub method: KgMethod,
    /// Raw (unprocessed) alias per row, as read from the file.
    pub aliases: Vec<String>,
    matrix: Array2<f32>,
}

impl EntityEmbeddingStore {
    pub fn new(method: KgMethod, aliases: Vec<String>, matrix: Array2<f32>) -> Result<Self> {
        if aliases.len() != matrix.nrows() {
            return Err(Error::Format(format!(
                "{} aliases for {} embedding rows",
                aliases.len(),
                matrix.nrows()
            )));
        }
        if let Some((idx, _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Format(format!(
                "non-finite embedding value at {idx:?}"
            )));
        }
        Ok(Self {
            method,
            aliases,
            matrix,
        })
    }

    pub fn n_entities(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn row(&self, index: usize) -> Result<ArrayView1<'_, f32>> {
        if index >= self.n_entities() {
            return Err(Error::Integrity {
                index,
                len: self.n_entities(),
            });
        }
        Ok(self.matrix.row(index))
    }

    pub fn matrix(&self) -> &Array2<f32> {
        &self.matrix
    }

    /// Text format: `#method=<tag> dim=<D> count=<N>` header, then N lines of
    /// `alias<TAB>f1 f2 ... fD`.
    pub fn load_text(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines();
        let header = lines
            .next()
            .transpose()
            .map_err(|e| Error::io(path, e))?
            .ok_or_else(|| Error::Format(format!("{}: empty entity file", path.display())))?;
        let (method, dim, count) = parse_header(&header)?;

        let mut aliases = Vec::with_capacity(count);
        let mut values = Vec::with_capacity(count * dim);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.is_empty() {
                continue;
            }
            let (alias, vector) = line.split_once('\t').ok_or_else(|| Error::MalformedRow {
                line: line_no as u64,
                message: "expected alias<TAB>vector".into(),
            })?;
            let before = values.len();
            for tok in vector.split_whitespace() {
                let v: f32 = tok.parse().map_err(|_| Error::MalformedRow {
                    line: line_no as u64,
                    message: format!("bad float `{tok}`"),
                })?;
                values.push(v);
            }
            if values.len() - before != dim {
                return Err(Error::MalformedRow {
                    line: line_no as u64,
                    message: format!("expected {dim} values, found {}", values.len() - before),
                });
            }
            aliases.push(alias.to_owned());
        }
        if aliases.len() != count {
            return Err(Error::Format(format!(
                "header declares {count} entities, file has {}",
                aliases.len()
            )));
        }
        let matrix = Array2::from_shape_vec((count, dim), values)
            .map_err(|e| Error::Format(e.to_string()))?;
        Self::new(method, aliases, matrix)
    }

    pub fn save_text(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        writeln!(
            w,
            "#method={} dim={} count={}",
            self.method,
            self.dim(),
            self.n_entities()
        )
        .map_err(io)?;
        for (alias, row) in self.aliases.iter().zip(self.matrix.rows()) {
            let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{alias}\t{}", vals.join(" ")).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Binary format: `ENT1`, u64 N, u64 D, N × (u64 length + UTF-8 alias),
    /// then N×D float32 row-major. The method is not stored in the file.
    pub fn load_binary(path: &Path, method: KgMethod) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        binio::read_magic(&mut r, b"ENT1", "entity file")?;
        let n = binio::read_len(&mut r)?;
        let d = binio::read_len(&mut r)?;
        let aliases = (0..n)
            .map(|_| binio::read_str(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let values = binio::read_f32s(&mut r, n * d)?;
        binio::expect_eof(&mut r, "entity file")?;
        let matrix =
            Array2::from_shape_vec((n, d), values).map_err(|e| Error::Format(e.to_string()))?;
        Self::new(method, aliases, matrix)
    }

    pub fn save_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        binio::write_magic(&mut w, b"ENT1").map_err(io)?;
        binio::write_u64(&mut w, self.n_entities() as u64).map_err(io)?;
        binio::write_u64(&mut w, self.dim() as u64).map_err(io)?;
        for a in &self.aliases {
            binio::write_str(&mut w, a).map_err(io)?;
        }
        binio::write_f32s(&mut w, &self.matrix.iter().copied().collect::<Vec<_>>()).map_err(io)?;
        w.flush().map_err(io)
    }

    /// Picks the loader from the file's first bytes.
    pub fn load(path: &Path, method_hint: Option<KgMethod>) -> Result<Self> {
        let mut magic = [0u8; 4];
        let n = {
            use std::io::Read;
            let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
            f.read(&mut magic).map_err(|e| Error::io(path, e))?
        };
        if n == 4 && &magic == b"ENT1" {
            let method = method_hint.ok_or_else(|| {
                Error::Parameter(format!(
                    "{}: binary entity files need an explicit method",
                    path.display()
                ))
            })?;
            Self::load_binary(path, method)
        } else {
            let store = Self::load_text(path)?;
            if let Some(m) = method_hint {
                if m != store.method {
                    log::warn!(
                        "{}: header method {} overrides hint {m}",
                        path.display(),
                        store.method
                    );
                }
            }
            Ok(store)
        }
    }
}

fn parse_header(line: &str) -> Result<(KgMethod, usize, usize)> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Format(format!("entity header must start with '#': `{line}`")))?;
    let (mut method, mut dim, mut count) = (None, None, None);
    for field in body.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header field `{field}`")))?;
        let num = || {
            v.parse::<usize>()
                .map_err(|_| Error::Format(format!("bad header value `{field}`")))
        };
        match k {
            "method" => method = Some(v.parse()?),
            "dim" => dim = Some(num()?),
            "count" => count = Some(num()?),
            other => return Err(Error::Format(format!("unknown header key `{other}`"))),
        }
    }
    match (method, dim, count) {
        (Some(m), Some(d), Some(c)) => Ok((m, d, c)),
        _ => Err(Error::Format(format!(
            "entity header needs method, dim and count: `{line}`"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> EntityEmbeddingStore {
        EntityEmbeddingStore::new(
            KgMethod::RotatE,
            vec!["Donald Trump".into(), "vaccine".into(), "COVID-19".into()],
            Array2::from_shape_vec((3, 2), vec![0.5, -1.25, 3.0, 1e-3, -7.5, 0.1]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn text_and_binary_loaders_agree() {
        let dir = tempfile::tempdir().unwrap();
        let s = store();
        s.save_text(&dir.path().join("e.tsv")).unwrap();
        s.save_binary(&dir.path().join("e.ent")).unwrap();
        let a = EntityEmbeddingStore::load_text(&dir.path().join("e.tsv")).unwrap();
        let b =
            EntityEmbeddingStore::load_binary(&dir.path().join("e.ent"), KgMethod::RotatE).unwrap();
        assert_eq!(a, s);
        assert_eq!(a, b);
        let c =
            EntityEmbeddingStore::load(&dir.path().join("e.ent"), Some(KgMethod::RotatE)).unwrap();
        assert_eq!(c, b);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.tsv");
        std::fs::write(&p, "#method=TransE dim=2 count=1\nx\t1 2 3\n").unwrap();
        assert!(matches!(
            EntityEmbeddingStore::load_text(&p),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        std::fs::write(&p, "#method=TransE dim=2 count=2\nx\t1 2\n").unwrap();
        assert!(EntityEmbeddingStore::load_text(&p).is_err());
        std::fs::write(&p, "#method=Foo dim=2 count=1\nx\t1 2\n").unwrap();
        assert!(EntityEmbeddingStore::load_text(&p).is_err());
        std::fs::write(&p, "#method=TransE dim=2 count=1\nx\t1 NaN\n").unwrap();
        assert!(EntityEmbeddingStore::load_text(&p).is_err());
    }

    #[test]
    fn out_of_range_row_is_integrity_error() {
        assert!(matches!(
            store().row(3),
            Err(Error::Integrity { index: 3, len: 3 })
        ));
    }
}
