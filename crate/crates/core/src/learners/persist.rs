//! `MDL1` model files: magic, JSON spec, label set, layer weights (f64),
//! monitor history, best epoch and trained epochs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::{Layer, ModelSpec, TrainedModel};
use crate::binio;
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"MDL1";

impl TrainedModel {
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        let spec = serde_json::to_string(&self.spec).map_err(|e| Error::Format(e.to_string()))?;
        binio::write_magic(&mut w, MODEL_MAGIC).map_err(io)?;
        binio::write_str(&mut w, &spec).map_err(io)?;
        binio::write_u64(&mut w, self.labels.len() as u64).map_err(io)?;
        for l in &self.labels {
            binio::write_str(&mut w, l).map_err(io)?;
        }
        binio::write_u64(&mut w, self.layers.len() as u64).map_err(io)?;
        for layer in &self.layers {
            binio::write_u64(&mut w, layer.w.nrows() as u64).map_err(io)?;
            binio::write_u64(&mut w, layer.w.ncols() as u64).map_err(io)?;
            binio::write_f64s(&mut w, &layer.w.iter().copied().collect::<Vec<_>>()).map_err(io)?;
            binio::write_f64s(&mut w, &layer.b.to_vec()).map_err(io)?;
        }
        binio::write_u64(&mut w, self.history.len() as u64).map_err(io)?;
        binio::write_f64s(&mut w, &self.history).map_err(io)?;
        binio::write_u64(&mut w, self.best_epoch as u64).map_err(io)?;
        binio::write_u64(&mut w, self.epochs as u64).map_err(io)?;
        w.flush().map_err(io)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let name = path.display().to_string();
        let mut r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        binio::read_magic(&mut r, MODEL_MAGIC, &name)?;
        let spec: ModelSpec = serde_json::from_str(&binio::read_str(&mut r)?)
            .map_err(|e| Error::Format(format!("{name}: {e}")))?;
        let n_labels = binio::read_len(&mut r)?;
        let labels = (0..n_labels)
            .map(|_| binio::read_str(&mut r))
            .collect::<Result<Vec<_>>>()?;
        let n_layers = binio::read_len(&mut r)?;
        let mut layers = Vec::with_capacity(n_layers.min(64));
        for _ in 0..n_layers {
            let rows = binio::read_len(&mut r)?;
            let cols = binio::read_len(&mut r)?;
            let w = binio::read_f64s(&mut r, rows * cols)?;
            let b = binio::read_f64s(&mut r, cols)?;
            layers.push(Layer {
                w: Array2::from_shape_vec((rows, cols), w)
                    .map_err(|e| Error::Format(e.to_string()))?,
                b: Array1::from(b),
            });
        }
        let n_hist = binio::read_len(&mut r)?;
        let history = binio::read_f64s(&mut r, n_hist)?;
        let best_epoch = binio::read_len(&mut r)?;
        let epochs = binio::read_len(&mut r)?;
        binio::expect_eof(&mut r, &name)?;

        if layers.is_empty() || layers.last().map(|l| l.w.ncols()) != Some(labels.len()) {
            return Err(Error::Format(format!(
                "{name}: output layer does not match the label set"
            )));
        }
        if layers.windows(2).any(|p| p[0].w.ncols() != p[1].w.nrows()) {
            return Err(Error::Format(format!("{name}: layer shapes do not chain")));
        }
        Ok(Self {
            spec,
            labels,
            layers,
            history,
            best_epoch,
            epochs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{init_layers, LinearModelSpec, MlpSpec};
    use super::*;

    #[test]
    fn round_trip() {
        let spec = MlpSpec::lnn(3);
        let model = TrainedModel {
            spec: ModelSpec::Mlp(spec.clone()),
            labels: vec!["fake".into(), "real".into()],
            layers: init_layers(&spec, 5, 2).unwrap(),
            history: vec![0.5, 0.75],
            best_epoch: 2,
            epochs: 2,
        };
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mdl");
        model.save(&p).unwrap();
        assert_eq!(TrainedModel::load(&p).unwrap(), model);
        assert_eq!(&std::fs::read(&p).unwrap()[..4], b"MDL1");

        let linear = TrainedModel {
            spec: ModelSpec::Linear(LinearModelSpec::logreg(0.1)),
            labels: vec!["a".into()],
            layers: vec![Layer::zeros(3, 2)],
            history: vec![],
            best_epoch: 0,
            epochs: 0,
        };
        linear.save(&p).unwrap();
        assert!(matches!(TrainedModel::load(&p), Err(Error::Format(_))));
    }
}
