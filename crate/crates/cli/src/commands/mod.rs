mod analysis;
mod featurize;
mod stats;
mod train;

pub use analysis::{ablate, rank, words};
pub use featurize::featurize;
pub use stats::stats;
pub use train::train;

use std::path::PathBuf;

use heterorep::corpus::SplitName;
use heterorep::stacking::{read_drm_header, read_ids};

use crate::config::BlockDecl;
use crate::error::{usage, CliResult};

/// Prints `path rows cols ids` for each DRM file; `ids` is the sidecar line
/// count or `-` when there is none.
pub fn inspect(files: &[PathBuf], blocks: &[String]) -> CliResult<()> {
    let mut paths = files.to_vec();
    for b in blocks {
        let d = BlockDecl::parse_flag(b)?;
        paths.extend(
            SplitName::ALL
                .iter()
                .map(|&s| d.split_path(s))
                .filter(|p| p.exists()),
        );
    }
    if paths.is_empty() {
        return Err(usage("inspect needs at least one DRM file"));
    }
    println!("path\trows\tcols\tids");
    for p in &paths {
        let h = read_drm_header(p)?;
        let ids = read_ids(p)?;
        if let Some(ids) = &ids {
            if ids.len() != h.rows {
                return Err(heterorep::Error::Alignment(format!(
                    "{}: {} ids for {} rows",
                    p.display(),
                    ids.len(),
                    h.rows
                ))
                .into());
            }
        }
        let ids = ids.map_or_else(|| "-".to_owned(), |v| v.len().to_string());
        println!("{}\t{}\t{}\t{ids}", p.display(), h.rows, h.cols);
    }
    Ok(())
}
