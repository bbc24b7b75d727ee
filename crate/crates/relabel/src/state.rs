//! State persistence: snapshot files written atomically (temp file plus
//! rename), so an interrupted command never corrupts the previous state.

use std::fs;
use std::path::Path;

use relabel_core::{snapshot, LabelStore};

use crate::error::{CliError, CliResult};

pub fn load_store(path: &Path) -> CliResult<LabelStore> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read state {}: {e}", path.display())))?;
    snapshot::restore(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

pub fn save_store(store: &LabelStore, path: &Path) -> CliResult<()> {
    let text = snapshot::snapshot(store);
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::data(format!("cannot replace {}: {e}", path.display())))?;
    Ok(())
}
