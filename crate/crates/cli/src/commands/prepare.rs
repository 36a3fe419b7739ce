use std::path::Path;

use latentgraph::data::{self, Manifest, MANIFEST_FILE};

use crate::dataset::SYNTHETIC;
use crate::CliError;

pub fn prepare(data_dir: &Path, name: &str, row_normalize: Option<bool>) -> Result<(), CliError> {
    if name.eq_ignore_ascii_case(SYNTHETIC) {
        return Err(CliError::Usage(format!(
            "{SYNTHETIC} is generated from the [synthetic] config section; nothing to prepare"
        )));
    }
    let dir = data::dataset_dir(data_dir, name)?;
    if !dir.is_dir() {
        return Err(CliError::Validation(format!(
            "no raw files for {name} in {}; fetch and convert them first (see scripts/fetch_data.sh)",
            dir.display()
        )));
    }
    let ds = data::load(name, data_dir)?;
    let normalize = row_normalize.or(ds.row_normalize_default).unwrap_or(false);
    let manifest = Manifest::for_dataset(&ds, normalize)?;
    let path = ds.dir.join(MANIFEST_FILE);
    manifest.write(&path)?;

    let back = Manifest::read(&path)?;
    back.verify_checksums(&ds.dir)?;
    if back != manifest {
        return Err(CliError::Validation(format!("{} does not read back unchanged", path.display())));
    }

    println!("{:<20} {:>12} {:>12}  check", "field", "measured", "expected");
    let checks = ds.stat_checks();
    for c in &checks {
        let verdict = match c.ok {
            Some(true) => "OK",
            Some(false) => "MISMATCH",
            None => "-",
        };
        println!("{:<20} {:>12} {:>12}  {verdict}", c.field, c.measured, c.expected);
    }
    println!("manifest written to {}", path.display());

    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c.ok == Some(false))
        .map(|c| format!("{} = {} (expected {})", c.field, c.measured, c.expected))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed.join("; ")))
    }
}
