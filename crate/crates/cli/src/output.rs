use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::CliError;

/// Write to `out` through a sibling temp file and rename, or to stdout.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        return stdout.write_all(content.as_bytes()).map_err(|e| CliError::failure(e.to_string()));
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| CliError { code: crate::error::EXIT_FAILURE, ..CliError::io(path, &e) };
    let mut tmp = NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(content.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    log::info!("wrote {}", path.display());
    Ok(())
}
