//! Artifact writing. Every file goes to a temporary sibling first and is
//! renamed into place, so readers never see a partial file.

use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::config::ExperimentConfig;

pub fn write_atomic<F>(path: &Path, fill: F) -> io::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    {
        let mut w = io::BufWriter::new(tmp.as_file_mut());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[derive(Serialize)]
struct Provenance<'a> {
    code_version: &'static str,
    #[serde(flatten)]
    config: &'a ExperimentConfig,
}

/// JSON report with the resolved configuration and the code version.
pub fn write_report<R: Serialize>(path: &Path, config: &ExperimentConfig, result: &R) -> io::Result<()> {
    let prov = Provenance { code_version: env!("CARGO_PKG_VERSION"), config };
    write_atomic(path, |w| rcm::estimators::write_json(&prov, result, w))
}

/// A gnuplot script plotting columns of a CSV file against the first.
pub fn write_plot_script(path: &Path, csv: &Path, columns: &[(usize, &str)]) -> io::Result<()> {
    let name = csv.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    write_atomic(path, |w| {
        writeln!(w, "set datafile separator ','")?;
        writeln!(w, "set key autotitle columnhead")?;
        let parts: Vec<String> = columns.iter().map(|(c, title)| format!("'{name}' using 1:{c} with linespoints title '{title}'")).collect();
        writeln!(w, "plot {}", parts.join(", \\\n     "))
    })
}

pub struct Artifacts {
    pub dir: PathBuf,
    pub stem: String,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn path(&self, ext: &str) -> PathBuf {
        self.dir.join(format!("{}.{ext}", self.stem))
    }
}
