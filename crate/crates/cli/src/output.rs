use std::fs;
use std::path::{Path, PathBuf};

use bll_core::grid::{write_snapshot, ScalarField};

use crate::config::Formats;
use crate::CliError;

/// Owns the output directory. Every artifact is written once, in full, by
/// this writer; the list of written files goes into the manifest.
pub(crate) struct Output {
    dir: PathBuf,
    formats: Formats,
    written: Vec<String>,
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io { path: path.display().to_string(), msg: e.to_string() }
}

impl Output {
    pub fn create(dir: PathBuf, formats: Formats) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
        Ok(Self { dir, formats, written: Vec::new() })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Plain text written regardless of the format selection.
    pub fn text(&mut self, name: &str, body: &str) -> Result<(), CliError> {
        self.put(name, body.as_bytes())
    }

    pub fn csv(&mut self, stem: &str, body: &str) -> Result<(), CliError> {
        if self.formats.csv {
            self.put(&format!("{stem}.csv"), body.as_bytes())?;
        }
        Ok(())
    }

    /// Whitespace-separated columns with a `#` header, for gnuplot.
    pub fn dat(&mut self, stem: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        if !self.formats.dat {
            return Ok(());
        }
        let mut s = format!("# {}\n", header.join(" "));
        for r in rows {
            let cols: Vec<String> = r.iter().map(|v| format!("{v:.12e}")).collect();
            s.push_str(&cols.join(" "));
            s.push('\n');
        }
        self.put(&format!("{stem}.dat"), s.as_bytes())
    }

    pub fn field(&mut self, stem: &str, field: &ScalarField) -> Result<(), CliError> {
        if !self.formats.bllf {
            return Ok(());
        }
        let mut buf = Vec::new();
        write_snapshot(&mut buf, field)?;
        self.put(&format!("{stem}.bllf"), &buf)
    }

    /// Writes the manifest last so that it lists every other artifact.
    pub fn finish(mut self, command: &str, echo: &str) -> Result<Vec<String>, CliError> {
        let mut s = format!("# bll {command}\n# resolved configuration\n{echo}\n# artifacts\n");
        for w in &self.written {
            s.push_str(&format!("# {w}\n"));
        }
        self.put("manifest.txt", s.as_bytes())?;
        Ok(self.written)
    }
}
