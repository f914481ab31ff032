use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Files produced by a command. Nothing touches the disk until the command
/// has succeeded, and then every file goes through a temporary name first.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    pub fn add_json(&mut self, name: impl Into<String>, value: &impl Serialize) -> Result<()> {
        self.add(name, to_json(value)?);
        Ok(())
    }

    pub fn write(self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = std::fs::write(&tmp, contents) {
                for (t, _) in &staged {
                    let _ = std::fs::remove_file(t);
                }
                let _ = std::fs::remove_file(&tmp);
                return Err(e).with_context(|| format!("writing {}", tmp.display()));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, dest) in staged {
            std::fs::rename(&tmp, &dest)
                .with_context(|| format!("moving {} into place", dest.display()))?;
            written.push(dest);
        }
        Ok(written)
    }
}

pub fn to_json(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
