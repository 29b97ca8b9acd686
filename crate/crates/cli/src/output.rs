use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

/// Hex digits of the scenario hash used in file names.
pub const NAME_HASH_LEN: usize = 16;

/// Writes every artifact of one run into `dir`, tagging each with the
/// scenario hash (in the file name, and as a field for JSON).
#[derive(Debug)]
pub struct OutputDir {
    dir: PathBuf,
    hash: String,
    seed: u64,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(dir: &Path, hash: String, seed: u64) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash,
            seed,
            written: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}-{}.{ext}", &self.hash[..NAME_HASH_LEN]))
    }

    pub fn csv<F>(&mut self, stem: &str, write: F) -> Result<PathBuf, CliError>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.path(stem, "csv");
        let mut out = BufWriter::new(File::create(&path)?);
        write(&mut out)?;
        out.flush()?;
        self.written.push(path.clone());
        Ok(path)
    }

    /// `body` must be a JSON object; hash and seed are added to it.
    pub fn json(&mut self, stem: &str, mut body: Value) -> Result<PathBuf, CliError> {
        let obj = body.as_object_mut().expect("JSON artifacts are objects");
        obj.insert("scenario_hash".into(), Value::String(self.hash.clone()));
        obj.insert("seed".into(), Value::from(self.seed));
        let path = self.path(stem, "json");
        let mut text = serde_json::to_string_pretty(&body).expect("serializable");
        text.push('\n');
        std::fs::write(&path, text)?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}
