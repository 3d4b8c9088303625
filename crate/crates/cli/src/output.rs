use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const MANIFEST: &str = "manifest.toml";

/// A file produced by a run, held in memory until the run succeeds.
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
        bytes.push(b'\n');
        Artifact { name: name.into(), bytes }
    }

    pub fn csv<R, I>(name: &str, header: &[&str], rows: I) -> Self
    where
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
        I: IntoIterator<Item = R>,
    {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header).expect("in-memory write");
        for row in rows {
            w.write_record(row).expect("in-memory write");
        }
        Artifact { name: name.into(), bytes: w.into_inner().expect("in-memory flush") }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OutputHash {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub ruelle_cli_version: String,
    pub ruelle_core_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub wall_time_seconds: f64,
    pub outputs: Vec<OutputHash>,
    /// The effective configuration after command-line overrides.
    pub config: RunConfig,
}

impl Manifest {
    pub fn new(command: &str, config: &RunConfig, threads: Option<usize>, wall: f64, artifacts: &[Artifact]) -> Self {
        Manifest {
            command: command.into(),
            config_sha256: sha256_hex(config.to_toml().as_bytes()),
            ruelle_cli_version: env!("CARGO_PKG_VERSION").into(),
            ruelle_core_version: ruelle_core::VERSION.into(),
            threads,
            wall_time_seconds: wall,
            outputs: artifacts.iter().map(|a| OutputHash { name: a.name.clone(), sha256: sha256_hex(&a.bytes) }).collect(),
            config: config.clone(),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        let de = toml::Deserializer::new(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            CliError::Manifest(format!("`{path}`: {}", e.into_inner().message().trim()))
        })
    }
}

pub fn write_all(dir: &Path, artifacts: &[Artifact], manifest: &Manifest) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}", dir.display()), e))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    }
    let text = toml::to_string(manifest).expect("manifest serializes");
    let path = dir.join(MANIFEST);
    fs::write(&path, text).map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}
