//! Service configuration from a TOML file and `VITALCAM_*` environment
//! variables; the environment wins.
//!
//! ```toml
//! bind = "0.0.0.0"
//! port = 8080
//! data_dir = "data"
//! max_payload_bytes = 104857600
//! workers = 9
//! bp_coefficients = "config/bp_baseline.coef"
//! static_dir = "webui/dist"
//! ```

use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::{Error, Result};

pub const DEFAULT_MAX_PAYLOAD: usize = 100 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bind: IpAddr,
    pub port: u16,
    /// Uploaded payloads go to `uploads/`, sessions to `sessions.db`.
    pub data_dir: PathBuf,
    pub max_payload_bytes: usize,
    /// Concurrent pipeline runs.
    pub workers: usize,
    pub bp_coefficients: Option<PathBuf>,
    /// Prebuilt UI assets; the API works without them.
    pub static_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        Self {
            bind: IpAddr::V4(Ipv4Addr::LOCALHOST),
            port: 8080,
            data_dir: PathBuf::from("data"),
            max_payload_bytes: DEFAULT_MAX_PAYLOAD,
            workers: 2 * cores + 1,
            bp_coefficients: None,
            static_dir: None,
        }
    }
}

impl Config {
    /// Defaults, then `file` if given, then the environment.
    pub fn load(file: Option<&Path>) -> Result<Self> {
        let mut config = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
            }
            None => Config::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, v: String) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse `{v}`")))
        }
        if let Some(v) = get("VITALCAM_BIND") {
            self.bind = parse("VITALCAM_BIND", v)?;
        }
        if let Some(v) = get("VITALCAM_PORT") {
            self.port = parse("VITALCAM_PORT", v)?;
        }
        if let Some(v) = get("VITALCAM_DATA_DIR") {
            self.data_dir = PathBuf::from(v);
        }
        if let Some(v) = get("VITALCAM_MAX_PAYLOAD_BYTES") {
            self.max_payload_bytes = parse("VITALCAM_MAX_PAYLOAD_BYTES", v)?;
        }
        if let Some(v) = get("VITALCAM_WORKERS") {
            self.workers = parse("VITALCAM_WORKERS", v)?;
        }
        if let Some(v) = get("VITALCAM_BP_COEFFICIENTS") {
            self.bp_coefficients = Some(PathBuf::from(v));
        }
        if let Some(v) = get("VITALCAM_STATIC_DIR") {
            self.static_dir = Some(PathBuf::from(v));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.max_payload_bytes == 0 {
            return Err(Error::Config("max_payload_bytes must be positive".into()));
        }
        Ok(())
    }

    pub fn addr(&self) -> SocketAddr {
        SocketAddr::new(self.bind, self.port)
    }

    pub fn database_path(&self) -> PathBuf {
        self.data_dir.join("sessions.db")
    }

    pub fn upload_dir(&self) -> PathBuf {
        self.data_dir.join("uploads")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn env_overrides_file_values() {
        let mut c: Config = toml::from_str("port = 9000\nworkers = 3").unwrap();
        assert_eq!((c.port, c.workers, c.max_payload_bytes), (9000, 3, DEFAULT_MAX_PAYLOAD));
        let env: HashMap<&str, &str> = [("VITALCAM_PORT", "9100"), ("VITALCAM_DATA_DIR", "/tmp/vc")].into();
        c.apply_env(|k| env.get(k).map(|v| v.to_string())).unwrap();
        assert_eq!(c.port, 9100);
        assert_eq!(c.database_path(), PathBuf::from("/tmp/vc/sessions.db"));
    }

    #[test]
    fn bad_values_are_config_errors() {
        assert!(toml::from_str::<Config>("prot = 1").is_err());
        let mut c = Config::default();
        assert!(matches!(c.apply_env(|_| Some("many".into())), Err(Error::Config(_))));
        c = Config { workers: 0, ..Config::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn default_workers_follow_core_count() {
        let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
        assert_eq!(Config::default().workers, 2 * cores + 1);
    }
}
