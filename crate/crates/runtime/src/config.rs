//! `TASKSCOPE_*` environment configuration.

use std::env;
use std::time::Duration;

use thiserror::Error;

pub const DEFAULT_STALL_INTERVAL: Duration = Duration::from_secs(5);

pub const ENV_WORKERS: &str = "TASKSCOPE_WORKERS";
pub const ENV_CONNECT: &str = "TASKSCOPE_CONNECT";
pub const ENV_LISTEN: &str = "TASKSCOPE_LISTEN";
pub const ENV_STALL_MS: &str = "TASKSCOPE_STALL_MS";

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid {var}={value:?}: {reason}")]
pub struct ConfigError {
    pub var: &'static str,
    pub value: String,
    pub reason: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuntimeConfig {
    pub workers: Option<usize>,
    /// Debugger address to connect out to. Unset means no instrumentation
    /// consumer unless `listen` is set.
    pub connect: Option<String>,
    /// Address on which to wait for a debugger.
    pub listen: Option<String>,
    pub stall_interval: Option<Duration>,
}

impl RuntimeConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|name| env::var(name).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let nonempty = |name: &str| lookup(name).filter(|v| !v.trim().is_empty());
        let workers = nonempty(ENV_WORKERS)
            .map(|v| match v.trim().parse::<usize>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(ConfigError {
                    var: ENV_WORKERS,
                    value: v,
                    reason: "expected a positive integer",
                }),
            })
            .transpose()?;
        let stall_interval = nonempty(ENV_STALL_MS)
            .map(|v| {
                v.trim()
                    .parse::<u64>()
                    .map(Duration::from_millis)
                    .map_err(|_| ConfigError {
                        var: ENV_STALL_MS,
                        value: v,
                        reason: "expected milliseconds",
                    })
            })
            .transpose()?;
        Ok(RuntimeConfig {
            workers,
            connect: nonempty(ENV_CONNECT),
            listen: nonempty(ENV_LISTEN),
            stall_interval,
        })
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    fn parse(vars: &[(&str, &str)]) -> Result<RuntimeConfig, ConfigError> {
        let map: HashMap<String, String> = vars
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        RuntimeConfig::from_lookup(|k| map.get(k).cloned())
    }

    #[test]
    fn empty_environment() {
        assert_eq!(parse(&[]).unwrap(), RuntimeConfig::default());
    }

    #[test]
    fn all_variables() {
        let cfg = parse(&[
            (ENV_WORKERS, "4"),
            (ENV_CONNECT, "127.0.0.1:7523"),
            (ENV_STALL_MS, "250"),
        ])
        .unwrap();
        assert_eq!(cfg.workers, Some(4));
        assert_eq!(cfg.connect.as_deref(), Some("127.0.0.1:7523"));
        assert_eq!(cfg.stall_interval, Some(Duration::from_millis(250)));
    }

    #[test]
    fn bad_values() {
        assert_eq!(parse(&[(ENV_WORKERS, "0")]).unwrap_err().var, ENV_WORKERS);
        assert_eq!(parse(&[(ENV_WORKERS, "x")]).unwrap_err().var, ENV_WORKERS);
        assert_eq!(parse(&[(ENV_STALL_MS, "-1")]).unwrap_err().var, ENV_STALL_MS);
    }
}
