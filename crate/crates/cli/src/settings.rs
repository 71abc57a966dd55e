//! Flat `key = value` configuration files layered under CLI flags.

use std::path::Path;

use ns_core::{Engine, NsConfig};

use crate::error::{io_err, CliError, Result};

/// Parses `key = value` lines. Blank lines and `#` comments are skipped;
/// keys may carry a leading `--`.
pub fn parse_settings(text: &str, path: &Path) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::ConfigFile {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_settings(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_settings(&text, path)
}

fn norm_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('_', "-")
}

/// Builds a configuration for a stream at `sample_rate_hz` from rate
/// defaults, then `file` settings, then `flags`. A sample-rate setting must
/// agree with the stream. The engine is applied last so that classic rules
/// pick up the final suppression floor.
pub fn build_config(
    sample_rate_hz: f64,
    file: &[(String, String)],
    flags: &[(String, String)],
) -> Result<NsConfig> {
    let mut cfg = NsConfig::for_sample_rate(sample_rate_hz);
    let mut engine = None;
    let mut errors = Vec::new();
    for (k, v) in file.iter().chain(flags) {
        match norm_key(k).as_str() {
            "engine" => engine = Some(v.clone()),
            "sample-rate" => match v.trim().parse::<f64>() {
                Ok(fs) if fs == sample_rate_hz => {}
                _ => errors.push(ns_core::ConfigError::new(
                    "sample_rate_hz",
                    format!("setting '{v}' does not match the input rate {sample_rate_hz} Hz"),
                )),
            },
            key => {
                if let Err(e) = cfg.set(key, v) {
                    errors.push(e);
                }
            }
        }
    }
    if let Some(v) = engine {
        match ns_core::config::parse_engine(&v, cfg.max_suppression) {
            Ok(e) => cfg.engine = e,
            Err(e) => errors.push(e),
        }
    }
    if !errors.is_empty() {
        return Err(ns_core::Error::Invalid(errors).into());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Short human-readable description of the active settings.
pub fn describe(cfg: &NsConfig) -> String {
    let engine = match cfg.engine {
        Engine::Proposed => "proposed".to_string(),
        Engine::Classic(p) => p.kind.to_string(),
    };
    format!(
        "engine={engine} fs={} N={} hop={} M={} floor={:.1} dB mu={} alpha={} window={} hpf={} Hz",
        cfg.sample_rate_hz,
        cfg.frame_size,
        cfg.hop(),
        cfg.m_bands,
        -20.0 * cfg.max_suppression.log10(),
        cfg.mu,
        cfg.alpha,
        cfg.window,
        cfg.hpf_cutoff_hz,
    )
}
