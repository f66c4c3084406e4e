//! Flat `key = value` configuration files for [`FusionConfig`].
//!
//! ```text
//! # comments start with '#'
//! lambda = 4.5
//! patch_size = 16
//! levels = 2
//! basis = db2
//! alm.tol = 1e-6
//! alm.max_iter = 500
//! alm.mu0 = 0.1
//! alm.mu_max = 1e8
//! alm.rho = 1.1
//! tie_break = second      # or first
//! high_band = low_rank    # or raw
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use lrr_fusion_core::{FusionConfig, HighBandMode, TieBreak};

use crate::error::{Error, Result};

/// Keys set by a configuration file, so callers can tell overrides from
/// defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: Vec<(String, String)>,
}

impl ConfigFile {
    pub fn has(&self, key: &str) -> bool {
        self.entries.iter().any(|(k, _)| k == key)
    }
}

fn parse_num<T: FromStr>(value: &str, key: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

fn apply(cfg: &mut FusionConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "lambda" => cfg.lambda = parse_num(value, key)?,
        "patch_size" => cfg.patch_size = parse_num(value, key)?,
        "levels" => cfg.levels = parse_num(value, key)?,
        "basis" => cfg.basis = value.to_string(),
        "alm.tol" => cfg.alm.tol = parse_num(value, key)?,
        "alm.max_iter" => cfg.alm.max_iter = parse_num(value, key)?,
        "alm.mu0" => cfg.alm.mu0 = parse_num(value, key)?,
        "alm.mu_max" => cfg.alm.mu_max = parse_num(value, key)?,
        "alm.rho" => cfg.alm.rho = parse_num(value, key)?,
        "tie_break" => {
            cfg.tie_break = match value {
                "second" => TieBreak::Second,
                "first" => TieBreak::First,
                _ => return Err(format!("tie_break must be `first` or `second`, got `{value}`")),
            }
        }
        "high_band" => {
            cfg.high_band = match value {
                "low_rank" => HighBandMode::LowRank,
                "raw" => HighBandMode::Raw,
                _ => return Err(format!("high_band must be `low_rank` or `raw`, got `{value}`")),
            }
        }
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parses configuration text. `origin` only labels error messages.
pub fn parse_config(text: &str, origin: &Path) -> Result<ConfigFile> {
    let mut entries = Vec::new();
    let mut probe = FusionConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Config { path: origin.into(), line: i + 1, message };
        let (key, value) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        let (key, value) = (key.trim(), value.trim());
        apply(&mut probe, key, value).map_err(err)?;
        entries.push((key.to_string(), value.to_string()));
    }
    Ok(ConfigFile { entries })
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ConfigFile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, path)
}

/// Applies every entry of `file` on top of `base` and validates the result.
pub fn apply_config(base: &FusionConfig, file: &ConfigFile) -> Result<FusionConfig> {
    let mut cfg = base.clone();
    for (key, value) in &file.entries {
        apply(&mut cfg, key, value).expect("entries were checked while parsing");
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Renders a configuration in the file format; `parse_config` reads it back
/// to the same value.
pub fn to_config_text(cfg: &FusionConfig) -> String {
    let mut s = String::new();
    let tie = match cfg.tie_break {
        TieBreak::Second => "second",
        TieBreak::First => "first",
    };
    let high = match cfg.high_band {
        HighBandMode::LowRank => "low_rank",
        HighBandMode::Raw => "raw",
    };
    // `{:?}` on f64 prints the shortest representation that parses back exactly
    let _ = writeln!(s, "lambda = {:?}", cfg.lambda);
    let _ = writeln!(s, "patch_size = {}", cfg.patch_size);
    let _ = writeln!(s, "levels = {}", cfg.levels);
    let _ = writeln!(s, "basis = {}", cfg.basis);
    let _ = writeln!(s, "alm.tol = {:?}", cfg.alm.tol);
    let _ = writeln!(s, "alm.max_iter = {}", cfg.alm.max_iter);
    let _ = writeln!(s, "alm.mu0 = {:?}", cfg.alm.mu0);
    let _ = writeln!(s, "alm.mu_max = {:?}", cfg.alm.mu_max);
    let _ = writeln!(s, "alm.rho = {:?}", cfg.alm.rho);
    let _ = writeln!(s, "tie_break = {tie}");
    let _ = writeln!(s, "high_band = {high}");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<FusionConfig> {
        apply_config(&FusionConfig::default(), &parse_config(text, Path::new("test.cfg"))?)
    }

    #[test]
    fn overrides_and_comments() {
        let cfg = parse("# header\nlambda = 4.5  # trailing\n\npatch_size=8\nalm.rho = 1.3\ntie_break = first\n").unwrap();
        assert_eq!(cfg.lambda, 4.5);
        assert_eq!(cfg.patch_size, 8);
        assert_eq!(cfg.alm.rho, 1.3);
        assert_eq!(cfg.tie_break, TieBreak::First);
        assert_eq!(cfg.levels, 2);
    }

    #[test]
    fn errors_name_the_line() {
        let err = parse("lambda = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        assert!(matches!(parse("lambda\n").unwrap_err(), Error::Config { line: 1, .. }));
        assert!(matches!(parse("levels = two\n").unwrap_err(), Error::Config { line: 1, .. }));
    }

    #[test]
    fn values_are_validated() {
        assert!(parse("lambda = -1\n").is_err());
        assert!(parse("basis = sym8\n").is_err());
        assert!(parse("patch_size = 1\n").is_err());
    }

    #[test]
    fn text_roundtrip() {
        let cfg = FusionConfig {
            lambda: 0.1 + 0.2,
            patch_size: 12,
            basis: "haar".into(),
            tie_break: TieBreak::First,
            high_band: HighBandMode::Raw,
            ..Default::default()
        };
        assert_eq!(parse(&to_config_text(&cfg)).unwrap(), cfg);
    }
}
