//! Universe manifests.
//!
//! A manifest is TOML with one `[[universe]]` table per universe and one
//! `[[universe.asset]]` entry per asset:
//!
//! ```toml
//! [[universe]]
//! name = "auto"
//!
//! [[universe.asset]]
//! ticker = "MSZ"
//! path = "auto/MSZ.csv"
//! index_weight = 19.53
//! ```
//!
//! Relative asset paths resolve against the manifest's directory.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetEntry {
    pub ticker: String,
    pub path: PathBuf,
    /// Sector-index weight, carried through to reports as an annotation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index_weight: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseSpec {
    pub name: String,
    #[serde(rename = "asset", default)]
    pub assets: Vec<AssetEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(rename = "universe", default)]
    pub universes: Vec<UniverseSpec>,
}

impl Manifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|message| Error::Manifest {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Parses manifest text, resolving relative paths against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, String> {
        let mut manifest: Manifest = toml::from_str(text).map_err(|e| e.to_string())?;
        manifest.validate()?;
        for universe in &mut manifest.universes {
            for asset in &mut universe.assets {
                if asset.path.is_relative() {
                    asset.path = base.join(&asset.path);
                }
            }
        }
        Ok(manifest)
    }

    fn validate(&self) -> Result<(), String> {
        if self.universes.is_empty() {
            return Err("no [[universe]] entries".into());
        }
        let mut names = HashSet::new();
        for u in &self.universes {
            let valid_name = !u.name.is_empty()
                && u.name
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_');
            if !valid_name {
                return Err(format!(
                    "universe name `{}` must be non-empty ASCII letters, digits, `-` or `_`",
                    u.name
                ));
            }
            if !names.insert(u.name.as_str()) {
                return Err(format!("duplicate universe `{}`", u.name));
            }
            let mut tickers = HashSet::new();
            for a in &u.assets {
                if a.ticker.is_empty() {
                    return Err(format!("universe `{}` has an asset with an empty ticker", u.name));
                }
                if !tickers.insert(a.ticker.as_str()) {
                    return Err(format!("universe `{}` lists `{}` twice", u.name, a.ticker));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_resolves_paths() {
        let text = r#"
            [[universe]]
            name = "auto"
            [[universe.asset]]
            ticker = "A"
            path = "a.csv"
            index_weight = 19.53
            [[universe.asset]]
            ticker = "B"
            path = "/abs/b.csv"

            [[universe]]
            name = "bank"
            [[universe.asset]]
            ticker = "C"
            path = "sub/c.csv"
        "#;
        let m = Manifest::parse(text, Path::new("/data")).unwrap();
        assert_eq!(m.universes.len(), 2);
        assert_eq!(m.universes[0].assets[0].path, PathBuf::from("/data/a.csv"));
        assert_eq!(m.universes[0].assets[0].index_weight, Some(19.53));
        assert_eq!(m.universes[0].assets[1].path, PathBuf::from("/abs/b.csv"));
        assert_eq!(m.universes[1].name, "bank");
    }

    #[test]
    fn rejects_duplicates_and_bad_names() {
        let dup_ticker = "[[universe]]\nname='x'\n[[universe.asset]]\nticker='A'\npath='a'\n[[universe.asset]]\nticker='A'\npath='b'\n";
        assert!(Manifest::parse(dup_ticker, Path::new(".")).is_err());
        let dup_universe = "[[universe]]\nname='x'\n[[universe]]\nname='x'\n";
        assert!(Manifest::parse(dup_universe, Path::new(".")).is_err());
        let bad_name = "[[universe]]\nname='../x'\n";
        assert!(Manifest::parse(bad_name, Path::new(".")).is_err());
        assert!(Manifest::parse("", Path::new(".")).is_err());
    }
}
