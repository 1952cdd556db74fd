//! Macro configuration, loadable from a sectioned `key = value` file.

use serde::{Deserialize, Serialize};

use crate::cost_model::EnergyCoefficients;
use crate::error::{CimError, Result};
use crate::fixedpoint::check_bits;

/// Largest array edge; bit planes of one tile are held in a `u64` mask.
pub const MAX_ARRAY_EDGE: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SkipMode {
    /// Every bit-plane pair takes a cycle and drives every row and column.
    None,
    /// A pair is skipped when either whole plane is zero.
    Plane,
    /// Plane skipping plus per-row wordline gating and per-column masking.
    Element,
}

impl std::str::FromStr for SkipMode {
    type Err = CimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SkipMode::None),
            "plane" => Ok(SkipMode::Plane),
            "element" => Ok(SkipMode::Element),
            other => Err(CimError::Config(format!(
                "unknown skip mode '{other}' (expected none, plane or element)"
            ))),
        }
    }
}

impl std::fmt::Display for SkipMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SkipMode::None => "none",
            SkipMode::Plane => "plane",
            SkipMode::Element => "element",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub weight_bits: u32,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            rows: 64,
            cols: 64,
            weight_bits: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MacroConfig {
    pub array: ArrayConfig,
    /// Token element width `K`.
    pub input_bits: u32,
    pub clock_hz: f64,
    pub skip_mode: SkipMode,
    pub energy: EnergyCoefficients,
}

impl Default for MacroConfig {
    fn default() -> Self {
        Self {
            array: ArrayConfig::default(),
            input_bits: 8,
            clock_hz: 100e6,
            skip_mode: SkipMode::Element,
            energy: EnergyCoefficients::default(),
        }
    }
}

impl MacroConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.array;
        if a.rows == 0 || a.cols == 0 || a.rows > MAX_ARRAY_EDGE || a.cols > MAX_ARRAY_EDGE {
            return Err(CimError::Config(format!(
                "array {}x{} must be between 1x1 and {MAX_ARRAY_EDGE}x{MAX_ARRAY_EDGE}",
                a.rows, a.cols
            )));
        }
        check_bits(a.weight_bits)?;
        check_bits(self.input_bits)?;
        if !(self.clock_hz.is_finite() && self.clock_hz > 0.0) {
            return Err(CimError::Config(format!(
                "clock_hz must be positive, got {}",
                self.clock_hz
            )));
        }
        self.energy.validate()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self =
            toml::from_str(text).map_err(|e| CimError::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn with_skip_mode(mut self, mode: SkipMode) -> Self {
        self.skip_mode = mode;
        self
    }

    pub fn with_input_bits(mut self, bits: u32) -> Self {
        self.input_bits = bits;
        self
    }

    pub fn with_array(mut self, rows: usize, cols: usize) -> Self {
        self.array.rows = rows;
        self.array.cols = cols;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_macro() {
        let cfg = MacroConfig::default();
        assert_eq!(
            (cfg.array.rows, cfg.array.cols, cfg.array.weight_bits),
            (64, 64, 8)
        );
        assert_eq!(cfg.clock_hz, 100e6);
        assert_eq!(cfg.skip_mode, SkipMode::Element);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn shipped_config_parses_to_defaults() {
        let text = include_str!("../../../configs/default.toml");
        assert_eq!(
            MacroConfig::from_toml(text).unwrap(),
            MacroConfig::default()
        );
    }

    #[test]
    fn partial_config_keeps_defaults() {
        let cfg = MacroConfig::from_toml("skip_mode = \"plane\"\n[array]\nrows = 32\n").unwrap();
        assert_eq!(cfg.skip_mode, SkipMode::Plane);
        assert_eq!(cfg.array.rows, 32);
        assert_eq!(cfg.array.cols, 64);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(MacroConfig::from_toml("[array]\nrows = 65\n").is_err());
        assert!(MacroConfig::from_toml("input_bits = 1\n").is_err());
        assert!(MacroConfig::from_toml("clock_hz = 0.0\n").is_err());
        assert!(MacroConfig::from_toml("bogus = 1\n").is_err());
        assert!("fast".parse::<SkipMode>().is_err());
    }
}
