//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use wave_lab_core::data::DataSpec;
use wave_lab_core::{GFunction, GLadder, Nonlinearity, RadialGrid, SolverConfig, WaveState};

use crate::error::CliError;

/// Every key the runner understands, with its default (empty = unset).
pub const KEYS: &[(&str, &str)] = &[
    ("p", "5"),
    ("g", "constant:1"),
    ("ladder_file", ""),
    ("rung", "1"),
    ("dt", "1e-3"),
    ("T", "1"),
    ("dt_out", "1e-2"),
    ("R", "20"),
    ("N", "1024"),
    ("sign", "defocusing"),
    ("eps", "0.1"),
    ("margin", "10"),
    ("data", "gaussian-bump"),
    ("amplitude", "0.5"),
    ("width", "1"),
    ("center", "3"),
    ("n", "1"),
    ("seed", "1"),
    ("scale", "0.1"),
    ("A", ""),
    ("C", ""),
    ("eta", "0.5"),
    ("delta", "0.1"),
    ("lambda", "2"),
    ("levels", "3"),
    ("window", "0.05"),
    ("ensemble", "10"),
    ("max_iter", "60"),
    ("tol", "1e-10"),
    ("samples", "500"),
    ("q", "4"),
    ("r", "4"),
    ("m", "0.5"),
    ("x_max", "1e9"),
    ("drift_tol", "1e-6"),
    ("focus_amplitude", "3"),
    ("rungs", "5"),
    ("ladder_A", "10"),
    ("c_table", ""),
    ("source", "user"),
    ("extend", ""),
];

/// Scenario name plus the resolved key/value table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub scenario: String,
    values: BTreeMap<String, String>,
}

fn field_error(field: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// Defaults for every key.
    pub fn new(scenario: &str) -> Self {
        Self {
            scenario: scenario.to_string(),
            values: KEYS
                .iter()
                .filter(|(_, v)| !v.is_empty())
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(field_error(
                    &format!("line {}", lineno + 1),
                    format!("expected key = value, got {line:?}"),
                ));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| field_error("config", format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(field_error(key, "unknown configuration key"));
        }
        self.values.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str).filter(|s| !s.is_empty())
    }

    /// Sorted `key = value` echo.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn f64(&self, key: &str) -> Result<f64, CliError> {
        let raw = self.raw(key).ok_or_else(|| field_error(key, "missing value"))?;
        let v: f64 = raw
            .parse()
            .map_err(|_| field_error(key, format!("not a number: {raw:?}")))?;
        if v.is_nan() {
            return Err(field_error(key, "NaN is not allowed"));
        }
        Ok(v)
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(_) => self.f64(key).map(Some),
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize, CliError> {
        let raw = self.raw(key).ok_or_else(|| field_error(key, "missing value"))?;
        raw.parse()
            .map_err(|_| field_error(key, format!("not a non-negative integer: {raw:?}")))
    }

    pub fn u64(&self, key: &str) -> Result<u64, CliError> {
        let raw = self.raw(key).ok_or_else(|| field_error(key, "missing value"))?;
        raw.parse()
            .map_err(|_| field_error(key, format!("not a non-negative integer: {raw:?}")))
    }

    pub fn grid(&self) -> Result<RadialGrid, CliError> {
        let (r, n) = (self.f64("R")?, self.usize("N")?);
        RadialGrid::new(r, n).map_err(|e| field_error("N", e.to_string()))
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, CliError> {
        match self.raw("sign").unwrap_or("defocusing") {
            "defocusing" => Ok(Nonlinearity::Defocusing),
            "focusing" => Ok(Nonlinearity::Focusing),
            "off" => Ok(Nonlinearity::Off),
            other => Err(field_error(
                "sign",
                format!("expected defocusing, focusing or off, got {other:?}"),
            )),
        }
    }

    pub fn ladder(&self) -> Result<GLadder, CliError> {
        match self.raw("ladder_file") {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| field_error("ladder_file", format!("cannot read {path}: {e}")))?;
                GLadder::from_json(&text).map_err(|e| field_error("ladder_file", e.to_string()))
            }
            None => {
                let rungs = self.usize("rung")?.max(1);
                crate::ladder_cmd::build_from_table(self.f64("ladder_A")?, rungs, &[])
                    .map_err(|e| field_error("ladder_A", e.to_string()))
            }
        }
    }

    /// `constant:<c>`, `log`, `loglog:<power>` or `ladder` (rung `rung`).
    pub fn g_function(&self) -> Result<GFunction, CliError> {
        let spec = self.raw("g").unwrap_or("constant:1");
        let (name, arg) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let number = |a: Option<&str>| -> Result<f64, CliError> {
            a.and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| field_error("g", format!("{name} needs a numeric argument")))
        };
        match name {
            "constant" => Ok(GFunction::Constant(number(arg)?)),
            "log" => Ok(GFunction::Log),
            "loglog" => Ok(GFunction::LogLog {
                power: number(arg)?,
            }),
            "ladder" => {
                let ladder = self.ladder()?;
                let rung = self.usize("rung")?;
                if rung > ladder.rung_count() {
                    return Err(field_error(
                        "rung",
                        format!("ladder has only {} rungs", ladder.rung_count()),
                    ));
                }
                Ok(GFunction::Ladder {
                    ladder: Arc::new(ladder),
                    rung,
                })
            }
            other => Err(field_error("g", format!("unknown g {other:?}"))),
        }
    }

    pub fn solver(&self) -> Result<SolverConfig, CliError> {
        let cfg = SolverConfig {
            p: self.f64("p")?,
            g: self.g_function()?,
            dt: self.f64("dt")?,
            horizon: self.f64("T")?,
            dt_out: self.f64("dt_out")?,
            grid: self.grid()?,
            nonlinearity: self.nonlinearity()?,
            eps: self.f64("eps")?,
        };
        cfg.validate().map_err(|e| {
            let text = e.to_string();
            let field = ["dt_out", "dt", "horizon", "eps", "p"]
                .into_iter()
                .find(|f| text.contains(f))
                .map(|f| if f == "horizon" { "T" } else { f })
                .unwrap_or("solver");
            field_error(field, text)
        })?;
        Ok(cfg)
    }

    pub fn data_spec(&self) -> Result<DataSpec, CliError> {
        match self.raw("data").unwrap_or("gaussian-bump") {
            "gaussian-bump" => Ok(DataSpec::GaussianBump {
                amplitude: self.f64("amplitude")?,
                width: self.f64("width")?,
                center: self.f64("center")?,
            }),
            "eigenmode" => Ok(DataSpec::Eigenmode { n: self.usize("n")? }),
            "random-smooth" => Ok(DataSpec::RandomSmooth {
                seed: self.u64("seed")?,
                scale: self.f64("scale")?,
            }),
            other => Err(field_error("data", format!("unknown profile {other:?}"))),
        }
    }

    pub fn data(&self, grid: RadialGrid) -> Result<WaveState, CliError> {
        self.data_spec()?
            .build(grid)
            .map_err(|e| field_error("data", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_text_and_overrides() {
        let mut cfg = ExperimentConfig::new("linear-exactness");
        cfg.apply_text("# comment\np = 7\n\n dt = 5e-4  # trailing\n").unwrap();
        cfg.set("N", "256").unwrap();
        assert_eq!(cfg.f64("p").unwrap(), 7.0);
        assert_eq!(cfg.f64("dt").unwrap(), 5e-4);
        assert_eq!(cfg.grid().unwrap().len(), 256);
    }

    #[test]
    fn errors_name_the_field() {
        let mut cfg = ExperimentConfig::new("x");
        let err = cfg.apply_text("p = five").map(|_| cfg.f64("p"));
        match err {
            Ok(Err(CliError::Config { field, .. })) => assert_eq!(field, "p"),
            other => panic!("{other:?}"),
        }
        match cfg.set("bogus", "1") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "bogus"),
            other => panic!("{other:?}"),
        }
        match cfg.apply_text("just words") {
            Err(CliError::Config { field, .. }) => assert_eq!(field, "line 1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn g_specs() {
        let mut cfg = ExperimentConfig::new("x");
        cfg.set("g", "loglog:0.5").unwrap();
        assert_eq!(cfg.g_function().unwrap(), GFunction::LogLog { power: 0.5 });
        cfg.set("g", "ladder").unwrap();
        cfg.set("rung", "2").unwrap();
        match cfg.g_function().unwrap() {
            GFunction::Ladder { ladder, rung } => {
                assert_eq!(rung, 2);
                assert_eq!(ladder.rung_count(), 2);
            }
            other => panic!("{other:?}"),
        }
        cfg.set("g", "cubic").unwrap();
        assert!(cfg.g_function().is_err());
    }
}
