//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Keys carry their SI unit in the name. Anything left out takes the
//! reference-design default, so a file only has to list what differs.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use syncbuck_core::numerics::{Polynomial, RationalTF};
use syncbuck_core::sfra::InjectionSpec;
use syncbuck_core::{ConverterConfig, InjectionPoint, Modulation, SamplingPosition};

use crate::error::CliError;

/// Everything a command needs besides its flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub converter: ConverterConfig,
    pub sync_enabled: bool,
    pub series_n: Option<usize>,
    pub model_grid: GridSpec,
    pub sfra_grid: SfraGrid,
    pub sfra: InjectionSpec,
    pub sim_cycles: usize,
    pub sim_points_per_cycle: usize,
    pub out_dir: PathBuf,
    /// Whether the file sets any circuit value explicitly.
    pub circuit_given: bool,
}

/// Log grid by density, for analytic curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub f_min: f64,
    pub f_max: f64,
    pub points_per_decade: usize,
}

/// Log grid by count, for measured sweeps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfraGrid {
    pub f_min: f64,
    pub f_max: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn frequencies(&self) -> Vec<f64> {
        syncbuck_core::bode::log_grid(self.f_min, self.f_max, self.points_per_decade)
    }
}

impl SfraGrid {
    pub fn frequencies(&self) -> Vec<f64> {
        syncbuck_core::bode::log_spaced(self.f_min, self.f_max, self.points)
    }
}

const CIRCUIT_KEYS: &[&str] = &["V_IN_V", "L_f_H", "R_L_Ohm", "C_f_F", "R_C_Ohm", "R_LD_Ohm"];

pub const KEYS: &[&str] = &[
    "V_IN_V",
    "L_f_H",
    "R_L_Ohm",
    "C_f_F",
    "R_C_Ohm",
    "R_LD_Ohm",
    "H_i",
    "T_S_s",
    "CNTR_MAX",
    "K_p",
    "K_i_per_s",
    "i_ref",
    "modulation",
    "sampling",
    "plant_num",
    "plant_den",
    "plant_gain",
    "sync",
    "series_N",
    "model_f_min_Hz",
    "model_f_max_Hz",
    "model_points_per_decade",
    "sfra_f_min_Hz",
    "sfra_f_max_Hz",
    "sfra_points",
    "sfra_amplitude",
    "sfra_settle_cycles",
    "sfra_measure_periods",
    "sim_cycles",
    "sim_points_per_cycle",
    "out_dir",
];

/// One `key = value` line with its 1-based line number.
struct Entry {
    line: usize,
    value: String,
}

struct Entries<'a> {
    origin: &'a str,
    map: HashMap<String, Entry>,
}

impl Entries<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> CliError {
        CliError::Config(format!("{}:{line}: {}", self.origin, msg.into()))
    }

    fn num(&self, key: &str, default: f64, domain: Domain) -> Result<f64, CliError> {
        let Some(e) = self.map.get(key) else { return Ok(default) };
        let v: f64 = e
            .value
            .parse()
            .map_err(|_| self.err(e.line, format!("{key}: `{}` is not a number", e.value)))?;
        let ok = v.is_finite()
            && match domain {
                Domain::Any => true,
                Domain::Positive => v > 0.0,
                Domain::NonNegative => v >= 0.0,
            };
        if !ok {
            return Err(self.err(e.line, format!("{key}: {v} must be {}", domain.describe())));
        }
        Ok(v)
    }

    fn count(&self, key: &str, default: usize, min: usize) -> Result<usize, CliError> {
        let Some(e) = self.map.get(key) else { return Ok(default) };
        let v: usize = e
            .value
            .parse()
            .map_err(|_| self.err(e.line, format!("{key}: `{}` is not a non-negative integer", e.value)))?;
        if v < min {
            return Err(self.err(e.line, format!("{key}: must be at least {min}")));
        }
        Ok(v)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|err| self.err(e.line, format!("{key}: {err}"))),
        }
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, CliError> {
        let Some(e) = self.map.get(key) else { return Ok(default) };
        match e.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(self.err(e.line, format!("{key}: expected true or false, got `{}`", e.value))),
        }
    }

    /// Coefficients in descending powers of s, separated by commas or spaces.
    fn poly(&self, key: &str) -> Result<Option<(usize, Polynomial)>, CliError> {
        let Some(e) = self.map.get(key) else { return Ok(None) };
        let coeffs = e
            .value
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| self.err(e.line, format!("{key}: `{t}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(self.err(e.line, format!("{key}: no coefficients")));
        }
        Ok(Some((e.line, Polynomial::from_descending(&coeffs))))
    }
}

#[derive(Clone, Copy)]
enum Domain {
    Any,
    Positive,
    NonNegative,
}

impl Domain {
    fn describe(self) -> &'static str {
        match self {
            Domain::Any => "finite",
            Domain::Positive => "positive",
            Domain::NonNegative => "non-negative",
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses config text; `origin` prefixes error messages.
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut entries = Entries {
            origin,
            map: HashMap::new(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(entries.err(line, format!("expected `key = value`, got `{content}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(entries.err(line, format!("unknown key `{key}`")));
            }
            if value.is_empty() {
                return Err(entries.err(line, format!("{key}: missing value")));
            }
            if let Some(prev) = entries.map.get(key) {
                return Err(entries.err(line, format!("{key}: already set on line {}", prev.line)));
            }
            entries.map.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Self::from_entries(&entries)
    }

    fn from_entries(e: &Entries) -> Result<Self, CliError> {
        let d = ConverterConfig::table3();
        let mut converter = ConverterConfig {
            v_in: e.num("V_IN_V", d.v_in, Domain::NonNegative)?,
            l_f: e.num("L_f_H", d.l_f, Domain::Positive)?,
            r_l: e.num("R_L_Ohm", d.r_l, Domain::NonNegative)?,
            c_f: e.num("C_f_F", d.c_f, Domain::Positive)?,
            r_c: e.num("R_C_Ohm", d.r_c, Domain::NonNegative)?,
            r_ld: e.num("R_LD_Ohm", d.r_ld, Domain::Positive)?,
            h_i: e.num("H_i", d.h_i, Domain::Positive)?,
            t_s: e.num("T_S_s", d.t_s, Domain::Positive)?,
            cntr_max: e.num("CNTR_MAX", d.cntr_max, Domain::Positive)?,
            k_p: e.num("K_p", d.k_p, Domain::Any)?,
            k_i: e.num("K_i_per_s", d.k_i, Domain::Any)?,
            i_ref: e.num("i_ref", d.i_ref, Domain::Any)?,
            modulation: e.parsed::<Modulation>("modulation", d.modulation)?,
            sampling: e.parsed::<SamplingPosition>("sampling", d.sampling)?,
            plant_override: None,
        };

        match (e.poly("plant_num")?, e.poly("plant_den")?) {
            (None, None) => {
                if let Some(g) = e.map.get("plant_gain") {
                    return Err(e.err(g.line, "plant_gain needs plant_num and plant_den"));
                }
            }
            (Some((line, _)), None) | (None, Some((line, _))) => {
                return Err(e.err(line, "plant_num and plant_den must be given together"));
            }
            (Some((line, num)), Some((_, den))) => {
                let gain = e.num("plant_gain", 1.0, Domain::Any)?;
                let tf = RationalTF::continuous(num.scale(gain), den).map_err(|err| e.err(line, format!("plant: {err}")))?;
                if !tf.is_strictly_proper() {
                    return Err(e.err(line, "plant: transfer function must be strictly proper"));
                }
                converter.plant_override = Some(tf);
            }
        }
        converter
            .validate()
            .map_err(|err| CliError::Config(format!("{}: {err}", e.origin)))?;

        let f_s = converter.f_s();
        let model_grid = GridSpec {
            f_min: e.num("model_f_min_Hz", 10.0, Domain::Positive)?,
            f_max: e.num("model_f_max_Hz", 2.0 * f_s, Domain::Positive)?,
            points_per_decade: e.count("model_points_per_decade", 200, 1)?,
        };
        check_range(e, "model_f_max_Hz", model_grid.f_min, model_grid.f_max)?;
        let sfra_grid = SfraGrid {
            f_min: e.num("sfra_f_min_Hz", 100.0, Domain::Positive)?,
            f_max: e.num("sfra_f_max_Hz", 0.49 * f_s, Domain::Positive)?,
            points: e.count("sfra_points", 30, 0)?,
        };
        check_range(e, "sfra_f_max_Hz", sfra_grid.f_min, sfra_grid.f_max)?;

        let mut sfra = InjectionSpec::new(InjectionPoint::DigitalSummingNode, 0.0);
        sfra.amplitude = e.num("sfra_amplitude", sfra.amplitude, Domain::Positive)?;
        sfra.measure_periods = e.count("sfra_measure_periods", sfra.measure_periods, 1)?;
        if e.map.contains_key("sfra_settle_cycles") {
            sfra.settle_cycles = Some(e.count("sfra_settle_cycles", 0, 0)?);
        }

        Ok(Self {
            converter,
            sync_enabled: e.flag("sync", true)?,
            series_n: match e.map.get("series_N") {
                Some(_) => Some(e.count("series_N", 0, 1)?),
                None => None,
            },
            model_grid,
            sfra_grid,
            sfra,
            sim_cycles: e.count("sim_cycles", 10, 1)?,
            sim_points_per_cycle: e.count("sim_points_per_cycle", 200, 1)?,
            out_dir: e.map.get("out_dir").map_or_else(|| PathBuf::from("out"), |v| PathBuf::from(&v.value)),
            circuit_given: CIRCUIT_KEYS.iter().any(|k| e.map.contains_key(*k)),
        })
    }

    /// The converter the simulator runs. A measured plant override only
    /// feeds the loop model, so it is dropped here; the file must then
    /// describe the circuit itself rather than rely on defaults.
    pub fn simulated_converter(&self) -> Result<ConverterConfig, CliError> {
        if self.converter.plant_override.is_none() {
            return Ok(self.converter.clone());
        }
        if !self.circuit_given {
            return Err(CliError::Config(
                "a measured plant override cannot be simulated; give the circuit values (V_IN_V, L_f_H, ...) as well".into(),
            ));
        }
        Ok(ConverterConfig {
            plant_override: None,
            ..self.converter.clone()
        })
    }
}

fn check_range(e: &Entries, key: &str, lo: f64, hi: f64) -> Result<(), CliError> {
    if hi < lo {
        let line = e.map.get(key).map_or(0, |x| x.line);
        return Err(e.err(line, format!("{key}: {hi} is below the lower bound {lo}")));
    }
    Ok(())
}
