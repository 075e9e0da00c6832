//! The working-directory input files.
//!
//! A run directory holds `inputFile` (or `inputFile.py`), `bertiniInput_variables`,
//! `bertiniInput_equations` and optionally `bertiniInput_trackingOptions`.

use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde_json::Value;

use crate::error::{Error, ParseError, Result};
use crate::polysys::{parse_equations, parse_variables, PolySystem};
use crate::tracker::TrackSettings;

pub const INPUT_FILE: &str = "inputFile";
pub const VARIABLES_FILE: &str = "bertiniInput_variables";
pub const EQUATIONS_FILE: &str = "bertiniInput_equations";
pub const TRACKING_FILE: &str = "bertiniInput_trackingOptions";

#[derive(Debug, Clone, PartialEq)]
pub struct InputConfig {
    pub degrees: Vec<Vec<u32>>,
    pub verbose: u8,
    pub algebraic_torus_variable_groups: Vec<usize>,
    pub max_processes: usize,
    pub depth_first: bool,
    pub seed: Option<u64>,
    pub final_tol: Option<f64>,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            degrees: Vec::new(),
            verbose: 1,
            algebraic_torus_variable_groups: Vec::new(),
            max_processes: 1,
            depth_first: true,
            seed: None,
            final_tol: None,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

fn parse_value(raw: &str) -> Option<Value> {
    let v = raw.trim();
    match v {
        "True" | "true" => return Some(Value::Bool(true)),
        "False" | "false" => return Some(Value::Bool(false)),
        _ => {}
    }
    serde_json::from_str(v).ok()
}

fn int_matrix(v: &Value) -> Option<Vec<Vec<u32>>> {
    v.as_array()?
        .iter()
        .map(|row| {
            row.as_array()?
                .iter()
                .map(|d| d.as_u64().and_then(|d| u32::try_from(d).ok()))
                .collect()
        })
        .collect()
}

fn int_list(v: &Value) -> Option<Vec<usize>> {
    v.as_array()?
        .iter()
        .map(|d| d.as_u64().map(|d| d as usize))
        .collect()
}

fn as_bool(v: &Value) -> Option<bool> {
    v.as_bool().or_else(|| v.as_u64().filter(|&n| n <= 1).map(|n| n == 1))
}

/// Parses the `key = value` configuration grammar of `inputFile`.
pub fn parse_input_file(text: &str) -> Result<InputConfig, ParseError> {
    let mut cfg = InputConfig::default();
    let mut saw_degrees = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = strip_comment(raw).trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, format!("expected `key = value`, found {body:?}")))?;
        let key = key.trim();
        let value = parse_value(value)
            .ok_or_else(|| ParseError::new(line, format!("cannot parse value of {key}")))?;
        let bad = |what: &str| ParseError::new(line, format!("{key} must be {what}"));
        match key {
            "degrees" => {
                cfg.degrees = int_matrix(&value).ok_or_else(|| bad("a list of integer lists"))?;
                saw_degrees = true;
            }
            "verbose" => {
                cfg.verbose = value
                    .as_u64()
                    .filter(|&v| v <= 1)
                    .ok_or_else(|| bad("0 or 1"))? as u8
            }
            "algebraicTorusVariableGroups" => {
                cfg.algebraic_torus_variable_groups =
                    int_list(&value).ok_or_else(|| bad("a list of group indices"))?
            }
            "maxProcesses" => {
                cfg.max_processes = value
                    .as_u64()
                    .filter(|&v| v >= 1)
                    .ok_or_else(|| bad("a positive integer"))? as usize
            }
            "depthFirst" => cfg.depth_first = as_bool(&value).ok_or_else(|| bad("True or False"))?,
            "seed" => cfg.seed = Some(value.as_u64().ok_or_else(|| bad("a non-negative integer"))?),
            other => warn!("inputFile line {line}: ignoring unrecognized key {other}"),
        }
    }
    if !saw_degrees {
        return Err(ParseError::new(text.lines().count().max(1), "missing degrees"));
    }
    Ok(cfg)
}

/// Applies `Key: value;` entries of the tracking-options file to `settings`.
pub fn parse_tracking_options(text: &str, settings: &mut TrackSettings) -> Result<(), ParseError> {
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        for stmt in strip_comment(raw).split(';') {
            let stmt = stmt.trim();
            if stmt.is_empty() || stmt.eq_ignore_ascii_case("CONFIG") || stmt.eq_ignore_ascii_case("END") {
                continue;
            }
            let (key, value) = stmt
                .split_once(':')
                .ok_or_else(|| ParseError::new(line, format!("expected `Key: value;`, found {stmt:?}")))?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "FinalTol" => {
                    settings.final_tol = value
                        .parse::<f64>()
                        .ok()
                        .filter(|v| *v > 0.0 && v.is_finite())
                        .ok_or_else(|| ParseError::new(line, "FinalTol must be a positive real"))?
                }
                "MaxNumberSteps" => {
                    settings.max_steps = value
                        .parse::<usize>()
                        .ok()
                        .filter(|v| *v > 0)
                        .ok_or_else(|| ParseError::new(line, "MaxNumberSteps must be a positive integer"))?
                }
                other => warn!("{TRACKING_FILE} line {line}: ignoring unrecognized option {other}"),
            }
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn input_file_path(dir: &Path) -> PathBuf {
    let plain = dir.join(INPUT_FILE);
    let py = dir.join(format!("{INPUT_FILE}.py"));
    if !plain.is_file() && py.is_file() {
        py
    } else {
        plain
    }
}

fn parse_err(file: &str) -> impl Fn(ParseError) -> Error + '_ {
    move |source| Error::Parse {
        file: file.to_string(),
        source,
    }
}

/// Reads and cross-validates the input files in `dir`.
pub fn load_inputs(dir: &Path) -> Result<(PolySystem, InputConfig, TrackSettings)> {
    let input_path = input_file_path(dir);
    let mut config = parse_input_file(&read(&input_path)?).map_err(parse_err(INPUT_FILE))?;

    let groups = parse_variables(&read(&dir.join(VARIABLES_FILE))?)?;
    let system = parse_equations(&read(&dir.join(EQUATIONS_FILE))?, &groups)?;

    let mut settings = TrackSettings::default();
    let tracking = dir.join(TRACKING_FILE);
    if tracking.is_file() {
        parse_tracking_options(&read(&tracking)?, &mut settings).map_err(parse_err(TRACKING_FILE))?;
        config.final_tol = Some(settings.final_tol);
    }
    settings.validate()?;

    check_degrees(&system, &config.degrees)?;
    if let Some(&j) = config
        .algebraic_torus_variable_groups
        .iter()
        .find(|&&j| j >= system.groups().len())
    {
        return Err(Error::Config(format!(
            "algebraicTorusVariableGroups entry {j} is out of range ({} groups)",
            system.groups().len()
        )));
    }
    Ok((system, config, settings))
}

/// Declared degrees must match the parsed system row by row.
pub fn check_degrees(system: &PolySystem, declared: &[Vec<u32>]) -> Result<()> {
    if declared.len() != system.len() {
        return Err(Error::Config(format!(
            "degrees lists {} polynomials but the system has {}",
            declared.len(),
            system.len()
        )));
    }
    for ((name, d), c) in system.names().iter().zip(declared).zip(system.degrees()) {
        if d != c {
            return Err(Error::DegreeMismatch {
                name: name.clone(),
                declared: d.clone(),
                computed: c.clone(),
            });
        }
    }
    Ok(())
}
