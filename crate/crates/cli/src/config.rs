//! Flat `key = value` scenario configs and plain-text antenna layouts.
//!
//! Keys mirror the scenario field names. Rates (`rho`, `nu`) are quoted in
//! the unit named by `time_unit` (`s` or `min`) and converted to SI seconds
//! on load.

use ofdma_loss::model::{
    CellGeometry, Mode, OutagePolicy, RadioParams, Scenario, Shadowing, TrafficParams,
};
use ofdma_loss::multicell::AntennaLayout;
use std::collections::HashMap;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse_pairs(text: &str) -> Result<HashMap<String, String>, ConfigError> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().to_string();
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

fn take_f64(map: &HashMap<String, String>, key: &str) -> Result<f64, ConfigError> {
    let raw = map.get(key).ok_or_else(|| ConfigError(format!("missing key `{key}`")))?;
    raw.parse().map_err(|_| ConfigError(format!("key `{key}`: `{raw}` is not a number")))
}

/// Parse a scenario config from text. Unknown keys are rejected so typos
/// cannot silently fall back to defaults.
pub fn parse_scenario(text: &str) -> Result<Scenario, ConfigError> {
    let map = parse_pairs(text)?;
    let known = [
        "mode",
        "time_unit",
        "gamma",
        "c0",
        "w",
        "p_ratio",
        "mean_gain",
        "beta_min",
        "rho",
        "nu",
        "radius",
        "mu_db",
        "sigma_db",
        "outage_policy",
    ];
    for key in map.keys() {
        if !known.contains(&key.as_str()) {
            return Err(ConfigError(format!("unknown key `{key}`")));
        }
    }

    let mode = match map.get("mode").map(String::as_str) {
        Some("deterministic") => Mode::Deterministic,
        Some("shadowed") => Mode::Shadowed,
        Some("multicell") => Mode::Multicell,
        Some(other) => {
            return Err(ConfigError(format!(
                "mode must be deterministic, shadowed or multicell, got `{other}`"
            )))
        }
        None => return Err(ConfigError("missing key `mode`".into())),
    };
    let per_second: f64 = match map.get("time_unit").map(String::as_str) {
        Some("s") | None => 1.0,
        Some("min") => 1.0 / 60.0,
        Some(other) => {
            return Err(ConfigError(format!("time_unit must be `s` or `min`, got `{other}`")))
        }
    };
    let shadowing = match (map.get("mu_db"), map.get("sigma_db")) {
        (None, None) => None,
        _ => Some(Shadowing {
            mu_db: take_f64(&map, "mu_db")?,
            sigma_db: take_f64(&map, "sigma_db")?,
        }),
    };
    let outage_policy = match map.get("outage_policy").map(String::as_str) {
        Some("exclude") => OutagePolicy::Exclude,
        Some("clamp") => OutagePolicy::ClampToNmax,
        Some(other) => {
            return Err(ConfigError(format!(
                "outage_policy must be `clamp` or `exclude`, got `{other}`"
            )))
        }
        // single-cell analysis clamps by default; multicell excludes, since
        // an inadmissible user there is simply not served
        None => {
            if mode == Mode::Multicell {
                OutagePolicy::Exclude
            } else {
                OutagePolicy::ClampToNmax
            }
        }
    };

    let scenario = Scenario {
        radio: RadioParams {
            gamma: take_f64(&map, "gamma")?,
            c0: take_f64(&map, "c0")?,
            w: take_f64(&map, "w")?,
            p_ratio: take_f64(&map, "p_ratio")?,
            mean_gain: take_f64(&map, "mean_gain")?,
            beta_min: take_f64(&map, "beta_min")?,
        },
        traffic: TrafficParams {
            rho: take_f64(&map, "rho")? * per_second,
            nu: take_f64(&map, "nu")? * per_second,
        },
        cell: CellGeometry { radius: take_f64(&map, "radius")? },
        shadowing,
        mode,
        outage_policy,
    };
    scenario.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

/// Parse an antenna layout: one `x y` pair per line, serving antenna first.
pub fn parse_layout(text: &str) -> Result<AntennaLayout, ConfigError> {
    let mut positions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<f64, ConfigError> {
            tok.ok_or_else(|| ConfigError(format!("line {}: expected `x y`", lineno + 1)))?
                .parse()
                .map_err(|_| ConfigError(format!("line {}: bad coordinate", lineno + 1)))
        };
        let x = parse(it.next())?;
        let y = parse(it.next())?;
        if it.next().is_some() {
            return Err(ConfigError(format!("line {}: expected exactly two columns", lineno + 1)));
        }
        positions.push((x, y));
    }
    if positions.is_empty() {
        return Err(ConfigError("layout has no antennas".into()));
    }
    let layout = AntennaLayout { serving: positions[0], interferers: positions[1..].to_vec() };
    layout.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(layout)
}

pub fn load_layout(path: &Path) -> Result<AntennaLayout, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read layout {}: {e}", path.display())))?;
    parse_layout(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SAMPLE: &str = "\
# reference cell
mode = deterministic
time_unit = min
gamma = 2.8
c0 = 2e5
w = 2.5e5
p_ratio = 1e6
mean_gain = 0.08333333333333333
beta_min = 0.2
rho = 0.0006   # arrivals per minute per m^2
nu = 1.0
radius = 100
mu_db = 6
sigma_db = 3.1622776601683795
";

    #[test]
    fn parses_reference_config() {
        let sc = parse_scenario(SAMPLE).unwrap();
        assert_eq!(sc.mode, Mode::Deterministic);
        assert_relative_eq!(sc.traffic.rho, 1e-5, max_relative = 1e-12);
        assert_relative_eq!(sc.traffic.nu, 1.0 / 60.0, max_relative = 1e-12);
        assert_relative_eq!(sc.mean_user_count(), 18.8495559215, max_relative = 1e-9);
        assert_eq!(sc.outage_policy, OutagePolicy::ClampToNmax);
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(parse_scenario(&format!("{SAMPLE}\nbogus = 1\n")).is_err());
        assert!(parse_scenario(&format!("{SAMPLE}\ngamma = 3\n")).is_err());
    }

    #[test]
    fn rejects_missing_and_malformed() {
        assert!(parse_scenario("mode = deterministic\n").is_err());
        assert!(parse_scenario(&SAMPLE.replace("2.8", "fast")).is_err());
        assert!(parse_scenario(&SAMPLE.replace("min", "fortnight")).is_err());
        assert!(parse_scenario(&SAMPLE.replace("mode = deterministic", "mode = warp")).is_err());
    }

    #[test]
    fn seconds_unit_passthrough() {
        let text = SAMPLE.replace("time_unit = min", "time_unit = s");
        let sc = parse_scenario(&text).unwrap();
        assert_relative_eq!(sc.traffic.rho, 6e-4, max_relative = 1e-12);
    }

    #[test]
    fn multicell_defaults_to_exclude() {
        let text = SAMPLE.replace("mode = deterministic", "mode = multicell");
        let sc = parse_scenario(&text).unwrap();
        assert_eq!(sc.outage_policy, OutagePolicy::Exclude);
        let clamped = parse_scenario(&format!("{text}outage_policy = clamp\n")).unwrap();
        assert_eq!(clamped.outage_policy, OutagePolicy::ClampToNmax);
    }

    #[test]
    fn parses_layout() {
        let l = parse_layout("0 0\n200 0\n100 173.20508075688772 # neighbor\n").unwrap();
        assert_eq!(l.serving, (0.0, 0.0));
        assert_eq!(l.interferers.len(), 2);
        assert!(parse_layout("").is_err());
        assert!(parse_layout("0 0\n0 0\n").is_err());
        assert!(parse_layout("1 2 3\n").is_err());
    }
}
