//! Plain-text scenario configuration.
//!
//! ```text
//! # comments start with '#'
//! n_robots = 9
//! dt = 0.1
//! q = 3                 # every robot
//! range_std = 0.147     # sensor keys also apply to every robot
//! policy = alg1
//!
//! [robot 4]             # 1-based id
//! q = 1
//!
//! [windows]             # replaces the default schedule
//! [0,10] =
//! (10,20] = 3 5 7 9
//! ```
//!
//! Keys left out keep their defaults. Without a `[windows]` section the
//! default schedule is used, clipped to `duration`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use coopsched_core::scenario::MeasurementWindow;
use coopsched_core::scheduling::Policy;
use coopsched_core::{ScenarioConfig, SensorParams};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    /// 1-based; 0 when the problem is not tied to a line.
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, message: message.into() })
}

const SENSOR_KEYS: [&str; 8] = [
    "velocity_noise_coeff",
    "velocity_noise_floor",
    "angular_velocity_std",
    "heading_std",
    "range_std",
    "bearing_std",
    "max_speed",
    "max_range",
];

fn sensor_field<'a>(p: &'a mut SensorParams, key: &str) -> Option<&'a mut f64> {
    Some(match key {
        "velocity_noise_coeff" => &mut p.velocity_noise_coeff,
        "velocity_noise_floor" => &mut p.velocity_noise_floor,
        "angular_velocity_std" => &mut p.angular_velocity_std,
        "heading_std" => &mut p.heading_std,
        "range_std" => &mut p.range_std,
        "bearing_std" => &mut p.bearing_std,
        "max_speed" => &mut p.max_speed,
        "max_range" => &mut p.max_range,
        _ => return None,
    })
}

fn sensor_value(p: &SensorParams, key: &str) -> f64 {
    let mut copy = *p;
    *sensor_field(&mut copy, key).expect("known sensor key")
}

#[derive(Debug)]
struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
}

enum Section {
    Global,
    Robot(usize),
    Windows,
}

fn number<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .or_else(|_| err(e.line, format!("`{}` expects a number, got `{}`", e.key, e.value)))
}

fn boolean(e: &Entry) -> Result<bool, ConfigError> {
    match e.value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => err(e.line, format!("`{}` expects true or false, got `{}`", e.key, e.value)),
    }
}

/// Parse and validate a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut section = Section::Global;
    let mut global = Vec::new();
    let mut robots: BTreeMap<usize, (usize, Vec<Entry>)> = BTreeMap::new();
    let mut windows: Option<Vec<(usize, MeasurementWindow)>> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if matches!(section, Section::Windows) && body.contains('=') {
            let w = parse_window(line, body)?;
            windows.get_or_insert_with(Vec::new).push((line, w));
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let mut words = name.split_whitespace();
            section = match (words.next(), words.next(), words.next()) {
                (Some("windows"), None, None) => {
                    windows.get_or_insert_with(Vec::new);
                    Section::Windows
                }
                (Some("robot"), Some(id), None) => {
                    let id: usize = id
                        .parse()
                        .ok()
                        .filter(|&i| i >= 1)
                        .map_or_else(|| err(line, format!("bad robot id `{id}`")), Ok)?;
                    if robots.contains_key(&id) {
                        return err(line, format!("robot {id} has two sections"));
                    }
                    robots.insert(id, (line, Vec::new()));
                    Section::Robot(id)
                }
                _ => return err(line, format!("unknown section `[{name}]`")),
            };
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return err(line, format!("expected `key = value`, got `{body}`"));
        };
        let entry = Entry { line, key: key.trim(), value: value.trim() };
        match section {
            Section::Global => global.push(entry),
            Section::Robot(id) => robots.get_mut(&id).expect("section registered").1.push(entry),
            Section::Windows => unreachable!("rows with '=' are parsed above"),
        }
    }

    let mut cfg = ScenarioConfig::default();
    let mut sensor = Vec::new();
    let mut q = None;
    let mut n_robots = None;
    let mut duration = None;
    let mut seen = BTreeMap::new();
    for e in &global {
        if let Some(prev) = seen.insert(e.key, e.line) {
            return err(e.line, format!("`{}` already set on line {prev}", e.key));
        }
        match e.key {
            "n_robots" => n_robots = Some(number::<usize>(e)?),
            "dt" => cfg.dt = number(e)?,
            "duration" => duration = Some(number::<f64>(e)?),
            "spacing" => cfg.spacing = number(e)?,
            "speed" => cfg.speed = number(e)?,
            "turn_rate" => cfg.turn_rate = number(e)?,
            "initial_variance" => cfg.initial_variance = number(e)?,
            "q" => q = Some(number::<usize>(e)?),
            "policy" => {
                cfg.policy = e.value.parse::<Policy>().or_else(|p| err(e.line, p.to_string()))?
            }
            "random_period" => cfg.random_period = number(e)?,
            "seed" => cfg.seed = number(e)?,
            "runs" => cfg.runs = number(e)?,
            "track_bound" => cfg.track_bound = boolean(e)?,
            "heading_drift" => cfg.heading_drift = boolean(e)?,
            "check_invariants" => cfg.check_invariants = boolean(e)?,
            k if SENSOR_KEYS.contains(&k) => sensor.push(e),
            k => return err(e.line, format!("unknown key `{k}`")),
        }
    }
    if let Some(n) = n_robots {
        if n == 0 {
            return err(seen["n_robots"], "n_robots must be at least 1");
        }
        cfg = cfg.with_robots(n);
    }
    if let Some(d) = duration {
        if windows.is_none() {
            cfg = cfg.with_duration(d);
        } else {
            cfg.duration = d;
        }
    }
    if let Some(q) = q {
        cfg = cfg.with_q(q);
    }
    for e in sensor {
        let v: f64 = number(e)?;
        for p in &mut cfg.params {
            *sensor_field(p, e.key).expect("checked above") = v;
        }
    }
    for (id, (header, entries)) in &robots {
        if *id > cfg.n_robots {
            return err(*header, format!("robot {id} does not exist (n_robots = {})", cfg.n_robots));
        }
        let i = id - 1;
        let mut seen = BTreeMap::new();
        for e in entries {
            if let Some(prev) = seen.insert(e.key, e.line) {
                return err(e.line, format!("`{}` already set on line {prev}", e.key));
            }
            if e.key == "q" {
                cfg.q[i] = number(e)?;
            } else if let Some(f) = sensor_field(&mut cfg.params[i], e.key) {
                *f = number(e)?;
            } else {
                return err(e.line, format!("unknown robot key `{}`", e.key));
            }
        }
    }
    if let Some(ws) = windows {
        for (line, w) in &ws {
            if let Some(&id) = w.observers.iter().find(|&&id| id >= cfg.n_robots) {
                return err(*line, format!("robot {} does not exist (n_robots = {})", id + 1, cfg.n_robots));
            }
        }
        cfg.windows = ws.into_iter().map(|(_, w)| w).collect();
    }
    cfg.validate().or_else(|e| err(0, e.to_string()))?;
    Ok(cfg)
}

fn parse_window(line: usize, body: &str) -> Result<MeasurementWindow, ConfigError> {
    let Some((interval, ids)) = body.split_once('=') else {
        return err(line, format!("expected `(start,end] = ids`, got `{body}`"));
    };
    let interval = interval.trim();
    let inclusive = interval.starts_with('[');
    let inner = interval
        .strip_prefix(['(', '['])
        .and_then(|s| s.strip_suffix(']'))
        .ok_or(ConfigError { line, message: format!("bad interval `{interval}`") })?;
    let bounds: Vec<&str> = inner.split([',', ' ']).filter(|s| !s.is_empty()).collect();
    let [start, end] = bounds[..] else {
        return err(line, format!("bad interval `{interval}`"));
    };
    let parse = |s: &str| s.parse::<f64>().or_else(|_| err(line, format!("bad time `{s}`")));
    let (start, end) = (parse(start)?, parse(end)?);
    let mut observers = Vec::new();
    for tok in ids.split([',', ' ', '\t']).filter(|s| !s.is_empty()) {
        if tok == "none" {
            continue;
        }
        match tok.parse::<usize>() {
            Ok(id) if id >= 1 => observers.push(id - 1),
            _ => return err(line, format!("bad robot id `{tok}`")),
        }
    }
    Ok(MeasurementWindow::new(start, end, inclusive, &observers))
}

/// Text that [`parse_config`] maps back to `cfg`.
pub fn serialize_config(cfg: &ScenarioConfig) -> String {
    let mut out = String::new();
    let base_p = cfg.params.first().copied().unwrap_or_default();
    let base_q = cfg.q.first().copied().unwrap_or(1);
    let mut kv = |k: &str, v: &dyn std::fmt::Display| {
        let _ = writeln!(out, "{k} = {v}");
    };
    kv("n_robots", &cfg.n_robots);
    kv("dt", &cfg.dt);
    kv("duration", &cfg.duration);
    kv("spacing", &cfg.spacing);
    kv("speed", &cfg.speed);
    kv("turn_rate", &cfg.turn_rate);
    kv("initial_variance", &cfg.initial_variance);
    kv("q", &base_q);
    kv("policy", &cfg.policy);
    kv("random_period", &cfg.random_period);
    kv("seed", &cfg.seed);
    kv("runs", &cfg.runs);
    kv("track_bound", &cfg.track_bound);
    kv("heading_drift", &cfg.heading_drift);
    kv("check_invariants", &cfg.check_invariants);
    for key in SENSOR_KEYS {
        kv(key, &sensor_value(&base_p, key));
    }
    for (i, (p, q)) in cfg.params.iter().zip(&cfg.q).enumerate() {
        let diffs: Vec<&str> =
            SENSOR_KEYS.into_iter().filter(|k| sensor_value(p, k) != sensor_value(&base_p, k)).collect();
        if diffs.is_empty() && *q == base_q {
            continue;
        }
        let _ = writeln!(out, "\n[robot {}]", i + 1);
        if *q != base_q {
            let _ = writeln!(out, "q = {q}");
        }
        for k in diffs {
            let _ = writeln!(out, "{k} = {}", sensor_value(p, k));
        }
    }
    out.push_str("\n[windows]\n");
    for w in &cfg.windows {
        let open = if w.start_inclusive { '[' } else { '(' };
        let ids: Vec<String> = w.observers.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "{open}{},{}] = {}", w.start, w.end, ids.join(" "));
    }
    out
}
