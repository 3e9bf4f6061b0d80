//! Scenario files: TOML with unit-suffixed literals.
//!
//! ```toml
//! schema_version = 1
//! name = "array2"
//! engine = "tight_binding"
//!
//! [array]
//! a = "14um"
//! length = "28mm"
//! lambda = "1610nm"
//! delta = "3percm"
//!
//! [profile]
//! kind = "sinusoidal"
//! amplitude = "13um"
//! period = "4mm"
//!
//! [excitation]
//! single_site = 0
//! ```
//!
//! The full grammar is documented in `docs/formats.md`.

use std::ops::Range;

use serde::Deserialize;
use toml::{Spanned, Table, Value};

use super::units::{format_inverse_length, format_length, InverseLength, Length};
use crate::continuum::Grid;
use crate::error::{Error, Result};
use crate::experiments::{Engine, Excitation, Observable, ScenarioConfig, Sweep, SweepAxis};
use crate::geometry::{ArraySpec, BendingProfile, REFERENCE_SUBSTRATE_INDEX};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Spanned<u32>,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    engine: Option<Engine>,
    array: Spanned<RawArray>,
    #[serde(default)]
    profile: Option<Spanned<RawProfile>>,
    excitation: Spanned<RawExcitation>,
    #[serde(default)]
    sweep: Option<Spanned<RawSweep>>,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    numerics: Option<RawNumerics>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawArray {
    a: Spanned<Length>,
    #[serde(default)]
    sites: Option<Spanned<usize>>,
    length: Spanned<Length>,
    #[serde(default)]
    n_s: Option<Spanned<f64>>,
    lambda: Spanned<Length>,
    #[serde(default)]
    delta: Option<Spanned<InverseLength>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProfile {
    kind: Spanned<String>,
    amplitude: Option<Spanned<Length>>,
    period: Option<Spanned<Length>>,
    phase: Option<f64>,
    tilt: Option<f64>,
    radius: Option<Spanned<Length>>,
    z: Option<Vec<Length>>,
    x: Option<Vec<Length>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExcitation {
    single_site: Option<i64>,
    gaussian: Option<RawGaussian>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGaussian {
    width: Spanned<Length>,
    #[serde(default)]
    center: Option<Length>,
    #[serde(default)]
    tilt: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: SweepAxis,
    values: Spanned<Vec<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default)]
    observables: Option<Vec<Observable>>,
    #[serde(default)]
    z_points: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    grid_points: Option<usize>,
    #[serde(default)]
    grid_spacing: Option<Length>,
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

struct Source<'a> {
    path: &'a str,
    text: &'a str,
}

impl Source<'_> {
    fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> Error {
        let (line, column) = span.map_or((0, 0), |s| line_column(self.text, s.start));
        Error::Parse {
            path: self.path.to_string(),
            line,
            column,
            message: message.into(),
        }
    }

    fn at<T>(&self, s: &Spanned<T>, message: impl Into<String>) -> Error {
        self.error(Some(s.span()), message)
    }
}

fn positive(src: &Source<'_>, v: &Spanned<Length>, what: &str) -> Result<f64> {
    let x = v.get_ref().0;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(src.at(v, format!("{what} must be positive, got {}", format_length(x))))
    }
}

fn convert_profile(src: &Source<'_>, p: &Spanned<RawProfile>) -> Result<BendingProfile> {
    let raw = p.get_ref();
    let need = |v: &Option<Spanned<Length>>, what: &str| -> Result<f64> {
        match v {
            Some(s) => positive(src, s, what),
            None => Err(src.at(p, format!("{} profile needs `{what}`", raw.kind.get_ref()))),
        }
    };
    let unused = |present: bool, key: &str| -> Result<()> {
        if present {
            Err(src.at(p, format!("`{key}` does not apply to a {} profile", raw.kind.get_ref())))
        } else {
            Ok(())
        }
    };
    let profile = match raw.kind.get_ref().as_str() {
        "straight" => {
            unused(raw.amplitude.is_some() || raw.period.is_some() || raw.phase.is_some(), "amplitude/period/phase")?;
            unused(raw.tilt.is_some() || raw.radius.is_some() || raw.z.is_some() || raw.x.is_some(), "tilt/radius/z/x")?;
            BendingProfile::Straight
        }
        "sinusoidal" => {
            unused(raw.tilt.is_some() || raw.radius.is_some() || raw.z.is_some() || raw.x.is_some(), "tilt/radius/z/x")?;
            let amplitude = match &raw.amplitude {
                Some(a) if a.get_ref().0 < 0.0 => {
                    return Err(src.at(a, format!(
                        "amplitude must be non-negative, got {}",
                        format_length(a.get_ref().0)
                    )))
                }
                Some(a) => a.get_ref().0,
                None => return Err(src.at(p, "sinusoidal profile needs `amplitude`")),
            };
            BendingProfile::sinusoidal(amplitude, need(&raw.period, "period")?, raw.phase.unwrap_or(0.0))
                .map_err(|e| src.at(p, e.to_string()))?
        }
        "zigzag" => {
            unused(raw.amplitude.is_some() || raw.phase.is_some() || raw.radius.is_some() || raw.z.is_some() || raw.x.is_some(), "amplitude/phase/radius/z/x")?;
            let tilt = raw.tilt.ok_or_else(|| src.at(p, "zigzag profile needs `tilt`"))?;
            BendingProfile::zigzag(tilt, need(&raw.period, "period")?).map_err(|e| src.at(p, e.to_string()))?
        }
        "circular" => {
            unused(raw.amplitude.is_some() || raw.period.is_some() || raw.phase.is_some() || raw.tilt.is_some() || raw.z.is_some() || raw.x.is_some(), "amplitude/period/phase/tilt/z/x")?;
            BendingProfile::circular(need(&raw.radius, "radius")?).map_err(|e| src.at(p, e.to_string()))?
        }
        "sampled" => {
            unused(raw.amplitude.is_some() || raw.period.is_some() || raw.phase.is_some() || raw.tilt.is_some() || raw.radius.is_some(), "amplitude/period/phase/tilt/radius")?;
            let (z, x) = match (&raw.z, &raw.x) {
                (Some(z), Some(x)) => (z, x),
                _ => return Err(src.at(p, "sampled profile needs `z` and `x` lists")),
            };
            BendingProfile::sampled(z.iter().map(|v| v.0).collect(), x.iter().map(|v| v.0).collect())
                .map_err(|e| src.at(p, e.to_string()))?
        }
        other => {
            return Err(src.at(
                &raw.kind,
                format!("unknown profile kind `{other}`; expected straight, sinusoidal, zigzag, circular or sampled"),
            ))
        }
    };
    Ok(profile)
}

fn sweep_value(src: &Source<'_>, values: &Spanned<Vec<Value>>, axis: SweepAxis, v: &Value) -> Result<f64> {
    let number = |v: &Value| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    };
    let parsed = match axis {
        SweepAxis::Gamma => number(v).ok_or_else(|| "Γ sweep values are plain numbers".to_string()),
        _ => match v {
            Value::String(s) => super::units::parse_length(s),
            _ => Err("length sweep values need a unit suffix, e.g. \"4mm\"".to_string()),
        },
    };
    parsed.map_err(|m| src.at(values, m))
}

fn convert(src: &Source<'_>, raw: RawConfig) -> Result<ScenarioConfig> {
    if *raw.schema_version.get_ref() != SCHEMA_VERSION {
        return Err(src.at(
            &raw.schema_version,
            format!(
                "unsupported schema_version {}; this build reads version {SCHEMA_VERSION}",
                raw.schema_version.get_ref()
            ),
        ));
    }
    let arr = raw.array.get_ref();
    let a = positive(src, &arr.a, "a")?;
    let length = positive(src, &arr.length, "length")?;
    let wavelength = positive(src, &arr.lambda, "lambda")?;
    let sites = arr.sites.as_ref().map_or(crate::experiments::SITE_COUNT, |s| *s.get_ref());
    let n_s = arr.n_s.as_ref().map_or(REFERENCE_SUBSTRATE_INDEX, |s| *s.get_ref());
    let spec = ArraySpec::new(a, sites, length, n_s, wavelength).map_err(|e| src.at(&raw.array, e.to_string()))?;
    let coupling = match &arr.delta {
        Some(d) if !(d.get_ref().0 >= 0.0) => {
            return Err(src.at(d, "delta must be non-negative"))
        }
        d => d.as_ref().map(|d| d.get_ref().0),
    };

    let profile = match &raw.profile {
        Some(p) => convert_profile(src, p)?,
        None => BendingProfile::Straight,
    };
    profile.validate_for(&spec).map_err(|e| match &raw.profile {
        Some(p) => src.at(p, e.to_string()),
        None => src.error(None, e.to_string()),
    })?;

    let exc = raw.excitation.get_ref();
    let excitation = match (&exc.single_site, &exc.gaussian) {
        (Some(n), None) => {
            if !spec.site_indices().contains(n) {
                return Err(src.at(&raw.excitation, format!("site {n} is not in the array")));
            }
            Excitation::SingleSite(*n)
        }
        (None, Some(g)) => Excitation::Gaussian {
            width: positive(src, &g.width, "width")?,
            center: g.center.map_or(0.0, |c| c.0),
            tilt: g.tilt.unwrap_or(0.0),
        },
        _ => {
            return Err(src.at(
                &raw.excitation,
                "excitation needs exactly one of `single_site` or `gaussian`",
            ))
        }
    };

    let sweep = match &raw.sweep {
        Some(s) => {
            let rs = s.get_ref();
            let values = rs
                .values
                .get_ref()
                .iter()
                .map(|v| sweep_value(src, &rs.values, rs.axis, v))
                .collect::<Result<Vec<_>>>()?;
            let up = values.windows(2).all(|w| w[1] > w[0]);
            let down = values.windows(2).all(|w| w[1] < w[0]);
            if !(up || down) {
                return Err(src.at(&rs.values, "sweep values must be strictly monotone"));
            }
            Some(Sweep { axis: rs.axis, values })
        }
        None => None,
    };

    let name = raw.name.unwrap_or_else(|| "scenario".into());
    let mut config = ScenarioConfig::new(&name, spec, profile);
    config.coupling = coupling;
    config.excitation = excitation;
    config.sweep = sweep;
    if let Some(e) = raw.engine {
        config.engine = e;
    }
    if let Some(o) = raw.output {
        if let Some(obs) = o.observables {
            config.outputs = obs;
        }
        if let Some(z) = o.z_points {
            config.z_points = z;
        }
    }
    if let Some(n) = raw.numerics {
        if let Some(t) = n.tolerance {
            config.tolerance = t;
        }
        let points = n.grid_points.unwrap_or(config.grid.points);
        let spacing = n.grid_spacing.map_or(config.grid.spacing, |s| s.0);
        config.grid = Grid::new(points, spacing).map_err(|e| src.error(None, e.to_string()))?;
    }
    config.validate().map_err(|e| src.error(None, e.to_string()))?;
    Ok(config)
}

fn parse_raw(path: &str, text: &str) -> Result<ScenarioConfig> {
    let src = Source { path, text };
    let raw: RawConfig = toml::from_str(text).map_err(|e| src.error(e.span(), e.message()))?;
    convert(&src, raw)
}

/// Override value: a TOML literal, or a bare string when it does not parse.
fn override_value(text: &str) -> Value {
    format!("v = {text}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

fn apply_override(table: &mut Table, assignment: &str) -> Result<()> {
    let bad = |m: String| Error::Config(format!("override `{assignment}`: {m}"));
    let (key, value) = assignment
        .split_once('=')
        .ok_or_else(|| bad("expected key=value".into()))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(bad("empty key segment".into()));
    }
    let mut t = table;
    for p in &parts[..parts.len() - 1] {
        t = t
            .entry(p.to_string())
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| bad(format!("`{p}` is not a table")))?;
    }
    t.insert(parts[parts.len() - 1].to_string(), override_value(value.trim()));
    Ok(())
}

/// Parses a scenario file and applies dotted `key=value` overrides on top.
///
/// Errors in the file carry its line and column; errors introduced by an
/// override are reported against the override.
pub fn parse_config_with(path: &str, text: &str, overrides: &[String]) -> Result<ScenarioConfig> {
    let config = parse_raw(path, text)?;
    if overrides.is_empty() {
        return Ok(config);
    }
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    let rewritten = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
    parse_raw(&format!("{path} (with overrides {})", overrides.join(", ")), &rewritten)
}

/// Parses scenario text without overrides.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_with("<config>", text, &[])
}

fn length(v: f64) -> Value {
    Value::String(format_length(v))
}

fn profile_table(p: &BendingProfile) -> Table {
    let mut t = Table::new();
    t.insert("kind".into(), Value::String(p.kind_name().into()));
    match p {
        BendingProfile::Straight => {}
        BendingProfile::Sinusoidal {
            amplitude,
            period,
            phase,
        } => {
            t.insert("amplitude".into(), length(*amplitude));
            t.insert("period".into(), length(*period));
            t.insert("phase".into(), Value::Float(*phase));
        }
        BendingProfile::Zigzag { tilt, period } => {
            t.insert("tilt".into(), Value::Float(*tilt));
            t.insert("period".into(), length(*period));
        }
        BendingProfile::Circular { radius } => {
            t.insert("radius".into(), length(*radius));
        }
        BendingProfile::Sampled(path) => {
            let (z, x) = path.samples();
            t.insert("z".into(), Value::Array(z.iter().map(|&v| length(v)).collect()));
            t.insert("x".into(), Value::Array(x.iter().map(|&v| length(v)).collect()));
        }
    }
    t
}

fn snake<T: serde::Serialize>(v: &T) -> Value {
    Value::String(
        serde_json::to_value(v)
            .ok()
            .and_then(|j| j.as_str().map(str::to_string))
            .unwrap_or_default(),
    )
}

/// Scenario file text that parses back to `config`. Well parameters are not
/// part of the file; they come from the calibration at run time.
pub fn serialize_config(config: &ScenarioConfig) -> String {
    let mut root = Table::new();
    root.insert("schema_version".into(), Value::Integer(SCHEMA_VERSION.into()));
    root.insert("name".into(), Value::String(config.name.clone()));
    root.insert("engine".into(), snake(&config.engine));

    let s = &config.spec;
    let mut array = Table::new();
    array.insert("a".into(), length(s.site_period));
    array.insert("sites".into(), Value::Integer(s.site_count as i64));
    array.insert("length".into(), length(s.length));
    array.insert("n_s".into(), Value::Float(s.substrate_index));
    array.insert("lambda".into(), length(s.wavelength));
    if let Some(d) = config.coupling {
        array.insert("delta".into(), Value::String(format_inverse_length(d)));
    }
    root.insert("array".into(), Value::Table(array));
    root.insert("profile".into(), Value::Table(profile_table(&config.profile)));

    let mut exc = Table::new();
    match config.excitation {
        Excitation::SingleSite(n) => {
            exc.insert("single_site".into(), Value::Integer(n));
        }
        Excitation::Gaussian { width, center, tilt } => {
            let mut g = Table::new();
            g.insert("width".into(), length(width));
            g.insert("center".into(), length(center));
            g.insert("tilt".into(), Value::Float(tilt));
            exc.insert("gaussian".into(), Value::Table(g));
        }
    }
    root.insert("excitation".into(), Value::Table(exc));

    if let Some(sw) = &config.sweep {
        let mut t = Table::new();
        t.insert("axis".into(), snake(&sw.axis));
        let values = sw
            .values
            .iter()
            .map(|&v| match sw.axis {
                SweepAxis::Gamma => Value::Float(v),
                _ => length(v),
            })
            .collect();
        t.insert("values".into(), Value::Array(values));
        root.insert("sweep".into(), Value::Table(t));
    }

    let mut out = Table::new();
    out.insert(
        "observables".into(),
        Value::Array(config.outputs.iter().map(snake).collect()),
    );
    out.insert("z_points".into(), Value::Integer(config.z_points as i64));
    root.insert("output".into(), Value::Table(out));

    let mut num = Table::new();
    num.insert("tolerance".into(), Value::Float(config.tolerance));
    num.insert("grid_points".into(), Value::Integer(config.grid.points as i64));
    num.insert("grid_spacing".into(), length(config.grid.spacing));
    root.insert("numerics".into(), Value::Table(num));

    toml::to_string(&root).expect("plain tables serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{array2, array3, straight_array};

    const MINIMAL: &str = r#"
schema_version = 1

[array]
a = "14um"
length = "28mm"
lambda = "1610nm"
delta = "3percm"

[excitation]
single_site = 0
"#;

    fn expect_parse(text: &str) -> (usize, usize, String) {
        match parse_config(text) {
            Err(Error::Parse {
                line,
                column,
                message,
                ..
            }) => (line, column, message),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_straight_config() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.spec.site_period, 14e-6);
        assert_eq!(c.spec.length, 28e-3);
        assert_eq!(c.spec.wavelength, 1610e-9);
        assert_eq!(c.coupling, Some(300.0));
        assert_eq!(c.excitation, Excitation::SingleSite(0));
        assert_eq!(c.profile, BendingProfile::Straight);
        assert_eq!(c.engine, Engine::TightBinding);
    }

    #[test]
    fn negative_amplitude_is_located() {
        let text = format!("{MINIMAL}\n[profile]\nkind = \"sinusoidal\"\namplitude = \"-1um\"\nperiod = \"4mm\"\n");
        let (line, _, message) = expect_parse(&text);
        assert_eq!(line, 15);
        assert!(message.contains("non-negative"), "{message}");
    }

    #[test]
    fn version_unknown_keys_and_units() {
        let (line, _, m) = expect_parse(&MINIMAL.replace("schema_version = 1", "schema_version = 99"));
        assert_eq!(line, 2);
        assert!(m.contains("99"));
        let (line, column, m) = expect_parse(&MINIMAL.replace("delta =", "detla ="));
        assert!(m.contains("detla"), "{m}");
        assert_eq!((line, column), (8, 1));
        let (line, _, m) = expect_parse(&MINIMAL.replace("\"14um\"", "\"14 furlongs\""));
        assert_eq!(line, 5);
        assert!(m.contains("furlongs"));
        let (_, _, m) = expect_parse(&MINIMAL.replace("\"14um\"", "14"));
        assert!(m.contains("unit suffix"));
        let (_, _, m) = expect_parse(&MINIMAL.replace("lambda = \"1610nm\"\n", ""));
        assert!(m.contains("lambda"), "{m}");
    }

    #[test]
    fn non_monotone_sweep() {
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"wavelength\"\nvalues = [\"1500nm\", \"1600nm\", \"1550nm\"]\n");
        let (line, _, m) = expect_parse(&text);
        assert_eq!(line, 15);
        assert!(m.contains("monotone"));
    }

    #[test]
    fn overrides_apply_after_parsing() {
        let c = parse_config_with(
            "f.toml",
            MINIMAL,
            &["array.lambda=1440nm".into(), "output.z_points=11".into(), "engine=both".into()],
        )
        .unwrap();
        assert_eq!(c.spec.wavelength, 1440e-9);
        assert_eq!(c.z_points, 11);
        assert_eq!(c.engine, Engine::Both);
        assert!(parse_config_with("f.toml", MINIMAL, &["array.lamda=1440nm".into()]).is_err());
        assert!(parse_config_with("f.toml", MINIMAL, &["novalue".into()]).is_err());
    }

    #[test]
    fn presets_round_trip() {
        let mut configs = Vec::new();
        for (name, (spec, profile)) in [
            ("straight", straight_array(1610e-9).unwrap()),
            ("array2", array2(1610e-9).unwrap()),
            ("array3", array3(1440e-9).unwrap()),
        ] {
            configs.push(ScenarioConfig::new(name, spec, profile));
        }
        let mut g = configs[2].clone();
        g.excitation = Excitation::Gaussian {
            width: 24.7e-6,
            center: 0.0,
            tilt: 0.0,
        };
        g.engine = Engine::Both;
        g.coupling = Some(237.5);
        configs.push(g);
        let mut s = configs[1].clone();
        s.sweep = Some(Sweep {
            axis: SweepAxis::Period,
            values: crate::experiments::FIG6_PERIODS.to_vec(),
        });
        s.outputs = vec![Observable::Trajectory, Observable::DlDiagnostics];
        configs.push(s);
        let mut z = configs[0].clone();
        z.profile = BendingProfile::zigzag(0.01, 4e-3).unwrap();
        configs.push(z);
        let mut sp = configs[0].clone();
        sp.profile = BendingProfile::sample_from(&BendingProfile::sinusoidal(13e-6, 4e-3, 0.3).unwrap(), 28e-3, 50).unwrap();
        configs.push(sp);
        for c in configs {
            let text = serialize_config(&c);
            assert_eq!(parse_config(&text).unwrap(), c, "{text}");
        }
    }
}
