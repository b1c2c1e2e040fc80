//! Experiment configuration: `key = value` text files or JSON manifests,
//! overridden by command-line flags, resolved into typed settings.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fastslow::analysis;
use fastslow::cycles::CycleConfig;
use fastslow::models::{AshwinParams, Family, Model, VdpParams};
use fastslow::odeint::IntegratorConfig;

use crate::CliError;

pub type RawConfig = BTreeMap<String, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Hopf,
    Sweep,
    Portrait,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Hopf => "hopf",
            Subcommand::Sweep => "sweep",
            Subcommand::Portrait => "portrait",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    Full,
    CoMoving,
}

/// Reads a configuration file. A file whose content is a JSON object is read
/// as a run manifest (its `config` member) or as a flat key/value object;
/// anything else is parsed as `key = value` lines with `#` comments.
pub fn load_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    if text.trim_start().starts_with('{') {
        parse_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    } else {
        parse_key_values(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

pub fn parse_key_values(text: &str) -> Result<RawConfig, String> {
    let mut out = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", lineno + 1))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(format!("line {}: empty key", lineno + 1));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_json(text: &str) -> Result<RawConfig, String> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let obj = value.as_object().ok_or("expected a JSON object")?;
    let table = match obj.get("config") {
        Some(serde_json::Value::Object(inner)) => inner,
        Some(_) => return Err("`config` must be an object".into()),
        None => obj,
    };
    table
        .iter()
        .map(|(k, v)| {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::Bool(b) => b.to_string(),
                other => return Err(format!("key `{k}`: unsupported value {other}")),
            };
            Ok((k.clone(), s))
        })
        .collect()
}

/// Parses a `--set key=value` override.
pub fn parse_override(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub command: Subcommand,
    pub family: Family,
    pub epsilons: Vec<f64>,
    pub r: f64,
    pub degree: u32,
    pub alpha: f64,
    pub integrator: IntegratorConfig,
    pub cycle: CycleConfig,
    pub out: PathBuf,
    pub format: Format,
    // simulate
    pub t0: f64,
    pub t1: f64,
    pub coords: Coords,
    pub x1_0: f64,
    pub w_0: f64,
    pub samples: usize,
    // hopf
    pub hopf_r_lo: f64,
    pub hopf_r_hi: f64,
    // sweep
    pub r_grid: Vec<f64>,
    r_grid_spec: String,
    pub workers: usize,
    pub warm_start: bool,
    pub tipping_radius: Option<f64>,
    // portrait
    pub x1_range: (f64, f64),
    pub w_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub manifold_points: usize,
    resolved: RawConfig,
}

struct Reader {
    raw: RawConfig,
    used: Vec<String>,
}

impl Reader {
    fn take(&mut self, key: &str) -> Option<String> {
        self.used.push(key.to_string());
        self.raw.get(key).cloned()
    }

    fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(s) => parse_f64(key, &s),
        }
    }

    fn usize_or(&mut self, key: &str, default: usize) -> Result<usize, CliError> {
        match self.take(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|_| CliError::Config(format!("`{key}` must be a nonnegative integer, got `{s}`"))),
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, CliError> {
        self.take(key).map(|s| parse_f64(key, &s)).transpose()
    }
}

fn parse_f64(key: &str, s: &str) -> Result<f64, CliError> {
    let v: f64 = s
        .parse()
        .map_err(|_| CliError::Config(format!("`{key}` must be a number, got `{s}`")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("`{key}` must be finite, got `{s}`")));
    }
    Ok(v)
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|p| parse_f64(key, p.trim())).collect()
}

/// `start:stop:count` (inclusive, evenly spaced) or a comma-separated list.
fn parse_grid(s: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, n] => {
            let (a, b) = (parse_f64("r_grid", a.trim())?, parse_f64("r_grid", b.trim())?);
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CliError::Config(format!("r_grid count must be an integer, got `{n}`")))?;
            if n == 0 {
                return Err(CliError::Config("r_grid must contain at least one rate".into()));
            }
            if n == 1 {
                vec![a]
            } else {
                (0..n)
                    .map(|i| if i + 1 == n { b } else { a + (b - a) * i as f64 / (n - 1) as f64 })
                    .collect()
            }
        }
        [list] => parse_list("r_grid", list)?,
        _ => return Err(CliError::Config(format!("r_grid must be `start:stop:count` or a list, got `{s}`"))),
    };
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Config("r_grid must be strictly increasing".into()));
    }
    Ok(grid)
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

impl ExperimentConfig {
    pub fn resolve(command: Subcommand, raw: RawConfig) -> Result<Self, CliError> {
        let mut rd = Reader { raw, used: Vec::new() };
        let family: Family = rd
            .take("family")
            .unwrap_or_else(|| "ashwin".into())
            .parse()
            .map_err(|e: fastslow::ModelError| CliError::Config(e.to_string()))?;
        let epsilons = match rd.take("epsilon") {
            None => vec![0.02],
            Some(s) => parse_list("epsilon", &s)?,
        };
        if epsilons.is_empty() || (command != Subcommand::Sweep && epsilons.len() > 1) {
            return Err(CliError::Config("only `sweep` accepts several epsilon values".into()));
        }
        let r = rd.f64_or("r", 1.0)?;
        let degree = rd.usize_or("n", 5)?;
        let degree = u32::try_from(degree).map_err(|_| CliError::Config(format!("n = {degree} is too large")))?;
        let alpha = rd.f64_or("alpha", 1.5)?;

        let base = Self::model_for(family, epsilons[0], r, degree, alpha)?;

        let (rtol_default, atol_default) = match command {
            Subcommand::Sweep => {
                let c = CycleConfig::default().integrator;
                (c.rtol, c.atol)
            }
            _ => {
                let c = IntegratorConfig::default();
                (c.rtol, c.atol)
            }
        };
        let idef = IntegratorConfig::default();
        let integrator = IntegratorConfig {
            rtol: rd.f64_or("rtol", rtol_default)?,
            atol: rd.f64_or("atol", atol_default)?,
            h_init: rd.f64_or("h_init", idef.h_init)?,
            h_min: rd.f64_or("h_min", idef.h_min)?,
            h_max: rd.f64_or("h_max", idef.h_max)?,
            max_steps: rd.usize_or("max_steps", idef.max_steps)?,
        };
        integrator.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let cdef = CycleConfig::default();
        let cycle = CycleConfig {
            transient_time: rd.f64_or("transient_time", cdef.transient_time)?,
            max_returns: rd.usize_or("max_returns", cdef.max_returns)?,
            return_tol: rd.f64_or("return_tol", cdef.return_tol)?,
            perturbation: rd.f64_or("perturbation", cdef.perturbation)?,
            samples: rd.usize_or("cycle_samples", cdef.samples)?,
            max_return_time: rd.f64_or("max_return_time", cdef.max_return_time)?,
            integrator,
        };
        cycle.validate().map_err(|e| CliError::Config(e.to_string()))?;

        let format = match rd.take("format").as_deref() {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(other) => return Err(CliError::Config(format!("format must be csv or json, got `{other}`"))),
        };
        let out = rd
            .take("out")
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(format!("{}.{}", command.name(), format.extension())));

        // simulate
        let t0 = rd.f64_or("t0", 0.0)?;
        let t1 = rd.f64_or("t1", 100.0)?;
        let coords = match rd.take("coords").as_deref() {
            None | Some("full") => Coords::Full,
            Some("comoving") | Some("co-moving") => Coords::CoMoving,
            Some(other) => return Err(CliError::Config(format!("coords must be full or comoving, got `{other}`"))),
        };
        let (x1_0, w_0) = {
            let x1 = rd.opt_f64("x1_0")?;
            let w = rd.opt_f64("w_0")?;
            match (x1, w) {
                (Some(x1), Some(w)) => (x1, w),
                (x1, w) if command == Subcommand::Simulate => {
                    let eq = analysis::solve_equilibrium(&base).map_err(|e| CliError::Bracket(e.to_string()))?;
                    (x1.unwrap_or(eq.x1_star + cycle.perturbation), w.unwrap_or(eq.w_star))
                }
                (x1, w) => (x1.unwrap_or(0.0), w.unwrap_or(0.0)),
            }
        };
        let samples = rd.usize_or("samples", 0)?;
        if command == Subcommand::Simulate && t1 < t0 {
            return Err(CliError::Config(format!("t1 = {t1} must not precede t0 = {t0}")));
        }

        // hopf
        let r_c = analysis::critical_rate(&base);
        let hopf_r_lo = rd.f64_or("hopf_r_lo", (r_c - 0.05).max(0.0))?;
        let hopf_r_hi = rd.f64_or("hopf_r_hi", r_c + 0.05)?;

        // sweep
        let r_grid_spec = rd.take("r_grid").unwrap_or_else(|| match family {
            Family::Ashwin => "0.9675:1.3:60".to_string(),
            Family::VanDerPol => format!("0:{}:60", fmt_f64(alpha + 1.0)),
        });
        let r_grid = if command == Subcommand::Sweep {
            parse_grid(&r_grid_spec)?
        } else {
            Vec::new()
        };
        let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
        let workers = rd.usize_or("workers", default_workers)?.max(1);
        let warm_start = match rd.take("warm_start").as_deref() {
            None | Some("on") | Some("true") => true,
            Some("off") | Some("false") => false,
            Some(other) => return Err(CliError::Config(format!("warm_start must be on or off, got `{other}`"))),
        };
        let tipping_radius = rd.opt_f64("tipping_radius")?;
        if tipping_radius.is_some_and(|r| r <= 0.0) {
            return Err(CliError::Config("tipping_radius must be positive".into()));
        }

        // portrait
        let (bx0, bx1, bw0, bw1) = match family {
            Family::Ashwin => (-0.5, 1.5, -0.5, 1.0),
            Family::VanDerPol => (-2.5, 2.5, -2.0, 2.0),
        };
        let x1_range = (rd.f64_or("x1_min", bx0)?, rd.f64_or("x1_max", bx1)?);
        let w_range = (rd.f64_or("w_min", bw0)?, rd.f64_or("w_max", bw1)?);
        let nx = rd.usize_or("nx", 41)?;
        let ny = rd.usize_or("ny", 41)?;
        let manifold_points = rd.usize_or("manifold_points", 401)?;
        if command == Subcommand::Portrait {
            if !(x1_range.0 < x1_range.1 && w_range.0 < w_range.1) {
                return Err(CliError::Config("portrait box must satisfy x1_min < x1_max and w_min < w_max".into()));
            }
            if nx < 2 || ny < 2 || manifold_points < 2 {
                return Err(CliError::Config("portrait grid density must be at least 2 in each direction".into()));
            }
        }

        let unknown: Vec<&String> = rd.raw.keys().filter(|k| !rd.used.contains(k)).collect();
        if !unknown.is_empty() {
            let names: Vec<&str> = unknown.iter().map(|s| s.as_str()).collect();
            return Err(CliError::Config(format!("unknown configuration key(s): {}", names.join(", "))));
        }

        let mut cfg = Self {
            command,
            family,
            epsilons,
            r,
            degree,
            alpha,
            integrator,
            cycle,
            out,
            format,
            t0,
            t1,
            coords,
            x1_0,
            w_0,
            samples,
            hopf_r_lo,
            hopf_r_hi,
            r_grid,
            r_grid_spec,
            workers,
            warm_start,
            tipping_radius,
            x1_range,
            w_range,
            nx,
            ny,
            manifold_points,
            resolved: RawConfig::new(),
        };
        cfg.resolved = cfg.build_resolved();
        Ok(cfg)
    }

    fn model_for(family: Family, eps: f64, r: f64, degree: u32, alpha: f64) -> Result<Model, CliError> {
        let model: Result<Model, _> = match family {
            Family::Ashwin => AshwinParams::new(eps, r, degree).map(Model::from),
            Family::VanDerPol => VdpParams::new(eps, r, alpha).map(Model::from),
        };
        model.map_err(|e| CliError::Config(e.to_string()))
    }

    /// The model at the configured rate for the `index`-th epsilon.
    pub fn model(&self, index: usize) -> Result<Model, CliError> {
        Self::model_for(self.family, self.epsilons[index], self.r, self.degree, self.alpha)
    }

    /// Every setting the subcommand depends on, defaults included, as
    /// strings that parse back to identical values.
    pub fn resolved(&self) -> &RawConfig {
        &self.resolved
    }

    fn build_resolved(&self) -> RawConfig {
        let mut m = RawConfig::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("family", self.family.name().to_string());
        put(
            "epsilon",
            self.epsilons.iter().map(|e| fmt_f64(*e)).collect::<Vec<_>>().join(","),
        );
        match self.family {
            Family::Ashwin => put("n", self.degree.to_string()),
            Family::VanDerPol => put("alpha", fmt_f64(self.alpha)),
        }
        put("out", self.out.display().to_string());
        put("format", self.format.extension().to_string());
        let integ = |put: &mut dyn FnMut(&str, String)| {
            put("rtol", fmt_f64(self.integrator.rtol));
            put("atol", fmt_f64(self.integrator.atol));
            put("h_init", fmt_f64(self.integrator.h_init));
            put("h_min", fmt_f64(self.integrator.h_min));
            put("h_max", fmt_f64(self.integrator.h_max));
            put("max_steps", self.integrator.max_steps.to_string());
        };
        match self.command {
            Subcommand::Simulate => {
                put("r", fmt_f64(self.r));
                integ(&mut put);
                put("t0", fmt_f64(self.t0));
                put("t1", fmt_f64(self.t1));
                put(
                    "coords",
                    match self.coords {
                        Coords::Full => "full",
                        Coords::CoMoving => "comoving",
                    }
                    .to_string(),
                );
                put("x1_0", fmt_f64(self.x1_0));
                put("w_0", fmt_f64(self.w_0));
                put("samples", self.samples.to_string());
            }
            Subcommand::Hopf => {
                put("hopf_r_lo", fmt_f64(self.hopf_r_lo));
                put("hopf_r_hi", fmt_f64(self.hopf_r_hi));
            }
            Subcommand::Sweep => {
                integ(&mut put);
                put("r_grid", self.r_grid_spec.clone());
                put("transient_time", fmt_f64(self.cycle.transient_time));
                put("max_returns", self.cycle.max_returns.to_string());
                put("return_tol", fmt_f64(self.cycle.return_tol));
                put("perturbation", fmt_f64(self.cycle.perturbation));
                put("cycle_samples", self.cycle.samples.to_string());
                put("max_return_time", fmt_f64(self.cycle.max_return_time));
                put("workers", self.workers.to_string());
                put("warm_start", if self.warm_start { "on" } else { "off" }.to_string());
                if let Some(r) = self.tipping_radius {
                    put("tipping_radius", fmt_f64(r));
                }
            }
            Subcommand::Portrait => {
                put("r", fmt_f64(self.r));
                put("x1_min", fmt_f64(self.x1_range.0));
                put("x1_max", fmt_f64(self.x1_range.1));
                put("w_min", fmt_f64(self.w_range.0));
                put("w_max", fmt_f64(self.w_range.1));
                put("nx", self.nx.to_string());
                put("ny", self.ny.to_string());
                put("manifold_points", self.manifold_points.to_string());
            }
        }
        m
    }
}
