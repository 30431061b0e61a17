//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Every key has a default, so
//! an empty file is a valid configuration. A `run_manifest.json` written by a
//! previous run is accepted in place of a config file and reproduces that run.

use crate::snapshot;
use crate::CliError;
use csh_core::estimates::{find, Params};
use csh_core::integrator::{Quadrature, Scheme, StepConfig};
use csh_core::model::{InitialData, PotentialSpec, Sigma};
use csh_core::spectral::GridSpec;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "CSH_OUT_DIR";

/// Documented keys with their defaults, in the order they are echoed.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("grid.n", "64", "points per side, a power of two >= 8"),
    ("grid.L", "6.283185307179586", "period length"),
    ("grid.dealias_fraction", "0.6666666666666666", "modes with max|m| >= fraction*n/2 are removed"),
    ("potential.m", "1", "mass m >= 0"),
    ("potential.v_coeffs", "0.0625,-0.0625", "c1,c2,... of V(r) = sum c_j r^j; empty for V = 0"),
    ("potential.alpha", "fit", "witness alpha with V(r) + alpha^2 r >= 0: a number, `fit`, or `none`"),
    ("sigma", "-1", "sign in curl a = sigma Im(phi conj(u)): 1 or -1"),
    ("init", "gaussian", "zero | gaussian | modes | vortex | random | snapshot"),
    ("init.amplitude", "1", "gaussian, vortex and random amplitude"),
    ("init.width", "0.8", "gaussian width"),
    ("init.center", "3.141592653589793,3.141592653589793", "gaussian center"),
    ("init.omega", "1", "u = i omega phi"),
    ("init.modes", "1:0:1:0", "modes as m1:m2:re:im separated by `;`"),
    ("init.winding", "1", "vortex winding number"),
    ("init.core_radius", "0.8", "vortex core radius"),
    ("init.max_mode", "4", "random data: modes with max|m| <= this"),
    ("init.path", "", "snapshot file for init = snapshot"),
    ("step.dt", "0.01", "time step"),
    ("step.scheme", "twisted_duhamel", "twisted_duhamel | rk4_reference"),
    ("step.picard_max", "8", "Picard iterations per step"),
    ("step.picard_tol", "1e-12", "Picard stopping tolerance"),
    ("step.quadrature", "trapezoid", "trapezoid | midpoint"),
    ("step.delta0_guard", "0.05", "warn when dt*|a0|_inf^2 exceeds this"),
    ("t_end", "0.5", "final time"),
    ("diag_every", "5", "steps between diagnostics rows and snapshots"),
    ("snapshots", "true", "write a snapshot with every diagnostics row"),
    ("out_dir", "out", "output directory"),
    ("seed", "0", "seed for random initial data and the verify suite"),
    ("convergence.levels", "4", "dt-halving levels, at least 4"),
    ("norms.gamma", "0.9", "regularity for the norms command"),
    ("norms.trajectory", "", "snapshot directory for the norms command"),
    ("verify.ensemble_size", "3", "estimate ensemble size"),
    ("verify.n", "0", "estimate base resolution; 0 uses each entry's default"),
    ("verify.estimates", "all", "`all` or a comma-separated list of estimate ids"),
];

/// Where the initial data comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSource {
    Generator(InitialData),
    /// Random band-limited data drawn from the run seed.
    Random { amplitude: f64, max_mode: i64, omega: f64 },
    Snapshot(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub sigma: Sigma,
    pub init: InitSource,
    pub step: StepConfig,
    pub t_end: f64,
    pub diag_every: usize,
    pub snapshots: bool,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub convergence_levels: usize,
    pub norms_gamma: f64,
    pub norms_trajectory: Option<PathBuf>,
    pub verify_ensemble_size: usize,
    pub verify_n: usize,
    /// `None` runs the whole catalogue.
    pub verify_estimates: Option<Vec<String>>,
    /// `estimate.<id>.<param>` overrides.
    pub estimate_params: BTreeMap<String, Params>,
    /// Every key with its effective value, for the manifest echo.
    pub entries: BTreeMap<String, String>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Splits a config file into its entries; rejects malformed and repeated keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| bad(format!("line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(bad(format!("line {}: empty key", i + 1)));
        }
        if out.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(bad(format!("line {}: `{k}` given twice", i + 1)));
        }
    }
    Ok(out)
}

struct Reader<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Reader<'_> {
    fn raw(&self, key: &str) -> &str {
        self.map.get(key).map(String::as_str).unwrap_or_else(|| default_of(key))
    }

    fn get<T: std::str::FromStr>(&self, key: &str) -> Result<T, CliError> {
        let v = self.raw(key);
        v.parse().map_err(|_| bad(format!("`{key}`: cannot parse `{v}`")))
    }

    fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.raw(key);
        if v.is_empty() {
            return Ok(vec![]);
        }
        v.split(',').map(|s| s.trim().parse().map_err(|_| bad(format!("`{key}`: cannot parse `{s}`")))).collect()
    }

    fn path(&self, key: &str, base: &Path) -> Option<PathBuf> {
        let v = self.raw(key);
        (!v.is_empty()).then(|| base.join(v))
    }
}

fn default_of(key: &str) -> &'static str {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, d, _)| *d).expect("documented key")
}

fn parse_modes(s: &str) -> Result<Vec<(i64, i64, [f64; 2])>, CliError> {
    s.split(';')
        .filter(|m| !m.trim().is_empty())
        .map(|m| {
            let p: Vec<&str> = m.split(':').map(str::trim).collect();
            let err = || bad(format!("`init.modes`: cannot parse `{m}` as m1:m2:re:im"));
            if p.len() != 4 {
                return Err(err());
            }
            Ok((
                p[0].parse().map_err(|_| err())?,
                p[1].parse().map_err(|_| err())?,
                [p[2].parse().map_err(|_| err())?, p[3].parse().map_err(|_| err())?],
            ))
        })
        .collect()
}

impl RunConfig {
    /// Builds and validates a configuration. Relative paths resolve against
    /// `base`.
    pub fn from_entries(map: &BTreeMap<String, String>, base: &Path) -> Result<Self, CliError> {
        let mut estimate_params: BTreeMap<String, Params> = BTreeMap::new();
        for (k, v) in map {
            if let Some(rest) = k.strip_prefix("estimate.") {
                let (id, param) = rest.split_once('.').ok_or_else(|| bad(format!("`{k}`: expected estimate.<id>.<param>")))?;
                find(id).map_err(|e| bad(e.to_string()))?;
                let value: f64 = v.parse().map_err(|_| bad(format!("`{k}`: cannot parse `{v}`")))?;
                estimate_params.entry(id.to_string()).or_default().insert(param.to_string(), value);
            } else if !KEYS.iter().any(|(key, _, _)| key == k) {
                return Err(bad(format!("unknown key `{k}`")));
            }
        }
        let r = Reader { map };
        let grid = GridSpec::new(r.get("grid.n")?, r.get("grid.L")?, r.get("grid.dealias_fraction")?)
            .map_err(|e| bad(e.to_string()))?;
        let mut potential = PotentialSpec::new(r.get("potential.m")?, r.list("potential.v_coeffs")?)
            .map_err(|e| bad(e.to_string()))?;
        potential = match r.raw("potential.alpha") {
            "fit" => potential.with_fitted_alpha(),
            "none" => potential,
            _ => potential.with_alpha(r.get("potential.alpha")?).map_err(|e| bad(e.to_string()))?,
        };
        let sigma = Sigma::from_i64(r.get("sigma")?).map_err(|e| bad(e.to_string()))?;
        let omega: f64 = r.get("init.omega")?;
        let amplitude: f64 = r.get("init.amplitude")?;
        let init = match r.raw("init") {
            "zero" => InitSource::Generator(InitialData::Zero),
            "gaussian" => {
                let c = r.list("init.center")?;
                if c.len() != 2 {
                    return Err(bad("`init.center` needs two coordinates"));
                }
                InitSource::Generator(InitialData::GaussianBump {
                    amplitude,
                    width: r.get("init.width")?,
                    center: [c[0], c[1]],
                    omega,
                })
            }
            "modes" => InitSource::Generator(InitialData::FourierModes { modes: parse_modes(r.raw("init.modes"))?, omega }),
            "vortex" => InitSource::Generator(InitialData::VortexLike {
                winding: r.get("init.winding")?,
                core_radius: r.get("init.core_radius")?,
                amplitude,
                omega,
            }),
            "random" => InitSource::Random { amplitude, max_mode: r.get("init.max_mode")?, omega },
            "snapshot" => {
                InitSource::Snapshot(r.path("init.path", base).ok_or_else(|| bad("init = snapshot needs `init.path`"))?)
            }
            other => return Err(bad(format!("unknown initial data `{other}`"))),
        };
        let step = StepConfig {
            dt: r.get("step.dt")?,
            picard_max: r.get("step.picard_max")?,
            picard_tol: r.get("step.picard_tol")?,
            quadrature: r.raw("step.quadrature").parse::<Quadrature>().map_err(bad)?,
            scheme: r.raw("step.scheme").parse::<Scheme>().map_err(bad)?,
            delta0_guard: r.get("step.delta0_guard")?,
            couple_gauge: true,
        };
        step.validate().map_err(|e| bad(e.to_string()))?;
        let t_end: f64 = r.get("t_end")?;
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(bad(format!("t_end must be positive, got {t_end}")));
        }
        let verify_estimates = match r.raw("verify.estimates") {
            "all" => None,
            list => {
                let ids: Vec<String> = list.split(',').map(|s| s.trim().to_string()).collect();
                for id in &ids {
                    find(id).map_err(|e| bad(e.to_string()))?;
                }
                Some(ids)
            }
        };
        let cfg = Self {
            grid,
            potential,
            sigma,
            init,
            step,
            t_end,
            diag_every: r.get("diag_every")?,
            snapshots: r.get("snapshots")?,
            out_dir: r.path("out_dir", base).unwrap_or_else(|| PathBuf::from(".")),
            seed: r.get("seed")?,
            convergence_levels: r.get("convergence.levels")?,
            norms_gamma: r.get("norms.gamma")?,
            norms_trajectory: r.path("norms.trajectory", base),
            verify_ensemble_size: r.get("verify.ensemble_size")?,
            verify_n: r.get("verify.n")?,
            verify_estimates,
            estimate_params,
            entries: BTreeMap::new(),
        };
        if cfg.diag_every == 0 {
            return Err(bad("diag_every must be at least 1"));
        }
        if let InitSource::Snapshot(p) = &cfg.init {
            let snap = snapshot::read(p)?;
            if snap.n as usize != grid.n || snap.l != grid.period_length {
                return Err(CliError::Format(format!(
                    "{}: snapshot grid (n = {}, L = {}) does not match the configured grid",
                    p.display(),
                    snap.n,
                    snap.l
                )));
            }
        }
        let mut entries: BTreeMap<String, String> =
            KEYS.iter().map(|(k, _, _)| (k.to_string(), r.raw(k).to_string())).collect();
        for (k, v) in map {
            entries.insert(k.clone(), v.clone());
        }
        for key in ["out_dir", "init.path", "norms.trajectory"] {
            if let Some(p) = r.path(key, base) {
                entries.insert(key.to_string(), p.display().to_string());
            }
        }
        Ok(Self { entries, ..cfg })
    }

    /// Reads a config file, or the `config` object of a run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let map = if text.trim_start().starts_with('{') {
            let v: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
            let obj = v
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| bad(format!("{}: no `config` object", path.display())))?;
            obj.iter()
                .map(|(k, v)| Ok((k.clone(), v.as_str().ok_or_else(|| bad(format!("`{k}` must be a string")))?.to_string())))
                .collect::<Result<_, CliError>>()?
        } else {
            parse_entries(&text)?
        };
        Self::from_entries(&map, base)
    }

    pub fn defaults() -> Self {
        Self::from_entries(&BTreeMap::new(), Path::new(".")).expect("defaults are valid")
    }

    /// Applies `--seed` and the output-directory overrides (`--out` wins over
    /// the environment, which wins over the file).
    pub fn with_overrides(mut self, seed: Option<u64>, out: Option<PathBuf>, env_out: Option<PathBuf>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
            self.entries.insert("seed".into(), s.to_string());
        }
        if let Some(dir) = out.or(env_out) {
            self.entries.insert("out_dir".into(), dir.display().to_string());
            self.out_dir = dir;
        }
        self
    }

    /// The documented schema as a commented config file.
    pub fn template() -> String {
        let mut s = String::new();
        for (k, d, help) in KEYS {
            s.push_str(&format!("# {help}\n{k} = {d}\n"));
        }
        s
    }
}
