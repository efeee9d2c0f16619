use std::path::PathBuf;

use toml::{Table, Value};

use crate::coefficients::{eta0, preset, CoefficientError, LeslieCoefficients};
use crate::dynamics::integrate::{check_cfl, Integrator, PicardSettings, SolverConfig};
use crate::dynamics::{GammaForm, InitialKind, DEFAULT_BAND};
use crate::error::ElhError;
use crate::spectral::{Dealias, Grid};

/// Coefficients as written: an optional preset plus per-key overrides of the independent set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CoefficientSpec {
    pub preset: Option<String>,
    pub mu1: Option<f64>,
    pub mu4: Option<f64>,
    pub mu5: Option<f64>,
    pub mu6: Option<f64>,
    pub lambda1: Option<f64>,
    pub rho1: Option<f64>,
    pub delta: Option<f64>,
}

impl CoefficientSpec {
    pub fn resolve(&self) -> Result<LeslieCoefficients, Vec<String>> {
        let base = match &self.preset {
            Some(name) => Some(preset(name).map_err(|e| vec![format!("[coefficients].preset: {e}")])?),
            None => None,
        };
        let mut missing = Vec::new();
        let mut pick = |name: &str, given: Option<f64>, from: Option<f64>| {
            given.or(from).unwrap_or_else(|| {
                missing.push(format!("[coefficients].{name}: required when no preset is given"));
                f64::NAN
            })
        };
        let mu1 = pick("mu1", self.mu1, base.map(|b| b.mu1));
        let mu4 = pick("mu4", self.mu4, base.map(|b| b.mu4));
        let mu5 = pick("mu5", self.mu5, base.map(|b| b.mu5));
        let mu6 = pick("mu6", self.mu6, base.map(|b| b.mu6));
        let lambda1 = pick("lambda1", self.lambda1, base.map(|b| b.lambda1));
        let rho1 = pick("rho1", self.rho1, base.map(|b| b.rho1));
        if !missing.is_empty() {
            return Err(missing);
        }
        let c = LeslieCoefficients::from_independent(mu1, mu4, mu5, mu6, lambda1, rho1)
            .map_err(|e: CoefficientError| vec![format!("[coefficients]: {e}")])?;
        Ok(match self.delta.or(base.and_then(|b| b.delta)) {
            Some(delta) => c.with_delta(delta),
            None => c,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EtaSpec {
    Value(f64),
    /// Use the largest admissible weight `eta0(c, estimate_constant)`.
    Eta0,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub kind: InitialKind,
    pub amplitude: f64,
    pub seed: u64,
    pub band: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSpec {
    /// Order of the higher-order functionals; `None` skips them.
    pub s: Option<usize>,
    pub eta: Option<EtaSpec>,
    pub estimate_constant: f64,
    pub sample_every: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputSpec {
    pub csv: Option<PathBuf>,
    /// Snapshot path prefix; files are `<prefix>_<step>.bin`.
    pub snapshot: Option<PathBuf>,
    pub snapshot_every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim: usize,
    pub n: usize,
    pub coefficient_spec: CoefficientSpec,
    /// Resolved from `coefficient_spec` at load.
    pub coefficients: LeslieCoefficients,
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    pub diagnostics: DiagnosticsSpec,
    pub output: OutputSpec,
    pub t_end: f64,
}

impl RunConfig {
    pub fn grid(&self) -> Grid {
        Grid::new(self.dim, self.n).expect("validated at load")
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.solver.dt).round() as usize
    }

    /// Weight of the modified functional, if requested.
    pub fn eta(&self) -> Option<f64> {
        match self.diagnostics.eta? {
            EtaSpec::Value(v) => Some(v),
            EtaSpec::Eta0 => eta0(&self.coefficients, self.diagnostics.estimate_constant).ok(),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["dim", "n"]),
    ("coefficients", &["preset", "mu1", "mu4", "mu5", "mu6", "lambda1", "rho1", "delta"]),
    (
        "solver",
        &[
            "dt",
            "integrator",
            "dealias",
            "cfl_safety",
            "gamma",
            "renormalize_every",
            "picard",
            "picard_max_iters",
            "picard_tolerance",
        ],
    ),
    ("initial", &["kind", "amplitude", "seed", "band"]),
    ("diagnostics", &["s", "eta", "estimate_constant", "sample_every"]),
    ("output", &["csv", "snapshot", "snapshot_every"]),
    ("run", &["t_end"]),
];

/// Typed access to one section, recording problems instead of stopping at the first.
struct Reader<'a> {
    section: &'static str,
    table: Option<&'a Table>,
    errors: &'a mut Vec<String>,
}

impl<'a> Reader<'a> {
    fn raw(&self, key: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(key))
    }

    fn fail(&mut self, key: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("[{}].{key}: {msg}", self.section));
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.raw(key) {
            None => None,
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(other) => {
                let kind = other.type_str();
                self.fail(key, format!("expected a number, got {kind}"));
                None
            }
        }
    }

    fn int(&mut self, key: &str) -> Option<i64> {
        match self.raw(key) {
            None => None,
            Some(Value::Integer(i)) => Some(*i),
            Some(other) => {
                let kind = other.type_str();
                self.fail(key, format!("expected an integer, got {kind}"));
                None
            }
        }
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        let v = self.int(key)?;
        if v < 0 {
            self.fail(key, format!("must be >= 0 (got {v})"));
            return None;
        }
        Some(v as u64)
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => {
                let kind = other.type_str();
                self.fail(key, format!("expected a string, got {kind}"));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.raw(key) {
            None => None,
            Some(Value::Boolean(b)) => Some(*b),
            Some(other) => {
                let kind = other.type_str();
                self.fail(key, format!("expected true or false, got {kind}"));
                None
            }
        }
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: std::fmt::Display,
    {
        let s = self.string(key)?;
        match s.parse() {
            Ok(v) => Some(v),
            Err(e) => {
                self.fail(key, e);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && self.raw(key).is_none() {
            self.fail(key, "missing required key");
        }
        v
    }
}

fn parse_gamma(s: &str) -> Result<GammaForm, String> {
    match s {
        "consistent" => Ok(GammaForm::Consistent),
        "drop_lambda2" => Ok(GammaForm::DropLambda2),
        other => Err(format!("unknown gamma form {other:?} (expected consistent or drop_lambda2)")),
    }
}

fn gamma_name(g: GammaForm) -> &'static str {
    match g {
        GammaForm::Consistent => "consistent",
        GammaForm::DropLambda2 => "drop_lambda2",
    }
}

/// Parses and validates configuration text, reporting every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, ElhError> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ElhError::Config(vec![format!("syntax: {}", e.to_string().trim())]))?;
    config_from_table(&table)
}

pub fn config_from_table(table: &Table) -> Result<RunConfig, ElhError> {
    let mut errors = Vec::new();
    for (key, value) in table {
        match SECTIONS.iter().find(|(s, _)| s == key) {
            None => errors.push(format!("unknown section [{key}]")),
            Some((_, keys)) => match value.as_table() {
                None => errors.push(format!("[{key}] must be a section, not a value")),
                Some(t) => {
                    for k in t.keys() {
                        if !keys.contains(&k.as_str()) {
                            errors.push(format!("unknown key [{key}].{k}"));
                        }
                    }
                }
            },
        }
    }
    let section = |name: &str| table.get(name).and_then(|v| v.as_table());
    macro_rules! reader {
        ($name:literal) => {
            Reader {
                section: $name,
                table: section($name),
                errors: &mut errors,
            }
        };
    }

    let mut r = reader!("grid");
    let dim = r.uint("dim");
    let dim = r.required("dim", dim);
    if let Some(d) = dim {
        if !(2..=3).contains(&d) {
            r.fail("dim", format!("must be 2 or 3 (got {d})"));
        }
    }
    let n = r.uint("n");
    let n = r.required("n", n);
    let grid = match (dim, n) {
        (Some(d @ 2..=3), Some(n)) => match Grid::new(d as usize, n as usize) {
            Ok(g) => Some(g),
            Err(e) => {
                let msg = match e {
                    ElhError::Grid(m) => m,
                    other => other.to_string(),
                };
                errors.push(format!("[grid]: {msg}"));
                None
            }
        },
        _ => None,
    };

    let mut r = reader!("coefficients");
    let coefficient_spec = CoefficientSpec {
        preset: r.string("preset"),
        mu1: r.float("mu1"),
        mu4: r.float("mu4"),
        mu5: r.float("mu5"),
        mu6: r.float("mu6"),
        lambda1: r.float("lambda1"),
        rho1: r.float("rho1"),
        delta: r.float("delta"),
    };
    let coefficients = match coefficient_spec.resolve() {
        Ok(c) => Some(c),
        Err(es) => {
            errors.extend(es);
            None
        }
    };

    let mut r = reader!("solver");
    let dt = r.float("dt");
    let dt = r.required("dt", dt);
    let integrator = r.parsed::<Integrator>("integrator").unwrap_or(Integrator::Auto);
    let dealias = r.parsed::<Dealias>("dealias").unwrap_or(Dealias::TwoThirds);
    let cfl_safety = r.float("cfl_safety").unwrap_or(0.9);
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        r.fail("cfl_safety", format!("must lie in (0, 1] (got {cfl_safety})"));
    }
    let gamma_form = match r.string("gamma").map(|s| parse_gamma(&s)) {
        Some(Ok(g)) => g,
        Some(Err(e)) => {
            r.fail("gamma", e);
            GammaForm::Consistent
        }
        None => GammaForm::Consistent,
    };
    let renormalize_every = r.uint("renormalize_every").map(|v| v as usize);
    if renormalize_every == Some(0) {
        r.fail("renormalize_every", "must be >= 1 when given");
    }
    let picard = if r.boolean("picard").unwrap_or(false) {
        let d = PicardSettings::default();
        let max_iters = r.uint("picard_max_iters").map(|v| v as usize).unwrap_or(d.max_iters);
        let tolerance = r.float("picard_tolerance").unwrap_or(d.tolerance);
        if max_iters == 0 {
            r.fail("picard_max_iters", "must be >= 1");
        }
        if !(tolerance > 0.0) {
            r.fail("picard_tolerance", format!("must be > 0 (got {tolerance})"));
        }
        Some(PicardSettings { max_iters, tolerance })
    } else {
        None
    };
    if let Some(dt) = dt {
        if !(dt > 0.0) || !dt.is_finite() {
            r.fail("dt", format!("must be > 0 (got {dt})"));
        }
    }

    let mut r = reader!("initial");
    let kind = r.parsed::<InitialKind>("kind").unwrap_or(InitialKind::Random);
    let amplitude = r.float("amplitude").unwrap_or(0.0);
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        r.fail("amplitude", format!("must be >= 0 (got {amplitude})"));
    }
    let seed = r.uint("seed").unwrap_or(0);
    let band = r.float("band").unwrap_or(DEFAULT_BAND);
    if let Some(n) = n {
        if !(band > 0.0 && band < (n / 2) as f64) {
            r.fail("band", format!("must lie in (0, n/2) = (0, {}) (got {band})", n / 2));
        }
    }

    let mut r = reader!("diagnostics");
    let s = match r.raw("s") {
        Some(Value::Boolean(false)) => None,
        _ => Some(r.uint("s").unwrap_or(2) as usize),
    };
    let eta = match r.raw("eta") {
        None => None,
        Some(Value::String(s)) if s == "eta0" => Some(EtaSpec::Eta0),
        Some(Value::String(s)) => {
            let msg = format!("expected a number or \"eta0\", got {s:?}");
            r.fail("eta", msg);
            None
        }
        Some(_) => r.float("eta").map(EtaSpec::Value),
    };
    let estimate_constant = r.float("estimate_constant").unwrap_or(1.0);
    let sample_every = r.uint("sample_every").unwrap_or(1) as usize;
    if sample_every == 0 {
        r.fail("sample_every", "must be >= 1");
    }
    if eta.is_some() && s.is_none() {
        r.fail("eta", "needs the higher-order functionals (set s >= 1)");
    }
    if eta.is_some() && s == Some(0) {
        r.fail("eta", "needs s >= 1");
    }
    if let (Some(e), Some(c)) = (eta, coefficients.as_ref()) {
        match eta0(c, estimate_constant) {
            Err(err) => r.fail("eta", err),
            Ok(max) => {
                if let EtaSpec::Value(v) = e {
                    if !(v > 0.0 && v <= max) {
                        r.fail("eta", format!("must lie in (0, eta0] = (0, {max}] (got {v})"));
                    }
                }
            }
        }
    }

    let mut r = reader!("output");
    let csv = r.string("csv").map(PathBuf::from);
    let snapshot = r.string("snapshot").map(PathBuf::from);
    let snapshot_every = r.uint("snapshot_every").unwrap_or(0) as usize;
    if snapshot.is_some() && snapshot_every == 0 {
        r.fail("snapshot_every", "must be >= 1 when snapshot is set");
    }

    let mut r = reader!("run");
    let t_end = r.float("t_end");
    let t_end = r.required("t_end", t_end);
    if let (Some(t), Some(dt)) = (t_end, dt) {
        if !(t > 0.0) {
            r.fail("t_end", format!("must be > 0 (got {t})"));
        } else if dt > 0.0 {
            let steps = (t / dt).round();
            if steps < 1.0 || (steps * dt - t).abs() > 1e-9 * t {
                r.fail("t_end", format!("must be a whole number of steps of dt = {dt} (got {t})"));
            }
        }
    }

    let mut solver = SolverConfig::new(dt.unwrap_or(f64::NAN));
    solver.integrator = integrator;
    solver.dealias = dealias;
    solver.cfl_safety = cfl_safety;
    solver.gamma_form = gamma_form;
    solver.renormalize_every = renormalize_every;
    solver.picard = picard;

    if let (Some(g), Some(c), Some(dt)) = (&grid, &coefficients, dt) {
        if dt > 0.0 {
            let speed = if kind == InitialKind::Random { amplitude } else { 0.0 };
            if let Err(e) = check_cfl(g, c, &solver, speed) {
                errors.push(format!("[solver].dt: {e}"));
            }
        }
    }

    if !errors.is_empty() {
        return Err(ElhError::Config(errors));
    }
    Ok(RunConfig {
        dim: dim.unwrap() as usize,
        n: n.unwrap() as usize,
        coefficient_spec,
        coefficients: coefficients.unwrap(),
        solver,
        initial: InitialSpec {
            kind,
            amplitude,
            seed,
            band,
        },
        diagnostics: DiagnosticsSpec {
            s,
            eta,
            estimate_constant,
            sample_every,
        },
        output: OutputSpec {
            csv,
            snapshot,
            snapshot_every,
        },
        t_end: t_end.unwrap(),
    })
}

pub fn config_to_table(cfg: &RunConfig) -> Table {
    fn put(t: &mut Table, k: &str, v: impl Into<Value>) {
        t.insert(k.to_string(), v.into());
    }
    let mut root = Table::new();

    let mut grid = Table::new();
    put(&mut grid, "dim", cfg.dim as i64);
    put(&mut grid, "n", cfg.n as i64);
    root.insert("grid".into(), grid.into());

    let mut co = Table::new();
    let cs = &cfg.coefficient_spec;
    if let Some(p) = &cs.preset {
        put(&mut co, "preset", p.as_str());
    }
    for (k, v) in [
        ("mu1", cs.mu1),
        ("mu4", cs.mu4),
        ("mu5", cs.mu5),
        ("mu6", cs.mu6),
        ("lambda1", cs.lambda1),
        ("rho1", cs.rho1),
        ("delta", cs.delta),
    ] {
        if let Some(v) = v {
            put(&mut co, k, v);
        }
    }
    root.insert("coefficients".into(), co.into());

    let mut so = Table::new();
    let s = &cfg.solver;
    put(&mut so, "dt", s.dt);
    put(&mut so, "integrator", s.integrator.name());
    put(&mut so, "dealias", s.dealias.name());
    put(&mut so, "cfl_safety", s.cfl_safety);
    put(&mut so, "gamma", gamma_name(s.gamma_form));
    if let Some(r) = s.renormalize_every {
        put(&mut so, "renormalize_every", r as i64);
    }
    put(&mut so, "picard", s.picard.is_some());
    if let Some(p) = s.picard {
        put(&mut so, "picard_max_iters", p.max_iters as i64);
        put(&mut so, "picard_tolerance", p.tolerance);
    }
    root.insert("solver".into(), so.into());

    let mut init = Table::new();
    put(&mut init, "kind", cfg.initial.kind.to_string());
    put(&mut init, "amplitude", cfg.initial.amplitude);
    put(&mut init, "seed", cfg.initial.seed as i64);
    put(&mut init, "band", cfg.initial.band);
    root.insert("initial".into(), init.into());

    let mut di = Table::new();
    let d = &cfg.diagnostics;
    match d.s {
        Some(s) => put(&mut di, "s", s as i64),
        None => put(&mut di, "s", false),
    }
    match d.eta {
        Some(EtaSpec::Value(v)) => put(&mut di, "eta", v),
        Some(EtaSpec::Eta0) => put(&mut di, "eta", "eta0"),
        None => {}
    }
    put(&mut di, "estimate_constant", d.estimate_constant);
    put(&mut di, "sample_every", d.sample_every as i64);
    root.insert("diagnostics".into(), di.into());

    let mut out = Table::new();
    if let Some(p) = &cfg.output.csv {
        put(&mut out, "csv", p.to_string_lossy().into_owned());
    }
    if let Some(p) = &cfg.output.snapshot {
        put(&mut out, "snapshot", p.to_string_lossy().into_owned());
        put(&mut out, "snapshot_every", cfg.output.snapshot_every as i64);
    }
    root.insert("output".into(), out.into());

    let mut run = Table::new();
    put(&mut run, "t_end", cfg.t_end);
    root.insert("run".into(), run.into());
    root
}

pub fn serialize_config(cfg: &RunConfig) -> String {
    toml::to_string(&config_to_table(cfg)).expect("plain tables always serialize")
}

/// Sets `section.key` from command-line text: integer, then float, then bool, else string.
pub fn set_key(table: &mut Table, dotted: &str, raw: &str) -> Result<(), String> {
    let (section, key) = dotted
        .split_once('.')
        .ok_or_else(|| format!("axis {dotted:?} must look like section.key"))?;
    let value = if let Ok(i) = raw.parse::<i64>() {
        Value::Integer(i)
    } else if let Ok(x) = raw.parse::<f64>() {
        Value::Float(x)
    } else if let Ok(b) = raw.parse::<bool>() {
        Value::Boolean(b)
    } else {
        Value::String(raw.to_string())
    };
    let sec = table
        .entry(section.to_string())
        .or_insert_with(|| Value::Table(Table::new()));
    match sec.as_table_mut() {
        Some(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        None => Err(format!("[{section}] is not a section")),
    }
}
