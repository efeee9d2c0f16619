use std::path::PathBuf;

use toml::Table;

use super::config::{config_from_table, set_key, RunConfig};
use super::output::{save_csv, RunSummary};
use super::snapshot::save_snapshot;
use crate::coefficients::{classify, eta0, DissipationClass};
use crate::diagnostics::{attach_residuals, identity_suite, record, DiagnosticSettings, DiagnosticsRecord, IdentityCheck};
use crate::dynamics::{make_initial_data, picard_step, State, Stepper, RNG_DESCRIPTION};
use crate::error::ElhError;
use crate::spectral::Dealias;

/// Everything a simulation produced, including a failure part way through.
#[derive(Debug)]
pub struct RunResult {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: State,
    pub failure: Option<ElhError>,
    pub summary: RunSummary,
}

pub fn diagnostic_settings(cfg: &RunConfig) -> DiagnosticSettings {
    DiagnosticSettings {
        // the state lives in the solver's band; quadrature is padded to be exact there
        rule: cfg.solver.dealias,
        hs_order: cfg.diagnostics.s,
        eta: cfg.eta(),
        estimate_constant: cfg.diagnostics.estimate_constant,
    }
}

pub fn csv_header(cfg: &RunConfig) -> Vec<String> {
    vec![
        "elh diagnostics".to_string(),
        format!("rng: {RNG_DESCRIPTION}"),
        format!("seed: {}", cfg.initial.seed),
        format!(
            "initial: kind={} amplitude={:?} band={:?}",
            cfg.initial.kind, cfg.initial.amplitude, cfg.initial.band
        ),
        format!(
            "grid: dim={} n={} dealias={} dt={:?} integrator={}",
            cfg.dim, cfg.n, cfg.solver.dealias, cfg.solver.dt, cfg.solver.integrator
        ),
        format!("coefficients: {}", cfg.coefficients),
    ]
}

fn snapshot_path(prefix: &std::path::Path, step: usize) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(format!("_{step:06}.bin"));
    PathBuf::from(name)
}

/// Runs to `t_end` or the first failure, without writing anything.
pub fn simulate(cfg: &RunConfig) -> Result<RunResult, ElhError> {
    let grid = cfg.grid();
    let c = &cfg.coefficients;
    let diag = diagnostic_settings(cfg);
    let mut state = make_initial_data(cfg.initial.kind, cfg.initial.amplitude, cfg.initial.seed, &grid, cfg.initial.band)?;
    let mut stepper = Stepper::new(&grid, c, &cfg.solver)?;
    log::info!("integrator {} for {} steps", stepper.integrator(), cfg.steps());

    let mut records = vec![record(&state, c, &diag)?];
    let snapshots = |step: usize, s: &State| -> Result<(), ElhError> {
        if let Some(prefix) = &cfg.output.snapshot {
            if step % cfg.output.snapshot_every == 0 {
                save_snapshot(&snapshot_path(prefix, step), s)?;
            }
        }
        Ok(())
    };
    snapshots(0, &state)?;

    let mut failure = None;
    for n in 1..=cfg.steps() {
        let next = if cfg.solver.picard.is_some() {
            picard_step(&state, c, &cfg.solver)
        } else {
            stepper.step(&state)
        };
        match next {
            Ok(mut s) => {
                s.t = n as f64 * cfg.solver.dt;
                state = s;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
        if n % cfg.diagnostics.sample_every == 0 {
            let rec = record(&state, c, &diag)?;
            let bad = [rec.e_basic, rec.dissipation.total].iter().any(|x| !x.is_finite());
            records.push(rec);
            if bad {
                failure = Some(ElhError::BlowUp {
                    t: state.t,
                    reason: "diagnostics are not finite".into(),
                    last: None,
                });
                break;
            }
        }
        if let Err(e) = snapshots(n, &state) {
            failure = Some(e);
            break;
        }
    }
    attach_residuals(&mut records)?;
    if let Some(ElhError::BlowUp { last, .. }) = &mut failure {
        *last = records.last().cloned().map(Box::new);
    }
    let summary = RunSummary::from_records(&records);
    Ok(RunResult {
        records,
        final_state: state,
        failure,
        summary,
    })
}

/// `simulate` plus the CSV artifact; partial output is kept when the run fails.
pub fn run_simulate(cfg: &RunConfig) -> Result<RunResult, ElhError> {
    let mut result = simulate(cfg)?;
    if let Some(path) = &cfg.output.csv {
        save_csv(path, &csv_header(cfg), &result.records)?;
    }
    if let Some(e) = result.failure.take() {
        return Err(e);
    }
    Ok(result)
}

pub fn run_check_coeffs(cfg: &RunConfig) -> String {
    let c = &cfg.coefficients;
    let [r1, r2, r3] = c.relation_residuals();
    let mut out = format!("{c}\nrelation residuals: {r1:.3e} {r2:.3e} {r3:.3e}\n");
    match classify(c, None) {
        Ok(DissipationClass::StrictDamping) => {
            out += "class: StrictDamping (mu1 >= 0, mu4 > 0, lambda1 < 0, mu5 + mu6 + lambda2^2/lambda1 >= 0)\n";
            if let Ok(e) = eta0(c, cfg.diagnostics.estimate_constant) {
                out += &format!("eta0 (C = {}): {e:.6e}\n", cfg.diagnostics.estimate_constant);
            }
        }
        Ok(DissipationClass::ZeroLambda1(delta)) => {
            out += &format!(
                "class: ZeroLambda1 with delta = {delta} (mu1 >= 0, mu4 > 0, lambda1 = 0, (1-delta) mu4 (mu5+mu6) >= 2 lambda2^2)\n"
            );
        }
        Ok(DissipationClass::Invalid(why)) => out += &format!("class: Invalid ({why})\n"),
        Err(e) => out += &format!("class: undetermined ({e})\n"),
    }
    out
}

pub fn run_identities(cfg: &RunConfig) -> Result<Vec<IdentityCheck>, ElhError> {
    let grid = cfg.grid();
    let s = make_initial_data(cfg.initial.kind, cfg.initial.amplitude, cfg.initial.seed, &grid, cfg.initial.band)?;
    identity_suite(&s.u, &s.d, &s.w, &cfg.coefficients, Dealias::Full)
}

/// Outcome of one point of a parameter sweep.
#[derive(Debug)]
pub struct SweepPoint {
    pub value: String,
    pub outcome: Result<RunSummary, String>,
    pub final_energy: Option<f64>,
    pub final_eta: Option<f64>,
}

/// Worker count from `ELH_THREADS`, defaulting to the available parallelism.
pub fn worker_limit() -> usize {
    std::env::var("ELH_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Independent runs with `axis` set to each value; file outputs are disabled per point.
pub fn run_sweep(base: &Table, axis: &str, values: &[String], workers: usize) -> Vec<SweepPoint> {
    let run_one = |value: &String| -> SweepPoint {
        let mut table = base.clone();
        let prepared = set_key(&mut table, axis, value).map_err(|e| e.to_string()).and_then(|_| {
            table.remove("output");
            config_from_table(&table).map_err(|e| e.to_string())
        });
        match prepared.and_then(|cfg| simulate(&cfg).map_err(|e| e.to_string())) {
            Err(e) => SweepPoint {
                value: value.clone(),
                outcome: Err(e),
                final_energy: None,
                final_eta: None,
            },
            Ok(r) => {
                let last = r.records.last();
                SweepPoint {
                    value: value.clone(),
                    final_energy: last.map(|l| l.e_basic),
                    final_eta: last.and_then(|l| l.e_eta),
                    outcome: match r.failure {
                        Some(e) => Err(e.to_string()),
                        None => Ok(r.summary),
                    },
                }
            }
        }
    };
    let workers = workers.clamp(1, values.len().max(1));
    let next = std::sync::atomic::AtomicUsize::new(0);
    let mut slots: Vec<Option<SweepPoint>> = (0..values.len()).map(|_| None).collect();
    let results = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= values.len() {
                    break;
                }
                let p = run_one(&values[i]);
                results.lock().expect("no worker panics while holding the lock")[i] = Some(p);
            });
        }
    });
    slots.into_iter().map(|p| p.expect("every point ran")).collect()
}

pub fn render_sweep(axis: &str, points: &[SweepPoint]) -> String {
    let mut out = format!("{axis:>14} {:>10} {:>24} {:>24} {:>14} {:>12} {:>8}\n", "status", "E_basic(final)", "E_eta(final)", "max_residual", "max_h", "eta_mono");
    for p in points {
        let num = |x: Option<f64>| x.map(|v| format!("{v:.16e}")).unwrap_or_else(|| "-".into());
        match &p.outcome {
            Ok(s) => {
                let mono = match s.eta_monotone() {
                    Some(true) => "yes",
                    Some(false) => "no",
                    None => "-",
                };
                out += &format!(
                    "{:>14} {:>10} {:>24} {:>24} {:>14} {:>12.3e} {:>8}\n",
                    p.value,
                    "ok",
                    num(p.final_energy),
                    num(p.final_eta),
                    s.max_residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into()),
                    s.max_h,
                    mono
                );
            }
            Err(e) => out += &format!("{:>14} {:>10} {}\n", p.value, "failed", e.lines().next().unwrap_or("")),
        }
    }
    out
}
