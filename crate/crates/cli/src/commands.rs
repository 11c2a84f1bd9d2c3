//! One function per subcommand, each producing datasets from a config.

use engine_core::analytic;
use engine_core::kur::{violation_windows, ActivityMode, KurKind, KurSeries};
use engine_core::liouville::BasisTag;
use engine_core::metrics::{concurrence, critical_current, current_coherence_ratio_at, steady_sweep, CriticalPoint, SweepPoint};
use engine_core::model::{initial_state, Bath, EngineParams, InitialKind};
use engine_core::observables::{NoiseKernel, TimeGrid, EARLY_TIME_GAMMA};
use engine_core::validate::{run_suite, InvariantCheck, SuiteSettings};
use engine_core::EngineError;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig, SweepVariable};
use crate::dataset::{Cell, Dataset};

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Numerical(String),
}

impl From<EngineError> for CommandError {
    fn from(e: EngineError) -> Self {
        CommandError::Numerical(e.to_string())
    }
}

type Outcome = Result<Vec<Dataset>, CommandError>;

fn metadata(config: &RunConfig, command: &str, units: Value, extra: Value) -> Value {
    let mut warnings: Vec<String> = Vec::new();
    for p in config.parameter_sets() {
        for w in p.warnings() {
            let line = format!("t_l={} mu_l={}: {w}", p.t_l, p.mu_l);
            if !warnings.contains(&line) {
                warnings.push(line);
            }
        }
    }
    let mut meta = json!({
        "artifact": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
        "units": units,
        "warnings": warnings,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    meta
}

fn early_time_note() -> Value {
    json!(format!(
        "rows with t_gamma < {EARLY_TIME_GAMMA} precede the time scale on which the Markovian description applies"
    ))
}

struct Job {
    params: EngineParams,
    kind: InitialKind,
}

fn jobs(config: &RunConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for params in config.parameter_sets() {
        for kind in config.initial_state.kinds() {
            out.push(Job { params, kind });
        }
    }
    out
}

fn kernel(config: &RunConfig, job: &Job) -> Result<NoiseKernel, EngineError> {
    let grid = TimeGrid::in_inverse_gamma(
        &job.params,
        config.noise.step_in_inverse_gamma,
        config.grid.t_max_in_inverse_gamma,
    )?;
    NoiseKernel::new(&job.params, &initial_state(job.kind, &job.params), BasisTag::ReducedX, grid)
}

/// Output sample indices on the kernel grid.
fn samples(config: &RunConfig) -> impl Iterator<Item = usize> {
    let stride = config.stride();
    (0..config.grid.n_points).map(move |i| i * stride)
}

fn label_cells(job: &Job) -> Vec<Cell> {
    vec![job.params.t_l.into(), job.params.mu_l.into(), job.kind.label().into()]
}

fn run_jobs<F>(config: &RunConfig, row_maker: F) -> Result<Vec<Vec<Vec<Cell>>>, CommandError>
where
    F: Fn(&Job, &NoiseKernel) -> Vec<Vec<Cell>> + Sync,
{
    jobs(config)
        .par_iter()
        .map(|job| {
            let k = kernel(config, job)?;
            Ok(row_maker(job, &k))
        })
        .collect()
}

pub fn evolve(config: &RunConfig) -> Outcome {
    let columns = [
        "t_l",
        "mu_l",
        "initial_state",
        "t_gamma",
        "current_l_over_gamma_l",
        "current_r_over_gamma_r",
        "internal_current_over_gamma_l",
        "coherence_re",
        "coherence_im",
        "concurrence",
        "ratio_i_over_2gc",
        "n_left",
        "n_right",
    ];
    let units = json!({
        "t_l": "eps_S", "mu_l": "eps_S", "t_gamma": "1/Gamma",
        "current_l_over_gamma_l": "1", "current_r_over_gamma_r": "1", "internal_current_over_gamma_l": "1",
        "coherence_re": "1", "coherence_im": "1", "concurrence": "1", "ratio_i_over_2gc": "1",
        "n_left": "1", "n_right": "1",
    });
    let extra = json!({
        "notes": [early_time_note(), "ratio_i_over_2gc is empty where |c| <= 1e-14"],
    });
    let blocks = run_jobs(config, |job, k| {
        let p = &job.params;
        samples(config)
            .map(|n| {
                let s = k.xstate(n);
                let mut row = label_cells(job);
                row.extend([
                    Cell::from(k.grid().time(n) * p.total_rate()),
                    (k.current(Bath::Left, n) / p.gamma_l).into(),
                    (k.current(Bath::Right, n) / p.gamma_r).into(),
                    (k.internal_current(n) / p.gamma_l).into(),
                    s.c.re.into(),
                    s.c.im.into(),
                    concurrence(&s).into(),
                    current_coherence_ratio_at(k, n).ok().into(),
                    s.n_left().into(),
                    s.n_right().into(),
                ]);
                row
            })
            .collect()
    })?;
    let mut d = Dataset::new("evolve", metadata(config, "evolve", units, extra), &columns);
    blocks.into_iter().flatten().for_each(|r| d.push(r));
    Ok(vec![d])
}

pub fn noise(config: &RunConfig) -> Outcome {
    let columns = [
        "t_l",
        "mu_l",
        "initial_state",
        "t_gamma",
        "s_ll_over_gamma_l",
        "s_rr_over_gamma_r",
        "s_lr_over_gamma_l",
        "s_rl_over_gamma_l",
        "s_ll_steady_over_gamma_l",
    ];
    let units = json!({
        "t_l": "eps_S", "mu_l": "eps_S", "t_gamma": "1/Gamma",
        "s_ll_over_gamma_l": "1", "s_rr_over_gamma_r": "1", "s_lr_over_gamma_l": "1", "s_rl_over_gamma_l": "1",
        "s_ll_steady_over_gamma_l": "1",
    });
    let extra = json!({ "notes": [early_time_note()] });
    let blocks = run_jobs(config, |job, k| {
        let p = &job.params;
        let (l, r) = (Bath::Left, Bath::Right);
        let (ll, rr, lr, rl) = (k.noise_series(l, l), k.noise_series(r, r), k.noise_series(l, r), k.noise_series(r, l));
        let steady = analytic::steady_noise(p) / p.gamma_l;
        samples(config)
            .map(|n| {
                let mut row = label_cells(job);
                row.extend([
                    Cell::from(k.grid().time(n) * p.total_rate()),
                    (ll[n] / p.gamma_l).into(),
                    (rr[n] / p.gamma_r).into(),
                    (lr[n] / p.gamma_l).into(),
                    (rl[n] / p.gamma_l).into(),
                    steady.into(),
                ]);
                row
            })
            .collect()
    })?;
    let mut d = Dataset::new("noise", metadata(config, "noise", units, extra), &columns);
    blocks.into_iter().flatten().for_each(|r| d.push(r));
    Ok(vec![d])
}

pub fn kur(config: &RunConfig) -> Outcome {
    let columns = [
        "t_l",
        "mu_l",
        "initial_state",
        "t_gamma",
        "current_l_over_gamma_l",
        "s_ll_over_gamma_l",
        "activity_over_gamma_l",
        "internal_activity_over_gamma_l",
        "r_left",
        "r_asym",
        "r_left_internal",
        "r_asym_internal",
    ];
    let units = json!({
        "t_l": "eps_S", "mu_l": "eps_S", "t_gamma": "1/Gamma",
        "current_l_over_gamma_l": "1", "s_ll_over_gamma_l": "1", "activity_over_gamma_l": "1",
        "internal_activity_over_gamma_l": "1",
        "r_left": "1", "r_asym": "1", "r_left_internal": "1", "r_asym_internal": "1",
        "violation_windows": "1/Gamma",
    });
    let results: Vec<(Vec<Vec<Cell>>, Value)> = jobs(config)
        .par_iter()
        .map(|job| {
            let k = kernel(config, job)?;
            let p = &job.params;
            let bare = KurSeries::compute(&k, ActivityMode::BathsOnly);
            let full = KurSeries::compute(&k, ActivityMode::WithInternal);
            let s_ll = k.noise_series(Bath::Left, Bath::Left);
            let rows = samples(config)
                .map(|n| {
                    let mut row = label_cells(job);
                    row.extend([
                        Cell::from(bare.t_gamma[n]),
                        (k.current(Bath::Left, n) / p.gamma_l).into(),
                        (s_ll[n] / p.gamma_l).into(),
                        (k.total_activity(n) / p.gamma_l).into(),
                        (k.internal_activity(n) / p.gamma_l).into(),
                        bare.r_left[n].into(),
                        bare.r_asym[n].into(),
                        full.r_left[n].into(),
                        full.r_asym[n].into(),
                    ]);
                    row
                })
                .collect();
            let windows = json!({
                "t_l": p.t_l,
                "mu_l": p.mu_l,
                "initial_state": job.kind.label(),
                "r_left": violation_windows(&bare, KurKind::Left),
                "r_asym": violation_windows(&bare, KurKind::Asym),
                "r_left_internal": violation_windows(&full, KurKind::Left),
                "r_asym_internal": violation_windows(&full, KurKind::Asym),
            });
            Ok((rows, windows))
        })
        .collect::<Result<_, CommandError>>()?;
    let steady: Vec<Value> = config
        .parameter_sets()
        .iter()
        .map(|p| json!({ "t_l": p.t_l, "mu_l": p.mu_l, "steady_kur": analytic::steady_kur(p).ok() }))
        .collect();
    let windows: Vec<Value> = results.iter().map(|(_, w)| w.clone()).collect();
    let extra = json!({
        "notes": [early_time_note(), "ratio cells are empty where the current denominator is <= 1e-14"],
        "steady_state": steady,
        "violation_windows": windows,
    });
    let mut d = Dataset::new("kur", metadata(config, "kur", units, extra), &columns);
    results.into_iter().flat_map(|(rows, _)| rows).for_each(|r| d.push(r));
    Ok(vec![d])
}

pub fn sweep(config: &RunConfig) -> Outcome {
    let Some(sweep) = &config.sweep else {
        return Err(CommandError::Config(ConfigError {
            path: "sweep".into(),
            message: "required by the sweep subcommand".into(),
        }));
    };
    let points: Vec<SweepPoint> = match sweep.variable {
        SweepVariable::TL => steady_sweep(&config.params, &sweep.values)?,
        SweepVariable::MuL => sweep
            .values
            .par_iter()
            .map(|&v| SweepPoint::at(&config.params.with_mu_l(v)))
            .collect::<Result<_, _>>()?,
    };
    let columns = [
        "t_l",
        "mu_l",
        "steady_current_over_gamma_l",
        "steady_concurrence",
        "steady_coherence",
        "r1",
        "r4",
        "steady_kur",
    ];
    let units = json!({
        "t_l": "eps_S", "mu_l": "eps_S", "steady_current_over_gamma_l": "1", "steady_concurrence": "1",
        "steady_coherence": "1", "r1": "1", "r4": "1", "steady_kur": "1",
    });
    let extra = json!({ "sweep_variable": sweep.variable.label(), "notes": ["steady_kur is empty at zero bias"] });
    let mut d = Dataset::new("sweep", metadata(config, "sweep", units, extra), &columns);
    for (point, &v) in points.iter().zip(&sweep.values) {
        let p = sweep.variable.apply(&config.params, v);
        d.push(vec![
            p.t_l.into(),
            p.mu_l.into(),
            (point.steady_current / p.gamma_l).into(),
            point.steady_concurrence.into(),
            point.steady_coherence.into(),
            point.state.r1.into(),
            point.state.r4.into(),
            analytic::steady_kur(&p).ok().into(),
        ]);
    }
    Ok(vec![d])
}

/// Temperature bracket for the entanglement onset: from the right bath
/// temperature up to the highest left temperature in the config.
fn witness_bracket(config: &RunConfig) -> (f64, f64) {
    let hi = config.parameter_sets().iter().map(|p| p.t_l).fold(config.params.t_l, f64::max);
    (config.params.t_r, hi)
}

pub fn witness(config: &RunConfig) -> Outcome {
    let bracket = witness_bracket(config);
    let CriticalPoint { t_l: t_crit, current: i_crit } = critical_current(&config.params, bracket)?;
    let columns = [
        "t_l",
        "mu_l",
        "initial_state",
        "i_crit_over_gamma_l",
        "failure_points",
        "first_failure_t_gamma",
        "last_failure_t_gamma",
    ];
    let units = json!({
        "t_l": "eps_S", "mu_l": "eps_S", "i_crit_over_gamma_l": "1", "failure_points": "count",
        "first_failure_t_gamma": "1/Gamma", "last_failure_t_gamma": "1/Gamma", "critical_t_l": "eps_S",
    });
    let gamma_l = config.params.gamma_l;
    let blocks = run_jobs(config, |job, k| {
        let total = job.params.total_rate();
        let hits: Vec<f64> = (0..k.grid().len())
            .filter(|&n| concurrence(&k.xstate(n)) == 0.0 && k.current(Bath::Left, n) > i_crit)
            .map(|n| k.grid().time(n) * total)
            .collect();
        let mut row = label_cells(job);
        row.extend([
            Cell::from(i_crit / gamma_l),
            hits.len().into(),
            hits.first().copied().into(),
            hits.last().copied().into(),
        ]);
        vec![row]
    })?;
    let extra = json!({
        "critical_t_l": t_crit,
        "critical_current_over_gamma_l": i_crit / gamma_l,
        "bracket_t_l": [bracket.0, bracket.1],
        "notes": ["failure points are noise-grid times with zero concurrence while I_L exceeds the critical current"],
    });
    let mut d = Dataset::new("witness", metadata(config, "witness", units, extra), &columns);
    blocks.into_iter().flatten().for_each(|r| d.push(r));
    Ok(vec![d])
}

pub fn validate(config: &RunConfig) -> Result<(Vec<Dataset>, Vec<InvariantCheck>), CommandError> {
    let settings = SuiteSettings {
        step_gamma: config.noise.step_in_inverse_gamma,
        t_max_gamma: config.grid.t_max_in_inverse_gamma,
    };
    let checks = run_suite(&config.parameter_sets(), settings)?;
    let units = json!({ "name": "text", "passed": "text", "detail": "text" });
    let mut d = Dataset::new("validate", metadata(config, "validate", units, json!({})), &["name", "passed", "detail"]);
    for c in &checks {
        d.push(vec![c.name.into(), if c.passed { "true" } else { "false" }.into(), c.detail.replace(',', ";").as_str().into()]);
    }
    Ok((vec![d], checks))
}
