use lyap_core::verify::{run_suite, Suite, SuiteSummary};
use lyap_core::{
    contour_moment, first_optimal_merge, gamma_report, simulate_inertia, ContourConfig, Error,
    MomentInstance,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::args::{Command, Format, InstanceArgs, Rule, RunConfig};
use crate::error::CliError;
use crate::output::{emit, format_f64, to_csv, to_json};

/// Result of a command that produced its output.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    /// Output was written but a check did not hold.
    CheckFailed,
}

impl Status {
    fn from_ok(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::CheckFailed
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Status, CliError> {
    let (bytes, status) = match &cfg.command {
        Command::Gamma {
            instance,
            tolerance,
        } => gamma(cfg, instance, *tolerance)?,
        Command::Clusters { instance } => clusters(cfg, instance)?,
        Command::Verify { count, suites } => verify(cfg, *count, suites)?,
        Command::Moments {
            instance,
            big_t,
            points,
            truncation_sigmas,
            offsets,
            rule,
            tolerance,
        } => {
            let opts = MomentOptions {
                big_t: *big_t,
                points: *points,
                sigmas: *truncation_sigmas,
                offsets: offsets.clone(),
                rule: *rule,
                tolerance: *tolerance,
            };
            moments(cfg, instance, &opts)?
        }
        Command::Sweep {
            instance,
            vary,
            from,
            to,
            steps,
        } => sweep(cfg, instance, vary, *from, *to, *steps)?,
    };
    emit(&bytes, cfg.output.as_deref())?;
    Ok(status)
}

fn format_or(
    cfg: &RunConfig,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format, CliError> {
    let format = cfg.format.unwrap_or(default);
    if allowed.contains(&format) {
        Ok(format)
    } else {
        Err(CliError::usage(
            format!("`{command}` does not support --format {format:?}").to_lowercase(),
        ))
    }
}

fn gamma(
    cfg: &RunConfig,
    instance: &InstanceArgs,
    tolerance: f64,
) -> Result<(Vec<u8>, Status), CliError> {
    format_or(cfg, Format::Json, &[Format::Json], "gamma")?;
    let inst = instance.load()?;
    let report = gamma_report(&inst);
    let status = Status::from_ok(report.relative_dev() <= tolerance && report.structure_ok);
    Ok((to_json(&report)?, status))
}

fn clusters(cfg: &RunConfig, instance: &InstanceArgs) -> Result<(Vec<u8>, Status), CliError> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv], "clusters")?;
    let inst = instance.load()?;
    let res = simulate_inertia(&inst);
    let bytes = match format {
        Format::Json => to_json(&res)?,
        Format::Csv => {
            let rows = res
                .inertia_paths
                .iter()
                .zip(&res.optimal_paths)
                .enumerate()
                .flat_map(|(i, (zeta, xi))| {
                    zeta.breakpoints
                        .iter()
                        .zip(&zeta.values)
                        .zip(&xi.values)
                        .map(move |((&s, &z), &x)| {
                            vec![
                                (i + 1).to_string(),
                                format_f64(s),
                                format_f64(z),
                                format_f64(x),
                            ]
                        })
                });
            to_csv(&["i", "s", "zeta", "xi"], rows)?
        }
    };
    Ok((bytes, Status::Pass))
}

#[derive(Serialize)]
struct VerifyOutput {
    seed: u64,
    count: usize,
    suites: Vec<SuiteSummary>,
    ok: bool,
}

fn verify(cfg: &RunConfig, count: usize, suites: &[Suite]) -> Result<(Vec<u8>, Status), CliError> {
    let format = format_or(cfg, Format::Json, &[Format::Json, Format::Csv], "verify")?;
    let mut selected: Vec<Suite> = Vec::new();
    for &s in if suites.is_empty() {
        &Suite::ALL[..]
    } else {
        suites
    } {
        if !selected.contains(&s) {
            selected.push(s);
        }
    }
    let summaries: Vec<SuiteSummary> = selected
        .iter()
        .map(|&s| run_suite(s, cfg.seed, count))
        .collect();
    let ok = summaries.iter().all(SuiteSummary::ok);
    let bytes = match format {
        Format::Json => to_json(&VerifyOutput {
            seed: cfg.seed,
            count,
            suites: summaries,
            ok,
        })?,
        Format::Csv => to_csv(
            &["suite", "checked", "passed", "skipped", "failed"],
            summaries.iter().map(|s| {
                vec![
                    s.suite.to_string(),
                    s.checked.to_string(),
                    s.passed.to_string(),
                    s.skipped.to_string(),
                    s.failed.to_string(),
                ]
            }),
        )?,
    };
    Ok((bytes, Status::from_ok(ok)))
}

struct MomentOptions {
    big_t: f64,
    points: Option<usize>,
    sigmas: f64,
    offsets: Option<Vec<f64>>,
    rule: Rule,
    tolerance: f64,
}

#[derive(Serialize)]
struct MomentOutput {
    moment: f64,
    rate: f64,
    gamma: f64,
    gap: f64,
    imag_residual: f64,
}

fn moments(
    cfg: &RunConfig,
    instance: &InstanceArgs,
    opts: &MomentOptions,
) -> Result<(Vec<u8>, Status), CliError> {
    format_or(cfg, Format::Json, &[Format::Json], "moments")?;
    let inst = instance.load()?;
    if !(opts.big_t > 0.0 && opts.big_t.is_finite()) {
        return Err(Error::NonPositiveTime(opts.big_t).into());
    }
    let mut contour = ContourConfig::around_minimizer(&inst, opts.big_t, opts.sigmas);
    if let Some(p) = opts.points {
        contour.points = p;
    }
    if let Some(a) = &opts.offsets {
        contour.offsets = a.clone();
    }
    contour.rule = opts.rule.into();
    let est = contour_moment(opts.big_t, &inst, &contour)?;
    if !(est.moment > 0.0) {
        return Err(Error::NonPositiveMoment(est.moment).into());
    }
    let rate = est.moment.ln() / opts.big_t;
    let gamma = gamma_report(&inst).gamma();
    let out = MomentOutput {
        moment: est.moment,
        rate,
        gamma,
        gap: (rate - gamma).abs(),
        imag_residual: est.imag_residual,
    };
    Ok((
        to_json(&out)?,
        Status::from_ok(est.imag_residual <= opts.tolerance),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SweepParam {
    Time,
    Location(usize),
}

fn parse_param(vary: &str, n: usize) -> Result<SweepParam, CliError> {
    if vary == "t" {
        return Ok(SweepParam::Time);
    }
    match vary.strip_prefix('x').and_then(|k| k.parse::<usize>().ok()) {
        Some(k) if (1..=n).contains(&k) => Ok(SweepParam::Location(k - 1)),
        _ => Err(CliError::new(
            "MalformedGrid",
            format!("--vary must be `t` or `x1`..`x{n}`, got `{vary}`"),
        )),
    }
}

pub fn grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::new(
            "MalformedGrid",
            "grid endpoints must be finite",
        ));
    }
    Ok(match steps {
        0 => Vec::new(),
        1 => vec![from],
        _ => (0..steps)
            .map(|k| {
                if k + 1 == steps {
                    to
                } else {
                    from + (to - from) * k as f64 / (steps - 1) as f64
                }
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct SweepRow {
    param: f64,
    gamma: f64,
    q_hat: usize,
    s0: Option<f64>,
}

fn sweep_row(base: &MomentInstance, param: SweepParam, value: f64) -> Result<SweepRow, CliError> {
    let inst = match param {
        SweepParam::Time => base.with_time(value)?,
        SweepParam::Location(k) => {
            let mut x = base.x().to_vec();
            x[k] = value;
            let m: Vec<i64> = base.m().iter().map(|&v| i64::from(v)).collect();
            MomentInstance::new(base.t(), &x, &m)?
        }
    };
    let res = simulate_inertia(&inst);
    Ok(SweepRow {
        param: value,
        gamma: gamma_report(&inst).gamma(),
        q_hat: res.num_blocks(),
        s0: first_optimal_merge(&res, &inst).ok().map(|f| f.s0),
    })
}

fn sweep(
    cfg: &RunConfig,
    instance: &InstanceArgs,
    vary: &str,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<(Vec<u8>, Status), CliError> {
    let format = format_or(cfg, Format::Csv, &[Format::Json, Format::Csv], "sweep")?;
    let base = instance.load_or_sample(cfg.seed)?;
    let param = parse_param(vary, base.n())?;
    let values = grid(from, to, steps)?;
    let rows = values
        .par_iter()
        .map(|&v| sweep_row(&base, param, v))
        .collect::<Result<Vec<_>, _>>()?;
    let bytes = match format {
        Format::Json => to_json(&rows)?,
        Format::Csv => to_csv(
            &["param", "gamma", "q_hat", "s0"],
            rows.iter().map(|r| {
                vec![
                    format_f64(r.param),
                    format_f64(r.gamma),
                    r.q_hat.to_string(),
                    r.s0.map(format_f64).unwrap_or_default(),
                ]
            }),
        )?,
    };
    Ok((bytes, Status::Pass))
}
