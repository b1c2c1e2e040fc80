use std::time::Instant;

use serde::Serialize;

use fastslow::analysis;
use fastslow::cycles::{self, RowStatus, SweepOptions, SweepRow};
use fastslow::models::{from_comoving, CoMovingState, FullState};
use fastslow::odeint::{self, Trajectory};
use fastslow::{AnalysisError, OdeError};

use crate::config::{Coords, ExperimentConfig, Format};
use crate::output::{self, csv, Cell, RowStatusEntry};
use crate::CliError;

fn ode_error(e: OdeError) -> CliError {
    match e {
        OdeError::InvalidConfig(_) | OdeError::InvalidSpan { .. } | OdeError::NonFiniteInitial => {
            CliError::Config(e.to_string())
        }
        _ => CliError::Integration(e.to_string()),
    }
}

fn analysis_error(e: AnalysisError) -> CliError {
    match e {
        AnalysisError::Model(m) => CliError::Config(m.to_string()),
        other => CliError::Bracket(other.to_string()),
    }
}

fn elapsed(start: Instant) -> f64 {
    start.elapsed().as_secs_f64()
}

fn ok_row(r: f64) -> Vec<RowStatusEntry> {
    vec![RowStatusEntry {
        r,
        status: "ok".into(),
        error: None,
    }]
}

fn rows_of<const D: usize>(traj: &Trajectory<D>, samples: usize) -> Vec<(f64, [f64; D])> {
    if samples >= 2 {
        traj.sample_uniform(samples)
    } else {
        traj.times().iter().copied().zip(traj.states().iter().copied()).collect()
    }
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let model = cfg.model(0)?;
    let s0 = CoMovingState::new(cfg.x1_0, cfg.w_0);
    let span = (cfg.t0, cfg.t1);
    let (header, rows): (&[&str], Vec<Vec<f64>>) = match cfg.coords {
        Coords::CoMoving => {
            let traj = odeint::integrate(
                |_t, y| model.comoving_rhs(CoMovingState::from_array(*y)).to_array(),
                s0.to_array(),
                span,
                &cfg.integrator,
            )
            .map_err(ode_error)?;
            let rows = rows_of(&traj, cfg.samples).into_iter().map(|(t, y)| vec![t, y[0], y[1]]).collect();
            (&["t", "x1", "w"], rows)
        }
        Coords::Full => {
            let f0 = from_comoving(s0, cfg.t0, model.rate());
            let traj = odeint::integrate(
                |_t, y| model.full_rhs(FullState::from_array(*y)).to_array(),
                f0.to_array(),
                span,
                &cfg.integrator,
            )
            .map_err(ode_error)?;
            let rows = rows_of(&traj, cfg.samples).into_iter().map(|(t, y)| vec![t, y[0], y[1], y[2]]).collect();
            (&["t", "x1", "x2", "lambda"], rows)
        }
    };
    let body = match cfg.format {
        Format::Csv => csv(header, rows.iter().map(|r| r.iter().map(|v| Cell::Num(*v)).collect())),
        Format::Json => {
            let records: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| header.iter().zip(r).map(|(k, v)| (k.to_string(), serde_json::json!(v))).collect())
                .collect();
            output::json(&records)?
        }
    };
    output::emit(cfg, &cfg.out, &body, elapsed(start), ok_row(model.rate()))
}

#[derive(Serialize)]
struct Eigen {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct BracketEnd {
    r: f64,
    eigenvalues: [Eigen; 2],
}

#[derive(Serialize)]
struct HopfRecord {
    family: &'static str,
    epsilon: f64,
    r_analytic: f64,
    r_numeric: f64,
    omega: f64,
    eigenvalues_at_bracket_ends: [BracketEnd; 2],
}

pub fn hopf(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let model = cfg.model(0)?;
    let r_analytic = analysis::critical_rate(&model);
    let report = analysis::locate_hopf_numeric(&model, (cfg.hopf_r_lo, cfg.hopf_r_hi)).map_err(analysis_error)?;
    let end = |r: f64| -> Result<BracketEnd, CliError> {
        let m = model.with_rate(r).map_err(|e| CliError::Config(e.to_string()))?;
        let eq = analysis::solve_equilibrium(&m).map_err(analysis_error)?;
        Ok(BracketEnd {
            r,
            eigenvalues: eq.eigenvalues.map(|l| Eigen { re: l.re, im: l.im }),
        })
    };
    let record = HopfRecord {
        family: model.family().name(),
        epsilon: model.epsilon(),
        r_analytic,
        r_numeric: report.r_hopf,
        omega: report.omega,
        eigenvalues_at_bracket_ends: [end(cfg.hopf_r_lo)?, end(cfg.hopf_r_hi)?],
    };
    let body = match cfg.format {
        Format::Json => output::json(&record)?,
        Format::Csv => {
            let [lo, hi] = &record.eigenvalues_at_bracket_ends;
            let mut cells = vec![
                Cell::Num(record.r_analytic),
                Cell::Num(record.r_numeric),
                Cell::Num(record.omega),
            ];
            for e in [lo, hi] {
                cells.push(Cell::Num(e.r));
                for l in &e.eigenvalues {
                    cells.push(Cell::Num(l.re));
                    cells.push(Cell::Num(l.im));
                }
            }
            csv(
                &[
                    "r_analytic", "r_numeric", "omega", "r_lo", "lo_re0", "lo_im0", "lo_re1", "lo_im1", "r_hi", "hi_re0",
                    "hi_im0", "hi_re1", "hi_im1",
                ],
                [cells],
            )
        }
    };
    output::emit(cfg, &cfg.out, &body, elapsed(start), ok_row(report.r_hopf))
}

#[derive(Serialize)]
struct SweepRecord {
    r: f64,
    max_distance: Option<f64>,
    amplitude_x1: Option<f64>,
    period: Option<f64>,
    converged: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    tipped: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn sweep_record(row: &SweepRow, tipping_radius: Option<f64>) -> SweepRecord {
    let (max_distance, amplitude_x1, period, error) = match &row.outcome {
        Ok(o) => (Some(o.max_distance()), Some(o.amplitude_x1()), o.period(), None),
        Err(e) => (None, None, None, Some(e.to_string())),
    };
    SweepRecord {
        r: row.r,
        max_distance,
        amplitude_x1,
        period,
        converged: row.status().label(),
        tipped: tipping_radius.map(|radius| max_distance.is_some_and(|d| d > radius)),
        error,
    }
}

#[derive(Serialize)]
struct SweepDocument {
    family: &'static str,
    epsilon: f64,
    rows: Vec<SweepRecord>,
}

pub fn sweep(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let opts = SweepOptions {
        warm_start: cfg.warm_start,
        workers: cfg.workers,
    };
    let mut total = 0usize;
    let mut failed = 0usize;
    for index in 0..cfg.epsilons.len() {
        let start = Instant::now();
        let model = cfg.model(index)?;
        let result = cycles::rate_sweep(&model, &cfg.r_grid, &cfg.cycle, opts).map_err(|e| CliError::Config(e.to_string()))?;
        let records: Vec<SweepRecord> = result.rows.iter().map(|r| sweep_record(r, cfg.tipping_radius)).collect();
        let statuses: Vec<RowStatusEntry> = result
            .rows
            .iter()
            .map(|row| RowStatusEntry {
                r: row.r,
                status: match row.status() {
                    RowStatus::Stable => "stable",
                    RowStatus::Converged => "converged",
                    RowStatus::NotConverged => "not_converged",
                    RowStatus::Failed => "failed",
                }
                .into(),
                error: row.outcome.as_ref().err().map(|e| e.to_string()),
            })
            .collect();
        total += result.rows.len();
        failed += result
            .rows
            .iter()
            .filter(|r| matches!(r.status(), RowStatus::NotConverged | RowStatus::Failed))
            .count();

        let body = match cfg.format {
            Format::Json => output::json(&SweepDocument {
                family: model.family().name(),
                epsilon: model.epsilon(),
                rows: records,
            })?,
            Format::Csv => {
                let mut header = vec!["r", "max_distance", "amplitude_x1", "period", "converged"];
                if cfg.tipping_radius.is_some() {
                    header.push("tipped");
                }
                let num = |v: Option<f64>| v.map_or(Cell::Empty, Cell::Num);
                csv(
                    &header,
                    records.iter().map(|rec| {
                        let mut row = vec![
                            Cell::Num(rec.r),
                            num(rec.max_distance),
                            num(rec.amplitude_x1),
                            num(rec.period),
                            Cell::Text(rec.converged.into()),
                        ];
                        if let Some(t) = rec.tipped {
                            row.push(Cell::Text(t.to_string()));
                        }
                        row
                    }),
                )
            }
        };
        if cfg.epsilons.len() == 1 {
            output::emit(cfg, &cfg.out, &body, elapsed(start), statuses)?;
        } else {
            // each file's manifest reruns exactly that file
            let path = output::sibling(&cfg.out, &format!("_eps{}", cfg.epsilons[index]), cfg.format);
            let mut own = cfg.resolved().clone();
            own.insert("epsilon".into(), format!("{:?}", cfg.epsilons[index]));
            own.insert("out".into(), path.display().to_string());
            output::emit_with(cfg, &own, &path, &body, elapsed(start), statuses)?;
        }
    }
    if total > 0 && failed == total {
        return Err(CliError::AllRowsFailed(total));
    }
    Ok(())
}

#[derive(Serialize)]
struct FieldPoint {
    x1: f64,
    w: f64,
    dx1: f64,
    dw: f64,
}

#[derive(Serialize)]
struct ManifoldPoint {
    kind: &'static str,
    x1: f64,
    w: f64,
}

fn axis(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

pub fn portrait(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let start = Instant::now();
    let model = cfg.model(0)?;
    let mut field = Vec::with_capacity(cfg.nx * cfg.ny);
    for w in axis(cfg.w_range.0, cfg.w_range.1, cfg.ny) {
        for x1 in axis(cfg.x1_range.0, cfg.x1_range.1, cfg.nx) {
            let d = model.comoving_rhs(CoMovingState::new(x1, w));
            field.push(FieldPoint { x1, w, dx1: d.x1, dw: d.w });
        }
    }
    let mut manifold: Vec<ManifoldPoint> = axis(cfg.x1_range.0, cfg.x1_range.1, cfg.manifold_points)
        .map(|x1| ManifoldPoint {
            kind: "manifold",
            x1,
            w: model.critical_manifold(x1),
        })
        .collect();
    manifold.extend(model.fold_points().into_iter().map(|f| ManifoldPoint {
        kind: "fold",
        x1: f.x1,
        w: f.w,
    }));

    let (field_body, manifold_body) = match cfg.format {
        Format::Json => (output::json(&field)?, output::json(&manifold)?),
        Format::Csv => (
            csv(
                &["x1", "w", "dx1", "dw"],
                field
                    .iter()
                    .map(|p| vec![Cell::Num(p.x1), Cell::Num(p.w), Cell::Num(p.dx1), Cell::Num(p.dw)]),
            ),
            csv(
                &["kind", "x1", "w"],
                manifold
                    .iter()
                    .map(|p| vec![Cell::Text(p.kind.into()), Cell::Num(p.x1), Cell::Num(p.w)]),
            ),
        ),
    };
    let t = elapsed(start);
    output::emit(cfg, &cfg.out, &field_body, t, ok_row(model.rate()))?;
    output::emit(
        cfg,
        &output::sibling(&cfg.out, "_manifold", cfg.format),
        &manifold_body,
        t,
        ok_row(model.rate()),
    )
}
