use std::f64::consts::{FRAC_PI_4, PI};
use std::process::ExitCode;

use anyhow::Result;
use serde::Serialize;
use spin_transfer::entanglement::schmidt_negativity;
use spin_transfer::protocol::{compare_modes, TpSnapshot};
use spin_transfer::qutritmax::{
    fit_i1_of_theta, frontier_deviation, half_period_negativity, max_curve, sample_physical_region,
    FrontierDeviation,
};
use spin_transfer::verify::{run_verification, VerifyConfig};
use spin_transfer::{
    evolve_reduced, iterate_transfer, maximize_e12_half_period, negativity, IterationRecord,
    MaximizationResult, QubitPairState, QutritPairState, SearchBudget, SourceState, TimeGrid,
    XStateCoeffs,
};

use crate::config::{CommandKind, ConfigError, Format, RunConfig};
use crate::output::{rounded_json, write_json, write_pair, write_table, Cell, Table};

pub fn run(cfg: &RunConfig) -> Result<ExitCode> {
    log::info!("running {}", cfg.command.name());
    match cfg.command {
        CommandKind::Fig2 => fig2(cfg)?,
        CommandKind::Fig3 => fig3(cfg)?,
        CommandKind::Fig4 => fig4(cfg)?,
        CommandKind::Iterate => iterate(cfg)?,
        CommandKind::Maximize => maximize(cfg)?,
        CommandKind::Verify => return verify(cfg),
    }
    Ok(ExitCode::SUCCESS)
}

fn source_or_a(cfg: &RunConfig) -> SourceState {
    SourceState::Qutrit(cfg.sp.unwrap_or_else(QutritPairState::maximally_entangled))
}

fn fig2(cfg: &RunConfig) -> Result<()> {
    let tp = QubitPairState::new(cfg.theta1);
    let sp = match cfg.sp {
        Some(k) => SourceState::Qutrit(k),
        None => SourceState::Qubit(QubitPairState::new(cfg.theta2)),
    };
    let stop = cfg.t_stop.unwrap_or_else(|| sp.model().period());
    let grid =
        TimeGrid::new(cfg.t_start, stop, cfg.t_points).map_err(|e| ConfigError(e.to_string()))?;
    let mut table = Table::new(&["t", "E12", "A", "B", "C", "D", "ReF", "ImF"]);
    for t in grid.values() {
        let rho = evolve_reduced(&tp, &sp, t)?;
        let e = negativity(&rho, 1)?.value;
        let x = XStateCoeffs::from_operator(&rho)?;
        table.push(vec![
            t.into(),
            e.into(),
            x.a.into(),
            x.b.into(),
            x.c.into(),
            x.d.into(),
            x.f.re.into(),
            x.f.im.into(),
        ]);
    }
    write_table(&cfg.destination, cfg.format, &table)
}

/// Target angles `j pi/32`, `j = 0..8`.
pub fn fig3_theta_grid() -> Vec<f64> {
    (0..=8).map(|j| j as f64 * PI / 32.0).collect()
}

fn maxima_row(r: &MaximizationResult) -> Result<Vec<Cell>> {
    let inv = r.argmax_invariants;
    let fit = fit_i1_of_theta(r.theta1);
    let dev = frontier_deviation(&inv)?;
    let k = r.argmax_state.k;
    Ok(vec![
        r.theta1.into(),
        r.e_max.into(),
        k[0].into(),
        k[1].into(),
        k[2].into(),
        inv.i1.into(),
        inv.i2.into(),
        inv.i1p.into(),
        inv.i2p.into(),
        fit.into(),
        ((fit - inv.i1).abs() / inv.i1).into(),
        dev.frontier_i2p.into(),
        dev.relative.into(),
        dev.relative_to_range.into(),
    ])
}

const MAXIMA_COLUMNS: [&str; 14] = [
    "theta1",
    "E_max",
    "k0",
    "k1",
    "k2",
    "I1",
    "I2",
    "I1p",
    "I2p",
    "I1_fit",
    "fit_rel_err",
    "frontier_I2p",
    "frontier_rel_dev",
    "frontier_range_dev",
];

fn fig3(cfg: &RunConfig) -> Result<()> {
    let mut region = Table::new(&["k0", "k1", "k2", "I1", "I2", "I1p", "I2p"]);
    for (k, p) in sample_physical_region::<f64>(cfg.samples, cfg.seed)? {
        region.push(vec![
            k.k[0].into(),
            k.k[1].into(),
            k.k[2].into(),
            p.i1.into(),
            p.i2.into(),
            p.i1p.into(),
            p.i2p.into(),
        ]);
    }
    let curve = max_curve(&fig3_theta_grid(), &cfg.budget)?;
    if !curve.monotone {
        log::warn!("E_max is not monotone along the target-angle grid");
    }
    let mut maxima = Table::new(&MAXIMA_COLUMNS);
    for r in &curve.results {
        maxima.push(maxima_row(r)?);
    }
    write_pair(
        &cfg.destination,
        cfg.format,
        ("region", &region),
        ("maxima", &maxima),
        "_maxima",
    )
}

fn fold_line_table(records: &[IterationRecord]) -> Table {
    let mut t = Table::new(&["step", "theta1", "E_before", "E_after"]);
    for r in records {
        t.push(vec![
            r.step.into(),
            (r.negativity_before.asin() / 2.0).into(),
            r.negativity_before.into(),
            r.negativity_after.into(),
        ]);
    }
    t
}

fn fig4(cfg: &RunConfig) -> Result<()> {
    let n = cfg.theta_points;
    let a = QutritPairState::maximally_entangled();
    let b = QutritPairState::two_term();
    let mut table = Table::new(&["theta1", "E_initial", "E_A", "E_B", "E_max"]);
    for i in 0..n {
        let th = FRAC_PI_4 * i as f64 / (n - 1) as f64;
        let e_max = maximize_e12_half_period(th, &cfg.budget)?.e_max;
        table.push(vec![
            th.into(),
            schmidt_negativity(th).into(),
            half_period_negativity(th, &a)?.into(),
            half_period_negativity(th, &b)?.into(),
            e_max.into(),
        ]);
    }
    let records = iterate_transfer(cfg.e0, &source_or_a(cfg), cfg.steps, cfg.mode)?;
    write_pair(
        &cfg.destination,
        cfg.format,
        ("curves", &table),
        ("fold_line", &fold_line_table(&records)),
        "_foldline",
    )
}

fn iterate(cfg: &RunConfig) -> Result<()> {
    let sp = source_or_a(cfg);
    let records = iterate_transfer(cfg.e0, &sp, cfg.steps, cfg.mode)?;
    let mut table = Table::new(&[
        "step",
        "mode",
        "negativity_before",
        "negativity_after",
        "snapshot_theta",
        "rho00",
        "rho11",
        "rho22",
        "rho33",
        "re_rho03",
        "im_rho03",
    ]);
    for r in &records {
        let mut row: Vec<Cell> = vec![
            r.step.into(),
            r.mode.as_str().into(),
            r.negativity_before.into(),
            r.negativity_after.into(),
        ];
        match &r.tp_state_snapshot {
            TpSnapshot::Angle(th) => {
                row.push((*th).into());
                row.extend(std::iter::repeat_n(Cell::Empty, 6));
            }
            TpSnapshot::Density(rho) => {
                row.push(Cell::Empty);
                for i in 0..4 {
                    row.push(rho[(i, i)].re.into());
                }
                row.push(rho[(0, 3)].re.into());
                row.push(rho[(0, 3)].im.into());
            }
        }
        table.push(row);
    }
    let mut modes = Table::new(&["step", "pure_reset", "mixed_continuation", "delta"]);
    for c in compare_modes(cfg.e0, &sp, cfg.steps)? {
        modes.push(vec![
            c.step.into(),
            c.pure_reset.into(),
            c.mixed_continuation.into(),
            c.delta.into(),
        ]);
    }
    write_pair(
        &cfg.destination,
        cfg.format,
        ("records", &table),
        ("mode_comparison", &modes),
        "_modes",
    )
}

#[derive(Serialize)]
struct MaximizeReport<'a> {
    #[serde(flatten)]
    result: &'a MaximizationResult,
    budget: SearchBudget,
    initial_negativity: f64,
    fit_i1: f64,
    fit_relative_error: f64,
    frontier: Option<FrontierDeviation<f64>>,
}

fn maximize(cfg: &RunConfig) -> Result<()> {
    let r = maximize_e12_half_period(cfg.theta1, &cfg.budget)?;
    match cfg.format {
        Format::Json => {
            let fit = fit_i1_of_theta(cfg.theta1);
            let report = MaximizeReport {
                result: &r,
                budget: cfg.budget,
                initial_negativity: schmidt_negativity(cfg.theta1),
                fit_i1: fit,
                fit_relative_error: (fit - r.argmax_invariants.i1).abs() / r.argmax_invariants.i1,
                frontier: frontier_deviation(&r.argmax_invariants).ok(),
            };
            write_json(&cfg.destination, &rounded_json(&report)?)
        }
        Format::Csv => {
            let mut t = Table::new(&MAXIMA_COLUMNS);
            t.push(maxima_row(&r)?);
            write_table(&cfg.destination, cfg.format, &t)
        }
    }
}

fn verify(cfg: &RunConfig) -> Result<ExitCode> {
    let report = run_verification(&VerifyConfig {
        tolerance: cfg.tolerance,
        seed: cfg.seed,
    })?;
    match cfg.format {
        Format::Json => write_json(&cfg.destination, &rounded_json(&report)?)?,
        Format::Csv => {
            let mut t = Table::new(&[
                "name",
                "mandatory",
                "samples",
                "tolerance",
                "max_deviation",
                "pass",
                "detail",
            ]);
            for c in &report.checks {
                t.push(vec![
                    c.name.as_str().into(),
                    c.mandatory.into(),
                    c.samples.into(),
                    c.tolerance.into(),
                    c.max_deviation.into(),
                    c.pass.into(),
                    c.detail.as_deref().into(),
                ]);
            }
            write_table(&cfg.destination, cfg.format, &t)?;
        }
    }
    if report.all_mandatory_passed {
        Ok(ExitCode::SUCCESS)
    } else {
        for c in report.mandatory().filter(|c| !c.pass) {
            eprintln!(
                "verification failed: {} (max deviation {:e}, tolerance {:e})",
                c.name, c.max_deviation, c.tolerance
            );
        }
        Ok(ExitCode::from(3))
    }
}
