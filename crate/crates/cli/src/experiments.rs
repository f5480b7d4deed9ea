//! One function per experiment; each returns the CSV table and a plot.

use anyhow::{bail, Result};
use rayon::prelude::*;
use zeno_core::evolution::SpectralGrid;
use zeno_core::model::LAMBDA_MIN;
use zeno_core::oracle::{matrix_survival, DiscretizedModel};
use zeno_core::spectral::{densities, find_bound_states};
use zeno_core::zeno::{
    default_horizon, interrupted_on_grid, log_grid, measured_probability, scan_on_grid, MeasurementSchedule,
};

use crate::config::RunConfig;
use crate::output::{fmt_g, Table};
use crate::plot::{Plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Experiment {
    Spectrum,
    Survival,
    ZenoScan,
    Interrupted,
    OracleCompare,
    BoundStates,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Spectrum => "spectrum",
            Experiment::Survival => "survival",
            Experiment::ZenoScan => "zeno-scan",
            Experiment::Interrupted => "interrupted",
            Experiment::OracleCompare => "oracle-compare",
            Experiment::BoundStates => "bound-states",
        }
    }

    /// Runs the experiment, recording any defaulted value it resolves
    /// (such as the comparison horizon) back into `cfg`.
    pub fn run(self, cfg: &mut RunConfig) -> Result<(Table, Option<Plot>)> {
        match self {
            Experiment::Spectrum => spectrum(cfg),
            Experiment::Survival => survival(cfg),
            Experiment::ZenoScan => zeno_scan(cfg),
            Experiment::Interrupted => interrupted(cfg),
            Experiment::OracleCompare => oracle_compare(cfg),
            Experiment::BoundStates => bound_states(cfg),
        }
    }
}

fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

fn times(cfg: &RunConfig) -> Vec<f64> {
    linspace(0.0, cfg.run.t_max, cfg.run.samples)
}

fn spectrum(cfg: &RunConfig) -> Result<(Table, Option<Plot>)> {
    let r = &cfg.run;
    let lambdas = linspace(r.lambda_min, r.lambda_max, r.lambda_samples);
    let rows: Vec<(f64, f64, f64)> = lambdas
        .par_iter()
        .map(|&l| {
            // |f|² vanishes at threshold, and with it both densities.
            if l < LAMBDA_MIN {
                return Ok((l, 0.0, 0.0));
            }
            let d = densities(&cfg.params, l)?;
            Ok((l, d.a, d.b))
        })
        .collect::<zeno_core::Result<_>>()?;
    let mut table = Table::new(&["lambda", "density_A", "density_B"]);
    rows.iter().for_each(|&(l, a, b)| table.push(&[l, a, b]));
    let plot = Plot {
        x_label: "lambda".into(),
        y_label: "spectral density".into(),
        log_x: false,
        log_y: false,
        series: vec![
            Series { label: "density_A".into(), points: rows.iter().map(|r| (r.0, r.1)).collect() },
            Series { label: "density_B".into(), points: rows.iter().map(|r| (r.0, r.2)).collect() },
        ],
    };
    Ok((table, Some(plot)))
}

fn survival(cfg: &RunConfig) -> Result<(Table, Option<Plot>)> {
    let r = &cfg.run;
    let ts = times(cfg);
    let taus: Vec<(&str, f64)> = [("P_zeno", r.zeno_tau), ("P_antizeno", r.anti_zeno_tau)]
        .into_iter()
        .filter_map(|(name, tau)| tau.map(|t| (name, t)))
        .collect();
    let t_grid = taus.iter().map(|t| t.1).fold(r.t_max, f64::max);
    let grid = SpectralGrid::build(&cfg.params, r.initial, t_grid)?;
    let columns: Vec<Vec<f64>> =
        std::iter::once(ts.par_iter().map(|&t| grid.probability(t)).collect::<zeno_core::Result<Vec<_>>>())
            .chain(taus.iter().map(|&(_, tau)| ts.par_iter().map(|&t| measured_probability(&grid, tau, t)).collect()))
            .collect::<zeno_core::Result<_>>()?;

    let mut names = vec!["t", "P"];
    names.extend(taus.iter().map(|t| t.0));
    let mut table = Table::new(&names);
    for (i, &t) in ts.iter().enumerate() {
        let mut row = vec![t];
        row.extend(columns.iter().map(|c| c[i]));
        table.push(&row);
    }
    let mut labels = vec![format!("unmeasured {}", r.initial)];
    labels.extend(taus.iter().map(|&(name, tau)| format!("{} tau={}", &name[2..], fmt_g(tau))));
    let plot = Plot {
        x_label: "t".into(),
        y_label: format!("P_{}(t)", r.initial),
        log_x: false,
        log_y: r.log_p,
        series: labels
            .into_iter()
            .zip(&columns)
            .map(|(label, c)| Series { label, points: ts.iter().copied().zip(c.iter().copied()).collect() })
            .collect(),
    };
    Ok((table, Some(plot)))
}

fn zeno_scan(cfg: &mut RunConfig) -> Result<(Table, Option<Plot>)> {
    let horizon = match cfg.run.horizon {
        Some(h) => h,
        None => default_horizon(&cfg.params, cfg.run.initial)?,
    };
    cfg.run.horizon = Some(horizon);
    let r = &cfg.run;
    let grid = SpectralGrid::build(&cfg.params, r.initial, horizon)?;
    let verdicts = scan_on_grid(&grid, &log_grid(r.tau_min, r.tau_max, r.tau_count), horizon)?;
    let mut table = Table::new(&["tau", "P_measured_T", "P_unmeasured_T", "gamma_eff", "classification"]);
    for v in &verdicts {
        let cells = [v.tau, v.p_measured, v.p_unmeasured, v.gamma_eff].into_iter().map(fmt_g);
        table.push_raw(&cells.chain(std::iter::once(v.classification.as_str().to_string())).collect::<Vec<_>>());
    }
    let unmeasured: Vec<(f64, f64)> = verdicts.iter().map(|v| (v.tau, -v.p_unmeasured.ln() / v.horizon)).collect();
    let plot = Plot {
        x_label: "tau".into(),
        y_label: "effective decay rate".into(),
        log_x: true,
        log_y: false,
        series: vec![
            Series { label: "gamma_eff(tau)".into(), points: verdicts.iter().map(|v| (v.tau, v.gamma_eff)).collect() },
            Series { label: "unmeasured -ln P(T)/T".into(), points: unmeasured },
        ],
    };
    Ok((table, Some(plot)))
}

fn interrupted(cfg: &RunConfig) -> Result<(Table, Option<Plot>)> {
    let r = &cfg.run;
    let schedule = MeasurementSchedule::new(r.tau, r.n)?;
    let grid = SpectralGrid::build(&cfg.params, r.initial, schedule.total())?;
    let measured = interrupted_on_grid(&grid, schedule)?;
    let unmeasured = grid.curve(&measured.times)?;
    let mut table = Table::new(&["t", "P_measured", "P_unmeasured"]);
    for i in 0..measured.len() {
        table.push(&[measured.times[i], measured.probabilities[i], unmeasured.probabilities[i]]);
    }
    let series = |label: &str, c: &zeno_core::SurvivalCurve| Series {
        label: label.into(),
        points: c.times.iter().copied().zip(c.probabilities.iter().copied()).collect(),
    };
    let plot = Plot {
        x_label: "t".into(),
        y_label: format!("P_{}(t)", r.initial),
        log_x: false,
        log_y: r.log_p,
        series: vec![series("unmeasured", &unmeasured), series(&format!("reset every {}", fmt_g(r.tau)), &measured)],
    };
    Ok((table, Some(plot)))
}

fn oracle_compare(cfg: &RunConfig) -> Result<(Table, Option<Plot>)> {
    let r = &cfg.run;
    let omega_max = r.oracle_omega_max.unwrap_or(cfg.params.omega_max);
    let model = DiscretizedModel::build(&cfg.params, r.oracle_n, omega_max)?;
    if r.t_max >= model.revival_horizon() {
        bail!(
            "t_max = {} reaches the oracle's recurrence horizon pi/dw = {}; raise oracle_n",
            r.t_max,
            model.revival_horizon()
        );
    }
    let ts = linspace(0.0, r.t_max, 200);
    let grid = SpectralGrid::build(&cfg.params, r.initial, r.t_max)?;
    let analytic = grid.curve(&ts)?;
    let matrix = matrix_survival(&model.eigen()?, r.initial, &ts);
    let mut table = Table::new(&["t", "P_analytic", "P_matrix", "abs_deviation"]);
    let mut worst = 0.0f64;
    for ((&t, &a), &m) in ts.iter().zip(&analytic.probabilities).zip(&matrix.probabilities) {
        let d = (a - m).abs();
        worst = worst.max(d);
        table.push(&[t, a, m, d]);
    }
    table.push_raw(&["max_abs_deviation".into(), String::new(), String::new(), fmt_g(worst)]);
    let plot = Plot {
        x_label: "t".into(),
        y_label: format!("P_{}(t)", r.initial),
        log_x: false,
        log_y: r.log_p,
        series: vec![
            Series {
                label: "spectral".into(),
                points: ts.iter().copied().zip(analytic.probabilities.iter().copied()).collect(),
            },
            Series {
                label: format!("matrix N={}", r.oracle_n),
                points: ts.iter().copied().zip(matrix.probabilities.iter().copied()).collect(),
            },
        ],
    };
    Ok((table, Some(plot)))
}

fn bound_states(cfg: &RunConfig) -> Result<(Table, Option<Plot>)> {
    let mut table = Table::new(&["Lambda", "norm", "mu_A", "mu_B"]);
    for s in find_bound_states(&cfg.params)? {
        table.push(&[s.lambda, s.norm, s.mu_a, s.mu_b]);
    }
    Ok((table, None))
}
