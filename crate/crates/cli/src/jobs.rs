//! The seven commands. Each returns a [`Table`]; list-valued rows run on the
//! current rayon pool and failures are recorded per row.

use std::str::FromStr;

use rayon::prelude::*;

use fcs_tempo::heatstats::{cumulants_from_chi, thermo_ledger, HeatCumulants};
use fcs_tempo::ibm::{ibm_chi, ibm_cumulant, ibm_mean_heat_closed, ibm_odd_cumulant_closed, IbmCumulantRequest, IbmTime};
use fcs_tempo::quapi::dense_propagate;
use fcs_tempo::spinsys::markov_reference;
use fcs_tempo::tempo::{tempo_propagate, tempo_propagate_with, TempoOutput};
use fcs_tempo::varpol::{additive_prediction, solve_silbey_harris, variational_prediction};

use crate::config::{Params, Point, RawConfig, KEYS};
use crate::table::{num, opt, Table};
use crate::{CliError, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Heat,
    Dynamics,
    OracleIbm,
    Variational,
    Sweep,
    Converge,
    Compare,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Heat,
        Command::Dynamics,
        Command::OracleIbm,
        Command::Variational,
        Command::Sweep,
        Command::Converge,
        Command::Compare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Heat => "heat",
            Command::Dynamics => "dynamics",
            Command::OracleIbm => "oracle-ibm",
            Command::Variational => "variational",
            Command::Sweep => "sweep",
            Command::Converge => "converge",
            Command::Compare => "compare",
        }
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| {
            let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
            CliError::Config(format!("unknown command `{s}` (expected one of {})", names.join(", ")))
        })
    }
}

/// A finished job: its table and how many rows failed.
#[derive(Debug, Clone, PartialEq)]
pub struct JobOutcome {
    pub table: Table,
    pub failed_rows: usize,
}

/// Runs one command. Row-parallel commands use the ambient rayon pool.
pub fn run_job(command: Command, raw: &RawConfig) -> Result<JobOutcome, CliError> {
    let (mut table, failed_rows) = match command {
        Command::Heat => (heat(&raw.single()?.params()?)?, 0),
        Command::Dynamics => (dynamics(&raw.single()?.params()?)?, 0),
        Command::OracleIbm => (oracle_ibm(&raw.single()?.params()?)?, 0),
        Command::Variational => variational(raw)?,
        Command::Sweep => sweep(raw)?,
        Command::Converge => converge(raw)?,
        Command::Compare => (compare(&raw.single()?)?, 0),
    };
    let mut meta = vec![
        ("engine".to_string(), format!("fcs-tempo {VERSION}")),
        ("command".to_string(), command.name().to_string()),
    ];
    for (key, _) in KEYS {
        let values = raw.values(key);
        meta.push((key.to_string(), if values.is_empty() { "auto".into() } else { values.join(",") }));
    }
    meta.append(&mut table.meta);
    table.meta = meta;
    Ok(JobOutcome { table, failed_rows })
}

fn propagate_pair(params: &Params) -> Result<(TempoOutput<f64>, TempoOutput<f64>), CliError> {
    let (a, b) = rayon::join(|| tempo_propagate(&params.at_u(params.u)), || tempo_propagate(&params.at_u(0.0)));
    Ok((a?, b?))
}

fn telemetry(table: &mut Table, out: &TempoOutput<f64>) {
    table.meta("peak_bond", out.series.peak_bond());
    table.meta("total_discarded", num(out.series.total_discarded()));
    table.meta("bond_overflow", out.series.overflow);
    for w in &out.series.warnings {
        table.meta("warning", w);
    }
}

fn heat(params: &Params) -> Result<Table, CliError> {
    let (counted, free) = propagate_pair(params)?;
    let c = cumulants_from_chi(&counted.series, params.u)?;
    let states = free.states.as_ref().ok_or_else(|| CliError::Numerical("u = 0 run returned no states".into()))?;
    let ledger = thermo_ledger(states, &c, &params.run.spin, &params.run.bath)?;
    let mut t = Table::new(&[
        "t", "chi_re", "chi_im", "mean_q", "var_q", "second_moment", "fd_error", "delta_u", "delta_s", "mean_w",
        "entropy_production", "max_bond", "discarded",
    ]);
    let s = &counted.series;
    for i in 0..s.len() {
        t.push(vec![
            num(s.times[i]),
            num(s.chi[i].re),
            num(s.chi[i].im),
            num(c.mean_q[i]),
            num(c.var_q[i]),
            num(c.second_moment[i]),
            num(c.fd_error_estimate[i]),
            num(ledger.delta_u[i]),
            num(ledger.delta_s[i]),
            num(ledger.mean_w[i]),
            num(ledger.sigma[i]),
            s.max_bond[i].to_string(),
            num(s.discarded[i]),
        ]);
    }
    t.meta("u_eps", num(params.u));
    telemetry(&mut t, &counted);
    Ok(t)
}

fn dynamics(params: &Params) -> Result<Table, CliError> {
    let out = tempo_propagate(&params.at_u(0.0))?;
    let states = out.states.as_ref().ok_or_else(|| CliError::Numerical("u = 0 run returned no states".into()))?;
    let run = &params.run;
    let markov = markov_reference(&run.spin, &run.bath, &run.initial, &out.series.times);
    let mut t = Table::new(&["t", "sx", "sy", "sz", "energy", "trace_re", "markov_sx", "markov_sy", "markov_sz"]);
    if let Err(e) = &markov {
        t.meta("markov", format!("unavailable: {e}"));
    }
    for (i, rho) in states.iter().enumerate() {
        let m = markov.as_ref().ok().map(|m| m[i]);
        t.push(vec![
            num(out.series.times[i]),
            num(rho.sx()),
            num(rho.sy()),
            num(rho.sz()),
            num(rho.energy(&run.spin)),
            num(out.series.chi[i].re),
            opt(m.map(|m| m.sx)),
            opt(m.map(|m| m.sy)),
            opt(m.map(|m| m.sz)),
        ]);
    }
    telemetry(&mut t, &out);
    Ok(t)
}

fn oracle_ibm(params: &Params) -> Result<Table, CliError> {
    let bath = params.run.bath;
    let spec = *bath.spectral();
    let second = |time| ibm_cumulant(&IbmCumulantRequest { order: 2, bath, t: time });
    let mut t = Table::new(&["t", "chi_re", "chi_im", "mean_q", "var_q", "third_cumulant"]);
    for n in 0..=params.run.n_steps {
        let time = params.run.delta * n as f64;
        let chi = ibm_chi(&bath, IbmTime::Finite(time), params.u)?;
        t.push(vec![
            num(time),
            num(chi.re),
            num(chi.im),
            num(ibm_mean_heat_closed(&spec, time)),
            num(second(IbmTime::Finite(time))?),
            num(ibm_odd_cumulant_closed(&spec, 3, IbmTime::Finite(time))?),
        ]);
    }
    t.meta("u_eps", num(params.u));
    t.meta("asymptotic_mean_q", num(ibm_odd_cumulant_closed(&spec, 1, IbmTime::Asymptotic)?));
    t.meta("asymptotic_var_q", num(second(IbmTime::Asymptotic)?));
    t.meta("asymptotic_third_cumulant", num(ibm_odd_cumulant_closed(&spec, 3, IbmTime::Asymptotic)?));
    Ok(t)
}

/// Runs `f` on every point in parallel, keeping input order. Failed rows get
/// a `status` of `error` and the message; their numeric cells stay empty.
fn rows_parallel<F>(points: &[Point], width: usize, f: F) -> Vec<(Vec<String>, Option<String>)>
where
    F: Fn(&Point) -> Result<Vec<String>, CliError> + Sync,
{
    points
        .par_iter()
        .map(|p| match f(p) {
            Ok(cells) => (cells, None),
            Err(e) => (vec![String::new(); width], Some(e.to_string())),
        })
        .collect()
}

fn sweep_table(axes: &[String], points: &[Point], results: &[&str], rows: Vec<(Vec<String>, Option<String>)>) -> (Table, usize) {
    let mut header: Vec<&str> = axes.iter().map(String::as_str).collect();
    header.extend_from_slice(results);
    header.extend_from_slice(&["status", "message"]);
    let mut t = Table::new(&header);
    let mut failed = 0;
    for (p, (cells, err)) in points.iter().zip(rows) {
        let mut row: Vec<String> = axes.iter().map(|a| p.get(a).unwrap_or("").to_string()).collect();
        row.extend(cells);
        match err {
            Some(msg) => {
                failed += 1;
                row.extend(["error".to_string(), msg]);
            }
            None => row.extend(["ok".to_string(), String::new()]),
        }
        t.push(row);
    }
    t.meta("rows", points.len());
    t.meta("failed_rows", failed);
    (t, failed)
}

fn variational(raw: &RawConfig) -> Result<(Table, usize), CliError> {
    let axes = raw.axes();
    if let Some(bad) = axes.iter().find(|a| !matches!(a.as_str(), "alpha" | "temperature" | "initial")) {
        return Err(CliError::Config(format!("variational sweeps alpha, temperature or initial only, not `{bad}`")));
    }
    let points = raw.expand();
    let results = [
        "omega_renorm", "e_r_renorm", "free_energy_bound", "residual", "converged", "q_variational", "q_additive", "delta_u",
    ];
    let rows = rows_parallel(&points, results.len(), |p| {
        let params = p.params()?;
        let run = &params.run;
        let sol = solve_silbey_harris(&run.spin, &run.bath)?;
        let var = variational_prediction(&sol, &run.initial)?;
        let add = additive_prediction(&run.spin, &run.bath, &run.initial)?;
        Ok(vec![
            num(sol.omega_renorm),
            num(sol.e_r_renorm),
            num(sol.free_energy_bound),
            num(sol.residual),
            sol.converged.to_string(),
            num(var.mean_heat),
            num(add.mean_heat),
            num(var.delta_u),
        ])
    });
    let keys = ["alpha".to_string(), "temperature".to_string()];
    Ok(sweep_table(&keys, &points, &results, rows))
}

fn final_summary(params: &Params) -> Result<(HeatCumulants<f64>, TempoOutput<f64>), CliError> {
    let out = tempo_propagate(&params.at_u(params.u))?;
    let c = cumulants_from_chi(&out.series, params.u)?;
    Ok((c, out))
}

fn last(v: &[f64]) -> f64 {
    v.last().copied().unwrap_or(f64::NAN)
}

fn sweep(raw: &RawConfig) -> Result<(Table, usize), CliError> {
    let axes = raw.axes();
    let points = raw.expand();
    let results = ["t_final", "mean_q", "var_q", "fd_error", "peak_bond", "discarded"];
    let rows = rows_parallel(&points, results.len(), |p| {
        let params = p.params()?;
        let (c, out) = final_summary(&params)?;
        Ok(vec![
            num(last(&c.times)),
            num(last(&c.mean_q)),
            num(last(&c.var_q)),
            num(last(&c.fd_error_estimate)),
            out.series.peak_bond().to_string(),
            num(out.series.total_discarded()),
        ])
    });
    Ok(sweep_table(&axes, &points, &results, rows))
}

/// Relative error against a reference, empty when the reference vanishes.
fn rel(x: f64, reference: f64) -> Option<f64> {
    (reference != 0.0).then(|| ((x - reference) / reference).abs())
}

fn converge(raw: &RawConfig) -> Result<(Table, usize), CliError> {
    let vary = raw.values("vary").join(",");
    if !matches!(vary.as_str(), "depth" | "delta" | "p") {
        return Err(CliError::Config(format!("`vary` must be depth, delta or p, got `{vary}`")));
    }
    let axes = raw.axes();
    if axes.iter().any(|a| *a != vary) {
        return Err(CliError::Config(format!("converge varies `{vary}` only; lists were given for: {}", axes.join(", "))));
    }
    let points = raw.expand();
    let results = ["t_final", "mean_q", "var_q", "ref_mean_q", "ref_var_q", "rel_err_mean", "rel_err_var", "peak_bond"];
    let rows = rows_parallel(&points, results.len(), |p| {
        let params = p.params()?;
        let (c, out) = final_summary(&params)?;
        let (q, v, tf) = (last(&c.mean_q), last(&c.var_q), last(&c.times));
        // The independent-boson closed forms serve as reference when Ω = 0.
        let (rq, rv) = if params.run.spin.omega_tunnel == 0.0 {
            let bath = params.run.bath;
            let rq = ibm_mean_heat_closed(bath.spectral(), tf);
            let rv = ibm_cumulant(&IbmCumulantRequest { order: 2, bath, t: IbmTime::Finite(tf) })?;
            (Some(rq), Some(rv))
        } else {
            (None, None)
        };
        Ok(vec![
            num(tf),
            num(q),
            num(v),
            opt(rq),
            opt(rv),
            opt(rq.and_then(|r| rel(q, r))),
            opt(rv.and_then(|r| rel(v, r))),
            out.series.peak_bond().to_string(),
        ])
    });
    Ok(sweep_table(&[vary], &points, &results, rows))
}

fn compare(point: &Point) -> Result<Table, CliError> {
    let params = point.params()?;
    let run = params.at_u(params.u);
    match point.get("oracle").unwrap_or("quapi") {
        "quapi" => {
            let table = run.eta_table()?;
            let tt = tempo_propagate_with(&run, &table)?;
            let (dense, _) = dense_propagate(&run.initial, &run.spin, &table, run.n_steps)?;
            let mut t = Table::new(&["t", "tempo_chi_re", "tempo_chi_im", "ref_chi_re", "ref_chi_im", "abs_err", "rel_err"]);
            let mut worst = 0.0f64;
            for i in 0..tt.series.len() {
                let (a, b) = (tt.series.chi[i], dense.chi[i]);
                let abs = (a - b).norm();
                let r = abs / b.norm().max(f64::MIN_POSITIVE);
                worst = worst.max(r);
                t.push(vec![num(tt.series.times[i]), num(a.re), num(a.im), num(b.re), num(b.im), num(abs), num(r)]);
            }
            t.meta("max_rel_err", num(worst));
            Ok(t)
        }
        "ibm" => {
            let out = tempo_propagate(&run)?;
            let c = cumulants_from_chi(&out.series, params.u)?;
            let bath = run.bath;
            let mut t = Table::new(&["t", "mean_q", "ref_mean_q", "rel_err_mean", "var_q", "ref_var_q", "rel_err_var"]);
            for i in 0..c.times.len() {
                let time = c.times[i];
                let rq = ibm_mean_heat_closed(bath.spectral(), time);
                let rv = ibm_cumulant(&IbmCumulantRequest { order: 2, bath, t: IbmTime::Finite(time) })?;
                t.push(vec![
                    num(time),
                    num(c.mean_q[i]),
                    num(rq),
                    opt(rel(c.mean_q[i], rq)),
                    num(c.var_q[i]),
                    num(rv),
                    opt(rel(c.var_q[i], rv)),
                ]);
            }
            telemetry(&mut t, &out);
            Ok(t)
        }
        name @ ("additive" | "variational") => {
            let out = tempo_propagate(&run)?;
            let c = cumulants_from_chi(&out.series, params.u)?;
            let prediction = if name == "additive" {
                additive_prediction(&run.spin, &run.bath, &run.initial)?
            } else {
                variational_prediction(&solve_silbey_harris(&run.spin, &run.bath)?, &run.initial)?
            };
            let q = last(&c.mean_q);
            let mut t = Table::new(&["t_final", "mean_q", "ref_mean_q", "rel_err_mean"]);
            t.push(vec![num(last(&c.times)), num(q), num(prediction.mean_heat), opt(rel(q, prediction.mean_heat))]);
            telemetry(&mut t, &out);
            Ok(t)
        }
        other => Err(CliError::Config(format!(
            "`oracle` must be quapi, ibm, additive or variational, got `{other}`"
        ))),
    }
}
