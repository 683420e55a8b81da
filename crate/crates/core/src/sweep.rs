//! Parameter scans behind the figures: one axis varied over a grid, a set
//! of named observables evaluated at every point, tabular output.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::analysis::{local_period_do, local_period_finite, mean, window_nodes};
use crate::error::{Error, Result};
use crate::integrator::{
    do_initial_state, do_time_populations, integrate, symmetric_window_propagators, Sampling, Tolerances, Trajectory,
};
use crate::model::{ModelParams, TimeBound};
use crate::probabilities::{
    do_time_table, finite_avg_table, p31_average_asymptotic, p31_full, p31_limit_adiabatic, p31_limit_weak,
    p31_time_split, p31_time_split_asymptotic, Asymptotic, TableKind, TransitionTable, Validity,
};
use crate::propagator::analytic_transition_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    /// Half-width of the coupling window `[-T, T]`.
    #[serde(rename = "T")]
    T,
    #[serde(rename = "delta")]
    Delta,
    /// Observation time after a start at `-inf`.
    #[serde(rename = "time")]
    Time,
    /// Common value of both couplings.
    #[serde(rename = "coupling")]
    Coupling,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::T => "T",
            Axis::Delta => "delta",
            Axis::Time => "time",
            Axis::Coupling => "coupling",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRange {
    pub lo: f64,
    pub hi: f64,
    pub n_points: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl GridRange {
    pub fn linear(lo: f64, hi: f64, n_points: usize) -> Self {
        GridRange {
            lo,
            hi,
            n_points,
            spacing: Spacing::Linear,
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let n = self.n_points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == n - 1 {
                    return self.hi;
                }
                let s = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.lo + (self.hi - self.lo) * s,
                    Spacing::Log => self.lo * (self.hi / self.lo).powf(s),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    /// Numerical `P_{3->1}`.
    P31Numeric,
    /// Numerical `P_{3->1}` averaged over one local oscillation period.
    P31NumericAvg,
    /// Full analytic `P_{3->1}` for the window `[-T, T]`.
    P31Full,
    /// Its average part.
    P31FullAvg,
    /// Large-T (or large-t) expansion of the average.
    P31Avg,
    /// Near-adiabatic limit.
    P31Adiabatic,
    /// Weak-coupling limit.
    P31Weak,
    /// Analytic `P_{3->1}(t)` after a start at `-inf`.
    P31Time,
    /// Its average part from the exact frame.
    P31TimeAvg,
    /// Numerical 3x3 table.
    TableNumeric,
    /// 3x3 table from the analytic propagator.
    TableAnalytic,
    /// 3x3 table of large-T (or large-t) averages.
    TableAvg,
}

const OBSERVABLES: [(Observable, &str); 12] = [
    (Observable::P31Numeric, "P31_numeric"),
    (Observable::P31NumericAvg, "P31_numeric_avg"),
    (Observable::P31Full, "P31_full"),
    (Observable::P31FullAvg, "P31_full_avg"),
    (Observable::P31Avg, "P31_avg"),
    (Observable::P31Adiabatic, "P31_adiabatic"),
    (Observable::P31Weak, "P31_weak"),
    (Observable::P31Time, "P31_time"),
    (Observable::P31TimeAvg, "P31_time_avg"),
    (Observable::TableNumeric, "table_numeric"),
    (Observable::TableAnalytic, "table_analytic"),
    (Observable::TableAvg, "table_avg"),
];

impl Observable {
    pub fn name(self) -> &'static str {
        OBSERVABLES
            .iter()
            .find(|(o, _)| *o == self)
            .map(|(_, n)| *n)
            .expect("every observable is named")
    }

    pub fn all_names() -> Vec<&'static str> {
        OBSERVABLES.iter().map(|(_, n)| *n).collect()
    }

    fn is_table(self) -> bool {
        matches!(
            self,
            Observable::TableNumeric | Observable::TableAnalytic | Observable::TableAvg
        )
    }

    fn is_numeric(self) -> bool {
        matches!(
            self,
            Observable::P31Numeric | Observable::P31NumericAvg | Observable::TableNumeric
        )
    }

    fn allowed_on(self, axis: Axis) -> bool {
        let time_only = matches!(self, Observable::P31Time | Observable::P31TimeAvg);
        let window_only = matches!(
            self,
            Observable::P31Full | Observable::P31FullAvg | Observable::P31Adiabatic | Observable::P31Weak
        );
        match axis {
            Axis::Time => !window_only,
            _ => !time_only,
        }
    }

    fn columns(self) -> Vec<String> {
        if self.is_table() {
            (1..=3)
                .flat_map(|m| (1..=3).map(move |n| format!("{}_P{m}{n}", self.name())))
                .collect()
        } else {
            vec![self.name().to_string()]
        }
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OBSERVABLES
            .iter()
            .find(|(_, n)| n.eq_ignore_ascii_case(s))
            .map(|(o, _)| *o)
            .ok_or_else(|| {
                Error::InvalidSweep(format!(
                    "unknown observable '{s}' (expected one of {})",
                    Observable::all_names().join(", ")
                ))
            })
    }
}

impl Serialize for Observable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Observable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

const WINDOW_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub axis: Axis,
    pub range: GridRange,
    /// Template; the axis value overrides the matching field.
    pub fixed: ModelParams<f64>,
    pub observables: Vec<Observable>,
    #[serde(default)]
    pub tols: Tolerances<f64>,
    /// Window half-width for the delta and coupling axes.
    #[serde(default)]
    pub window_half: Option<f64>,
    /// Start-time magnitudes for the time axis; empty picks them from the
    /// parameters.
    #[serde(default)]
    pub t0: Vec<f64>,
    /// Samples per averaging window.
    #[serde(default = "default_window_nodes")]
    pub window_nodes: usize,
}

fn default_window_nodes() -> usize {
    WINDOW_NODES
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let r = &self.range;
        if r.n_points < 2 {
            return Err(Error::InvalidSweep(format!(
                "n_points must be at least 2, got {}",
                r.n_points
            )));
        }
        if !(r.lo.is_finite() && r.hi.is_finite() && r.lo < r.hi) {
            return Err(Error::InvalidSweep(format!("need lo < hi, got [{}, {}]", r.lo, r.hi)));
        }
        if r.spacing == Spacing::Log && r.lo <= 0.0 {
            return Err(Error::InvalidSweep("log spacing needs lo > 0".into()));
        }
        if self.observables.is_empty() {
            return Err(Error::InvalidSweep("no observables requested".into()));
        }
        if let Some(o) = self.observables.iter().find(|o| !o.allowed_on(self.axis)) {
            return Err(Error::InvalidSweep(format!(
                "observable {o} is not defined on the {} axis",
                self.axis.name()
            )));
        }
        if matches!(self.axis, Axis::Delta | Axis::Coupling) && self.window_half.is_none() {
            return Err(Error::InvalidSweep(format!(
                "the {} axis needs a window half-width",
                self.axis.name()
            )));
        }
        if self.window_nodes == 0 {
            return Err(Error::InvalidSweep("window_nodes must be positive".into()));
        }
        Tolerances::new(self.tols.rtol, self.tols.atol)?;
        let mut probe = self.fixed.with_window(TimeBound::NegInfinity, TimeBound::PosInfinity);
        for x in [r.lo, r.hi] {
            self.apply(&mut probe, x);
            probe.validate()?;
        }
        Ok(())
    }

    fn apply(&self, params: &mut ModelParams<f64>, x: f64) {
        match self.axis {
            Axis::Delta => params.delta = x,
            Axis::Coupling => {
                params.omega12 = x;
                params.omega23 = x;
            }
            Axis::T | Axis::Time => {}
        }
    }

    /// Parameters and window half-width (or observation time) at `x`.
    fn point(&self, x: f64) -> (ModelParams<f64>, f64) {
        let mut p = self.fixed;
        self.apply(&mut p, x);
        let time = match self.axis {
            Axis::T | Axis::Time => x,
            Axis::Delta | Axis::Coupling => self.window_half.expect("validated"),
        };
        (p, time)
    }

    fn t0_for(&self, params: &ModelParams<f64>) -> Vec<f64> {
        if !self.t0.is_empty() {
            return self.t0.clone();
        }
        let t0 = (20.0 * params.max_scale() / params.beta).max(20.0 / params.beta.sqrt());
        vec![t0, 2.0 * t0]
    }

    pub fn columns(&self) -> Vec<String> {
        self.observables.iter().flat_map(|o| o.columns()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Value(f64),
    Error(String),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match self {
            Cell::Value(v) => Some(*v),
            Cell::Error(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    pub runtime_s: f64,
}

impl SweepResult {
    /// Values of one column (error cells become NaN).
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.cells[j].value().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn axis_values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn error_count(&self) -> usize {
        self.rows
            .iter()
            .flat_map(|r| &r.cells)
            .filter(|c| matches!(c, Cell::Error(_)))
            .count()
    }

    /// Header = axis name and observable columns; floats in shortest
    /// round-trip form; failed cells as `error: <message>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![self.spec.axis.name().to_string()];
        header.extend(self.columns.iter().cloned());
        w.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
        for row in &self.rows {
            let mut rec = vec![format!("{:?}", row.x)];
            rec.extend(row.cells.iter().map(|c| match c {
                Cell::Value(v) => format!("{v:?}"),
                Cell::Error(e) => format!("error: {e}"),
            }));
            w.write_record(&rec).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// `{"metadata": {...}, "rows": [{axis: x, column: value, ...}]}`. The
    /// wall-clock runtime is only included on request, so that identical
    /// specs give identical bytes.
    pub fn to_json(&self, include_runtime: bool) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut m = Map::new();
                m.insert(self.spec.axis.name().into(), json!(row.x));
                for (name, c) in self.columns.iter().zip(&row.cells) {
                    let v = match c {
                        Cell::Value(v) if v.is_finite() => json!(v),
                        Cell::Value(v) => json!(v.to_string()),
                        Cell::Error(e) => json!({ "error": e }),
                    };
                    m.insert(name.clone(), v);
                }
                Value::Object(m)
            })
            .collect();
        let mut meta = json!({
            "name": self.spec.name,
            "axis": self.spec.axis,
            "range": self.spec.range,
            "params": self.spec.fixed,
            "window_half": self.spec.window_half,
            "observables": self.spec.observables,
            "tolerances": self.spec.tols,
            "columns": self.columns,
        });
        if include_runtime {
            meta["runtime_s"] = json!(self.runtime_s);
        }
        json!({ "metadata": meta, "rows": rows })
    }

    pub fn write_json<W: Write>(&self, out: W, include_runtime: bool) -> Result<()> {
        serde_json::to_writer_pretty(out, &self.to_json(include_runtime)).map_err(|e| Error::Io(e.to_string()))
    }
}

type Cells = Vec<Cell>;

fn err_cells(n: usize, e: &Error) -> Cells {
    vec![Cell::Error(e.to_string()); n]
}

fn table_cells(t: &TransitionTable<f64>) -> Cells {
    t.p.iter().flatten().map(|&v| Cell::Value(v)).collect()
}

fn scalar(r: Result<f64>) -> Cells {
    match r {
        Ok(v) => vec![Cell::Value(v)],
        Err(e) => err_cells(1, &e),
    }
}

fn table(r: Result<TransitionTable<f64>>) -> Cells {
    match r {
        Ok(t) => table_cells(&t),
        Err(e) => err_cells(9, &e),
    }
}

fn asymptotic(r: Result<Asymptotic<f64>>) -> (Cells, bool) {
    match r {
        Ok(a) => (vec![Cell::Value(a.value)], a.validity != Validity::Valid),
        Err(e) => (err_cells(1, &e), false),
    }
}

/// Cells of one analytic observable, and whether the value comes from an
/// expansion evaluated outside its domain.
fn analytic_cells(spec: &SweepSpec, obs: Observable, x: f64) -> (Cells, bool) {
    let (p, time) = spec.point(x);
    let finite = spec.axis != Axis::Time;
    let plain = |c: Cells| (c, false);
    match obs {
        Observable::P31Full => plain(scalar(p31_full(&p, time).map(|s| s.total))),
        Observable::P31FullAvg => plain(scalar(p31_full(&p, time).map(|s| s.average))),
        Observable::P31Avg if finite => asymptotic(Ok(p31_average_asymptotic(&p, time))),
        Observable::P31Avg => plain(scalar(p31_time_split_asymptotic(&p, time).map(|s| s.average))),
        Observable::P31Adiabatic => asymptotic(p31_limit_adiabatic(&p, time)),
        Observable::P31Weak => asymptotic(p31_limit_weak(&p, time)),
        Observable::P31Time => plain(scalar(p31_time_split(&p, time).map(|s| s.total))),
        Observable::P31TimeAvg => plain(scalar(p31_time_split(&p, time).map(|s| s.average))),
        Observable::TableAnalytic => {
            let w = if finite {
                p.with_symmetric_window(time)
            } else {
                p.with_window(TimeBound::NegInfinity, TimeBound::Finite(time))
            };
            plain(table(analytic_transition_table(&w)))
        }
        Observable::TableAvg if finite => plain(table(finite_avg_table(&p, time))),
        Observable::TableAvg => plain(table(do_time_table(&p, time))),
        Observable::P31Numeric | Observable::P31NumericAvg | Observable::TableNumeric => {
            unreachable!("numeric observables are evaluated in batches")
        }
    }
}

/// Numerical observables on a set of window half-widths sharing one
/// parameter set. Returns, per centre, the cells of each requested numeric
/// observable in order.
fn numeric_finite(
    params: &ModelParams<f64>,
    centres: &[f64],
    wanted: &[Observable],
    spec: &SweepSpec,
) -> Result<Vec<Cells>> {
    let m = spec.window_nodes;
    let with_avg = wanted.contains(&Observable::P31NumericAvg);
    let mut times = centres.to_vec();
    if with_avg {
        for &c in centres {
            times.extend(window_nodes(c, local_period_finite(params, c), m));
        }
    }
    let us = symmetric_window_propagators(params, &times, &spec.tols)?;
    let n = centres.len();
    Ok((0..n)
        .map(|i| {
            let mut cells = Vec::new();
            for o in wanted {
                match o {
                    Observable::P31Numeric => cells.push(Cell::Value(us[i].u[0][2].norm_sqr())),
                    Observable::P31NumericAvg => {
                        let lo = n + i * m;
                        let vals: Vec<f64> = us[lo..lo + m].iter().map(|u| u.u[0][2].norm_sqr()).collect();
                        cells.push(Cell::Value(mean(&vals)));
                    }
                    Observable::TableNumeric => cells.extend(table_cells(&TransitionTable::from_propagator(
                        &us[i].u,
                        TableKind::Numeric,
                    ))),
                    _ => unreachable!(),
                }
            }
            cells
        })
        .collect())
}

fn numeric_time(
    params: &ModelParams<f64>,
    centres: &[f64],
    wanted: &[Observable],
    spec: &SweepSpec,
) -> Result<Vec<Cells>> {
    let m = spec.window_nodes;
    let with_avg = wanted.contains(&Observable::P31NumericAvg);
    let mut times = centres.to_vec();
    if with_avg {
        for &c in centres {
            times.extend(window_nodes(c, local_period_do(params, c), m));
        }
    }
    let t0 = spec.t0_for(params);
    let from3 = do_time_populations(params, 3, &t0, &times, &spec.tols)?;
    let rows = if wanted.contains(&Observable::TableNumeric) {
        Some([
            do_time_populations(params, 1, &t0, centres, &spec.tols)?,
            do_time_populations(params, 2, &t0, centres, &spec.tols)?,
        ])
    } else {
        None
    };
    let n = centres.len();
    Ok((0..n)
        .map(|i| {
            let mut cells = Vec::new();
            for o in wanted {
                match o {
                    Observable::P31Numeric => cells.push(Cell::Value(from3[i][0])),
                    Observable::P31NumericAvg => {
                        let lo = n + i * m;
                        let vals: Vec<f64> = from3[lo..lo + m].iter().map(|p| p[0]).collect();
                        cells.push(Cell::Value(mean(&vals)));
                    }
                    Observable::TableNumeric => {
                        let r = rows.as_ref().expect("computed above");
                        for row in [&r[0][i], &r[1][i], &from3[i]] {
                            cells.extend(row.iter().map(|&v| Cell::Value(v)));
                        }
                    }
                    _ => unreachable!(),
                }
            }
            cells
        })
        .collect())
}

/// Evaluates every observable at every grid point. Points are processed in
/// parallel and returned in grid order; a failure at one point is recorded
/// in its cells and does not stop the sweep.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let started = Instant::now();
    let xs = spec.range.points();
    let numeric: Vec<Observable> = spec.observables.iter().copied().filter(|o| o.is_numeric()).collect();
    let n_numeric_cols: usize = numeric.iter().map(|o| o.columns().len()).sum();

    let batch = |params: &ModelParams<f64>, centres: &[f64]| -> Vec<Cells> {
        let r = if spec.axis == Axis::Time {
            numeric_time(params, centres, &numeric, spec)
        } else {
            numeric_finite(params, centres, &numeric, spec)
        };
        r.unwrap_or_else(|e| {
            log::warn!("numeric evaluation failed: {e}");
            vec![err_cells(n_numeric_cols, &e); centres.len()]
        })
    };
    // Along T and time the parameters are fixed, so one integration serves
    // the whole grid; along the other axes each point needs its own.
    let numeric_cells: Vec<Cells> = if numeric.is_empty() {
        vec![Vec::new(); xs.len()]
    } else if matches!(spec.axis, Axis::T | Axis::Time) {
        batch(&spec.fixed, &xs)
    } else {
        xs.par_iter()
            .map(|&x| {
                let (p, time) = spec.point(x);
                batch(&p, &[time]).pop().expect("one centre")
            })
            .collect()
    };

    let evaluated: Vec<(SweepRow, Vec<Observable>)> = xs
        .par_iter()
        .zip(numeric_cells.into_par_iter())
        .map(|(&x, num)| {
            let mut num = num.into_iter();
            let mut cells = Vec::new();
            let mut outside = Vec::new();
            for &o in &spec.observables {
                if o.is_numeric() {
                    cells.extend(num.by_ref().take(o.columns().len()));
                } else {
                    let (c, out) = analytic_cells(spec, o, x);
                    cells.extend(c);
                    if out {
                        outside.push(o);
                    }
                }
            }
            (SweepRow { x, cells }, outside)
        })
        .collect();
    for &o in &spec.observables {
        let n = evaluated.iter().filter(|(_, out)| out.contains(&o)).count();
        if n > 0 {
            log::warn!(
                "{}: {o} evaluated outside its domain of validity at {n} of {} points",
                spec.name,
                xs.len()
            );
        }
    }
    let rows = evaluated.into_iter().map(|(r, _)| r).collect();

    Ok(SweepResult {
        spec: spec.clone(),
        columns: spec.columns(),
        rows,
        runtime_s: started.elapsed().as_secs_f64(),
    })
}

/// Grid size giving at least `per_period` points per local period of the
/// fastest oscillation at the upper end of `[lo, hi]`.
pub fn resolved_points(params: &ModelParams<f64>, axis: Axis, lo: f64, hi: f64, per_period: usize) -> usize {
    let period = match axis {
        // cos^2 of Lambda_1(T, -T): half the phase period
        Axis::T => 0.5 * local_period_finite(params, hi),
        _ => local_period_do(params, hi),
    };
    let step = period / per_period as f64;
    ((hi - lo) / step).ceil() as usize + 1
}

pub const PRESETS: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

fn unit_params(omega: f64) -> ModelParams<f64> {
    ModelParams::symmetric(omega, 1.0, 1.0)
}

/// Named sweep presets: fig3 scans `T` for `Omega = delta = 1`,
/// fig4 scans `delta` at `T = 5`, fig5 scans the observation time for
/// `Omega` in {1, 3, 10}. fig2 is a pair of trajectories, see
/// [`figure2_trajectories`].
pub fn preset(name: &str) -> Result<Vec<SweepSpec>> {
    let base = |name: &str, axis, range, fixed, observables: Vec<Observable>| SweepSpec {
        name: name.to_string(),
        axis,
        range,
        fixed,
        observables,
        tols: Tolerances::default(),
        window_half: None,
        t0: Vec::new(),
        window_nodes: WINDOW_NODES,
    };
    match name {
        "fig3" => {
            let p = unit_params(1.0);
            let n = resolved_points(&p, Axis::T, 2.0, 30.0, 12);
            Ok(vec![base(
                "fig3",
                Axis::T,
                GridRange::linear(2.0, 30.0, n),
                p,
                vec![
                    Observable::P31Numeric,
                    Observable::P31Full,
                    Observable::P31Avg,
                    Observable::P31FullAvg,
                ],
            )])
        }
        "fig4" => {
            let mut s = base(
                "fig4",
                Axis::Delta,
                GridRange::linear(0.5, 4.5, 401),
                unit_params(1.0),
                vec![
                    Observable::P31Numeric,
                    Observable::P31Full,
                    Observable::P31Avg,
                    Observable::P31FullAvg,
                ],
            );
            s.window_half = Some(5.0);
            Ok(vec![s])
        }
        "fig5" => Ok([1.0, 3.0, 10.0]
            .iter()
            .map(|&omega| {
                let p = unit_params(omega);
                let n = resolved_points(&p, Axis::Time, 2.0, 20.0, 12);
                base(
                    &format!("fig5_omega{omega}"),
                    Axis::Time,
                    GridRange::linear(2.0, 20.0, n),
                    p,
                    vec![Observable::P31Numeric, Observable::P31TimeAvg, Observable::P31Avg],
                )
            })
            .collect()),
        "fig2" => Err(Error::InvalidSweep(
            "fig2 is a pair of trajectories, not a sweep".into(),
        )),
        other => Err(Error::InvalidSweep(format!(
            "unknown preset '{other}' (expected one of {})",
            PRESETS.join(", ")
        ))),
    }
}

/// Populations after a start in `psi1` at (emulated) `-inf`, sampled on the
/// grid `times` in both bases.
pub fn figure2_trajectories(
    params: &ModelParams<f64>,
    times: &[f64],
    tols: &Tolerances<f64>,
) -> Result<(Trajectory<f64>, Trajectory<f64>)> {
    let first = times.iter().copied().fold(f64::INFINITY, f64::min);
    let last = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(first.is_finite() && last.is_finite()) {
        return Err(Error::InvalidSweep(
            "trajectory grid must be finite and non-empty".into(),
        ));
    }
    let t0 = (20.0 * params.max_scale() / params.beta).max(-first).max(20.0);
    let start = do_initial_state(params, 1, t0)?;
    let (_, diabatic) = integrate(params, &start, last, tols, &Sampling::Grid(times.to_vec()))?;
    let adiabatic = diabatic.to_adiabatic(params)?;
    Ok((diabatic, adiabatic))
}

/// The fig2 parameters and grid: `Omega = delta = 1`, `t` in `[-10, 10]`.
pub fn figure2_preset() -> (ModelParams<f64>, Vec<f64>) {
    let times = GridRange::linear(-10.0, 10.0, 2001).points();
    (unit_params(1.0), times)
}
