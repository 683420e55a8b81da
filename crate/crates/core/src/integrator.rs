//! Numerical solution of `i dC/dt = H(t) C`, the oracle for every analytic
//! result in the crate.

use std::io::Write;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analysis::{local_period_do, local_period_finite, mean, window_nodes};
use crate::error::{Error, Result};
use crate::linalg::{adjoint, matmul, CMat3, CVec3};
use crate::model::ModelParams;
use crate::ode::{solve, Dopri5Options, OdeStats, OdeSystem};
use crate::propagator::{Basis, Propagator3};
use crate::scalar::Real;
use crate::spectral::{
    eigenvalues, frame_at, frame_at_minus_infinity, frame_at_plus_infinity, nonadiabatic_couplings,
    nonadiabatic_couplings_exact,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances<T> {
    pub rtol: T,
    pub atol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Tolerances {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
        }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn new(rtol: T, atol: T) -> Result<Self> {
        if !(rtol > T::zero() && atol > T::zero()) {
            return Err(Error::Config(format!(
                "tolerances must be positive (rtol {rtol}, atol {atol})"
            )));
        }
        Ok(Tolerances { rtol, atol })
    }

    fn options(&self) -> Dopri5Options<T> {
        Dopri5Options {
            rtol: self.rtol,
            atol: self.atol,
            ..Dopri5Options::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T> {
    pub amplitudes: CVec3<T>,
    pub basis: Basis,
    pub t: T,
}

impl<T: Real> StateVector<T> {
    /// Diabatic state `psi_index` (1-based) at time `t`.
    pub fn diabatic(index: usize, t: T) -> Result<Self> {
        let k = check_index(index)?;
        let mut amplitudes = [Complex::new(T::zero(), T::zero()); 3];
        amplitudes[k] = Complex::new(T::one(), T::zero());
        Ok(StateVector {
            amplitudes,
            basis: Basis::Diabatic,
            t,
        })
    }

    pub fn populations(&self) -> [T; 3] {
        self.amplitudes.map(|c| c.norm_sqr())
    }

    pub fn norm_sqr(&self) -> T {
        self.populations().iter().copied().sum()
    }

    /// Re-expresses the state in `basis` using the frame at `self.t`.
    pub fn in_basis(&self, params: &ModelParams<T>, basis: Basis) -> Result<Self> {
        if basis == self.basis {
            return Ok(*self);
        }
        let fr = frame_at(params, self.t)?;
        let amplitudes = match basis {
            Basis::Adiabatic => fr.to_adiabatic(&self.amplitudes),
            Basis::Diabatic => fr.to_diabatic(&self.amplitudes),
        };
        Ok(StateVector {
            amplitudes,
            basis,
            t: self.t,
        })
    }
}

fn check_index(index: usize) -> Result<usize> {
    if (1..=3).contains(&index) {
        Ok(index - 1)
    } else {
        Err(Error::BadStateIndex(index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample<T> {
    pub t: T,
    pub populations: [T; 3],
    #[serde(skip)]
    pub amplitudes: CVec3<T>,
}

impl<T: Real> Sample<T> {
    fn new(t: T, amplitudes: CVec3<T>) -> Self {
        Sample {
            t,
            populations: amplitudes.map(|c| c.norm_sqr()),
            amplitudes,
        }
    }
}

/// Samples in increasing time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub basis: Basis,
    pub samples: Vec<Sample<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Population of state `index` (1-based) at every sample.
    pub fn population(&self, index: usize) -> Vec<T> {
        self.samples.iter().map(|s| s.populations[index - 1]).collect()
    }

    /// Projects every sample onto the adiabatic states at its own time.
    pub fn to_adiabatic(&self, params: &ModelParams<T>) -> Result<Trajectory<T>> {
        if self.basis == Basis::Adiabatic {
            return Ok(self.clone());
        }
        let samples = self
            .samples
            .iter()
            .map(|s| Ok(Sample::new(s.t, frame_at(params, s.t)?.to_adiabatic(&s.amplitudes))))
            .collect::<Result<_>>()?;
        Ok(Trajectory {
            basis: Basis::Adiabatic,
            samples,
        })
    }

    /// CSV with header `t,P1,P2,P3,ReC1,ImC1,...` (`A` instead of `C` for
    /// adiabatic amplitudes).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let sym = match self.basis {
            Basis::Diabatic => 'C',
            Basis::Adiabatic => 'A',
        };
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "P1".into(), "P2".into(), "P3".into()];
        for k in 1..=3 {
            header.push(format!("Re{sym}{k}"));
            header.push(format!("Im{sym}{k}"));
        }
        w.write_record(&header).map_err(csv_err)?;
        for s in &self.samples {
            let mut row = vec![format!("{:?}", s.t)];
            row.extend(s.populations.iter().map(|p| format!("{p:?}")));
            for c in &s.amplitudes {
                row.push(format!("{:?}", c.re));
                row.push(format!("{:?}", c.im));
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Which instants end up in a [`Trajectory`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sampling<T> {
    /// The start and every accepted step.
    Steps,
    /// Exactly these times (those outside the run are ignored).
    Grid(Vec<T>),
    /// Only the end point.
    EndOnly,
}

/// Largest step allowed at `t`: a tenth of the fastest local period scale.
pub fn max_step_at<T: Real>(params: &ModelParams<T>, t: T) -> T {
    let fastest = eigenvalues(params, t)
        .iter()
        .fold(params.beta.sqrt(), |m, l| m.max(l.abs()));
    T::lit(0.1) / fastest
}

/// Diabatic-basis equations on the real/imaginary split; `N / 6` columns
/// are propagated side by side.
struct Diabatic<'a, T> {
    params: &'a ModelParams<T>,
}

impl<T: Real, const N: usize> OdeSystem<T, N> for Diabatic<'_, T> {
    fn rhs(&self, t: T, y: &[T; N], dy: &mut [T; N]) {
        let h = self.params.hamiltonian_at(t).0;
        for col in 0..N / 6 {
            let o = 6 * col;
            for i in 0..3 {
                let (mut hre, mut him) = (T::zero(), T::zero());
                for j in 0..3 {
                    hre += h[i][j] * y[o + 2 * j];
                    him += h[i][j] * y[o + 2 * j + 1];
                }
                dy[o + 2 * i] = him;
                dy[o + 2 * i + 1] = -hre;
            }
        }
    }

    fn max_step(&self, t: T) -> T {
        max_step_at(self.params, t)
    }
}

/// How the adiabatic-basis path obtains the nonadiabatic couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingSource<T> {
    /// Central differences of the frame with this step.
    FiniteDifference(T),
    Exact,
}

struct Adiabatic<'a, T> {
    params: &'a ModelParams<T>,
    coupling: CouplingSource<T>,
}

impl<T: Real> OdeSystem<T, 6> for Adiabatic<'_, T> {
    fn rhs(&self, t: T, y: &[T; 6], dy: &mut [T; 6]) {
        let lambdas = eigenvalues(self.params, t);
        let nu = match self.coupling {
            CouplingSource::FiniteDifference(h) => nonadiabatic_couplings(self.params, t, h),
            CouplingSource::Exact => nonadiabatic_couplings_exact(self.params, t),
        };
        let Ok(nu) = nu else {
            // a degenerate frame poisons the step, which the solver rejects
            *dy = [T::nan(); 6];
            return;
        };
        for k in 0..3 {
            let (mut re, mut im) = (T::zero(), T::zero());
            for l in 0..3 {
                re += nu[k][l] * y[2 * l];
                im += nu[k][l] * y[2 * l + 1];
            }
            dy[2 * k] = lambdas[k] * y[2 * k + 1] - re;
            dy[2 * k + 1] = -lambdas[k] * y[2 * k] - im;
        }
    }

    fn max_step(&self, t: T) -> T {
        max_step_at(self.params, t)
    }
}

fn pack<T: Real>(c: &CVec3<T>) -> [T; 6] {
    [c[0].re, c[0].im, c[1].re, c[1].im, c[2].re, c[2].im]
}

fn unpack<T: Real>(y: &[T]) -> CVec3<T> {
    [0, 1, 2].map(|k| Complex::new(y[2 * k], y[2 * k + 1]))
}

fn check_window<T: Real>(t_from: T, t_to: T) -> Result<()> {
    if t_from.is_finite() && t_to.is_finite() {
        Ok(())
    } else {
        Err(Error::InfiniteWindow)
    }
}

fn run<T, S>(
    sys: &S,
    basis: Basis,
    t_from: T,
    y0: [T; 6],
    t_to: T,
    tols: &Tolerances<T>,
    sampling: &Sampling<T>,
) -> Result<(StateVector<T>, Trajectory<T>, OdeStats)>
where
    T: Real,
    S: OdeSystem<T, 6>,
{
    let forward = t_to >= t_from;
    let inside = |t: T| {
        if forward {
            t >= t_from && t <= t_to
        } else {
            t <= t_from && t >= t_to
        }
    };
    let mut grid: Vec<T> = match sampling {
        Sampling::Grid(g) => g.iter().copied().filter(|&t| inside(t)).collect(),
        _ => Vec::new(),
    };
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    if !forward {
        grid.reverse();
    }
    let n_grid = grid.len();
    let mut stops = grid;
    stops.push(t_to);

    let mut samples = Vec::new();
    if matches!(sampling, Sampling::Steps) {
        samples.push(Sample::new(t_from, unpack(&y0)));
    }
    let mut stop_count = 0;
    let (y, stats) = solve(sys, t_from, y0, &stops, &tols.options(), |t, y, on_stop| {
        match sampling {
            Sampling::Steps => {
                if !on_stop || stop_count == n_grid {
                    samples.push(Sample::new(t, unpack(y)));
                }
            }
            Sampling::Grid(_) => {
                if on_stop && stop_count < n_grid {
                    samples.push(Sample::new(t, unpack(y)));
                }
            }
            Sampling::EndOnly => {}
        }
        if on_stop {
            stop_count += 1;
        }
    })?;
    let end = StateVector {
        amplitudes: unpack(&y),
        basis,
        t: t_to,
    };
    if matches!(sampling, Sampling::EndOnly) {
        samples.push(Sample::new(t_to, end.amplitudes));
    }
    if !forward {
        samples.reverse();
    }
    samples.dedup_by(|a, b| a.t == b.t);
    Ok((end, Trajectory { basis, samples }, stats))
}

/// Propagates `initial` (either basis; adiabatic input is converted at its
/// own time) from `initial.t` to `t_to` in the diabatic basis. The norm is
/// left as integrated.
pub fn integrate<T: Real>(
    params: &ModelParams<T>,
    initial: &StateVector<T>,
    t_to: T,
    tols: &Tolerances<T>,
    sampling: &Sampling<T>,
) -> Result<(StateVector<T>, Trajectory<T>)> {
    params.validate()?;
    check_window(initial.t, t_to)?;
    let start = initial.in_basis(params, Basis::Diabatic)?;
    let sys = Diabatic { params };
    let (end, traj, stats) = run(
        &sys,
        Basis::Diabatic,
        start.t,
        pack(&start.amplitudes),
        t_to,
        tols,
        sampling,
    )?;
    log::debug!(
        "integrated [{}, {}]: {} steps, {} rejected",
        start.t,
        t_to,
        stats.accepted,
        stats.rejected
    );
    Ok((end, traj))
}

/// Same dynamics integrated directly in the adiabatic basis,
/// `dA/dt = -i diag(lambda) A - nu A`.
pub fn integrate_adiabatic<T: Real>(
    params: &ModelParams<T>,
    initial: &StateVector<T>,
    t_to: T,
    tols: &Tolerances<T>,
    sampling: &Sampling<T>,
    coupling: CouplingSource<T>,
) -> Result<(StateVector<T>, Trajectory<T>)> {
    params.validate()?;
    check_window(initial.t, t_to)?;
    let start = initial.in_basis(params, Basis::Adiabatic)?;
    let sys = Adiabatic { params, coupling };
    let (end, traj, _) = run(
        &sys,
        Basis::Adiabatic,
        start.t,
        pack(&start.amplitudes),
        t_to,
        tols,
        sampling,
    )?;
    Ok((end, traj))
}

fn identity_columns<T: Real>() -> [T; 18] {
    let mut y = [T::zero(); 18];
    for k in 0..3 {
        y[6 * k + 2 * k] = T::one();
    }
    y
}

fn matrix_from_columns<T: Real>(y: &[T; 18]) -> CMat3<T> {
    let mut u = [[Complex::new(T::zero(), T::zero()); 3]; 3];
    for col in 0..3 {
        let c = unpack(&y[6 * col..6 * col + 6]);
        for row in 0..3 {
            u[row][col] = c[row];
        }
    }
    u
}

/// Diabatic propagator `U(t_to, t_from)` with the three basis states
/// integrated together.
pub fn numeric_propagator<T: Real>(
    params: &ModelParams<T>,
    t_from: T,
    t_to: T,
    tols: &Tolerances<T>,
) -> Result<Propagator3<T>> {
    params.validate()?;
    check_window(t_from, t_to)?;
    let sys = Diabatic { params };
    let (y, _) = solve(&sys, t_from, identity_columns(), &[t_to], &tols.options(), |_, _, _| {})?;
    Ok(Propagator3 {
        u: matrix_from_columns(&y),
        basis: Basis::Diabatic,
        window: (t_from, t_to),
    })
}

/// `U(t, t_ref)` for every `t` in `times` (any order), from one forward
/// and one backward integration.
pub fn propagator_family<T: Real>(
    params: &ModelParams<T>,
    t_ref: T,
    times: &[T],
    tols: &Tolerances<T>,
) -> Result<Vec<CMat3<T>>> {
    params.validate()?;
    check_window(t_ref, t_ref)?;
    if let Some(bad) = times.iter().find(|t| !t.is_finite()) {
        return Err(Error::NonFinite(if bad.is_nan() { "time (NaN)" } else { "time" }));
    }
    let sys = Diabatic { params };
    let mut out = vec![matrix_from_columns(&identity_columns()); times.len()];
    for forward in [true, false] {
        let mut idx: Vec<usize> = (0..times.len())
            .filter(|&i| if forward { times[i] > t_ref } else { times[i] < t_ref })
            .collect();
        idx.sort_by(|&a, &b| {
            let o = times[a].partial_cmp(&times[b]).expect("finite times");
            if forward {
                o
            } else {
                o.reverse()
            }
        });
        if idx.is_empty() {
            continue;
        }
        let stops: Vec<T> = idx.iter().map(|&i| times[i]).collect();
        let mut cursor = 0;
        solve(
            &sys,
            t_ref,
            identity_columns(),
            &stops,
            &tols.options(),
            |_, y, on_stop| {
                if on_stop {
                    out[idx[cursor]] = matrix_from_columns(y);
                    cursor += 1;
                }
            },
        )?;
    }
    Ok(out)
}

/// `U(T, -T)` for each half-width, as `U(T, 0) U(-T, 0)^dagger`.
pub fn symmetric_window_propagators<T: Real>(
    params: &ModelParams<T>,
    t_halves: &[T],
    tols: &Tolerances<T>,
) -> Result<Vec<Propagator3<T>>> {
    let mut times = t_halves.to_vec();
    times.extend(t_halves.iter().map(|&t| -t));
    let family = propagator_family(params, T::zero(), &times, tols)?;
    let n = t_halves.len();
    Ok((0..n)
        .map(|i| Propagator3 {
            u: matmul(&family[i], &adjoint(&family[n + i])),
            basis: Basis::Diabatic,
            window: (-t_halves[i], t_halves[i]),
        })
        .collect())
}

/// Adiabatic amplitudes of diabatic state `psi_index` in the limit
/// `t -> -inf`: `psi3 -> phi1`, `psi1 -> -phi2`, `psi2 -> phi3`.
fn adiabatic_image_at_minus_infinity<T: Real>(k: usize) -> CVec3<T> {
    let f = frame_at_minus_infinity::<T>();
    f[k].map(|x| Complex::new(x, T::zero()))
}

/// Starting state at `-t0` for emulating a start in `psi_index` at `-inf`.
pub fn do_initial_state<T: Real>(params: &ModelParams<T>, index: usize, t0: T) -> Result<StateVector<T>> {
    let k = check_index(index)?;
    let t0 = t0.abs();
    let min = T::lit(20.0) * params.max_scale() / params.beta;
    if t0 < min {
        return Err(Error::T0TooSmall {
            t0: t0.as_f64(),
            min: min.as_f64(),
        });
    }
    StateVector {
        amplitudes: adiabatic_image_at_minus_infinity(k),
        basis: Basis::Adiabatic,
        t: -t0,
    }
    .in_basis(params, Basis::Diabatic)
}

/// `P(inf)` from values at two window sizes, assuming `P(t) = P(inf) + c/t^2`.
pub fn richardson<T: Real>(t_a: T, p_a: T, t_b: T, p_b: T) -> T {
    let (a2, b2) = (t_a * t_a, t_b * t_b);
    (b2 * p_b - a2 * p_a) / (b2 - a2)
}

/// Result of emulating the infinite window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DoEstimate<T> {
    pub initial: usize,
    pub t0: Vec<T>,
    /// Final diabatic populations for each `t0`.
    pub finals: Vec<[T; 3]>,
    /// Extrapolation from the last two `t0`.
    pub extrapolated: [T; 3],
}

/// Emulates a start in `psi_index` at `-inf` and an end at `+inf`: each run
/// spans `[-t0, t0]`, and the final state is read off in the adiabatic basis
/// and relabelled with the `t -> +inf` correspondence.
pub fn emulate_do_start<T: Real>(
    params: &ModelParams<T>,
    index: usize,
    t0_magnitudes: &[T],
    tols: &Tolerances<T>,
) -> Result<DoEstimate<T>> {
    if t0_magnitudes.is_empty() {
        return Err(Error::Config("at least one t0 is required".into()));
    }
    let f_plus = frame_at_plus_infinity::<T>();
    let mut finals = Vec::with_capacity(t0_magnitudes.len());
    for &t0 in t0_magnitudes {
        let start = do_initial_state(params, index, t0)?;
        let (end, _) = integrate(params, &start, t0.abs(), tols, &Sampling::EndOnly)?;
        let a = end.in_basis(params, Basis::Adiabatic)?.populations();
        let mut p = [T::zero(); 3];
        for n in 0..3 {
            for k in 0..3 {
                p[n] += f_plus[n][k] * f_plus[n][k] * a[k];
            }
        }
        finals.push(p);
    }
    let extrapolated = extrapolate(t0_magnitudes, &finals);
    Ok(DoEstimate {
        initial: index,
        t0: t0_magnitudes.iter().map(|t| t.abs()).collect(),
        finals,
        extrapolated,
    })
}

fn extrapolate<T: Real>(t0: &[T], values: &[[T; 3]]) -> [T; 3] {
    let n = values.len();
    if n < 2 {
        return values[n - 1];
    }
    let (ta, tb) = (t0[n - 2].abs(), t0[n - 1].abs());
    [0, 1, 2].map(|k| richardson(ta, values[n - 2][k], tb, values[n - 1][k]))
}

/// Numerical transition table for the infinite window, one emulation per
/// initial state.
pub fn do_numeric_table<T: Real>(
    params: &ModelParams<T>,
    t0_magnitudes: &[T],
    tols: &Tolerances<T>,
) -> Result<crate::probabilities::TransitionTable<T>> {
    let mut p = [[T::zero(); 3]; 3];
    for (m, row) in p.iter_mut().enumerate() {
        *row = emulate_do_start(params, m + 1, t0_magnitudes, tols)?.extrapolated;
    }
    Ok(crate::probabilities::TransitionTable::new(
        p,
        crate::probabilities::TableKind::Numeric,
    ))
}

/// Diabatic populations at `times` after an emulated start in `psi_index`
/// at `-inf`, extrapolated over the last two `t0`. All times must be later
/// than `-min(t0)`.
pub fn do_time_populations<T: Real>(
    params: &ModelParams<T>,
    index: usize,
    t0_magnitudes: &[T],
    times: &[T],
    tols: &Tolerances<T>,
) -> Result<Vec<[T; 3]>> {
    if t0_magnitudes.is_empty() || times.is_empty() {
        return Err(Error::Config("t0 and sample times must be non-empty".into()));
    }
    let earliest = t0_magnitudes.iter().fold(T::infinity(), |m, t| m.min(t.abs()));
    let t_max = times.iter().copied().fold(T::neg_infinity(), T::max);
    if times.iter().any(|&t| t <= -earliest) {
        return Err(Error::Config(format!("sample times must be later than {}", -earliest)));
    }
    let mut runs = Vec::new();
    for &t0 in t0_magnitudes {
        let start = do_initial_state(params, index, t0)?;
        let (_, traj) = integrate(params, &start, t_max, tols, &Sampling::Grid(times.to_vec()))?;
        let mut pops = Vec::with_capacity(times.len());
        for &t in times {
            let s = traj
                .samples
                .iter()
                .find(|s| s.t == t)
                .expect("every grid time is sampled");
            pops.push(s.populations);
        }
        runs.push(pops);
    }
    Ok((0..times.len())
        .map(|i| {
            let vals: Vec<[T; 3]> = runs.iter().map(|r| r[i]).collect();
            extrapolate(t0_magnitudes, &vals)
        })
        .collect())
}

/// Pointwise values on a grid together with their one-period window means.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Windowed<T> {
    pub pointwise: Vec<T>,
    pub averaged: Vec<T>,
}

/// `P_{3->1} = |U_13(T, -T)|^2` for each half-width.
pub fn p31_numeric_finite<T: Real>(params: &ModelParams<T>, t_halves: &[T], tols: &Tolerances<T>) -> Result<Vec<T>> {
    Ok(symmetric_window_propagators(params, t_halves, tols)?
        .iter()
        .map(|u| u.u[0][2].norm_sqr())
        .collect())
}

fn windowed<T: Real>(
    centres: &[T],
    nodes_per_window: usize,
    period: impl Fn(T) -> T,
    eval: impl FnOnce(&[T]) -> Result<Vec<T>>,
) -> Result<Windowed<T>> {
    if nodes_per_window == 0 {
        return Err(Error::Config("a window needs at least one node".into()));
    }
    let mut times = centres.to_vec();
    for &c in centres {
        times.extend(window_nodes(c, period(c), nodes_per_window));
    }
    let vals = eval(&times)?;
    let n = centres.len();
    let averaged = (0..n)
        .map(|i| {
            let lo = n + i * nodes_per_window;
            mean(&vals[lo..lo + nodes_per_window])
        })
        .collect();
    Ok(Windowed {
        pointwise: vals[..n].to_vec(),
        averaged,
    })
}

/// [`p31_numeric_finite`] plus its mean over one local period in `T`.
pub fn p31_numeric_finite_windowed<T: Real>(
    params: &ModelParams<T>,
    t_halves: &[T],
    nodes_per_window: usize,
    tols: &Tolerances<T>,
) -> Result<Windowed<T>> {
    windowed(
        t_halves,
        nodes_per_window,
        |t| local_period_finite(params, t),
        |times| p31_numeric_finite(params, times, tols),
    )
}

/// `P_{3->1}(t)` after an emulated start in `psi3` at `-inf`.
pub fn p31_numeric_do_time<T: Real>(
    params: &ModelParams<T>,
    times: &[T],
    t0_magnitudes: &[T],
    tols: &Tolerances<T>,
) -> Result<Vec<T>> {
    Ok(do_time_populations(params, 3, t0_magnitudes, times, tols)?
        .iter()
        .map(|p| p[0])
        .collect())
}

/// [`p31_numeric_do_time`] plus its mean over one local period in `t`.
pub fn p31_numeric_do_time_windowed<T: Real>(
    params: &ModelParams<T>,
    times: &[T],
    nodes_per_window: usize,
    t0_magnitudes: &[T],
    tols: &Tolerances<T>,
) -> Result<Windowed<T>> {
    windowed(
        times,
        nodes_per_window,
        |t| local_period_do(params, t),
        |all| p31_numeric_do_time(params, all, t0_magnitudes, tols),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    fn unit() -> ModelParams<f64> {
        ModelParams::symmetric(1.0, 1.0, 1.0)
    }

    #[test]
    fn decoupled_system_keeps_populations() {
        let p = ModelParams::<f64>::symmetric(0.0, 1.0, 1.0);
        let s = StateVector::diabatic(2, -3.0).unwrap();
        let (end, traj) = integrate(&p, &s, 3.0, &Tolerances::default(), &Sampling::Steps).unwrap();
        assert!(traj.samples.len() > 10);
        for smp in &traj.samples {
            assert!((smp.populations[1] - 1.0).abs() < 1e-9);
        }
        // phase of psi2 is -beta (t^2 - t0^2) / 2 = 0 over a symmetric window
        assert!((end.amplitudes[1] - Complex::new(1.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn decoupled_propagator_is_diagonal_phases() {
        let p = ModelParams::<f64>::symmetric(0.0, 1.5, 2.0);
        let u = numeric_propagator(&p, -1.0, 2.0, &Tolerances::default()).unwrap().u;
        let expect = [
            Complex::from_polar(1.0, 1.5 * 3.0),
            Complex::from_polar(1.0, -(2.0 * (4.0 - 1.0) / 2.0)),
            Complex::from_polar(1.0, -1.5 * 3.0),
        ];
        for k in 0..3 {
            assert!((u[k][k] - expect[k]).norm() < 1e-8, "{k}: {:?}", u[k][k]);
        }
    }

    #[test]
    fn propagator_is_unitary_and_reversible() {
        let p = unit();
        let tols = Tolerances::default();
        let fwd = numeric_propagator(&p, -8.0, 8.0, &tols).unwrap();
        assert!(unitarity_defect(&fwd.u) < 1e-8);
        let back = numeric_propagator(&p, 8.0, -8.0, &tols).unwrap();
        let id = matmul(&back.u, &fwd.u);
        assert!(max_abs_diff(&id, &crate::linalg::complexify(&crate::linalg::identity())) < 1e-8);
    }

    #[test]
    fn family_matches_direct_runs() {
        let p = ModelParams::<f64>::new(0.8, 1.2, 1.0, 1.0);
        let tols = Tolerances::default();
        let w = symmetric_window_propagators(&p, &[3.0, 6.0], &tols).unwrap();
        let direct = numeric_propagator(&p, -6.0, 6.0, &tols).unwrap();
        assert!(max_abs_diff(&w[1].u, &direct.u) < 1e-8);
        assert_eq!(w[0].window, (-3.0, 3.0));
    }

    #[test]
    fn grid_sampling_is_exact_and_ordered() {
        let p = unit();
        let s = StateVector::diabatic(1, 2.0).unwrap();
        let grid = vec![1.5, 0.0, -1.0, 5.0];
        let (_, traj) = integrate(&p, &s, -1.0, &Tolerances::default(), &Sampling::Grid(grid)).unwrap();
        assert_eq!(traj.times(), vec![-1.0, 0.0, 1.5]);
        let csv = traj.to_csv_string().unwrap();
        assert!(csv.starts_with("t,P1,P2,P3,ReC1,ImC1,ReC2,ImC2,ReC3,ImC3\n"));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn do_start_overlaps_expected_adiabatic_state() {
        let p = unit();
        let s = do_initial_state(&p, 3, 1e3).unwrap();
        let a = s.in_basis(&p, Basis::Adiabatic).unwrap();
        assert!(a.amplitudes[0].norm() > 0.999);
        let s2 = do_initial_state(&p, 2, 1e3).unwrap();
        assert!(s2.amplitudes[1].norm() > 0.999);
        assert!(matches!(do_initial_state(&p, 1, 5.0), Err(Error::T0TooSmall { .. })));
        assert!(matches!(do_initial_state(&p, 4, 50.0), Err(Error::BadStateIndex(4))));
    }

    #[test]
    fn richardson_removes_inverse_square_term() {
        let f = |t: f64| 0.3 + 2.0 / (t * t);
        assert!((richardson(10.0, f(10.0), 20.0, f(20.0)) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn adiabatic_path_agrees_with_diabatic_path() {
        let p = unit();
        let tols = Tolerances::default();
        let start = StateVector::diabatic(3, -6.0).unwrap();
        let (d_end, _) = integrate(&p, &start, 6.0, &tols, &Sampling::EndOnly).unwrap();
        for coupling in [CouplingSource::Exact, CouplingSource::FiniteDifference(1e-4)] {
            let (a_end, _) = integrate_adiabatic(&p, &start, 6.0, &tols, &Sampling::EndOnly, coupling).unwrap();
            let back = a_end.in_basis(&p, Basis::Diabatic).unwrap();
            for k in 0..3 {
                assert!((back.populations()[k] - d_end.populations()[k]).abs() < 1e-6);
            }
        }
    }
}
