//! Closed-form transition probabilities: the infinite-duration table, the
//! counterintuitive probability for a finite coupling window, its limits,
//! and the large-time average tables.

use num_traits::Num;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{CMat3, Mat3};
use crate::lz::make_node;
use crate::model::ModelParams;
use crate::propagator::{crossing_nodes, phase_integrals_default};
use crate::scalar::Real;
use crate::spectral::frame_at;

/// Slack allowed above 1 (or below 0) before a table entry is flagged.
pub const BOUND_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableKind {
    /// Infinite window, products of LZ probabilities.
    ExactDo,
    /// Finite window `[-T, T]`, large-T averages.
    FiniteAvg,
    /// Finite window, from the full analytic propagator.
    FiniteFull,
    /// Window `[-inf, t]`, large-t averages.
    DoTimeAvg,
    /// Window with an infinite end, from the analytic propagator.
    DoAnalytic,
    /// From numerical integration.
    Numeric,
}

/// `p[m][n]` is the probability of going from diabatic state `m+1` to `n+1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionTable<T> {
    pub p: Mat3<T>,
    pub kind: TableKind,
    /// False when some entry lies outside `[0, 1]` by more than
    /// [`BOUND_SLACK`]; asymptotic tables can do this far from their domain.
    pub within_bounds: bool,
}

impl<T: Real> TransitionTable<T> {
    pub fn new(p: Mat3<T>, kind: TableKind) -> Self {
        let eps = T::lit(BOUND_SLACK);
        let within_bounds = p.iter().flatten().all(|&x| x >= -eps && x <= T::one() + eps);
        if !within_bounds {
            log::debug!("{kind:?} table has entries outside [0, 1]");
        }
        TransitionTable { p, kind, within_bounds }
    }

    /// `P_{m -> n}` = `|U_nm|^2`.
    pub fn from_propagator(u: &CMat3<T>, kind: TableKind) -> Self {
        let mut p = [[T::zero(); 3]; 3];
        for (m, row) in p.iter_mut().enumerate() {
            for (n, x) in row.iter_mut().enumerate() {
                *x = u[n][m].norm_sqr();
            }
        }
        Self::new(p, kind)
    }

    /// `P_{from -> to}` with 1-based state labels.
    pub fn prob(&self, from: usize, to: usize) -> T {
        self.p[from - 1][to - 1]
    }

    pub fn row_sums(&self) -> [T; 3] {
        self.p.map(|row| row.iter().copied().sum())
    }
}

/// `total = average + oscillating`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilitySplit<T> {
    pub average: T,
    pub oscillating: T,
    pub total: T,
}

impl<T: Real> ProbabilitySplit<T> {
    pub fn from_parts(average: T, oscillating: T) -> Self {
        ProbabilitySplit {
            average,
            oscillating,
            total: average + oscillating,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Validity {
    Valid,
    Marginal,
    Outside,
}

/// A value from an asymptotic formula together with how far inside its
/// domain it was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Asymptotic<T> {
    pub value: T,
    pub validity: Validity,
}

/// The infinite-duration table from the two node probabilities.
pub fn do_exact_entries<N: Num + Copy>(p_minus: N, p_plus: N) -> [[N; 3]; 3] {
    let q_minus = N::one() - p_minus;
    let q_plus = N::one() - p_plus;
    [
        [p_minus, q_minus * p_plus, q_minus * q_plus],
        [q_minus, p_minus * p_plus, p_minus * q_plus],
        [N::zero(), q_plus, p_plus],
    ]
}

/// Large-T averages for the window `[-T, T]` with equal couplings, given
/// `p`, `kappa2 = Omega^2 / 4 delta^2` and `k = Omega^2 / beta^2 T^2`.
pub fn finite_avg_entries<N: Num + Copy>(p: N, kappa2: N, k: N) -> [[N; 3]; 3] {
    let one = N::one();
    let two = one + one;
    let n = |x: u8| (0..x).fold(N::zero(), |acc, _| acc + one);
    let q = one - p;
    let (p2, q2) = (p * p, q * q);
    let survive = p + k * (kappa2 * (q2 - two * p) + one - two * p - p2);
    let pass = p * q + k * (kappa2 * q2 + one - n(6) * p + n(7) * p2);
    let back = q + k * (p2 + n(4) * p - n(3) - kappa2 * q2);
    [
        [survive, pass, q2 + two * k * (kappa2 * (p - q2) + n(3) * p * q - q)],
        [back, p2 + two * k * (one + p - n(4) * p2), pass],
        [two * k * (kappa2 * p + q), back, survive],
    ]
}

/// Large-t averages for the window `[-inf, t]` with equal couplings, with
/// `k = Omega^2 / beta^2 t^2`.
pub fn do_time_entries<N: Num + Copy>(p: N, kappa2: N, k: N) -> [[N; 3]; 3] {
    let one = N::one();
    let two = one + one;
    let three = two + one;
    let q = one - p;
    let (p2, q2) = (p * p, q * q);
    [
        [
            p + k * (kappa2 * (q2 - p) - p2),
            p * q + k * (one - three * p * q),
            q2 + k * (q * (p - q) + kappa2 * (p - q2)),
        ],
        [
            q + k * (p2 - q - kappa2 * q2),
            p2 + k * (one - three * p2),
            p * q + k * (p * (p - q) + kappa2 * q2),
        ],
        [
            k * (kappa2 * p + q),
            q + k * (p - two * q),
            p + k * (q - p - kappa2 * p),
        ],
    ]
}

pub fn do_exact_table<T: Real>(params: &ModelParams<T>) -> TransitionTable<T> {
    let (minus, plus) = crossing_nodes(params);
    TransitionTable::new(do_exact_entries(minus.p, plus.p), TableKind::ExactDo)
}

fn symmetric_constants<T: Real>(params: &ModelParams<T>, time: T) -> (T, T, T) {
    let o2 = params.omega12 * params.omega12;
    let p = make_node(params.omega12, params.beta, params.tau()).p;
    let kappa2 = o2 / (T::lit(4.0) * params.delta * params.delta);
    let bt = params.beta * time;
    (p, kappa2, o2 / (bt * bt))
}

pub fn finite_avg_table<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<TransitionTable<T>> {
    params.validate()?;
    params.require_symmetric()?;
    let (p, kappa2, k) = symmetric_constants(params, t_half);
    Ok(TransitionTable::new(
        finite_avg_entries(p, kappa2, k),
        TableKind::FiniteAvg,
    ))
}

fn require_after_crossings<T: Real>(params: &ModelParams<T>, t: T) -> Result<()> {
    if t > params.tau() {
        Ok(())
    } else {
        Err(Error::AfterCrossingsRequired {
            t: t.as_f64(),
            tau: params.tau().as_f64(),
        })
    }
}

pub fn do_time_table<T: Real>(params: &ModelParams<T>, t: T) -> Result<TransitionTable<T>> {
    params.validate()?;
    params.require_symmetric()?;
    require_after_crossings(params, t)?;
    let (p, kappa2, k) = symmetric_constants(params, t);
    Ok(TransitionTable::new(
        do_time_entries(p, kappa2, k),
        TableKind::DoTimeAvg,
    ))
}

/// Counterintuitive probability `P_{3->1}` for the window `[-T, T]` with
/// equal couplings, from the exact frame at `T` and the phase integrals.
pub fn p31_full<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<ProbabilitySplit<T>> {
    params.validate()?;
    params.require_symmetric()?;
    let tau = params.tau();
    if t_half <= tau {
        return Err(Error::WindowTooShort {
            t_half: t_half.as_f64(),
            tau: tau.as_f64(),
        });
    }
    let node = make_node(params.omega12, params.beta, tau);
    let (p, q, phi) = (node.p, node.q, node.phi);
    let f = frame_at(params, t_half)?.f;
    let (f11, f12, f13) = (f[0][0], f[0][1], f[0][2]);
    let after = phase_integrals_default(params, tau, t_half)?;
    let before = phase_integrals_default(params, -t_half, -tau)?;
    let between = phase_integrals_default(params, -tau, tau)?;
    let full = before.then(&between).then(&after);
    let l3_from_mtau = between.lambda[2] + after.lambda[2];

    let two = T::two();
    let c12 = (after.diff(0, 1) + phi).cos();
    let c23 = (after.lambda[1] - l3_from_mtau).cos();
    let c1 = (full.lambda[0] + phi).cos();
    let amplitude = p * f11 * f11 + q * f12 * f12 - two * (p * q).sqrt() * f11 * f12 * c12
        + two * p.sqrt() * f12 * f13 * c23
        + two * q.sqrt() * f11 * f13 * c1;
    let total = amplitude * amplitude;

    let a = p * f11 * f11 + q * f12 * f12;
    let average = a * a + two * (q * f11 * f11 + p * f12 * f12) * f13 * f13 + two * p * q * f11 * f11 * f12 * f12;
    Ok(ProbabilitySplit {
        average,
        oscillating: total - average,
        total,
    })
}

fn window_validity<T: Real>(params: &ModelParams<T>, t: T) -> Validity {
    let scale = params.tau().max(T::one() / params.beta.sqrt());
    if t >= T::lit(10.0) * scale {
        Validity::Valid
    } else if t >= T::lit(3.0) * scale {
        log::debug!("T = {t} is marginal for the 1/T expansion (scale {scale})");
        Validity::Marginal
    } else {
        log::debug!("T = {t} is outside the domain of the 1/T expansion (scale {scale})");
        Validity::Outside
    }
}

/// Two-term large-T expansion of the average counterintuitive probability.
pub fn p31_average_asymptotic<T: Real>(params: &ModelParams<T>, t_half: T) -> Asymptotic<T> {
    let (minus, plus) = crossing_nodes(params);
    let d = params.delta;
    let bt = params.beta * t_half;
    let value = if params.is_symmetric() {
        let o2 = params.omega12 * params.omega12;
        let (p, q) = (plus.p, plus.q);
        let d2 = d * d;
        o2 * (o2 * p + T::lit(4.0) * d2 * q) / (T::two() * d2 * bt * bt)
            + o2 * (o2 * o2 * p - T::lit(8.0) * d2 * d2 * q) / (T::two() * d2 * d * bt * bt * bt)
    } else {
        let a2 = params.omega12 * params.omega12;
        let b2 = params.omega23 * params.omega23;
        let d2 = d * d;
        let mixed = a2 * plus.q + b2 * minus.q;
        (a2 * b2 * (minus.p + plus.p) + T::lit(4.0) * d2 * mixed) / (T::lit(4.0) * d2 * bt * bt)
            + (a2 * b2 * (a2 * minus.p + b2 * plus.p) - T::lit(8.0) * d2 * d2 * mixed)
                / (T::lit(4.0) * d2 * d * bt * bt * bt)
    };
    Asymptotic {
        value,
        validity: window_validity(params, t_half),
    }
}

/// Leading large-T term alone, `2 Omega^2 (kappa^2 p + q) / beta^2 T^2`.
pub fn p31_average_leading<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<T> {
    params.require_symmetric()?;
    let (p, kappa2, k) = symmetric_constants(params, t_half);
    Ok(T::two() * k * (kappa2 * p + T::one() - p))
}

fn coupling_validity<T: Real>(alpha: T, ok: impl Fn(T) -> bool, what: &str) -> Validity {
    if ok(alpha) {
        Validity::Valid
    } else {
        log::debug!("alpha = {alpha} is outside the {what} regime");
        Validity::Outside
    }
}

/// Near-adiabatic limit `4 Omega^2 / beta^2 T^2 cos^2[Lambda_1(T, -T) + phi]`.
pub fn p31_limit_adiabatic<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<Asymptotic<T>> {
    params.validate()?;
    params.require_symmetric()?;
    let node = make_node(params.omega12, params.beta, params.tau());
    let l = phase_integrals_default(params, -t_half, t_half)?;
    let bt = params.beta * t_half;
    let c = (l.lambda[0] + node.phi).cos();
    Ok(Asymptotic {
        value: T::lit(4.0) * params.omega12 * params.omega12 / (bt * bt) * c * c,
        validity: coupling_validity(node.alpha, |a| a >= T::two(), "near-adiabatic"),
    })
}

/// Weak-coupling limit
/// `Omega^4 / delta^2 beta^2 T^2 cos^2[Lambda_2(T, tau) - Lambda_3(T, -tau)]`.
pub fn p31_limit_weak<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<Asymptotic<T>> {
    params.validate()?;
    params.require_symmetric()?;
    let tau = params.tau();
    let alpha = params.alpha_minus();
    let after = phase_integrals_default(params, tau, t_half)?;
    let between = phase_integrals_default(params, -tau, tau)?;
    let c = (after.lambda[1] - between.lambda[2] - after.lambda[2]).cos();
    let o2 = params.omega12 * params.omega12;
    let dbt = params.delta * params.beta * t_half;
    Ok(Asymptotic {
        value: o2 * o2 / (dbt * dbt) * c * c,
        validity: coupling_validity(alpha, |a| a <= T::lit(0.3), "weak-coupling"),
    })
}

/// Counterintuitive probability at time `t` after both crossings, starting
/// at `-inf`, from the exact frame; couplings may differ.
pub fn p31_time_split<T: Real>(params: &ModelParams<T>, t: T) -> Result<ProbabilitySplit<T>> {
    params.validate()?;
    require_after_crossings(params, t)?;
    let (_, plus) = crossing_nodes(params);
    let f = frame_at(params, t)?.f;
    let (f11, f12) = (f[0][0], f[0][1]);
    let l = phase_integrals_default(params, params.tau(), t)?;
    let average = plus.q * f11 * f11 + plus.p * f12 * f12;
    let oscillating = T::two() * (plus.p * plus.q).sqrt() * f11 * f12 * (l.diff(0, 1) + plus.phi).cos();
    Ok(ProbabilitySplit::from_parts(average, oscillating))
}

/// Large-t form of [`p31_time_split`]: the average becomes
/// `Omega12^2 (4 delta^2 q+ + Omega23^2 p+) / 4 delta^2 beta^2 t^2`.
pub fn p31_time_split_asymptotic<T: Real>(params: &ModelParams<T>, t: T) -> Result<ProbabilitySplit<T>> {
    params.validate()?;
    require_after_crossings(params, t)?;
    let (_, plus) = crossing_nodes(params);
    let (a2, b2) = (params.omega12 * params.omega12, params.omega23 * params.omega23);
    let d = params.delta;
    let bt = params.beta * t;
    let four = T::lit(4.0);
    let average = a2 * (four * d * d * plus.q + b2 * plus.p) / (four * d * d * bt * bt);
    let l = phase_integrals_default(params, params.tau(), t)?;
    let oscillating = -a2 * params.omega23 / (d * params.beta * params.beta * t * t)
        * (plus.p * plus.q).sqrt()
        * (l.diff(0, 1) + plus.phi).cos();
    Ok(ProbabilitySplit::from_parts(average, oscillating))
}
