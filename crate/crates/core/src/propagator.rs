//! Dynamical phases and the analytic propagator built from two instantaneous
//! Landau-Zener crossings joined by adiabatic evolution.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{complexify, matmul, transpose, CMat3};
use crate::lz::{lz_matrix_minus, lz_matrix_plus, make_node, LzNode};
use crate::model::{ModelParams, TimeBound};
use crate::probabilities::{TableKind, TransitionTable};
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Real;
use crate::spectral::{eigenvalues, frame_at, frame_at_minus_infinity, frame_at_plus_infinity};

/// `lambda[k] = Lambda_{k+1}(to, from)`, the integral of the `k`-th
/// eigenvalue (descending order) from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseIntegrals<T> {
    pub from: T,
    pub to: T,
    pub lambda: [T; 3],
}

impl<T: Real> PhaseIntegrals<T> {
    pub fn zero(at: T) -> Self {
        PhaseIntegrals {
            from: at,
            to: at,
            lambda: [T::zero(); 3],
        }
    }

    /// `Lambda_{kl} = Lambda_k - Lambda_l`, zero-based indices.
    pub fn diff(&self, k: usize, l: usize) -> T {
        self.lambda[k] - self.lambda[l]
    }

    /// Joins `[from, mid]` (self) with `[mid, to]` (`later`).
    pub fn then(&self, later: &PhaseIntegrals<T>) -> PhaseIntegrals<T> {
        PhaseIntegrals {
            from: self.from,
            to: later.to,
            lambda: [0, 1, 2].map(|k| self.lambda[k] + later.lambda[k]),
        }
    }

    /// `M = diag(exp(-i Lambda_k))`.
    pub fn phase_matrix(&self) -> CMat3<T> {
        let z = Complex::new(T::zero(), T::zero());
        let mut m = [[z; 3]; 3];
        for k in 0..3 {
            m[k][k] = Complex::from_polar(T::one(), -self.lambda[k]);
        }
        m
    }
}

/// Default absolute tolerance `1e-10 (1 + |to - from| s_max)`, where `s_max`
/// bounds the eigenvalue magnitudes on the interval.
pub fn default_phase_tol<T: Real>(params: &ModelParams<T>, from: T, to: T) -> T {
    let s_max = [from, to]
        .iter()
        .flat_map(|&t| eigenvalues(params, t))
        .fold(T::zero(), |m, l| m.max(l.abs()));
    T::lit(1e-10) * (T::one() + (to - from).abs() * s_max)
}

/// Integrates the three eigenvalue branches over `[from, to]`, splitting
/// at the crossing times.
pub fn phase_integrals<T: Real>(params: &ModelParams<T>, from: T, to: T, tol: T) -> Result<PhaseIntegrals<T>> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(Error::InfiniteWindow);
    }
    let tau = params.tau();
    let q = integrate(
        |t| eigenvalues(params, t),
        from,
        to,
        &[-tau, tau],
        &QuadOptions::absolute(tol),
    )?;
    Ok(PhaseIntegrals {
        from,
        to,
        lambda: q.value,
    })
}

/// [`phase_integrals`] at [`default_phase_tol`].
pub fn phase_integrals_default<T: Real>(params: &ModelParams<T>, from: T, to: T) -> Result<PhaseIntegrals<T>> {
    phase_integrals(params, from, to, default_phase_tol(params, from, to))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Diabatic,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagator3<T> {
    pub u: CMat3<T>,
    pub basis: Basis,
    pub window: (T, T),
}

/// Phases between the window ends and the crossings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingPhases<T> {
    /// `Lambda(-tau, t_i)`; zero when `t_i = -inf`.
    pub before: PhaseIntegrals<T>,
    /// `Lambda(tau, -tau)`.
    pub between: PhaseIntegrals<T>,
    /// `Lambda(t_f, tau)`; zero when `t_f = +inf`.
    pub after: PhaseIntegrals<T>,
}

impl<T: Real> CrossingPhases<T> {
    /// `Lambda(t_f, t_i)` (with any infinite leg dropped).
    pub fn total(&self) -> PhaseIntegrals<T> {
        self.before.then(&self.between).then(&self.after)
    }
}

/// Phases for a window that must contain both crossings. Infinite ends
/// contribute no phase: every divergent leg multiplies a whole row or
/// column of the propagator and drops out of all probabilities.
pub fn crossing_phases<T: Real>(
    params: &ModelParams<T>,
    t_i: TimeBound<T>,
    t_f: TimeBound<T>,
) -> Result<CrossingPhases<T>> {
    let tau = params.tau();
    let inside = t_i.value() < -tau && t_f.value() > tau;
    if !inside {
        return Err(Error::CrossingsOutsideWindow {
            t_i: t_i.value().as_f64(),
            t_f: t_f.value().as_f64(),
            tau: tau.as_f64(),
        });
    }
    let leg = |from: TimeBound<T>, to: TimeBound<T>, anchor: T| -> Result<PhaseIntegrals<T>> {
        match (from.finite(), to.finite()) {
            (Some(a), Some(b)) => phase_integrals_default(params, a, b),
            _ => Ok(PhaseIntegrals::zero(anchor)),
        }
    };
    Ok(CrossingPhases {
        before: leg(t_i, TimeBound::Finite(-tau), -tau)?,
        between: phase_integrals_default(params, -tau, tau)?,
        after: leg(TimeBound::Finite(tau), t_f, tau)?,
    })
}

/// The two crossing nodes `(at -tau, at +tau)`.
pub fn crossing_nodes<T: Real>(params: &ModelParams<T>) -> (LzNode<T>, LzNode<T>) {
    let tau = params.tau();
    (
        make_node(params.omega12, params.beta, -tau),
        make_node(params.omega23, params.beta, tau),
    )
}

/// `M(t_f, tau) U_LZ(tau) M(tau, -tau) U_LZ(-tau) M(-tau, t_i)`.
pub fn five_factor_product<T: Real>(params: &ModelParams<T>, ph: &CrossingPhases<T>) -> CMat3<T> {
    let (minus, plus) = crossing_nodes(params);
    let mut u = ph.before.phase_matrix();
    u = matmul(&lz_matrix_minus(&minus), &u);
    u = matmul(&ph.between.phase_matrix(), &u);
    u = matmul(&lz_matrix_plus(&plus), &u);
    matmul(&ph.after.phase_matrix(), &u)
}

/// Entry-by-entry closed form of the same product.
pub fn closed_form_product<T: Real>(params: &ModelParams<T>, ph: &CrossingPhases<T>) -> CMat3<T> {
    let (minus, plus) = crossing_nodes(params);
    let (pm, qm, phm) = (minus.p, minus.q, minus.phi);
    let (pp, qp, php) = (plus.p, plus.q, plus.phi);
    let (b, m, a) = (&ph.before.lambda, &ph.between.lambda, &ph.after.lambda);
    let e = |modulus: T, phase: T| Complex::from_polar(modulus, phase);
    let z = Complex::new(T::zero(), T::zero());

    // Lambda_k(t_f, t_i), Lambda_k(tau, t_i), Lambda_k(t_f, -tau)
    let full = [0, 1, 2].map(|k| b[k] + m[k] + a[k]);
    let to_tau = [0, 1, 2].map(|k| b[k] + m[k]);
    let from_mtau = [0, 1, 2].map(|k| m[k] + a[k]);

    [
        [
            e(qp.sqrt(), -php - full[0]),
            -e((pp * qm).sqrt(), -phm - a[0] - to_tau[1]),
            e((pm * pp).sqrt(), -a[0] - m[1] - b[2]),
        ],
        [
            e(pp.sqrt(), -to_tau[0] - a[1]),
            e((qm * qp).sqrt(), php - phm - full[1]),
            -e((pm * qp).sqrt(), php - from_mtau[1] - b[2]),
        ],
        [z, e(pm.sqrt(), -b[1] - from_mtau[2]), e(qm.sqrt(), phm - full[2])],
    ]
}

/// Adiabatic-basis propagator over `[t_i, t_f]`; both crossings must lie
/// strictly inside the window.
pub fn analytic_adiabatic_propagator<T: Real>(params: &ModelParams<T>, t_i: T, t_f: T) -> Result<Propagator3<T>> {
    params.validate()?;
    let ph = crossing_phases(params, TimeBound::Finite(t_i), TimeBound::Finite(t_f))?;
    Ok(Propagator3 {
        u: five_factor_product(params, &ph),
        basis: Basis::Adiabatic,
        window: (t_i, t_f),
    })
}

/// Adiabatic-basis propagator over a window that may contain zero, one or
/// both crossings; crossings exactly on an end are counted as inside.
pub fn piecewise_adiabatic_propagator<T: Real>(params: &ModelParams<T>, t_i: T, t_f: T) -> Result<Propagator3<T>> {
    params.validate()?;
    if t_f < t_i {
        return Err(Error::EmptyWindow {
            start: t_i.as_f64(),
            end: t_f.as_f64(),
        });
    }
    let (minus, plus) = crossing_nodes(params);
    let mut u = complexify(&crate::linalg::identity());
    let mut t = t_i;
    for (node, lz) in [(minus, lz_matrix_minus(&minus)), (plus, lz_matrix_plus(&plus))] {
        if node.t_cross >= t_i && node.t_cross <= t_f {
            u = matmul(&phase_integrals_default(params, t, node.t_cross)?.phase_matrix(), &u);
            u = matmul(&lz, &u);
            t = node.t_cross;
        }
    }
    u = matmul(&phase_integrals_default(params, t, t_f)?.phase_matrix(), &u);
    Ok(Propagator3 {
        u,
        basis: Basis::Adiabatic,
        window: (t_i, t_f),
    })
}

/// Adiabatic propagator over `[-T, T]` for equal couplings, written with
/// the phases that survive the mirror symmetry of the spectrum.
pub fn symmetric_adiabatic_propagator<T: Real>(params: &ModelParams<T>, t_half: T) -> Result<Propagator3<T>> {
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
    let l_full = phase_integrals_default(params, -t_half, t_half)?;
    let l_after = phase_integrals_default(params, tau, t_half)?;
    let l_mid = phase_integrals_default(params, -tau, tau)?;
    let l1 = l_full.lambda[0];
    let l12 = l_after.diff(0, 1);
    // Lambda_2(T, tau) and Lambda_3(T, -tau)
    let l2 = l_after.lambda[1];
    let l3 = l_after.lambda[2] + l_mid.lambda[2];
    let e = |modulus: T, phase: T| Complex::from_polar(modulus, phase);
    let re = |x: T| Complex::new(x, T::zero());
    let u = [
        [e(q.sqrt(), -phi - l1), -e((p * q).sqrt(), -phi - l12), re(p)],
        [e(p.sqrt(), l3 - l2), re(q), -e((p * q).sqrt(), phi + l12)],
        [re(T::zero()), e(p.sqrt(), l2 - l3), e(q.sqrt(), phi + l1)],
    ];
    Ok(Propagator3 {
        u,
        basis: Basis::Adiabatic,
        window: (-t_half, t_half),
    })
}

/// Diabatic-basis propagator `F(t_f) U^A F^T(t_i)` for a finite window.
pub fn diabatic_propagator<T: Real>(params: &ModelParams<T>, t_i: T, t_f: T) -> Result<Propagator3<T>> {
    let ua = analytic_adiabatic_propagator(params, t_i, t_f)?;
    to_diabatic(params, &ua)
}

/// Transforms an adiabatic-basis propagator over a finite window to the
/// diabatic basis.
pub fn to_diabatic<T: Real>(params: &ModelParams<T>, ua: &Propagator3<T>) -> Result<Propagator3<T>> {
    let (t_i, t_f) = ua.window;
    let fi = complexify(&transpose(&frame_at(params, t_i)?.f));
    let ff = complexify(&frame_at(params, t_f)?.f);
    Ok(Propagator3 {
        u: matmul(&ff, &matmul(&ua.u, &fi)),
        basis: Basis::Diabatic,
        window: (t_i, t_f),
    })
}

/// Analytic transition probabilities for the window stored in `params`,
/// which may be infinite on either side.
pub fn analytic_transition_table<T: Real>(params: &ModelParams<T>) -> Result<TransitionTable<T>> {
    params.validate()?;
    let (t_i, t_f) = (params.t_start, params.t_end);
    let ph = crossing_phases(params, t_i, t_f)?;
    let ua = five_factor_product(params, &ph);
    let frame = |b: TimeBound<T>| -> Result<_> {
        Ok(match b {
            TimeBound::Finite(t) => frame_at(params, t)?.f,
            TimeBound::NegInfinity => frame_at_minus_infinity(),
            TimeBound::PosInfinity => frame_at_plus_infinity(),
        })
    };
    let fi = complexify(&transpose(&frame(t_i)?));
    let ff = complexify(&frame(t_f)?);
    let u = matmul(&ff, &matmul(&ua, &fi));
    let kind = if t_i.is_finite() && t_f.is_finite() {
        TableKind::FiniteFull
    } else {
        TableKind::DoAnalytic
    };
    Ok(TransitionTable::from_propagator(&u, kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs_diff, unitarity_defect};

    fn unit() -> ModelParams<f64> {
        ModelParams::<f64>::symmetric(1.0, 1.0, 1.0)
    }

    #[test]
    fn empty_interval_has_no_phase() {
        let l = phase_integrals(&unit(), 0.7, 0.7, 1e-12).unwrap();
        assert_eq!(l.lambda, [0.0; 3]);
    }

    #[test]
    fn decoupled_phases_follow_sorted_branches() {
        let p = ModelParams::<f64>::new(0.0, 0.0, 1.0, 1.0);
        let l = phase_integrals(&p, 0.0, 2.0, 1e-12).unwrap();
        // sorted branches: max(t, 1), the middle one, and -1
        assert!((l.lambda[0] - 2.5).abs() < 1e-10, "{:?}", l.lambda);
        assert!((l.lambda[1] - 1.5).abs() < 1e-10);
        assert!((l.lambda[2] + 2.0).abs() < 1e-10);
        let trace: f64 = l.lambda.iter().sum();
        assert!((trace - 2.0).abs() < 1e-10);
    }

    #[test]
    fn phases_are_additive() {
        let p = ModelParams::<f64>::new(0.8, 1.3, 0.9, 1.1);
        let a = phase_integrals_default(&p, -4.0, 0.3).unwrap();
        let b = phase_integrals_default(&p, 0.3, 6.0).unwrap();
        let c = phase_integrals_default(&p, -4.0, 6.0).unwrap();
        for k in 0..3 {
            assert!((a.then(&b).lambda[k] - c.lambda[k]).abs() < 1e-8);
        }
        let back = phase_integrals_default(&p, 6.0, -4.0).unwrap();
        assert!((back.lambda[0] + c.lambda[0]).abs() < 1e-8);
    }

    #[test]
    fn middle_phase_vanishes_on_symmetric_window() {
        let l = phase_integrals_default(&ModelParams::<f64>::symmetric(1.7, 0.6, 1.0), -9.0, 9.0).unwrap();
        assert!(l.lambda[1].abs() < 1e-9);
        assert!((l.lambda[0] + l.lambda[2]).abs() < 1e-9);
    }

    #[test]
    fn five_factor_matches_closed_form() {
        for p in [
            ModelParams::<f64>::new(0.6, 1.4, 1.2, 0.8),
            ModelParams::<f64>::new(1.0, 1.0, 1.0, 1.0),
            ModelParams::<f64>::new(2.5, 0.3, 0.5, 2.0),
        ] {
            let ph = crossing_phases(&p, TimeBound::Finite(-7.0), TimeBound::Finite(4.5)).unwrap();
            let a = five_factor_product(&p, &ph);
            let b = closed_form_product(&p, &ph);
            assert!(max_abs_diff(&a, &b) < 1e-12);
            assert_eq!(b[2][0], Complex::new(0.0, 0.0));
        }
    }

    #[test]
    fn symmetric_form_matches_general_one() {
        let p = unit();
        let s = symmetric_adiabatic_propagator(&p, 5.0).unwrap();
        let g = analytic_adiabatic_propagator(&p, -5.0, 5.0).unwrap();
        assert!(max_abs_diff(&s.u, &g.u) < 1e-9);
        let node = make_node(1.0, 1.0, 1.0);
        assert_eq!(s.u[0][2], Complex::new(node.p, 0.0));
        assert_eq!(s.u[1][1], Complex::new(node.q, 0.0));
        assert_eq!(s.u[2][0], Complex::new(0.0, 0.0));
        assert!((s.u[0][0].norm_sqr() - node.q).abs() < 1e-15);
    }

    #[test]
    fn window_must_contain_both_crossings() {
        let p = ModelParams::<f64>::symmetric(1.0, 2.0, 1.0);
        assert!(matches!(
            analytic_adiabatic_propagator(&p, -1.0, 5.0),
            Err(Error::CrossingsOutsideWindow { .. })
        ));
        assert!(matches!(
            symmetric_adiabatic_propagator(&p, 1.5),
            Err(Error::WindowTooShort { .. })
        ));
        assert!(matches!(
            symmetric_adiabatic_propagator(&ModelParams::<f64>::new(1.0, 2.0, 1.0, 1.0), 5.0),
            Err(Error::SymmetryRequired { .. })
        ));
    }

    #[test]
    fn diabatic_propagator_is_unitary() {
        for p in [unit(), ModelParams::<f64>::new(0.4, 2.0, 1.5, 0.7)] {
            let u = diabatic_propagator(&p, -6.0, 8.0).unwrap();
            assert!(unitarity_defect(&u.u) < 1e-10);
        }
    }

    #[test]
    fn weak_coupling_leaves_populations_in_place() {
        let p = ModelParams::<f64>::symmetric(1e-7, 1.0, 1.0);
        let u = diabatic_propagator(&p, -5.0, 5.0).unwrap();
        for m in 0..3 {
            assert!((u.u[m][m].norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn split_window_composes() {
        let p = ModelParams::<f64>::new(0.7, 1.2, 1.0, 1.0);
        let whole = to_diabatic(&p, &piecewise_adiabatic_propagator(&p, -6.0, 7.0).unwrap()).unwrap();
        let first = to_diabatic(&p, &piecewise_adiabatic_propagator(&p, -6.0, 0.2).unwrap()).unwrap();
        let second = to_diabatic(&p, &piecewise_adiabatic_propagator(&p, 0.2, 7.0).unwrap()).unwrap();
        let composed = matmul(&second.u, &first.u);
        assert!(max_abs_diff(&whole.u, &composed) < 1e-10);
    }

    #[test]
    fn infinite_window_forbids_counterintuitive_transition() {
        let p = ModelParams::<f64>::new(1.0, 1.3, 0.8, 1.0);
        let t = analytic_transition_table(&p).unwrap();
        assert_eq!(t.kind, TableKind::DoAnalytic);
        let (m, pl) = crossing_nodes(&p);
        assert!(t.prob(3, 1) < 1e-30);
        assert!((t.prob(1, 1) - m.p).abs() < 1e-14);
        assert!((t.prob(1, 2) - m.q * pl.p).abs() < 1e-14);
        assert!((t.prob(2, 3) - m.p * pl.q).abs() < 1e-14);
        assert!((t.prob(3, 3) - pl.p).abs() < 1e-14);
    }
}
