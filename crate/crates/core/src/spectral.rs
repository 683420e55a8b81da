//! Adiabatic energies and states.
//!
//! Eigenvalues come from the trigonometric solution of the characteristic
//! cubic `lambda^3 + a lambda^2 + b lambda + c = 0`, polished by Newton
//! steps. Eigenvectors use the closed form
//! `[omega12 (l - delta), l^2 - delta^2, omega23 (l + delta)] / N`.
//!
//! Sign convention: with both couplings positive the three components of
//! each column have fixed signs for all t, namely `(+,+,+)`, `(-,-,+)` and
//! `(-,+,-)` for columns 1, 2, 3 (this is the choice `N > 0`). Each column is
//! oriented so its dot product with that pattern is positive. The frame is
//! then continuous in t and reproduces the large-|t| limits
//! `F(-inf) = [[0,-1,0],[0,0,1],[1,0,0]]` and
//! `F(+inf) = [[0,0,-1],[1,0,0],[0,1,0]]`.

use crate::error::{Error, Result};
use crate::linalg::{matvec, Mat3};
use crate::model::{HamiltonianMatrix, ModelParams};
use crate::scalar::Real;

const SIGN_PATTERN: [[f64; 3]; 3] = [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0]];

/// Coefficients of the characteristic cubic and the trigonometric
/// auxiliaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicAux<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub s: T,
    pub cos_theta: T,
    pub theta: T,
}

pub fn cubic_aux<T: Real>(params: &ModelParams<T>, t: T) -> CubicAux<T> {
    let ModelParams {
        omega12: o12,
        omega23: o23,
        delta: d,
        beta,
        ..
    } = *params;
    let a = -beta * t;
    let b = -(d * d + o12 * o12 + o23 * o23);
    let c = d * (o12 * o12 - o23 * o23 + d * beta * t);
    let s = (a * a - T::lit(3.0) * b).sqrt();
    let num = T::two() * a * a * a - T::lit(9.0) * a * b + T::lit(27.0) * c;
    let cos_theta = (-num / (T::two() * s * s * s)).max(-T::one()).min(T::one());
    CubicAux {
        a,
        b,
        c,
        s,
        cos_theta,
        theta: cos_theta.acos(),
    }
}

fn cubic<T: Real>(aux: &CubicAux<T>, x: T) -> (T, T) {
    let f = ((x + aux.a) * x + aux.b) * x + aux.c;
    let df = (T::lit(3.0) * x + T::two() * aux.a) * x + aux.b;
    (f, df)
}

/// Eigenvalues in descending order `lambda1 >= lambda2 >= lambda3`.
pub fn eigenvalues<T: Real>(params: &ModelParams<T>, t: T) -> [T; 3] {
    let aux = cubic_aux(params, t);
    eigenvalues_from_aux(&aux)
}

fn eigenvalues_from_aux<T: Real>(aux: &CubicAux<T>) -> [T; 3] {
    let three = T::lit(3.0);
    let shift = -aux.a / three;
    let r = T::two() * aux.s / three;
    let th = aux.theta;
    let mut l = [
        shift + r * (th / three).cos(),
        shift - r * ((th + T::PI()) / three).cos(),
        shift - r * ((th - T::PI()) / three).cos(),
    ];
    for x in l.iter_mut() {
        for _ in 0..2 {
            let (f, df) = cubic(aux, *x);
            if df == T::zero() {
                break;
            }
            let next = *x - f / df;
            if cubic(aux, next).0.abs() < f.abs() {
                *x = next;
            } else {
                break;
            }
        }
    }
    l.sort_by(|x, y| y.partial_cmp(x).expect("finite eigenvalues"));
    l
}

/// Residual `|lambda^3 + a lambda^2 + b lambda + c|`.
pub fn characteristic_residual<T: Real>(params: &ModelParams<T>, t: T, lambda: T) -> T {
    cubic(&cubic_aux(params, t), lambda).0.abs()
}

/// Eigenvalues and orthogonal eigenvector matrix at one instant; column `k`
/// of `f` is the adiabatic state `phi_{k+1}` in the diabatic basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticFrame<T> {
    pub t: T,
    pub lambdas: [T; 3],
    pub f: Mat3<T>,
}

impl<T: Real> AdiabaticFrame<T> {
    pub fn column(&self, k: usize) -> [T; 3] {
        [self.f[0][k], self.f[1][k], self.f[2][k]]
    }

    /// Largest entry of `|H F - F diag(lambda)|`.
    pub fn eigen_residual(&self, h: &HamiltonianMatrix<T>) -> T {
        let mut worst = T::zero();
        for k in 0..3 {
            let hv = matvec(&h.0, &self.column(k));
            for i in 0..3 {
                worst = worst.max((hv[i] - self.lambdas[k] * self.f[i][k]).abs());
            }
        }
        worst
    }

    /// Projects diabatic amplitudes onto the adiabatic states, `A = F^T C`.
    pub fn to_adiabatic<V>(&self, c: &[V; 3]) -> [V; 3]
    where
        V: Copy + num_traits::Zero + std::ops::Mul<T, Output = V>,
    {
        let mut a = [V::zero(); 3];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = c[0] * self.f[0][k] + c[1] * self.f[1][k] + c[2] * self.f[2][k];
        }
        a
    }

    /// `C = F A`.
    pub fn to_diabatic<V>(&self, a: &[V; 3]) -> [V; 3]
    where
        V: Copy + num_traits::Zero + std::ops::Mul<T, Output = V>,
    {
        let mut c = [V::zero(); 3];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = a[0] * self.f[i][0] + a[1] * self.f[i][1] + a[2] * self.f[i][2];
        }
        c
    }
}

fn norm3<T: Real>(v: &[T; 3]) -> T {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn cross<T: Real>(x: &[T; 3], y: &[T; 3]) -> [T; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

/// Null vector of `H - lambda I` from the largest cross product of two rows.
fn null_vector<T: Real>(h: &Mat3<T>, lambda: T) -> [T; 3] {
    let mut m = *h;
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= lambda;
    }
    [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| cross(&m[i], &m[j]))
        .max_by(|u, v| norm3(u).partial_cmp(&norm3(v)).expect("finite"))
        .expect("three candidates")
}

/// Adiabatic frame at time `t`.
///
/// Fails with [`Error::DegenerateEigenvalue`] when two eigenvalues coincide,
/// which can only happen at an exact crossing with a vanishing coupling.
pub fn frame_at<T: Real>(params: &ModelParams<T>, t: T) -> Result<AdiabaticFrame<T>> {
    let aux = cubic_aux(params, t);
    let lambdas = eigenvalues_from_aux(&aux);
    let gap = (lambdas[0] - lambdas[1]).min(lambdas[1] - lambdas[2]);
    if gap <= T::lit(1e-13) * aux.s {
        return Err(Error::DegenerateEigenvalue { t: t.as_f64() });
    }
    let h = params.hamiltonian_at(t);
    let tol = T::lit(1e-10) * h.norm_inf().max(T::one());
    let ModelParams {
        omega12: o12,
        omega23: o23,
        delta: d,
        ..
    } = *params;

    let mut f = [[T::zero(); 3]; 3];
    for (k, &l) in lambdas.iter().enumerate() {
        let (lm, lp) = (l - d, l + d);
        let mut v = [o12 * lm, lm * lp, o23 * lp];
        let mut n = norm3(&v);
        let residual_ok = n > T::zero() && {
            let u = v.map(|x| x / n);
            let hu = matvec(&h.0, &u);
            (0..3).all(|i| (hu[i] - l * u[i]).abs() <= tol)
        };
        if !residual_ok {
            v = null_vector(&h.0, l);
            n = norm3(&v);
        }
        let orient: T = (0..3).map(|i| T::lit(SIGN_PATTERN[k][i]) * v[i]).sum();
        if orient < T::zero() {
            n = -n;
        }
        for i in 0..3 {
            f[i][k] = v[i] / n;
        }
    }
    Ok(AdiabaticFrame { t, lambdas, f })
}

/// Like [`frame_at`] but flips any column that would point against the same
/// column of `prev`, for callers following a time-ordered sequence through a
/// region where the fixed orientation rule is ambiguous (a zero coupling).
pub fn frame_continuing<T: Real>(params: &ModelParams<T>, t: T, prev: &AdiabaticFrame<T>) -> Result<AdiabaticFrame<T>> {
    let mut fr = frame_at(params, t)?;
    for k in 0..3 {
        let dot: T = (0..3).map(|i| fr.f[i][k] * prev.f[i][k]).sum();
        if dot < T::zero() {
            for i in 0..3 {
                fr.f[i][k] = -fr.f[i][k];
            }
        }
    }
    Ok(fr)
}

/// Limit of the frame for `t -> -inf`.
pub fn frame_at_minus_infinity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[z, -o, z], [z, z, o], [o, z, z]]
}

/// Limit of the frame for `t -> +inf`.
pub fn frame_at_plus_infinity<T: Real>() -> Mat3<T> {
    let (o, z) = (T::one(), T::zero());
    [[z, z, -o], [o, z, z], [z, o, z]]
}

/// Frame at `-T` predicted from the frame at `+T` for equal couplings:
///
/// ```text
/// F(-T) = [[-f33, -f32, -f31], [f23, f22, f21], [-f13, -f12, -f11]]  (at +T)
/// ```
pub fn symmetric_frame_relation<T: Real>(params: &ModelParams<T>, frame: &AdiabaticFrame<T>) -> Result<Mat3<T>> {
    params.require_symmetric()?;
    let f = &frame.f;
    Ok([
        [-f[2][2], -f[2][1], -f[2][0]],
        [f[1][2], f[1][1], f[1][0]],
        [-f[0][2], -f[0][1], -f[0][0]],
    ])
}

fn antisymmetrize<T: Real>(nu: &mut Mat3<T>) {
    for k in 0..3 {
        nu[k][k] = T::zero();
        for l in (k + 1)..3 {
            let v = (nu[k][l] - nu[l][k]) * T::half();
            nu[k][l] = v;
            nu[l][k] = -v;
        }
    }
}

/// `nu_kl = <phi_k | d phi_l / dt>` by central differences with step `h`,
/// antisymmetrized.
pub fn nonadiabatic_couplings<T: Real>(params: &ModelParams<T>, t: T, h: T) -> Result<Mat3<T>> {
    let now = frame_at(params, t)?;
    let ahead = frame_continuing(params, t + h, &now)?;
    let behind = frame_continuing(params, t - h, &now)?;
    let mut nu = [[T::zero(); 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            nu[k][l] = (0..3)
                .map(|i| now.f[i][k] * (ahead.f[i][l] - behind.f[i][l]))
                .sum::<T>()
                / (T::two() * h);
        }
    }
    antisymmetrize(&mut nu);
    Ok(nu)
}

/// Closed form `nu_kl = beta f_2k f_2l / (lambda_l - lambda_k)`, from
/// differentiating the eigenvalue equation (only the middle diagonal entry
/// of H depends on time).
pub fn nonadiabatic_couplings_exact<T: Real>(params: &ModelParams<T>, t: T) -> Result<Mat3<T>> {
    let fr = frame_at(params, t)?;
    let mut nu = [[T::zero(); 3]; 3];
    for k in 0..3 {
        for l in 0..3 {
            if k != l {
                nu[k][l] = params.beta * fr.f[1][k] * fr.f[1][l] / (fr.lambdas[l] - fr.lambdas[k]);
            }
        }
    }
    Ok(nu)
}

/// Large positive-time expansion of the eigenvalues (valid for
/// `beta t >> delta, omega`).
pub fn asymptotic_eigenvalues<T: Real>(params: &ModelParams<T>, t: T) -> [T; 3] {
    let bt = params.beta * t;
    let (o12s, o23s) = (params.omega12.powi(2), params.omega23.powi(2));
    [
        bt + (o12s + o23s) / bt,
        params.delta - o23s / bt,
        -params.delta - o12s / bt,
    ]
}

/// Large positive-time expansion of the adiabatic states, columns as in
/// [`AdiabaticFrame::f`].
pub fn asymptotic_frame<T: Real>(params: &ModelParams<T>, t: T) -> Mat3<T> {
    let ModelParams {
        omega12: o12,
        omega23: o23,
        delta: d,
        beta,
        ..
    } = *params;
    let bt = beta * t;
    let bt2 = bt * bt;
    let (two, four, eight) = (T::two(), T::lit(4.0), T::lit(8.0));
    let phi1 = [o12 / bt, T::one() - (o12 * o12 + o23 * o23) / (two * bt2), o23 / bt];
    let phi2 = [
        -o12 * o23 / (two * d * bt),
        -o23 / bt,
        T::one() - o23 * o23 * (o12 * o12 + four * d * d) / (eight * d * d * bt2),
    ];
    let phi3 = [
        -T::one() + o12 * o12 * (o23 * o23 + four * d * d) / (eight * d * d * bt2),
        o12 / bt,
        -o12 * o23 / (two * d * bt),
    ];
    let mut f = [[T::zero(); 3]; 3];
    for i in 0..3 {
        f[i] = [phi1[i], phi2[i], phi3[i]];
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{matmul, orthogonality_defect, transpose};

    fn p(o12: f64, o23: f64, d: f64, b: f64) -> ModelParams<f64> {
        ModelParams::new(o12, o23, d, b)
    }

    /// Independent reference: cyclic Jacobi rotations on the symmetric matrix.
    fn jacobi_eigenvalues(h: &Mat3<f64>) -> [f64; 3] {
        let mut a = *h;
        for _ in 0..100 {
            let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
            if off < 1e-15 * (a[0][0].abs() + a[1][1].abs() + a[2][2].abs() + 1.0) {
                break;
            }
            for &(pi, qi) in &[(0usize, 1usize), (0, 2), (1, 2)] {
                if a[pi][qi] == 0.0 {
                    continue;
                }
                let theta = (a[qi][qi] - a[pi][pi]) / (2.0 * a[pi][qi]);
                let tt = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let tt = if theta == 0.0 { 1.0 } else { tt };
                let c = 1.0 / (tt * tt + 1.0).sqrt();
                let s = tt * c;
                let mut r = crate::linalg::identity::<f64>();
                r[pi][pi] = c;
                r[qi][qi] = c;
                r[pi][qi] = s;
                r[qi][pi] = -s;
                a = matmul(&transpose(&r), &matmul(&a, &r));
            }
        }
        let mut l = [a[0][0], a[1][1], a[2][2]];
        l.sort_by(|x, y| y.partial_cmp(x).unwrap());
        l
    }

    #[test]
    fn decoupled_eigenvalues() {
        assert_eq!(eigenvalues(&p(0.0, 0.0, 1.0, 1.0), 0.0), [1.0, 0.0, -1.0]);
    }

    #[test]
    fn unit_couplings_at_origin() {
        // lambda^3 - 3 lambda = 0
        let l = eigenvalues(&p(1.0, 1.0, 1.0, 1.0), 0.0);
        let r3 = 3f64.sqrt();
        assert!((l[0] - r3).abs() < 1e-15 && l[1].abs() < 1e-15 && (l[2] + r3).abs() < 1e-15);
        let j = jacobi_eigenvalues(&p(1.0, 1.0, 1.0, 1.0).hamiltonian_at(0.0).0);
        for k in 0..3 {
            assert!((l[k] - j[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn agrees_with_jacobi_reference() {
        let cases = [
            (1.0, 1.0, 1.0, 1.0, -3.0),
            (0.3, 2.0, 0.5, 1.7, 0.2),
            (2.0, 0.1, 1.5, 0.3, 7.0),
            (1.0, 1.0, 1.0, 1.0, 100.0),
            (0.0, 1.0, 1.0, 1.0, 0.4),
        ];
        for (o12, o23, d, b, t) in cases {
            let m = p(o12, o23, d, b);
            let l = eigenvalues(&m, t);
            let j = jacobi_eigenvalues(&m.hamiltonian_at(t).0);
            for k in 0..3 {
                assert!((l[k] - j[k]).abs() < 1e-12 * (1.0 + j[k].abs()), "{l:?} vs {j:?}");
            }
        }
    }

    #[test]
    fn large_time_leading_eigenvalue() {
        let m = p(1.0, 1.0, 1.0, 1.0);
        let l = eigenvalues(&m, 100.0);
        assert!((l[0] - (100.0 + 2.0 / 100.0)).abs() < 1e-5);
        let a = asymptotic_eigenvalues(&m, 100.0);
        for k in 0..3 {
            assert!((l[k] - a[k]).abs() <= 10.0 / 1e4);
        }
    }

    #[test]
    fn frame_is_orthonormal_eigenbasis() {
        for (o12, o23, d, b, t) in [
            (1.0, 1.0, 1.0, 1.0, 0.0),
            (0.4, 1.3, 0.7, 2.0, -0.35),
            (3.0, 3.0, 1.0, 1.0, 1.0),
            (1.0, 1.0, 1.0, 1.0, 1e4),
        ] {
            let m = p(o12, o23, d, b);
            let fr = frame_at(&m, t).unwrap();
            let h = m.hamiltonian_at(t);
            assert!(orthogonality_defect(&fr.f) <= 1e-12);
            assert!(fr.eigen_residual(&h) <= 1e-12 * h.norm_inf());
            let d = matmul(&transpose(&fr.f), &matmul(&h.0, &fr.f));
            assert!(d[0][1].abs() + d[0][2].abs() + d[1][2].abs() <= 1e-12 * h.norm_inf());
        }
    }

    #[test]
    fn decoupled_frame_is_signed_permutation() {
        let m = p(0.0, 0.0, 1.0, 1.0);
        let fr = frame_at(&m, -5.0).unwrap();
        assert_eq!(fr.f, frame_at_minus_infinity::<f64>());
        let fr = frame_at(&m, 5.0).unwrap();
        assert_eq!(fr.f, frame_at_plus_infinity::<f64>());
        // between the crossings psi2 is the middle state
        let fr = frame_at(&m, 0.0).unwrap();
        assert_eq!(fr.f, [[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]]);
        assert!(matches!(frame_at(&m, 1.0), Err(Error::DegenerateEigenvalue { .. })));
    }

    #[test]
    fn frame_limits_and_asymptotics() {
        let m = p(1.0, 1.0, 1.0, 1.0);
        let fr = frame_at(&m, -1e6).unwrap();
        let inf: Mat3<f64> = frame_at_minus_infinity();
        for i in 0..3 {
            for j in 0..3 {
                assert!((fr.f[i][j] - inf[i][j]).abs() < 1e-5);
            }
        }
        let fr = frame_at(&m, 1e4).unwrap();
        let asym = asymptotic_frame(&m, 1e4);
        for i in 0..3 {
            for j in 0..3 {
                assert!((fr.f[i][j] - asym[i][j]).abs() < 1e-6);
            }
        }
        for k in 0..3 {
            let c = fr.column(k);
            assert!((norm3(&c) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn symmetric_relation_reproduces_negative_time_frame() {
        let m = p(1.0, 1.0, 1.0, 1.0);
        let plus = frame_at(&m, 5.0).unwrap();
        let minus = frame_at(&m, -5.0).unwrap();
        let pred = symmetric_frame_relation(&m, &plus).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pred[i][j] - minus.f[i][j]).abs() < 1e-10);
            }
        }
        assert!((minus.lambdas[0] + plus.lambdas[2]).abs() < 1e-12);
        assert!((minus.lambdas[1] + plus.lambdas[1]).abs() < 1e-12);
        let zero = frame_at(&m, 0.0).unwrap();
        let pred = symmetric_frame_relation(&m, &zero).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((pred[i][j] - zero.f[i][j]).abs() < 1e-14);
            }
        }
        assert!(matches!(
            symmetric_frame_relation(&p(1.0, 2.0, 1.0, 1.0), &plus),
            Err(Error::SymmetryRequired { .. })
        ));
    }

    #[test]
    fn finite_difference_couplings_match_closed_form() {
        let m = p(1.0, 0.6, 0.8, 1.3);
        for t in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let fd = nonadiabatic_couplings(&m, t, 1e-4).unwrap();
            let ex = nonadiabatic_couplings_exact(&m, t).unwrap();
            for k in 0..3 {
                assert_eq!(fd[k][k], 0.0);
                for l in 0..3 {
                    assert!((fd[k][l] - ex[k][l]).abs() < 1e-7, "t={t} {k}{l}");
                    assert_eq!(fd[k][l], -fd[l][k]);
                }
            }
        }
    }

    #[test]
    fn couplings_vanish_when_decoupled() {
        let nu = nonadiabatic_couplings(&p(0.0, 0.0, 1.0, 1.0), 3.0, 1e-3).unwrap();
        assert!(nu.iter().flatten().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn couplings_decay_as_inverse_square() {
        let m = p(1.0, 1.0, 1.0, 1.0);
        let ts = [1e2, 3e2, 1e3, 3e3, 1e4];
        let pts: Vec<(f64, f64)> = ts
            .iter()
            .map(|&t| {
                let nu = nonadiabatic_couplings(&m, t, 1e-3 * t).unwrap();
                let n = nu.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
                (t.ln(), n.ln())
            })
            .collect();
        let slope = fit_slope(&pts);
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
    }

    fn fit_slope(pts: &[(f64, f64)]) -> f64 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn single_precision_frame() {
        let m: ModelParams<f32> = ModelParams::new(1.0, 1.0, 1.0, 1.0);
        let fr = frame_at(&m, 0.3).unwrap();
        assert!(orthogonality_defect(&fr.f) < 1e-5);
    }
}
