//! Landau-Zener data of a single avoided crossing and the 3x3 matrices that
//! apply it in the adiabatic basis.

use num_complex::Complex;

use crate::linalg::CMat3;
use crate::scalar::Real;
use crate::special::arg_gamma_one_minus_i_x;

/// One avoided crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzNode<T> {
    pub t_cross: T,
    /// Coupling over sqrt(beta).
    pub alpha: T,
    /// Probability of no transition, `exp(-2 pi alpha^2)`.
    pub p: T,
    /// Transition probability `1 - p`.
    pub q: T,
    /// Stokes phase in radians.
    pub phi: T,
}

/// Builds the node for a crossing with the given coupling and slope.
pub fn make_node<T: Real>(coupling: T, beta: T, t_cross: T) -> LzNode<T> {
    let alpha = coupling / beta.sqrt();
    let a2 = alpha * alpha;
    let p = (-T::two() * T::PI() * a2).exp();
    LzNode {
        t_cross,
        alpha,
        p,
        q: T::one() - p,
        phi: lz_phase(a2),
    }
}

/// `arg Gamma(1 - i a2) + pi/4 + a2 (ln a2 - 1)` with `a2 = alpha^2`.
pub fn lz_phase<T: Real>(a2: T) -> T {
    let tail = if a2 < T::lit(1e-300) {
        T::zero()
    } else {
        a2 * (a2.ln() - T::one())
    };
    arg_gamma_one_minus_i_x(a2) + T::FRAC_PI_4() + tail
}

fn amplitudes<T: Real>(node: &LzNode<T>) -> (Complex<T>, Complex<T>, Complex<T>) {
    let sq = node.q.sqrt();
    let sp = Complex::new(node.p.sqrt(), T::zero());
    let stay = Complex::from_polar(sq, -node.phi);
    let stay_conj = Complex::from_polar(sq, node.phi);
    (stay, stay_conj, sp)
}

/// Crossing at `-tau`: mixes adiabatic states 2 and 3.
pub fn lz_matrix_minus<T: Real>(node: &LzNode<T>) -> CMat3<T> {
    let (a, a_conj, sp) = amplitudes(node);
    let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    [[o, z, z], [z, a, -sp], [z, sp, a_conj]]
}

/// Crossing at `+tau`: mixes adiabatic states 1 and 2.
pub fn lz_matrix_plus<T: Real>(node: &LzNode<T>) -> CMat3<T> {
    let (a, a_conj, sp) = amplitudes(node);
    let (o, z) = (Complex::new(T::one(), T::zero()), Complex::new(T::zero(), T::zero()));
    [[a, -sp, z], [sp, a_conj, z], [z, z, o]]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn zero_coupling_node() {
        let n = make_node(0.0, 1.0, -1.0);
        assert_eq!((n.alpha, n.p, n.q), (0.0, 1.0, 0.0));
        assert_eq!(n.phi, FRAC_PI_4);
    }

    #[test]
    fn unit_alpha_node() {
        let n = make_node(2.0f64, 4.0, 0.5);
        assert_eq!(n.alpha, 1.0);
        assert!((n.p - 1.867_442_731_707_988_8e-3).abs() < 1e-17);
        assert!((n.q - 0.998_132_557_268_292).abs() < 1e-14);
        assert_eq!(n.p + n.q, 1.0);
        // arg Gamma(1 - i) + pi/4 - 1
        assert!((n.phi - (0.301_640_320_467_533_2 + FRAC_PI_4 - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn near_adiabatic_phase_is_small() {
        let n = make_node(3.0f64, 1.0, 0.0);
        assert!(n.phi.abs() < 0.03, "{}", n.phi);
        assert!(n.phi > 0.0);
    }

    #[test]
    fn diabatic_passage_matrices() {
        let n = make_node(0.0, 1.0, -1.0);
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        assert_eq!(lz_matrix_minus(&n), [[o, z, z], [z, z, -o], [z, o, z]]);
        assert_eq!(lz_matrix_plus(&n), [[z, -o, z], [o, z, z], [z, z, o]]);
    }

    #[test]
    fn adiabatic_passage_matrices() {
        let n = LzNode {
            t_cross: 1.0,
            alpha: f64::INFINITY,
            p: 0.0,
            q: 1.0,
            phi: 0.3,
        };
        let m = lz_matrix_minus(&n);
        assert!((m[1][1] - c(0.3f64.cos(), -0.3f64.sin())).norm() < 1e-16);
        assert!((m[2][2] - c(0.3f64.cos(), 0.3f64.sin())).norm() < 1e-16);
        assert_eq!(m[1][2], c(0.0, 0.0));
        let m = lz_matrix_plus(&n);
        assert!((m[0][0] - c(0.3f64.cos(), -0.3f64.sin())).norm() < 1e-16);
        assert_eq!(m[0][1], c(0.0, 0.0));
    }

    fn det(m: &CMat3<f64>) -> Complex<f64> {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn matrices_are_unitary() {
        for alpha in [0.0, 0.1, 0.5, 1.0, 2.0, 5.0] {
            let n = make_node(alpha, 1.0, 0.0);
            for m in [lz_matrix_minus(&n), lz_matrix_plus(&n)] {
                assert!(unitarity_defect(&m) <= 1e-15);
                assert!((det(&m).norm() - 1.0).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn probabilities_and_phase_are_monotone() {
        let mut prev = make_node(0.0, 1.0, 0.0);
        for i in 1..=300 {
            let n = make_node(i as f64 * 0.01, 1.0, 0.0);
            assert!(n.p < prev.p && n.q >= prev.q);
            assert!(n.phi < prev.phi, "alpha = {}", n.alpha);
            assert!((n.phi - prev.phi).abs() < 0.05);
            prev = n;
        }
        assert!(prev.phi > 0.0 && prev.phi < 0.01);
    }
}
