//! Complex log-Gamma (Lanczos, g = 7, n = 9) and the argument of
//! Gamma(1 - ix) entering the Landau-Zener phase.

use num_complex::Complex;

use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// ln Gamma(z) on the branch that is continuous along vertical lines in the
/// right half-plane (`Re z >= 1/2`). The left half-plane goes through the
/// reflection formula.
pub fn ln_gamma<T: Real>(z: Complex<T>) -> Complex<T> {
    let half = T::half();
    if z.re < half {
        let pi = T::PI();
        let one = Complex::new(T::one(), T::zero());
        let s = (z * pi).sin();
        return Complex::new(pi.ln(), T::zero()) - s.ln() - ln_gamma(one - z);
    }
    let zm1 = z - T::one();
    let mut series = Complex::new(T::lit(LANCZOS_COEFFS[0]), T::zero());
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += Complex::new(T::lit(c), T::zero()) / (zm1 + T::lit(i as f64));
    }
    let t = zm1 + T::lit(LANCZOS_G + 0.5);
    let ln_sqrt_2pi = T::lit(0.918_938_533_204_672_741_780_329_736_4);
    (zm1 + half) * t.ln() - t + series.ln() + ln_sqrt_2pi
}

/// `arg Gamma(1 - i x)` for `x >= 0`, continuous in `x` (so it is not reduced
/// into `(-pi, pi]`); behaves like `-x (ln x - 1) - pi/4` for large `x`.
pub fn arg_gamma_one_minus_i_x<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    ln_gamma(Complex::new(T::one(), -x)).im
}
