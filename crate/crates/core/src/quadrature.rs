//! Globally adaptive Gauss-Kronrod (7/15) quadrature for small vector-valued
//! integrands, with optional interior breakpoints.

use crate::error::{Error, Result};
use crate::scalar::Real;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> QuadOptions<T> {
    pub fn absolute(abs_tol: T) -> Self {
        QuadOptions {
            abs_tol,
            rel_tol: T::zero(),
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature<T, const N: usize> {
    pub value: [T; N],
    /// Estimated absolute error (max over components).
    pub error: T,
    pub evaluations: usize,
}

#[derive(Clone, Copy)]
struct Panel<T, const N: usize> {
    a: T,
    b: T,
    value: [T; N],
    error: T,
}

fn gk15<T: Real, const N: usize, F: Fn(T) -> [T; N]>(f: &F, a: T, b: T) -> Panel<T, N> {
    let centre = (a + b) * T::half();
    let half = (b - a) * T::half();
    let fc = f(centre);
    let mut kron = [T::zero(); N];
    let mut gauss = [T::zero(); N];
    for i in 0..N {
        kron[i] = fc[i] * T::lit(WGK[7]);
        gauss[i] = fc[i] * T::lit(WG[3]);
    }
    for j in 0..7 {
        let dx = half * T::lit(XGK[j]);
        let (f1, f2) = (f(centre - dx), f(centre + dx));
        for i in 0..N {
            let s = f1[i] + f2[i];
            kron[i] += T::lit(WGK[j]) * s;
            if j % 2 == 1 {
                gauss[i] += T::lit(WG[j / 2]) * s;
            }
        }
    }
    let mut value = [T::zero(); N];
    let mut error = T::zero();
    for i in 0..N {
        value[i] = kron[i] * half;
        error = error.max(((kron[i] - gauss[i]) * half).abs());
    }
    Panel { a, b, value, error }
}

/// Integrates `f` over `[a, b]`, splitting first at any `breakpoints` that
/// fall strictly inside. `b < a` gives the negated integral.
pub fn integrate<T, const N: usize, F>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadOptions<T>,
) -> Result<Quadrature<T, N>>
where
    T: Real,
    F: Fn(T) -> [T; N],
{
    if a == b {
        return Ok(Quadrature {
            value: [T::zero(); N],
            error: T::zero(),
            evaluations: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let mut cuts = vec![lo];
    let mut inner: Vec<T> = breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    cuts.extend(inner);
    cuts.push(hi);

    let mut panels: Vec<Panel<T, N>> = cuts.windows(2).map(|w| gk15(&f, w[0], w[1])).collect();
    let mut evaluations = 15 * panels.len();
    loop {
        let mut total = [T::zero(); N];
        let mut err = T::zero();
        for p in &panels {
            for i in 0..N {
                total[i] += p.value[i];
            }
            err += p.error;
        }
        let scale = total.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let tol = opts.abs_tol.max(opts.rel_tol * scale);
        if err <= tol {
            return Ok(Quadrature {
                value: total.map(|x| x * sign),
                error: err,
                evaluations,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.partial_cmp(&y.1.error).expect("finite errors"))
            .expect("non-empty");
        let p = panels.swap_remove(worst);
        let mid = (p.a + p.b) * T::half();
        if panels.len() + 2 > opts.max_intervals || !(mid > p.a && mid < p.b) {
            return Err(Error::QuadratureFailure {
                from: a.as_f64(),
                to: b.as_f64(),
                tol: tol.as_f64(),
                estimate: err.as_f64(),
            });
        }
        panels.push(gk15(&f, p.a, mid));
        panels.push(gk15(&f, mid, p.b));
        evaluations += 30;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    breakpoints: &[T],
    opts: &QuadOptions<T>,
) -> Result<(T, T)> {
    let q = integrate(|x| [f(x)], a, b, breakpoints, opts)?;
    Ok((q.value[0], q.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let opts = QuadOptions::absolute(1e-14);
        let (v, _) = integrate_scalar(|x: f64| 3.0 * x * x - 2.0 * x + 1.0, -1.0, 2.0, &[], &opts).unwrap();
        assert!((v - 9.0).abs() < 1e-13);
        let (v, _) = integrate_scalar(|x: f64| x, 2.0, 0.0, &[], &opts).unwrap();
        assert!((v + 2.0).abs() < 1e-14);
        let (v, _) = integrate_scalar(|x: f64| x, 1.0, 1.0, &[], &opts).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn oscillatory_integrand() {
        // int_0^20 cos(x^2 / 2) dx via the Fresnel integral C
        let opts = QuadOptions::absolute(1e-11);
        let q = integrate(
            |x: f64| [(x * x / 2.0).cos(), (x * x / 2.0).sin()],
            0.0,
            20.0,
            &[],
            &opts,
        )
        .unwrap();
        // reference from an independent arbitrary-precision evaluation
        assert!((q.value[0] - 0.842_501_986_376_899_6).abs() < 1e-9, "{:?}", q.value);
        assert!((q.value[1] - 0.861_977_150_273_228_3).abs() < 1e-9, "{:?}", q.value);
    }

    #[test]
    fn kink_handled_by_breakpoint() {
        let opts = QuadOptions::absolute(1e-13);
        let q = integrate(|x: f64| [x.abs()], -1.0, 3.0, &[0.0], &opts).unwrap();
        assert!((q.value[0] - 5.0).abs() < 1e-13);
        assert_eq!(q.evaluations, 30);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions {
            abs_tol: 1e-30,
            rel_tol: 0.0,
            max_intervals: 8,
        };
        let r = integrate_scalar(|x: f64| (1.0 / x.max(1e-300)).sin(), 1e-6, 1.0, &[], &opts);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
