//! Dormand-Prince 5(4) with FSAL, elementary step control and exact landing on
//! requested output times. Works in either time direction.

use crate::error::{Error, Result};
use crate::scalar::Real;

pub trait OdeSystem<T: Real, const N: usize> {
    fn rhs(&self, t: T, y: &[T; N], dy: &mut [T; N]);

    /// Upper bound on `|h|` at time `t`.
    fn max_step(&self, _t: T) -> T {
        T::infinity()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Options<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
}

impl<T: Real> Default for Dopri5Options<T> {
    fn default() -> Self {
        Dopri5Options {
            rtol: T::lit(1e-10),
            atol: T::lit(1e-12),
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order solution minus the embedded fourth-order one.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn error_norm<T: Real, const N: usize>(err: &[T; N], y0: &[T; N], y1: &[T; N], opts: &Dopri5Options<T>) -> T {
    let mut worst = T::zero();
    for i in 0..N {
        let sc = opts.atol + opts.rtol * y0[i].abs().max(y1[i].abs());
        worst = worst.max((err[i] / sc).abs());
    }
    worst
}

fn initial_step<T: Real, S: OdeSystem<T, N>, const N: usize>(
    sys: &S,
    t0: T,
    y0: &[T; N],
    f0: &[T; N],
    dir: T,
    opts: &Dopri5Options<T>,
) -> T {
    let scale = |i: usize| opts.atol + opts.rtol * y0[i].abs();
    let rms = |v: &dyn Fn(usize) -> T| {
        let s: T = (0..N).map(|i| v(i) * v(i)).sum();
        (s / T::lit(N as f64)).sqrt()
    };
    let d0 = rms(&|i| y0[i] / scale(i));
    let d1 = rms(&|i| f0[i] / scale(i));
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) {
        T::lit(1e-6)
    } else {
        T::lit(0.01) * d0 / d1
    };
    let h0 = h0.min(sys.max_step(t0));
    let mut y1 = [T::zero(); N];
    for i in 0..N {
        y1[i] = y0[i] + dir * h0 * f0[i];
    }
    let mut f1 = [T::zero(); N];
    sys.rhs(t0 + dir * h0, &y1, &mut f1);
    let d2 = rms(&|i| (f1[i] - f0[i]) / scale(i)) / h0;
    let h1 = if d1.max(d2) <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / d1.max(d2)).powf(T::lit(0.2))
    };
    (T::lit(100.0) * h0).min(h1).min(sys.max_step(t0))
}

/// Integrates from `t0` through each time in `stops` (monotone in the
/// direction of integration, the last one being the end point).
///
/// `observer(t, y, on_stop)` is called after every accepted step; `on_stop`
/// is true when `t` is exactly one of the requested times.
pub fn solve<T, S, F, const N: usize>(
    sys: &S,
    t0: T,
    y0: [T; N],
    stops: &[T],
    opts: &Dopri5Options<T>,
    mut observer: F,
) -> Result<([T; N], OdeStats)>
where
    T: Real,
    S: OdeSystem<T, N>,
    F: FnMut(T, &[T; N], bool),
{
    let mut stats = OdeStats::default();
    let Some(&t_end) = stops.last() else {
        return Ok((y0, stats));
    };
    if t_end == t0 {
        for &s in stops {
            observer(s, &y0, true);
        }
        return Ok((y0, stats));
    }
    let dir = if t_end > t0 { T::one() } else { -T::one() };

    let mut t = t0;
    let mut y = y0;
    let mut k = [[T::zero(); N]; 7];
    sys.rhs(t, &y, &mut k[0]);
    stats.evaluations += 1;
    let mut h = initial_step(sys, t, &y, &k[0], dir, opts);
    stats.evaluations += 1;

    let mut next_stop = 0;
    while next_stop < stops.len() && (stops[next_stop] - t) * dir <= T::zero() {
        observer(t, &y, true);
        next_stop += 1;
    }

    let mut y_stage = [T::zero(); N];
    let mut y_new = [T::zero(); N];
    let mut err = [T::zero(); N];
    while next_stop < stops.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepBudgetExhausted { t: t.as_f64() });
        }
        let target = stops[next_stop];
        h = h.min(sys.max_step(t));
        let remaining = (target - t) * dir;
        let lands = h >= remaining;
        let step = if lands { remaining } else { h };
        if step <= T::lit(16.0) * T::epsilon() * t.abs().max(T::one()) {
            return Err(Error::StepSizeUnderflow { t: t.as_f64() });
        }
        let hs = step * dir;

        for s in 1..7 {
            for i in 0..N {
                let mut acc = T::zero();
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += T::lit(A[s][j]) * kj[i];
                }
                y_stage[i] = y[i] + hs * acc;
            }
            sys.rhs(t + hs * T::lit(C[s]), &y_stage, &mut k[s]);
        }
        stats.evaluations += 6;
        // stage 7 was evaluated at the fifth-order solution itself
        y_new.copy_from_slice(&y_stage);
        for i in 0..N {
            let mut acc = T::zero();
            for (j, kj) in k.iter().enumerate() {
                acc += T::lit(E[j]) * kj[i];
            }
            err[i] = hs * acc;
        }
        let en = error_norm(&err, &y, &y_new, opts);
        if !en.is_finite() {
            stats.rejected += 1;
            h = step * T::lit(0.2);
            continue;
        }
        if en <= T::one() {
            stats.accepted += 1;
            t = if lands { target } else { t + hs };
            y = y_new;
            k[0] = k[6];
            let on_stop = lands;
            observer(t, &y, on_stop);
            if lands {
                next_stop += 1;
                while next_stop < stops.len() && (stops[next_stop] - t) * dir <= T::zero() {
                    observer(t, &y, true);
                    next_stop += 1;
                }
            }
            let fac = if en == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * en.powf(T::lit(-0.2))).min(T::lit(5.0))
            };
            // a shortened landing step says nothing about the natural size
            h = if lands && step < h {
                h
            } else {
                step * fac.max(T::lit(0.2))
            };
        } else {
            stats.rejected += 1;
            let fac = (T::lit(0.9) * en.powf(T::lit(-0.2))).max(T::lit(0.2));
            h = step * fac;
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Oscillator(f64);
    impl OdeSystem<f64, 2> for Oscillator {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = self.0 * y[1];
            dy[1] = -self.0 * y[0];
        }
    }

    struct Decay;
    impl OdeSystem<f32, 1> for Decay {
        fn rhs(&self, t: f32, y: &[f32; 1], dy: &mut [f32; 1]) {
            dy[0] = -2.0 * t * y[0];
        }
    }

    #[test]
    fn harmonic_oscillator_forward_and_back() {
        let sys = Oscillator(3.0);
        let opts = Dopri5Options::default();
        let (y, stats) = solve(&sys, 0.0, [1.0, 0.0], &[10.0], &opts, |_, _, _| {}).unwrap();
        assert!((y[0] - 30f64.cos()).abs() < 1e-8, "{y:?}");
        assert!((y[1] + 30f64.sin()).abs() < 1e-8);
        assert!(stats.accepted > 10);
        let (z, _) = solve(&sys, 10.0, y, &[0.0], &opts, |_, _, _| {}).unwrap();
        assert!((z[0] - 1.0).abs() < 1e-8 && z[1].abs() < 1e-8);
    }

    #[test]
    fn lands_exactly_on_stops() {
        let sys = Oscillator(1.0);
        let stops = [0.25, 1.0 / 3.0, 2.0, 2.0, 5.5];
        let mut seen = Vec::new();
        solve(&sys, 0.0, [1.0, 0.0], &stops, &Dopri5Options::default(), |t, y, on| {
            if on {
                seen.push((t, y[0]));
            }
        })
        .unwrap();
        assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), stops.to_vec());
        for (t, y0) in seen {
            assert!((y0 - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn max_step_is_respected() {
        struct Capped;
        impl OdeSystem<f64, 1> for Capped {
            fn rhs(&self, _t: f64, _y: &[f64; 1], dy: &mut [f64; 1]) {
                dy[0] = 1.0;
            }
            fn max_step(&self, _t: f64) -> f64 {
                0.01
            }
        }
        let mut last = 0.0;
        let mut worst: f64 = 0.0;
        solve(&Capped, 0.0, [0.0], &[1.0], &Dopri5Options::default(), |t, _, _| {
            worst = worst.max(t - last);
            last = t;
        })
        .unwrap();
        assert!(worst <= 0.01 + 1e-15);
    }

    #[test]
    fn budget_and_single_precision() {
        let opts = Dopri5Options {
            max_steps: 3,
            ..Dopri5Options::default()
        };
        let r = solve(&Oscillator(50.0), 0.0, [1.0, 0.0], &[10.0], &opts, |_, _, _| {});
        assert!(matches!(r, Err(Error::StepBudgetExhausted { .. })));

        let opts = Dopri5Options {
            rtol: 1e-5f32,
            atol: 1e-7,
            max_steps: 100_000,
        };
        let (y, _) = solve(&Decay, 0.0f32, [1.0f32], &[2.0], &opts, |_, _, _| {}).unwrap();
        assert!((y[0] - (-4.0f32).exp()).abs() < 1e-5);
    }
}
