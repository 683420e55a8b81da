//! Post-processing of sampled curves: local oscillation periods, one-period
//! window averages, log-log slopes and extrema.

use serde::Serialize;

use crate::model::ModelParams;
use crate::scalar::Real;
use crate::spectral::eigenvalues;

/// Period in `T` of the fastest oscillation of `P_{3->1}` for the window
/// `[-T, T]`: the phase `Lambda_1(T, -T)` advances at `lambda_1 - lambda_3`.
pub fn local_period_finite<T: Real>(params: &ModelParams<T>, t_half: T) -> T {
    let l = eigenvalues(params, t_half);
    T::two() * T::PI() / (l[0] - l[2])
}

/// Period in `t` of the oscillation after an infinite-past start, set by
/// `Lambda_12(t, tau)`.
pub fn local_period_do<T: Real>(params: &ModelParams<T>, t: T) -> T {
    let l = eigenvalues(params, t);
    T::two() * T::PI() / (l[0] - l[1])
}

/// Midpoints of `m` equal cells spanning one period centred on `centre`.
pub fn window_nodes<T: Real>(centre: T, period: T, m: usize) -> Vec<T> {
    let h = period / T::lit(m as f64);
    (0..m)
        .map(|j| centre - period * T::half() + h * (T::lit(j as f64) + T::half()))
        .collect()
}

pub fn mean<T: Real>(xs: &[T]) -> T {
    xs.iter().copied().sum::<T>() / T::lit(xs.len() as f64)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let lx: Vec<T> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<T> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (x, y) in lx.iter().zip(&ly) {
        sxy += (*x - mx) * (*y - my);
        sxx += (*x - mx) * (*x - mx);
    }
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extremum<T> {
    pub x: T,
    pub y: T,
    pub kind: ExtremumKind,
}

/// Interior local extrema of a sampled curve, located by a parabola through
/// the three samples around each discrete extremum.
pub fn extrema<T: Real>(xs: &[T], ys: &[T]) -> Vec<Extremum<T>> {
    let mut out = Vec::new();
    for i in 1..ys.len().saturating_sub(1) {
        let (a, b, c) = (ys[i - 1], ys[i], ys[i + 1]);
        let kind = if b > a && b >= c {
            ExtremumKind::Max
        } else if b < a && b <= c {
            ExtremumKind::Min
        } else {
            continue;
        };
        let (x0, x1, x2) = (xs[i - 1], xs[i], xs[i + 1]);
        let num = (x1 - x0) * (x1 - x0) * (b - c) - (x1 - x2) * (x1 - x2) * (b - a);
        let den = (x1 - x0) * (b - c) - (x1 - x2) * (b - a);
        let x = if den == T::zero() {
            x1
        } else {
            (x1 - T::half() * num / den).max(x0).min(x2)
        };
        let y = a * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
            + b * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
            + c * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
        out.push(Extremum { x, y, kind });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let xs: Vec<f64> = (1..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x.powf(-2.5)).collect();
        assert!((loglog_slope(&xs, &ys) + 2.5).abs() < 1e-12);
    }

    #[test]
    fn window_average_of_full_cosine_period_is_exact() {
        let nodes = window_nodes(2.0, 0.5, 16);
        assert_eq!(nodes.len(), 16);
        let vals: Vec<f64> = nodes
            .iter()
            .map(|t| 1.0 + (2.0 * std::f64::consts::PI * t / 0.5 + 0.3).cos())
            .collect();
        assert!((mean(&vals) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extrema_of_sine_are_refined() {
        let xs: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let e = extrema(&xs, &ys);
        assert_eq!(e.len(), 3);
        assert_eq!(e[0].kind, ExtremumKind::Max);
        assert!((e[0].x - std::f64::consts::FRAC_PI_2).abs() < 1e-3);
        assert!((e[1].x - 1.5 * std::f64::consts::PI).abs() < 1e-3);
        assert!((e[0].y - 1.0).abs() < 1e-4);
    }

    #[test]
    fn periods_at_large_time() {
        let p = ModelParams::<f64>::symmetric(1.0, 1.0, 1.0);
        let fin = local_period_finite(&p, 100.0);
        assert!((fin - 2.0 * std::f64::consts::PI / 101.0).abs() < 1e-3 * fin);
        let dot = local_period_do(&p, 100.0);
        assert!((dot - 2.0 * std::f64::consts::PI / 99.0).abs() < 1e-3 * dot);
    }
}
