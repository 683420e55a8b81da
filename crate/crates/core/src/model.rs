//! Model parameters and the diabatic Hamiltonian
//!
//! ```text
//!        | -delta    omega12    0       |
//! H(t) = | omega12   beta * t   omega23 |
//!        |  0        omega23    delta   |
//! ```
//!
//! in units with hbar = 1. The couplings act only inside the window
//! `[t_start, t_end]`; either end may be infinite.

use std::fmt;
use std::ops::Index;
use std::path::Path;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::Real;

/// One end of the interaction window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeBound<T> {
    NegInfinity,
    Finite(T),
    PosInfinity,
}

impl<T: Real> TimeBound<T> {
    pub fn finite(self) -> Option<T> {
        match self {
            TimeBound::Finite(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, TimeBound::Finite(_))
    }

    /// Numeric value with infinities mapped to +-inf.
    pub fn value(self) -> T {
        match self {
            TimeBound::NegInfinity => T::neg_infinity(),
            TimeBound::Finite(t) => t,
            TimeBound::PosInfinity => T::infinity(),
        }
    }

    pub fn from_value(t: T) -> Self {
        if t == T::neg_infinity() {
            TimeBound::NegInfinity
        } else if t == T::infinity() {
            TimeBound::PosInfinity
        } else {
            TimeBound::Finite(t)
        }
    }
}

impl<T: Real> fmt::Display for TimeBound<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeBound::NegInfinity => f.write_str("-inf"),
            TimeBound::Finite(t) => write!(f, "{t}"),
            TimeBound::PosInfinity => f.write_str("inf"),
        }
    }
}

impl<T: Real> std::str::FromStr for TimeBound<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "-inf" | "-infinity" => Ok(TimeBound::NegInfinity),
            "inf" | "+inf" | "infinity" => Ok(TimeBound::PosInfinity),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(|x| TimeBound::Finite(T::lit(x)))
                .ok_or_else(|| Error::Config(format!("bad time value {other:?}"))),
        }
    }
}

impl<T: Real> Serialize for TimeBound<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TimeBound::Finite(t) => s.serialize_f64(t.as_f64()),
            other => s.serialize_str(&other.to_string()),
        }
    }
}

impl<'de, T: Real> Deserialize<'de> for TimeBound<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct BoundVisitor<T>(std::marker::PhantomData<T>);

        impl<T: Real> Visitor<'_> for BoundVisitor<T> {
            type Value = TimeBound<T>;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or one of \"-inf\", \"inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(TimeBound::from_value(T::lit(v)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(TimeBound::Finite(T::lit(v as f64)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(TimeBound::Finite(T::lit(v as f64)))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }
        }

        d.deserialize_any(BoundVisitor(std::marker::PhantomData))
    }
}

/// Physical parameters of the three-state crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + Deserialize<'de>"))]
pub struct ModelParams<T> {
    pub omega12: T,
    pub omega23: T,
    /// Half splitting of the two parallel levels.
    pub delta: T,
    /// Slope of the tilted level.
    pub beta: T,
    #[serde(default = "neg_infinity")]
    pub t_start: TimeBound<T>,
    #[serde(default = "pos_infinity")]
    pub t_end: TimeBound<T>,
}

fn neg_infinity<T>() -> TimeBound<T> {
    TimeBound::NegInfinity
}

fn pos_infinity<T>() -> TimeBound<T> {
    TimeBound::PosInfinity
}

impl<T: Real> ModelParams<T> {
    /// Parameters with the couplings on for all times.
    pub fn new(omega12: T, omega23: T, delta: T, beta: T) -> Self {
        ModelParams {
            omega12,
            omega23,
            delta,
            beta,
            t_start: TimeBound::NegInfinity,
            t_end: TimeBound::PosInfinity,
        }
    }

    pub fn symmetric(omega: T, delta: T, beta: T) -> Self {
        Self::new(omega, omega, delta, beta)
    }

    pub fn with_window(mut self, t_start: TimeBound<T>, t_end: TimeBound<T>) -> Self {
        self.t_start = t_start;
        self.t_end = t_end;
        self
    }

    /// Window `[-t_half, t_half]`.
    pub fn with_symmetric_window(self, t_half: T) -> Self {
        self.with_window(TimeBound::Finite(-t_half), TimeBound::Finite(t_half))
    }

    /// Checks positivity of delta and beta, non-negative couplings and a
    /// non-empty window.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega12", self.omega12),
            ("omega23", self.omega23),
            ("delta", self.delta),
            ("beta", self.beta),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
        }
        if !(self.delta > T::zero()) {
            return Err(Error::NonPositiveDelta(self.delta.as_f64()));
        }
        if !(self.beta > T::zero()) {
            return Err(Error::NonPositiveBeta(self.beta.as_f64()));
        }
        if self.omega12 < T::zero() {
            return Err(Error::NegativeCoupling {
                name: "omega12",
                value: self.omega12.as_f64(),
            });
        }
        if self.omega23 < T::zero() {
            return Err(Error::NegativeCoupling {
                name: "omega23",
                value: self.omega23.as_f64(),
            });
        }
        let empty = match (self.t_start, self.t_end) {
            (TimeBound::PosInfinity, _) | (_, TimeBound::NegInfinity) => true,
            (TimeBound::Finite(a), TimeBound::Finite(b)) => !(a < b),
            _ => false,
        };
        if empty {
            return Err(Error::EmptyWindow {
                start: self.t_start.value().as_f64(),
                end: self.t_end.value().as_f64(),
            });
        }
        Ok(())
    }

    /// Crossing time magnitude `tau = delta / beta`.
    pub fn tau(&self) -> T {
        self.delta / self.beta
    }

    /// `(t_minus, t_plus) = (-tau, tau)`: the psi1-psi2 and psi2-psi3 crossings.
    pub fn crossing_times(&self) -> (T, T) {
        let tau = self.tau();
        (-tau, tau)
    }

    pub fn hamiltonian_at(&self, t: T) -> HamiltonianMatrix<T> {
        let z = T::zero();
        HamiltonianMatrix([
            [-self.delta, self.omega12, z],
            [self.omega12, self.beta * t, self.omega23],
            [z, self.omega23, self.delta],
        ])
    }

    pub fn is_symmetric(&self) -> bool {
        self.omega12 == self.omega23
    }

    /// LZ parameter of the crossing at `-tau`.
    pub fn alpha_minus(&self) -> T {
        self.omega12 / self.beta.sqrt()
    }

    /// LZ parameter of the crossing at `+tau`.
    pub fn alpha_plus(&self) -> T {
        self.omega23 / self.beta.sqrt()
    }

    /// Largest of delta and the couplings; sets the scale of the asymptotic
    /// regime `beta |t| >> max_scale`.
    pub fn max_scale(&self) -> T {
        self.delta.max(self.omega12).max(self.omega23)
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::SymmetryRequired {
                omega12: self.omega12.as_f64(),
                omega23: self.omega23.as_f64(),
            })
        }
    }
}

/// Real symmetric 3x3 Hamiltonian in the diabatic basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianMatrix<T>(pub Mat3<T>);

impl<T: Real> HamiltonianMatrix<T> {
    pub fn entries(&self) -> &Mat3<T> {
        &self.0
    }

    /// Max-row-sum norm, an upper bound on every |eigenvalue|.
    pub fn norm_inf(&self) -> T {
        self.0
            .iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }
}

impl<T> Index<(usize, usize)> for HamiltonianMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

/// Parameter file contents. Every key is optional so that command-line flags
/// can fill or override individual entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    /// Sets both couplings unless they are given separately.
    pub omega: Option<f64>,
    pub omega12: Option<f64>,
    pub omega23: Option<f64>,
    pub delta: Option<f64>,
    pub beta: Option<f64>,
    pub t_start: Option<TimeBound<f64>>,
    pub t_end: Option<TimeBound<f64>>,
}

impl ParamsFile {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Entries of `over` replace those of `self`.
    pub fn overridden_by(&self, over: &ParamsFile) -> ParamsFile {
        ParamsFile {
            omega: over.omega.or(self.omega),
            omega12: over.omega12.or(self.omega12),
            omega23: over.omega23.or(self.omega23),
            delta: over.delta.or(self.delta),
            beta: over.beta.or(self.beta),
            t_start: over.t_start.or(self.t_start),
            t_end: over.t_end.or(self.t_end),
        }
    }

    /// Builds validated parameters. `beta` defaults to 1 (the natural unit);
    /// the window defaults to the whole time axis. A missing coupling or
    /// delta is reported by name.
    pub fn resolve(&self) -> Result<ModelParams<f64>> {
        let missing = |name: &str| Error::Config(format!("missing parameter {name}"));
        let omega12 = self.omega12.or(self.omega).ok_or_else(|| missing("omega12"))?;
        let omega23 = self.omega23.or(self.omega).ok_or_else(|| missing("omega23"))?;
        let delta = self.delta.ok_or_else(|| missing("delta"))?;
        let beta = self.beta.unwrap_or(1.0);
        let p = ModelParams::new(omega12, omega23, delta, beta).with_window(
            self.t_start.unwrap_or(TimeBound::NegInfinity),
            self.t_end.unwrap_or(TimeBound::PosInfinity),
        );
        p.validate()?;
        Ok(p)
    }
}
