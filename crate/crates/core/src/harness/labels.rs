//! Textual names for ensembles, coefficient arrays and statistics.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::bases::{
    gram_schmidt_basis, profile_array, weighted_radial_coefficients, BasisError, CoefficientArray,
    MeasureSpec, OrthoBasis,
};
use crate::potential::{CompactSetModel, LimitPotential, Profile};

/// Unparseable label, with the reason.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelError(pub String);

impl fmt::Display for LabelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn positive(s: &str, what: &str) -> Result<f64, LabelError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() && x > 0.0 => Ok(x),
        _ => Err(LabelError(format!("{what} must be a positive number, got `{s}`"))),
    }
}

fn finite(s: &str, what: &str) -> Result<f64, LabelError> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(LabelError(format!("{what} must be a finite number, got `{s}`"))),
    }
}

/// Deterministic magnitudes `f_{n,k}`.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayLabel {
    /// `f = 1`.
    Kac,
    /// `f(t) = exp(H(t)/2)`, the elliptic ensemble.
    Elliptic,
    /// Point mass at radius `R`, no weight: `f_{n,j} = R^{-j}`.
    Radial(f64),
    /// `f(t) = exp(-a t)`.
    Exp(f64),
}

impl ArrayLabel {
    pub fn build(&self, n: usize) -> Result<CoefficientArray, BasisError> {
        match *self {
            ArrayLabel::Kac => Ok(CoefficientArray::kac(n)),
            ArrayLabel::Elliptic => Ok(profile_array(&Profile::entropy(), n)),
            ArrayLabel::Radial(r) => weighted_radial_coefficients(&[(r, 1.0)], |_| 0.0, n),
            ArrayLabel::Exp(a) => Ok(profile_array(&Profile::exponential(a), n)),
        }
    }

    pub fn limit(&self) -> LimitPotential {
        match *self {
            ArrayLabel::Kac => LimitPotential::compact(CompactSetModel::UnitCircle),
            ArrayLabel::Elliptic => LimitPotential::profile(Profile::entropy()),
            ArrayLabel::Radial(r) => LimitPotential::compact(CompactSetModel::CircleOfRadius(r)),
            ArrayLabel::Exp(a) => LimitPotential::profile(Profile::exponential(a)),
        }
    }
}

impl FromStr for ArrayLabel {
    type Err = LabelError;

    /// `kac`, `elliptic`, `radial:<R>`, `exp:<a>`.
    fn from_str(s: &str) -> Result<Self, LabelError> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["kac"] => Ok(ArrayLabel::Kac),
            ["elliptic"] => Ok(ArrayLabel::Elliptic),
            ["radial", r] => Ok(ArrayLabel::Radial(positive(r, "radius")?)),
            ["exp", a] => Ok(ArrayLabel::Exp(finite(a, "exponent")?)),
            _ => Err(LabelError(format!(
                "unknown array `{s}` (expected kac, elliptic, radial:<R> or exp:<a>)"
            ))),
        }
    }
}

impl fmt::Display for ArrayLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArrayLabel::Kac => f.write_str("kac"),
            ArrayLabel::Elliptic => f.write_str("elliptic"),
            ArrayLabel::Radial(r) => write!(f, "radial:{r}"),
            ArrayLabel::Exp(a) => write!(f, "exp:{a}"),
        }
    }
}

/// Orthonormal bases for built-in measures.
#[derive(Clone, Debug, PartialEq)]
pub enum BasisLabel {
    /// Arc length on `|z| = R`.
    Circle(f64),
    /// Arcsine law on `[-1, 1]`.
    Chebyshev,
}

impl BasisLabel {
    pub fn build(&self, n: usize) -> Result<OrthoBasis, BasisError> {
        match *self {
            BasisLabel::Circle(r) => gram_schmidt_basis(&MeasureSpec::circle_uniform(r, 2 * n + 1), n),
            BasisLabel::Chebyshev => gram_schmidt_basis(&MeasureSpec::interval_arcsine(n + 1), n),
        }
    }

    pub fn limit(&self) -> LimitPotential {
        match *self {
            BasisLabel::Circle(r) if r == 1.0 => LimitPotential::compact(CompactSetModel::UnitCircle),
            BasisLabel::Circle(r) => LimitPotential::compact(CompactSetModel::CircleOfRadius(r)),
            BasisLabel::Chebyshev => {
                LimitPotential::compact(CompactSetModel::Interval { a: -1.0, b: 1.0 })
            }
        }
    }
}

/// Which random polynomial family a sweep draws from.
#[derive(Clone, Debug, PartialEq)]
pub enum EnsembleLabel {
    Kac,
    Ortho(BasisLabel),
    Array(ArrayLabel),
    Kac2,
}

impl EnsembleLabel {
    pub fn is_two_variable(&self) -> bool {
        matches!(self, EnsembleLabel::Kac2)
    }

    /// The predicted limit of `(1/n) log|p|`. For the two-variable ensemble
    /// this is the unit-circle Green function on the slice `z2 = 0`; the
    /// potential statistic uses the full two-variable function.
    pub fn limit(&self) -> LimitPotential {
        match self {
            EnsembleLabel::Kac => LimitPotential::compact(CompactSetModel::UnitCircle),
            EnsembleLabel::Kac2 => LimitPotential::compact(CompactSetModel::Torus2),
            EnsembleLabel::Ortho(b) => b.limit(),
            EnsembleLabel::Array(a) => a.limit(),
        }
    }
}

impl FromStr for EnsembleLabel {
    type Err = LabelError;

    /// `kac`, `kac2`, `ortho:circle`, `ortho:circle:<R>`, `ortho:chebyshev`,
    /// or `array:<array label>`.
    fn from_str(s: &str) -> Result<Self, LabelError> {
        match s {
            "kac" => return Ok(EnsembleLabel::Kac),
            "kac2" => return Ok(EnsembleLabel::Kac2),
            "ortho:circle" => return Ok(EnsembleLabel::Ortho(BasisLabel::Circle(1.0))),
            "ortho:chebyshev" => return Ok(EnsembleLabel::Ortho(BasisLabel::Chebyshev)),
            _ => {}
        }
        if let Some(r) = s.strip_prefix("ortho:circle:") {
            return Ok(EnsembleLabel::Ortho(BasisLabel::Circle(positive(r, "radius")?)));
        }
        if let Some(a) = s.strip_prefix("array:") {
            return Ok(EnsembleLabel::Array(a.parse()?));
        }
        Err(LabelError(format!(
            "unknown ensemble `{s}` (expected kac, kac2, ortho:circle[:R], ortho:chebyshev or array:<label>)"
        )))
    }
}

impl fmt::Display for EnsembleLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleLabel::Kac => f.write_str("kac"),
            EnsembleLabel::Kac2 => f.write_str("kac2"),
            EnsembleLabel::Ortho(BasisLabel::Circle(r)) if *r == 1.0 => f.write_str("ortho:circle"),
            EnsembleLabel::Ortho(BasisLabel::Circle(r)) => write!(f, "ortho:circle:{r}"),
            EnsembleLabel::Ortho(BasisLabel::Chebyshev) => f.write_str("ortho:chebyshev"),
            EnsembleLabel::Array(a) => write!(f, "array:{a}"),
        }
    }
}

/// A per-trial statistic.
#[derive(Clone, Debug, PartialEq)]
pub enum StatLabel {
    RadialKs,
    /// `|W_1|, ..., |W_K|`, reported as `weyl_1` ... `weyl_K`.
    Weyl(usize),
    /// Mass of the open annulus.
    AnnulusMass(f64, f64),
    /// 1 when the open annulus holds no root, else 0.
    NoRootsEvent(f64, f64),
    PotentialL1,
    BlEstimate,
    /// Total mass of the zero measure, below 1 after leading trims.
    Mass,
}

impl StatLabel {
    pub fn needs_roots(&self) -> bool {
        !matches!(self, StatLabel::PotentialL1)
    }

    /// Names of the values this statistic contributes to a trial record.
    pub fn value_names(&self) -> Vec<String> {
        match self {
            StatLabel::Weyl(k) => (1..=*k).map(|j| format!("weyl_{j}")).collect(),
            other => vec![other.to_string()],
        }
    }
}

fn annulus(lo: &str, hi: &str) -> Result<(f64, f64), LabelError> {
    let lo = finite(lo, "inner radius")?;
    let hi = finite(hi, "outer radius")?;
    if lo < 0.0 || hi <= lo {
        return Err(LabelError(format!("annulus needs 0 <= lo < hi, got {lo}, {hi}")));
    }
    Ok((lo, hi))
}

impl FromStr for StatLabel {
    type Err = LabelError;

    /// `radial_ks`, `weyl:<K>`, `annulus_mass:<lo>:<hi>`,
    /// `no_roots_event:<lo>:<hi>`, `potential_l1`, `bl_estimate`, `mass`.
    fn from_str(s: &str) -> Result<Self, LabelError> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["radial_ks"] => Ok(StatLabel::RadialKs),
            ["weyl"] => Ok(StatLabel::Weyl(1)),
            ["weyl", k] => match k.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(StatLabel::Weyl(k)),
                _ => Err(LabelError(format!("weyl needs a count >= 1, got `{k}`"))),
            },
            ["annulus_mass", lo, hi] => {
                let (lo, hi) = annulus(lo, hi)?;
                Ok(StatLabel::AnnulusMass(lo, hi))
            }
            ["no_roots_event", lo, hi] => {
                let (lo, hi) = annulus(lo, hi)?;
                Ok(StatLabel::NoRootsEvent(lo, hi))
            }
            ["potential_l1"] => Ok(StatLabel::PotentialL1),
            ["bl_estimate"] => Ok(StatLabel::BlEstimate),
            ["mass"] => Ok(StatLabel::Mass),
            _ => Err(LabelError(format!("unknown statistic `{s}`"))),
        }
    }
}

impl fmt::Display for StatLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatLabel::RadialKs => f.write_str("radial_ks"),
            StatLabel::Weyl(k) => write!(f, "weyl:{k}"),
            StatLabel::AnnulusMass(lo, hi) => write!(f, "annulus_mass:{lo}:{hi}"),
            StatLabel::NoRootsEvent(lo, hi) => write!(f, "no_roots_event:{lo}:{hi}"),
            StatLabel::PotentialL1 => f.write_str("potential_l1"),
            StatLabel::BlEstimate => f.write_str("bl_estimate"),
            StatLabel::Mass => f.write_str("mass"),
        }
    }
}

/// Parses `re,im` (or a bare real number).
pub fn parse_complex(s: &str) -> Result<Complex64, LabelError> {
    let bad = || LabelError(format!("expected `re,im`, got `{s}`"));
    let mut it = s.split(',');
    let re = it.next().ok_or_else(bad)?.trim().parse::<f64>().map_err(|_| bad())?;
    let im = match it.next() {
        Some(t) => t.trim().parse::<f64>().map_err(|_| bad())?,
        None => 0.0,
    };
    if it.next().is_some() || !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}
