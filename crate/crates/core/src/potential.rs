//! Green functions of canonical compact sets, limit potentials generated by
//! coefficient profiles, and the radial distribution functions of the
//! corresponding limit measures.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

/// Grid size used when tabulating a profile.
pub const PROFILE_GRID: usize = 2049;

/// Step for the numerical radial derivative.
const DIFF_STEP: f64 = 1e-5;
/// Slope jump that marks a kink.
const KINK_JUMP: f64 = 1e-3;

#[derive(Debug, Error, PartialEq)]
pub enum PotentialError {
    #[error("profile `{label}` is not strictly positive (min {min} at t = {at})")]
    NonPositiveProfile { label: String, min: f64, at: f64 },
    #[error("interval endpoints must satisfy a < b (got [{0}, {1}])")]
    EmptyInterval(f64, f64),
    #[error("circle radius must be positive (got {0})")]
    BadRadius(f64),
    #[error("profile table needs at least two values")]
    ShortTable,
}

/// Compact sets with closed-form Green functions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CompactSetModel {
    UnitCircle,
    Interval { a: f64, b: f64 },
    CircleOfRadius(f64),
    /// The unit torus `{|z1| = |z2| = 1}` in two variables.
    Torus2,
}

impl CompactSetModel {
    pub fn interval(a: f64, b: f64) -> Result<Self, PotentialError> {
        if a < b {
            Ok(CompactSetModel::Interval { a, b })
        } else {
            Err(PotentialError::EmptyInterval(a, b))
        }
    }

    pub fn circle(radius: f64) -> Result<Self, PotentialError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(CompactSetModel::CircleOfRadius(radius))
        } else {
            Err(PotentialError::BadRadius(radius))
        }
    }
}

/// Green function with pole at infinity.
///
/// `Torus2` is evaluated on the slice `z2 = 0`, where its Green function
/// reduces to `max(0, log|z|)`; use [`green_value_2`] for the full function.
pub fn green_value(k: &CompactSetModel, z: Complex64) -> f64 {
    match *k {
        CompactSetModel::UnitCircle | CompactSetModel::Torus2 => z.norm().ln().max(0.0),
        CompactSetModel::CircleOfRadius(r) => (z.norm() / r).ln().max(0.0),
        CompactSetModel::Interval { a, b } => {
            let w = (2.0 * z - (a + b)) / (b - a);
            // sqrt(w-1)*sqrt(w+1) is the branch of sqrt(w^2-1) that behaves
            // like w at infinity; picking the larger of |w +- root| makes the
            // result independent of the branch anyway.
            let root = (w - 1.0).sqrt() * (w + 1.0).sqrt();
            let big = (w + root).norm().max((w - root).norm());
            big.ln().max(0.0)
        }
    }
}

/// `max(0, log|z1|, log|z2|)`, the Green function of the unit torus.
pub fn green_value_2(z1: Complex64, z2: Complex64) -> f64 {
    0f64.max(z1.norm().ln()).max(z2.norm().ln())
}

/// Upper bound `pi * n * r^2 * c^(-2/n)` on the area where a degree-`n`
/// polynomial with leading coefficient of modulus `c` satisfies `|P| <= r^n`.
pub fn small_value_area_bound(n: u32, leading: f64, r: f64) -> f64 {
    PI * n as f64 * r * r * leading.powf(-2.0 / n as f64)
}

/// A positive continuous function on `[0, 1]`, held through its logarithm.
#[derive(Clone)]
pub struct Profile {
    label: String,
    ln_f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    grid: Vec<f64>,
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile").field("label", &self.label).finish()
    }
}

/// Binary entropy in nats, with `0 ln 0 = 0`.
pub fn binary_entropy(t: f64) -> f64 {
    let xlnx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    -(xlnx(t) + xlnx(1.0 - t))
}

impl Profile {
    /// From `ln f`. Fails unless `f > 0` at every grid point.
    pub fn from_ln<F>(label: impl Into<String>, ln_f: F) -> Result<Self, PotentialError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let label = label.into();
        let grid: Vec<f64> = (0..PROFILE_GRID).map(|i| ln_f(grid_t(i))).collect();
        if let Some((i, &v)) = grid
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() || **v == f64::INFINITY))
        {
            return Err(PotentialError::NonPositiveProfile {
                label,
                min: v.exp(),
                at: grid_t(i),
            });
        }
        Ok(Profile {
            label,
            ln_f: Arc::new(ln_f),
            grid,
        })
    }

    /// From `f` itself.
    pub fn new<F>(label: impl Into<String>, f: F) -> Result<Self, PotentialError>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_ln(label, move |t| {
            let v = f(t);
            if v > 0.0 {
                v.ln()
            } else {
                f64::NAN
            }
        })
    }

    /// Piecewise-linear interpolation of `values` sampled uniformly on `[0, 1]`.
    pub fn from_table(label: impl Into<String>, values: Vec<f64>) -> Result<Self, PotentialError> {
        if values.len() < 2 {
            return Err(PotentialError::ShortTable);
        }
        let m = values.len() - 1;
        Self::new(label, move |t| {
            let x = t.clamp(0.0, 1.0) * m as f64;
            let i = (x.floor() as usize).min(m - 1);
            let w = x - i as f64;
            values[i] * (1.0 - w) + values[i + 1] * w
        })
    }

    /// `f = c`.
    pub fn constant(c: f64) -> Result<Self, PotentialError> {
        Self::new(format!("const:{c}"), move |_| c)
    }

    /// `f = exp(H(t)/2)`; its arrays approximate `sqrt(binomial(n, k))`.
    pub fn entropy() -> Self {
        Self::from_ln("elliptic", |t| 0.5 * binary_entropy(t)).unwrap()
    }

    /// `f = exp(-a t)`.
    pub fn exponential(a: f64) -> Self {
        Self::from_ln(format!("exp:{a}"), move |t| -a * t).unwrap()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.ln_f)(t).exp()
    }

    pub fn ln_eval(&self, t: f64) -> f64 {
        (self.ln_f)(t)
    }

    /// `ln f` on the uniform grid of [`PROFILE_GRID`] points.
    pub fn ln_grid(&self) -> &[f64] {
        &self.grid
    }
}

fn grid_t(i: usize) -> f64 {
    i as f64 / (PROFILE_GRID - 1) as f64
}

/// `sup_{t in [0,1]} (t log|z| + log f(t))`.
///
/// Grid maximization followed by a golden-section pass over the two grid
/// cells around the best node.
pub fn profile_potential(p: &Profile, z: Complex64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        return p.ln_eval(0.0);
    }
    profile_potential_log(p, r.ln())
}

/// [`profile_potential`] as a function of `s = log|z|`.
pub fn profile_potential_log(p: &Profile, s: f64) -> f64 {
    let h = |t: f64| t * s + p.ln_eval(t);
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &g) in p.grid.iter().enumerate() {
        let v = grid_t(i) * s + g;
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = grid_t(best_i.saturating_sub(1));
    let mut hi = grid_t((best_i + 1).min(PROFILE_GRID - 1));
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (h(x1), h(x2));
    for _ in 0..90 {
        if hi - lo <= 1e-15 {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = h(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = h(x1);
        }
    }
    best.max(f1).max(f2).max(h(lo)).max(h(hi))
}

#[derive(Clone, Debug)]
pub enum LimitSource {
    Compact(CompactSetModel),
    Profile(Profile),
}

/// A limit potential `V` together with the radial distribution function
/// `F(r)` of the measure `(1/2pi) Laplacian V`.
#[derive(Clone, Debug)]
pub struct LimitPotential {
    source: LimitSource,
}

impl LimitPotential {
    pub fn compact(k: CompactSetModel) -> Self {
        LimitPotential {
            source: LimitSource::Compact(k),
        }
    }

    pub fn profile(p: Profile) -> Self {
        LimitPotential {
            source: LimitSource::Profile(p),
        }
    }

    pub fn source(&self) -> &LimitSource {
        &self.source
    }

    pub fn label(&self) -> String {
        match &self.source {
            LimitSource::Compact(k) => format!("{k:?}"),
            LimitSource::Profile(p) => p.label().to_string(),
        }
    }

    /// `V(z)`.
    pub fn value(&self, z: Complex64) -> f64 {
        match &self.source {
            LimitSource::Compact(k) => green_value(k, z),
            LimitSource::Profile(p) => profile_potential(p, z),
        }
    }

    /// `v(s) = V(e^s)` along the positive real axis.
    fn value_log(&self, s: f64) -> f64 {
        match &self.source {
            LimitSource::Compact(k) => green_value(k, Complex64::new(s.exp(), 0.0)),
            LimitSource::Profile(p) => profile_potential_log(p, s),
        }
    }

    /// True when the limit measure is invariant under rotations about 0.
    pub fn is_rotation_invariant(&self) -> bool {
        !matches!(
            self.source,
            LimitSource::Compact(CompactSetModel::Interval { .. })
        )
    }

    /// Mass of the closed disk of radius `r`.
    pub fn radial_cdf(&self, r: f64) -> f64 {
        radial_limit_cdf(self, r)
    }

    /// Points and weights of a quadrature rule for the limit measure, used
    /// by the bounded-Lipschitz estimate.
    pub fn quadrature(&self, radial: usize, angular: usize) -> Vec<(Complex64, f64)> {
        if let LimitSource::Compact(CompactSetModel::Interval { a, b }) = self.source {
            // Gauss-Chebyshev nodes integrate the arcsine law
            let m = radial * angular;
            return (0..m)
                .map(|k| {
                    let x = ((2 * k + 1) as f64 * PI / (2 * m) as f64).cos();
                    (Complex64::new(0.5 * (a + b) + 0.5 * (b - a) * x, 0.0), 1.0 / m as f64)
                })
                .collect();
        }
        let w = 1.0 / (radial * angular) as f64;
        let mut out = Vec::with_capacity(radial * angular);
        for i in 0..radial {
            let u = (i as f64 + 0.5) / radial as f64;
            let r = self.radial_quantile(u);
            for j in 0..angular {
                let theta = 2.0 * PI * (j as f64 + 0.5) / angular as f64;
                out.push((Complex64::from_polar(r, theta), w));
            }
        }
        out
    }

    /// Smallest `r` with `F(r) >= u`, by bisection in `log r`.
    pub fn radial_quantile(&self, u: f64) -> f64 {
        let (mut lo, mut hi) = (-40.0f64, 40.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.radial_cdf(mid.exp()) >= u {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi.exp()
    }
}

/// `F(r)`: the right derivative of `s -> V(e^s)` at `s = log r`, clamped to
/// `[0, 1]`.
///
/// Away from kinks this is a centered difference with step `1e-5`. When the
/// one-sided slopes disagree by more than `1e-3` the kink is located by
/// bisection and the slope on the appropriate side is returned, so circle
/// profiles give exact jumps. Compact-set limits use closed forms: a step for
/// circles and the arcsine disk mass for intervals.
pub fn radial_limit_cdf(limit: &LimitPotential, r: f64) -> f64 {
    match limit.source {
        LimitSource::Compact(CompactSetModel::Interval { a, b }) => {
            return arcsine_disk_mass(a, b, r)
        }
        LimitSource::Compact(CompactSetModel::UnitCircle | CompactSetModel::Torus2) => {
            return if r >= 1.0 { 1.0 } else { 0.0 }
        }
        LimitSource::Compact(CompactSetModel::CircleOfRadius(radius)) => {
            return if r >= radius { 1.0 } else { 0.0 }
        }
        LimitSource::Profile(_) => {}
    }
    if r <= 0.0 {
        return 0.0;
    }
    let v = |s: f64| limit.value_log(s);
    let s = r.ln();
    let h = DIFF_STEP;
    let (vm, v0, vp) = (v(s - h), v(s), v(s + h));
    let left = (v0 - vm) / h;
    let right = (vp - v0) / h;
    if (right - left).abs() <= KINK_JUMP {
        return ((vp - vm) / (2.0 * h)).clamp(0.0, 1.0);
    }
    let slope_left = (vm - v(s - 2.0 * h)) / h;
    let slope_right = (v(s + 2.0 * h) - vp) / h;
    let jump = slope_right - slope_left;
    let (mut lo, mut hi) = (s - h, s + h);
    let mut v_lo = vm;
    let min_width = 1e-9 * s.abs().max(1.0);
    while hi - lo > min_width {
        let mid = 0.5 * (lo + hi);
        let v_mid = v(mid);
        let secant = (v_mid - v_lo) / (mid - lo);
        if (secant - slope_left).abs() <= 1e-2 * jump.abs() {
            lo = mid;
            v_lo = v_mid;
        } else {
            hi = mid;
        }
    }
    let f = if s < lo { slope_left } else { slope_right };
    f.clamp(0.0, 1.0)
}

fn arcsine_disk_mass(a: f64, b: f64, r: f64) -> f64 {
    let cdf = |x: f64| {
        let w = ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0);
        w.asin() / PI + 0.5
    };
    let lo = a.max(-r);
    let hi = b.min(r);
    if hi < lo {
        0.0
    } else {
        (cdf(hi) - cdf(lo)).clamp(0.0, 1.0)
    }
}
