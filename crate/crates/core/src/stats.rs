//! Discrepancies between empirical zero measures and their limits, plus
//! the anti-concentration and covering diagnostics.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ensembles::{PolynomialSample, PolynomialSample2};
use crate::ext::{log_sum_exp, ExtComplex};
use crate::potential::{green_value_2, LimitPotential};
use crate::roots::RootSet;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("every term has concentration 1; the bound is undefined")]
    DegenerateTerms,
    #[error("concentration values must lie in (0, 1], got {0}")]
    BadProbability(f64),
}

/// `(1/n) sum_j delta(z_j)` with `n` the nominal degree, so the total
/// mass is below 1 when leading coefficients were trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Complex64>,
    pub nominal_n: usize,
}

impl EmpiricalMeasure {
    pub fn new(atoms: Vec<Complex64>, nominal_n: usize) -> Self {
        EmpiricalMeasure { atoms, nominal_n }
    }

    pub fn from_roots(rs: &RootSet, nominal_n: usize) -> Self {
        Self::new(rs.roots.clone(), nominal_n)
    }

    pub fn weight(&self) -> f64 {
        if self.nominal_n == 0 {
            0.0
        } else {
            1.0 / self.nominal_n as f64
        }
    }

    pub fn mass(&self) -> f64 {
        self.atoms.len() as f64 * self.weight()
    }

    pub fn rotated(&self, phi: f64) -> Self {
        let u = Complex64::from_polar(1.0, phi);
        Self::new(self.atoms.iter().map(|z| z * u).collect(), self.nominal_n)
    }
}

/// Kolmogorov-Smirnov distance between the radial distribution of the
/// atoms and the limit's `F(r)`.
///
/// Radii equal to within a relative `1e-9` are one jump of the empirical
/// CDF. At each jump the empirical values just before and just after are
/// compared with the left limit of `F` and with `F` itself.
pub fn radial_ks(emp: &EmpiricalMeasure, limit: &LimitPotential) -> f64 {
    let mut radii: Vec<f64> = emp.atoms.iter().map(|z| z.norm()).collect();
    radii.sort_by(f64::total_cmp);
    let w = emp.weight();
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < radii.len() {
        let a = radii[i];
        let mut j = i + 1;
        while j < radii.len() && radii[j] - radii[j - 1] <= 1e-9 * radii[j] {
            j += 1;
        }
        let b = radii[j - 1];
        let before = i as f64 * w;
        let after = j as f64 * w;
        let left = if a > 0.0 { limit.radial_cdf(a * (1.0 - 1e-7)) } else { 0.0 };
        worst = worst
            .max((before - left).abs())
            .max((after - limit.radial_cdf(b)).abs());
        i = j;
    }
    worst
}

/// `|sum_j e^{i k arg z_j}| / n` for `k = 1..=k_max`. An atom at the origin
/// counts with angle 0.
pub fn weyl_sums(emp: &EmpiricalMeasure, k_max: usize) -> Vec<f64> {
    let w = emp.weight();
    let units: Vec<Complex64> = emp
        .atoms
        .iter()
        .map(|z| Complex64::from_polar(1.0, z.arg()))
        .collect();
    let mut powers = vec![Complex64::new(1.0, 0.0); units.len()];
    (1..=k_max)
        .map(|_| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, u) in powers.iter_mut().zip(&units) {
                *p *= u;
                acc += *p;
            }
            // renormalize drift from repeated multiplication
            for p in powers.iter_mut() {
                *p /= p.norm();
            }
            acc.norm() * w
        })
        .collect()
}

/// Mass of the open annulus `r_lo < |z| < r_hi`.
pub fn annulus_mass(emp: &EmpiricalMeasure, r_lo: f64, r_hi: f64) -> f64 {
    let count = emp
        .atoms
        .iter()
        .filter(|z| {
            let r = z.norm();
            r_lo < r && r < r_hi
        })
        .count();
    count as f64 * emp.weight()
}

/// Evaluation points with cell areas.
#[derive(Clone, Debug)]
pub struct Grid {
    pub points: Vec<Complex64>,
    pub areas: Vec<f64>,
}

impl Grid {
    /// Polar midpoint cells on `r_lo <= |z| <= r_hi`, with cell area
    /// `r dr dtheta`. Angles are offset by half a cell plus a small shift
    /// so that no point sits on the real axis.
    pub fn annulus(r_lo: f64, r_hi: f64, radial: usize, angular: usize) -> Self {
        let dr = (r_hi - r_lo) / radial as f64;
        let dt = TAU / angular as f64;
        let mut points = Vec::with_capacity(radial * angular);
        let mut areas = Vec::with_capacity(radial * angular);
        for i in 0..radial {
            let r = r_lo + (i as f64 + 0.5) * dr;
            for j in 0..angular {
                let theta = (j as f64 + 0.5) * dt + 0.01;
                points.push(Complex64::from_polar(r, theta));
                areas.push(r * dr * dt);
            }
        }
        Grid { points, areas }
    }

    /// 64 x 64 cells on `0.25 <= |z| <= 2.5`.
    pub fn default_one_variable() -> Self {
        Self::annulus(0.25, 2.5, 64, 64)
    }
}

/// Product grid for two variables: the same one-variable cells in each
/// coordinate.
#[derive(Clone, Debug)]
pub struct Grid2 {
    pub axis: Grid,
}

impl Grid2 {
    /// 16 radii by 16 angles per variable on `0.5 <= |z_i| <= 1.5`, 16^4
    /// points in all.
    pub fn default_two_variable() -> Self {
        Grid2 {
            axis: Grid::annulus(0.5, 1.5, 16, 16),
        }
    }
}

/// Mean absolute potential error and the bound on what clipping `-inf`
/// contributed to it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct L1Error {
    pub value: f64,
    pub clip_bias: f64,
}

/// `log|p|` at an exact zero is replaced by this value.
pub const LOG_CLIP: f64 = -20.0;

/// Sum by recursive halving, so the rounding depends only on the order of
/// the input.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

fn weighted_mean(terms: &[f64], weights: &[f64]) -> f64 {
    pairwise_sum(terms) / pairwise_sum(weights)
}

/// Area-weighted mean of `|(1/n) log|p(z)| - V(z)|` over the grid.
pub fn potential_l1_error(p: &PolynomialSample, limit: &LimitPotential, grid: &Grid) -> L1Error {
    let n = p.n.max(1) as f64;
    let mut terms = Vec::with_capacity(grid.points.len());
    let mut clipped = Vec::new();
    for (z, a) in grid.points.iter().zip(&grid.areas) {
        let mut l = crate::ensembles::log_abs_eval(p, *z);
        if l == f64::NEG_INFINITY {
            l = LOG_CLIP;
            clipped.push(*a);
        }
        terms.push(a * (l / n - limit.value(*z)).abs());
    }
    let total = pairwise_sum(&grid.areas);
    L1Error {
        value: pairwise_sum(&terms) / total,
        clip_bias: pairwise_sum(&clipped) * LOG_CLIP.abs() / (n * total),
    }
}

/// Two-variable version against `max(0, log|z1|, log|z2|)`.
pub fn potential_l1_error_2(p: &PolynomialSample2, grid: &Grid2) -> L1Error {
    let n = p.n.max(1) as f64;
    let axis = &grid.axis;
    let z2s: Vec<ExtComplex> = axis.points.iter().map(|z| ExtComplex::from_complex(*z)).collect();
    let m = axis.points.len();
    let mut terms = Vec::with_capacity(m * m);
    let mut areas = Vec::with_capacity(m * m);
    let mut clipped = Vec::new();
    for (z1, a1) in axis.points.iter().zip(&axis.areas) {
        let partial = p.partial_in_z1(ExtComplex::from_complex(*z1));
        for ((z2, z2e), a2) in axis.points.iter().zip(&z2s).zip(&axis.areas) {
            let v = partial
                .iter()
                .rev()
                .fold(ExtComplex::ZERO, |acc, &b| acc * *z2e + b);
            let mut l = v.ln_abs();
            let a = a1 * a2;
            if l == f64::NEG_INFINITY {
                l = LOG_CLIP;
                clipped.push(a);
            }
            terms.push(a * (l / n - green_value_2(*z1, *z2)).abs());
            areas.push(a);
        }
    }
    let total = pairwise_sum(&areas);
    L1Error {
        value: weighted_mean(&terms, &areas),
        clip_bias: pairwise_sum(&clipped) * LOG_CLIP.abs() / (n * total),
    }
}

/// Bounded-Lipschitz estimate over tent functions
/// `phi_c(z) = max(0, 1/2 - |z - c|) / (3/2)`, each of bounded-Lipschitz
/// norm 1, centred on a 21 x 21 grid over `[-2.5, 2.5]^2`.
#[derive(Clone, Debug)]
pub struct BlEstimator {
    centers: Vec<Complex64>,
    limit_integrals: Vec<f64>,
}

const TENT_RADIUS: f64 = 0.5;

fn tent(z: Complex64, c: Complex64) -> f64 {
    (TENT_RADIUS - (z - c).norm()).max(0.0) / (1.0 + TENT_RADIUS)
}

impl BlEstimator {
    pub fn new(limit: &LimitPotential) -> Self {
        let centers: Vec<Complex64> = (0..21)
            .flat_map(|i| (0..21).map(move |j| Complex64::new(-2.5 + 0.25 * i as f64, -2.5 + 0.25 * j as f64)))
            .collect();
        let quad = limit.quadrature(128, 128);
        let limit_integrals = centers
            .iter()
            .map(|c| quad.iter().map(|(z, w)| w * tent(*z, *c)).sum())
            .collect();
        BlEstimator {
            centers,
            limit_integrals,
        }
    }

    pub fn estimate(&self, emp: &EmpiricalMeasure) -> f64 {
        let w = emp.weight();
        self.centers
            .iter()
            .zip(&self.limit_integrals)
            .map(|(c, li)| {
                let e: f64 = emp.atoms.iter().map(|z| tent(*z, *c)).sum::<f64>() * w;
                (e - li).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn bl_estimate(emp: &EmpiricalMeasure, limit: &LimitPotential) -> f64 {
    BlEstimator::new(limit).estimate(emp)
}

/// Per-trial statistics. Entries that were not requested are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub radial_ks: Option<f64>,
    pub weyl: Vec<f64>,
    pub annulus_mass: Option<f64>,
    pub potential_l1: Option<f64>,
    pub bl_estimate: Option<f64>,
    pub clip_bias: Option<f64>,
}

/// Largest fraction of samples in an open ball of radius `r` centred at a
/// sample point. A lower estimate of the concentration function.
pub fn concentration_estimate(samples: &[Complex64], r: f64) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    // distinct values with multiplicities
    let mut distinct: HashMap<(u64, u64), (Complex64, usize)> = HashMap::new();
    for z in samples {
        let key = ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits());
        distinct.entry(key).or_insert((*z, 0)).1 += 1;
    }
    let mut points: Vec<(Complex64, usize)> = distinct.into_values().collect();
    points.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    let cell = |z: Complex64| ((z.re / r).floor() as i64, (z.im / r).floor() as i64);
    let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (z, _)) in points.iter().enumerate() {
        cells.entry(cell(*z)).or_default().push(i);
    }
    let mut best = 0usize;
    for (z, _) in &points {
        let (cx, cy) = cell(*z);
        let mut count = 0;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = cells.get(&(cx + dx, cy + dy)) {
                    count += ids
                        .iter()
                        .filter(|&&k| (points[k].0 - z).norm() < r)
                        .map(|&k| points[k].1)
                        .sum::<usize>();
                }
            }
        }
        best = best.max(count);
    }
    best as f64 / samples.len() as f64
}

/// Outcome of comparing a concentration value with the Kolmogorov-Rogozin
/// bound `C / sqrt(sum_i (1 - Q_i))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KrCheck {
    pub bound: f64,
    pub satisfied: bool,
}

pub fn kr_bound_check(per_term_q: &[f64], sum_q: f64, c: f64) -> Result<KrCheck, StatsError> {
    if let Some(&q) = per_term_q.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
        return Err(StatsError::BadProbability(q));
    }
    let spread: f64 = per_term_q.iter().map(|q| 1.0 - q).sum();
    if spread <= 0.0 {
        return Err(StatsError::DegenerateTerms);
    }
    let bound = c / spread.sqrt();
    Ok(KrCheck {
        bound,
        satisfied: sum_q <= bound,
    })
}

/// Greedy cover by closed balls of the given radius centred at the points:
/// each step takes the uncovered point whose ball holds the most uncovered
/// points, lowest index first on ties. An upper bound on the minimal cover.
pub fn covering_number(points: &[Complex64], radius: f64) -> usize {
    let n = points.len();
    let neighbors: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| (points[i] - points[j]).norm() <= radius)
                .collect()
        })
        .collect();
    let mut count: Vec<usize> = neighbors.iter().map(|v| v.len()).collect();
    let mut covered = vec![false; n];
    let mut remaining = n;
    let mut balls = 0;
    while remaining > 0 {
        let mut best = usize::MAX;
        for i in 0..n {
            if !covered[i] && (best == usize::MAX || count[i] > count[best]) {
                best = i;
            }
        }
        balls += 1;
        for &q in &neighbors[best] {
            if !covered[q] {
                covered[q] = true;
                remaining -= 1;
                for &p in &neighbors[q] {
                    count[p] -= 1;
                }
            }
        }
    }
    balls
}

/// `c_k z^k / ||(c_j z^j)_j||_2` for `k = 0..=n`, normalized in log space.
pub fn normalized_coefficient_points(p: &PolynomialSample, z: Complex64) -> Vec<Complex64> {
    let ze = ExtComplex::from_complex(z);
    let mut power = ExtComplex::ONE;
    let terms: Vec<ExtComplex> = p
        .coeffs
        .iter()
        .map(|c| {
            let t = *c * power;
            power = power * ze;
            t
        })
        .collect();
    let ln_norm = 0.5 * log_sum_exp(terms.iter().map(|t| 2.0 * t.ln_abs()));
    let inv = ExtComplex::from_polar_ln(-ln_norm, 0.0);
    terms.iter().map(|t| (*t * inv).to_complex()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{profile_array, CoefficientArray};
    use crate::ensembles::{draw_kac, draw_kac2};
    use crate::potential::{CompactSetModel, Profile};
    use crate::rngdist::DistributionSpec;
    use crate::roots::find_roots_default;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity(n: usize) -> Vec<Complex64> {
        (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect()
    }

    fn circle() -> LimitPotential {
        LimitPotential::compact(CompactSetModel::UnitCircle)
    }

    #[test]
    fn radial_ks_examples() {
        let emp = EmpiricalMeasure::new(unity(64), 64);
        assert_eq!(radial_ks(&emp, &circle()), 0.0);
        let far = EmpiricalMeasure::new(vec![c(2.0, 0.0); 10], 10);
        assert_eq!(radial_ks(&far, &circle()), 1.0);
        let inside = EmpiricalMeasure::new(vec![c(0.5, 0.0); 10], 10);
        assert_eq!(radial_ks(&inside, &circle()), 1.0);
        // half inside, half outside
        let split = EmpiricalMeasure::new(vec![c(0.9, 0.0), c(1.1, 0.0)], 2);
        assert_eq!(radial_ks(&split, &circle()), 0.5);
        assert_eq!(radial_ks(&EmpiricalMeasure::new(vec![], 5), &circle()), 0.0);
    }

    #[test]
    fn radial_ks_against_continuous_oracle() {
        // atoms at the quantiles (k - 1/2)/n of r^2/(1+r^2): distance 1/(2n)
        let ell = LimitPotential::profile(Profile::entropy());
        let n = 200;
        let atoms: Vec<Complex64> = (0..n)
            .map(|k| {
                let u = (k as f64 + 0.5) / n as f64;
                Complex64::from_polar((u / (1.0 - u)).sqrt(), k as f64)
            })
            .collect();
        let ks = radial_ks(&EmpiricalMeasure::new(atoms, n), &ell);
        assert!((ks - 0.5 / n as f64).abs() < 1e-6, "{ks}");
    }

    #[test]
    fn weyl_examples() {
        let n = 32;
        let emp = EmpiricalMeasure::new(unity(n), n);
        assert!(weyl_sums(&emp, n - 1).iter().all(|w| *w < 1e-12));
        assert!((weyl_sums(&emp, n)[n - 1] - 1.0).abs() < 1e-12);
        let aligned = EmpiricalMeasure::new(vec![c(2.0, 0.0); 5], 10);
        assert!((weyl_sums(&aligned, 1)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn annulus_examples() {
        let emp = EmpiricalMeasure::new(unity(16), 16);
        assert_eq!(annulus_mass(&emp, 0.5, 1.5), 1.0);
        assert_eq!(annulus_mass(&emp, 2.0, 3.0), 0.0);
        assert_eq!(annulus_mass(&emp, 1.0, 3.0), 0.0);
        // one dominant middle coefficient: z^10 = -e^{-40} and z^10 = -e^{40}
        let n = 20;
        let mut coeffs = vec![ExtComplex::ZERO; n + 1];
        coeffs[0] = ExtComplex::ONE;
        coeffs[10] = ExtComplex::from_polar_ln(2.0 * n as f64, 0.0);
        coeffs[20] = ExtComplex::ONE;
        let p = PolynomialSample::from_coeffs("dominant", coeffs).unwrap();
        let rs = find_roots_default(&p).unwrap();
        let emp = EmpiricalMeasure::from_roots(&rs, n);
        assert_eq!(annulus_mass(&emp, 0.5, 1.5), 0.0);
        assert_eq!(annulus_mass(&emp, 0.0, 0.5), 0.5);
    }

    #[test]
    fn potential_l1_examples() {
        let n = 12;
        let grid = Grid::annulus(1.1, 2.0, 16, 16);
        let mut coeffs = vec![ExtComplex::ZERO; n + 1];
        coeffs[n] = ExtComplex::ONE;
        let p = PolynomialSample::from_coeffs("z^n", coeffs.clone()).unwrap();
        let e = potential_l1_error(&p, &circle(), &grid);
        assert!(e.value < 1e-12);
        assert_eq!(e.clip_bias, 0.0);
        coeffs[n] = ExtComplex::from_polar_ln(n as f64 * 2f64.ln(), 0.0);
        let q = PolynomialSample::from_coeffs("2^n z^n", coeffs).unwrap();
        let e = potential_l1_error(&q, &circle(), &grid);
        assert!((e.value - 2f64.ln()).abs() < 1e-12);
        // shift by |log c| / n when the sign of the integrand is constant
        let r = q.scaled(ExtComplex::from_polar_ln(5.0, 1.0));
        let er = potential_l1_error(&r, &circle(), &grid);
        assert!((er.value - e.value - 5.0 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn kac_potential_error_is_small() {
        let d = DistributionSpec::gaussian();
        let p = draw_kac(256, &d, 4, 0).unwrap();
        let e = potential_l1_error(&p, &circle(), &Grid::default_one_variable());
        assert!(e.value < 0.05, "{e:?}");
        let q = draw_kac2(24, &d, 4, 0).unwrap();
        let e2 = potential_l1_error_2(&q, &Grid2::default_two_variable());
        assert!(e2.value < 0.3, "{e2:?}");
        assert_eq!(pairwise_sum(&[1.0; 1000]), 1000.0);
    }

    #[test]
    fn bl_estimate_detects_wrong_limits() {
        let emp = EmpiricalMeasure::new(unity(256), 256);
        let est = BlEstimator::new(&circle());
        assert!(est.estimate(&emp) < 0.01);
        let off = EmpiricalMeasure::new(vec![c(2.0, 0.0); 256], 256);
        assert!(est.estimate(&off) > 0.1);
    }

    #[test]
    fn concentration_examples() {
        // all 16 sign patterns of four Rademacher terms
        let sums: Vec<Complex64> = (0..16u32)
            .map(|m| c((0..4).map(|b| if m >> b & 1 == 1 { 1.0 } else { -1.0 }).sum(), 0.0))
            .collect();
        assert_eq!(concentration_estimate(&sums, 1.0), 6.0 / 16.0);
        assert_eq!(concentration_estimate(&[c(3.0, 1.0); 7], 0.1), 1.0);
        let mut two = vec![c(0.0, 0.0); 5];
        two.extend(vec![c(10.0, 0.0); 5]);
        assert_eq!(concentration_estimate(&two, 1.0), 0.5);
    }

    #[test]
    fn kr_examples() {
        let k = kr_bound_check(&[0.5; 100], 0.1, 1.0).unwrap();
        assert!((k.bound - 1.0 / 50f64.sqrt()).abs() < 1e-15);
        assert!(k.satisfied);
        // exact central binomial mass at n = 100
        let ln_c: f64 = (1..=50).map(|i| ((50 + i) as f64 / i as f64).ln()).sum();
        let q = (ln_c - 100.0 * 2f64.ln()).exp();
        assert!((q - 0.0796).abs() < 1e-4);
        assert!(kr_bound_check(&[0.5; 100], q, 2.0).unwrap().satisfied);
        assert_eq!(kr_bound_check(&[1.0; 3], 0.5, 1.0), Err(StatsError::DegenerateTerms));
        assert!(kr_bound_check(&[0.0], 0.5, 1.0).is_err());
    }

    #[test]
    fn covering_examples() {
        assert_eq!(covering_number(&[c(1.0, 1.0); 10], 0.5), 1);
        let line: Vec<Complex64> = (0..4).map(|k| c(10.0 * k as f64, 0.0)).collect();
        assert_eq!(covering_number(&line, 1.0), 4);
        for n in [8usize, 50, 200] {
            let pts = unity(n);
            let radius = 0.9 * 2.0 / n as f64;
            // oracle: no pair is within the radius
            let min_gap = (0..n)
                .flat_map(|i| (0..i).map(move |j| (i, j)))
                .map(|(i, j)| (pts[i] - pts[j]).norm())
                .fold(f64::INFINITY, f64::min);
            assert!(min_gap > radius);
            assert_eq!(covering_number(&pts, radius), n);
        }
        // three points in a row: the middle one covers all
        let row = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert_eq!(covering_number(&row, 1.0), 1);
    }

    #[test]
    fn normalized_points_examples() {
        let kac = CoefficientArray::kac(3);
        let p = PolynomialSample::from_coeffs("f=1", kac.to_ext()).unwrap();
        for w in normalized_coefficient_points(&p, c(1.0, 0.0)) {
            assert!((w - 0.5).norm() < 1e-15);
        }
        let lin = PolynomialSample::from_complex("1", &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(normalized_coefficient_points(&lin, c(0.3, 2.0)), vec![c(1.0, 0.0), c(0.0, 0.0)]);
        let ell = profile_array(&Profile::entropy(), 50);
        let p = PolynomialSample::from_coeffs("elliptic", ell.to_ext()).unwrap();
        let pts = normalized_coefficient_points(&p, Complex64::from_polar(1.0, 0.4));
        let norm: f64 = pts.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rotation_invariance(phi in 0.0f64..TAU, seed in 0u64..50) {
            let p = draw_kac(40, &DistributionSpec::gaussian(), seed, 0).unwrap();
            let emp = EmpiricalMeasure::from_roots(&find_roots_default(&p).unwrap(), 40);
            let rot = emp.rotated(phi);
            prop_assert!((radial_ks(&emp, &circle()) - radial_ks(&rot, &circle())).abs() < 1e-12);
            prop_assert!((annulus_mass(&emp, 0.8, 1.2) - annulus_mass(&rot, 0.8, 1.2)).abs() < 1e-12);
            for (a, b) in weyl_sums(&emp, 5).iter().zip(weyl_sums(&rot, 5)) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn covering_is_monotone_on_separated_clusters(
            sizes in prop::collection::vec(1usize..6, 1..12),
            jitter in prop::collection::vec((-0.05f64..0.05, -0.05f64..0.05), 60),
            r in 0.2f64..1.0,
            grow in 1.0f64..2.0,
        ) {
            // greedy is exact here; on arbitrary inputs it need not be monotone
            let mut pts = Vec::new();
            for (k, size) in sizes.iter().enumerate() {
                for m in 0..*size {
                    let (dx, dy) = jitter[(k * 5 + m) % jitter.len()];
                    pts.push(c(10.0 * k as f64 + dx, dy));
                }
            }
            let a = covering_number(&pts, r);
            prop_assert_eq!(a, sizes.len());
            prop_assert!(covering_number(&pts, grow * r) <= a);
            prop_assert!(covering_number(&pts, 0.01) >= a);
        }

        #[test]
        fn kr_bound_decreases_with_more_terms(qs in prop::collection::vec(0.01f64..0.99, 1..50), extra in 0.01f64..0.99) {
            let a = kr_bound_check(&qs, 0.5, 1.0).unwrap().bound;
            let mut more = qs.clone();
            more.push(extra);
            prop_assert!(kr_bound_check(&more, 0.5, 1.0).unwrap().bound < a);
        }

        #[test]
        fn concentration_bounds_point_masses(vals in prop::collection::vec(-5i32..5, 1..200)) {
            let samples: Vec<Complex64> = vals.iter().map(|v| c(2.0 * *v as f64, 0.0)).collect();
            let mut counts = HashMap::new();
            for v in &vals { *counts.entry(*v).or_insert(0usize) += 1; }
            let top = *counts.values().max().unwrap() as f64 / vals.len() as f64;
            prop_assert_eq!(concentration_estimate(&samples, 1.0), top);
        }
    }
}
