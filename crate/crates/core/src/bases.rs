//! Orthonormal polynomial bases for discretized measures and the monomial
//! coefficient arrays `f_{n,k}` used by the weighted ensembles.
//!
//! Bases are stored as lower-triangular monomial coefficient matrices:
//! row `j` holds the coefficients of `q_j`. Coefficient arrays keep
//! `ln f_{n,k}` because the weighted integrals underflow `f64` long before
//! the degrees we care about.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use thiserror::Error;

use crate::ext::{log_sum_exp, ExtComplex};
use crate::potential::Profile;
use crate::rngdist::{sample_stream, DistributionSpec};

#[derive(Debug, Error, PartialEq)]
pub enum BasisError {
    #[error("measure `{label}` cannot support degree {degree}: {reason}")]
    IllConditionedMeasure {
        label: String,
        degree: usize,
        reason: String,
    },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid coefficient array: {0}")]
    InvalidArray(String),
}

/// Known closed forms for the orthonormal basis of a built-in measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedForm {
    /// Normalized arc length on `|z| = R`; `q_j = (z/R)^j`.
    CircleUniform(f64),
    /// Arcsine law on `[-1, 1]`; `q_0 = 1`, `q_j = sqrt(2) T_j`.
    IntervalArcsine,
}

/// A finite positive measure `sum_k w_k delta(z_k)`.
#[derive(Clone, Debug)]
pub struct MeasureSpec {
    nodes: Vec<Complex64>,
    weights: Vec<f64>,
    label: String,
    closed_form: Option<ClosedForm>,
}

impl MeasureSpec {
    pub fn new(
        label: impl Into<String>,
        nodes: Vec<Complex64>,
        weights: Vec<f64>,
    ) -> Result<Self, BasisError> {
        if nodes.len() != weights.len() {
            return Err(BasisError::InvalidMeasure(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.is_empty() {
            return Err(BasisError::InvalidMeasure("no nodes".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(BasisError::InvalidMeasure("weights must be positive and finite".into()));
        }
        Ok(MeasureSpec {
            nodes,
            weights,
            label: label.into(),
            closed_form: None,
        })
    }

    /// `count` equispaced nodes on `|z| = radius`, each of weight `1/count`.
    /// Exact for inner products of polynomials of degree `< count/2`.
    pub fn circle_uniform(radius: f64, count: usize) -> Self {
        let nodes = (0..count)
            .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / count as f64))
            .collect();
        MeasureSpec {
            nodes,
            weights: vec![1.0 / count as f64; count],
            label: format!("circle:{radius}"),
            closed_form: Some(ClosedForm::CircleUniform(radius)),
        }
    }

    /// Gauss-Chebyshev nodes for the arcsine law on `[-1, 1]`.
    pub fn interval_arcsine(count: usize) -> Self {
        let nodes = (0..count)
            .map(|k| Complex64::new(((2 * k + 1) as f64 * PI / (2 * count) as f64).cos(), 0.0))
            .collect();
        MeasureSpec {
            nodes,
            weights: vec![1.0 / count as f64; count],
            label: "chebyshev".into(),
            closed_form: Some(ClosedForm::IntervalArcsine),
        }
    }

    /// Drops the closed-form tag so that bases are computed numerically.
    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn closed_form(&self) -> Option<ClosedForm> {
        self.closed_form
    }

    /// `<p, q> = sum w p(z) conj(q(z))` for values already evaluated at the nodes.
    fn inner(&self, p: &[Complex64], q: &[Complex64]) -> Complex64 {
        self.weights
            .iter()
            .zip(p.iter().zip(q))
            .map(|(w, (a, b))| *w * a * b.conj())
            .sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum BasisKind {
    Monomial { radius: f64 },
    Chebyshev,
    Numeric,
}

/// Orthonormal polynomials `q_0, ..., q_n` with positive leading coefficients.
#[derive(Clone, Debug)]
pub struct OrthoBasis {
    coeffs: Vec<Vec<Complex64>>,
    kind: BasisKind,
}

impl OrthoBasis {
    /// `q_j = (z/radius)^j`.
    pub fn monomial(radius: f64, degree: usize) -> Self {
        let coeffs = (0..=degree)
            .map(|j| {
                let mut row = vec![Complex64::new(0.0, 0.0); j + 1];
                row[j] = Complex64::new(radius.powi(-(j as i32)), 0.0);
                row
            })
            .collect();
        OrthoBasis {
            coeffs,
            kind: BasisKind::Monomial { radius },
        }
    }

    /// `q_0 = 1`, `q_j = sqrt(2) T_j`.
    pub fn chebyshev(degree: usize) -> Self {
        let mut t: Vec<Vec<f64>> = vec![vec![1.0]];
        if degree >= 1 {
            t.push(vec![0.0, 1.0]);
        }
        for j in 2..=degree {
            let mut next = vec![0.0; j + 1];
            for (i, c) in t[j - 1].iter().enumerate() {
                next[i + 1] += 2.0 * c;
            }
            for (i, c) in t[j - 2].iter().enumerate() {
                next[i] -= c;
            }
            t.push(next);
        }
        let coeffs = t
            .into_iter()
            .enumerate()
            .map(|(j, row)| {
                let scale = if j == 0 { 1.0 } else { SQRT_2 };
                row.into_iter().map(|c| Complex64::new(scale * c, 0.0)).collect()
            })
            .collect();
        OrthoBasis {
            coeffs,
            kind: BasisKind::Chebyshev,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Row `j`: monomial coefficients of `q_j`, lowest degree first.
    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.coeffs[j]
    }

    /// `C[j][i]`, zero above the diagonal.
    pub fn coeff(&self, j: usize, i: usize) -> Complex64 {
        self.coeffs[j].get(i).copied().unwrap_or_default()
    }

    /// `q_0(z), ..., q_n(z)` in extended precision. Closed forms use their
    /// recurrences, which stay accurate where monomial expansions cancel.
    pub fn eval_all_ext(&self, z: Complex64) -> Vec<ExtComplex> {
        let n = self.degree();
        match self.kind {
            BasisKind::Monomial { radius } => {
                let w = ExtComplex::from_complex(z / radius);
                let mut out = Vec::with_capacity(n + 1);
                let mut acc = ExtComplex::ONE;
                for _ in 0..=n {
                    out.push(acc);
                    acc = acc * w;
                }
                out
            }
            BasisKind::Chebyshev => {
                let x = ExtComplex::from_complex(z);
                let two_x = x.scale_pow2(1.0);
                let mut out = Vec::with_capacity(n + 1);
                let (mut t0, mut t1) = (ExtComplex::ONE, x);
                out.push(t0);
                for j in 1..=n {
                    out.push(t1 * SQRT_2);
                    if j < n {
                        let t2 = two_x * t1 - t0;
                        t0 = t1;
                        t1 = t2;
                    }
                }
                out
            }
            BasisKind::Numeric => {
                let ze = ExtComplex::from_complex(z);
                self.coeffs
                    .iter()
                    .map(|row| {
                        row.iter()
                            .rev()
                            .fold(ExtComplex::ZERO, |acc, &c| acc * ze + ExtComplex::from_complex(c))
                    })
                    .collect()
            }
        }
    }

    /// `q_0(z), ..., q_n(z)`.
    pub fn eval_all(&self, z: Complex64) -> Vec<Complex64> {
        self.eval_all_ext(z).iter().map(|v| v.to_complex()).collect()
    }

    /// `max_{j,k} |<q_j, q_k> - delta_jk|` over the measure.
    pub fn gram_residual(&self, measure: &MeasureSpec) -> f64 {
        let values = values_at_nodes(self, measure);
        let n = self.degree();
        let mut worst = 0.0f64;
        for j in 0..=n {
            for k in 0..=j {
                let g = measure.inner(&values[j], &values[k]);
                let target = if j == k { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// `values[j][m] = q_j(node_m)`.
fn values_at_nodes(basis: &OrthoBasis, measure: &MeasureSpec) -> Vec<Vec<Complex64>> {
    let n = basis.degree();
    let mut values = vec![Vec::with_capacity(measure.nodes.len()); n + 1];
    for &z in &measure.nodes {
        for (j, v) in basis.eval_all(z).into_iter().enumerate() {
            values[j].push(v);
        }
    }
    values
}

/// Hermitian Cholesky `A = L L^H`, returning `L` or the index of the first
/// pivot that is not safely positive.
fn cholesky(a: &[Vec<Complex64>], min_pivot: f64) -> Result<Vec<Vec<Complex64>>, (usize, f64)> {
    let n = a.len();
    let mut l = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = a[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if !(d > min_pivot) {
            return Err((j, d));
        }
        let ljj = d.sqrt();
        l[j][j] = Complex64::new(ljj, 0.0);
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
fn invert_lower(l: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = l.len();
    let mut inv = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for col in 0..n {
        inv[col][col] = l[col][col].inv();
        for i in col + 1..n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in col..i {
                s += l[i][k] * inv[k][col];
            }
            inv[i][col] = -s / l[i][i];
        }
    }
    inv
}

/// Lower-triangular product `a * b`.
fn mul_lower(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let n = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Complex64::new(0.0, 0.0);
            for k in j..=i {
                s += a[i][k] * b[k][j];
            }
            out[i][j] = s;
        }
    }
    out
}

/// Relative pivot floor of the equilibrated Gram matrix.
const PIVOT_FLOOR: f64 = 1e-13;

/// Orthonormalizes `1, z, ..., z^n` in `L^2(measure)`.
///
/// The monomial Gram matrix is equilibrated and Cholesky-factored; the
/// inverse factor gives the basis. A second pass factors the Gram matrix of
/// the resulting polynomials, evaluated at the nodes, and corrects the basis
/// once more. Built-in measures with a known closed form skip the numerics.
pub fn gram_schmidt_basis(measure: &MeasureSpec, n: usize) -> Result<OrthoBasis, BasisError> {
    match measure.closed_form {
        Some(ClosedForm::CircleUniform(r)) => return Ok(OrthoBasis::monomial(r, n)),
        Some(ClosedForm::IntervalArcsine) => return Ok(OrthoBasis::chebyshev(n)),
        None => {}
    }
    let ill = |reason: String| BasisError::IllConditionedMeasure {
        label: measure.label.clone(),
        degree: n,
        reason,
    };
    if measure.nodes.len() < n + 1 {
        return Err(ill(format!(
            "{} nodes cannot separate {} monomials",
            measure.nodes.len(),
            n + 1
        )));
    }
    // powers[i][m] = node_m^i
    let mut powers = vec![vec![Complex64::new(1.0, 0.0); measure.nodes.len()]];
    for i in 1..=n {
        let next: Vec<Complex64> = powers[i - 1]
            .iter()
            .zip(&measure.nodes)
            .map(|(p, z)| p * z)
            .collect();
        powers.push(next);
    }
    let mut gram = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=i {
            let g = measure.inner(&powers[i], &powers[j]);
            gram[i][j] = g;
            gram[j][i] = g.conj();
        }
    }
    let scale: Vec<f64> = (0..=n).map(|i| gram[i][i].re.sqrt().recip()).collect();
    if scale.iter().any(|s| !s.is_finite()) {
        return Err(ill("monomial norms overflow or vanish".into()));
    }
    let equilibrated: Vec<Vec<Complex64>> = (0..=n)
        .map(|i| (0..=n).map(|j| gram[i][j] * scale[i] * scale[j]).collect())
        .collect();
    // trace bounds the largest eigenvalue; the pivots bound the smallest from above
    let floor = PIVOT_FLOOR * (n + 1) as f64;
    let l = cholesky(&equilibrated, floor)
        .map_err(|(j, d)| ill(format!("Gram pivot {j} is {d:.3e}, below {floor:.1e}")))?;
    let mut coeffs = invert_lower(&l);
    for row in coeffs.iter_mut() {
        for (i, c) in row.iter_mut().enumerate() {
            *c *= scale[i];
        }
    }
    let first = OrthoBasis {
        coeffs: trim_rows(coeffs.clone()),
        kind: BasisKind::Numeric,
    };

    // reorthogonalization against the node values
    let values = values_at_nodes(&first, measure);
    let mut g2 = vec![vec![Complex64::new(0.0, 0.0); n + 1]; n + 1];
    for i in 0..=n {
        for j in 0..=i {
            let g = measure.inner(&values[i], &values[j]);
            g2[i][j] = g;
            g2[j][i] = g.conj();
        }
    }
    let l2 = cholesky(&g2, PIVOT_FLOOR)
        .map_err(|(j, d)| ill(format!("reorthogonalization pivot {j} is {d:.3e}")))?;
    let corrected = mul_lower(&invert_lower(&l2), &coeffs);
    Ok(OrthoBasis {
        coeffs: trim_rows(corrected),
        kind: BasisKind::Numeric,
    })
}

fn trim_rows(full: Vec<Vec<Complex64>>) -> Vec<Vec<Complex64>> {
    full.into_iter()
        .enumerate()
        .map(|(j, mut row)| {
            row.truncate(j + 1);
            row
        })
        .collect()
}

/// Sup over nodes divided by the `L^2` norm, for one polynomial.
pub fn sup_l2_ratio(measure: &MeasureSpec, coeffs: &[Complex64]) -> f64 {
    let vals: Vec<Complex64> = measure
        .nodes
        .iter()
        .map(|&z| coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c))
        .collect();
    let sup = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let l2 = measure.inner(&vals, &vals).re.sqrt();
    sup / l2
}

/// Largest sup/L^2 ratio over `trials` random degree-`n` polynomials with
/// Gaussian monomial coefficients.
pub fn bernstein_markov_ratio(
    measure: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<f64, BasisError> {
    gram_schmidt_basis(measure, n)?;
    let dist = DistributionSpec::gaussian();
    let ratio = (0..trials as u64)
        .map(|t| {
            let coeffs: Vec<Complex64> = sample_stream(&dist, seed, t, n + 1)
                .iter()
                .map(|c| c.to_complex())
                .collect();
            sup_l2_ratio(measure, &coeffs)
        })
        .fold(0.0, f64::max);
    Ok(ratio)
}

/// Where a coefficient array came from.
#[derive(Clone, Debug, PartialEq)]
pub enum ArrayProvenance {
    Profile(String),
    WeightedRadial(String),
    Explicit,
}

/// Nonnegative magnitudes `f_{n,0}, ..., f_{n,n}`, stored as logarithms.
#[derive(Clone, Debug)]
pub struct CoefficientArray {
    ln_f: Vec<f64>,
    provenance: ArrayProvenance,
}

impl CoefficientArray {
    pub fn from_ln(ln_f: Vec<f64>, provenance: ArrayProvenance) -> Result<Self, BasisError> {
        if ln_f.is_empty() {
            return Err(BasisError::InvalidArray("empty".into()));
        }
        if ln_f.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(BasisError::InvalidArray("entries must be finite".into()));
        }
        if ln_f.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(BasisError::InvalidArray("all entries are zero".into()));
        }
        Ok(CoefficientArray { ln_f, provenance })
    }

    pub fn explicit(values: &[f64]) -> Result<Self, BasisError> {
        if values.iter().any(|v| *v < 0.0) {
            return Err(BasisError::InvalidArray("entries must be nonnegative".into()));
        }
        Self::from_ln(values.iter().map(|v| v.ln()).collect(), ArrayProvenance::Explicit)
    }

    /// `f_{n,k} = 1`.
    pub fn kac(n: usize) -> Self {
        Self::from_ln(vec![0.0; n + 1], ArrayProvenance::Profile("kac".into())).unwrap()
    }

    pub fn n(&self) -> usize {
        self.ln_f.len() - 1
    }

    pub fn ln_f(&self) -> &[f64] {
        &self.ln_f
    }

    /// `f_{n,k}`; may overflow or underflow for large `n`.
    pub fn f(&self, k: usize) -> f64 {
        self.ln_f[k].exp()
    }

    pub fn provenance(&self) -> &ArrayProvenance {
        &self.provenance
    }

    /// The array as extended-precision polynomial coefficients.
    pub fn to_ext(&self) -> Vec<ExtComplex> {
        self.ln_f
            .iter()
            .map(|&l| ExtComplex::from_polar_ln(l, 0.0))
            .collect()
    }
}

/// `f_{n,j} = (sum_i w_i r_i^{2j} e^{-2n S(r_i)})^{-1/2}` for a rotation
/// invariant measure given by its radial part `(r_i, w_i)`.
pub fn weighted_radial_coefficients<S>(
    tau_radial: &[(f64, f64)],
    weight_fn: S,
    n: usize,
) -> Result<CoefficientArray, BasisError>
where
    S: Fn(f64) -> f64,
{
    if tau_radial.is_empty() || tau_radial.iter().any(|(r, w)| !(*r > 0.0 && *w > 0.0)) {
        return Err(BasisError::InvalidMeasure(
            "radial part needs positive radii and weights".into(),
        ));
    }
    let base: Vec<(f64, f64)> = tau_radial
        .iter()
        .map(|&(r, w)| (w.ln() - 2.0 * n as f64 * weight_fn(r), r.ln()))
        .collect();
    let ln_f = (0..=n)
        .map(|j| {
            let ln_moment = log_sum_exp(base.iter().map(|(c, lr)| c + 2.0 * j as f64 * lr));
            -0.5 * ln_moment
        })
        .collect();
    let label = format!("{} radii", tau_radial.len());
    CoefficientArray::from_ln(ln_f, ArrayProvenance::WeightedRadial(label))
}

/// `f_{n,k} = f(k/n)^n`.
pub fn profile_array(p: &Profile, n: usize) -> CoefficientArray {
    let nf = n.max(1) as f64;
    let ln_f = (0..=n).map(|k| nf * p.ln_eval(k as f64 / nf)).collect();
    CoefficientArray::from_ln(ln_f, ArrayProvenance::Profile(p.label().to_string()))
        .expect("profiles are positive")
}

/// Either kind of coefficient source.
#[derive(Clone, Copy, Debug)]
pub enum Coefficients<'a> {
    Array(&'a CoefficientArray),
    Basis(&'a OrthoBasis),
}

/// `(1/2n) log sum_j |q_j(z)|^2`, or `(1/2n) log sum_k |f_{n,k} z^k|^2`.
pub fn potential_from_coefficients(src: Coefficients<'_>, z: Complex64) -> f64 {
    match src {
        Coefficients::Array(arr) => {
            let n = arr.n();
            let lz = z.norm().ln();
            let lse = log_sum_exp(arr.ln_f.iter().enumerate().map(|(k, lf)| {
                if k == 0 {
                    2.0 * lf
                } else {
                    2.0 * (lf + k as f64 * lz)
                }
            }));
            lse / (2.0 * n.max(1) as f64)
        }
        Coefficients::Basis(b) => {
            let n = b.degree();
            let lse = log_sum_exp(b.eval_all_ext(z).iter().map(|q| 2.0 * q.ln_abs()));
            lse / (2.0 * n.max(1) as f64)
        }
    }
}

/// `#{k : |f_{n,k}| |z|^k >= e^{n(V - eps)}}`.
pub fn condition_ii_count(arr: &CoefficientArray, z: Complex64, eps: f64, v: f64) -> usize {
    let n = arr.n() as f64;
    let lz = z.norm().ln();
    let threshold = n * (v - eps);
    arr.ln_f
        .iter()
        .enumerate()
        .filter(|(k, lf)| {
            let term = if *k == 0 { **lf } else { **lf + *k as f64 * lz };
            term >= threshold
        })
        .count()
}
