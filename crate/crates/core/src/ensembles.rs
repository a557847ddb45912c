//! Random polynomial instances and stable evaluation of `log|p|`.

use num_complex::Complex64;
use thiserror::Error;

use crate::bases::{CoefficientArray, OrthoBasis};
use crate::ext::ExtComplex;
use crate::rngdist::{sample_stream, DistributionSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnsembleError {
    #[error("{label}: all coefficients of the degree-{n} draw are zero")]
    IdenticallyZero { label: String, n: usize },
    #[error("{0}")]
    BadDegree(String),
}

/// A one-variable polynomial `sum_k c_k z^k` with `n + 1` monomial
/// coefficients. Leading zeros are kept.
#[derive(Clone, Debug)]
pub struct PolynomialSample {
    pub n: usize,
    pub coeffs: Vec<ExtComplex>,
    pub ensemble_label: String,
    pub seed: u64,
    pub trial: u64,
}

impl PolynomialSample {
    /// Wraps explicit coefficients, lowest degree first.
    pub fn from_coeffs(
        label: impl Into<String>,
        coeffs: Vec<ExtComplex>,
    ) -> Result<Self, EnsembleError> {
        let label = label.into();
        if coeffs.is_empty() {
            return Err(EnsembleError::BadDegree("no coefficients".into()));
        }
        let n = coeffs.len() - 1;
        if coeffs.iter().all(|c| c.is_zero()) {
            return Err(EnsembleError::IdenticallyZero { label, n });
        }
        Ok(PolynomialSample {
            n,
            coeffs,
            ensemble_label: label,
            seed: 0,
            trial: 0,
        })
    }

    pub fn from_complex(label: impl Into<String>, coeffs: &[Complex64]) -> Result<Self, EnsembleError> {
        Self::from_coeffs(label, coeffs.iter().map(|&c| ExtComplex::from_complex(c)).collect())
    }

    /// `p(z)` in extended precision.
    pub fn eval_ext(&self, z: ExtComplex) -> ExtComplex {
        self.coeffs
            .iter()
            .rev()
            .fold(ExtComplex::ZERO, |acc, &c| acc * z + c)
    }

    /// The same polynomial with every coefficient multiplied by `c`.
    pub fn scaled(&self, c: ExtComplex) -> Self {
        PolynomialSample {
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
            ..self.clone()
        }
    }

    fn stamped(mut self, seed: u64, trial: u64) -> Self {
        self.seed = seed;
        self.trial = trial;
        self
    }
}

fn check_degree(n: usize) -> Result<(), EnsembleError> {
    if n == 0 {
        Err(EnsembleError::BadDegree("degree must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `sum_j xi_j z^j` with `xi` the first `n + 1` draws of stream `trial`.
pub fn draw_kac(
    n: usize,
    dist: &DistributionSpec,
    seed: u64,
    trial: u64,
) -> Result<PolynomialSample, EnsembleError> {
    check_degree(n)?;
    let xi = sample_stream(dist, seed, trial, n + 1);
    Ok(PolynomialSample::from_coeffs(format!("kac/{}", dist.label()), xi)?.stamped(seed, trial))
}

/// `sum_j xi_j q_j(z)`, expanded to monomial coefficients at draw time.
pub fn draw_ortho(
    n: usize,
    basis: &OrthoBasis,
    dist: &DistributionSpec,
    seed: u64,
    trial: u64,
) -> Result<PolynomialSample, EnsembleError> {
    check_degree(n)?;
    if basis.degree() < n {
        return Err(EnsembleError::BadDegree(format!(
            "basis has degree {} < {n}",
            basis.degree()
        )));
    }
    let xi = sample_stream(dist, seed, trial, n + 1);
    let mut coeffs = vec![ExtComplex::ZERO; n + 1];
    for (j, x) in xi.iter().enumerate() {
        for (i, c) in basis.row(j).iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                coeffs[i] = coeffs[i] + *x * ExtComplex::from_complex(*c);
            }
        }
    }
    Ok(PolynomialSample::from_coeffs(format!("ortho/{}", dist.label()), coeffs)?.stamped(seed, trial))
}

/// `sum_k xi_k f_{n,k} z^k`.
pub fn draw_array(
    n: usize,
    arr: &CoefficientArray,
    dist: &DistributionSpec,
    seed: u64,
    trial: u64,
) -> Result<PolynomialSample, EnsembleError> {
    check_degree(n)?;
    if arr.n() != n {
        return Err(EnsembleError::BadDegree(format!(
            "array has degree {} but {n} was requested",
            arr.n()
        )));
    }
    let xi = sample_stream(dist, seed, trial, n + 1);
    let coeffs = xi
        .into_iter()
        .zip(arr.to_ext())
        .map(|(x, f)| if f.is_zero() { ExtComplex::ZERO } else { x * f })
        .collect();
    Ok(PolynomialSample::from_coeffs(format!("array/{}", dist.label()), coeffs)?.stamped(seed, trial))
}

/// A two-variable polynomial `sum_{i+j<=n} c_{ij} z1^i z2^j`. Coefficients
/// are stored in graded lexicographic order: total degree `m = 0..=n`, and
/// within degree `m` the exponent pairs `(m, 0), (m - 1, 1), ..., (0, m)`.
#[derive(Clone, Debug)]
pub struct PolynomialSample2 {
    pub n: usize,
    pub coeffs: Vec<ExtComplex>,
    pub seed: u64,
    pub trial: u64,
}

impl PolynomialSample2 {
    pub fn len_for(n: usize) -> usize {
        (n + 1) * (n + 2) / 2
    }

    /// Position of `(i, j)` in [`Self::coeffs`].
    pub fn index(i: usize, j: usize) -> usize {
        let m = i + j;
        m * (m + 1) / 2 + j
    }

    pub fn coeff(&self, i: usize, j: usize) -> ExtComplex {
        if i + j > self.n {
            ExtComplex::ZERO
        } else {
            self.coeffs[Self::index(i, j)]
        }
    }

    /// `(i, j, c_ij)` in storage order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, ExtComplex)> + '_ {
        (0..=self.n)
            .flat_map(|m| (0..=m).map(move |j| (m - j, j)))
            .zip(self.coeffs.iter())
            .map(|((i, j), c)| (i, j, *c))
    }

    /// `b_j(z1) = sum_i c_ij z1^i` for `j = 0..=n`.
    pub fn partial_in_z1(&self, z1: ExtComplex) -> Vec<ExtComplex> {
        (0..=self.n)
            .map(|j| {
                (0..=self.n - j)
                    .rev()
                    .fold(ExtComplex::ZERO, |acc, i| acc * z1 + self.coeffs[Self::index(i, j)])
            })
            .collect()
    }
}

/// `sum_{i+j<=n} xi_ij z1^i z2^j` with the draws consumed in storage order.
pub fn draw_kac2(
    n: usize,
    dist: &DistributionSpec,
    seed: u64,
    trial: u64,
) -> Result<PolynomialSample2, EnsembleError> {
    check_degree(n)?;
    let coeffs = sample_stream(dist, seed, trial, PolynomialSample2::len_for(n));
    if coeffs.iter().all(|c| c.is_zero()) {
        return Err(EnsembleError::IdenticallyZero {
            label: format!("kac2/{}", dist.label()),
            n,
        });
    }
    Ok(PolynomialSample2 {
        n,
        coeffs,
        seed,
        trial,
    })
}

/// `log|p(z)|`, or `-inf` when `p(z) = 0` exactly.
///
/// Horner's rule runs on extended-exponent numbers, which is the same as
/// factoring out the largest term and rescaling, so terms spanning thousands
/// of decimal orders are handled.
pub fn log_abs_eval(p: &PolynomialSample, z: Complex64) -> f64 {
    p.eval_ext(ExtComplex::from_complex(z)).ln_abs()
}

/// `log|p(z1, z2)|`, or `-inf` at an exact zero.
pub fn log_abs_eval_2(p: &PolynomialSample2, z1: Complex64, z2: Complex64) -> f64 {
    let z2 = ExtComplex::from_complex(z2);
    p.partial_in_z1(ExtComplex::from_complex(z1))
        .iter()
        .rev()
        .fold(ExtComplex::ZERO, |acc, &b| acc * z2 + b)
        .ln_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{gram_schmidt_basis, profile_array, MeasureSpec};
    use crate::potential::Profile;
    use crate::rngdist::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn to_c(v: &[ExtComplex]) -> Vec<Complex64> {
        v.iter().map(|x| x.to_complex()).collect()
    }

    #[test]
    fn kac_draws_are_the_stream_prefix() {
        let d = DistributionSpec::rademacher();
        let p = draw_kac(1, &d, 3, 9).unwrap();
        let direct = sample_stream(&d, 3, 9, 2);
        assert_eq!(p.coeffs, direct);
        assert!(p.coeffs.iter().all(|x| x.to_complex().norm() == 1.0));
        // the linear root is -c0/c1 and lies on the unit circle
        let root = -(p.coeffs[0] / p.coeffs[1]).to_complex();
        assert_eq!(root.norm(), 1.0);
        let again = draw_kac(1, &d, 3, 9).unwrap();
        assert_eq!(again.coeffs, p.coeffs);
        assert!(draw_kac(0, &d, 3, 9).is_err());
    }

    #[test]
    fn rademacher_linear_with_opposite_signs_has_root_one() {
        let p = PolynomialSample::from_complex("fixed", &[c(1.0, 0.0), c(-1.0, 0.0)]).unwrap();
        assert_eq!(log_abs_eval(&p, c(1.0, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn gaussian_quadratic_roots_satisfy_quadratic_formula() {
        let p = draw_kac(2, &DistributionSpec::gaussian(), 5, 0).unwrap();
        let [a0, a1, a2]: [Complex64; 3] = to_c(&p.coeffs).try_into().unwrap();
        let disc = (a1 * a1 - 4.0 * a2 * a0).sqrt();
        for r in [(-a1 + disc) / (2.0 * a2), (-a1 - disc) / (2.0 * a2)] {
            let scale = a0.norm() + a1.norm() * r.norm() + a2.norm() * r.norm_sqr();
            assert!(log_abs_eval(&p, r) < (1e-13 * scale).ln());
        }
    }

    #[test]
    fn ortho_with_monomials_is_kac() {
        let d = DistributionSpec::gaussian();
        let b = OrthoBasis::monomial(1.0, 10);
        let p = draw_ortho(10, &b, &d, 1, 2).unwrap();
        let k = draw_kac(10, &d, 1, 2).unwrap();
        assert_eq!(p.coeffs, k.coeffs);
    }

    #[test]
    fn ortho_triangular_multiply() {
        // q0 = 1, q1 = sqrt(2) z as a numeric basis: ξ = (1, 1) gives {1, sqrt 2}
        let m = MeasureSpec::interval_arcsine(16);
        let b = gram_schmidt_basis(&m, 1).unwrap();
        let xi = [c(1.0, 0.0), c(1.0, 0.0)];
        let mut coeffs = [c(0.0, 0.0); 2];
        for (j, x) in xi.iter().enumerate() {
            for (i, q) in b.row(j).iter().enumerate() {
                coeffs[i] += x * q;
            }
        }
        assert!((coeffs[0] - 1.0).norm() < 1e-15);
        assert!((coeffs[1] - std::f64::consts::SQRT_2).norm() < 1e-15);
    }

    #[test]
    fn ortho_matches_direct_basis_sum() {
        // oracle: sum of xi_j q_j(z) with q_j from the Chebyshev recurrence
        let d = DistributionSpec::gaussian();
        let mut rng = stream_rng(99, 0);
        for n in [8usize, 64, 256] {
            let b = OrthoBasis::chebyshev(n);
            let p = draw_ortho(n, &b, &d, 4, 0).unwrap();
            let xi = to_c(&sample_stream(&d, 4, 0, n + 1));
            for _ in 0..10 {
                // off the interval, where the monomial expansion does not cancel
                let z = Complex64::from_polar(rng.random_range(3.0..10.0), rng.random_range(0.0..6.3));
                let q = b.eval_all_ext(z);
                let direct = xi
                    .iter()
                    .zip(&q)
                    .fold(ExtComplex::ZERO, |acc, (x, qj)| acc + ExtComplex::from_complex(*x) * *qj);
                assert!((log_abs_eval(&p, z) - direct.ln_abs()).abs() < 1e-9, "n={n} z={z}");
            }
        }
        let b = OrthoBasis::chebyshev(8);
        let p = draw_ortho(8, &b, &d, 4, 1).unwrap();
        let xi = to_c(&sample_stream(&d, 4, 1, 9));
        for _ in 0..5 {
            let z = c(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
            let direct: Complex64 = xi.iter().zip(b.eval_all(z)).map(|(x, q)| x * q).sum();
            let got = p.eval_ext(ExtComplex::from_complex(z)).to_complex();
            assert!((got - direct).norm() < 1e-10 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn array_draws() {
        let d = DistributionSpec::gaussian();
        let ones = CoefficientArray::kac(12);
        assert_eq!(
            draw_array(12, &ones, &d, 8, 3).unwrap().coeffs,
            draw_kac(12, &d, 8, 3).unwrap().coeffs
        );
        let sparse = CoefficientArray::explicit(&[1.0, 0.0, 1.0]).unwrap();
        let p = draw_array(2, &sparse, &d, 0, 0).unwrap();
        assert!(p.coeffs[1].is_zero());
        let fixed = PolynomialSample::from_complex("z^2+1", &[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(log_abs_eval(&fixed, c(0.0, 1.0)), f64::NEG_INFINITY);
        assert_eq!(log_abs_eval(&fixed, c(0.0, -1.0)), f64::NEG_INFINITY);
        assert!(draw_array(3, &sparse, &d, 0, 0).is_err());
    }

    #[test]
    fn elliptic_array_matches_term_products() {
        let d = DistributionSpec::gaussian();
        let arr = profile_array(&Profile::entropy(), 100);
        let p = draw_array(100, &arr, &d, 12, 0).unwrap();
        let xi = to_c(&sample_stream(&d, 12, 0, 101));
        for z in [c(0.3, 0.1), c(1.0, 0.0), c(-0.7, 0.7), c(2.0, -1.0), c(0.0, 5.0)] {
            // per-term oracle: xi_k f(k/n)^n z^k summed in f64
            let direct: Complex64 = (0..=100)
                .map(|k| xi[k] * arr.f(k) * z.powu(k as u32))
                .sum();
            assert!((log_abs_eval(&p, z) - direct.norm().ln()).abs() < 1e-9, "{z}");
        }
    }

    #[test]
    fn kac2_layout() {
        let d = DistributionSpec::gaussian();
        let p = draw_kac2(1, &d, 0, 0).unwrap();
        assert_eq!(p.coeffs.len(), 3);
        let q = draw_kac2(7, &d, 2, 5).unwrap();
        assert_eq!(q.coeffs.len(), 36);
        let sum = q.coeffs.iter().fold(ExtComplex::ZERO, |a, &b| a + b);
        assert!((log_abs_eval_2(&q, c(1.0, 0.0), c(1.0, 0.0)) - sum.ln_abs()).abs() < 1e-12);
        let order: Vec<(usize, usize)> = q.terms().map(|(i, j, _)| (i, j)).take(6).collect();
        assert_eq!(order, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for (k, (i, j, _)) in q.terms().enumerate() {
            assert_eq!(PolynomialSample2::index(i, j), k);
        }
        // direct double sum
        let (z1, z2) = (c(0.4, -0.9), c(1.1, 0.2));
        let direct: Complex64 = q
            .terms()
            .map(|(i, j, cij)| cij.to_complex() * z1.powu(i as u32) * z2.powu(j as u32))
            .sum();
        assert!((log_abs_eval_2(&q, z1, z2) - direct.norm().ln()).abs() < 1e-12);
        let again = draw_kac2(7, &d, 2, 5).unwrap();
        assert_eq!(again.coeffs, q.coeffs);
    }

    #[test]
    fn log_eval_examples() {
        let mut v = vec![c(0.0, 0.0); 11];
        v[0] = c(1.0, 0.0);
        v[10] = c(1.0, 0.0);
        let p = PolynomialSample::from_complex("1+z^n", &v).unwrap();
        assert_eq!(log_abs_eval(&p, c(0.0, 0.0)), 0.0);
        let wide = PolynomialSample::from_coeffs(
            "wide",
            vec![ExtComplex::from_polar_ln(300.0, 0.0), ExtComplex::from_polar_ln(-300.0, 0.0)],
        )
        .unwrap();
        // log(e^300 + e^-300) = 300 + log1p(e^-600)
        let expect = 300.0 + (-600f64).exp().ln_1p();
        assert!((log_abs_eval(&wide, c(1.0, 0.0)) - expect).abs() < 1e-12);
        // terms spanning far more than 600 orders
        let huge = PolynomialSample::from_coeffs(
            "huge",
            vec![ExtComplex::from_polar_ln(5000.0, 0.0), ExtComplex::from_polar_ln(-5000.0, 0.0)],
        )
        .unwrap();
        assert!((log_abs_eval(&huge, c(1.0, 0.0)) - 5000.0).abs() < 1e-9);
        assert!((log_abs_eval(&huge, c(1e300, 0.0)) - (5000.0f64).max(-5000.0 + 300.0 * 10f64.ln())).abs() < 1e-9);
        assert!(PolynomialSample::from_complex("zero", &[c(0.0, 0.0); 3]).is_err());
    }

    proptest! {
        #[test]
        fn consecutive_trials_use_distinct_streams(seed in any::<u64>(), trial in 0u64..1_000_000) {
            let d = DistributionSpec::gaussian();
            let a = draw_kac(16, &d, seed, trial).unwrap();
            let b = draw_kac(16, &d, seed, trial + 1).unwrap();
            prop_assert!(a.coeffs.iter().zip(&b.coeffs).all(|(x, y)| x != y));
        }

        #[test]
        fn scaling_shifts_log_modulus(ln_c in -600.0f64..600.0, re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let d = DistributionSpec::gaussian();
            let p = draw_kac(20, &d, 1, 1).unwrap();
            let q = p.scaled(ExtComplex::from_polar_ln(ln_c, 0.3));
            let z = c(re, im);
            let diff = log_abs_eval(&q, z) - log_abs_eval(&p, z) - ln_c;
            prop_assert!(diff.abs() < 1e-9);
        }
    }
}
