//! All complex zeros of a one-variable polynomial.
//!
//! Ehrlich-Aberth simultaneous iteration started from the Newton polygon of
//! the coefficient moduli. Coefficients and iterates are extended-exponent
//! numbers, so heavy-tailed draws whose coefficients span thousands of
//! decimal orders are handled; plain `f64` arithmetic is used whenever the
//! data fit.

use num_complex::Complex64;
use thiserror::Error;

use crate::ensembles::PolynomialSample;
use crate::ext::ExtComplex;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 200;
/// Accepted roots satisfy `|p(r)| <= RESIDUAL_CERT * sum_k |c_k| |r|^k`.
pub const RESIDUAL_CERT: f64 = 1e-8;
/// Leading and trailing coefficients below this fraction of the largest
/// modulus are treated as zero.
pub const TRIM_RELATIVE: f64 = 1e-300;

/// Coefficients within `e^600` of the largest one fit `f64` after scaling.
const FAST_COEFF_RANGE: f64 = 600.0;
/// Roots with `|log|z|| <= 300` keep Aberth sums inside `f64`.
const FAST_ROOT_RANGE: f64 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("polynomial is identically zero")]
    IdenticallyZero,
    #[error(
        "no convergence after {iterations} iterations: {failed} of {degree} roots fail the \
         residual check (worst {max_residual:.3e})"
    )]
    NoConvergence {
        iterations: usize,
        degree: usize,
        failed: usize,
        max_residual: f64,
        roots: Vec<Complex64>,
        residuals: Vec<f64>,
    },
}

/// Zeros of a sample, with the degree accounting used by the statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct RootSet {
    /// Includes one exact zero per trimmed trailing coefficient.
    pub roots: Vec<Complex64>,
    /// `n - dropped_leading`; equals `roots.len()`.
    pub realized_degree: usize,
    pub dropped_leading: usize,
    /// `|p(r)| / sum_k |c_k| |r|^k` per root.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

impl RootSet {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Mass carried by each found root in the normalized zero-counting measure.
/// Roots lost to leading trims carry none, so the total is
/// `realized_degree / nominal_n`.
pub fn root_statistic_degree_policy(_rs: &RootSet, nominal_n: usize) -> f64 {
    if nominal_n == 0 {
        0.0
    } else {
        1.0 / nominal_n as f64
    }
}

/// Finds all roots with the default tolerance and iteration cap.
pub fn find_roots_default(p: &PolynomialSample) -> Result<RootSet, RootError> {
    find_roots(p, DEFAULT_TOL, DEFAULT_MAX_ITER)
}

pub fn find_roots(p: &PolynomialSample, tol: f64, max_iter: usize) -> Result<RootSet, RootError> {
    let top = p
        .coeffs
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| c.ln_abs())
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(RootError::IdenticallyZero);
    }
    let floor = top + TRIM_RELATIVE.ln();
    let negligible = |c: &ExtComplex| c.is_zero() || c.ln_abs() < floor;
    let n = p.coeffs.len() - 1;
    let hi = p.coeffs.iter().rposition(|c| !negligible(c)).unwrap();
    let lo = p.coeffs.iter().position(|c| !negligible(c)).unwrap();
    let dropped_leading = n - hi;
    let zero_roots = lo;

    let mut roots = vec![Complex64::new(0.0, 0.0); zero_roots];
    let mut residuals = vec![0.0; zero_roots];
    let mut iterations = 0;
    if hi > lo {
        let shift = -p.coeffs[lo..=hi]
            .iter()
            .filter(|c| !c.is_zero())
            .map(|c| c.exponent())
            .fold(f64::NEG_INFINITY, f64::max);
        let coeffs: Vec<ExtComplex> = p.coeffs[lo..=hi].iter().map(|c| c.scale_pow2(shift)).collect();
        let poly = Poly::new(coeffs);
        let solved = poly.aberth(tol, max_iter);
        iterations = solved.iterations;
        roots.extend(solved.roots.iter().map(|z| z.to_complex_saturating()));
        residuals.extend(solved.residuals);
    }
    let failed = residuals
        .iter()
        .zip(&roots)
        .filter(|(r, z)| !(**r <= RESIDUAL_CERT) || !z.is_finite())
        .count();
    if failed > 0 {
        return Err(RootError::NoConvergence {
            iterations,
            degree: hi,
            failed,
            max_residual: residuals.iter().copied().fold(0.0, f64::max),
            roots,
            residuals,
        });
    }
    Ok(RootSet {
        realized_degree: roots.len(),
        roots,
        dropped_leading,
        residuals,
        iterations,
    })
}

/// `p(z) = num / den` form of a Newton correction plus the residual ratio.
struct Eval {
    num: ExtComplex,
    den: ExtComplex,
    resid: f64,
}

struct Solved {
    roots: Vec<ExtComplex>,
    residuals: Vec<f64>,
    iterations: usize,
}

/// A polynomial with nonzero constant and leading terms.
struct Poly {
    c: Vec<ExtComplex>,
    fast: Option<Vec<Complex64>>,
}

impl Poly {
    fn new(c: Vec<ExtComplex>) -> Self {
        let top = c
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| x.ln_abs())
            .fold(f64::NEG_INFINITY, f64::max);
        let fits = c
            .iter()
            .all(|x| x.is_zero() || x.ln_abs() >= top - FAST_COEFF_RANGE);
        let fast = fits.then(|| c.iter().map(|x| x.to_complex()).collect());
        Poly { c, fast }
    }

    fn degree(&self) -> usize {
        self.c.len() - 1
    }

    fn eval(&self, z: ExtComplex) -> Eval {
        if let Some(fc) = &self.fast {
            let lz = z.ln_abs();
            if lz.abs() <= 650.0 {
                return eval_fast(fc, z.to_complex(), lz <= 0.0);
            }
        }
        self.eval_ext(z)
    }

    fn eval_ext(&self, z: ExtComplex) -> Eval {
        let az = z.abs();
        let mut p = ExtComplex::ZERO;
        let mut dp = ExtComplex::ZERO;
        let mut s = ExtComplex::ZERO;
        for c in self.c.iter().rev() {
            dp = dp * z + p;
            p = p * z + *c;
            s = s * az + c.abs();
        }
        let resid = if p.is_zero() {
            0.0
        } else {
            (p.ln_abs() - s.ln_abs()).exp()
        };
        Eval { num: p, den: dp, resid }
    }

    /// Upper convex hull of `(k, log|c_k|)`; each edge of horizontal length
    /// `d` puts `d` starting points on the circle its slope predicts.
    fn initial_guesses(&self) -> Vec<ExtComplex> {
        let m = self.degree();
        let pts: Vec<(f64, f64)> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (k as f64, c.ln_abs()))
            .collect();
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for &pt in &pts {
            while hull.len() >= 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(pt);
        }
        let mut guesses = Vec::with_capacity(m);
        let sigma = 0.7;
        for w in hull.windows(2) {
            let (a, b) = (w[0], w[1]);
            let count = (b.0 - a.0) as usize;
            let ln_rho = (a.1 - b.1) / (b.0 - a.0);
            for j in 0..count {
                let theta = std::f64::consts::TAU * (j as f64 / count as f64 + a.0 / m as f64) + sigma;
                guesses.push(ExtComplex::from_polar_ln(ln_rho, theta));
            }
        }
        guesses
    }

    fn aberth(&self, tol: f64, max_iter: usize) -> Solved {
        let m = self.degree();
        let mut z = self.initial_guesses();
        let mut zc: Vec<Complex64> = z.iter().map(|x| x.to_complex()).collect();
        let mut done = vec![false; m];
        let mut resid = vec![f64::INFINITY; m];
        // rounding floor for Horner: further corrections are noise
        let noise = 4.0 * (m + 1) as f64 * f64::EPSILON;
        let mut iterations = 0;
        while iterations < max_iter && done.iter().any(|d| !d) {
            iterations += 1;
            let mut fast_sums = z.iter().all(|x| x.ln_abs().abs() <= FAST_ROOT_RANGE);
            for i in 0..m {
                if done[i] {
                    continue;
                }
                let e = self.eval(z[i]);
                resid[i] = e.resid;
                if e.num.is_zero() || e.resid <= noise {
                    done[i] = true;
                    continue;
                }
                let s = if fast_sums {
                    let zi = zc[i];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, zj) in zc.iter().enumerate() {
                        if j != i {
                            acc += (zi - zj).inv();
                        }
                    }
                    ExtComplex::from_complex(acc)
                } else {
                    let zi = z[i];
                    let mut acc = ExtComplex::ZERO;
                    for (j, zj) in z.iter().enumerate() {
                        if j != i {
                            acc = acc + (zi - *zj).recip();
                        }
                    }
                    acc
                };
                let denom = e.den - e.num * s;
                if denom.is_zero() {
                    continue;
                }
                let step = e.num / denom;
                let next = z[i] - step;
                if !next.ln_abs().is_finite() && !next.is_zero() {
                    continue;
                }
                if step.is_zero() || step.ln_abs() <= tol.ln() + z[i].ln_abs() {
                    done[i] = true;
                }
                z[i] = next;
                zc[i] = next.to_complex();
                if fast_sums && next.ln_abs().abs() > FAST_ROOT_RANGE {
                    fast_sums = false;
                }
            }
        }
        // two Newton steps per root, each kept only if the residual drops
        for i in 0..m {
            let mut e = self.eval(z[i]);
            for _ in 0..2 {
                if e.num.is_zero() || e.den.is_zero() {
                    break;
                }
                let cand = z[i] - e.num / e.den;
                let ec = self.eval(cand);
                if ec.resid < e.resid {
                    z[i] = cand;
                    e = ec;
                } else {
                    break;
                }
            }
            resid[i] = e.resid;
        }
        Solved {
            roots: z,
            residuals: resid,
            iterations,
        }
    }
}

/// `1/z` without squaring the modulus, which overflows past `1e154`.
fn safe_inv(z: Complex64) -> Complex64 {
    let s = z.re.abs().max(z.im.abs());
    (z / s).inv() / s
}

/// Horner in `f64`: forward for `|z| <= 1`, on the reversed polynomial in
/// `w = 1/z` otherwise, so no partial sum exceeds the coefficient scale.
fn eval_fast(c: &[Complex64], z: Complex64, inside: bool) -> Eval {
    let m = c.len() - 1;
    if inside {
        let az = z.norm();
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for ck in c.iter().rev() {
            dp = dp * z + p;
            p = p * z + ck;
            s = s * az + ck.norm();
        }
        Eval {
            num: ExtComplex::from_complex(p),
            den: ExtComplex::from_complex(dp),
            resid: p.norm() / s,
        }
    } else {
        // p(z) = z^m q(w), p'(z) = z^{m-1} (m q - w q'), p/p' = z q / (m q - w q')
        let w = safe_inv(z);
        let aw = w.norm();
        let mut q = Complex64::new(0.0, 0.0);
        let mut dq = Complex64::new(0.0, 0.0);
        let mut s = 0.0;
        for ck in c.iter() {
            dq = dq * w + q;
            q = q * w + ck;
            s = s * aw + ck.norm();
        }
        Eval {
            num: ExtComplex::from_complex(z * q),
            den: ExtComplex::from_complex(m as f64 * q - w * dq),
            resid: q.norm() / s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::draw_kac;
    use crate::rngdist::DistributionSpec;
    use proptest::prelude::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[Complex64]) -> PolynomialSample {
        PolynomialSample::from_complex("test", coeffs).unwrap()
    }

    fn unity(n: usize) -> PolynomialSample {
        let mut v = vec![c(0.0, 0.0); n + 1];
        v[0] = c(-1.0, 0.0);
        v[n] = c(1.0, 0.0);
        poly(&v)
    }

    /// Every `a` has a distinct partner in `b` within `tol`, greedily.
    fn match_multisets(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
        let mut used = vec![false; b.len()];
        a.len() == b.len()
            && a.iter().all(|x| {
                let best = (0..b.len())
                    .filter(|&j| !used[j])
                    .min_by(|&i, &j| (b[i] - x).norm().total_cmp(&(b[j] - x).norm()));
                match best {
                    Some(j) if (b[j] - x).norm() <= tol => {
                        used[j] = true;
                        true
                    }
                    _ => false,
                }
            })
    }

    #[test]
    fn roots_of_unity() {
        for n in [1usize, 2, 8, 64, 512] {
            let rs = find_roots_default(&unity(n)).unwrap();
            assert_eq!(rs.roots.len(), n);
            let exact: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64)).collect();
            assert!(match_multisets(&rs.roots, &exact, 1e-10), "n={n}");
        }
    }

    #[test]
    fn trailing_zeros_become_zero_roots() {
        let rs = find_roots_default(&poly(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(rs.realized_degree, 3);
        assert_eq!(rs.dropped_leading, 0);
        assert!(match_multisets(&rs.roots, &[c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)], 1e-14));
    }

    #[test]
    fn leading_trims_reduce_realized_degree() {
        let rs = find_roots_default(&poly(&[c(1.0, 0.0), c(1.0, 0.0), c(1e-320, 0.0), c(0.0, 0.0)])).unwrap();
        assert_eq!(rs.dropped_leading, 2);
        assert_eq!(rs.realized_degree, 1);
        assert!((rs.roots[0] + 1.0).norm() < 1e-15);
        assert_eq!(root_statistic_degree_policy(&rs, 3), 1.0 / 3.0);
        let single = find_roots_default(&poly(&[c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)])).unwrap();
        assert_eq!(single.roots, vec![c(0.0, 0.0); 2]);
        assert_eq!(
            find_roots_default(&PolynomialSample {
                coeffs: vec![ExtComplex::ZERO; 3],
                ..poly(&[c(1.0, 0.0)])
            }),
            Err(RootError::IdenticallyZero)
        );
    }

    #[test]
    fn quadratic_formula_and_imaginary_pair() {
        let rs = find_roots_default(&poly(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(match_multisets(&rs.roots, &[c(0.0, 1.0), c(0.0, -1.0)], 1e-14));
        let p = draw_kac(2, &DistributionSpec::gaussian(), 17, 4).unwrap();
        let a: Vec<Complex64> = p.coeffs.iter().map(|x| x.to_complex()).collect();
        let disc = (a[1] * a[1] - 4.0 * a[2] * a[0]).sqrt();
        let exact = [(-a[1] + disc) / (2.0 * a[2]), (-a[1] - disc) / (2.0 * a[2])];
        let rs = find_roots_default(&p).unwrap();
        assert!(match_multisets(&rs.roots, &exact, 1e-12));
    }

    #[test]
    fn double_root_is_accepted() {
        // (z - 1)^2 (z + 1) = z^3 - z^2 - z + 1
        let rs = find_roots_default(&poly(&[c(1.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!(match_multisets(&rs.roots, &[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)], 1e-7));
    }

    #[test]
    fn heavy_tailed_coefficients_spanning_thousands_of_orders() {
        // (z - a)(z - b) with a = e^-650, b = e^650: coefficients ab = 1,
        // -(a + b) ~ -e^650, 1
        let coeffs = vec![
            ExtComplex::ONE,
            -ExtComplex::from_polar_ln(650.0, 0.0),
            ExtComplex::ONE,
        ];
        let p = PolynomialSample::from_coeffs("wide", coeffs).unwrap();
        let rs = find_roots_default(&p).unwrap();
        let mut logs: Vec<f64> = rs.roots.iter().map(|z| z.norm().ln()).collect();
        logs.sort_by(f64::total_cmp);
        assert!((logs[0] + 650.0).abs() < 1e-9 && (logs[1] - 650.0).abs() < 1e-9);
        assert!(rs.max_residual() <= RESIDUAL_CERT);

        // beyond 1e-300 relative the outer coefficients are numerically zero
        let coeffs = vec![
            ExtComplex::ONE,
            -ExtComplex::from_polar_ln(2000.0, 0.0),
            ExtComplex::ONE,
        ];
        let rs = find_roots_default(&PolynomialSample::from_coeffs("trimmed", coeffs).unwrap()).unwrap();
        assert_eq!((rs.realized_degree, rs.dropped_leading), (1, 1));
        assert_eq!(rs.roots, vec![c(0.0, 0.0)]);

        // the widest gap the trim rule allows
        let coeffs = vec![
            ExtComplex::from_polar_ln(-690.0, 0.0),
            -ExtComplex::ONE,
            ExtComplex::from_polar_ln(-690.0, 0.0),
        ];
        let rs = find_roots_default(&PolynomialSample::from_coeffs("edge", coeffs).unwrap()).unwrap();
        let mut logs: Vec<f64> = rs.roots.iter().map(|z| z.norm().ln()).collect();
        logs.sort_by(f64::total_cmp);
        assert!((logs[0] + 690.0).abs() < 1e-9 && (logs[1] - 690.0).abs() < 1e-9);

        let d = DistributionSpec::log_pareto(0.5).unwrap();
        for t in 0..20 {
            let p = draw_kac(256, &d, 3, t).unwrap();
            let rs = find_roots_default(&p).unwrap();
            assert_eq!(rs.realized_degree + rs.dropped_leading, 256);
        }
    }

    #[test]
    fn residual_certificate_from_independent_evaluation() {
        let d = DistributionSpec::gaussian();
        for t in 0..5 {
            let p = draw_kac(300, &d, 21, t).unwrap();
            let rs = find_roots_default(&p).unwrap();
            for r in &rs.roots {
                let z = ExtComplex::from_complex(*r);
                let val = p.eval_ext(z);
                let scale = p
                    .coeffs
                    .iter()
                    .rev()
                    .fold(ExtComplex::ZERO, |acc, c| acc * z.abs() + c.abs());
                assert!(val.ln_abs() - scale.ln_abs() <= RESIDUAL_CERT.ln());
            }
        }
    }

    #[test]
    fn no_convergence_is_reported() {
        let p = draw_kac(64, &DistributionSpec::gaussian(), 2, 2).unwrap();
        match find_roots(&p, 1e-10, 0) {
            Err(RootError::NoConvergence { failed, roots, .. }) => {
                assert!(failed > 0);
                assert_eq!(roots.len(), 64);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn scaling_leaves_roots_unchanged(seed in 0u64..1000, ln_c in -600.0f64..600.0, phase in 0.0f64..6.0) {
            let p = draw_kac(40, &DistributionSpec::gaussian(), seed, 0).unwrap();
            let q = p.scaled(ExtComplex::from_polar_ln(ln_c, phase));
            let a = find_roots_default(&p).unwrap();
            let b = find_roots_default(&q).unwrap();
            prop_assert!(match_multisets(&a.roots, &b.roots, 1e-9));
        }

        #[test]
        fn degree_accounting(seed in 0u64..1000, zeros_lo in 0usize..4, zeros_hi in 0usize..4) {
            let p = draw_kac(12, &DistributionSpec::gaussian(), seed, 1).unwrap();
            let mut coeffs = vec![ExtComplex::ZERO; zeros_lo];
            coeffs.extend(p.coeffs.iter().copied());
            coeffs.extend(std::iter::repeat_n(ExtComplex::ZERO, zeros_hi));
            let n = coeffs.len() - 1;
            let q = PolynomialSample::from_coeffs("padded", coeffs).unwrap();
            let rs = find_roots_default(&q).unwrap();
            prop_assert_eq!(rs.realized_degree + rs.dropped_leading, n);
            prop_assert_eq!(rs.roots.len(), rs.realized_degree);
            prop_assert_eq!(rs.dropped_leading, zeros_hi);
            prop_assert_eq!(rs.roots.iter().filter(|z| z.norm() == 0.0).count(), zeros_lo);
        }
    }
}
