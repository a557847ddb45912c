//! Oracles shared by the integration tests. Written without the library's
//! root finder or potential code so they can check it.

#![allow(dead_code)]

use num_complex::Complex64;

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn newton(c: &[Complex64], mut z: Complex64, steps: usize) -> Option<Complex64> {
    for _ in 0..steps {
        let (p, dp) = horner(c, z);
        if p.norm() == 0.0 {
            return Some(z);
        }
        if dp.norm() == 0.0 {
            return None;
        }
        let dz = p / dp;
        z -= dz;
        if !z.is_finite() {
            return None;
        }
        if dz.norm() <= 1e-15 * z.norm().max(1e-300) {
            return Some(z);
        }
    }
    let (p, _) = horner(c, z);
    let scale: f64 = c.iter().map(|a| a.norm()).sum::<f64>() * z.norm().max(1.0).powi(c.len() as i32);
    (p.norm() <= 1e-10 * scale).then_some(z)
}

/// Roots of `sum c_k z^k` (ascending, nonzero leading term) by Newton from a
/// ring of starting points, deflating after each root and polishing on the
/// undeflated polynomial.
pub fn newton_deflation_roots(c: &[Complex64]) -> Vec<Complex64> {
    let mut q: Vec<Complex64> = c.to_vec();
    let mut roots = Vec::new();
    while q.len() > 1 {
        let m = q.len() - 1;
        let lead = q[m].norm();
        let bound = 1.0 + q[..m].iter().map(|a| a.norm() / lead).fold(0.0, f64::max);
        let mut found = None;
        'starts: for ring in [0.5, 1.0, 0.25] {
            for k in 0..24 {
                let start = Complex64::from_polar(ring * bound, 0.4 + k as f64 * std::f64::consts::TAU / 24.0);
                if let Some(z) = newton(&q, start, 500) {
                    found = Some(z);
                    break 'starts;
                }
            }
        }
        let z = found.expect("multistart Newton converged");
        let z = newton(c, z, 50).unwrap_or(z);
        roots.push(z);
        // synthetic division by (x - z)
        let mut next = vec![Complex64::new(0.0, 0.0); m];
        let mut carry = q[m];
        for k in (0..m).rev() {
            next[k] = carry;
            carry = q[k] + carry * z;
        }
        q = next;
    }
    roots
}

pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_sided = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// `ln C(n, k)` by summing logarithms.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}

/// `sup_t (t s + g(t))` on `[0, 1]` by dense sampling then golden section.
pub fn legendre_sup(g: impl Fn(f64) -> f64, s: f64) -> (f64, f64) {
    let h = |t: f64| t * s + g(t);
    let grid = 2000;
    let mut best = 0usize;
    for i in 0..=grid {
        if h(i as f64 / grid as f64) > h(best as f64 / grid as f64) {
            best = i;
        }
    }
    let mut lo = (best.saturating_sub(1)) as f64 / grid as f64;
    let mut hi = ((best + 1).min(grid)) as f64 / grid as f64;
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if h(a) < h(b) {
            lo = a;
        } else {
            hi = b;
        }
    }
    let t = 0.5 * (lo + hi);
    (h(t), t)
}

/// Prints the verdict line for one acceptance criterion.
pub fn verdict(id: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {id}: {} | {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
