//! Small numerical helpers shared across modules: compensated summation and
//! real-root isolation for polynomials on an interval.

/// Neumaier-compensated accumulator. Sums are evaluated sequentially in slice
/// order, so parallel producers must collect before reducing.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of a slice, in index order.
pub fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Horner evaluation of `a[0] + a[1] x + ... + a[n] x^n`.
#[inline]
pub fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

fn trim(coeffs: &[f64]) -> &[f64] {
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1] == 0.0 {
        n -= 1;
    }
    &coeffs[..n]
}

/// Points in `(lo, hi)` where the polynomial changes between negative and
/// non-negative, sorted ascending. Roots of even multiplicity are not
/// reported: they do not bound the region `{P < 0}`.
///
/// Isolation recurses on the derivative, so every returned root is found by
/// bisection on an interval where the polynomial is monotone.
pub fn sign_change_roots(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(coeffs);
    if c.len() < 2 || !(lo < hi) {
        return Vec::new();
    }
    if c.len() == 2 {
        let r = -c[0] / c[1];
        return if r > lo && r < hi { vec![r] } else { Vec::new() };
    }
    let crit = sign_change_roots(&poly_derivative(c), lo, hi);
    let mut breaks = Vec::with_capacity(crit.len() + 2);
    breaks.push(lo);
    breaks.extend(crit);
    breaks.push(hi);

    let neg = |x: f64| poly_eval(c, x) < 0.0;
    let mut roots = Vec::new();
    for w in breaks.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let na = neg(a);
        if na == neg(b) {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if neg(m) == na {
                a = m;
            } else {
                b = m;
            }
        }
        let r = 0.5 * (a + b);
        if r > lo && r < hi {
            roots.push(r);
        }
    }
    roots
}

/// Coefficients (ascending) of the monic polynomial with the given roots.
pub fn poly_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (k, &a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= r * a;
        }
        c = next;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1e16, 1.0, -1e16];
        v.extend(std::iter::repeat_n(1e-3, 1000));
        assert!((compensated_sum(&v) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn roots_of_product_polynomial() {
        let roots = [-0.7, -0.1, 0.25, 0.9];
        let c = poly_from_roots(&roots);
        let found = sign_change_roots(&c, -1.0, 1.0);
        assert_eq!(found.len(), 4);
        for (a, b) in found.iter().zip(roots.iter()) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn double_root_is_not_a_boundary() {
        // (x - 0.3)^2 (x + 0.5)
        let c = poly_from_roots(&[0.3, 0.3, -0.5]);
        let found = sign_change_roots(&c, -1.0, 1.0);
        assert_eq!(found.len(), 1);
        assert!((found[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn roots_outside_interval_are_dropped() {
        let c = poly_from_roots(&[-3.0, 0.5, 4.0]);
        assert_eq!(sign_change_roots(&c, -1.0, 1.0).len(), 1);
    }
}
