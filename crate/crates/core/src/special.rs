//! Small special-function toolkit: factorials, binomials, Jacobi and
//! generalized Laguerre polynomials.
//!
//! Degrees needed here stay below ~30, so everything is plain `f64`.

/// `n!` as a float. Exact up to `22!`, correctly rounded beyond.
pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Jacobi polynomial `P_n^{(a,b)}(x)` for integer parameters with
/// `n + a >= 0` and `n + b >= 0`.
///
/// Uses the finite sum
/// `P_n^{(a,b)}(x) = Σ_s C(n+a, n-s) C(n+b, s) ((x-1)/2)^s ((x+1)/2)^{n-s}`,
/// which stays well defined when `a` or `b` is negative. The three-term
/// recurrence divides by `n + a + b`, which vanishes for the parameter
/// combinations the beamsplitter needs.
pub fn jacobi(n: usize, a: i64, b: i64, x: f64) -> f64 {
    let na = n as i64 + a;
    let nb = n as i64 + b;
    assert!(
        na >= 0 && nb >= 0,
        "jacobi: n + a and n + b must be non-negative (n={n}, a={a}, b={b})"
    );
    let (na, nb) = (na as usize, nb as usize);
    let lo = (x - 1.0) / 2.0;
    let hi = (x + 1.0) / 2.0;
    (0..=n)
        .map(|s| binomial(na, n - s) * binomial(nb, s) * lo.powi(s as i32) * hi.powi((n - s) as i32))
        .sum()
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by upward recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Iterator over `w^n L_n^{(alpha)}(z)` for `n = 0, 1, 2, ...`, given the
/// weight `w` and the product `w * z`.
///
/// Scaling the Laguerre recurrence by `w^n` keeps every term finite when `z`
/// diverges but `w * z` does not, which is exactly the situation for the
/// amplifier series as the gain approaches one (`w -> 0`, `z -> -inf`).
#[derive(Debug, Clone)]
pub struct ScaledLaguerre {
    alpha: f64,
    weight: f64,
    weight_times_arg: f64,
    n: usize,
    prev: f64,
    cur: f64,
}

impl ScaledLaguerre {
    pub fn new(alpha: f64, weight: f64, weight_times_arg: f64) -> Self {
        Self {
            alpha,
            weight,
            weight_times_arg,
            n: 0,
            prev: 0.0,
            cur: 1.0,
        }
    }
}

impl Iterator for ScaledLaguerre {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        let out = self.cur;
        let k = self.n as f64;
        let (w, wz, a) = (self.weight, self.weight_times_arg, self.alpha);
        // w^{k+1} L_{k+1} = [((2k+1+a) w - w z) w^k L_k - (k+a) w^2 w^{k-1} L_{k-1}] / (k+1)
        let next = if self.n == 0 {
            (1.0 + a) * w - wz
        } else {
            (((2.0 * k + 1.0 + a) * w - wz) * self.cur - (k + a) * w * w * self.prev) / (k + 1.0)
        };
        self.prev = self.cur;
        self.cur = next;
        self.n += 1;
        Some(out)
    }
}
