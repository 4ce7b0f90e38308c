//! Shared numeric helpers: the `e(s) = exp(2πis)` phase convention,
//! deterministic summation, and a small seedable generator for
//! reproducible sampling in verification suites.

use num_complex::Complex64;

/// `e(t) = exp(2πit)`.
///
/// Evaluated through `|t|` so that `e2pi(-t)` is bitwise the complex
/// conjugate of `e2pi(t)`; several exactness tests rely on this.
pub fn e2pi(t: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * t.abs()).sin_cos();
    Complex64::new(c, if t.is_sign_negative() { -s } else { s })
}

/// Pairwise (tree) summation in slice order. Deterministic for a fixed
/// input order and better conditioned than a running sum.
pub fn pairwise_sum<T, F>(items: &[T], zero: T, add: &F) -> T
where
    T: Clone,
    F: Fn(&T, &T) -> T,
{
    match items.len() {
        0 => zero,
        1 => items[0].clone(),
        len => {
            let mid = len / 2;
            let left = pairwise_sum(&items[..mid], zero.clone(), add);
            let right = pairwise_sum(&items[mid..], zero, add);
            add(&left, &right)
        }
    }
}

/// Pairwise sum of `f64` values in slice order.
pub fn pairwise_sum_f64(items: &[f64]) -> f64 {
    pairwise_sum(items, 0.0, &|a: &f64, b: &f64| a + b)
}

/// Pairwise sum of complex values in slice order.
pub fn pairwise_sum_c64(items: &[Complex64]) -> Complex64 {
    pairwise_sum(items, Complex64::new(0.0, 0.0), &|a, b| a + b)
}

/// A total order on complex values by raw bit pattern.
///
/// Used to canonicalize the order of floating-point accumulations: two
/// multisets of bitwise-equal contributions sum to bitwise-equal results
/// regardless of how they were produced.
pub fn bit_key(z: &Complex64) -> (u64, u64) {
    (z.re.to_bits(), z.im.to_bits())
}

/// Sum complex contributions in bit-pattern order.
pub fn sum_canonical(mut items: Vec<Complex64>) -> Complex64 {
    items.sort_by_key(bit_key);
    pairwise_sum_c64(&items)
}

/// xorshift64* generator. Deterministic across platforms; used wherever a
/// suite needs "random" samples that must be reproducible byte for byte.
#[derive(Clone, Debug)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed.max(1) }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [-a, a).
    pub fn symmetric(&mut self, a: f64) -> f64 {
        a * (2.0 * self.unit() - 1.0)
    }

    /// Uniform integer in [lo, hi] inclusive.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn complex_unit_box(&mut self) -> Complex64 {
        Complex64::new(self.symmetric(1.0), self.symmetric(1.0))
    }
}

/// All multi-indices j ∈ ℕ^dim with |j| ≤ max_total, in lexicographic order.
pub fn multi_indices(dim: usize, max_total: usize) -> Vec<Vec<usize>> {
    fn rec(dim: usize, budget: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == dim {
            out.push(prefix.clone());
            return;
        }
        for v in 0..=budget {
            prefix.push(v);
            rec(dim, budget - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, max_total, &mut Vec::new(), &mut out);
    out
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// FNV-1a hash of a byte string; used for config provenance stamps.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
