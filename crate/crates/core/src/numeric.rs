//! Summation and exponential-moment helpers shared by the leaf folds.

/// Exponents above this trigger max-shift rescaling in [`ExpMoment`].
pub const SHIFT_THRESHOLD: f64 = 500.0;

/// Blocks at or below this size are summed with a plain loop.
const PAIRWISE_BLOCK: usize = 64;

/// Pairwise sum of `term(i)` over `i` in `lo..hi`.
///
/// The recursion splits at the midpoint, so for power-of-two ranges the
/// two halves are summed exactly as they would be on their own. Splicing
/// relies on this to make averaged expectations agree bit for bit.
pub fn pairwise_sum<F>(lo: usize, hi: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + ?Sized,
{
    let len = hi - lo;
    if len <= PAIRWISE_BLOCK {
        let mut acc = 0.0;
        for i in lo..hi {
            acc += term(i);
        }
        acc
    } else {
        let mid = lo + len / 2;
        pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term)
    }
}

/// Mean of `term(i)` over `0..count` with pairwise summation.
pub fn pairwise_mean<F>(count: usize, term: &F) -> f64
where
    F: Fn(usize) -> f64 + ?Sized,
{
    pairwise_sum(0, count, term) / count as f64
}

/// A non-negative quantity stored as `mantissa * e^shift`.
///
/// Produced by averaging `e^{a_i}`; `shift` is zero unless some exponent
/// exceeded [`SHIFT_THRESHOLD`], in which case it is the maximum exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpMoment {
    pub mantissa: f64,
    pub shift: f64,
}

impl ExpMoment {
    pub fn from_value(value: f64) -> Self {
        Self {
            mantissa: value,
            shift: 0.0,
        }
    }

    /// `mean_i e^{exponent(i)}` over `0..count`.
    pub fn mean_exp<F>(count: usize, exponent: &F) -> Self
    where
        F: Fn(usize) -> f64 + ?Sized,
    {
        let max = (0..count).map(exponent).fold(f64::NEG_INFINITY, f64::max);
        if max <= SHIFT_THRESHOLD {
            Self {
                mantissa: pairwise_mean(count, &|i| exponent(i).exp()),
                shift: 0.0,
            }
        } else {
            Self {
                mantissa: pairwise_mean(count, &|i| (exponent(i) - max).exp()),
                shift: max,
            }
        }
    }

    /// Plain floating value; may be `inf` when the shift is large.
    pub fn value(&self) -> f64 {
        if self.shift == 0.0 {
            self.mantissa
        } else {
            self.mantissa * self.shift.exp()
        }
    }

    pub fn ln(&self) -> f64 {
        self.mantissa.ln() + self.shift
    }

    pub fn sqrt(&self) -> Self {
        Self {
            mantissa: self.mantissa.sqrt(),
            shift: self.shift / 2.0,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            mantissa: self.mantissa * other.mantissa,
            shift: self.shift + other.shift,
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed from `(seed, label, index)`.
///
/// Adding trials never perturbs the seeds of earlier indices.
pub fn derive_seed(seed: u64, label: &str, index: u64) -> u64 {
    // FNV-1a over the label
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    mix64(mix64(seed ^ h) ^ index)
}
