use crate::error::{Error, Result};

/// Binary Golay complementary pair: the aperiodic autocorrelations of `a` and
/// `b` sum to `2N` at lag 0 and to zero everywhere else.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GolayPair {
    pub a: Vec<i8>,
    pub b: Vec<i8>,
}

impl GolayPair {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Builds a pair of length `n` by recursive concatenation, starting from
/// `a = b = [1]` and applying `a' = a‖b`, `b' = a‖−b`.
pub fn generate_golay_pair(n: usize) -> Result<GolayPair> {
    if !(2..=4096).contains(&n) || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut a = vec![1i8];
    let mut b = vec![1i8];
    while a.len() < n {
        let mut next_a = a.clone();
        next_a.extend_from_slice(&b);
        let mut next_b = a;
        next_b.extend(b.iter().map(|&v| -v));
        a = next_a;
        b = next_b;
    }
    Ok(GolayPair { a, b })
}

/// Aperiodic autocorrelation at lags `0..len`, in exact integer arithmetic.
pub fn aperiodic_autocorrelation(seq: &[i8]) -> Vec<i64> {
    (0..seq.len())
        .map(|lag| seq[lag..].iter().zip(seq).map(|(&x, &y)| x as i64 * y as i64).sum())
        .collect()
}
