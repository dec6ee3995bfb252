//! Finite codes over the alphabet `{1, ..., m}` and their digit statistics.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::entropy::ProbVector;
use crate::error::{Error, Result};

/// A finite word over `{1, ..., m}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Code(Vec<usize>);

impl Code {
    pub fn new(digits: Vec<usize>, m: usize) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidCode("empty code".into()));
        }
        if let Some(d) = digits.iter().find(|&&d| d == 0 || d > m) {
            return Err(Error::InvalidCode(format!("digit {d} outside 1..={m}")));
        }
        Ok(Code(digits))
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Concatenation `self · other`.
    pub fn concat(&self, other: &Code) -> Code {
        let mut digits = self.0.clone();
        digits.extend_from_slice(&other.0);
        Code(digits)
    }
}

/// Digit counts divided by the length.
pub fn digit_frequency(code: &Code, m: usize) -> Result<ProbVector> {
    let mut counts = vec![0usize; m];
    for &d in code.digits() {
        if d == 0 || d > m {
            return Err(Error::InvalidCode(format!("digit {d} outside 1..={m}")));
        }
        counts[d - 1] += 1;
    }
    let n = code.len() as f64;
    ProbVector::normalized(counts.into_iter().map(|c| c as f64 / n).collect())
}

/// Digit counts summing to `n`: `⌊n p_j⌋` plus the remainder handed to the
/// largest fractional parts (lower index first on ties).
fn target_counts(p: &ProbVector, n: usize) -> Vec<usize> {
    let exact: Vec<f64> = p.entries().iter().map(|x| x * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &j in order.iter().take(n.saturating_sub(assigned)) {
        counts[j] += 1;
    }
    counts
}

/// Low-discrepancy schedule: at each position emit the digit whose running
/// count lags its target proportion the most.
fn schedule(counts: &[usize], n: usize) -> Vec<usize> {
    let mut emitted = vec![0usize; counts.len()];
    let mut digits = Vec::with_capacity(n);
    for t in 1..=n {
        let j = (0..counts.len())
            .filter(|&j| emitted[j] < counts[j])
            .max_by(|&a, &b| {
                let da = counts[a] as f64 * t as f64 / n as f64 - emitted[a] as f64;
                let db = counts[b] as f64 * t as f64 / n as f64 - emitted[b] as f64;
                da.total_cmp(&db).then(b.cmp(&a))
            })
            .expect("counts sum to n");
        emitted[j] += 1;
        digits.push(j + 1);
    }
    digits
}

/// `count` codes of length `n` whose digit frequencies are within `m/n` of `p`.
///
/// Every code is a cyclic rotation of one deterministic schedule; the seed
/// only chooses the rotations.
pub fn sample_frequency_codes(p: &ProbVector, n: usize, count: usize, seed: u64) -> Result<Vec<Code>> {
    let m = p.len();
    if n < m {
        return Err(Error::CodeTooShort { n, m });
    }
    let base = schedule(&target_counts(p, n), n);
    let mut offsets: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    offsets.shuffle(&mut rng);
    Ok((0..count)
        .map(|i| {
            let k = if i == 0 { 0 } else { offsets[i % n] };
            let mut digits = base.clone();
            digits.rotate_left(k);
            Code(digits)
        })
        .collect())
}

/// `Π_j p_{i_j}`, the Bernoulli mass of the cylinder of `code`.
pub fn bernoulli_cylinder_mass(p: &ProbVector, code: &Code) -> Result<f64> {
    let m = p.len();
    code.digits().iter().try_fold(1.0, |acc, &d| {
        if d == 0 || d > m {
            Err(Error::InvalidCode(format!("digit {d} outside 1..={m}")))
        } else {
            Ok(acc * p.entries()[d - 1])
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn code(d: &[usize]) -> Code {
        Code::new(d.to_vec(), 2).unwrap()
    }

    #[test]
    fn frequency_examples() {
        assert_eq!(digit_frequency(&code(&[1, 1, 1, 1]), 2).unwrap().entries(), &[1.0, 0.0]);
        assert_eq!(digit_frequency(&code(&[1, 2, 1, 2]), 2).unwrap().entries(), &[0.5, 0.5]);
        assert_eq!(digit_frequency(&code(&[1, 2, 2, 2]), 2).unwrap().entries(), &[0.25, 0.75]);
        assert!(Code::new(vec![], 2).is_err());
        assert!(Code::new(vec![3], 2).is_err());
    }

    #[test]
    fn sampler_forced_counts() {
        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        for c in sample_frequency_codes(&half, 8, 5, 1).unwrap() {
            assert_eq!(c.digits().iter().filter(|&&d| d == 1).count(), 4);
        }
        let skew = ProbVector::new(vec![0.25, 0.75]).unwrap();
        for c in sample_frequency_codes(&skew, 8, 5, 9).unwrap() {
            assert_eq!(c.digits().iter().filter(|&&d| d == 1).count(), 2);
        }
        assert_eq!(
            sample_frequency_codes(&ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap(), 2, 1, 0),
            Err(Error::CodeTooShort { n: 2, m: 3 })
        );
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = ProbVector::new(vec![0.1, 0.6, 0.3]).unwrap();
        assert_eq!(
            sample_frequency_codes(&p, 50, 7, 42).unwrap(),
            sample_frequency_codes(&p, 50, 7, 42).unwrap()
        );
    }

    #[test]
    fn cylinder_mass_examples() {
        let half = ProbVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(bernoulli_cylinder_mass(&half, &code(&[1, 2, 2, 1, 1])).unwrap(), 1.0 / 32.0);
        let skew = ProbVector::new(vec![0.25, 0.75]).unwrap();
        assert_eq!(bernoulli_cylinder_mass(&skew, &code(&[1, 1])).unwrap(), 1.0 / 16.0);
        assert_eq!(bernoulli_cylinder_mass(&skew, &code(&[2, 2, 2])).unwrap(), 27.0 / 64.0);
    }

    #[test]
    fn cylinder_masses_sum_to_one() {
        let p = ProbVector::new(vec![0.25, 0.5, 0.25]).unwrap();
        let n = 5;
        let mut total = 0.0;
        for idx in 0..3usize.pow(n) {
            let digits: Vec<usize> = (0..n).map(|k| (idx / 3usize.pow(k)) % 3 + 1).collect();
            total += bernoulli_cylinder_mass(&p, &Code::new(digits, 3).unwrap()).unwrap();
        }
        assert_eq!(total, 1.0);
    }

    proptest! {
        #[test]
        fn sampled_frequencies_close_to_target(w in prop::collection::vec(0.01f64..1.0, 2..5), n in 5usize..200, seed in any::<u64>()) {
            prop_assume!(n >= w.len());
            let p = ProbVector::normalized(w).unwrap();
            let m = p.len();
            for c in sample_frequency_codes(&p, n, 3, seed).unwrap() {
                prop_assert_eq!(c.len(), n);
                let f = digit_frequency(&c, m).unwrap();
                for (a, b) in f.entries().iter().zip(p.entries()) {
                    prop_assert!((a - b).abs() <= m as f64 / n as f64);
                }
            }
        }

        #[test]
        fn cylinder_mass_multiplicative(a in prop::collection::vec(1usize..=2, 1..10), b in prop::collection::vec(1usize..=2, 1..10), p1 in 0.0f64..1.0) {
            let p = ProbVector::new(vec![p1, 1.0 - p1]).unwrap();
            let (ca, cb) = (Code::new(a, 2).unwrap(), Code::new(b, 2).unwrap());
            let joint = bernoulli_cylinder_mass(&p, &ca.concat(&cb)).unwrap();
            let split = bernoulli_cylinder_mass(&p, &ca).unwrap() * bernoulli_cylinder_mass(&p, &cb).unwrap();
            prop_assert!((joint - split).abs() <= 1e-15);
        }
    }
}
