//! Exact rational mode.
//!
//! Kernels and values are `BigRational`s and backward induction is carried
//! out without rounding. Useful to settle equality cases that the float
//! engine can only confirm within tolerance.

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::credal::{CredalKernel, CredalModel};
use crate::error::{Error, Result};
use crate::tree::TreeSpace;

/// Parses `"3"`, `"-3/10"` or a finite decimal such as `"0.25"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidParameter(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = num::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(digits, scale);
    Ok(if neg { -r } else { r })
}

/// A credal model with rational kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactModel {
    space: TreeSpace,
    kernels: Vec<Vec<Vec<BigRational>>>,
}

impl ExactModel {
    /// `kernels_at(node)` for every non-leaf node; each vector must sum to exactly one.
    pub fn new<F>(space: TreeSpace, mut kernels_at: F) -> Result<Self>
    where
        F: FnMut(usize) -> Vec<Vec<BigRational>>,
    {
        let mut kernels = Vec::with_capacity(space.node_count());
        for node in 0..space.node_count() {
            if space.is_leaf(node) {
                kernels.push(Vec::new());
                continue;
            }
            let list = kernels_at(node);
            let bad = |reason: String| Error::InvalidKernel {
                node: space.label(node),
                reason,
            };
            if list.is_empty() {
                return Err(bad("empty kernel list".into()));
            }
            let width = space.children(node).len();
            for (k, p) in list.iter().enumerate() {
                if p.len() != width {
                    return Err(bad(format!("kernel {k} has {} entries for {width} children", p.len())));
                }
                if p.iter().any(|q| q.is_negative()) {
                    return Err(bad(format!("kernel {k} has a negative entry")));
                }
                let sum: BigRational = p.iter().sum();
                if !sum.is_one() {
                    return Err(bad(format!("kernel {k} sums to {sum}, not exactly 1")));
                }
            }
            kernels.push(list);
        }
        Ok(ExactModel { space, kernels })
    }

    /// Product space with the same rational kernels everywhere.
    pub fn uniform(depth: usize, outcomes: &[f64], kernels: &[Vec<BigRational>]) -> Result<Self> {
        let space = TreeSpace::product(depth, outcomes.len(), outcomes)?;
        Self::new(space, |_| kernels.to_vec())
    }

    pub fn space(&self) -> &TreeSpace {
        &self.space
    }

    /// Upper expectation of leaf values, exactly.
    pub fn upper_expectation(&self, values: &[BigRational]) -> Result<BigRational> {
        let leaves = self.space.leaf_count();
        if values.len() != leaves {
            return Err(Error::LengthMismatch {
                what: "random variable",
                expected: leaves,
                got: values.len(),
            });
        }
        let mut below = values.to_vec();
        for s in (0..self.space.depth()).rev() {
            let start = self.space.level(s + 1).start;
            below = self
                .space
                .level(s)
                .map(|node| {
                    let ch = self.space.children(node);
                    let vals = &below[ch.start - start..ch.end - start];
                    self.kernels[node]
                        .iter()
                        .map(|p| p.iter().zip(vals).map(|(a, b)| a * b).sum::<BigRational>())
                        .max()
                        .expect("non-empty kernel list")
                })
                .collect();
        }
        Ok(below.swap_remove(0))
    }

    /// `E` of the leaf values obtained from `f(leaf, outcomes)`, with
    /// outcomes converted exactly from their binary values.
    pub fn upper_expectation_of<F>(&self, mut f: F) -> Result<BigRational>
    where
        F: FnMut(&[BigRational]) -> BigRational,
    {
        let values: Vec<BigRational> = (0..self.space.leaf_count())
            .map(|leaf| {
                let o: Vec<BigRational> = self
                    .space
                    .outcomes(leaf)
                    .into_iter()
                    .map(|v| BigRational::from_float(v).expect("finite outcome"))
                    .collect();
                f(&o)
            })
            .collect();
        self.upper_expectation(&values)
    }

    /// The float model with rounded kernels.
    pub fn to_float(&self) -> Result<CredalModel> {
        let kernel = CredalKernel::from_fn(&self.space, |node| {
            self.kernels[node]
                .iter()
                .map(|p| p.iter().map(to_f64).collect())
                .collect()
        })?;
        CredalModel::new(self.space.clone(), kernel)
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    num::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}
