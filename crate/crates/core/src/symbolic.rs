//! Cylinders of the refined partitions `ξ_k`: the maximal open intervals on
//! which the first `k` branch symbols are constant.

use std::fmt;
use std::ops::Deref;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::BranchMap;
use crate::scalar::{Interval, Scalar};

/// Default cap on enumeration depth.
pub const DEFAULT_DEPTH_CAP: usize = 20;

/// A finite sequence of branch indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Itinerary(pub Vec<usize>);

impl Itinerary {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn validate(&self, branches: usize) -> Result<()> {
        match self.0.iter().find(|&&s| s >= branches) {
            Some(&symbol) => Err(Error::InvalidSymbol { symbol, branches }),
            None => Ok(()),
        }
    }
}

impl Deref for Itinerary {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Itinerary {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl From<&[usize]> for Itinerary {
    fn from(v: &[usize]) -> Self {
        Self(v.to_vec())
    }
}

impl fmt::Display for Itinerary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // symbols are separated only when some index needs two digits
        let sep = if self.0.iter().any(|&s| s >= 10) { "." } else { "" };
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(sep))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder<S> {
    pub word: Itinerary,
    /// `None` when no point has this itinerary.
    pub interval: Option<Interval<S>>,
    /// Set when the pullback collapsed below the degenerate width rather
    /// than becoming empty outright.
    pub degenerate: bool,
}

impl<S: Scalar> Cylinder<S> {
    pub fn is_empty(&self) -> bool {
        self.interval.is_none()
    }

    pub fn depth(&self) -> usize {
        self.word.len()
    }

    pub fn diameter(&self) -> S {
        self.interval
            .as_ref()
            .map(Interval::width)
            .unwrap_or_else(S::zero)
    }
}

/// Preimage of `target` under one branch, intersected with the branch domain.
pub(crate) fn pull_back_interval<M: BranchMap>(
    map: &M,
    branch: usize,
    target: &Interval<M::Scalar>,
) -> Option<Interval<M::Scalar>> {
    let clipped = target.intersect(&map.image(branch));
    if clipped.is_empty() {
        return None;
    }
    let a = map.pull_back(branch, &clipped.lo);
    let b = map.pull_back(branch, &clipped.hi);
    let out = if a <= b {
        Interval::new(a, b)
    } else {
        Interval::new(b, a)
    };
    let out = out.intersect(&map.domain(branch));
    (!out.is_empty()).then_some(out)
}

fn finish<S: Scalar>(word: Itinerary, interval: Option<Interval<S>>) -> Cylinder<S> {
    match interval {
        Some(iv) if iv.width() <= S::degenerate_width() => Cylinder {
            word,
            interval: None,
            degenerate: true,
        },
        interval => Cylinder {
            word,
            interval,
            degenerate: false,
        },
    }
}

/// Cylinder of a word by backward pullback through the branch inverses.
/// The empty word gives `(0, 1)`.
pub fn cylinder_of_word<M: BranchMap>(map: &M, word: &Itinerary) -> Result<Cylinder<M::Scalar>> {
    word.validate(map.branch_count())?;
    let Some((&last, rest)) = word.split_last() else {
        return Ok(finish(word.clone(), Some(Interval::unit())));
    };
    let mut current = Some(map.domain(last));
    for &symbol in rest.iter().rev() {
        current = match current {
            Some(iv) => pull_back_interval(map, symbol, &iv),
            None => break,
        };
    }
    Ok(finish(word.clone(), current))
}

/// `ξ_k(x)`: the cylinder of the first `k` symbols of the itinerary of `x`.
pub fn cylinder_of_point<M: BranchMap>(
    map: &M,
    x: &M::Scalar,
    k: usize,
) -> Result<Cylinder<M::Scalar>> {
    let trace = map.iterate(x, k)?;
    cylinder_of_word(map, &Itinerary(trace.word))
}

/// All nonempty cylinders of depth `k`, in lexicographic word order.
pub fn enumerate_cylinders<M: BranchMap>(
    map: &M,
    k: usize,
    depth_cap: usize,
) -> Result<Vec<Cylinder<M::Scalar>>> {
    if k > depth_cap {
        return Err(Error::DepthCapExceeded {
            depth: k,
            cap: depth_cap,
        });
    }
    if k == 0 {
        return Ok(vec![finish(Itinerary::empty(), Some(Interval::unit()))]);
    }
    let n = map.branch_count();
    // level 1: the branch domains
    let mut level: Vec<(Vec<usize>, Interval<M::Scalar>)> =
        (0..n).map(|i| (vec![i], map.domain(i))).collect();
    for _ in 1..k {
        // prefix one symbol: cyl(a w) = Z_a ∩ T_a^{-1} cyl(w)
        let blocks: Vec<Vec<(Vec<usize>, Interval<M::Scalar>)>> = (0..n)
            .into_par_iter()
            .map(|a| {
                level
                    .iter()
                    .filter_map(|(w, iv)| {
                        let pulled = pull_back_interval(map, a, iv)?;
                        if pulled.width() <= M::Scalar::degenerate_width() {
                            return None;
                        }
                        let mut word = Vec::with_capacity(w.len() + 1);
                        word.push(a);
                        word.extend_from_slice(w);
                        Some((word, pulled))
                    })
                    .collect()
            })
            .collect();
        level = blocks.into_iter().flatten().collect();
    }
    Ok(level
        .into_iter()
        .map(|(w, iv)| Cylinder {
            word: Itinerary(w),
            interval: Some(iv),
            degenerate: false,
        })
        .collect())
}

/// Diameters of `ξ_k(x)` for `k = 0..=k_max`.
pub fn shrinking_report<M: BranchMap>(
    map: &M,
    x: &M::Scalar,
    k_max: usize,
) -> Result<Vec<(usize, M::Scalar)>> {
    let trace = map.iterate(x, k_max)?;
    (0..=k_max)
        .map(|k| {
            let cyl = cylinder_of_word(map, &Itinerary(trace.word[..k].to_vec()))?;
            Ok((k, cyl.diameter()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rational;
    use crate::harness::zoo;

    fn close(a: &Interval<f64>, lo: f64, hi: f64) -> bool {
        (a.lo - lo).abs() < 1e-15 && (a.hi - hi).abs() < 1e-15
    }

    #[test]
    fn cylinder_of_word_examples() {
        let t = zoo::tent_float(2.0);
        let c = cylinder_of_word(&t, &vec![0, 1, 1].into()).unwrap();
        assert!(close(c.interval.as_ref().unwrap(), 0.25, 0.375));
        let c = cylinder_of_word(&t, &vec![0].into()).unwrap();
        assert!(close(c.interval.as_ref().unwrap(), 0.0, 0.5));
        let g = zoo::golden();
        let c = cylinder_of_word(&g, &vec![1, 1].into()).unwrap();
        assert!(c.is_empty());
        assert!(cylinder_of_word(&t, &vec![2].into()).is_err());
    }

    #[test]
    fn cylinder_of_word_exact() {
        let t = zoo::tent_exact(rational(2, 1));
        let c = cylinder_of_word(&t, &vec![0, 1, 1].into()).unwrap();
        assert_eq!(
            c.interval.unwrap(),
            Interval::new(rational(1, 4), rational(3, 8))
        );
    }

    #[test]
    fn cylinder_of_point_examples() {
        let t = zoo::tent_float(2.0);
        let c = cylinder_of_point(&t, &0.3, 3).unwrap();
        assert_eq!(c.word.0, vec![0, 1, 1]);
        assert!(close(c.interval.as_ref().unwrap(), 0.25, 0.375));
        let c = cylinder_of_point(&t, &0.3, 1).unwrap();
        assert!(close(c.interval.as_ref().unwrap(), 0.0, 0.5));
        let c = cylinder_of_point(&t, &0.3, 0).unwrap();
        assert!(c.word.is_empty());
        assert!(close(c.interval.as_ref().unwrap(), 0.0, 1.0));
        assert!(matches!(
            cylinder_of_point(&t, &0.25, 3),
            Err(Error::CriticalPoint { .. })
        ));
    }

    #[test]
    fn enumerate_examples() {
        let t = zoo::tent_float(2.0);
        assert_eq!(enumerate_cylinders(&t, 1, 20).unwrap().len(), 2);
        let c3 = enumerate_cylinders(&t, 3, 20).unwrap();
        assert_eq!(c3.len(), 8);
        for c in &c3 {
            assert!((c.diameter() - 0.125).abs() < 1e-15);
        }
        let g = zoo::golden();
        let words: Vec<Vec<usize>> = enumerate_cylinders(&g, 2, 20)
            .unwrap()
            .into_iter()
            .map(|c| c.word.0)
            .collect();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert!(matches!(
            enumerate_cylinders(&t, 21, 20),
            Err(Error::DepthCapExceeded { .. })
        ));
        assert_eq!(enumerate_cylinders(&t, 0, 20).unwrap().len(), 1);
    }

    #[test]
    fn enumerate_partitions_unit_interval_exactly() {
        let t = zoo::tent_exact(rational(2, 1));
        for k in 1..=8 {
            let cyls = enumerate_cylinders(&t, k, 20).unwrap();
            let total = cyls
                .iter()
                .fold(rational(0, 1), |acc, c| acc + c.diameter());
            assert_eq!(total, rational(1, 1));
            for w in cyls.windows(2) {
                let (a, b) = (w[0].interval.as_ref().unwrap(), w[1].interval.as_ref().unwrap());
                assert!(a.hi <= b.lo || b.hi <= a.lo);
            }
        }
    }

    #[test]
    fn shrinking_examples() {
        let t = zoo::tent_float(2.0);
        let r = shrinking_report(&t, &0.3, 5).unwrap();
        assert_eq!(r[0], (0, 1.0));
        for (k, d) in &r[1..] {
            assert_eq!(*d, 0.5f64.powi(*k as i32));
        }
        let g = zoo::golden();
        let beta = (1.0 + 5f64.sqrt()) / 2.0;
        let r = shrinking_report(&g, &0.2345, 10).unwrap();
        for (k, d) in r {
            assert!(d <= beta.powi(-(k as i32)) + 1e-12, "k={k} d={d}");
        }
    }

    #[test]
    fn degenerate_pullbacks_are_flagged() {
        let t = zoo::tent_float(2.0);
        // depth 52 cylinders have width 2^-52 > 1e-15; depth 60 collapses
        let word: Itinerary = vec![0; 60].into();
        let c = cylinder_of_word(&t, &word).unwrap();
        assert!(c.is_empty());
        assert!(c.degenerate);
    }
}
