//! Finite weighted sample spaces, subsets, random variables and partitions.
//!
//! Everything downstream (semirings, uniformity norms, the decomposition
//! loop) is built on the four operations defined here: weighted `L_p` norms,
//! integrals over subsets, conditional expectation with respect to a
//! partition, and common refinements.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Absolute tolerance used when validating that weights sum to one.
pub const WEIGHT_TOL: f64 = 1e-12;

/// A finite probability space: labelled points with nonnegative weights
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundSpace {
    labels: Vec<String>,
    weights: Vec<f64>,
}

impl GroundSpace {
    pub fn new(labels: Vec<String>, weights: Vec<f64>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidSpace("point count must be >= 1".into()));
        }
        if labels.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: labels.len(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSpace("weights must be finite and >= 0".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidSpace(format!(
                "weights sum to {total}, expected 1 within {WEIGHT_TOL}"
            )));
        }
        Ok(GroundSpace { labels, weights })
    }

    /// Uniform space on `n` points labelled `0..n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "point count must be >= 1");
        GroundSpace {
            labels: (0..n).map(|i| i.to_string()).collect(),
            weights: vec![1.0 / n as f64; n],
        }
    }

    /// Uniform space with explicit labels.
    pub fn uniform_labelled(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::InvalidSpace("point count must be >= 1".into()));
        }
        Ok(GroundSpace {
            labels,
            weights: vec![1.0 / n as f64; n],
        })
    }

    /// Space with the given weights (labels `0..n`), normalizing nothing:
    /// the weights must already sum to one.
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        GroundSpace::new(labels, weights)
    }

    /// Cartesian product with product weights, points in row-major order
    /// (the last factor varies fastest).
    pub fn product(factors: &[&GroundSpace]) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpace("product of zero factors".into()));
        }
        let mut labels = vec![String::new()];
        let mut weights = vec![1.0];
        for f in factors {
            let mut next_labels = Vec::with_capacity(labels.len() * f.len());
            let mut next_weights = Vec::with_capacity(labels.len() * f.len());
            for (l, w) in labels.iter().zip(&weights) {
                for j in 0..f.len() {
                    let label = if l.is_empty() {
                        f.labels[j].clone()
                    } else {
                        format!("{l}|{}", f.labels[j])
                    };
                    next_labels.push(label);
                    next_weights.push(w * f.weights[j]);
                }
            }
            labels = next_labels;
            weights = next_weights;
        }
        // Renormalize the tiny drift from repeated multiplication.
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            for w in &mut weights {
                *w /= total;
            }
        }
        GroundSpace::new(labels, weights)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one point by construction
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    /// Probability of a subset.
    pub fn prob(&self, s: &Subset) -> f64 {
        s.iter().map(|i| self.weights[i]).sum()
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                got: n,
            });
        }
        Ok(())
    }

    /// Weighted p-norm `(sum w(x) |f(x)|^p)^(1/p)` for `p >= 1`.
    pub fn lp_norm(&self, f: &RandomVar, p: f64) -> Result<f64> {
        self.check_len(f.len())?;
        if !(p >= 1.0) {
            return Err(Error::ParameterDomain(format!("p must be >= 1, got {p}")));
        }
        let mut acc = 0.0;
        for (w, v) in self.weights.iter().zip(f.values()) {
            acc += w * v.abs().powf(p);
        }
        Ok(acc.powf(1.0 / p))
    }

    /// `sum_{x in S} w(x) f(x)`, summed in point order.
    pub fn integral_over(&self, f: &RandomVar, s: &Subset) -> Result<f64> {
        self.check_len(f.len())?;
        self.check_len(s.len())?;
        let mut acc = 0.0;
        for i in s.iter() {
            acc += self.weights[i] * f.value(i);
        }
        Ok(acc)
    }

    /// Expectation of `f` over the whole space.
    pub fn expectation(&self, f: &RandomVar) -> Result<f64> {
        self.integral_over(f, &Subset::full(self.len()))
    }

    /// Conditional expectation with respect to the partition: constant on
    /// each cell, equal to the cell average. Cells of probability zero get
    /// the value zero.
    pub fn cond_expectation(&self, f: &RandomVar, part: &Partition) -> Result<RandomVar> {
        self.check_len(f.len())?;
        self.check_len(part.n_points())?;
        let mut out = vec![0.0; self.len()];
        for cell in part.cells() {
            let mass = self.prob(cell);
            if mass <= 0.0 {
                continue;
            }
            let avg = self.integral_over(f, cell)? / mass;
            for i in cell.iter() {
                out[i] = avg;
            }
        }
        RandomVar::new(out)
    }
}

/// A subset of a ground space, stored as a bitmask over the fixed point
/// order. The `Ord` impl compares sorted index lists lexicographically;
/// this is the canonical tie-breaking order used everywhere downstream.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    n: usize,
    bits: Vec<u64>,
}

impl Subset {
    pub fn empty(n: usize) -> Self {
        Subset {
            n,
            bits: vec![0; n.div_ceil(64)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Subset::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(n: usize, idx: &[usize]) -> Self {
        let mut s = Subset::empty(n);
        for &i in idx {
            assert!(i < n, "index {i} out of range for {n} points");
            s.insert(i);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|b| *b == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        debug_assert!(i < self.n);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.bits[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        debug_assert!(i < self.n);
        self.bits[i / 64] &= !(1 << (i % 64));
    }

    pub fn count(&self) -> usize {
        self.bits.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn union(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a | b)
                .collect(),
        }
    }

    pub fn intersect(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn difference(&self, other: &Subset) -> Subset {
        debug_assert_eq!(self.n, other.n);
        Subset {
            n: self.n,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(a, b)| a & !b)
                .collect(),
        }
    }

    pub fn complement(&self) -> Subset {
        Subset::full(self.n).difference(self)
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint_from(&self, other: &Subset) -> bool {
        debug_assert_eq!(self.n, other.n);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    /// Member indices in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&i| self.contains(i))
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Indicator random variable of this subset.
    pub fn indicator(&self) -> RandomVar {
        RandomVar::new((0..self.n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect())
            .expect("indicator values are finite")
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        // Lexicographic on sorted index lists; the empty set is smallest.
        let mut a = self.iter();
        let mut b = other.iter();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }
}

/// A real-valued function on the points of a ground space.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomVar {
    values: Vec<f64>,
}

impl RandomVar {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ParameterDomain("random variable values must be finite".into()));
        }
        Ok(RandomVar { values })
    }

    pub fn constant(n: usize, c: f64) -> Self {
        RandomVar { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sub(&self, other: &RandomVar) -> RandomVar {
        debug_assert_eq!(self.len(), other.len());
        RandomVar {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn add(&self, other: &RandomVar) -> RandomVar {
        debug_assert_eq!(self.len(), other.len());
        RandomVar {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> RandomVar {
        RandomVar {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &RandomVar) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// A partition of a ground space into pairwise-disjoint nonempty cells
/// covering every point. Cells are kept sorted in canonical order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    n: usize,
    cells: Vec<Subset>,
}

impl Partition {
    pub fn new(n: usize, mut cells: Vec<Subset>) -> Result<Self> {
        let mut seen = Subset::empty(n);
        cells.retain(|c| !c.is_empty());
        for c in &cells {
            if c.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: c.len(),
                });
            }
            if !c.is_disjoint_from(&seen) {
                return Err(Error::InvalidPartition("cells are not pairwise disjoint".into()));
            }
            seen = seen.union(c);
        }
        if !seen.is_full() {
            return Err(Error::InvalidPartition("cells do not cover the space".into()));
        }
        cells.sort();
        Ok(Partition { n, cells })
    }

    /// The trivial partition `{Omega}`.
    pub fn trivial(n: usize) -> Self {
        Partition {
            n,
            cells: vec![Subset::full(n)],
        }
    }

    /// The partition into singletons.
    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            cells: (0..n).map(|i| Subset::from_indices(n, &[i])).collect(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn cells(&self) -> &[Subset] {
        &self.cells
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// True if every cell of `self` is contained in a cell of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.n == coarser.n
            && self
                .cells
                .iter()
                .all(|c| coarser.cells.iter().any(|d| c.is_subset_of(d)))
    }

    /// Refine every cell by the subset: each cell `C` splits into `C ∩ S`
    /// and `C \ S`, dropping empty pieces.
    pub fn common_refinement(&self, s: &Subset) -> Result<Partition> {
        if s.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: s.len(),
            });
        }
        let mut cells = Vec::with_capacity(self.cells.len() * 2);
        for c in &self.cells {
            let inside = c.intersect(s);
            let outside = c.difference(s);
            if !inside.is_empty() {
                cells.push(inside);
            }
            if !outside.is_empty() {
                cells.push(outside);
            }
        }
        Partition::new(self.n, cells)
    }

    /// Coarsest common refinement of two partitions.
    pub fn meet(&self, other: &Partition) -> Result<Partition> {
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                let c = a.intersect(b);
                if !c.is_empty() {
                    cells.push(c);
                }
            }
        }
        Partition::new(self.n, cells)
    }

    /// Index of the cell containing point `i`.
    pub fn cell_of(&self, i: usize) -> usize {
        self.cells
            .iter()
            .position(|c| c.contains(i))
            .expect("partitions cover the space")
    }
}
