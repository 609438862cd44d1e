//! Martingale difference sequences over partition filtrations, and numerical
//! verifiers for the `L_p` inequalities that drive the termination bounds of
//! the decomposition loop. The gap functions return RHS minus LHS of a proven
//! inequality; anything below `-1e-9` indicates a bug, not a counterexample.

use crate::error::{Error, Result};
use crate::space::{GroundSpace, Partition, RandomVar};

/// Absolute tolerance on the structural martingale invariants.
pub const MDS_TOL: f64 = 1e-10;

/// An increasing sequence of partitions: each refines its predecessor.
#[derive(Debug, Clone)]
pub struct Filtration {
    partitions: Vec<Partition>,
}

impl Filtration {
    pub fn new(partitions: Vec<Partition>) -> Result<Self> {
        if partitions.is_empty() {
            return Err(Error::NonNestedFiltration { level: 0 });
        }
        for i in 1..partitions.len() {
            if !partitions[i].refines(&partitions[i - 1]) {
                return Err(Error::NonNestedFiltration { level: i });
            }
        }
        Ok(Filtration { partitions })
    }

    pub fn levels(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        false // at least one level by construction
    }

    pub fn last(&self) -> &Partition {
        self.partitions.last().expect("nonempty")
    }
}

/// Successive differences `d_0 = E(f|P_0)`, `d_i = E(f|P_i) - E(f|P_{i-1})`.
#[derive(Debug, Clone)]
pub struct DifferenceSequence {
    d: Vec<RandomVar>,
}

impl DifferenceSequence {
    pub fn terms(&self) -> &[RandomVar] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// `d_0 + ... + d_j`, which equals `E(f|P_j)`.
    pub fn partial_sum(&self, j: usize) -> RandomVar {
        let mut acc = self.d[0].clone();
        for t in &self.d[1..=j] {
            acc = acc.add(t);
        }
        acc
    }

    pub fn sum(&self) -> RandomVar {
        self.partial_sum(self.d.len() - 1)
    }
}

pub fn difference_sequence(
    space: &GroundSpace,
    f: &RandomVar,
    filt: &Filtration,
) -> Result<DifferenceSequence> {
    let mut d = Vec::with_capacity(filt.len());
    let mut prev: Option<RandomVar> = None;
    for part in filt.levels() {
        let e = space.cond_expectation(f, part)?;
        let term = match &prev {
            Some(p) => e.sub(p),
            None => e.clone(),
        };
        d.push(term);
        prev = Some(e);
    }
    let seq = DifferenceSequence { d };
    debug_assert!(check_invariants(space, &seq, filt).unwrap_or(f64::INFINITY) <= MDS_TOL);
    Ok(seq)
}

/// Largest deviation from the two structural invariants: the telescoped sum
/// equals `E(f|P_n)` by construction, and `E(d_i|P_{i-1}) = 0` for `i >= 1`.
pub fn check_invariants(
    space: &GroundSpace,
    seq: &DifferenceSequence,
    filt: &Filtration,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..seq.len() {
        let proj = space.cond_expectation(&seq.d[i], &filt.levels()[i - 1])?;
        let dev = proj.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        worst = worst.max(dev);
    }
    Ok(worst)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterDomain(format!(
            "p must lie in (1, 2], got {p}"
        )));
    }
    Ok(())
}

/// Gap of the square-function estimate
/// `(sum_i ‖d_i‖_p^2)^{1/2} <= (p-1)^{-1/2} ‖sum_i d_i‖_p`.
/// Returns RHS minus LHS.
pub fn rx_inequality_gap(
    space: &GroundSpace,
    f: &RandomVar,
    filt: &Filtration,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    let seq = difference_sequence(space, f, filt)?;
    let mut sq = 0.0;
    for d in seq.terms() {
        let n = space.lp_norm(d, p)?;
        sq += n * n;
    }
    let lhs = sq.sqrt();
    let rhs = space.lp_norm(&seq.sum(), p)? / (p - 1.0).sqrt();
    Ok(rhs - lhs)
}

/// Gap of the uniform convexity estimate
/// `‖E(f|B)‖_p^2 + (p-1)‖f - E(f|B)‖_p^2 <= ‖f‖_p^2`.
pub fn rx_convexity_gap(
    space: &GroundSpace,
    f: &RandomVar,
    b: &Partition,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    let e = space.cond_expectation(f, b)?;
    let ne = space.lp_norm(&e, p)?;
    let nr = space.lp_norm(&f.sub(&e), p)?;
    let nf = space.lp_norm(f, p)?;
    Ok(nf * nf - ne * ne - (p - 1.0) * nr * nr)
}

/// Gap of the two-point inequality
/// `‖x‖_p^2 + (p-1)‖y‖_p^2 <= (‖x+y‖_p^2 + ‖x-y‖_p^2)/2`.
pub fn bcl_inequality_gap(
    space: &GroundSpace,
    x: &RandomVar,
    y: &RandomVar,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let nx = space.lp_norm(x, p)?;
    let ny = space.lp_norm(y, p)?;
    let np = space.lp_norm(&x.add(y), p)?;
    let nm = space.lp_norm(&x.sub(y), p)?;
    Ok((np * np + nm * nm) / 2.0 - nx * nx - (p - 1.0) * ny * ny)
}

/// Worst excess of `‖sum_{i=k}^l d_i‖_p` over `2‖sum_i d_i‖_p` across all
/// consecutive blocks; nonpositive for every martingale difference sequence.
pub fn block_sum_excess(
    space: &GroundSpace,
    f: &RandomVar,
    filt: &Filtration,
    p: f64,
) -> Result<f64> {
    check_p(p)?;
    let seq = difference_sequence(space, f, filt)?;
    let full = space.lp_norm(&seq.sum(), p)?;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..seq.len() {
        let mut acc = RandomVar::constant(f.len(), 0.0);
        for l in k..seq.len() {
            acc = acc.add(&seq.terms()[l]);
            let block = space.lp_norm(&acc, p)?;
            worst = worst.max(block - 2.0 * full);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Subset;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn rv(v: &[f64]) -> RandomVar {
        RandomVar::new(v.to_vec()).unwrap()
    }

    fn two_level(n: usize, split: &[usize]) -> Filtration {
        let cell = Subset::from_indices(n, split);
        let fine = Partition::new(n, vec![cell.clone(), cell.complement()]).unwrap();
        Filtration::new(vec![Partition::trivial(n), fine]).unwrap()
    }

    #[test]
    fn nesting_validated() {
        let p = Partition::new(
            4,
            vec![Subset::from_indices(4, &[0, 1]), Subset::from_indices(4, &[2, 3])],
        )
        .unwrap();
        let q = Partition::new(
            4,
            vec![Subset::from_indices(4, &[0, 2]), Subset::from_indices(4, &[1, 3])],
        )
        .unwrap();
        assert!(Filtration::new(vec![Partition::trivial(4), p.clone()]).is_ok());
        assert!(matches!(
            Filtration::new(vec![p, q]),
            Err(Error::NonNestedFiltration { level: 1 })
        ));
        assert!(Filtration::new(vec![]).is_err());
    }

    #[test]
    fn single_level_gives_global_mean() {
        let sp = GroundSpace::uniform(4);
        let f = rv(&[1.0, 2.0, 3.0, 4.0]);
        let filt = Filtration::new(vec![Partition::trivial(4)]).unwrap();
        let seq = difference_sequence(&sp, &f, &filt).unwrap();
        assert_eq!(seq.len(), 1);
        assert_eq!(seq.terms()[0].values(), &[2.5, 2.5, 2.5, 2.5]);
    }

    #[test]
    fn frozen_two_level_differences() {
        let sp = GroundSpace::uniform(4);
        let f = rv(&[1.0, 2.0, 3.0, 4.0]);
        let filt = two_level(4, &[0, 1]);
        let seq = difference_sequence(&sp, &f, &filt).unwrap();
        assert_eq!(seq.terms()[0].values(), &[2.5, 2.5, 2.5, 2.5]);
        assert_eq!(seq.terms()[1].values(), &[-1.0, -1.0, 1.0, 1.0]);
        assert!(check_invariants(&sp, &seq, &filt).unwrap() <= MDS_TOL);
    }

    #[test]
    fn measurable_function_has_zero_tail() {
        let sp = GroundSpace::uniform(4);
        let f = rv(&[7.0, 7.0, 7.0, 7.0]);
        let filt = two_level(4, &[0, 2]);
        let seq = difference_sequence(&sp, &f, &filt).unwrap();
        assert!(seq.terms()[1].values().iter().all(|v| v.abs() <= MDS_TOL));
    }

    #[test]
    fn partial_sums_are_conditional_expectations() {
        let sp = GroundSpace::uniform(8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = RandomVar::new((0..8).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let filt = random_filtration(8, 3, &mut rng);
        let seq = difference_sequence(&sp, &f, &filt).unwrap();
        for (j, part) in filt.levels().iter().enumerate() {
            let e = sp.cond_expectation(&f, part).unwrap();
            assert!(seq.partial_sum(j).max_abs_diff(&e) <= MDS_TOL);
        }
    }

    fn random_filtration(n: usize, levels: usize, rng: &mut ChaCha8Rng) -> Filtration {
        let mut parts = vec![Partition::trivial(n)];
        for _ in 1..levels {
            let split: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
            let next = parts
                .last()
                .unwrap()
                .common_refinement(&Subset::from_indices(n, &split))
                .unwrap();
            parts.push(next);
        }
        Filtration::new(parts).unwrap()
    }

    #[test]
    fn square_function_gap_examples() {
        let sp = GroundSpace::uniform(8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // at p = 2 orthogonality makes the estimate an equality
        for _ in 0..50 {
            let f = RandomVar::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let filt = random_filtration(8, 3, &mut rng);
            let gap = rx_inequality_gap(&sp, &f, &filt, 2.0).unwrap();
            assert!(gap.abs() <= 1e-10, "p=2 gap {gap}");
            let gap = rx_inequality_gap(&sp, &f, &filt, 1.5).unwrap();
            assert!(gap >= -1e-9, "p=1.5 gap {gap}");
        }
        // single term: gap = ((p-1)^{-1/2} - 1)‖d_0‖
        let f = rv(&[1.0; 8]);
        let filt = Filtration::new(vec![Partition::trivial(8)]).unwrap();
        let gap = rx_inequality_gap(&sp, &f, &filt, 1.5).unwrap();
        assert!((gap - (2.0f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn convexity_gap_examples() {
        let sp = GroundSpace::uniform(4);
        let b = Partition::new(
            4,
            vec![Subset::from_indices(4, &[0, 1]), Subset::from_indices(4, &[2, 3])],
        )
        .unwrap();
        // B-measurable: remainder vanishes, gap 0
        let f = rv(&[3.0, 3.0, -1.0, -1.0]);
        assert!(rx_convexity_gap(&sp, &f, &b, 1.5).unwrap().abs() < 1e-12);
        // mean zero against the trivial partition: gap = (2-p)‖f‖²
        let g = rv(&[1.0, -1.0, 1.0, -1.0]);
        let gap = rx_convexity_gap(&sp, &g, &Partition::trivial(4), 1.5).unwrap();
        assert!((gap - 0.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_gap_examples() {
        let sp = GroundSpace::uniform(4);
        let x = rv(&[1.0, -2.0, 0.5, 3.0]);
        let zero = RandomVar::constant(4, 0.0);
        assert!(bcl_inequality_gap(&sp, &x, &zero, 1.3).unwrap().abs() < 1e-12);
        // x = y: gap = 2‖x‖²(1 - p/2)
        let n = sp.lp_norm(&x, 1.3).unwrap();
        let gap = bcl_inequality_gap(&sp, &x, &x, 1.3).unwrap();
        assert!((gap - 2.0 * n * n * (1.0 - 1.3 / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn p_domain_enforced() {
        let sp = GroundSpace::uniform(2);
        let f = rv(&[1.0, 2.0]);
        let filt = Filtration::new(vec![Partition::trivial(2)]).unwrap();
        for bad in [1.0, 2.5, 0.0] {
            assert!(rx_inequality_gap(&sp, &f, &filt, bad).is_err());
            assert!(rx_convexity_gap(&sp, &f, &Partition::trivial(2), bad).is_err());
            assert!(bcl_inequality_gap(&sp, &f, &f, bad).is_err());
        }
    }

    #[test]
    fn block_sums_bounded() {
        let sp = GroundSpace::uniform(8);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let f = RandomVar::new((0..8).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
            let filt = random_filtration(8, 4, &mut rng);
            let excess = block_sum_excess(&sp, &f, &filt, 1.5).unwrap();
            assert!(excess <= 1e-9, "excess {excess}");
        }
    }
}
