//! The decomposition engine: witness-driven refinement, the energy-increment
//! loop producing `f = f_str + f_err + f_unf`, and the multi-function variant
//! over an increasing sequence of semirings.
//!
//! The loop is guaranteed to terminate by the square-function estimate; the
//! iteration cap exists to convert a hypothetical non-termination bug into a
//! loud error instead of a hang. All certificates are recomputed after the
//! run with the same oracle mode that drove the refinement.

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::growth::{GrowthFunction, Iterated};
use crate::semiring::Semiring;
use crate::space::{Partition, RandomVar};
use crate::uniformity::{find_violating_set, uniformity_norm, Mode};
use crate::DEFAULT_TOL;

/// Refinement steps allowed before concluding the loop is broken.
pub const STEP_CAP: usize = 1_000_000;

/// One measured uniformity certificate.
#[derive(Debug, Clone)]
pub struct UnfNorm {
    /// Meaning depends on context: `|P|` for the single-semiring run, the
    /// semiring index for the multi run.
    pub index: u64,
    /// Guaranteed bound `1/F(index)`.
    pub bound: f64,
    /// Recomputed norm of the unstructured part (of the normalized input).
    pub measured: f64,
}

#[derive(Debug, Clone)]
pub struct Certificates {
    /// `L_p` norm of the error part of the normalized input.
    pub err_lp: f64,
    pub unf_norms: Vec<UnfNorm>,
    /// Energy jumps taken by the outer loop.
    pub outer_iterations: usize,
    /// Total refinement steps across all inner runs.
    pub refinement_steps: usize,
    /// The input was divided by this before running; 1 when already in range.
    pub scale: f64,
    /// Exponent actually used (inputs with p > 2 run at p = 2).
    pub p_used: f64,
    /// True iff every certificate was recomputed with an exact oracle.
    pub exact: bool,
    /// Multi runs record the semiring index the final partition lives in.
    pub stage_index: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub p_partition: Partition,
    pub q_partition: Partition,
    pub f_str: RandomVar,
    pub f_err: RandomVar,
    pub f_unf: RandomVar,
    pub p: f64,
    pub sigma: f64,
    pub certificates: Certificates,
}

#[derive(Debug, Clone)]
pub struct MultiDecomposition {
    /// The index `N` such that the coarse partition lives in `S_N`.
    pub n_index: u64,
    pub p_partition: Partition,
    pub q_partition: Partition,
    pub parts: Vec<Decomposition>,
}

fn validate_p_sigma(p: f64, sigma: f64) -> Result<f64> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::ParameterDomain(format!(
            "p must be > 1 (the decomposition bound fails at p = 1), got {p}"
        )));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "sigma must lie in (0, 1], got {sigma}"
        )));
    }
    // p > 2 reduces to p = 2: the L_2 guarantee implies the L_p one after
    // normalization on a probability space.
    Ok(p.min(2.0))
}

/// One witness-driven refinement: if some member `S` has
/// `|∫_S (f - E(f|A_Q))| > delta`, split every cell `C` of `Q` into `C ∩ S`
/// plus the subtraction pieces of `C \ S` and return the refinement;
/// otherwise `None`. The result has at most `(k+1)|Q|` cells, consists of
/// members, and strictly increases the conditional `L_p` energy by more than
/// `delta`.
pub fn refine_step(
    f: &RandomVar,
    q: &Partition,
    sr: &Semiring,
    delta: f64,
    mode: Mode,
) -> Result<Option<Partition>> {
    let space = sr.space();
    if !sr.contains_partition(q) {
        return Err(Error::NotAMember);
    }
    let g = f.sub(&space.cond_expectation(f, q)?);
    let witness = match find_violating_set(&g, sr, delta, mode, DEFAULT_TOL)? {
        Some(w) => w,
        None => return Ok(None),
    };
    let mut cells = Vec::with_capacity(q.n_cells() * (sr.k() + 1));
    for c in q.cells() {
        let inter = c.intersect(&witness.set);
        if !inter.is_empty() {
            cells.push(inter);
        }
        cells.extend(sr.subtract(c, &witness.set)?);
    }
    let r = Partition::new(space.len(), cells)?;
    debug_assert!(r.n_cells() <= q.n_cells() * (sr.k() + 1));
    debug_assert!(r.refines(q));
    Ok(Some(r))
}

/// Single-semiring decomposition: refine until the unstructured remainder is
/// below `1/F(|Q|)` in the semiring norm, restarting the inner loop whenever
/// the conditional expectation moves more than `sigma` in `L_p`.
pub fn decompose(
    f: &RandomVar,
    sr: &Semiring,
    p: f64,
    sigma: f64,
    growth: &GrowthFunction,
    mode: Mode,
) -> Result<Decomposition> {
    let space = sr.space();
    let p_used = validate_p_sigma(p, sigma)?;
    let norm = space.lp_norm(f, p_used)?;
    let scale = if norm > 1.0 { norm } else { 1.0 };
    let g = f.scale(1.0 / scale);

    let n = space.len();
    let mut coarse = Partition::trivial(n);
    let mut fine = coarse.clone();
    let mut outer = 0usize;
    let mut steps = 0usize;
    loop {
        let ec = space.cond_expectation(&g, &coarse)?;
        let ef = space.cond_expectation(&g, &fine)?;
        if space.lp_norm(&ef.sub(&ec), p_used)? > sigma {
            coarse = fine.clone();
            outer += 1;
            continue;
        }
        let delta = 1.0 / growth.eval_f64(fine.n_cells() as u64);
        match refine_step(&g, &fine, sr, delta, mode)? {
            None => break,
            Some(r) => {
                fine = r;
                steps += 1;
                if steps > STEP_CAP {
                    return Err(Error::IterationCapExceeded { cap: STEP_CAP });
                }
            }
        }
    }

    let e_coarse = space.cond_expectation(f, &coarse)?;
    let e_fine = space.cond_expectation(f, &fine)?;
    let f_str = e_coarse.clone();
    let f_err = e_fine.sub(&e_coarse);
    let f_unf = f.sub(&e_fine);

    let g_err = f_err.scale(1.0 / scale);
    let g_unf = f_unf.scale(1.0 / scale);
    let err_lp = space.lp_norm(&g_err, p_used)?;
    let measured = uniformity_norm(&g_unf, sr, mode)?;
    let m = coarse.n_cells() as u64;
    let certificates = Certificates {
        err_lp,
        unf_norms: vec![UnfNorm {
            index: m,
            bound: 1.0 / growth.eval_f64(m),
            measured: measured.value,
        }],
        outer_iterations: outer,
        refinement_steps: steps,
        scale,
        p_used,
        exact: measured.exact,
        stage_index: None,
    };
    Ok(Decomposition {
        p_partition: coarse,
        q_partition: fine,
        f_str,
        f_err,
        f_unf,
        p,
        sigma,
        certificates,
    })
}

/// `F^(i)(0)` as a saturating u64 index into a finite list.
fn iterate_index(growth: &GrowthFunction, i: u64, cap: u64) -> u64 {
    match growth.iterate0(&BigUint::from(i)) {
        Iterated::Exact(v) => v
            .ceil()
            .to_integer()
            .to_u64()
            .map_or(cap, |x| x.min(cap)),
        Iterated::Overflow { .. } => cap,
    }
}

/// `H(n) = F^(n+2)(0)` as f64, saturating to infinity.
fn stage_threshold(growth: &GrowthFunction, n: u64) -> f64 {
    match growth.iterate0(&BigUint::from(n.saturating_add(2))) {
        Iterated::Exact(v) => v.to_f64().unwrap_or(f64::INFINITY),
        Iterated::Overflow { .. } => f64::INFINITY,
    }
}

fn spot_check_increasing(semirings: &[Semiring]) -> Result<()> {
    for i in 0..semirings.len().saturating_sub(1) {
        let (a, b) = (&semirings[i], &semirings[i + 1]);
        if a.space().len() != b.space().len() {
            return Err(Error::DimensionMismatch {
                expected: a.space().len(),
                got: b.space().len(),
            });
        }
        if let Ok(members) = a.enumerate_members(512) {
            for m in members.iter().take(64) {
                if !b.is_member(m) {
                    return Err(Error::NonIncreasingSemirings { index: i });
                }
            }
        }
    }
    Ok(())
}

/// Shared decomposition of a family of functions over an increasing semiring
/// sequence. One pair of partitions serves every function; the stage
/// bookkeeping walks the sequence through the growth-function reindexing
/// `i -> F^(i)(0)`, treating the finite list as extended constantly past its
/// last entry.
pub fn decompose_multi(
    fs: &[RandomVar],
    semirings: &[Semiring],
    p: f64,
    sigma: f64,
    growth: &GrowthFunction,
    mode: Mode,
) -> Result<MultiDecomposition> {
    if fs.is_empty() || semirings.is_empty() {
        return Err(Error::ParameterDomain(
            "need at least one function and one semiring".into(),
        ));
    }
    let p_used = validate_p_sigma(p, sigma)?;
    spot_check_increasing(semirings)?;
    let space = semirings[0].space();
    let last = (semirings.len() - 1) as u64;
    let stage = |i: u64| -> &Semiring {
        &semirings[iterate_index(growth, i, last) as usize]
    };

    let ell = fs.len() as f64;
    let l_budget = (ell / (sigma * sigma * (p_used - 1.0))).ceil() as usize;
    // n_0 = 0, n_{j+1} = n_j + ceil(sigma^2 l H(n_j)^2 / (p-1))
    let mut n_seq: Vec<u64> = vec![0];
    for _ in 0..l_budget {
        let prev = *n_seq.last().unwrap();
        let h = stage_threshold(growth, prev);
        let inc = (sigma * sigma * ell * h * h / (p_used - 1.0)).ceil();
        let next = if inc.is_finite() {
            prev.saturating_add(inc as u64)
        } else {
            u64::MAX
        };
        n_seq.push(next);
    }

    let scales: Vec<f64> = fs
        .iter()
        .map(|f| {
            let norm = space.lp_norm(f, p_used)?;
            Ok(if norm > 1.0 { norm } else { 1.0 })
        })
        .collect::<Result<_>>()?;
    let gs: Vec<RandomVar> = fs
        .iter()
        .zip(&scales)
        .map(|(f, s)| f.scale(1.0 / s))
        .collect();

    let n = space.len();
    let mut coarse = Partition::trivial(n);
    let mut fine = coarse.clone();
    let mut j = 0usize; // outer stage
    let mut j_idx: u64 = 0; // current refinement depth J
    let mut coarse_depth: u64 = 0; // n_j at the time coarse was fixed
    let mut outer = 0usize;
    let mut steps = 0usize;
    'outer: loop {
        // (a) energy jump for any function in the family
        for g in &gs {
            let ec = space.cond_expectation(g, &coarse)?;
            let ef = space.cond_expectation(g, &fine)?;
            if space.lp_norm(&ef.sub(&ec), p_used)? > sigma {
                coarse = fine.clone();
                coarse_depth = j_idx;
                j += 1;
                outer += 1;
                if j > l_budget {
                    return Err(Error::Internal(
                        "energy jump budget exceeded; the termination bound failed".into(),
                    ));
                }
                continue 'outer;
            }
        }
        // (b)/(c) witness-driven refinement at threshold 1/H(n_j)
        let n_j = n_seq[j.min(n_seq.len() - 1)];
        let h = stage_threshold(growth, n_j);
        let delta = if h.is_finite() { 1.0 / h } else { 0.0 };
        let sr = stage(j_idx + 1);
        let mut refined = false;
        for g in &gs {
            if let Some(r) = refine_step(g, &fine, sr, delta, mode)? {
                fine = r;
                j_idx += 1;
                steps += 1;
                if steps > STEP_CAP {
                    return Err(Error::IterationCapExceeded { cap: STEP_CAP });
                }
                refined = true;
                break;
            }
        }
        if !refined {
            break;
        }
    }

    // N = F^(n_j)(0) indexes the semiring the coarse partition lives in.
    let n_index = iterate_index(growth, coarse_depth, last);
    let f_n = growth.eval_f64(n_index);
    let stage_index = iterate_index(growth, j_idx, last);

    let mut parts = Vec::with_capacity(fs.len());
    for (f, &scale) in fs.iter().zip(&scales) {
        let e_coarse = space.cond_expectation(f, &coarse)?;
        let e_fine = space.cond_expectation(f, &fine)?;
        let f_str = e_coarse.clone();
        let f_err = e_fine.sub(&e_coarse);
        let f_unf = f.sub(&e_fine);
        let g_unf = f_unf.scale(1.0 / scale);
        let err_lp = space.lp_norm(&f_err.scale(1.0 / scale), p_used)?;
        let mut unf_norms = Vec::new();
        let mut exact = true;
        for (i, sr_i) in semirings.iter().enumerate() {
            if (i as f64) > f_n {
                break;
            }
            let res = uniformity_norm(&g_unf, sr_i, mode)?;
            exact &= res.exact;
            unf_norms.push(UnfNorm {
                index: i as u64,
                bound: 1.0 / growth.eval_f64(i as u64),
                measured: res.value,
            });
        }
        parts.push(Decomposition {
            p_partition: coarse.clone(),
            q_partition: fine.clone(),
            f_str,
            f_err,
            f_unf,
            p,
            sigma,
            certificates: Certificates {
                err_lp,
                unf_norms,
                outer_iterations: outer,
                refinement_steps: steps,
                scale,
                p_used,
                exact,
                stage_index: Some(stage_index),
            },
        });
    }
    Ok(MultiDecomposition {
        n_index,
        p_partition: coarse,
        q_partition: fine,
        parts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{GroundSpace, Subset};

    fn sign_matrix() -> (Semiring, RandomVar) {
        let base = GroundSpace::uniform(2);
        let sr = Semiring::rectangles(&base);
        let f = RandomVar::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        (sr, f)
    }

    fn check_sum(d: &Decomposition, f: &RandomVar) {
        let total = d.f_str.add(&d.f_err).add(&d.f_unf);
        assert!(total.max_abs_diff(f) <= 1e-9);
    }

    #[test]
    fn refine_step_none_when_flat() {
        let (sr, _) = sign_matrix();
        let f = RandomVar::constant(4, 3.0);
        let q = Partition::trivial(4);
        // f equals its conditional expectation, so the remainder vanishes
        assert!(refine_step(&f, &q, &sr, 0.1, Mode::Exact).unwrap().is_none());
    }

    #[test]
    fn refine_step_none_above_l1() {
        let (sr, f) = sign_matrix();
        let q = Partition::trivial(4);
        // remainder has L1 norm 1; no member can beat a threshold of 1
        assert!(refine_step(&f, &q, &sr, 1.0, Mode::Exact).unwrap().is_none());
    }

    #[test]
    fn refine_step_splits_along_witness() {
        let (sr, f) = sign_matrix();
        let q = Partition::trivial(4);
        let r = refine_step(&f, &q, &sr, 0.2, Mode::Exact).unwrap().unwrap();
        assert!(r.n_cells() <= 3);
        assert!(r.cells().contains(&Subset::from_indices(4, &[0])));
        let space = sr.space();
        let e = space.cond_expectation(&f, &r).unwrap();
        assert!(space.lp_norm(&e, 2.0).unwrap() > 0.2);
        for c in r.cells() {
            assert!(sr.is_member(c));
        }
    }

    #[test]
    fn refine_step_rejects_foreign_partition() {
        let base = GroundSpace::uniform(3);
        let sr = Semiring::rectangles(&base);
        let f = RandomVar::constant(9, 0.0);
        // the diagonal is not a rectangle
        let diag = Subset::from_indices(9, &[0, 4, 8]);
        let q = Partition::new(9, vec![diag.clone(), diag.complement()]).unwrap();
        assert!(matches!(
            refine_step(&f, &q, &sr, 0.1, Mode::Exact),
            Err(Error::NotAMember)
        ));
    }

    #[test]
    fn constant_function_decomposes_trivially() {
        let (sr, _) = sign_matrix();
        let f = RandomVar::constant(4, 0.5);
        let g = GrowthFunction::successor();
        let d = decompose(&f, &sr, 2.0, 0.5, &g, Mode::Exact).unwrap();
        assert_eq!(d.p_partition.n_cells(), 1);
        assert_eq!(d.q_partition.n_cells(), 1);
        assert!(d.f_err.max_abs_diff(&RandomVar::constant(4, 0.0)) <= 1e-12);
        assert!(d.f_unf.max_abs_diff(&RandomVar::constant(4, 0.0)) <= 1e-12);
        check_sum(&d, &f);
    }

    #[test]
    fn sign_matrix_decomposition_certified() {
        let (sr, f) = sign_matrix();
        let g = GrowthFunction::successor();
        let d = decompose(&f, &sr, 2.0, 0.1, &g, Mode::Exact).unwrap();
        check_sum(&d, &f);
        assert!(d.certificates.err_lp <= 0.1 + 1e-9);
        let cert = &d.certificates.unf_norms[0];
        assert!(cert.measured <= cert.bound + 1e-9);
        assert!(d.certificates.exact);
        assert!(d.q_partition.refines(&d.p_partition));
        for c in d.q_partition.cells() {
            assert!(sr.is_member(c));
        }
    }

    #[test]
    fn semiring_measurable_function_fully_captured() {
        let sp = GroundSpace::uniform(4);
        let cells = Partition::new(
            4,
            vec![Subset::from_indices(4, &[0, 1]), Subset::from_indices(4, &[2, 3])],
        )
        .unwrap();
        let sr = Semiring::from_algebra(sp, cells).unwrap();
        let f = RandomVar::new(vec![0.8, 0.8, -0.6, -0.6]).unwrap();
        // steep growth forces refinement below the measurable structure
        let g = GrowthFunction::affine_f64(8.0, 8.0).unwrap();
        let d = decompose(&f, &sr, 2.0, 1.0, &g, Mode::Exact).unwrap();
        check_sum(&d, &f);
        assert!(d.certificates.unf_norms[0].measured <= 1e-9);
        assert!(d.certificates.refinement_steps <= 4);
    }

    #[test]
    fn rescaling_recorded_and_undone() {
        let (sr, f) = sign_matrix();
        let big = f.scale(5.0);
        let g = GrowthFunction::successor();
        let d = decompose(&big, &sr, 2.0, 0.1, &g, Mode::Exact).unwrap();
        assert!((d.certificates.scale - 5.0).abs() < 1e-9);
        check_sum(&d, &big);
        assert!(d.certificates.err_lp <= 0.1 + 1e-9);
    }

    #[test]
    fn p_domain_and_reduction() {
        let (sr, f) = sign_matrix();
        let g = GrowthFunction::successor();
        assert!(decompose(&f, &sr, 1.0, 0.5, &g, Mode::Exact).is_err());
        assert!(decompose(&f, &sr, 2.0, 0.0, &g, Mode::Exact).is_err());
        let d = decompose(&f, &sr, 3.0, 0.5, &g, Mode::Exact).unwrap();
        assert_eq!(d.certificates.p_used, 2.0);
    }

    #[test]
    fn outer_iterations_respect_budget() {
        let (sr, f) = sign_matrix();
        let g = GrowthFunction::successor();
        for sigma in [0.1, 0.25, 0.5] {
            let d = decompose(&f, &sr, 2.0, sigma, &g, Mode::Exact).unwrap();
            let budget = (1.0 / (sigma * sigma)).ceil() as usize;
            assert!(d.certificates.outer_iterations < budget);
        }
    }

    #[test]
    fn multi_constant_sequence_certified() {
        let (sr, f) = sign_matrix();
        let g = GrowthFunction::successor();
        let semirings = vec![sr.clone(), sr.clone(), sr];
        let fs = vec![f.clone(), f.scale(-1.0)];
        let md = decompose_multi(&fs, &semirings, 2.0, 0.3, &g, Mode::Exact).unwrap();
        assert_eq!(md.parts.len(), 2);
        for (d, f) in md.parts.iter().zip(&fs) {
            check_sum(d, f);
            assert!(d.certificates.err_lp <= 0.3 + 1e-9);
            for c in &d.certificates.unf_norms {
                assert!(c.measured <= c.bound + 1e-9, "index {} measured {} bound {}", c.index, c.measured, c.bound);
            }
        }
        // negating the function leaves the shared partition unchanged
        assert_eq!(md.parts[0].q_partition, md.parts[1].q_partition);
    }

    #[test]
    fn multi_single_constant_function() {
        let base = GroundSpace::uniform(2);
        let sr = Semiring::rectangles(&base);
        let f = RandomVar::constant(4, 0.25);
        let g = GrowthFunction::successor();
        let md = decompose_multi(&[f.clone()], &[sr], 2.0, 0.5, &g, Mode::Exact).unwrap();
        assert_eq!(md.p_partition.n_cells(), 1);
        check_sum(&md.parts[0], &f);
    }

    #[test]
    fn multi_rejects_shrinking_sequence() {
        let base = GroundSpace::uniform(2);
        let big = Semiring::rectangles(&base);
        let space = big.space().clone();
        let small = Semiring::from_algebra(space, Partition::trivial(4)).unwrap();
        let f = RandomVar::constant(4, 0.0);
        let g = GrowthFunction::successor();
        assert!(matches!(
            decompose_multi(&[f], &[big, small], 2.0, 0.5, &g, Mode::Exact),
            Err(Error::NonIncreasingSemirings { index: 0 })
        ));
    }
}
