//! S-uniformity norms `sup { |∫_S f| : S in the semiring }` with exact
//! witness oracles per semiring kind, a deterministic alternating-maximization
//! heuristic, and the cut norm specialization.
//!
//! Exact strategies exploit the structure of the supremum: for an algebra the
//! optimum is the union of cells with positive (resp. negative) integrals;
//! for intersection semirings all but one factor choice is enumerated and the
//! last (an algebra) is optimized in closed form; intervals are scanned
//! directly.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::semiring::{Kind, Lift, Semiring, ENUM_FEASIBLE_CAP};
use crate::space::{GroundSpace, Partition, RandomVar, Subset};
use crate::DEFAULT_TOL;

/// Default cap on the base size of the exact cut-norm half-enumeration.
pub const CUT_NORM_BASE_CAP: usize = 20;

/// A maximizing (or best-found) semiring member for `|∫_S f|`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub set: Subset,
    /// Signed integral `∫_set f`.
    pub value: f64,
}

impl Witness {
    pub fn abs_value(&self) -> f64 {
        self.value.abs()
    }

    fn empty(n: usize) -> Self {
        Witness {
            set: Subset::empty(n),
            value: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NormResult {
    pub value: f64,
    pub witness: Witness,
    /// True iff produced by an exhaustive oracle.
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Heuristic { seed: u64 },
}

/// Running maximum with canonical tie-breaking: on equal absolute value the
/// lexicographically smaller witness set wins.
struct Best {
    value: f64,
    witness: Witness,
}

impl Best {
    fn new(n: usize) -> Self {
        Best {
            value: 0.0,
            witness: Witness::empty(n),
        }
    }

    fn consider(&mut self, set: &Subset, integral: f64) {
        let a = integral.abs();
        if a > self.value || (a == self.value && *set < self.witness.set) {
            self.value = a;
            self.witness = Witness {
                set: set.clone(),
                value: integral,
            };
        }
    }
}

/// The S-uniformity norm of `f`. Exact mode returns the true supremum with a
/// maximizing witness; heuristic mode a reproducible lower bound.
pub fn uniformity_norm(f: &RandomVar, sr: &Semiring, mode: Mode) -> Result<NormResult> {
    let space = sr.space();
    if f.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: f.len(),
        });
    }
    match mode {
        Mode::Exact => exact_norm(f, sr),
        Mode::Heuristic { seed } => heuristic_norm(f, sr, seed),
    }
}

/// A member with `|∫_S f| > threshold` (strictly, beyond the tolerance), or
/// `None`. In exact mode `None` certifies that the supremum is at most
/// `threshold + tol`.
pub fn find_violating_set(
    f: &RandomVar,
    sr: &Semiring,
    threshold: f64,
    mode: Mode,
    tol: f64,
) -> Result<Option<Witness>> {
    if threshold < 0.0 {
        return Err(Error::ParameterDomain("threshold must be >= 0".into()));
    }
    let res = uniformity_norm(f, sr, mode)?;
    if res.value > threshold + tol {
        Ok(Some(res.witness))
    } else {
        Ok(None)
    }
}

// ---- exact strategies ------------------------------------------------------

fn exact_norm(f: &RandomVar, sr: &Semiring) -> Result<NormResult> {
    let space = sr.space();
    let n = space.len();
    let mut best = Best::new(n);
    match sr.kind() {
        Kind::Algebra(p) => {
            algebra_closed_form(f, space, p.cells(), &Subset::full(n), &mut best)?;
        }
        Kind::Intervals { pos } => {
            // Prefix sums over the ordered points make each interval O(1).
            let mut by_rank = vec![0usize; n];
            for (i, &r) in pos.iter().enumerate() {
                by_rank[r] = i;
            }
            let mut prefix = vec![0.0; n + 1];
            for r in 0..n {
                let i = by_rank[r];
                prefix[r + 1] = prefix[r] + space.weight(i) * f.value(i);
            }
            for lo in 0..n {
                for hi in lo..n {
                    let integral = prefix[hi + 1] - prefix[lo];
                    let mut s = Subset::empty(n);
                    for r in lo..=hi {
                        s.insert(by_rank[r]);
                    }
                    best.consider(&s, integral);
                }
            }
        }
        Kind::SymmetricRectangles { .. } => {
            let members = enumerate_or_infeasible(sr)?;
            for m in &members {
                best.consider(m, space.integral_over(f, m)?);
            }
        }
        Kind::Intersection { parts } => {
            intersection_exact(f, space, parts, &mut best)?;
        }
    }
    Ok(NormResult {
        value: best.value,
        witness: best.witness,
        exact: true,
    })
}

/// Optimal algebra member restricted to `within`: the union of cells whose
/// integral over `cell ∩ within` is positive (resp. negative).
fn algebra_closed_form(
    f: &RandomVar,
    space: &GroundSpace,
    cells: &[Subset],
    within: &Subset,
    best: &mut Best,
) -> Result<()> {
    let n = space.len();
    let mut pos = Subset::empty(n);
    let mut neg = Subset::empty(n);
    let (mut pos_val, mut neg_val) = (0.0, 0.0);
    for cell in cells {
        let c = cell.intersect(within);
        let v = space.integral_over(f, &c)?;
        if v > 0.0 {
            pos = pos.union(&c);
            pos_val += v;
        } else if v < 0.0 {
            neg = neg.union(&c);
            neg_val += v;
        }
    }
    best.consider(&Subset::empty(n), 0.0);
    best.consider(&pos, pos_val);
    best.consider(&neg, neg_val);
    Ok(())
}

fn enumerate_or_infeasible(sr: &Semiring) -> Result<Vec<Subset>> {
    let est = sr.member_count_estimate();
    if est > ENUM_FEASIBLE_CAP {
        return Err(Error::ExactInfeasible {
            estimated_size: est,
            cap: ENUM_FEASIBLE_CAP,
        });
    }
    sr.enumerate_members(ENUM_FEASIBLE_CAP as usize)
}

/// Exact search over an intersection semiring: enumerate member choices for
/// all factors except one algebra factor, which is optimized in closed form.
fn intersection_exact(
    f: &RandomVar,
    space: &GroundSpace,
    parts: &[Lift],
    best: &mut Best,
) -> Result<()> {
    let n = space.len();
    // Prefer a closed-form factor: the last lifted algebra, if any.
    let closed = parts
        .iter()
        .rposition(|p| matches!(p.sub.kind(), Kind::Algebra(_)));
    let enumerated: Vec<&Lift> = parts
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != closed)
        .map(|(_, p)| p)
        .collect();
    let est: f64 = enumerated
        .iter()
        .map(|p| p.sub.member_count_estimate())
        .product();
    if est > ENUM_FEASIBLE_CAP {
        return Err(Error::ExactInfeasible {
            estimated_size: est,
            cap: ENUM_FEASIBLE_CAP,
        });
    }
    let lists: Vec<Vec<Subset>> = enumerated
        .iter()
        .map(|p| {
            p.sub
                .enumerate_members(ENUM_FEASIBLE_CAP as usize)
                .map(|ms| ms.iter().map(|m| p.pull_back(m)).collect())
        })
        .collect::<Result<_>>()?;
    let closed_cells: Option<Vec<Subset>> = closed.map(|i| {
        let part = &parts[i];
        match part.sub.kind() {
            Kind::Algebra(p) => p.cells().iter().map(|c| part.pull_back(c)).collect(),
            _ => unreachable!("closed factor is an algebra"),
        }
    });

    let mut idx = vec![0usize; lists.len()];
    loop {
        let mut prefix = Subset::full(n);
        for (members, &i) in lists.iter().zip(&idx) {
            prefix = prefix.intersect(&members[i]);
        }
        match &closed_cells {
            Some(cells) => algebra_closed_form(f, space, cells, &prefix, best)?,
            None => best.consider(&prefix, space.integral_over(f, &prefix)?),
        }
        // odometer over the enumerated factors
        let mut c = 0;
        loop {
            if c == lists.len() {
                return Ok(());
            }
            idx[c] += 1;
            if idx[c] < lists[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

// ---- heuristic -------------------------------------------------------------

const HEURISTIC_RESTARTS: usize = 8;
const HEURISTIC_SWEEP_CAP: usize = 64;

fn heuristic_norm(f: &RandomVar, sr: &Semiring, seed: u64) -> Result<NormResult> {
    let space = sr.space();
    let n = space.len();
    match sr.kind() {
        // Closed-form kinds are cheap; report the exact answer.
        Kind::Algebra(_) | Kind::Intervals { .. } => exact_norm(f, sr),
        Kind::SymmetricRectangles { base_len } => {
            // Run the rectangle heuristic and keep the best symmetric piece
            // of the rectangle witness.
            let base = sub_base_space(space, *base_len);
            let rects = Semiring::rectangles(&base);
            let res = heuristic_norm(f, &rects, seed)?;
            let mut best = Best::new(n);
            best.consider(&Subset::empty(n), 0.0);
            for piece in symmetric_split(&res.witness.set, *base_len) {
                best.consider(&piece, space.integral_over(f, &piece)?);
            }
            Ok(NormResult {
                value: best.value,
                witness: best.witness,
                exact: false,
            })
        }
        Kind::Intersection { parts } => {
            let mut best = Best::new(n);
            best.consider(&Subset::empty(n), 0.0);
            for restart in 0..HEURISTIC_RESTARTS {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(restart as u64));
                alternating_maximization(f, space, parts, &mut rng, &mut best)?;
            }
            Ok(NormResult {
                value: best.value,
                witness: best.witness,
                exact: false,
            })
        }
    }
}

/// Alternating maximization: fix all factors but one, optimize that factor,
/// cycle until a full sweep yields no improvement.
fn alternating_maximization(
    f: &RandomVar,
    space: &GroundSpace,
    parts: &[Lift],
    rng: &mut ChaCha8Rng,
    best: &mut Best,
) -> Result<()> {
    let n = space.len();
    let m = parts.len();
    // Random initial member per factor.
    let mut chosen: Vec<Subset> = parts
        .iter()
        .map(|p| random_lifted_member(p, n, rng))
        .collect::<Result<_>>()?;
    let current = |chosen: &[Subset]| {
        chosen
            .iter()
            .fold(Subset::full(n), |acc, c| acc.intersect(c))
    };
    let mut value = space.integral_over(f, &current(&chosen))?.abs();
    for _ in 0..HEURISTIC_SWEEP_CAP {
        let mut improved = false;
        for j in 0..m {
            let mut context = Subset::full(n);
            for (i, c) in chosen.iter().enumerate() {
                if i != j {
                    context = context.intersect(c);
                }
            }
            if let Some((cand, cand_val)) = optimize_factor(f, space, &parts[j], &context)? {
                if cand_val.abs() > value + 1e-15 {
                    chosen[j] = cand;
                    value = cand_val.abs();
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    let set = current(&chosen);
    best.consider(&set, space.integral_over(f, &set)?);
    Ok(())
}

fn optimize_factor(
    f: &RandomVar,
    space: &GroundSpace,
    part: &Lift,
    context: &Subset,
) -> Result<Option<(Subset, f64)>> {
    let n = space.len();
    match part.sub.kind() {
        Kind::Algebra(p) => {
            let mut best = Best::new(n);
            let cells: Vec<Subset> = p.cells().iter().map(|c| part.pull_back(c)).collect();
            algebra_closed_form(f, space, &cells, context, &mut best)?;
            // `best.witness.set` is already intersected with the context;
            // reconstruct the factor member as its hull in the lift.
            let member = part.pull_back(&part.sub.hull(&part.project(&best.witness.set)));
            let val = space.integral_over(f, &context.intersect(&member))?;
            Ok(Some((member, val)))
        }
        _ => {
            let est = part.sub.member_count_estimate();
            if est > 4096.0 {
                return Ok(None);
            }
            let members = part.sub.enumerate_members(4096)?;
            let mut out: Option<(Subset, f64)> = None;
            for m in members {
                let lifted = part.pull_back(&m);
                let v = space.integral_over(f, &context.intersect(&lifted))?;
                if out.as_ref().map_or(true, |(_, bv)| v.abs() > bv.abs()) {
                    out = Some((lifted, v));
                }
            }
            Ok(out)
        }
    }
}

fn random_lifted_member(part: &Lift, _n: usize, rng: &mut ChaCha8Rng) -> Result<Subset> {
    match part.sub.kind() {
        Kind::Algebra(p) => {
            let mut member = Subset::empty(part.sub.space().len());
            for c in p.cells() {
                if rng.gen_bool(0.5) {
                    member = member.union(c);
                }
            }
            Ok(part.pull_back(&member))
        }
        _ => {
            let members = part.sub.enumerate_members(4096).unwrap_or_else(|_| {
                vec![Subset::full(part.sub.space().len())]
            });
            let i = rng.gen_range(0..members.len());
            Ok(part.pull_back(&members[i]))
        }
    }
}

/// Split a rectangle of base^2 into at most 4 disjoint symmetric-rectangle
/// members via `{S ∩ T, S \ T, T \ S}`.
pub fn symmetric_split(rect_set: &Subset, base_len: usize) -> Vec<Subset> {
    use crate::semiring::{projections, rect};
    if rect_set.is_empty() {
        return Vec::new();
    }
    let (s, t) = projections(rect_set, base_len);
    let both = s.intersect(&t);
    let s_only = s.difference(&t);
    let t_only = t.difference(&s);
    let mut out = Vec::new();
    for piece in [
        rect(&both, &both, base_len),
        rect(&both, &t_only, base_len),
        rect(&s_only, &both, base_len),
        rect(&s_only, &t_only, base_len),
    ] {
        if !piece.is_empty() {
            out.push(piece);
        }
    }
    out
}

/// Recover the base space of a product `base x base` by marginalizing the
/// product weights over the second coordinate.
fn sub_base_space(product: &GroundSpace, base_len: usize) -> GroundSpace {
    let mut weights = vec![0.0; base_len];
    for i in 0..base_len {
        for j in 0..base_len {
            weights[i] += product.weight(i * base_len + j);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    GroundSpace::weighted(weights).expect("marginal of a probability vector")
}

// ---- cut norm --------------------------------------------------------------

/// Exact cut norm of `f` on `base x base` via half-enumeration: for each
/// `S ⊆ base` the inner optimum over `T` is closed-form (points with
/// positive, resp. negative, S-marginal). Cost `O(2^|base| · |base|^2)`.
pub fn cut_norm_exact(f: &RandomVar, base: &GroundSpace, base_cap: usize) -> Result<NormResult> {
    let b = base.len();
    if f.len() != b * b {
        return Err(Error::DimensionMismatch {
            expected: b * b,
            got: f.len(),
        });
    }
    if b > base_cap {
        return Err(Error::ExactInfeasible {
            estimated_size: 2f64.powi(b as i32),
            cap: 2f64.powi(base_cap as i32),
        });
    }
    let mut best = Best::new(b * b);
    best.consider(&Subset::empty(b * b), 0.0);
    for mask in 0u64..(1u64 << b) {
        let mut marginal = vec![0.0; b];
        for s in 0..b {
            if mask >> s & 1 == 1 {
                for t in 0..b {
                    marginal[t] += base.weight(s) * base.weight(t) * f.value(s * b + t);
                }
            }
        }
        let s_side = mask_subset(b, mask);
        for sign in [1.0, -1.0] {
            let mut t_side = Subset::empty(b);
            let mut val = 0.0;
            for (t, &mv) in marginal.iter().enumerate() {
                if sign * mv > 0.0 {
                    t_side.insert(t);
                    val += mv;
                }
            }
            let set = crate::semiring::rect(&s_side, &t_side, b);
            best.consider(&set, val);
        }
    }
    Ok(NormResult {
        value: best.value,
        witness: best.witness,
        exact: true,
    })
}

fn mask_subset(n: usize, mask: u64) -> Subset {
    let mut s = Subset::empty(n);
    for i in 0..n {
        if mask >> i & 1 == 1 {
            s.insert(i);
        }
    }
    s
}

// ---- Lemma 2.5 check -------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub norm_s: f64,
    pub l1_norm: f64,
    pub cond_norm_s: f64,
    pub cond_l1: Option<f64>,
    pub clause_a: bool,
    pub clause_b: bool,
    pub clause_c: Option<bool>,
}

/// Evaluate the three uniformity-norm comparison inequalities with exact
/// oracles: (a) `‖f‖_S <= ‖f‖_L1`; (b) `‖E(f|B)‖_S <= ‖f‖_S` for an algebra
/// `B` inside the semiring; (c) when the semiring itself is an algebra,
/// `‖f‖_S <= ‖E(f|S)‖_L1 <= 2‖f‖_S`.
pub fn check_norm_comparisons(
    f: &RandomVar,
    sr: &Semiring,
    b: &Partition,
    tol: f64,
) -> Result<ComparisonReport> {
    let space = sr.space();
    for cell in b.cells() {
        if !sr.is_member(cell) {
            return Err(Error::NotAMember);
        }
    }
    let norm_s = uniformity_norm(f, sr, Mode::Exact)?.value;
    let l1_norm = space.lp_norm(f, 1.0)?;
    let cond = space.cond_expectation(f, b)?;
    let cond_norm_s = uniformity_norm(&cond, sr, Mode::Exact)?.value;
    let clause_a = norm_s <= l1_norm + tol;
    let clause_b = cond_norm_s <= norm_s + tol;
    let (cond_l1, clause_c) = match sr.kind() {
        Kind::Algebra(p) => {
            let e = space.cond_expectation(f, p)?;
            let v = space.lp_norm(&e, 1.0)?;
            (Some(v), Some(norm_s <= v + tol && v <= 2.0 * norm_s + tol))
        }
        _ => (None, None),
    };
    Ok(ComparisonReport {
        norm_s,
        l1_norm,
        cond_norm_s,
        cond_l1,
        clause_a,
        clause_b,
        clause_c,
    })
}

/// Brute-force uniformity norm by full member enumeration; test oracle and
/// fallback for generic semirings.
pub fn uniformity_norm_enumerated(f: &RandomVar, sr: &Semiring, budget: usize) -> Result<NormResult> {
    let space = sr.space();
    let members = sr.enumerate_members(budget)?;
    let mut best = Best::new(space.len());
    best.consider(&Subset::empty(space.len()), 0.0);
    for m in &members {
        best.consider(m, space.integral_over(f, m)?);
    }
    Ok(NormResult {
        value: best.value,
        witness: best.witness,
        exact: true,
    })
}

/// Convenience: exact violation search with the default tolerance.
pub fn find_violating_set_default(
    f: &RandomVar,
    sr: &Semiring,
    threshold: f64,
) -> Result<Option<Witness>> {
    find_violating_set(f, sr, threshold, Mode::Exact, DEFAULT_TOL)
}
