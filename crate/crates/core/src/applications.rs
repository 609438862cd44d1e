//! Consequences of the decomposition engine: partitions into uniform cells,
//! density regularity on hypercubes, and strong/weak regularity for step
//! approximations of symmetric kernels.

use crate::bounds::{reg_prime_bound_f64, BoundReport};
use crate::decompose::{decompose, Decomposition, STEP_CAP};
use crate::error::{Error, Result};
use crate::growth::GrowthFunction;
use crate::semiring::{projections, HypercubeSpec, Semiring, ENUM_FEASIBLE_CAP};
use crate::space::{GroundSpace, Partition, RandomVar, Subset};
use crate::uniformity::{cut_norm_exact, Mode, Witness, CUT_NORM_BASE_CAP};
use crate::DEFAULT_TOL;

/// A symmetric kernel on `base x base`.
#[derive(Debug, Clone)]
pub struct Graphon {
    base: GroundSpace,
    product: GroundSpace,
    w: RandomVar,
}

impl Graphon {
    pub fn new(base: GroundSpace, w: RandomVar) -> Result<Self> {
        let b = base.len();
        if w.len() != b * b {
            return Err(Error::DimensionMismatch {
                expected: b * b,
                got: w.len(),
            });
        }
        for i in 0..b {
            for j in 0..i {
                if w.value(i * b + j) != w.value(j * b + i) {
                    return Err(Error::ParameterDomain(format!(
                        "kernel is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let product = GroundSpace::product(&[&base, &base])?;
        Ok(Graphon { base, product, w })
    }

    pub fn base(&self) -> &GroundSpace {
        &self.base
    }

    pub fn product_space(&self) -> &GroundSpace {
        &self.product
    }

    pub fn values(&self) -> &RandomVar {
        &self.w
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.product.lp_norm(&self.w, p)
    }

    pub fn cut_norm(&self) -> Result<f64> {
        Ok(cut_norm_exact(&self.w, &self.base, CUT_NORM_BASE_CAP)?.value)
    }
}

/// The product partition `{S x T : S, T cells of r}` of `base x base`.
pub fn square_partition(r: &Partition, base_len: usize) -> Partition {
    let mut cells = Vec::with_capacity(r.n_cells() * r.n_cells());
    for s in r.cells() {
        for t in r.cells() {
            cells.push(crate::semiring::rect(s, t, base_len));
        }
    }
    Partition::new(base_len * base_len, cells).expect("product of partitions")
}

/// Averaging a graphon over the cells of `r x r` yields a step graphon; the
/// operation contracts both the cut norm and every `L_p` norm.
pub fn step_graphon(w: &Graphon, r: &Partition) -> Result<Graphon> {
    let b = w.base.len();
    if r.n_points() != b {
        return Err(Error::DimensionMismatch {
            expected: b,
            got: r.n_points(),
        });
    }
    let sq = square_partition(r, b);
    let averaged = w.product.cond_expectation(&w.w, &sq)?;
    Graphon::new(w.base.clone(), averaged)
}

// ---- uniform partitions ----------------------------------------------------

/// Classification of one cell of a uniform partition.
#[derive(Debug, Clone)]
pub struct CellClass {
    pub cell: Subset,
    pub prob: f64,
    pub uniform: bool,
    /// For a non-uniform cell: a member `T ⊆ cell` violating the density
    /// bound. For a uniform cell: the worst admissible `T` examined.
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone)]
pub struct UniformityReport {
    pub partition: Partition,
    pub eta: f64,
    pub cells: Vec<CellClass>,
    pub total_uniform_mass: f64,
}

/// Decide whether every member `T ⊆ s` satisfies
/// `|∫_T (f - avg_s f)| <= eta * P(s)`; returns a violating witness if not.
/// Cells of probability zero are vacuously uniform.
pub fn is_uniform_cell(
    f: &RandomVar,
    sr: &Semiring,
    s: &Subset,
    eta: f64,
) -> Result<Option<Witness>> {
    let space = sr.space();
    if !sr.is_member(s) {
        return Err(Error::NotAMember);
    }
    let mass = space.prob(s);
    if mass <= 0.0 {
        return Ok(None);
    }
    let avg = space.integral_over(f, s)? / mass;
    let est = sr.member_count_estimate();
    if est > ENUM_FEASIBLE_CAP {
        return Err(Error::ExactInfeasible {
            estimated_size: est,
            cap: ENUM_FEASIBLE_CAP,
        });
    }
    let members = sr.enumerate_members(ENUM_FEASIBLE_CAP as usize)?;
    for t in members {
        if !t.is_subset_of(s) {
            continue;
        }
        let v = space.integral_over(f, &t)? - avg * space.prob(&t);
        if v.abs() > eta * mass + DEFAULT_TOL {
            return Ok(Some(Witness { set: t, value: v }));
        }
    }
    Ok(None)
}

/// Partition the space into semiring members so that the cells failing the
/// density-uniformity test carry total mass at most `eta`. Classification is
/// always re-verified per cell by exact enumeration.
pub fn uniform_partition(
    f: &RandomVar,
    sr: &Semiring,
    p: f64,
    eta: f64,
) -> Result<(UniformityReport, Decomposition)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "eta must lie in (0, 1], got {eta}"
        )));
    }
    let sigma = eta * eta / 8.0;
    let growth = GrowthFunction::affine_f64(8.0 / (eta * eta), 1.0)?;
    let d = decompose(f, sr, p, sigma, &growth, Mode::Exact)?;
    let report = classify_cells(f, sr, &d.p_partition, eta)?;
    Ok((report, d))
}

fn classify_cells(
    f: &RandomVar,
    sr: &Semiring,
    partition: &Partition,
    eta: f64,
) -> Result<UniformityReport> {
    let space = sr.space();
    let mut cells = Vec::with_capacity(partition.n_cells());
    let mut uniform_mass = 0.0;
    for cell in partition.cells() {
        let prob = space.prob(cell);
        let witness = is_uniform_cell(f, sr, cell, eta)?;
        let uniform = witness.is_none();
        if uniform {
            uniform_mass += prob;
        }
        cells.push(CellClass {
            cell: cell.clone(),
            prob,
            uniform,
            witness,
        });
    }
    Ok(UniformityReport {
        partition: partition.clone(),
        eta,
        cells,
        total_uniform_mass: uniform_mass,
    })
}

// ---- hypercube density regularity -----------------------------------------

#[derive(Debug, Clone)]
pub struct HypercubeReport {
    pub report: UniformityReport,
    /// Relative density of `D` within each cell, in cell order.
    pub densities: Vec<f64>,
    /// True iff every uniform cell passed the density-transfer check against
    /// all enumerated members of relative mass at least `eps`.
    pub density_transfer_verified: bool,
    pub eps: f64,
}

/// Default feasibility caps for exact hypercube enumeration.
pub const HYPERCUBE_ALPHABET_CAP: usize = 3;
pub const HYPERCUBE_WORD_CAP: usize = 3;

/// Density regularity for a subset of a hypercube: partition into
/// insensitive-set members so that cells of total mass at least `1 - eps`
/// have stable relative densities under passing to large sub-members.
pub fn hypercube_uniform(
    spec: &HypercubeSpec,
    d: &Subset,
    eps: f64,
    allow_large: bool,
) -> Result<HypercubeReport> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    if !allow_large
        && (spec.alphabet_size() > HYPERCUBE_ALPHABET_CAP || spec.word_len() > HYPERCUBE_WORD_CAP)
    {
        return Err(Error::ExactInfeasible {
            estimated_size: spec.n_points() as f64,
            cap: (HYPERCUBE_ALPHABET_CAP.pow(HYPERCUBE_WORD_CAP as u32)) as f64,
        });
    }
    let sr = Semiring::hypercube_insensitive(spec)?;
    let space = sr.space();
    if d.len() != space.len() {
        return Err(Error::DimensionMismatch {
            expected: space.len(),
            got: d.len(),
        });
    }
    let indicator = d.indicator();
    let eta = eps * eps;
    let (report, _) = uniform_partition(&indicator, &sr, 2.0, eta)?;

    let mut densities = Vec::with_capacity(report.cells.len());
    for c in &report.cells {
        let density = if c.prob > 0.0 {
            space.prob(&c.cell.intersect(d)) / c.prob
        } else {
            0.0
        };
        densities.push(density);
    }
    // Density transfer: on each uniform cell S, every member T ⊆ S with
    // P(T) >= eps P(S) satisfies |P_T(D) - P_S(D)| <= eps.
    let members = sr.enumerate_members(ENUM_FEASIBLE_CAP as usize)?;
    let mut verified = true;
    for (c, &density) in report.cells.iter().zip(&densities) {
        if !c.uniform || c.prob <= 0.0 {
            continue;
        }
        for t in &members {
            if !t.is_subset_of(&c.cell) {
                continue;
            }
            let tp = space.prob(t);
            if tp < eps * c.prob || tp <= 0.0 {
                continue;
            }
            let td = space.prob(&t.intersect(d)) / tp;
            if (td - density).abs() > eps + DEFAULT_TOL {
                verified = false;
            }
        }
    }
    Ok(HypercubeReport {
        report,
        densities,
        density_transfer_verified: verified,
        eps,
    })
}

// ---- graphon regularity ----------------------------------------------------

#[derive(Debug, Clone)]
pub struct StrongRegularity {
    /// Base partition whose square carries the structured part.
    pub r: Partition,
    /// The approximant `U = W_str + W_unf`.
    pub u: Graphon,
    /// Exact `‖W - U‖_{L_p}`; guaranteed at most `eps`.
    pub lp_error: f64,
    /// Exact `‖U - U_R‖_□`; guaranteed at most `cut_bound`.
    pub cut_error: f64,
    pub cut_bound: f64,
    pub outer_iterations: usize,
    pub refinement_steps: usize,
    /// `(k+1)^Reg` partition-size bound, when computable.
    pub size_bound: Option<BoundReport>,
}

fn require_normalized(w: &Graphon, p: f64) -> Result<()> {
    let norm = w.lp_norm(p)?;
    if norm > 1.0 + DEFAULT_TOL {
        return Err(Error::ParameterDomain(format!(
            "kernel must satisfy an L_p norm bound of 1, got {norm}"
        )));
    }
    Ok(())
}

/// Build the strong-regularity growth function
/// `F(n) = (n+1) + sum_{i=0}^n 8/h(i)` as an exact table with affine tail.
pub fn strong_regularity_growth(h: &dyn Fn(u64) -> f64, len: usize) -> Result<GrowthFunction> {
    let mut acc = 0.0f64;
    let mut values = Vec::with_capacity(len);
    for n in 0..len as u64 {
        let hv = h(n);
        if !(hv > 0.0) {
            return Err(Error::ParameterDomain(format!(
                "h must be positive, h({n}) = {hv}"
            )));
        }
        acc += 8.0 / hv;
        values.push((n as f64 + 1.0) + acc);
    }
    GrowthFunction::table_from_fn(len, move |n| values[n as usize])
}

/// Strong regularity: a step structure `R` and an approximant `U` with
/// `‖W - U‖_{L_p} <= eps` and `‖U - U_R‖_□ <= h(|R|)`. Refinement splits the
/// base partition along both sides of each rectangle witness, so the product
/// partition stays a square of a base partition throughout and the base grows
/// by a factor of at most 4 per step.
pub fn graphon_strong_regularity(
    w: &Graphon,
    p: f64,
    eps: f64,
    h: &dyn Fn(u64) -> f64,
) -> Result<StrongRegularity> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterDomain(format!(
            "p must lie in (1, 2], got {p}"
        )));
    }
    require_normalized(w, p)?;
    let b = w.base.len();
    let growth = strong_regularity_growth(h, (b * b + 2).max(8))?;
    let product = &w.product;

    let mut coarse = Partition::trivial(b);
    let mut fine = coarse.clone();
    let mut outer = 0usize;
    let mut steps = 0usize;
    loop {
        let pq = square_partition(&fine, b);
        let pp = square_partition(&coarse, b);
        let ef = product.cond_expectation(&w.w, &pq)?;
        let ec = product.cond_expectation(&w.w, &pp)?;
        if product.lp_norm(&ef.sub(&ec), p)? > eps {
            coarse = fine.clone();
            outer += 1;
            continue;
        }
        let delta = 1.0 / growth.eval_f64(pq.n_cells() as u64);
        // A rectangle certificate transfers: the symmetric-rectangle members
        // form a subfamily, so a rectangle norm at most delta bounds the
        // symmetric-rectangle norm too.
        let g = w.w.sub(&ef);
        let res = cut_norm_exact(&g, &w.base, CUT_NORM_BASE_CAP)?;
        if res.value <= delta + DEFAULT_TOL {
            break;
        }
        let (s_side, t_side) = projections(&res.witness.set, b);
        fine = fine.common_refinement(&s_side)?.common_refinement(&t_side)?;
        steps += 1;
        if steps > STEP_CAP {
            return Err(Error::IterationCapExceeded { cap: STEP_CAP });
        }
    }

    let pq = square_partition(&fine, b);
    let pp = square_partition(&coarse, b);
    let e_fine = product.cond_expectation(&w.w, &pq)?;
    let e_coarse = product.cond_expectation(&w.w, &pp)?;
    // U = W_str + W_unf = W - W_err
    let w_err = e_fine.sub(&e_coarse);
    let u = Graphon::new(w.base.clone(), w.w.sub(&w_err))?;
    let u_r = step_graphon(&u, &coarse)?;
    let lp_error = product.lp_norm(&w_err, p)?;
    let cut_error = cut_norm_exact(&u.w.sub(&u_r.w), &w.base, CUT_NORM_BASE_CAP)?.value;
    let cut_bound = h(coarse.n_cells() as u64);
    let size_bound = reg_prime_bound_f64(4, eps, p, &growth).ok();
    Ok(StrongRegularity {
        r: coarse,
        u,
        lp_error,
        cut_error,
        cut_bound,
        outer_iterations: outer,
        refinement_steps: steps,
        size_bound,
    })
}

#[derive(Debug, Clone)]
pub struct WeakRegularity {
    pub r: Partition,
    pub steps: usize,
    /// Exact final `‖W - W_R‖_□`.
    pub cut_error: f64,
    /// Base cell counts after each refinement step.
    pub step_log: Vec<usize>,
}

/// Weak regularity: refine the base partition along exact rectangle
/// witnesses until `‖W - W_R‖_□ <= eps`. The energy increment bounds the
/// step count by `ceil(1 / ((p-1) eps^2))` and each step at most quadruples
/// the base partition.
pub fn graphon_weak_regularity(w: &Graphon, p: f64, eps: f64) -> Result<WeakRegularity> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::ParameterDomain(format!(
            "eps must lie in (0, 1], got {eps}"
        )));
    }
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::ParameterDomain(format!(
            "p must lie in (1, 2], got {p}"
        )));
    }
    require_normalized(w, p)?;
    let b = w.base.len();
    let cap = (1.0 / ((p - 1.0) * eps * eps)).ceil() as usize;
    let mut r = Partition::trivial(b);
    let mut steps = 0usize;
    let mut step_log = Vec::new();
    loop {
        let w_r = step_graphon(w, &r)?;
        let diff = w.w.sub(&w_r.w);
        let res = cut_norm_exact(&diff, &w.base, CUT_NORM_BASE_CAP)?;
        if res.value <= eps + DEFAULT_TOL {
            return Ok(WeakRegularity {
                r,
                steps,
                cut_error: res.value,
                step_log,
            });
        }
        let (s_side, t_side) = projections(&res.witness.set, b);
        let refined = r.common_refinement(&s_side)?.common_refinement(&t_side)?;
        debug_assert!(refined.n_cells() <= 4 * r.n_cells());
        r = refined;
        steps += 1;
        step_log.push(r.n_cells());
        if steps > cap {
            return Err(Error::Internal(format!(
                "weak regularity exceeded its step bound {cap}; the energy increment failed"
            )));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uniformity::uniformity_norm;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn sign_graphon() -> Graphon {
        let base = GroundSpace::uniform(2);
        Graphon::new(base, RandomVar::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap()).unwrap()
    }

    fn random_symmetric(b: usize, rng: &mut ChaCha8Rng) -> Graphon {
        let base = GroundSpace::uniform(b);
        let mut v = vec![0.0; b * b];
        for i in 0..b {
            for j in 0..=i {
                let x = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                v[i * b + j] = x;
                v[j * b + i] = x;
            }
        }
        Graphon::new(base, RandomVar::new(v).unwrap()).unwrap()
    }

    #[test]
    fn graphon_requires_symmetry() {
        let base = GroundSpace::uniform(2);
        let w = RandomVar::new(vec![1.0, 0.5, -0.5, 1.0]).unwrap();
        assert!(Graphon::new(base, w).is_err());
    }

    #[test]
    fn step_graphon_identity_and_flattening() {
        let w = sign_graphon();
        let fine = step_graphon(&w, &Partition::singletons(2)).unwrap();
        assert_eq!(fine.values(), w.values());
        let flat = step_graphon(&w, &Partition::trivial(2)).unwrap();
        assert!(flat.values().max_abs_diff(&RandomVar::constant(4, 0.0)) < 1e-12);
        assert!(flat.cut_norm().unwrap() < 1e-12);
        assert!((w.cut_norm().unwrap() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn step_graphon_contracts_norms() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let w = random_symmetric(4, &mut rng);
            let split: Vec<usize> = (0..4).filter(|_| rng.gen_bool(0.5)).collect();
            let r = Partition::trivial(4)
                .common_refinement(&Subset::from_indices(4, &split))
                .unwrap();
            let wr = step_graphon(&w, &r).unwrap();
            assert!(wr.cut_norm().unwrap() <= w.cut_norm().unwrap() + 1e-12);
            assert!(wr.lp_norm(1.5).unwrap() <= w.lp_norm(1.5).unwrap() + 1e-12);
        }
    }

    #[test]
    fn uniform_cell_trivial_cases() {
        let base = GroundSpace::uniform(2);
        let sr = Semiring::rectangles(&base);
        let full = Subset::full(4);
        // constant function: every cell uniform
        let c = RandomVar::constant(4, 0.7);
        assert!(is_uniform_cell(&c, &sr, &full, 0.1).unwrap().is_none());
        // the whole space is uniform iff the centered norm is below eta
        let f = RandomVar::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let centered_norm = uniformity_norm(&f, &sr, Mode::Exact).unwrap().value;
        assert!(is_uniform_cell(&f, &sr, &full, centered_norm + 0.01)
            .unwrap()
            .is_none());
        assert!(is_uniform_cell(&f, &sr, &full, centered_norm - 0.01)
            .unwrap()
            .is_some());
    }

    #[test]
    fn uniform_cell_zero_mass() {
        let sp = GroundSpace::weighted(vec![1.0, 0.0]).unwrap();
        let sr = Semiring::power_set(sp);
        let f = RandomVar::new(vec![5.0, -5.0]).unwrap();
        let cell = Subset::from_indices(2, &[1]);
        assert!(is_uniform_cell(&f, &sr, &cell, 0.01).unwrap().is_none());
    }

    #[test]
    fn uniform_partition_constant() {
        let base = GroundSpace::uniform(2);
        let sr = Semiring::rectangles(&base);
        let f = RandomVar::constant(4, 0.3);
        let (rep, _) = uniform_partition(&f, &sr, 2.0, 0.5).unwrap();
        assert_eq!(rep.partition.n_cells(), 1);
        assert!((rep.total_uniform_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_partition_sign_matrix() {
        let base = GroundSpace::uniform(2);
        let sr = Semiring::rectangles(&base);
        let f = RandomVar::new(vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let (rep, d) = uniform_partition(&f, &sr, 2.0, 0.9).unwrap();
        assert!((rep.total_uniform_mass - 1.0).abs() < 1e-12);
        assert!(rep.total_uniform_mass >= 1.0 - rep.eta);
        assert!(d.certificates.err_lp <= 0.9 * 0.9 / 8.0 + 1e-9);
    }

    #[test]
    fn hypercube_trivial_subsets() {
        let spec = HypercubeSpec::all_pairs(vec!["a".into(), "b".into(), "c".into()], 2).unwrap();
        let full = Subset::full(9);
        let rep = hypercube_uniform(&spec, &full, 0.5, false).unwrap();
        assert!(rep.densities.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        assert!(rep.density_transfer_verified);
        let empty = Subset::empty(9);
        let rep = hypercube_uniform(&spec, &empty, 0.5, false).unwrap();
        assert!(rep.densities.iter().all(|&x| x.abs() < 1e-12));
        assert!(rep.density_transfer_verified);
    }

    #[test]
    fn hypercube_caps_enforced() {
        let spec = HypercubeSpec::all_pairs(
            vec!["a".into(), "b".into(), "c".into(), "d".into()],
            2,
        )
        .unwrap();
        let d = Subset::empty(16);
        assert!(matches!(
            hypercube_uniform(&spec, &d, 0.5, false),
            Err(Error::ExactInfeasible { .. })
        ));
    }

    #[test]
    fn weak_regularity_examples() {
        let w = sign_graphon();
        // cut norm 0.25 is already below 0.3
        let res = graphon_weak_regularity(&w, 2.0, 0.3).unwrap();
        assert_eq!(res.steps, 0);
        assert_eq!(res.r.n_cells(), 1);
        // at 0.2 a couple of refinements suffice
        let res = graphon_weak_regularity(&w, 2.0, 0.2).unwrap();
        assert!(res.steps <= 25);
        assert!(res.cut_error <= 0.2 + 1e-9);
        for (i, &cells) in res.step_log.iter().enumerate() {
            let prev = if i == 0 { 1 } else { res.step_log[i - 1] };
            assert!(cells <= 4 * prev);
        }
    }

    #[test]
    fn weak_regularity_constant() {
        let base = GroundSpace::uniform(3);
        let w = Graphon::new(base, RandomVar::constant(9, 0.4)).unwrap();
        let res = graphon_weak_regularity(&w, 1.5, 0.5).unwrap();
        assert_eq!(res.steps, 0);
        assert_eq!(res.r.n_cells(), 1);
    }

    #[test]
    fn strong_regularity_constant() {
        let base = GroundSpace::uniform(2);
        let w = Graphon::new(base, RandomVar::constant(4, 0.5)).unwrap();
        let res = graphon_strong_regularity(&w, 2.0, 0.5, &|i| 1.0 / (i + 1) as f64).unwrap();
        assert_eq!(res.r.n_cells(), 1);
        assert!(res.lp_error < 1e-12);
        assert!(res.cut_error < 1e-12);
    }

    #[test]
    fn strong_regularity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = random_symmetric(4, &mut rng);
        let res = graphon_strong_regularity(&w, 2.0, 0.5, &|i| 1.0 / (i + 1) as f64).unwrap();
        assert!(res.lp_error <= 0.5 + 1e-9);
        assert!(res.cut_error <= res.cut_bound + 1e-9);
        // U differs from W by the error part only
        let diff = w.values().sub(res.u.values());
        let lp = w.product_space().lp_norm(&diff, 2.0).unwrap();
        assert!((lp - res.lp_error).abs() < 1e-12);
    }

    #[test]
    fn strong_regularity_step_input() {
        let base = GroundSpace::uniform(4);
        // step kernel over {0,1} x {2,3}
        let mut v = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                let a = if i < 2 { 1.0 } else { -1.0 };
                let c = if j < 2 { 1.0 } else { -1.0 };
                v[i * 4 + j] = a * c * 0.5;
            }
        }
        let w = Graphon::new(base, RandomVar::new(v).unwrap()).unwrap();
        let res = graphon_strong_regularity(&w, 2.0, 0.9, &|i| 1.0 / (i + 1) as f64).unwrap();
        assert!(res.lp_error <= 0.9 + 1e-9);
        assert!(res.cut_error <= res.cut_bound + 1e-9);
    }

    #[test]
    fn growth_table_matches_formula() {
        let h = |i: u64| 1.0 / (i + 1) as f64;
        let g = strong_regularity_growth(&h, 16).unwrap();
        // F(2) = 3 + 8(1 + 2 + 3) = 51
        assert!((g.eval_f64(2) - 51.0).abs() < 1e-9);
        // F(0) = 1 + 8 = 9
        assert!((g.eval_f64(0) - 9.0).abs() < 1e-9);
    }
}
