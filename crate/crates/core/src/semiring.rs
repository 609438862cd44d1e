//! k-semirings of subsets: families containing the empty set and the whole
//! space, closed under intersection, and with set differences expressible as
//! at most `k` pairwise-disjoint members.
//!
//! Product-like families (rectangles, cylinder families, hypercube
//! insensitive-set semirings) are all represented the same way: as the
//! intersection semiring of factor semirings lifted along a point map.
//! Membership is decided through minimal hulls and subtraction follows the
//! constructive decomposition used to prove that intersections of semirings
//! are again semirings.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::space::{GroundSpace, Partition, Subset};

/// Default cap on exact member enumeration.
pub const ENUM_FEASIBLE_CAP: f64 = 16_777_216.0; // 2^24

/// A k-semiring handle over a fixed ground space.
#[derive(Debug, Clone)]
pub struct Semiring {
    space: GroundSpace,
    k: usize,
    kind: Kind,
}

#[derive(Debug, Clone)]
pub(crate) enum Kind {
    /// Partition-generated algebra; members are unions of cells. k = 1.
    Algebra(Partition),
    /// Order intervals of a linear order; `pos[point]` is its rank. k = 2.
    Intervals { pos: Vec<usize> },
    /// S x T with S = T or S, T disjoint, over base^2. k = 4.
    SymmetricRectangles { base_len: usize },
    /// Intersections of one member per lifted factor. k = sum of factor k's.
    Intersection { parts: Vec<Lift> },
}

/// A factor semiring pulled back along a surjection of points.
#[derive(Debug, Clone)]
pub(crate) struct Lift {
    pub(crate) sub: Semiring,
    /// `point_map[i]` is the factor point under the i-th product point.
    pub(crate) point_map: Vec<usize>,
}

impl Lift {
    pub(crate) fn project(&self, s: &Subset) -> Subset {
        let mut out = Subset::empty(self.sub.space.len());
        for i in s.iter() {
            out.insert(self.point_map[i]);
        }
        out
    }

    pub(crate) fn pull_back(&self, s: &Subset) -> Subset {
        let mut out = Subset::empty(self.point_map.len());
        for (i, &j) in self.point_map.iter().enumerate() {
            if s.contains(j) {
                out.insert(i);
            }
        }
        out
    }

    fn hull(&self, s: &Subset) -> Subset {
        self.pull_back(&self.sub.hull(&self.project(s)))
    }

    fn subtract(&self, s: &Subset, t: &Subset) -> Result<Vec<Subset>> {
        let pieces = self.sub.subtract(&self.project(s), &self.project(t))?;
        Ok(pieces.iter().map(|p| self.pull_back(p)).collect())
    }
}

/// Specification of a hypercube `A^n` with a set of letter pairs.
#[derive(Debug, Clone)]
pub struct HypercubeSpec {
    alphabet: Vec<String>,
    n: usize,
    /// Unordered letter pairs, stored as (lo, hi) indices into the alphabet.
    pairs: Vec<(usize, usize)>,
}

impl HypercubeSpec {
    pub fn new(alphabet: Vec<String>, n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        if alphabet.len() < 2 {
            return Err(Error::ParameterDomain("alphabet needs at least 2 letters".into()));
        }
        let mut uniq: Vec<&String> = alphabet.iter().collect();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != alphabet.len() {
            return Err(Error::ParameterDomain("alphabet letters must be distinct".into()));
        }
        if n == 0 {
            return Err(Error::ParameterDomain("word length must be positive".into()));
        }
        if pairs.is_empty() {
            return Err(Error::ParameterDomain("pair set must be nonempty".into()));
        }
        let mut norm = Vec::new();
        for (a, b) in pairs {
            if a >= alphabet.len() || b >= alphabet.len() || a == b {
                return Err(Error::ParameterDomain("invalid letter pair".into()));
            }
            let p = (a.min(b), a.max(b));
            if !norm.contains(&p) {
                norm.push(p);
            }
        }
        Ok(HypercubeSpec { alphabet, n, pairs: norm })
    }

    /// All unordered pairs of a k-letter alphabet.
    pub fn all_pairs(alphabet: Vec<String>, n: usize) -> Result<Self> {
        let m = alphabet.len();
        let mut pairs = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                pairs.push((a, b));
            }
        }
        HypercubeSpec::new(alphabet, n, pairs)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.len()
    }

    pub fn word_len(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn n_points(&self) -> usize {
        self.alphabet.len().pow(self.n as u32)
    }

    /// Letters of the word at the given point index (first coordinate most
    /// significant).
    pub fn word_of(&self, mut idx: usize) -> Vec<usize> {
        let m = self.alphabet.len();
        let mut w = vec![0; self.n];
        for i in (0..self.n).rev() {
            w[i] = idx % m;
            idx /= m;
        }
        w
    }

    pub fn index_of(&self, word: &[usize]) -> usize {
        let m = self.alphabet.len();
        word.iter().fold(0, |acc, &c| acc * m + c)
    }

    /// Index of a word given as a string of alphabet letters.
    pub fn index_of_str(&self, word: &str) -> Result<usize> {
        let letters: Vec<String> = word.chars().map(|c| c.to_string()).collect();
        if letters.len() != self.n {
            return Err(Error::ParameterDomain(format!(
                "word '{word}' has length {}, expected {}",
                letters.len(),
                self.n
            )));
        }
        let mut idx = Vec::with_capacity(self.n);
        for l in &letters {
            match self.alphabet.iter().position(|a| a == l) {
                Some(p) => idx.push(p),
                None => {
                    return Err(Error::ParameterDomain(format!(
                        "letter '{l}' not in alphabet"
                    )))
                }
            }
        }
        Ok(self.index_of(&idx))
    }

    /// The uniform ground space on `A^n` in word-index order.
    pub fn ground_space(&self) -> GroundSpace {
        let labels = (0..self.n_points())
            .map(|i| {
                self.word_of(i)
                    .iter()
                    .map(|&c| self.alphabet[c].as_str())
                    .collect::<String>()
            })
            .collect();
        GroundSpace::uniform_labelled(labels).expect("nonempty hypercube")
    }
}

impl Semiring {
    pub fn space(&self) -> &GroundSpace {
        &self.space
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub(crate) fn kind(&self) -> &Kind {
        &self.kind
    }

    // ---- constructors -----------------------------------------------------

    /// The algebra generated by a partition (a 1-semiring): members are
    /// exactly the unions of cells.
    pub fn from_algebra(space: GroundSpace, generating: Partition) -> Result<Self> {
        if generating.n_points() != space.len() {
            return Err(Error::DimensionMismatch {
                expected: space.len(),
                got: generating.n_points(),
            });
        }
        Ok(Semiring {
            space,
            k: 1,
            kind: Kind::Algebra(generating),
        })
    }

    /// The full power-set algebra.
    pub fn power_set(space: GroundSpace) -> Self {
        let n = space.len();
        Semiring {
            space,
            k: 1,
            kind: Kind::Algebra(Partition::singletons(n)),
        }
    }

    /// Order intervals of a linearly ordered set (a 2-semiring). `order`
    /// lists the points from smallest to largest.
    pub fn intervals(space: GroundSpace, order: Vec<usize>) -> Result<Self> {
        let n = space.len();
        if order.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: order.len() });
        }
        let mut pos = vec![usize::MAX; n];
        for (rank, &p) in order.iter().enumerate() {
            if p >= n || pos[p] != usize::MAX {
                return Err(Error::ParameterDomain("order must be a permutation of the points".into()));
            }
            pos[p] = rank;
        }
        Ok(Semiring {
            space,
            k: 2,
            kind: Kind::Intervals { pos },
        })
    }

    /// Order intervals in the natural point order.
    pub fn intervals_natural(space: GroundSpace) -> Self {
        let n = space.len();
        Semiring::intervals(space, (0..n).collect()).expect("identity order is a permutation")
    }

    /// Product of semirings over the Cartesian product of their spaces
    /// (row-major point order); `k` is the sum of the factor parameters.
    pub fn product(factors: Vec<Semiring>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::ParameterDomain("product of zero factors".into()));
        }
        let spaces: Vec<&GroundSpace> = factors.iter().map(|f| &f.space).collect();
        let product_space = GroundSpace::product(&spaces)?;
        let total = product_space.len();
        // stride of factor i = product of the sizes of the later factors
        let sizes: Vec<usize> = factors.iter().map(|f| f.space.len()).collect();
        let mut strides = vec![1usize; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let mut parts = Vec::with_capacity(factors.len());
        let mut k = 0usize;
        for (f, (&stride, &size)) in factors.into_iter().zip(strides.iter().zip(&sizes)) {
            k += f.k;
            let point_map = (0..total).map(|idx| idx / stride % size).collect();
            parts.push(Lift { sub: f, point_map });
        }
        Ok(Semiring {
            space: product_space,
            k,
            kind: Kind::Intersection { parts },
        })
    }

    /// All rectangles S x T over base^2 (the cut-norm semiring, k = 2).
    pub fn rectangles(base: &GroundSpace) -> Self {
        Semiring::product(vec![
            Semiring::power_set(base.clone()),
            Semiring::power_set(base.clone()),
        ])
        .expect("two factors")
    }

    /// Rectangles S x T with S = T or S, T disjoint (k = 4).
    pub fn symmetric_rectangles(base: &GroundSpace) -> Result<Self> {
        let space = GroundSpace::product(&[base, base])?;
        Ok(Semiring {
            space,
            k: 4,
            kind: Kind::SymmetricRectangles { base_len: base.len() },
        })
    }

    /// Cylinder-family semiring on `V_1 x ... x V_d`: members are
    /// intersections of one cylinder set per coordinate family `F`.
    pub fn cylinder_family(spaces: &[GroundSpace], family: &[Vec<usize>]) -> Result<Self> {
        let d = spaces.len();
        if d == 0 {
            return Err(Error::ParameterDomain("need at least one factor space".into()));
        }
        if family.is_empty() {
            return Err(Error::ParameterDomain("coordinate family must be nonempty".into()));
        }
        let refs: Vec<&GroundSpace> = spaces.iter().collect();
        let product_space = GroundSpace::product(&refs)?;
        let total = product_space.len();
        let sizes: Vec<usize> = spaces.iter().map(|s| s.len()).collect();
        let mut strides = vec![1usize; d];
        for i in (0..d.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        let mut parts = Vec::with_capacity(family.len());
        for coords in family {
            if coords.is_empty() {
                return Err(Error::ParameterDomain("empty coordinate set in family".into()));
            }
            let mut sorted = coords.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.iter().any(|&c| c >= d) {
                return Err(Error::ParameterDomain("coordinate index out of range".into()));
            }
            let factor_size: usize = sorted.iter().map(|&c| sizes[c]).product();
            let point_map: Vec<usize> = (0..total)
                .map(|idx| {
                    sorted
                        .iter()
                        .fold(0usize, |acc, &c| acc * sizes[c] + idx / strides[c] % sizes[c])
                })
                .collect();
            let factor_space = GroundSpace::uniform(factor_size);
            parts.push(Lift {
                sub: Semiring::power_set(factor_space),
                point_map,
            });
        }
        let k = parts.len();
        Ok(Semiring {
            space: product_space,
            k,
            kind: Kind::Intersection { parts },
        })
    }

    /// Semiring of intersections of pair-insensitive sets on a hypercube.
    /// `k` equals the number of letter pairs in the spec.
    pub fn hypercube_insensitive(spec: &HypercubeSpec) -> Result<Self> {
        let space = spec.ground_space();
        let total = space.len();
        let mut parts = Vec::with_capacity(spec.pairs().len());
        for &(a, b) in spec.pairs() {
            // Canonical form of a word under the (a,b) swap: replace b by a.
            // Classes get compact ids in order of first appearance by index.
            let mut class_of = vec![usize::MAX; total];
            let mut canon_to_class: std::collections::HashMap<usize, usize> =
                std::collections::HashMap::new();
            for idx in 0..total {
                let mut w = spec.word_of(idx);
                for c in &mut w {
                    if *c == b {
                        *c = a;
                    }
                }
                let canon = spec.index_of(&w);
                let next = canon_to_class.len();
                let id = *canon_to_class.entry(canon).or_insert(next);
                class_of[idx] = id;
            }
            let n_classes = canon_to_class.len();
            parts.push(Lift {
                sub: Semiring::power_set(GroundSpace::uniform(n_classes)),
                point_map: class_of,
            });
        }
        let k = parts.len();
        Ok(Semiring {
            space,
            k,
            kind: Kind::Intersection { parts },
        })
    }

    // ---- core contract ----------------------------------------------------

    /// Minimal member containing `s`.
    pub fn hull(&self, s: &Subset) -> Subset {
        match &self.kind {
            Kind::Algebra(p) => {
                let mut out = Subset::empty(s.len());
                for cell in p.cells() {
                    if !cell.is_disjoint_from(s) {
                        out = out.union(cell);
                    }
                }
                out
            }
            Kind::Intervals { pos } => {
                if s.is_empty() {
                    return s.clone();
                }
                let (mut lo, mut hi) = (usize::MAX, 0usize);
                for i in s.iter() {
                    lo = lo.min(pos[i]);
                    hi = hi.max(pos[i]);
                }
                let mut out = Subset::empty(s.len());
                for (i, &p) in pos.iter().enumerate() {
                    if lo <= p && p <= hi {
                        out.insert(i);
                    }
                }
                out
            }
            Kind::SymmetricRectangles { base_len } => {
                if s.is_empty() {
                    return s.clone();
                }
                let (p1, p2) = projections(s, *base_len);
                if p1.is_disjoint_from(&p2) {
                    rect(&p1, &p2, *base_len)
                } else {
                    let u = p1.union(&p2);
                    rect(&u, &u, *base_len)
                }
            }
            Kind::Intersection { parts } => {
                let mut out = Subset::full(s.len());
                for part in parts {
                    out = out.intersect(&part.hull(s));
                }
                out
            }
        }
    }

    /// Structural membership test: `s` is a member iff it equals its hull.
    pub fn is_member(&self, s: &Subset) -> bool {
        s.len() == self.space.len() && (s.is_empty() || self.hull(s) == *s)
    }

    /// Write `s \ t` as at most `k` pairwise-disjoint members. Empty pieces
    /// are dropped, so the result may have fewer than `k` entries (or none).
    pub fn subtract(&self, s: &Subset, t: &Subset) -> Result<Vec<Subset>> {
        if !self.is_member(s) || !self.is_member(t) {
            return Err(Error::NotAMember);
        }
        let mut pieces = self.subtract_unchecked(s, t);
        pieces.retain(|p| !p.is_empty());
        debug_assert!(pieces.len() <= self.k);
        Ok(pieces)
    }

    fn subtract_unchecked(&self, s: &Subset, t: &Subset) -> Vec<Subset> {
        if s.is_empty() {
            return Vec::new();
        }
        if t.is_empty() {
            return vec![s.clone()];
        }
        match &self.kind {
            Kind::Algebra(_) => vec![s.difference(t)],
            Kind::Intervals { pos } => {
                let range = |x: &Subset| {
                    let (mut lo, mut hi) = (usize::MAX, 0usize);
                    for i in x.iter() {
                        lo = lo.min(pos[i]);
                        hi = hi.max(pos[i]);
                    }
                    (lo, hi)
                };
                let (a1, b1) = range(s);
                let (a2, b2) = range(t);
                let interval = |lo: usize, hi: usize| {
                    let mut out = Subset::empty(s.len());
                    if lo <= hi {
                        for (i, &p) in pos.iter().enumerate() {
                            if lo <= p && p <= hi {
                                out.insert(i);
                            }
                        }
                    }
                    out
                };
                let left = if a2 > 0 { interval(a1, b1.min(a2 - 1)) } else { Subset::empty(s.len()) };
                let right = interval(a1.max(b2 + 1), b1);
                // Disjoint or non-overlapping cases collapse to a single piece.
                if left == right {
                    vec![left]
                } else {
                    vec![left, right]
                }
            }
            Kind::SymmetricRectangles { base_len } => {
                symmetric_rectangle_subtract(s, t, *base_len)
            }
            Kind::Intersection { parts } => {
                let m = parts.len();
                let s_parts: Vec<Subset> = parts.iter().map(|p| p.hull(s)).collect();
                let t_parts: Vec<Subset> = parts.iter().map(|p| p.hull(t)).collect();
                let n = s.len();
                let mut pieces = Vec::new();
                // prefix_j = intersection over i < j of (S_i ∩ T_i)
                let mut prefix = Subset::full(n);
                // suffix[j] = intersection over i > j of S_i
                let mut suffix = vec![Subset::full(n); m];
                for j in (0..m.saturating_sub(1)).rev() {
                    suffix[j] = suffix[j + 1].intersect(&s_parts[j + 1]);
                }
                for j in 0..m {
                    let factor_pieces = parts[j]
                        .subtract(&s_parts[j], &t_parts[j])
                        .expect("hulls of members are factor members");
                    for r in factor_pieces {
                        let piece = prefix.intersect(&r).intersect(&suffix[j]);
                        pieces.push(piece);
                    }
                    prefix = prefix.intersect(&s_parts[j]).intersect(&t_parts[j]);
                }
                pieces
            }
        }
    }

    // ---- enumeration ------------------------------------------------------

    /// Upper estimate of the number of candidate members the exhaustive
    /// enumeration would visit.
    pub fn member_count_estimate(&self) -> f64 {
        match &self.kind {
            Kind::Algebra(p) => 2f64.powi(p.n_cells().min(1_000) as i32),
            Kind::Intervals { pos } => {
                let n = pos.len() as f64;
                n * (n + 1.0) / 2.0 + 1.0
            }
            Kind::SymmetricRectangles { base_len } => {
                3f64.powi((*base_len).min(1_000) as i32) + 2f64.powi((*base_len).min(1_000) as i32)
            }
            Kind::Intersection { parts } => parts
                .iter()
                .map(|p| p.sub.member_count_estimate())
                .product(),
        }
    }

    pub fn exact_enumeration_feasible(&self) -> bool {
        self.member_count_estimate() <= ENUM_FEASIBLE_CAP
    }

    /// All distinct members, in canonical order. Fails with a truncation
    /// signal when the candidate count exceeds the budget.
    pub fn enumerate_members(&self, budget: usize) -> Result<Vec<Subset>> {
        if self.member_count_estimate() > budget as f64 {
            return Err(Error::EnumerationTruncated { yielded: 0, budget });
        }
        let n = self.space.len();
        let mut out: BTreeSet<Subset> = BTreeSet::new();
        match &self.kind {
            Kind::Algebra(p) => {
                let cells = p.cells();
                for mask in 0u64..(1u64 << cells.len()) {
                    let mut s = Subset::empty(n);
                    for (i, c) in cells.iter().enumerate() {
                        if mask >> i & 1 == 1 {
                            s = s.union(c);
                        }
                    }
                    out.insert(s);
                }
            }
            Kind::Intervals { pos } => {
                out.insert(Subset::empty(n));
                for lo in 0..n {
                    for hi in lo..n {
                        let mut s = Subset::empty(n);
                        for (i, &p) in pos.iter().enumerate() {
                            if lo <= p && p <= hi {
                                s.insert(i);
                            }
                        }
                        out.insert(s);
                    }
                }
            }
            Kind::SymmetricRectangles { base_len } => {
                let b = *base_len;
                out.insert(Subset::empty(n));
                // Diagonal members U x U.
                for mask in 0u64..(1u64 << b) {
                    let u = subset_from_mask(b, mask);
                    out.insert(rect(&u, &u, b));
                }
                // Off-diagonal members: each point goes to S, T or neither.
                let mut assign = vec![0u8; b];
                loop {
                    let mut s_side = Subset::empty(b);
                    let mut t_side = Subset::empty(b);
                    for (i, &a) in assign.iter().enumerate() {
                        match a {
                            1 => s_side.insert(i),
                            2 => t_side.insert(i),
                            _ => {}
                        }
                    }
                    out.insert(rect(&s_side, &t_side, b));
                    // odometer
                    let mut i = 0;
                    loop {
                        if i == b {
                            break;
                        }
                        assign[i] += 1;
                        if assign[i] < 3 {
                            break;
                        }
                        assign[i] = 0;
                        i += 1;
                    }
                    if i == b {
                        break;
                    }
                }
            }
            Kind::Intersection { parts } => {
                let mut lists: Vec<Vec<Subset>> = Vec::with_capacity(parts.len());
                for part in parts {
                    let subs = part.sub.enumerate_members(budget)?;
                    lists.push(subs.iter().map(|m| part.pull_back(m)).collect());
                }
                let mut idx = vec![0usize; lists.len()];
                loop {
                    let mut s = Subset::full(n);
                    for (part_members, &i) in lists.iter().zip(&idx) {
                        s = s.intersect(&part_members[i]);
                    }
                    out.insert(s);
                    if out.len() > budget {
                        return Err(Error::EnumerationTruncated { yielded: budget, budget });
                    }
                    let mut c = 0;
                    loop {
                        if c == lists.len() {
                            break;
                        }
                        idx[c] += 1;
                        if idx[c] < lists[c].len() {
                            break;
                        }
                        idx[c] = 0;
                        c += 1;
                    }
                    if c == lists.len() {
                        break;
                    }
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// True when every cell of the partition is a member.
    pub fn contains_partition(&self, p: &Partition) -> bool {
        p.cells().iter().all(|c| self.is_member(c))
    }
}

fn subset_from_mask(n: usize, mask: u64) -> Subset {
    let mut s = Subset::empty(n);
    for i in 0..n {
        if mask >> i & 1 == 1 {
            s.insert(i);
        }
    }
    s
}

/// The rectangle S x T inside base^2 (row-major product order).
pub fn rect(s_side: &Subset, t_side: &Subset, base_len: usize) -> Subset {
    let mut out = Subset::empty(base_len * base_len);
    for i in s_side.iter() {
        for j in t_side.iter() {
            out.insert(i * base_len + j);
        }
    }
    out
}

/// Row and column projections of a subset of base^2.
pub fn projections(s: &Subset, base_len: usize) -> (Subset, Subset) {
    let mut p1 = Subset::empty(base_len);
    let mut p2 = Subset::empty(base_len);
    for idx in s.iter() {
        p1.insert(idx / base_len);
        p2.insert(idx % base_len);
    }
    (p1, p2)
}

/// Decompose a symmetric-rectangle member into its sides; `None` for the
/// empty set.
fn sym_sides(s: &Subset, base_len: usize) -> Option<(Subset, Subset)> {
    if s.is_empty() {
        None
    } else {
        Some(projections(s, base_len))
    }
}

fn symmetric_rectangle_subtract(s: &Subset, t: &Subset, b: usize) -> Vec<Subset> {
    let (s1, s2) = match sym_sides(s, b) {
        Some(x) => x,
        None => return Vec::new(),
    };
    let (t1, t2) = match sym_sides(t, b) {
        Some(x) => x,
        None => return vec![s.clone()],
    };
    let s_diag = s1 == s2;
    let t_diag = t1 == t2;
    match (s_diag, t_diag) {
        (true, true) => {
            // U^2 \ V^2 = (U\V) x U  ∪  (U∩V) x (U\V)
            let u = s1;
            let v = t1;
            let x = u.difference(&v);
            let y = u.intersect(&v);
            vec![rect(&x, &x, b), rect(&x, &y, b), rect(&y, &x, b)]
        }
        (true, false) => {
            // U^2 \ (S' x T') with S', T' disjoint.
            let u = s1;
            let x = u.difference(&t1);
            let y = u.intersect(&t1);
            let z = u.difference(&t2); // y ⊆ z since t1, t2 are disjoint
            vec![
                rect(&x, &x, b),
                rect(&x, &y, b),
                rect(&y, &y, b),
                rect(&y, &z.difference(&y), b),
            ]
        }
        (false, true) => {
            let v = t1;
            vec![
                rect(&s1.difference(&v), &s2, b),
                rect(&s1.intersect(&v), &s2.difference(&v), b),
            ]
        }
        (false, false) => {
            vec![
                rect(&s1.difference(&t1), &s2, b),
                rect(&s1.intersect(&t1), &s2.difference(&t2), b),
            ]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(n: usize, v: &[usize]) -> Subset {
        Subset::from_indices(n, v)
    }

    #[test]
    fn algebra_from_trivial_partition() {
        let sp = GroundSpace::uniform(4);
        let sr = Semiring::from_algebra(sp, Partition::trivial(4)).unwrap();
        let members = sr.enumerate_members(100).unwrap();
        assert_eq!(members.len(), 2);
        assert!(members.contains(&Subset::empty(4)));
        assert!(members.contains(&Subset::full(4)));
    }

    #[test]
    fn power_set_has_all_subsets() {
        let sr = Semiring::power_set(GroundSpace::uniform(4));
        assert_eq!(sr.enumerate_members(100).unwrap().len(), 16);
        let pieces = sr.subtract(&idx(4, &[0, 1]), &idx(4, &[1, 2])).unwrap();
        assert_eq!(pieces, vec![idx(4, &[0])]);
    }

    #[test]
    fn interval_subtract_cases() {
        let sp = GroundSpace::uniform(10); // points 0..9 stand for 1..10
        let sr = Semiring::intervals_natural(sp);
        // [2..8] \ [4..6] -> [2..3] and [7..8] (1-based in the spec).
        let pieces = sr.subtract(&idx(10, &[1, 2, 3, 4, 5, 6, 7]), &idx(10, &[3, 4, 5])).unwrap();
        assert_eq!(pieces, vec![idx(10, &[1, 2]), idx(10, &[6, 7])]);
        // [2..8] \ [6..9] -> [2..5]
        let pieces = sr
            .subtract(&idx(10, &[1, 2, 3, 4, 5, 6, 7]), &idx(10, &[5, 6, 7, 8]))
            .unwrap();
        assert_eq!(pieces, vec![idx(10, &[1, 2, 3, 4])]);
        // [4..6] \ [1..9] -> empty
        let pieces = sr
            .subtract(&idx(10, &[3, 4, 5]), &idx(10, &[0, 1, 2, 3, 4, 5, 6, 7, 8]))
            .unwrap();
        assert!(pieces.is_empty());
    }

    #[test]
    fn interval_count_on_three_points() {
        let sr = Semiring::intervals_natural(GroundSpace::uniform(3));
        assert_eq!(sr.enumerate_members(100).unwrap().len(), 7);
    }

    #[test]
    fn product_of_intervals_subtract() {
        let base = GroundSpace::uniform(3);
        let sr = Semiring::product(vec![
            Semiring::intervals_natural(base.clone()),
            Semiring::intervals_natural(base),
        ])
        .unwrap();
        assert_eq!(sr.k(), 4);
        // [1..2]x[1..2] \ [2..3]x[2..3] on the 3x3 grid (1-based).
        let s = idx(9, &[0, 1, 3, 4]);
        let t = idx(9, &[4, 5, 7, 8]);
        let pieces = sr.subtract(&s, &t).unwrap();
        assert!(pieces.len() <= sr.k());
        // pairwise disjoint, all members, union = s \ t
        let mut union = Subset::empty(9);
        for (i, p) in pieces.iter().enumerate() {
            assert!(sr.is_member(p));
            for q in pieces.iter().skip(i + 1) {
                assert!(p.is_disjoint_from(q));
            }
            union = union.union(p);
        }
        assert_eq!(union, s.difference(&t));
        assert_eq!(union, idx(9, &[0, 1, 3]));
    }

    #[test]
    fn subtract_trivial_cases() {
        let sr = Semiring::rectangles(&GroundSpace::uniform(3));
        let s = rect(&idx(3, &[0, 1]), &idx(3, &[1, 2]), 3);
        assert_eq!(sr.subtract(&s, &Subset::empty(9)).unwrap(), vec![s.clone()]);
        assert!(sr.subtract(&s, &s).unwrap().is_empty());
        assert!(sr.subtract(&Subset::full(9), &Subset::full(9)).unwrap().is_empty());
    }

    #[test]
    fn rectangle_membership_is_structural() {
        let sr = Semiring::rectangles(&GroundSpace::uniform(3));
        assert!(sr.is_member(&Subset::full(9)));
        assert!(sr.is_member(&rect(&idx(3, &[0]), &Subset::full(3), 3)));
        // the diagonal is not a rectangle
        let diag = idx(9, &[0, 4, 8]);
        assert!(!sr.is_member(&diag));
    }

    #[test]
    fn rectangles_on_two_points_distinct_members() {
        let sr = Semiring::rectangles(&GroundSpace::uniform(2));
        assert_eq!(sr.enumerate_members(1000).unwrap().len(), 10);
    }

    #[test]
    fn symmetric_rectangles_membership() {
        let base = GroundSpace::uniform(4);
        let sr = Semiring::symmetric_rectangles(&base).unwrap();
        assert_eq!(sr.k(), 4);
        let s = idx(4, &[0, 2]);
        let t = idx(4, &[1, 3]);
        assert!(sr.is_member(&rect(&s, &s, 4)));
        assert!(sr.is_member(&rect(&s, &t, 4)));
        // overlapping distinct sides are not members
        assert!(!sr.is_member(&rect(&idx(4, &[0, 1]), &idx(4, &[1, 2]), 4)));
    }

    #[test]
    fn cylinder_family_special_cases() {
        let v = GroundSpace::uniform(2);
        // family {{0},{1}} is the rectangle semiring
        let sr = Semiring::cylinder_family(&[v.clone(), v.clone()], &[vec![0], vec![1]]).unwrap();
        assert_eq!(sr.k(), 2);
        let rects = Semiring::rectangles(&v);
        assert_eq!(
            sr.enumerate_members(1000).unwrap(),
            rects.enumerate_members(1000).unwrap()
        );
        // family {[d]} is the power set
        let sr = Semiring::cylinder_family(&[v.clone(), v.clone()], &[vec![0, 1]]).unwrap();
        assert_eq!(sr.k(), 1);
        assert_eq!(sr.enumerate_members(1000).unwrap().len(), 16);
        // empty family rejected
        assert!(Semiring::cylinder_family(&[v], &[]).is_err());
    }

    #[test]
    fn gowers_box_family_k() {
        let v = GroundSpace::uniform(2);
        let sr = Semiring::cylinder_family(
            &[v.clone(), v.clone(), v],
            &[vec![0, 1], vec![0, 2], vec![1, 2]],
        )
        .unwrap();
        assert_eq!(sr.k(), 3);
        assert!(sr.is_member(&Subset::full(8)));
    }

    #[test]
    fn hypercube_two_letters_degenerates() {
        let spec = HypercubeSpec::all_pairs(vec!["a".into(), "b".into()], 3).unwrap();
        let sr = Semiring::hypercube_insensitive(&spec).unwrap();
        let members = sr.enumerate_members(100).unwrap();
        assert_eq!(members.len(), 2);
        assert!(members.contains(&Subset::empty(8)));
        assert!(members.contains(&Subset::full(8)));
    }

    #[test]
    fn hypercube_three_letters_single_coordinate() {
        let spec = HypercubeSpec::new(vec!["a".into(), "b".into(), "c".into()], 1, vec![(0, 1)])
            .unwrap();
        let sr = Semiring::hypercube_insensitive(&spec).unwrap();
        let members = sr.enumerate_members(100).unwrap();
        // {}, {c}, {a,b}, {a,b,c}
        assert_eq!(members.len(), 4);
        assert!(members.contains(&idx(3, &[2])));
        assert!(members.contains(&idx(3, &[0, 1])));
    }

    #[test]
    fn hypercube_full_space_is_member() {
        let spec = HypercubeSpec::all_pairs(vec!["a".into(), "b".into(), "c".into()], 2).unwrap();
        let sr = Semiring::hypercube_insensitive(&spec).unwrap();
        assert!(sr.is_member(&Subset::full(9)));
        assert_eq!(sr.k(), 3);
    }

    #[test]
    fn enumeration_budget_truncation() {
        let sr = Semiring::power_set(GroundSpace::uniform(10));
        assert!(matches!(
            sr.enumerate_members(100),
            Err(Error::EnumerationTruncated { .. })
        ));
    }
}
