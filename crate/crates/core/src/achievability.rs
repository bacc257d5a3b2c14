//! Achievable rate regions for computing linear combinations over a
//! K-user DM-MAC with nested linear codes.
//!
//! The joint-decoding region is a union over full-rank matrices `B` whose
//! row span contains the span of the coefficient matrix `A`, of an
//! intersection over full-rank matrices `C`, of a union over index sets
//! `S`, of an intersection over index sets `T` of subset-sum half-spaces
//!
//! ```text
//! sum_{k in T} R_k <= H(U(T)) - H(W_{B(S)} | Y, W_{CB})
//! ```
//!
//! with `S` and `T` constrained by rank conditions on `[C; I(S)]` and
//! `[B(S); I(K \ T)]`. The sequential-decoding region recovers the rows
//! of `B` one at a time, each stage conditioning on the previous rows,
//! and is always contained in the joint region for the same `B`.
//!
//! `B` and `C` are enumerated by RREF span representatives: the bracketed
//! region depends on `C` only through `Span(C)`, and on `B` only through
//! the variable set `W_B`, which invertible row operations preserve.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::channel::{build_joint, u_vars, x_vars, ChannelError, ChannelSpec, JointDist, Var};
use crate::gflin::{
    self, enum_fullrank_rref, enum_superspan_rref, index_subsets, matmul, rank, select_rows,
    span_contains, GfError, GfMatrix,
};
use crate::regions::{intersect, union, HalfSpace, Polytope, RateRegion, RegionError};

/// Default cap on the number of polytope pair products formed while
/// resolving the union-of-intersections alternation.
pub const DEFAULT_PRODUCT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum AchieveError {
    #[error(transparent)]
    Gf(#[from] GfError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Region(#[from] RegionError),
    #[error("coefficient matrix must be full rank with 1 <= L <= K over the spec's field")]
    InvalidCoefficients,
    #[error("Span(B) does not contain Span(A)")]
    SpanViolation,
    #[error("degenerate coefficient vector: {0}")]
    DegenerateCoefficients(String),
    #[error("power must be positive, got {0}")]
    NonPositivePower(f64),
    #[error("intersection formed {products} polytope products, budget {budget}")]
    ProductBudgetExceeded { products: u64, budget: u64 },
    #[error("receivers do not share q, K, input pmfs and symbol mappings")]
    InconsistentReceivers,
}

impl AchieveError {
    /// True for errors caused by an enumeration or product budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, AchieveError::ProductBudgetExceeded { .. })
            || matches!(self, AchieveError::Gf(GfError::BudgetExceeded { .. }))
    }
}

/// A compute-forward task: a channel spec plus the coefficient matrix `A`
/// of the linear combinations the receiver wants.
#[derive(Debug, Clone)]
pub struct ComputeTask {
    spec: ChannelSpec,
    coeff: GfMatrix,
}

impl ComputeTask {
    pub fn new(spec: ChannelSpec, coeff: GfMatrix) -> Result<Self, AchieveError> {
        let k = spec.users();
        if coeff.modulus() != spec.q()
            || coeff.cols() != k
            || coeff.rows() == 0
            || coeff.rows() > k
            || rank(&coeff) != coeff.rows()
        {
            return Err(AchieveError::InvalidCoefficients);
        }
        Ok(Self { spec, coeff })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn coeff(&self) -> &GfMatrix {
        &self.coeff
    }
}

/// Enumeration budgets for the region constructions. `enum_candidates`
/// caps the raw matrix enumeration spaces, `products` the polytope
/// products of the C-intersection.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub enum_candidates: u64,
    pub products: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            enum_candidates: gflin::DEFAULT_ENUM_BUDGET,
            products: DEFAULT_PRODUCT_BUDGET,
        }
    }
}

impl Budget {
    pub fn uniform(limit: u64) -> Self {
        Self {
            enum_candidates: limit,
            products: limit,
        }
    }
}

/// Valid `S` sets for a given `C`: subsets of the rows of `B` of size
/// `L_B - L_C` with `rank([C; I(S)]) = L_B`.
fn valid_s_sets(c: &GfMatrix, lb: usize, q: u64) -> Result<Vec<Vec<usize>>, AchieveError> {
    let size = lb - c.rows();
    let mut out = Vec::new();
    for s in index_subsets(lb, size) {
        let i_s = GfMatrix::identity_rows(&s, lb, q)?;
        if rank(&c.stack(&i_s)?) == lb {
            out.push(s);
        }
    }
    Ok(out)
}

/// Valid `T` sets for a given `B(S)`: subsets of the users of size
/// `|S|` with `rank([B(S); I(K \ T)]) = K`.
fn valid_t_sets(b_s: &GfMatrix, users: usize, q: u64) -> Result<Vec<Vec<usize>>, AchieveError> {
    let size = b_s.rows();
    let mut out = Vec::new();
    for t in index_subsets(users, size) {
        let complement: Vec<usize> = (0..users).filter(|k| !t.contains(k)).collect();
        let i_comp = GfMatrix::identity_rows(&complement, users, q)?;
        if rank(&b_s.stack(&i_comp)?) == users {
            out.push(t);
        }
    }
    Ok(out)
}

fn entropy_of_users(joint: &JointDist, t: &[usize]) -> Result<f64, AchieveError> {
    Ok(joint.entropy(&u_vars(t))?)
}

/// The inner joint-decoding region for one fixed `B`.
pub fn joint_region_fixed_b(
    task: &ComputeTask,
    b: &GfMatrix,
    budget: Budget,
) -> Result<RateRegion, AchieveError> {
    let joint = build_joint(task.spec())?;
    joint_region_fixed_b_with(task, &joint, b, budget)
}

fn joint_region_fixed_b_with(
    task: &ComputeTask,
    joint: &JointDist,
    b: &GfMatrix,
    budget: Budget,
) -> Result<RateRegion, AchieveError> {
    if !span_contains(b, task.coeff())? || rank(b) != b.rows() {
        return Err(AchieveError::SpanViolation);
    }
    let users = task.spec().users();
    let q = task.spec().q();
    let lb = b.rows();

    // One region per C; intersected afterwards, smallest first so the
    // running product stays tight.
    let mut c_regions: Vec<RateRegion> = Vec::new();
    for l_c in 0..lb {
        for c in enum_fullrank_rref(l_c, lb, q, budget.enum_candidates)? {
            let cb = matmul(&c, b)?;
            let mut per_c = RateRegion::empty(users);
            for s in valid_s_sets(&c, lb, q)? {
                let b_s = select_rows(b, &s)?;
                let h_term = joint.cond_entropy_w(&b_s, &cb)?;
                let mut halfspaces = Vec::new();
                for t in valid_t_sets(&b_s, users, q)? {
                    let h_u = entropy_of_users(joint, &t)?;
                    halfspaces.push(HalfSpace::new(t.iter().copied(), h_u - h_term));
                }
                let poly = Polytope::from_halfspaces(users, halfspaces)?;
                per_c = union(&per_c, &RateRegion::from_polytope(poly))?;
            }
            c_regions.push(per_c);
        }
    }
    c_regions.sort_by_key(|r| r.polytopes.len());

    let mut region = RateRegion::orthant(users);
    let mut products: u64 = 0;
    for rc in &c_regions {
        products = products
            .saturating_add(region.polytopes.len() as u64 * rc.polytopes.len() as u64);
        if products > budget.products {
            return Err(AchieveError::ProductBudgetExceeded {
                products,
                budget: budget.products,
            });
        }
        region = intersect(&region, rc)?;
        if region.polytopes.is_empty() {
            break;
        }
    }
    Ok(region)
}

/// The joint-decoding region restricted to an explicit list of `B`
/// matrices (each must span the coefficients).
pub fn joint_region_for_bs(
    task: &ComputeTask,
    bs: &[GfMatrix],
    budget: Budget,
) -> Result<RateRegion, AchieveError> {
    let joint = build_joint(task.spec())?;
    let mut region = RateRegion::empty(task.spec().users());
    for b in bs {
        let rb = joint_region_fixed_b_with(task, &joint, b, budget)?;
        region = union(&region, &rb)?;
    }
    Ok(region)
}

/// The full joint-decoding region: union over all RREF span
/// representatives `B` with `rank(A) <= L_B <= max_lb`.
pub fn joint_region_capped(
    task: &ComputeTask,
    max_lb: usize,
    budget: Budget,
) -> Result<RateRegion, AchieveError> {
    let users = task.spec().users();
    let max_lb = max_lb.min(users);
    let joint = build_joint(task.spec())?;
    let mut region = RateRegion::empty(users);
    for lb in task.coeff().rows()..=max_lb {
        for b in enum_superspan_rref(task.coeff(), lb, budget.enum_candidates)? {
            let rb = joint_region_fixed_b_with(task, &joint, &b, budget)?;
            region = union(&region, &rb)?;
        }
    }
    Ok(region)
}

/// The full joint-decoding region with the `L_B` sweep up to `K`.
pub fn joint_region(task: &ComputeTask, budget: Budget) -> Result<RateRegion, AchieveError> {
    joint_region_capped(task, task.spec().users(), budget)
}

/// The sequential-decoding region for one `B`: row `j` is decoded with
/// `(Y, W_{B^{j-1}})` at hand, bounding `R_k` for every user `k` with a
/// nonzero entry in that row.
pub fn seq_region(task: &ComputeTask, b: &GfMatrix) -> Result<RateRegion, AchieveError> {
    if !span_contains(b, task.coeff())? || rank(b) != b.rows() {
        return Err(AchieveError::SpanViolation);
    }
    let joint = build_joint(task.spec())?;
    let users = task.spec().users();
    let mut halfspaces = Vec::new();
    for j in 0..b.rows() {
        let row = select_rows(b, &[j])?;
        let prefix = select_rows(b, &(0..j).collect::<Vec<_>>())?;
        let h_term = joint.cond_entropy_w(&row, &prefix)?;
        for k in 0..users {
            if b.get(j, k) != 0 {
                let h_u = entropy_of_users(&joint, &[k])?;
                halfspaces.push(HalfSpace::new([k], h_u - h_term));
            }
        }
    }
    Ok(RateRegion::from_polytope(Polytope::from_halfspaces(
        users, halfspaces,
    )?))
}

/// Greedily completes the rows of a full-rank `C` to a basis of F_q^lb
/// with standard basis vectors: scan `i = 0..lb` and keep `i` whenever
/// `e_i` falls outside the span accumulated so far. The returned index
/// set `S` has `lb - rows(C)` elements and `rank([C; I(S)]) = lb`.
pub fn greedy_basis_completion(c: &GfMatrix, lb: usize) -> Result<BTreeSet<usize>, AchieveError> {
    let q = c.modulus();
    let mut chosen = BTreeSet::new();
    let mut current = c.clone();
    if current.is_empty() {
        current = GfMatrix::zero(0, lb, q)?;
    }
    let mut current_rank = rank(&current);
    for i in 0..lb {
        let e_i = GfMatrix::identity_rows(&[i], lb, q)?;
        let candidate = current.stack(&e_i)?;
        let r = rank(&candidate);
        if r > current_rank {
            chosen.insert(i);
            current = candidate;
            current_rank = r;
        }
    }
    Ok(chosen)
}

/// The two-user, one-combination regions: the compute-forward box, the
/// linear-code MAC region, and their union.
#[derive(Debug, Clone)]
pub struct TwoUserRegions {
    pub cf: RateRegion,
    pub lmac: RateRegion,
    pub combined: RateRegion,
}

/// Evaluates the two-user single-combination regions for `A = [a_1 a_2]`
/// with both entries nonzero.
pub fn two_user_regions(
    spec: &ChannelSpec,
    a: &GfMatrix,
) -> Result<TwoUserRegions, AchieveError> {
    if spec.users() != 2 {
        return Err(AchieveError::DegenerateCoefficients(format!(
            "two-user evaluation with K = {}",
            spec.users()
        )));
    }
    if a.rows() != 1 || a.cols() != 2 || a.modulus() != spec.q() {
        return Err(AchieveError::InvalidCoefficients);
    }
    if a.get(0, 0) == 0 || a.get(0, 1) == 0 {
        return Err(AchieveError::DegenerateCoefficients(
            "coefficient vector has a zero entry".into(),
        ));
    }
    let joint = build_joint(spec)?;
    let q = spec.q();

    let h_w_given_y = joint.cond_entropy_w(a, &GfMatrix::zero(0, 2, q)?)?;
    let h_u1 = joint.entropy(&[Var::U(0)])?;
    let h_u2 = joint.entropy(&[Var::U(1)])?;
    let cf = RateRegion::from_polytope(Polytope::from_halfspaces(
        2,
        vec![
            HalfSpace::new([0], h_u1 - h_w_given_y),
            HalfSpace::new([1], h_u2 - h_w_given_y),
        ],
    )?);

    // MAC-type bounds from the zero-entry C cases.
    let i1 = joint.cond_mutual_info(&[Var::X(0)], &[Var::Y], &[Var::X(1)])?;
    let i2 = joint.cond_mutual_info(&[Var::X(1)], &[Var::Y], &[Var::X(0)])?;
    let isum = joint.mutual_info(&[Var::X(0), Var::X(1)], &[Var::Y])?;

    // min over C with both entries nonzero, one representative per span.
    let mut min_c1 = f64::INFINITY;
    let mut min_c2 = f64::INFINITY;
    for t in 1..q {
        let c = GfMatrix::row_vector(&[1, t], q)?;
        let w = Var::W(c);
        min_c1 = min_c1.min(joint.mutual_info(&[Var::U(0)], &[Var::Y, w.clone()])?);
        min_c2 = min_c2.min(joint.mutual_info(&[Var::U(1)], &[Var::Y, w])?);
    }

    let r1 = Polytope::from_halfspaces(
        2,
        vec![
            HalfSpace::new([0], i1),
            HalfSpace::new([1], i2),
            HalfSpace::new([0, 1], isum),
            HalfSpace::new([0], min_c1),
        ],
    )?;
    let r2 = Polytope::from_halfspaces(
        2,
        vec![
            HalfSpace::new([0], i1),
            HalfSpace::new([1], i2),
            HalfSpace::new([0, 1], isum),
            HalfSpace::new([1], min_c2),
        ],
    )?;
    let lmac = union(
        &RateRegion::from_polytope(r1),
        &RateRegion::from_polytope(r2),
    )?;
    let combined = union(&cf, &lmac)?;
    Ok(TwoUserRegions { cf, lmac, combined })
}

/// The K-user multiple-access region for the induced input distribution:
/// `sum_{k in T} R_k <= I(X(T); Y | X(K \ T))` over all nonempty `T`.
pub fn mac_region(spec: &ChannelSpec) -> Result<RateRegion, AchieveError> {
    let joint = build_joint(spec)?;
    let users = spec.users();
    let mut halfspaces = Vec::new();
    for size in 1..=users {
        for t in index_subsets(users, size) {
            let complement: Vec<usize> = (0..users).filter(|k| !t.contains(k)).collect();
            let bound =
                joint.cond_mutual_info(&x_vars(&t), &[Var::Y], &x_vars(&complement))?;
            halfspaces.push(HalfSpace::new(t.iter().copied(), bound));
        }
    }
    Ok(RateRegion::from_polytope(Polytope::from_halfspaces(
        users, halfspaces,
    )?))
}

/// Closed-form two-user Gaussian compute-forward region for integer
/// coefficients `a` over channel gains `h` and powers `(p1, p2)`:
/// `R_k <= 1/2 log2(P_k / (a M a^T)) + log2(gcd(a))` with
/// `M = (Sigma^{-1} + h^T h)^{-1}`, `Sigma = diag(P_1, P_2)`.
pub fn gaussian_cf_region(
    h: [f64; 2],
    p1: f64,
    p2: f64,
    a: [i64; 2],
) -> Result<RateRegion, AchieveError> {
    if p1 <= 0.0 {
        return Err(AchieveError::NonPositivePower(p1));
    }
    if p2 <= 0.0 {
        return Err(AchieveError::NonPositivePower(p2));
    }
    if a == [0, 0] {
        return Err(AchieveError::DegenerateCoefficients(
            "zero coefficient vector".into(),
        ));
    }
    // M = (Sigma^{-1} + h^T h)^{-1}, 2x2 closed form.
    let g = [
        [1.0 / p1 + h[0] * h[0], h[0] * h[1]],
        [h[0] * h[1], 1.0 / p2 + h[1] * h[1]],
    ];
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let m = [
        [g[1][1] / det, -g[0][1] / det],
        [-g[1][0] / det, g[0][0] / det],
    ];
    let af = [a[0] as f64, a[1] as f64];
    let quad = af[0] * (m[0][0] * af[0] + m[0][1] * af[1])
        + af[1] * (m[1][0] * af[0] + m[1][1] * af[1]);
    let gcd = gcd_u64(a[0].unsigned_abs(), a[1].unsigned_abs()) as f64;
    let rhs1 = 0.5 * (p1 / quad).log2() + gcd.log2();
    let rhs2 = 0.5 * (p2 / quad).log2() + gcd.log2();
    Ok(RateRegion::from_polytope(Polytope::from_halfspaces(
        2,
        vec![HalfSpace::new([0], rhs1), HalfSpace::new([1], rhs2)],
    )?))
}

fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Multiple receivers observing the same transmissions: the achievable
/// region is the intersection of the per-receiver joint regions. All
/// tasks must share the field, user count, input pmfs and symbol maps.
pub fn multi_receiver_region(
    tasks: &[ComputeTask],
    budget: Budget,
) -> Result<RateRegion, AchieveError> {
    let Some(first) = tasks.first() else {
        return Err(AchieveError::InconsistentReceivers);
    };
    for task in &tasks[1..] {
        if !first.spec().shares_inputs_with(task.spec()) {
            return Err(AchieveError::InconsistentReceivers);
        }
    }
    let mut region = joint_region(first, budget)?;
    for task in &tasks[1..] {
        let r = joint_region(task, budget)?;
        region = intersect(&region, &r)?;
    }
    Ok(region)
}
