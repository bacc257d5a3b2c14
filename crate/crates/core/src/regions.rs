//! Polyhedral algebra for rate regions in the nonnegative orthant.
//!
//! A [`HalfSpace`] is `{ R >= 0 : sum_{k in tset} R_k <= rhs }` with a
//! nonempty index set; a [`Polytope`] is a finite intersection of such
//! half-spaces (an empty constraint list is the whole orthant); a
//! [`RateRegion`] is a finite union of polytopes. The regions of the
//! achievable-rate constructions are stored as closures of the strict regions;
//! callers express "strictly inside by a margin" queries by shifting the
//! query point.
//!
//! All comparisons use a fixed feasibility slack of `1e-9` because the
//! right-hand sides are entropies carrying floating-point error.
//!
//! Only same-tset dominance is pruned inside a polytope, so constraint
//! lists may carry constraints implied by a superset sum; all predicates
//! are exact regardless. Subset removal in unions uses the sound
//! superset-sum implication, so a region never changes semantically.

use std::collections::BTreeSet;

use thiserror::Error;

/// Slack applied to every feasibility comparison.
pub const FEASIBILITY_SLACK: f64 = 1e-9;

/// Default per-axis sample count for the grid-based containment test.
pub const DEFAULT_RESOLUTION: usize = 25;

#[derive(Debug, Error, PartialEq)]
pub enum RegionError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("half-space index set must be a nonempty subset of 0..{dim}, got {index}")]
    BadIndexSet { dim: usize, index: usize },
    #[error("vertex enumeration supports K in {{2, 3}}, got {0}")]
    UnsupportedDimension(usize),
    #[error("resolution must be at least 2, got {0}")]
    BadResolution(usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// `sum_{k in tset} R_k <= rhs` over zero-based user indices.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub tset: BTreeSet<usize>,
    pub rhs: f64,
}

impl HalfSpace {
    pub fn new(tset: impl IntoIterator<Item = usize>, rhs: f64) -> Self {
        Self {
            tset: tset.into_iter().collect(),
            rhs,
        }
    }

    fn lhs_at(&self, point: &[f64]) -> f64 {
        self.tset.iter().map(|&k| point[k]).sum()
    }

    pub fn satisfied_at(&self, point: &[f64]) -> bool {
        self.lhs_at(point) <= self.rhs + FEASIBILITY_SLACK
    }
}

/// Intersection of half-spaces with the nonnegative orthant; an empty
/// list is the whole orthant.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub dim: usize,
    pub halfspaces: Vec<HalfSpace>,
}

impl Polytope {
    pub fn orthant(dim: usize) -> Self {
        Self {
            dim,
            halfspaces: Vec::new(),
        }
    }

    pub fn from_halfspaces(
        dim: usize,
        halfspaces: Vec<HalfSpace>,
    ) -> Result<Self, RegionError> {
        for h in &halfspaces {
            if h.tset.is_empty() {
                return Err(RegionError::BadIndexSet { dim, index: 0 });
            }
            if let Some(&max) = h.tset.iter().next_back() {
                if max >= dim {
                    return Err(RegionError::BadIndexSet { dim, index: max });
                }
            }
        }
        let mut p = Self { dim, halfspaces };
        p.canonicalize();
        Ok(p)
    }

    /// Same-tset dominance pruning plus a deterministic sort order.
    fn canonicalize(&mut self) {
        self.halfspaces.sort_by(|a, b| {
            let ta: Vec<usize> = a.tset.iter().copied().collect();
            let tb: Vec<usize> = b.tset.iter().copied().collect();
            ta.cmp(&tb)
                .then(a.rhs.partial_cmp(&b.rhs).expect("rhs is never NaN"))
        });
        self.halfspaces.dedup_by(|next, kept| kept.tset == next.tset);
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.iter().all(|&v| v >= -FEASIBILITY_SLACK)
            && self.halfspaces.iter().all(|h| h.satisfied_at(point))
    }

    /// With subset-sum constraints over the orthant, the polytope is empty
    /// iff the origin is infeasible, i.e. iff some rhs is negative.
    pub fn is_empty(&self) -> bool {
        self.halfspaces
            .iter()
            .any(|h| h.rhs < -FEASIBILITY_SLACK)
    }

    /// Per-axis upper bounds implied by the constraints. Axes that appear
    /// in no constraint get `fallback`.
    fn bounding_box(&self, fallback: f64) -> Vec<f64> {
        let mut ub = vec![f64::INFINITY; self.dim];
        for h in &self.halfspaces {
            for &k in &h.tset {
                ub[k] = ub[k].min(h.rhs.max(0.0));
            }
        }
        ub.into_iter()
            .map(|v| if v.is_finite() { v } else { fallback })
            .collect()
    }

    /// Sound sufficient test for `self` being contained in `other`: every
    /// constraint of `other` is implied by a constraint of `self` on a
    /// superset index set with smaller rhs (coordinates are nonnegative).
    fn subset_of_sufficient(&self, other: &Polytope) -> bool {
        if self.is_empty() {
            return true;
        }
        other.halfspaces.iter().all(|oh| {
            self.halfspaces.iter().any(|sh| {
                sh.tset.is_superset(&oh.tset) && sh.rhs <= oh.rhs + FEASIBILITY_SLACK
            })
        })
    }
}

/// Union of polytopes; an empty list is the empty region.
#[derive(Debug, Clone, PartialEq)]
pub struct RateRegion {
    pub dim: usize,
    pub polytopes: Vec<Polytope>,
}

impl RateRegion {
    /// The empty region.
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            polytopes: Vec::new(),
        }
    }

    /// The whole nonnegative orthant.
    pub fn orthant(dim: usize) -> Self {
        Self {
            dim,
            polytopes: vec![Polytope::orthant(dim)],
        }
    }

    pub fn from_polytope(p: Polytope) -> Self {
        let mut region = Self {
            dim: p.dim,
            polytopes: vec![p],
        };
        region.canonicalize();
        region
    }

    pub fn from_polytopes(dim: usize, polytopes: Vec<Polytope>) -> Self {
        let mut region = Self { dim, polytopes };
        region.canonicalize();
        region
    }

    pub fn is_empty_region(&self) -> bool {
        self.polytopes.iter().all(|p| p.is_empty())
    }

    pub fn constraint_count(&self) -> usize {
        self.polytopes.iter().map(|p| p.halfspaces.len()).sum()
    }

    /// Drops empty members, removes members provably contained in another
    /// member, dedups, and sorts into a canonical order.
    fn canonicalize(&mut self) {
        self.polytopes.retain(|p| !p.is_empty());
        let mut keep = vec![true; self.polytopes.len()];
        for i in 0..self.polytopes.len() {
            if !keep[i] {
                continue;
            }
            for j in 0..self.polytopes.len() {
                if i == j || !keep[j] {
                    continue;
                }
                if self.polytopes[i].subset_of_sufficient(&self.polytopes[j])
                    && !(self.polytopes[j].subset_of_sufficient(&self.polytopes[i]) && j > i)
                {
                    keep[i] = false;
                    break;
                }
            }
        }
        let mut kept: Vec<Polytope> = self
            .polytopes
            .drain(..)
            .zip(keep)
            .filter_map(|(p, k)| k.then_some(p))
            .collect();
        kept.sort_by(|a, b| polytope_key(a).partial_cmp(&polytope_key(b)).unwrap());
        kept.dedup();
        self.polytopes = kept;
    }
}

fn polytope_key(p: &Polytope) -> Vec<(Vec<usize>, f64)> {
    p.halfspaces
        .iter()
        .map(|h| (h.tset.iter().copied().collect(), h.rhs))
        .collect()
}

fn check_dims(a: &RateRegion, b: &RateRegion) -> Result<(), RegionError> {
    if a.dim != b.dim {
        return Err(RegionError::DimensionMismatch(a.dim, b.dim));
    }
    Ok(())
}

/// Intersection, distributing the unions: every pair of member polytopes
/// contributes the union of its constraint lists, with empty results
/// pruned.
pub fn intersect(a: &RateRegion, b: &RateRegion) -> Result<RateRegion, RegionError> {
    check_dims(a, b)?;
    let mut polytopes = Vec::with_capacity(a.polytopes.len() * b.polytopes.len());
    for pa in &a.polytopes {
        for pb in &b.polytopes {
            let mut hs = pa.halfspaces.clone();
            hs.extend(pb.halfspaces.iter().cloned());
            let p = Polytope::from_halfspaces(a.dim, hs)?;
            if !p.is_empty() {
                polytopes.push(p);
            }
        }
    }
    Ok(RateRegion::from_polytopes(a.dim, polytopes))
}

/// Union: concatenation of the polytope lists with subsumed members
/// removed.
pub fn union(a: &RateRegion, b: &RateRegion) -> Result<RateRegion, RegionError> {
    check_dims(a, b)?;
    let mut polytopes = a.polytopes.clone();
    polytopes.extend(b.polytopes.iter().cloned());
    Ok(RateRegion::from_polytopes(a.dim, polytopes))
}

/// True iff some member polytope satisfies all of its constraints at
/// `rates` (closed semantics, `1e-9` slack).
pub fn contains_point(region: &RateRegion, rates: &[f64]) -> Result<bool, RegionError> {
    if rates.len() != region.dim {
        return Err(RegionError::DimensionMismatch(region.dim, rates.len()));
    }
    Ok(region.polytopes.iter().any(|p| p.contains(rates)))
}

/// See [`Polytope::is_empty`].
pub fn polytope_is_empty(p: &Polytope) -> bool {
    p.is_empty()
}

/// Result of a containment query; a failed query carries a witness point
/// of the inner region outside the outer one.
#[derive(Debug, Clone, PartialEq)]
pub enum Containment {
    Holds,
    Witness(Vec<f64>),
}

impl Containment {
    pub fn holds(&self) -> bool {
        matches!(self, Containment::Holds)
    }
}

/// Tests `inner` a subset of `outer`. Exact when `outer` is a single
/// polytope (every extreme candidate of each inner polytope is checked
/// against the outer constraints); otherwise sampled on a per-axis grid
/// of `resolution` points scaled to each inner polytope's bounding box.
pub fn contains_region(
    outer: &RateRegion,
    inner: &RateRegion,
    resolution: usize,
) -> Result<Containment, RegionError> {
    check_dims(outer, inner)?;
    if resolution < 2 {
        return Err(RegionError::BadResolution(resolution));
    }
    let inner_polys: Vec<&Polytope> = inner.polytopes.iter().filter(|p| !p.is_empty()).collect();
    if inner_polys.is_empty() {
        return Ok(Containment::Holds);
    }
    let outer_polys: Vec<&Polytope> = outer.polytopes.iter().filter(|p| !p.is_empty()).collect();
    if outer_polys.is_empty() {
        return Ok(Containment::Witness(vec![0.0; inner.dim]));
    }

    if outer_polys.len() == 1 {
        return exact_single_outer(outer_polys[0], &inner_polys);
    }

    let fallback = global_rhs_cap(outer, inner);
    for q in &inner_polys {
        let ub = q.bounding_box(fallback);
        let mut witness = None;
        grid_scan(&ub, resolution, &mut |point| {
            if q.contains(point) && !outer_polys.iter().any(|p| p.contains(point)) {
                witness = Some(point.to_vec());
                true
            } else {
                false
            }
        });
        if let Some(w) = witness {
            return Ok(Containment::Witness(w));
        }
    }
    Ok(Containment::Holds)
}

fn global_rhs_cap(a: &RateRegion, b: &RateRegion) -> f64 {
    let mut cap: f64 = 1.0;
    for region in [a, b] {
        for p in &region.polytopes {
            for h in &p.halfspaces {
                cap = cap.max(h.rhs);
            }
        }
    }
    cap + 1.0
}

/// Exact containment of each inner polytope in a single outer polytope by
/// checking every vertex-like candidate of the inner polytope.
fn exact_single_outer(
    outer: &Polytope,
    inner_polys: &[&Polytope],
) -> Result<Containment, RegionError> {
    let dim = outer.dim;
    for q in inner_polys {
        // Axes unconstrained in the inner polytope are unbounded there; if
        // the outer polytope constrains such an axis, pushing along it
        // escapes.
        let mut constrained = vec![false; dim];
        for h in &q.halfspaces {
            for &k in &h.tset {
                constrained[k] = true;
            }
        }
        let mut escape = None;
        for h in &outer.halfspaces {
            if let Some(&k) = h.tset.iter().find(|&&k| !constrained[k]) {
                let mut point = vec![0.0; dim];
                point[k] = h.rhs.abs() + 1.0;
                escape = Some(point);
                break;
            }
        }
        if let Some(w) = escape {
            if q.contains(&w) {
                return Ok(Containment::Witness(w));
            }
        }
        for vertex in polytope_vertices(q, &constrained) {
            if !outer.contains(&vertex) {
                return Ok(Containment::Witness(vertex));
            }
        }
    }
    Ok(Containment::Holds)
}

/// All vertices of `p` restricted to its constrained axes (unconstrained
/// axes are fixed at 0): feasible intersections of `dim` hyperplanes
/// drawn from the constraints and the axis planes.
fn polytope_vertices(p: &Polytope, constrained: &[bool]) -> Vec<Vec<f64>> {
    let dim = p.dim;
    // Hyperplanes: sum-constraints as equalities, plus x_k = 0 per axis.
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for h in &p.halfspaces {
        let mut coeffs = vec![0.0; dim];
        for &k in &h.tset {
            coeffs[k] = 1.0;
        }
        planes.push((coeffs, h.rhs));
    }
    for k in 0..dim {
        let mut coeffs = vec![0.0; dim];
        coeffs[k] = 1.0;
        planes.push((coeffs, 0.0));
    }
    let free_axes: Vec<usize> = (0..dim).filter(|&k| constrained[k]).collect();
    let kk = free_axes.len();
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    if kk == 0 {
        vertices.push(vec![0.0; dim]);
        return vertices;
    }
    for combo in crate::gflin::index_subsets(planes.len(), kk) {
        let mut a = vec![0.0; kk * kk];
        let mut rhs = vec![0.0; kk];
        for (row, &pi) in combo.iter().enumerate() {
            for (col, &axis) in free_axes.iter().enumerate() {
                a[row * kk + col] = planes[pi].0[axis];
            }
            rhs[row] = planes[pi].1;
        }
        let Some(solution) = solve_dense(&mut a, &mut rhs, kk) else {
            continue;
        };
        let mut point = vec![0.0; dim];
        for (col, &axis) in free_axes.iter().enumerate() {
            point[col] = 0.0;
            point[axis] = solution[col];
        }
        if p.contains(&point)
            && !vertices
                .iter()
                .any(|v| v.iter().zip(&point).all(|(a, b)| (a - b).abs() < 1e-9))
        {
            vertices.push(point);
        }
    }
    vertices
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap()
        })?;
        if a[pivot * n + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                a.swap(pivot * n + c, col * n + c);
            }
            b.swap(pivot, col);
        }
        let inv = 1.0 / a[col * n + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = a[r * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
            b[r] -= factor * b[col];
        }
    }
    Some((0..n).map(|i| b[i] / a[i * n + i]).collect())
}

/// Walks the per-axis grid `{0, step, ..., ub_k}` with `resolution`
/// points per axis, stopping early when the visitor returns true.
fn grid_scan(ub: &[f64], resolution: usize, visit: &mut dyn FnMut(&[f64]) -> bool) {
    let dim = ub.len();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    loop {
        for k in 0..dim {
            point[k] = if ub[k] <= 0.0 {
                0.0
            } else {
                ub[k] * idx[k] as f64 / (resolution - 1) as f64
            };
        }
        if visit(&point) {
            return;
        }
        let mut k = 0;
        loop {
            if k == dim {
                return;
            }
            idx[k] += 1;
            if idx[k] < resolution {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Vertex enumeration for plotting, K in {2, 3}: all feasible
/// intersections of K hyperplanes drawn from each polytope's constraints,
/// the coordinate planes, and the bounding-box caps; deduplicated within
/// `1e-9` and sorted lexicographically.
pub fn vertices_2d3d(region: &RateRegion) -> Result<Vec<Vec<f64>>, RegionError> {
    let dim = region.dim;
    if dim != 2 && dim != 3 {
        return Err(RegionError::UnsupportedDimension(dim));
    }
    let fallback = global_rhs_cap(region, region);
    let mut out: Vec<Vec<f64>> = Vec::new();
    for p in &region.polytopes {
        if p.is_empty() {
            continue;
        }
        let ub = p.bounding_box(fallback);
        // Box caps close off directions no constraint bounds.
        let mut boxed = p.clone();
        for (k, &cap) in ub.iter().enumerate() {
            boxed.halfspaces.push(HalfSpace::new([k], cap));
        }
        let constrained = vec![true; dim];
        for vertex in polytope_vertices(&boxed, &constrained) {
            if !out
                .iter()
                .any(|v| v.iter().zip(&vertex).all(|(a, b)| (a - b).abs() < 1e-9))
            {
                out.push(vertex);
            }
        }
    }
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(out)
}

/// Mutual containment at the given sampling resolution.
pub fn equivalent(a: &RateRegion, b: &RateRegion, resolution: usize) -> Result<bool, RegionError> {
    Ok(contains_region(a, b, resolution)?.holds() && contains_region(b, a, resolution)?.holds())
}

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------

/// Line-oriented region format: a `K=<dim>` header, then one block per
/// polytope introduced by a `polytope` line, one constraint per line as
/// `T={k1,k2,...} rhs=<decimal>` with one-based indices, blocks separated
/// by blank lines. Nine decimal places.
pub fn to_text(region: &RateRegion) -> String {
    let mut out = format!("K={}\n", region.dim);
    for (i, p) in region.polytopes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str("polytope\n");
        for h in &p.halfspaces {
            let indices: Vec<String> = h.tset.iter().map(|k| (k + 1).to_string()).collect();
            out.push_str(&format!("T={{{}}} rhs={:.9}\n", indices.join(","), h.rhs));
        }
    }
    out
}

/// Parses the format written by [`to_text`].
pub fn from_text(text: &str) -> Result<RateRegion, RegionError> {
    let mut lines = text.lines().enumerate();
    let (first_no, first) = lines
        .next()
        .ok_or_else(|| RegionError::Parse {
            line: 1,
            message: "empty region file".into(),
        })?;
    let dim: usize = first
        .strip_prefix("K=")
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| RegionError::Parse {
            line: first_no + 1,
            message: format!("expected K=<dim> header, got {first:?}"),
        })?;
    let mut polytopes = Vec::new();
    let mut current: Option<Vec<HalfSpace>> = None;
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "polytope" {
            if let Some(hs) = current.take() {
                polytopes.push(Polytope::from_halfspaces(dim, hs).map_err(|e| {
                    RegionError::Parse {
                        line: no + 1,
                        message: e.to_string(),
                    }
                })?);
            }
            current = Some(Vec::new());
            continue;
        }
        let parse_err = |message: String| RegionError::Parse {
            line: no + 1,
            message,
        };
        let rest = line
            .strip_prefix("T={")
            .ok_or_else(|| parse_err(format!("expected constraint line, got {line:?}")))?;
        let (set_part, rhs_part) = rest
            .split_once("} rhs=")
            .ok_or_else(|| parse_err("missing '} rhs=' separator".into()))?;
        let mut tset = BTreeSet::new();
        for token in set_part.split(',').filter(|t| !t.trim().is_empty()) {
            let k: usize = token
                .trim()
                .parse()
                .map_err(|_| parse_err(format!("bad index {token:?}")))?;
            if k == 0 {
                return Err(parse_err("indices are one-based".into()));
            }
            tset.insert(k - 1);
        }
        let rhs: f64 = rhs_part
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("bad rhs {rhs_part:?}")))?;
        current
            .as_mut()
            .ok_or_else(|| parse_err("constraint before any polytope line".into()))?
            .push(HalfSpace { tset, rhs });
    }
    if let Some(hs) = current.take() {
        polytopes.push(
            Polytope::from_halfspaces(dim, hs).map_err(|e| RegionError::Parse {
                line: 0,
                message: e.to_string(),
            })?,
        );
    }
    Ok(RateRegion::from_polytopes(dim, polytopes))
}

/// Vertices as CSV with an `R_1,...,R_K` header, nine decimal places.
pub fn vertices_csv(region: &RateRegion) -> Result<String, RegionError> {
    let vertices = vertices_2d3d(region)?;
    let header: Vec<String> = (1..=region.dim).map(|k| format!("R_{k}")).collect();
    let mut out = header.join(",");
    out.push('\n');
    for v in vertices {
        let row: Vec<String> = v.iter().map(|x| format!("{x:.9}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}
