//! Exact probability engine for discrete memoryless multiple-access
//! channels driven through per-user symbol mappings.
//!
//! [`ChannelSpec`] describes the model: `K` independent user variables
//! `U_k` over F_q with pmfs `p(u_k)`, symbol maps `x_k(u_k)` into finite
//! input alphabets, and a conditional law `p(y | x_1, ..., x_K)`.
//! [`build_joint`] materializes the full joint pmf of `(U_1, ..., U_K, Y)`
//! from which every entropic quantity is computed exactly (up to floating
//! point).
//!
//! Linear-combination variables `W_F = F [U_1 ... U_K]^T` are never
//! stored; they are evaluated on the fly while marginalizing, so any
//! finite list of `W_F` selections can join an entropy query.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gflin::GfMatrix;

/// Tolerance on pmf normalization checks.
pub const PMF_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("{what} sums to {sum}, expected 1 within {PMF_TOLERANCE}")]
    NotNormalized { what: String, sum: f64 },
    #[error("{what} contains a negative probability {value}")]
    NegativeProbability { what: String, value: f64 },
    #[error("inconsistent shape: {0}")]
    BadShape(String),
    #[error("symbol map entry {value} out of range for alphabet of size {size}")]
    SymbolOutOfRange { value: usize, size: usize },
    #[error("variable selection refers to user {index} but K = {users}")]
    UserOutOfRange { index: usize, users: usize },
    #[error("W-matrix over F_{got} with {cols} columns does not match F_{want} with {users} users")]
    WMatrixMismatch {
        got: u64,
        want: u64,
        cols: usize,
        users: usize,
    },
}

/// Description of a K-user DM-MAC together with the input pmfs and symbol
/// mappings that drive it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSpec {
    q: u64,
    users: usize,
    pmf_u: Vec<Vec<f64>>,
    symbol_map: Vec<Vec<usize>>,
    x_sizes: Vec<usize>,
    y_size: usize,
    /// `channel[joint_x * y_size + y]` with `joint_x` row-major over
    /// `(x_1, ..., x_K)`, `x_1` most significant.
    channel: Vec<f64>,
}

impl ChannelSpec {
    pub fn new(
        q: u64,
        pmf_u: Vec<Vec<f64>>,
        symbol_map: Vec<Vec<usize>>,
        x_sizes: Vec<usize>,
        y_size: usize,
        channel: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        let users = pmf_u.len();
        if users == 0 {
            return Err(ChannelError::BadShape("no users".into()));
        }
        if symbol_map.len() != users || x_sizes.len() != users {
            return Err(ChannelError::BadShape(format!(
                "pmf_u has {} users but symbol_map has {} and x_alphabet_sizes has {}",
                users,
                symbol_map.len(),
                x_sizes.len()
            )));
        }
        if y_size == 0 {
            return Err(ChannelError::BadShape("empty output alphabet".into()));
        }
        for (k, pmf) in pmf_u.iter().enumerate() {
            if pmf.len() != q as usize {
                return Err(ChannelError::BadShape(format!(
                    "pmf_u[{}] has {} entries, expected q = {}",
                    k,
                    pmf.len(),
                    q
                )));
            }
            check_pmf(&format!("pmf_u[{k}]"), pmf)?;
        }
        for (k, map) in symbol_map.iter().enumerate() {
            if map.len() != q as usize {
                return Err(ChannelError::BadShape(format!(
                    "x_map[{}] has {} entries, expected q = {}",
                    k,
                    map.len(),
                    q
                )));
            }
            for &x in map {
                if x >= x_sizes[k] {
                    return Err(ChannelError::SymbolOutOfRange {
                        value: x,
                        size: x_sizes[k],
                    });
                }
            }
        }
        let joint_inputs: usize = x_sizes.iter().product();
        if channel.len() != joint_inputs * y_size {
            return Err(ChannelError::BadShape(format!(
                "channel table has {} entries, expected {} inputs x {} outputs",
                channel.len(),
                joint_inputs,
                y_size
            )));
        }
        for row in 0..joint_inputs {
            check_pmf(
                &format!("channel row {row}"),
                &channel[row * y_size..(row + 1) * y_size],
            )?;
        }
        Ok(Self {
            q,
            users,
            pmf_u,
            symbol_map,
            x_sizes,
            y_size,
            channel,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn x_sizes(&self) -> &[usize] {
        &self.x_sizes
    }

    pub fn pmf_u(&self, k: usize) -> &[f64] {
        &self.pmf_u[k]
    }

    pub fn symbol_map(&self, k: usize) -> &[usize] {
        &self.symbol_map[k]
    }

    /// `p(y | x_1, ..., x_K)` with `xs` holding one symbol per user.
    pub fn channel_prob(&self, xs: &[usize], y: usize) -> f64 {
        let mut idx = 0;
        for (k, &x) in xs.iter().enumerate() {
            idx = idx * self.x_sizes[k] + x;
        }
        self.channel[idx * self.y_size + y]
    }

    /// Channel inputs induced by a u-tuple via the symbol maps.
    pub fn inputs_for(&self, us: &[u64]) -> Vec<usize> {
        us.iter()
            .enumerate()
            .map(|(k, &u)| self.symbol_map[k][u as usize])
            .collect()
    }

    /// True when the other spec shares the transmitter-side data (field,
    /// user count, pmfs, symbol maps); the channels may differ.
    pub fn shares_inputs_with(&self, other: &ChannelSpec) -> bool {
        self.q == other.q
            && self.users == other.users
            && self.pmf_u == other.pmf_u
            && self.symbol_map == other.symbol_map
            && self.x_sizes == other.x_sizes
    }
}

fn check_pmf(what: &str, pmf: &[f64]) -> Result<(), ChannelError> {
    for &p in pmf {
        if p < 0.0 {
            return Err(ChannelError::NegativeProbability {
                what: what.to_string(),
                value: p,
            });
        }
    }
    let sum: f64 = pmf.iter().sum();
    if (sum - 1.0).abs() > PMF_TOLERANCE {
        return Err(ChannelError::NotNormalized {
            what: what.to_string(),
            sum,
        });
    }
    Ok(())
}

/// A variable that can be selected in an entropy or mutual-information
/// query against a [`JointDist`]. User indices are zero-based.
#[derive(Debug, Clone)]
pub enum Var {
    /// The field symbol `U_k`.
    U(usize),
    /// The channel input `X_k = x_k(U_k)`.
    X(usize),
    /// The channel output.
    Y,
    /// The linear-combination vector `W_F = F [U_1 ... U_K]^T`; the matrix
    /// must have `K` columns over the spec's field. An empty matrix is a
    /// degenerate (constant) selection.
    W(GfMatrix),
}

/// Exact joint pmf over `(U_1, ..., U_K, Y)`.
#[derive(Debug, Clone)]
pub struct JointDist {
    q: u64,
    users: usize,
    y_size: usize,
    symbol_map: Vec<Vec<usize>>,
    /// `probs[u_index * y_size + y]` with `u_index` row-major over the
    /// u-tuple, `u_1` most significant.
    probs: Vec<f64>,
}

/// Builds the joint table `P(u_1, ..., u_K, y) = prod_k p(u_k) * p(y | x(u))`.
pub fn build_joint(spec: &ChannelSpec) -> Result<JointDist, ChannelError> {
    let q = spec.q as usize;
    let users = spec.users;
    let u_count = q.pow(users as u32);
    let mut probs = vec![0.0; u_count * spec.y_size];
    let mut us = vec![0u64; users];
    for u_index in 0..u_count {
        decode_tuple(u_index, q, &mut us);
        let mut pu = 1.0;
        for (k, &u) in us.iter().enumerate() {
            pu *= spec.pmf_u[k][u as usize];
        }
        if pu == 0.0 {
            continue;
        }
        let xs = spec.inputs_for(&us);
        for y in 0..spec.y_size {
            probs[u_index * spec.y_size + y] = pu * spec.channel_prob(&xs, y);
        }
    }
    Ok(JointDist {
        q: spec.q,
        users,
        y_size: spec.y_size,
        symbol_map: spec.symbol_map.clone(),
        probs,
    })
}

fn decode_tuple(mut index: usize, q: usize, out: &mut [u64]) {
    for slot in out.iter_mut().rev() {
        *slot = (index % q) as u64;
        index /= q;
    }
}

impl JointDist {
    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    pub fn prob(&self, us: &[u64], y: usize) -> f64 {
        let mut idx = 0usize;
        for &u in us {
            idx = idx * self.q as usize + u as usize;
        }
        self.probs[idx * self.y_size + y]
    }

    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    fn validate_vars(&self, vars: &[Var]) -> Result<(), ChannelError> {
        for v in vars {
            match v {
                Var::U(k) | Var::X(k) => {
                    if *k >= self.users {
                        return Err(ChannelError::UserOutOfRange {
                            index: *k,
                            users: self.users,
                        });
                    }
                }
                Var::Y => {}
                Var::W(f) => {
                    if f.modulus() != self.q || (!f.is_empty() && f.cols() != self.users) {
                        return Err(ChannelError::WMatrixMismatch {
                            got: f.modulus(),
                            want: self.q,
                            cols: f.cols(),
                            users: self.users,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Marginal pmf of a variable selection, keyed by the tuple of
    /// realized values in selection order. Deterministic iteration order.
    pub fn marginal(&self, vars: &[Var]) -> Result<BTreeMap<Vec<u64>, f64>, ChannelError> {
        self.validate_vars(vars)?;
        let q = self.q as usize;
        let u_count = q.pow(self.users as u32);
        let mut out = BTreeMap::new();
        let mut us = vec![0u64; self.users];
        let mut key = Vec::with_capacity(vars.len() + 4);
        for u_index in 0..u_count {
            decode_tuple(u_index, q, &mut us);
            for y in 0..self.y_size {
                let p = self.probs[u_index * self.y_size + y];
                if p == 0.0 {
                    continue;
                }
                key.clear();
                for v in vars {
                    match v {
                        Var::U(k) => key.push(us[*k]),
                        Var::X(k) => key.push(self.symbol_map[*k][us[*k] as usize] as u64),
                        Var::Y => key.push(y as u64),
                        Var::W(f) => {
                            for r in 0..f.rows() {
                                let mut acc = 0u64;
                                for (k, &u) in us.iter().enumerate() {
                                    acc = (acc + f.get(r, k) * u) % self.q;
                                }
                                key.push(acc);
                            }
                        }
                    }
                }
                *out.entry(key.clone()).or_insert(0.0) += p;
            }
        }
        Ok(out)
    }

    /// Shannon entropy in bits of the selected variables, with the
    /// convention `0 log 0 = 0`.
    pub fn entropy(&self, vars: &[Var]) -> Result<f64, ChannelError> {
        let marginal = self.marginal(vars)?;
        let mut h = 0.0;
        for p in marginal.values() {
            if *p > 0.0 {
                h -= p * p.log2();
            }
        }
        Ok(h)
    }

    /// `H(W_{b_s} | Y, W_{cb})` where both matrices act on `[U_1 ... U_K]^T`.
    pub fn cond_entropy_w(&self, b_s: &GfMatrix, cb: &GfMatrix) -> Result<f64, ChannelError> {
        let joint = self.entropy(&[Var::W(b_s.clone()), Var::Y, Var::W(cb.clone())])?;
        let cond = self.entropy(&[Var::Y, Var::W(cb.clone())])?;
        Ok(joint - cond)
    }

    /// Mutual information `I(left; right)` in bits.
    pub fn mutual_info(&self, left: &[Var], right: &[Var]) -> Result<f64, ChannelError> {
        self.cond_mutual_info(left, right, &[])
    }

    /// Conditional mutual information
    /// `I(left; right | cond) = H(left, cond) + H(right, cond) - H(cond) - H(left, right, cond)`.
    pub fn cond_mutual_info(
        &self,
        left: &[Var],
        right: &[Var],
        cond: &[Var],
    ) -> Result<f64, ChannelError> {
        let mut lc = left.to_vec();
        lc.extend_from_slice(cond);
        let mut rc = right.to_vec();
        rc.extend_from_slice(cond);
        let mut lrc = left.to_vec();
        lrc.extend_from_slice(right);
        lrc.extend_from_slice(cond);
        Ok(self.entropy(&lc)? + self.entropy(&rc)? - self.entropy(cond)? - self.entropy(&lrc)?)
    }

    /// Joint pmf over `(u_1, ..., u_K, y)` as a flat table, `u_1` most
    /// significant; used by the simulator's typicality tests.
    pub fn table(&self) -> &[f64] {
        &self.probs
    }
}

/// Selections of all `U_k`, `k` in `t` (zero-based), ascending.
pub fn u_vars(t: &[usize]) -> Vec<Var> {
    let mut sorted = t.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().map(Var::U).collect()
}

/// Selections of all `X_k`, `k` in `t` (zero-based), ascending.
pub fn x_vars(t: &[usize]) -> Vec<Var> {
    let mut sorted = t.to_vec();
    sorted.sort_unstable();
    sorted.into_iter().map(Var::X).collect()
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::gflin::{enum_fullrank_rref, matmul, rref, DEFAULT_ENUM_BUDGET};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// The three-user mod-4 adder channel with additive noise
    /// `p_Z(0) = 1-p`, `p_Z(1) = p_Z(2) = p_Z(3) = p/3`, binary inputs
    /// embedded in F_5.
    pub(crate) fn mod4_adder(p: f64) -> ChannelSpec {
        let pz = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
        let pmf = vec![0.5, 0.5, 0.0, 0.0, 0.0];
        let map = vec![0usize, 1, 0, 0, 0];
        let mut channel = Vec::with_capacity(8 * 4);
        for x1 in 0..2usize {
            for x2 in 0..2usize {
                for x3 in 0..2usize {
                    let s = x1 + x2 + x3;
                    for y in 0..4usize {
                        channel.push(pz[(y + 4 - s % 4) % 4]);
                    }
                }
            }
        }
        ChannelSpec::new(
            5,
            vec![pmf.clone(), pmf.clone(), pmf],
            vec![map.clone(), map.clone(), map],
            vec![2, 2, 2],
            4,
            channel,
        )
        .unwrap()
    }

    /// Noiseless two-user binary adder: `Y = X_1 + X_2` over the reals.
    pub(crate) fn binary_adder() -> ChannelSpec {
        let channel = vec![
            1.0, 0.0, 0.0, // (0,0) -> 0
            0.0, 1.0, 0.0, // (0,1) -> 1
            0.0, 1.0, 0.0, // (1,0) -> 1
            0.0, 0.0, 1.0, // (1,1) -> 2
        ];
        ChannelSpec::new(
            2,
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![vec![0, 1], vec![0, 1]],
            vec![2, 2],
            3,
            channel,
        )
        .unwrap()
    }

    fn noiseless_identity_k1() -> ChannelSpec {
        ChannelSpec::new(
            2,
            vec![vec![0.5, 0.5]],
            vec![vec![0, 1]],
            vec![2],
            2,
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap()
    }

    #[test]
    fn build_joint_noiseless_identity() {
        let d = build_joint(&noiseless_identity_k1()).unwrap();
        for u in 0..2u64 {
            for y in 0..2usize {
                let want = if y as u64 == u { 0.5 } else { 0.0 };
                assert_eq!(d.prob(&[u], y), want);
            }
        }
    }

    #[test]
    fn build_joint_mod4_adder_noiseless() {
        let d = build_joint(&mod4_adder(0.0)).unwrap();
        for u1 in 0..2u64 {
            for u2 in 0..2u64 {
                for u3 in 0..2u64 {
                    let s = ((u1 + u2 + u3) % 4) as usize;
                    assert!((d.prob(&[u1, u2, u3], s) - 0.125).abs() < 1e-15);
                    for y in 0..4 {
                        if y != s {
                            assert_eq!(d.prob(&[u1, u2, u3], y), 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn build_joint_mod4_adder_noisy_shift() {
        let d = build_joint(&mod4_adder(0.3)).unwrap();
        // P(Y = s + 1 mod 4 | u) = p/3 = 0.1 for every input tuple.
        for u1 in 0..2u64 {
            for u2 in 0..2u64 {
                for u3 in 0..2u64 {
                    let s = (u1 + u2 + u3) as usize;
                    let p = d.prob(&[u1, u2, u3], (s + 1) % 4);
                    assert!((p - 0.125 * 0.1).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn build_joint_rejects_bad_pmf() {
        let err = ChannelSpec::new(
            2,
            vec![vec![0.6, 0.6]],
            vec![vec![0, 1]],
            vec![2],
            2,
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .unwrap_err();
        assert!(matches!(err, ChannelError::NotNormalized { .. }));
    }

    #[test]
    fn entropy_basics() {
        let d = build_joint(&binary_adder()).unwrap();
        assert!((d.entropy(&[Var::U(0)]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(d.entropy(&[]).unwrap(), 0.0);
    }

    #[test]
    fn entropy_of_noise_term() {
        // H(Y | U_1, U_2, U_3) = H(Z) because Y = sum + Z with the sum
        // determined by the conditioning.
        let d = build_joint(&mod4_adder(0.3)).unwrap();
        let h_all = d
            .entropy(&[Var::Y, Var::U(0), Var::U(1), Var::U(2)])
            .unwrap();
        let h_u = d.entropy(&[Var::U(0), Var::U(1), Var::U(2)]).unwrap();
        let want = -(0.7f64 * 0.7f64.log2() + 3.0 * 0.1 * 0.1f64.log2());
        assert!((h_all - h_u - want).abs() < 1e-9, "H(Z) = {}", h_all - h_u);
        assert!((want - 1.3568).abs() < 1e-4);
    }

    #[test]
    fn cond_entropy_w_examples() {
        let d = build_joint(&mod4_adder(0.0)).unwrap();
        let b = GfMatrix::row_vector(&[1, 1, 1], 5).unwrap();
        let empty = GfMatrix::zero(0, 3, 5).unwrap();
        // Noiseless: Y determines the sum.
        assert!(d.cond_entropy_w(&b, &empty).unwrap().abs() < 1e-12);
        // Conditioning on itself.
        assert!(d.cond_entropy_w(&b, &b).unwrap().abs() < 1e-12);
    }

    #[test]
    fn cond_entropy_w_matches_exhaustive_oracle() {
        // Independent oracle: accumulate P(w, y) and P(y) by direct
        // enumeration of (u_1, u_2, u_3, z) without the JointDist machinery.
        let p = 0.3;
        let pz = [1.0 - p, p / 3.0, p / 3.0, p / 3.0];
        let mut pwy = std::collections::BTreeMap::new();
        let mut py = [0.0f64; 4];
        for u1 in 0..2u64 {
            for u2 in 0..2u64 {
                for u3 in 0..2u64 {
                    for (z, &pzv) in pz.iter().enumerate() {
                        let w = (u1 + u2 + u3) % 5;
                        let y = ((u1 + u2 + u3) as usize + z) % 4;
                        let mass = 0.125 * pzv;
                        *pwy.entry((w, y)).or_insert(0.0) += mass;
                        py[y] += mass;
                    }
                }
            }
        }
        let mut oracle = 0.0;
        for &pv in pwy.values() {
            if pv > 0.0 {
                oracle -= pv * pv.log2();
            }
        }
        for &pv in &py {
            if pv > 0.0 {
                oracle += pv * pv.log2();
            }
        }

        let d = build_joint(&mod4_adder(p)).unwrap();
        let b = GfMatrix::row_vector(&[1, 1, 1], 5).unwrap();
        let empty = GfMatrix::zero(0, 3, 5).unwrap();
        let got = d.cond_entropy_w(&b, &empty).unwrap();
        assert!((got - oracle).abs() < 1e-12, "got {got}, oracle {oracle}");
    }

    #[test]
    fn mutual_info_examples() {
        let d = build_joint(&noiseless_identity_k1()).unwrap();
        assert!((d.mutual_info(&[Var::U(0)], &[Var::Y]).unwrap() - 1.0).abs() < 1e-12);

        // Independent variables.
        let d2 = build_joint(&binary_adder()).unwrap();
        assert!(d2.mutual_info(&[Var::U(0)], &[Var::U(1)]).unwrap().abs() < 1e-12);

        // Noiseless mod-4 adder: I(X_1,X_2,X_3; Y) = H(Y) of {1/8,3/8,3/8,1/8}.
        let d3 = build_joint(&mod4_adder(0.0)).unwrap();
        let got = d3
            .mutual_info(&[Var::X(0), Var::X(1), Var::X(2)], &[Var::Y])
            .unwrap();
        let want = -(2.0 * 0.125 * 0.125f64.log2() + 2.0 * 0.375 * 0.375f64.log2());
        assert!((got - want).abs() < 1e-12);
        assert!((want - 1.811278).abs() < 1e-6);
    }

    #[test]
    fn entropy_bounds_and_monotonicity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..20 {
            let spec = random_spec(&mut rng);
            let d = build_joint(&spec).unwrap();
            let h_y = d.entropy(&[Var::Y]).unwrap();
            assert!(h_y >= -1e-12);
            assert!(h_y <= (spec.y_size() as f64).log2() + 1e-9);
            // Conditioning never increases entropy.
            let b = GfMatrix::row_vector(&[1; 2], spec.q()).unwrap();
            let cb = GfMatrix::row_vector(&[1, 0], spec.q()).unwrap();
            let h_cond = d.cond_entropy_w(&b, &cb).unwrap();
            let h_plain = d.entropy(&[Var::W(b)]).unwrap();
            assert!(h_cond <= h_plain + 1e-9);
        }
    }

    #[test]
    fn conditioning_span_invariance() {
        // H(W_{b_s} | Y, W_{CB}) only depends on C through Span(C).
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..10 {
            let spec = random_spec(&mut rng);
            let q = spec.q();
            let d = build_joint(&spec).unwrap();
            let b = GfMatrix::identity(2, q).unwrap();
            let b_s = GfMatrix::row_vector(&[1, 0], q).unwrap();
            for c in enum_fullrank_rref(1, 2, q, DEFAULT_ENUM_BUDGET).unwrap() {
                // Scale the C row to get an equal-span, non-RREF variant.
                let scaled: Vec<u64> = c.row(0).iter().map(|&v| v * (q - 1) % q).collect();
                let c2 = GfMatrix::row_vector(&scaled, q).unwrap();
                assert_eq!(rref(&c2), c);
                let h1 = d.cond_entropy_w(&b_s, &matmul(&c, &b).unwrap()).unwrap();
                let h2 = d.cond_entropy_w(&b_s, &matmul(&c2, &b).unwrap()).unwrap();
                assert!((h1 - h2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn joint_marginal_product_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let spec = random_spec(&mut rng);
            let d = build_joint(&spec).unwrap();
            assert!((d.total_mass() - 1.0).abs() < 1e-9);
            let q = spec.q() as usize;
            let users = spec.users();
            let mut us = vec![0u64; users];
            for u_index in 0..q.pow(users as u32) {
                super::decode_tuple(u_index, q, &mut us);
                let mut want = 1.0;
                for (k, &u) in us.iter().enumerate() {
                    want *= spec.pmf_u(k)[u as usize];
                }
                let got: f64 = (0..spec.y_size()).map(|y| d.prob(&us, y)).sum();
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn chain_rule_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..10 {
            let spec = random_spec(&mut rng);
            let d = build_joint(&spec).unwrap();
            let a = [Var::U(0)];
            let b = [Var::Y];
            let h_ab = d.entropy(&[Var::U(0), Var::Y]).unwrap();
            let h_a = d.entropy(&a).unwrap();
            let h_b_given_a = h_ab - h_a;
            let h_b = d.entropy(&b).unwrap();
            let mi = d.mutual_info(&a, &b).unwrap();
            assert!((h_b - h_b_given_a - mi).abs() < 1e-9);
        }
    }

    #[test]
    fn var_validation_errors() {
        let d = build_joint(&binary_adder()).unwrap();
        assert!(matches!(
            d.entropy(&[Var::U(2)]),
            Err(ChannelError::UserOutOfRange { .. })
        ));
        let wrong_field = GfMatrix::row_vector(&[1, 1], 3).unwrap();
        assert!(matches!(
            d.entropy(&[Var::W(wrong_field)]),
            Err(ChannelError::WMatrixMismatch { .. })
        ));
        let wrong_cols = GfMatrix::row_vector(&[1, 1, 1], 2).unwrap();
        assert!(d.entropy(&[Var::W(wrong_cols)]).is_err());
    }

    /// Random small K=2 spec over q in {2, 5} with full-support pmfs.
    fn random_spec(rng: &mut ChaCha8Rng) -> ChannelSpec {
        let q: u64 = if rng.random_bool(0.5) { 2 } else { 5 };
        let users = 2;
        let y_size = rng.random_range(2..=4);
        let pmf_u: Vec<Vec<f64>> = (0..users)
            .map(|_| {
                let raw: Vec<f64> = (0..q).map(|_| rng.random_range(0.05..1.0)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|v| v / total).collect()
            })
            .collect();
        let x_sizes = vec![2usize; users];
        let symbol_map: Vec<Vec<usize>> = (0..users)
            .map(|_| (0..q).map(|_| rng.random_range(0..2usize)).collect())
            .collect();
        let joint: usize = x_sizes.iter().product();
        let mut channel = Vec::with_capacity(joint * y_size);
        for _ in 0..joint {
            let raw: Vec<f64> = (0..y_size).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            channel.extend(raw.into_iter().map(|v| v / total));
        }
        ChannelSpec::new(q, pmf_u, symbol_map, x_sizes, y_size, channel).unwrap()
    }
}
