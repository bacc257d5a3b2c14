//! Desk-scale Monte Carlo implementation of the nested linear coding
//! scheme, plus exhaustive counting oracles for the error-event
//! partition.
//!
//! Codebooks are generated from one shared `kappa x n` generator matrix
//! `G` and per-user dithers: `u_k^n(m_k, l_k) = [m_k, l_k, 0] G + d_k`,
//! so field combinations of codewords are codewords of the same form.
//! The encoder multicodes: it scans the auxiliary indices `l_k` for a
//! codeword that is robustly typical for `p(u_k)` and picks one uniformly
//! at random (flagging a covering failure when none exists). The decoder
//! enumerates every admissible message matrix, tests joint typicality of
//! the candidate codeword tuple with the channel output, and succeeds
//! when all typical candidates agree on one sumset value `A M`.
//!
//! Every trial draws a fresh codebook. Trials are driven by one seedable
//! generator per trial (same key, stream = trial counter), so results
//! are reproducible and order-independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::channel::{build_joint, ChannelError, ChannelSpec, JointDist};
use crate::gflin::{
    enum_fullrank_rref, index_subsets, matmul, nullspace_rowbasis, rank, select_rows, GfError,
    GfMatrix,
};

/// Cap on the number of candidate message tuples the decoder enumerates.
pub const DECODE_BUDGET: u64 = 1 << 22;

/// Cap on the message-matrix space the exhaustive oracles enumerate.
pub const ORACLE_BUDGET: u64 = 1 << 20;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("n R_k / log2(q) must be an integer; user {user} gives {value}")]
    NonIntegerKappa { user: usize, value: f64 },
    #[error("typicality parameters must satisfy 0 < eps' < eps < 1, got eps={eps}, eps'={eps_prime}")]
    BadEpsilon { eps: f64, eps_prime: f64 },
    #[error("expected {expected} rates, got {got}")]
    RateCountMismatch { expected: usize, got: usize },
    #[error("candidate space of {space} tuples exceeds budget {budget}")]
    BudgetExceeded { space: u128, budget: u64 },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Gf(#[from] GfError),
}

/// Robust typicality: `|pi(a | x) - p(a)| <= eps * p(a)` for every symbol
/// `a` of the alphabet.
pub fn typical_set_test(x: &[u64], pmf: &[f64], eps: f64) -> bool {
    let n = x.len();
    if n == 0 {
        return true;
    }
    let mut counts = vec![0u64; pmf.len()];
    for &v in x {
        counts[v as usize] += 1;
    }
    let nf = n as f64;
    counts
        .iter()
        .zip(pmf)
        .all(|(&c, &p)| (c as f64 - nf * p).abs() <= eps * nf * p)
}

/// Monte Carlo configuration. Rates are in bits; `n R_k / log2(q)` and
/// `n Rhat_k / log2(q)` must be integers (the q-ary message lengths).
#[derive(Debug, Clone)]
pub struct SimConfig {
    spec: ChannelSpec,
    coeff: GfMatrix,
    n: usize,
    rates: Vec<f64>,
    aux_rates: Vec<f64>,
    eps: f64,
    eps_prime: f64,
    trials: u64,
    seed: u64,
    kappas: Vec<usize>,
    aux_kappas: Vec<usize>,
}

/// Default typicality parameters.
pub const DEFAULT_EPS: f64 = 0.1;
pub const DEFAULT_EPS_PRIME: f64 = 0.05;

impl SimConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        spec: ChannelSpec,
        coeff: GfMatrix,
        n: usize,
        rates: Vec<f64>,
        aux_rates: Vec<f64>,
        eps: f64,
        eps_prime: f64,
        trials: u64,
        seed: u64,
    ) -> Result<Self, SimError> {
        let users = spec.users();
        if rates.len() != users {
            return Err(SimError::RateCountMismatch {
                expected: users,
                got: rates.len(),
            });
        }
        if aux_rates.len() != users {
            return Err(SimError::RateCountMismatch {
                expected: users,
                got: aux_rates.len(),
            });
        }
        if !(eps_prime > 0.0 && eps_prime < eps && eps < 1.0) {
            return Err(SimError::BadEpsilon { eps, eps_prime });
        }
        let log_q = (spec.q() as f64).log2();
        let to_kappa = |user: usize, rate: f64| -> Result<usize, SimError> {
            let value = (n as f64) * rate / log_q;
            let rounded = value.round();
            if (value - rounded).abs() > 1e-9 || rounded < 0.0 {
                return Err(SimError::NonIntegerKappa { user, value });
            }
            Ok(rounded as usize)
        };
        let kappas = rates
            .iter()
            .enumerate()
            .map(|(k, &r)| to_kappa(k, r))
            .collect::<Result<Vec<_>, _>>()?;
        let aux_kappas = aux_rates
            .iter()
            .enumerate()
            .map(|(k, &r)| to_kappa(k, r))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            spec,
            coeff,
            n,
            rates,
            aux_rates,
            eps,
            eps_prime,
            trials,
            seed,
            kappas,
            aux_kappas,
        })
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn coeff(&self) -> &GfMatrix {
        &self.coeff
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    pub fn aux_rates(&self) -> &[f64] {
        &self.aux_rates
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// q-ary message lengths per user.
    pub fn kappas(&self) -> &[usize] {
        &self.kappas
    }

    /// q-ary auxiliary-index lengths per user.
    pub fn aux_kappas(&self) -> &[usize] {
        &self.aux_kappas
    }

    /// Total per-user index length `kappa_k + kappahat_k`.
    pub fn kappa_tilde(&self, k: usize) -> usize {
        self.kappas[k] + self.aux_kappas[k]
    }

    /// Shared generator length: the maximum total index length.
    pub fn kappa(&self) -> usize {
        (0..self.spec.users())
            .map(|k| self.kappa_tilde(k))
            .max()
            .unwrap_or(0)
    }

    /// Number of admissible message matrices (the decoder's hypothesis
    /// space before taking sumset values).
    pub fn candidate_space(&self) -> u128 {
        let mut space: u128 = 1;
        for k in 0..self.spec.users() {
            space = space.saturating_mul((self.spec.q() as u128).pow(self.kappa_tilde(k) as u32));
        }
        space
    }
}

/// A sampled nested linear codebook: the shared generator `G`, one dither
/// per user.
#[derive(Debug, Clone)]
pub struct Codebook {
    q: u64,
    n: usize,
    kappa: usize,
    /// `kappa x n`, row-major.
    g: Vec<u64>,
    dithers: Vec<Vec<u64>>,
}

impl Codebook {
    pub fn sample(rng: &mut impl Rng, q: u64, n: usize, kappa: usize, users: usize) -> Self {
        let g = (0..kappa * n).map(|_| rng.random_range(0..q)).collect();
        let dithers = (0..users)
            .map(|_| (0..n).map(|_| rng.random_range(0..q)).collect())
            .collect();
        Self {
            q,
            n,
            kappa,
            g,
            dithers,
        }
    }

    pub fn g_row(&self, j: usize) -> &[u64] {
        &self.g[j * self.n..(j + 1) * self.n]
    }

    pub fn dither(&self, k: usize) -> &[u64] {
        &self.dithers[k]
    }

    /// `u_k^n(digits) = digits * G + d_k` where `digits` is the zero-padded
    /// q-ary index row of user `k`.
    pub fn codeword(&self, k: usize, digits: &[u64]) -> Vec<u64> {
        debug_assert!(digits.len() <= self.kappa);
        let mut u = self.dithers[k].clone();
        for (j, &digit) in digits.iter().enumerate() {
            if digit == 0 {
                continue;
            }
            let row = self.g_row(j);
            for (ui, &gi) in u.iter_mut().zip(row) {
                *ui = (*ui + digit * gi) % self.q;
            }
        }
        u
    }
}

/// Little-endian q-ary digits of `index`, `len` of them.
pub fn index_digits(mut index: u64, len: usize, q: u64) -> Vec<u64> {
    let mut out = vec![0u64; len];
    for slot in out.iter_mut() {
        *slot = index % q;
        index /= q;
    }
    out
}

/// Result of one encoding attempt.
#[derive(Debug, Clone)]
pub struct EncodeOutcome {
    pub aux_index: u64,
    /// The selected codeword, dither included.
    pub u: Vec<u64>,
    /// Channel inputs `x_k(u_{k,i})`.
    pub x: Vec<usize>,
    /// False when no auxiliary index produced a typical codeword and a
    /// random one was transmitted instead.
    pub covered: bool,
}

/// Multicoding encoder for user `k`: scan the auxiliary indices for
/// codewords typical w.r.t. `p(u_k)` at level `eps_prime`, pick one
/// uniformly; fall back to a uniformly random index on covering failure.
pub fn encode(
    cfg: &SimConfig,
    cb: &Codebook,
    k: usize,
    msg_index: u64,
    rng: &mut impl Rng,
) -> EncodeOutcome {
    let q = cfg.spec.q();
    let msg_digits = index_digits(msg_index, cfg.kappas[k], q);
    let aux_count = q.pow(cfg.aux_kappas[k] as u32);
    let mut typical = Vec::new();
    for aux in 0..aux_count {
        let mut digits = msg_digits.clone();
        digits.extend(index_digits(aux, cfg.aux_kappas[k], q));
        let u = cb.codeword(k, &digits);
        if typical_set_test(&u, cfg.spec.pmf_u(k), cfg.eps_prime) {
            typical.push((aux, u));
        }
    }
    let (aux_index, u, covered) = if typical.is_empty() {
        let aux = rng.random_range(0..aux_count);
        let mut digits = msg_digits.clone();
        digits.extend(index_digits(aux, cfg.aux_kappas[k], q));
        (aux, cb.codeword(k, &digits), false)
    } else {
        let pick = rng.random_range(0..typical.len());
        let (aux, u) = typical.swap_remove(pick);
        (aux, u, true)
    };
    let x = u
        .iter()
        .map(|&v| cfg.spec.symbol_map(k)[v as usize])
        .collect();
    EncodeOutcome {
        aux_index,
        u,
        x,
        covered,
    }
}

/// Decoder verdict: the estimated linear combinations `W_A^n` (rows of
/// length `n`), or a declared failure (no typical candidate, or typical
/// candidates with conflicting sumset values).
#[derive(Debug, Clone, PartialEq)]
pub enum DecodeOutcome {
    Estimate(Vec<Vec<u64>>),
    Failure,
}

/// Joint-typicality sumset decoder. Enumerates every admissible message
/// matrix, keeps the candidates whose codeword tuple is jointly typical
/// with `y` at level `eps`, and succeeds iff they all share one value of
/// `A M`, returning `W_A^n = M_A G + A D`.
pub fn decode_joint(
    cfg: &SimConfig,
    cb: &Codebook,
    joint: &JointDist,
    y: &[usize],
    budget: u64,
) -> Result<DecodeOutcome, SimError> {
    let space = cfg.candidate_space();
    if space > budget as u128 {
        return Err(SimError::BudgetExceeded { space, budget });
    }
    let q = cfg.spec.q() as usize;
    let users = cfg.spec.users();
    let n = cfg.n;
    let y_size = cfg.spec.y_size();

    // Typicality windows per joint cell (u_1, ..., u_K, y), u_1 most
    // significant: count c is admissible iff |c - n p| <= eps n p.
    let table = joint.table();
    let cell_count = table.len();
    let nf = n as f64;
    let lo: Vec<f64> = table.iter().map(|&p| nf * p * (1.0 - cfg.eps)).collect();
    let hi: Vec<f64> = table.iter().map(|&p| nf * p * (1.0 + cfg.eps)).collect();

    // Current candidate state: per-user digit rows, codewords, and the
    // per-position cell keys with their counts.
    let digit_counts: Vec<usize> = (0..users).map(|k| cfg.kappa_tilde(k)).collect();
    let mut digits: Vec<Vec<u64>> = digit_counts.iter().map(|&c| vec![0u64; c]).collect();
    let mut u_rows: Vec<Vec<u64>> = (0..users).map(|k| cb.codeword(k, &digits[k])).collect();
    let strides: Vec<usize> = (0..users)
        .map(|k| q.pow((users - 1 - k) as u32) * y_size)
        .collect();
    let mut keys = vec![0usize; n];
    let mut counts = vec![0i64; cell_count];
    for i in 0..n {
        let mut key = 0usize;
        for u in u_rows.iter() {
            key = key * q + u[i] as usize;
        }
        key = key * y_size + y[i];
        keys[i] = key;
        counts[key] += 1;
    }

    let lq = cfg.coeff.rows();
    let kappa = cfg.kappa();
    let mut first_value: Option<Vec<u64>> = None;

    // Odometer over the concatenated digit positions of all users.
    let positions: Vec<(usize, usize)> = (0..users)
        .flat_map(|k| (0..digit_counts[k]).map(move |j| (k, j)))
        .collect();

    loop {
        if is_typical(&counts, &lo, &hi) {
            let value = sumset_value(cfg, &digits, lq, kappa);
            match &first_value {
                None => first_value = Some(value),
                Some(existing) if *existing != value => return Ok(DecodeOutcome::Failure),
                _ => {}
            }
        }
        // Advance; on each digit step the digit changes by +1 mod q, so
        // the user's codeword gains one copy of the corresponding G row.
        let mut pos = 0;
        loop {
            if pos == positions.len() {
                // Enumeration complete.
                return Ok(match first_value {
                    Some(value) => {
                        DecodeOutcome::Estimate(estimate_from_value(cfg, cb, &value, lq))
                    }
                    None => DecodeOutcome::Failure,
                });
            }
            let (k, j) = positions[pos];
            add_g_row(
                cb,
                j,
                k,
                &mut u_rows,
                &mut keys,
                &mut counts,
                &strides,
                q as u64,
            );
            digits[k][j] += 1;
            if digits[k][j] < q as u64 {
                break;
            }
            digits[k][j] = 0;
            pos += 1;
        }
    }
}

fn is_typical(counts: &[i64], lo: &[f64], hi: &[f64]) -> bool {
    counts
        .iter()
        .zip(lo.iter().zip(hi))
        .all(|(&c, (&l, &h))| {
            let cf = c as f64;
            cf >= l && cf <= h
        })
}

#[allow(clippy::too_many_arguments)]
fn add_g_row(
    cb: &Codebook,
    row: usize,
    user: usize,
    u_rows: &mut [Vec<u64>],
    keys: &mut [usize],
    counts: &mut [i64],
    strides: &[usize],
    q: u64,
) {
    let g = cb.g_row(row);
    let stride = strides[user];
    let u = &mut u_rows[user];
    for i in 0..g.len() {
        let gi = g[i];
        if gi == 0 {
            continue;
        }
        let old = u[i];
        let new = (old + gi) % q;
        u[i] = new;
        counts[keys[i]] -= 1;
        let key = keys[i] as i64 + (new as i64 - old as i64) * stride as i64;
        keys[i] = key as usize;
        counts[keys[i]] += 1;
    }
}

/// `A M` for the current digit rows, flattened row-major to `lq x kappa`.
fn sumset_value(cfg: &SimConfig, digits: &[Vec<u64>], lq: usize, kappa: usize) -> Vec<u64> {
    let q = cfg.spec.q();
    let mut value = vec![0u64; lq * kappa];
    for l in 0..lq {
        for (k, row) in digits.iter().enumerate() {
            let a = cfg.coeff.get(l, k);
            if a == 0 {
                continue;
            }
            for (j, &d) in row.iter().enumerate() {
                if d != 0 {
                    value[l * kappa + j] = (value[l * kappa + j] + a * d) % q;
                }
            }
        }
    }
    value
}

/// `W_A^n = M_A G + A D` for a sumset value `M_A`.
fn estimate_from_value(cfg: &SimConfig, cb: &Codebook, value: &[u64], lq: usize) -> Vec<Vec<u64>> {
    let q = cfg.spec.q();
    let n = cfg.n;
    let kappa = cfg.kappa();
    let users = cfg.spec.users();
    let mut rows = Vec::with_capacity(lq);
    for l in 0..lq {
        let mut w = vec![0u64; n];
        for j in 0..kappa {
            let digit = value[l * kappa + j];
            if digit == 0 {
                continue;
            }
            let g = cb.g_row(j);
            for i in 0..n {
                w[i] = (w[i] + digit * g[i]) % q;
            }
        }
        for k in 0..users {
            let a = cfg.coeff.get(l, k);
            if a == 0 {
                continue;
            }
            let d = cb.dither(k);
            for i in 0..n {
                w[i] = (w[i] + a * d[i]) % q;
            }
        }
        rows.push(w);
    }
    rows
}

/// Aggregate outcome of a batch of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub cover_failures: u64,
}

/// Runs the configured number of independent trials: fresh codebook,
/// uniform messages, multicoding encoders, memoryless channel draw, and
/// the sumset decoder. A trial counts as an error when any encoder had a
/// covering failure or the decoded combinations differ from the true
/// ones. Deterministic given the seed.
pub fn run_trials(cfg: &SimConfig) -> Result<SimResult, SimError> {
    run_trials_with_budget(cfg, DECODE_BUDGET)
}

/// [`run_trials`] with an explicit cap on the decoder's candidate space.
pub fn run_trials_with_budget(cfg: &SimConfig, budget: u64) -> Result<SimResult, SimError> {
    let space = cfg.candidate_space();
    if space > budget as u128 {
        return Err(SimError::BudgetExceeded { space, budget });
    }
    let joint = build_joint(&cfg.spec)?;
    let users = cfg.spec.users();
    let q = cfg.spec.q();
    let n = cfg.n;
    let lq = cfg.coeff.rows();

    let mut errors = 0u64;
    let mut cover_failures = 0u64;
    for trial in 0..cfg.trials {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(trial);
        let cb = Codebook::sample(&mut rng, q, n, cfg.kappa(), users);

        let mut covered_all = true;
        let mut u_rows = Vec::with_capacity(users);
        let mut x_rows = Vec::with_capacity(users);
        for k in 0..users {
            let msg_space = q.pow(cfg.kappas[k] as u32);
            let msg = rng.random_range(0..msg_space);
            let outcome = encode(cfg, &cb, k, msg, &mut rng);
            covered_all &= outcome.covered;
            u_rows.push(outcome.u);
            x_rows.push(outcome.x);
        }

        // True linear combinations of the transmitted codewords.
        let mut w_true = vec![vec![0u64; n]; lq];
        for l in 0..lq {
            for k in 0..users {
                let a = cfg.coeff.get(l, k);
                if a == 0 {
                    continue;
                }
                for i in 0..n {
                    w_true[l][i] = (w_true[l][i] + a * u_rows[k][i]) % q;
                }
            }
        }

        // Memoryless channel draw.
        let mut y = vec![0usize; n];
        let mut xs = vec![0usize; users];
        for i in 0..n {
            for k in 0..users {
                xs[k] = x_rows[k][i];
            }
            let draw: f64 = rng.random();
            let mut acc = 0.0;
            let mut chosen = cfg.spec.y_size() - 1;
            for cand in 0..cfg.spec.y_size() {
                acc += cfg.spec.channel_prob(&xs, cand);
                if draw < acc {
                    chosen = cand;
                    break;
                }
            }
            y[i] = chosen;
        }

        let decoded = decode_joint(cfg, &cb, &joint, &y, budget)?;
        let decode_ok = matches!(&decoded, DecodeOutcome::Estimate(w) if *w == w_true);
        if !covered_all {
            cover_failures += 1;
        }
        if !covered_all || !decode_ok {
            errors += 1;
        }
    }
    let error_rate = if cfg.trials == 0 {
        f64::NAN
    } else {
        errors as f64 / cfg.trials as f64
    };
    Ok(SimResult {
        trials: cfg.trials,
        errors,
        error_rate,
        cover_failures,
    })
}

/// 95% Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// CSV header for simulation results: `n,R_1..R_K,trials,errors,rate,cover_failures,seed`.
pub fn csv_header(users: usize) -> String {
    let rates: Vec<String> = (1..=users).map(|k| format!("R_{k}")).collect();
    format!("n,{},trials,errors,rate,cover_failures,seed", rates.join(","))
}

/// One CSV row for a finished run. The rate field is the literal `nan`
/// when no trials ran.
pub fn csv_row(cfg: &SimConfig, result: &SimResult) -> String {
    let rates: Vec<String> = cfg.rates.iter().map(|r| format!("{r}")).collect();
    let rate = if result.trials == 0 {
        "nan".to_string()
    } else {
        format!("{:.6}", result.error_rate)
    };
    format!(
        "{},{},{},{},{},{},{}",
        cfg.n,
        rates.join(","),
        result.trials,
        result.errors,
        rate,
        result.cover_failures,
        cfg.seed
    )
}

// ---------------------------------------------------------------------------
// Exhaustive oracles for the error-event partition
// ---------------------------------------------------------------------------

/// Outcome of the cardinality-bound oracle: `Vacuous` when the `(r, C)`
/// shape admits no index set `S`, otherwise the exact cell size and the
/// bound it must respect.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CardinalityCheck {
    Vacuous,
    Checked { exact: u64, bound: u128 },
}

/// Enumerates the distinct nonzero values of `B M` over all admissible
/// message matrices `M` (row `k` supported on its first `kappa_tilde[k]`
/// entries, zero-padded to a common width).
fn distinct_sumset_values(
    q: u64,
    users: usize,
    kappa_tilde: &[usize],
    b: &GfMatrix,
    budget: u64,
) -> Result<Vec<GfMatrix>, SimError> {
    let mut space: u128 = 1;
    for &kt in kappa_tilde {
        space = space.saturating_mul((q as u128).pow(kt as u32));
    }
    if space > budget as u128 {
        return Err(SimError::BudgetExceeded { space, budget });
    }
    let kappa = kappa_tilde.iter().copied().max().unwrap_or(0);
    let mut values = std::collections::BTreeSet::new();
    let mut digits: Vec<Vec<u64>> = kappa_tilde.iter().map(|&c| vec![0u64; c]).collect();
    loop {
        let rows: Vec<Vec<u64>> = digits
            .iter()
            .map(|d| {
                let mut row = d.clone();
                row.resize(kappa, 0);
                row
            })
            .collect();
        let m = GfMatrix::from_rows(&rows, kappa, q)?;
        let mb = matmul(b, &m)?;
        if !mb.is_zero() {
            values.insert(mb);
        }
        // Odometer over all digit positions.
        let mut user = 0;
        let mut slot = 0;
        loop {
            if user == users {
                return Ok(values.into_iter().collect());
            }
            if slot == kappa_tilde[user] {
                user += 1;
                slot = 0;
                continue;
            }
            digits[user][slot] += 1;
            if digits[user][slot] < q {
                break;
            }
            digits[user][slot] = 0;
            slot += 1;
        }
    }
}

fn valid_s_for_c(c: &GfMatrix, lb: usize, r: usize, q: u64) -> Result<Vec<Vec<usize>>, SimError> {
    let mut out = Vec::new();
    for s in index_subsets(lb, r) {
        let i_s = GfMatrix::identity_rows(&s, lb, q)?;
        if rank(&c.stack(&i_s)?) == lb {
            out.push(s);
        }
    }
    Ok(out)
}

/// Exhaustively counts the error-event cell
/// `L_B(r, C) = { M_B != 0 : rank(M_B) = r, C M_B = 0 }` and computes the
/// cardinality bound `min_S max_T prod_{k in T} q^{kappa_tilde_k}` over
/// the admissible index sets.
pub fn cardinality_bound_oracle(
    q: u64,
    users: usize,
    kappa_tilde: &[usize],
    b: &GfMatrix,
    r: usize,
    c: &GfMatrix,
    budget: u64,
) -> Result<CardinalityCheck, SimError> {
    let lb = b.rows();
    if r == 0 || r > lb || c.rows() != lb - r || rank(c) != c.rows() {
        return Ok(CardinalityCheck::Vacuous);
    }
    let s_sets = valid_s_for_c(c, lb, r, q)?;
    if s_sets.is_empty() {
        return Ok(CardinalityCheck::Vacuous);
    }

    let mut exact = 0u64;
    for mb in distinct_sumset_values(q, users, kappa_tilde, b, budget)? {
        if rank(&mb) == r && matmul(c, &mb)?.is_zero() {
            exact += 1;
        }
    }

    let mut bound = u128::MAX;
    for s in &s_sets {
        let b_s = select_rows(b, s)?;
        let mut best: Option<u128> = None;
        for t in index_subsets(users, r) {
            let complement: Vec<usize> = (0..users).filter(|k| !t.contains(k)).collect();
            let i_comp = GfMatrix::identity_rows(&complement, users, q)?;
            if rank(&b_s.stack(&i_comp)?) != users {
                continue;
            }
            let mut size: u128 = 1;
            for &k in &t {
                size = size.saturating_mul((q as u128).pow(kappa_tilde[k] as u32));
            }
            best = Some(best.map_or(size, |b: u128| b.max(size)));
        }
        if let Some(max_t) = best {
            bound = bound.min(max_t);
        }
    }
    Ok(CardinalityCheck::Checked { exact, bound })
}

/// Exhaustively verifies that the cells `L_B(r, C)` over `r` in
/// `[1, L_B]` and RREF `C` partition the nonzero sumset values: each
/// value lands in exactly one cell, the rank-and-annihilator membership
/// test agrees with the nullspace-equality test, and the matching cell's
/// `C` is the RREF left-nullspace basis of the value.
pub fn partition_oracle(
    q: u64,
    users: usize,
    kappa_tilde: &[usize],
    b: &GfMatrix,
    budget: u64,
) -> Result<bool, SimError> {
    let lb = b.rows();
    let values = distinct_sumset_values(q, users, kappa_tilde, b, budget)?;
    for mb in &values {
        let mut matches = 0usize;
        for r in 1..=lb {
            for c in enum_fullrank_rref(lb - r, lb, q, budget)? {
                let member_a = rank(mb) == r && matmul(&c, mb)?.is_zero();
                let member_b = rank(mb) == r && nullspace_rowbasis(mb) == c;
                if member_a != member_b {
                    return Ok(false);
                }
                if member_a {
                    matches += 1;
                }
            }
        }
        if matches != 1 {
            return Ok(false);
        }
    }
    Ok(true)
}
