//! Command implementations shared by the binary and the test suites.
//!
//! Exit-code contract: 0 success (or "inside" for membership), 1
//! "outside", 2 input error, 3 enumeration budget exceeded. Output files
//! are written atomically (temp file in the target directory, then
//! rename).

use std::fmt;
use std::path::{Path, PathBuf};

use cfregions_core::achievability::{
    self, joint_region_capped, joint_region_for_bs, seq_region, AchieveError, Budget, ComputeTask,
};
use cfregions_core::gflin::GfMatrix;
use cfregions_core::regions::{self, intersect, union, RateRegion};
use cfregions_core::simulator::{
    self, run_trials_with_budget, wilson_interval, SimConfig, SimError, DECODE_BUDGET,
};

use crate::specfile::{load_spec, parse_matrix_literal, LoadedSpec};

/// Environment variable overriding the enumeration budgets (decimal
/// candidate count).
pub const BUDGET_ENV: &str = "CFREGIONS_BUDGET";

#[derive(Debug)]
pub enum CliError {
    /// Malformed input: spec files, flags, domain violations. Exit 2.
    Input(String),
    /// An enumeration budget was exceeded. Exit 3.
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(msg) => write!(f, "{msg}"),
            CliError::Budget(msg) => write!(f, "budget exceeded: {msg}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<AchieveError> for CliError {
    fn from(e: AchieveError) -> Self {
        if e.is_budget() {
            CliError::Budget(e.to_string())
        } else {
            CliError::Input(e.to_string())
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<regions::RegionError> for CliError {
    fn from(e: regions::RegionError) -> Self {
        CliError::Input(e.to_string())
    }
}

/// Budgets from the environment override, falling back to the defaults.
pub fn budget_from_env() -> Result<Budget, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(text) => {
            let value: u64 = text.trim().parse().map_err(|_| {
                CliError::Input(format!("{BUDGET_ENV} must be a decimal count, got {text:?}"))
            })?;
            Ok(Budget::uniform(value))
        }
        Err(_) => Ok(Budget::default()),
    }
}

fn decode_budget_from_env() -> Result<u64, CliError> {
    match std::env::var(BUDGET_ENV) {
        Ok(text) => text.trim().parse().map_err(|_| {
            CliError::Input(format!("{BUDGET_ENV} must be a decimal count, got {text:?}"))
        }),
        Err(_) => Ok(DECODE_BUDGET),
    }
}

/// Atomic file write: temp file next to the target, then rename.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), CliError> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, content)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Input(format!("cannot rename to {}: {e}", path.display())))?;
    Ok(())
}

/// Formats `x` with the given number of significant digits, plain
/// decimal notation.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{:.*}", sig - 1, x);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (sig as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

#[derive(Debug, Default)]
pub struct RegionOptions {
    /// Restrict the union to these B matrices (row-major literals).
    pub fixed_b: Vec<String>,
    /// Cap the L_B sweep.
    pub max_lb: Option<usize>,
    /// Compute the sequential-decoding region instead of joint decoding.
    pub seq: bool,
    pub out: Option<PathBuf>,
}

pub struct RegionReport {
    pub region: RateRegion,
    pub polytope_count: usize,
    pub constraint_count: usize,
    pub region_path: Option<PathBuf>,
    pub vertices_path: Option<PathBuf>,
}

fn parse_fixed_bs(
    loaded: &LoadedSpec,
    literals: &[String],
) -> Result<Vec<GfMatrix>, CliError> {
    literals
        .iter()
        .map(|lit| parse_matrix_literal(lit, loaded.users(), loaded.primary().spec().q()))
        .collect()
}

/// The region of one receiver under the given options.
fn receiver_region(
    task: &ComputeTask,
    fixed_bs: &[GfMatrix],
    opts: &RegionOptions,
    budget: Budget,
) -> Result<RateRegion, CliError> {
    let users = task.spec().users();
    if opts.seq {
        let bs: Vec<GfMatrix> = if fixed_bs.is_empty() {
            let mut all = Vec::new();
            for lb in task.coeff().rows()..=opts.max_lb.unwrap_or(users).min(users) {
                all.extend(
                    cfregions_core::gflin::enum_superspan_rref(
                        task.coeff(),
                        lb,
                        budget.enum_candidates,
                    )
                    .map_err(AchieveError::from)?,
                );
            }
            all
        } else {
            fixed_bs.to_vec()
        };
        let mut region = RateRegion::empty(users);
        for b in &bs {
            region = union(&region, &seq_region(task, b)?)?;
        }
        Ok(region)
    } else if fixed_bs.is_empty() {
        Ok(joint_region_capped(
            task,
            opts.max_lb.unwrap_or(users),
            budget,
        )?)
    } else {
        Ok(joint_region_for_bs(task, fixed_bs, budget)?)
    }
}

/// Computes the region described by the spec file (intersecting over
/// receivers in multi-receiver mode) and optionally writes the region
/// file plus, for K <= 3, a vertices CSV.
pub fn cmd_region(spec_path: &Path, opts: &RegionOptions) -> Result<RegionReport, CliError> {
    let loaded = load_spec(spec_path)?;
    let budget = budget_from_env()?;
    let fixed_bs = parse_fixed_bs(&loaded, &opts.fixed_b)?;

    let mut region = receiver_region(loaded.primary(), &fixed_bs, opts, budget)?;
    for task in &loaded.tasks[1..] {
        let r = receiver_region(task, &fixed_bs, opts, budget)?;
        region = intersect(&region, &r)?;
    }

    let mut region_path = None;
    let mut vertices_path = None;
    if let Some(out) = &opts.out {
        write_atomic(out, &regions::to_text(&region))?;
        region_path = Some(out.clone());
        if (2..=3).contains(&region.dim) {
            let vpath = vertices_sibling(out);
            write_atomic(&vpath, &regions::vertices_csv(&region)?)?;
            vertices_path = Some(vpath);
        }
    }
    Ok(RegionReport {
        polytope_count: region.polytopes.len(),
        constraint_count: region.constraint_count(),
        region,
        region_path,
        vertices_path,
    })
}

/// `foo.region` -> `foo.vertices.csv` next to the region file.
pub fn vertices_sibling(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("region");
    out.with_file_name(format!("{stem}.vertices.csv"))
}

// ---------------------------------------------------------------------------
// member
// ---------------------------------------------------------------------------

pub struct MemberReport {
    pub inside: bool,
    pub detail: String,
}

/// Membership of `rates + margin * 1` in the spec's region (closed
/// semantics). A positive margin asks for strict interior membership; a
/// negative one grants slack.
pub fn cmd_member(
    spec_path: &Path,
    rates: &[f64],
    margin: f64,
    opts: &RegionOptions,
) -> Result<MemberReport, CliError> {
    let loaded = load_spec(spec_path)?;
    if rates.len() != loaded.users() {
        return Err(CliError::Input(format!(
            "expected {} rates, got {}",
            loaded.users(),
            rates.len()
        )));
    }
    if let Some(bad) = rates.iter().find(|&&r| r < 0.0) {
        return Err(CliError::Input(format!("negative rate {bad}")));
    }
    let budget = budget_from_env()?;
    let fixed_bs = parse_fixed_bs(&loaded, &opts.fixed_b)?;
    let mut region = receiver_region(loaded.primary(), &fixed_bs, opts, budget)?;
    for task in &loaded.tasks[1..] {
        let r = receiver_region(task, &fixed_bs, opts, budget)?;
        region = intersect(&region, &r)?;
    }

    let shifted: Vec<f64> = rates.iter().map(|r| r + margin).collect();
    let witness = region
        .polytopes
        .iter()
        .position(|p| p.contains(&shifted));
    match witness {
        Some(idx) => {
            let p = &region.polytopes[idx];
            let constraints: Vec<String> = p
                .halfspaces
                .iter()
                .map(|h| format_constraint(&h.tset, h.rhs))
                .collect();
            Ok(MemberReport {
                inside: true,
                detail: format!(
                    "witness polytope {}: {}",
                    idx,
                    if constraints.is_empty() {
                        "nonnegative orthant".to_string()
                    } else {
                        constraints.join("; ")
                    }
                ),
            })
        }
        None => {
            // Tightest violated constraint: the polytope needing the
            // least violation, and its most violated half-space there.
            let mut best: Option<(f64, String)> = None;
            for p in &region.polytopes {
                if p.is_empty() {
                    continue;
                }
                let mut worst: Option<(f64, String)> = None;
                for h in &p.halfspaces {
                    let lhs: f64 = h.tset.iter().map(|&k| shifted[k]).sum();
                    let violation = lhs - h.rhs;
                    if worst.as_ref().is_none_or(|(v, _)| violation > *v) {
                        worst = Some((violation, format_constraint(&h.tset, h.rhs)));
                    }
                }
                if let Some((v, text)) = worst {
                    if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                        best = Some((v, text));
                    }
                }
            }
            let detail = match best {
                Some((v, text)) => {
                    format!("violated constraint {text} by {v:.9}")
                }
                None => "region is empty".to_string(),
            };
            Ok(MemberReport {
                inside: false,
                detail,
            })
        }
    }
}

fn format_constraint(tset: &std::collections::BTreeSet<usize>, rhs: f64) -> String {
    let indices: Vec<String> = tset.iter().map(|k| (k + 1).to_string()).collect();
    format!("T={{{}}} rhs={rhs:.9}", indices.join(","))
}

// ---------------------------------------------------------------------------
// gaussian
// ---------------------------------------------------------------------------

pub struct GaussianReport {
    pub rhs: [f64; 2],
    pub lines: Vec<String>,
    pub region: RateRegion,
}

/// The two-user Gaussian closed form; both coefficient entries must be
/// nonzero.
pub fn cmd_gaussian(
    h: [f64; 2],
    powers: [f64; 2],
    coeff: [i64; 2],
    out: Option<&Path>,
) -> Result<GaussianReport, CliError> {
    if coeff[0] == 0 || coeff[1] == 0 {
        return Err(CliError::Input(format!(
            "coefficients must both be nonzero, got {coeff:?}"
        )));
    }
    let region = achievability::gaussian_cf_region(h, powers[0], powers[1], coeff)?;
    let p = &region.polytopes[0];
    let mut rhs = [f64::NAN; 2];
    for h in &p.halfspaces {
        let k = *h.tset.iter().next().expect("singleton tset");
        rhs[k] = h.rhs;
    }
    let lines = vec![
        format!("R_1 <= {}", format_sig(rhs[0], 9)),
        format!("R_2 <= {}", format_sig(rhs[1], 9)),
    ];
    if let Some(path) = out {
        write_atomic(path, &regions::to_text(&region))?;
    }
    Ok(GaussianReport { rhs, lines, region })
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct SimulateOptions {
    pub n: usize,
    pub rates: Vec<f64>,
    pub aux_rates: Vec<f64>,
    pub eps: f64,
    pub eps_prime: Option<f64>,
    pub trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

pub struct SimulateReport {
    pub result: simulator::SimResult,
    pub csv_row: String,
    pub summary: String,
}

/// Runs the Monte Carlo trials described by the options and appends one
/// CSV row per invocation to `--out` (creating the file with a header).
pub fn cmd_simulate(spec_path: &Path, opts: &SimulateOptions) -> Result<SimulateReport, CliError> {
    let loaded = load_spec(spec_path)?;
    let task = loaded.primary();
    let eps_prime = opts.eps_prime.unwrap_or(opts.eps / 2.0);
    let cfg = SimConfig::new(
        task.spec().clone(),
        task.coeff().clone(),
        opts.n,
        opts.rates.clone(),
        opts.aux_rates.clone(),
        opts.eps,
        eps_prime,
        opts.trials,
        opts.seed,
    )?;
    let result = run_trials_with_budget(&cfg, decode_budget_from_env()?)?;
    let row = simulator::csv_row(&cfg, &result);
    if let Some(path) = &opts.out {
        let existing = match std::fs::read_to_string(path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                format!("{}\n", simulator::csv_header(task.spec().users()))
            }
            Err(e) => {
                return Err(CliError::Input(format!(
                    "cannot read {}: {e}",
                    path.display()
                )))
            }
        };
        write_atomic(path, &format!("{existing}{row}\n"))?;
    }
    let (lo, hi) = wilson_interval(result.errors, result.trials);
    let summary = format!(
        "errors {}/{} rate {} cover_failures {} wilson95 [{:.6}, {:.6}]",
        result.errors,
        result.trials,
        if result.trials == 0 {
            "nan".to_string()
        } else {
            format!("{:.6}", result.error_rate)
        },
        result.cover_failures,
        lo,
        hi
    );
    Ok(SimulateReport {
        result,
        csv_row: row,
        summary,
    })
}
