//! Channel spec files: a TOML document with keys `q`, `K`, `pmf_u`,
//! `x_alphabet_sizes`, `x_map`, `y_alphabet_size`, `channel`, `A`, and an
//! optional `receivers` list for the multi-receiver mode.
//!
//! The `channel` table is a 2-D array: one row per joint input
//! `(x_1, ..., x_K)` in row-major order with `x_1` most significant, one
//! column per output symbol. Each additional `[[receivers]]` section
//! carries its own `channel` and `A` over the shared transmitter data.

use std::path::Path;

use serde::Deserialize;

use cfregions_core::achievability::ComputeTask;
use cfregions_core::channel::ChannelSpec;
use cfregions_core::gflin::GfMatrix;

use crate::commands::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecFile {
    pub q: u64,
    #[serde(rename = "K")]
    pub k: usize,
    pub pmf_u: Vec<Vec<f64>>,
    pub x_alphabet_sizes: Vec<usize>,
    pub x_map: Vec<Vec<usize>>,
    pub y_alphabet_size: usize,
    pub channel: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u64>>,
    #[serde(default)]
    pub receivers: Vec<ReceiverSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSection {
    pub channel: Vec<Vec<f64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<u64>>,
}

/// A parsed spec: one task per receiver (the top-level channel/A pair is
/// receiver 1; `receivers` sections append more).
#[derive(Debug, Clone)]
pub struct LoadedSpec {
    pub tasks: Vec<ComputeTask>,
}

impl LoadedSpec {
    pub fn primary(&self) -> &ComputeTask {
        &self.tasks[0]
    }

    pub fn users(&self) -> usize {
        self.primary().spec().users()
    }
}

pub fn load_spec(path: &Path) -> Result<LoadedSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let file: SpecFile = toml::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    build_tasks(&file)
}

fn build_tasks(file: &SpecFile) -> Result<LoadedSpec, CliError> {
    if file.pmf_u.len() != file.k {
        return Err(CliError::Input(format!(
            "pmf_u has {} entries but K = {}",
            file.pmf_u.len(),
            file.k
        )));
    }
    if file.x_map.len() != file.k || file.x_alphabet_sizes.len() != file.k {
        return Err(CliError::Input(format!(
            "x_map has {} rows and x_alphabet_sizes has {}, expected K = {}",
            file.x_map.len(),
            file.x_alphabet_sizes.len(),
            file.k
        )));
    }
    let mut tasks = Vec::with_capacity(1 + file.receivers.len());
    tasks.push(make_task(file, &file.channel, &file.a)?);
    for receiver in &file.receivers {
        tasks.push(make_task(file, &receiver.channel, &receiver.a)?);
    }
    Ok(LoadedSpec { tasks })
}

fn make_task(
    file: &SpecFile,
    channel: &[Vec<f64>],
    a: &[Vec<u64>],
) -> Result<ComputeTask, CliError> {
    let expected_rows: usize = file.x_alphabet_sizes.iter().product();
    if channel.len() != expected_rows {
        return Err(CliError::Input(format!(
            "channel has {} rows, expected one per joint input ({expected_rows})",
            channel.len()
        )));
    }
    let mut flat = Vec::with_capacity(expected_rows * file.y_alphabet_size);
    for (i, row) in channel.iter().enumerate() {
        if row.len() != file.y_alphabet_size {
            return Err(CliError::Input(format!(
                "channel row {i} has {} entries, expected y_alphabet_size = {}",
                row.len(),
                file.y_alphabet_size
            )));
        }
        flat.extend_from_slice(row);
    }
    let spec = ChannelSpec::new(
        file.q,
        file.pmf_u.clone(),
        file.x_map.clone(),
        file.x_alphabet_sizes.clone(),
        file.y_alphabet_size,
        flat,
    )
    .map_err(|e| CliError::Input(e.to_string()))?;
    let coeff = GfMatrix::from_rows(a, file.k, file.q)
        .map_err(|e| CliError::Input(format!("A: {e}")))?;
    let task = ComputeTask::new(spec, coeff).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(task)
}

/// Parses a row-major matrix literal: entries comma-separated, rows
/// semicolon-separated, e.g. `1,0,0;0,1,1`.
pub fn parse_matrix_literal(literal: &str, cols: usize, q: u64) -> Result<GfMatrix, CliError> {
    let mut rows = Vec::new();
    for row_text in literal.split(';') {
        let row: Vec<u64> = row_text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| CliError::Input(format!("bad matrix entry {t:?} in {literal:?}")))
            })
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    GfMatrix::from_rows(&rows, cols, q)
        .map_err(|e| CliError::Input(format!("matrix literal {literal:?}: {e}")))
}
