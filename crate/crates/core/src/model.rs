//! Domain types shared by every other module: the inter-cell interference
//! power factor matrix B, pilot sequence sets, design problem descriptions,
//! and the JSON file formats the CLI reads and writes.
//!
//! All types are immutable after construction and safe to share or send
//! between threads. Tolerances are expressed on squared quantities so checks
//! never take square roots.

use std::fmt;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DMatrixView, DVectorView};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on squared norms and squared moduli (|‖s‖² − 1| and ||s[t]|² − 1/τ|).
pub const SQUARED_TOLERANCE: f64 = 1e-9;

/// J×J symmetric matrix of inter-cell interference power factors β_{m,n}.
///
/// Unit diagonal (β_{m,m} = 1), entries in [0, 1], symmetric. Asymmetric
/// input is rejected at construction rather than symmetrized silently.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceMatrix {
    entries: DMatrix<f64>,
}

impl InterferenceMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let j = entries.nrows();
        if j == 0 || entries.ncols() != j {
            return Err(Error::InvalidArgument(format!(
                "B must be square and non-empty, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for m in 0..j {
            if entries[(m, m)] != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "B diagonal entry ({m},{m}) must be 1, got {}",
                    entries[(m, m)]
                )));
            }
            for n in 0..j {
                let beta = entries[(m, n)];
                if !(0.0..=1.0).contains(&beta) {
                    return Err(Error::InvalidArgument(format!(
                        "B entry ({m},{n}) must lie in [0,1], got {beta}"
                    )));
                }
                if entries[(m, n)] != entries[(n, m)] {
                    return Err(Error::InvalidArgument(format!(
                        "B must be symmetric: ({m},{n})={} vs ({n},{m})={}",
                        entries[(m, n)],
                        entries[(n, m)]
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let j = rows.len();
        if rows.iter().any(|r| r.len() != j) {
            return Err(Error::InvalidArgument(
                "B rows must all have length equal to the number of rows".into(),
            ));
        }
        Ok(Self::new(DMatrix::from_fn(j, j, |m, n| rows[m][n]))?)
    }

    /// Identity matrix: no inter-cell interference.
    pub fn identity(cells: usize) -> Self {
        Self {
            entries: DMatrix::identity(cells, cells),
        }
    }

    /// Special Toeplitz form: every off-diagonal entry equal to `beta`.
    pub fn toeplitz(cells: usize, beta: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("cell count must be positive".into()));
        }
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "toeplitz beta must lie in [0,1], got {beta}"
            )));
        }
        Ok(Self {
            entries: DMatrix::from_fn(cells, cells, |m, n| if m == n { 1.0 } else { beta }),
        })
    }

    /// All-ones matrix: intra- and inter-cell interference weighted equally.
    pub fn all_ones(cells: usize) -> Self {
        Self {
            entries: DMatrix::from_element(cells, cells, 1.0),
        }
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn beta(&self, m: usize, n: usize) -> f64 {
        self.entries[(m, n)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Σ_{i,j} β_{i,j}, the weight sum in the K ≥ τ lower bound.
    pub fn entry_sum(&self) -> f64 {
        self.entries.iter().sum()
    }
}

/// The τ×(J·K) pilot matrix, column n = pilot of user k in cell j, n = jK + k.
///
/// Column-major storage, so each pilot is contiguous and the per-cell block
/// S_j occupies columns [jK, (j+1)K). Construction checks dimensions only;
/// norm and modulus invariants are audited by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSet {
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    unimodular: bool,
    data: DMatrix<Complex64>,
}

impl SequenceSet {
    pub fn new(
        tau: usize,
        cells: usize,
        users_per_cell: usize,
        data: DMatrix<Complex64>,
        unimodular: bool,
    ) -> Result<Self> {
        if tau == 0 || cells == 0 || users_per_cell == 0 {
            return Err(Error::InvalidArgument(
                "tau, cells and users per cell must all be positive".into(),
            ));
        }
        if data.nrows() != tau || data.ncols() != cells * users_per_cell {
            return Err(Error::DimensionMismatch(format!(
                "pilot matrix must be {}x{}, got {}x{}",
                tau,
                cells * users_per_cell,
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self {
            tau,
            cells,
            users_per_cell,
            unimodular,
            data,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    /// N = J·K, the total number of sequences.
    pub fn total_sequences(&self) -> usize {
        self.cells * self.users_per_cell
    }

    pub fn is_unimodular_flagged(&self) -> bool {
        self.unimodular
    }

    pub fn data(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    /// Per-cell block S_j (columns [jK, (j+1)K)).
    pub fn cell_block(&self, j: usize) -> DMatrixView<'_, Complex64> {
        self.data.columns(j * self.users_per_cell, self.users_per_cell)
    }

    /// Pilot of user k in cell j.
    pub fn sequence(&self, j: usize, k: usize) -> DVectorView<'_, Complex64> {
        self.data.column(j * self.users_per_cell + k)
    }

    /// Builds a set from a flat buffer of interleaved (re, im) doubles,
    /// pilots column-major: pilot n occupies entries [2nτ, 2(n+1)τ).
    pub fn from_interleaved(
        tau: usize,
        cells: usize,
        users_per_cell: usize,
        data: &[f64],
        unimodular: bool,
    ) -> Result<Self> {
        let n = cells * users_per_cell;
        if data.len() != 2 * tau * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} doubles for a {}x{} set, got {}",
                2 * tau * n,
                tau,
                n,
                data.len()
            )));
        }
        let matrix = DMatrix::from_fn(tau, n, |t, col| {
            let base = 2 * (col * tau + t);
            Complex64::new(data[base], data[base + 1])
        });
        Self::new(tau, cells, users_per_cell, matrix, unimodular)
    }

    /// The pilot matrix as interleaved (re, im) doubles in the layout
    /// accepted by [`SequenceSet::from_interleaved`].
    pub fn to_interleaved(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.data.len());
        for z in self.data.iter() {
            out.push(z.re);
            out.push(z.im);
        }
        out
    }
}

/// Selects problem P1 (unit-norm pilots) or P2 (unimodular pilots).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Constraint {
    UnitNorm,
    Unimodular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Acceleration {
    Plain,
    Squarem,
}

/// Iteration budget, squared-step stopping threshold, seed, and scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct OptimizerSettings {
    pub max_iterations: usize,
    /// Stop when ‖x⁽ˡ⁾ − x⁽ˡ⁻¹⁾‖² ≤ epsilon.
    pub epsilon: f64,
    pub seed: u64,
    pub acceleration: Acceleration,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            max_iterations: 20_000,
            epsilon: 1e-10,
            seed: 0,
            acceleration: Acceleration::Plain,
        }
    }
}

impl OptimizerSettings {
    fn check(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("maxIterations must be >= 1".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be nonnegative, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// One P1/P2 instance: dimensions, B, constraint mode, optimizer settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub tau: usize,
    pub cells: usize,
    pub users_per_cell: usize,
    pub b: InterferenceMatrix,
    pub constraint: Constraint,
    pub optimizer: OptimizerSettings,
}

impl DesignProblem {
    pub fn new(
        tau: usize,
        cells: usize,
        users_per_cell: usize,
        b: InterferenceMatrix,
        constraint: Constraint,
        optimizer: OptimizerSettings,
    ) -> Result<Self> {
        if tau == 0 || cells == 0 || users_per_cell == 0 {
            return Err(Error::InvalidArgument(
                "tau, cells and users per cell must all be positive".into(),
            ));
        }
        if b.order() != cells {
            return Err(Error::DimensionMismatch(format!(
                "B has order {} but the problem has {} cells",
                b.order(),
                cells
            )));
        }
        optimizer.check()?;
        Ok(Self {
            tau,
            cells,
            users_per_cell,
            b,
            constraint,
            optimizer,
        })
    }

    pub fn total_sequences(&self) -> usize {
        self.cells * self.users_per_cell
    }
}

/// Training-phase channel statistics: coefficients are i.i.d. CN(0,1) drawn
/// per trial (never stored); only the noise variance is a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    noise_variance: f64,
}

impl ChannelModel {
    pub fn new(noise_variance: f64) -> Result<Self> {
        if !(noise_variance >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise variance must be nonnegative, got {noise_variance}"
            )));
        }
        Ok(Self { noise_variance })
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }
}

/// One violated invariant, with the worst observed deviation and how many
/// columns/entries violate it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Violation {
    Dimension {
        detail: String,
    },
    /// Some column's squared norm is off unity; worst offender reported.
    ColumnNorm {
        column: usize,
        norm_sq: f64,
        deviation: f64,
        violating_columns: usize,
    },
    /// Some entry's squared modulus is off 1/τ; worst offender reported.
    EntryModulus {
        row: usize,
        column: usize,
        modulus_sq: f64,
        deviation: f64,
        violating_entries: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { detail } => write!(f, "dimension mismatch: {detail}"),
            Violation::ColumnNorm {
                column,
                norm_sq,
                deviation,
                violating_columns,
            } => write!(
                f,
                "{violating_columns} column(s) violate the unit-norm constraint; \
                 worst is column {column} with squared norm {norm_sq} (deviation {deviation})"
            ),
            Violation::EntryModulus {
                row,
                column,
                modulus_sq,
                deviation,
                violating_entries,
            } => write!(
                f,
                "{violating_entries} entry(ies) violate the unimodular constraint; \
                 worst is ({row},{column}) with squared modulus {modulus_sq} (deviation {deviation})"
            ),
        }
    }
}

/// Report-style validation result; empty iff the set satisfies every invariant.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Audits `set` against `problem`: dimensions, unit column norms, and (for
/// unimodular sets or P2 problems) entrywise squared modulus 1/τ. Never
/// aborts; the report lists every violated invariant with the worst-case
/// deviation magnitude.
pub fn validate(set: &SequenceSet, problem: &DesignProblem) -> ValidationReport {
    let mut violations = Vec::new();

    if set.tau != problem.tau
        || set.cells != problem.cells
        || set.users_per_cell != problem.users_per_cell
    {
        violations.push(Violation::Dimension {
            detail: format!(
                "set is (tau={}, cells={}, usersPerCell={}) but problem expects \
                 (tau={}, cells={}, usersPerCell={})",
                set.tau,
                set.cells,
                set.users_per_cell,
                problem.tau,
                problem.cells,
                problem.users_per_cell
            ),
        });
    }

    let mut worst_col = 0usize;
    let mut worst_col_norm = 0.0f64;
    let mut worst_col_dev = 0.0f64;
    let mut bad_cols = 0usize;
    for (n, col) in set.data.column_iter().enumerate() {
        let norm_sq: f64 = col.iter().map(|z| z.norm_sqr()).sum();
        let dev = (norm_sq - 1.0).abs();
        if dev > SQUARED_TOLERANCE {
            bad_cols += 1;
            if dev > worst_col_dev {
                worst_col_dev = dev;
                worst_col_norm = norm_sq;
                worst_col = n;
            }
        }
    }
    if bad_cols > 0 {
        violations.push(Violation::ColumnNorm {
            column: worst_col,
            norm_sq: worst_col_norm,
            deviation: worst_col_dev,
            violating_columns: bad_cols,
        });
    }

    if set.unimodular || problem.constraint == Constraint::Unimodular {
        let target = 1.0 / set.tau as f64;
        let mut worst = (0usize, 0usize, 0.0f64, 0.0f64);
        let mut bad_entries = 0usize;
        for n in 0..set.data.ncols() {
            for t in 0..set.data.nrows() {
                let modulus_sq = set.data[(t, n)].norm_sqr();
                let dev = (modulus_sq - target).abs();
                if dev > SQUARED_TOLERANCE {
                    bad_entries += 1;
                    if dev > worst.3 {
                        worst = (t, n, modulus_sq, dev);
                    }
                }
            }
        }
        if bad_entries > 0 {
            violations.push(Violation::EntryModulus {
                row: worst.0,
                column: worst.1,
                modulus_sq: worst.2,
                deviation: worst.3,
                violating_entries: bad_entries,
            });
        }
    }

    ValidationReport { violations }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------
//
// All files are JSON with camelCase keys. Floating-point values are written
// with 17 significant digits so that serialize → deserialize round-trips are
// bit-identical on the stored decimal representation.

/// I/O level error: OS failures are kept distinct from content problems so
/// the CLI can map them to different exit codes.
#[derive(Debug)]
pub enum FileError {
    Io { path: PathBuf, source: io::Error },
    /// Malformed JSON; message carries serde's line/column context.
    Parse { path: PathBuf, message: String },
    /// Well-formed JSON describing an invalid object.
    Invalid { path: PathBuf, source: Error },
}

impl fmt::Display for FileError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FileError::Io { path, source } => {
                write!(f, "{}: {}", path.display(), source)
            }
            FileError::Parse { path, message } => {
                write!(f, "{}: {}", path.display(), message)
            }
            FileError::Invalid { path, source } => {
                write!(f, "{}: {}", path.display(), source)
            }
        }
    }
}

impl std::error::Error for FileError {}

/// serde_json formatter that renders every float with 17 significant digits.
struct SigDigitFormatter;

impl serde_json::ser::Formatter for SigDigitFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes with the 17-significant-digit float convention.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigDigitFormatter);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

fn write_json_file<T: Serialize>(value: &T, path: &Path) -> std::result::Result<(), FileError> {
    let body = to_json_string(value);
    let mut file = std::fs::File::create(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    file.write_all(body.as_bytes())
        .and_then(|_| file.write_all(b"\n"))
        .map_err(|source| FileError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn read_json_file<T: for<'de> Deserialize<'de>>(
    path: &Path,
) -> std::result::Result<T, FileError> {
    let body = std::fs::read_to_string(path).map_err(|source| FileError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&body).map_err(|e| FileError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// On-disk schema of a sequence set: dimensions plus row-major complex
/// entries as [re, im] pairs.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SetFile {
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    unimodular: bool,
    entries: Vec<(f64, f64)>,
}

impl SetFile {
    fn from_set(set: &SequenceSet) -> Self {
        let n = set.total_sequences();
        let mut entries = Vec::with_capacity(set.tau * n);
        for t in 0..set.tau {
            for col in 0..n {
                let z = set.data[(t, col)];
                entries.push((z.re, z.im));
            }
        }
        Self {
            tau: set.tau,
            cells: set.cells,
            users_per_cell: set.users_per_cell,
            unimodular: set.unimodular,
            entries,
        }
    }

    fn into_set(self) -> Result<SequenceSet> {
        let n = self.cells.checked_mul(self.users_per_cell).ok_or_else(|| {
            Error::InvalidArgument("cells * usersPerCell overflows".into())
        })?;
        if self.entries.len() != self.tau * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {}x{} set, got {}",
                self.tau * n,
                self.tau,
                n,
                self.entries.len()
            )));
        }
        let data = DMatrix::from_fn(self.tau, n, |t, col| {
            let (re, im) = self.entries[t * n + col];
            Complex64::new(re, im)
        });
        SequenceSet::new(self.tau, self.cells, self.users_per_cell, data, self.unimodular)
    }
}

pub fn set_to_json(set: &SequenceSet) -> String {
    to_json_string(&SetFile::from_set(set))
}

pub fn set_from_json(body: &str) -> std::result::Result<SequenceSet, String> {
    let file: SetFile = serde_json::from_str(body).map_err(|e| e.to_string())?;
    file.into_set().map_err(|e| e.to_string())
}

pub fn write_set_file(set: &SequenceSet, path: &Path) -> std::result::Result<(), FileError> {
    write_json_file(&SetFile::from_set(set), path)
}

pub fn read_set_file(path: &Path) -> std::result::Result<SequenceSet, FileError> {
    let file: SetFile = read_json_file(path)?;
    file.into_set().map_err(|source| FileError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

/// β-matrix file: either a full row-major J×J matrix or the shorthand
/// `{"toeplitz": β, "cells": J}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaMatrixSpec {
    Toeplitz { toeplitz: f64, cells: usize },
    Full(Vec<Vec<f64>>),
}

impl BetaMatrixSpec {
    pub fn build(&self) -> Result<InterferenceMatrix> {
        match self {
            BetaMatrixSpec::Toeplitz { toeplitz, cells } => {
                InterferenceMatrix::toeplitz(*cells, *toeplitz)
            }
            BetaMatrixSpec::Full(rows) => InterferenceMatrix::from_rows(rows),
        }
    }

    pub fn from_matrix(b: &InterferenceMatrix) -> Self {
        let j = b.order();
        BetaMatrixSpec::Full((0..j).map(|m| (0..j).map(|n| b.beta(m, n)).collect()).collect())
    }
}

pub fn read_beta_file(path: &Path) -> std::result::Result<InterferenceMatrix, FileError> {
    let spec: BetaMatrixSpec = read_json_file(path)?;
    spec.build().map_err(|source| FileError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_beta_file(
    b: &InterferenceMatrix,
    path: &Path,
) -> std::result::Result<(), FileError> {
    write_json_file(&BetaMatrixSpec::from_matrix(b), path)
}

/// On-disk schema of a design problem (the `design` subcommand's `--config`).
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct ProblemFile {
    tau: usize,
    cells: usize,
    users_per_cell: usize,
    beta_matrix: BetaMatrixSpec,
    constraint: Constraint,
    #[serde(default)]
    optimizer: OptimizerSettings,
}

pub fn read_problem_file(path: &Path) -> std::result::Result<DesignProblem, FileError> {
    let file: ProblemFile = read_json_file(path)?;
    let b = file.beta_matrix.build().map_err(|source| FileError::Invalid {
        path: path.to_path_buf(),
        source,
    })?;
    DesignProblem::new(
        file.tau,
        file.cells,
        file.users_per_cell,
        b,
        file.constraint,
        file.optimizer,
    )
    .map_err(|source| FileError::Invalid {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_problem_file(
    problem: &DesignProblem,
    path: &Path,
) -> std::result::Result<(), FileError> {
    let file = ProblemFile {
        tau: problem.tau,
        cells: problem.cells,
        users_per_cell: problem.users_per_cell,
        beta_matrix: BetaMatrixSpec::from_matrix(&problem.b),
        constraint: problem.constraint,
        optimizer: problem.optimizer,
    };
    write_json_file(&file, path)
}

pub fn problem_to_json(problem: &DesignProblem) -> String {
    to_json_string(&ProblemFile {
        tau: problem.tau,
        cells: problem.cells,
        users_per_cell: problem.users_per_cell,
        beta_matrix: BetaMatrixSpec::from_matrix(&problem.b),
        constraint: problem.constraint,
        optimizer: problem.optimizer,
    })
}
