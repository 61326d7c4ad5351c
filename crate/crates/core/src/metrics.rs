//! Figures of merit: the extended Gram matrix G_B, ETSC, TSC, intra/inter
//! interference, the analytic sum MSE of the LS estimate, and PAPR.
//!
//! All functions are pure and safe for concurrent calls.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::model::{InterferenceMatrix, SequenceSet};
use crate::{Error, Result};

/// J×J grid of K×K blocks; block (m,n) = √β_{m,n} · S_mᴴ S_n.
#[derive(Debug, Clone, PartialEq)]
pub struct GramBlocks {
    cells: usize,
    users_per_cell: usize,
    blocks: Vec<DMatrix<Complex64>>, // row-major (m, n)
}

impl GramBlocks {
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users_per_cell
    }

    pub fn block(&self, m: usize, n: usize) -> &DMatrix<Complex64> {
        &self.blocks[m * self.cells + n]
    }

    /// The full JK×JK extended Gram matrix G_B.
    pub fn assembled(&self) -> DMatrix<Complex64> {
        let k = self.users_per_cell;
        let n = self.cells * k;
        let mut out = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for m in 0..self.cells {
            for j in 0..self.cells {
                out.view_mut((m * k, j * k), (k, k)).copy_from(self.block(m, j));
            }
        }
        out
    }

    /// ‖G_B‖²_F, summed blockwise.
    pub fn squared_frobenius(&self) -> f64 {
        self.blocks.iter().map(|b| b.norm_squared()).sum()
    }
}

fn check_dims(set: &SequenceSet, b: &InterferenceMatrix) -> Result<()> {
    if b.order() != set.cells() {
        return Err(Error::DimensionMismatch(format!(
            "B has order {} but the set has {} cells",
            b.order(),
            set.cells()
        )));
    }
    Ok(())
}

/// Builds all J² weighted Gram blocks √β_{m,n}·S_mᴴS_n.
pub fn extended_gram(set: &SequenceSet, b: &InterferenceMatrix) -> Result<GramBlocks> {
    check_dims(set, b)?;
    let j = set.cells();
    let mut blocks = Vec::with_capacity(j * j);
    for m in 0..j {
        let sm = set.cell_block(m);
        for n in 0..j {
            let sn = set.cell_block(n);
            let scale = Complex64::new(b.beta(m, n).sqrt(), 0.0);
            blocks.push(sm.adjoint() * sn * scale);
        }
    }
    Ok(GramBlocks {
        cells: j,
        users_per_cell: set.users_per_cell(),
        blocks,
    })
}

/// Extended total squared correlation ‖G_B‖²_F
/// = Σ_{i,j} β_{i,j} Σ_{m,n} |⟨s_{i,m}, s_{j,n}⟩|².
pub fn etsc(set: &SequenceSet, b: &InterferenceMatrix) -> Result<f64> {
    Ok(extended_gram(set, b)?.squared_frobenius())
}

/// Total squared correlation ‖𝒮ᴴ𝒮‖²_F (all weights 1).
pub fn tsc(set: &SequenceSet) -> f64 {
    let gram = set.data().adjoint() * set.data();
    gram.norm_squared()
}

/// (I_intra, I_inter): total intra-cell and inter-cell interference in the
/// training phase. For unit-norm sets, etsc = I_intra + I_inter + JK.
pub fn interference_split(set: &SequenceSet, b: &InterferenceMatrix) -> Result<(f64, f64)> {
    let gram = extended_gram(set, b)?;
    let j = set.cells();
    let jk = (j * set.users_per_cell()) as f64;
    let mut intra = 0.0;
    let mut inter = 0.0;
    for m in 0..j {
        for n in 0..j {
            let norm_sq = gram.block(m, n).norm_squared();
            if m == n {
                intra += norm_sq;
            } else {
                inter += norm_sq; // block already carries the √β weight
            }
        }
    }
    Ok((intra - jk, inter))
}

/// Analytic sum MSE of the LS estimate over all JK users:
/// ‖G_B‖²_F − JK + JK·σ².
pub fn sum_mse_analytic(set: &SequenceSet, b: &InterferenceMatrix, sigma_sq: f64) -> Result<f64> {
    let jk = (set.cells() * set.users_per_cell()) as f64;
    Ok(etsc(set, b)? - jk + jk * sigma_sq)
}

/// Multiple of the unit roundoff below which a power spread is treated as a
/// constant modulus: sin/cos evaluation plus squaring perturbs per-entry
/// powers by a few ulps, so a genuinely unimodular sequence must report 0 dB.
const CONSTANT_MODULUS_ULPS: f64 = 16.0;

/// Peak-to-average power ratio 10·log₁₀(max_t |s[t]|² / mean_t |s[t]|²) in dB.
///
/// Sequences whose per-entry powers agree to within machine precision are
/// constant-modulus and report exactly 0 dB.
pub fn papr_db(sequence: &[Complex64]) -> Result<f64> {
    if sequence.is_empty() {
        return Err(Error::InvalidArgument("empty sequence has no PAPR".into()));
    }
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    let mut sum = 0.0f64;
    for z in sequence {
        let p = z.norm_sqr();
        max = max.max(p);
        min = min.min(p);
        sum += p;
    }
    if max == 0.0 {
        return Err(Error::InvalidArgument(
            "all-zero sequence has undefined PAPR".into(),
        ));
    }
    if max - min <= CONSTANT_MODULUS_ULPS * f64::EPSILON * max {
        return Ok(0.0);
    }
    let mean = sum / sequence.len() as f64;
    Ok(10.0 * (max / mean).log10())
}

/// JSON record emitted by the CLI `eval` subcommand.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalRecord {
    pub etsc: f64,
    pub tsc: f64,
    pub i_intra: f64,
    pub i_inter: f64,
    pub papr_per_user_db: Vec<f64>,
    pub max_papr_db: f64,
}

pub fn eval_record(set: &SequenceSet, b: &InterferenceMatrix) -> Result<EvalRecord> {
    let (i_intra, i_inter) = interference_split(set, b)?;
    let mut papr_per_user_db = Vec::with_capacity(set.total_sequences());
    for n in 0..set.total_sequences() {
        papr_per_user_db.push(papr_db(set.data().column(n).as_slice())?);
    }
    let max_papr_db = papr_per_user_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(EvalRecord {
        etsc: etsc(set, b)?,
        tsc: tsc(set),
        i_intra,
        i_inter,
        papr_per_user_db,
        max_papr_db,
    })
}
