//! Graph-side inequalities as executable checks: diameters, the
//! Diaconis–Saloff-Coste bound, interlacing of quotient spectra, esperantist
//! constant fitting and Kelner ratios.
//!
//! Logarithms are natural throughout.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RegularMultigraph;
use crate::LOG_BASE;

/// Graphs up to this size get an exact all-sources diameter.
pub const EXACT_DIAMETER_LIMIT: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },
    #[error("diameter bracket has no certified upper bound")]
    NoUpperBound,
    #[error("diameter 0 gives no Diaconis–Saloff-Coste bound")]
    DegenerateDiameter,
    #[error("generator sets differ between parent and quotient")]
    MismatchedGenerators,
    #[error("family needs at least {needed} members, got {got}")]
    TooFewMembers { needed: usize, got: usize },
    #[error("member {index} has λ₁ = {lambda1}, expected > 0")]
    NonPositiveLambda { index: u64, lambda1: f64 },
    #[error("member sizes must strictly increase (member {index})")]
    SizesNotIncreasing { index: u64 },
    #[error("member {index} has no genus")]
    MissingGenus { index: u64 },
    #[error("invalid exponent grid: {0}")]
    InvalidGrid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diameter {
    Exact(usize),
    /// Sampled eccentricities give `lower`; a double-sweep gives `upper`.
    Bracket {
        lower: usize,
        upper: Option<usize>,
    },
}

impl Diameter {
    pub fn exact(&self) -> Option<usize> {
        match *self {
            Diameter::Exact(d) => Some(d),
            Diameter::Bracket { .. } => None,
        }
    }

    /// Certified upper bound.
    pub fn upper(&self) -> Option<usize> {
        match *self {
            Diameter::Exact(d) => Some(d),
            Diameter::Bracket { upper, .. } => upper,
        }
    }

    pub fn lower(&self) -> usize {
        match *self {
            Diameter::Exact(d) => d,
            Diameter::Bracket { lower, .. } => lower,
        }
    }
}

/// Breadth-first distances from `source`; `None` if some vertex is unreached.
pub fn eccentricity(g: &RegularMultigraph, source: usize) -> Option<usize> {
    farthest(g, source).map(|(_, d)| d)
}

fn farthest(g: &RegularMultigraph, source: usize) -> Option<(usize, usize)> {
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    let mut last = (source, 0);
    let mut reached = 1;
    while let Some(x) = queue.pop_front() {
        let d = dist[x];
        last = (x, d);
        for &y in g.neighbors(x) {
            let y = y as usize;
            if dist[y] == usize::MAX {
                dist[y] = d + 1;
                reached += 1;
                queue.push_back(y);
            }
        }
    }
    (reached == n).then_some(last)
}

/// Exact diameter: one eccentricity for vertex-transitive graphs, all
/// sources up to [`EXACT_DIAMETER_LIMIT`] vertices, otherwise a bracket.
pub fn diameter(g: &RegularMultigraph) -> Result<Diameter, MetricsError> {
    if !g.is_connected() {
        return Err(MetricsError::Disconnected {
            components: g.components(),
        });
    }
    if g.meta().vertex_transitive {
        return Ok(Diameter::Exact(eccentricity(g, 0).expect("connected")));
    }
    if g.n() <= EXACT_DIAMETER_LIMIT {
        let d = (0..g.n())
            .into_par_iter()
            .map(|s| eccentricity(g, s).expect("connected"))
            .max()
            .unwrap_or(0);
        return Ok(Diameter::Exact(d));
    }
    diameter_bracket(g, 16)
}

/// `max ecc(s) ≤ diam ≤ min 2·ecc(s)` over `samples` sources chosen by
/// repeated farthest-vertex sweeps.
pub fn diameter_bracket(g: &RegularMultigraph, samples: usize) -> Result<Diameter, MetricsError> {
    if !g.is_connected() {
        return Err(MetricsError::Disconnected {
            components: g.components(),
        });
    }
    let mut lower = 0;
    let mut upper = usize::MAX;
    let mut source = 0;
    for _ in 0..samples.max(1) {
        let (far, ecc) = farthest(g, source).expect("connected");
        lower = lower.max(ecc);
        upper = upper.min(2 * ecc);
        if far == source {
            break;
        }
        source = far;
    }
    if lower == upper {
        return Ok(Diameter::Exact(lower));
    }
    Ok(Diameter::Bracket {
        lower,
        upper: Some(upper),
    })
}

/// `diam / (ln n)^p` for `p = 1, 2, 3`.
pub fn diameter_profile(n: usize, diam: usize) -> [f64; 3] {
    let l = (n as f64).ln();
    [1, 2, 3].map(|p| diam as f64 / l.powi(p))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DscOutcome {
    /// `1 / (r · diam²)`.
    pub bound: f64,
    pub lambda1: f64,
    pub degree: usize,
    pub diameter: usize,
    pub pass: bool,
}

/// Diaconis–Saloff-Coste: `λ₁ ≥ 1 / (|S| · diam²)`. The diameter must be
/// exact or carry an upper bound, since the bound decreases in `diam`.
pub fn dsc_check(
    lambda1: f64,
    degree: usize,
    diam: &Diameter,
    tol: f64,
) -> Result<DscOutcome, MetricsError> {
    let d = diam.upper().ok_or(MetricsError::NoUpperBound)?;
    if d == 0 {
        return Err(MetricsError::DegenerateDiameter);
    }
    let bound = 1.0 / (degree as f64 * (d * d) as f64);
    Ok(DscOutcome {
        bound,
        lambda1,
        degree,
        diameter: d,
        pass: lambda1 + tol >= bound,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterlacingOutcome {
    pub parent_lambda1: f64,
    pub quotient_lambda1: f64,
    pub tol: f64,
    pub pass: bool,
}

/// A quotient's spectrum sits inside its parent's, so
/// `λ₁(quotient) ≥ λ₁(parent)`.
pub fn interlacing_check(
    parent: (&RegularMultigraph, f64),
    quotient: (&RegularMultigraph, f64),
    tol: f64,
) -> Result<InterlacingOutcome, MetricsError> {
    if parent.0.meta().fingerprint != quotient.0.meta().fingerprint {
        return Err(MetricsError::MismatchedGenerators);
    }
    Ok(InterlacingOutcome {
        parent_lambda1: parent.1,
        quotient_lambda1: quotient.1,
        tol,
        pass: quotient.1 >= parent.1 - tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    /// ℓ, or the position in the family.
    pub index: u64,
    pub n: usize,
    pub lambda1: f64,
    pub diameter: Option<usize>,
    pub genus: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub family: String,
    pub members: Vec<FamilyMember>,
}

impl FamilyRecord {
    fn validate(&self, min_members: usize) -> Result<(), MetricsError> {
        if self.members.len() < min_members {
            return Err(MetricsError::TooFewMembers {
                needed: min_members,
                got: self.members.len(),
            });
        }
        for m in &self.members {
            if !(m.lambda1 > 0.0) {
                return Err(MetricsError::NonPositiveLambda {
                    index: m.index,
                    lambda1: m.lambda1,
                });
            }
        }
        for w in self.members.windows(2) {
            if w[1].n <= w[0].n {
                return Err(MetricsError::SizesNotIncreasing { index: w[1].index });
            }
        }
        Ok(())
    }
}

/// One row of the witness table: `c(A) = min_i λ₁(i)·(ln 2n_i)^A`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitRow {
    pub exponent: f64,
    pub c: f64,
    pub witnesses: Vec<f64>,
    pub non_decreasing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsperantistFit {
    pub log_base: String,
    /// Smallest grid `A` whose witnesses do not decrease along the family,
    /// or the largest grid value when none qualifies.
    pub exponent: f64,
    pub c: f64,
    /// Whether the trend heuristic was satisfied at `exponent`. A
    /// diagnosis, not a proof.
    pub trend_holds: bool,
    /// The `A = 0` (expander) row.
    pub expander_row: FitRow,
    pub rows: Vec<FitRow>,
}

/// `{0, 0.5, 1, …, 6}`.
pub fn default_exponent_grid() -> Vec<f64> {
    (0..=12).map(|i| i as f64 * 0.5).collect()
}

fn fit_row(fam: &FamilyRecord, a: f64) -> FitRow {
    let witnesses: Vec<f64> = fam
        .members
        .iter()
        .map(|m| m.lambda1 * (2.0 * m.n as f64).ln().powf(a))
        .collect();
    let c = witnesses.iter().copied().fold(f64::INFINITY, f64::min);
    let non_decreasing = witnesses.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    FitRow {
        exponent: a,
        c,
        witnesses,
        non_decreasing,
    }
}

/// Fits `λ₁(i) ≥ c / (ln 2n_i)^A` over an exponent grid.
pub fn esperantist_fit(fam: &FamilyRecord, grid: &[f64]) -> Result<EsperantistFit, MetricsError> {
    fam.validate(3)?;
    if grid.is_empty() {
        return Err(MetricsError::InvalidGrid("empty".into()));
    }
    if grid.iter().any(|a| !(*a >= 0.0) || !a.is_finite()) {
        return Err(MetricsError::InvalidGrid(
            "exponents must be finite and ≥ 0".into(),
        ));
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let rows: Vec<FitRow> = grid.iter().map(|&a| fit_row(fam, a)).collect();
    let chosen = rows
        .iter()
        .find(|r| r.non_decreasing)
        .unwrap_or_else(|| rows.last().expect("grid nonempty"));
    Ok(EsperantistFit {
        log_base: LOG_BASE.into(),
        exponent: chosen.exponent,
        c: chosen.c,
        trend_holds: chosen.non_decreasing,
        expander_row: fit_row(fam, 0.0),
        rows: rows.clone(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KelnerRatio {
    pub index: u64,
    pub n: usize,
    pub genus: u64,
    /// `λ₁ · n / max(g, 1)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KelnerReport {
    pub ratios: Vec<KelnerRatio>,
    pub slack: f64,
    /// `max / min ≤ slack`; absent for a single member.
    pub within_slack: Option<bool>,
    /// Ratio at the largest member `≤ slack ×` ratio at the smallest.
    pub non_growing: Option<bool>,
    /// Every ratio below the supplied absolute bound, when one is given.
    pub below_bound: Option<bool>,
    pub note: String,
}

/// Kelner's bound `λ₁ ≪ max(g, 1) / n` for graphs embedded in a genus-g
/// surface, as a finite-family ratio report.
pub fn kelner_ratio(
    fam: &FamilyRecord,
    slack: f64,
    bound: Option<f64>,
) -> Result<KelnerReport, MetricsError> {
    fam.validate(1)?;
    let ratios = fam
        .members
        .iter()
        .map(|m| {
            let genus = m
                .genus
                .ok_or(MetricsError::MissingGenus { index: m.index })?;
            Ok(KelnerRatio {
                index: m.index,
                n: m.n,
                genus,
                ratio: m.lambda1 * m.n as f64 / genus.max(1) as f64,
            })
        })
        .collect::<Result<Vec<_>, MetricsError>>()?;
    let (within_slack, non_growing) = if ratios.len() < 2 {
        (None, None)
    } else {
        let max = ratios
            .iter()
            .map(|r| r.ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let min = ratios.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let first = ratios.first().expect("nonempty").ratio;
        let last = ratios.last().expect("nonempty").ratio;
        (Some(max <= slack * min), Some(last <= slack * first))
    };
    let below_bound = bound.map(|b| ratios.iter().all(|r| r.ratio <= b));
    Ok(KelnerReport {
        ratios,
        slack,
        within_slack,
        non_growing,
        below_bound,
        note: "ratios use the configured generating set; the embedded-graph generating set \
               has a different implied constant"
            .into(),
    })
}

/// `ln(2·[G:N]) / ln(2·|G|)`: the `δ` for which a quotient family stays
/// esperantist.
pub fn quotient_size_exponent(index: usize, group_order: usize) -> f64 {
    (2.0 * index as f64).ln() / (2.0 * group_order as f64).ln()
}

/// `½(ℓ^g − 1)`, the lower bound on the index of a maximal subgroup of
/// `Sp_2g(F_ℓ)`.
pub fn maximal_subgroup_index_bound(ell: u32, genus: u32) -> f64 {
    0.5 * ((ell as f64).powi(genus as i32) - 1.0)
}
