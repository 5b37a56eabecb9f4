//! Experiment orchestration: ℓ-sweeps over a configured family, cached
//! member metrics, family-level fits and certificates, and reports.
//!
//! Members run concurrently. Cache writes happen on the calling thread
//! after every member finishes, and members are always reported in
//! increasing ℓ.

mod cache;
mod config;
mod report;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{cache_key, Cache, GcStats};
pub use config::{
    ActionKind, Basepoint, ChainConfig, ConfigError, CustomMatrices, ExperimentConfig,
    FamilyConfig, Monodromy, OutputConfig, SolverConfig, CACHE_DIR_ENV,
};
pub use report::{emit_report, render_report, ReportFormat, PLOTDATA_SCHEMA, TABULAR_SCHEMA};

use crate::algebra::{
    catalog_generators, enumerate_group, is_generated_by_order_ell, is_perfect,
    quotient_index_prime_to_ell, Catalog, GeneratorSet,
};
use crate::graph::{cayley_graph, schreier_graph, RegularMultigraph};
use crate::metrics::{
    diameter, diameter_profile, dsc_check, esperantist_fit, interlacing_check, kelner_ratio,
    Diameter, DscOutcome, EsperantistFit, FamilyMember, FamilyRecord, InterlacingOutcome,
    KelnerReport,
};
use crate::spectral::{lambda1, SpectralReport};
use crate::surfaces::{
    genus_from_monodromy, genus_growth_witnesses, gonality_chain, ChainInputs, Conventions,
    CoverDescriptor, GenusReport, GonalityCertificate, ReplayOutcome,
};
use crate::ARTIFACT_VERSION;

pub const RECORD_SCHEMA: u32 = 1;

/// Slack allowed when a quotient's `λ₁` is compared with its parent's.
pub const INTERLACING_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error("malformed record {path}: {source}")]
    Record {
        path: PathBuf,
        source: serde_json::Error,
    },
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> PipelineError {
    let context = context.into();
    move |source| PipelineError::Io { context, source }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicates {
    pub group_order: usize,
    pub perfect: bool,
    /// `None` when ℓ is too small for the dimension.
    pub order_ell_generated: Option<bool>,
    pub index_prime_to_ell: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberMetrics {
    pub n: usize,
    pub degree: usize,
    pub action: String,
    pub generators: String,
    pub connected: bool,
    pub components: usize,
    pub spectral: Option<SpectralReport>,
    pub diameter: Option<Diameter>,
    /// `diam / (ln n)^p`, `p = 1, 2, 3`.
    pub diameter_profile: Option<[f64; 3]>,
    pub dsc: Option<DscOutcome>,
    pub predicates: Option<Predicates>,
    pub genus: Option<GenusReport>,
    pub interlacing: Option<InterlacingOutcome>,
    pub notes: Vec<String>,
}

impl MemberMetrics {
    pub fn lambda1(&self) -> Option<f64> {
        self.spectral.as_ref().map(|s| s.lambda1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberRecord {
    pub ell: u32,
    pub cache_key: Option<String>,
    pub metrics: Option<MemberMetrics>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub ell: u32,
    pub certificate: GonalityCertificate,
    pub replay: ReplayOutcome,
}

/// Everything that must be reproducible: no timings, no cache-hit flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordBody {
    pub schema_version: u32,
    pub artifact_version: String,
    pub family: String,
    pub config: ExperimentConfig,
    pub conventions: Conventions,
    pub members: Vec<MemberRecord>,
    pub fit: Option<EsperantistFit>,
    pub fit_note: Option<String>,
    pub kelner: Option<KelnerReport>,
    pub kelner_note: Option<String>,
    /// `genus · (ln 2n)^A / n` at the fitted `A`.
    pub genus_trend: Option<Vec<f64>>,
    pub certificates: Vec<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberTiming {
    pub ell: u32,
    pub seconds: f64,
    pub cache_hit: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub timings: Vec<MemberTiming>,
    pub total_seconds: f64,
    pub cache_dir: Option<PathBuf>,
    pub cache_writes: usize,
    pub cache_errors: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub body: RecordBody,
    pub run: RunInfo,
}

impl ResultRecord {
    pub fn failed_members(&self) -> usize {
        self.body
            .members
            .iter()
            .filter(|m| m.error.is_some())
            .count()
    }

    pub fn cache_hits(&self) -> usize {
        self.run.timings.iter().filter(|t| t.cache_hit).count()
    }

    /// Canonical JSON of the body; identical configs give identical bytes.
    pub fn body_json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("record body serializes")
    }
}

/// Everything besides the graph export that determines a member's metrics.
fn member_settings(cfg: &ExperimentConfig) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        solver: &'a SolverConfig,
        monodromy: Option<Monodromy>,
        interlacing_tol: f64,
    }
    serde_json::to_string(&Key {
        solver: &cfg.solver,
        monodromy: cfg.family.monodromy,
        interlacing_tol: INTERLACING_TOL,
    })
    .expect("settings serialize")
}

fn build_graph(cfg: &ExperimentConfig, gens: &GeneratorSet) -> Result<RegularMultigraph, String> {
    let action = cfg.family.action;
    let point = match &cfg.family.basepoint {
        Basepoint::Point(p) => Some(p.as_slice()),
        Basepoint::Rule(_) => None,
    };
    let g = if action == ActionKind::Cayley && point.is_none() {
        cayley_graph(gens, cfg.solver.cap)
    } else {
        schreier_graph(gens, &action.to_action(), point, cfg.solver.cap)
    };
    g.map_err(|e| e.to_string())
}

fn predicates(
    gens: &GeneratorSet,
    ell: u32,
    cap: usize,
    notes: &mut Vec<String>,
) -> Option<Predicates> {
    let group = match enumerate_group(gens, cap) {
        Ok(g) => g,
        Err(e) => {
            notes.push(format!("predicates skipped: {e}"));
            return None;
        }
    };
    let mut optional = |r: Result<bool, _>| match r {
        Ok(b) => Some(b),
        Err(e) => {
            notes.push(format!("predicate unavailable: {e}"));
            None
        }
    };
    let order_ell_generated = optional(is_generated_by_order_ell(&group, ell));
    let index_prime_to_ell = optional(quotient_index_prime_to_ell(&group, ell));
    Some(Predicates {
        group_order: group.len(),
        perfect: is_perfect(&group),
        order_ell_generated,
        index_prime_to_ell,
    })
}

fn compute_member(
    cfg: &ExperimentConfig,
    gens: &GeneratorSet,
    g: &RegularMultigraph,
    ell: u32,
) -> MemberMetrics {
    let settings = cfg.solver.settings();
    let mut notes = Vec::new();
    let (connected, components) = (g.is_connected(), g.components());
    let spectral = if connected {
        match lambda1(g, &settings) {
            Ok(r) => Some(r),
            Err(e) => {
                notes.push(format!("λ₁ failed: {e}"));
                None
            }
        }
    } else {
        notes.push(format!("graph has {components} components; λ₁ = 0"));
        None
    };
    let diam = if cfg.solver.diameter && connected {
        diameter(g).ok()
    } else {
        None
    };
    let dsc = match (&spectral, &diam) {
        (Some(s), Some(d)) => match dsc_check(s.lambda1, g.degree(), d, settings.tol) {
            Ok(o) => Some(o),
            Err(e) => {
                notes.push(format!("dsc skipped: {e}"));
                None
            }
        },
        _ => None,
    };
    let predicates = if cfg.solver.predicates {
        predicates(gens, ell, cfg.solver.cap, &mut notes)
    } else {
        None
    };
    let genus = match cfg.family.monodromy {
        Some(Monodromy::ThricePuncturedSphere) => {
            match CoverDescriptor::from_graph(g).and_then(|cd| genus_from_monodromy(&cd)) {
                Ok(r) => Some(r),
                Err(e) => {
                    notes.push(format!("genus unavailable: {e}"));
                    None
                }
            }
        }
        None => None,
    };
    let interlacing = match (&spectral, cfg.solver.interlacing, cfg.family.action) {
        (Some(s), true, action) if action != ActionKind::Cayley => {
            let parent = cayley_graph(gens, cfg.solver.cap)
                .map_err(|e| e.to_string())
                .and_then(|c| Ok((lambda1(&c, &settings).map_err(|e| e.to_string())?, c)));
            match parent {
                Ok((pr, c)) => {
                    interlacing_check((&c, pr.lambda1), (g, s.lambda1), INTERLACING_TOL).ok()
                }
                Err(e) => {
                    notes.push(format!("interlacing skipped: {e}"));
                    None
                }
            }
        }
        _ => None,
    };
    MemberMetrics {
        n: g.n(),
        degree: g.degree(),
        action: g.meta().action.clone(),
        generators: g.meta().generators.clone(),
        connected,
        components,
        diameter_profile: diam
            .and_then(|d| d.exact())
            .map(|d| diameter_profile(g.n(), d)),
        spectral,
        diameter: diam,
        dsc,
        predicates,
        genus,
        interlacing,
        notes,
    }
}

struct MemberOutcome {
    record: MemberRecord,
    timing: MemberTiming,
    fresh: Option<MemberMetrics>,
}

fn run_member(
    cfg: &ExperimentConfig,
    catalog: &Catalog,
    ell: u32,
    cache: Option<&Cache>,
) -> MemberOutcome {
    let start = Instant::now();
    let failed = |error: String| MemberOutcome {
        record: MemberRecord {
            ell,
            cache_key: None,
            metrics: None,
            error: Some(error),
        },
        timing: MemberTiming {
            ell,
            seconds: start.elapsed().as_secs_f64(),
            cache_hit: false,
        },
        fresh: None,
    };
    let gens = match catalog_generators(catalog, ell) {
        Ok(g) => g,
        Err(e) => return failed(e.to_string()),
    };
    let g = match build_graph(cfg, &gens) {
        Ok(g) => g,
        Err(e) => return failed(e),
    };
    let key = cache_key(&g, &member_settings(cfg));
    let (metrics, hit) = match cache.and_then(|c| c.get(&key)) {
        Some(m) => (m, true),
        None => (compute_member(cfg, &gens, &g, ell), false),
    };
    MemberOutcome {
        record: MemberRecord {
            ell,
            cache_key: Some(key),
            metrics: Some(metrics.clone()),
            error: None,
        },
        timing: MemberTiming {
            ell,
            seconds: start.elapsed().as_secs_f64(),
            cache_hit: hit,
        },
        fresh: (!hit).then_some(metrics),
    }
}

/// Runs the sweep with the cache at [`ExperimentConfig::cache_dir`].
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultRecord, PipelineError> {
    let cache = Cache::new(cfg.cache_dir());
    run_with_cache(cfg, Some(&cache))
}

pub fn run_with_cache(
    cfg: &ExperimentConfig,
    cache: Option<&Cache>,
) -> Result<ResultRecord, PipelineError> {
    cfg.validate()?;
    let catalog = cfg.catalog()?;
    let ells = cfg.ells()?;
    let start = Instant::now();
    let outcomes: Vec<MemberOutcome> = ells
        .par_iter()
        .map(|&ell| run_member(cfg, &catalog, ell, cache))
        .collect();

    let mut run = RunInfo {
        cache_dir: cache.map(|c| c.dir().to_path_buf()),
        ..RunInfo::default()
    };
    let mut members = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        if let (Some(c), Some(m), Some(key)) = (cache, &o.fresh, &o.record.cache_key) {
            match c.put(key, m) {
                Ok(()) => run.cache_writes += 1,
                Err(e) => run.cache_errors.push(format!("ℓ = {}: {e}", o.record.ell)),
            }
        }
        run.timings.push(o.timing);
        members.push(o.record);
    }
    run.total_seconds = start.elapsed().as_secs_f64();
    Ok(ResultRecord {
        body: summarize(cfg, members),
        run,
    })
}

/// Family-level fit, Kelner ratios and certificates over the successful
/// members.
pub fn summarize(cfg: &ExperimentConfig, members: Vec<MemberRecord>) -> RecordBody {
    let family = format!("{}/{}", cfg.family.catalog, action_label(cfg.family.action));
    let solved: Vec<(u32, &MemberMetrics, f64)> = members
        .iter()
        .filter_map(|m| {
            let metrics = m.metrics.as_ref()?;
            Some((m.ell, metrics, metrics.lambda1()?))
        })
        .collect();
    let fam = FamilyRecord {
        family: family.clone(),
        members: solved
            .iter()
            .map(|&(ell, m, lam)| FamilyMember {
                index: ell as u64,
                n: m.n,
                lambda1: lam,
                diameter: m.diameter.and_then(|d| d.exact()),
                genus: m.genus.map(|g| g.genus),
            })
            .collect(),
    };
    let (fit, fit_note) = match esperantist_fit(&fam, &cfg.chain.a_grid) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let with_genus = !fam.members.is_empty() && fam.members.iter().all(|m| m.genus.is_some());
    let (kelner, kelner_note) = if with_genus {
        match kelner_ratio(&fam, cfg.chain.kelner_slack, None) {
            Ok(k) => (Some(k), None),
            Err(e) => (None, Some(e.to_string())),
        }
    } else {
        (None, Some("genus not computed for every member".into()))
    };
    let genus_trend = match (&fit, with_genus) {
        (Some(f), true) => {
            let pairs: Vec<(usize, u64)> = fam
                .members
                .iter()
                .map(|m| (m.n, m.genus.expect("checked")))
                .collect();
            Some(genus_growth_witnesses(&pairs, f.exponent))
        }
        _ => None,
    };
    let certificates = solved
        .iter()
        .filter_map(|&(ell, m, lam)| {
            let genus = m.genus?;
            let cert = gonality_chain(ChainInputs {
                graph_lambda1: lam,
                burger_constant: cfg.chain.burger_constant,
                genus: genus.genus,
                n: Some(m.n as u64),
                chi_open: Some(genus.chi_open),
                fit: fit.as_ref().map(|f| (cfg.chain.quant_constant, f.exponent)),
            })
            .ok()?;
            let replay = cert.replay();
            Some(CertificateEntry {
                ell,
                certificate: cert,
                replay,
            })
        })
        .collect();
    RecordBody {
        schema_version: RECORD_SCHEMA,
        artifact_version: ARTIFACT_VERSION.into(),
        family,
        config: cfg.clone(),
        conventions: Conventions::default(),
        members,
        fit,
        fit_note,
        kelner,
        kelner_note,
        genus_trend,
        certificates,
    }
}

fn action_label(a: ActionKind) -> &'static str {
    match a {
        ActionKind::Cayley => "cayley",
        ActionKind::ProjectiveLine => "projective-line",
        ActionKind::NonzeroVectors => "nonzero-vectors",
        ActionKind::DiagonalQuotient => "diagonal-quotient",
    }
}

/// Writes `record-NNNN.json` under `dir`, never overwriting an existing
/// record.
pub fn write_record(dir: &Path, rec: &ResultRecord) -> Result<PathBuf, PipelineError> {
    fs::create_dir_all(dir).map_err(io_err(format!("creating {}", dir.display())))?;
    let json = serde_json::to_string_pretty(rec).expect("record serializes");
    let last = fs::read_dir(dir)
        .map_err(io_err(format!("listing {}", dir.display())))?
        .filter_map(|e| e.ok())
        .filter_map(|e| {
            let name = e.file_name().to_string_lossy().into_owned();
            name.strip_prefix("record-")?
                .strip_suffix(".json")?
                .parse::<usize>()
                .ok()
        })
        .max()
        .unwrap_or(0);
    let mut i = last + 1;
    loop {
        let path = dir.join(format!("record-{i:04}.json"));
        match fs::OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
        {
            Ok(mut f) => {
                io::Write::write_all(&mut f, json.as_bytes())
                    .map_err(io_err(format!("writing {}", path.display())))?;
                return Ok(path);
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => i += 1,
            Err(e) => return Err(io_err(format!("creating {}", path.display()))(e)),
        }
    }
}

pub fn load_record(path: &Path) -> Result<ResultRecord, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(format!("reading {}", path.display())))?;
    serde_json::from_str(&text).map_err(|source| PipelineError::Record {
        path: path.to_path_buf(),
        source,
    })
}
