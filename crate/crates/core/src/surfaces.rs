//! Topology and geometry of the covering curves: Riemann–Hurwitz genus from
//! permutation monodromy, Gauss–Bonnet area, the Li–Yau inequality and
//! audited gonality lower bounds.
//!
//! Permutations act on `{0, …, n−1}` and compose right to left: `στ` applies
//! `τ` first.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::RegularMultigraph;
use crate::{ARTIFACT_VERSION, LOG_BASE, LOOP_CONVENTION, PERMUTATION_CONVENTION};

/// Version of the formulas recorded in certificates.
pub const FORMULA_VERSION: u32 = 1;

pub const BURGER_BANNER: &str = "c_B is assumed, not computed";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("not a permutation of 0..{n}")]
    NotAPermutation { n: usize },
    #[error("permutation {index} has degree {got}, expected {expected}")]
    DegreeMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("base (g₀ = {genus}, p = {punctures}) is not hyperbolic")]
    NotHyperbolic { genus: u32, punctures: u32 },
    #[error("expected {expected} puncture permutations, got {got}")]
    PunctureCount { expected: usize, got: usize },
    #[error("expected {expected} handle pairs, got {got}")]
    HandleCount { expected: usize, got: usize },
    #[error("surface-group relation fails")]
    RelationViolated,
    #[error("monodromy is intransitive ({orbits} orbits); the cover is disconnected")]
    Intransitive { orbits: usize },
    #[error("χ(C) = {chi} does not give a nonnegative integer genus")]
    InconsistentGenus { chi: i64 },
    #[error("χ = {0} is not negative")]
    NotNegativeEuler(i64),
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("graph has fewer than two generators")]
    TooFewGenerators,
    #[error("degree must be at least 1")]
    EmptyCover,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation(Vec<usize>);

impl TryFrom<Vec<usize>> for Permutation {
    type Error = SurfaceError;

    fn try_from(images: Vec<usize>) -> Result<Self, SurfaceError> {
        Permutation::new(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.0
    }
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, SurfaceError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(SurfaceError::NotAPermutation { n });
            }
        }
        Ok(Permutation(images))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Builds a permutation from disjoint cycles on `0..n`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self, SurfaceError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut moved = vec![false; n];
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                let y = cycle[(k + 1) % cycle.len()];
                if x >= n || y >= n || std::mem::replace(&mut moved[x], true) {
                    return Err(SurfaceError::NotAPermutation { n });
                }
                images[x] = y;
            }
        }
        Permutation::new(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn apply(&self, x: usize) -> usize {
        self.0[x]
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        assert_eq!(self.degree(), other.degree(), "degree mismatch");
        Permutation(other.0.iter().map(|&x| self.0[x]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (x, &y) in self.0.iter().enumerate() {
            inv[y] = x;
        }
        Permutation(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Number of cycles, fixed points included.
    pub fn cycle_count(&self) -> usize {
        let mut seen = vec![false; self.0.len()];
        let mut cycles = 0;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            cycles += 1;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x];
            }
        }
        cycles
    }
}

fn commutator(a: &Permutation, b: &Permutation) -> Permutation {
    a.compose(b).compose(&a.inverse()).compose(&b.inverse())
}

fn orbit_count(n: usize, perms: &[&Permutation]) -> usize {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut orbits = n;
    for p in perms {
        for x in 0..n {
            let (a, b) = (find(&mut parent, x), find(&mut parent, p.apply(x)));
            if a != b {
                parent[a] = b;
                orbits -= 1;
            }
        }
    }
    orbits
}

/// A connected degree-`n` cover of a punctured genus-`g₀` surface, given by
/// its monodromy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverDescriptor {
    base_genus: u32,
    punctures: u32,
    degree: usize,
    puncture_monodromy: Vec<Permutation>,
    handle_monodromy: Vec<(Permutation, Permutation)>,
    transitive: bool,
}

impl CoverDescriptor {
    /// Validates hyperbolicity, degrees, transitivity and the relation
    /// `[a₁,b₁]⋯[a_g,b_g]·σ₁⋯σ_p = id` (right-to-left products).
    pub fn new(
        base_genus: u32,
        puncture_monodromy: Vec<Permutation>,
        handle_monodromy: Vec<(Permutation, Permutation)>,
    ) -> Result<Self, SurfaceError> {
        let punctures = puncture_monodromy.len() as u32;
        if 2 - 2 * base_genus as i64 - punctures as i64 >= 0 {
            return Err(SurfaceError::NotHyperbolic {
                genus: base_genus,
                punctures,
            });
        }
        if handle_monodromy.len() != base_genus as usize {
            return Err(SurfaceError::HandleCount {
                expected: base_genus as usize,
                got: handle_monodromy.len(),
            });
        }
        let all: Vec<&Permutation> = handle_monodromy
            .iter()
            .flat_map(|(a, b)| [a, b])
            .chain(puncture_monodromy.iter())
            .collect();
        let degree = all.first().map_or(0, |p| p.degree());
        if degree == 0 {
            return Err(SurfaceError::EmptyCover);
        }
        for (index, p) in all.iter().enumerate() {
            if p.degree() != degree {
                return Err(SurfaceError::DegreeMismatch {
                    index,
                    expected: degree,
                    got: p.degree(),
                });
            }
        }
        let mut product = Permutation::identity(degree);
        for (a, b) in &handle_monodromy {
            product = product.compose(&commutator(a, b));
        }
        for s in &puncture_monodromy {
            product = product.compose(s);
        }
        if !product.is_identity() {
            return Err(SurfaceError::RelationViolated);
        }
        let orbits = orbit_count(degree, &all);
        if orbits != 1 {
            return Err(SurfaceError::Intransitive { orbits });
        }
        Ok(CoverDescriptor {
            base_genus,
            punctures,
            degree,
            puncture_monodromy,
            handle_monodromy,
            transitive: true,
        })
    }

    /// Cover of the thrice-punctured sphere with `σ∞ = (σ₀σ₁)⁻¹`.
    pub fn thrice_punctured(
        sigma0: Permutation,
        sigma1: Permutation,
    ) -> Result<Self, SurfaceError> {
        if sigma0.degree() != sigma1.degree() {
            return Err(SurfaceError::DegreeMismatch {
                index: 1,
                expected: sigma0.degree(),
                got: sigma1.degree(),
            });
        }
        let infinity = sigma0.compose(&sigma1).inverse();
        CoverDescriptor::new(0, vec![sigma0, sigma1, infinity], Vec::new())
    }

    /// Reads `σ₀, σ₁` off the first two generators of a Cayley or Schreier
    /// graph (vertex `x` goes to `s_j·x`).
    pub fn from_graph(g: &RegularMultigraph) -> Result<Self, SurfaceError> {
        if g.degree() < 2 {
            return Err(SurfaceError::TooFewGenerators);
        }
        CoverDescriptor::thrice_punctured(
            Permutation::new(g.generator_permutation(0))?,
            Permutation::new(g.generator_permutation(1))?,
        )
    }

    pub fn base_genus(&self) -> u32 {
        self.base_genus
    }

    pub fn punctures(&self) -> u32 {
        self.punctures
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn puncture_monodromy(&self) -> &[Permutation] {
        &self.puncture_monodromy
    }

    pub fn handle_monodromy(&self) -> &[(Permutation, Permutation)] {
        &self.handle_monodromy
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    /// `χ(U) = 2 − 2g₀ − p`.
    pub fn base_euler(&self) -> i64 {
        2 - 2 * self.base_genus as i64 - self.punctures as i64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusReport {
    pub genus: u64,
    /// Euler characteristic of the punctured cover, `n·χ(U)`.
    pub chi_open: i64,
    /// Euler characteristic of the compactified cover.
    pub chi_closed: i64,
}

pub fn genus_from_monodromy(cd: &CoverDescriptor) -> Result<GenusReport, SurfaceError> {
    let chi_open = cd.degree as i64 * cd.base_euler();
    let filled: i64 = cd
        .puncture_monodromy
        .iter()
        .map(|s| s.cycle_count() as i64)
        .sum();
    let chi = chi_open + filled;
    if chi > 2 || chi % 2 != 0 {
        return Err(SurfaceError::InconsistentGenus { chi });
    }
    Ok(GenusReport {
        genus: ((2 - chi) / 2) as u64,
        chi_open,
        chi_closed: chi,
    })
}

/// Gauss–Bonnet: `μ = −2π·χ`.
pub fn hyperbolic_area(chi: i64) -> Result<f64, SurfaceError> {
    if chi >= 0 {
        return Err(SurfaceError::NotNegativeEuler(chi));
    }
    Ok(-2.0 * PI * chi as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiYauBound {
    pub value: f64,
    pub warning: Option<String>,
}

/// Li–Yau: `γ ≥ λ₁·μ / 8π`.
pub fn liyau_bound(lambda1: f64, area: f64) -> Result<LiYauBound, SurfaceError> {
    positive("λ₁", lambda1)?;
    positive("μ", area)?;
    let warning = (lambda1 > 0.25)
        .then(|| format!("λ₁ = {lambda1} exceeds 1/4; the surface value is min(1/4, λ₁)"));
    Ok(LiYauBound {
        value: lambda1 * area / (8.0 * PI),
        warning,
    })
}

fn positive(name: &'static str, value: f64) -> Result<(), SurfaceError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(SurfaceError::NonPositive { name, value })
    }
}

/// `γ ≥ c'·n / (ln 2n)^{2A}`.
pub fn quantitative_gonality(n: u64, c_prime: f64, exponent: f64) -> Result<f64, SurfaceError> {
    if n == 0 {
        return Err(SurfaceError::EmptyCover);
    }
    positive("c'", c_prime)?;
    if !(exponent >= 0.0) || !exponent.is_finite() {
        return Err(SurfaceError::NonPositive {
            name: "A",
            value: exponent,
        });
    }
    let n = n as f64;
    Ok(c_prime * n / (2.0 * n).ln().powf(2.0 * exponent))
}

/// `genus · (ln 2n)^A / n` per member.
pub fn genus_growth_witnesses(members: &[(usize, u64)], exponent: f64) -> Vec<f64> {
    members
        .iter()
        .map(|&(n, g)| g as f64 * (2.0 * n as f64).ln().powf(exponent) / n as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainInputs {
    pub graph_lambda1: f64,
    pub burger_constant: f64,
    pub genus: u64,
    /// Cover degree; enables the quantitative bound.
    pub n: Option<u64>,
    /// `χ(U_i)`; enables the area and Li–Yau steps.
    pub chi_open: Option<i64>,
    /// Fitted `(c', A)`.
    pub fit: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    pub name: String,
    pub formula: String,
    pub operands: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub log_base: String,
    pub loop_convention: String,
    pub permutation_convention: String,
    pub formula_version: u32,
    pub artifact_version: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            log_base: LOG_BASE.into(),
            loop_convention: LOOP_CONVENTION.into(),
            permutation_convention: PERMUTATION_CONVENTION.into(),
            formula_version: FORMULA_VERSION,
            artifact_version: ARTIFACT_VERSION.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GonalityCertificate {
    pub inputs: ChainInputs,
    pub assumption: String,
    /// `c_B · λ₁(graph)`.
    pub surface_lambda1: f64,
    pub area: Option<f64>,
    pub liyau: Option<f64>,
    /// `2·c_B·λ₁(graph)·(g − 1)`, zero when `g ≤ 1`.
    pub gonality_lower: f64,
    pub vacuous: bool,
    pub quantitative: Option<f64>,
    pub audit: Vec<AuditStep>,
    pub conventions: Conventions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    /// Largest relative discrepancy over all derived values.
    pub max_relative_error: f64,
    pub pass: bool,
}

pub const REPLAY_TOLERANCE: f64 = 1e-12;

pub fn gonality_chain(inputs: ChainInputs) -> Result<GonalityCertificate, SurfaceError> {
    positive("c_B", inputs.burger_constant)?;
    if !(inputs.graph_lambda1 >= 0.0) || !inputs.graph_lambda1.is_finite() {
        return Err(SurfaceError::NonPositive {
            name: "λ₁",
            value: inputs.graph_lambda1,
        });
    }
    let mut audit = Vec::new();
    let mut step = |name: &str, formula: &str, operands: Vec<f64>, value: f64| {
        audit.push(AuditStep {
            name: name.into(),
            formula: formula.into(),
            operands,
            value,
        });
        value
    };

    let lam = inputs.graph_lambda1;
    let cb = inputs.burger_constant;
    let surface_lambda1 = step("surface-lambda1", "c_B * lambda1", vec![cb, lam], cb * lam);

    let area = match inputs.chi_open {
        Some(chi) => {
            let mu = hyperbolic_area(chi)?;
            Some(step("area", "-2 * pi * chi", vec![chi as f64], mu))
        }
        None => None,
    };
    let liyau = match area {
        Some(mu) if surface_lambda1 > 0.0 => {
            let v = liyau_bound(surface_lambda1, mu)?.value;
            Some(step(
                "liyau",
                "lambda_s * mu / (8 * pi)",
                vec![surface_lambda1, mu],
                v,
            ))
        }
        _ => None,
    };

    let vacuous = inputs.genus <= 1;
    let g_minus_1 = inputs.genus.saturating_sub(1) as f64;
    let gonality_lower = step(
        "gonality-lower",
        "2 * lambda_s * (g - 1)",
        vec![surface_lambda1, g_minus_1],
        2.0 * surface_lambda1 * g_minus_1,
    );

    let quantitative = match (inputs.n, inputs.fit) {
        (Some(n), Some((c, a))) => {
            let v = quantitative_gonality(n, c, a)?;
            Some(step(
                "quantitative",
                "c' * n / ln(2n)^(2A)",
                vec![c, n as f64, a],
                v,
            ))
        }
        _ => None,
    };

    Ok(GonalityCertificate {
        inputs,
        assumption: BURGER_BANNER.into(),
        surface_lambda1,
        area,
        liyau,
        gonality_lower,
        vacuous,
        quantitative,
        audit,
        conventions: Conventions::default(),
    })
}

fn relative(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

impl GonalityCertificate {
    /// Recomputes every derived value from the inputs with a different
    /// association order and compares.
    pub fn replay(&self) -> ReplayOutcome {
        let i = &self.inputs;
        let g1 = i.genus.saturating_sub(1) as f64;
        let mut errs = vec![
            relative(self.surface_lambda1, i.graph_lambda1 * i.burger_constant),
            relative(
                self.gonality_lower,
                i.burger_constant * (i.graph_lambda1 * (2.0 * g1)),
            ),
        ];
        let area = i.chi_open.map(|chi| (-(chi as f64) * PI) * 2.0);
        match (self.area, area) {
            (Some(a), Some(b)) => errs.push(relative(a, b)),
            (None, None) => {}
            _ => errs.push(f64::INFINITY),
        }
        if let (Some(v), Some(mu)) = (self.liyau, area) {
            errs.push(relative(
                v,
                i.burger_constant * (mu / (8.0 * PI)) * i.graph_lambda1,
            ));
        }
        match (self.quantitative, i.n, i.fit) {
            (Some(v), Some(n), Some((c, a))) => {
                let n = n as f64;
                let denom = (-(2.0 * a) * (n + n).ln().ln()).exp();
                errs.push(relative(v, (n * denom) * c));
            }
            (None, _, None) | (None, None, _) => {}
            _ => errs.push(f64::INFINITY),
        }
        if self.audit.iter().any(|s| !s.value.is_finite()) {
            errs.push(f64::INFINITY);
        }
        let max_relative_error = errs.into_iter().fold(0.0, f64::max);
        ReplayOutcome {
            max_relative_error,
            pass: max_relative_error <= REPLAY_TOLERANCE
                && self.gonality_lower >= 0.0
                && self.quantitative.is_none_or(|q| q >= 0.0),
        }
    }
}
