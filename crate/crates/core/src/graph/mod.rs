//! Cayley and Schreier multigraphs of generator sets acting on finite sets.
//!
//! Every graph is stored as an `n × r` table of targets: row `x` lists
//! `s_j · x` for the generators `s_1, …, s_r` in their fixed order. Since the
//! generator sets are inverse-closed, this table is a symmetric adjacency
//! with multiplicity. A fixed point `s · x = x` is a loop that adds 1 to
//! `A[x][x]`, and an involution contributes a single edge `x ~ s·x`, so each
//! row of `A` sums to exactly `r`.

mod action;
mod export;

use std::collections::{HashMap, VecDeque};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{enumerate_group, AlgebraError, GeneratorSet};

pub use action::{normalize_line, CosetSpace, GroupAction};
pub use export::ExportError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("basepoint outside the action's domain: {0}")]
    BasepointOutsideDomain(String),
    #[error("orbit exceeds cap {cap}")]
    OrbitExceedsCap { cap: usize },
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("vector has length {got}, graph has {expected} vertices")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid permutation data: {0}")]
    InvalidPermutations(String),
}

/// Provenance carried by every graph and written into its export header.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphMeta {
    pub action: String,
    pub generators: String,
    pub modulus: u32,
    /// SHA-256 over the generator matrices (or permutations) in order.
    pub fingerprint: String,
    /// Set for Cayley graphs, where one eccentricity is the diameter.
    pub vertex_transitive: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegularMultigraph {
    n: usize,
    degree: usize,
    targets: Vec<u32>,
    labels: Vec<Vec<u32>>,
    meta: GraphMeta,
    components: usize,
}

pub(crate) fn generator_fingerprint(gens: &GeneratorSet) -> String {
    let mut h = Sha256::new();
    h.update(format!("{} {}\n", gens.dim(), gens.modulus()).as_bytes());
    for g in gens.iter() {
        h.update(format!("{g}\n").as_bytes());
    }
    hex::encode(h.finalize())
}

fn count_components(n: usize, degree: usize, targets: &[u32]) -> usize {
    let mut seen = vec![false; n];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(x) = queue.pop_front() {
            for &y in &targets[x * degree..(x + 1) * degree] {
                let y = y as usize;
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    components
}

impl RegularMultigraph {
    fn assemble(degree: usize, targets: Vec<u32>, labels: Vec<Vec<u32>>, meta: GraphMeta) -> Self {
        let n = labels.len();
        debug_assert_eq!(targets.len(), n * degree);
        let components = count_components(n, degree, &targets);
        Self {
            n,
            degree,
            targets,
            labels,
            meta,
            components,
        }
    }

    /// Graph of an inverse-closed multiset of permutations of `0..n`, one
    /// vertex per point (the action need not be transitive).
    pub fn from_permutations(perms: &[Vec<usize>], label: &str) -> Result<Self, GraphError> {
        let first = perms
            .first()
            .ok_or_else(|| GraphError::InvalidPermutations("no permutations".into()))?;
        let n = first.len();
        if n == 0 {
            return Err(GraphError::InvalidPermutations("empty point set".into()));
        }
        for (i, p) in perms.iter().enumerate() {
            let mut hit = vec![false; n];
            if p.len() != n {
                return Err(GraphError::InvalidPermutations(format!(
                    "permutation {i} has length {}, expected {n}",
                    p.len()
                )));
            }
            for &x in p {
                if x >= n || std::mem::replace(&mut hit[x], true) {
                    return Err(GraphError::InvalidPermutations(format!(
                        "entry {i} is not a permutation of 0..{n}"
                    )));
                }
            }
        }
        // Inverse-closed as a multiset: the inverse of each permutation occurs
        // exactly as often as the permutation itself.
        let mut counts: HashMap<&[usize], isize> = HashMap::new();
        for p in perms {
            *counts.entry(p.as_slice()).or_default() += 1;
        }
        for p in perms {
            let mut inv = vec![0; n];
            for (x, &y) in p.iter().enumerate() {
                inv[y] = x;
            }
            if counts.get(inv.as_slice()) != counts.get(p.as_slice()) {
                return Err(GraphError::InvalidPermutations(
                    "permutation set is not closed under inverses".into(),
                ));
            }
        }
        let degree = perms.len();
        let mut targets = Vec::with_capacity(n * degree);
        for x in 0..n {
            for p in perms {
                targets.push(p[x] as u32);
            }
        }
        let mut h = Sha256::new();
        for p in perms {
            h.update(format!("{p:?}\n").as_bytes());
        }
        let meta = GraphMeta {
            action: "permutation".into(),
            generators: label.into(),
            modulus: 0,
            fingerprint: hex::encode(h.finalize()),
            vertex_transitive: false,
        };
        let labels = (0..n as u32).map(|i| vec![i]).collect();
        Ok(Self::assemble(degree, targets, labels, meta))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `r = |S|`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn meta(&self) -> &GraphMeta {
        &self.meta
    }

    pub fn labels(&self) -> &[Vec<u32>] {
        &self.labels
    }

    /// `s_j · x` for every generator `j`, in generator order.
    pub fn neighbors(&self, x: usize) -> &[u32] {
        &self.targets[x * self.degree..(x + 1) * self.degree]
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// The permutation `x ↦ s_j · x` of the vertex set.
    pub fn generator_permutation(&self, j: usize) -> Vec<usize> {
        assert!(j < self.degree);
        (0..self.n)
            .map(|x| self.targets[x * self.degree + j] as usize)
            .collect()
    }

    /// `(r·I − A) v`.
    pub fn laplacian_apply(&self, v: &[f64]) -> Result<Vec<f64>, GraphError> {
        let mut out = vec![0.0; self.n];
        self.laplacian_apply_into(v, &mut out)?;
        Ok(out)
    }

    /// `(r·I − A) v` written into `out`, accumulated in vertex order.
    pub fn laplacian_apply_into(&self, v: &[f64], out: &mut [f64]) -> Result<(), GraphError> {
        if v.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                got: v.len(),
            });
        }
        if out.len() != self.n {
            return Err(GraphError::LengthMismatch {
                expected: self.n,
                got: out.len(),
            });
        }
        let r = self.degree as f64;
        for (x, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &y in self.neighbors(x) {
                acc += v[y as usize];
            }
            *o = r * v[x] - acc;
        }
        Ok(())
    }

    /// Dense Laplacian, row-major. Only sensible for small `n`.
    pub fn dense_laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for x in 0..n {
            m[x * n + x] += self.degree as f64;
            for &y in self.neighbors(x) {
                m[x * n + y as usize] -= 1.0;
            }
        }
        m
    }
}

/// Cayley graph: vertices are the group elements in BFS order, edges
/// `x → s x`.
pub fn cayley_graph(gens: &GeneratorSet, cap: usize) -> Result<RegularMultigraph, GraphError> {
    let table = enumerate_group(gens, cap)?;
    let degree = gens.len();
    let mut targets = Vec::with_capacity(table.len() * degree);
    for x in table.elements() {
        for s in gens.iter() {
            let y = table.position(&s.mul(x)).expect("table is closed");
            targets.push(y as u32);
        }
    }
    let labels = table
        .elements()
        .iter()
        .map(|m| m.entries().to_vec())
        .collect();
    let meta = GraphMeta {
        action: GroupAction::LeftTranslation.descriptor(),
        generators: gens.label().to_string(),
        modulus: gens.modulus(),
        fingerprint: generator_fingerprint(gens),
        vertex_transitive: true,
    };
    Ok(RegularMultigraph::assemble(degree, targets, labels, meta))
}

/// Schreier graph on the orbit of `basepoint` (the action's canonical
/// basepoint when `None`), vertices in BFS discovery order.
pub fn schreier_graph(
    gens: &GeneratorSet,
    action: &GroupAction,
    basepoint: Option<&[u32]>,
    cap: usize,
) -> Result<RegularMultigraph, GraphError> {
    let dim = gens.dim();
    let modulus = gens.modulus();
    let start = match basepoint {
        Some(p) => action.canonical_point(dim, modulus, p)?,
        None => action.default_basepoint(dim, modulus),
    };
    let prepared = gens
        .iter()
        .map(|s| action.prepare(s))
        .collect::<Result<Vec<_>, _>>()?;
    let degree = gens.len();
    let mut labels = vec![start.clone()];
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    index.insert(start, 0);
    let mut targets = Vec::new();
    let mut head = 0;
    while head < labels.len() {
        let x = labels[head].clone();
        head += 1;
        for s in &prepared {
            let y = action.act(s, &x, modulus);
            let next = labels.len() as u32;
            let id = *index.entry(y).or_insert_with_key(|y| {
                labels.push(y.clone());
                next
            });
            if labels.len() > cap {
                return Err(GraphError::OrbitExceedsCap { cap });
            }
            targets.push(id);
        }
    }
    let meta = GraphMeta {
        action: action.descriptor(),
        generators: gens.label().to_string(),
        modulus,
        fingerprint: generator_fingerprint(gens),
        vertex_transitive: matches!(action, GroupAction::LeftTranslation),
    };
    Ok(RegularMultigraph::assemble(degree, targets, labels, meta))
}

/// Cayley graph of `Z/nZ` with the given steps (made inverse-closed).
pub fn circulant_graph(n: usize, steps: &[usize]) -> Result<RegularMultigraph, GraphError> {
    if n == 0 {
        return Err(GraphError::InvalidPermutations("empty point set".into()));
    }
    let mut all: Vec<usize> = Vec::new();
    for &k in steps {
        for k in [k % n, (n - k % n) % n] {
            if !all.contains(&k) {
                all.push(k);
            }
        }
    }
    let perms: Vec<Vec<usize>> = all
        .iter()
        .map(|&k| (0..n).map(|x| (x + k) % n).collect())
        .collect();
    let mut g = RegularMultigraph::from_permutations(&perms, &format!("circulant-{n}"))?;
    g.meta.action = "cyclic-translation".into();
    g.meta.vertex_transitive = true;
    Ok(g)
}

/// `C_n` as the Cayley graph of `Z/nZ` with `{±1}`.
pub fn cycle_graph(n: usize) -> Result<RegularMultigraph, GraphError> {
    circulant_graph(n, &[1])
}

/// `K_n` as the Cayley graph of `Z/nZ` with every nonzero element.
pub fn complete_graph(n: usize) -> Result<RegularMultigraph, GraphError> {
    let steps: Vec<usize> = (1..n).collect();
    circulant_graph(n, &steps)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::algebra::{catalog_generators, symmetrize, Catalog, Matrix, DEFAULT_CAP};

    fn row_sums_vanish(g: &RegularMultigraph) -> bool {
        let ones = vec![1.0; g.n()];
        g.laplacian_apply(&ones).unwrap().iter().all(|&x| x == 0.0)
    }

    fn is_symmetric(g: &RegularMultigraph) -> bool {
        let n = g.n();
        let mut counts = HashMap::new();
        for x in 0..n {
            for &y in g.neighbors(x) {
                *counts.entry((x, y as usize)).or_insert(0i64) += 1;
            }
        }
        counts
            .iter()
            .all(|(&(x, y), &c)| counts.get(&(y, x)).copied() == Some(c))
    }

    #[test]
    fn cyclic_transvection_group_gives_cycle() {
        for ell in [5u32, 7, 11] {
            let u = Matrix::from_rows(ell, &[&[1, 1], &[0, 1]]).unwrap();
            let gens = symmetrize(&[u], "u").unwrap();
            let g = cayley_graph(&gens, DEFAULT_CAP).unwrap();
            assert_eq!(g.n(), ell as usize);
            assert_eq!(g.degree(), 2);
            // every vertex has two distinct neighbours and the graph is one cycle
            for x in 0..g.n() {
                let nb = g.neighbors(x);
                assert_ne!(nb[0], nb[1]);
            }
            assert!(g.is_connected());
        }
    }

    #[test]
    fn sl2_3_cayley_graph() {
        let gens = catalog_generators(&Catalog::Sl2Elementary, 3).unwrap();
        let g = cayley_graph(&gens, DEFAULT_CAP).unwrap();
        assert_eq!(g.n(), 24);
        assert_eq!(g.degree(), 4);
        assert!(row_sums_vanish(&g));
        assert!(is_symmetric(&g));
    }

    #[test]
    fn trivial_group_single_loop() {
        let gens = symmetrize(&[Matrix::identity(2, 7)], "id").unwrap();
        let g = cayley_graph(&gens, 10).unwrap();
        assert_eq!(g.n(), 1);
        assert_eq!(g.degree(), 1);
        assert_eq!(g.neighbors(0), &[0]);
        assert_eq!(g.laplacian_apply(&[3.5]).unwrap(), vec![0.0]);
    }

    #[test]
    fn schreier_at_identity_equals_cayley() {
        for ell in [3u32, 5, 7] {
            let gens = catalog_generators(&Catalog::Gamma2Legendre, ell).unwrap();
            let c = cayley_graph(&gens, DEFAULT_CAP).unwrap();
            let s =
                schreier_graph(&gens, &GroupAction::LeftTranslation, None, DEFAULT_CAP).unwrap();
            assert_eq!(c, s);
        }
    }

    #[test]
    fn orbit_sizes() {
        for ell in [3u32, 5, 7, 11, 13] {
            let gens = catalog_generators(&Catalog::Sl2Elementary, ell).unwrap();
            let p1 =
                schreier_graph(&gens, &GroupAction::ProjectiveLine, None, DEFAULT_CAP).unwrap();
            assert_eq!(p1.n(), ell as usize + 1);
            let nz =
                schreier_graph(&gens, &GroupAction::NonzeroVectors, None, DEFAULT_CAP).unwrap();
            assert_eq!(nz.n(), (ell * ell - 1) as usize);
            for g in [&p1, &nz] {
                assert!(row_sums_vanish(g));
                assert!(is_symmetric(g));
            }
        }
    }

    #[test]
    fn projective_line_basepoint_is_normalized() {
        let gens = catalog_generators(&Catalog::Sl2Elementary, 5).unwrap();
        let g = schreier_graph(
            &gens,
            &GroupAction::ProjectiveLine,
            Some(&[3, 0]),
            DEFAULT_CAP,
        )
        .unwrap();
        assert_eq!(g.labels()[0], vec![1, 0]);
        assert_eq!(g.n(), 6);
    }

    #[test]
    fn diagonal_quotient_orbit_is_sl2() {
        let gens = catalog_generators(&Catalog::ProductSl2DiagonalTest, 5).unwrap();
        let g = schreier_graph(&gens, &GroupAction::DiagonalQuotient, None, DEFAULT_CAP).unwrap();
        assert_eq!(g.n(), 120);
        assert!(row_sums_vanish(&g));
        assert!(is_symmetric(&g));
    }

    #[test]
    fn borel_coset_graph_matches_projective_line() {
        let ell = 7;
        let gens = catalog_generators(&Catalog::Sl2Elementary, ell).unwrap();
        let sl2 = Arc::new(enumerate_group(&gens, DEFAULT_CAP).unwrap());
        // stabilizer of the line [1:0] = upper-triangular matrices
        let borel: Vec<Matrix> = sl2
            .elements()
            .iter()
            .filter(|m| m.get(1, 0) == 0)
            .cloned()
            .collect();
        let borel = Arc::new(
            crate::algebra::subgroup_closure(&borel, 2, ell, "borel", DEFAULT_CAP).unwrap(),
        );
        assert_eq!(borel.len(), 42);
        let action = GroupAction::cosets(sl2, borel).unwrap();
        let g = schreier_graph(&gens, &action, None, DEFAULT_CAP).unwrap();
        assert_eq!(g.n(), 8);
        assert!(row_sums_vanish(&g));
    }

    #[test]
    fn cap_and_basepoint_errors() {
        let gens = catalog_generators(&Catalog::Sl2Elementary, 7).unwrap();
        assert!(matches!(
            schreier_graph(&gens, &GroupAction::NonzeroVectors, None, 10),
            Err(GraphError::OrbitExceedsCap { cap: 10 })
        ));
        assert!(matches!(
            schreier_graph(&gens, &GroupAction::NonzeroVectors, Some(&[0, 0]), 100),
            Err(GraphError::BasepointOutsideDomain(_))
        ));
        assert!(matches!(
            cayley_graph(&gens, 10),
            Err(GraphError::Algebra(_))
        ));
    }

    #[test]
    fn laplacian_examples() {
        let c4 = cycle_graph(4).unwrap();
        assert_eq!(
            c4.laplacian_apply(&[1.0, -1.0, 1.0, -1.0]).unwrap(),
            vec![4.0, -4.0, 4.0, -4.0]
        );
        assert_eq!(c4.laplacian_apply(&[1.0; 4]).unwrap(), vec![0.0; 4]);
        assert!(matches!(
            c4.laplacian_apply(&[1.0; 3]),
            Err(GraphError::LengthMismatch {
                expected: 4,
                got: 3
            })
        ));
    }

    #[test]
    fn permutation_graphs() {
        // two disjoint triangles: the 3-cycles (0 1 2)(3 4 5) and their inverse
        let p = vec![1, 2, 0, 4, 5, 3];
        let q = vec![2, 0, 1, 5, 3, 4];
        let g = RegularMultigraph::from_permutations(&[p.clone(), q], "two-triangles").unwrap();
        assert_eq!(g.components(), 2);
        assert!(!g.is_connected());
        assert!(RegularMultigraph::from_permutations(&[p], "half").is_err());
        assert!(RegularMultigraph::from_permutations(&[vec![0, 0]], "bad").is_err());
    }

    #[test]
    fn small_circulants() {
        let c2 = cycle_graph(2).unwrap();
        assert_eq!(c2.degree(), 1);
        let k5 = complete_graph(5).unwrap();
        assert_eq!(k5.degree(), 4);
        assert!(row_sums_vanish(&k5));
    }
}
