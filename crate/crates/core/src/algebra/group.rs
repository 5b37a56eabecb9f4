use std::collections::{HashMap, HashSet};

use serde::Serialize;

use super::matrix::{check_modulus, Matrix};
use super::AlgebraError;

/// Default ceiling on the number of group elements or orbit points.
pub const DEFAULT_CAP: usize = 2_000_000;

/// A generating set closed under inverses, without duplicates.
///
/// The first `inputs` entries are the user-supplied generators in their
/// given order; any missing inverses follow in the same order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorSet {
    generators: Vec<Matrix>,
    inputs: usize,
    label: String,
}

impl GeneratorSet {
    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Number of leading generators that came from the input list.
    pub fn input_count(&self) -> usize {
        self.inputs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn modulus(&self) -> u32 {
        self.generators[0].modulus()
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Matrix> {
        self.generators.iter()
    }
}

/// Closes `gens` under inversion: inputs first (deduplicated, in order),
/// then the inverses that are not already present, in corresponding order.
pub fn symmetrize(gens: &[Matrix], label: impl Into<String>) -> Result<GeneratorSet, AlgebraError> {
    let first = gens.first().ok_or(AlgebraError::EmptyGenerators)?;
    let mut inverses = Vec::with_capacity(gens.len());
    for (index, g) in gens.iter().enumerate() {
        if g.modulus() != first.modulus() {
            return Err(AlgebraError::MixedModuli {
                expected: first.modulus(),
                found: g.modulus(),
            });
        }
        if g.dim() != first.dim() {
            return Err(AlgebraError::MixedDimensions {
                expected: first.dim(),
                found: g.dim(),
            });
        }
        inverses.push(g.inverse().ok_or(AlgebraError::Singular { index })?);
    }

    let mut seen = HashSet::new();
    let mut generators = Vec::new();
    for g in gens {
        if seen.insert(g.clone()) {
            generators.push(g.clone());
        }
    }
    let inputs = generators.len();
    for inv in inverses {
        if seen.insert(inv.clone()) {
            generators.push(inv);
        }
    }
    Ok(GeneratorSet {
        generators,
        inputs,
        label: label.into(),
    })
}

/// A finite matrix group stored as its elements in BFS discovery order.
///
/// Position 0 is always the identity. Immutable once built.
#[derive(Clone, Debug)]
pub struct GroupTable {
    elements: Vec<Matrix>,
    index: HashMap<Matrix, usize>,
    generators: GeneratorSet,
}

impl GroupTable {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    /// Never true: a table holds at least the identity.
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn elements(&self) -> &[Matrix] {
        &self.elements
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.generators
    }

    pub fn position(&self, g: &Matrix) -> Option<usize> {
        self.index.get(g).copied()
    }

    pub fn contains(&self, g: &Matrix) -> bool {
        self.index.contains_key(g)
    }

    pub fn identity(&self) -> &Matrix {
        &self.elements[0]
    }

    pub fn dim(&self) -> usize {
        self.generators.dim()
    }

    pub fn modulus(&self) -> u32 {
        self.generators.modulus()
    }

    /// True when every element of `self` lies in `other`.
    pub fn is_subgroup_of(&self, other: &GroupTable) -> bool {
        self.elements.iter().all(|g| other.contains(g))
    }
}

/// Breadth-first closure of the identity under left multiplication by the
/// generators, visited in the generators' fixed order.
pub fn enumerate_group(gens: &GeneratorSet, cap: usize) -> Result<GroupTable, AlgebraError> {
    if gens.is_empty() {
        return Err(AlgebraError::EmptyGenerators);
    }
    if cap == 0 {
        return Err(AlgebraError::ZeroCap);
    }
    check_modulus(gens.modulus())?;
    let identity = Matrix::identity(gens.dim(), gens.modulus());
    let mut elements = vec![identity.clone()];
    let mut index = HashMap::new();
    index.insert(identity, 0);
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head].clone();
        head += 1;
        for s in gens.iter() {
            let y = s.mul(&x);
            if !index.contains_key(&y) {
                if elements.len() == cap {
                    return Err(AlgebraError::CapExceeded {
                        cap,
                        partial: elements.len(),
                    });
                }
                index.insert(y.clone(), elements.len());
                elements.push(y);
            }
        }
    }
    Ok(GroupTable {
        elements,
        index,
        generators: gens.clone(),
    })
}

/// Subgroup generated by `seeds` inside a group of the given shape. Seeds
/// need not be symmetric; an empty seed list yields the trivial group.
pub fn subgroup_closure(
    seeds: &[Matrix],
    dim: usize,
    modulus: u32,
    label: &str,
    cap: usize,
) -> Result<GroupTable, AlgebraError> {
    let gens = if seeds.is_empty() {
        symmetrize(&[Matrix::identity(dim, modulus)], label)?
    } else {
        symmetrize(seeds, label)?
    };
    enumerate_group(&gens, cap)
}

fn commutator(a: &Matrix, b: &Matrix, a_inv: &Matrix, b_inv: &Matrix) -> Matrix {
    a.mul(b).mul(a_inv).mul(b_inv)
}

/// `[G, G]` as the normal closure of the commutators of the generators.
pub fn commutator_subgroup(g: &GroupTable) -> Result<GroupTable, AlgebraError> {
    let gens = g.generators().generators();
    let invs: Vec<Matrix> = gens
        .iter()
        .map(|s| s.inverse().expect("invertible"))
        .collect();
    let mut seeds: Vec<Matrix> = Vec::new();
    let mut seen = HashSet::new();
    for i in 0..gens.len() {
        for j in 0..gens.len() {
            let c = commutator(&gens[i], &gens[j], &invs[i], &invs[j]);
            if !c.is_identity() && seen.insert(c.clone()) {
                seeds.push(c);
            }
        }
    }
    let cap = g.len();
    let mut h = subgroup_closure(&seeds, g.dim(), g.modulus(), "commutator", cap)?;
    // Normal closure: the seeds generate H, so H is normal once every
    // generator-conjugate of every seed lies in H.
    let mut cursor = 0;
    while cursor < seeds.len() {
        let x = seeds[cursor].clone();
        cursor += 1;
        for (s, s_inv) in gens.iter().zip(&invs) {
            let c = s.mul(&x).mul(s_inv);
            if !h.contains(&c) {
                seeds.push(c);
                h = subgroup_closure(&seeds, g.dim(), g.modulus(), "commutator", cap)?;
            }
        }
    }
    Ok(h)
}

/// `[G, G] = G`. The trivial group is perfect.
pub fn is_perfect(g: &GroupTable) -> bool {
    if g.is_trivial() {
        return true;
    }
    commutator_subgroup(g)
        .map(|h| h.len() == g.len())
        .unwrap_or(false)
}

fn check_plus_preconditions(g: &GroupTable, ell: u32) -> Result<(), AlgebraError> {
    if ell != g.modulus() {
        return Err(AlgebraError::ModulusMismatch {
            expected: g.modulus(),
            found: ell,
        });
    }
    // ℓ ≥ m − 1 makes "order ℓ" and "nontrivial unipotent" coincide.
    if (ell as usize) + 1 < g.dim() {
        return Err(AlgebraError::PrimeTooSmall { ell, dim: g.dim() });
    }
    Ok(())
}

/// `G⁺`: the subgroup generated by the elements of exact order ℓ.
pub fn plus_subgroup(g: &GroupTable, ell: u32) -> Result<GroupTable, AlgebraError> {
    check_plus_preconditions(g, ell)?;
    let mut seeds = Vec::new();
    let mut h = subgroup_closure(&seeds, g.dim(), ell, "plus-subgroup", g.len())?;
    for x in g.elements() {
        if !h.contains(x) && x.has_prime_order(ell as u64) {
            seeds.push(x.clone());
            h = subgroup_closure(&seeds, g.dim(), ell, "plus-subgroup", g.len())?;
            if h.len() == g.len() {
                break;
            }
        }
    }
    Ok(h)
}

/// `[G : G⁺]` is prime to ℓ.
pub fn quotient_index_prime_to_ell(g: &GroupTable, ell: u32) -> Result<bool, AlgebraError> {
    let plus = plus_subgroup(g, ell)?;
    debug_assert_eq!(g.len() % plus.len(), 0);
    Ok((g.len() / plus.len()) % ell as usize != 0)
}

/// `G = G⁺`.
pub fn is_generated_by_order_ell(g: &GroupTable, ell: u32) -> Result<bool, AlgebraError> {
    Ok(plus_subgroup(g, ell)?.len() == g.len())
}
