use std::sync::Arc;

use crate::algebra::{apply_entries, mod_inverse, mul_entries, GroupTable, Matrix};

use super::GraphError;

/// How a generator set acts on a finite point set.
///
/// Points are encoded as canonical `u32` tuples: matrix entries (row-major)
/// for matrix-valued points, coordinates for vectors, normalized so that the
/// first nonzero coordinate is 1 for lines.
#[derive(Clone, Debug)]
pub enum GroupAction {
    /// `s · x = s x` on group elements (Cayley graph at the identity).
    LeftTranslation,
    /// `s · [v] = [s v]` on lines of `F_ℓ^m`; for `m = 2` this is `P¹(F_ℓ)`.
    ProjectiveLine,
    /// `s · v = s v` on `F_ℓ^m ∖ {0}`.
    NonzeroVectors,
    /// `s · xH = (s x)H` on left cosets of a subgroup of a finite ambient
    /// group. Build with [`GroupAction::cosets`].
    CosetBySubgroup(Arc<CosetSpace>),
    /// Generators are block-diagonal `diag(a, b)` and act on `k×k` matrices by
    /// `x ↦ a x b⁻¹`, realizing `(G × G)/Δ` via `(a, b)Δ ↦ a b⁻¹`.
    DiagonalQuotient,
}

/// Left cosets of `subgroup` inside `ambient`; each coset is labelled by its
/// first element in the ambient BFS order.
#[derive(Debug)]
pub struct CosetSpace {
    ambient: Arc<GroupTable>,
    subgroup: Arc<GroupTable>,
    representative: Vec<usize>,
}

impl CosetSpace {
    pub fn ambient(&self) -> &GroupTable {
        &self.ambient
    }

    pub fn subgroup(&self) -> &GroupTable {
        &self.subgroup
    }

    pub fn index(&self) -> usize {
        self.ambient.len() / self.subgroup.len()
    }

    fn representative_of(&self, x: &[u32]) -> Option<usize> {
        let m = Matrix::from_reduced(self.ambient.dim(), self.ambient.modulus(), x.to_vec());
        self.ambient.position(&m).map(|i| self.representative[i])
    }
}

/// A generator preprocessed for repeated application.
pub(crate) enum PreparedGenerator {
    Matrix(Matrix),
    Diagonal { left: Matrix, right_inv: Matrix },
}

impl GroupAction {
    pub fn cosets(ambient: Arc<GroupTable>, subgroup: Arc<GroupTable>) -> Result<Self, GraphError> {
        if subgroup.dim() != ambient.dim() || subgroup.modulus() != ambient.modulus() {
            return Err(GraphError::InvalidAction(
                "subgroup and ambient group have different shapes".into(),
            ));
        }
        if !subgroup.is_subgroup_of(&ambient) {
            return Err(GraphError::InvalidAction(
                "subgroup is not contained in the ambient group".into(),
            ));
        }
        let mut representative = vec![usize::MAX; ambient.len()];
        for (i, x) in ambient.elements().iter().enumerate() {
            if representative[i] != usize::MAX {
                continue;
            }
            for h in subgroup.elements() {
                let j = ambient
                    .position(&x.mul(h))
                    .expect("ambient group is closed");
                representative[j] = i;
            }
        }
        Ok(GroupAction::CosetBySubgroup(Arc::new(CosetSpace {
            ambient,
            subgroup,
            representative,
        })))
    }

    pub fn descriptor(&self) -> String {
        match self {
            GroupAction::LeftTranslation => "left-translation".into(),
            GroupAction::ProjectiveLine => "projective-line".into(),
            GroupAction::NonzeroVectors => "nonzero-vectors".into(),
            GroupAction::CosetBySubgroup(c) => format!(
                "coset-by-subgroup(ambient={},subgroup={})",
                c.ambient.len(),
                c.subgroup.len()
            ),
            GroupAction::DiagonalQuotient => "diagonal-quotient".into(),
        }
    }

    /// Length of a point encoding for generators of dimension `dim`.
    fn point_len(&self, dim: usize) -> usize {
        match self {
            GroupAction::LeftTranslation | GroupAction::CosetBySubgroup(_) => dim * dim,
            GroupAction::ProjectiveLine | GroupAction::NonzeroVectors => dim,
            GroupAction::DiagonalQuotient => (dim / 2) * (dim / 2),
        }
    }

    pub(crate) fn prepare(&self, s: &Matrix) -> Result<PreparedGenerator, GraphError> {
        match self {
            GroupAction::DiagonalQuotient => {
                let n = s.dim();
                if n % 2 != 0 {
                    return Err(GraphError::InvalidAction(format!(
                        "diagonal-quotient needs even-dimensional generators, got {n}"
                    )));
                }
                let k = n / 2;
                let off_block_zero =
                    (0..n).all(|i| (0..n).all(|j| (i < k) == (j < k) || s.get(i, j) == 0));
                if !off_block_zero {
                    return Err(GraphError::InvalidAction(format!(
                        "generator {s} is not block diagonal"
                    )));
                }
                let left = s.diagonal_block(0, k);
                let right_inv = s
                    .diagonal_block(k, k)
                    .inverse()
                    .ok_or_else(|| GraphError::InvalidAction("singular block".into()))?;
                Ok(PreparedGenerator::Diagonal { left, right_inv })
            }
            GroupAction::CosetBySubgroup(c) => {
                if !c.ambient.contains(s) {
                    return Err(GraphError::InvalidAction(format!(
                        "generator {s} is not in the ambient group"
                    )));
                }
                Ok(PreparedGenerator::Matrix(s.clone()))
            }
            _ => Ok(PreparedGenerator::Matrix(s.clone())),
        }
    }

    /// Validates a basepoint and returns its canonical encoding.
    pub fn canonical_point(
        &self,
        dim: usize,
        modulus: u32,
        point: &[u32],
    ) -> Result<Vec<u32>, GraphError> {
        let outside = |why: &str| GraphError::BasepointOutsideDomain(format!("{point:?}: {why}"));
        if point.len() != self.point_len(dim) {
            return Err(outside("wrong length"));
        }
        if point.iter().any(|&x| x >= modulus) {
            return Err(outside("entries not reduced"));
        }
        match self {
            GroupAction::LeftTranslation => {
                let m = Matrix::from_reduced(dim, modulus, point.to_vec());
                if m.det() == 0 {
                    return Err(outside("singular matrix"));
                }
                Ok(point.to_vec())
            }
            GroupAction::DiagonalQuotient => {
                let m = Matrix::from_reduced(dim / 2, modulus, point.to_vec());
                if m.det() == 0 {
                    return Err(outside("singular matrix"));
                }
                Ok(point.to_vec())
            }
            GroupAction::NonzeroVectors => {
                if point.iter().all(|&x| x == 0) {
                    return Err(outside("zero vector"));
                }
                Ok(point.to_vec())
            }
            GroupAction::ProjectiveLine => {
                normalize_line(point, modulus).ok_or_else(|| outside("zero vector"))
            }
            GroupAction::CosetBySubgroup(c) => {
                let rep = c
                    .representative_of(point)
                    .ok_or_else(|| outside("not an element of the ambient group"))?;
                Ok(c.ambient.elements()[rep].entries().to_vec())
            }
        }
    }

    /// The canonical basepoint: identity, `e_1`, or the line `[1:0:…:0]`.
    pub fn default_basepoint(&self, dim: usize, modulus: u32) -> Vec<u32> {
        match self {
            GroupAction::LeftTranslation | GroupAction::CosetBySubgroup(_) => {
                Matrix::identity(dim, modulus).entries().to_vec()
            }
            GroupAction::DiagonalQuotient => Matrix::identity(dim / 2, modulus).entries().to_vec(),
            GroupAction::ProjectiveLine | GroupAction::NonzeroVectors => {
                let mut v = vec![0; dim];
                v[0] = 1;
                v
            }
        }
    }

    pub(crate) fn act(&self, s: &PreparedGenerator, point: &[u32], modulus: u32) -> Vec<u32> {
        match (self, s) {
            (GroupAction::LeftTranslation, PreparedGenerator::Matrix(m)) => {
                mul_entries(m.dim(), modulus, m.entries(), point)
            }
            (GroupAction::NonzeroVectors, PreparedGenerator::Matrix(m)) => {
                apply_entries(m.dim(), modulus, m.entries(), point)
            }
            (GroupAction::ProjectiveLine, PreparedGenerator::Matrix(m)) => {
                let w = apply_entries(m.dim(), modulus, m.entries(), point);
                normalize_line(&w, modulus).expect("invertible map keeps vectors nonzero")
            }
            (GroupAction::CosetBySubgroup(c), PreparedGenerator::Matrix(m)) => {
                let y = mul_entries(m.dim(), modulus, m.entries(), point);
                let rep = c.representative_of(&y).expect("ambient group is closed");
                c.ambient.elements()[rep].entries().to_vec()
            }
            (GroupAction::DiagonalQuotient, PreparedGenerator::Diagonal { left, right_inv }) => {
                let k = left.dim();
                let ax = mul_entries(k, modulus, left.entries(), point);
                mul_entries(k, modulus, &ax, right_inv.entries())
            }
            _ => unreachable!("generator prepared for a different action"),
        }
    }
}

/// Scales `v` so that its first nonzero coordinate is 1.
pub fn normalize_line(v: &[u32], modulus: u32) -> Option<Vec<u32>> {
    let lead = *v.iter().find(|&&x| x != 0)?;
    let p = modulus as u64;
    let inv = mod_inverse(lead as u64, p);
    Some(v.iter().map(|&x| ((x as u64 * inv) % p) as u32).collect())
}
