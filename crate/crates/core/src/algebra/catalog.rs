//! Named generator families used by experiment configs.
//!
//! The identifiers returned by [`Catalog::id`] are stable strings.

use serde::{Deserialize, Serialize};

use super::group::{symmetrize, GeneratorSet};
use super::matrix::{check_modulus, Matrix};
use super::AlgebraError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Catalog {
    /// `[[1,1],[0,1]]` and `[[1,0],[1,1]]`.
    Sl2Elementary,
    /// The level-2 Legendre generators `A = [[1,2],[0,1]]`, `B = [[1,0],[2,1]]`.
    Gamma2Legendre,
    /// Squares of the symplectic transvections along the standard chain
    /// `e_1, f_1, e_2 - e_1, f_2, …, e_g - e_{g-1}, f_g` in `Sp_2g`.
    Sp2gLevel2Transvections { genus: usize },
    /// Block-diagonal pairs `(A, B)` and `(B, AB)` in `SL_2 × SL_2`.
    ProductSl2DiagonalTest,
    /// Row-major integer matrices, reduced mod ℓ.
    Custom { dim: usize, matrices: Vec<Vec<i64>> },
}

impl Catalog {
    pub fn id(&self) -> &'static str {
        match self {
            Catalog::Sl2Elementary => "sl2-elementary",
            Catalog::Gamma2Legendre => "gamma2-legendre",
            Catalog::Sp2gLevel2Transvections { .. } => "sp2g-level2-transvections",
            Catalog::ProductSl2DiagonalTest => "product-sl2-diagonal-test",
            Catalog::Custom { .. } => "custom",
        }
    }

    /// Parses a catalog identifier. `genus` is required for the symplectic
    /// family and `custom` for the custom one.
    pub fn parse(
        id: &str,
        genus: Option<usize>,
        custom: Option<(usize, Vec<Vec<i64>>)>,
    ) -> Result<Self, AlgebraError> {
        match id {
            "sl2-elementary" => Ok(Catalog::Sl2Elementary),
            "gamma2-legendre" => Ok(Catalog::Gamma2Legendre),
            "sp2g-level2-transvections" => {
                let genus = genus.ok_or_else(|| {
                    AlgebraError::InvalidCatalog("sp2g-level2-transvections needs a genus g".into())
                })?;
                Ok(Catalog::Sp2gLevel2Transvections { genus })
            }
            "product-sl2-diagonal-test" => Ok(Catalog::ProductSl2DiagonalTest),
            "custom" => {
                let (dim, matrices) = custom.ok_or_else(|| {
                    AlgebraError::InvalidCatalog("custom catalog needs a matrix list".into())
                })?;
                Ok(Catalog::Custom { dim, matrices })
            }
            other => Err(AlgebraError::InvalidCatalog(format!(
                "unknown catalog id `{other}`"
            ))),
        }
    }

    /// Dimension of the generating matrices.
    pub fn dim(&self) -> usize {
        match self {
            Catalog::Sl2Elementary | Catalog::Gamma2Legendre => 2,
            Catalog::Sp2gLevel2Transvections { genus } => 2 * genus,
            Catalog::ProductSl2DiagonalTest => 4,
            Catalog::Custom { dim, .. } => *dim,
        }
    }
}

fn legendre_pair(ell: u32) -> Result<(Matrix, Matrix), AlgebraError> {
    Ok((
        Matrix::from_rows(ell, &[&[1, 2], &[0, 1]])?,
        Matrix::from_rows(ell, &[&[1, 0], &[2, 1]])?,
    ))
}

/// `x ↦ x + 2⟨x, v⟩ v` for the form `⟨x, y⟩ = xᵀ J y`, `J = [[0, I], [-I, 0]]`.
pub fn level2_transvection(genus: usize, v: &[i64], ell: u32) -> Result<Matrix, AlgebraError> {
    let n = 2 * genus;
    assert_eq!(v.len(), n);
    // J v
    let mut jv = vec![0i64; n];
    for i in 0..genus {
        jv[i] = v[genus + i];
        jv[genus + i] = -v[i];
    }
    let mut entries = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = i64::from(i == j) + 2 * v[i] * jv[j];
        }
    }
    Matrix::new(n, ell, &entries)
}

/// The standard symplectic form `J` reduced mod ℓ.
pub fn symplectic_form(genus: usize, ell: u32) -> Result<Matrix, AlgebraError> {
    let n = 2 * genus;
    let mut entries = vec![0i64; n * n];
    for i in 0..genus {
        entries[i * n + genus + i] = 1;
        entries[(genus + i) * n + i] = -1;
    }
    Matrix::new(n, ell, &entries)
}

fn chain_vectors(genus: usize) -> Vec<Vec<i64>> {
    let n = 2 * genus;
    let mut out = Vec::with_capacity(n);
    for i in 0..genus {
        let mut e = vec![0i64; n];
        e[i] = 1;
        if i > 0 {
            e[i - 1] = -1;
        }
        out.push(e);
        let mut f = vec![0i64; n];
        f[genus + i] = 1;
        out.push(f);
    }
    out
}

/// Symmetrized generators for a catalog entry at the prime ℓ.
pub fn catalog_generators(catalog: &Catalog, ell: u32) -> Result<GeneratorSet, AlgebraError> {
    check_modulus(ell)?;
    let label = catalog.id();
    let inputs = match catalog {
        Catalog::Sl2Elementary => vec![
            Matrix::from_rows(ell, &[&[1, 1], &[0, 1]])?,
            Matrix::from_rows(ell, &[&[1, 0], &[1, 1]])?,
        ],
        Catalog::Gamma2Legendre => {
            if ell == 2 {
                return Err(AlgebraError::EvenModulus(catalog.id()));
            }
            let (a, b) = legendre_pair(ell)?;
            vec![a, b]
        }
        Catalog::Sp2gLevel2Transvections { genus } => {
            if *genus == 0 {
                return Err(AlgebraError::InvalidCatalog(
                    "genus must be positive".into(),
                ));
            }
            if ell == 2 {
                return Err(AlgebraError::EvenModulus(catalog.id()));
            }
            chain_vectors(*genus)
                .iter()
                .map(|v| level2_transvection(*genus, v, ell))
                .collect::<Result<Vec<_>, _>>()?
        }
        Catalog::ProductSl2DiagonalTest => {
            if ell == 2 {
                return Err(AlgebraError::EvenModulus(catalog.id()));
            }
            let (a, b) = legendre_pair(ell)?;
            let ab = a.mul(&b);
            vec![
                Matrix::block_diagonal(&a, &b),
                Matrix::block_diagonal(&b, &ab),
            ]
        }
        Catalog::Custom { dim, matrices } => {
            if matrices.is_empty() {
                return Err(AlgebraError::EmptyGenerators);
            }
            matrices
                .iter()
                .enumerate()
                .map(|(index, entries)| {
                    if entries.len() != dim * dim {
                        return Err(AlgebraError::MalformedCustom {
                            index,
                            reason: format!(
                                "expected {} entries for a {dim}x{dim} matrix, got {}",
                                dim * dim,
                                entries.len()
                            ),
                        });
                    }
                    Matrix::new(*dim, ell, entries)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    symmetrize(&inputs, label)
}
