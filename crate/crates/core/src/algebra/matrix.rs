use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;

/// Largest modulus accepted. Keeps every partial dot product inside a `u64`.
pub const MAX_MODULUS: u32 = 1 << 16;

/// Deterministic trial-division primality test; moduli are small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub(crate) fn check_modulus(modulus: u32) -> Result<(), AlgebraError> {
    if !is_prime(modulus as u64) {
        return Err(AlgebraError::NotPrime(modulus as u64));
    }
    if modulus >= MAX_MODULUS {
        return Err(AlgebraError::ModulusTooLarge(modulus));
    }
    Ok(())
}

/// Square matrix over the prime field F_ℓ.
///
/// Entries are stored row-major and always reduced into `[0, ℓ)`, so the
/// derived `Hash`/`Eq` act on the canonical form.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    modulus: u32,
    entries: Vec<u32>,
}

impl Matrix {
    /// Builds a matrix from row-major integer entries, reducing them mod ℓ.
    pub fn new(dim: usize, modulus: u32, entries: &[i64]) -> Result<Self, AlgebraError> {
        check_modulus(modulus)?;
        if dim == 0 || entries.len() != dim * dim {
            return Err(AlgebraError::BadShape {
                dim,
                len: entries.len(),
            });
        }
        let m = modulus as i64;
        let entries = entries.iter().map(|&e| e.rem_euclid(m) as u32).collect();
        Ok(Self {
            dim,
            modulus,
            entries,
        })
    }

    pub fn from_rows(modulus: u32, rows: &[&[i64]]) -> Result<Self, AlgebraError> {
        let dim = rows.len();
        let flat: Vec<i64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(AlgebraError::BadShape {
                dim,
                len: flat.len(),
            });
        }
        Self::new(dim, modulus, &flat)
    }

    /// Wraps entries that are already reduced. Only for internal callers that
    /// produced them through field arithmetic.
    pub(crate) fn from_reduced(dim: usize, modulus: u32, entries: Vec<u32>) -> Self {
        debug_assert_eq!(entries.len(), dim * dim);
        debug_assert!(entries.iter().all(|&e| e < modulus));
        Self {
            dim,
            modulus,
            entries,
        }
    }

    pub fn identity(dim: usize, modulus: u32) -> Self {
        let mut entries = vec![0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1 % modulus;
        }
        Self {
            dim,
            modulus,
            entries,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> u32 {
        self.entries[row * self.dim + col]
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| self.get(i, j) == if i == j { 1 } else { 0 }))
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.dim == other.dim && self.modulus == other.modulus
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert!(self.same_shape(rhs), "matrix shape mismatch");
        Matrix::from_reduced(
            self.dim,
            self.modulus,
            mul_entries(self.dim, self.modulus, &self.entries, &rhs.entries),
        )
    }

    /// Matrix times column vector.
    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        apply_entries(self.dim, self.modulus, &self.entries, v)
    }

    pub fn pow(&self, mut exp: u64) -> Matrix {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.dim, self.modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `g ≠ 1` and `g^p = 1`; for prime `p` this is exactly "order p".
    pub fn has_prime_order(&self, p: u64) -> bool {
        !self.is_identity() && self.pow(p).is_identity()
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.dim;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[j * n + i] = self.entries[i * n + j];
            }
        }
        Matrix::from_reduced(n, self.modulus, entries)
    }

    pub fn det(&self) -> u32 {
        let n = self.dim;
        let p = self.modulus as u64;
        let mut a: Vec<u64> = self.entries.iter().map(|&e| e as u64).collect();
        let mut det = 1u64;
        for col in 0..n {
            let Some(pivot) = (col..n).find(|&r| a[r * n + col] != 0) else {
                return 0;
            };
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = (p - det) % p;
            }
            let pv = a[col * n + col];
            det = det * pv % p;
            let inv = mod_inverse(pv, p);
            for r in col + 1..n {
                let f = a[r * n + col] * inv % p;
                if f == 0 {
                    continue;
                }
                for k in col..n {
                    a[r * n + k] = (a[r * n + k] + p * p - f * a[col * n + k]) % p;
                }
            }
        }
        det as u32
    }

    /// Gauss–Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.dim;
        let p = self.modulus as u64;
        let w = 2 * n;
        let mut a = vec![0u64; n * w];
        for i in 0..n {
            for j in 0..n {
                a[i * w + j] = self.entries[i * n + j] as u64;
            }
            a[i * w + n + i] = 1 % p;
        }
        for col in 0..n {
            let pivot = (col..n).find(|&r| a[r * w + col] != 0)?;
            if pivot != col {
                for k in 0..w {
                    a.swap(pivot * w + k, col * w + k);
                }
            }
            let inv = mod_inverse(a[col * w + col], p);
            for k in 0..w {
                a[col * w + k] = a[col * w + k] * inv % p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[r * w + col];
                if f == 0 {
                    continue;
                }
                for k in 0..w {
                    a[r * w + k] = (a[r * w + k] + p * p - f * a[col * w + k]) % p;
                }
            }
        }
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * w + n + j] as u32)
            .collect();
        Some(Matrix::from_reduced(n, self.modulus, entries))
    }

    /// `diag(a, b)` as a `(dim_a + dim_b)`-square matrix.
    pub fn block_diagonal(a: &Matrix, b: &Matrix) -> Matrix {
        assert_eq!(a.modulus, b.modulus, "block_diagonal: mixed moduli");
        let n = a.dim + b.dim;
        let mut entries = vec![0; n * n];
        for i in 0..a.dim {
            for j in 0..a.dim {
                entries[i * n + j] = a.get(i, j);
            }
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                entries[(a.dim + i) * n + a.dim + j] = b.get(i, j);
            }
        }
        Matrix::from_reduced(n, a.modulus, entries)
    }

    /// The `size × size` sub-block starting at `(offset, offset)`.
    pub fn diagonal_block(&self, offset: usize, size: usize) -> Matrix {
        assert!(offset + size <= self.dim);
        let entries = (0..size)
            .flat_map(|i| (0..size).map(move |j| (i, j)))
            .map(|(i, j)| self.get(offset + i, offset + j))
            .collect();
        Matrix::from_reduced(size, self.modulus, entries)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} mod {}", self.modulus)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.dim {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.dim {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> u64 {
    // Fermat; p is prime and a ≠ 0 mod p.
    let mut base = a % p;
    let mut exp = p - 2;
    let mut acc = 1 % p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

pub(crate) fn mul_entries(n: usize, modulus: u32, a: &[u32], b: &[u32]) -> Vec<u32> {
    let p = modulus as u64;
    let mut out = vec![0u32; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0u64;
            for k in 0..n {
                acc += a[i * n + k] as u64 * b[k * n + j] as u64;
            }
            out[i * n + j] = (acc % p) as u32;
        }
    }
    out
}

pub(crate) fn apply_entries(n: usize, modulus: u32, a: &[u32], v: &[u32]) -> Vec<u32> {
    let p = modulus as u64;
    (0..n)
        .map(|i| {
            let acc: u64 = (0..n).map(|k| a[i * n + k] as u64 * v[k] as u64).sum();
            (acc % p) as u32
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]], p: u32) -> Matrix {
        Matrix::from_rows(p, rows).unwrap()
    }

    #[test]
    fn reduces_negative_entries() {
        let a = m(&[&[-1, 6], &[7, 0]], 5);
        assert_eq!(a.entries(), &[4, 1, 2, 0]);
    }

    #[test]
    fn rejects_composite_modulus() {
        assert!(matches!(
            Matrix::new(2, 6, &[1, 0, 0, 1]),
            Err(AlgebraError::NotPrime(6))
        ));
    }

    #[test]
    fn determinant_and_inverse() {
        let a = m(&[&[2, 3, 1], &[4, 1, 0], &[5, 5, 6]], 7);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert!(inv.mul(&a).is_identity());
        // det = 2(6-0) - 3(24-0) + 1(20-5) = 12 - 72 + 15 = -45 ≡ 4 mod 7
        assert_eq!(a.det(), 4);
        let singular = m(&[&[1, 2], &[2, 4]], 5);
        assert_eq!(singular.det(), 0);
        assert!(singular.inverse().is_none());
    }

    #[test]
    fn order_test_for_transvection() {
        let u = m(&[&[1, 1], &[0, 1]], 7);
        assert!(u.has_prime_order(7));
        assert!(!u.has_prime_order(5));
        assert!(!Matrix::identity(2, 7).has_prime_order(7));
    }

    #[test]
    fn block_round_trip() {
        let a = m(&[&[1, 2], &[0, 1]], 5);
        let b = m(&[&[1, 0], &[3, 1]], 5);
        let d = Matrix::block_diagonal(&a, &b);
        assert_eq!(d.dim(), 4);
        assert_eq!(d.diagonal_block(0, 2), a);
        assert_eq!(d.diagonal_block(2, 2), b);
    }

    #[test]
    fn primality() {
        let primes: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
    }
}
