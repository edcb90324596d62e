//! Exact integer and rational linear algebra over the lattice `N` and its
//! dual `M`.
//!
//! Coordinates are always taken in the fixed ordered basis; lexicographic
//! comparisons therefore depend on that basis and nothing else.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

macro_rules! coord_vector {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Vec<BigInt>);

        impl $name {
            pub fn new(coords: Vec<BigInt>) -> Self {
                Self(coords)
            }

            pub fn from_i64s(coords: &[i64]) -> Self {
                Self(coords.iter().map(|&c| BigInt::from(c)).collect())
            }

            pub fn zero(dim: usize) -> Self {
                Self(vec![BigInt::zero(); dim])
            }

            pub fn coords(&self) -> &[BigInt] {
                &self.0
            }

            pub fn into_coords(self) -> Vec<BigInt> {
                self.0
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn is_zero(&self) -> bool {
                self.0.iter().all(Zero::is_zero)
            }

            /// Divides out the gcd of the coordinates. Returns the primitive
            /// vector together with the (positive) content.
            pub fn primitive(&self) -> Result<(Self, BigInt)> {
                let content = self
                    .0
                    .iter()
                    .fold(BigInt::zero(), |acc, c| acc.gcd(c));
                if content.is_zero() {
                    return Err(Error::ZeroVector);
                }
                let coords = self.0.iter().map(|c| c / &content).collect();
                Ok((Self(coords), content))
            }

            pub fn is_primitive(&self) -> bool {
                matches!(self.primitive(), Ok((_, c)) if c.is_one())
            }

            pub fn lex_compare(&self, other: &Self) -> Result<Ordering> {
                check_dims(self.dim(), other.dim())?;
                Ok(self.0.cmp(&other.0))
            }

            pub fn add(&self, other: &Self) -> Self {
                debug_assert_eq!(self.dim(), other.dim());
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            pub fn neg(&self) -> Self {
                Self(self.0.iter().map(|c| -c).collect())
            }

            pub fn scale(&self, k: &BigInt) -> Self {
                Self(self.0.iter().map(|c| c * k).collect())
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "(")?;
                for (i, c) in self.0.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
        }
    };
}

coord_vector!(LatticeVector);
coord_vector!(Covector);

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// The natural pairing `M x N -> Z`.
pub fn pairing(m: &Covector, v: &LatticeVector) -> Result<BigInt> {
    check_dims(m.dim(), v.dim())?;
    Ok(m.coords().iter().zip(v.coords()).map(|(a, b)| a * b).sum())
}

pub fn rational_pairing(m: &[Rational], v: &LatticeVector) -> Rational {
    m.iter()
        .zip(v.coords())
        .map(|(a, b)| a * Rational::from_integer(b.clone()))
        .sum()
}

/// Determinant of the square integer matrix whose columns are `vectors`,
/// computed by fraction-free (Bareiss) elimination.
pub fn determinant(vectors: &[LatticeVector]) -> Result<BigInt> {
    let n = vectors.len();
    for v in vectors {
        check_dims(n, v.dim())?;
    }
    if n == 0 {
        return Ok(BigInt::one());
    }
    // a[row][col] with the vectors as columns.
    let mut a: Vec<Vec<BigInt>> = (0..n)
        .map(|r| vectors.iter().map(|v| v.coords()[r].clone()).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    Ok(sign * &a[n - 1][n - 1])
}

/// Solves `rows * x = rhs` for the unknown `x` where `rows` is an `r x k`
/// rational matrix. Returns `Err(DependentColumns)` when the columns are
/// dependent and `Ok(None)` when the system is inconsistent.
pub fn solve_rational(rows: &[Vec<Rational>], rhs: &[Rational]) -> Result<Option<Vec<Rational>>> {
    let r = rows.len();
    check_dims(r, rhs.len())?;
    let k = rows.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = rows
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut row = row.clone();
            row.push(b.clone());
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..k {
        let Some(p) = (pivot_row..r).find(|&i| !aug[i][col].is_zero()) else {
            return Err(Error::DependentColumns);
        };
        aug.swap(pivot_row, p);
        let inv = aug[pivot_row][col].recip();
        for v in aug[pivot_row].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..r {
            if i != pivot_row && !aug[i][col].is_zero() {
                let factor = aug[i][col].clone();
                for j in col..=k {
                    let t = &factor * &aug[pivot_row][j];
                    aug[i][j] -= t;
                }
            }
        }
        pivot_row += 1;
    }
    if aug[pivot_row..].iter().any(|row| !row[k].is_zero()) {
        return Ok(None);
    }
    Ok(Some(aug[..k].iter().map(|row| row[k].clone()).collect()))
}

/// Expresses `target` as a rational combination of `columns`.
///
/// `Ok(None)` means `target` lies outside the column span.
pub fn solve_exact(columns: &[LatticeVector], target: &LatticeVector) -> Result<Option<Vec<Rational>>> {
    let n = target.dim();
    for c in columns {
        check_dims(n, c.dim())?;
    }
    let rows: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            columns
                .iter()
                .map(|c| Rational::from_integer(c.coords()[i].clone()))
                .collect()
        })
        .collect();
    let rhs: Vec<Rational> = target
        .coords()
        .iter()
        .map(|c| Rational::from_integer(c.clone()))
        .collect();
    if columns.is_empty() {
        return Ok(if target.is_zero() { Some(vec![]) } else { None });
    }
    solve_rational(&rows, &rhs)
}

/// A covector vanishing on the `n-1` given vectors: the signed maximal
/// minors of the `(n-1) x n` matrix. Zero iff the vectors are dependent.
pub fn kernel_covector(vectors: &[LatticeVector], n: usize) -> Result<Covector> {
    check_dims(n - 1, vectors.len())?;
    for v in vectors {
        check_dims(n, v.dim())?;
    }
    let coords = (0..n)
        .map(|skip| {
            // Minor obtained by deleting coordinate `skip`; columns are the vectors.
            let minor: Vec<LatticeVector> = vectors
                .iter()
                .map(|v| {
                    LatticeVector::new(
                        v.coords()
                            .iter()
                            .enumerate()
                            .filter(|&(i, _)| i != skip)
                            .map(|(_, c)| c.clone())
                            .collect(),
                    )
                })
                .collect();
            let d = determinant(&minor)?;
            Ok(if skip % 2 == 0 { d } else { -d })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Covector::new(coords))
}

/// Inverse of a unimodular integer matrix given by its columns. Row `i` of
/// the result is the `i`-th dual basis covector, so coordinates of `x` in the
/// column basis are `inverse[i] . x`.
pub fn unimodular_inverse(columns: &[LatticeVector]) -> Result<Vec<Covector>> {
    let n = columns.len();
    let det = determinant(columns)?;
    if det.abs() != BigInt::one() {
        return Err(Error::NotUnimodular(det.to_string()));
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        // The kernel of all columns except i, normalized to pair to 1 with column i.
        let others: Vec<LatticeVector> = columns
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, c)| c.clone())
            .collect();
        let k = if n == 1 {
            Covector::from_i64s(&[1])
        } else {
            kernel_covector(&others, n)?
        };
        let p = pairing(&k, &columns[i])?;
        // |p| = |det| = 1
        rows.push(k.scale(&p));
    }
    Ok(rows)
}

/// Coordinates of `x` in a unimodular basis with precomputed inverse.
pub fn coordinates_in(inverse: &[Covector], x: &LatticeVector) -> Vec<BigInt> {
    inverse
        .iter()
        .map(|row| pairing(row, x).expect("dimension checked by caller"))
        .collect()
}
