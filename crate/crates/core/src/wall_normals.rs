//! Primitive wall normals, sign-normalized and lexicographically ordered.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{kernel_covector, pairing, Covector, LatticeVector, Rational};
use crate::fan_model::{Fan, Wall};

/// Distinct wall normals in strictly increasing lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalList(Vec<Covector>);

impl NormalList {
    /// Sorts and deduplicates; each normal must already be primitive with a
    /// positive leading coordinate.
    pub fn new(mut normals: Vec<Covector>) -> Result<Self> {
        for m in &normals {
            if !m.is_primitive() || !leading_positive(m) {
                return Err(Error::InvariantViolation(format!(
                    "normal {m} is not primitive with positive leading coordinate"
                )));
            }
        }
        normals.sort();
        normals.dedup();
        Ok(Self(normals))
    }

    pub fn as_slice(&self) -> &[Covector] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Covector> {
        self.0.iter()
    }

    /// Rank of the normals viewed as rows of a matrix.
    pub fn rank(&self) -> usize {
        let Some(first) = self.0.first() else { return 0 };
        let n = first.dim();
        let mut rows: Vec<Vec<Rational>> = self
            .0
            .iter()
            .map(|m| m.coords().iter().map(|c| Rational::from_integer(c.clone())).collect())
            .collect();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
                continue;
            };
            rows.swap(rank, p);
            for i in rank + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let f = &rows[i][col] / &rows[rank][col];
                for j in col..n {
                    let t = &f * &rows[rank][j];
                    rows[i][j] -= t;
                }
            }
            rank += 1;
        }
        rank
    }
}

impl<'a> IntoIterator for &'a NormalList {
    type Item = &'a Covector;
    type IntoIter = std::slice::Iter<'a, Covector>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn leading_positive(m: &Covector) -> bool {
    m.coords().iter().find(|c| !c.is_zero()).is_some_and(Signed::is_positive)
}

/// The primitive covector cutting out the span of `wall`, with its first
/// nonzero coordinate positive.
pub fn wall_normal(fan: &Fan, wall: &Wall) -> Result<Covector> {
    let gens: Vec<LatticeVector> = fan.cone_generators(&wall.ray_indices);
    let k = kernel_covector(&gens, fan.dim())?;
    let (m, _) = k
        .primitive()
        .map_err(|_| Error::DegenerateWall(wall.ray_indices.clone()))?;
    let m = if leading_positive(&m) { m } else { m.neg() };
    debug_assert!(gens.iter().all(|g| pairing(&m, g).is_ok_and(|p| p.is_zero())));
    Ok(m)
}

pub fn ordered_normals(fan: &Fan) -> Result<NormalList> {
    let normals = fan
        .walls()?
        .iter()
        .map(|w| wall_normal(fan, w))
        .collect::<Result<Vec<_>>>()?;
    NormalList::new(normals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan_io::builtin;

    fn cv(c: &[i64]) -> Covector {
        Covector::from_i64s(c)
    }

    fn wall_at(fan: &Fan, rays: &[usize]) -> Wall {
        fan.walls().unwrap().into_iter().find(|w| w.ray_indices == rays).unwrap()
    }

    #[test]
    fn single_wall_normals() {
        let oda = builtin("oda75").unwrap();
        assert_eq!(wall_normal(&oda, &wall_at(&oda, &[0, 6])).unwrap(), cv(&[0, 1, 0]));
        assert_eq!(wall_normal(&oda, &wall_at(&oda, &[2, 5])).unwrap(), cv(&[1, 0, 0]));
        let p2 = builtin("p2").unwrap();
        assert_eq!(wall_normal(&p2, &wall_at(&p2, &[2])).unwrap(), cv(&[1, -1]));
    }

    #[test]
    fn oda_normal_list() {
        let oda = builtin("oda75").unwrap();
        let normals = ordered_normals(&oda).unwrap();
        let expected = [
            [0, 0, 1],
            [0, 1, -1],
            [0, 1, 0],
            [1, -1, -1],
            [1, -1, 0],
            [1, -1, 1],
            [1, 0, -1],
            [1, 0, 0],
            [1, 1, -1],
        ]
        .map(|c| cv(&c));
        assert_eq!(normals.as_slice(), &expected);
        assert_eq!(normals.rank(), 3);
    }

    #[test]
    fn surface_normal_lists() {
        let p2 = ordered_normals(&builtin("p2").unwrap()).unwrap();
        assert_eq!(p2.as_slice(), &[cv(&[0, 1]), cv(&[1, -1]), cv(&[1, 0])]);
        let p1p1 = ordered_normals(&builtin("p1p1").unwrap()).unwrap();
        assert_eq!(p1p1.as_slice(), &[cv(&[0, 1]), cv(&[1, 0])]);
    }

    #[test]
    fn normals_vanish_on_walls_and_span() {
        for name in ["oda75", "p3", "p1p1p1", "hexagon", "p2"] {
            let fan = builtin(name).unwrap();
            let walls = fan.walls().unwrap();
            for w in &walls {
                let m = wall_normal(&fan, w).unwrap();
                assert!(leading_positive(&m));
                for g in fan.cone_generators(&w.ray_indices) {
                    assert!(pairing(&m, &g).unwrap().is_zero());
                }
            }
            let normals = ordered_normals(&fan).unwrap();
            assert!(normals.len() <= walls.len());
            assert_eq!(normals.rank(), fan.dim(), "{name}");
            assert!(normals.as_slice().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn rejects_unnormalized_normals() {
        assert!(NormalList::new(vec![cv(&[-1, 0])]).is_err());
        assert!(NormalList::new(vec![cv(&[2, 0])]).is_err());
    }
}
