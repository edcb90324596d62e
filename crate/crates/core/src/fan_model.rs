//! Simplicial fans stored as rays plus maximal cones.
//!
//! Lower-dimensional cones are never stored; two-cones, walls and the
//! f-vector are derived from the maximal cones on demand. Ray indices are
//! append-only, so indices recorded before a star subdivision stay valid.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{
    coordinates_in, determinant, kernel_covector, pairing, solve_exact, unimodular_inverse,
    Covector, LatticeVector, Rational,
};
use crate::ratlp::{solve_feasibility, LinearSystem, LpOutcome};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fan {
    dim: usize,
    rays: Vec<LatticeVector>,
    cones: Vec<Vec<usize>>,
}

/// A codimension-one cone together with the two rays completing it to the
/// adjacent maximal cones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Wall {
    pub ray_indices: Vec<usize>,
    pub side_a: usize,
    pub side_b: usize,
}

/// `a + b = sum c_i r_i` across a wall.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallRelation {
    pub wall: Wall,
    pub coeffs: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FVector(pub Vec<usize>);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub smooth: bool,
    pub complete: bool,
    pub is_fan: bool,
    /// Whether the pairwise intersection check actually ran.
    pub fan_axiom_checked: bool,
    pub diagnostics: Vec<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.smooth && self.complete && self.is_fan
    }
}

impl Fan {
    /// Builds a fan after checking the structural invariants: ray dimension,
    /// primitivity, distinct rays, and cones of exactly `dim` distinct valid
    /// indices. Cone index sets are sorted.
    pub fn new(dim: usize, rays: Vec<LatticeVector>, cones: Vec<Vec<usize>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvariantViolation(format!(
                "ambient dimension must be at least 2, got {dim}"
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, r) in rays.iter().enumerate() {
            if r.dim() != dim {
                return Err(Error::InvariantViolation(format!(
                    "rays[{i}] has length {} in a dimension-{dim} fan",
                    r.dim()
                )));
            }
            if r.is_zero() {
                return Err(Error::InvariantViolation(format!("rays[{i}] is the zero vector")));
            }
            if !r.is_primitive() {
                return Err(Error::InvariantViolation(format!("rays[{i}] = {r} is not primitive")));
            }
            if !seen.insert(r.clone()) {
                return Err(Error::InvariantViolation(format!("rays[{i}] = {r} is a duplicate ray")));
            }
        }
        let mut sorted_cones = Vec::with_capacity(cones.len());
        let mut seen_cones = BTreeSet::new();
        for (k, mut cone) in cones.into_iter().enumerate() {
            cone.sort_unstable();
            cone.dedup();
            if cone.len() != dim {
                return Err(Error::InvariantViolation(format!(
                    "cones[{k}] has {} distinct indices, expected {dim}",
                    cone.len()
                )));
            }
            if let Some(&bad) = cone.iter().find(|&&i| i >= rays.len()) {
                return Err(Error::InvariantViolation(format!(
                    "cones[{k}] references ray {bad} but only {} rays exist",
                    rays.len()
                )));
            }
            if !seen_cones.insert(cone.clone()) {
                return Err(Error::InvariantViolation(format!("cones[{k}] is a duplicate cone")));
            }
            sorted_cones.push(cone);
        }
        Ok(Self { dim, rays, cones: sorted_cones })
    }

    pub fn from_i64s(dim: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Result<Self> {
        Self::new(
            dim,
            rays.iter().map(|r| LatticeVector::from_i64s(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[LatticeVector] {
        &self.rays
    }

    pub fn ray(&self, i: usize) -> &LatticeVector {
        &self.rays[i]
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn num_rays(&self) -> usize {
        self.rays.len()
    }

    pub fn ray_index(&self, v: &LatticeVector) -> Option<usize> {
        self.rays.iter().position(|r| r == v)
    }

    pub fn cone_generators(&self, cone: &[usize]) -> Vec<LatticeVector> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    /// All `k`-subsets of maximal cones, deduplicated and sorted.
    pub fn faces(&self, k: usize) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        for cone in &self.cones {
            for_each_subset(cone, k, &mut |s| {
                out.insert(s.to_vec());
            });
        }
        out
    }

    pub fn two_cones(&self) -> Vec<(usize, usize)> {
        self.faces(2).into_iter().map(|p| (p[0], p[1])).collect()
    }

    /// Maps each `(n-1)`-face to the rays completing it to a maximal cone.
    fn facet_incidence(&self) -> BTreeMap<Vec<usize>, Vec<usize>> {
        let mut map: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for cone in &self.cones {
            for skip in 0..cone.len() {
                let facet: Vec<usize> = cone
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, &r)| r)
                    .collect();
                map.entry(facet).or_default().push(cone[skip]);
            }
        }
        map
    }

    pub fn walls(&self) -> Result<Vec<Wall>> {
        self.facet_incidence()
            .into_iter()
            .map(|(facet, sides)| match sides.as_slice() {
                &[x, y] => Ok(Wall {
                    ray_indices: facet,
                    side_a: x.min(y),
                    side_b: x.max(y),
                }),
                _ => Err(Error::IncompleteFan(format!(
                    "face {facet:?} lies in {} maximal cones",
                    sides.len()
                ))),
            })
            .collect()
    }

    /// The integral relation `a + b = sum c_i r_i`, re-verified exactly.
    pub fn wall_relation(&self, wall: &Wall) -> Result<WallRelation> {
        let mut basis: Vec<LatticeVector> = self.cone_generators(&wall.ray_indices);
        basis.push(self.rays[wall.side_a].clone());
        let target = &self.rays[wall.side_b];
        let non_integral = || Error::NonIntegralRelation(wall.ray_indices.clone());
        let sol = match solve_exact(&basis, target) {
            Ok(Some(sol)) => sol,
            Ok(None) | Err(Error::DependentColumns) => return Err(non_integral()),
            Err(e) => return Err(e),
        };
        // b = sum c_i r_i - a, so the coefficient on a must be exactly -1.
        let (on_a, on_wall) = sol.split_last().expect("basis is nonempty");
        if *on_a != -Rational::one() || on_wall.iter().any(|c| !c.is_integer()) {
            return Err(non_integral());
        }
        let coeffs: Vec<BigInt> = on_wall.iter().map(|c| c.to_integer()).collect();
        let lhs = self.rays[wall.side_a].add(target);
        let rhs = wall
            .ray_indices
            .iter()
            .zip(&coeffs)
            .fold(LatticeVector::zero(self.dim), |acc, (&r, c)| acc.add(&self.rays[r].scale(c)));
        if lhs != rhs {
            return Err(non_integral());
        }
        Ok(WallRelation { wall: wall.clone(), coeffs })
    }

    pub fn f_vector(&self) -> FVector {
        FVector((1..=self.dim).map(|k| self.faces(k).len()).collect())
    }

    pub fn is_two_cone(&self, u: usize, v: usize) -> bool {
        u != v && self.cones.iter().any(|c| c.contains(&u) && c.contains(&v))
    }

    /// Star subdivision at `r_u + r_v`. The new ray is appended; each maximal
    /// cone containing both `u` and `v` is replaced in place by its `u -> s`
    /// copy, immediately followed by its `v -> s` copy.
    pub fn star_subdivide(&self, u: usize, v: usize) -> Result<(Fan, usize)> {
        if u >= self.rays.len() || v >= self.rays.len() || !self.is_two_cone(u, v) {
            return Err(Error::NotATwoCone(u, v));
        }
        let s = self.rays[u].add(&self.rays[v]);
        if !s.is_primitive() {
            return Err(Error::InvariantViolation(format!(
                "sum {s} of rays {u} and {v} is not primitive; the two-cone is not smooth"
            )));
        }
        let s_idx = self.rays.len();
        let mut rays = self.rays.clone();
        rays.push(s);
        let mut cones = Vec::with_capacity(self.cones.len() + 2);
        for cone in &self.cones {
            if cone.contains(&u) && cone.contains(&v) {
                for replaced in [u, v] {
                    let mut c: Vec<usize> = cone
                        .iter()
                        .map(|&r| if r == replaced { s_idx } else { r })
                        .collect();
                    c.sort_unstable();
                    cones.push(c);
                }
            } else {
                cones.push(cone.clone());
            }
        }
        Ok((Fan { dim: self.dim, rays, cones }, s_idx))
    }

    /// Inverse matrices of all maximal cones; `None` for non-unimodular cones.
    pub fn cone_inverses(&self) -> Vec<Option<Vec<Covector>>> {
        self.cones
            .iter()
            .map(|c| unimodular_inverse(&self.cone_generators(c)).ok())
            .collect()
    }

    /// Index of a maximal cone containing `x` (all coordinates `>= 0`), or,
    /// with `strict`, containing it in its interior (all `> 0`).
    pub fn locate(&self, inverses: &[Option<Vec<Covector>>], x: &LatticeVector, strict: bool) -> Option<usize> {
        inverses.iter().position(|inv| {
            inv.as_ref().is_some_and(|inv| {
                coordinates_in(inv, x)
                    .iter()
                    .all(|c| if strict { c.is_positive() } else { !c.is_negative() })
            })
        })
    }

    /// Samples integer points in `[-bound, bound]^n` from a deterministic
    /// linear congruential stream and returns those lying in no maximal cone.
    pub fn coverage_smoke_test(&self, samples: usize, bound: i64, seed: u64) -> Vec<LatticeVector> {
        let inverses = self.cone_inverses();
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) % (2 * bound as u64 + 1)) as i64 - bound
        };
        let mut uncovered = Vec::new();
        for _ in 0..samples {
            let p = LatticeVector::from_i64s(&(0..self.dim).map(|_| next()).collect::<Vec<_>>());
            if !p.is_zero() && self.locate(&inverses, &p, false).is_none() {
                uncovered.push(p);
            }
        }
        uncovered
    }
}

fn for_each_subset(items: &[usize], k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..items.len() {
            if items.len() - i < k - cur.len() {
                break;
            }
            cur.push(items[i]);
            rec(items, k, i + 1, cur, f);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut Vec::with_capacity(k), f);
}

/// Full validation including the pairwise face-intersection check.
pub fn validate_fan(fan: &Fan) -> ValidationReport {
    validate_fan_with(fan, true)
}

pub fn validate_fan_with(fan: &Fan, check_fan_axiom: bool) -> ValidationReport {
    let mut report = ValidationReport { smooth: true, complete: true, is_fan: true, ..Default::default() };
    for (k, cone) in fan.cones.iter().enumerate() {
        let det = determinant(&fan.cone_generators(cone)).expect("dimensions checked on construction");
        if det.abs() != BigInt::one() {
            report.smooth = false;
            report.diagnostics.push(format!("cone {k} {cone:?} has determinant {det}"));
        }
    }
    if fan.cones.is_empty() {
        report.complete = false;
        report.diagnostics.push("fan has no maximal cones".into());
    }
    for (facet, sides) in fan.facet_incidence() {
        if sides.len() != 2 {
            report.complete = false;
            report
                .diagnostics
                .push(format!("face {facet:?} lies in {} maximal cones, expected 2", sides.len()));
        }
    }
    if check_fan_axiom {
        report.fan_axiom_checked = true;
        for i in 0..fan.cones.len() {
            for j in i + 1..fan.cones.len() {
                if !cones_meet_in_common_face(fan, &fan.cones[i], &fan.cones[j]) {
                    report.is_fan = false;
                    report.diagnostics.push(format!(
                        "cones {i} {:?} and {j} {:?} do not intersect in a common face",
                        fan.cones[i], fan.cones[j]
                    ));
                }
            }
        }
    } else {
        report
            .diagnostics
            .push("warning: pairwise face-intersection check skipped".into());
    }
    report.complete &= report.is_fan;
    report
}

/// Looks for a covector vanishing on the shared generators and strictly
/// positive on the rest of `c1`, strictly negative on the rest of `c2`.
fn cones_meet_in_common_face(fan: &Fan, c1: &[usize], c2: &[usize]) -> bool {
    let n = fan.dim;
    let shared: Vec<usize> = c1.iter().copied().filter(|r| c2.contains(r)).collect();
    let only1: Vec<usize> = c1.iter().copied().filter(|r| !shared.contains(r)).collect();
    let only2: Vec<usize> = c2.iter().copied().filter(|r| !shared.contains(r)).collect();
    if shared.len() == n - 1 {
        let Ok(k) = kernel_covector(&fan.cone_generators(&shared), n) else {
            return false;
        };
        let a = pairing(&k, &fan.rays[only1[0]]).expect("same dimension");
        let b = pairing(&k, &fan.rays[only2[0]]).expect("same dimension");
        return (a.is_positive() && b.is_negative()) || (a.is_negative() && b.is_positive());
    }
    let mut sys = LinearSystem::new(n);
    let row = |r: usize, sign: i64| {
        fan.rays[r]
            .coords()
            .iter()
            .enumerate()
            .map(move |(i, c)| (i, Rational::from_integer(c * sign)))
            .collect::<Vec<_>>()
    };
    for &r in &shared {
        sys.push_eq(row(r, 1), Rational::zero());
    }
    for &r in &only1 {
        sys.push_ge(row(r, 1), Rational::one());
    }
    for &r in &only2 {
        sys.push_ge(row(r, -1), Rational::one());
    }
    matches!(solve_feasibility(&sys), LpOutcome::Feasible(_))
}

/// Whether every maximal cone of `fine` lies inside a single maximal cone of
/// `coarse`. `coarse` must be smooth.
pub fn refines(fine: &Fan, coarse: &Fan) -> bool {
    if fine.dim != coarse.dim {
        return false;
    }
    let inverses = coarse.cone_inverses();
    fine.cones.iter().all(|cone| {
        inverses.iter().any(|inv| {
            inv.as_ref().is_some_and(|inv| {
                cone.iter().all(|&r| {
                    coordinates_in(inv, &fine.rays[r]).iter().all(|c| !c.is_negative())
                })
            })
        })
    })
}
