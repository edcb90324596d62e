//! Support functions, wall bends and projectivity certificates.
//!
//! A support function is given by its values on the primitive ray
//! generators and is linear on each maximal cone. Across a wall with
//! relation `a + b = sum c_i r_i` its bend is `sum c_i h(r_i) - h(a) - h(b)`;
//! the function is strictly convex (an ample certificate) iff every bend is
//! strictly positive.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{pairing, rational_pairing, solve_rational, LatticeVector, Rational};
use crate::fan_model::{Fan, Wall, WallRelation};
use crate::ratlp::{solve_feasibility, LinearSystem, LpOutcome};
use crate::registry::Registry;
use crate::sign_adapt::BlowupLog;
use crate::wall_normals::{ordered_normals, NormalList};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportFunction {
    pub values: Vec<Rational>,
}

impl SupportFunction {
    pub fn new(values: Vec<Rational>) -> Self {
        Self { values }
    }

    pub fn zero(num_rays: usize) -> Self {
        Self { values: vec![Rational::zero(); num_rays] }
    }

    /// Restriction of a global linear function to the rays of `fan`.
    pub fn linear(fan: &Fan, m: &[Rational]) -> Self {
        Self { values: fan.rays().iter().map(|r| rational_pairing(m, r)).collect() }
    }

    pub fn add_scaled(&self, other: &SupportFunction, eps: &Rational) -> SupportFunction {
        SupportFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + eps * b).collect(),
        }
    }

    fn check(&self, fan: &Fan) -> Result<()> {
        if self.values.len() != fan.num_rays() {
            return Err(Error::MissingRayValue { expected: fan.num_rays(), got: self.values.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BendReport {
    pub per_wall: Vec<(Wall, Rational)>,
    pub min_bend: Rational,
    pub distinct_values: BTreeSet<Rational>,
    pub all_positive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WallKind {
    Inherited,
    Interior,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallClass {
    pub wall: Wall,
    pub kind: WallKind,
}

/// Nonnegative multipliers over walls (identified by their ray index sets)
/// whose combination of bend functionals vanishes identically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FarkasCertificate {
    pub multipliers: Vec<(Vec<usize>, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    Ample(SupportFunction),
    Farkas(FarkasCertificate),
}

/// Bend as the linear functional of the relation.
pub fn bend_from_relation(rel: &WallRelation, h: &SupportFunction) -> Rational {
    let w = &rel.wall;
    let along: Rational = w
        .ray_indices
        .iter()
        .zip(&rel.coeffs)
        .map(|(&r, c)| Rational::from_integer(c.clone()) * &h.values[r])
        .sum();
    along - &h.values[w.side_a] - &h.values[w.side_b]
}

/// Bend as `(m_a - m_b)(b)`, where `m_a` is the linear piece on the maximal
/// cone through `a` and `m_b(b) = h(b)`.
pub fn bend_from_pieces(fan: &Fan, wall: &Wall, h: &SupportFunction) -> Result<Rational> {
    h.check(fan)?;
    let mut cone = wall.ray_indices.clone();
    cone.push(wall.side_a);
    let rows: Vec<Vec<Rational>> = cone
        .iter()
        .map(|&r| fan.ray(r).coords().iter().map(|c| Rational::from_integer(c.clone())).collect())
        .collect();
    let rhs: Vec<Rational> = cone.iter().map(|&r| h.values[r].clone()).collect();
    let piece = solve_rational(&rows, &rhs)?.ok_or(Error::DegenerateWall(wall.ray_indices.clone()))?;
    Ok(rational_pairing(&piece, fan.ray(wall.side_b)) - &h.values[wall.side_b])
}

/// Bend across `wall`, computed both ways and required to agree.
pub fn bend(fan: &Fan, wall: &Wall, h: &SupportFunction) -> Result<Rational> {
    h.check(fan)?;
    let rel = fan.wall_relation(wall)?;
    let b = bend_from_relation(&rel, h);
    let check = bend_from_pieces(fan, wall, h)?;
    if b != check {
        return Err(Error::InvariantViolation(format!(
            "bend formulas disagree on wall {:?}: {b} vs {check}",
            wall.ray_indices
        )));
    }
    Ok(b)
}

fn report(per_wall: Vec<(Wall, Rational)>) -> BendReport {
    let min_bend = per_wall.iter().map(|(_, b)| b).min().cloned().unwrap_or_else(Rational::zero);
    let distinct_values = per_wall.iter().map(|(_, b)| b.clone()).collect();
    let all_positive = !per_wall.is_empty() && min_bend.is_positive();
    BendReport { per_wall, min_bend, distinct_values, all_positive }
}

pub fn all_bends(fan: &Fan, h: &SupportFunction) -> Result<BendReport> {
    h.check(fan)?;
    let per_wall = fan
        .walls()?
        .into_iter()
        .map(|w| bend(fan, &w, h).map(|b| (w, b)))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(per_wall))
}

/// Bends from precomputed relations, without the second formula.
fn bends_from_relations(relations: &[WallRelation], h: &SupportFunction) -> Vec<Rational> {
    relations.iter().map(|rel| bend_from_relation(rel, h)).collect()
}

/// A wall is inherited when some normal vanishes on all of its generators.
pub fn classify_walls(fan: &Fan, normals: &NormalList) -> Result<Vec<WallClass>> {
    Ok(fan
        .walls()?
        .into_iter()
        .map(|wall| {
            let inherited = normals.iter().any(|m| {
                wall.ray_indices
                    .iter()
                    .all(|&r| pairing(m, fan.ray(r)).is_ok_and(|p| p.is_zero()))
            });
            let kind = if inherited { WallKind::Inherited } else { WallKind::Interior };
            WallClass { wall, kind }
        })
        .collect())
}

/// `h(r) = -sum_i |m_i(r)|`, the support function of the zonotope
/// `sum [-m_i, m_i]`, checked to bend positively on inherited walls and not
/// at all on interior ones.
pub fn arrangement_h(normals: &NormalList, fan: &Fan) -> Result<SupportFunction> {
    let values = fan
        .rays()
        .iter()
        .map(|r| {
            let total: BigInt = normals.iter().map(|m| pairing(m, r).map(|p| p.abs())).sum::<Result<BigInt>>()?;
            Ok(Rational::from_integer(-total))
        })
        .collect::<Result<Vec<_>>>()?;
    let h = SupportFunction::new(values);
    for class in classify_walls(fan, normals)? {
        let b = bend(fan, &class.wall, &h)?;
        let ok = match class.kind {
            WallKind::Inherited => b.is_positive(),
            WallKind::Interior => b.is_zero(),
        };
        if !ok {
            return Err(Error::HNotConvex(format!(
                "{:?} wall {:?} has bend {b}",
                class.kind, class.wall.ray_indices
            )));
        }
    }
    Ok(h)
}

/// Incremental bump function along a blow-up log: zero on the original rays,
/// and `g(s) = g(u) + g(v) + bump^j` for the ray inserted at step `j`.
pub fn relative_g(log: &BlowupLog, final_fan: &Fan, bump: &Rational) -> Result<SupportFunction> {
    let mut g = SupportFunction::zero(final_fan.num_rays());
    let mut power = Rational::one();
    for step in &log.steps {
        if step.s_idx >= final_fan.num_rays() || final_fan.ray(step.s_idx) != &step.s {
            return Err(Error::InvariantViolation(format!(
                "log step {} does not match the final fan",
                step.step
            )));
        }
        power *= bump;
        g.values[step.s_idx] = &g.values[step.u_idx] + &g.values[step.v_idx] + &power;
    }
    Ok(g)
}

/// Smallest bump tried before giving up.
fn min_bump() -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << 64)
}

/// Builds `h + eps * g` on `gamma` from the arrangement function `h` of the
/// normals and the bump function `g` of the log, and verifies it is ample.
pub fn certify_sandwich(
    sigma: &Fan,
    gamma: &Fan,
    log: &BlowupLog,
    normals: &NormalList,
) -> Result<SupportFunction> {
    let h = arrangement_h(normals, gamma)?;
    let walls = gamma.walls()?;
    let relations = walls.iter().map(|w| gamma.wall_relation(w)).collect::<Result<Vec<_>>>()?;
    let inverses = sigma.cone_inverses();
    // Walls whose barycenter lies in the interior of a maximal cone of sigma.
    let inside_sigma: Vec<bool> = walls
        .iter()
        .map(|w| {
            let bary = w
                .ray_indices
                .iter()
                .fold(LatticeVector::zero(gamma.dim()), |acc, &r| acc.add(gamma.ray(r)));
            sigma.locate(&inverses, &bary, true).is_some()
        })
        .collect();
    let classes = classify_walls(gamma, normals)?;

    let h_bends = bends_from_relations(&relations, &h);
    let mut bump = Rational::new(BigInt::one(), BigInt::from(2));
    let (g, g_bends) = loop {
        let g = relative_g(log, gamma, &bump)?;
        let g_bends = bends_from_relations(&relations, &g);
        if g_bends.iter().zip(&inside_sigma).all(|(b, &inside)| !inside || b.is_positive()) {
            break (g, g_bends);
        }
        bump /= Rational::from_integer(BigInt::from(2));
        if bump < min_bump() {
            return Err(Error::CertificateFailed(
                "no bump size makes g strictly convex relative to the input fan".into(),
            ));
        }
    };

    let eps0 = classes
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == WallKind::Inherited)
        .map(|(i, _)| &h_bends[i] / (Rational::one() + g_bends[i].abs()))
        .min()
        .unwrap_or_else(Rational::one);
    let eps = eps0 / Rational::from_integer(BigInt::from(2));
    let certified = h.add_scaled(&g, &eps);
    let (ok, rep) = verify_ample(gamma, &certified)?;
    if !ok {
        return Err(Error::CertificateFailed(format!(
            "h + eps*g has minimum bend {}",
            rep.min_bend
        )));
    }
    Ok(certified)
}

fn bend_system(fan: &Fan, relations: &[WallRelation]) -> LinearSystem {
    let mut sys = LinearSystem::new(fan.num_rays());
    for rel in relations {
        let w = &rel.wall;
        let coeffs = w
            .ray_indices
            .iter()
            .zip(&rel.coeffs)
            .map(|(&r, c)| (r, Rational::from_integer(c.clone())))
            .chain([(w.side_a, -Rational::one()), (w.side_b, -Rational::one())]);
        sys.push_ge(coeffs, Rational::one());
    }
    sys
}

/// Decides projectivity by solving `bend >= 1` on every wall exactly.
pub fn certify_lp(fan: &Fan) -> Result<Certificate> {
    let walls = fan.walls()?;
    let relations = walls.iter().map(|w| fan.wall_relation(w)).collect::<Result<Vec<_>>>()?;
    let sys = bend_system(fan, &relations);
    let cert = match solve_feasibility(&sys) {
        LpOutcome::Feasible(values) => Certificate::Ample(SupportFunction::new(values)),
        LpOutcome::Infeasible(lambda) => Certificate::Farkas(FarkasCertificate {
            multipliers: walls
                .into_iter()
                .zip(lambda)
                .filter(|(_, l)| !l.is_zero())
                .map(|(w, l)| (w.ray_indices, l))
                .collect(),
        }),
    };
    let verified = match &cert {
        Certificate::Ample(h) => verify_ample(fan, h)?.0,
        Certificate::Farkas(f) => verify_farkas(fan, f),
    };
    if !verified {
        return Err(Error::CertificateFailed("LP witness failed verification".into()));
    }
    Ok(cert)
}

pub fn verify_ample(fan: &Fan, h: &SupportFunction) -> Result<(bool, BendReport)> {
    let rep = all_bends(fan, h)?;
    Ok((rep.all_positive, rep))
}

/// Checks the multipliers are nonnegative, not all zero, and that the
/// weighted sum of bend functionals has every ray coefficient zero.
pub fn verify_farkas(fan: &Fan, cert: &FarkasCertificate) -> bool {
    let Ok(walls) = fan.walls() else { return false };
    let by_rays: BTreeMap<&[usize], &Wall> = walls.iter().map(|w| (w.ray_indices.as_slice(), w)).collect();
    if cert.multipliers.iter().any(|(_, l)| l.is_negative())
        || !cert.multipliers.iter().any(|(_, l)| l.is_positive())
    {
        return false;
    }
    let mut combo = vec![Rational::zero(); fan.num_rays()];
    for (rays, lambda) in &cert.multipliers {
        let Some(wall) = by_rays.get(rays.as_slice()) else { return false };
        let Ok(rel) = fan.wall_relation(wall) else { return false };
        for (&r, c) in wall.ray_indices.iter().zip(&rel.coeffs) {
            combo[r] += lambda * Rational::from_integer(c.clone());
        }
        combo[wall.side_a] -= lambda;
        combo[wall.side_b] -= lambda;
    }
    combo.iter().all(Zero::is_zero)
}

/// Inputs available to a certification method.
pub struct CertifyRequest<'a> {
    pub fan: &'a Fan,
    /// The coarser fan the log starts from.
    pub sigma: Option<&'a Fan>,
    pub log: Option<&'a BlowupLog>,
}

/// A method producing a verified projectivity verdict for a fan.
pub trait Certifier {
    fn name(&self) -> &'static str;
    fn certify(&self, req: &CertifyRequest<'_>) -> Result<Certificate>;
}

pub struct LpCertifier;

impl Certifier for LpCertifier {
    fn name(&self) -> &'static str {
        "lp"
    }

    fn certify(&self, req: &CertifyRequest<'_>) -> Result<Certificate> {
        certify_lp(req.fan)
    }
}

pub struct SandwichCertifier;

impl Certifier for SandwichCertifier {
    fn name(&self) -> &'static str {
        "sandwich"
    }

    fn certify(&self, req: &CertifyRequest<'_>) -> Result<Certificate> {
        let (Some(sigma), Some(log)) = (req.sigma, req.log) else {
            return Err(Error::InvariantViolation(
                "sandwich certification needs the input fan and its blow-up log".into(),
            ));
        };
        if &log.replay(sigma)? != req.fan {
            return Err(Error::InvariantViolation("log does not replay to the given fan".into()));
        }
        let normals = ordered_normals(sigma)?;
        certify_sandwich(sigma, req.fan, log, &normals).map(Certificate::Ample)
    }
}

pub fn certifiers() -> Registry<Box<dyn Certifier + Send + Sync>> {
    Registry::new()
        .register("lp", Box::new(LpCertifier) as Box<dyn Certifier + Send + Sync>)
        .register("sandwich", Box::new(SandwichCertifier) as Box<dyn Certifier + Send + Sync>)
}
