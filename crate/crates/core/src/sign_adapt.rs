//! Sign adaptation: removing `m`-bad two-cones by star subdivision at the sum
//! of their generators, one wall normal at a time.
//!
//! A two-cone `<u, v>` is `m`-bad when `m(u)` and `m(v)` have strictly
//! opposite signs; its weight is `|m(u)| + |m(v)|`. Each step subdivides a bad
//! two-cone of maximal weight, breaking ties by the lexicographically least
//! generator pair `(min(u, v), max(u, v))`. The pair
//! `(max weight, number of bad cones at that weight)` strictly decreases.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact_arith::{pairing, Covector, LatticeVector};
use crate::fan_model::Fan;
use crate::registry::Registry;
use crate::wall_normals::{ordered_normals, NormalList};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadCone {
    /// Lexicographically smaller generator.
    pub u: usize,
    pub v: usize,
    pub weight: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlowupStep {
    pub step: usize,
    pub normal: Covector,
    pub u: LatticeVector,
    pub v: LatticeVector,
    pub s: LatticeVector,
    pub u_idx: usize,
    pub v_idx: usize,
    pub s_idx: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlowupLog {
    pub steps: Vec<BlowupStep>,
    /// Normals in processing order with their step counts.
    pub per_normal: Vec<(Covector, usize)>,
}

impl BlowupLog {
    pub fn total(&self) -> usize {
        self.steps.len()
    }

    /// Replays the log on `initial`, checking every recorded index and vector.
    pub fn replay(&self, initial: &Fan) -> Result<Fan> {
        let mut fan = initial.clone();
        for step in &self.steps {
            if fan.ray(step.u_idx) != &step.u || fan.ray(step.v_idx) != &step.v {
                return Err(Error::InvariantViolation(format!(
                    "log step {} does not match the fan being replayed",
                    step.step
                )));
            }
            let (next, s_idx) = fan.star_subdivide(step.u_idx, step.v_idx)?;
            if s_idx != step.s_idx || next.ray(s_idx) != &step.s {
                return Err(Error::InvariantViolation(format!(
                    "log step {} inserts a different ray",
                    step.step
                )));
            }
            fan = next;
        }
        Ok(fan)
    }
}

/// `(W_max, number of bad cones of weight W_max)` before the first step and
/// after every step; the last entry is `(0, 0)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MuTrace(pub Vec<(BigInt, usize)>);

impl MuTrace {
    pub fn strictly_decreasing(&self) -> bool {
        self.0.windows(2).all(|w| w[1] < w[0])
            && self.0.last().is_some_and(|(w, c)| w.is_zero() && *c == 0)
    }
}

fn pairings(fan: &Fan, m: &Covector) -> Vec<BigInt> {
    fan.rays()
        .iter()
        .map(|r| pairing(m, r).expect("normal and fan share the ambient dimension"))
        .collect()
}

fn orient(fan: &Fan, values: &[BigInt], a: usize, b: usize) -> Option<BadCone> {
    let (va, vb) = (&values[a], &values[b]);
    if !(va.is_positive() && vb.is_negative() || va.is_negative() && vb.is_positive()) {
        return None;
    }
    let (u, v) = if fan.ray(a) < fan.ray(b) { (a, b) } else { (b, a) };
    Some(BadCone { u, v, weight: va.abs() + vb.abs() })
}

fn canonical_sort(fan: &Fan, cones: &mut [BadCone]) {
    cones.sort_by(|x, y| (fan.ray(x.u), fan.ray(x.v)).cmp(&(fan.ray(y.u), fan.ray(y.v))));
}

/// Every `m`-bad two-cone, ordered by its generator pair.
pub fn find_bad(fan: &Fan, m: &Covector) -> Vec<BadCone> {
    let values = pairings(fan, m);
    let mut out: Vec<BadCone> = fan
        .two_cones()
        .into_iter()
        .filter_map(|(a, b)| orient(fan, &values, a, b))
        .collect();
    canonical_sort(fan, &mut out);
    out
}

pub fn is_adapted(fan: &Fan, m: &Covector) -> bool {
    find_bad(fan, m).is_empty()
}

/// Maximal weight first, then the lexicographically least `(u, v)` pair.
pub fn select_bad(candidates: &[BadCone], fan: &Fan) -> Result<BadCone> {
    candidates
        .iter()
        .min_by(|x, y| {
            y.weight
                .cmp(&x.weight)
                .then_with(|| (fan.ray(x.u), fan.ray(x.v)).cmp(&(fan.ray(y.u), fan.ray(y.v))))
        })
        .cloned()
        .ok_or(Error::EmptyCandidates)
}

fn mu(candidates: &[BadCone]) -> (BigInt, usize) {
    match candidates.iter().map(|c| &c.weight).max() {
        None => (BigInt::zero(), 0),
        Some(w) => (w.clone(), candidates.iter().filter(|c| &c.weight == w).count()),
    }
}

/// Maintains the set of bad two-cones while a fan is being subdivided.
pub trait BadConeTracker {
    fn name(&self) -> &'static str;
    fn reset(&mut self, fan: &Fan, m: &Covector);
    /// Called after `fan` was obtained by subdividing `<u, v>` with new ray `s`.
    fn subdivided(&mut self, fan: &Fan, m: &Covector, u: usize, v: usize, s: usize);
    fn candidates(&self, fan: &Fan) -> Vec<BadCone>;
}

/// Recomputes all bad cones from scratch after every step.
#[derive(Default)]
pub struct FullRescan {
    current: Vec<BadCone>,
}

impl BadConeTracker for FullRescan {
    fn name(&self) -> &'static str {
        "full"
    }

    fn reset(&mut self, fan: &Fan, m: &Covector) {
        self.current = find_bad(fan, m);
    }

    fn subdivided(&mut self, fan: &Fan, m: &Covector, _u: usize, _v: usize, _s: usize) {
        self.current = find_bad(fan, m);
    }

    fn candidates(&self, _fan: &Fan) -> Vec<BadCone> {
        self.current.clone()
    }
}

/// Only the subdivided pair disappears and only pairs through the new ray
/// appear, so each step rescans the new cones around `s`.
#[derive(Default)]
pub struct Incremental {
    values: Vec<BigInt>,
    bad: BTreeSet<(usize, usize)>,
}

impl BadConeTracker for Incremental {
    fn name(&self) -> &'static str {
        "incremental"
    }

    fn reset(&mut self, fan: &Fan, m: &Covector) {
        self.values = pairings(fan, m);
        self.bad = fan
            .two_cones()
            .into_iter()
            .filter(|&(a, b)| orient(fan, &self.values, a, b).is_some())
            .collect();
    }

    fn subdivided(&mut self, fan: &Fan, m: &Covector, u: usize, v: usize, s: usize) {
        self.bad.remove(&(u.min(v), u.max(v)));
        debug_assert_eq!(self.values.len(), s);
        self.values.push(pairing(m, fan.ray(s)).expect("same dimension"));
        let neighbors: BTreeSet<usize> = fan
            .cones()
            .iter()
            .filter(|c| c.contains(&s))
            .flat_map(|c| c.iter().copied())
            .filter(|&w| w != s)
            .collect();
        for w in neighbors {
            if orient(fan, &self.values, s, w).is_some() {
                self.bad.insert((s.min(w), s.max(w)));
            }
        }
    }

    fn candidates(&self, fan: &Fan) -> Vec<BadCone> {
        let mut out: Vec<BadCone> = self
            .bad
            .iter()
            .filter_map(|&(a, b)| orient(fan, &self.values, a, b))
            .collect();
        canonical_sort(fan, &mut out);
        out
    }
}

/// Runs the incremental tracker and asserts agreement with a full rescan.
#[derive(Default)]
pub struct Checked {
    fast: Incremental,
    slow: FullRescan,
}

impl BadConeTracker for Checked {
    fn name(&self) -> &'static str {
        "checked"
    }

    fn reset(&mut self, fan: &Fan, m: &Covector) {
        self.fast.reset(fan, m);
        self.slow.reset(fan, m);
    }

    fn subdivided(&mut self, fan: &Fan, m: &Covector, u: usize, v: usize, s: usize) {
        self.fast.subdivided(fan, m, u, v, s);
        self.slow.subdivided(fan, m, u, v, s);
    }

    fn candidates(&self, fan: &Fan) -> Vec<BadCone> {
        let fast = self.fast.candidates(fan);
        assert_eq!(fast, self.slow.candidates(fan), "incremental bad-cone scan diverged");
        fast
    }
}

pub type TrackerFactory = fn() -> Box<dyn BadConeTracker>;

pub fn trackers() -> Registry<TrackerFactory> {
    Registry::<TrackerFactory>::new()
        .register("incremental", || Box::<Incremental>::default())
        .register("full", || Box::<FullRescan>::default())
        .register("checked", || Box::<Checked>::default())
}

pub const DEFAULT_TRACKER: &str = "incremental";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adaptation {
    pub fan: Fan,
    pub steps: Vec<BlowupStep>,
    pub trace: MuTrace,
}

pub fn adapt(fan: &Fan, m: &Covector) -> Result<Adaptation> {
    let mut tracker = (trackers().get(DEFAULT_TRACKER)?)();
    adapt_with(fan, m, tracker.as_mut(), &mut |_, _| {})
}

/// Adapts `fan` to `m`. `on_step` sees every intermediate fan right after
/// the step that produced it.
pub fn adapt_with(
    fan: &Fan,
    m: &Covector,
    tracker: &mut dyn BadConeTracker,
    on_step: &mut dyn FnMut(&Fan, &BlowupStep),
) -> Result<Adaptation> {
    if m.dim() != fan.dim() {
        return Err(Error::DimensionMismatch { expected: fan.dim(), got: m.dim() });
    }
    if !m.is_primitive() {
        return Err(Error::InvariantViolation(format!("normal {m} is not primitive")));
    }
    let mut fan = fan.clone();
    let mut steps = Vec::new();
    tracker.reset(&fan, m);
    let mut candidates = tracker.candidates(&fan);
    let mut trace = vec![mu(&candidates)];
    while !candidates.is_empty() {
        let chosen = select_bad(&candidates, &fan)?;
        let (next, s_idx) = fan.star_subdivide(chosen.u, chosen.v)?;
        let step = BlowupStep {
            step: steps.len() + 1,
            normal: m.clone(),
            u: fan.ray(chosen.u).clone(),
            v: fan.ray(chosen.v).clone(),
            s: next.ray(s_idx).clone(),
            u_idx: chosen.u,
            v_idx: chosen.v,
            s_idx,
        };
        fan = next;
        tracker.subdivided(&fan, m, chosen.u, chosen.v, s_idx);
        on_step(&fan, &step);
        steps.push(step);
        candidates = tracker.candidates(&fan);
        trace.push(mu(&candidates));
    }
    Ok(Adaptation { fan, steps, trace: MuTrace(trace) })
}

pub struct AdaptOptions<'a> {
    pub tracker: &'a str,
    /// Checked after each normal; returning `true` ends the run early.
    pub stop_after_normal: Option<&'a dyn Fn(&Fan) -> bool>,
}

impl Default for AdaptOptions<'_> {
    fn default() -> Self {
        Self { tracker: DEFAULT_TRACKER, stop_after_normal: None }
    }
}

/// Observations emitted while adapting to a sequence of normals.
pub enum AdaptEvent<'a> {
    Step { normal_index: usize, fan: &'a Fan, step: &'a BlowupStep },
    NormalDone { normal_index: usize, fan: &'a Fan, trace: &'a MuTrace },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequentialAdaptation {
    pub fan: Fan,
    pub log: BlowupLog,
    pub normals: NormalList,
    pub stopped_early: bool,
}

pub fn adapt_all(fan: &Fan) -> Result<(Fan, BlowupLog)> {
    let out = adapt_all_with(fan, &AdaptOptions::default(), &mut |_| {})?;
    Ok((out.fan, out.log))
}

/// Adapts to every wall normal of the input fan in lexicographic order.
/// The normals are fixed from the input and never recomputed.
pub fn adapt_all_with(
    fan: &Fan,
    options: &AdaptOptions<'_>,
    observe: &mut dyn FnMut(AdaptEvent<'_>),
) -> Result<SequentialAdaptation> {
    let normals = ordered_normals(fan)?;
    let factory = trackers().get(options.tracker).copied()?;
    let mut current = fan.clone();
    let mut log = BlowupLog::default();
    let mut stopped_early = false;
    for (j, m) in normals.iter().enumerate() {
        let mut tracker = factory();
        let offset = log.steps.len();
        let result = adapt_with(&current, m, tracker.as_mut(), &mut |f, step| {
            let mut step = step.clone();
            step.step += offset;
            observe(AdaptEvent::Step { normal_index: j, fan: f, step: &step });
        })?;
        log.per_normal.push((m.clone(), result.steps.len()));
        log.steps.extend(result.steps.into_iter().map(|mut s| {
            s.step += offset;
            s
        }));
        current = result.fan;
        observe(AdaptEvent::NormalDone { normal_index: j, fan: &current, trace: &result.trace });
        if let Some(stop) = options.stop_after_normal {
            if j + 1 < normals.len() && stop(&current) {
                stopped_early = true;
                break;
            }
        }
    }
    if !stopped_early {
        if let Some(m) = normals.iter().find(|m| !is_adapted(&current, m)) {
            return Err(Error::InvariantViolation(format!(
                "final fan is not adapted to normal {m}"
            )));
        }
    }
    Ok(SequentialAdaptation { fan: current, log, normals, stopped_early })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fan_io::builtin;
    use crate::fan_model::{refines, validate_fan};

    fn cv(c: &[i64]) -> Covector {
        Covector::from_i64s(c)
    }

    fn lv(c: &[i64]) -> LatticeVector {
        LatticeVector::from_i64s(c)
    }

    #[test]
    fn oda_first_normal_has_one_bad_cone() {
        let oda = builtin("oda75").unwrap();
        let bad = find_bad(&oda, &cv(&[0, 0, 1]));
        assert_eq!(bad.len(), 1);
        // v6 = (0,-1,-1) precedes v3 = (0,0,1) lexicographically.
        assert_eq!((bad[0].u, bad[0].v), (5, 2));
        assert_eq!(bad[0].weight, BigInt::from(2));
        assert!(!is_adapted(&oda, &cv(&[0, 0, 1])));
    }

    #[test]
    fn half_space_normal_has_no_bad_cones() {
        let quadrant = Fan::from_i64s(2, &[&[1, 0], &[0, 1]], &[&[0, 1]]).unwrap();
        assert!(find_bad(&quadrant, &cv(&[1, 1])).is_empty());
        assert!(find_bad(&quadrant, &cv(&[1, 0])).is_empty());
    }

    #[test]
    fn p2_bad_cone_and_adapted_hexagon() {
        let p2 = builtin("p2").unwrap();
        let bad = find_bad(&p2, &cv(&[0, 1]));
        assert_eq!(bad.len(), 1);
        assert_eq!((bad[0].u, bad[0].v), (2, 1));
        assert_eq!(bad[0].weight, BigInt::from(2));
        let hex = builtin("hexagon").unwrap();
        assert!(is_adapted(&hex, &cv(&[0, 1])));
    }

    #[test]
    fn selection_rules() {
        let fan = Fan::from_i64s(
            3,
            &[&[1, 0, 0], &[0, 1, 0], &[0, 0, -1], &[-1, -1, 1]],
            &[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]],
        )
        .unwrap();
        let single = BadCone { u: 0, v: 2, weight: 2.into() };
        assert_eq!(select_bad(std::slice::from_ref(&single), &fan).unwrap(), single);
        let heavy = BadCone { u: 1, v: 2, weight: 3.into() };
        assert_eq!(select_bad(&[single.clone(), heavy.clone()], &fan).unwrap(), heavy);
        // Equal weight: ((0,0,-1),(0,1,0)) beats ((0,0,-1),(1,0,0)).
        let a = BadCone { u: 2, v: 0, weight: 2.into() };
        let b = BadCone { u: 2, v: 1, weight: 2.into() };
        assert_eq!(select_bad(&[a.clone(), b.clone()], &fan).unwrap(), b);
        assert_eq!(select_bad(&[b.clone(), a], &fan).unwrap(), b);
        assert_eq!(select_bad(&[], &fan), Err(Error::EmptyCandidates));
    }

    #[test]
    fn adapt_oda_first_normal() {
        let oda = builtin("oda75").unwrap();
        let out = adapt(&oda, &cv(&[0, 0, 1])).unwrap();
        assert_eq!(out.steps.len(), 1);
        assert_eq!(out.steps[0].s, lv(&[0, -1, 0]));
        assert!(out.trace.strictly_decreasing());
        assert!(is_adapted(&out.fan, &cv(&[0, 0, 1])));
    }

    #[test]
    fn adapt_already_adapted_is_identity() {
        let hex = builtin("hexagon").unwrap();
        let out = adapt(&hex, &cv(&[0, 1])).unwrap();
        assert!(out.steps.is_empty());
        assert_eq!(out.fan, hex);
        assert_eq!(out.trace, MuTrace(vec![(BigInt::zero(), 0)]));
    }

    #[test]
    fn adapt_rejects_zero_normal() {
        let p2 = builtin("p2").unwrap();
        assert!(adapt(&p2, &cv(&[0, 0])).is_err());
    }

    #[test]
    fn adapt_p2() {
        let p2 = builtin("p2").unwrap();
        let out = adapt(&p2, &cv(&[0, 1])).unwrap();
        assert_eq!(out.steps.len(), 1);
        assert_eq!(out.steps[0].s, lv(&[-1, 0]));
    }

    #[test]
    fn adapt_all_p2_gives_hexagon() {
        let p2 = builtin("p2").unwrap();
        let (fan, log) = adapt_all(&p2).unwrap();
        let inserted: Vec<_> = log.steps.iter().map(|s| s.s.clone()).collect();
        assert_eq!(inserted, vec![lv(&[-1, 0]), lv(&[1, 1]), lv(&[0, -1])]);
        assert_eq!(fan.num_rays(), 6);
        assert!(refines(&fan, &builtin("hexagon").unwrap()));
        assert!(refines(&builtin("hexagon").unwrap(), &fan));
        assert_eq!(log.per_normal.iter().map(|p| p.1).collect::<Vec<_>>(), [1, 1, 1]);
        assert_eq!(log.replay(&p2).unwrap(), fan);
    }

    #[test]
    fn adapt_all_oda_matches_table() {
        let oda = builtin("oda75").unwrap();
        let (fan, log) = adapt_all(&oda).unwrap();
        let counts: Vec<usize> = log.per_normal.iter().map(|p| p.1).collect();
        assert_eq!(counts, [1, 3, 1, 5, 2, 5, 2, 1, 5]);
        assert_eq!(log.total(), 25);
        let first: Vec<_> = log.steps[..3].iter().map(|s| s.s.clone()).collect();
        assert_eq!(first, vec![lv(&[0, -1, 0]), lv(&[-2, -1, -1]), lv(&[-1, 0, 0])]);
        assert!(validate_fan(&fan).all_pass());
    }

    #[test]
    fn trackers_agree() {
        let oda = builtin("oda75").unwrap();
        let mut runs = Vec::new();
        for name in ["incremental", "full", "checked"] {
            let opts = AdaptOptions { tracker: name, stop_after_normal: None };
            runs.push(adapt_all_with(&oda, &opts, &mut |_| {}).unwrap());
        }
        assert_eq!(runs[0], runs[1]);
        assert_eq!(runs[1], runs[2]);
        assert!(trackers().get("bogus").is_err());
    }

    #[test]
    fn early_stop_halts_after_first_normal() {
        let p2 = builtin("p2").unwrap();
        let always: &dyn Fn(&Fan) -> bool = &|_| true;
        let opts = AdaptOptions { tracker: DEFAULT_TRACKER, stop_after_normal: Some(always) };
        let out = adapt_all_with(&p2, &opts, &mut |_| {}).unwrap();
        assert!(out.stopped_early);
        assert_eq!(out.log.per_normal.len(), 1);
        assert_eq!(out.log.total(), 1);
    }
}
