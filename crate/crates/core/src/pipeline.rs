//! End-to-end projectivization: wall normals, sequential adaptation, and the
//! postcondition checks on the output fan.

use std::fmt::Write as _;

use crate::basis::BasisChange;
use crate::certificates::{certify_lp, Certificate};
use crate::error::{Error, Result};
use crate::exact_arith::Covector;
use crate::fan_model::{refines, validate_fan, validate_fan_with, FVector, Fan};
use crate::sign_adapt::{adapt_all_with, AdaptOptions, BlowupLog, DEFAULT_TRACKER};

#[derive(Debug, Clone)]
pub struct ProjectivizeOptions<'a> {
    pub tracker: &'a str,
    /// Stop as soon as an intermediate fan (after some normal) is projective.
    pub early_stop: bool,
    pub basis: Option<&'a BasisChange>,
}

impl Default for ProjectivizeOptions<'_> {
    fn default() -> Self {
        Self { tracker: DEFAULT_TRACKER, early_stop: false, basis: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projectivization {
    pub input: Fan,
    pub fan: Fan,
    pub log: BlowupLog,
    /// Normals in processing order, in input coordinates.
    pub normals: Vec<Covector>,
    pub input_f: FVector,
    pub final_f: FVector,
    pub stopped_early: bool,
}

impl Projectivization {
    /// Number of blow-ups, `f_1(final) - f_1(input)`.
    pub fn blowups(&self) -> usize {
        self.final_f.0[0] - self.input_f.0[0]
    }

    pub fn count_table(&self) -> String {
        let mut out = String::from("normal\tcount\n");
        for (m, c) in &self.log.per_normal {
            let _ = writeln!(out, "{m}\t{c}");
        }
        let _ = writeln!(out, "total\t{}", self.log.total());
        out
    }

    pub fn summary(&self) -> String {
        let fmt_f = |f: &FVector| {
            let parts: Vec<String> = f.0.iter().map(usize::to_string).collect();
            format!("({})", parts.join(","))
        };
        let mut out = String::new();
        let _ = writeln!(out, "normals {}", self.normals.len());
        for (m, c) in &self.log.per_normal {
            let _ = writeln!(out, "  {m} -> {c}");
        }
        let _ = writeln!(out, "total {}", self.log.total());
        let _ = writeln!(out, "f-vector input {}", fmt_f(&self.input_f));
        let _ = writeln!(out, "f-vector final {}", fmt_f(&self.final_f));
        let _ = writeln!(out, "L {}", self.blowups());
        if self.stopped_early {
            let _ = writeln!(out, "stopped early: intermediate fan is projective");
        }
        out
    }
}

fn require_valid(fan: &Fan, what: &str, check_fan_axiom: bool) -> Result<()> {
    let rep = if check_fan_axiom { validate_fan(fan) } else { validate_fan_with(fan, false) };
    if !(rep.smooth && rep.complete && rep.is_fan) {
        return Err(Error::InvariantViolation(format!(
            "{what} is not a smooth complete fan: {}",
            rep.diagnostics.join("; ")
        )));
    }
    Ok(())
}

/// Runs sign adaptation to every wall normal of `fan`, in the ordered basis
/// given by `options.basis` (identity by default), and returns the result in
/// the original coordinates.
pub fn projectivize(fan: &Fan, options: &ProjectivizeOptions<'_>) -> Result<Projectivization> {
    require_valid(fan, "input", true)?;
    let identity;
    let basis = match options.basis {
        Some(b) => b,
        None => {
            identity = BasisChange::identity(fan.dim());
            &identity
        }
    };
    let working = basis.fan_to_basis(fan)?;
    let is_ample = |f: &Fan| matches!(certify_lp(f), Ok(Certificate::Ample(_)));
    let adapt_opts = AdaptOptions {
        tracker: options.tracker,
        stop_after_normal: options.early_stop.then_some(&is_ample as &dyn Fn(&Fan) -> bool),
    };
    let run = adapt_all_with(&working, &adapt_opts, &mut |_| {})?;

    let final_fan = basis.fan_from_basis(&run.fan)?;
    let log = basis.log_from_basis(&run.log);
    // Star subdivisions of a fan stay fans; the pairwise check is redundant here.
    require_valid(&final_fan, "output", false)?;
    if !refines(&final_fan, fan) {
        return Err(Error::InvariantViolation("output does not refine the input".into()));
    }
    Ok(Projectivization {
        input: fan.clone(),
        input_f: fan.f_vector(),
        final_f: final_fan.f_vector(),
        normals: run.normals.iter().map(|m| basis.covector_from_basis(m)).collect(),
        fan: final_fan,
        log,
        stopped_early: run.stopped_early,
    })
}
