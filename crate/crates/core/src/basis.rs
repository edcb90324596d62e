//! Re-expressing coordinates in a different ordered lattice basis.
//!
//! Everything order-dependent (normal signs, normal order, tie-breaks) is
//! decided in the working basis, so running the pipeline after a change of
//! basis and mapping back yields the output canonical for that basis.

use crate::error::{Error, Result};
use crate::exact_arith::{coordinates_in, pairing, unimodular_inverse, Covector, LatticeVector};
use crate::fan_model::Fan;
use crate::sign_adapt::BlowupLog;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisChange {
    /// The new basis vectors in old coordinates.
    columns: Vec<LatticeVector>,
    /// Rows of the inverse matrix: the dual basis.
    inverse: Vec<Covector>,
}

impl BasisChange {
    pub fn new(columns: Vec<LatticeVector>) -> Result<Self> {
        let n = columns.len();
        if let Some(c) = columns.iter().find(|c| c.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: c.dim() });
        }
        let inverse = unimodular_inverse(&columns)?;
        Ok(Self { columns, inverse })
    }

    pub fn identity(n: usize) -> Self {
        let columns = (0..n)
            .map(|i| LatticeVector::from_i64s(&(0..n).map(|j| (i == j) as i64).collect::<Vec<_>>()))
            .collect();
        Self::new(columns).expect("identity is unimodular")
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[LatticeVector] {
        &self.columns
    }

    pub fn vector_to_basis(&self, x: &LatticeVector) -> LatticeVector {
        LatticeVector::new(coordinates_in(&self.inverse, x))
    }

    pub fn vector_from_basis(&self, x: &LatticeVector) -> LatticeVector {
        self.columns
            .iter()
            .zip(x.coords())
            .fold(LatticeVector::zero(self.dim()), |acc, (c, k)| acc.add(&c.scale(k)))
    }

    /// `m'_j = m(b_j)`.
    pub fn covector_to_basis(&self, m: &Covector) -> Covector {
        Covector::new(
            self.columns
                .iter()
                .map(|c| pairing(m, c).expect("same dimension"))
                .collect(),
        )
    }

    pub fn covector_from_basis(&self, m: &Covector) -> Covector {
        self.inverse
            .iter()
            .zip(m.coords())
            .fold(Covector::zero(self.dim()), |acc, (row, k)| acc.add(&row.scale(k)))
    }

    fn map_fan(&self, fan: &Fan, f: impl Fn(&LatticeVector) -> LatticeVector) -> Result<Fan> {
        if fan.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: fan.dim() });
        }
        Fan::new(fan.dim(), fan.rays().iter().map(f).collect(), fan.cones().to_vec())
    }

    pub fn fan_to_basis(&self, fan: &Fan) -> Result<Fan> {
        self.map_fan(fan, |r| self.vector_to_basis(r))
    }

    pub fn fan_from_basis(&self, fan: &Fan) -> Result<Fan> {
        self.map_fan(fan, |r| self.vector_from_basis(r))
    }

    pub fn log_from_basis(&self, log: &BlowupLog) -> BlowupLog {
        let mut out = log.clone();
        for step in &mut out.steps {
            step.normal = self.covector_from_basis(&step.normal);
            step.u = self.vector_from_basis(&step.u);
            step.v = self.vector_from_basis(&step.v);
            step.s = self.vector_from_basis(&step.s);
        }
        for (m, _) in &mut out.per_normal {
            *m = self.covector_from_basis(m);
        }
        out
    }
}
