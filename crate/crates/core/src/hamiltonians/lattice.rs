use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantum::{Pauli, PauliString, PauliSum};

/// Open-boundary rectangular lattice. Site `(r, c)` is qubit `r * cols + c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct Lattice2D {
    rows: usize,
    cols: usize,
    bonds: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct Shape {
    rows: usize,
    cols: usize,
}

impl TryFrom<Shape> for Lattice2D {
    type Error = crate::Error;
    fn try_from(s: Shape) -> Result<Self> {
        Lattice2D::new(s.rows, s.cols)
    }
}

impl From<Lattice2D> for Shape {
    fn from(l: Lattice2D) -> Self {
        Shape { rows: l.rows, cols: l.cols }
    }
}

impl Lattice2D {
    /// Horizontal bonds row by row, then vertical bonds column by column.
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return domain(format!("lattice {rows}x{cols} has no sites"));
        }
        if rows * cols > 64 {
            return domain(format!("lattice {rows}x{cols} exceeds 64 sites"));
        }
        let site = |r: usize, c: usize| r * cols + c;
        let mut bonds = Vec::new();
        for r in 0..rows {
            for c in 0..cols.saturating_sub(1) {
                bonds.push((site(r, c), site(r, c + 1)));
            }
        }
        for c in 0..cols {
            for r in 0..rows.saturating_sub(1) {
                bonds.push((site(r, c), site(r + 1, c)));
            }
        }
        Ok(Self { rows, cols, bonds })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of sites (qubits).
    pub fn n(&self) -> usize {
        self.rows * self.cols
    }

    pub fn bonds(&self) -> &[(usize, usize)] {
        &self.bonds
    }
}

/// One coupling per lattice bond, in the lattice's bond order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CouplingVector(pub Vec<f64>);

impl CouplingVector {
    pub fn uniform(lattice: &Lattice2D, value: f64) -> Self {
        Self(vec![value; lattice.bonds().len()])
    }

    /// Independent draws from U[0, 2).
    pub fn sample<R: Rng + ?Sized>(lattice: &Lattice2D, rng: &mut R) -> Self {
        Self((0..lattice.bonds().len()).map(|_| 2.0 * rng.random::<f64>()).collect())
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// `H(x) = Σ_<ij> x_ij (X_i X_j + Y_i Y_j + Z_i Z_j)`.
pub fn build_heisenberg(lattice: &Lattice2D, x: &CouplingVector) -> Result<PauliSum> {
    if x.0.len() != lattice.bonds().len() {
        return domain(format!(
            "coupling vector has {} entries but the lattice has {} bonds",
            x.0.len(),
            lattice.bonds().len()
        ));
    }
    let mut terms = Vec::with_capacity(3 * x.0.len());
    for (&(a, b), &j) in lattice.bonds().iter().zip(&x.0) {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            terms.push(PauliString::pair(j, a, b, p)?);
        }
    }
    PauliSum::new(terms, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bond_counts() {
        assert_eq!(Lattice2D::new(1, 2).unwrap().bonds(), &[(0, 1)]);
        assert_eq!(Lattice2D::new(2, 2).unwrap().bonds().len(), 4);
        assert_eq!(Lattice2D::new(2, 4).unwrap().bonds().len(), 10);
        assert_eq!(Lattice2D::new(2, 10).unwrap().bonds().len(), 28);
        assert!(Lattice2D::new(0, 3).is_err());
    }

    #[test]
    fn bonds_are_adjacent_and_unique() {
        let l = Lattice2D::new(3, 4).unwrap();
        let mut seen = std::collections::HashSet::new();
        for &(a, b) in l.bonds() {
            let (ra, ca) = (a / 4, a % 4);
            let (rb, cb) = (b / 4, b % 4);
            assert_eq!(ra.abs_diff(rb) + ca.abs_diff(cb), 1);
            assert!(seen.insert((a.min(b), a.max(b))));
        }
    }

    #[test]
    fn heisenberg_term_counts() {
        let l = Lattice2D::new(1, 2).unwrap();
        let h = build_heisenberg(&l, &CouplingVector::uniform(&l, 1.0)).unwrap();
        assert_eq!(h.term_count(), 3);
        let l = Lattice2D::new(2, 2).unwrap();
        let h = build_heisenberg(&l, &CouplingVector::uniform(&l, 0.3)).unwrap();
        assert_eq!(h.term_count(), 12);
        assert!(build_heisenberg(&l, &CouplingVector(vec![1.0; 3])).is_err());
    }
}
