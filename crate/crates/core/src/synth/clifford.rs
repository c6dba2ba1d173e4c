//! The 24-element single-qubit Clifford group and its compilation into
//! physical X_{π/2}, X_π pulses with virtual Z frame changes.
//!
//! Group elements are generated by breadth-first search from X_{π/2} and
//! Z_{π/2}; each element is decomposed as Z(c)·P₂·Z(b)·P₁·Z(a) with the
//! fewest physical pulses found by exhaustive search. One pulse always
//! suffices, so the mean is 20/24 physical gates per Clifford.

use std::sync::OnceLock;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const N_CLIFFORDS: usize = 24;
pub const IDENTITY: u8 = 0;

/// Gate operations in time order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateOp {
    /// Frame change by `k` quarter turns about Z; free and error-free.
    VirtualZ(u8),
    X90,
    X180,
}

impl GateOp {
    pub fn is_physical(self) -> bool {
        !matches!(self, GateOp::VirtualZ(_))
    }
}

type U2 = Matrix2<Complex64>;

fn rx(theta: f64) -> U2 {
    let c = Complex64::new((theta / 2.0).cos(), 0.0);
    let s = Complex64::new(0.0, -(theta / 2.0).sin());
    U2::new(c, s, s, c)
}

fn rz(theta: f64) -> U2 {
    let z = Complex64::new(0.0, 0.0);
    U2::new(Complex64::from_polar(1.0, -theta / 2.0), z, z, Complex64::from_polar(1.0, theta / 2.0))
}

fn op_unitary(op: GateOp) -> U2 {
    use std::f64::consts::FRAC_PI_2;
    match op {
        GateOp::VirtualZ(k) => rz(FRAC_PI_2 * k as f64),
        GateOp::X90 => rx(FRAC_PI_2),
        GateOp::X180 => rx(2.0 * FRAC_PI_2),
    }
}

fn same_up_to_phase(a: &U2, b: &U2) -> bool {
    ((a.adjoint() * b).trace().norm() - 2.0).abs() < 1e-9
}

fn paulis() -> [U2; 4] {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [U2::identity(), U2::new(o, l, l, o), U2::new(o, -i, i, o), U2::new(l, o, o, -l)]
}

/// Unitary of an operation list applied in order.
pub fn sequence_unitary(ops: &[GateOp]) -> U2 {
    ops.iter().fold(U2::identity(), |acc, &op| op_unitary(op) * acc)
}

pub struct CliffordGroup {
    unitaries: Vec<U2>,
    /// `compose[a][b]`: apply `b`, then `a`.
    compose: [[u8; N_CLIFFORDS]; N_CLIFFORDS],
    inverse: [u8; N_CLIFFORDS],
    /// Image of Pauli I, X, Y, Z (0..4) under conjugation, signs dropped.
    conjugate: [[u8; 4]; N_CLIFFORDS],
    decomposition: Vec<Vec<GateOp>>,
}

impl CliffordGroup {
    fn build() -> Self {
        let generators = [op_unitary(GateOp::X90), op_unitary(GateOp::VirtualZ(1))];
        let mut unitaries = vec![U2::identity()];
        let mut frontier = 0;
        while frontier < unitaries.len() {
            let u = unitaries[frontier];
            for g in &generators {
                let next = g * u;
                if !unitaries.iter().any(|v| same_up_to_phase(v, &next)) {
                    unitaries.push(next);
                }
            }
            frontier += 1;
        }
        assert_eq!(unitaries.len(), N_CLIFFORDS, "Clifford closure");
        let find = |m: &U2| unitaries.iter().position(|v| same_up_to_phase(v, m)).expect("closed group") as u8;
        let mut compose = [[0u8; N_CLIFFORDS]; N_CLIFFORDS];
        let mut inverse = [0u8; N_CLIFFORDS];
        for a in 0..N_CLIFFORDS {
            for b in 0..N_CLIFFORDS {
                compose[a][b] = find(&(unitaries[a] * unitaries[b]));
            }
            inverse[a] = find(&unitaries[a].adjoint());
        }
        let p = paulis();
        let mut conjugate = [[0u8; 4]; N_CLIFFORDS];
        for (c, u) in unitaries.iter().enumerate() {
            for (k, pk) in p.iter().enumerate() {
                let image = u * pk * u.adjoint();
                conjugate[c][k] = p.iter().position(|q| same_up_to_phase(q, &image)).expect("Pauli image") as u8;
            }
        }
        let decomposition = (0..N_CLIFFORDS).map(|c| minimal_decomposition(&unitaries[c])).collect();
        Self { unitaries, compose, inverse, conjugate, decomposition }
    }

    pub fn get() -> &'static Self {
        static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
        GROUP.get_or_init(Self::build)
    }

    pub fn unitary(&self, c: u8) -> &U2 {
        &self.unitaries[c as usize]
    }

    pub fn compose(&self, after: u8, before: u8) -> u8 {
        self.compose[after as usize][before as usize]
    }

    pub fn inverse(&self, c: u8) -> u8 {
        self.inverse[c as usize]
    }

    /// Pauli (0 = I, 1 = X, 2 = Y, 3 = Z) obtained by conjugating `pauli` through `c`.
    pub fn conjugate(&self, c: u8, pauli: u8) -> u8 {
        self.conjugate[c as usize][pauli as usize]
    }

    pub fn decomposition(&self, c: u8) -> &[GateOp] {
        &self.decomposition[c as usize]
    }

    pub fn physical_gates(&self, c: u8) -> usize {
        self.decomposition(c).iter().filter(|op| op.is_physical()).count()
    }

    /// Total physical pulses over all 24 elements; the mean per Clifford is this over 24.
    pub fn total_physical_gates(&self) -> usize {
        (0..N_CLIFFORDS as u8).map(|c| self.physical_gates(c)).sum()
    }

    pub fn average_gates_per_clifford(&self) -> f64 {
        self.total_physical_gates() as f64 / N_CLIFFORDS as f64
    }
}

fn minimal_decomposition(target: &U2) -> Vec<GateOp> {
    let z = |k: u8| (k != 0).then_some(GateOp::VirtualZ(k));
    let pulses = [GateOp::X90, GateOp::X180];
    let mut candidates: Vec<Vec<Option<GateOp>>> = (0..4u8).map(|a| vec![z(a)]).collect();
    for a in 0..4u8 {
        for &p in &pulses {
            for b in 0..4u8 {
                candidates.push(vec![z(a), Some(p), z(b)]);
            }
        }
    }
    for a in 0..4u8 {
        for &p1 in &pulses {
            for b in 0..4u8 {
                for &p2 in &pulses {
                    for c in 0..4u8 {
                        candidates.push(vec![z(a), Some(p1), z(b), Some(p2), z(c)]);
                    }
                }
            }
        }
    }
    for cand in candidates {
        let ops: Vec<GateOp> = cand.into_iter().flatten().collect();
        if same_up_to_phase(&sequence_unitary(&ops), target) {
            return ops;
        }
    }
    unreachable!("every single-qubit Clifford needs at most two X-family pulses")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompiledSequence {
    /// The requested Cliffords followed by the inverting element.
    pub cliffords: Vec<u8>,
    pub inverse: u8,
    pub ops: Vec<GateOp>,
    pub physical_gates: usize,
}

/// Compiles a Clifford sequence plus its inverse into gate operations.
///
/// # Panics
/// If any index is ≥ 24.
pub fn clifford_compile(sequence: &[u8]) -> CompiledSequence {
    let group = CliffordGroup::get();
    let total = sequence.iter().fold(IDENTITY, |acc, &c| {
        assert!((c as usize) < N_CLIFFORDS, "Clifford index {c} out of range");
        group.compose(c, acc)
    });
    let inverse = group.inverse(total);
    let mut cliffords = sequence.to_vec();
    cliffords.push(inverse);
    let ops: Vec<GateOp> = cliffords.iter().flat_map(|&c| group.decomposition(c).iter().copied()).collect();
    let physical_gates = ops.iter().filter(|op| op.is_physical()).count();
    CompiledSequence { cliffords, inverse, ops, physical_gates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn group_tables_consistent() {
        let g = CliffordGroup::get();
        for a in 0..24u8 {
            assert_eq!(g.compose(a, g.inverse(a)), IDENTITY);
            // conjugation preserves I and permutes X, Y, Z
            assert_eq!(g.conjugate(a, 0), 0);
            let mut img: Vec<u8> = (1..4).map(|p| g.conjugate(a, p)).collect();
            img.sort();
            assert_eq!(img, vec![1, 2, 3]);
        }
    }

    #[test]
    fn empty_sequence() {
        let c = clifford_compile(&[]);
        assert_eq!(c.inverse, IDENTITY);
        assert_eq!(c.physical_gates, 0);
    }

    #[test]
    fn decompositions_match_unitaries() {
        let g = CliffordGroup::get();
        for c in 0..24u8 {
            let ops = g.decomposition(c);
            assert!(g.physical_gates(c) <= 2);
            let mut u = oracle::x_rotation(0.0);
            for op in ops {
                let m = match op {
                    GateOp::VirtualZ(k) => oracle::z_rotation(std::f64::consts::FRAC_PI_2 * *k as f64),
                    GateOp::X90 => oracle::x_rotation(std::f64::consts::FRAC_PI_2),
                    GateOp::X180 => oracle::x_rotation(std::f64::consts::PI),
                };
                u = m * u;
            }
            assert!(oracle::equal_up_to_phase(&u, g.unitary(c), 1e-9));
        }
    }

    #[test]
    fn average_gate_count_is_rational() {
        let g = CliffordGroup::get();
        // 4 pure frame changes, 4 π rotations and 16 π/2 rotations up to frame.
        let count = |k: usize| (0..24u8).filter(|&c| g.physical_gates(c) == k).count();
        assert_eq!((count(0), count(1), count(2)), (4, 20, 0));
        assert_eq!(g.total_physical_gates(), 20);
        assert!((g.average_gates_per_clifford() - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn random_sequences_invert() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let seq: Vec<u8> = (0..100).map(|_| rng.random_range(0..24)).collect();
            let c = clifford_compile(&seq);
            assert!(oracle::equal_up_to_phase(&sequence_unitary(&c.ops), &oracle::x_rotation(0.0), 1e-8));
        }
    }
}
