//! Boolean circuits in Bristol Fashion format.

pub mod aes;
mod bristol;

pub use bristol::{parse_bristol, BristolReader};

use std::fmt;

use rand::Rng;

use crate::bitlinalg::BitVec;
use crate::error::{CircuitError, Result};
use crate::Role;

/// Default number of gates per online batch.
pub const DEFAULT_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Xor,
    And,
    Inv,
    Eqw,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Xor | GateKind::And => 2,
            GateKind::Inv | GateKind::Eqw => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            GateKind::Xor => "XOR",
            GateKind::And => "AND",
            GateKind::Inv => "INV",
            GateKind::Eqw => "EQW",
        }
    }
}

/// One gate. For unary gates `inputs[1]` is unused and equals `inputs[0]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: [u32; 2],
    pub out: u32,
}

impl Gate {
    pub fn in_wires(&self) -> &[u32] {
        &self.inputs[..self.kind.arity()]
    }
}

/// Who learns an output bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputTo {
    Alice,
    Bob,
    Both,
}

impl OutputTo {
    pub fn includes(self, role: Role) -> bool {
        matches!(
            (self, role),
            (OutputTo::Both, _) | (OutputTo::Alice, Role::Alice) | (OutputTo::Bob, Role::Bob)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitHeader {
    pub n_gates: usize,
    pub n_wires: usize,
    /// Input bit counts of Alice and Bob. Alice's inputs occupy the first
    /// wires, Bob's follow.
    pub inputs: [usize; 2],
    /// Output group sizes as listed in the file. Outputs are the last wires.
    pub output_groups: Vec<usize>,
    pub output_to: Vec<OutputTo>,
}

impl CircuitHeader {
    pub fn n_outputs(&self) -> usize {
        self.output_to.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.inputs[0] + self.inputs[1]
    }

    pub fn first_input(&self, role: Role) -> usize {
        match role {
            Role::Alice => 0,
            Role::Bob => self.inputs[0],
        }
    }

    pub fn first_output(&self) -> usize {
        self.n_wires - self.n_outputs()
    }
}

/// A parsed and validated circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circuit {
    pub header: CircuitHeader,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn parse(text: &str) -> Result<Self> {
        let reader = parse_bristol(text.as_bytes())?;
        let header = reader.header().clone();
        let gates = reader.collect::<Result<Vec<_>>>()?;
        Ok(Circuit { header, gates })
    }

    /// Sends every output to `to`.
    pub fn with_outputs_to(mut self, to: OutputTo) -> Self {
        self.header.output_to = vec![to; self.header.n_outputs()];
        self
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }

    pub fn and_count(&self) -> usize {
        self.count(GateKind::And)
    }

    /// Consecutive batches of at most `size` gates, in file order.
    pub fn chunks(&self, size: usize) -> std::slice::Chunks<'_, Gate> {
        self.gates.chunks(size.max(1))
    }

    /// Writes the circuit in Bristol Fashion format.
    pub fn to_bristol(&self) -> String {
        self.to_string()
    }

    /// Multiplicative depth of each gate's output, indexed like `gates`.
    pub fn levels(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.header.n_wires];
        self.gates
            .iter()
            .map(|g| {
                let d = g.in_wires().iter().map(|&w| depth[w as usize]).max().unwrap_or(0) + 1;
                depth[g.out as usize] = d;
                d
            })
            .collect()
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let h = &self.header;
        writeln!(f, "{} {}", h.n_gates, h.n_wires)?;
        let groups: &[usize] = if h.inputs[1] == 0 { &h.inputs[..1] } else { &h.inputs };
        write!(f, "{}", groups.len())?;
        for n in groups {
            write!(f, " {n}")?;
        }
        writeln!(f)?;
        write!(f, "{}", h.output_groups.len())?;
        for n in &h.output_groups {
            write!(f, " {n}")?;
        }
        writeln!(f)?;
        writeln!(f)?;
        for g in &self.gates {
            write!(f, "{} 1", g.kind.arity())?;
            for w in g.in_wires() {
                write!(f, " {w}")?;
            }
            writeln!(f, " {} {}", g.out, g.kind.name())?;
        }
        Ok(())
    }
}

/// Evaluates in the clear. Returns all output bits in wire order.
pub fn plain_eval(circuit: &Circuit, alice: &BitVec, bob: &BitVec) -> Result<BitVec> {
    let h = &circuit.header;
    for (role, given) in [(Role::Alice, alice), (Role::Bob, bob)] {
        if given.len() != h.inputs[role.index()] {
            return Err(CircuitError::InputLength {
                party: role,
                expected: h.inputs[role.index()],
                got: given.len(),
            }
            .into());
        }
    }
    let mut wires = vec![false; h.n_wires];
    for (i, b) in alice.iter().chain(bob.iter()).enumerate() {
        wires[i] = b;
    }
    for g in &circuit.gates {
        let a = wires[g.inputs[0] as usize];
        wires[g.out as usize] = match g.kind {
            GateKind::Xor => a ^ wires[g.inputs[1] as usize],
            GateKind::And => a & wires[g.inputs[1] as usize],
            GateKind::Inv => !a,
            GateKind::Eqw => a,
        };
    }
    Ok(wires[h.first_output()..].iter().copied().collect())
}

/// Incremental circuit construction. Outputs are renumbered onto the last
/// wires when the circuit is finished.
#[derive(Debug, Clone)]
pub struct Builder {
    inputs: [usize; 2],
    next: u32,
    gates: Vec<Gate>,
}

impl Builder {
    pub fn new(inputs_alice: usize, inputs_bob: usize) -> Self {
        Builder { inputs: [inputs_alice, inputs_bob], next: (inputs_alice + inputs_bob) as u32, gates: Vec::new() }
    }

    /// Wire ids of a party's inputs.
    pub fn inputs(&self, role: Role) -> Vec<u32> {
        let start = if role == Role::Alice { 0 } else { self.inputs[0] };
        (start..start + self.inputs[role.index()]).map(|w| w as u32).collect()
    }

    fn gate(&mut self, kind: GateKind, a: u32, b: u32) -> u32 {
        let out = self.next;
        self.next += 1;
        self.gates.push(Gate { kind, inputs: [a, b], out });
        out
    }

    pub fn xor(&mut self, a: u32, b: u32) -> u32 {
        self.gate(GateKind::Xor, a, b)
    }

    pub fn and(&mut self, a: u32, b: u32) -> u32 {
        self.gate(GateKind::And, a, b)
    }

    pub fn inv(&mut self, a: u32) -> u32 {
        self.gate(GateKind::Inv, a, a)
    }

    pub fn eqw(&mut self, a: u32) -> u32 {
        self.gate(GateKind::Eqw, a, a)
    }

    pub fn xnor(&mut self, a: u32, b: u32) -> u32 {
        let x = self.xor(a, b);
        self.inv(x)
    }

    pub fn finish(mut self, outputs: &[u32]) -> Circuit {
        let n_in = (self.inputs[0] + self.inputs[1]) as u32;
        // Outputs must be distinct gate outputs so they can be moved last.
        let mut seen = std::collections::HashSet::new();
        let outputs: Vec<u32> = outputs
            .iter()
            .map(|&w| if w < n_in || !seen.insert(w) { self.eqw(w) } else { w })
            .collect();
        let n_wires = self.next as usize;
        let first_out = (n_wires - outputs.len()) as u32;
        let mut map: Vec<u32> = (0..self.next).collect();
        let mut is_out = vec![None; n_wires];
        for (k, &w) in outputs.iter().enumerate() {
            is_out[w as usize] = Some(first_out + k as u32);
        }
        let mut next = n_in;
        for g in &self.gates {
            map[g.out as usize] = match is_out[g.out as usize] {
                Some(id) => id,
                None => {
                    next += 1;
                    next - 1
                }
            };
        }
        let gates = self
            .gates
            .iter()
            .map(|g| Gate {
                kind: g.kind,
                inputs: [map[g.inputs[0] as usize], map[g.inputs[1] as usize]],
                out: map[g.out as usize],
            })
            .collect::<Vec<_>>();
        Circuit {
            header: CircuitHeader {
                n_gates: gates.len(),
                n_wires,
                inputs: self.inputs,
                output_groups: vec![outputs.len()],
                output_to: vec![OutputTo::Both; outputs.len()],
            },
            gates,
        }
    }
}

/// Random circuit with the given gate count, mixing XOR/AND/INV gates. Every
/// gate reads earlier wires; the last `outputs` gate outputs are the outputs.
pub fn random_circuit<R: Rng + ?Sized>(
    rng: &mut R,
    inputs_alice: usize,
    inputs_bob: usize,
    gates: usize,
    outputs: usize,
) -> Circuit {
    assert!(inputs_alice + inputs_bob > 0 && outputs <= gates);
    let mut b = Builder::new(inputs_alice, inputs_bob);
    let mut wires: Vec<u32> = (0..(inputs_alice + inputs_bob) as u32).collect();
    for _ in 0..gates {
        let x = wires[rng.random_range(0..wires.len())];
        let y = wires[rng.random_range(0..wires.len())];
        let w = match rng.random_range(0..5) {
            0 | 1 => b.xor(x, y),
            2 | 3 => b.and(x, y),
            _ => b.inv(x),
        };
        wires.push(w);
    }
    let outs: Vec<u32> = wires[wires.len() - outputs..].to_vec();
    b.finish(&outs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn one_gate(kind: &str) -> Circuit {
        Circuit::parse(&format!("1 3\n2 1 1\n1 1\n\n2 1 0 1 2 {kind}\n")).unwrap()
    }

    #[test]
    fn minimal_file_parses() {
        let c = one_gate("XOR");
        assert_eq!(c.gates, vec![Gate { kind: GateKind::Xor, inputs: [0, 1], out: 2 }]);
        assert_eq!(c.header.inputs, [1, 1]);
        assert_eq!(c.header.n_outputs(), 1);
    }

    #[test]
    fn truth_tables() {
        for (kind, f) in [("XOR", (|a, b| a ^ b) as fn(bool, bool) -> bool), ("AND", |a, b| a & b)] {
            let c = one_gate(kind);
            for (a, b) in [(false, false), (false, true), (true, false), (true, true)] {
                let out = plain_eval(&c, &BitVec::from_bools(&[a]), &BitVec::from_bools(&[b])).unwrap();
                assert_eq!(out.get(0), f(a, b), "{kind} {a} {b}");
            }
        }
    }

    #[test]
    fn input_length_is_checked() {
        let c = one_gate("AND");
        assert!(plain_eval(&c, &BitVec::zeros(2), &BitVec::zeros(1)).is_err());
    }

    #[test]
    fn chunks_partition_the_gate_stream() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let c = random_circuit(&mut rng, 4, 4, 1000, 5);
        for size in [1, 7, 64, 1000, 5000] {
            let chunks: Vec<&[Gate]> = c.chunks(size).collect();
            assert_eq!(chunks.iter().map(|ch| ch.len()).sum::<usize>(), 1000);
            assert!(chunks[..chunks.len() - 1].iter().all(|ch| ch.len() == size));
            assert_eq!(chunks.last().unwrap().len(), if 1000 % size == 0 { size.min(1000) } else { 1000 % size });
            assert_eq!(chunks.concat(), c.gates);
        }
    }

    #[test]
    fn writer_round_trips() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let c = random_circuit(&mut rng, 3, 5, 200, 7);
        assert_eq!(Circuit::parse(&c.to_bristol()).unwrap(), c);
    }

    #[test]
    fn builder_moves_outputs_last() {
        let mut b = Builder::new(2, 0);
        let x = b.xor(0, 1);
        let y = b.and(x, 0);
        let _z = b.inv(y);
        let c = b.finish(&[x, 0]);
        assert_eq!(c.header.first_output(), c.header.n_wires - 2);
        for (a0, a1) in [(false, false), (true, false), (false, true), (true, true)] {
            let out = plain_eval(&c, &BitVec::from_bools(&[a0, a1]), &BitVec::zeros(0)).unwrap();
            assert_eq!(out, BitVec::from_bools(&[a0 ^ a1, a0]));
        }
    }

    #[test]
    fn evaluation_ignores_order_within_a_level() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        for _ in 0..20 {
            let c = random_circuit(&mut rng, 8, 8, 300, 16);
            let a = BitVec::random(8, &mut rng);
            let b = BitVec::random(8, &mut rng);
            let want = plain_eval(&c, &a, &b).unwrap();
            let levels = c.levels();
            let mut order: Vec<usize> = (0..c.gates.len()).collect();
            order.shuffle(&mut rng);
            order.sort_by_key(|&i| levels[i]);
            let shuffled = Circuit { header: c.header.clone(), gates: order.iter().map(|&i| c.gates[i]).collect() };
            assert_eq!(plain_eval(&shuffled, &a, &b).unwrap(), want);
        }
    }
}
