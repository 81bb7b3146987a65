use std::io::BufRead;

use super::{CircuitHeader, Gate, GateKind, OutputTo};
use crate::error::{CircuitError, Error, Result};

/// Streaming Bristol Fashion reader. The header is parsed eagerly; gates are
/// parsed and validated one at a time by the iterator.
pub struct BristolReader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    header: CircuitHeader,
    defined: Vec<bool>,
    emitted: usize,
    done: bool,
}

/// Opens a Bristol Fashion stream. Input group 1 belongs to Alice and the
/// optional group 2 to Bob.
pub fn parse_bristol<R: BufRead>(source: R) -> Result<BristolReader<R>> {
    let mut lines = source.lines();
    let mut line_no = 0;
    let mut next_numbers = |what: &str| -> Result<(usize, Vec<usize>)> {
        loop {
            line_no += 1;
            let line = match lines.next() {
                Some(l) => l?,
                None => return Err(parse_err(line_no, format!("missing {what} line"))),
            };
            if line.trim().is_empty() {
                continue;
            }
            let nums = line
                .split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|_| parse_err(line_no, format!("bad number {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            return Ok((line_no, nums));
        }
    };

    let (ln, first) = next_numbers("header")?;
    let [n_gates, n_wires] = first[..] else {
        return Err(parse_err(ln, "expected gate and wire counts".into()));
    };
    let (ln, ins) = next_numbers("input")?;
    let inputs = match counted(&ins) {
        Some([a]) => [*a, 0],
        Some([a, b]) => [*a, *b],
        Some(_) => {
            return Err(CircuitError::Unsupported(format!("{} input groups; at most two parties", ins[0])).into())
        }
        None => return Err(parse_err(ln, "input group count does not match".into())),
    };
    let (ln, outs) = next_numbers("output")?;
    let output_groups = counted(&outs)
        .ok_or_else(|| parse_err(ln, "output group count does not match".into()))?
        .to_vec();
    let n_outputs: usize = output_groups.iter().sum();
    if inputs[0] + inputs[1] + n_outputs > n_wires {
        return Err(parse_err(ln, "more inputs and outputs than wires".into()));
    }
    let line_no = ln;

    let mut defined = vec![false; n_wires];
    defined[..inputs[0] + inputs[1]].fill(true);
    Ok(BristolReader {
        lines,
        line_no,
        header: CircuitHeader {
            n_gates,
            n_wires,
            inputs,
            output_groups,
            output_to: vec![OutputTo::Both; n_outputs],
        },
        defined,
        emitted: 0,
        done: false,
    })
}

fn counted(nums: &[usize]) -> Option<&[usize]> {
    let (&n, rest) = nums.split_first()?;
    (rest.len() == n).then_some(rest)
}

fn parse_err(line: usize, msg: String) -> Error {
    CircuitError::Parse { line, msg }.into()
}

impl<R: BufRead> BristolReader<R> {
    pub fn header(&self) -> &CircuitHeader {
        &self.header
    }

    fn parse_gate(&mut self, line: &str) -> Result<Gate> {
        let ln = self.line_no;
        let toks: Vec<&str> = line.split_whitespace().collect();
        let num = |t: &str| t.parse::<usize>().map_err(|_| parse_err(ln, format!("bad number {t:?}")));
        if toks.len() < 3 {
            return Err(parse_err(ln, "gate line too short".into()));
        }
        let (n_in, n_out) = (num(toks[0])?, num(toks[1])?);
        if n_out != 1 || toks.len() != 3 + n_in + n_out {
            return Err(parse_err(ln, "gate arity does not match its wire list".into()));
        }
        let kind = match *toks.last().unwrap() {
            "XOR" => GateKind::Xor,
            "AND" => GateKind::And,
            "INV" => GateKind::Inv,
            "EQW" => GateKind::Eqw,
            other => return Err(CircuitError::Unsupported(format!("gate {other} on line {ln}")).into()),
        };
        if n_in != kind.arity() {
            return Err(parse_err(ln, format!("{line:?} has the wrong number of inputs")));
        }
        let wires = toks[2..2 + n_in + 1].iter().map(|t| num(t)).collect::<Result<Vec<_>>>()?;
        let gate_idx = self.emitted;
        let n_wires = self.header.n_wires;
        for &w in &wires {
            if w >= n_wires {
                return Err(CircuitError::WireOutOfRange { gate: gate_idx, wire: w, wires: n_wires }.into());
            }
        }
        for &w in &wires[..n_in] {
            if !self.defined[w] {
                return Err(CircuitError::UndefinedWire { gate: gate_idx, wire: w }.into());
            }
        }
        let out = wires[n_in];
        if self.defined[out] {
            return Err(CircuitError::Reassigned { gate: gate_idx, wire: out }.into());
        }
        self.defined[out] = true;
        let a = wires[0] as u32;
        let b = if n_in == 2 { wires[1] as u32 } else { a };
        Ok(Gate { kind, inputs: [a, b], out: out as u32 })
    }

    fn finish(&self) -> Result<()> {
        let ln = self.line_no;
        if self.emitted != self.header.n_gates {
            return Err(parse_err(ln, format!("header announces {} gates, found {}", self.header.n_gates, self.emitted)));
        }
        let first = self.header.n_wires - self.header.n_outputs();
        if let Some(w) = (first..self.header.n_wires).find(|&w| !self.defined[w]) {
            return Err(CircuitError::UndefinedWire { gate: self.emitted, wire: w }.into());
        }
        Ok(())
    }
}

impl<R: BufRead> Iterator for BristolReader<R> {
    type Item = Result<Gate>;

    fn next(&mut self) -> Option<Result<Gate>> {
        if self.done {
            return None;
        }
        loop {
            self.line_no += 1;
            let line = match self.lines.next() {
                Some(Ok(l)) => l,
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e.into()));
                }
                None => {
                    self.done = true;
                    return self.finish().err().map(Err);
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let gate = self.parse_gate(&line);
            match &gate {
                Ok(_) => self.emitted += 1,
                Err(_) => self.done = true,
            }
            return Some(gate);
        }
    }
}
