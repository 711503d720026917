use std::collections::HashMap;

use super::cnf::{ClauseSink, CnfFormula};
use crate::circuit::{Circuit, Gate, Node};

/// Incremental Tseitin encoder. Remembers the literal of every gate it has
/// encoded so a growing circuit can be fed to the same sink piecewise.
#[derive(Debug, Default, Clone)]
pub struct TseitinEncoder {
    lits: HashMap<Gate, i32>,
    true_var: Option<i32>,
}

impl TseitinEncoder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Literal already assigned to `g`, if it has been encoded.
    pub fn lit_of(&self, g: Gate) -> Option<i32> {
        self.lits.get(&g).copied()
    }

    fn true_lit(&mut self, sink: &mut dyn ClauseSink) -> i32 {
        *self.true_var.get_or_insert_with(|| {
            let v = sink.new_var();
            sink.add_clause(&[v]);
            v
        })
    }

    /// Encodes the cone of `root` not yet seen and returns its literal.
    pub fn encode(&mut self, circuit: &Circuit, root: Gate, sink: &mut dyn ClauseSink) -> i32 {
        let mut stack = vec![(root, false)];
        while let Some((g, expanded)) = stack.pop() {
            if self.lits.contains_key(&g) {
                continue;
            }
            let node = circuit.node(g);
            if !expanded {
                stack.push((g, true));
                match node {
                    Node::Not(a) => stack.push((a, false)),
                    Node::And(a, b) | Node::Or(a, b) => {
                        stack.push((b, false));
                        stack.push((a, false));
                    }
                    Node::Const(_) | Node::Input(_) => {}
                }
                continue;
            }
            let lit = match node {
                Node::Const(b) => {
                    let t = self.true_lit(sink);
                    if b {
                        t
                    } else {
                        -t
                    }
                }
                Node::Input(_) => sink.new_var(),
                Node::Not(a) => -self.lits[&a],
                Node::And(a, b) => {
                    let (la, lb) = (self.lits[&a], self.lits[&b]);
                    let x = sink.new_var();
                    sink.add_clause(&[-x, la]);
                    sink.add_clause(&[-x, lb]);
                    sink.add_clause(&[x, -la, -lb]);
                    x
                }
                Node::Or(a, b) => {
                    let (la, lb) = (self.lits[&a], self.lits[&b]);
                    let x = sink.new_var();
                    sink.add_clause(&[x, -la]);
                    sink.add_clause(&[x, -lb]);
                    sink.add_clause(&[-x, la, lb]);
                    x
                }
            };
            self.lits.insert(g, lit);
        }
        self.lits[&root]
    }
}

/// Encodes `root` into a fresh CNF that asserts it. Input variables are
/// named after the circuit inputs in `name_map`.
pub fn tseitin_encode(circuit: &Circuit, root: Gate) -> (CnfFormula, i32) {
    let mut cnf = CnfFormula::new();
    let mut enc = TseitinEncoder::new();
    let lit = enc.encode(circuit, root, &mut cnf);
    for ord in 0..circuit.num_inputs() {
        if let Some(l) = enc.lit_of(circuit.input_gate(ord)) {
            cnf.name_map.insert(circuit.input_name(ord).to_string(), l as u32);
        }
    }
    cnf.add_clause(&[lit]);
    (cnf, lit)
}
