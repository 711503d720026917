//! Hash-consed boolean circuits (AND/OR/NOT over named inputs).
//!
//! Nodes are stored in creation order, so every node's children have
//! smaller indices than the node itself.

use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gate(u32);

impl Gate {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Node {
    Const(bool),
    /// Ordinal of the input, see [`Circuit::input_name`].
    Input(u32),
    Not(Gate),
    And(Gate, Gate),
    Or(Gate, Gate),
}

#[derive(Debug, Clone)]
pub struct Circuit {
    nodes: Vec<Node>,
    dedup: HashMap<Node, Gate>,
    inputs: Vec<Gate>,
    input_names: Vec<String>,
}

impl Default for Circuit {
    fn default() -> Self {
        Self::new()
    }
}

impl Circuit {
    pub const FALSE: Gate = Gate(0);
    pub const TRUE: Gate = Gate(1);

    pub fn new() -> Self {
        let mut c = Self {
            nodes: Vec::new(),
            dedup: HashMap::new(),
            inputs: Vec::new(),
            input_names: Vec::new(),
        };
        c.intern(Node::Const(false));
        c.intern(Node::Const(true));
        c
    }

    fn intern(&mut self, node: Node) -> Gate {
        if let Some(&g) = self.dedup.get(&node) {
            return g;
        }
        let g = Gate(u32::try_from(self.nodes.len()).expect("circuit too large"));
        self.nodes.push(node);
        self.dedup.insert(node, g);
        g
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() <= 2
    }

    pub fn node(&self, g: Gate) -> Node {
        self.nodes[g.index()]
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn input_gate(&self, ordinal: usize) -> Gate {
        self.inputs[ordinal]
    }

    pub fn input_name(&self, ordinal: usize) -> &str {
        &self.input_names[ordinal]
    }

    /// Creates a fresh input. Names are labels only and need not be unique.
    pub fn input(&mut self, name: impl Into<String>) -> Gate {
        let ordinal = u32::try_from(self.inputs.len()).expect("too many inputs");
        let g = self.intern(Node::Input(ordinal));
        self.inputs.push(g);
        self.input_names.push(name.into());
        g
    }

    pub fn constant(&self, b: bool) -> Gate {
        if b {
            Self::TRUE
        } else {
            Self::FALSE
        }
    }

    pub fn not(&mut self, a: Gate) -> Gate {
        match self.node(a) {
            Node::Const(b) => self.constant(!b),
            Node::Not(inner) => inner,
            _ => self.intern(Node::Not(a)),
        }
    }

    fn complementary(&self, a: Gate, b: Gate) -> bool {
        self.node(a) == Node::Not(b) || self.node(b) == Node::Not(a)
    }

    pub fn and(&mut self, a: Gate, b: Gate) -> Gate {
        if a == Self::FALSE || b == Self::FALSE || self.complementary(a, b) {
            return Self::FALSE;
        }
        if a == Self::TRUE || a == b {
            return b;
        }
        if b == Self::TRUE {
            return a;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.intern(Node::And(x, y))
    }

    pub fn or(&mut self, a: Gate, b: Gate) -> Gate {
        if a == Self::TRUE || b == Self::TRUE || self.complementary(a, b) {
            return Self::TRUE;
        }
        if a == Self::FALSE || a == b {
            return b;
        }
        if b == Self::FALSE {
            return a;
        }
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        self.intern(Node::Or(x, y))
    }

    pub fn and_all(&mut self, gates: impl IntoIterator<Item = Gate>) -> Gate {
        let items: Vec<Gate> = gates.into_iter().collect();
        self.balanced(&items, true)
    }

    pub fn or_all(&mut self, gates: impl IntoIterator<Item = Gate>) -> Gate {
        let items: Vec<Gate> = gates.into_iter().collect();
        self.balanced(&items, false)
    }

    fn balanced(&mut self, items: &[Gate], conj: bool) -> Gate {
        match items.len() {
            0 => self.constant(conj),
            1 => items[0],
            n => {
                let l = self.balanced(&items[..n / 2], conj);
                let r = self.balanced(&items[n / 2..], conj);
                if conj {
                    self.and(l, r)
                } else {
                    self.or(l, r)
                }
            }
        }
    }

    pub fn implies(&mut self, a: Gate, b: Gate) -> Gate {
        let na = self.not(a);
        self.or(na, b)
    }

    pub fn iff(&mut self, a: Gate, b: Gate) -> Gate {
        let ab = self.and(a, b);
        let na = self.not(a);
        let nb = self.not(b);
        let nanb = self.and(na, nb);
        self.or(ab, nanb)
    }

    /// `if c then t else e`.
    pub fn ite(&mut self, c: Gate, t: Gate, e: Gate) -> Gate {
        if t == e {
            return t;
        }
        let ct = self.and(c, t);
        let nc = self.not(c);
        let ce = self.and(nc, e);
        self.or(ct, ce)
    }

    /// At most one of `gates` is true (sequential counter encoding).
    pub fn at_most_one(&mut self, gates: &[Gate]) -> Gate {
        let mut seen = Self::FALSE;
        let mut ok = Vec::with_capacity(gates.len());
        for &g in gates {
            let clash = self.and(seen, g);
            ok.push(self.not(clash));
            seen = self.or(seen, g);
        }
        self.and_all(ok)
    }

    pub fn exactly_one(&mut self, gates: &[Gate]) -> Gate {
        let some = self.or_all(gates.iter().copied());
        let amo = self.at_most_one(gates);
        self.and(some, amo)
    }

    /// Evaluates `root` under an assignment to inputs by ordinal. Inputs
    /// beyond the end of the slice read as `false`.
    pub fn eval(&self, root: Gate, inputs: &[bool]) -> bool {
        let mut vals = vec![false; root.index() + 1];
        for i in 0..=root.index() {
            vals[i] = match self.nodes[i] {
                Node::Const(b) => b,
                Node::Input(ord) => inputs.get(ord as usize).copied().unwrap_or(false),
                Node::Not(a) => !vals[a.index()],
                Node::And(a, b) => vals[a.index()] && vals[b.index()],
                Node::Or(a, b) => vals[a.index()] || vals[b.index()],
            };
        }
        vals[root.index()]
    }

    /// Indices of every node reachable from `roots`, in ascending order.
    pub fn cone(&self, roots: &[Gate]) -> Vec<Gate> {
        let mut mark = vec![false; self.nodes.len()];
        let mut stack: Vec<Gate> = roots.to_vec();
        while let Some(g) = stack.pop() {
            if std::mem::replace(&mut mark[g.index()], true) {
                continue;
            }
            match self.nodes[g.index()] {
                Node::Const(_) | Node::Input(_) => {}
                Node::Not(a) => stack.push(a),
                Node::And(a, b) | Node::Or(a, b) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        mark.iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| Gate(i as u32))
            .collect()
    }

    /// Copies the cone of `root` from `other` into `self`, replacing each
    /// input ordinal `i` of `other` with `input_map(i)`.
    pub fn import(&mut self, other: &Circuit, root: Gate, input_map: &dyn Fn(usize) -> Gate) -> Gate {
        let mut map: HashMap<Gate, Gate> = HashMap::new();
        for g in other.cone(&[root]) {
            let new = match other.node(g) {
                Node::Const(b) => self.constant(b),
                Node::Input(ord) => input_map(ord as usize),
                Node::Not(a) => self.not(map[&a]),
                Node::And(a, b) => self.and(map[&a], map[&b]),
                Node::Or(a, b) => self.or(map[&a], map[&b]),
            };
            map.insert(g, new);
        }
        map[&root]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplification_and_sharing() {
        let mut c = Circuit::new();
        let x = c.input("x");
        let y = c.input("y");
        let a = c.and(x, y);
        let b = c.and(y, x);
        assert_eq!(a, b);
        let nx = c.not(x);
        assert_eq!(c.not(nx), x);
        assert_eq!(c.and(x, nx), Circuit::FALSE);
        assert_eq!(c.or(x, nx), Circuit::TRUE);
        assert_eq!(c.and(x, Circuit::TRUE), x);
        assert_eq!(c.or_all([]), Circuit::FALSE);
        assert_eq!(c.and_all([]), Circuit::TRUE);
    }

    #[test]
    fn exactly_one_truth_table() {
        let mut c = Circuit::new();
        let ins: Vec<Gate> = (0..4).map(|i| c.input(format!("i{i}"))).collect();
        let eo = c.exactly_one(&ins);
        for bits in 0u32..16 {
            let v: Vec<bool> = (0..4).map(|i| bits >> i & 1 == 1).collect();
            assert_eq!(c.eval(eo, &v), bits.count_ones() == 1, "bits {bits:04b}");
        }
    }

    #[test]
    fn import_substitutes_inputs() {
        let mut src = Circuit::new();
        let a = src.input("a");
        let b = src.input("b");
        let f = src.iff(a, b);
        let mut dst = Circuit::new();
        let x = dst.input("x");
        let nx = dst.not(x);
        let g = dst.import(&src, f, &|ord| if ord == 0 { x } else { nx });
        assert_eq!(g, Circuit::FALSE);
    }
}
