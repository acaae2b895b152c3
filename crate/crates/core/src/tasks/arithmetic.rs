//! Integer arithmetic with a noisy step-by-step policy.
//!
//! Every binary node of the expression is computed on its own line
//! (`lhs op rhs = value`). At each step the policy picks uniformly among the
//! ready nodes: those whose operands are settled and whose line is missing
//! or was written with operands that have since changed. Once nothing is
//! ready it writes `### answer = v` with the latest root value. Each line is
//! right with probability `q` and otherwise off by 1 to 3. A trajectory is
//! terminal once it ends in an answer line.

use std::fmt;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecomposeError, Enumerable, PolicyError, Task, VerifyError};
use crate::goal::{Goal, GoalSpec};
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
}

impl Op {
    /// `None` on division by zero. Division truncates, so it is exact on
    /// generated expressions and well defined on corrupted operands.
    pub fn apply(self, lhs: i64, rhs: i64) -> Option<i64> {
        match self {
            Op::Add => lhs.checked_add(rhs),
            Op::Sub => lhs.checked_sub(rhs),
            Op::Mul => lhs.checked_mul(rhs),
            Op::Div => lhs.checked_div(rhs),
        }
    }

    fn symbol(self) -> char {
        match self {
            Op::Add => '+',
            Op::Sub => '-',
            Op::Mul => '*',
            Op::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Div => 2,
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Lit(i64),
    Bin(Op, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn bin(op: Op, lhs: Expr, rhs: Expr) -> Self {
        Expr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn eval(&self) -> Option<i64> {
        match self {
            Expr::Lit(v) => Some(*v),
            Expr::Bin(op, l, r) => op.apply(l.eval()?, r.eval()?),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Lit(_) => 0,
            Expr::Bin(_, l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn ops(&self) -> usize {
        match self {
            Expr::Lit(_) => 0,
            Expr::Bin(_, l, r) => 1 + l.ops() + r.ops(),
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8, right: bool) -> fmt::Result {
        match self {
            Expr::Lit(v) if *v < 0 => write!(f, "({v})"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let paren = p < parent || (right && p == parent);
                if paren {
                    write!(f, "(")?;
                }
                l.write_prec(f, p, false)?;
                write!(f, " {op} ")?;
                r.write_prec(f, p, true)?;
                if paren {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0, false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unexpected character `{0}` at offset {1}")]
    Unexpected(char, usize),
    #[error("unexpected end of expression")]
    UnexpectedEnd,
    #[error("trailing input at offset {0}")]
    Trailing(usize),
    #[error("integer literal out of range at offset {0}")]
    Overflow(usize),
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<(usize, char)> {
        while let Some(&(_, c)) = self.chars.get(self.pos) {
            if c.is_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.chars.get(self.pos).copied()
    }

    fn op(c: char) -> Option<Op> {
        match c {
            '+' => Some(Op::Add),
            '-' | '−' => Some(Op::Sub),
            '*' | '×' => Some(Op::Mul),
            '/' | '÷' => Some(Op::Div),
            _ => None,
        }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.atom()?;
        while let Some((_, c)) = self.peek() {
            let Some(op) = Self::op(c) else { break };
            if op.precedence() < min_prec {
                break;
            }
            self.pos += 1;
            let rhs = self.expr(op.precedence() + 1)?;
            lhs = Expr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(ParseError::UnexpectedEnd),
            Some((_, '(')) => {
                self.pos += 1;
                let e = self.expr(0)?;
                match self.peek() {
                    Some((_, ')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    Some((at, c)) => Err(ParseError::Unexpected(c, at)),
                    None => Err(ParseError::UnexpectedEnd),
                }
            }
            Some((at, c)) if c.is_ascii_digit() => {
                let mut v: i64 = 0;
                while let Some(&(_, d)) = self.chars.get(self.pos) {
                    let Some(digit) = d.to_digit(10) else { break };
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(digit as i64))
                        .ok_or(ParseError::Overflow(at))?;
                    self.pos += 1;
                }
                Ok(Expr::Lit(v))
            }
            Some((_, '-' | '−')) => {
                self.pos += 1;
                match self.atom()? {
                    Expr::Lit(v) => Ok(Expr::Lit(-v)),
                    e => Ok(Expr::bin(Op::Sub, Expr::Lit(0), e)),
                }
            }
            Some((at, c)) => Err(ParseError::Unexpected(c, at)),
        }
    }
}

/// Parses infix integer arithmetic with `+ - * /` (or `− × ÷`) and
/// parentheses, usual precedence, left associative.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { chars: src.char_indices().collect(), pos: 0, _src: src };
    let e = p.expr(0)?;
    match p.peek() {
        None => Ok(e),
        Some((at, _)) => Err(ParseError::Trailing(at)),
    }
}

/// Random complete binary expression of the given depth with literals in
/// 1..=9. Division only appears where it is exact and non-zero; elsewhere
/// the operator is redrawn.
pub fn random_expression<R: Rng + ?Sized>(depth: usize, rng: &mut R) -> Expr {
    if depth == 0 {
        return Expr::Lit(rng.gen_range(1..=9));
    }
    let lhs = random_expression(depth - 1, rng);
    let rhs = random_expression(depth - 1, rng);
    let ops = [Op::Add, Op::Sub, Op::Mul, Op::Div];
    let mut op = ops[rng.gen_range(0..4)];
    if op == Op::Div {
        let (l, r) = (lhs.eval().unwrap_or(0), rhs.eval().unwrap_or(0));
        if r == 0 || l % r != 0 {
            op = ops[rng.gen_range(0..3)];
        }
    }
    Expr::bin(op, lhs, rhs)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operand {
    Lit(i64),
    /// Result of another node, by post-order index.
    Node(usize),
}

/// One binary node of the flattened expression.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub op: Op,
    pub lhs: Operand,
    pub rhs: Operand,
    pub value: i64,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithStep {
    Compute { node: usize, lhs: i64, op: Op, rhs: i64, value: i64 },
    Answer(i64),
}

impl fmt::Display for ArithStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ArithStep::Compute { lhs, op, rhs, value, .. } => write!(f, "{lhs} {op} {rhs} = {value}"),
            ArithStep::Answer(v) => write!(f, "### answer = {v}"),
        }
    }
}

/// Verifier handles for the arithmetic goal tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithCheck {
    /// The last step is the answer line with the exact value.
    Answer,
    /// Some line computes node `n` with its exact value.
    Subexpr(usize),
    /// Some line for node `n` applies its operator correctly to the operands
    /// written on that line, with any literal operand copied exactly.
    Apply(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ArithmeticError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("expression has no operator")]
    NoOperator,
    #[error("expression does not evaluate exactly (division by zero, inexact division or overflow)")]
    NotExact,
    #[error("q must lie in [0, 1], got {0}")]
    BadQ(f64),
}

#[derive(Debug, Clone)]
pub struct ArithmeticTask {
    expr: Expr,
    nodes: Vec<Node>,
    value: i64,
    q: f64,
}

impl ArithmeticTask {
    pub fn new(expr: Expr, q: f64) -> Result<Self, ArithmeticError> {
        if !(0.0..=1.0).contains(&q) {
            return Err(ArithmeticError::BadQ(q));
        }
        if expr.ops() == 0 {
            return Err(ArithmeticError::NoOperator);
        }
        if !exact(&expr) {
            return Err(ArithmeticError::NotExact);
        }
        let mut nodes = Vec::new();
        flatten(&expr, &mut nodes);
        let value = expr.eval().ok_or(ArithmeticError::NotExact)?;
        Ok(Self { expr, nodes, value, q })
    }

    pub fn parse(src: &str, q: f64) -> Result<Self, ArithmeticError> {
        Self::new(parse(src)?, q)
    }

    pub fn random<R: Rng + ?Sized>(depth: usize, q: f64, rng: &mut R) -> Result<Self, ArithmeticError> {
        Self::new(random_expression(depth.max(1), rng), q)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn value(&self) -> i64 {
        self.value
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    fn root_node(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Latest line written for each node as `(lhs, rhs, value)`, scanning
    /// the prefix in order.
    fn latest(&self, prefix: &[ArithStep]) -> Vec<Option<(i64, i64, i64)>> {
        let mut latest = vec![None; self.nodes.len()];
        for s in prefix {
            if let ArithStep::Compute { node, lhs, rhs, value, .. } = *s {
                if node < latest.len() {
                    latest[node] = Some((lhs, rhs, value));
                }
            }
        }
        latest
    }

    fn operand(o: Operand, latest: &[Option<(i64, i64, i64)>]) -> Option<i64> {
        match o {
            Operand::Lit(v) => Some(v),
            Operand::Node(n) => latest[n].map(|(_, _, v)| v),
        }
    }

    /// Nodes that need a line, with the operands a new line would use: no
    /// line yet, or a latest line computed from operands that no longer
    /// match the children's latest values (as happens after splicing).
    /// Only nodes whose children are settled are listed.
    fn ready(&self, prefix: &[ArithStep]) -> Vec<(usize, i64, i64)> {
        let latest = self.latest(prefix);
        let mut settled = vec![false; self.nodes.len()];
        let mut ready = Vec::new();
        // post-order: children are decided before their parents
        for (n, node) in self.nodes.iter().enumerate() {
            let child_ok = |o: Operand| match o {
                Operand::Lit(_) => true,
                Operand::Node(c) => settled[c],
            };
            if !child_ok(node.lhs) || !child_ok(node.rhs) {
                continue;
            }
            let lhs = Self::operand(node.lhs, &latest).expect("settled child has a line");
            let rhs = Self::operand(node.rhs, &latest).expect("settled child has a line");
            match latest[n] {
                Some((l, r, _)) if l == lhs && r == rhs => settled[n] = true,
                _ => ready.push((n, lhs, rhs)),
            }
        }
        ready
    }

    fn root_value(&self, prefix: &[ArithStep]) -> i64 {
        self.latest(prefix)[self.root_node()].expect("all nodes written").2
    }

    fn subexpr_of(&self, check: ArithCheck) -> Option<usize> {
        match check {
            ArithCheck::Answer => Some(self.root_node()),
            ArithCheck::Subexpr(n) => Some(n),
            ArithCheck::Apply(_) => None,
        }
    }

    fn apply_description(&self, n: usize) -> String {
        let node = &self.nodes[n];
        match (node.lhs, node.rhs) {
            (_, Operand::Lit(r)) => {
                let verb = match node.op {
                    Op::Add => "add",
                    Op::Sub => "subtract",
                    Op::Mul => "multiply by",
                    Op::Div => "divide by",
                };
                format!("{verb} {r}")
            }
            (Operand::Lit(l), _) => match node.op {
                Op::Add => format!("add {l} to the right operand"),
                Op::Sub => format!("subtract the right operand from {l}"),
                Op::Mul => format!("multiply {l} by the right operand"),
                Op::Div => format!("divide {l} by the right operand"),
            },
            _ => format!("combine both operands with {}", node.op),
        }
    }
}

fn exact(e: &Expr) -> bool {
    match e {
        Expr::Lit(_) => true,
        Expr::Bin(op, l, r) => {
            if !exact(l) || !exact(r) {
                return false;
            }
            match (l.eval(), r.eval()) {
                (Some(a), Some(b)) => match op {
                    Op::Div => b != 0 && a % b == 0,
                    _ => op.apply(a, b).is_some(),
                },
                _ => false,
            }
        }
    }
}

fn flatten(e: &Expr, nodes: &mut Vec<Node>) -> Operand {
    match e {
        Expr::Lit(v) => Operand::Lit(*v),
        Expr::Bin(op, l, r) => {
            let lhs = flatten(l, nodes);
            let rhs = flatten(r, nodes);
            let value = e.eval().expect("checked exact");
            nodes.push(Node { op: *op, lhs, rhs, value, text: e.to_string() });
            Operand::Node(nodes.len() - 1)
        }
    }
}

impl Task for ArithmeticTask {
    type Step = ArithStep;
    type Check = ArithCheck;

    fn name(&self) -> &'static str {
        "arithmetic"
    }

    fn next_step(&self, prefix: &[ArithStep], rng: &mut dyn RngCore) -> Result<ArithStep, PolicyError> {
        let ready = self.ready(prefix);
        if ready.is_empty() {
            return Ok(ArithStep::Answer(self.root_value(prefix)));
        }
        let (n, lhs, rhs) = if ready.len() == 1 { ready[0] } else { ready[rng.gen_range(0..ready.len())] };
        let op = self.nodes[n].op;
        // A corrupted operand can make the line undefined (division by
        // zero); the policy still writes one, centred on 0.
        let correct = op.apply(lhs, rhs).unwrap_or(0);
        let value = if rng.gen_bool(self.q) {
            correct
        } else {
            let shift = rng.gen_range(1..=3i64);
            if rng.gen_bool(0.5) {
                correct + shift
            } else {
                correct - shift
            }
        };
        Ok(ArithStep::Compute { node: n, lhs, op, rhs, value })
    }

    /// Complete when the last step is an answer that follows from the
    /// trajectory's own latest lines. A spliced trajectory whose answer went
    /// stale stays open so the policy can recompute it.
    fn is_terminal(&self, steps: &[ArithStep]) -> bool {
        matches!(steps.last(), Some(ArithStep::Answer(_)))
    }

    fn root_goal(&self) -> GoalSpec<ArithCheck> {
        GoalSpec::new(format!("compute {}", self.expr), ArithCheck::Answer)
    }

    fn verify(&self, check: &ArithCheck, t: &Trajectory<ArithStep>) -> Result<f64, VerifyError> {
        let hit = match *check {
            ArithCheck::Answer => t.steps.last() == Some(&ArithStep::Answer(self.value)),
            ArithCheck::Subexpr(n) => {
                let want = self.nodes.get(n).ok_or_else(|| VerifyError(format!("no node {n}")))?.value;
                t.steps.iter().any(|s| matches!(*s, ArithStep::Compute { node, value, .. } if node == n && value == want))
            }
            ArithCheck::Apply(n) => {
                let spec = self.nodes.get(n).ok_or_else(|| VerifyError(format!("no node {n}")))?;
                t.steps.iter().any(|s| match *s {
                    ArithStep::Compute { node, lhs, op, rhs, value } if node == n => {
                        let literal_ok = match (spec.lhs, spec.rhs) {
                            (Operand::Lit(l), Operand::Lit(r)) => lhs == l && rhs == r,
                            (Operand::Lit(l), _) => lhs == l,
                            (_, Operand::Lit(r)) => rhs == r,
                            _ => true,
                        };
                        literal_ok && op == spec.op && op.apply(lhs, rhs) == Some(value)
                    }
                    _ => false,
                })
            }
        };
        Ok(if hit { 1.0 } else { 0.0 })
    }

    /// Splits a sub-expression along its chain of single-expression operands:
    /// at most two apply-operator goals are peeled off, and the remaining
    /// sub-expression becomes an operand goal. A node with two compound
    /// operands splits into both operand goals plus its apply goal.
    fn decompose(&self, leaf: &Goal<ArithCheck>, _rng: &mut dyn RngCore) -> Result<Vec<GoalSpec<ArithCheck>>, DecomposeError> {
        let Some(top) = self.subexpr_of(leaf.check) else {
            return Err(DecomposeError::AtomicGoal);
        };
        let subexpr = |n: usize| GoalSpec::new(format!("compute {}", self.nodes[n].text), ArithCheck::Subexpr(n));
        let apply = |n: usize| GoalSpec::new(self.apply_description(n), ArithCheck::Apply(n));
        let node = &self.nodes[top];
        match (node.lhs, node.rhs) {
            (Operand::Lit(_), Operand::Lit(_)) => Err(DecomposeError::AtomicGoal),
            (Operand::Node(l), Operand::Node(r)) => Ok(vec![subexpr(l), subexpr(r), apply(top)]),
            _ => {
                let mut applies = Vec::new();
                let mut cur = top;
                while applies.len() < 2 {
                    let next = match (self.nodes[cur].lhs, self.nodes[cur].rhs) {
                        (Operand::Node(n), Operand::Lit(_)) | (Operand::Lit(_), Operand::Node(n)) => n,
                        _ => break,
                    };
                    applies.push(cur);
                    cur = next;
                }
                let mut children = vec![subexpr(cur)];
                children.extend(applies.into_iter().rev().map(apply));
                Ok(children)
            }
        }
    }

    fn raw_objective(&self, t: &Trajectory<ArithStep>) -> f64 {
        self.verify(&ArithCheck::Answer, t).unwrap_or(0.0)
    }
}

impl Enumerable for ArithmeticTask {
    /// The policy's support: every ready line with every value it can emit,
    /// or the single answer line.
    fn candidate_steps(&self, prefix: &[ArithStep]) -> Vec<ArithStep> {
        let ready = self.ready(prefix);
        if ready.is_empty() {
            return vec![ArithStep::Answer(self.root_value(prefix))];
        }
        let mut out = Vec::new();
        for (n, lhs, rhs) in ready {
            let op = self.nodes[n].op;
            let c = op.apply(lhs, rhs).unwrap_or(0);
            out.extend((-3..=3).map(|d| ArithStep::Compute { node: n, lhs, op, rhs, value: c + d }));
        }
        out
    }
}
