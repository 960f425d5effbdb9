//! Unique Forward EOPL.
//!
//! An instance is a successor map `S` and a cost map `c` on `d`-bit
//! strings. Strings with `S(v) != v` are nodes; there is an edge `v -> w`
//! when `S(v) = w` and `c(w) > c(v)`. The all-zeros string is a node with
//! cost zero. The task is to find the end of the line that starts at
//! `0^d`, or a certificate that the nodes do not form a single line.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::Zero;

use crate::bits::BitString;

pub const DEFAULT_BIT_GUARD: usize = 24;

pub trait EoplInstance {
    fn node_bits(&self) -> usize;
    fn cost_bits(&self) -> usize;
    fn successor(&self, v: &BitString) -> BitString;
    fn cost(&self, v: &BitString) -> BigUint;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EoplError {
    #[error("bit string has width {got}, instance expects {expected}")]
    WidthMismatch { expected: usize, got: usize },
    #[error("{bits}-bit instance exceeds the enumeration guard of {guard} bits")]
    InstanceTooLarge { bits: usize, guard: usize },
    #[error("walk did not end within {0} steps")]
    BudgetExceeded(u64),
    #[error("instance precondition violated: {0}")]
    Precondition(String),
    #[error("table instance is malformed: {0}")]
    BadTable(String),
}

/// Instance given by explicit successor and cost tables, indexed by the
/// node value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableInstance {
    d_bits: usize,
    m_bits: usize,
    succ: Vec<u64>,
    cost: Vec<BigUint>,
}

impl TableInstance {
    pub fn new(d_bits: usize, m_bits: usize, succ: Vec<u64>, cost: Vec<BigUint>) -> Result<Self, EoplError> {
        if d_bits == 0 || d_bits > 32 {
            return Err(EoplError::BadTable(alloc::format!("unsupported width {d_bits}")));
        }
        let size = 1usize << d_bits;
        if succ.len() != size || cost.len() != size {
            return Err(EoplError::BadTable(alloc::format!(
                "expected {size} entries, got {} successors and {} costs",
                succ.len(),
                cost.len()
            )));
        }
        if let Some(bad) = succ.iter().find(|&&s| s >= size as u64) {
            return Err(EoplError::BadTable(alloc::format!("successor {bad} out of range")));
        }
        if let Some(bad) = cost.iter().find(|c| c.bits() > m_bits as u64) {
            return Err(EoplError::BadTable(alloc::format!("cost {bad} needs more than {m_bits} bits")));
        }
        Ok(TableInstance { d_bits, m_bits, succ, cost })
    }

    pub fn successors(&self) -> &[u64] {
        &self.succ
    }

    pub fn costs(&self) -> &[BigUint] {
        &self.cost
    }

    fn index(&self, v: &BitString) -> usize {
        v.to_u64().expect("table instances are at most 32 bits wide") as usize
    }
}

impl EoplInstance for TableInstance {
    fn node_bits(&self) -> usize {
        self.d_bits
    }

    fn cost_bits(&self) -> usize {
        self.m_bits
    }

    fn successor(&self, v: &BitString) -> BitString {
        BitString::from_u64(self.d_bits, self.succ[self.index(v)])
    }

    fn cost(&self, v: &BitString) -> BigUint {
        self.cost[self.index(v)].clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ufv1Kind {
    /// `c(v) = c(w)`.
    EqualCost,
    /// `c(v) < c(w) < c(S(v))`.
    Sandwiched,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum UfeoplAnswer {
    /// End of a line.
    Uf1(BitString),
    /// Two nodes breaking strict potential increase.
    Ufv1 { v: BitString, w: BitString, kind: Ufv1Kind },
    /// `v` ends a line and `w` is a node of higher cost.
    Ufv2 { v: BitString, w: BitString },
}

impl UfeoplAnswer {
    pub fn tag(&self) -> &'static str {
        match self {
            UfeoplAnswer::Uf1(_) => "UF1",
            UfeoplAnswer::Ufv1 { .. } => "UFV1",
            UfeoplAnswer::Ufv2 { .. } => "UFV2",
        }
    }

    pub fn is_violation(&self) -> bool {
        !matches!(self, UfeoplAnswer::Uf1(_))
    }
}

fn width_ok(inst: &impl EoplInstance, v: &BitString) -> Result<(), EoplError> {
    if v.width() != inst.node_bits() {
        return Err(EoplError::WidthMismatch {
            expected: inst.node_bits(),
            got: v.width(),
        });
    }
    Ok(())
}

fn is_line_end(inst: &impl EoplInstance, v: &BitString) -> bool {
    let s = inst.successor(v);
    s != *v && (inst.successor(&s) == s || inst.cost(&s) <= inst.cost(v))
}

/// Checks an answer against the instance.
pub fn check_answer(inst: &impl EoplInstance, ans: &UfeoplAnswer) -> Result<bool, EoplError> {
    Ok(match ans {
        UfeoplAnswer::Uf1(v) => {
            width_ok(inst, v)?;
            is_line_end(inst, v)
        }
        UfeoplAnswer::Ufv1 { v, w, kind } => {
            width_ok(inst, v)?;
            width_ok(inst, w)?;
            let sv = inst.successor(v);
            if v == w || sv == *v || inst.successor(w) == *w {
                return Ok(false);
            }
            let (cv, cw) = (inst.cost(v), inst.cost(w));
            match kind {
                Ufv1Kind::EqualCost => cv == cw,
                Ufv1Kind::Sandwiched => cv < cw && cw < inst.cost(&sv),
            }
        }
        UfeoplAnswer::Ufv2 { v, w } => {
            width_ok(inst, v)?;
            width_ok(inst, w)?;
            is_line_end(inst, v) && v != w && inst.successor(w) != *w && inst.cost(v) < inst.cost(w)
        }
    })
}

/// `S(0^d) != 0^d`, `c(0^d) = 0` and `m >= d`.
pub fn check_preconditions(inst: &impl EoplInstance) -> Result<(), EoplError> {
    let zero = BitString::zeros(inst.node_bits());
    if inst.cost_bits() < inst.node_bits() {
        return Err(EoplError::Precondition(alloc::format!(
            "cost width {} is below node width {}",
            inst.cost_bits(),
            inst.node_bits()
        )));
    }
    if inst.successor(&zero) == zero {
        return Err(EoplError::Precondition("S(0) = 0".into()));
    }
    if !inst.cost(&zero).is_zero() {
        return Err(EoplError::Precondition("c(0) != 0".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkReport {
    pub end: BitString,
    pub steps: u64,
    /// Visited nodes and their costs, when requested.
    pub path: Option<Vec<(BitString, BigUint)>>,
}

/// Follows the line from `0^d` until the UF1 condition holds.
pub fn walk_line(inst: &impl EoplInstance, record: bool) -> Result<WalkReport, EoplError> {
    check_preconditions(inst)?;
    let budget = if inst.cost_bits() >= 64 { u64::MAX } else { 1u64 << inst.cost_bits() };
    let mut v = BitString::zeros(inst.node_bits());
    let mut cv = inst.cost(&v);
    let mut path = record.then(Vec::new);
    let mut steps = 0u64;
    loop {
        if let Some(path) = path.as_mut() {
            path.push((v.clone(), cv.clone()));
        }
        let w = inst.successor(&v);
        let cw = inst.cost(&w);
        if inst.successor(&w) == w || cw <= cv {
            return Ok(WalkReport { end: v, steps, path });
        }
        steps += 1;
        if steps >= budget {
            return Err(EoplError::BudgetExceeded(budget));
        }
        v = w;
        cv = cw;
    }
}

/// Every answer of a small instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnswerSet {
    pub nodes: usize,
    pub uf1: Vec<BitString>,
    pub ufv1: Vec<UfeoplAnswer>,
    pub ufv2: Vec<UfeoplAnswer>,
}

impl AnswerSet {
    pub fn is_empty(&self) -> bool {
        self.uf1.is_empty() && self.ufv1.is_empty() && self.ufv2.is_empty()
    }

    pub fn violation_count(&self) -> usize {
        self.ufv1.len() + self.ufv2.len()
    }

    pub fn all(&self) -> impl Iterator<Item = UfeoplAnswer> + '_ {
        self.uf1
            .iter()
            .cloned()
            .map(UfeoplAnswer::Uf1)
            .chain(self.ufv1.iter().cloned())
            .chain(self.ufv2.iter().cloned())
    }
}

/// Brute force over all `2^d` strings. UFV1 equal-cost pairs are listed
/// once with `v < w`; the other pair types are ordered.
pub fn enumerate_answers(inst: &impl EoplInstance, bit_guard: usize) -> Result<AnswerSet, EoplError> {
    let d = inst.node_bits();
    if d > bit_guard || d > 32 {
        return Err(EoplError::InstanceTooLarge { bits: d, guard: bit_guard.min(32) });
    }
    let size = 1u64 << d;
    let succ: Vec<u64> = (0..size)
        .map(|v| inst.successor(&BitString::from_u64(d, v)).to_u64().unwrap())
        .collect();
    let nodes: Vec<u64> = (0..size).filter(|&v| succ[v as usize] != v).collect();

    let mut cost: BTreeMap<u64, BigUint> = BTreeMap::new();
    let mut cost_of = |v: u64| -> BigUint {
        cost.entry(v)
            .or_insert_with(|| inst.cost(&BitString::from_u64(d, v)))
            .clone()
    };
    let bits = |v: u64| BitString::from_u64(d, v);

    let mut by_cost: Vec<(BigUint, u64)> = nodes.iter().map(|&v| (cost_of(v), v)).collect();
    by_cost.sort();

    let mut out = AnswerSet {
        nodes: nodes.len(),
        ..AnswerSet::default()
    };
    let mut ends = Vec::new();
    for &(ref cv, v) in &by_cost {
        let s = succ[v as usize];
        let cs = cost_of(s);
        if succ[s as usize] == s || cs <= *cv {
            ends.push((cv.clone(), v));
        }
        // nodes strictly between c(v) and c(S(v))
        let lo = by_cost.partition_point(|(c, _)| c <= cv);
        let hi = by_cost.partition_point(|(c, _)| *c < cs);
        for &(_, w) in by_cost.get(lo..hi.max(lo)).unwrap_or(&[]) {
            out.ufv1.push(UfeoplAnswer::Ufv1 {
                v: bits(v),
                w: bits(w),
                kind: Ufv1Kind::Sandwiched,
            });
        }
    }
    for group in by_cost.chunk_by(|a, b| a.0 == b.0) {
        for (a, &(_, v)) in group.iter().enumerate() {
            for &(_, w) in &group[a + 1..] {
                let (v, w) = if v < w { (v, w) } else { (w, v) };
                out.ufv1.push(UfeoplAnswer::Ufv1 {
                    v: bits(v),
                    w: bits(w),
                    kind: Ufv1Kind::EqualCost,
                });
            }
        }
    }
    for (cv, v) in &ends {
        let above = by_cost.partition_point(|(c, _)| c <= cv);
        for &(_, w) in &by_cost[above..] {
            out.ufv2.push(UfeoplAnswer::Ufv2 { v: bits(*v), w: bits(w) });
        }
    }
    ends.sort_by_key(|&(_, v)| v);
    out.uf1 = ends.into_iter().map(|(_, v)| bits(v)).collect();
    Ok(out)
}
