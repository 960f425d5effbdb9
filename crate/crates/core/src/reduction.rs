//! Reduction from grid USO sink search to Unique Forward EOPL.
//!
//! A state records the line-following search as one slot per position
//! `1..=n` plus a result slot. The point in slot `i` is about to process
//! direction `i`. Occupied working slots, read from the highest position
//! down, are the suspended activations of the search; each one triggered a
//! recursion on its own position, and the lowest occupied slot is the
//! active one.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::bits::BitString;
use crate::certificate::{verify_certificate, Certificate};
use crate::dirset::DirSet;
use crate::eopl::{check_answer, walk_line, EoplError, EoplInstance, UfeoplAnswer, WalkReport};
use crate::findsink::{extract_step2_certificate, has_self_loop, Step2Context};
use crate::frame::Frame;
use crate::grid::{Grid, Point, Subgrid};
use crate::lab::find_violation_within;
use crate::outmap::Outmap;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AlgState {
    /// `slots[i - 1]` is position `i`; `slots[n]` is the result slot.
    slots: Vec<Option<Point>>,
}

impl AlgState {
    pub fn blank(grid: &Grid) -> AlgState {
        AlgState {
            slots: alloc::vec![None; grid.n() as usize + 1],
        }
    }

    pub fn start(grid: &Grid) -> AlgState {
        let mut st = AlgState::blank(grid);
        st.slots[0] = Some(grid.bottom_left());
        st
    }

    /// Position `pos` in `1..=n + 1`; `n + 1` is the result slot.
    pub fn slot(&self, pos: u32) -> Option<&Point> {
        self.slots.get(pos as usize - 1).and_then(Option::as_ref)
    }

    pub fn set_slot(&mut self, pos: u32, p: Option<Point>) {
        self.slots[pos as usize - 1] = p;
    }

    pub fn slots(&self) -> &[Option<Point>] {
        &self.slots
    }

    pub fn result(&self) -> Option<&Point> {
        self.slots.last().and_then(Option::as_ref)
    }

    /// Occupied working slots, ascending by position.
    pub fn working(&self) -> impl Iterator<Item = (u32, &Point)> + '_ {
        let n = self.slots.len() - 1;
        self.slots[..n]
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.as_ref().map(|p| (i as u32 + 1, p)))
    }
}

impl fmt::Display for AlgState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.slots.len() - 1;
        for (i, s) in self.slots.iter().enumerate() {
            if i == n {
                f.write_str(" |")?;
            }
            if i > 0 {
                f.write_str(" ")?;
            }
            match s {
                Some(p) => write!(f, "{p}")?,
                None => f.write_str("_")?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateViolation {
    SelfLoop(Point),
    Step2Failure(Step2Context),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateClass {
    /// Not a state the search can be in; fixed point of the successor.
    InvalidEncoding,
    ValidStep,
    FinishedState(Point),
    ViolationState(StateViolation),
}

/// One activation of the search held in a state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Level {
    pub pos: u32,
    pub point: Point,
    pub frame: Frame,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("answer does not hold for the reduced instance")]
    InvalidAnswer,
    #[error("no violation certificate could be extracted")]
    NoViolationFound,
    #[error(transparent)]
    Eopl(#[from] EoplError),
}

struct Analysis {
    class: StateClass,
    /// Deepest first; empty unless the state is structurally sound.
    levels: Vec<Level>,
    /// Outmaps of `levels`, when they were evaluated.
    outs: Option<Vec<DirSet>>,
}

impl Analysis {
    fn class_only(class: StateClass) -> Analysis {
        Analysis {
            class,
            levels: Vec::new(),
            outs: None,
        }
    }
}

/// The reduced instance on `(n + 1) * w`-bit strings.
pub struct ReducedInstance<'a> {
    grid: &'a Grid,
    sigma: &'a Outmap,
    field_bits: usize,
    d_bits: usize,
    m_bits: usize,
    omega: u64,
    start: AlgState,
    start_mask: BitString,
    /// `omega^0 ..= omega^(n*d + 1)`.
    powers: Vec<BigUint>,
}

pub fn build_instance<'a>(grid: &'a Grid, sigma: &'a Outmap) -> ReducedInstance<'a> {
    ReducedInstance::new(grid, sigma)
}

impl<'a> ReducedInstance<'a> {
    pub fn new(grid: &'a Grid, sigma: &'a Outmap) -> Self {
        let n = grid.n() as usize;
        let d = grid.dims();
        let field_bits = (64 - grid.vertex_count().leading_zeros()) as usize;
        let d_bits = (n + 1) * field_bits;
        let omega = n as u64 + 2;
        let mut powers = Vec::with_capacity(n * d + 2);
        let mut acc = BigUint::one();
        for _ in 0..n * d + 2 {
            powers.push(acc.clone());
            acc *= omega;
        }
        // acc = omega^(n*d + 2)
        let m_bits = d_bits.max((acc - 1u32).bits() as usize + 1);
        let start = AlgState::start(grid);
        let mut inst = ReducedInstance {
            grid,
            sigma,
            field_bits,
            d_bits,
            m_bits,
            omega,
            start_mask: BitString::zeros(d_bits),
            start,
            powers,
        };
        inst.start_mask = inst.raw_encode(&inst.start);
        inst
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn sigma(&self) -> &Outmap {
        self.sigma
    }

    pub fn d_bits(&self) -> usize {
        self.d_bits
    }

    pub fn m_bits(&self) -> usize {
        self.m_bits
    }

    pub fn field_bits(&self) -> usize {
        self.field_bits
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn start_mask(&self) -> &BitString {
        &self.start_mask
    }

    pub fn start_state(&self) -> &AlgState {
        &self.start
    }

    fn raw_encode(&self, st: &AlgState) -> BitString {
        let mut raw = BitString::zeros(self.d_bits);
        for (s, p) in st.slots.iter().enumerate() {
            if let Some(p) = p {
                raw.set_field(s * self.field_bits, self.field_bits, 1 + self.grid.rank(p));
            }
        }
        raw
    }

    pub fn encode(&self, st: &AlgState) -> BitString {
        self.raw_encode(st).xor(&self.start_mask)
    }

    /// Fields above the vertex count decode as blank and clear the flag.
    fn decode_fields(&self, bits: &BitString) -> (AlgState, bool) {
        assert_eq!(bits.width(), self.d_bits, "bit string width");
        let raw = bits.xor(&self.start_mask);
        let mut st = AlgState::blank(self.grid);
        let mut ok = true;
        for s in 0..st.slots.len() {
            let f = raw.field(s * self.field_bits, self.field_bits);
            if f > self.grid.vertex_count() {
                ok = false;
            } else if f > 0 {
                st.slots[s] = self.grid.point_from_rank(f - 1);
            }
        }
        (st, ok)
    }

    pub fn decode(&self, bits: &BitString) -> Option<AlgState> {
        match self.decode_fields(bits) {
            (st, true) => Some(st),
            _ => None,
        }
    }

    /// Activations of a structurally sound state, deepest first.
    pub fn levels(&self, st: &AlgState) -> Option<Vec<Level>> {
        let working: Vec<(u32, &Point)> = st.working().collect();
        if working.is_empty() {
            return None;
        }
        let mut frame = Frame::top(self.grid);
        let mut levels = Vec::with_capacity(working.len());
        for (idx, &(pos, p)) in working.iter().enumerate().rev() {
            if !frame.in_prefix(pos, p) {
                return None;
            }
            let child = if idx > 0 {
                if !frame.can_trigger(self.grid, pos) {
                    return None;
                }
                Some(frame.child(self.grid, pos))
            } else {
                None
            };
            levels.push(Level {
                pos,
                point: p.clone(),
                frame: frame.clone(),
            });
            if let Some(c) = child {
                frame = c;
            }
        }
        levels.reverse();
        Some(levels)
    }

    fn analyze(&self, st: &AlgState) -> Analysis {
        if let Some(p) = st.result() {
            if st.working().next().is_some() {
                return Analysis::class_only(StateClass::InvalidEncoding);
            }
            let out = self.sigma.eval(p);
            return Analysis::class_only(if has_self_loop(p, &out) {
                StateClass::ViolationState(StateViolation::SelfLoop(p.clone()))
            } else if out.is_empty() {
                StateClass::FinishedState(p.clone())
            } else {
                StateClass::InvalidEncoding
            });
        }
        if *st == self.start {
            // the start is a node even when its point has a self-loop
            return Analysis {
                class: StateClass::ValidStep,
                levels: alloc::vec![Level {
                    pos: 1,
                    point: self.grid.bottom_left(),
                    frame: Frame::top(self.grid),
                }],
                outs: None,
            };
        }
        let Some(levels) = self.levels(st) else {
            return Analysis::class_only(StateClass::InvalidEncoding);
        };
        let outs: Vec<DirSet> = levels.iter().map(|l| self.sigma.eval(&l.point)).collect();
        if let Some(l) = levels.iter().zip(&outs).find(|(l, o)| has_self_loop(&l.point, o)) {
            return Analysis::class_only(StateClass::ViolationState(StateViolation::SelfLoop(l.0.point.clone())));
        }
        for (t, (l, o)) in levels.iter().zip(&outs).enumerate() {
            if !l.frame.is_prefix_sink(self.grid, l.pos, &l.point, o) || (t > 0 && !o.contains(l.pos)) {
                return Analysis::class_only(StateClass::InvalidEncoding);
            }
        }
        if levels.len() >= 2 && levels[0].pos + 1 == levels[1].pos {
            let ctx = Step2Context {
                frame: levels[1].frame.clone(),
                parent: levels[1].point.clone(),
                child: levels[0].point.clone(),
                trigger: levels[1].pos,
            };
            if ctx.offending(self.grid, &outs[0]).is_some() {
                return Analysis::class_only(StateClass::ViolationState(StateViolation::Step2Failure(ctx)));
            }
        }
        Analysis {
            class: StateClass::ValidStep,
            levels,
            outs: Some(outs),
        }
    }

    pub fn classify(&self, st: &AlgState) -> StateClass {
        self.analyze(st).class
    }

    pub fn is_vertex(&self, bits: &BitString) -> StateClass {
        match self.decode(bits) {
            Some(st) => self.classify(&st),
            None => StateClass::InvalidEncoding,
        }
    }

    /// One step of the search; every state that is not a valid step is
    /// its own successor.
    pub fn successor_state(&self, st: &AlgState) -> AlgState {
        let a = self.analyze(st);
        if a.class != StateClass::ValidStep {
            return st.clone();
        }
        let deep = &a.levels[0];
        let mut next = st.clone();
        if let Some(parent) = a.levels.get(1) {
            if deep.pos + 1 == parent.pos {
                debug_assert!(parent.pos + 1 > self.grid.n() || st.slot(parent.pos + 1).is_none());
                next.set_slot(deep.pos, None);
                next.set_slot(parent.pos, None);
                next.set_slot(parent.pos + 1, Some(deep.point.clone()));
                return next;
            }
        }
        let triggers = deep.frame.can_trigger(self.grid, deep.pos) && {
            match &a.outs {
                Some(outs) => outs[0].contains(deep.pos),
                None => self.sigma.eval(&deep.point).contains(deep.pos),
            }
        };
        if triggers {
            next.set_slot(1, Some(deep.frame.child(self.grid, deep.pos).bottom_left()));
        } else {
            next.set_slot(deep.pos, None);
            next.set_slot(deep.pos + 1, Some(deep.point.clone()));
        }
        next
    }

    fn slot_h(&self, p: &Point, pos: u32, j: usize, out: &DirSet) -> u64 {
        if out.any_in(1, pos) {
            p.coord(j) as u64
        } else {
            self.omega - 1
        }
    }

    /// The help function for working position `i` and block `j` (0-based).
    pub fn help_h(&self, st: &AlgState, i: u32, j: usize) -> u64 {
        match st.slot(i) {
            None => 0,
            Some(p) => self.slot_h(p, i, j, &self.sigma.eval(p)),
        }
    }

    pub fn state_cost(&self, st: &AlgState) -> BigUint {
        let d = self.grid.dims();
        let mut total = BigUint::zero();
        for (i, p) in st.working() {
            let out = self.sigma.eval(p);
            for j in 0..d {
                let h = self.slot_h(p, i, j, &out);
                total += &self.powers[i as usize - 1 + j + 1] * h;
            }
        }
        if st.result().is_some() {
            total += &self.powers[self.grid.n() as usize * d + 1];
        }
        total
    }

    pub fn bit_cost(&self, bits: &BitString) -> BigUint {
        if bits.is_zero() {
            return BigUint::zero();
        }
        self.state_cost(&self.decode_fields(bits).0) + 1u32
    }

    fn candidate(&self, cert: Certificate) -> Option<Certificate> {
        verify_certificate(self.grid, self.sigma, &cert).then_some(cert)
    }

    fn from_line_end(&self, v: &BitString, vertex_guard: u64) -> Option<Certificate> {
        let st = self.decode(v)?;
        match self.classify(&self.successor_state(&st)) {
            StateClass::FinishedState(p) => self.candidate(Certificate::Sink(p)),
            StateClass::ViolationState(StateViolation::SelfLoop(p)) => self.candidate(Certificate::SelfLoop(p)),
            StateClass::ViolationState(StateViolation::Step2Failure(ctx)) => {
                extract_step2_certificate(self.grid, self.sigma, &ctx, vertex_guard)
                    .ok()
                    .and_then(|c| self.candidate(c))
            }
            _ => None,
        }
    }

    /// Two activations in the same frame and position hold distinct
    /// prefix sinks, so both have refined index zero in that prefix.
    fn from_pair(&self, v: &BitString, w: &BitString) -> Option<Certificate> {
        let a = self.levels(&self.decode(v)?)?;
        let b = self.levels(&self.decode(w)?)?;
        for la in &a {
            for lb in &b {
                if la.frame == lb.frame && la.pos == lb.pos && la.point != lb.point {
                    let cert = Certificate::IndexCollision {
                        sub: la.frame.prefix(la.pos),
                        p: la.point.clone(),
                        q: lb.point.clone(),
                    };
                    if let Some(c) = self.candidate(cert) {
                        return Some(c);
                    }
                }
            }
        }
        None
    }

    fn brute_force(&self, strings: &[&BitString], vertex_guard: u64) -> Option<Certificate> {
        let d = self.grid.dims();
        let mut spanned: Vec<Vec<u32>> = alloc::vec![Vec::new(); d];
        for s in strings {
            let st = self.decode_fields(s).0;
            let next = self.successor_state(&st);
            for p in st.slots.iter().chain(next.slots.iter()).flatten() {
                for (b, r) in spanned.iter_mut().enumerate() {
                    r.push(p.coord(b));
                }
            }
        }
        if spanned.iter().all(|r| !r.is_empty()) {
            let sub = Subgrid::from_restrictions(spanned);
            if let Ok(Some(c)) = find_violation_within(self.grid, self.sigma, &sub, vertex_guard) {
                if let Some(c) = self.candidate(c) {
                    return Some(c);
                }
            }
        }
        match find_violation_within(self.grid, self.sigma, &self.grid.full_subgrid(), vertex_guard) {
            Ok(Some(c)) => self.candidate(c),
            _ => None,
        }
    }

    /// Maps a valid answer of the reduced instance to a verified grid
    /// certificate. Brute-force fallbacks are bounded by `vertex_guard`.
    pub fn map_solution(&self, ans: &UfeoplAnswer, vertex_guard: u64) -> Result<Certificate, ReductionError> {
        if !check_answer(self, ans)? {
            return Err(ReductionError::InvalidAnswer);
        }
        let found = match ans {
            UfeoplAnswer::Uf1(v) => self
                .from_line_end(v, vertex_guard)
                .or_else(|| self.brute_force(&[v], vertex_guard)),
            UfeoplAnswer::Ufv1 { v, w, .. } => self
                .from_pair(v, w)
                .or_else(|| self.brute_force(&[v, w], vertex_guard)),
            UfeoplAnswer::Ufv2 { v, w } => self
                .from_line_end(v, vertex_guard)
                .filter(Certificate::is_violation)
                .or_else(|| self.from_pair(v, w))
                .or_else(|| self.brute_force(&[v, w], vertex_guard)),
        };
        found.ok_or(ReductionError::NoViolationFound)
    }
}

impl EoplInstance for ReducedInstance<'_> {
    fn node_bits(&self) -> usize {
        self.d_bits
    }

    fn cost_bits(&self) -> usize {
        self.m_bits
    }

    fn successor(&self, v: &BitString) -> BitString {
        let Some(st) = self.decode(v) else {
            return v.clone();
        };
        let next = self.successor_state(&st);
        if next == st {
            v.clone()
        } else {
            self.encode(&next)
        }
    }

    fn cost(&self, v: &BitString) -> BigUint {
        self.bit_cost(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EoplSolve {
    pub certificate: Certificate,
    pub walk: WalkReport,
}

/// Builds the reduced instance, walks its line and maps the end back.
pub fn solve_via_eopl(grid: &Grid, sigma: &Outmap, vertex_guard: u64, record: bool) -> Result<EoplSolve, ReductionError> {
    let inst = build_instance(grid, sigma);
    let walk = walk_line(&inst, record)?;
    let certificate = inst.map_solution(&UfeoplAnswer::Uf1(walk.end.clone()), vertex_guard)?;
    Ok(EoplSolve { certificate, walk })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eopl::check_preconditions;
    use crate::lab::{generate, GeneratorSpec};
    use alloc::vec;

    fn ascending(sizes: &[usize]) -> (Grid, Outmap) {
        let g = Grid::from_sizes(sizes).unwrap();
        let s = generate(&g, &GeneratorSpec::ascending(&g)).unwrap();
        (g, s)
    }

    #[test]
    fn widths() {
        let (g, s) = ascending(&[2, 2, 3]);
        let inst = build_instance(&g, &s);
        assert_eq!(inst.field_bits(), 4);
        assert_eq!(inst.d_bits(), 32);
        assert_eq!(inst.m_bits(), 74);
        assert_eq!(inst.omega(), 9);
        let (g, s) = ascending(&[2, 2]);
        assert_eq!(build_instance(&g, &s).d_bits(), 15);
        let (g, s) = ascending(&[2, 3]);
        assert_eq!(build_instance(&g, &s).d_bits(), 18);
    }

    #[test]
    fn start_and_all_ones() {
        let (g, s) = ascending(&[2, 2, 3]);
        let inst = build_instance(&g, &s);
        assert_eq!(inst.start_mask().to_u64(), Some(1));
        let zero = BitString::zeros(32);
        assert_eq!(inst.encode(inst.start_state()), zero);
        assert_eq!(inst.decode(&zero).as_ref(), Some(inst.start_state()));
        check_preconditions(&inst).unwrap();
        // every field decodes above the vertex count
        let ones = BitString::from_u64(32, 0xffff_ffff);
        assert_eq!(inst.decode(&ones), None);
        assert_eq!(inst.is_vertex(&ones), StateClass::InvalidEncoding);
        assert_eq!(inst.successor(&ones), ones);
        assert_eq!(inst.bit_cost(&ones), BigUint::from(1u32));
    }

    #[test]
    fn help_values_and_costs() {
        let (g, s) = ascending(&[2, 2, 3]);
        let inst = build_instance(&g, &s);
        let start = inst.start_state().clone();
        for j in 0..3 {
            assert_eq!(inst.help_h(&start, 1, j), 8);
            assert_eq!(inst.help_h(&start, 2, j), 0);
        }
        // 8 * (9 + 81 + 729)
        assert_eq!(inst.state_cost(&start), BigUint::from(6552u32));
        let next = inst.successor_state(&start);
        assert_eq!(next.slot(2), Some(&Point::new(vec![1, 3, 5])));
        assert_eq!(inst.bit_cost(&inst.encode(&next)), BigUint::from(9u32 * 6552 + 1));
    }

    #[test]
    fn ascending_walk_skips_to_the_result() {
        let (g, s) = ascending(&[2, 2, 3]);
        let res = solve_via_eopl(&g, &s, 4096, true).unwrap();
        assert_eq!(res.certificate, Certificate::Sink(Point::new(vec![1, 3, 5])));
        // positions 1..7, the last node moves the point into the result slot
        assert_eq!(res.walk.steps, 6);
        let costs: Vec<BigUint> = res.walk.path.unwrap().into_iter().map(|(_, c)| c).collect();
        assert!(costs.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn roundtrip_of_every_decodable_string() {
        let (g, s) = ascending(&[2, 2]);
        let inst = build_instance(&g, &s);
        for v in 0..1u64 << inst.d_bits() {
            let bits = BitString::from_u64(inst.d_bits(), v);
            if let Some(st) = inst.decode(&bits) {
                assert_eq!(inst.encode(&st), bits);
            }
        }
    }

    #[test]
    fn evaluations_stay_within_call_budget() {
        let (g, s) = ascending(&[2, 2, 3]);
        let inst = build_instance(&g, &s);
        let budget = g.n() as u64 + 1;
        let mut v = BitString::zeros(inst.d_bits());
        for _ in 0..20 {
            let before = s.calls();
            let next = inst.successor(&v);
            assert!(s.calls() - before <= budget);
            let before = s.calls();
            inst.bit_cost(&v);
            assert!(s.calls() - before <= budget);
            let before = s.calls();
            inst.is_vertex(&v);
            assert!(s.calls() - before <= budget);
            v = next;
        }
    }

    #[test]
    fn self_loop_at_start_maps_to_guv1() {
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = Outmap::from_fn(|p: &Point| {
            let mut out = DirSet::new();
            if p.coords() == [1, 3] {
                out.insert(1);
            }
            out
        });
        let res = solve_via_eopl(&g, &s, 64, false).unwrap();
        assert_eq!(res.walk.steps, 0);
        assert_eq!(res.certificate, Certificate::SelfLoop(Point::new(vec![1, 3])));
    }
}
