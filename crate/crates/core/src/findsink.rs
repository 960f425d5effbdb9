//! Recursive line-following sink finder.
//!
//! Starting from the bottom-left point of a frame, directions are processed
//! in ascending order. The current point `x` is the sink of the prefix
//! subgrid. If the next direction `i` is outgoing at `x`, the search
//! recurses on the slab that pins block(i) to `{i}` and returns its sink
//! `y`; `y` replaces `x` unless `y` has an outgoing edge to a direction
//! `k <= i` of the same block, in which case neither `x` nor `y` is a sink
//! of the enlarged prefix and a violation is extracted.

use alloc::vec::Vec;
use core::fmt;

use crate::certificate::{verify_certificate, Certificate};
use crate::dirset::DirSet;
use crate::frame::Frame;
use crate::grid::{Grid, Point, Subgrid};
use crate::lab::{find_violation_within, DEFAULT_VERTEX_GUARD};
use crate::outmap::Outmap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Skip,
    Recurse,
    Merge,
    Violation,
}

impl Action {
    pub fn as_str(self) -> &'static str {
        match self {
            Action::Skip => "skip",
            Action::Recurse => "recurse",
            Action::Merge => "merge",
            Action::Violation => "violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub depth: usize,
    pub direction: u32,
    /// The current point after the action.
    pub point: Point,
    pub action: Action,
    pub frame: Subgrid,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}",
            self.depth,
            self.direction,
            self.point,
            self.action.as_str()
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FindSinkTrace {
    pub steps: Vec<TraceStep>,
    pub outmap_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FindSinkResult {
    Sink { point: Point, trace: FindSinkTrace },
    Violation { cert: Certificate, trace: FindSinkTrace },
}

impl FindSinkResult {
    pub fn trace(&self) -> &FindSinkTrace {
        match self {
            FindSinkResult::Sink { trace, .. } | FindSinkResult::Violation { trace, .. } => trace,
        }
    }

    pub fn certificate(&self) -> Certificate {
        match self {
            FindSinkResult::Sink { point, .. } => Certificate::Sink(point.clone()),
            FindSinkResult::Violation { cert, .. } => cert.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FindSinkError {
    #[error("step budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("no violation found although the merge check failed")]
    NoViolationFound,
}

/// A failed merge: `parent` triggered on `trigger` in `frame`, and the
/// recursive search returned `child`, which has an outgoing edge to an
/// earlier direction of the trigger's block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step2Context {
    pub frame: Frame,
    pub parent: Point,
    pub child: Point,
    pub trigger: u32,
}

impl Step2Context {
    /// The smallest offending direction `k < trigger` in the trigger's block.
    pub fn offending(&self, grid: &Grid, child_out: &DirSet) -> Option<u32> {
        let j = grid.block_of(self.trigger)?;
        self.frame
            .subgrid()
            .restriction(j)
            .iter()
            .copied()
            .find(|&k| k < self.trigger && child_out.contains(k))
    }
}

pub fn find_sink(grid: &Grid, sigma: &Outmap) -> Result<FindSinkResult, FindSinkError> {
    find_sink_in(grid, sigma, &Frame::top(grid))
}

/// Searches an arbitrary frame (any valid subgrid of `grid`).
pub fn find_sink_in(grid: &Grid, sigma: &Outmap, frame: &Frame) -> Result<FindSinkResult, FindSinkError> {
    let start_calls = sigma.calls();
    let vertices = frame.subgrid().vertex_count();
    let budget = (grid.n() as u64)
        .saturating_mul((grid.dims() as u64).saturating_mul(vertices).saturating_add(1));
    let mut search = Search {
        grid,
        sigma,
        steps: Vec::new(),
        budget,
    };
    let outcome = search.run(frame, 0)?;
    let trace = FindSinkTrace {
        steps: search.steps,
        outmap_calls: sigma.calls() - start_calls,
    };
    Ok(match outcome {
        Outcome::Sink(point, _) => FindSinkResult::Sink { point, trace },
        Outcome::Violation(cert) => FindSinkResult::Violation { cert, trace },
    })
}

enum Outcome {
    Sink(Point, DirSet),
    Violation(Certificate),
}

struct Search<'a> {
    grid: &'a Grid,
    sigma: &'a Outmap,
    steps: Vec<TraceStep>,
    budget: u64,
}

impl Search<'_> {
    fn record(&mut self, depth: usize, direction: u32, point: &Point, action: Action, frame: &Frame) -> Result<(), FindSinkError> {
        if self.steps.len() as u64 >= self.budget {
            return Err(FindSinkError::BudgetExceeded(self.budget));
        }
        self.steps.push(TraceStep {
            depth,
            direction,
            point: point.clone(),
            action,
            frame: frame.subgrid().clone(),
        });
        Ok(())
    }

    fn run(&mut self, frame: &Frame, depth: usize) -> Result<Outcome, FindSinkError> {
        let mut x = frame.bottom_left();
        let mut out = self.sigma.eval(&x);
        if has_self_loop(&x, &out) {
            return Ok(Outcome::Violation(Certificate::SelfLoop(x)));
        }
        for i in frame.directions() {
            if !frame.can_trigger(self.grid, i) || !out.contains(i) {
                self.record(depth, i, &x, Action::Skip, frame)?;
                continue;
            }
            self.record(depth, i, &x, Action::Recurse, frame)?;
            let (y, y_out) = match self.run(&frame.child(self.grid, i), depth + 1)? {
                Outcome::Sink(y, y_out) => (y, y_out),
                violation => return Ok(violation),
            };
            let ctx = Step2Context {
                frame: frame.clone(),
                parent: x.clone(),
                child: y.clone(),
                trigger: i,
            };
            if ctx.offending(self.grid, &y_out).is_some() {
                self.record(depth, i, &y, Action::Violation, frame)?;
                let cert = extract_step2_certificate(self.grid, self.sigma, &ctx, DEFAULT_VERTEX_GUARD)?;
                return Ok(Outcome::Violation(cert));
            }
            self.record(depth, i, &y, Action::Merge, frame)?;
            x = y;
            out = y_out;
        }
        Ok(Outcome::Sink(x, out))
    }
}

pub(crate) fn has_self_loop(p: &Point, out: &DirSet) -> bool {
    p.coords().iter().any(|&c| out.contains(c))
}

/// Builds a verified certificate for a failed merge.
///
/// Tried in order: a self-loop or inconsistent edge among the consulted
/// points; a collision inside the subgrid spanned by parent, child and the
/// two directions involved; a collision anywhere in the prefix that joins
/// the parent's and the child's subgrids (which cannot be a USO when the
/// merge fails). The last stage is exponential and bounded by
/// `vertex_guard`.
pub fn extract_step2_certificate(
    grid: &Grid,
    sigma: &Outmap,
    ctx: &Step2Context,
    vertex_guard: u64,
) -> Result<Certificate, FindSinkError> {
    let j = grid.block_of(ctx.trigger).ok_or(FindSinkError::NoViolationFound)?;
    let (x, y, i) = (&ctx.parent, &ctx.child, ctx.trigger);
    let y_out = sigma.eval(y);
    let accept = |cert: Certificate| verify_certificate(grid, sigma, &cert).then_some(cert);

    if let Some(k) = ctx.offending(grid, &y_out) {
        let x_slab = x.with(j, i);
        let y_back = y.with(j, k);
        for p in [x, y, &x_slab, &y_back] {
            if has_self_loop(p, &sigma.eval(p)) {
                if let Some(c) = accept(Certificate::SelfLoop(p.clone())) {
                    return Ok(c);
                }
            }
        }
        // edges claimed outgoing from both ends
        if sigma.eval(&x_slab).contains(x.coord(j)) {
            let sub = Subgrid::from_restrictions(edge_restrictions(x, j, i));
            if let Some(c) = accept(Certificate::IndexCollision { sub, p: x.clone(), q: x_slab }) {
                return Ok(c);
            }
        }
        if sigma.eval(&y_back).contains(i) {
            let sub = Subgrid::from_restrictions(edge_restrictions(y, j, k));
            if let Some(c) = accept(Certificate::IndexCollision { sub, p: y.clone(), q: y_back }) {
                return Ok(c);
            }
        }

        let spanned: Vec<Vec<u32>> = (0..grid.dims())
            .map(|b| {
                if b == j {
                    alloc::vec![x.coord(j), i, k]
                } else {
                    alloc::vec![x.coord(b), y.coord(b)]
                }
            })
            .collect();
        let spanned = Subgrid::from_restrictions(spanned);
        if let Ok(Some(c)) = find_violation_within(grid, sigma, &spanned, vertex_guard) {
            if let Some(c) = accept(c) {
                return Ok(c);
            }
        }
    }

    let joined = ctx.frame.prefix(i + 1);
    match find_violation_within(grid, sigma, &joined, vertex_guard) {
        Ok(Some(c)) => accept(c).ok_or(FindSinkError::NoViolationFound),
        _ => Err(FindSinkError::NoViolationFound),
    }
}

fn edge_restrictions(p: &Point, dim: usize, other: u32) -> Vec<Vec<u32>> {
    p.coords()
        .iter()
        .enumerate()
        .map(|(b, &c)| if b == dim { alloc::vec![c, other] } else { alloc::vec![c] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{generate, is_uso, GeneratorSpec};
    use crate::outmap::OrientationTable;
    use alloc::vec;

    fn table(grid: &Grid, rows: &[(&[u32], &[u32])]) -> Outmap {
        let mut entries = vec![DirSet::new(); grid.vertex_count() as usize];
        for (p, out) in rows {
            entries[grid.rank(&Point::from(*p)) as usize] = out.iter().copied().collect();
        }
        Outmap::from_table(OrientationTable::new(grid, entries).unwrap())
    }

    #[test]
    fn ascending_product_sink_is_bottom_left() {
        let g = Grid::from_sizes(&[2, 2, 3]).unwrap();
        let s = generate(&g, &GeneratorSpec::ascending(&g)).unwrap();
        let res = find_sink(&g, &s).unwrap();
        assert_eq!(res.certificate(), Certificate::Sink(Point::new(vec![1, 3, 5])));
        assert!(res.trace().steps.iter().all(|st| st.action == Action::Skip));
    }

    #[test]
    fn uso_where_bottom_left_leaves_in_two_blocks() {
        // 13 -> 23, 13 -> 14, 23 -> 24, 24 -> 14; unique sink 14
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = table(&g, &[(&[1, 3], &[2, 4]), (&[2, 3], &[4]), (&[2, 4], &[1])]);
        assert!(is_uso(&g, &s, 64).unwrap());
        let res = find_sink(&g, &s).unwrap();
        assert_eq!(res.certificate(), Certificate::Sink(Point::new(vec![1, 4])));
    }

    #[test]
    fn self_loop_at_start() {
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = table(&g, &[(&[1, 3], &[1])]);
        let res = find_sink(&g, &s).unwrap();
        assert_eq!(res.certificate(), Certificate::SelfLoop(Point::new(vec![1, 3])));
    }

    #[test]
    fn two_sinks_still_return_a_sink() {
        // sinks at 23 and 14; a sink is a valid answer even off-promise
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = table(&g, &[(&[1, 3], &[2, 4]), (&[2, 4], &[3, 1])]);
        assert!(!is_uso(&g, &s, 64).unwrap());
        let res = find_sink(&g, &s).unwrap();
        assert_eq!(res.certificate(), Certificate::Sink(Point::new(vec![2, 3])));
    }

    #[test]
    fn cyclic_square_yields_collision() {
        // 13 -> 23 -> 24 -> 14 -> 13: no sink at all
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = table(&g, &[(&[1, 3], &[2]), (&[2, 3], &[4]), (&[2, 4], &[1]), (&[1, 4], &[3])]);
        let res = find_sink(&g, &s).unwrap();
        let FindSinkResult::Violation { cert, trace } = res else {
            panic!("cycle has no sink");
        };
        assert!(matches!(cert, Certificate::IndexCollision { .. }));
        assert!(verify_certificate(&g, &s, &cert));
        assert_eq!(trace.steps.last().unwrap().action, Action::Violation);
    }

    #[test]
    fn inconsistent_edge_in_slab() {
        // 13 -> 23 and 23 -> 13 at the same time
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        let s = table(&g, &[(&[1, 3], &[2]), (&[2, 3], &[1])]);
        let res = find_sink(&g, &s).unwrap();
        let cert = res.certificate();
        assert_eq!(
            cert,
            Certificate::IndexCollision {
                sub: Subgrid::from_restrictions(vec![vec![1, 2], vec![3]]),
                p: Point::new(vec![1, 3]),
                q: Point::new(vec![2, 3]),
            }
        );
    }

    #[test]
    fn trace_lines() {
        let g = Grid::from_sizes(&[2]).unwrap();
        let s = table(&g, &[(&[1], &[2])]);
        let res = find_sink(&g, &s).unwrap();
        let lines: Vec<alloc::string::String> =
            res.trace().steps.iter().map(|st| alloc::format!("{st}")).collect();
        assert_eq!(lines, ["0\t1\t(1)\tskip", "0\t2\t(1)\trecurse", "1\t2\t(2)\tskip", "0\t2\t(2)\tmerge"]);
        assert_eq!(res.certificate(), Certificate::Sink(Point::new(vec![2])));
    }
}
