use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicU64, Ordering};

use crate::dirset::DirSet;
use crate::grid::{Grid, GridError, Point, Subgrid};

type EvalFn = dyn Fn(&Point) -> DirSet + Send + Sync;

/// An outmap: for every point, the set of directions with outgoing edges.
///
/// Evaluation goes through [`Outmap::eval`], which bumps a call counter so
/// callers can assert how many times the outmap was consulted.
pub struct Outmap {
    eval: Box<EvalFn>,
    calls: AtomicU64,
}

impl Outmap {
    pub fn from_fn<F>(f: F) -> Self
    where
        F: Fn(&Point) -> DirSet + Send + Sync + 'static,
    {
        Outmap {
            eval: Box::new(f),
            calls: AtomicU64::new(0),
        }
    }

    /// Outmap backed by an explicit per-vertex table.
    pub fn from_table(table: OrientationTable) -> Self {
        let table = Arc::new(table);
        Outmap::from_fn(move |p| table.get(p).cloned().unwrap_or_default())
    }

    pub fn eval(&self, p: &Point) -> DirSet {
        self.calls.fetch_add(1, Ordering::Relaxed);
        (self.eval)(p)
    }

    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    /// Materializes the outmap over every vertex of `grid`.
    pub fn to_table(&self, grid: &Grid) -> OrientationTable {
        OrientationTable {
            grid: grid.clone(),
            entries: grid.points().map(|p| self.eval(&p)).collect(),
        }
    }
}

impl fmt::Debug for Outmap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Outmap").field("calls", &self.calls()).finish_non_exhaustive()
    }
}

/// `p -> σ(p) ∩ M'` on the points of a subgrid.
pub struct InducedOutmap<'a> {
    sub: &'a Subgrid,
    dirs: DirSet,
    base: &'a Outmap,
}

impl<'a> InducedOutmap<'a> {
    pub fn new(sub: &'a Subgrid, base: &'a Outmap) -> Self {
        InducedOutmap {
            sub,
            dirs: sub.direction_set(),
            base,
        }
    }

    pub fn subgrid(&self) -> &Subgrid {
        self.sub
    }

    pub fn eval(&self, p: &Point) -> Result<DirSet, GridError> {
        if !self.sub.contains(p) {
            return Err(GridError::PointOutsideSubgrid);
        }
        Ok(self.base.eval(p).intersection(&self.dirs))
    }
}

pub fn induced_outmap<'a>(sub: &'a Subgrid, base: &'a Outmap) -> InducedOutmap<'a> {
    InducedOutmap::new(sub, base)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("table has {got} entries, grid has {expected} vertices")]
    WrongSize { expected: u64, got: usize },
    #[error("edge {p} - {q} is claimed outgoing by both endpoints")]
    BothOutgoing { p: Point, q: Point },
    #[error("edge {p} - {q} is claimed by neither endpoint")]
    BothIncoming { p: Point, q: Point },
    #[error("{0} has an outgoing edge to itself")]
    SelfLoop(Point),
    #[error("{0} claims a direction outside 1..=n")]
    OutOfRange(Point),
}

/// Explicit outmap over all vertices of a grid, indexed by vertex rank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationTable {
    grid: Grid,
    entries: Vec<DirSet>,
}

impl OrientationTable {
    /// Table with arbitrary entries; see [`OrientationTable::check_orientation`]
    /// for the consistency conditions.
    pub fn new(grid: &Grid, entries: Vec<DirSet>) -> Result<Self, TableError> {
        if entries.len() as u64 != grid.vertex_count() {
            return Err(TableError::WrongSize {
                expected: grid.vertex_count(),
                got: entries.len(),
            });
        }
        for (r, e) in entries.iter().enumerate() {
            if e.max().is_some_and(|m| m > grid.n()) {
                return Err(TableError::OutOfRange(grid.point_from_rank(r as u64).unwrap()));
            }
        }
        Ok(OrientationTable {
            grid: grid.clone(),
            entries,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, p: &Point) -> Option<&DirSet> {
        if !self.grid.contains(p) {
            return None;
        }
        self.entries.get(self.grid.rank(p) as usize)
    }

    pub fn entries(&self) -> &[DirSet] {
        &self.entries
    }

    /// Reverses the edge between two adjacent points.
    pub fn flip(&mut self, p: &Point, q: &Point) -> Result<(), GridError> {
        let dim = differing_dim(&self.grid, p, q)?;
        let (rp, rq) = (self.grid.rank(p) as usize, self.grid.rank(q) as usize);
        let (to_q, to_p) = (q.coord(dim), p.coord(dim));
        let p_out = self.entries[rp].contains(to_q);
        let q_out = self.entries[rq].contains(to_p);
        set(&mut self.entries[rp], to_q, !p_out);
        set(&mut self.entries[rq], to_p, !q_out);
        Ok(())
    }

    /// Checks that the table is an orientation: loop-free and every edge
    /// oriented exactly one way.
    pub fn check_orientation(&self) -> Result<(), TableError> {
        for p in self.grid.points() {
            let out = &self.entries[self.grid.rank(&p) as usize];
            if p.coords().iter().any(|&c| out.contains(c)) {
                return Err(TableError::SelfLoop(p));
            }
            for (q, dir) in self.grid.neighbors(&p).unwrap() {
                if q < p {
                    continue;
                }
                let back = &self.entries[self.grid.rank(&q) as usize];
                let dim = self.grid.block_of(dir).unwrap();
                match (out.contains(dir), back.contains(p.coord(dim))) {
                    (true, true) => return Err(TableError::BothOutgoing { p, q }),
                    (false, false) => return Err(TableError::BothIncoming { p, q }),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

fn set(s: &mut DirSet, dir: u32, on: bool) {
    if on {
        s.insert(dir);
    } else {
        s.remove(dir);
    }
}

/// The single dimension in which two adjacent points differ.
pub(crate) fn differing_dim(grid: &Grid, p: &Point, q: &Point) -> Result<usize, GridError> {
    grid.check_point(p)?;
    grid.check_point(q)?;
    let mut diff = (0..grid.dims()).filter(|&b| p.coord(b) != q.coord(b));
    match (diff.next(), diff.next()) {
        (Some(b), None) => Ok(b),
        _ => Err(GridError::InvalidPoint),
    }
}
