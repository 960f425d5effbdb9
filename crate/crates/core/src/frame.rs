//! Search frames of the line-following sink finder.
//!
//! A frame is the subgrid one activation of the search works on. While the
//! activation is about to process direction `i`, its current point is the
//! sink of the *prefix* subgrid: every block keeps its directions below `i`,
//! and a block with none of those keeps its first direction. Recursing on
//! direction `i` of block `j` searches the prefix with block `j` replaced
//! by `{i}`.

use alloc::vec::Vec;

use crate::dirset::DirSet;
use crate::grid::{Grid, Point, Subgrid};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    sub: Subgrid,
}

impl Frame {
    pub fn top(grid: &Grid) -> Frame {
        Frame {
            sub: grid.full_subgrid(),
        }
    }

    /// `sub` must be valid for the grid it is used with.
    pub fn from_subgrid(sub: Subgrid) -> Frame {
        Frame { sub }
    }

    pub fn subgrid(&self) -> &Subgrid {
        &self.sub
    }

    pub fn bottom_left(&self) -> Point {
        Point::new(self.sub.restrictions().iter().map(|r| r[0]).collect())
    }

    /// All directions of the frame, ascending.
    pub fn directions(&self) -> Vec<u32> {
        self.sub.direction_set().iter().collect()
    }

    /// True when `dir` belongs to the frame and is not the first direction
    /// of its block, i.e. processing it can start a recursion.
    pub fn can_trigger(&self, grid: &Grid, dir: u32) -> bool {
        grid.block_of(dir).is_some_and(|b| {
            let r = self.sub.restriction(b);
            r[0] != dir && r.binary_search(&dir).is_ok()
        })
    }

    fn prefix_of(r: &[u32], pos: u32) -> &[u32] {
        let k = r.partition_point(|&d| d < pos);
        &r[..k.max(1)]
    }

    /// The subgrid already processed when direction `pos` is next.
    pub fn prefix(&self, pos: u32) -> Subgrid {
        Subgrid::from_restrictions(
            self.sub
                .restrictions()
                .iter()
                .map(|r| Self::prefix_of(r, pos).to_vec())
                .collect(),
        )
    }

    pub fn in_prefix(&self, pos: u32, p: &Point) -> bool {
        p.dims() == self.sub.dims()
            && self
                .sub
                .restrictions()
                .iter()
                .zip(p.coords())
                .all(|(r, c)| Self::prefix_of(r, pos).binary_search(c).is_ok())
    }

    /// True when `out` (the outmap of `p`) has no direction of the prefix
    /// at `pos` other than `p`'s own coordinates.
    pub fn is_prefix_sink(&self, grid: &Grid, pos: u32, p: &Point, out: &DirSet) -> bool {
        out.iter().all(|d| {
            let Some(b) = grid.block_of(d) else { return true };
            d == p.coord(b) || Self::prefix_of(self.sub.restriction(b), pos).binary_search(&d).is_err()
        })
    }

    /// The frame searched when direction `trigger` starts a recursion.
    pub fn child(&self, grid: &Grid, trigger: u32) -> Frame {
        let j = grid.block_of(trigger).expect("trigger is a grid direction");
        let mut restrictions: Vec<Vec<u32>> = self
            .sub
            .restrictions()
            .iter()
            .map(|r| Self::prefix_of(r, trigger).to_vec())
            .collect();
        restrictions[j] = alloc::vec![trigger];
        Frame {
            sub: Subgrid::from_restrictions(restrictions),
        }
    }
}
