//! Grids as products of cliques.
//!
//! A grid is described by an ordered partition of the directions `1..=n`
//! into blocks. A vertex picks exactly one direction from every block, and
//! two vertices are adjacent when they differ in exactly one block. Grids
//! are always stored canonically: block `b` is the contiguous range
//! `lo_b..=hi_b` and the ranges ascend with `b`. Input partitions that are
//! not of that shape are relabeled at construction and the relabeling is
//! kept on the grid.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::dirset::DirSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("block {block} has {size} direction(s); every block needs at least 2")]
    BlockTooSmall { block: usize, size: usize },
    #[error("blocks do not partition 1..=n: {0}")]
    NotAPartition(String),
    #[error("point is not a vertex of the grid")]
    InvalidPoint,
    #[error("point lies outside the subgrid")]
    PointOutsideSubgrid,
    #[error("subgrid restriction {0} is empty or leaves its block")]
    InvalidSubgrid(usize),
}

/// A vertex: one direction value per dimension.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<u32>);

impl Point {
    pub fn new(coords: Vec<u32>) -> Self {
        Point(coords)
    }

    pub fn coords(&self) -> &[u32] {
        &self.0
    }

    pub fn coord(&self, dim: usize) -> u32 {
        self.0[dim]
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    /// Copy of `self` with dimension `dim` moved to `value`.
    pub fn with(&self, dim: usize, value: u32) -> Point {
        let mut c = self.0.clone();
        c[dim] = value;
        Point(c)
    }

    /// True when `dir` is one of this point's coordinates.
    pub fn has(&self, dir: u32) -> bool {
        self.0.contains(&dir)
    }

    pub fn into_coords(self) -> Vec<u32> {
        self.0
    }
}

impl From<Vec<u32>> for Point {
    fn from(v: Vec<u32>) -> Self {
        Point(v)
    }
}

impl From<&[u32]> for Point {
    fn from(v: &[u32]) -> Self {
        Point(v.to_vec())
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    n: u32,
    /// Inclusive direction range of each block.
    blocks: Vec<(u32, u32)>,
    /// `relabeling[d - 1]` is the canonical label of input direction `d`.
    relabeling: Vec<u32>,
}

impl Grid {
    /// Grid whose blocks have the given sizes, laid out contiguously.
    pub fn from_sizes(sizes: &[usize]) -> Result<Grid, GridError> {
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut next = 1u32;
        for (b, &size) in sizes.iter().enumerate() {
            if size == 0 {
                return Err(GridError::EmptyBlock(b));
            }
            if size < 2 {
                return Err(GridError::BlockTooSmall { block: b, size });
            }
            blocks.push((next, next + size as u32 - 1));
            next += size as u32;
        }
        if blocks.is_empty() {
            return Err(GridError::NotAPartition("no blocks".into()));
        }
        let n = next - 1;
        Ok(Grid {
            n,
            blocks,
            relabeling: (1..=n).collect(),
        })
    }

    /// Grid from an explicit partition of `1..=n`. Each block is taken in
    /// ascending order; the result is relabeled to contiguous blocks.
    pub fn from_partition(blocks: &[Vec<u32>]) -> Result<Grid, GridError> {
        if blocks.is_empty() {
            return Err(GridError::NotAPartition("no blocks".into()));
        }
        let mut sizes = Vec::with_capacity(blocks.len());
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(GridError::EmptyBlock(b));
            }
            sizes.push(block.len());
        }
        let n: u32 = sizes.iter().sum::<usize>() as u32;
        let mut relabeling = alloc::vec![0u32; n as usize];
        let mut next = 1u32;
        for block in blocks {
            let mut sorted = block.clone();
            sorted.sort_unstable();
            for &d in &sorted {
                if d == 0 || d > n {
                    return Err(GridError::NotAPartition(alloc::format!(
                        "direction {d} outside 1..={n}"
                    )));
                }
                if relabeling[d as usize - 1] != 0 {
                    return Err(GridError::NotAPartition(alloc::format!(
                        "direction {d} appears twice"
                    )));
                }
                relabeling[d as usize - 1] = next;
                next += 1;
            }
        }
        for (b, &size) in sizes.iter().enumerate() {
            if size < 2 {
                return Err(GridError::BlockTooSmall { block: b, size });
            }
        }
        let mut grid = Grid::from_sizes(&sizes)?;
        grid.relabeling = relabeling;
        Ok(grid)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of dimensions (blocks).
    pub fn dims(&self) -> usize {
        self.blocks.len()
    }

    /// Inclusive direction range `(lo, hi)` of block `b`.
    pub fn block(&self, b: usize) -> (u32, u32) {
        self.blocks[b]
    }

    pub fn block_len(&self, b: usize) -> usize {
        let (lo, hi) = self.blocks[b];
        (hi - lo + 1) as usize
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        (0..self.dims()).map(|b| self.block_len(b)).collect()
    }

    pub fn block_dirs(&self, b: usize) -> Vec<u32> {
        let (lo, hi) = self.blocks[b];
        (lo..=hi).collect()
    }

    pub fn block_of(&self, dir: u32) -> Option<usize> {
        if dir == 0 || dir > self.n {
            return None;
        }
        Some(self.blocks.partition_point(|&(_, hi)| hi < dir))
    }

    pub fn relabeling(&self) -> &[u32] {
        &self.relabeling
    }

    /// True when the grid was built from contiguous ascending input.
    pub fn is_identity_labeled(&self) -> bool {
        self.relabeling.iter().enumerate().all(|(i, &d)| d == i as u32 + 1)
    }

    /// Canonical label of an input direction.
    pub fn relabel(&self, original: u32) -> Option<u32> {
        self.relabeling.get((original as usize).checked_sub(1)?).copied()
    }

    /// Number of vertices, saturating at `u64::MAX`.
    pub fn vertex_count(&self) -> u64 {
        (0..self.dims()).fold(1u64, |acc, b| acc.saturating_mul(self.block_len(b) as u64))
    }

    pub fn all_directions(&self) -> DirSet {
        (1..=self.n).collect()
    }

    /// The point taking the first direction of every block.
    pub fn bottom_left(&self) -> Point {
        Point(self.blocks.iter().map(|&(lo, _)| lo).collect())
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dims() == self.dims()
            && p.coords()
                .iter()
                .zip(&self.blocks)
                .all(|(&c, &(lo, hi))| lo <= c && c <= hi)
    }

    pub fn check_point(&self, p: &Point) -> Result<(), GridError> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(GridError::InvalidPoint)
        }
    }

    /// Mixed-radix rank, dimension 0 least significant. `p` must be valid.
    pub fn rank(&self, p: &Point) -> u64 {
        let mut rank = 0u64;
        let mut scale = 1u64;
        for (b, &(lo, _)) in self.blocks.iter().enumerate() {
            rank += (p.coord(b) - lo) as u64 * scale;
            scale = scale.saturating_mul(self.block_len(b) as u64);
        }
        rank
    }

    pub fn point_from_rank(&self, mut rank: u64) -> Option<Point> {
        if rank >= self.vertex_count() {
            return None;
        }
        let mut coords = Vec::with_capacity(self.dims());
        for (b, &(lo, _)) in self.blocks.iter().enumerate() {
            let len = self.block_len(b) as u64;
            coords.push(lo + (rank % len) as u32);
            rank /= len;
        }
        Some(Point(coords))
    }

    /// All vertices in rank order.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.vertex_count()).map(move |r| self.point_from_rank(r).unwrap())
    }

    /// Every vertex adjacent to `p`, paired with its coordinate in the
    /// block where it differs from `p`.
    pub fn neighbors(&self, p: &Point) -> Result<Vec<(Point, u32)>, GridError> {
        self.check_point(p)?;
        let mut out = Vec::new();
        for (b, &(lo, hi)) in self.blocks.iter().enumerate() {
            for dir in lo..=hi {
                if dir != p.coord(b) {
                    out.push((p.with(b, dir), dir));
                }
            }
        }
        Ok(out)
    }

    pub fn full_subgrid(&self) -> Subgrid {
        Subgrid {
            restrictions: (0..self.dims()).map(|b| self.block_dirs(b)).collect(),
        }
    }
}

/// An induced subgrid: a nonempty subset of every block.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subgrid {
    restrictions: Vec<Vec<u32>>,
}

impl Subgrid {
    pub fn new(grid: &Grid, restrictions: Vec<Vec<u32>>) -> Result<Subgrid, GridError> {
        let sub = Subgrid::from_restrictions(restrictions);
        sub.validate(grid)?;
        Ok(sub)
    }

    /// Builds without validation; restrictions are sorted and deduplicated.
    pub fn from_restrictions(mut restrictions: Vec<Vec<u32>>) -> Subgrid {
        for r in &mut restrictions {
            r.sort_unstable();
            r.dedup();
        }
        Subgrid { restrictions }
    }

    /// The one-point subgrid at `p`.
    pub fn singleton(p: &Point) -> Subgrid {
        Subgrid {
            restrictions: p.coords().iter().map(|&c| alloc::vec![c]).collect(),
        }
    }

    pub fn validate(&self, grid: &Grid) -> Result<(), GridError> {
        if self.restrictions.len() != grid.dims() {
            return Err(GridError::InvalidSubgrid(self.restrictions.len()));
        }
        for (b, r) in self.restrictions.iter().enumerate() {
            let (lo, hi) = grid.block(b);
            if r.is_empty() || r.iter().any(|&d| d < lo || d > hi) {
                return Err(GridError::InvalidSubgrid(b));
            }
        }
        Ok(())
    }

    pub fn restrictions(&self) -> &[Vec<u32>] {
        &self.restrictions
    }

    pub fn restriction(&self, b: usize) -> &[u32] {
        &self.restrictions[b]
    }

    pub fn dims(&self) -> usize {
        self.restrictions.len()
    }

    /// The union of the restrictions.
    pub fn direction_set(&self) -> DirSet {
        self.restrictions.iter().flatten().copied().collect()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dims() == self.dims()
            && p.coords()
                .iter()
                .zip(&self.restrictions)
                .all(|(c, r)| r.binary_search(c).is_ok())
    }

    pub fn vertex_count(&self) -> u64 {
        self.restrictions
            .iter()
            .fold(1u64, |acc, r| acc.saturating_mul(r.len() as u64))
    }

    /// Vertices in mixed-radix order, dimension 0 varying fastest.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let total = self.vertex_count();
        (0..total).map(move |mut rank| {
            let coords = self
                .restrictions
                .iter()
                .map(|r| {
                    let c = r[(rank % r.len() as u64) as usize];
                    rank /= r.len() as u64;
                    c
                })
                .collect();
            Point(coords)
        })
    }
}

impl fmt::Display for Subgrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (b, r) in self.restrictions.iter().enumerate() {
            if b > 0 {
                f.write_str("x")?;
            }
            f.write_str("{")?;
            for (i, d) in r.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{d}")?;
            }
            f.write_str("}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn layered() -> Grid {
        Grid::from_sizes(&[2, 2, 3]).unwrap()
    }

    #[test]
    fn layered_shape() {
        let g = Grid::from_partition(&[vec![1, 2], vec![3, 4], vec![5, 6, 7]]).unwrap();
        assert_eq!(g.n(), 7);
        assert_eq!(g.dims(), 3);
        assert_eq!(g.vertex_count(), 12);
        assert!(g.is_identity_labeled());
        assert_eq!(g, layered());
    }

    #[test]
    fn construction_errors() {
        assert_eq!(
            Grid::from_sizes(&[1, 2]),
            Err(GridError::BlockTooSmall { block: 0, size: 1 })
        );
        assert_eq!(Grid::from_sizes(&[2, 0]), Err(GridError::EmptyBlock(1)));
        assert!(matches!(
            Grid::from_partition(&[vec![1, 2], vec![2, 3]]),
            Err(GridError::NotAPartition(_))
        ));
        assert!(matches!(
            Grid::from_partition(&[vec![1, 2], vec![4, 5]]),
            Err(GridError::NotAPartition(_))
        ));
        assert_eq!(
            Grid::from_partition(&[vec![1, 2], vec![3]]),
            Err(GridError::BlockTooSmall { block: 1, size: 1 })
        );
    }

    #[test]
    fn non_contiguous_partition_is_relabeled() {
        let g = Grid::from_partition(&[vec![1, 3], vec![2, 4]]).unwrap();
        assert_eq!(g.block(0), (1, 2));
        assert_eq!(g.block(1), (3, 4));
        assert_eq!(g.relabeling(), &[1, 3, 2, 4]);
        assert!(!g.is_identity_labeled());
    }

    #[test]
    fn neighbor_counts() {
        let g = layered();
        for p in g.points() {
            assert_eq!(g.neighbors(&p).unwrap().len(), 1 + 1 + 2);
        }
        let line = Grid::from_sizes(&[2]).unwrap();
        let nb = line.neighbors(&Point::new(vec![1])).unwrap();
        assert_eq!(nb, vec![(Point::new(vec![2]), 2)]);
        assert_eq!(
            g.neighbors(&Point::new(vec![3, 4, 5])),
            Err(GridError::InvalidPoint)
        );
    }

    #[test]
    fn neighbors_match_symmetric_difference() {
        let g = layered();
        let p = Point::new(vec![2, 4, 6]);
        // brute force: |p xor q| == 2 on the set representation
        let mut expected: Vec<Point> = g
            .points()
            .filter(|q| q.coords().iter().filter(|c| !p.has(**c)).count() == 1)
            .collect();
        expected.sort();
        let mut got: Vec<Point> = g.neighbors(&p).unwrap().into_iter().map(|(q, _)| q).collect();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(
            expected,
            vec![
                Point::new(vec![1, 4, 6]),
                Point::new(vec![2, 3, 6]),
                Point::new(vec![2, 4, 5]),
                Point::new(vec![2, 4, 7]),
            ]
        );
    }

    #[test]
    fn rank_roundtrip() {
        let g = layered();
        for (r, p) in g.points().enumerate() {
            assert_eq!(g.rank(&p), r as u64);
        }
        assert_eq!(g.point_from_rank(0), Some(g.bottom_left()));
        assert_eq!(g.point_from_rank(12), None);
    }

    #[test]
    fn block_lookup() {
        let g = layered();
        assert_eq!(g.block_of(1), Some(0));
        assert_eq!(g.block_of(4), Some(1));
        assert_eq!(g.block_of(7), Some(2));
        assert_eq!(g.block_of(8), None);
        assert_eq!(g.block_of(0), None);
    }

    #[test]
    fn subgrid_validation() {
        let g = layered();
        assert!(Subgrid::new(&g, vec![vec![1], vec![3, 4], vec![5, 6]]).is_ok());
        assert_eq!(
            Subgrid::new(&g, vec![vec![1], vec![], vec![5]]),
            Err(GridError::InvalidSubgrid(1))
        );
        assert_eq!(
            Subgrid::new(&g, vec![vec![3], vec![4], vec![5]]),
            Err(GridError::InvalidSubgrid(0))
        );
        let s = Subgrid::new(&g, vec![vec![2, 1], vec![4], vec![7, 5]]).unwrap();
        assert_eq!(s.vertex_count(), 4);
        assert_eq!(s.points().count(), 4);
        assert!(s.points().all(|p| s.contains(&p)));
        assert_eq!(s.direction_set().iter().collect::<Vec<_>>(), [1, 2, 4, 5, 7]);
    }
}
