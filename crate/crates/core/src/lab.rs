//! Exponential-time ground truth and instance generators.
//!
//! Everything here enumerates vertices or subgrids explicitly, so every
//! entry point takes a vertex guard and refuses larger grids.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::certificate::{index_of, Certificate, RefinedIndex};
use crate::dirset::DirSet;
use crate::grid::{Grid, GridError, Point, Subgrid};
use crate::outmap::{OrientationTable, Outmap, TableError};

pub const DEFAULT_VERTEX_GUARD: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LabError {
    #[error("{vertices} vertices exceed the guard of {guard}")]
    GridTooLarge { vertices: u64, guard: u64 },
    #[error("bad generator spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Table(#[from] TableError),
}

fn guard(vertices: u64, limit: u64) -> Result<(), LabError> {
    if vertices > limit {
        Err(LabError::GridTooLarge { vertices, guard: limit })
    } else {
        Ok(())
    }
}

/// Outmap values of every vertex, indexed by rank.
struct Snapshot<'a> {
    grid: &'a Grid,
    out: Vec<DirSet>,
}

impl<'a> Snapshot<'a> {
    fn take(grid: &'a Grid, sigma: &Outmap) -> Self {
        Snapshot {
            grid,
            out: grid.points().map(|p| sigma.eval(&p)).collect(),
        }
    }

    fn get(&self, p: &Point) -> &DirSet {
        &self.out[self.grid.rank(p) as usize]
    }

    fn self_loop_in(&self, sub: &Subgrid) -> Option<Point> {
        sub.points().find(|p| {
            let out = self.get(p);
            p.coords().iter().any(|&c| out.contains(c))
        })
    }

    fn sink_count(&self, sub: &Subgrid) -> usize {
        let dirs = sub.direction_set();
        sub.points()
            .filter(|p| self.get(p).intersection(&dirs).is_empty())
            .count()
    }

    /// First pair (in point order) of distinct points with equal refined index.
    fn collision(&self, sub: &Subgrid) -> Option<(Point, Point)> {
        let dirs = sub.direction_set();
        let mut seen: BTreeMap<RefinedIndex, Point> = BTreeMap::new();
        for q in sub.points() {
            let idx = index_of(sub, &self.get(&q).intersection(&dirs));
            if let Some(p) = seen.get(&idx) {
                return Some((p.clone(), q));
            }
            seen.insert(idx, q);
        }
        None
    }
}

/// Every nonempty induced subgrid of `root`, smallest vertex count first,
/// ties broken by lexicographic restriction.
pub fn subgrids_of(root: &Subgrid) -> Vec<Subgrid> {
    let choices: Vec<Vec<Vec<u32>>> = root.restrictions().iter().map(|r| nonempty_subsets(r)).collect();
    let mut out = Vec::new();
    let mut idx = alloc::vec![0usize; choices.len()];
    'outer: loop {
        out.push(Subgrid::from_restrictions(
            idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect(),
        ));
        for (b, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < choices[b].len() {
                continue 'outer;
            }
            *i = 0;
        }
        break;
    }
    out.sort_by(|a, b| a.vertex_count().cmp(&b.vertex_count()).then_with(|| a.cmp(b)));
    out
}

fn nonempty_subsets(items: &[u32]) -> Vec<Vec<u32>> {
    (1u64..(1 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &d)| d)
                .collect()
        })
        .collect()
}

/// True iff every nonempty induced subgrid has exactly one sink.
pub fn is_uso(grid: &Grid, sigma: &Outmap, vertex_guard: u64) -> Result<bool, LabError> {
    guard(grid.vertex_count(), vertex_guard)?;
    let snap = Snapshot::take(grid, sigma);
    Ok(subgrids_of(&grid.full_subgrid())
        .iter()
        .all(|sub| snap.sink_count(sub) == 1))
}

/// The unique sink of the full grid, if there is exactly one.
pub fn unique_sink(grid: &Grid, sigma: &Outmap, vertex_guard: u64) -> Result<Option<Point>, LabError> {
    guard(grid.vertex_count(), vertex_guard)?;
    let mut sinks = grid.points().filter(|p| sigma.eval(p).is_empty());
    Ok(match (sinks.next(), sinks.next()) {
        (Some(p), None) => Some(p),
        _ => None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BijectionCheck {
    Bijective,
    Collision(Point, Point),
}

/// Injectivity of the refined index over the full grid. Domain and
/// codomain have the same size, so injective means bijective.
pub fn refined_index_bijection_check(
    grid: &Grid,
    sigma: &Outmap,
    vertex_guard: u64,
) -> Result<BijectionCheck, LabError> {
    guard(grid.vertex_count(), vertex_guard)?;
    let snap = Snapshot::take(grid, sigma);
    Ok(match snap.collision(&grid.full_subgrid()) {
        Some((p, q)) => BijectionCheck::Collision(p, q),
        None => BijectionCheck::Bijective,
    })
}

/// A self-loop anywhere in the grid, else the smallest subgrid with a
/// refined-index collision, else `None`.
pub fn find_violation_bruteforce(
    grid: &Grid,
    sigma: &Outmap,
    vertex_guard: u64,
) -> Result<Option<Certificate>, LabError> {
    find_violation_within(grid, sigma, &grid.full_subgrid(), vertex_guard)
}

/// [`find_violation_bruteforce`] restricted to the subgrids of `root`.
pub fn find_violation_within(
    grid: &Grid,
    sigma: &Outmap,
    root: &Subgrid,
    vertex_guard: u64,
) -> Result<Option<Certificate>, LabError> {
    root.validate(grid)?;
    guard(root.vertex_count(), vertex_guard)?;
    let snap = Snapshot {
        grid,
        out: {
            // only the points of root are consulted; the rest stay empty
            let mut out = alloc::vec![DirSet::new(); grid.vertex_count() as usize];
            for p in root.points() {
                out[grid.rank(&p) as usize] = sigma.eval(&p);
            }
            out
        },
    };
    if let Some(p) = snap.self_loop_in(root) {
        return Ok(Some(Certificate::SelfLoop(p)));
    }
    for sub in subgrids_of(root) {
        if let Some((p, q)) = snap.collision(&sub) {
            return Ok(Some(Certificate::IndexCollision { sub, p, q }));
        }
    }
    Ok(None)
}

/// An undirected grid edge; `low` precedes `high` in rank order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub low: Point,
    pub high: Point,
    pub dim: usize,
}

/// All edges, ordered by the rank of the lower endpoint, then dimension,
/// then the upper endpoint.
pub fn edges(grid: &Grid) -> Vec<Edge> {
    let mut out = Vec::new();
    for p in grid.points() {
        for b in 0..grid.dims() {
            let (_, hi) = grid.block(b);
            for c in p.coord(b) + 1..=hi {
                out.push(Edge {
                    low: p.clone(),
                    high: p.with(b, c),
                    dim: b,
                });
            }
        }
    }
    out
}

/// The orientation where bit `e` of `mask` set means edge `e` points from
/// `low` to `high`.
pub fn orientation_from_mask(grid: &Grid, edges: &[Edge], mask: u64) -> OrientationTable {
    let mut entries = alloc::vec![DirSet::new(); grid.vertex_count() as usize];
    for (e, edge) in edges.iter().enumerate() {
        let (from, to) = if mask >> e & 1 == 1 {
            (&edge.low, &edge.high)
        } else {
            (&edge.high, &edge.low)
        };
        entries[grid.rank(from) as usize].insert(to.coord(edge.dim));
    }
    OrientationTable::new(grid, entries).expect("mask orientation fits the grid")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// Every fiber edge points toward the endpoint earlier in its block's
    /// order; `orders[b]` is a permutation of block `b`.
    Product { orders: Vec<Vec<u32>> },
    /// Independent uniform edge directions.
    Random { seed: u64 },
    /// `base` with the listed edges reversed.
    Mutated { base: Box<GeneratorSpec>, flips: Vec<(Point, Point)> },
    Table(OrientationTable),
    /// Arbitrary per-point direction sets, including own coordinates.
    InconsistentRandom { seed: u64 },
    /// Recursively combed USO: the edges of block `b` follow a random order
    /// that depends only on the coordinates of the later blocks.
    Combed { seed: u64 },
}

impl GeneratorSpec {
    /// Product orientation with every block in ascending order.
    pub fn ascending(grid: &Grid) -> Self {
        GeneratorSpec::Product {
            orders: (0..grid.dims()).map(|b| grid.block_dirs(b)).collect(),
        }
    }
}

/// Largest grid a table-backed generator will materialize.
pub const TABLE_GUARD: u64 = 1 << 20;

pub fn generate(grid: &Grid, spec: &GeneratorSpec) -> Result<Outmap, LabError> {
    match spec {
        GeneratorSpec::Product { orders } => {
            let rank_in_order = product_positions(grid, orders)?;
            Ok(Outmap::from_fn(move |p| {
                let mut out = DirSet::new();
                for (b, pos) in rank_in_order.iter().enumerate() {
                    let mine = pos[&p.coord(b)];
                    for (&dir, &other) in pos {
                        if other < mine {
                            out.insert(dir);
                        }
                    }
                }
                out
            }))
        }
        _ => Ok(Outmap::from_table(generate_table(grid, spec)?)),
    }
}

/// Materializes any generator as an explicit table.
pub fn generate_table(grid: &Grid, spec: &GeneratorSpec) -> Result<OrientationTable, LabError> {
    guard(grid.vertex_count(), TABLE_GUARD)?;
    match spec {
        GeneratorSpec::Product { .. } => Ok(generate(grid, spec)?.to_table(grid)),
        GeneratorSpec::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let edges = edges(grid);
            let mut entries = alloc::vec![DirSet::new(); grid.vertex_count() as usize];
            for edge in &edges {
                let (from, to) = if rng.next_u32() & 1 == 1 {
                    (&edge.low, &edge.high)
                } else {
                    (&edge.high, &edge.low)
                };
                entries[grid.rank(from) as usize].insert(to.coord(edge.dim));
            }
            Ok(OrientationTable::new(grid, entries)?)
        }
        GeneratorSpec::Mutated { base, flips } => {
            let mut table = generate_table(grid, base)?;
            for (p, q) in flips {
                table.flip(p, q)?;
            }
            Ok(table)
        }
        GeneratorSpec::Table(table) => {
            if table.grid() != grid {
                return Err(LabError::BadSpec("table belongs to a different grid".into()));
            }
            Ok(table.clone())
        }
        GeneratorSpec::Combed { seed } => {
            let mut orders: BTreeMap<(usize, Vec<u32>), BTreeMap<u32, usize>> = BTreeMap::new();
            let mut entries = Vec::with_capacity(grid.vertex_count() as usize);
            for p in grid.points() {
                let mut out = DirSet::new();
                for b in 0..grid.dims() {
                    let later = p.coords()[b + 1..].to_vec();
                    let pos = orders.entry((b, later)).or_insert_with_key(|(b, later)| {
                        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                        let key = later.iter().fold(0u64, |acc, &c| acc.wrapping_mul(1_000_003).wrapping_add(c as u64));
                        rng.set_stream(((*b as u64) << 48) ^ key);
                        let mut order = grid.block_dirs(*b);
                        for i in (1..order.len()).rev() {
                            order.swap(i, rng.next_u32() as usize % (i + 1));
                        }
                        order.into_iter().enumerate().map(|(i, d)| (d, i)).collect()
                    });
                    let mine = pos[&p.coord(b)];
                    out.extend(pos.iter().filter(|&(_, &o)| o < mine).map(|(&d, _)| d));
                }
                entries.push(out);
            }
            Ok(OrientationTable::new(grid, entries)?)
        }
        GeneratorSpec::InconsistentRandom { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let entries = grid
                .points()
                .map(|_| (1..=grid.n()).filter(|_| rng.next_u32() & 1 == 1).collect())
                .collect();
            Ok(OrientationTable::new(grid, entries)?)
        }
    }
}

/// Position of every direction within its block's order.
fn product_positions(grid: &Grid, orders: &[Vec<u32>]) -> Result<Vec<BTreeMap<u32, usize>>, LabError> {
    if orders.len() != grid.dims() {
        return Err(LabError::BadSpec(alloc::format!(
            "{} orders for {} blocks",
            orders.len(),
            grid.dims()
        )));
    }
    orders
        .iter()
        .enumerate()
        .map(|(b, order)| {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted != grid.block_dirs(b) {
                return Err(LabError::BadSpec(alloc::format!(
                    "order {b} is not a permutation of its block"
                )));
            }
            Ok(order.iter().enumerate().map(|(i, &d)| (d, i)).collect())
        })
        .collect()
}

/// The vertex taking the first direction of every order.
pub fn product_sink(orders: &[Vec<u32>]) -> Point {
    Point::new(orders.iter().map(|o| o[0]).collect())
}

/// Every choice of per-block orders for a grid.
pub fn all_product_orders(grid: &Grid) -> Vec<Vec<Vec<u32>>> {
    let per_block: Vec<Vec<Vec<u32>>> = (0..grid.dims()).map(|b| permutations(&grid.block_dirs(b))).collect();
    let mut out: Vec<Vec<Vec<u32>>> = alloc::vec![Vec::new()];
    for choices in per_block {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    out
}

fn permutations(items: &[u32]) -> Vec<Vec<u32>> {
    if items.len() <= 1 {
        return alloc::vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}
