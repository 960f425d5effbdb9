//! Refined indices and the three Grid-USO answer types.

use alloc::vec::Vec;
use core::fmt;

use crate::dirset::DirSet;
use crate::grid::{Grid, GridError, Point, Subgrid};
use crate::outmap::{InducedOutmap, Outmap};

/// Per-dimension count of outgoing edges under an induced outmap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefinedIndex(pub Vec<usize>);

impl RefinedIndex {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl fmt::Display for RefinedIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// Refined index of an already-induced outmap value.
pub(crate) fn index_of(sub: &Subgrid, induced: &DirSet) -> RefinedIndex {
    RefinedIndex(
        sub.restrictions()
            .iter()
            .map(|r| r.iter().filter(|&&d| induced.contains(d)).count())
            .collect(),
    )
}

pub fn refined_index(sub: &Subgrid, sigma: &Outmap, p: &Point) -> Result<RefinedIndex, GridError> {
    let induced = InducedOutmap::new(sub, sigma).eval(p)?;
    Ok(index_of(sub, &induced))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Certificate {
    /// `σ(p) = ∅`: the point is a sink.
    Sink(Point),
    /// `σ(p) ∩ p ≠ ∅`.
    SelfLoop(Point),
    /// Two distinct points of `sub` with equal refined index under the
    /// outmap induced on `sub`.
    IndexCollision { sub: Subgrid, p: Point, q: Point },
}

impl Certificate {
    /// `GU1`, `GUV1` or `GUV2`.
    pub fn tag(&self) -> &'static str {
        match self {
            Certificate::Sink(_) => "GU1",
            Certificate::SelfLoop(_) => "GUV1",
            Certificate::IndexCollision { .. } => "GUV2",
        }
    }

    pub fn is_violation(&self) -> bool {
        !matches!(self, Certificate::Sink(_))
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Certificate::Sink(p) | Certificate::SelfLoop(p) => write!(f, "{} {p}", self.tag()),
            Certificate::IndexCollision { sub, p, q } => {
                write!(f, "GUV2 {sub} {p} {q}")
            }
        }
    }
}

/// Checks a certificate with at most two outmap evaluations.
pub fn verify_certificate(grid: &Grid, sigma: &Outmap, cert: &Certificate) -> bool {
    match cert {
        Certificate::Sink(p) => grid.contains(p) && sigma.eval(p).is_empty(),
        Certificate::SelfLoop(p) => {
            grid.contains(p) && {
                let out = sigma.eval(p);
                p.coords().iter().any(|&c| out.contains(c))
            }
        }
        Certificate::IndexCollision { sub, p, q } => {
            if sub.validate(grid).is_err() || p == q || !sub.contains(p) || !sub.contains(q) {
                return false;
            }
            match (refined_index(sub, sigma, p), refined_index(sub, sigma, q)) {
                (Ok(a), Ok(b)) => a == b,
                _ => false,
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn layered_partial() -> (Grid, Outmap) {
        let g = Grid::from_sizes(&[2, 2, 3]).unwrap();
        let sigma = Outmap::from_fn(|p| {
            if p.coords() == [2, 4, 6] {
                [5, 7].into_iter().collect()
            } else {
                DirSet::new()
            }
        });
        (g, sigma)
    }

    #[test]
    fn refined_index_of_246() {
        let (g, sigma) = layered_partial();
        let p = Point::new(vec![2, 4, 6]);
        let r = refined_index(&g.full_subgrid(), &sigma, &p).unwrap();
        assert_eq!(r, RefinedIndex(vec![0, 0, 2]));
        let sub = Subgrid::new(&g, vec![vec![1, 2], vec![3, 4], vec![5, 6]]).unwrap();
        assert_eq!(
            crate::outmap::induced_outmap(&sub, &sigma).eval(&p).unwrap(),
            [5].into_iter().collect()
        );
        assert_eq!(refined_index(&sub, &sigma, &p).unwrap(), RefinedIndex(vec![0, 0, 1]));
        assert_eq!(
            refined_index(&sub, &sigma, &Point::new(vec![2, 4, 7])),
            Err(GridError::PointOutsideSubgrid)
        );
    }

    #[test]
    fn transitive_triangle_middle_index() {
        // 3 -> 2 -> 1 and 3 -> 1
        let g = Grid::from_sizes(&[3]).unwrap();
        let sigma = Outmap::from_fn(|p| match p.coord(0) {
            3 => [1, 2].into_iter().collect(),
            2 => [1].into_iter().collect(),
            _ => DirSet::new(),
        });
        let r = refined_index(&g.full_subgrid(), &sigma, &Point::new(vec![2])).unwrap();
        assert_eq!(r, RefinedIndex(vec![1]));
    }

    #[test]
    fn verify_rejects_equal_points_and_accepts_inconsistent_edge() {
        let g = Grid::from_sizes(&[2, 2]).unwrap();
        // the edge (1,3)-(2,3) is claimed outgoing by both endpoints
        let sigma = Outmap::from_fn(|p| match p.coords() {
            [1, 3] => [2].into_iter().collect(),
            [2, 3] => [1].into_iter().collect(),
            _ => DirSet::new(),
        });
        let sub = Subgrid::new(&g, vec![vec![1, 2], vec![3]]).unwrap();
        let p = Point::new(vec![1, 3]);
        let q = Point::new(vec![2, 3]);
        let good = Certificate::IndexCollision { sub: sub.clone(), p: p.clone(), q: q.clone() };
        assert!(verify_certificate(&g, &sigma, &good));
        assert_eq!(refined_index(&sub, &sigma, &p).unwrap(), RefinedIndex(vec![1, 0]));
        let same = Certificate::IndexCollision { sub, p: p.clone(), q: p.clone() };
        assert!(!verify_certificate(&g, &sigma, &same));
        assert!(verify_certificate(&g, &sigma, &Certificate::Sink(Point::new(vec![1, 4]))));
        assert!(!verify_certificate(&g, &sigma, &Certificate::Sink(p.clone())));
        assert!(!verify_certificate(&g, &sigma, &Certificate::SelfLoop(p)));
    }

    #[test]
    fn verify_uses_constant_outmap_calls() {
        let (g, sigma) = layered_partial();
        let cert = Certificate::IndexCollision {
            sub: g.full_subgrid(),
            p: Point::new(vec![1, 3, 5]),
            q: Point::new(vec![1, 3, 6]),
        };
        sigma.reset_calls();
        assert!(verify_certificate(&g, &sigma, &cert));
        assert_eq!(sigma.calls(), 2);
    }

    #[test]
    fn malformed_certificates_are_false() {
        let (g, sigma) = layered_partial();
        let outside = Point::new(vec![9, 9, 9]);
        assert!(!verify_certificate(&g, &sigma, &Certificate::Sink(outside.clone())));
        assert!(!verify_certificate(&g, &sigma, &Certificate::SelfLoop(outside)));
        let bad_sub = Subgrid::from_restrictions(vec![vec![1], vec![]]);
        let cert = Certificate::IndexCollision {
            sub: bad_sub,
            p: Point::new(vec![1, 3, 5]),
            q: Point::new(vec![2, 3, 5]),
        };
        assert!(!verify_certificate(&g, &sigma, &cert));
    }
}
