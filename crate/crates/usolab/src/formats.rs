//! JSON file formats. Directions in files use the labels of the input
//! partition; everything in memory uses the grid's canonical labels.

use std::collections::BTreeMap;

use anyhow::{anyhow, bail, ensure, Context, Result};
use griduso::bits::BitString;
use griduso::eopl::{TableInstance, UfeoplAnswer, Ufv1Kind};
use griduso::findsink::TraceStep;
use griduso::lab::{generate, GeneratorSpec};
use griduso::{Certificate, DirSet, Grid, OrientationTable, Outmap, Point, Subgrid};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridJson {
    pub blocks: Vec<Vec<u32>>,
}

/// A grid together with its input labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGrid {
    pub grid: Grid,
    original: Vec<u32>,
}

impl LabeledGrid {
    pub fn new(grid: Grid) -> Self {
        let mut original = vec![0; grid.n() as usize];
        for (i, &c) in grid.relabeling().iter().enumerate() {
            original[c as usize - 1] = i as u32 + 1;
        }
        LabeledGrid { grid, original }
    }

    pub fn from_json(g: &GridJson) -> Result<Self> {
        Ok(LabeledGrid::new(Grid::from_partition(&g.blocks)?))
    }

    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        Ok(LabeledGrid::new(Grid::from_sizes(sizes)?))
    }

    pub fn to_json(&self) -> GridJson {
        GridJson {
            blocks: (0..self.grid.dims())
                .map(|b| {
                    let mut dirs: Vec<u32> = self.grid.block_dirs(b).into_iter().map(|d| self.out_dir(d)).collect();
                    dirs.sort_unstable();
                    dirs
                })
                .collect(),
        }
    }

    pub fn in_dir(&self, d: u32) -> Result<u32> {
        self.grid.relabel(d).ok_or_else(|| anyhow!("direction {d} is not in the grid"))
    }

    pub fn out_dir(&self, d: u32) -> u32 {
        self.original[d as usize - 1]
    }

    pub fn in_point(&self, coords: &[u32]) -> Result<Point> {
        let p = Point::new(coords.iter().map(|&d| self.in_dir(d)).collect::<Result<_>>()?);
        self.grid.check_point(&p).with_context(|| format!("{coords:?} is not a grid point"))?;
        Ok(p)
    }

    pub fn out_point(&self, p: &Point) -> Vec<u32> {
        p.coords().iter().map(|&d| self.out_dir(d)).collect()
    }

    pub fn in_dirs(&self, dirs: &[u32]) -> Result<Vec<u32>> {
        dirs.iter().map(|&d| self.in_dir(d)).collect()
    }

    pub fn out_dirs(&self, dirs: &DirSet) -> Vec<u32> {
        let mut v: Vec<u32> = dirs.iter().map(|d| self.out_dir(d)).collect();
        v.sort_unstable();
        v
    }

    pub fn in_subgrid(&self, restrictions: &[Vec<u32>]) -> Result<Subgrid> {
        let r = restrictions.iter().map(|r| self.in_dirs(r)).collect::<Result<Vec<_>>>()?;
        let sub = Subgrid::from_restrictions(r);
        sub.validate(&self.grid)?;
        Ok(sub)
    }

    pub fn out_subgrid(&self, sub: &Subgrid) -> Vec<Vec<u32>> {
        sub.restrictions()
            .iter()
            .map(|r| {
                let mut v: Vec<u32> = r.iter().map(|&d| self.out_dir(d)).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    fn point_key(&self, p: &Point) -> String {
        self.out_point(p).iter().map(u32::to_string).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum GeneratorJson {
    Product { orders: Vec<Vec<u32>> },
    Random { seed: u64 },
    Combed { seed: u64 },
    Inconsistent { seed: u64 },
    Mutated { base: Box<GeneratorJson>, flips: Vec<[Vec<u32>; 2]> },
}

impl GeneratorJson {
    pub fn to_spec(&self, lg: &LabeledGrid) -> Result<GeneratorSpec> {
        Ok(match self {
            GeneratorJson::Product { orders } => GeneratorSpec::Product {
                orders: orders.iter().map(|o| lg.in_dirs(o)).collect::<Result<_>>()?,
            },
            GeneratorJson::Random { seed } => GeneratorSpec::Random { seed: *seed },
            GeneratorJson::Combed { seed } => GeneratorSpec::Combed { seed: *seed },
            GeneratorJson::Inconsistent { seed } => GeneratorSpec::InconsistentRandom { seed: *seed },
            GeneratorJson::Mutated { base, flips } => GeneratorSpec::Mutated {
                base: Box::new(base.to_spec(lg)?),
                flips: flips
                    .iter()
                    .map(|[p, q]| Ok((lg.in_point(p)?, lg.in_point(q)?)))
                    .collect::<Result<_>>()?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutmapJson {
    /// Point key `"1,3,5"` to outgoing directions; missing points have none.
    Table(BTreeMap<String, Vec<u32>>),
    Generator(GeneratorJson),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceJson {
    pub grid: GridJson,
    pub outmap: OutmapJson,
}

/// A loaded instance.
pub struct Instance {
    pub lg: LabeledGrid,
    pub sigma: Outmap,
    pub json: InstanceJson,
}

impl Instance {
    pub fn from_json(json: InstanceJson) -> Result<Instance> {
        let lg = LabeledGrid::from_json(&json.grid)?;
        let sigma = match &json.outmap {
            OutmapJson::Generator(g) => generate(&lg.grid, &g.to_spec(&lg)?)?,
            OutmapJson::Table(t) => Outmap::from_table(table_from_json(&lg, t)?),
        };
        Ok(Instance { lg, sigma, json })
    }

    pub fn grid(&self) -> &Grid {
        &self.lg.grid
    }
}

pub fn table_from_json(lg: &LabeledGrid, t: &BTreeMap<String, Vec<u32>>) -> Result<OrientationTable> {
    let mut entries = vec![DirSet::new(); lg.grid.vertex_count() as usize];
    for (key, dirs) in t {
        let coords = key
            .split(',')
            .map(|c| c.trim().parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .with_context(|| format!("bad point key {key:?}"))?;
        let p = lg.in_point(&coords)?;
        entries[lg.grid.rank(&p) as usize] = lg.in_dirs(dirs)?.into_iter().collect();
    }
    Ok(OrientationTable::new(&lg.grid, entries)?)
}

pub fn table_to_json(lg: &LabeledGrid, t: &OrientationTable) -> BTreeMap<String, Vec<u32>> {
    lg.grid
        .points()
        .map(|p| (lg.point_key(&p), lg.out_dirs(t.get(&p).expect("point of the grid"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subgrid: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<u32>>,
}

impl CertificateJson {
    pub fn from_cert(lg: &LabeledGrid, cert: &Certificate) -> Self {
        let mut out = CertificateJson {
            kind: cert.tag().to_string(),
            point: None,
            subgrid: None,
            p: None,
            q: None,
        };
        match cert {
            Certificate::Sink(p) | Certificate::SelfLoop(p) => out.point = Some(lg.out_point(p)),
            Certificate::IndexCollision { sub, p, q } => {
                out.subgrid = Some(lg.out_subgrid(sub));
                out.p = Some(lg.out_point(p));
                out.q = Some(lg.out_point(q));
            }
        }
        out
    }

    pub fn to_cert(&self, lg: &LabeledGrid) -> Result<Certificate> {
        let need = |v: &Option<Vec<u32>>, name: &str| -> Result<Point> {
            lg.in_point(v.as_ref().ok_or_else(|| anyhow!("{} certificate needs {name}", self.kind))?)
        };
        Ok(match self.kind.as_str() {
            "GU1" => Certificate::Sink(need(&self.point, "point")?),
            "GUV1" => Certificate::SelfLoop(need(&self.point, "point")?),
            "GUV2" => Certificate::IndexCollision {
                sub: lg.in_subgrid(self.subgrid.as_ref().ok_or_else(|| anyhow!("GUV2 certificate needs subgrid"))?)?,
                p: need(&self.p, "p")?,
                q: need(&self.q, "q")?,
            },
            other => bail!("unknown certificate type {other:?}"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub depth: usize,
    pub direction: u32,
    pub point: Vec<u32>,
    pub action: String,
}

impl TraceRecord {
    pub fn from_step(lg: &LabeledGrid, st: &TraceStep) -> Self {
        TraceRecord {
            depth: st.depth,
            direction: lg.out_dir(st.direction),
            point: lg.out_point(&st.point),
            action: st.action.as_str().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ManifestJson {
    pub d_bits: usize,
    pub m_bits: usize,
    pub grid: GridJson,
    pub outmap: OutmapJson,
    pub start_mask: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: String,
    pub succ: String,
    pub cost: String,
    pub state: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostJson {
    Number(u64),
    /// Decimal, or hex with a `0x` prefix.
    Text(String),
}

impl CostJson {
    fn value(&self) -> Result<BigUint> {
        match self {
            CostJson::Number(n) => Ok(BigUint::from(*n)),
            CostJson::Text(t) => match t.strip_prefix("0x") {
                Some(hex) => BigUint::parse_bytes(hex.as_bytes(), 16),
                None => BigUint::parse_bytes(t.as_bytes(), 10),
            }
            .ok_or_else(|| anyhow!("bad cost {t:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableInstanceJson {
    pub d_bits: usize,
    pub m_bits: usize,
    pub succ: Vec<String>,
    pub cost: Vec<CostJson>,
}

impl TableInstanceJson {
    pub fn to_instance(&self) -> Result<TableInstance> {
        let succ = self
            .succ
            .iter()
            .map(|s| {
                let b = if s.starts_with("0x") {
                    BitString::from_hex(self.d_bits, s)
                } else {
                    BitString::from_binary(self.d_bits, s)
                };
                b.and_then(|b| b.to_u64()).ok_or_else(|| anyhow!("bad successor {s:?}"))
            })
            .collect::<Result<Vec<_>>>()?;
        let cost = self.cost.iter().map(CostJson::value).collect::<Result<Vec<_>>>()?;
        Ok(TableInstance::new(self.d_bits, self.m_bits, succ, cost)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerJson {
    pub tag: String,
    pub v: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<String>,
    /// `a` for equal costs, `b` for a sandwiched cost.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
}

impl AnswerJson {
    pub fn from_answer(ans: &UfeoplAnswer) -> Self {
        match ans {
            UfeoplAnswer::Uf1(v) => AnswerJson { tag: "UF1".into(), v: v.to_hex(), w: None, kind: None },
            UfeoplAnswer::Ufv1 { v, w, kind } => AnswerJson {
                tag: "UFV1".into(),
                v: v.to_hex(),
                w: Some(w.to_hex()),
                kind: Some(match kind {
                    Ufv1Kind::EqualCost => "a".into(),
                    Ufv1Kind::Sandwiched => "b".into(),
                }),
            },
            UfeoplAnswer::Ufv2 { v, w } => AnswerJson { tag: "UFV2".into(), v: v.to_hex(), w: Some(w.to_hex()), kind: None },
        }
    }

    pub fn to_answer(&self, width: usize) -> Result<UfeoplAnswer> {
        let bits = |s: &str| BitString::from_hex(width, s).ok_or_else(|| anyhow!("bad node {s:?}"));
        let w = || -> Result<BitString> { bits(self.w.as_deref().ok_or_else(|| anyhow!("{} needs w", self.tag))?) };
        Ok(match self.tag.as_str() {
            "UF1" => UfeoplAnswer::Uf1(bits(&self.v)?),
            "UFV1" => UfeoplAnswer::Ufv1 {
                v: bits(&self.v)?,
                w: w()?,
                kind: match self.kind.as_deref() {
                    Some("a") => Ufv1Kind::EqualCost,
                    Some("b") => Ufv1Kind::Sandwiched,
                    other => bail!("UFV1 kind must be a or b, got {other:?}"),
                },
            },
            "UFV2" => UfeoplAnswer::Ufv2 { v: bits(&self.v)?, w: w()? },
            other => bail!("unknown answer tag {other:?}"),
        })
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Parses `"2,2,3"`.
pub fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    let sizes = text
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad block size {s:?}")))
        .collect::<Result<Vec<_>>>()?;
    ensure!(!sizes.is_empty(), "no block sizes");
    Ok(sizes)
}

/// Parses `"1,2;4,3;5,6,7"` into one list per block.
pub fn parse_lists(text: &str) -> Result<Vec<Vec<u32>>> {
    text.split(';')
        .map(|part| {
            part.split(',')
                .map(|s| s.trim().parse::<u32>().with_context(|| format!("bad direction {s:?}")))
                .collect()
        })
        .collect()
}
