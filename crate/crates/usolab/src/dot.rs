use std::fmt::Write;

use anyhow::{bail, Result};
use griduso::bits::BitString;
use griduso::eopl::EoplInstance;
use griduso::reduction::ReducedInstance;
use griduso::Outmap;

use crate::formats::LabeledGrid;
use crate::guards::Guards;

fn point_name(lg: &LabeledGrid, p: &griduso::Point) -> String {
    let c: Vec<String> = lg.out_point(p).iter().map(u32::to_string).collect();
    format!("({})", c.join(","))
}

/// The orientation as a digraph. An outgoing direction that is one of the
/// point's own coordinates is drawn as a red self-loop.
pub fn orientation_dot(lg: &LabeledGrid, sigma: &Outmap, guards: Guards) -> Result<String> {
    let g = &lg.grid;
    if g.vertex_count() > guards.vertices {
        bail!("{} vertices exceed the vertex guard {}", g.vertex_count(), guards.vertices);
    }
    let mut out = String::from("digraph orientation {\n");
    for p in g.points() {
        writeln!(out, "  \"{}\";", point_name(lg, &p)).unwrap();
    }
    for p in g.points() {
        for d in sigma.eval(&p).iter() {
            let Some(b) = g.block_of(d) else { continue };
            if p.coord(b) == d {
                writeln!(out, "  \"{0}\" -> \"{0}\" [color=red, label=\"{1}\"];", point_name(lg, &p), lg.out_dir(d)).unwrap();
            } else {
                let q = p.with(b, d);
                writeln!(
                    out,
                    "  \"{}\" -> \"{}\" [label=\"{}\"];",
                    point_name(lg, &p),
                    point_name(lg, &q),
                    lg.out_dir(d)
                )
                .unwrap();
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

/// Nodes of the reduced instance with their successor edges; successors
/// that are not nodes are drawn dashed.
pub fn reduced_dot(inst: &ReducedInstance<'_>, guards: Guards) -> Result<String> {
    let d = inst.node_bits();
    if d > guards.bits {
        bail!("{d}-bit instance exceeds the bit guard {}", guards.bits);
    }
    let mut out = String::from("digraph reduced {\n  node [shape=box];\n");
    let mut edges = String::new();
    let mut targets = std::collections::BTreeSet::new();
    for v in 0..1u64 << d {
        let v = BitString::from_u64(d, v);
        let s = inst.successor(&v);
        if s == v {
            continue;
        }
        let state = inst.decode(&v).map(|st| st.to_string()).unwrap_or_default();
        writeln!(out, "  \"{}\" [label=\"{}\\n{}\\nc={}\"];", v, v, state, inst.cost(&v)).unwrap();
        writeln!(edges, "  \"{}\" -> \"{}\";", v, s).unwrap();
        if inst.successor(&s) == s {
            targets.insert(s);
        }
    }
    for t in targets {
        let state = inst.decode(&t).map(|st| st.to_string()).unwrap_or_default();
        writeln!(out, "  \"{}\" [style=dashed, label=\"{}\\n{}\\nc={}\"];", t, t, state, inst.cost(&t)).unwrap();
    }
    out.push_str(&edges);
    out.push_str("}\n");
    Ok(out)
}
