//! Orientation sweeps: every orientation of a small grid (or a seeded
//! sample) checked against the oracles, the direct search and the
//! reduced instance.

use std::collections::BTreeMap;

use anyhow::{bail, Result};
use griduso::eopl::{check_preconditions, enumerate_answers, walk_line, EoplInstance, UfeoplAnswer};
use griduso::findsink::find_sink;
use griduso::lab::{
    edges, find_violation_bruteforce, generate, is_uso, orientation_from_mask, refined_index_bijection_check,
    unique_sink, BijectionCheck, GeneratorSpec,
};
use griduso::reduction::build_instance;
use griduso::{verify_certificate, Certificate, Outmap};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::formats::{CertificateJson, GridJson, LabeledGrid};
use crate::guards::Guards;

/// Largest edge count swept exhaustively.
pub const EXHAUSTIVE_EDGE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    /// `count` random orientations; orientation `i` uses seed `seed + i`.
    Sample { count: u64, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub lg: LabeledGrid,
    pub selection: Selection,
    /// Enumerate every bit string of each USO's reduced instance.
    pub enumerate: bool,
    pub guards: Guards,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepRecord {
    pub index: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub uso: bool,
    /// Oracle sink on a USO, brute-force violation otherwise.
    pub oracle: Option<CertificateJson>,
    pub direct: Option<CertificateJson>,
    pub via_eopl: Option<CertificateJson>,
    pub walk_steps: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_line: Option<bool>,
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SweepSummary {
    pub grid: GridJson,
    pub orientations: u64,
    pub usos: u64,
    pub violations: u64,
    pub failed_records: u64,
    /// Failure count per invariant name.
    pub failures: BTreeMap<String, u64>,
}

impl SweepSummary {
    pub fn ok(&self) -> bool {
        self.failed_records == 0
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<(Vec<SweepRecord>, SweepSummary)> {
    let g = &cfg.lg.grid;
    if g.vertex_count() > cfg.guards.vertices {
        bail!("{} vertices exceed the vertex guard {}", g.vertex_count(), cfg.guards.vertices);
    }
    let es = edges(g);
    let jobs: Vec<(u64, Option<u64>, Option<u64>)> = match cfg.selection {
        Selection::All => {
            if es.len() > EXHAUSTIVE_EDGE_LIMIT && cfg.guards.vertices != u64::MAX {
                bail!("{} edges are too many for an exhaustive sweep; use a sample", es.len());
            }
            (0..1u64 << es.len()).map(|m| (m, Some(m), None)).collect()
        }
        Selection::Sample { count, seed } => (0..count).map(|i| (i, None, Some(seed.wrapping_add(i)))).collect(),
    };
    let mut records: Vec<SweepRecord> = jobs
        .into_par_iter()
        .map(|(index, mask, seed)| {
            let sigma = match (mask, seed) {
                (Some(m), _) => Outmap::from_table(orientation_from_mask(g, &es, m)),
                (_, Some(s)) => generate(g, &GeneratorSpec::Random { seed: s })?,
                _ => unreachable!(),
            };
            let mut rec = check_orientation(&cfg.lg, &sigma, cfg.guards, cfg.enumerate)?;
            rec.index = index;
            rec.mask = mask;
            rec.seed = seed;
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    records.sort_by_key(|r| r.index);

    let mut summary = SweepSummary {
        grid: cfg.lg.to_json(),
        orientations: records.len() as u64,
        usos: records.iter().filter(|r| r.uso).count() as u64,
        violations: records.iter().filter(|r| !r.uso).count() as u64,
        failed_records: records.iter().filter(|r| !r.failures.is_empty()).count() as u64,
        failures: BTreeMap::new(),
    };
    for r in &records {
        for f in &r.failures {
            let name = f.split(':').next().unwrap_or(f).to_string();
            *summary.failures.entry(name).or_default() += 1;
        }
    }
    Ok((records, summary))
}

/// Runs every invariant on one orientation.
pub fn check_orientation(lg: &LabeledGrid, sigma: &Outmap, guards: Guards, enumerate: bool) -> Result<SweepRecord> {
    let g = &lg.grid;
    let mut failures = Vec::new();
    let cert_json = |c: &Certificate| CertificateJson::from_cert(lg, c);

    let uso = is_uso(g, sigma, guards.vertices)?;
    let violation = find_violation_bruteforce(g, sigma, guards.vertices)?;
    check(&mut failures, "oracle_exclusive", uso != violation.is_some());
    let sink = if uso { unique_sink(g, sigma, guards.vertices)? } else { None };
    if uso {
        check(&mut failures, 
            "index_bijection",
            refined_index_bijection_check(g, sigma, guards.vertices)? == BijectionCheck::Bijective,
        );
    }
    if let Some(v) = &violation {
        check(&mut failures, "oracle_verified", verify_certificate(g, sigma, v));
    }
    let oracle = sink.clone().map(Certificate::Sink).or(violation);

    let direct = match find_sink(g, sigma) {
        Ok(res) => Some(res.certificate()),
        Err(e) => {
            failures.push(format!("direct_error: {e}"));
            None
        }
    };
    if let Some(c) = &direct {
        check(&mut failures, "direct_verified", verify_certificate(g, sigma, c));
        if let Some(s) = &sink {
            check(&mut failures, "direct_matches_oracle", *c == Certificate::Sink(s.clone()));
        }
    }

    let inst = build_instance(g, sigma);
    let mut via = None;
    let mut walk_steps = 0;
    let mut single_line = None;
    check(&mut failures, "eopl_preconditions", check_preconditions(&inst).is_ok());
    match walk_line(&inst, true) {
        Ok(walk) => {
            walk_steps = walk.steps;
            let path = walk.path.as_ref().expect("recorded path");
            check(&mut failures, "cost_monotone", path.windows(2).all(|w| w[0].1 < w[1].1));
            let budget = g.n() as u64 + 1;
            let within = path.iter().all(|(v, _)| {
                let calls = |f: &dyn Fn()| {
                    let before = sigma.calls();
                    f();
                    sigma.calls() - before
                };
                calls(&|| drop(inst.successor(v))) <= budget
                    && calls(&|| drop(inst.cost(v))) <= budget
                    && calls(&|| drop(inst.is_vertex(v))) <= budget
            });
            check(&mut failures, "call_budget", within);
            match inst.map_solution(&UfeoplAnswer::Uf1(walk.end.clone()), guards.vertices) {
                Ok(c) => {
                    check(&mut failures, "eopl_verified", verify_certificate(g, sigma, &c));
                    if let Some(s) = &sink {
                        check(&mut failures, "eopl_matches_oracle", c == Certificate::Sink(s.clone()));
                    }
                    if let Some(d) = &direct {
                        if !c.is_violation() || !d.is_violation() {
                            check(&mut failures, "paths_agree", c == *d);
                        }
                    }
                    via = Some(c);
                }
                Err(e) => failures.push(format!("eopl_error: {e}")),
            }
            if enumerate && uso && inst.node_bits() <= guards.bits {
                let set = enumerate_answers(&inst, guards.bits)?;
                let ok = set.uf1 == [walk.end] && set.violation_count() == 0;
                single_line = Some(ok);
                check(&mut failures, "single_line", ok);
            }
        }
        Err(e) => failures.push(format!("walk_error: {e}")),
    }

    Ok(SweepRecord {
        index: 0,
        mask: None,
        seed: None,
        uso,
        oracle: oracle.as_ref().map(cert_json),
        direct: direct.as_ref().map(cert_json),
        via_eopl: via.as_ref().map(cert_json),
        walk_steps,
        single_line,
        failures,
    })
}

fn check(failures: &mut Vec<String>, name: &str, ok: bool) {
    if !ok {
        failures.push(name.to_string());
    }
}
