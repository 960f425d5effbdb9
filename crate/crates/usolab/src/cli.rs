use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use griduso::eopl::{check_answer, enumerate_answers, walk_line, UfeoplAnswer};
use griduso::findsink::find_sink;
use griduso::lab::{find_violation_bruteforce, generate_table, is_uso, GeneratorSpec};
use griduso::reduction::build_instance;
use griduso::verify_certificate;

use crate::dot::{orientation_dot, reduced_dot};
use crate::formats::{
    parse_lists, parse_sizes, read_json, table_to_json, to_pretty, AnswerJson, CertificateJson, GeneratorJson,
    GridJson, Instance, InstanceJson, LabeledGrid, ManifestJson, NodeRecord, OutmapJson, TableInstanceJson,
    TraceRecord,
};
use crate::guards::Guards;
use crate::sweep::{run_sweep, Selection, SweepConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BAD_INPUT: i32 = 2;
pub const EXIT_VIOLATION: i32 = 3;
pub const EXIT_INTEGRITY: i32 = 4;
pub const EXIT_SWEEP_FAILURE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "usolab", version, about = "Grid USO sink search, its EOPL reduction and sweeps")]
pub struct Cli {
    /// Lift the vertex and enumeration guards.
    #[arg(long = "unsafe", global = true)]
    pub unsafe_mode: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct GridArgs {
    /// Block sizes, e.g. `2,2,3`.
    #[arg(long)]
    pub blocks: Option<String>,
    /// Explicit partition, e.g. `1,3;2,4`.
    #[arg(long)]
    pub partition: Option<String>,
}

impl GridArgs {
    fn labeled(&self) -> Result<LabeledGrid> {
        match (&self.blocks, &self.partition) {
            (Some(b), _) => LabeledGrid::from_sizes(&parse_sizes(b)?),
            (_, Some(p)) => LabeledGrid::from_json(&GridJson { blocks: parse_lists(p)? }),
            _ => bail!("a grid is required"),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file.
    Generate {
        #[command(flatten)]
        grid: GridArgs,
        /// Product orientation: `ascending` or per-block orders like `1,2;4,3;5,6,7`.
        #[arg(long, group = "kind")]
        product: Option<String>,
        /// Uniformly random edge directions.
        #[arg(long, group = "kind")]
        random: bool,
        /// Recursively combed USO.
        #[arg(long, group = "kind")]
        combed: bool,
        /// Arbitrary per-point direction sets.
        #[arg(long, group = "kind")]
        inconsistent: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Reverse an edge, e.g. `1,3:2,3`; repeatable.
        #[arg(long)]
        flip: Vec<String>,
        /// Store an explicit table instead of the generator reference.
        #[arg(long)]
        table: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Find a sink or a violation certificate.
    Solve {
        instance: PathBuf,
        /// Search directly (the default).
        #[arg(long, conflicts_with = "via_eopl")]
        direct: bool,
        /// Walk the reduced EOPL instance and map its end back.
        #[arg(long)]
        via_eopl: bool,
        /// Write the step trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a certificate against an instance.
    Verify { instance: PathBuf, certificate: PathBuf },
    /// Check every orientation of a small grid, or a seeded sample.
    Sweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Number of random orientations instead of all of them.
        #[arg(long)]
        sample: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Enumerate every bit string of each USO's reduced instance.
        #[arg(long)]
        enumerate: bool,
        /// Line-delimited records.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Summary JSON (printed to stdout when omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Render the orientation, or the reduced instance's line graph.
    ExportDot {
        instance: PathBuf,
        #[arg(long)]
        reduced: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the reduced-instance manifest.
    Reduce {
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Dump every node with its successor and cost as JSON lines.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Solve an explicit table instance.
    EoplSolve {
        table: PathBuf,
        /// List every answer instead of walking the line.
        #[arg(long)]
        enumerate: bool,
        /// Check an answer file instead of solving.
        #[arg(long)]
        check: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn json_lines<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for item in items {
        s.push_str(&serde_json::to_string(&item).expect("serializable"));
        s.push('\n');
    }
    s
}

fn load(path: &Path) -> Result<Instance> {
    Instance::from_json(read_json::<InstanceJson>(path)?)
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_BAD_INPUT
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let guards = Guards::from_env(cli.unsafe_mode)?;
    match cli.command {
        Command::Generate { grid, product, random, combed, inconsistent, seed, flip, table, output } => {
            let lg = grid.labeled()?;
            let mut gen = if let Some(p) = product {
                let orders = if p == "ascending" { lg.to_json().blocks } else { parse_lists(&p)? };
                GeneratorJson::Product { orders }
            } else if random {
                GeneratorJson::Random { seed }
            } else if combed {
                GeneratorJson::Combed { seed }
            } else if inconsistent {
                GeneratorJson::Inconsistent { seed }
            } else {
                bail!("choose one of --product, --random, --combed, --inconsistent");
            };
            if !flip.is_empty() {
                let flips = flip
                    .iter()
                    .map(|f| {
                        let (p, q) = f.split_once(':').with_context(|| format!("flip {f:?} needs p:q"))?;
                        Ok([parse_lists(p)?.concat(), parse_lists(q)?.concat()])
                    })
                    .collect::<Result<Vec<_>>>()?;
                gen = GeneratorJson::Mutated { base: Box::new(gen), flips };
            }
            let spec: GeneratorSpec = gen.to_spec(&lg)?;
            let outmap = if table {
                OutmapJson::Table(table_to_json(&lg, &generate_table(&lg.grid, &spec)?))
            } else {
                OutmapJson::Generator(gen)
            };
            let json = InstanceJson { grid: lg.to_json(), outmap };
            let inst = Instance::from_json(json.clone())?;
            emit(output.as_deref(), &to_pretty(&json))?;
            if inst.grid().vertex_count() <= guards.vertices {
                if is_uso(inst.grid(), &inst.sigma, guards.vertices)? {
                    eprintln!("classification: USO");
                } else {
                    let tag = find_violation_bruteforce(inst.grid(), &inst.sigma, guards.vertices)?
                        .map(|c| c.tag())
                        .unwrap_or("none");
                    eprintln!("classification: not a USO ({tag})");
                }
            } else {
                eprintln!("classification: skipped (above the vertex guard)");
            }
            Ok(EXIT_OK)
        }
        Command::Solve { instance, direct: _, via_eopl, trace, output } => {
            let inst = load(&instance)?;
            let (g, sigma, lg) = (inst.grid(), &inst.sigma, &inst.lg);
            let cert = if via_eopl {
                let red = build_instance(g, sigma);
                let walk = walk_line(&red, trace.is_some())?;
                if let (Some(path), Some(steps)) = (&trace, &walk.path) {
                    let records = steps.iter().map(|(v, c)| NodeRecord {
                        node: v.to_hex(),
                        succ: griduso::eopl::EoplInstance::successor(&red, v).to_hex(),
                        cost: c.to_str_radix(16),
                        state: red.decode(v).map(|s| s.to_string()).unwrap_or_default(),
                    });
                    emit(Some(path), &json_lines(records))?;
                }
                match red.map_solution(&UfeoplAnswer::Uf1(walk.end), guards.vertices) {
                    Ok(c) => c,
                    Err(e) => {
                        eprintln!("integrity failure: {e}");
                        return Ok(EXIT_INTEGRITY);
                    }
                }
            } else {
                let res = match find_sink(g, sigma) {
                    Ok(r) => r,
                    Err(e) => {
                        eprintln!("integrity failure: {e}");
                        return Ok(EXIT_INTEGRITY);
                    }
                };
                if let Some(path) = &trace {
                    let records = res.trace().steps.iter().map(|s| TraceRecord::from_step(lg, s));
                    emit(Some(path), &json_lines(records))?;
                }
                res.certificate()
            };
            if !verify_certificate(g, sigma, &cert) {
                eprintln!("integrity failure: certificate does not verify");
                return Ok(EXIT_INTEGRITY);
            }
            emit(output.as_deref(), &to_pretty(&CertificateJson::from_cert(lg, &cert)))?;
            Ok(if cert.is_violation() { EXIT_VIOLATION } else { EXIT_OK })
        }
        Command::Verify { instance, certificate } => {
            let inst = load(&instance)?;
            let cert = read_json::<CertificateJson>(&certificate)?.to_cert(&inst.lg)?;
            if verify_certificate(inst.grid(), &inst.sigma, &cert) {
                println!("valid {}", cert.tag());
                Ok(EXIT_OK)
            } else {
                println!("invalid {}", cert.tag());
                Ok(EXIT_INTEGRITY)
            }
        }
        Command::Sweep { grid, sample, seed, enumerate, output, summary } => {
            let cfg = SweepConfig {
                lg: grid.labeled()?,
                selection: match sample {
                    Some(count) => Selection::Sample { count, seed },
                    None => Selection::All,
                },
                enumerate,
                guards,
            };
            let (records, sum) = run_sweep(&cfg)?;
            if let Some(path) = &output {
                emit(Some(path), &json_lines(&records))?;
            }
            emit(summary.as_deref(), &to_pretty(&sum))?;
            if !sum.ok() {
                eprintln!("sweep failures: {:?}", sum.failures);
                return Ok(EXIT_SWEEP_FAILURE);
            }
            Ok(EXIT_OK)
        }
        Command::ExportDot { instance, reduced, output } => {
            let inst = load(&instance)?;
            let text = if reduced {
                reduced_dot(&build_instance(inst.grid(), &inst.sigma), guards)?
            } else {
                orientation_dot(&inst.lg, &inst.sigma, guards)?
            };
            emit(output.as_deref(), &text)?;
            Ok(EXIT_OK)
        }
        Command::Reduce { instance, output, dump } => {
            let inst = load(&instance)?;
            let red = build_instance(inst.grid(), &inst.sigma);
            let manifest = ManifestJson {
                d_bits: red.d_bits(),
                m_bits: red.m_bits(),
                grid: inst.json.grid.clone(),
                outmap: inst.json.outmap.clone(),
                start_mask: red.start_mask().to_hex(),
            };
            emit(output.as_deref(), &to_pretty(&manifest))?;
            if let Some(path) = dump {
                let d = red.d_bits();
                if d > guards.bits {
                    bail!("{d}-bit instance exceeds the bit guard {}", guards.bits);
                }
                let mut records = Vec::new();
                for v in 0..1u64 << d {
                    let v = griduso::bits::BitString::from_u64(d, v);
                    let s = griduso::eopl::EoplInstance::successor(&red, &v);
                    if s != v {
                        records.push(NodeRecord {
                            node: v.to_hex(),
                            succ: s.to_hex(),
                            cost: red.bit_cost(&v).to_str_radix(16),
                            state: red.decode(&v).map(|st| st.to_string()).unwrap_or_default(),
                        });
                    }
                }
                emit(Some(&path), &json_lines(records))?;
            }
            Ok(EXIT_OK)
        }
        Command::EoplSolve { table, enumerate, check, output } => {
            let inst = read_json::<TableInstanceJson>(&table)?.to_instance()?;
            if let Some(path) = check {
                let ans = read_json::<AnswerJson>(&path)?.to_answer(griduso::eopl::EoplInstance::node_bits(&inst))?;
                let ok = check_answer(&inst, &ans)?;
                println!("{} {}", if ok { "valid" } else { "invalid" }, ans.tag());
                return Ok(if ok { EXIT_OK } else { EXIT_INTEGRITY });
            }
            if enumerate {
                let set = enumerate_answers(&inst, guards.bits)?;
                emit(output.as_deref(), &json_lines(set.all().map(|a| AnswerJson::from_answer(&a))))?;
                return Ok(if set.violation_count() > 0 { EXIT_VIOLATION } else { EXIT_OK });
            }
            let walk = walk_line(&inst, false)?;
            emit(output.as_deref(), &to_pretty(&AnswerJson::from_answer(&UfeoplAnswer::Uf1(walk.end))))?;
            Ok(EXIT_OK)
        }
    }
}
