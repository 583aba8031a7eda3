//! Command-line front end.
//!
//! Exit codes: 0 success, 1 negative verdict (incompatible, not connected,
//! disconnected fiber found), 2 usage or input error, 3 capacity reached,
//! 4 internal invariant failure. Errors are written to stderr as one line of
//! JSON; stdout carries data only.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::certify::{
    certify_degree_with, find_indispensable_with, find_move_path_capped, CertificationReport, CertifyOptions,
    IndispensableSearch, PathOutcome, Verdict,
};
use crate::error::{FlowError, Result};
use crate::fiber::{compatible, differing_indices, FlowMultiset, DEFAULT_FIBER_CAP, DEFAULT_SWEEP_CAP};
use crate::flow::{enumerate_flows_capped, vertex_embedding, DEFAULT_FLOW_CAP};
use crate::group::Group;
use crate::moves::MoveDoc;

pub const THREADS_ENV: &str = "FLOWCERT_THREADS";

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_CAPACITY: u8 = 3;
pub const EXIT_INTERNAL: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(
    name = "flowcert",
    version,
    about = "Fiber-connectivity certification for group-based flows on claw trees"
)]
struct Cli {
    /// Output format for data written to stdout.
    #[arg(long, value_enum, default_value_t = OutputFormat::Json, global = true)]
    format: OutputFormat,

    /// Write data to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Worker threads (falls back to FLOWCERT_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Shape {
    /// Group as a single modulus (`3`) or a factor list (`2,2`).
    #[arg(long, value_parser = parse_group)]
    group: Group,

    /// Number of indices (leaves of the claw tree).
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Args)]
struct Caps {
    #[arg(long, default_value_t = DEFAULT_FLOW_CAP)]
    flow_cap: u128,
    #[arg(long, default_value_t = DEFAULT_SWEEP_CAP)]
    sweep_cap: u128,
    #[arg(long, default_value_t = DEFAULT_FIBER_CAP)]
    fiber_cap: u128,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List all flows.
    Flows {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        caps: Caps,
    },
    /// Check whether two multisets are compatible.
    Compat {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Shortest sequence of bounded-degree moves between two multisets.
    Path {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        caps: Caps,
    },
    /// Check every fiber of degree 2..=dmax for connectivity.
    Certify {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        dmax: usize,
        #[arg(long)]
        m: usize,
        /// Continue past the first disconnected degree and list every witness.
        #[arg(long)]
        all_witnesses: bool,
        /// Include wall time in the report.
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        caps: Caps,
    },
    /// Search for the lowest-degree fiber disconnected under moves of degree <= m.
    Witness {
        #[command(flatten)]
        shape: Shape,
        #[arg(long)]
        m: usize,
        /// Highest degree to scan (default m + 2).
        #[arg(long)]
        dmax: Option<usize>,
        #[command(flatten)]
        caps: Caps,
    },
    /// Vertex matrix: a "rows cols" header, then one embedded flow per row.
    ExportMatrix {
        #[command(flatten)]
        shape: Shape,
        #[command(flatten)]
        caps: Caps,
    },
}

/// Parses `3` or `2,2` into a group.
pub fn parse_group(s: &str) -> std::result::Result<Group, String> {
    let factors = s
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|e| format!("bad factor {p:?}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Group::new(&factors).map_err(|e| e.to_string())
}

/// Validated parameters of a certification or witness run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub group: Group,
    pub n: usize,
    pub d_max: usize,
    pub m: usize,
    pub flow_cap: u128,
    pub sweep_cap: u128,
    pub fiber_cap: u128,
    pub threads: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d_max == 0 || self.m == 0 {
            return Err(FlowError::Precondition("n, d_max and m must be positive".into()));
        }
        if self.flow_cap == 0 || self.sweep_cap == 0 || self.fiber_cap == 0 || self.threads == Some(0) {
            return Err(FlowError::Precondition(
                "caps and thread counts must be positive".into(),
            ));
        }
        if self.m > self.d_max {
            return Err(FlowError::Precondition(format!(
                "m = {} exceeds d_max = {}",
                self.m, self.d_max
            )));
        }
        Ok(())
    }

    fn options(&self, all_witnesses: bool, timing: bool) -> CertifyOptions {
        CertifyOptions {
            flow_cap: self.flow_cap,
            sweep_cap: self.sweep_cap,
            threads: self.threads,
            all_witnesses,
            timing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowsDoc {
    pub format: u32,
    pub group: Group,
    pub n: usize,
    pub flows: Vec<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatDoc {
    pub format: u32,
    pub compatible: bool,
    pub degrees: [usize; 2],
    pub differing_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDoc {
    pub format: u32,
    pub group: Group,
    pub n: usize,
    pub m: usize,
    pub connected: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default)]
    pub steps: Vec<Vec<Vec<u32>>>,
    #[serde(default)]
    pub moves: Vec<MoveDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fiber_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reachable: Option<usize>,
}

#[derive(Debug, Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Debug, Serialize)]
struct ErrorDoc<'a> {
    format: u32,
    error: ErrorBody<'a>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MultisetFile {
    Rows(Vec<Vec<serde_json::Value>>),
    Doc { flows: Vec<Vec<serde_json::Value>> },
}

/// Parses a multiset from JSON text: either a bare array of code arrays or an
/// object with a `flows` field (as written by `flows`).
pub fn parse_multiset(text: &str, group: &Group, n: usize) -> Result<FlowMultiset> {
    let file: MultisetFile = serde_json::from_str(text)
        .map_err(|e| FlowError::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let rows = match file {
        MultisetFile::Rows(r) | MultisetFile::Doc { flows: r } => r,
    };
    let mut flows = Vec::with_capacity(rows.len());
    for (row, values) in rows.iter().enumerate() {
        let wrap = |e: FlowError| FlowError::Row {
            row,
            source: Box::new(e),
        };
        if values.len() != n {
            return Err(wrap(FlowError::Shape(format!(
                "expected {n} entries, found {}",
                values.len()
            ))));
        }
        let mut codes = Vec::with_capacity(n);
        for (col, v) in values.iter().enumerate() {
            let code = v.as_u64().and_then(|c| u32::try_from(c).ok()).ok_or_else(|| {
                wrap(FlowError::Parse(format!(
                    "column {col}: expected an element code, found {v}"
                )))
            })?;
            codes.push(code);
        }
        flows.push(crate::flow::Flow::from_codes(group, &codes).map_err(wrap)?);
    }
    FlowMultiset::new(group, n, flows)
}

/// Reads a multiset file; group and `n` come from the command line.
pub fn load_multiset(path: &Path, group: &Group, n: usize) -> Result<FlowMultiset> {
    let text = std::fs::read_to_string(path).map_err(|e| FlowError::Parse(format!("{}: {e}", path.display())))?;
    parse_multiset(&text, group, n)
}

fn exit_code_for(e: &FlowError) -> u8 {
    match e {
        FlowError::Capacity { .. } => EXIT_CAPACITY,
        FlowError::InternalInvariant(_) => EXIT_INTERNAL,
        FlowError::Row { source, .. } => exit_code_for(source),
        _ => EXIT_USAGE,
    }
}

fn write_error(err: &mut dyn Write, kind: &str, message: String) {
    let doc = ErrorDoc {
        format: 1,
        error: ErrorBody { kind, message },
    };
    let _ = writeln!(err, "{}", serde_json::to_string(&doc).expect("error doc serializes"));
}

fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .filter(|&t| t > 0)
}

struct Output {
    text: String,
    code: u8,
}

fn json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string(doc).expect("output documents serialize");
    s.push('\n');
    s
}

fn rows_text(rows: &[Vec<u32>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" "))
        .collect::<Vec<_>>()
        .join("\n")
}

fn report_text(r: &CertificationReport) -> String {
    let mut s = format!("{}\n", r.statement);
    for d in &r.degrees {
        s += &format!(
            "degree {}: {} multisets in {} fibers (largest {}), {} disconnected\n",
            d.degree, d.multiset_count, d.fiber_count, d.largest_fiber, d.disconnected_count
        );
    }
    for w in &r.witnesses {
        s += &format!(
            "witness at degree {} ({} components in a fiber of {}):\n{}\n  vs\n{}\n",
            w.degree,
            w.components,
            w.fiber_size,
            rows_text(&w.first),
            rows_text(&w.second)
        );
    }
    if let Some(ms) = r.elapsed_ms {
        s += &format!("elapsed {ms} ms\n");
    }
    s
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::Verified => EXIT_OK,
        Verdict::Disconnected => EXIT_NEGATIVE,
        Verdict::Incomplete => EXIT_CAPACITY,
    }
}

fn execute(cli: &Cli) -> Result<Output> {
    let format = cli.format;
    let threads = cli.threads.or_else(threads_from_env);
    let config = |shape: &Shape, d_max: usize, m: usize, caps: &Caps| RunConfig {
        group: shape.group.clone(),
        n: shape.n,
        d_max,
        m,
        flow_cap: caps.flow_cap,
        sweep_cap: caps.sweep_cap,
        fiber_cap: caps.fiber_cap,
        threads,
        output: cli.output.clone(),
        format,
    };
    if shape_of(&cli.command).n == 0 {
        return Err(FlowError::Precondition("n must be at least 1".into()));
    }
    match &cli.command {
        Command::Flows { shape, caps } => {
            let flows = enumerate_flows_capped(&shape.group, shape.n, caps.flow_cap)?;
            let rows: Vec<Vec<u32>> = flows.iter().map(|f| f.codes()).collect();
            let text = match format {
                OutputFormat::Json => json(&FlowsDoc {
                    format: 1,
                    group: shape.group.clone(),
                    n: shape.n,
                    flows: rows,
                }),
                OutputFormat::Text => format!("{}\n", rows_text(&rows)),
            };
            Ok(Output { text, code: EXIT_OK })
        }
        Command::Compat { shape, a, b } => {
            let ma = load_multiset(a, &shape.group, shape.n)?;
            let mb = load_multiset(b, &shape.group, shape.n)?;
            let ok = compatible(&ma, &mb)?;
            let doc = CompatDoc {
                format: 1,
                compatible: ok,
                degrees: [ma.degree(), mb.degree()],
                differing_indices: differing_indices(&ma, &mb)?,
            };
            let text = match format {
                OutputFormat::Json => json(&doc),
                OutputFormat::Text if ok => "compatible\n".to_string(),
                OutputFormat::Text => format!(
                    "incompatible (degrees {} and {}); differing indices: {:?}\n",
                    doc.degrees[0], doc.degrees[1], doc.differing_indices
                ),
            };
            Ok(Output {
                text,
                code: if ok { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
        Command::Path { shape, a, b, m, caps } => {
            let ma = load_multiset(a, &shape.group, shape.n)?;
            let mb = load_multiset(b, &shape.group, shape.n)?;
            let outcome = find_move_path_capped(&ma, &mb, *m, caps.fiber_cap)?;
            let mut doc = PathDoc {
                format: 1,
                group: shape.group.clone(),
                n: shape.n,
                m: *m,
                connected: false,
                length: None,
                steps: Vec::new(),
                moves: Vec::new(),
                fiber_size: None,
                reachable: None,
            };
            match &outcome {
                PathOutcome::Connected(p) => {
                    doc.connected = true;
                    doc.length = Some(p.moves.len());
                    doc.steps = p.steps.iter().map(FlowMultiset::codes).collect();
                    doc.moves = p.moves.iter().map(|mv| mv.to_doc()).collect();
                }
                PathOutcome::NotConnected { fiber_size, reachable } => {
                    doc.fiber_size = Some(*fiber_size);
                    doc.reachable = Some(*reachable);
                }
            }
            let text = match format {
                OutputFormat::Json => json(&doc),
                OutputFormat::Text if doc.connected => {
                    let mut s = format!("connected in {} moves\n", doc.moves.len());
                    for (k, mv) in doc.moves.iter().enumerate() {
                        s += &format!(
                            "move {}: out\n{}\n in\n{}\n",
                            k + 1,
                            rows_text(&mv.removed),
                            rows_text(&mv.inserted)
                        );
                    }
                    s
                }
                OutputFormat::Text => format!(
                    "not connected: {} of {} fiber members reachable\n",
                    doc.reachable.unwrap_or(0),
                    doc.fiber_size.unwrap_or(0)
                ),
            };
            Ok(Output {
                text,
                code: if doc.connected { EXIT_OK } else { EXIT_NEGATIVE },
            })
        }
        Command::Certify {
            shape,
            dmax,
            m,
            all_witnesses,
            timing,
            caps,
        } => {
            let cfg = config(shape, *dmax, *m, caps);
            cfg.validate()?;
            let report = certify_degree_with(
                &cfg.group,
                cfg.n,
                cfg.d_max,
                cfg.m,
                &cfg.options(*all_witnesses, *timing),
            )?;
            let text = match format {
                OutputFormat::Json => json(&report),
                OutputFormat::Text => report_text(&report),
            };
            Ok(Output {
                text,
                code: verdict_code(report.verdict),
            })
        }
        Command::Witness { shape, m, dmax, caps } => {
            let cfg = config(shape, dmax.unwrap_or(m + 2), *m, caps);
            cfg.validate()?;
            let search: IndispensableSearch =
                find_indispensable_with(&cfg.group, cfg.n, cfg.m, cfg.d_max, &cfg.options(false, false))?;
            let code = match (&search.witness, &search.cap) {
                (Some(_), _) => EXIT_NEGATIVE,
                (None, Some(_)) => EXIT_CAPACITY,
                (None, None) => EXIT_OK,
            };
            let text = match format {
                OutputFormat::Json => json(&search),
                OutputFormat::Text => match &search.witness {
                    Some(w) => format!(
                        "degree-{} fiber disconnected under moves of degree <= {}:\n{}\n  vs\n{}\n",
                        w.degree,
                        search.m,
                        rows_text(&w.first),
                        rows_text(&w.second)
                    ),
                    None => format!(
                        "no disconnected fiber up to degree {} under moves of degree <= {}\n",
                        search.searched_up_to, search.m
                    ),
                },
            };
            Ok(Output { text, code })
        }
        Command::ExportMatrix { shape, caps } => {
            let flows = enumerate_flows_capped(&shape.group, shape.n, caps.flow_cap)?;
            let cols = shape.n * shape.group.order() as usize;
            let mut text = format!("{} {}\n", flows.len(), cols);
            for f in &flows {
                text += &vertex_embedding(&shape.group, f).to_row();
                text.push('\n');
            }
            Ok(Output { text, code: EXIT_OK })
        }
    }
}

fn shape_of(cmd: &Command) -> &Shape {
    match cmd {
        Command::Flows { shape, .. }
        | Command::Compat { shape, .. }
        | Command::Path { shape, .. }
        | Command::Certify { shape, .. }
        | Command::Witness { shape, .. }
        | Command::ExportMatrix { shape, .. } => shape,
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{}", e.render());
                return EXIT_OK;
            }
            write_error(err, "usage", e.render().to_string().trim_end().to_string());
            return EXIT_USAGE;
        }
    };
    match execute(&cli) {
        Ok(output) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, &output.text),
                None => out.write_all(output.text.as_bytes()),
            };
            if let Err(e) = written {
                write_error(err, "io", e.to_string());
                return EXIT_USAGE;
            }
            output.code
        }
        Err(e) => {
            write_error(err, e.kind(), e.to_string());
            exit_code_for(&e)
        }
    }
}
