//! `ktour`: count, search, classify and verify knight's tours.
//!
//! Machine-readable results go to stdout as JSON; diagnostics go to stderr.
//! Exit codes: 0 success, 1 verification or classification mismatch,
//! 2 usage error, 3 search aborted at its node limit.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ktour::classify::classify;
use ktour::emperor::{enumerate_emperor_with, validate_emperor, Junction};
use ktour::fixtures::{verify_corpus, CorpusStatus};
use ktour::tour::parse_document;
use ktour::{
    count_tours, enumerate_tours, magic_feasibility, BoardDims, ClassFilter, Closure, CountMode,
    Error, Filter, MagicClass, SearchSpec, SearchStats, Tour,
};

#[derive(Parser)]
#[command(
    name = "ktour",
    version,
    about = "Magic knight's tour enumeration and verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count tours on a board.
    Count(SearchArgs),
    /// Enumerate tours, one canonical representative per class.
    Search {
        #[command(flatten)]
        search: SearchArgs,
        /// Stop after this many tours.
        #[arg(long)]
        limit: Option<u64>,
        /// Write each tour as a fixture file into this directory instead of
        /// printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the tour in a file.
    Classify {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
    },
    /// Report which magic-tour theorems exclude a board.
    Feasible {
        #[arg(long, value_parser = parse_board)]
        board: BoardDims,
    },
    /// Enumerate two-knight emperor tours.
    Emperor {
        #[arg(long, value_parser = parse_board)]
        board: BoardDims,
        #[command(flatten)]
        filter: FilterArgs,
        /// Where the single wazir step may sit.
        #[arg(long, default_value = "middle", value_parser = parse_from_str::<Junction>)]
        junction: Junction,
        /// Include the canonical tours in the output.
        #[arg(long)]
        tours: bool,
    },
    /// Verify a fixture corpus or a single fixture file.
    Verify {
        #[arg(long, value_name = "DIR", conflicts_with = "input")]
        fixtures: Option<PathBuf>,
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
    },
    /// Draw a tour as a grid with its line sums.
    Render {
        #[arg(long = "in", value_name = "FILE")]
        input: PathBuf,
        /// Print the bare grid instead of a JSON object.
        #[arg(long)]
        plain: bool,
    },
}

#[derive(Args)]
struct FilterArgs {
    /// Class token: magic, semi[_short|_long], plain[_...], quasi[_...],
    /// near[_...] or none.
    #[arg(long, value_parser = parse_from_str::<ClassFilter>)]
    class: Option<ClassFilter>,
    /// Profile predicate, e.g. `distinct(long)=2` or `mc_lines(short)>=13`,
    /// joined with `&`.
    #[arg(long, value_parser = parse_from_str::<Filter>)]
    filter: Option<Filter>,
}

impl FilterArgs {
    fn build(&self) -> Filter {
        let mut parts = Vec::new();
        if let Some(c) = self.class {
            parts.push(Filter::class(c));
        }
        if let Some(f) = &self.filter {
            parts.push(f.clone());
        }
        match parts.len() {
            0 => Filter::Any,
            1 => parts.remove(0),
            _ => Filter::All(parts),
        }
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, value_parser = parse_board)]
    board: BoardDims,
    #[arg(long, default_value = "any", value_parser = parse_from_str::<Closure>)]
    closure: Closure,
    #[arg(long, default_value = "arithmetic", value_parser = parse_from_str::<CountMode>)]
    mode: CountMode,
    #[command(flatten)]
    filter: FilterArgs,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
    /// Split the search into all prefixes of this many cells.
    #[arg(long)]
    seed_depth: Option<usize>,
    /// Abort (exit 3) after this many search nodes.
    #[arg(long)]
    node_limit: Option<u64>,
}

impl SearchArgs {
    fn spec(&self) -> SearchSpec {
        let mut spec = SearchSpec::new(self.board)
            .closure(self.closure)
            .mode(self.mode)
            .filter(self.filter.build())
            .threads(self.threads.unwrap_or(0));
        spec.seed_depth = self.seed_depth;
        spec.node_limit = self.node_limit;
        spec
    }
}

fn parse_board(s: &str) -> Result<BoardDims, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_from_str<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// A failure with its exit code. Code 2 errors are reported on stderr only;
/// others also leave a JSON object on stdout.
struct Failure {
    code: u8,
    message: String,
    stdout: Option<Value>,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
            stdout: None,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::ResourceLimit { stats } => Failure {
                code: 3,
                message: format!(
                    "search aborted at its node limit after {} nodes",
                    stats.nodes
                ),
                stdout: Some(json!({"error": "resource_limit", "stats": stats_json(&stats)})),
            },
            other => Failure::usage(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn stats_json(s: &SearchStats) -> Value {
    json!({
        "nodes": s.nodes,
        "pruned": s.pruned(),
        "pruned_connectivity": s.pruned_connectivity,
        "pruned_line_sums": s.pruned_line_sums,
        "pruned_closure": s.pruned_closure,
        "elapsed_ms": s.elapsed_ms,
        "workers": s.workers,
        "units": s.units,
    })
}

fn print_json(v: &Value) -> io::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer(&mut out, v)?;
    out.write_all(b"\n")?;
    out.flush()
}

struct TourFile {
    tour: Tour,
    expected: Option<MagicClass>,
    emperor: bool,
}

fn read_tour_file(path: &Path) -> Result<TourFile, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let doc =
        parse_document(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let mut expected = None;
    let mut emperor = false;
    for (line, key, rest) in &doc.headers {
        if key == "kind" {
            emperor = rest == "emperor";
        } else if key == "class" {
            let class = rest
                .parse()
                .map_err(|e: Error| Failure::usage(format!("{}:{line}: {e}", path.display())))?;
            expected = Some(class);
        }
    }
    Ok(TourFile {
        tour: doc.tour,
        expected,
        emperor,
    })
}

fn run_count(args: &SearchArgs) -> Outcome {
    let spec = args.spec();
    let r = count_tours(&spec)?;
    let mut v = json!({
        "board": spec.dims.to_string(),
        "closure": spec.closure,
        "filter": spec.filter.to_string(),
        "mode": spec.mode,
        "count": r.count,
        "open": r.open,
        "closed": r.closed,
        "raw": r.raw,
        "diagrams": r.diagrams,
    });
    merge(&mut v, stats_json(&r.stats));
    print_json(&v)?;
    Ok(0)
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn fixture_text(t: &Tour, source: &str) -> String {
    let report = classify(t);
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    format!(
        "source {source}\nkind knight\nclass {}\nshort_sums {}\nlong_sums {}\n{}",
        report.class,
        join(&report.profile.short_sums),
        join(&report.profile.long_sums),
        t.to_text()
    )
}

fn run_search(args: &SearchArgs, limit: Option<u64>, out: Option<&Path>) -> Outcome {
    let mut spec = args.spec();
    spec.limit = limit;
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
    }
    let board = spec.dims.to_string();
    let sink_state = Mutex::new((0u64, None::<io::Error>));
    let stdout = Mutex::new(BufWriter::new(io::stdout()));
    let source = format!("ktour search --board {board} --filter {}", spec.filter);
    let sink = |t: Tour| {
        let mut state = sink_state.lock().expect("sink lock");
        state.0 += 1;
        let index = state.0;
        let written = match out {
            Some(dir) => fs::write(
                dir.join(format!("{board}-{index:06}.tour")),
                fixture_text(&t, &source),
            ),
            None => {
                let record = json!({
                    "type": "tour",
                    "board": board,
                    "class": classify(&t).class,
                    "closed": t.is_closed(),
                    "rows": t.rows(),
                });
                let mut w = stdout.lock().expect("stdout lock");
                serde_json::to_writer(&mut *w, &record)
                    .map_err(io::Error::from)
                    .and_then(|_| w.write_all(b"\n"))
            }
        };
        if let Err(e) = written {
            state.1.get_or_insert(e);
        }
    };
    let result = enumerate_tours(&spec, &sink);
    stdout.into_inner().expect("stdout lock").flush()?;
    let (emitted, err) = sink_state.into_inner().expect("sink lock");
    if let Some(e) = err {
        return Err(e.into());
    }
    let r = result?;
    let mut v = json!({
        "type": "stats",
        "board": board,
        "closure": spec.closure,
        "filter": spec.filter.to_string(),
        "mode": spec.mode,
        "count": r.count,
        "emitted": emitted,
        "truncated": r.truncated,
    });
    merge(&mut v, stats_json(&r.stats));
    print_json(&v)?;
    Ok(0)
}

fn run_classify(input: &Path) -> Outcome {
    let TourFile {
        tour,
        expected,
        emperor,
    } = read_tour_file(input)?;
    let report = classify(&tour);
    let validity = if emperor {
        validate_emperor(&tour)
            .map(|_| ())
            .map_err(|v| v.to_string())
    } else {
        tour.validate().map_err(|v| v.to_string())
    };
    let mut v = json!({
        "board": tour.dims().to_string(),
        "valid": validity.is_ok(),
        "closed": tour.is_closed(),
        "class": report.class,
        "short_sums": report.profile.short_sums,
        "long_sums": report.profile.long_sums,
        "short_mc": report.constants.short(),
        "long_mc": report.constants.long(),
        "off_direction_distinct_values": report.off_direction_distinct_values,
        "contains_mc": report.contains_mc,
    });
    if let Err(violation) = &validity {
        merge(&mut v, json!({"violation": violation}));
    }
    if let Some(exp) = expected {
        merge(
            &mut v,
            json!({"expected_class": exp, "matches": report.class.refines(exp)}),
        );
    }
    print_json(&v)?;
    let mismatch = validity.is_err() || expected.is_some_and(|e| !report.class.refines(e));
    Ok(u8::from(mismatch))
}

fn run_feasible(board: BoardDims) -> Outcome {
    let verdict = magic_feasibility(board);
    print_json(&json!({
        "board": board.to_string(),
        "status": verdict.status,
        "reason": verdict.reason,
    }))?;
    Ok(0)
}

fn run_emperor(board: BoardDims, filter: &Filter, junction: Junction, tours: bool) -> Outcome {
    let r = enumerate_emperor_with(board, filter, junction)?;
    let mut v = json!({
        "board": board.to_string(),
        "filter": filter.to_string(),
        "junction": junction,
        "count": r.count,
        "unordered_count": r.unordered_count,
        "raw": r.raw,
        "nodes": r.nodes,
        "elapsed_ms": r.elapsed_ms,
    });
    if tours {
        let list: Vec<Value> = r
            .tours
            .iter()
            .map(|t| json!({"junction": t.junction, "class": classify(&t.tour).class, "rows": t.tour.rows()}))
            .collect();
        merge(&mut v, json!({ "tours": list }));
    }
    print_json(&v)?;
    Ok(0)
}

fn run_verify(fixtures: Option<&Path>, input: Option<&Path>) -> Outcome {
    match (fixtures, input) {
        (Some(dir), _) => {
            let report = verify_corpus(dir)?;
            for f in report.failures() {
                eprintln!("FAIL {}: {:?}", f.id, f.outcome);
            }
            if report.status == CorpusStatus::NothingVerified {
                eprintln!("nothing verified in {}", dir.display());
            }
            print_json(&serde_json::to_value(&report).map_err(io::Error::from)?)?;
            Ok(u8::from(report.status == CorpusStatus::Failures))
        }
        (None, Some(file)) => {
            let text = fs::read_to_string(file)?;
            let id = file
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let fixture = ktour::parse_fixture(&id, &text)
                .map_err(|e| Failure::usage(format!("{}: {e}", file.display())))?;
            let outcome = ktour::verify_fixture(&fixture);
            let passed = outcome.passed();
            let mut v = json!({"id": fixture.id, "kind": fixture.kind});
            merge(
                &mut v,
                serde_json::to_value(&outcome).map_err(io::Error::from)?,
            );
            if fixture.kind == ktour::fixtures::FixtureKind::Emperor {
                if let Ok(j) = validate_emperor(&fixture.tour) {
                    merge(&mut v, json!({"junction": j}));
                }
            }
            print_json(&v)?;
            Ok(u8::from(!passed))
        }
        (None, None) => Err(Failure::usage("verify needs --fixtures DIR or --in FILE")),
    }
}

fn run_render(input: &Path, plain: bool) -> Outcome {
    let tour = read_tour_file(input)?.tour;
    let text = tour.render();
    if plain {
        let mut out = io::stdout().lock();
        out.write_all(text.as_bytes())?;
        out.flush()?;
    } else {
        print_json(&json!({
            "board": tour.dims().to_string(),
            "lines": text.lines().collect::<Vec<_>>(),
        }))?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Count(args) => run_count(args),
        Command::Search { search, limit, out } => run_search(search, *limit, out.as_deref()),
        Command::Classify { input } => run_classify(input),
        Command::Feasible { board } => run_feasible(*board),
        Command::Emperor {
            board,
            filter,
            junction,
            tours,
        } => run_emperor(*board, &filter.build(), *junction, *tours),
        Command::Verify { fixtures, input } => run_verify(fixtures.as_deref(), input.as_deref()),
        Command::Render { input, plain } => run_render(input, *plain),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            if let Some(v) = &f.stdout {
                // best effort: the exit code carries the outcome either way
                let _ = print_json(v);
            }
            eprintln!("ktour: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
