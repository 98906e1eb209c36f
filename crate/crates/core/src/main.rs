use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vizalg::analysis::{
    distance_matrix, genealogy, mds_embed, merge_versions, nearest, sequence, shortest_path,
    AnalysisError, MergeOutcome, WeightConfig,
};
use vizalg::bench::bench_style_transfer;
use vizalg::operators::{
    difference, intersect, render_style_difference, union, union_many, How, On, OpParams,
};
use vizalg::relational::PropertyPath;
use vizalg::spec::{parse_spec, serialize_spec, VizSpec};
use vizalg::{from_spec, to_spec, RelViz};

const EXIT_INPUT: u8 = 1;
const EXIT_OPERATOR: u8 = 2;
const EXIT_CONFLICT: u8 = 3;

/// Set operations on Vega-Lite specifications.
///
/// Exit codes: 0 success, 1 input or usage error, 2 operator error,
/// 3 merge conflict.
#[derive(Parser)]
#[command(name = "vizalg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Union of two specs. For style transfer, pass the data spec first and
    /// the style spec second with `--how right`.
    Union {
        left: PathBuf,
        right: PathBuf,
        #[command(flatten)]
        op: OpFlags,
        #[command(flatten)]
        load: LoadFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Left fold of union over files or a directory, in filename order.
    UnionMany {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        op: OpFlags,
        #[command(flatten)]
        load: LoadFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rows only in one spec, as data and style CSV with an indicator column.
    Diff(SetArgs),
    /// Rows in both specs, as data and style CSV with an indicator column.
    Intersect(SetArgs),
    /// Three-way merge of two edits of a base spec. Every data column is
    /// kept, encoded or not.
    Merge {
        base: PathBuf,
        ours: PathBuf,
        theirs: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Corpus analyses over a directory of specs.
    Analyze {
        #[command(subcommand)]
        command: Analyze,
    },
    /// Transfers each style spec onto synthesized data and reports failures.
    /// The RNG seed comes from VIZALG_SEED (default 0).
    BenchStyleTransfer { corpus: PathBuf },
}

#[derive(Args, Clone, Copy)]
struct OpFlags {
    /// Join on inferred primary keys or on all shared columns.
    #[arg(long, default_value = "key")]
    on: On,
    /// Conflict policy.
    #[arg(long, default_value = "merge")]
    how: How,
    /// Encode the indicator column on an idle channel (default).
    #[arg(long, overrides_with = "no_auto_encoding")]
    auto_encoding: bool,
    #[arg(long)]
    no_auto_encoding: bool,
}

impl OpFlags {
    fn params(self) -> OpParams {
        OpParams::default()
            .on(self.on)
            .how(self.how)
            .auto_encoding(!self.no_auto_encoding)
    }
}

#[derive(Args, Clone, Copy)]
struct LoadFlags {
    /// Keep data columns that no encoding references.
    #[arg(long)]
    keep_unencoded: bool,
}

#[derive(Args)]
struct SetArgs {
    left: PathBuf,
    right: PathBuf,
    #[arg(long, default_value = "key")]
    on: On,
    #[command(flatten)]
    load: LoadFlags,
    /// Directory for data.csv and style.csv; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the style rows as sentences.
    #[arg(long)]
    render_template: bool,
}

#[derive(Args)]
struct CorpusArgs {
    corpus: PathBuf,
    /// TOML file of `category = weight` lines.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[command(flatten)]
    load: LoadFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Analyze {
    /// Pairwise distance matrix as CSV.
    Matrix(CorpusArgs),
    /// Classical MDS coordinates as CSV; stress on stderr.
    Embed {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(short, default_value_t = 2)]
        k: usize,
    },
    /// Subset genealogy as DOT.
    Genealogy {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Property path prefix to leave out of the comparison.
        #[arg(long)]
        ignore: Vec<String>,
    },
    /// Greedy nearest-neighbour ordering.
    Sequence {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// File name or index of the first spec.
        #[arg(long, default_value = "0")]
        start: String,
    },
    /// Shortest path between two specs over the distance graph.
    Path {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
    },
    /// Specs closest to a query spec.
    Nearest {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        query: PathBuf,
        #[arg(long, default_value_t = 5)]
        top: usize,
    },
}

enum Failure {
    Input(String),
    Operator(String),
    Conflict(String),
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Config(_)
            | AnalysisError::IndexOutOfRange { .. }
            | AnalysisError::InvalidDimension => Failure::Input(e.to_string()),
            _ => Failure::Operator(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Operator(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_OPERATOR)
        }
        Err(Failure::Conflict(listing)) => {
            print!("{listing}");
            ExitCode::from(EXIT_CONFLICT)
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Union {
            left,
            right,
            op,
            load,
            out,
        } => {
            let (l, r) = (load_rel(&left, load)?, load_rel(&right, load)?);
            let result =
                union(&l, &r, op.params()).map_err(|e| Failure::Operator(e.to_string()))?;
            for notice in &result.report {
                eprintln!("{notice}");
            }
            emit(out.as_deref(), &spec_text(&result.merged)?)
        }
        Command::UnionMany {
            inputs,
            op,
            load,
            out,
        } => {
            let corpus = load_inputs(&inputs, load)?;
            let rels: Vec<RelViz> = corpus.into_iter().map(|c| c.1).collect();
            let result =
                union_many(&rels, op.params()).map_err(|e| Failure::Operator(e.to_string()))?;
            for notice in &result.report {
                eprintln!("{notice}");
            }
            emit(out.as_deref(), &spec_text(&result.merged)?)
        }
        Command::Diff(args) => set_command(args, difference),
        Command::Intersect(args) => set_command(args, intersect),
        Command::Merge {
            base,
            ours,
            theirs,
            out,
        } => {
            let load = LoadFlags {
                keep_unencoded: true,
            };
            let (b, o, t) = (
                load_rel(&base, load)?,
                load_rel(&ours, load)?,
                load_rel(&theirs, load)?,
            );
            match merge_versions(&b, &o, &t) {
                MergeOutcome::Merged(rel) => emit(out.as_deref(), &spec_text(&rel)?),
                MergeOutcome::Conflict(report) => Err(Failure::Conflict(report.to_string())),
            }
        }
        Command::Analyze { command } => analyze(command),
        Command::BenchStyleTransfer { corpus } => {
            let seed = match std::env::var("VIZALG_SEED") {
                Ok(s) => s.trim().parse::<u64>().map_err(|_| {
                    Failure::Input(format!(
                        "VIZALG_SEED must be an unsigned integer, got `{s}`"
                    ))
                })?,
                Err(_) => 0,
            };
            let cases: Vec<(String, VizSpec)> = load_dir_specs(&corpus)?;
            let report = bench_style_transfer(&cases, seed);
            emit(None, &report.to_string())
        }
    }
}

type SetOp = fn(
    &RelViz,
    &RelViz,
    OpParams,
) -> (
    vizalg::operators::MarkedData,
    vizalg::operators::MarkedStyle,
);

fn set_command(args: SetArgs, op: SetOp) -> CliResult<()> {
    let (l, r) = (
        load_rel(&args.left, args.load)?,
        load_rel(&args.right, args.load)?,
    );
    let (data, style) = op(&l, &r, OpParams::default().on(args.on));
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
        write_file(&dir.join("data.csv"), &data.to_csv())?;
        write_file(&dir.join("style.csv"), &style.to_csv())?;
    }
    if args.render_template {
        let mut text = String::new();
        for line in render_style_difference(&style) {
            text.push_str(&line);
            text.push('\n');
        }
        emit(None, &text)
    } else if args.out.is_none() {
        emit(
            None,
            &format!("# data\n{}# style\n{}", data.to_csv(), style.to_csv()),
        )
    } else {
        Ok(())
    }
}

fn analyze(command: Analyze) -> CliResult<()> {
    match command {
        Analyze::Matrix(args) => {
            let (labels, corpus, weights) = load_corpus(&args, 2)?;
            let m = distance_matrix(&corpus, labels, &weights);
            let mut buf = Vec::new();
            m.write_csv(&mut buf).expect("writing to memory");
            emit(
                args.out.as_deref(),
                &String::from_utf8(buf).expect("csv is UTF-8"),
            )
        }
        Analyze::Embed { corpus: args, k } => {
            let (labels, corpus, weights) = load_corpus(&args, 2)?;
            let e = mds_embed(&distance_matrix(&corpus, labels, &weights), k)?;
            eprintln!("stress: {}", e.stress);
            let mut buf = Vec::new();
            e.write_csv(&mut buf).expect("writing to memory");
            emit(
                args.out.as_deref(),
                &String::from_utf8(buf).expect("csv is UTF-8"),
            )
        }
        Analyze::Genealogy {
            corpus: args,
            ignore,
        } => {
            let (labels, corpus, _) = load_corpus(&args, 1)?;
            let ignore: Vec<PropertyPath> = ignore.iter().map(|p| PropertyPath::parse(p)).collect();
            emit(
                args.out.as_deref(),
                &genealogy(&corpus, &labels, &ignore).to_dot(),
            )
        }
        Analyze::Sequence {
            corpus: args,
            start,
        } => {
            let (labels, corpus, weights) = load_corpus(&args, 1)?;
            let start = resolve(&labels, &start)?;
            let order = sequence(&distance_matrix(&corpus, labels.clone(), &weights), start)?;
            let mut text = String::from("step,label\n");
            for (step, i) in order.iter().enumerate() {
                text.push_str(&format!("{step},{}\n", csv_field(&labels[*i])));
            }
            emit(args.out.as_deref(), &text)
        }
        Analyze::Path {
            corpus: args,
            from,
            to,
        } => {
            let (labels, corpus, weights) = load_corpus(&args, 1)?;
            let (src, dst) = (resolve(&labels, &from)?, resolve(&labels, &to)?);
            let (path, total) = shortest_path(
                &distance_matrix(&corpus, labels.clone(), &weights),
                src,
                dst,
            )?;
            let mut text = String::from("step,label\n");
            for (step, i) in path.iter().enumerate() {
                text.push_str(&format!("{step},{}\n", csv_field(&labels[*i])));
            }
            eprintln!("total: {total}");
            emit(args.out.as_deref(), &text)
        }
        Analyze::Nearest {
            corpus: args,
            query,
            top,
        } => {
            let (labels, corpus, weights) = load_corpus(&args, 1)?;
            if top == 0 {
                return Err(Failure::Input("--top must be at least 1".into()));
            }
            let q = load_rel(&query, args.load)?;
            let mut text = String::from("rank,label,distance\n");
            for (rank, (i, d)) in nearest(&corpus, &q, &weights, top).into_iter().enumerate() {
                text.push_str(&format!("{},{},{d}\n", rank + 1, csv_field(&labels[i])));
            }
            emit(args.out.as_deref(), &text)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn resolve(labels: &[String], token: &str) -> CliResult<usize> {
    if let Some(i) = labels.iter().position(|l| l == token) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if i < labels.len() => Ok(i),
        _ => Err(Failure::Input(format!(
            "no spec named or numbered `{token}`"
        ))),
    }
}

fn load_corpus(
    args: &CorpusArgs,
    min: usize,
) -> CliResult<(Vec<String>, Vec<RelViz>, WeightConfig)> {
    let weights = match &args.weights {
        Some(p) => WeightConfig::from_toml(&read(p)?)?,
        None => WeightConfig::default(),
    };
    let corpus = load_inputs(std::slice::from_ref(&args.corpus), args.load)?;
    if corpus.len() < min {
        return Err(Failure::Input(format!(
            "{} needs at least {min} parseable spec(s), found {}",
            args.corpus.display(),
            corpus.len()
        )));
    }
    let (labels, rels) = corpus.into_iter().unzip();
    Ok((labels, rels, weights))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_spec(path: &Path) -> CliResult<VizSpec> {
    parse_spec(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_rel(path: &Path, load: LoadFlags) -> CliResult<RelViz> {
    from_spec(&load_spec(path)?, load.keep_unencoded)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `*.json` files of a directory in name order.
fn dir_entries(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

fn label_of(path: &Path) -> String {
    path.file_name().map_or_else(
        || path.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn load_dir_specs(dir: &Path) -> CliResult<Vec<(String, VizSpec)>> {
    let mut out = Vec::new();
    for file in dir_entries(dir)? {
        match load_spec(&file) {
            Ok(spec) => out.push((label_of(&file), spec)),
            Err(Failure::Input(msg)) => eprintln!("warning: skipping {msg}"),
            Err(other) => return Err(other),
        }
    }
    if out.is_empty() {
        return Err(Failure::Input(format!(
            "no parseable spec in {}",
            dir.display()
        )));
    }
    Ok(out)
}

/// Files are loaded as given; directories contribute their specs in name
/// order, skipping (with a warning) those that fail to load.
fn load_inputs(inputs: &[PathBuf], load: LoadFlags) -> CliResult<Vec<(String, RelViz)>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            for file in dir_entries(input)? {
                match load_rel(&file, load) {
                    Ok(rel) => out.push((label_of(&file), rel)),
                    Err(Failure::Input(msg)) => eprintln!("warning: skipping {msg}"),
                    Err(other) => return Err(other),
                }
            }
        } else {
            out.push((label_of(input), load_rel(input, load)?));
        }
    }
    if out.is_empty() {
        return Err(Failure::Input("no parseable spec among the inputs".into()));
    }
    Ok(out)
}

fn spec_text(rel: &RelViz) -> CliResult<String> {
    let spec = to_spec(rel).map_err(|e| Failure::Operator(e.to_string()))?;
    Ok(serialize_spec(&spec))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Failure::Input(format!("stdout: {e}")))
        }
    }
}
