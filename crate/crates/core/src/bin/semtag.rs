use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use semtag::bootstrap::{bootstrap, BootstrapConfig, BootstrapError};
use semtag::corpus::{self, CorpusError, TaggedCorpus};
use semtag::eval::{compare, evaluate, evaluate_corpora, EvalError};
use semtag::semantics::{Registry, SemanticsError};
use semtag::tagger::{self, TaggerConfig, TaggerError, TrigramModel};
use semtag::tagset;

#[derive(Parser)]
#[command(name = "semtag", version, about = "Universal semantic tagging toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, Default)]
enum Format {
    #[default]
    Text,
    Tsv,
}

#[derive(Args)]
struct HyperParams {
    /// Decoder beam width; 0 keeps every state.
    #[arg(long, default_value_t = tagger::DEFAULT_BEAM_WIDTH)]
    beam: usize,
    /// Longest suffix used for unknown words.
    #[arg(long = "suffix-len", default_value_t = tagger::DEFAULT_MAX_SUFFIX_LEN)]
    suffix_len: usize,
    /// Words at most this frequent feed the suffix model.
    #[arg(long = "rare-threshold", default_value_t = tagger::DEFAULT_RARE_THRESHOLD)]
    rare_threshold: u64,
}

impl HyperParams {
    fn config(&self) -> TaggerConfig {
        TaggerConfig {
            max_suffix_len: self.suffix_len,
            rare_threshold: self.rare_threshold,
            beam_width: self.beam,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a tagged corpus against the format and the tagset.
    Validate {
        corpus: PathBuf,
        /// Diagnostics to print before giving up.
        #[arg(long = "max-errors", default_value_t = 20)]
        max_errors: usize,
    },
    /// Train a trigram model on a tagged corpus.
    Train {
        corpus: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[command(flatten)]
        params: HyperParams,
    },
    /// Tag a plain corpus (one sentence per line).
    Tag {
        input: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(short, long, default_value = "-")]
        output: PathBuf,
        /// Override the model's beam width; 0 keeps every state.
        #[arg(long)]
        beam: Option<usize>,
    },
    /// Score predictions against gold; with --baseline, also compare the two.
    Eval {
        gold: PathBuf,
        predicted: PathBuf,
        /// Baseline predictions for a side-by-side comparison.
        #[arg(long)]
        baseline: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Train the most-frequent-tag baseline and score it on gold data.
    Baseline {
        train: PathBuf,
        gold: PathBuf,
        /// Also write the baseline's predictions here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Self-train on unlabeled text and keep the best held-out model.
    Bootstrap {
        seed: PathBuf,
        unlabeled: PathBuf,
        heldout: PathBuf,
        #[arg(long)]
        model: PathBuf,
        /// Minimum sentence confidence for promotion.
        #[arg(long, default_value_t = 0.9)]
        threshold: f64,
        #[arg(long = "max-iter", default_value_t = 5)]
        max_iter: usize,
        /// Most sentences promoted per iteration.
        #[arg(long = "promote-cap", default_value_t = 1000)]
        promote_cap: usize,
        /// Stop when held-out accuracy improves by less than this.
        #[arg(long = "stop-delta", default_value_t = 0.0)]
        stop_delta: f64,
        /// Directory for the sentences promoted in each iteration.
        #[arg(long = "dump-promoted")]
        dump_promoted: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
        #[command(flatten)]
        params: HyperParams,
    },
    /// Print the instantiated schema of a sem-tag at a CCG category.
    Schema {
        tag: String,
        category: String,
        symbol: String,
        roles: Vec<String>,
        /// Schema file to use instead of the built-in registry.
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Print the tagset.
    Tagset {
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{path}: {source}")]
    Corpus { path: String, source: CorpusError },
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Bootstrap(#[from] BootstrapError),
    #[error("{0} problem(s) found")]
    Invalid(usize),
}

impl CliError {
    // 2 is left to clap for usage errors.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Io { .. } => 3,
            CliError::Corpus { .. } => 4,
            CliError::Tagger(_) => 5,
            CliError::Eval(_) => 6,
            CliError::Semantics(_) => 7,
            CliError::Bootstrap(_) => 8,
        }
    }
}

fn shown(path: &Path) -> String {
    if is_stdio(path) {
        "<stdin>".into()
    } else {
        path.display().to_string()
    }
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open(path: &Path) -> Result<Box<dyn BufRead>, CliError> {
    if is_stdio(path) {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(|source| CliError::Io {
            path: shown(path),
            source,
        })?;
        return Ok(Box::new(io::Cursor::new(buf)));
    }
    let f = File::open(path).map_err(|source| CliError::Io {
        path: shown(path),
        source,
    })?;
    Ok(Box::new(BufReader::new(f)))
}

fn read_tagged(path: &Path) -> Result<TaggedCorpus, CliError> {
    corpus::read_tagged(open(path)?).map_err(|source| CliError::Corpus {
        path: shown(path),
        source,
    })
}

/// Writes `bytes` to `path` via a temporary file so failures leave nothing behind.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if is_stdio(path) {
        let mut out = io::stdout().lock();
        return out.write_all(bytes).and_then(|_| out.flush()).map_err(io_err);
    }
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

fn print(s: &str) -> Result<(), CliError> {
    write_atomic(Path::new("-"), s.as_bytes())
}

fn cmd_validate(path: &Path, max_errors: usize) -> Result<(), CliError> {
    let problems = corpus::validate_tagged(open(path)?, max_errors).map_err(|source| CliError::Io {
        path: shown(path),
        source,
    })?;
    if problems.is_empty() {
        return print(&format!("{}: ok\n", shown(path)));
    }
    for p in &problems {
        eprintln!("{}: {p}", shown(path));
    }
    Err(CliError::Invalid(problems.len()))
}

fn cmd_train(path: &Path, model_out: &Path, cfg: TaggerConfig) -> Result<(), CliError> {
    let corpus = read_tagged(path)?;
    let model = TrigramModel::train(&corpus, cfg)?;
    write_atomic(model_out, model.to_model_string().as_bytes())
}

fn load_model(path: &Path) -> Result<TrigramModel, CliError> {
    Ok(TrigramModel::read_from(open(path)?)?)
}

fn cmd_tag(model_path: &Path, input: &Path, output: &Path, beam: Option<usize>) -> Result<(), CliError> {
    let mut model = load_model(model_path)?;
    if let Some(b) = beam {
        model.set_beam_width(b);
    }
    let plain = corpus::read_plain(open(input)?).map_err(|source| CliError::Corpus {
        path: shown(input),
        source,
    })?;
    let tags = tagger::tag_corpus(&model, &plain);
    let sentences = plain
        .sentences
        .iter()
        .zip(&tags)
        .map(|(s, t)| s.with_tags(t).expect("one tag per token"))
        .collect();
    let tagged = TaggedCorpus::new(sentences);
    write_atomic(output, corpus::write_tagged(&tagged).as_bytes())
}

fn cmd_eval(gold: &Path, predicted: &Path, baseline: Option<&Path>, format: Format) -> Result<(), CliError> {
    let gold = read_tagged(gold)?;
    let report = evaluate_corpora(&gold, &read_tagged(predicted)?)?;
    let Some(b) = baseline else {
        return print(&match format {
            Format::Text => report.to_text(),
            Format::Tsv => report.to_tsv(),
        });
    };
    let base = evaluate_corpora(&gold, &read_tagged(b)?)?;
    let cmp = compare(&report, &base)?;
    let out = match format {
        Format::Text => format!(
            "== model ==\n{}\n== baseline ==\n{}\n{}",
            report.to_text(),
            base.to_text(),
            cmp.to_text("model", "baseline")
        ),
        Format::Tsv => {
            let prefixed = |s: String, p: &str| s.lines().map(|l| format!("{p}\t{l}\n")).collect::<String>();
            prefixed(report.to_tsv(), "model") + &prefixed(base.to_tsv(), "baseline") + &prefixed(cmp.to_tsv(), "compare")
        }
    };
    print(&out)
}

fn cmd_baseline(train: &Path, gold: &Path, output: Option<&Path>, format: Format) -> Result<(), CliError> {
    let model = tagger::train_baseline(&read_tagged(train)?)?;
    let gold = read_tagged(gold)?;
    let predicted = tagger::tag_corpus(&model, &gold);
    let report = evaluate(&gold, &predicted)?;
    if let Some(out) = output {
        let sentences = gold
            .sentences
            .iter()
            .zip(&predicted)
            .map(|(s, t)| s.to_plain().with_tags(t).expect("one tag per token"))
            .collect();
        write_atomic(out, corpus::write_tagged(&TaggedCorpus::new(sentences)).as_bytes())?;
    }
    print(&match format {
        Format::Text => report.to_text(),
        Format::Tsv => report.to_tsv(),
    })
}

fn cmd_bootstrap(
    seed: &Path,
    unlabeled: &Path,
    heldout: &Path,
    model_out: &Path,
    cfg: &BootstrapConfig,
    dump: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    cfg.validate()?;
    let seed = read_tagged(seed)?;
    let pool = corpus::read_plain(open(unlabeled)?).map_err(|source| CliError::Corpus {
        path: shown(unlabeled),
        source,
    })?;
    let heldout = read_tagged(heldout)?;
    let (model, report) = bootstrap(&seed, &pool, &heldout, cfg)?;
    write_atomic(model_out, model.to_model_string().as_bytes())?;
    if let Some(dir) = dump {
        std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.display().to_string(),
            source,
        })?;
        for (i, batch) in report.promoted.iter().enumerate() {
            let path = dir.join(format!("promoted-{:03}.tsv", i + 1));
            write_atomic(&path, corpus::write_tagged(batch).as_bytes())?;
        }
    }
    print(&match format {
        Format::Text => report.to_text(),
        Format::Tsv => report.to_tsv(),
    })
}

fn cmd_schema(tag: &str, category: &str, symbol: &str, roles: &[String], registry: Option<&Path>) -> Result<(), CliError> {
    let reg = match registry {
        Some(p) => Registry::load(p)?,
        None => Registry::builtin(),
    };
    let roles: Vec<&str> = roles.iter().map(String::as_str).collect();
    let term = reg.lookup(tag, category)?.instantiate(symbol, &roles)?;
    print(&format!("{term}\n"))
}

fn cmd_tagset(format: Format) -> Result<(), CliError> {
    let out = match format {
        Format::Tsv => tagset::dump_tsv(),
        Format::Text => {
            let mut out = format!(
                "Semantic tagset v{}: {} tags in {} groups\n",
                tagset::TAGSET_VERSION,
                tagset::NUM_SEM_TAGS,
                tagset::NUM_META_TAGS
            );
            for m in tagset::all_meta_tags() {
                out.push_str(&format!("\n{}  {}\n", m.code(), m.gloss()));
                for t in m.members() {
                    out.push_str(&format!("  {}  {:<32} {}\n", t.code(), t.gloss(), t.examples().join(", ")));
                }
            }
            out
        }
    };
    print(&out)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Validate { corpus, max_errors } => cmd_validate(&corpus, max_errors),
        Command::Train { corpus, model, params } => cmd_train(&corpus, &model, params.config()),
        Command::Tag { input, model, output, beam } => cmd_tag(&model, &input, &output, beam),
        Command::Eval { gold, predicted, baseline, format } => cmd_eval(&gold, &predicted, baseline.as_deref(), format),
        Command::Baseline { train, gold, output, format } => cmd_baseline(&train, &gold, output.as_deref(), format),
        Command::Bootstrap {
            seed,
            unlabeled,
            heldout,
            model,
            threshold,
            max_iter,
            promote_cap,
            stop_delta,
            dump_promoted,
            format,
            params,
        } => {
            let cfg = BootstrapConfig {
                max_iterations: max_iter,
                confidence_threshold: threshold,
                promote_cap,
                stop_delta,
                tagger: params.config(),
            };
            cmd_bootstrap(&seed, &unlabeled, &heldout, &model, &cfg, dump_promoted.as_deref(), format)
        }
        Command::Schema { tag, category, symbol, roles, registry } => {
            cmd_schema(&tag, &category, &symbol, &roles, registry.as_deref())
        }
        Command::Tagset { format } => cmd_tagset(format),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("semtag: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
