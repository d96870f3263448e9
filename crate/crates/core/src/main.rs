use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use storygem::cluster::Weighting;
use storygem::corpus::read_word_list;
use storygem::pipeline::{
    read_text, render_svg, run_layout, with_threads, EmbeddingSource, LayoutParams, PipelineError, Resources, Stage,
};

#[derive(Parser, Debug)]
#[command(name = "storygem", version, about = "Semantic word clouds as nested Voronoi treemaps")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Serve the HTTP API (and optionally a UI bundle).
    Serve(ServeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Svg,
    Json,
    Both,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Plain-text input file.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Word vectors in fastText .vec format.
    #[arg(long)]
    vectors: Option<PathBuf>,
    /// Stop-word list replacing the bundled one.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Only words in this list are kept.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    language: Option<String>,
    #[arg(long)]
    max_words: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_parser = ["linear", "sqrt"])]
    weighting: Option<String>,
    /// circle, square, or a JSON polygon file.
    #[arg(long)]
    container: Option<String>,
    /// helvetica, courier, or a metrics JSON file.
    #[arg(long)]
    font: Option<String>,
    #[arg(long, overrides_with = "no_optimize_font")]
    optimize_font: bool,
    #[arg(long)]
    no_optimize_font: bool,
    /// Degrees between candidate angles; 0 disables rotation.
    #[arg(long)]
    rotation_step: Option<f64>,
    #[arg(long, overrides_with = "no_hyphenate")]
    hyphenate: bool,
    #[arg(long)]
    no_hyphenate: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted (not allowed with --format both).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, env = "STORYGEM_THREADS")]
    threads: Option<usize>,
    /// JSON file with any of the options above (kebab-case keys).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long)]
    vectors: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Directory with the static UI bundle served at /.
    #[arg(long)]
    ui_dir: Option<PathBuf>,
    #[arg(long, env = "STORYGEM_THREADS")]
    threads: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(default, rename_all = "kebab-case")]
struct FileConfig {
    input: Option<PathBuf>,
    vectors: Option<PathBuf>,
    stopwords: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
    language: Option<String>,
    max_words: Option<usize>,
    k: Option<usize>,
    weighting: Option<Weighting>,
    container: Option<String>,
    font: Option<String>,
    optimize_font: Option<bool>,
    rotation_step: Option<f64>,
    hyphenate: Option<bool>,
    seed: Option<u64>,
}

struct RunConfig {
    input: PathBuf,
    vectors: PathBuf,
    stopwords: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Format,
    threads: Option<usize>,
    params: LayoutParams,
}

fn flag_bool(on: bool, off: bool) -> Option<bool> {
    match (on, off) {
        (true, _) => Some(true),
        (_, true) => Some(false),
        _ => None,
    }
}

fn readable(flag: &str, p: Option<PathBuf>) -> Result<Option<PathBuf>, PipelineError> {
    match p {
        Some(p) if !p.is_file() => Err(PipelineError::config(flag, format!("{} is not a readable file", p.display()))),
        other => Ok(other),
    }
}

fn resolve(args: RunArgs) -> Result<RunConfig, PipelineError> {
    let file: FileConfig = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| PipelineError::config("--config", format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| PipelineError::config("--config", format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let d = LayoutParams::default();
    let weighting = match args.weighting.as_deref() {
        Some(w) => Some(w.parse().map_err(|e| PipelineError::config("--weighting", e))?),
        None => file.weighting,
    };
    let params = LayoutParams {
        language: args.language.or(file.language).unwrap_or(d.language),
        max_words: args.max_words.or(file.max_words).unwrap_or(d.max_words),
        k: args.k.or(file.k).unwrap_or(d.k),
        weighting: weighting.unwrap_or(d.weighting),
        container: args.container.or(file.container).unwrap_or(d.container),
        font: args.font.or(file.font).unwrap_or(d.font),
        optimize_font: flag_bool(args.optimize_font, args.no_optimize_font)
            .or(file.optimize_font)
            .unwrap_or(d.optimize_font),
        rotation_step: args.rotation_step.or(file.rotation_step).unwrap_or(d.rotation_step),
        hyphenate: flag_bool(args.hyphenate, args.no_hyphenate)
            .or(file.hyphenate)
            .unwrap_or(d.hyphenate),
        seed: args.seed.or(file.seed).unwrap_or(d.seed),
    };
    params.validate().map_err(|e| PipelineError {
        detail: format!("--{}", e.detail),
        ..e
    })?;

    let input = readable("--input", args.input.or(file.input))?
        .ok_or_else(|| PipelineError::config("--input", "is required"))?;
    let vectors = readable("--vectors", args.vectors.or(file.vectors))?
        .ok_or_else(|| PipelineError::config("--vectors", "is required"))?;
    let format = args.format.or(file.format).unwrap_or(Format::Svg);
    let out = args.out.or(file.out);
    if format == Format::Both && out.is_none() {
        return Err(PipelineError::config("--out", "is required with --format both"));
    }
    let threads = args.threads.or(file.threads);
    if threads == Some(0) {
        return Err(PipelineError::config("--threads", "must be at least 1"));
    }
    Ok(RunConfig {
        input,
        vectors,
        stopwords: readable("--stopwords", args.stopwords.or(file.stopwords))?,
        lexicon: readable("--lexicon", args.lexicon.or(file.lexicon))?,
        out,
        format,
        threads,
        params,
    })
}

fn word_set(flag: &str, p: &Option<PathBuf>) -> Result<Option<HashSet<String>>, PipelineError> {
    p.as_ref()
        .map(|p| read_word_list(p).map_err(|e| PipelineError::config(flag, e)))
        .transpose()
}

fn write_out(path: Option<&Path>, body: &str) -> Result<(), PipelineError> {
    match path {
        Some(p) => std::fs::write(p, body)
            .map_err(|e| PipelineError::new(Stage::Render, "Write", format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cfg: RunConfig) -> Result<(), PipelineError> {
    let start = Instant::now();
    let text = read_text(&cfg.input)?;
    let res = Resources {
        embeddings: EmbeddingSource::File(cfg.vectors.clone()),
        stopwords: word_set("--stopwords", &cfg.stopwords)?,
        lexicon: word_set("--lexicon", &cfg.lexicon)?,
    };
    let params = cfg.params.clone();
    let mut out = with_threads(cfg.threads, || run_layout(&text, &params, &res))??;
    let doc = &out.document;

    match cfg.format {
        Format::Svg => write_out(cfg.out.as_deref(), &render_svg(doc, &mut out.timings)?)?,
        Format::Json => write_out(cfg.out.as_deref(), &doc.to_json())?,
        Format::Both => {
            let base = cfg.out.as_ref().expect("checked in resolve");
            write_out(Some(&base.with_extension("svg")), &render_svg(doc, &mut out.timings)?)?;
            write_out(Some(&base.with_extension("json")), &doc.to_json())?;
        }
    }
    let summary = format!(
        "laid out {} words in {} clusters, max area error {:.4}, {:.2}s",
        doc.leaves().len(),
        out.cluster_count(),
        doc.stats.max_area_error,
        start.elapsed().as_secs_f64()
    );
    if cfg.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<(), PipelineError> {
    if !args.vectors.is_file() {
        return Err(PipelineError::config("--vectors", format!("{} is not a readable file", args.vectors.display())));
    }
    if let Some(n) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| PipelineError::config("--threads", e))?;
    }
    let config = storygem::service::ServiceConfig {
        stopwords: word_set("--stopwords", &args.stopwords)?,
        lexicon: word_set("--lexicon", &args.lexicon)?,
        ui_dir: args.ui_dir,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| PipelineError::new(Stage::Config, "Runtime", e))?;
    rt.block_on(storygem::service::serve(&args.host, args.port, args.vectors, config))
        .map_err(|e| PipelineError::new(Stage::Config, "Serve", e))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Serve(args)) => serve(args),
        None => resolve(cli.run).and_then(run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(if e.stage == Stage::Config { 2 } else { 1 })
        }
    }
}
