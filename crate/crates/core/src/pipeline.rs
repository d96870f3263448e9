//! End-to-end orchestration: text in, solved layout and SVG out.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{build_tree, louvain, LouvainConfig, Partition, Weighting};
use crate::corpus::{count_words, tokenize, TokenFilterConfig};
use crate::embeddings::{drop_oov, load_vectors, EmbeddingError, EmbeddingTable};
use crate::fontfit::{fit_word, fit_word_baseline_clamped, FitOptions, FontInfo, FontMetricsTable};
use crate::geometry::{Point, Polygon};
use crate::render::{to_svg, RenderStyle};
use crate::semgraph::knn_graph;
use crate::treemap::{circle_container, layout_tree, normalize_container, square_container, CvtOptions, LayoutDocument, WordInfo};

pub const MAX_WORDS_LIMIT: usize = 1000;
pub const MAX_K: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Corpus,
    Embeddings,
    Semgraph,
    Cluster,
    Treemap,
    Fontfit,
    Render,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).expect("stage serializes");
        f.write_str(s.as_str().expect("unit variant"))
    }
}

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
#[error("{stage}: {error}: {detail}")]
pub struct PipelineError {
    pub error: String,
    pub stage: Stage,
    pub detail: String,
}

impl PipelineError {
    pub fn new(stage: Stage, error: &str, detail: impl fmt::Display) -> Self {
        PipelineError {
            error: error.to_string(),
            stage,
            detail: detail.to_string(),
        }
    }

    pub fn config(field: &str, detail: impl fmt::Display) -> Self {
        Self::new(Stage::Config, "InvalidConfig", format!("{field}: {detail}"))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("error serializes")
    }
}

/// Container shape: `circle`, `square`, or a path to a JSON `[[x, y], ...]` polygon.
#[derive(Debug, Clone, PartialEq)]
pub enum ContainerSpec {
    Circle,
    Square,
    Custom(Polygon),
}

impl ContainerSpec {
    pub fn parse(s: &str) -> Result<Self, PipelineError> {
        match s {
            "circle" => Ok(ContainerSpec::Circle),
            "square" => Ok(ContainerSpec::Square),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| PipelineError::config("container", format!("{path}: {e}")))?;
                let pts: Vec<Point> = serde_json::from_str(&text)
                    .map_err(|e| PipelineError::config("container", format!("{path}: {e}")))?;
                let poly = Polygon::new(pts)
                    .map_err(|e| PipelineError::config("container", format!("{path}: {e}")))?;
                Ok(ContainerSpec::Custom(poly))
            }
        }
    }

    pub fn polygon(&self) -> Polygon {
        match self {
            ContainerSpec::Circle => circle_container(),
            ContainerSpec::Square => square_container(),
            ContainerSpec::Custom(p) => normalize_container(p),
        }
    }
}

/// The per-request parameter surface, shared by the CLI and the service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct LayoutParams {
    pub language: String,
    pub max_words: usize,
    pub k: usize,
    pub weighting: Weighting,
    pub container: String,
    pub font: String,
    pub optimize_font: bool,
    pub rotation_step: f64,
    pub hyphenate: bool,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            language: "en".into(),
            max_words: 50,
            k: crate::semgraph::DEFAULT_K,
            weighting: Weighting::Linear,
            container: "circle".into(),
            font: "helvetica".into(),
            optimize_font: true,
            rotation_step: crate::fontfit::DEFAULT_ROTATION_STEP,
            hyphenate: true,
            seed: 42,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(1..=MAX_WORDS_LIMIT).contains(&self.max_words) {
            return Err(PipelineError::config("max-words", format!("must be in 1..={MAX_WORDS_LIMIT}")));
        }
        if !(1..=MAX_K).contains(&self.k) {
            return Err(PipelineError::config("k", format!("must be in 1..={MAX_K}")));
        }
        if !(self.rotation_step.is_finite() && (0.0..=90.0).contains(&self.rotation_step)) {
            return Err(PipelineError::config("rotation-step", "must be in [0, 90] degrees"));
        }
        if self.language.trim().is_empty() {
            return Err(PipelineError::config("language", "must not be empty"));
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            rotation_step: self.rotation_step,
            hyphenate: self.hyphenate,
            ..FitOptions::default()
        }
    }
}

/// Where word vectors come from.
#[derive(Debug, Clone)]
pub enum EmbeddingSource {
    /// Stream the file, keeping only words of the current text.
    File(PathBuf),
    /// A table loaded once and shared read-only.
    Shared(Arc<EmbeddingTable>),
}

/// Long-lived inputs that are not part of a request.
#[derive(Debug, Clone)]
pub struct Resources {
    pub embeddings: EmbeddingSource,
    /// Replaces the bundled list for `language`.
    pub stopwords: Option<HashSet<String>>,
    pub lexicon: Option<HashSet<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: Stage,
    pub millis: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings(pub Vec<StageTiming>);

impl Timings {
    fn push(&mut self, stage: Stage, d: Duration) {
        self.0.push(StageTiming {
            stage,
            millis: d.as_secs_f64() * 1e3,
        });
    }

    pub fn total_millis(&self) -> f64 {
        self.0.iter().map(|t| t.millis).sum()
    }

    /// `Server-Timing` header value.
    pub fn header_value(&self) -> String {
        self.0
            .iter()
            .map(|t| format!("{};dur={:.3}", t.stage, t.millis))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

#[derive(Debug, Clone)]
pub struct LayoutOutput {
    pub document: LayoutDocument,
    pub partition: Partition,
    pub timings: Timings,
}

impl LayoutOutput {
    pub fn cluster_count(&self) -> usize {
        self.partition.community_count()
    }
}

fn timed<T>(timings: &mut Timings, stage: Stage, f: impl FnOnce() -> Result<T, PipelineError>) -> Result<T, PipelineError> {
    let start = Instant::now();
    let out = f();
    timings.push(stage, start.elapsed());
    out
}

fn embedding_error(e: EmbeddingError) -> PipelineError {
    let kind = match &e {
        EmbeddingError::FileUnreadable { .. } => "FileUnreadable",
        EmbeddingError::DimensionMismatch { .. } => "DimensionMismatch",
        EmbeddingError::EmptyIntersection => "EmptyIntersection",
        EmbeddingError::ZeroVector => "ZeroVector",
        EmbeddingError::LengthMismatch(..) => "LengthMismatch",
    };
    PipelineError::new(Stage::Embeddings, kind, e)
}

/// Runs every stage up to and including word placement.
pub fn run_layout(text: &str, params: &LayoutParams, res: &Resources) -> Result<LayoutOutput, PipelineError> {
    params.validate()?;
    let container = ContainerSpec::parse(&params.container)?.polygon();
    let metrics = FontMetricsTable::resolve(&params.font).map_err(|e| PipelineError::config("font", e))?;
    let mut timings = Timings::default();

    let entries = timed(&mut timings, Stage::Corpus, || {
        // the cap applies after out-of-vocabulary words are gone
        let mut cfg = match &res.stopwords {
            Some(sw) => TokenFilterConfig::with_stopwords(&params.language, sw.clone(), usize::MAX),
            None => TokenFilterConfig::for_language(&params.language, usize::MAX),
        }
        .map_err(|e| PipelineError::new(Stage::Corpus, "StopWords", e))?;
        cfg.keep_lexicon = res.lexicon.clone();
        let tokens = tokenize(text, &cfg);
        if tokens.is_empty() {
            return Err(PipelineError::new(Stage::Corpus, "NoWords", "no words left after filtering"));
        }
        Ok(count_words(&tokens, &cfg))
    })?;

    let entries = timed(&mut timings, Stage::Embeddings, || {
        let mut kept = match &res.embeddings {
            EmbeddingSource::Shared(table) => drop_oov(entries, table),
            EmbeddingSource::File(path) => {
                let vocab: HashSet<String> = entries.iter().map(|e| e.surface.clone()).collect();
                let table = load_vectors(path, &vocab).map_err(embedding_error)?;
                drop_oov(entries, &table)
            }
        };
        if kept.is_empty() {
            return Err(embedding_error(EmbeddingError::EmptyIntersection));
        }
        kept.truncate(params.max_words);
        Ok(kept)
    })?;

    let graph = timed(&mut timings, Stage::Semgraph, || {
        if entries.len() < 2 {
            return Ok(None);
        }
        knn_graph(&entries, params.k)
            .map(Some)
            .map_err(|e| PipelineError::new(Stage::Semgraph, "Graph", e))
    })?;

    let (partition, tree) = timed(&mut timings, Stage::Cluster, || {
        let partition = match &graph {
            Some(g) => louvain(
                g,
                &LouvainConfig {
                    seed: params.seed,
                    ..LouvainConfig::default()
                },
            ),
            None => Partition(vec![0]),
        };
        let tree = build_tree(&partition, &entries, params.weighting);
        Ok((partition, tree))
    })?;

    let mut document = timed(&mut timings, Stage::Treemap, || {
        let mut doc = layout_tree(&tree, &container, params.seed, &CvtOptions::default());
        doc.words = entries
            .iter()
            .map(|e| WordInfo {
                text: e.surface.clone(),
                count: e.count,
            })
            .collect();
        doc.font = Some(FontInfo::from(&metrics));
        Ok(doc)
    })?;

    timed(&mut timings, Stage::Fontfit, || {
        let opts = params.fit_options();
        let words: Vec<String> = document.words.iter().map(|w| w.text.clone()).collect();
        let mut leaves = document.leaves_mut();
        leaves
            .par_iter_mut()
            .map(|leaf| {
                let word = &words[leaf.word.expect("leaves carry words")];
                let placed = if params.optimize_font {
                    fit_word(word, &leaf.polygon, &metrics, &opts)
                } else {
                    fit_word_baseline_clamped(word, &leaf.polygon, &metrics, opts.min_scale)
                };
                leaf.placement = Some(placed.map_err(|e| PipelineError::new(Stage::Fontfit, "Fit", format!("{word}: {e}")))?);
                Ok(())
            })
            .collect::<Result<(), PipelineError>>()
    })?;

    Ok(LayoutOutput {
        document,
        partition,
        timings,
    })
}

pub fn render_svg(doc: &LayoutDocument, timings: &mut Timings) -> Result<String, PipelineError> {
    timed(timings, Stage::Render, || {
        to_svg(doc, &RenderStyle::default()).map_err(|e| PipelineError::new(Stage::Render, "Render", e))
    })
}

/// Runs `f` on a pool of `threads` workers, or on the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, PipelineError> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(PipelineError::config("threads", "must be at least 1")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| PipelineError::config("threads", e))?;
            Ok(pool.install(f))
        }
    }
}

pub fn read_text(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::config("input", format!("{}: {e}", path.display())))
}
