//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::ansatz::{AnsatzConfig, AnsatzKind, DEFAULT_MAX_QUBITS};
use crate::circuit::Circuit;
use crate::diagram::TextDiagram;
use crate::error::{Error, Result};
use crate::ingest::{lexicon_parse_all, Document, Lexicon};
use crate::pipeline::{
    circuit_from_diagram, diagram_from_trees, parse_sentences, split_text, tree_artifact, PipelineConfig,
    TreeArtifact,
};
use crate::pregroup::PregroupDiagram;
use crate::rewrite::load_rules;
use crate::sandwich::{expand_frames, SandwichConfig, SandwichMode};
use crate::sim::train::write_history;
use crate::sim::{load_dataset, train, GradientMethod, TrainConfig};
use crate::tree::{forest_to_dot, tree_to_text};

#[derive(Debug, Parser)]
#[command(name = "discocirc", version, about = "Compile text into parameterised quantum circuits")]
pub struct Cli {
    #[command(subcommand)]
    pub stage: Stage,
}

#[derive(Debug, Subcommand)]
pub enum Stage {
    /// Parse plain text or validate an interchange document.
    Parse(Common),
    /// Build and rewrite pregroup trees.
    Tree(Common),
    /// Compose the text diagram.
    Diagram(Common),
    /// Compile to a circuit.
    Circuit(Common),
    /// Train on a JSON-lines dataset of labelled circuits.
    Train(TrainArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Input file: plain text, interchange document, tree artifact, text
    /// diagram or circuit.
    #[arg(long, required_unless_present = "batch")]
    pub input: Option<PathBuf>,
    /// Process every file in a directory; outputs go to --out as a directory.
    #[arg(long)]
    pub batch: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Comma-separated rule names or JSON rule files, applied in order.
    #[arg(long)]
    pub rewrites: Option<String>,
    #[arg(long)]
    pub min_noun_frequency: Option<usize>,
    /// Comma-separated nouns whose chains are dropped.
    #[arg(long, value_delimiter = ',')]
    pub remove_nouns: Vec<String>,
    #[arg(long)]
    pub foliated: bool,
    /// Leave shared-subject coordinations as they are.
    #[arg(long)]
    pub no_coordination: bool,
    /// Expand frames in the diagram stage.
    #[arg(long)]
    pub expand: bool,
    /// Close the circuit with a merge box over every output wire.
    #[arg(long)]
    pub merge: bool,
    #[arg(long, value_enum, default_value_t = AnsatzArg::Sim4)]
    pub ansatz: AnsatzArg,
    #[arg(long, default_value_t = 1)]
    pub qubits_per_wire: usize,
    #[arg(long, default_value_t = 1)]
    pub layers: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Give every box occurrence its own parameters.
    #[arg(long)]
    pub no_sharing: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Dump every parse of each sentence (parse stage, plain text input).
    #[arg(long)]
    pub all_parses: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnsatzArg {
    Iqp,
    Sim4,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// JSON lines of {"text_id", "label", "circuit_path" | "circuit"}.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub epochs: usize,
    #[arg(long, default_value_t = 10)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.01)]
    pub learning_rate: f64,
    #[arg(long, value_enum, default_value_t = GradientArg::ParameterShift)]
    pub gradient: GradientArg,
    #[arg(long, default_value_t = 0.2)]
    pub test_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_QUBITS)]
    pub max_qubits: usize,
    /// Per-epoch CSV: epoch, train_loss, train_acc, test_acc.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GradientArg {
    FiniteDiff,
    ParameterShift,
}

/// What an input file turned out to be.
#[derive(Debug)]
pub enum Input {
    Text(Vec<Vec<String>>),
    Document(Document),
    Trees(TreeArtifact),
    Diagram(TextDiagram),
    Circuit(Circuit),
}

pub fn read_input(path: &Path) -> Result<Input> {
    let text = fs::read_to_string(path)?;
    let trimmed = text.trim_start();
    if !trimmed.starts_with('{') {
        return Ok(Input::Text(split_text(&text)));
    }
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::format(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let has = |k: &str| value.get(k).is_some();
    let wrap = |e: serde_json::Error| Error::format(path.display().to_string(), e.to_string());
    if has("trees") && has("document") {
        Ok(Input::Trees(serde_json::from_value(value).map_err(wrap)?))
    } else if has("sentences") {
        Ok(Input::Document(Document::from_json(&text)?))
    } else if has("states") && has("layers") {
        Ok(Input::Diagram(TextDiagram::from_json(&text)?))
    } else if has("n_qubits") {
        Ok(Input::Circuit(Circuit::from_json(&text)?))
    } else {
        Err(Error::format(path.display().to_string(), "unrecognised input kind"))
    }
}

impl Common {
    fn lexicon(&self) -> Result<Lexicon> {
        match &self.lexicon {
            Some(p) => Lexicon::load(p),
            None => Ok(Lexicon::builtin()),
        }
    }

    pub fn pipeline(&self) -> Result<PipelineConfig> {
        let ansatz = AnsatzConfig {
            kind: match self.ansatz {
                AnsatzArg::Iqp => AnsatzKind::Iqp,
                AnsatzArg::Sim4 => AnsatzKind::Sim4,
            },
            qubits_per_wire: self.qubits_per_wire,
            layers: self.layers,
            share_parameters: !self.no_sharing,
            seed: self.seed,
            max_qubits: self.max_qubits,
        };
        ansatz.validate()?;
        Ok(PipelineConfig {
            rules: match &self.rewrites {
                Some(spec) => load_rules(spec)?,
                None => Vec::new(),
            },
            min_noun_frequency: self.min_noun_frequency,
            remove_nouns: self.remove_nouns.iter().map(|w| w.to_lowercase()).collect(),
            coordinate: !self.no_coordination,
            sandwich: SandwichConfig {
                mode: if self.foliated {
                    SandwichMode::Foliated
                } else {
                    SandwichMode::Shared
                },
            },
            ansatz,
            merge: self.merge,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    Parse,
    Tree,
    Diagram,
    Circuit,
}

fn document(input: Input, lex: &Lexicon) -> Result<Document> {
    match input {
        Input::Text(sentences) => parse_sentences(&sentences, lex),
        Input::Document(d) => Ok(d),
        _ => Err(Error::format("input", "expected plain text or an interchange document")),
    }
}

fn trees(input: Input, lex: &Lexicon, cfg: &PipelineConfig) -> Result<TreeArtifact> {
    match input {
        Input::Trees(t) => Ok(t),
        other => tree_artifact(&document(other, lex)?, Some(lex), cfg),
    }
}

fn diagram(input: Input, lex: &Lexicon, cfg: &PipelineConfig) -> Result<TextDiagram> {
    match input {
        Input::Diagram(d) => Ok(d),
        other => diagram_from_trees(&trees(other, lex, cfg)?, cfg),
    }
}

fn parse_dot(doc: &Document) -> String {
    let mut s = String::from("digraph pregroup {\n  rankdir=LR;\n");
    for (i, d) in doc.sentences.iter().enumerate() {
        let owners = d.wire_owners();
        for (t, tok) in d.tokens.iter().enumerate() {
            let _ = writeln!(
                s,
                "  s{i}_{t} [label=\"{}\\n{}\"];",
                crate::tree::escape(&tok.word),
                tok.ctype
            );
        }
        for c in &d.cups {
            let _ = writeln!(s, "  s{i}_{} -> s{i}_{} [dir=none];", owners[c.0], owners[c.1]);
        }
    }
    s.push_str("}\n");
    s
}

fn parse_text(doc: &Document) -> String {
    let mut s = String::new();
    for (i, d) in doc.sentences.iter().enumerate() {
        let _ = writeln!(s, "# sentence {i}");
        for (t, tok) in d.tokens.iter().enumerate() {
            let _ = writeln!(s, "{t}:{} [{}]", tok.word, tok.ctype);
        }
        let cups: Vec<String> = d.cups.iter().map(|c| format!("{}-{}", c.0, c.1)).collect();
        let _ = writeln!(s, "cups {}", cups.join(" "));
    }
    if !doc.corefs.is_empty() {
        for (k, c) in doc.corefs.chains.iter().enumerate() {
            let ms: Vec<String> = c.iter().map(|m| format!("{}:{}", m.sentence, m.token)).collect();
            let _ = writeln!(s, "chain {k}: {}", ms.join(" "));
        }
    }
    s
}

fn all_parses(sentences: &[Vec<String>], lex: &Lexicon) -> Result<String> {
    let docs = sentences
        .iter()
        .map(|s| {
            let parses: Vec<PregroupDiagram> = lexicon_parse_all(s, lex)?;
            Ok(Document::new(parses, Default::default()))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut s = serde_json::to_string_pretty(&docs).expect("documents serialize");
    s.push('\n');
    Ok(s)
}

fn run_stage(target: Target, args: &Common, input_path: &Path) -> Result<String> {
    let lex = args.lexicon()?;
    let cfg = args.pipeline()?;
    let input = read_input(input_path)?;
    let fmt = args.format;
    match target {
        Target::Parse => {
            if args.all_parses {
                return match input {
                    Input::Text(s) => all_parses(&s, &lex),
                    _ => Err(Error::format("input", "--all-parses needs plain text input")),
                };
            }
            let doc = document(input, &lex)?;
            Ok(match fmt {
                Format::Json => doc.to_json(),
                Format::Text => parse_text(&doc),
                Format::Dot => parse_dot(&doc),
            })
        }
        Target::Tree => {
            let t = trees(input, &lex, &cfg)?;
            Ok(match fmt {
                Format::Json => pretty(&t),
                Format::Text => {
                    let mut s = String::new();
                    for (i, r) in t.trees.iter().enumerate() {
                        if t.trees.len() > 1 {
                            let _ = writeln!(s, "# sentence {i}");
                        }
                        for root in &r.forest {
                            s.push_str(&tree_to_text(root));
                        }
                        for c in &r.removed_cups {
                            let _ = writeln!(s, "removed cup {}-{}", c.0, c.1);
                        }
                    }
                    s
                }
                Format::Dot => t
                    .trees
                    .iter()
                    .enumerate()
                    .map(|(i, r)| forest_to_dot(&r.forest, &format!("sentence{i}")))
                    .collect(),
            })
        }
        Target::Diagram => {
            let mut d = diagram(input, &lex, &cfg)?;
            if args.expand {
                d = expand_frames(&d, &cfg.sandwich)?;
            }
            Ok(match fmt {
                Format::Json => d.to_json(),
                Format::Text => d.to_text(),
                Format::Dot => d.to_dot(),
            })
        }
        Target::Circuit => {
            let c = match input {
                Input::Circuit(c) => c,
                other => circuit_from_diagram(&diagram(other, &lex, &cfg)?, &cfg)?,
            };
            Ok(match fmt {
                Format::Json => c.to_json(),
                Format::Text => c.to_text(),
                Format::Dot => c.to_dot(),
            })
        }
    }
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifacts serialize");
    s.push('\n');
    s
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn extension(target: Target, fmt: Format) -> &'static str {
    match (fmt, target) {
        (Format::Dot, _) => "dot",
        (Format::Text, _) => "txt",
        (Format::Json, Target::Parse) => "doc.json",
        (Format::Json, Target::Tree) => "trees.json",
        (Format::Json, Target::Diagram) => "diagram.json",
        (Format::Json, Target::Circuit) => "circuit.json",
    }
}

fn run_common(target: Target, args: &Common) -> Result<()> {
    let Some(dir) = &args.batch else {
        let input = args.input.as_deref().expect("clap requires --input without --batch");
        let body = run_stage(target, args, input)?;
        return emit(args.out.as_deref(), &body);
    };
    let out = args
        .out
        .as_ref()
        .ok_or_else(|| Error::InvalidConfig("--batch needs --out DIR".into()))?;
    fs::create_dir_all(out)?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    let results: Vec<(PathBuf, Result<()>)> = files
        .par_iter()
        .map(|f| {
            let r = run_stage(target, args, f).and_then(|body| {
                let stem = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                let dest = out.join(format!("{stem}.{}", extension(target, args.format)));
                fs::write(dest, body).map_err(Error::from)
            });
            (f.clone(), r)
        })
        .collect();
    let mut first = None;
    for (f, r) in results {
        match r {
            Ok(()) => log::info!("{}: ok", f.display()),
            Err(e) => {
                eprintln!("{}: {}: {e}", f.display(), e.kind());
                first.get_or_insert(e);
            }
        }
    }
    first.map_or(Ok(()), Err)
}

fn run_train(args: &TrainArgs) -> Result<()> {
    let data = load_dataset(&args.input)?;
    let cfg = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        gradient: match args.gradient {
            GradientArg::FiniteDiff => GradientMethod::FiniteDiff,
            GradientArg::ParameterShift => GradientMethod::ParameterShift,
        },
        seed: args.seed,
        test_fraction: args.test_fraction,
        max_qubits: args.max_qubits,
        ..Default::default()
    };
    let trained = train(&data, &cfg)?;
    if let Some(h) = &args.history {
        write_history(h, &trained.history)?;
    }
    let body = match args.format {
        Format::Json => pretty(&trained),
        Format::Text | Format::Dot => trained.history.to_csv(),
    };
    emit(args.out.as_deref(), &body)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.stage {
        Stage::Parse(a) => run_common(Target::Parse, a),
        Stage::Tree(a) => run_common(Target::Tree, a),
        Stage::Diagram(a) => run_common(Target::Diagram, a),
        Stage::Circuit(a) => run_common(Target::Circuit, a),
        Stage::Train(a) => run_train(a),
    }
}

/// Parses arguments, runs, reports errors on stderr and returns the exit
/// status.
pub fn main_with(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            e.exit_code()
        }
    }
}
