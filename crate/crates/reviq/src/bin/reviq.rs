//! Thin command-line front end over the library: run queries, score
//! tables, drive the benchmark, and compute agreement statistics.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use reviq::agreement::{
    cohen_kappa, exact_match_rate, fleiss_kappa, krippendorff_alpha_ordinal, matrix_from_long_csv,
    Stat,
};
use reviq::bench::{
    emit_per_query_text, emit_report_csv, emit_report_text, run_replay, run_setting1, run_system,
    Corpus, ProviderSet, Setting, SystemConfig, SystemLabel,
};
use reviq::query::{evaluate, parse_query};
use reviq::rag::{HashEmbedder, HttpEmbedder, HttpLlm, PromptSet, ScriptedLlm};
use reviq::rms::{rms_scores, Thresholds};
use reviq::tableio::{import_comparison_csv, parse_result_table, CsvProfile};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "reviq", about = "Typed review-table comparisons: query, score, benchmark, agree")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a query file over a directory of comparison CSVs.
    Query {
        /// Directory of comparison CSV files (one table per file).
        store_dir: PathBuf,
        /// UTF-8 query text file.
        query_file: PathBuf,
        /// Output format.
        #[arg(long, default_value = "csv", value_parser = ["csv", "md"])]
        format: String,
    },
    /// Score a predicted table against a gold table with RMS.
    Score {
        pred_file: PathBuf,
        gold_file: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        /// Print percentages instead of fractions.
        #[arg(long)]
        percent: bool,
    },
    /// Run one benchmark system over a fixture manifest.
    Bench {
        manifest: PathBuf,
        /// sparql | full_context | rag | symbolic_context | replay
        #[arg(long)]
        system: String,
        /// Provider configuration (TOML); required for neural settings.
        #[arg(long)]
        providers: Option<PathBuf>,
        /// Replay directory of stored raw outputs (system = replay).
        #[arg(long)]
        replay_dir: Option<PathBuf>,
        /// Output directory for the report files.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
    },
    /// Inter-annotator agreement over a long-format ratings CSV
    /// (item, rater, rating columns).
    Agree {
        ratings_csv: PathBuf,
        #[arg(long, value_parser = ["fleiss", "alpha", "cohen", "exact"])]
        stat: String,
        /// Restrict to two raters (required for cohen/exact).
        #[arg(long, value_delimiter = ',')]
        raters: Vec<String>,
        /// Keep only rows where column=value (repeatable).
        #[arg(long)]
        filter: Vec<String>,
    },
}

#[derive(Deserialize, Default)]
struct ProvidersFile {
    #[serde(default)]
    llm: Option<LlmSection>,
    #[serde(default)]
    embedder: Option<EmbedderSection>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum LlmSection {
    /// Replay canned responses from a directory of `<query-id>.txt` files.
    Scripted { dir: PathBuf },
    /// Echo each query's gold table (closed-loop smoke runs).
    EchoGold,
    Http(reviq::rag::provider::HttpProviderConfig),
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum EmbedderSection {
    Hash {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Http(reviq::rag::provider::HttpProviderConfig),
}

fn default_dim() -> usize {
    256
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Query { store_dir, query_file, format } => cmd_query(&store_dir, &query_file, &format),
        Command::Score { pred_file, gold_file, tau, theta, percent } => {
            cmd_score(&pred_file, &gold_file, tau, theta, percent)
        }
        Command::Bench { manifest, system, providers, replay_dir, out, tau, theta } => {
            cmd_bench(&manifest, &system, providers.as_deref(), replay_dir.as_deref(), &out, tau, theta)
        }
        Command::Agree { ratings_csv, stat, raters, filter } => {
            cmd_agree(&ratings_csv, &stat, &raters, &filter)
        }
    }
}

fn cmd_query(store_dir: &Path, query_file: &Path, format: &str) -> Result<()> {
    let mut comparisons = Vec::new();
    let mut entries: Vec<_> = std::fs::read_dir(store_dir)
        .with_context(|| format!("reading store dir {}", store_dir.display()))?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    entries.sort();
    for path in entries {
        let bytes = std::fs::read(&path)?;
        let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("comparison");
        comparisons.push(
            import_comparison_csv(&bytes, &CsvProfile::default(), id, id)
                .with_context(|| format!("importing {}", path.display()))?,
        );
    }
    let text = std::fs::read_to_string(query_file)?;
    let ast = parse_query(&text).map_err(|e| anyhow!("{e}"))?;
    let table = evaluate(&ast, &comparisons)?;
    match format {
        "md" => print!("{}", table.to_markdown()),
        _ => {
            let bytes = table.to_csv(&CsvProfile::default());
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    Ok(())
}

fn cmd_score(pred: &Path, gold: &Path, tau: f64, theta: f64, percent: bool) -> Result<()> {
    let thresholds = Thresholds::new(tau, theta).map_err(|e| anyhow!("{e}"))?;
    let pred_table = parse_result_table(&std::fs::read_to_string(pred)?)
        .with_context(|| format!("parsing {}", pred.display()))?;
    let gold_table = parse_result_table(&std::fs::read_to_string(gold)?)
        .with_context(|| format!("parsing {}", gold.display()))?;
    let report = rms_scores(&pred_table, &gold_table, thresholds).map_err(|e| anyhow!("{e}"))?;
    let s = report.scores;
    if percent {
        println!(
            "precision {:.1}  recall {:.1}  f1 {:.1}",
            s.precision * 100.0,
            s.recall * 100.0,
            s.f1 * 100.0
        );
    } else {
        println!("precision {:.6}  recall {:.6}  f1 {:.6}", s.precision, s.recall, s.f1);
    }
    if report.empty_prediction {
        println!("note: empty prediction");
    }
    Ok(())
}

fn cmd_bench(
    manifest: &Path,
    system: &str,
    providers: Option<&Path>,
    replay_dir: Option<&Path>,
    out: &Path,
    tau: f64,
    theta: f64,
) -> Result<()> {
    let corpus = Corpus::load(manifest).map_err(|e| anyhow!("{e}"))?;
    let thresholds = Thresholds::new(tau, theta).map_err(|e| anyhow!("{e}"))?;
    std::fs::create_dir_all(out)?;

    if system == "replay" {
        let dir = replay_dir.ok_or_else(|| anyhow!("--replay-dir is required for replay"))?;
        let report = run_replay(&corpus, dir, thresholds).map_err(|e| anyhow!("{e}"))?;
        return write_reports(out, "replay", "replay", report);
    }

    let setting = Setting::parse(system)
        .ok_or_else(|| anyhow!("unknown system {system}; expected sparql|full_context|rag|symbolic_context|replay"))?;
    let mut config = SystemConfig::new(setting);
    config.thresholds = thresholds;

    if setting == Setting::Sparql {
        // fixture self-check first: exit nonzero on any gold mismatch
        run_setting1(&corpus).map_err(|e| anyhow!("{e}"))?;
        let report = run_system(&corpus, &config, None).map_err(|e| anyhow!("{e}"))?;
        return write_reports(out, "sparql", "sparql", report);
    }

    let pf: ProvidersFile = match providers {
        Some(path) => toml::from_str(&std::fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => bail!("--providers is required for neural settings"),
    };
    let prompts_dir = corpus
        .prompts_dir
        .clone()
        .ok_or_else(|| anyhow!("manifest declares no prompts directory"))?;
    let prompts = PromptSet::load(&prompts_dir)?;

    let embedder: Box<dyn reviq::rag::Embedder> = match pf.embedder {
        None | Some(EmbedderSection::Hash { .. }) => {
            let dim = match pf.embedder {
                Some(EmbedderSection::Hash { dim }) => dim,
                _ => 256,
            };
            Box::new(HashEmbedder { dim })
        }
        Some(EmbedderSection::Http(cfg)) => Box::new(HttpEmbedder::new(cfg.with_env_overrides())),
    };
    let llm: Box<dyn reviq::rag::LlmProvider> = match pf.llm {
        Some(LlmSection::Scripted { dir }) => {
            let mut responses = BTreeMap::new();
            for case in &corpus.cases {
                let path = dir.join(format!("{}.txt", case.id));
                if let Ok(text) = std::fs::read_to_string(&path) {
                    responses.insert(case.id.clone(), text);
                }
            }
            Box::new(ScriptedLlm::new(responses))
        }
        Some(LlmSection::EchoGold) | None => {
            Box::new(reviq::bench::run::gold_echo_llm(&corpus).map_err(|e| anyhow!("{e}"))?)
        }
        Some(LlmSection::Http(cfg)) => Box::new(HttpLlm::new(cfg.with_env_overrides())),
    };
    let provider_set = ProviderSet { embedder: embedder.as_ref(), llm: llm.as_ref(), prompts: &prompts };
    let report = run_system(&corpus, &config, Some(&provider_set)).map_err(|e| anyhow!("{e}"))?;
    write_reports(out, setting.as_str(), llm.id(), report)
}

fn write_reports(out: &Path, setting: &str, model: &str, report: reviq::bench::BenchReport) -> Result<()> {
    let label = SystemLabel { setting: setting.into(), model: model.into() };
    let rows = vec![(label, report)];
    std::fs::write(out.join("report.csv"), emit_report_csv(&rows))?;
    std::fs::write(out.join("report.txt"), emit_report_text(&rows))?;
    std::fs::write(out.join("per_query.txt"), emit_per_query_text(&rows[0].1))?;
    print!("{}", emit_report_text(&rows));
    Ok(())
}

fn cmd_agree(path: &Path, stat: &str, raters: &[String], filters: &[String]) -> Result<()> {
    let text = std::fs::read_to_string(path)?;
    let filtered = apply_filters(&text, filters)?;
    let (matrix, _items, rater_names) =
        matrix_from_long_csv(&filtered, vec![1, 2, 3, 4, 5]).map_err(|e| anyhow!("{e}"))?;
    let pair = |raters: &[String]| -> Result<(Vec<i64>, Vec<i64>)> {
        if raters.len() != 2 {
            bail!("--raters needs exactly two names for this statistic");
        }
        let idx = |name: &str| {
            rater_names
                .iter()
                .position(|r| r == name)
                .ok_or_else(|| anyhow!("unknown rater {name}; file has {rater_names:?}"))
        };
        let (a, b) = (idx(&raters[0])?, idx(&raters[1])?);
        let col = |i: usize| -> Result<Vec<i64>> {
            matrix
                .rater_column(i)
                .into_iter()
                .collect::<Option<Vec<i64>>>()
                .ok_or_else(|| anyhow!("missing ratings for the selected pair"))
        };
        Ok((col(a)?, col(b)?))
    };
    match stat {
        "fleiss" => print_stat("fleiss_kappa", fleiss_kappa(&matrix).map_err(|e| anyhow!("{e}"))?),
        "alpha" => print_stat(
            "krippendorff_alpha_ordinal",
            krippendorff_alpha_ordinal(&matrix).map_err(|e| anyhow!("{e}"))?,
        ),
        "cohen" => {
            let (a, b) = pair(raters)?;
            print_stat("cohen_kappa", cohen_kappa(&a, &b).map_err(|e| anyhow!("{e}"))?);
        }
        "exact" => {
            let (a, b) = pair(raters)?;
            println!("exact_match_rate = {:.3}", exact_match_rate(&a, &b).map_err(|e| anyhow!("{e}"))?);
        }
        other => bail!("unknown statistic {other}"),
    }
    Ok(())
}

fn print_stat(name: &str, stat: Stat) {
    match stat {
        Stat::Value(v) => println!("{name} = {v:.3}"),
        Stat::Undefined(reason) => println!("{name} undefined: {reason}"),
    }
}

/// Keep only CSV rows where each `column=value` filter matches.
fn apply_filters(text: &str, filters: &[String]) -> Result<String> {
    if filters.is_empty() {
        return Ok(text.to_string());
    }
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr.headers()?.clone();
    let mut checks = Vec::new();
    for f in filters {
        let (col, value) = f
            .split_once('=')
            .ok_or_else(|| anyhow!("filter must look like column=value, got {f}"))?;
        let idx = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(col))
            .ok_or_else(|| anyhow!("unknown filter column {col}"))?;
        checks.push((idx, value.to_string()));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&headers)?;
    for rec in rdr.records() {
        let rec = rec?;
        if checks.iter().all(|(i, v)| rec.get(*i).is_some_and(|c| c == v)) {
            w.write_record(&rec)?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}
