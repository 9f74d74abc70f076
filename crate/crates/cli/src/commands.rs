use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;
use serde_json::{json, Value};
use stancemap::analytics::export::{alignment_json, confusion_json, write_alignment_csv, write_confusion_csv};
use stancemap::analytics::fixtures::{parse_alignment_rows, parse_confusion};
use stancemap::analytics::{
    confusion, group_reports, observations, stance_verdict_metrics, AlignmentReport, ConfusionCounts3x3, Dimension,
    Observation,
};
use stancemap::clock::{Clock, FixedClock, SystemClock};
use stancemap::ingestion::{
    geocode_stored_tweets, ingest_claims, ingest_documents, ingest_tweets, read_jsonl, IngestContext, IngestError,
    Rejection,
};
use stancemap::model::ClaimTweetPair;
use stancemap::pipeline::{run_batch, BatchOptions};
use stancemap::store::{export_jsonl, import_jsonl, FileStore, Manifest, RecordBatch, Store, StoreError};
use stancemap::VerdictClass;
use stancemap_server::AppState;

use crate::config::CliConfig;
use crate::{Cli, CliError, Command, Format, Outcome, ReportKind};

/// Classified pairs are written to the store in batches of this size.
const COMMIT_BATCH: usize = 256;

pub fn execute(cli: &Cli, config: &CliConfig, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let clock: Box<dyn Clock> = match cli.now {
        Some(t) => Box::new(FixedClock(t)),
        None => Box::new(SystemClock),
    };
    match &cli.command {
        Command::IngestClaims { input } => {
            let records = read_records(input)?;
            let store = open_store(config)?;
            let report = ingest_claims(&store, records).map_err(ingest_error)?;
            let mut text = format!(
                "claims: received {}, stored {}, rejected {}\n",
                report.received,
                report.stored,
                report.rejected.len()
            );
            itemize(&mut text, "rejected", &report.rejected);
            Ok(outcome(!report.rejected.is_empty(), &report, text))
        }
        Command::IngestTweets {
            input,
            claim_id,
            resolver,
        } => {
            let records = read_records(input)?;
            let resolver = config.resolver(*resolver)?;
            let store = open_store(config)?;
            if store.snapshot().claim(claim_id).is_none() {
                return Err(CliError::Validation(format!("unknown claim {claim_id:?}; ingest claims first")));
            }
            let limiter = config.limiter();
            let ctx = IngestContext {
                resolver: resolver.as_ref(),
                clock: clock.as_ref(),
                limiter: Some(&limiter),
            };
            let report = ingest_tweets(&store, records, claim_id, &ctx).map_err(ingest_error)?;
            let mut text = format!(
                "tweets for {claim_id}: received {}, retained {}, filtered {}, rejected {}, pairs created {}, geocoded {}, geocode failures {}\n",
                report.received,
                report.retained,
                report.filtered.len(),
                report.rejected.len(),
                report.pairs_created,
                report.geocoded,
                report.geocode_failures.len()
            );
            itemize(&mut text, "rejected", &report.rejected);
            itemize(&mut text, "geocode failed", &report.geocode_failures);
            let partial = !report.rejected.is_empty() || !report.geocode_failures.is_empty();
            Ok(outcome(partial, &report, text))
        }
        Command::IngestDocuments { input } => {
            let records = read_records(input)?;
            let store = open_store(config)?;
            let report = ingest_documents(&store, records).map_err(ingest_error)?;
            let mut text = format!(
                "documents: received {}, stored {}, rejected {}\n",
                report.received,
                report.stored,
                report.rejected.len()
            );
            itemize(&mut text, "rejected", &report.rejected);
            Ok(outcome(!report.rejected.is_empty(), &report, text))
        }
        Command::Geocode { resolver, text } => {
            let resolver = config.resolver(*resolver)?;
            if let Some(query) = text {
                config.limiter().acquire();
                let found = resolver.resolve(query).map_err(|e| CliError::Failed(e.to_string()))?;
                let line = match &found {
                    None => format!("{query}: no match\n"),
                    Some(g) => {
                        let place: Vec<&str> = [&g.city, &g.state, &g.country].into_iter().flatten().map(String::as_str).collect();
                        format!("{query}: {} ({:.4}, {:.4})\n", place.join(", "), g.latitude, g.longitude)
                    }
                };
                return Ok(Outcome {
                    partial: false,
                    json: json!({ "query": query, "resolved": found, "resolver": resolver.tag() }),
                    text: line,
                });
            }
            let store = open_store(config)?;
            let limiter = config.limiter();
            let ctx = IngestContext {
                resolver: resolver.as_ref(),
                clock: clock.as_ref(),
                limiter: Some(&limiter),
            };
            let report = geocode_stored_tweets(&store, &ctx).map_err(ingest_error)?;
            let mut text = format!(
                "geocode: attempted {}, resolved {}, unresolved {}, failed {}\n",
                report.attempted,
                report.resolved,
                report.unresolved,
                report.failures.len()
            );
            itemize(&mut text, "failed", &report.failures);
            Ok(outcome(!report.failures.is_empty(), &report, text))
        }
        Command::Classify { reclassify } => classify(config, *reclassify, clock.as_ref()),
        Command::Evaluate { fixture } => match fixture {
            Some(path) => evaluate_fixture(path),
            None => evaluate_store(&open_store(config)?),
        },
        Command::ExportReport {
            format,
            output,
            report,
            dimension,
            top,
        } => {
            let dimension: Dimension = dimension.parse().map_err(|e: stancemap::analytics::AnalyticsError| CliError::Validation(e.to_string()))?;
            let store = open_store(config)?;
            let snap = store.snapshot();
            let obs = observations(&snap, snap.pairs());
            let file = File::create(output)
                .map_err(|e| CliError::Failed(format!("cannot create {}: {e}", output.display())))?;
            let mut w = BufWriter::new(file);
            let rows = match report {
                ReportKind::Alignment => {
                    let reports = group_reports(&obs, dimension, *top);
                    match format {
                        Format::Csv => write_alignment_csv(&reports, &mut w).map_err(|e| CliError::Failed(e.to_string()))?,
                        Format::Json => write_json(&mut w, &alignment_json(&reports))?,
                    }
                    reports.len()
                }
                ReportKind::Confusion => {
                    let (m, _) = classified_confusion(&obs);
                    let metrics = stance_verdict_metrics(&m);
                    match format {
                        Format::Csv => write_confusion_csv(&m, &metrics, &mut w).map_err(|e| CliError::Failed(e.to_string()))?,
                        Format::Json => write_json(&mut w, &confusion_json(&m, &metrics))?,
                    }
                    4
                }
            };
            w.flush().map_err(|e| CliError::Failed(e.to_string()))?;
            Ok(Outcome {
                partial: false,
                json: json!({ "output": output, "rows": rows }),
                text: format!("wrote {rows} rows to {}\n", output.display()),
            })
        }
        Command::Serve { listen } => serve(config, listen.as_deref(), cli.json, out),
        Command::Export { dir } => {
            let store = open_store(config)?;
            let manifest = export_jsonl(&store.snapshot(), dir).map_err(store_error)?;
            Ok(manifest_outcome(&manifest, format!("exported to {}", dir.display())))
        }
        Command::Import { dir } => {
            if !dir.is_dir() {
                return Err(CliError::Validation(format!("{} is not a directory", dir.display())));
            }
            let store = open_store(config)?;
            let changed = import_jsonl(&store, dir).map_err(store_error)?;
            let manifest = Manifest::of(&store.snapshot());
            Ok(manifest_outcome(&manifest, format!("imported {changed} new or changed records")))
        }
    }
}

fn outcome<T: Serialize>(partial: bool, report: &T, text: String) -> Outcome {
    Outcome {
        partial,
        json: serde_json::to_value(report).unwrap_or(Value::Null),
        text,
    }
}

fn manifest_outcome(m: &Manifest, what: String) -> Outcome {
    let c = m.counts;
    Outcome {
        partial: false,
        json: json!(m),
        text: format!(
            "{what}: {} claims, {} tweets, {} pairs, {} documents, {} geocodes, checksum {}\n",
            c.claims, c.tweets, c.pairs, c.documents, c.geocodes, m.checksum
        ),
    }
}

fn read_records(path: &Path) -> Result<Vec<Result<Value, String>>, CliError> {
    let file = File::open(path).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    read_jsonl(BufReader::new(file)).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))
}

fn open_store(config: &CliConfig) -> Result<FileStore, CliError> {
    let path = config.store_path()?;
    FileStore::open(path).map_err(|e| CliError::Failed(format!("cannot open store {}: {e}", path.display())))
}

fn store_error(e: StoreError) -> CliError {
    match e {
        StoreError::InvalidRecord(_) | StoreError::Integrity { .. } | StoreError::InvalidFilter(_) => {
            CliError::Validation(e.to_string())
        }
        other => CliError::Failed(other.to_string()),
    }
}

fn ingest_error(e: IngestError) -> CliError {
    match e {
        IngestError::Store(s) => store_error(s),
        IngestError::Io(io) => CliError::Failed(io.to_string()),
        other => CliError::Validation(other.to_string()),
    }
}

fn itemize(text: &mut String, label: &str, items: &[Rejection]) {
    for r in items {
        let id = r.id.as_deref().unwrap_or("-");
        let retry = if r.retryable { " (retryable)" } else { "" };
        let _ = writeln!(text, "  {label} record {} [{id}]: {}{retry}", r.index, r.reasons.join("; "));
    }
}

fn write_json(w: &mut dyn Write, value: &Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| CliError::Failed(e.to_string()))?;
    writeln!(w).map_err(|e| CliError::Failed(e.to_string()))
}

fn classify(config: &CliConfig, reclassify: bool, clock: &dyn Clock) -> Result<Outcome, CliError> {
    let providers = config.providers()?;
    let store = open_store(config)?;
    let snap = store.snapshot();
    let pairs: Vec<ClaimTweetPair> = snap.pairs().cloned().collect();
    let options = BatchOptions {
        concurrency: config.concurrency,
        reclassify,
    };
    let mut buffer: Vec<ClaimTweetPair> = Vec::new();
    let mut write_error: Option<String> = None;
    let flush = |buffer: &mut Vec<ClaimTweetPair>| -> Result<(), String> {
        if buffer.is_empty() {
            return Ok(());
        }
        store
            .put_records(RecordBatch::Pairs(std::mem::take(buffer)))
            .map(|_| ())
            .map_err(|e| e.to_string())
    };
    let report = {
        let mut commit = |pair: ClaimTweetPair| -> Result<(), String> {
            if let Some(e) = &write_error {
                return Err(e.clone());
            }
            buffer.push(pair);
            if buffer.len() >= COMMIT_BATCH {
                if let Err(e) = flush(&mut buffer) {
                    write_error = Some(e.clone());
                    return Err(e);
                }
            }
            Ok(())
        };
        run_batch(&snap, &pairs, options, &config.pipeline, &providers, clock, &mut commit)
    };
    drop(snap);
    let pending = buffer.len();
    if let Err(e) = flush(&mut buffer) {
        write_error.get_or_insert(e);
    }
    if let Some(e) = write_error {
        return Err(CliError::Failed(format!(
            "store write failed: {e}; up to {} classified pairs were not saved",
            pending.max(COMMIT_BATCH)
        )));
    }
    let tag = providers.tag();
    let mut text = format!(
        "classified {}, failed {}, skipped {} (providers {tag})\n",
        report.classified, report.failed, report.skipped
    );
    for f in &report.failures {
        let retry = if f.retryable { " (retryable)" } else { "" };
        let _ = writeln!(text, "  failed {}: {}{retry}", f.pair_id, f.error);
    }
    let mut json = serde_json::to_value(&report).unwrap_or(Value::Null);
    json["providers"] = json!(tag);
    Ok(Outcome {
        partial: report.failed > 0,
        json,
        text,
    })
}

/// Confusion counts over the classified observations, and how many were
/// skipped for lack of a label.
fn classified_confusion(obs: &[Observation]) -> (ConfusionCounts3x3, usize) {
    let labelled: Vec<Observation> = obs.iter().filter(|o| o.stance.is_some()).cloned().collect();
    let m = confusion(&labelled).unwrap_or_default();
    (m, obs.len() - labelled.len())
}

fn pct(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
}

fn confusion_text(m: &ConfusionCounts3x3) -> String {
    let metrics = stance_verdict_metrics(m);
    let mut t = format!(
        "{:<10} {:>9} {:>9} {:>9} {:>10} {:>6}\n",
        "stance", "truth", "mixed", "misinfo", "precision", "f1"
    );
    for s in ConfusionCounts3x3::rows() {
        let counts = VerdictClass::ALL.map(|c| m.get(s, c));
        let _ = writeln!(
            t,
            "{:<10} {:>9} {:>9} {:>9} {:>10} {:>6}",
            s.as_str(),
            counts[0],
            counts[1],
            counts[2],
            pct(metrics.precision(s)),
            pct(metrics.f1(s))
        );
    }
    let r = VerdictClass::ALL.map(|c| pct(metrics.recall(c)));
    let _ = writeln!(t, "{:<10} {:>9} {:>9} {:>9}", "recall", r[0], r[1], r[2]);
    t
}

fn alignment_text(title: &str, reports: &[AlignmentReport]) -> String {
    let mut t = format!(
        "{title}\n{:<22} {:>14} {:>14} {:>14} {:>14} {:>8} {:>8}\n",
        "group", "truth+", "truth-", "misinfo+", "misinfo-", "accuracy", "macro_f1"
    );
    for r in reports {
        let cell = |p: Option<f64>, n: u64| format!("{} ({n})", pct(p));
        let _ = writeln!(
            t,
            "{:<22} {:>14} {:>14} {:>14} {:>14} {:>8} {:>8}",
            r.group,
            cell(r.truth_pos_pct, r.truth_pos),
            cell(r.truth_neg_pct, r.truth_neg),
            cell(r.misinfo_pos_pct, r.misinfo_pos),
            cell(r.misinfo_neg_pct, r.misinfo_neg),
            pct(r.balanced_accuracy),
            pct(r.macro_f1)
        );
    }
    t
}

/// A fixture holds either confusion cells (`stance` keys) or alignment rows
/// (`truth_pos` keys); the first record decides.
fn evaluate_fixture(path: &Path) -> Result<Outcome, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let first: Value = text
        .lines()
        .find(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .transpose()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .ok_or_else(|| CliError::Validation(format!("{} is empty", path.display())))?;
    let invalid = |e: stancemap::analytics::fixtures::FixtureError| CliError::Validation(format!("{}: {e}", path.display()));
    if first.get("stance").is_some() {
        let m = parse_confusion(&text).map_err(invalid)?;
        return Ok(Outcome {
            partial: false,
            json: json!({ "confusion": confusion_json(&m, &stance_verdict_metrics(&m)) }),
            text: confusion_text(&m),
        });
    }
    if first.get("truth_pos").is_some() {
        let rows = parse_alignment_rows(&text).map_err(invalid)?;
        let mut tables: BTreeMap<&str, Vec<AlignmentReport>> = BTreeMap::new();
        let mut order = Vec::new();
        for row in &rows {
            if !tables.contains_key(row.table.as_str()) {
                order.push(row.table.as_str());
            }
            tables
                .entry(&row.table)
                .or_default()
                .push(AlignmentReport::from_counts(row.group.clone(), row.counts));
        }
        let mut out = String::new();
        let mut json = serde_json::Map::new();
        for table in order {
            out.push_str(&alignment_text(table, &tables[table]));
            out.push('\n');
            json.insert(table.to_string(), alignment_json(&tables[table]));
        }
        return Ok(Outcome {
            partial: false,
            json: json!({ "alignment": json }),
            text: out,
        });
    }
    Err(CliError::Validation(format!(
        "{}: expected confusion cells or alignment rows",
        path.display()
    )))
}

fn evaluate_store(store: &FileStore) -> Result<Outcome, CliError> {
    let snap = store.snapshot();
    let obs = observations(&snap, snap.pairs());
    let (m, unclassified) = classified_confusion(&obs);
    let mut text = format!("{} pairs, {unclassified} unclassified\n\n", obs.len());
    text.push_str(&confusion_text(&m));
    let mut alignment = serde_json::Map::new();
    for (name, dimension, top) in [
        ("topic", Dimension::Topic, None),
        ("state", Dimension::State, Some(8)),
        ("country_vs_all", Dimension::CountryVsAll, None),
        ("leaning", Dimension::Leaning, None),
    ] {
        let reports = group_reports(&obs, dimension, top);
        text.push('\n');
        text.push_str(&alignment_text(name, &reports));
        alignment.insert(name.to_string(), alignment_json(&reports));
    }
    Ok(Outcome {
        partial: false,
        json: json!({
            "pairs": obs.len(),
            "unclassified": unclassified,
            "confusion": confusion_json(&m, &stance_verdict_metrics(&m)),
            "alignment": alignment,
        }),
        text,
    })
}

fn serve(config: &CliConfig, listen: Option<&str>, json_mode: bool, out: &mut dyn Write) -> Result<Outcome, CliError> {
    let addr = config.listen_addr(listen)?;
    let store = Arc::new(open_store(config)?);
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Failed(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Failed(format!("cannot listen on {addr}: {e}")))?;
        let local = listener.local_addr().map_err(|e| CliError::Failed(e.to_string()))?;
        let _ = if json_mode {
            writeln!(out, "{}", json!({ "listening": local.to_string() }))
        } else {
            writeln!(out, "listening on http://{local}")
        };
        let _ = out.flush();
        stancemap_server::serve(listener, AppState::watching(store))
            .await
            .map_err(|e| CliError::Failed(e.to_string()))
    })?;
    Ok(Outcome {
        partial: false,
        json: json!({ "stopped": true }),
        text: "server stopped\n".into(),
    })
}
