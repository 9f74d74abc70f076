use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;

use serde::Serialize;

use super::classify::{apply_result, classify_pair, PairContext};
use super::{PipelineConfig, Providers};
use crate::clock::Clock;
use crate::model::ClaimTweetPair;
use crate::store::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    pub concurrency: usize,
    pub reclassify: bool,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            concurrency: 4,
            reclassify: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairFailure {
    pub pair_id: String,
    pub error: String,
    pub retryable: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct BatchReport {
    pub classified: usize,
    pub failed: usize,
    pub skipped: usize,
    pub failures: Vec<PairFailure>,
}

impl BatchReport {
    pub fn total(&self) -> usize {
        self.classified + self.failed + self.skipped
    }
}

/// Classifies every unclassified pair (all pairs with `reclassify`) on up to
/// `concurrency` worker threads. Results are handed to `commit` on the
/// calling thread, one at a time, as they finish. A failing pair is itemized
/// and stays unclassified; it never aborts the batch.
pub fn run_batch(
    data: &Dataset,
    pairs: &[ClaimTweetPair],
    options: BatchOptions,
    config: &PipelineConfig,
    providers: &Providers,
    clock: &dyn Clock,
    commit: &mut dyn FnMut(ClaimTweetPair) -> Result<(), String>,
) -> BatchReport {
    let mut report = BatchReport::default();
    let work: Vec<&ClaimTweetPair> = pairs
        .iter()
        .filter(|p| options.reclassify || !p.is_classified())
        .collect();
    report.skipped = pairs.len() - work.len();
    if work.is_empty() {
        return report;
    }

    let next = AtomicUsize::new(0);
    let workers = options.concurrency.max(1).min(work.len());
    let (tx, rx) = mpsc::channel::<(usize, Result<ClaimTweetPair, PairFailure>)>();
    let mut finished: Vec<Option<Result<ClaimTweetPair, PairFailure>>> = vec![None; work.len()];

    thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let (next, work) = (&next, &work);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(pair) = work.get(i) else {
                    break;
                };
                let outcome = PairContext::resolve(data, pair)
                    .and_then(|ctx| classify_pair(pair, &ctx, config, providers, options.reclassify))
                    .map(|result| apply_result(pair, &result, clock.now()))
                    .map_err(|e| PairFailure {
                        pair_id: pair.pair_id.clone(),
                        retryable: e.is_retryable(),
                        error: e.to_string(),
                    });
                if tx.send((i, outcome)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, outcome) in rx {
            let outcome = match outcome {
                Ok(pair) => {
                    let id = pair.pair_id.clone();
                    commit(pair.clone()).map(|_| pair).map_err(|error| PairFailure {
                        pair_id: id,
                        error,
                        retryable: false,
                    })
                }
                Err(f) => Err(f),
            };
            finished[i] = Some(outcome);
        }
    });

    for outcome in finished.into_iter().flatten() {
        match outcome {
            Ok(_) => report.classified += 1,
            Err(f) => {
                report.failed += 1;
                report.failures.push(f);
            }
        }
    }
    report
}
