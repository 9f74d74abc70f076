// mdbook cannot run snippets that depend on workspace crates, so each
// chapter is pulled in as the docs of an empty module and `cargo test`
// runs its code blocks as doc-tests. One module per chapter keeps failures
// traceable to a file.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/verdicts-and-stances.md")]
pub mod verdicts_and_stances {}
#[doc = include_str!("../../../book/src/ingestion.md")]
pub mod ingestion {}
#[doc = include_str!("../../../book/src/stance-pipeline.md")]
pub mod stance_pipeline {}
#[doc = include_str!("../../../book/src/alignment-metrics.md")]
pub mod alignment_metrics {}
#[doc = include_str!("../../../book/src/clustering.md")]
pub mod clustering {}
#[doc = include_str!("../../../book/src/store-and-api.md")]
pub mod store_and_api {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
