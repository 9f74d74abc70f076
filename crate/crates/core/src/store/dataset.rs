use std::collections::{BTreeMap, BTreeSet};
use std::ops::Deref;
use std::sync::Arc;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{PairFilter, RecordBatch, StoreError};
use crate::ingestion::GeocodeResult;
use crate::model::{Claim, ClaimTweetPair, StanceLabel, Tweet};
use crate::pipeline::{ContextDocument, SubjectKind};

/// All record collections plus the secondary indexes used by pair queries.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    claims: BTreeMap<String, Claim>,
    tweets: BTreeMap<String, Tweet>,
    pairs: BTreeMap<String, ClaimTweetPair>,
    documents: BTreeMap<String, ContextDocument>,
    geocodes: BTreeMap<String, GeocodeResult>,
    idx: Indexes,
}

#[derive(Debug, Clone, Default)]
struct Indexes {
    by_topic: BTreeMap<String, BTreeSet<String>>,
    by_claim: BTreeMap<String, BTreeSet<String>>,
    by_tweet: BTreeMap<String, BTreeSet<String>>,
    by_state: BTreeMap<&'static str, BTreeSet<String>>,
    by_stance: BTreeMap<StanceLabel, BTreeSet<String>>,
    by_date: BTreeMap<NaiveDate, BTreeSet<String>>,
    docs_by_subject: BTreeMap<(SubjectKind, String), BTreeSet<String>>,
}

/// Index keys of one pair, derived from the pair and its claim and tweet.
struct PairKeys {
    topics: Vec<String>,
    claim: String,
    tweet: String,
    state: Option<&'static str>,
    stance: Option<StanceLabel>,
    date: Option<NaiveDate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub claims: usize,
    pub tweets: usize,
    pub pairs: usize,
    pub documents: usize,
    pub geocodes: usize,
}

impl Dataset {
    fn pair_keys(&self, pair: &ClaimTweetPair) -> PairKeys {
        let claim = self.claims.get(&pair.claim_id);
        let tweet = self.tweets.get(&pair.tweet_id);
        PairKeys {
            topics: claim.map(|c| c.topics.iter().cloned().collect()).unwrap_or_default(),
            claim: pair.claim_id.clone(),
            tweet: pair.tweet_id.clone(),
            state: tweet
                .and_then(|t| t.geo.as_ref())
                .and_then(|g| g.us_state())
                .map(|s| s.code),
            stance: pair.stance,
            date: tweet.map(|t| t.created_at.date_naive()),
        }
    }

    fn index_pair(&mut self, pair_id: &str, keys: &PairKeys) {
        let idx = &mut self.idx;
        let id = pair_id.to_string();
        for topic in &keys.topics {
            idx.by_topic.entry(topic.clone()).or_default().insert(id.clone());
        }
        idx.by_claim.entry(keys.claim.clone()).or_default().insert(id.clone());
        idx.by_tweet.entry(keys.tweet.clone()).or_default().insert(id.clone());
        if let Some(state) = keys.state {
            idx.by_state.entry(state).or_default().insert(id.clone());
        }
        if let Some(stance) = keys.stance {
            idx.by_stance.entry(stance).or_default().insert(id.clone());
        }
        if let Some(date) = keys.date {
            idx.by_date.entry(date).or_default().insert(id);
        }
    }

    fn unindex_pair(&mut self, pair_id: &str, keys: &PairKeys) {
        fn remove<K: Ord>(map: &mut BTreeMap<K, BTreeSet<String>>, key: K, id: &str) {
            if let Some(set) = map.get_mut(&key) {
                set.remove(id);
                if set.is_empty() {
                    map.remove(&key);
                }
            }
        }
        let idx = &mut self.idx;
        for topic in &keys.topics {
            remove(&mut idx.by_topic, topic.clone(), pair_id);
        }
        remove(&mut idx.by_claim, keys.claim.clone(), pair_id);
        remove(&mut idx.by_tweet, keys.tweet.clone(), pair_id);
        if let Some(state) = keys.state {
            remove(&mut idx.by_state, state, pair_id);
        }
        if let Some(stance) = keys.stance {
            remove(&mut idx.by_stance, stance, pair_id);
        }
        if let Some(date) = keys.date {
            remove(&mut idx.by_date, date, pair_id);
        }
    }

    /// Re-indexes every pair in `pair_ids` around a mutation of a claim or tweet.
    fn reindex_around(&mut self, pair_ids: &[String], mutate: impl FnOnce(&mut Self)) {
        let old: Vec<(String, PairKeys)> = pair_ids
            .iter()
            .filter_map(|id| self.pairs.get(id).map(|p| (id.clone(), self.pair_keys(p))))
            .collect();
        for (id, keys) in &old {
            self.unindex_pair(id, keys);
        }
        mutate(self);
        for (id, _) in &old {
            let keys = self.pair_keys(&self.pairs[id]);
            self.index_pair(id, &keys);
        }
    }

    /// Checks record invariants and referential integrity of a batch against
    /// the current contents.
    pub(crate) fn validate(&self, batch: &RecordBatch) -> Result<(), StoreError> {
        match batch {
            RecordBatch::Claims(claims) => {
                for c in claims {
                    c.validate()?;
                }
            }
            RecordBatch::Tweets(tweets) => {
                for t in tweets {
                    t.validate()?;
                }
            }
            RecordBatch::Pairs(pairs) => {
                for p in pairs {
                    p.validate()?;
                    if !self.claims.contains_key(&p.claim_id) {
                        return Err(StoreError::Integrity {
                            kind: "pair",
                            id: p.pair_id.clone(),
                            missing_kind: "claim",
                            missing_id: p.claim_id.clone(),
                        });
                    }
                    if !self.tweets.contains_key(&p.tweet_id) {
                        return Err(StoreError::Integrity {
                            kind: "pair",
                            id: p.pair_id.clone(),
                            missing_kind: "tweet",
                            missing_id: p.tweet_id.clone(),
                        });
                    }
                }
            }
            RecordBatch::Documents(docs) => {
                for d in docs {
                    d.validate()?;
                    let exists = match d.subject_kind {
                        SubjectKind::Claim => self.claims.contains_key(&d.subject_id),
                        SubjectKind::Tweet => self.tweets.contains_key(&d.subject_id),
                    };
                    if !exists {
                        return Err(StoreError::Integrity {
                            kind: "document",
                            id: d.doc_id.clone(),
                            missing_kind: d.subject_kind.as_str(),
                            missing_id: d.subject_id.clone(),
                        });
                    }
                }
            }
            RecordBatch::Geocodes(_) => {}
        }
        Ok(())
    }

    /// The records of `batch` that would change the dataset, last occurrence
    /// winning for duplicate ids.
    pub(crate) fn changed_subset(&self, batch: RecordBatch) -> RecordBatch {
        fn diff<T: PartialEq>(
            records: Vec<T>,
            id: impl Fn(&T) -> &str,
            existing: &BTreeMap<String, T>,
        ) -> Vec<T> {
            let mut last: BTreeMap<String, T> = BTreeMap::new();
            let mut order = Vec::new();
            for r in records {
                let key = id(&r).to_string();
                if last.insert(key.clone(), r).is_none() {
                    order.push(key);
                }
            }
            order
                .into_iter()
                .filter_map(|k| {
                    let r = last.remove(&k)?;
                    (existing.get(&k) != Some(&r)).then_some(r)
                })
                .collect()
        }
        match batch {
            RecordBatch::Claims(r) => RecordBatch::Claims(diff(r, |c| &c.claim_id, &self.claims)),
            RecordBatch::Tweets(r) => RecordBatch::Tweets(diff(r, |t| &t.tweet_id, &self.tweets)),
            RecordBatch::Pairs(r) => RecordBatch::Pairs(diff(r, |p| &p.pair_id, &self.pairs)),
            RecordBatch::Documents(r) => RecordBatch::Documents(diff(r, |d| &d.doc_id, &self.documents)),
            RecordBatch::Geocodes(r) => RecordBatch::Geocodes(diff(r, |g| &g.query_text, &self.geocodes)),
        }
    }

    /// Applies an already validated batch. Never fails.
    pub(crate) fn apply(&mut self, batch: RecordBatch) {
        match batch {
            RecordBatch::Claims(claims) => {
                for claim in claims {
                    let affected: Vec<String> = self
                        .idx
                        .by_claim
                        .get(&claim.claim_id)
                        .map(|s| s.iter().cloned().collect())
                        .unwrap_or_default();
                    self.reindex_around(&affected, |ds| {
                        ds.claims.insert(claim.claim_id.clone(), claim);
                    });
                }
            }
            RecordBatch::Tweets(tweets) => {
                for tweet in tweets {
                    let affected: Vec<String> = self
                        .idx
                        .by_tweet
                        .get(&tweet.tweet_id)
                        .map(|s| s.iter().cloned().collect())
                        .unwrap_or_default();
                    self.reindex_around(&affected, |ds| {
                        ds.tweets.insert(tweet.tweet_id.clone(), tweet);
                    });
                }
            }
            RecordBatch::Pairs(pairs) => {
                for pair in pairs {
                    if let Some(old) = self.pairs.get(&pair.pair_id) {
                        let keys = self.pair_keys(old);
                        self.unindex_pair(&pair.pair_id, &keys);
                    }
                    let keys = self.pair_keys(&pair);
                    self.index_pair(&pair.pair_id, &keys);
                    self.pairs.insert(pair.pair_id.clone(), pair);
                }
            }
            RecordBatch::Documents(docs) => {
                for doc in docs {
                    if let Some(old) = self.documents.get(&doc.doc_id) {
                        let key = (old.subject_kind, old.subject_id.clone());
                        if let Some(set) = self.idx.docs_by_subject.get_mut(&key) {
                            set.remove(&doc.doc_id);
                        }
                    }
                    self.idx
                        .docs_by_subject
                        .entry((doc.subject_kind, doc.subject_id.clone()))
                        .or_default()
                        .insert(doc.doc_id.clone());
                    self.documents.insert(doc.doc_id.clone(), doc);
                }
            }
            RecordBatch::Geocodes(results) => {
                for r in results {
                    self.geocodes.insert(r.query_text.clone(), r);
                }
            }
        }
    }

    pub fn counts(&self) -> Counts {
        Counts {
            claims: self.claims.len(),
            tweets: self.tweets.len(),
            pairs: self.pairs.len(),
            documents: self.documents.len(),
            geocodes: self.geocodes.len(),
        }
    }

    pub fn claims(&self) -> impl Iterator<Item = &Claim> {
        self.claims.values()
    }

    pub fn claim(&self, id: &str) -> Option<&Claim> {
        self.claims.get(id)
    }

    pub fn tweets(&self) -> impl Iterator<Item = &Tweet> {
        self.tweets.values()
    }

    pub fn tweet(&self, id: &str) -> Option<&Tweet> {
        self.tweets.get(id)
    }

    /// All pairs in `pair_id` order.
    pub fn pairs(&self) -> impl Iterator<Item = &ClaimTweetPair> {
        self.pairs.values()
    }

    pub fn pair(&self, id: &str) -> Option<&ClaimTweetPair> {
        self.pairs.get(id)
    }

    pub fn pairs_for_claim(&self, claim_id: &str) -> impl Iterator<Item = &ClaimTweetPair> {
        self.idx
            .by_claim
            .get(claim_id)
            .into_iter()
            .flatten()
            .filter_map(|id| self.pairs.get(id))
    }

    pub fn documents(&self) -> impl Iterator<Item = &ContextDocument> {
        self.documents.values()
    }

    /// Documents registered for one subject, in `doc_id` order.
    pub fn documents_for(&self, kind: SubjectKind, subject_id: &str) -> Vec<&ContextDocument> {
        self.idx
            .docs_by_subject
            .get(&(kind, subject_id.to_string()))
            .into_iter()
            .flatten()
            .filter_map(|id| self.documents.get(id))
            .collect()
    }

    pub fn geocode(&self, key: &str) -> Option<&GeocodeResult> {
        self.geocodes.get(key)
    }

    pub fn geocodes(&self) -> impl Iterator<Item = &GeocodeResult> {
        self.geocodes.values()
    }

    /// Pairs matching every provided filter, via the secondary indexes, in
    /// `pair_id` order.
    pub fn query_pairs(&self, filter: &PairFilter) -> Result<Vec<&ClaimTweetPair>, StoreError> {
        filter.validate()?;
        fn union<'a>(sets: impl Iterator<Item = Option<&'a BTreeSet<String>>>) -> BTreeSet<&'a String> {
            sets.flatten().flatten().collect()
        }
        let mut sets: Vec<BTreeSet<&String>> = Vec::new();
        if let Some(topics) = filter.normalized_topics() {
            sets.push(union(topics.iter().map(|t| self.idx.by_topic.get(t))));
        }
        if let Some(ids) = &filter.claim_ids {
            sets.push(union(ids.iter().map(|c| self.idx.by_claim.get(c))));
        }
        if let Some(code) = filter.state_code() {
            sets.push(union(std::iter::once(self.idx.by_state.get(code))));
        }
        if let Some((low, high)) = filter.stance_range {
            sets.push(union(self.idx.by_stance.range(low..=high).map(|(_, s)| Some(s))));
        }
        if filter.date_from.is_some() || filter.date_to.is_some() {
            let from = filter.date_from.unwrap_or(NaiveDate::MIN);
            let to = filter.date_to.unwrap_or(NaiveDate::MAX);
            sets.push(union(self.idx.by_date.range(from..=to).map(|(_, s)| Some(s))));
        }
        sets.sort_by_key(|s| s.len());
        let mut sets = sets.into_iter();
        let candidates = sets.next().map(|first| {
            sets.fold(first, |acc, s| acc.into_iter().filter(|id| s.contains(id)).collect())
        });
        Ok(match candidates {
            None => self.pairs.values().collect(),
            Some(ids) => ids.into_iter().filter_map(|id| self.pairs.get(id)).collect(),
        })
    }

    /// Full-scan evaluation of the same predicate as [`Dataset::query_pairs`].
    pub fn query_pairs_scan(&self, filter: &PairFilter) -> Result<Vec<&ClaimTweetPair>, StoreError> {
        filter.validate()?;
        Ok(self.pairs.values().filter(|p| self.pair_matches(filter, p)).collect())
    }

    pub fn pair_matches(&self, filter: &PairFilter, pair: &ClaimTweetPair) -> bool {
        let claim = self.claims.get(&pair.claim_id);
        let tweet = self.tweets.get(&pair.tweet_id);
        if let Some(topics) = filter.normalized_topics() {
            if !claim.is_some_and(|c| c.topics.iter().any(|t| topics.contains(t))) {
                return false;
            }
        }
        if let Some(ids) = &filter.claim_ids {
            if !ids.contains(&pair.claim_id) {
                return false;
            }
        }
        if let Some(code) = filter.state_code() {
            let state = tweet.and_then(|t| t.geo.as_ref()).and_then(|g| g.us_state());
            if state.map(|s| s.code) != Some(code) {
                return false;
            }
        }
        if let Some((low, high)) = filter.stance_range {
            if !pair.stance.is_some_and(|s| low <= s && s <= high) {
                return false;
            }
        }
        if filter.date_from.is_some() || filter.date_to.is_some() {
            let Some(date) = tweet.map(|t| t.created_at.date_naive()) else {
                return false;
            };
            if filter.date_from.is_some_and(|f| date < f) || filter.date_to.is_some_and(|t| date > t) {
                return false;
            }
        }
        true
    }

    /// SHA-256 over the canonical JSONL rendering of every collection.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        self.for_each_canonical_line(|collection, line| {
            hasher.update(collection.as_bytes());
            hasher.update(b"\t");
            hasher.update(line.as_bytes());
            hasher.update(b"\n");
        });
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub(crate) fn for_each_canonical_line(&self, mut f: impl FnMut(&'static str, &str)) {
        fn emit<T: Serialize>(
            name: &'static str,
            records: impl Iterator<Item = T>,
            f: &mut impl FnMut(&'static str, &str),
        ) {
            for r in records {
                let line = serde_json::to_string(&r).expect("records serialize");
                f(name, &line);
            }
        }
        emit("claims", self.claims.values(), &mut f);
        emit("tweets", self.tweets.values(), &mut f);
        emit("pairs", self.pairs.values(), &mut f);
        emit("documents", self.documents.values(), &mut f);
        emit("geocache", self.geocodes.values(), &mut f);
    }
}

/// Immutable, consistent read view over a store.
#[derive(Debug, Clone, Default)]
pub struct Snapshot(Arc<Dataset>);

impl Snapshot {
    pub(crate) fn new(data: Arc<Dataset>) -> Self {
        Snapshot(data)
    }
}

impl Deref for Snapshot {
    type Target = Dataset;

    fn deref(&self) -> &Dataset {
        &self.0
    }
}
