//! The deterministic offline extractor: a per-language keyword lexicon
//! matched longest-first, left-to-right, non-overlapping over the
//! normalized review body. Snippets are cut verbatim out of the original
//! (NFC) body, so lexicon results satisfy the same grounding invariants as
//! provider results.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;
use thiserror::Error;

use crate::extraction::{ExtractedIssue, ExtractionResult, ExtractionStatus};
use crate::ingest::ReviewRecord;
use crate::normalize::{canonical, nfc, ScanText};
use crate::taxonomy::{CategoryId, LabelId, Taxonomy};

const BUNDLED_LEXICON: &str = include_str!("../../data/lexicon.toml");

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to parse lexicon document: {0}")]
    Parse(String),
    #[error("phrase `{phrase}` targets unknown label `{label}`")]
    UnknownLabel { phrase: String, label: String },
    #[error("phrase `{0}` normalizes to fewer than 3 characters")]
    PhraseTooShort(String),
    #[error("phrases `{first}` and `{second}` collide after normalization (language `{language}`)")]
    PhraseCollision {
        language: String,
        first: String,
        second: String,
    },
}

#[derive(Debug, Deserialize)]
struct LexiconDoc {
    version: String,
    #[serde(default)]
    phrases: BTreeMap<String, BTreeMap<String, String>>,
}

#[derive(Debug, Clone)]
struct Entry {
    phrase: Vec<char>,
    label: LabelId,
    category: CategoryId,
}

/// Keyword phrase table, validated against a taxonomy at load time.
#[derive(Debug, Clone)]
pub struct Lexicon {
    version: String,
    // language tag -> entries sorted longest phrase first
    by_language: BTreeMap<String, Vec<Entry>>,
}

impl Lexicon {
    /// The default lexicon shipped with the crate, validated against the
    /// given taxonomy.
    pub fn bundled(taxonomy: &Taxonomy) -> Result<Lexicon, LexiconError> {
        Lexicon::from_document(BUNDLED_LEXICON, taxonomy)
    }

    pub fn bundled_document() -> &'static str {
        BUNDLED_LEXICON
    }

    pub fn from_document(text: &str, taxonomy: &Taxonomy) -> Result<Lexicon, LexiconError> {
        let doc: LexiconDoc =
            toml::from_str(text).map_err(|e| LexiconError::Parse(e.to_string()))?;

        let mut by_language = BTreeMap::new();
        for (language, table) in doc.phrases {
            let mut entries: Vec<Entry> = Vec::with_capacity(table.len());
            let mut seen: BTreeMap<String, String> = BTreeMap::new();
            for (phrase, label_id) in table {
                let label = taxonomy.label(&label_id).ok_or_else(|| {
                    LexiconError::UnknownLabel {
                        phrase: phrase.clone(),
                        label: label_id.clone(),
                    }
                })?;
                let folded = canonical(&phrase);
                if folded.chars().count() < 3 {
                    return Err(LexiconError::PhraseTooShort(phrase));
                }
                if let Some(first) = seen.insert(folded.clone(), phrase.clone()) {
                    return Err(LexiconError::PhraseCollision {
                        language,
                        first,
                        second: phrase,
                    });
                }
                entries.push(Entry {
                    phrase: folded.chars().collect(),
                    label: label.id.clone(),
                    category: label.category.clone(),
                });
            }
            // Longest first so the scanner prefers the most specific phrase;
            // ties break on the phrase itself for determinism.
            entries.sort_by(|a, b| {
                b.phrase
                    .len()
                    .cmp(&a.phrase.len())
                    .then_with(|| a.phrase.cmp(&b.phrase))
            });
            by_language.insert(language, entries);
        }

        Ok(Lexicon {
            version: doc.version,
            by_language,
        })
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn extractor_id(&self) -> String {
        format!("lexicon:{}", self.version)
    }

    pub fn languages(&self) -> impl Iterator<Item = &str> {
        self.by_language.keys().map(String::as_str)
    }

    pub fn phrase_count(&self, language: &str) -> usize {
        self.by_language.get(language).map_or(0, Vec::len)
    }
}

/// Scan one review with the lexicon. Pure function of (body, language,
/// lexicon); always returns an ok result, possibly with no issues.
pub fn lexicon_extract(review: &ReviewRecord, lexicon: &Lexicon) -> ExtractionResult {
    let body = nfc(&review.body);
    let scan = ScanText::new(&body);
    let mut issues: Vec<ExtractedIssue> = Vec::new();
    let mut seen: BTreeSet<LabelId> = BTreeSet::new();

    if let Some(entries) = lexicon.by_language.get(&review.language) {
        let chars = scan.chars();
        let mut pos = 0;
        while pos < chars.len() {
            let mut matched = None;
            for entry in entries {
                let end = pos + entry.phrase.len();
                if end <= chars.len()
                    && chars[pos..end] == entry.phrase[..]
                    && scan.is_boundary(pos, end)
                {
                    matched = Some((entry, end));
                    break;
                }
            }
            match matched {
                Some((entry, end)) => {
                    let (from, to) = scan.source_span(pos, end);
                    if seen.insert(entry.label.clone()) {
                        issues.push(ExtractedIssue {
                            label: entry.label.clone(),
                            snippet: body[from..to].to_string(),
                            category: entry.category.clone(),
                        });
                    }
                    pos = end;
                }
                None => pos += 1,
            }
        }
    }

    ExtractionResult {
        review_id: review.review_id.clone(),
        issues,
        extractor_id: lexicon.extractor_id(),
        status: ExtractionStatus::Ok,
        attempts: 1,
    }
}
