//! The fixed service-issue taxonomy: specific issue labels grouped into
//! macro-categories, plus resolution of raw label strings to canonical
//! labels.
//!
//! A taxonomy is immutable once loaded and safe to share across threads.
//! Resolution is strict: a string either normalizes onto exactly one label
//! (via its id, display name or an alias) or is reported back as unmatched.
//! There is deliberately no fuzzy matching — extraction validity depends on
//! tight label control, so unmatched strings surface instead of being
//! guessed at.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::normalize::canonical;

/// Document bundled as the default taxonomy.
const BUNDLED_TAXONOMY: &str = include_str!("../data/taxonomy.toml");

/// Canonical token identifying an issue label, e.g. `lost_baggage`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LabelId(String);

/// Canonical token identifying a macro-category, e.g. `flight_disruptions`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CategoryId(String);

macro_rules! id_impls {
    ($ty:ident) => {
        impl $ty {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $ty {
            fn from(s: &str) -> Self {
                Self(s.to_string())
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

id_impls!(LabelId);
id_impls!(CategoryId);

/// One of the top-level service dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacroCategory {
    pub id: CategoryId,
    pub display_name: String,
}

/// A specific complaint type, always belonging to exactly one category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssueLabel {
    pub id: LabelId,
    pub display_name: String,
    pub category: CategoryId,
    pub aliases: Vec<String>,
}

#[derive(Debug, Error)]
pub enum TaxonomyError {
    #[error("failed to parse taxonomy document: {0}")]
    Parse(String),
    #[error("taxonomy document contains no labels")]
    EmptyTaxonomy,
    #[error("invalid id `{0}`: ids are non-empty lowercase tokens of [a-z0-9_]")]
    InvalidId(String),
    #[error("duplicate label id `{0}`")]
    DuplicateLabel(String),
    #[error("duplicate category id `{0}`")]
    DuplicateCategory(String),
    #[error("`{alias}` resolves to both `{first}` and `{second}`")]
    AliasCollision {
        alias: String,
        first: String,
        second: String,
    },
    #[error("label `{label}` references unknown category `{category}`")]
    UnknownCategoryRef { label: String, category: String },
    #[error("document declares {declared} {what} but contains {actual}")]
    DeclaredCountMismatch {
        what: &'static str,
        declared: usize,
        actual: usize,
    },
    #[error("unknown label id `{0}`")]
    UnknownLabel(String),
    #[error("unknown category id `{0}`")]
    UnknownCategory(String),
    #[error("label string is empty after normalization")]
    EmptyInput,
}

/// Outcome of resolving a raw label string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelMatch<'t> {
    Resolved(&'t IssueLabel),
    /// No label matched; carries the normalized form for reporting.
    Unmatched(String),
}

/// Which labels to list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelScope<'a> {
    All,
    Category(&'a str),
}

// Serde shape of the TOML document.

#[derive(Debug, Serialize, Deserialize)]
struct TaxonomyDoc {
    version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    declared: Option<DeclaredCounts>,
    #[serde(default)]
    categories: Vec<CategoryRow>,
    #[serde(default)]
    labels: Vec<LabelRow>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DeclaredCounts {
    categories: usize,
    labels: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct CategoryRow {
    category_id: String,
    display_name: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct LabelRow {
    label_id: String,
    display_name: String,
    category_id: String,
    #[serde(default)]
    aliases: Vec<String>,
}

/// The fixed issue hierarchy, loaded from a taxonomy document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    version: String,
    categories: BTreeMap<CategoryId, MacroCategory>,
    labels: BTreeMap<LabelId, IssueLabel>,
    // canonical match key -> label id; covers ids, display names and aliases
    resolution: BTreeMap<String, LabelId>,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Taxonomy {
    /// The default taxonomy shipped with the crate.
    pub fn bundled() -> Taxonomy {
        Taxonomy::from_document(BUNDLED_TAXONOMY).expect("bundled taxonomy document is valid")
    }

    /// Raw text of the bundled taxonomy document, for writing out an
    /// editable copy.
    pub fn bundled_document() -> &'static str {
        BUNDLED_TAXONOMY
    }

    /// Parse and validate a taxonomy document.
    pub fn from_document(text: &str) -> Result<Taxonomy, TaxonomyError> {
        let doc: TaxonomyDoc =
            toml::from_str(text).map_err(|e| TaxonomyError::Parse(e.to_string()))?;

        if doc.labels.is_empty() {
            return Err(TaxonomyError::EmptyTaxonomy);
        }
        if let Some(declared) = &doc.declared {
            if declared.categories != doc.categories.len() {
                return Err(TaxonomyError::DeclaredCountMismatch {
                    what: "categories",
                    declared: declared.categories,
                    actual: doc.categories.len(),
                });
            }
            if declared.labels != doc.labels.len() {
                return Err(TaxonomyError::DeclaredCountMismatch {
                    what: "labels",
                    declared: declared.labels,
                    actual: doc.labels.len(),
                });
            }
        }

        let mut categories = BTreeMap::new();
        for row in doc.categories {
            if !valid_id(&row.category_id) {
                return Err(TaxonomyError::InvalidId(row.category_id));
            }
            let id = CategoryId::new(row.category_id);
            let prev = categories.insert(
                id.clone(),
                MacroCategory {
                    id: id.clone(),
                    display_name: row.display_name,
                },
            );
            if prev.is_some() {
                return Err(TaxonomyError::DuplicateCategory(id.0));
            }
        }

        let mut labels = BTreeMap::new();
        let mut resolution: BTreeMap<String, LabelId> = BTreeMap::new();
        for row in doc.labels {
            if !valid_id(&row.label_id) {
                return Err(TaxonomyError::InvalidId(row.label_id));
            }
            let id = LabelId::new(row.label_id);
            if labels.contains_key(&id) {
                return Err(TaxonomyError::DuplicateLabel(id.0));
            }
            let category = CategoryId::new(row.category_id);
            if !categories.contains_key(&category) {
                return Err(TaxonomyError::UnknownCategoryRef {
                    label: id.0,
                    category: category.0,
                });
            }

            let mut keys = vec![canonical(id.as_str()), canonical(&row.display_name)];
            keys.extend(row.aliases.iter().map(|a| canonical(a)));
            for key in keys {
                if key.is_empty() {
                    return Err(TaxonomyError::EmptyInput);
                }
                match resolution.get(&key) {
                    Some(existing) if existing != &id => {
                        return Err(TaxonomyError::AliasCollision {
                            alias: key,
                            first: existing.0.clone(),
                            second: id.0,
                        });
                    }
                    _ => {
                        resolution.insert(key, id.clone());
                    }
                }
            }

            labels.insert(
                id.clone(),
                IssueLabel {
                    id,
                    display_name: row.display_name,
                    category,
                    aliases: row.aliases,
                },
            );
        }

        Ok(Taxonomy {
            version: doc.version,
            categories,
            labels,
            resolution,
        })
    }

    /// Serialize back to the document format. Loading the result yields an
    /// identical taxonomy.
    pub fn to_document(&self) -> String {
        let doc = TaxonomyDoc {
            version: self.version.clone(),
            declared: Some(DeclaredCounts {
                categories: self.categories.len(),
                labels: self.labels.len(),
            }),
            categories: self
                .categories
                .values()
                .map(|c| CategoryRow {
                    category_id: c.id.0.clone(),
                    display_name: c.display_name.clone(),
                })
                .collect(),
            labels: self
                .labels
                .values()
                .map(|l| LabelRow {
                    label_id: l.id.0.clone(),
                    display_name: l.display_name.clone(),
                    category_id: l.category.0.clone(),
                    aliases: l.aliases.clone(),
                })
                .collect(),
        };
        toml::to_string(&doc).expect("taxonomy document serializes")
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn label(&self, id: &str) -> Option<&IssueLabel> {
        self.labels.get(&LabelId::from(id))
    }

    pub fn category(&self, id: &str) -> Option<&MacroCategory> {
        self.categories.get(&CategoryId::from(id))
    }

    /// Categories in id order.
    pub fn categories(&self) -> impl Iterator<Item = &MacroCategory> {
        self.categories.values()
    }

    pub fn label_count(&self) -> usize {
        self.labels.len()
    }

    pub fn category_count(&self) -> usize {
        self.categories.len()
    }

    /// Resolve a raw label string against ids, display names and aliases.
    /// Matching is case-insensitive, whitespace-collapsed and
    /// edge-punctuation-folded; see [`crate::normalize::canonical`].
    pub fn resolve_label(&self, raw: &str) -> Result<LabelMatch<'_>, TaxonomyError> {
        let key = canonical(raw);
        if key.is_empty() {
            return Err(TaxonomyError::EmptyInput);
        }
        Ok(match self.resolution.get(&key) {
            Some(id) => LabelMatch::Resolved(&self.labels[id]),
            None => LabelMatch::Unmatched(key),
        })
    }

    /// The unique category of a label.
    pub fn category_of(&self, label_id: &str) -> Result<&MacroCategory, TaxonomyError> {
        let label = self
            .label(label_id)
            .ok_or_else(|| TaxonomyError::UnknownLabel(label_id.to_string()))?;
        Ok(&self.categories[&label.category])
    }

    /// Labels in lexicographic id order, optionally restricted to one
    /// category.
    pub fn list_labels(&self, scope: LabelScope<'_>) -> Result<Vec<&IssueLabel>, TaxonomyError> {
        match scope {
            LabelScope::All => Ok(self.labels.values().collect()),
            LabelScope::Category(id) => {
                let category = self
                    .category(id)
                    .ok_or_else(|| TaxonomyError::UnknownCategory(id.to_string()))?;
                Ok(self
                    .labels
                    .values()
                    .filter(|l| l.category == category.id)
                    .collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_taxonomy_has_35_labels_in_8_categories() {
        let t = Taxonomy::bundled();
        assert_eq!(t.label_count(), 35);
        assert_eq!(t.category_count(), 8);
        let names: Vec<&str> = t.categories().map(|c| c.display_name.as_str()).collect();
        assert_eq!(
            names,
            [
                "Airport Services",
                "Baggage Handling",
                "Booking Issues",
                "Cleanliness",
                "Customer Service",
                "Flight Disruptions",
                "In-Flight Experience",
                "Safety Concerns",
            ]
        );
    }

    #[test]
    fn bundled_category_sizes() {
        let t = Taxonomy::bundled();
        let sizes: Vec<(String, usize)> = t
            .categories()
            .map(|c| {
                (
                    c.id.to_string(),
                    t.list_labels(LabelScope::Category(c.id.as_str())).unwrap().len(),
                )
            })
            .collect();
        let expect = [
            ("airport_services", 2),
            ("baggage_handling", 5),
            ("booking_issues", 2),
            ("cleanliness", 3),
            ("customer_service", 5),
            ("flight_disruptions", 7),
            ("in_flight_experience", 10),
            ("safety_concerns", 1),
        ];
        for ((id, n), (eid, en)) in sizes.iter().zip(expect.iter()) {
            assert_eq!((id.as_str(), *n), (*eid, *en));
        }
    }

    #[test]
    fn resolves_display_names_and_aliases() {
        let t = Taxonomy::bundled();
        match t.resolve_label("Rude Flight Attendants").unwrap() {
            LabelMatch::Resolved(l) => {
                assert_eq!(l.id.as_str(), "rude_flight_attendants");
                assert_eq!(l.category.as_str(), "customer_service");
            }
            other => panic!("expected resolution, got {other:?}"),
        }
        match t.resolve_label("  LOST   baggage ").unwrap() {
            LabelMatch::Resolved(l) => assert_eq!(l.id.as_str(), "lost_baggage"),
            other => panic!("expected resolution, got {other:?}"),
        }
        match t.resolve_label("Poor Communication (Delay)").unwrap() {
            LabelMatch::Resolved(l) => {
                assert_eq!(l.id.as_str(), "poor_communication_regarding_delay")
            }
            other => panic!("expected resolution, got {other:?}"),
        }
    }

    #[test]
    fn unmatched_carries_normalized_form() {
        let t = Taxonomy::bundled();
        assert_eq!(
            t.resolve_label("Broken WIFI!").unwrap(),
            LabelMatch::Unmatched("broken wifi".to_string())
        );
    }

    #[test]
    fn empty_after_normalization_is_an_error() {
        let t = Taxonomy::bundled();
        assert!(matches!(
            t.resolve_label("—  !!"),
            Err(TaxonomyError::EmptyInput)
        ));
    }

    #[test]
    fn category_of_known_and_unknown_labels() {
        let t = Taxonomy::bundled();
        assert_eq!(
            t.category_of("poor_food_quality").unwrap().display_name,
            "In-Flight Experience"
        );
        assert_eq!(
            t.category_of("lack_of_safety_enforcement").unwrap().display_name,
            "Safety Concerns"
        );
        assert!(matches!(
            t.category_of("x"),
            Err(TaxonomyError::UnknownLabel(_))
        ));
    }

    #[test]
    fn list_labels_ordering_and_scope() {
        let t = Taxonomy::bundled();
        let booking: Vec<&str> = t
            .list_labels(LabelScope::Category("booking_issues"))
            .unwrap()
            .iter()
            .map(|l| l.id.as_str())
            .collect();
        assert_eq!(booking, ["difficult_booking_process", "website_issues"]);
        assert_eq!(t.list_labels(LabelScope::All).unwrap().len(), 35);
        assert!(matches!(
            t.list_labels(LabelScope::Category("nope")),
            Err(TaxonomyError::UnknownCategory(_))
        ));
    }

    #[test]
    fn partition_property() {
        let t = Taxonomy::bundled();
        let total: usize = t
            .categories()
            .map(|c| t.list_labels(LabelScope::Category(c.id.as_str())).unwrap().len())
            .sum();
        assert_eq!(total, t.list_labels(LabelScope::All).unwrap().len());
    }

    #[test]
    fn every_label_self_resolves() {
        let t = Taxonomy::bundled();
        for label in t.list_labels(LabelScope::All).unwrap() {
            match t.resolve_label(&label.display_name).unwrap() {
                LabelMatch::Resolved(l) => assert_eq!(l.id, label.id),
                other => panic!("{} failed to self-resolve: {other:?}", label.id),
            }
            match t.resolve_label(label.id.as_str()).unwrap() {
                LabelMatch::Resolved(l) => assert_eq!(l.id, label.id),
                other => panic!("{} id failed to resolve: {other:?}", label.id),
            }
        }
    }

    #[test]
    fn round_trip_is_stable() {
        let t = Taxonomy::bundled();
        let reloaded = Taxonomy::from_document(&t.to_document()).unwrap();
        assert_eq!(t, reloaded);
    }

    #[test]
    fn zero_labels_is_empty_taxonomy() {
        let doc = "version = \"v0\"\n";
        assert!(matches!(
            Taxonomy::from_document(doc),
            Err(TaxonomyError::EmptyTaxonomy)
        ));
    }

    #[test]
    fn display_name_under_two_categories_collides() {
        let doc = r#"
version = "v0"

[[categories]]
category_id = "a"
display_name = "A"

[[categories]]
category_id = "b"
display_name = "B"

[[labels]]
label_id = "lost_baggage"
display_name = "Lost Baggage"
category_id = "a"

[[labels]]
label_id = "lost_baggage_2"
display_name = "Lost Baggage"
category_id = "b"
"#;
        assert!(matches!(
            Taxonomy::from_document(doc),
            Err(TaxonomyError::AliasCollision { .. })
        ));
    }

    #[test]
    fn unknown_category_reference_fails() {
        let doc = r#"
version = "v0"

[[categories]]
category_id = "a"
display_name = "A"

[[labels]]
label_id = "x"
display_name = "X"
category_id = "missing"
"#;
        assert!(matches!(
            Taxonomy::from_document(doc),
            Err(TaxonomyError::UnknownCategoryRef { .. })
        ));
    }

    #[test]
    fn declared_count_mismatch_fails() {
        let doc = r#"
version = "v0"

[declared]
categories = 2
labels = 1

[[categories]]
category_id = "a"
display_name = "A"

[[labels]]
label_id = "x"
display_name = "X"
category_id = "a"
"#;
        assert!(matches!(
            Taxonomy::from_document(doc),
            Err(TaxonomyError::DeclaredCountMismatch { .. })
        ));
    }
}
