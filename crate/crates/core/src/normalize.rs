//! Text normalization shared by label resolution, lexicon matching, snippet
//! grounding and region lookup.
//!
//! The canonical form of a string is produced by a fixed pipeline:
//! Unicode NFC, then default case folding, then collapsing internal
//! whitespace runs to a single space, then stripping leading and trailing
//! non-alphanumeric characters. The same pipeline backs every
//! case-insensitive comparison in the crate so that matching stays
//! deterministic and language-agnostic.

use unicode_normalization::UnicodeNormalization;

/// NFC-normalize a string. Snippet grounding compares NFC forms on both
/// sides, so review bodies are normalized once with this before any
/// substring checks.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

/// Full canonical form: NFC, casefold, whitespace collapse, edge-punctuation
/// strip. Returns an empty string when nothing alphanumeric survives.
pub fn canonical(s: &str) -> String {
    let folded = caseless::default_case_fold_str(&nfc(s));
    let collapsed = folded.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

/// A casefolded, whitespace-collapsed view of an NFC string that remembers,
/// for every scan character, the byte span it came from in the source. The
/// lexicon matcher searches the scan text and uses the spans to cut verbatim
/// snippets out of the original body.
pub struct ScanText {
    chars: Vec<char>,
    spans: Vec<(usize, usize)>,
}

impl ScanText {
    /// Build the scan view of `source`, which must already be NFC.
    pub fn new(source: &str) -> Self {
        let mut chars = Vec::new();
        let mut spans = Vec::new();
        let mut pending_ws: Option<(usize, usize)> = None;

        for (idx, c) in source.char_indices() {
            let end = idx + c.len_utf8();
            if c.is_whitespace() {
                pending_ws = match pending_ws {
                    Some((start, _)) => Some((start, end)),
                    None => Some((idx, end)),
                };
                continue;
            }
            // Whitespace runs collapse to one space; leading runs are dropped.
            if let Some(span) = pending_ws.take() {
                if !chars.is_empty() {
                    chars.push(' ');
                    spans.push(span);
                }
            }
            let mut buf = [0u8; 4];
            for folded in caseless::default_case_fold_str(c.encode_utf8(&mut buf)).chars() {
                chars.push(folded);
                spans.push((idx, end));
            }
        }

        ScanText { chars, spans }
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    /// Byte span in the source string covered by scan chars `[start, end)`.
    pub fn source_span(&self, start: usize, end: usize) -> (usize, usize) {
        debug_assert!(start < end && end <= self.spans.len());
        (self.spans[start].0, self.spans[end - 1].1)
    }

    /// True when the scan char at `pos` sits on a word boundary edge, i.e.
    /// the neighbouring character outside `[start, end)` is not alphanumeric.
    pub fn is_boundary(&self, start: usize, end: usize) -> bool {
        let before_ok = start == 0 || !self.chars[start - 1].is_alphanumeric();
        let after_ok = end >= self.chars.len() || !self.chars[end].is_alphanumeric();
        before_ok && after_ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_folds_case_and_whitespace() {
        assert_eq!(canonical("  LOST   baggage "), "lost baggage");
        assert_eq!(canonical("Rude Flight Attendants"), "rude flight attendants");
    }

    #[test]
    fn canonical_strips_edge_punctuation_only() {
        assert_eq!(canonical("...lost baggage!!"), "lost baggage");
        assert_eq!(canonical("Poor Communication (Delay)"), "poor communication (delay");
        assert_eq!(canonical("Flight Delays/Cancellations"), "flight delays/cancellations");
    }

    #[test]
    fn canonical_of_pure_punctuation_is_empty() {
        assert_eq!(canonical("?!* --"), "");
    }

    #[test]
    fn scan_text_maps_back_to_source_bytes() {
        let src = "The  SEAT was Broken";
        let scan = ScanText::new(src);
        let text: String = scan.chars().iter().collect();
        assert_eq!(text, "the seat was broken");
        // "seat" occupies scan chars 4..8.
        let (a, b) = scan.source_span(4, 8);
        assert_eq!(&src[a..b], "SEAT");
    }

    #[test]
    fn scan_text_handles_multibyte_and_folding() {
        let src = "Straße   kalt";
        let scan = ScanText::new(src);
        let text: String = scan.chars().iter().collect();
        assert_eq!(text, "strasse kalt");
        let (a, b) = scan.source_span(0, 7);
        assert_eq!(&src[a..b], "Straße");
    }
}
