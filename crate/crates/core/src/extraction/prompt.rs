//! Prompt construction for the extraction stage.
//!
//! Prompts are byte-deterministic for identical inputs: the taxonomy block
//! lists every label once, ordered by category id then label id, and the
//! review body is embedded verbatim in its original language.

use crate::ingest::ReviewRecord;
use crate::taxonomy::{LabelScope, Taxonomy};
use crate::extraction::ValidationError;

// Fixed worked demonstration: a multi-issue review and the expected
// structured response, shown so the model keeps distinct complaints apart
// and copies snippets verbatim.
const DEMO_REVIEW: &str = "Finally arrived in Cairo. The flight was delayed by 3 hours with zero updates from the gate agents. Once onboard, the seat would not recline, and the food was completely cold.";

const DEMO_RESPONSE: &str = r#"[{"label": "Poor Communication (Delay)", "snippet": "delayed by 3 hours with zero updates from the gate agents"}, {"label": "Broken Seats", "snippet": "the seat would not recline"}, {"label": "Poor Food Quality", "snippet": "the food was completely cold"}]"#;

/// Build the extraction prompt for one review.
pub fn build_prompt(review: &ReviewRecord, taxonomy: &Taxonomy) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str(
        "You analyze airline passenger reviews and report every distinct service issue \
         they raise, using only the fixed taxonomy below.\n\n",
    );

    out.push_str("Taxonomy (label_id | display name | category):\n");
    for category in taxonomy.categories() {
        let labels = taxonomy
            .list_labels(LabelScope::Category(category.id.as_str()))
            .expect("category came from the taxonomy");
        for label in labels {
            out.push_str(&format!(
                "{} | {} | {}\n",
                label.id, label.display_name, category.display_name
            ));
        }
    }

    out.push_str(
        "\nRules:\n\
         1. Work on the review in its original language. Do not translate it.\n\
         2. Respond with only a JSON array. Each element must be an object \
         {\"label\": <taxonomy label: label_id or exact display name>, \
         \"snippet\": <excerpt copied character-for-character from the review>}.\n\
         3. Report each distinct issue once. Use no label outside the taxonomy.\n\
         4. If the review raises no issue from the taxonomy, respond with [].\n\n",
    );

    out.push_str("Example review:\n");
    out.push_str(DEMO_REVIEW);
    out.push_str("\nExample response:\n");
    out.push_str(DEMO_RESPONSE);
    out.push_str("\n\n");

    out.push_str(&format!("Review (language: {}):\n", review.language));
    if !review.title.trim().is_empty() {
        out.push_str(&format!("Title: {}\n", review.title));
    }
    out.push_str(&review.body);
    out.push_str("\n\nResponse:\n");
    out
}

/// Build the follow-up prompt after an invalid response, restating the
/// task with the concrete validation failure.
pub fn build_repair_prompt(
    base_prompt: &str,
    bad_response: &str,
    error: &ValidationError,
) -> String {
    format!(
        "{base_prompt}\
         Your previous response was rejected.\n\
         Previous response:\n{bad_response}\n\
         Problem: {error}\n\
         Respond again with only the corrected JSON array.\n"
    )
}
