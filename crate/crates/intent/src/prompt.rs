use std::fmt::Write as _;

use dragflow_core::benchio::BenchSample;

/// The instruction text sent to the model, kept word for word.
pub const PROTOCOL: &str = "Refer to the original image, and the \u{201c}dragged\" image with the blue starting region, estimated green target region, and the arrow direction. You need to describe the content and the object for editing of the picture in English, in terms of \u{201c}background details\" and \u{201c}editing changes\". Then you should guess the editing intents from the user by selecting one label for each answer, where the label classes have {relocation, deformation, rotation}.

Your tasks:

- (a) You should first provide a detailed description about the original image (e.g., include, but are not limited to objects, spatial relationship, color, style, structure). Then try to describe the motion/editing in short words.

- (b) You should provide the ten most possible guesses about the static condition of the after-dragged image, and at most 60 words for each. See if you can provide more details to facilitate the editing.";

/// Reply layout the parser expects. The protocol itself leaves the syntax
/// open, so we ask for this explicitly.
pub const RESPONSE_FORMAT: &str = "Reply in this layout:
Label: <relocation|deformation|rotation>
Description: <your answer to (a)>
Guesses:
1. <first guess>
2. <second guess>
...
10. <tenth guess>";

/// Protocol text, a short summary of the marked regions, and the reply
/// layout. Deterministic for a given sample.
pub fn build_prompt(sample: &BenchSample) -> String {
    let mut out = String::with_capacity(PROTOCOL.len() + RESPONSE_FORMAT.len() + 256);
    out.push_str(PROTOCOL);
    out.push_str("\n\nMarked regions:\n");
    for (i, r) in &sample.region_operations {
        let _ = write!(out, "- region {i}: starts at {}, target {}", r.begin, r.target);
        if let Some(a) = r.anchor {
            let _ = write!(out, ", anchor {a}");
        }
        out.push('\n');
    }
    if !sample.editing_prompt.trim().is_empty() {
        let _ = writeln!(out, "User note: {}", sample.editing_prompt.trim());
    }
    out.push('\n');
    out.push_str(RESPONSE_FORMAT);
    out
}
