use std::fmt::Write;

use pjfit_core::corpus::Corpus;
use pjfit_core::extraction::FeatureSchema;
use pjfit_core::fusion::Mode;
use pjfit_core::pipeline::ScoreParts;

fn table(rows: &[(String, String)]) -> Vec<String> {
    let key = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:<key$}  {v}")).collect()
}

/// Score header followed by the post and resume entity tables side by side.
pub fn render_explanation(
    corpus: &Corpus,
    schema: &FeatureSchema,
    record: usize,
    mode: Mode,
    parts: ScoreParts,
) -> String {
    let rec = &corpus.records[record];
    let post_doc = corpus.post(rec.post);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "record {record}: candidate {} applied to post {} (submission {}), decision {}",
        rec.candidate.0,
        rec.post.0,
        rec.seq_index,
        if rec.label { "accept" } else { "reject" }
    );
    let logits = match parts.implicit {
        Some(i) => format!("explicit {:.4} + implicit {:.4}", parts.explicit, i),
        None => format!("explicit {:.4}", parts.explicit),
    };
    let _ = writeln!(out, "mode {mode}: score {:.4} = sigmoid({logits})", parts.score());
    let _ = writeln!(out);

    let left = table(&schema.post.describe(&schema.post.extract(post_doc)));
    let right = table(&schema.resume.describe(&schema.resume.extract(&rec.resume)));
    let width = left
        .iter()
        .map(|l| l.chars().count())
        .max()
        .unwrap_or(0)
        .max("job post".len());
    let _ = writeln!(out, "{:<width$} | resume", "job post");
    let _ = writeln!(out, "{}-+-{}", "-".repeat(width), "-".repeat(24));
    for k in 0..left.len().max(right.len()) {
        let l = left.get(k).map_or("", String::as_str);
        let r = right.get(k).map_or("", String::as_str);
        let _ = writeln!(out, "{l:<width$} | {r}");
    }
    out
}
