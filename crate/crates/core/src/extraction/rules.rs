//! Rule-based entity extraction: regular expressions for simple fields,
//! alias-table lookup for complex ones, and derived fields computed from
//! both (university tier, skill count).

use std::sync::OnceLock;

use regex::Regex;

use super::lexicon::{lexicon, normalize, tier_for_rank};
use super::schema::{DocKind, RawKind};
use crate::corpus::Document;

pub const RESUME_SKILL_SLOTS: usize = 6;
pub const POST_SKILL_SLOTS: usize = 4;
pub const MISSING: &str = "missing";
pub const NO_SKILL: &str = "none";

/// Value pulled out of a document before vocabulary/statistics are applied.
#[derive(Debug, Clone, PartialEq)]
pub enum RawValue {
    Text(String),
    Number(Option<f64>),
}

/// Field names and kinds produced by the rules, in schema order.
pub fn inventory(kind: DocKind) -> Vec<(String, RawKind)> {
    use RawKind::*;
    let mut v: Vec<(String, RawKind)> = Vec::new();
    let mut push = |n: &str, k| v.push((n.to_string(), k));
    match kind {
        DocKind::Resume => {
            push("age", Real);
            push("gender", Categorical);
            push("city", Categorical);
            push("university", Categorical);
            push("university_tier", Categorical);
            push("degree", Categorical);
            push("major", Categorical);
            push("graduation_year", Real);
            push("years_experience", Real);
            push("last_position", Categorical);
            push("industry", Categorical);
            push("last_job_duration", Real);
            push("num_jobs", Real);
            for i in 1..=RESUME_SKILL_SLOTS {
                push(&format!("skill_{i}"), Categorical);
            }
            push("english_level", Categorical);
            push("certificate", Categorical);
            push("expected_salary", Real);
            push("job_type", Categorical);
            push("skill_count", Real);
        }
        DocKind::Post => {
            push("title", Categorical);
            for i in 1..=POST_SKILL_SLOTS {
                push(&format!("req_skill_{i}"), Categorical);
            }
            push("seniority", Categorical);
            push("min_years", Real);
            push("min_degree", Categorical);
            push("location", Categorical);
            push("salary_max", Real);
            push("industry", Categorical);
            push("job_type", Categorical);
        }
    }
    v
}

fn number_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(\d+(?:\.\d+)?)").unwrap())
}

fn salary_range_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(\d+)\s*k?\s*-\s*(\d+)\s*k").unwrap())
}

fn list_sep_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\s*[,;]\s*|\s+/\s+").unwrap())
}

/// First number in the text, if any.
fn first_number(text: Option<&str>) -> Option<f64> {
    let caps = number_re().captures(text?)?;
    caps[1].parse().ok()
}

fn text(v: Option<&str>) -> RawValue {
    RawValue::Text(v.map(normalize).filter(|s| !s.is_empty()).unwrap_or_else(|| MISSING.into()))
}

fn lookup(kind: &str, v: Option<&str>) -> RawValue {
    match v {
        Some(m) => RawValue::Text(
            lexicon()
                .canonical(kind, m)
                .map(str::to_string)
                .unwrap_or_else(|| normalize(m)),
        ),
        None => RawValue::Text(MISSING.into()),
    }
}

/// Splits a skill list and resolves every mention through the alias table.
/// Unknown mentions are dropped. The result is deduplicated and in lexicon
/// order.
pub fn canonical_skills(list: Option<&str>) -> Vec<String> {
    let lex = lexicon();
    let order = lex.canonicals("skill");
    let mut found: Vec<usize> = list
        .map(|l| {
            list_sep_re()
                .split(l)
                .filter_map(|m| lex.canonical("skill", m))
                .filter_map(|c| order.iter().position(|o| o == c))
                .collect()
        })
        .unwrap_or_default();
    found.sort_unstable();
    found.dedup();
    found.into_iter().map(|i| order[i].clone()).collect()
}

fn skill_slots(skills: &[String], slots: usize) -> impl Iterator<Item = RawValue> + '_ {
    (0..slots).map(move |i| {
        RawValue::Text(skills.get(i).cloned().unwrap_or_else(|| NO_SKILL.into()))
    })
}

/// Applies the rules for `kind` and returns values aligned with
/// [`inventory`].
pub fn raw_entities(doc: &Document, kind: DocKind) -> Vec<RawValue> {
    let e = |f: &str, k: &str| doc.entry(f, k);
    let num = |f: &str, k: &str| RawValue::Number(first_number(e(f, k)));
    let mut out = Vec::new();
    match kind {
        DocKind::Resume => {
            out.push(num("demographics", "age"));
            out.push(text(e("demographics", "gender")));
            out.push(text(e("demographics", "location")));
            let uni = lookup("university", e("education", "school"));
            let tier = match &uni {
                RawValue::Text(u) if u != MISSING => tier_for_rank(lexicon().university_rank(u)),
                _ => MISSING,
            };
            out.push(uni);
            out.push(RawValue::Text(tier.into()));
            out.push(lookup("degree", e("education", "degree")));
            out.push(lookup("major", e("education", "major")));
            out.push(num("education", "graduated"));
            out.push(num("experience", "years"));
            out.push(lookup("position", e("experience", "last_position")));
            out.push(text(e("experience", "industry")));
            out.push(num("experience", "duration"));
            out.push(num("experience", "jobs"));
            let skills = canonical_skills(e("skills", "list"));
            out.extend(skill_slots(&skills, RESUME_SKILL_SLOTS));
            out.push(lookup("english", e("languages", "english")));
            out.push(text(e("certificates", "name")));
            out.push(num("expectations", "salary"));
            out.push(lookup("job_type", e("expectations", "job_type")));
            out.push(RawValue::Number(Some(skills.len() as f64)));
        }
        DocKind::Post => {
            out.push(lookup("title", e("job", "title")));
            let skills = canonical_skills(e("requirements", "skills"));
            out.extend(skill_slots(&skills, POST_SKILL_SLOTS));
            out.push(text(e("job", "seniority")));
            out.push(num("requirements", "experience"));
            out.push(lookup("degree", e("requirements", "degree")));
            out.push(text(e("job", "location")));
            let salary_max = e("compensation", "salary").and_then(|s| {
                salary_range_re()
                    .captures(s)
                    .and_then(|c| c[2].parse().ok())
                    .or_else(|| first_number(Some(s)))
            });
            out.push(RawValue::Number(salary_max));
            out.push(text(e("company", "industry")));
            out.push(lookup("job_type", e("job", "type")));
        }
    }
    debug_assert_eq!(out.len(), inventory(kind).len());
    out
}
