//! Bundled dictionaries: the alias table used to normalize entity mentions
//! and the university ranking table used to derive tiers.

use std::collections::HashMap;
use std::sync::OnceLock;

const ALIASES_TSV: &str = include_str!("resources/aliases.tsv");
const RANKING_TSV: &str = include_str!("resources/university_ranking.tsv");

#[derive(Debug)]
pub struct Lexicon {
    aliases: HashMap<(String, String), String>,
    canonicals: HashMap<String, Vec<String>>,
    mentions: HashMap<(String, String), Vec<String>>,
    ranking: HashMap<String, u32>,
}

fn rows(tsv: &str) -> impl Iterator<Item = Vec<&str>> {
    tsv.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').collect())
}

impl Lexicon {
    fn parse(aliases_tsv: &str, ranking_tsv: &str) -> Self {
        let mut lex = Lexicon {
            aliases: HashMap::new(),
            canonicals: HashMap::new(),
            mentions: HashMap::new(),
            ranking: HashMap::new(),
        };
        for r in rows(aliases_tsv) {
            let (kind, alias, canonical) = (r[0], r[1], r[2]);
            lex.aliases
                .insert((kind.to_string(), normalize(alias)), canonical.to_string());
            let list = lex.canonicals.entry(kind.to_string()).or_default();
            if !list.iter().any(|c| c == canonical) {
                list.push(canonical.to_string());
            }
            lex.mentions
                .entry((kind.to_string(), canonical.to_string()))
                .or_default()
                .push(alias.to_string());
        }
        for r in rows(ranking_tsv) {
            let rank = r[1].trim().parse().expect("ranking table: integer rank");
            lex.ranking.insert(r[0].to_string(), rank);
        }
        lex
    }

    /// Canonical form of `mention`, if the alias table knows it.
    pub fn canonical(&self, kind: &str, mention: &str) -> Option<&str> {
        self.aliases
            .get(&(kind.to_string(), normalize(mention)))
            .map(String::as_str)
    }

    /// Canonical values of one kind, in table order.
    pub fn canonicals(&self, kind: &str) -> &[String] {
        self.canonicals.get(kind).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Surface forms that normalize to `canonical`.
    pub fn mentions(&self, kind: &str, canonical: &str) -> &[String] {
        self.mentions
            .get(&(kind.to_string(), canonical.to_string()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn university_rank(&self, canonical: &str) -> Option<u32> {
        self.ranking.get(canonical).copied()
    }
}

pub fn normalize(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

pub fn lexicon() -> &'static Lexicon {
    static LEX: OnceLock<Lexicon> = OnceLock::new();
    LEX.get_or_init(|| Lexicon::parse(ALIASES_TSV, RANKING_TSV))
}

/// Tier bucket for a ranking position; `None` means the university is not
/// in the ranking table.
pub fn tier_for_rank(rank: Option<u32>) -> &'static str {
    match rank {
        Some(r) if r <= 10 => "top10",
        Some(r) if r <= 50 => "top50",
        Some(r) if r <= 100 => "top100",
        Some(r) if r <= 200 => "top200",
        Some(_) => "other",
        None => "unranked",
    }
}

/// Numeric strength of a tier, used by the synthetic generator.
pub fn tier_score(tier: &str) -> f64 {
    match tier {
        "top10" => 1.0,
        "top50" => 0.75,
        "top100" => 0.5,
        "top200" => 0.25,
        _ => 0.0,
    }
}
