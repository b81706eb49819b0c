//! Synthetic corpus with planted signal.
//!
//! Every candidate carries a latent vector `u` (skill indicators, industry
//! domain, experience and education strength) and every post a requirement
//! vector `v` of the same layout. An application's quality is `m = uᵀv`;
//! it is accepted iff `m` exceeds the post's current bar, after which the
//! label may be flipped with probability `label_noise`.
//!
//! The bar starts at a per-post base and drifts with the recruiter's own
//! decisions: it rises by `drift * bar_step_up` after an accept, falls by
//! `drift * bar_step_down` after a reject, and then closes a fraction
//! `bar_reversion` of its gap to the base. With `drift = 0` the bar never
//! leaves the base. Only the application history reveals where it sits.
//!
//! The industry domain appears both as a structured entity and as the first
//! free-text sentence of each document.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ApplicationRecord, CandidateId, Corpus, Document, Manifest, PostId};
use crate::error::{Error, Result};
use crate::extraction::lexicon::{lexicon, tier_for_rank, tier_score};

pub const DOMAINS: [&str; 8] = [
    "finance",
    "healthcare",
    "retail",
    "logistics",
    "gaming",
    "energy",
    "education",
    "telecom",
];
const CITIES: [&str; 6] = ["beijing", "shanghai", "shenzhen", "hangzhou", "chengdu", "wuhan"];
const CERTIFICATES: [&str; 4] = ["pmp", "cpa", "aws certified", "cfa"];
const GENDERS: [&str; 2] = ["male", "female"];
const SENIORITY: [&str; 3] = ["junior", "mid", "senior"];
const UNIVERSITY_COUNT: u32 = 60;

const RESUME_FILLERS: [&str; 6] = [
    "i am a fast learner",
    "i enjoy working in a team",
    "i like solving hard problems",
    "i am looking for new challenges",
    "i have good communication skills",
    "i mentor junior colleagues",
];
const POST_FILLERS: [&str; 5] = [
    "we offer flexible working hours",
    "we value ownership and curiosity",
    "you will join a fast growing team",
    "competitive benefits are provided",
    "you will report to the team lead",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub candidates: usize,
    pub posts: usize,
    pub applications: usize,
    /// Number of skills in play; the first block of the latent vectors.
    pub latent_dim: usize,
    /// Number of industry domains.
    pub domains: usize,
    /// Bar drift strength δ ≥ 0.
    pub drift: f64,
    /// Label flip probability ε ∈ [0, 0.5).
    pub label_noise: f64,
    /// Target fraction of accepted applications.
    pub base_rate: f64,
    pub skill_weight: f64,
    pub domain_weight: f64,
    pub experience_weight: f64,
    pub education_weight: f64,
    /// How strongly post seniority scales the experience weight; 0 makes the
    /// experience term identical for every post.
    pub seniority_modulation: f64,
    /// Spread of per-post base bars, tied to the advertised salary.
    pub post_bar_spread: f64,
    /// Probability that a candidate swaps one skill before a new application.
    pub resume_mutation_prob: f64,
    /// Bar rise after an accept, in units of `drift`.
    pub bar_step_up: f64,
    /// Bar drop after a reject, in units of `drift`.
    pub bar_step_down: f64,
    /// Fraction of the gap to the base bar closed after every review.
    pub bar_reversion: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            candidates: 2000,
            posts: 20,
            applications: 7000,
            latent_dim: 8,
            domains: 4,
            drift: 0.0,
            label_noise: 0.0,
            base_rate: 0.3,
            skill_weight: 1.0,
            domain_weight: 0.6,
            experience_weight: 0.5,
            education_weight: 0.3,
            seniority_modulation: 1.0,
            post_bar_spread: 0.2,
            resume_mutation_prob: 0.1,
            bar_step_up: 1.0,
            bar_step_down: 0.4,
            bar_reversion: 0.15,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let err = |m: &str| Err(Error::Config(m.to_string()));
        if self.candidates == 0 || self.posts == 0 || self.applications == 0 {
            return err("candidate, post and application counts must be positive");
        }
        let skills = lexicon().canonicals("skill").len();
        if self.latent_dim < 4 || self.latent_dim > skills {
            return Err(Error::Config(format!(
                "latent_dim must be in [4, {skills}], got {}",
                self.latent_dim
            )));
        }
        if self.domains == 0 || self.domains > DOMAINS.len() {
            return Err(Error::Config(format!(
                "domains must be in [1, {}], got {}",
                DOMAINS.len(),
                self.domains
            )));
        }
        if !(self.drift >= 0.0 && self.drift <= 1.0) {
            return err("drift must be in [0, 1]");
        }
        if !(self.label_noise >= 0.0 && self.label_noise < 0.5) {
            return err("label_noise must be in [0, 0.5)");
        }
        if !(self.base_rate > 0.0 && self.base_rate < 1.0) {
            return err("base_rate must be in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.resume_mutation_prob) {
            return err("resume_mutation_prob must be in [0, 1]");
        }
        if !(self.bar_step_up >= 0.0 && self.bar_step_down >= 0.0) {
            return err("bar steps must be ≥ 0");
        }
        if !(0.0..=1.0).contains(&self.bar_reversion) {
            return err("bar_reversion must be in [0, 1]");
        }
        Ok(())
    }

    /// Width of the latent vectors.
    pub fn latent_width(&self) -> usize {
        self.latent_dim + self.domains + 2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PostTruth {
    pub requirement: Vec<f64>,
    pub base_bar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordTruth {
    /// Candidate latent vector at the time of this application.
    pub latent: Vec<f64>,
    /// Planted skills (canonical names) written into this resume.
    pub skills: Vec<String>,
    pub score: f64,
    /// Post bar in force when this application was reviewed.
    pub bar: f64,
    pub flipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub bar_offset: f64,
    pub posts: Vec<PostTruth>,
    pub records: Vec<RecordTruth>,
}

#[derive(Debug, Clone)]
struct CandidateState {
    skills: BTreeSet<usize>,
    domain: usize,
    years: u32,
    university: u32,
    degree: usize,
    major: usize,
    gender: usize,
    city: usize,
    age: u32,
    grad_year: u32,
    position: usize,
    duration_months: u32,
    jobs: u32,
    english: usize,
    certificate: Option<usize>,
    salary: u32,
    job_type: usize,
}

#[derive(Debug, Clone)]
struct PostState {
    required: BTreeSet<usize>,
    domain: usize,
    seniority: usize,
    min_years: u32,
    min_degree: usize,
    title: usize,
    city: usize,
    salary_lo: u32,
    salary_hi: u32,
    job_type: usize,
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [String]) -> &'a str {
    items.choose(rng).expect("non-empty lexicon list")
}

fn mention<R: Rng>(rng: &mut R, kind: &str, canonical: &str) -> String {
    pick(rng, lexicon().mentions(kind, canonical)).to_string()
}

fn sample_skills<R: Rng>(rng: &mut R, universe: usize, lo: usize, hi: usize) -> BTreeSet<usize> {
    let n = rng.random_range(lo..=hi.min(universe));
    let mut all: Vec<usize> = (0..universe).collect();
    all.shuffle(rng);
    all.into_iter().take(n).collect()
}

fn candidate_latent(cfg: &GeneratorConfig, c: &CandidateState) -> Vec<f64> {
    let mut u = vec![0.0; cfg.latent_width()];
    for &s in &c.skills {
        u[s] = 1.0;
    }
    u[cfg.latent_dim + c.domain] = 1.0;
    u[cfg.latent_dim + cfg.domains] = f64::from(c.years.min(10)) / 10.0;
    let rank = lexicon().university_rank(&format!("U{}", c.university));
    u[cfg.latent_dim + cfg.domains + 1] = tier_score(tier_for_rank(rank));
    u
}

fn post_requirement(cfg: &GeneratorConfig, p: &PostState) -> Vec<f64> {
    let mut v = vec![0.0; cfg.latent_width()];
    let per_skill = cfg.skill_weight / p.required.len() as f64;
    for &s in &p.required {
        v[s] = per_skill;
    }
    v[cfg.latent_dim + p.domain] = cfg.domain_weight;
    let level = p.seniority as f64 / 2.0;
    v[cfg.latent_dim + cfg.domains] =
        cfg.experience_weight * (1.0 + cfg.seniority_modulation * (level - 0.5));
    v[cfg.latent_dim + cfg.domains + 1] = cfg.education_weight;
    v
}

fn new_candidate<R: Rng>(rng: &mut R, cfg: &GeneratorConfig) -> CandidateState {
    let lex = lexicon();
    let years = rng.random_range(0..=15);
    CandidateState {
        skills: sample_skills(rng, cfg.latent_dim, 2, 5),
        domain: rng.random_range(0..cfg.domains),
        years,
        university: rng.random_range(1..=UNIVERSITY_COUNT),
        degree: *[0usize, 0, 0, 1, 1, 2].choose(rng).unwrap(),
        major: rng.random_range(0..lex.canonicals("major").len()),
        gender: rng.random_range(0..GENDERS.len()),
        city: rng.random_range(0..CITIES.len()),
        age: 22 + years + rng.random_range(0..=3),
        grad_year: 2024 - years - rng.random_range(0..=1),
        position: rng.random_range(0..lex.canonicals("position").len()),
        duration_months: rng.random_range(3..=60),
        jobs: rng.random_range(1..=years / 2 + 1),
        english: rng.random_range(0..lex.canonicals("english").len()),
        certificate: rng
            .random_bool(0.5)
            .then(|| rng.random_range(0..CERTIFICATES.len())),
        salary: 8 + 2 * years + rng.random_range(0..=8),
        job_type: if rng.random_bool(0.8) { 0 } else { rng.random_range(1..3) },
    }
}

fn new_post<R: Rng>(rng: &mut R, cfg: &GeneratorConfig) -> PostState {
    let seniority = rng.random_range(0..3);
    let min_years = match seniority {
        0 => rng.random_range(0..=1),
        1 => rng.random_range(2..=4),
        _ => rng.random_range(5..=8),
    };
    let salary_lo = 10 + 10 * seniority as u32 + rng.random_range(0..=5);
    PostState {
        required: sample_skills(rng, cfg.latent_dim, 1, 4),
        domain: rng.random_range(0..cfg.domains),
        seniority,
        min_years,
        min_degree: rng.random_range(0..2),
        title: rng.random_range(0..lexicon().canonicals("title").len()),
        city: rng.random_range(0..CITIES.len()),
        salary_lo,
        salary_hi: salary_lo + rng.random_range(5..=10),
        job_type: if rng.random_bool(0.9) { 0 } else { rng.random_range(1..3) },
    }
}

fn resume_doc<R: Rng>(rng: &mut R, c: &CandidateState) -> Document {
    let lex = lexicon();
    let skills = lex.canonicals("skill");
    let mut d = Document::default();
    d.set("demographics", "age", c.age.to_string());
    d.set("demographics", "gender", GENDERS[c.gender]);
    d.set("demographics", "location", CITIES[c.city]);
    d.set(
        "education",
        "school",
        mention(rng, "university", &format!("U{}", c.university)),
    );
    d.set(
        "education",
        "degree",
        mention(rng, "degree", &lex.canonicals("degree")[c.degree]),
    );
    d.set(
        "education",
        "major",
        mention(rng, "major", &lex.canonicals("major")[c.major]),
    );
    d.set("education", "graduated", c.grad_year.to_string());
    d.set("experience", "years", format!("{} years", c.years));
    let position = &lex.canonicals("position")[c.position];
    let position_mention = mention(rng, "position", position);
    d.set("experience", "last_position", position_mention.clone());
    d.set("experience", "industry", DOMAINS[c.domain]);
    d.set("experience", "duration", format!("{} months", c.duration_months));
    d.set("experience", "jobs", c.jobs.to_string());
    let mut skill_mentions: Vec<String> = c
        .skills
        .iter()
        .map(|&s| mention(rng, "skill", &skills[s]))
        .collect();
    skill_mentions.shuffle(rng);
    let sep = *[", ", "; ", " / "].choose(rng).unwrap();
    d.set("skills", "list", skill_mentions.join(sep));
    d.set(
        "languages",
        "english",
        mention(rng, "english", &lex.canonicals("english")[c.english]),
    );
    if let Some(cert) = c.certificate {
        d.set("certificates", "name", CERTIFICATES[cert]);
    }
    d.set("expectations", "salary", format!("{}k", c.salary));
    d.set(
        "expectations",
        "job_type",
        mention(rng, "job_type", &lex.canonicals("job_type")[c.job_type]),
    );

    let domain = DOMAINS[c.domain];
    let mut sentences = vec![
        match rng.random_range(0..3) {
            0 => format!("i spent {} years in the {} industry", c.years.max(1), domain),
            1 => format!("most of my work has been in {domain}"),
            _ => format!("my background is in {domain} projects"),
        },
        format!("my last role was {position_mention}"),
        format!(
            "i use {} every day",
            skill_mentions.choose(rng).expect("candidates have skills")
        ),
    ];
    let fillers = rng.random_range(1..=3);
    sentences.extend(
        RESUME_FILLERS
            .choose_multiple(rng, fillers)
            .map(|s| s.to_string()),
    );
    // The summary sentence stays first; the rest is in arbitrary order.
    sentences[1..].shuffle(rng);
    d.sentences = sentences;
    d
}

fn post_doc<R: Rng>(rng: &mut R, p: &PostState) -> Document {
    let lex = lexicon();
    let skills = lex.canonicals("skill");
    let mut d = Document::default();
    let title = &lex.canonicals("title")[p.title];
    let title_mention = mention(rng, "title", title);
    d.set("job", "title", title_mention.clone());
    d.set("job", "seniority", SENIORITY[p.seniority]);
    d.set("job", "location", CITIES[p.city]);
    d.set(
        "job",
        "type",
        mention(rng, "job_type", &lex.canonicals("job_type")[p.job_type]),
    );
    let mut req: Vec<String> = p
        .required
        .iter()
        .map(|&s| mention(rng, "skill", &skills[s]))
        .collect();
    req.shuffle(rng);
    d.set("requirements", "skills", req.join(", "));
    d.set("requirements", "experience", format!("{}+ years", p.min_years));
    d.set(
        "requirements",
        "degree",
        mention(rng, "degree", &lex.canonicals("degree")[p.min_degree]),
    );
    d.set("company", "industry", DOMAINS[p.domain]);
    d.set(
        "compensation",
        "salary",
        format!("{}k-{}k", p.salary_lo, p.salary_hi),
    );

    let domain = DOMAINS[p.domain];
    let mut sentences = vec![
        match rng.random_range(0..3) {
            0 => format!("we are a {domain} company hiring a {title_mention}"),
            1 => format!("join our {domain} team"),
            _ => format!("our business is {domain} services"),
        },
        format!("you will build systems with {}", req.choose(rng).expect("posts require skills")),
    ];
    let fillers = rng.random_range(1..=2);
    sentences.extend(
        POST_FILLERS
            .choose_multiple(rng, fillers)
            .map(|s| s.to_string()),
    );
    sentences[1..].shuffle(rng);
    d.sentences = sentences;
    d
}

/// Replays the review process for a given global bar offset.
/// Returns `(labels, bar at review time)`.
fn simulate(
    cfg: &GeneratorConfig,
    offset: f64,
    post_base: &[f64],
    apps: &[(usize, usize)],
    scores: &[f64],
    flips: &[bool],
) -> (Vec<bool>, Vec<f64>) {
    let mut bars: Vec<f64> = post_base.iter().map(|b| b + offset).collect();
    let mut labels = Vec::with_capacity(apps.len());
    let mut seen = Vec::with_capacity(apps.len());
    for (t, &(_, p)) in apps.iter().enumerate() {
        let bar = bars[p];
        seen.push(bar);
        let label = (scores[t] > bar) != flips[t];
        let stepped = if label {
            bar + cfg.drift * cfg.bar_step_up
        } else {
            bar - cfg.drift * cfg.bar_step_down
        };
        let base = post_base[p] + offset;
        bars[p] = stepped + cfg.bar_reversion * (base - stepped);
        labels.push(label);
    }
    (labels, seen)
}

/// Deterministically builds a corpus from `(config, seed)`.
pub fn generate_synthetic(config: &GeneratorConfig, seed: u64) -> Result<Corpus> {
    config.validate()?;
    let cfg = config;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut candidates: Vec<CandidateState> =
        (0..cfg.candidates).map(|_| new_candidate(&mut rng, cfg)).collect();
    let posts: Vec<PostState> = (0..cfg.posts).map(|_| new_post(&mut rng, cfg)).collect();
    let requirements: Vec<Vec<f64>> = posts.iter().map(|p| post_requirement(cfg, p)).collect();
    let post_base: Vec<f64> = posts
        .iter()
        .map(|p| cfg.post_bar_spread * ((f64::from(p.salary_hi) - 27.5) / 12.5))
        .collect();

    // Application stream: who applies where, in review order.
    let mut applied: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cfg.candidates];
    let mut counters = vec![0u32; cfg.candidates];
    let mut apps = Vec::with_capacity(cfg.applications);
    let mut latents = Vec::with_capacity(cfg.applications);
    let mut planted = Vec::with_capacity(cfg.applications);
    let mut resumes = Vec::with_capacity(cfg.applications);
    let mut seq = Vec::with_capacity(cfg.applications);
    for _ in 0..cfg.applications {
        let c = rng.random_range(0..cfg.candidates);
        let mut p = rng.random_range(0..cfg.posts);
        for _ in 0..5 {
            if !applied[c].contains(&p) {
                break;
            }
            p = rng.random_range(0..cfg.posts);
        }
        applied[c].insert(p);
        if counters[c] > 0 && rng.random_bool(cfg.resume_mutation_prob) {
            let cand = &mut candidates[c];
            let old = **cand.skills.iter().collect::<Vec<_>>().choose(&mut rng).unwrap();
            let fresh: Vec<usize> = (0..cfg.latent_dim).filter(|s| !cand.skills.contains(s)).collect();
            if let Some(&new) = fresh.choose(&mut rng) {
                cand.skills.remove(&old);
                cand.skills.insert(new);
            }
        }
        counters[c] += 1;
        seq.push(counters[c]);
        latents.push(candidate_latent(cfg, &candidates[c]));
        let skill_names = lexicon().canonicals("skill");
        planted.push(candidates[c].skills.iter().map(|&s| skill_names[s].clone()).collect::<Vec<_>>());
        resumes.push(resume_doc(&mut rng, &candidates[c]));
        apps.push((c, p));
    }
    let scores: Vec<f64> = apps
        .iter()
        .zip(&latents)
        .map(|(&(_, p), u)| crate::scalar::dot(u, &requirements[p]))
        .collect();
    let flips: Vec<bool> = (0..cfg.applications)
        .map(|_| rng.random_bool(cfg.label_noise))
        .collect();

    // Calibrate the global bar offset so the accept rate hits the target.
    // The rate is non-increasing in the offset.
    let rate = |offset: f64| {
        let (labels, _) = simulate(cfg, offset, &post_base, &apps, &scores, &flips);
        labels.iter().filter(|&&l| l).count() as f64 / labels.len() as f64
    };
    let (mut lo, mut hi) = (-20.0, 20.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) > cfg.base_rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let offset = if (rate(lo) - cfg.base_rate).abs() <= (rate(hi) - cfg.base_rate).abs() {
        lo
    } else {
        hi
    };
    let (labels, bars) = simulate(cfg, offset, &post_base, &apps, &scores, &flips);

    let post_docs: BTreeMap<PostId, Document> = posts
        .iter()
        .enumerate()
        .map(|(j, p)| (PostId(j as u32), post_doc(&mut rng, p)))
        .collect();

    let mut records = Vec::with_capacity(cfg.applications);
    let mut record_truth = Vec::with_capacity(cfg.applications);
    for (t, resume) in resumes.into_iter().enumerate() {
        let (c, p) = apps[t];
        records.push(ApplicationRecord {
            candidate: CandidateId(c as u32),
            resume,
            post: PostId(p as u32),
            label: labels[t],
            review_time: t as u64 + 1,
            seq_index: seq[t],
        });
        record_truth.push(RecordTruth {
            latent: latents[t].clone(),
            skills: planted[t].clone(),
            score: scores[t],
            bar: bars[t],
            flipped: flips[t],
        });
    }
    let truth = GroundTruth {
        bar_offset: offset,
        posts: requirements
            .into_iter()
            .zip(&post_base)
            .map(|(requirement, b)| PostTruth {
                requirement,
                base_bar: b + offset,
            })
            .collect(),
        records: record_truth,
    };
    let manifest = Manifest {
        format_version: super::CORPUS_FORMAT_VERSION,
        seed,
        config: cfg.clone(),
    };
    Ok(Corpus::new(records, post_docs, manifest, Some(truth)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(drift: f64, noise: f64) -> GeneratorConfig {
        GeneratorConfig {
            candidates: 10,
            posts: 3,
            applications: 30,
            drift,
            label_noise: noise,
            ..GeneratorConfig::default()
        }
    }

    #[test]
    fn labels_are_recomputable_from_latents_without_drift_or_noise() {
        let corpus = generate_synthetic(&small(0.0, 0.0), 7).unwrap();
        let truth = corpus.truth.as_ref().unwrap();
        for (r, rt) in corpus.records.iter().zip(&truth.records) {
            let post = &truth.posts[r.post.0 as usize];
            let score = crate::scalar::dot(&rt.latent, &post.requirement);
            assert_eq!(r.label, score > post.base_bar);
        }
    }

    #[test]
    fn drift_flips_a_label_on_a_busy_post() {
        let a = generate_synthetic(&small(0.0, 0.0), 7).unwrap();
        let b = generate_synthetic(&small(0.5, 0.0), 7).unwrap();
        let mut per_post: BTreeMap<PostId, usize> = BTreeMap::new();
        for r in &a.records {
            *per_post.entry(r.post).or_default() += 1;
        }
        let flipped = a
            .records
            .iter()
            .zip(&b.records)
            .any(|(x, y)| per_post[&x.post] >= 3 && x.label != y.label);
        assert!(flipped);
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = generate_synthetic(&small(0.5, 0.1), 11).unwrap();
        let b = generate_synthetic(&small(0.5, 0.1), 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn structural_invariants_hold() {
        let c = generate_synthetic(&GeneratorConfig::default(), 3).unwrap();
        c.validate().unwrap();
    }

    #[test]
    fn base_rate_is_hit_within_five_points() {
        for (rate, drift, noise) in [(0.3, 0.0, 0.0), (0.5, 0.5, 0.1), (0.15, 0.5, 0.0)] {
            let cfg = GeneratorConfig {
                applications: 10_000,
                base_rate: rate,
                drift,
                label_noise: noise,
                ..GeneratorConfig::default()
            };
            let c = generate_synthetic(&cfg, 1).unwrap();
            let got = c.records.iter().filter(|r| r.label).count() as f64 / c.len() as f64;
            assert!((got - rate).abs() <= 0.05, "target {rate} got {got}");
        }
    }

    #[test]
    fn bad_configs_are_rejected() {
        let zero = GeneratorConfig {
            candidates: 0,
            ..GeneratorConfig::default()
        };
        assert!(generate_synthetic(&zero, 0).is_err());
        let noisy = GeneratorConfig {
            label_noise: 0.5,
            ..GeneratorConfig::default()
        };
        assert!(generate_synthetic(&noisy, 0).is_err());
        let negative = GeneratorConfig {
            drift: -0.1,
            ..GeneratorConfig::default()
        };
        assert!(generate_synthetic(&negative, 0).is_err());
    }
}
