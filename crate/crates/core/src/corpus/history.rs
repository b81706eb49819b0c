use std::collections::BTreeMap;

use super::{CandidateId, Corpus, PostId};

/// Per-post and per-candidate record lists in review order, so a record's
/// history is a prefix slice.
#[derive(Debug, Clone)]
pub struct HistoryIndex {
    by_post: BTreeMap<PostId, Vec<usize>>,
    by_candidate: BTreeMap<CandidateId, Vec<usize>>,
    /// For each record: its position in its post list and candidate list.
    positions: Vec<(usize, usize)>,
    keys: Vec<(PostId, CandidateId)>,
}

impl HistoryIndex {
    pub fn build(corpus: &Corpus) -> Self {
        let mut by_post: BTreeMap<PostId, Vec<usize>> = BTreeMap::new();
        let mut by_candidate: BTreeMap<CandidateId, Vec<usize>> = BTreeMap::new();
        let mut positions = Vec::with_capacity(corpus.len());
        let mut keys = Vec::with_capacity(corpus.len());
        for (i, r) in corpus.records.iter().enumerate() {
            let pl = by_post.entry(r.post).or_default();
            let cl = by_candidate.entry(r.candidate).or_default();
            positions.push((pl.len(), cl.len()));
            keys.push((r.post, r.candidate));
            pl.push(i);
            cl.push(i);
        }
        HistoryIndex {
            by_post,
            by_candidate,
            positions,
            keys,
        }
    }

    pub fn history_before(&self, record: usize) -> (&[usize], &[usize]) {
        let (pp, cp) = self.positions[record];
        let (post, cand) = self.keys[record];
        (&self.by_post[&post][..pp], &self.by_candidate[&cand][..cp])
    }
}

/// Quadratic reference scan: every record with the same post (resp.
/// candidate) and an earlier review time.
pub fn history_before_scan(corpus: &Corpus, record: usize) -> (Vec<usize>, Vec<usize>) {
    let q = &corpus.records[record];
    let earlier = |i: &usize| corpus.records[*i].review_time < q.review_time;
    let post = (0..corpus.len())
        .filter(|i| corpus.records[*i].post == q.post)
        .filter(earlier)
        .collect();
    let cand = (0..corpus.len())
        .filter(|i| corpus.records[*i].candidate == q.candidate)
        .filter(earlier)
        .collect();
    (post, cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ApplicationRecord, Document, Manifest};
    use crate::corpus::{generate_synthetic, GeneratorConfig};

    fn record(c: u32, p: u32, t: u64, k: u32) -> ApplicationRecord {
        ApplicationRecord {
            candidate: CandidateId(c),
            resume: Document::default(),
            post: PostId(p),
            label: false,
            review_time: t,
            seq_index: k,
        }
    }

    #[test]
    fn post_history_is_earlier_records_only() {
        let records = vec![
            record(0, 0, 1, 1),
            record(1, 1, 2, 1),
            record(2, 0, 4, 1),
            record(3, 0, 9, 1),
        ];
        let posts = [(PostId(0), Document::default()), (PostId(1), Document::default())]
            .into_iter()
            .collect();
        let manifest = Manifest {
            format_version: 1,
            seed: 0,
            config: GeneratorConfig::default(),
        };
        let c = Corpus::new(records, posts, manifest, None);
        let (post, cand) = c.history_before(3);
        let times: Vec<u64> = post.iter().map(|&i| c.records[i].review_time).collect();
        assert_eq!(times, vec![1, 4]);
        assert!(cand.is_empty());
        assert_eq!(c.history_before(0), (&[][..], &[][..]));
    }

    #[test]
    fn index_agrees_with_quadratic_scan() {
        let cfg = GeneratorConfig {
            candidates: 40,
            posts: 7,
            applications: 400,
            ..GeneratorConfig::default()
        };
        let c = generate_synthetic(&cfg, 5).unwrap();
        for i in 0..c.len() {
            let (p, k) = c.history_before(i);
            let (ps, ks) = history_before_scan(&c, i);
            assert_eq!(p, &ps[..]);
            assert_eq!(k, &ks[..]);
            assert!(!p.contains(&i) && !k.contains(&i));
        }
    }
}
