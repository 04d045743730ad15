//! Offline search for blow-up programs, used to author scenario files.
//!
//! Candidate points at each step are the nodes, the points where two curves
//! meet, the points where three mutually meeting curves may be taken to
//! concur and, optionally, a general point of each curve. Blow-ups at points
//! that already existed before the previous step commute with it, so such
//! runs are tried in one order only.

use std::ops::RangeInclusive;

use super::{blow_up, find_chains, ChainEmbedding, Configuration, PointSpec, I9};
use crate::hjcf::Chain;

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub max_steps: usize,
    /// Also try a general point of every curve.
    pub free_points: bool,
    /// Stop after this many programs.
    pub limit: usize,
    /// Try commuting steps in one order only.
    pub prune_commuting: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { max_steps: 4, free_points: false, limit: 100, prune_commuting: true }
    }
}

#[derive(Debug, Clone)]
pub struct Found {
    pub steps: Vec<PointSpec>,
    pub chains: Vec<ChainEmbedding>,
    pub config: Configuration,
}

type Key = (bool, Vec<String>);

fn point_key(p: &PointSpec) -> Key {
    let mut ids: Vec<String> = p.multiplicities().into_iter().map(|(id, _)| id).collect();
    ids.sort();
    (p.node_of.is_some(), ids)
}

/// Points worth blowing up on `c`, in a fixed order.
pub fn candidate_points(c: &Configuration, free_points: bool) -> Vec<PointSpec> {
    let ids: Vec<&str> = c.curves().map(|cv| cv.id.as_str()).collect();
    let mut out = Vec::new();
    for cv in c.curves() {
        if cv.node_count > 0 {
            out.push(PointSpec::node(&cv.id));
        }
    }
    for (i, a) in ids.iter().enumerate() {
        for (j, b) in ids.iter().enumerate().skip(i + 1) {
            if c.pairing(a, b) < 1 {
                continue;
            }
            out.push(PointSpec::on(&[a, b]));
            for d in &ids[j + 1..] {
                if c.pairing(a, d) >= 1 && c.pairing(b, d) >= 1 {
                    out.push(PointSpec::on(&[a, b, d]));
                }
            }
        }
    }
    if free_points {
        out.extend(ids.iter().map(|id| PointSpec::on(&[id])));
    }
    out
}

/// Depth-first search for programs of at most `opts.max_steps` blow-ups after
/// which every target chain is placed and `accept` holds. Programs are not
/// extended once accepted.
pub fn search_programs(
    start: &Configuration,
    targets: &[Chain],
    opts: &SearchOptions,
    accept: &mut dyn FnMut(&Configuration, &[ChainEmbedding]) -> bool,
) -> Vec<Found> {
    let mut out = Vec::new();
    let mut steps = Vec::new();
    dfs(start, targets, opts, accept, &mut steps, None, &mut out);
    out
}

fn dfs(
    c: &Configuration,
    targets: &[Chain],
    opts: &SearchOptions,
    accept: &mut dyn FnMut(&Configuration, &[ChainEmbedding]) -> bool,
    steps: &mut Vec<PointSpec>,
    last: Option<(Key, String)>,
    out: &mut Vec<Found>,
) {
    if out.len() >= opts.limit {
        return;
    }
    if let Ok(chains) = find_chains(c, targets) {
        if accept(c, &chains) {
            out.push(Found { steps: steps.clone(), chains, config: c.clone() });
            return;
        }
    }
    if steps.len() == opts.max_steps {
        return;
    }
    for p in candidate_points(c, opts.free_points) {
        let k = point_key(&p);
        if opts.prune_commuting {
            if let Some((lk, le)) = &last {
                if !k.1.contains(le) && k < *lk {
                    continue;
                }
            }
        }
        let Ok(next) = blow_up(c, &p) else { continue };
        let e = c.fresh_exceptional_id();
        steps.push(p);
        dfs(&next, targets, opts, accept, steps, Some((k, e)), out);
        steps.pop();
        if out.len() >= opts.limit {
            return;
        }
    }
}

/// Variants of `base` in which the bisections `S1`, `S2` meet the fibration
/// as a bisection must: twice with the I9 fiber, possibly on one component,
/// twice with `F`, and each other `n` times for `n` in `s12`. Dihedral
/// symmetry of the I9 cycle is used to start `S1` at `A1` with its second
/// contact among `A1..A5`.
pub fn bisection_incidences(base: &Configuration, s12: RangeInclusive<i64>) -> Vec<Configuration> {
    let contacts = |pts: [usize; 2]| {
        let mut m = [0i64; 9];
        for i in pts {
            m[i] += 1;
        }
        m
    };
    let mut out = Vec::new();
    for j in 0..5 {
        let s1 = contacts([0, j]);
        for a in 0..9 {
            for b in a..9 {
                let s2 = contacts([a, b]);
                for n in s12.clone() {
                    let mut c = base.clone();
                    for (i, comp) in I9.iter().enumerate() {
                        c.set_pairing("S1", comp, s1[i]).unwrap();
                        c.set_pairing("S2", comp, s2[i]).unwrap();
                    }
                    c.set_pairing("S1", "F", 2).unwrap();
                    c.set_pairing("S2", "F", 2).unwrap();
                    c.set_pairing("S1", "S2", n).unwrap();
                    out.push(c);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::preset;

    fn ch(e: &[u64]) -> Chain {
        Chain::new(e.to_vec()).unwrap()
    }

    #[test]
    fn single_node_gives_a_four() {
        let c = preset("enriques_kondo").unwrap();
        let opts = SearchOptions { max_steps: 1, ..Default::default() };
        let found = search_programs(&c, &[ch(&[4])], &opts, &mut |_, _| true);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].steps, vec![PointSpec::node("F")]);
        assert_eq!(found[0].chains[0].curves, vec!["F"]);
    }

    #[test]
    fn limit_and_accept_are_honoured() {
        let c = preset("enriques_kondo").unwrap();
        let opts = SearchOptions { max_steps: 2, limit: 3, ..Default::default() };
        assert_eq!(search_programs(&c, &[ch(&[4])], &opts, &mut |_, _| true).len(), 3);
        let opts = SearchOptions { max_steps: 2, ..Default::default() };
        assert!(search_programs(&c, &[ch(&[4])], &opts, &mut |_, _| false).is_empty());
    }

    #[test]
    fn incidences_respect_the_fibration() {
        let base = preset("enriques_kondo").unwrap();
        let v = bisection_incidences(&base, 0..=2);
        assert_eq!(v.len(), 5 * 45 * 3);
        for c in &v {
            for s in ["S1", "S2"] {
                assert_eq!(I9.iter().map(|a| c.pairing(s, a)).sum::<i64>(), 2);
                assert_eq!(c.pairing(s, "F"), 2);
            }
        }
    }
}
