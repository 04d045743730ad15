//! Curve configurations on a surface and the blow-up calculus.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::hjcf::Chain;

pub mod search;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConfigError {
    #[error("unknown curve `{0}`")]
    UnknownCurve(String),
    #[error("curve `{0}` already exists")]
    DuplicateCurve(String),
    #[error("curve `{0}` listed twice at one point")]
    DuplicateIncidence(String),
    #[error("curve `{0}` has no node to blow up")]
    NoNode(String),
    #[error("multiplicity of `{0}` must be at least 1")]
    ZeroMultiplicity(String),
    #[error("pairing of `{0}` with itself; self-nodes belong in node_count")]
    SelfPairing(String),
    #[error("negative pairing {value} between `{a}` and `{b}`")]
    NegativePairing { a: String, b: String, value: i64 },
    #[error("`{a}` and `{b}` consume {consumed} at this point but only meet {available} times")]
    OverConsumed { a: String, b: String, consumed: i64, available: i64 },
    #[error("consumed pair `{a}`/`{b}` is not incident to the point")]
    ConsumeNotIncident { a: String, b: String },
    #[error("adjunction ledger broken on `{0}`")]
    Adjunction(String),
    #[error("ambient invariants inconsistent: {0}")]
    Ambient(String),
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error("blow-up step {index}: {source}")]
    AtStep {
        index: usize,
        #[source]
        source: Box<ConfigError>,
    },
}

/// `(e, sigma, K^2, b2, b2+, b2-, p_g, q)`; every surface in scope has `b1 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InvariantSet {
    pub e: i64,
    pub sigma: i64,
    #[serde(rename = "K2")]
    pub k2: i64,
    pub b2: i64,
    pub b2_plus: i64,
    pub b2_minus: i64,
    pub p_g: i64,
    pub q: i64,
}

impl InvariantSet {
    /// Fills in the dependent entries from `e`, `sigma`, `p_g`, `q`.
    pub fn from_basic(e: i64, sigma: i64, p_g: i64, q: i64) -> Self {
        let b2 = e - 2;
        InvariantSet {
            e,
            sigma,
            k2: 2 * e + 3 * sigma,
            b2,
            b2_plus: (b2 + sigma).div_euclid(2),
            b2_minus: (b2 - sigma).div_euclid(2),
            p_g,
            q,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.k2 != 2 * self.e + 3 * self.sigma {
            out.push(format!("K2 = {} but 2e + 3sigma = {}", self.k2, 2 * self.e + 3 * self.sigma));
        }
        if self.b2 != self.e - 2 {
            out.push(format!("b2 = {} but e - 2 = {}", self.b2, self.e - 2));
        }
        if 2 * self.b2_plus != self.b2 + self.sigma {
            out.push(format!("b2+ = {} does not equal (b2 + sigma)/2", self.b2_plus));
        }
        if 2 * self.b2_minus != self.b2 - self.sigma {
            out.push(format!("b2- = {} does not equal (b2 - sigma)/2", self.b2_minus));
        }
        if self.b2_plus < 0 || self.b2_minus < 0 || self.p_g < 0 || self.q < 0 {
            out.push("negative Betti or Hodge number".to_string());
        }
        if self.b2_plus != 2 * self.p_g + 1 {
            out.push(format!("b2+ = {} but 2p_g + 1 = {}", self.b2_plus, 2 * self.p_g + 1));
        }
        out
    }

    pub fn blown_up(&self) -> Self {
        InvariantSet {
            e: self.e + 1,
            sigma: self.sigma - 1,
            k2: self.k2 - 1,
            b2: self.b2 + 1,
            b2_minus: self.b2_minus + 1,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Curve {
    pub id: String,
    pub self_int: i64,
    pub genus: i64,
    pub k_degree: i64,
    pub node_count: i64,
    pub labels: BTreeSet<String>,
}

impl Curve {
    pub fn new(id: &str, self_int: i64, genus: i64, k_degree: i64, node_count: i64) -> Self {
        Curve {
            id: id.to_string(),
            self_int,
            genus,
            k_degree,
            node_count,
            labels: BTreeSet::new(),
        }
    }

    pub fn with_label(mut self, label: &str) -> Self {
        self.labels.insert(label.to_string());
        self
    }

    /// `C^2 + K.C - (2 p_a - 2)`; zero when the ledger balances.
    pub fn adjunction_defect(&self) -> i64 {
        self.self_int + self.k_degree - (2 * (self.genus + self.node_count) - 2)
    }

    /// Smooth rational curve: genus 0 and no nodes.
    pub fn is_smooth_rational(&self) -> bool {
        self.genus == 0 && self.node_count == 0
    }
}

fn key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    curves: BTreeMap<String, Curve>,
    pairings: BTreeMap<(String, String), i64>,
    pub ambient: InvariantSet,
    /// Order of the ambient fundamental group when finite cyclic.
    pub pi1_order: Option<u64>,
}

impl Configuration {
    pub fn empty(ambient: InvariantSet, pi1_order: Option<u64>) -> Self {
        Configuration {
            curves: BTreeMap::new(),
            pairings: BTreeMap::new(),
            ambient,
            pi1_order,
        }
    }

    pub fn curves(&self) -> impl Iterator<Item = &Curve> {
        self.curves.values()
    }

    pub fn curve(&self, id: &str) -> Result<&Curve, ConfigError> {
        self.curves.get(id).ok_or_else(|| ConfigError::UnknownCurve(id.to_string()))
    }

    pub fn curve_mut(&mut self, id: &str) -> Result<&mut Curve, ConfigError> {
        self.curves.get_mut(id).ok_or_else(|| ConfigError::UnknownCurve(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.curves.contains_key(id)
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    pub fn add_curve(&mut self, c: Curve) -> Result<(), ConfigError> {
        if self.curves.contains_key(&c.id) {
            return Err(ConfigError::DuplicateCurve(c.id));
        }
        self.curves.insert(c.id.clone(), c);
        Ok(())
    }

    pub fn pairing(&self, a: &str, b: &str) -> i64 {
        self.pairings.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Nonzero pairings as `(a, b, n)` with `a < b`.
    pub fn pairings(&self) -> impl Iterator<Item = (&str, &str, i64)> {
        self.pairings.iter().map(|((a, b), &n)| (a.as_str(), b.as_str(), n))
    }

    pub fn neighbors<'a>(&'a self, id: &'a str) -> impl Iterator<Item = (&'a str, i64)> + 'a {
        self.pairings.iter().filter_map(move |((a, b), &n)| {
            if a == id {
                Some((b.as_str(), n))
            } else if b == id {
                Some((a.as_str(), n))
            } else {
                None
            }
        })
    }

    pub fn set_pairing(&mut self, a: &str, b: &str, n: i64) -> Result<(), ConfigError> {
        if a == b {
            return Err(ConfigError::SelfPairing(a.to_string()));
        }
        for id in [a, b] {
            self.curve(id)?;
        }
        if n < 0 {
            return Err(ConfigError::NegativePairing {
                a: a.to_string(),
                b: b.to_string(),
                value: n,
            });
        }
        if n == 0 {
            self.pairings.remove(&key(a, b));
        } else {
            self.pairings.insert(key(a, b), n);
        }
        Ok(())
    }

    fn fresh_exceptional_id(&self) -> String {
        (1..)
            .map(|k| format!("E{k}"))
            .find(|id| !self.curves.contains_key(id))
            .unwrap()
    }
}

/// A point to blow up, described by the curves through it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PointSpec {
    pub incidences: Vec<(String, u32)>,
    pub node_of: Option<String>,
    /// Local intersection consumed per incident pair; default `m_i * m_j`.
    pub pairwise_local: BTreeMap<(String, String), i64>,
    /// Name of the exceptional curve; `E<k>` for the least free `k` otherwise.
    pub exceptional: Option<String>,
}

impl PointSpec {
    pub fn on(ids: &[&str]) -> Self {
        PointSpec {
            incidences: ids.iter().map(|s| (s.to_string(), 1)).collect(),
            ..Default::default()
        }
    }

    pub fn node(id: &str) -> Self {
        PointSpec {
            node_of: Some(id.to_string()),
            ..Default::default()
        }
    }

    pub fn named(mut self, name: &str) -> Self {
        self.exceptional = Some(name.to_string());
        self
    }

    pub fn consume(mut self, a: &str, b: &str, n: i64) -> Self {
        self.pairwise_local.insert(key(a, b), n);
        self
    }

    /// Every curve through the point with its local multiplicity.
    pub fn multiplicities(&self) -> Vec<(String, u32)> {
        let mut v = self.incidences.clone();
        if let Some(n) = &self.node_of {
            v.push((n.clone(), 2));
        }
        v
    }
}

pub fn blow_up(c: &Configuration, p: &PointSpec) -> Result<Configuration, ConfigError> {
    let mut out = c.clone();
    let mults = p.multiplicities();
    let mut seen = BTreeSet::new();
    for (id, m) in &mults {
        c.curve(id)?;
        if !seen.insert(id.as_str()) {
            return Err(ConfigError::DuplicateIncidence(id.clone()));
        }
        if *m == 0 {
            return Err(ConfigError::ZeroMultiplicity(id.clone()));
        }
    }
    if let Some(n) = &p.node_of {
        if c.curve(n)?.node_count < 1 {
            return Err(ConfigError::NoNode(n.clone()));
        }
    }
    for (a, b) in p.pairwise_local.keys() {
        if !seen.contains(a.as_str()) || !seen.contains(b.as_str()) {
            return Err(ConfigError::ConsumeNotIncident { a: a.clone(), b: b.clone() });
        }
    }

    let e_id = match &p.exceptional {
        Some(id) => id.clone(),
        None => c.fresh_exceptional_id(),
    };
    out.add_curve(Curve::new(&e_id, -1, 0, -1, 0).with_label("exceptional"))?;

    for (i, (a, ma)) in mults.iter().enumerate() {
        for (b, mb) in &mults[i + 1..] {
            let consumed = p
                .pairwise_local
                .get(&key(a, b))
                .copied()
                .unwrap_or((*ma as i64) * (*mb as i64));
            let available = c.pairing(a, b);
            if consumed > available {
                return Err(ConfigError::OverConsumed {
                    a: a.clone(),
                    b: b.clone(),
                    consumed,
                    available,
                });
            }
            out.set_pairing(a, b, available - consumed)?;
        }
    }
    for (id, m) in &mults {
        let m = *m as i64;
        let curve = out.curve_mut(id)?;
        curve.self_int -= m * m;
        curve.k_degree += m;
        if p.node_of.as_deref() == Some(id.as_str()) {
            curve.node_count -= 1;
        }
        if curve.adjunction_defect() != 0 {
            return Err(ConfigError::Adjunction(id.clone()));
        }
        out.set_pairing(id, &e_id, m)?;
    }
    out.ambient = c.ambient.blown_up();
    Ok(out)
}

pub fn run_program(c: &Configuration, steps: &[PointSpec]) -> Result<Configuration, ConfigError> {
    steps.iter().enumerate().try_fold(c.clone(), |acc, (index, s)| {
        blow_up(&acc, s).map_err(|e| ConfigError::AtStep {
            index,
            source: Box::new(e),
        })
    })
}

/// Like `run_program` but keeps every intermediate configuration,
/// starting with `c` itself.
pub fn run_program_traced(
    c: &Configuration,
    steps: &[PointSpec],
) -> Result<Vec<Configuration>, ConfigError> {
    let mut out = vec![c.clone()];
    for (index, s) in steps.iter().enumerate() {
        let next = blow_up(out.last().unwrap(), s).map_err(|e| ConfigError::AtStep {
            index,
            source: Box::new(e),
        })?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

pub fn adjunction_audit(c: &Configuration) -> Vec<Violation> {
    let mut out: Vec<Violation> = c
        .curves()
        .filter(|cv| cv.adjunction_defect() != 0 || cv.genus < 0 || cv.node_count < 0)
        .map(|cv| Violation {
            subject: cv.id.clone(),
            message: format!(
                "{} + {} != 2({} + {}) - 2",
                cv.self_int, cv.k_degree, cv.genus, cv.node_count
            ),
        })
        .collect();
    for (a, b, n) in c.pairings() {
        if n < 0 || a == b {
            out.push(Violation {
                subject: format!("{a}.{b}"),
                message: format!("illegal pairing {n}"),
            });
        }
    }
    out.extend(c.ambient.violations().into_iter().map(|message| Violation {
        subject: "ambient".to_string(),
        message,
    }));
    out
}

/// Total pairing of `id` with a set of curves, e.g. a fiber.
pub fn degree_against(c: &Configuration, id: &str, set: &[&str]) -> i64 {
    set.iter().map(|s| c.pairing(id, s)).sum()
}

pub const I9: [&str; 9] = ["A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9"];

fn kondo_curves(c: &mut Configuration, suffix: &str, section_self_int: i64, bisection: bool) {
    let name = |s: &str| format!("{s}{suffix}");
    for a in I9 {
        c.add_curve(Curve::new(&name(a), -2, 0, 0, 0).with_label("fiber-component"))
            .unwrap();
    }
    for i in 0..9 {
        c.set_pairing(&name(I9[i]), &name(I9[(i + 1) % 9]), 1).unwrap();
    }
    c.add_curve(Curve::new(&name("F"), 0, 0, 0, 1).with_label("nodal-fiber"))
        .unwrap();
    let tag = if bisection { "bisection" } else { "section" };
    for s in ["S1", "S2"] {
        c.add_curve(Curve::new(&name(s), section_self_int, 0, 0, 0).with_label(tag))
            .unwrap();
    }
}

/// Named starting configurations.
///
/// `enriques_kondo`: Enriques surface with an elliptic fibration carrying an
/// I9 fiber `A1..A9`, a nodal fiber `F` and two bisections `S1`, `S2`. Where the
/// bisections meet the fibers is left to the scenario.
///
/// `k3_kondo_cover`: its K3 double cover. Every curve splits into copies with
/// suffixes `_a` and `_b`; the I9 copies form two I9 fibers and `S1_a`, `S2_a`,
/// `S1_b`, `S2_b` are sections.
pub fn preset(name: &str) -> Result<Configuration, ConfigError> {
    match name {
        "enriques_kondo" => {
            let mut c = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), Some(2));
            kondo_curves(&mut c, "", -2, true);
            Ok(c)
        }
        "k3_kondo_cover" => {
            let mut c = Configuration::empty(InvariantSet::from_basic(24, -16, 1, 0), Some(1));
            kondo_curves(&mut c, "_a", -2, false);
            kondo_curves(&mut c, "_b", -2, false);
            Ok(c)
        }
        other => Err(ConfigError::UnknownPreset(other.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainEmbedding {
    #[serde(serialize_with = "ser_chain")]
    pub target: Chain,
    pub curves: Vec<String>,
}

fn ser_chain<S: serde::Serializer>(c: &Chain, s: S) -> Result<S::Ok, S::Error> {
    c.entries().serialize(s)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no disjoint placement for target {target_index} ({target})")]
pub struct ChainSearchFailure {
    pub target_index: usize,
    pub target: Chain,
}

fn candidates(c: &Configuration, t: &Chain) -> Vec<Vec<String>> {
    let want = |i: usize| -(t.entries()[i] as i64);
    let eligible = |id: &str, i: usize| {
        let cv = c.curve(id).unwrap();
        cv.is_smooth_rational() && cv.self_int == want(i)
    };
    let mut out = Vec::new();
    let mut path: Vec<String> = Vec::new();

    fn extend(
        c: &Configuration,
        t: &Chain,
        path: &mut Vec<String>,
        out: &mut Vec<Vec<String>>,
        eligible: &dyn Fn(&str, usize) -> bool,
    ) {
        let i = path.len();
        if i == t.len() {
            out.push(path.clone());
            return;
        }
        let last = path.last().unwrap().clone();
        let mut next: Vec<&str> = c
            .neighbors(&last)
            .filter(|&(id, n)| n == 1 && eligible(id, i))
            .map(|(id, _)| id)
            .collect();
        next.sort_unstable();
        for id in next {
            if path.iter().any(|p| p == id)
                || path[..i - 1].iter().any(|p| c.pairing(p, id) != 0)
            {
                continue;
            }
            path.push(id.to_string());
            extend(c, t, path, out, eligible);
            path.pop();
        }
    }

    for cv in c.curves() {
        if eligible(&cv.id, 0) {
            path.push(cv.id.clone());
            extend(c, t, &mut path, &mut out, &eligible);
            path.pop();
        }
    }
    out
}

fn compatible(c: &Configuration, a: &[String], b: &[String]) -> bool {
    a.iter().all(|x| b.iter().all(|y| x != y && c.pairing(x, y) == 0))
}

fn place(
    c: &Configuration,
    cands: &[Vec<Vec<String>>],
    chosen: &mut Vec<usize>,
) -> bool {
    let i = chosen.len();
    if i == cands.len() {
        return true;
    }
    for (k, cand) in cands[i].iter().enumerate() {
        if chosen
            .iter()
            .enumerate()
            .all(|(j, &kj)| compatible(c, &cands[j][kj], cand))
        {
            chosen.push(k);
            if place(c, cands, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Places each target chain on pairwise disjoint, non-touching curve paths.
/// The search is deterministic: curves are tried in id order.
pub fn find_chains(
    c: &Configuration,
    targets: &[Chain],
) -> Result<Vec<ChainEmbedding>, ChainSearchFailure> {
    let cands: Vec<_> = targets.iter().map(|t| candidates(c, t)).collect();
    for i in 0..targets.len() {
        let mut chosen = Vec::new();
        if !place(c, &cands[..=i], &mut chosen) {
            return Err(ChainSearchFailure {
                target_index: i,
                target: targets[i].clone(),
            });
        }
        if i + 1 == targets.len() {
            return Ok(chosen
                .iter()
                .enumerate()
                .map(|(j, &k)| ChainEmbedding {
                    target: targets[j].clone(),
                    curves: cands[j][k].clone(),
                })
                .collect());
        }
    }
    Ok(Vec::new())
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for cv in self.curves() {
            writeln!(
                f,
                "{}: C^2={} g={} K.C={} nodes={}",
                cv.id, cv.self_int, cv.genus, cv.k_degree, cv.node_count
            )?;
        }
        for (a, b, n) in self.pairings() {
            writeln!(f, "{a}.{b} = {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enriques() -> Configuration {
        preset("enriques_kondo").unwrap()
    }

    #[test]
    fn presets_are_consistent() {
        let y = enriques();
        assert!(adjunction_audit(&y).is_empty());
        assert_eq!((y.ambient.e, y.ambient.sigma, y.ambient.k2), (12, -8, 0));
        assert_eq!(y.pi1_order, Some(2));
        let k3 = preset("k3_kondo_cover").unwrap();
        assert!(adjunction_audit(&k3).is_empty());
        assert_eq!((k3.ambient.e, k3.ambient.sigma, k3.ambient.k2), (24, -16, 0));
        assert_eq!(k3.ambient.b2_plus, 3);
        assert_eq!(k3.curve_count(), 2 * y.curve_count());
        assert!(preset("quintic").is_err());
    }

    #[test]
    fn blow_up_general_point() {
        let y = enriques();
        let z = blow_up(&y, &PointSpec::default()).unwrap();
        assert_eq!((z.ambient.e, z.ambient.sigma, z.ambient.k2), (13, -9, -1));
        assert_eq!(z.curve("E1").unwrap().self_int, -1);
    }

    #[test]
    fn blow_up_node() {
        let v = blow_up(&enriques(), &PointSpec::node("F")).unwrap();
        let f = v.curve("F").unwrap();
        assert_eq!((f.self_int, f.k_degree, f.node_count), (-4, 2, 0));
        assert_eq!(v.pairing("F", "E1"), 2);
        assert!(adjunction_audit(&v).is_empty());
        assert_eq!(
            blow_up(&v, &PointSpec::node("F")),
            Err(ConfigError::NoNode("F".into()))
        );
    }

    #[test]
    fn blow_up_transverse_point() {
        let v = blow_up(&enriques(), &PointSpec::on(&["A1", "A2"]).named("X")).unwrap();
        assert_eq!(v.pairing("A1", "A2"), 0);
        assert_eq!(v.pairing("A1", "X"), 1);
        assert_eq!(v.pairing("A2", "X"), 1);
        assert_eq!(v.curve("A1").unwrap().self_int, -3);
    }

    #[test]
    fn blow_up_errors() {
        let y = enriques();
        assert!(matches!(
            blow_up(&y, &PointSpec::on(&["A1", "A3"])),
            Err(ConfigError::OverConsumed { .. })
        ));
        assert!(matches!(
            blow_up(&y, &PointSpec::on(&["Q"])),
            Err(ConfigError::UnknownCurve(_))
        ));
        assert!(matches!(
            blow_up(&y, &PointSpec::on(&["A1", "A1"])),
            Err(ConfigError::DuplicateIncidence(_))
        ));
        let mut double = PointSpec::on(&["A1"]);
        double.incidences[0].1 = 2;
        assert_eq!(blow_up(&y, &double), Err(ConfigError::Adjunction("A1".into())));
        let err = run_program(&y, &[PointSpec::default(), PointSpec::on(&["Q"])]).unwrap_err();
        assert!(matches!(err, ConfigError::AtStep { index: 1, .. }));
    }

    #[test]
    fn empty_program_is_identity() {
        assert_eq!(run_program(&enriques(), &[]).unwrap(), enriques());
    }

    #[test]
    fn tampered_curve_is_reported() {
        let mut y = enriques();
        y.curve_mut("A1").unwrap().self_int = -3;
        let v = adjunction_audit(&y);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].subject, "A1");
    }

    #[test]
    fn chains_in_small_configurations() {
        let mut c = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), None);
        c.add_curve(Curve::new("X", -4, 0, 2, 0)).unwrap();
        let got = find_chains(&c, &["4".parse().unwrap()]).unwrap();
        assert_eq!(got[0].curves, vec!["X".to_string()]);

        let mut d = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), None);
        d.add_curve(Curve::new("E1", -1, 0, -1, 0)).unwrap();
        d.add_curve(Curve::new("E2", -1, 0, -1, 0)).unwrap();
        d.set_pairing("E1", "E2", 1).unwrap();
        let fail = find_chains(&d, &["2,2".parse().unwrap()]).unwrap_err();
        assert_eq!(fail.target_index, 0);
    }

    #[test]
    fn chains_are_disjoint_and_unlinked() {
        // the I9 cycle holds a [2,2,2] and a disjoint [2,2,2] but not three of them
        // without touching
        let y = enriques();
        let t: Chain = "2,2,2".parse().unwrap();
        let two = find_chains(&y, &[t.clone(), t.clone()]).unwrap();
        assert!(compatible(&y, &two[0].curves, &two[1].curves));
        let fail = find_chains(&y, &[t.clone(), t.clone(), t]).unwrap_err();
        assert_eq!(fail.target_index, 2);
    }
}
