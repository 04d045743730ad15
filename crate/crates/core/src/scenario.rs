//! Scenario files.
//!
//! A scenario is a TOML document, schema version 1:
//!
//! ```toml
//! schema = 1
//! name = "demo"
//! description = "free text"
//! tags = ["..."]
//!
//! [surface]              # a preset, or explicit e / sigma / p_g / q / pi1_order
//! preset = "enriques_kondo"
//!
//! [curves.X]             # new curve, or field overrides of a preset curve
//! self_int = -1
//! genus = 0
//! k_degree = -1
//! nodes = 0
//! labels = ["extra"]
//!
//! [pairings]             # symmetric; a.b = n
//! S1.A1 = 1
//!
//! [[blowups]]            # ordered; later steps may name earlier exceptionals
//! name = "E1"            # optional, default E<k> with k least unused
//! at = ["S1", "A1"]      # curves through the point, multiplicity 1
//! node_of = "F"          # optional: the point is a node of F
//! mult = { S1 = 1 }      # optional multiplicities
//! consume = [{ a = "S1", b = "A1", n = 1 }]   # optional local numbers
//! marker = "dot"         # optional free-form tag
//!
//! [[chains]]
//! entries = [2, 2, 9, 2, 2, 2, 2, 4]
//! p = 19
//! q = 13
//!
//! [surgery]
//! context = "complex"    # or "symplectic"
//! expect = { e = 8, sigma = -4, K2 = 4, b2 = 6, b2_plus = 1, b2_minus = 5 }
//!
//! [pi1]
//! witness = "E15"
//! order = 2
//!
//! [cover]
//! split = { A1 = ["A1_a", "A1_b"] }   # every base curve; a string means connected
//! pairings = { S1_a.A1_b = 1 }
//! lift = [{ step = 3, first = ["S1_a", "A1_b"] }]
//! chains = [...]; surgery = {...}; pi1_order = 1
//! gram = { ids = [...], nonzero_det = true }
//! ```
//!
//! Unknown keys are errors. Every error carries a line and a key path.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Deserialize;
use toml::Spanned;

use crate::config::{preset, Configuration, Curve, InvariantSet, PointSpec};
use crate::cover::{split_names, Lift, SplittingDecl};
use crate::hjcf::{Chain, WahlParams};
use crate::surgery::SmoothingContext;

pub const SCHEMA: i64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub path: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "line {}: {}", self.line, self.message)
        } else {
            write!(f, "line {}, {}: {}", self.line, self.path, self.message)
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema: Option<Spanned<i64>>,
    #[serde(default)]
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    tags: Vec<String>,
    surface: Option<RawSurface>,
    #[serde(default)]
    curves: BTreeMap<Spanned<String>, RawCurve>,
    #[serde(default)]
    pairings: BTreeMap<Spanned<String>, BTreeMap<Spanned<String>, i64>>,
    #[serde(default)]
    blowups: Vec<RawBlowup>,
    #[serde(default)]
    chains: Vec<RawChain>,
    surgery: Option<RawSurgery>,
    pi1: Option<RawPi1>,
    cover: Option<RawCover>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurface {
    preset: Option<Spanned<String>>,
    e: Option<i64>,
    sigma: Option<i64>,
    p_g: Option<i64>,
    q: Option<i64>,
    pi1_order: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    self_int: Option<i64>,
    genus: Option<i64>,
    k_degree: Option<i64>,
    nodes: Option<i64>,
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConsume {
    a: Spanned<String>,
    b: Spanned<String>,
    n: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBlowup {
    name: Option<Spanned<String>>,
    #[serde(default)]
    at: Vec<Spanned<String>>,
    node_of: Option<Spanned<String>>,
    #[serde(default)]
    mult: BTreeMap<Spanned<String>, u32>,
    #[serde(default)]
    consume: Vec<RawConsume>,
    marker: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    entries: Spanned<Vec<u64>>,
    p: u64,
    q: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Expected {
    pub e: Option<i64>,
    pub sigma: Option<i64>,
    #[serde(rename = "K2")]
    pub k2: Option<i64>,
    pub b2: Option<i64>,
    pub b2_plus: Option<i64>,
    pub b2_minus: Option<i64>,
    pub p_g: Option<i64>,
}

impl Expected {
    /// `(name, expected)` for every declared entry.
    pub fn pairs(&self) -> Vec<(&'static str, i64)> {
        [
            ("e", self.e),
            ("sigma", self.sigma),
            ("K2", self.k2),
            ("b2", self.b2),
            ("b2_plus", self.b2_plus),
            ("b2_minus", self.b2_minus),
            ("p_g", self.p_g),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }

    pub fn lookup(inv: &InvariantSet, key: &str) -> i64 {
        match key {
            "e" => inv.e,
            "sigma" => inv.sigma,
            "K2" => inv.k2,
            "b2" => inv.b2,
            "b2_plus" => inv.b2_plus,
            "b2_minus" => inv.b2_minus,
            "p_g" => inv.p_g,
            _ => unreachable!("unknown invariant {key}"),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSurgery {
    context: SmoothingContext,
    #[serde(default)]
    expect: Expected,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPi1 {
    witness: Spanned<String>,
    order: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawLift {
    Connected(String),
    Split(Vec<String>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLiftOverride {
    step: usize,
    first: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGram {
    ids: Vec<Spanned<String>>,
    nonzero_det: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCover {
    #[serde(default)]
    split: BTreeMap<Spanned<String>, Spanned<RawLift>>,
    #[serde(default)]
    pairings: BTreeMap<Spanned<String>, BTreeMap<Spanned<String>, i64>>,
    #[serde(default)]
    lift: Vec<RawLiftOverride>,
    #[serde(default)]
    chains: Vec<RawChain>,
    surgery: Option<RawSurgery>,
    pi1_order: Option<u64>,
    gram: Option<RawGram>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainExpect {
    pub chain: Chain,
    pub wahl: WahlParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurgeryExpect {
    pub context: SmoothingContext,
    pub expect: Expected,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pi1Expect {
    pub witness: String,
    pub order: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GramExpect {
    pub ids: Vec<String>,
    pub nonzero_det: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSpec {
    pub decl: SplittingDecl,
    pub chains: Vec<ChainExpect>,
    pub surgery: Option<SurgeryExpect>,
    pub pi1_order: Option<u64>,
    pub gram: Option<GramExpect>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub tags: Vec<String>,
    pub surface_preset: Option<String>,
    pub initial: Configuration,
    pub steps: Vec<PointSpec>,
    pub markers: Vec<Option<String>>,
    pub chains: Vec<ChainExpect>,
    pub surgery: Option<SurgeryExpect>,
    pub pi1: Option<Pi1Expect>,
    pub cover: Option<CoverSpec>,
}

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn line(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    /// Spanned map keys show up as `?` in tracked paths; fill them from the
    /// dotted key written before the offending value, innermost first.
    fn name_keys(&self, path: &str, offset: usize) -> String {
        let before = &self.text[..offset.min(self.text.len())];
        let line = before.rsplit('\n').next().unwrap_or("");
        let key = line.trim_end().trim_end_matches('=').trim_end();
        let key: String = key
            .chars()
            .rev()
            .take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '"'))
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .collect();
        let mut parts: Vec<&str> = key.split('.').map(|k| k.trim_matches('"')).filter(|k| !k.is_empty()).collect();
        let mut segs: Vec<String> = path.split('.').map(String::from).collect();
        for seg in segs.iter_mut().rev() {
            if seg == "?" {
                match parts.pop() {
                    Some(k) => *seg = k.to_string(),
                    None => break,
                }
            }
        }
        segs.join(".")
    }

    fn err<T>(&self, span: Option<std::ops::Range<usize>>, path: impl Into<String>, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: span.map(|s| self.line(s.start)).unwrap_or(1),
            path: path.into(),
            message: message.into(),
        })
    }

    fn known(&self, ids: &BTreeSet<String>, s: &Spanned<String>, path: String) -> Result<String, ParseError> {
        if ids.contains(s.get_ref()) {
            Ok(s.get_ref().clone())
        } else {
            self.err(Some(s.span()), path, format!("reference to undeclared curve `{}`", s.get_ref()))
        }
    }

    fn chains(&self, raw: Vec<RawChain>, prefix: &str) -> Result<Vec<ChainExpect>, ParseError> {
        raw.into_iter()
            .enumerate()
            .map(|(i, c)| {
                let path = format!("{prefix}[{i}]");
                let span = c.entries.span();
                let chain = Chain::new(c.entries.into_inner())
                    .or_else(|e| self.err(Some(span.clone()), format!("{path}.entries"), e.to_string()))?;
                let wahl = WahlParams::new(c.p, c.q).or_else(|e| self.err(Some(span), path, e.to_string()))?;
                Ok(ChainExpect { chain, wahl })
            })
            .collect()
    }
}

fn surgery(raw: Option<RawSurgery>) -> Option<SurgeryExpect> {
    raw.map(|s| SurgeryExpect { context: s.context, expect: s.expect })
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ParseError> {
    let cx = Ctx { text };
    let de = toml::Deserializer::new(text);
    let raw: RawScenario = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let path = match inner.span() {
            Some(sp) if path.contains('?') => cx.name_keys(&path, sp.start),
            _ => path,
        };
        ParseError {
            line: inner.span().map(|s| cx.line(s.start)).unwrap_or(1),
            path: if path == "." { String::new() } else { path },
            message: inner.message().trim().to_string(),
        }
    })?;

    match &raw.schema {
        None if raw.surface.is_none() => return cx.err(None, "surface", "missing [surface]"),
        None => return cx.err(None, "schema", "missing `schema = 1`"),
        Some(s) if *s.get_ref() != SCHEMA => {
            return cx.err(Some(s.span()), "schema", format!("unsupported schema {}", s.get_ref()))
        }
        _ => {}
    }
    let Some(surface) = raw.surface else {
        return cx.err(None, "surface", "missing [surface]");
    };

    let mut initial = match &surface.preset {
        Some(p) => {
            if surface.e.is_some() || surface.sigma.is_some() || surface.p_g.is_some() || surface.q.is_some() {
                return cx.err(Some(p.span()), "surface", "give either a preset or explicit invariants");
            }
            let mut c = preset(p.get_ref()).or_else(|e| cx.err(Some(p.span()), "surface.preset", e.to_string()))?;
            if surface.pi1_order.is_some() {
                c.pi1_order = surface.pi1_order;
            }
            c
        }
        None => {
            let (Some(e), Some(sigma)) = (surface.e, surface.sigma) else {
                return cx.err(None, "surface", "explicit surfaces need `e` and `sigma`");
            };
            let inv = InvariantSet::from_basic(e, sigma, surface.p_g.unwrap_or(0), surface.q.unwrap_or(0));
            Configuration::empty(inv, surface.pi1_order)
        }
    };

    for (id, rc) in raw.curves {
        let path = format!("curves.{}", id.get_ref());
        let span = Some(id.span());
        let name = id.into_inner();
        if !initial.contains(&name) {
            let (Some(s), Some(k)) = (rc.self_int, rc.k_degree) else {
                return cx.err(span, path, "a new curve needs `self_int` and `k_degree`");
            };
            let mut c = Curve::new(&name, s, rc.genus.unwrap_or(0), k, rc.nodes.unwrap_or(0));
            c.labels = rc.labels.unwrap_or_default().into_iter().collect();
            initial.add_curve(c).expect("fresh id");
        } else {
            let c = initial.curve_mut(&name).expect("present");
            if let Some(v) = rc.self_int {
                c.self_int = v;
            }
            if let Some(v) = rc.genus {
                c.genus = v;
            }
            if let Some(v) = rc.k_degree {
                c.k_degree = v;
            }
            if let Some(v) = rc.nodes {
                c.node_count = v;
            }
            if let Some(v) = rc.labels {
                c.labels = v.into_iter().collect();
            }
        }
    }

    let mut ids: BTreeSet<String> = initial.curves().map(|c| c.id.clone()).collect();
    for (a, inner) in raw.pairings {
        let a_id = cx.known(&ids, &a, format!("pairings.{}", a.get_ref()))?;
        for (b, n) in inner {
            let path = format!("pairings.{}.{}", a_id, b.get_ref());
            let b_id = cx.known(&ids, &b, path.clone())?;
            if let Err(e) = initial.set_pairing(&a_id, &b_id, n) {
                return cx.err(Some(b.span()), path, e.to_string());
            }
        }
    }

    let base_ids = ids.clone();
    let mut steps = Vec::new();
    let mut markers = Vec::new();
    for (i, rb) in raw.blowups.into_iter().enumerate() {
        let path = |k: &str| format!("blowups[{i}].{k}");
        let mut p = PointSpec::default();
        for (j, s) in rb.at.iter().enumerate() {
            p.incidences.push((cx.known(&ids, s, format!("blowups[{i}].at[{j}]"))?, 1));
        }
        for (s, m) in &rb.mult {
            let id = cx.known(&ids, s, path("mult"))?;
            match p.incidences.iter_mut().find(|(x, _)| *x == id) {
                Some(inc) => inc.1 = *m,
                None => return cx.err(Some(s.span()), path("mult"), format!("`{id}` is not listed in `at`")),
            }
        }
        if let Some(n) = &rb.node_of {
            p.node_of = Some(cx.known(&ids, n, path("node_of"))?);
        }
        for (j, c) in rb.consume.iter().enumerate() {
            let a = cx.known(&ids, &c.a, format!("blowups[{i}].consume[{j}].a"))?;
            let b = cx.known(&ids, &c.b, format!("blowups[{i}].consume[{j}].b"))?;
            p = p.consume(&a, &b, c.n);
        }
        let name = match &rb.name {
            Some(n) => {
                if ids.contains(n.get_ref()) {
                    return cx.err(Some(n.span()), path("name"), format!("curve `{}` already exists", n.get_ref()));
                }
                n.get_ref().clone()
            }
            None => (1..).map(|k| format!("E{k}")).find(|x| !ids.contains(x)).unwrap(),
        };
        ids.insert(name.clone());
        p.exceptional = Some(name);
        steps.push(p);
        markers.push(rb.marker);
    }

    let chains = cx.chains(raw.chains, "chains")?;
    let pi1 = match raw.pi1 {
        Some(p) => Some(Pi1Expect {
            witness: cx.known(&ids, &p.witness, "pi1.witness".into())?,
            order: p.order,
        }),
        None => None,
    };

    let cover = match raw.cover {
        None => None,
        Some(rc) => {
            let mut decl = SplittingDecl::default();
            for (b, l) in rc.split {
                let id = cx.known(&base_ids, &b, format!("cover.split.{}", b.get_ref()))?;
                let span = l.span();
                let lift = match l.into_inner() {
                    RawLift::Connected(x) => Lift::Connected(x),
                    RawLift::Split(v) if v.len() == 2 => Lift::Split(v[0].clone(), v[1].clone()),
                    RawLift::Split(_) => {
                        return cx.err(Some(span), format!("cover.split.{id}"), "a split needs exactly two ids")
                    }
                };
                decl.curves.insert(id, lift);
            }
            // curves left out split with the default `_a` / `_b` names
            for id in &base_ids {
                decl.curves.entry(id.clone()).or_insert_with(|| split_names(id));
            }
            let mut cover_ids: BTreeSet<String> = BTreeSet::new();
            for l in decl.curves.values() {
                cover_ids.extend(l.ids().into_iter().map(String::from));
            }
            for s in &steps {
                if let Lift::Split(a, b) = split_names(s.exceptional.as_deref().unwrap()) {
                    cover_ids.insert(a);
                    cover_ids.insert(b);
                }
            }
            for (a, inner) in rc.pairings {
                let a_id = cx.known(&cover_ids, &a, format!("cover.pairings.{}", a.get_ref()))?;
                for (b, n) in inner {
                    let b_id = cx.known(&cover_ids, &b, format!("cover.pairings.{a_id}.{}", b.get_ref()))?;
                    decl.pairings.insert((a_id.clone().min(b_id.clone()), a_id.clone().max(b_id)), n);
                }
            }
            for (i, o) in rc.lift.into_iter().enumerate() {
                if o.step >= steps.len() {
                    return cx.err(None, format!("cover.lift[{i}].step"), format!("no blow-up step {}", o.step));
                }
                decl.step_overrides.insert(o.step, o.first);
            }
            let gram = match rc.gram {
                None => None,
                Some(g) => Some(GramExpect {
                    ids: g
                        .ids
                        .iter()
                        .enumerate()
                        .map(|(i, s)| cx.known(&cover_ids, s, format!("cover.gram.ids[{i}]")))
                        .collect::<Result<_, _>>()?,
                    nonzero_det: g.nonzero_det,
                }),
            };
            Some(CoverSpec {
                decl,
                chains: cx.chains(rc.chains, "cover.chains")?,
                surgery: surgery(rc.surgery),
                pi1_order: rc.pi1_order,
                gram,
            })
        }
    };

    Ok(Scenario {
        name: raw.name,
        description: raw.description,
        tags: raw.tags,
        surface_preset: surface.preset.map(|p| p.into_inner()),
        initial,
        steps,
        markers,
        chains,
        surgery: surgery(raw.surgery),
        pi1,
        cover,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINI: &str = r#"
schema = 1
name = "mini"

[surface]
preset = "enriques_kondo"

[pairings]
S1.A1 = 1
S1.A5 = 1

[[blowups]]
at = ["S1", "A1"]

[[blowups]]
name = "W"
at = ["E1", "S1"]
"#;

    #[test]
    fn parses_minimal() {
        let s = parse_scenario(MINI).unwrap();
        assert_eq!(s.steps.len(), 2);
        assert_eq!(s.steps[1].incidences[0].0, "E1");
        assert_eq!(s.initial.pairing("A1", "S1"), 1);
    }

    #[test]
    fn empty_document() {
        let e = parse_scenario("").unwrap_err();
        assert_eq!(e.message, "missing [surface]");
        let e = parse_scenario("[surface]\npreset = \"enriques_kondo\"\n").unwrap_err();
        assert!(e.message.contains("schema"));
        let e = parse_scenario("schema = 1\n").unwrap_err();
        assert_eq!(e.message, "missing [surface]");
    }

    #[test]
    fn dangling_reference_is_positioned() {
        let bad = MINI.replace("at = [\"E1\", \"S1\"]", "at = [\"E1\", \"S9\"]");
        let e = parse_scenario(&bad).unwrap_err();
        assert_eq!(e.line, 17);
        assert_eq!(e.path, "blowups[1].at[1]");
        assert!(e.message.contains("S9"));
    }

    #[test]
    fn unknown_key_and_type_mismatch() {
        let e = parse_scenario(&MINI.replace("name = \"W\"", "nam = \"W\"")).unwrap_err();
        assert!(e.message.contains("unknown field"), "{e}");
        assert_eq!(e.line, 16);
        let e = parse_scenario(&MINI.replace("S1.A5 = 1", "S1.A5 = \"one\"")).unwrap_err();
        assert_eq!(e.line, 10);
        assert!(e.path.contains("pairings"), "{e}");
        let e = parse_scenario("schema = 1\n[surface\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn explicit_surface() {
        let s = parse_scenario("schema = 1\n[surface]\ne = 12\nsigma = -8\npi1_order = 2\n").unwrap();
        assert_eq!(s.initial.ambient.k2, 0);
        assert_eq!(s.initial.curve_count(), 0);
        assert!(parse_scenario("schema = 2\n[surface]\ne = 1\nsigma = 0\n").is_err());
    }
}
