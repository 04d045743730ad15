//! The verification pipeline and its report.
//!
//! Sections run in order: `surface`, `program`, `chains`, `surgery`, `pi1`,
//! `cover`. A section whose input is missing because an earlier one failed is
//! `skipped`; a section the scenario does not declare is absent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::config::{
    adjunction_audit, degree_against, find_chains, run_program_traced, ChainEmbedding, Configuration, I9,
};
use crate::cover::{lift_program, Lift};
use crate::fundgroup::{minus_one_sphere_witness, pi1_after_blowdown, replay, CyclicGroup, Pi1Outcome, Rule};
use crate::hjcf::{wahl_recognize, Chain};
use crate::lattice::{boundary_group_order, det_exact, gram, is_negative_definite};
use crate::scenario::{ChainExpect, Expected, Scenario, SurgeryExpect};
use crate::surgery::{rational_blowdown, smoothing_ledger, Assumption, SmoothingContext, SurgeryResult};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Inconclusive => "inconclusive",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Section {
    pub status: Status,
    pub computed: Json,
    pub expected: Json,
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl Section {
    fn new() -> Self {
        Section {
            status: Status::Pass,
            computed: json!({}),
            expected: json!({}),
            failures: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn skipped(reason: &str) -> Self {
        Section {
            status: Status::Skipped,
            failures: vec![reason.to_string()],
            ..Section::new()
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
        self.status = Status::Fail;
    }

    fn inconclusive(&mut self, msg: impl Into<String>) {
        self.failures.push(msg.into());
        if self.status == Status::Pass {
            self.status = Status::Inconclusive;
        }
    }

    fn set(&mut self, key: &str, v: impl Serialize) {
        self.computed[key] = serde_json::to_value(v).expect("report values serialize");
    }

    fn expect(&mut self, key: &str, v: impl Serialize) {
        self.expected[key] = serde_json::to_value(v).expect("report values serialize");
    }

    fn finish(mut self, strict: bool) -> Self {
        if strict && !self.warnings.is_empty() {
            let w = self.warnings.clone();
            for m in w {
                self.fail(format!("strict: {m}"));
            }
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub scenario: String,
    pub status: Status,
    pub sections: BTreeMap<String, Section>,
    pub assumptions: Vec<Assumption>,
}

impl Report {
    pub fn failing_sections(&self) -> Vec<&str> {
        self.sections
            .iter()
            .filter(|(_, s)| matches!(s.status, Status::Fail | Status::Inconclusive))
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Options {
    /// Treat warnings as failures.
    pub strict: bool,
}

/// Claims consumed by the `pi1` section without being computed.
pub const EQUAL_ORDER: Assumption = Assumption {
    key: "equal-order",
    claim: "the two normal circles meeting the (-1)-sphere have the same order in π1(Z0)",
    citation: "taken from the (-1)-sphere picture; checked combinatorially, not re-proved",
};

/// Claim consumed by the cover Gram check.
pub const CHERN_INDEPENDENCE: Assumption = Assumption {
    key: "chern-class-independence",
    claim: "a nonzero Gram determinant makes the Chern classes of the listed curves independent in H^1(Ω)",
    citation: "first Chern class map into H^1 of the cotangent sheaf; only the determinant is computed",
};

fn expected_section(sec: &mut Section, label: &str, computed: &crate::config::InvariantSet, want: &Expected) {
    for (k, v) in want.pairs() {
        let got = Expected::lookup(computed, k);
        sec.expect(k, v);
        if got != v {
            sec.fail(format!("{label}{k}: expected {v}, computed {got}"));
        }
    }
}

/// Chain placement plus the per-chain lattice checks.
fn chains_section(c: &Configuration, want: &[ChainExpect]) -> (Section, Option<Vec<ChainEmbedding>>) {
    let mut sec = Section::new();
    let targets: Vec<Chain> = want.iter().map(|w| w.chain.clone()).collect();
    let embs = match find_chains(c, &targets) {
        Ok(e) => e,
        Err(f) => {
            sec.fail(f.to_string());
            return (sec, None);
        }
    };
    let mut rows = Vec::new();
    for (w, emb) in want.iter().zip(&embs) {
        let recognized = wahl_recognize(&w.chain);
        if recognized != Some(w.wahl) {
            sec.fail(format!("{} recognizes as {recognized:?}, expected {}", w.chain, w.wahl));
        }
        let ids: Vec<&str> = emb.curves.iter().map(String::as_str).collect();
        let g = gram(c, &ids).expect("embedded ids exist and are distinct");
        let nd = is_negative_definite(&g);
        if !nd {
            sec.fail(format!("{} is not negative definite", w.chain));
        }
        let order = boundary_group_order(&w.chain);
        let det = det_exact(&g);
        if det.magnitude() != &order || order != num_bigint::BigUint::from(w.wahl.p * w.wahl.p) {
            sec.fail(format!("{}: |det| = {}, boundary order {order}", w.chain, det.magnitude()));
        }
        rows.push(json!({
            "entries": w.chain.entries(),
            "curves": emb.curves,
            "wahl": recognized,
            "negative_definite": nd,
            "boundary_order": order.to_string(),
        }));
        sec.expected[w.chain.to_string()] = json!({ "p": w.wahl.p, "q": w.wahl.q });
    }
    sec.set("chains", rows);
    (sec, Some(embs))
}

fn surgery_section(c: &Configuration, embs: &[ChainEmbedding], want: &SurgeryExpect) -> (Section, Option<SurgeryResult>) {
    let mut sec = Section::new();
    let r = match rational_blowdown(c, embs) {
        Ok(r) => r,
        Err(e) => {
            sec.fail(e.to_string());
            return (sec, None);
        }
    };
    sec.set("before", r.before);
    sec.set("after", r.after);
    sec.set("pieces", &r.pieces);
    sec.set("removed_curve_ids", &r.removed_curve_ids);
    sec.set("context", want.context);
    if want.context == SmoothingContext::Symplectic {
        // no complex structure, so p_g only stands in for (b2+ - 1) / 2 with b1 = 0
        sec.set("p_g_note", "topological analogue");
    }
    expected_section(&mut sec, "", &r.after, &want.expect);
    for v in r.after.violations() {
        sec.fail(format!("after-invariants: {v}"));
    }
    let l = r.total_length();
    if r.after.k2 - r.before.k2 != l || r.after.sigma - r.before.sigma != l || r.before.e - r.after.e != l {
        sec.fail("invariant changes do not all equal the total chain length");
    }
    (sec, Some(r))
}

fn fibration_warnings(c: &Configuration) -> Vec<String> {
    let fibers: Vec<&str> = I9.iter().copied().filter(|a| c.contains(a)).collect();
    if fibers.len() != I9.len() || !c.contains("F") {
        return Vec::new();
    }
    let mut out = Vec::new();
    for cv in c.curves().filter(|cv| cv.labels.contains("bisection")) {
        let on_i9 = degree_against(c, &cv.id, &fibers);
        let on_f = c.pairing(&cv.id, "F");
        if on_i9 != 2 || on_f != 2 {
            out.push(format!(
                "bisection {} meets the I9 fiber {on_i9} times and F {on_f} times, expected 2 and 2",
                cv.id
            ));
        }
    }
    out
}

pub fn verify(s: &Scenario, opts: Options) -> Report {
    let mut sections = BTreeMap::new();
    let mut assumptions: Vec<Assumption> = Vec::new();

    let mut surface = Section::new();
    surface.set("ambient", s.initial.ambient);
    surface.set("pi1_order", s.initial.pi1_order);
    surface.set("curves", s.initial.curve_count());
    for v in adjunction_audit(&s.initial) {
        surface.fail(format!("{}: {}", v.subject, v.message));
    }
    surface.warnings = fibration_warnings(&s.initial);
    sections.insert("surface".to_string(), surface.finish(opts.strict));

    let mut program = Section::new();
    let states = match run_program_traced(&s.initial, &s.steps) {
        Ok(st) => Some(st),
        Err(e) => {
            program.fail(e.to_string());
            None
        }
    };
    if let Some(states) = &states {
        let mut identity_breaks = 0;
        let mut audit_breaks = 0;
        for (i, st) in states.iter().enumerate() {
            let a = st.ambient;
            if a.k2 != 2 * a.e + 3 * a.sigma {
                identity_breaks += 1;
                program.fail(format!("state {i}: K2 != 2e + 3sigma"));
            }
            for v in adjunction_audit(st) {
                audit_breaks += 1;
                program.fail(format!("state {i}: {}: {}", v.subject, v.message));
            }
            if st.pairings().any(|(_, _, n)| n < 0) {
                program.fail(format!("state {i}: negative pairing"));
            }
        }
        let last = states.last().unwrap();
        program.set("steps", s.steps.len());
        program.set("final", last.ambient);
        program.set("identity_violations", identity_breaks);
        program.set("audit_violations", audit_breaks);
        let names: Vec<_> = states[1..]
            .iter()
            .zip(&states[..states.len() - 1])
            .map(|(b, a)| b.curves().find(|c| !a.contains(&c.id)).map(|c| c.id.clone()))
            .collect();
        program.set("exceptional", names);
        let marked: BTreeMap<String, usize> = s.markers.iter().flatten().fold(BTreeMap::new(), |mut m, k| {
            *m.entry(k.clone()).or_insert(0) += 1;
            m
        });
        program.set("markers", marked);
    }
    sections.insert("program".to_string(), program.finish(opts.strict));
    let z = states.as_ref().map(|st| st.last().unwrap().clone());

    let mut embeddings = None;
    if !s.chains.is_empty() {
        let sec = match &z {
            Some(z) => {
                let (sec, e) = chains_section(z, &s.chains);
                embeddings = e;
                sec
            }
            None => Section::skipped("no blown-up configuration"),
        };
        sections.insert("chains".to_string(), sec.finish(opts.strict));
    }

    let mut surgery_ok = false;
    if let Some(want) = &s.surgery {
        let sec = match (&z, &embeddings) {
            (Some(z), Some(embs)) => {
                let (sec, r) = surgery_section(z, embs, want);
                if let Some(r) = r {
                    assumptions.extend(smoothing_ledger(&r, want.context));
                }
                surgery_ok = sec.status == Status::Pass;
                sec
            }
            _ => Section::skipped("chains were not placed"),
        };
        sections.insert("surgery".to_string(), sec.finish(opts.strict));
    }

    if let Some(want) = &s.pi1 {
        let mut sec = Section::new();
        sec.expect("order", want.order);
        sec.expect("witness", &want.witness);
        match (&z, &embeddings) {
            (Some(z), Some(embs)) if embs.len() == 2 => {
                let witness = match minus_one_sphere_witness(z, &embs[0], &embs[1], &want.witness) {
                    Ok(w) => w,
                    Err(e) => {
                        sec.fail(e.to_string());
                        false
                    }
                };
                sec.set("witness_holds", witness);
                let ambient = z.pi1_order.map(CyclicGroup::new);
                match ambient {
                    Some(Ok(g)) => {
                        let pieces: Vec<_> = s.chains.iter().map(|c| c.wahl).collect();
                        let d = pi1_after_blowdown(g, &pieces, witness);
                        match replay(&d.trace) {
                            Ok(v) => sec.set("replayed", v),
                            Err(e) => sec.fail(format!("trace does not replay: {e}")),
                        }
                        sec.set("coprime_steps", d.trace.uses(|r| matches!(r, Rule::Coprime { .. })));
                        sec.set("pushout_steps", d.trace.uses(|r| matches!(r, Rule::Pushout { .. })));
                        sec.set("trace", &d.trace);
                        sec.set("outcome", d.outcome);
                        match d.outcome {
                            Pi1Outcome::Group(g) => {
                                sec.set("order", g.order);
                                if g.order != want.order {
                                    sec.fail(format!("order: expected {}, computed {}", want.order, g.order));
                                }
                            }
                            Pi1Outcome::Inconclusive => sec.inconclusive(format!(
                                "inconclusive: {}",
                                d.failed_premise.unwrap_or_default()
                            )),
                        }
                        assumptions.push(EQUAL_ORDER);
                    }
                    _ => sec.inconclusive("ambient fundamental group is unknown"),
                }
            }
            (Some(_), Some(embs)) => sec.inconclusive(format!("the derivation needs two chains, got {}", embs.len())),
            _ => sec = Section::skipped("chains were not placed"),
        }
        if !surgery_ok && sec.status == Status::Pass && s.surgery.is_some() {
            sec.warnings.push("surgery section did not pass".to_string());
        }
        sections.insert("pi1".to_string(), sec.finish(opts.strict));
    }

    if let Some(cov) = &s.cover {
        let sec = match &z {
            None => Section::skipped("no blown-up configuration"),
            Some(_) => {
                let (sec, extra) = cover_section(s, cov);
                assumptions.extend(extra);
                sec
            }
        };
        sections.insert("cover".to_string(), sec.finish(opts.strict));
    }

    let mut seen = std::collections::BTreeSet::new();
    assumptions.retain(|a| seen.insert(a.key));
    let status = overall(&sections);
    Report {
        schema: REPORT_SCHEMA,
        scenario: s.name.clone(),
        status,
        sections,
        assumptions,
    }
}

fn overall(sections: &BTreeMap<String, Section>) -> Status {
    let worst = sections.values().map(|s| s.status).max().unwrap_or(Status::Pass);
    match worst {
        Status::Skipped => Status::Fail,
        w => w,
    }
}

fn cover_section(s: &Scenario, cov: &crate::scenario::CoverSpec) -> (Section, Vec<Assumption>) {
    let mut sec = Section::new();
    let mut extra = Vec::new();
    let lp = match lift_program(&s.initial, &s.steps, &cov.decl) {
        Ok(lp) => lp,
        Err(e) => {
            sec.fail(format!("cover: {e}"));
            return (sec, extra);
        }
    };
    let doubling: Vec<_> = lp.steps.iter().map(|st| json!([st.base_step, st.base_e, st.cover_e, st.doubled])).collect();
    for st in lp.steps.iter().filter(|st| !st.doubled) {
        sec.fail(format!("cover: invariants not doubled after base step {}", st.base_step));
    }
    for v in &lp.pullback_violations {
        sec.fail(format!("cover: pullback rule: {v}"));
    }
    let up = lp.cover_states.last().unwrap();
    sec.set("doubling", doubling);
    sec.set("ambient", up.ambient);
    sec.set("pi1_order", up.pi1_order);
    let split: BTreeMap<&str, Vec<&str>> = lp
        .lifts
        .iter()
        .map(|(k, l)| (k.as_str(), l.ids()))
        .collect();
    sec.set("lifts", split);
    sec.set("connected", lp.lifts.values().filter(|l| matches!(l, Lift::Connected(_))).count());
    for v in adjunction_audit(up) {
        sec.fail(format!("cover: {}: {}", v.subject, v.message));
    }
    if let Some(want) = cov.pi1_order {
        sec.expect("pi1_order", want);
        if up.pi1_order != Some(want) {
            sec.fail(format!("cover: pi1 order expected {want}, computed {:?}", up.pi1_order));
        }
    }
    if let Some(g) = &cov.gram {
        let ids: Vec<&str> = g.ids.iter().map(String::as_str).collect();
        match gram(up, &ids) {
            Ok(m) => {
                let det = det_exact(&m);
                sec.set("gram_size", m.size());
                sec.set("gram_det", det.to_string());
                sec.set("gram", &m.rows);
                sec.expect("gram_nonzero_det", g.nonzero_det);
                let nonzero = det != num_bigint::BigInt::from(0);
                if nonzero != g.nonzero_det {
                    sec.fail(format!("cover: Gram determinant {det}, expected nonzero = {}", g.nonzero_det));
                }
                extra.push(CHERN_INDEPENDENCE);
            }
            Err(e) => sec.fail(format!("cover: {e}")),
        }
    }
    if !cov.chains.is_empty() {
        let (csec, embs) = chains_section(up, &cov.chains);
        sec.computed["chains"] = csec.computed["chains"].clone();
        for f in csec.failures {
            sec.fail(format!("cover: {f}"));
        }
        if let (Some(want), Some(embs)) = (&cov.surgery, embs) {
            let (ssec, r) = surgery_section(up, &embs, want);
            sec.computed["surgery"] = ssec.computed.clone();
            sec.expected["surgery"] = ssec.expected.clone();
            for f in ssec.failures {
                sec.fail(format!("cover: {f}"));
            }
            if let Some(r) = r {
                extra.extend(smoothing_ledger(&r, want.context));
            }
        }
    }
    (sec, extra)
}

pub fn to_json(r: &Report) -> String {
    let v = serde_json::to_value(r).expect("report serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("json value prints");
    s.push('\n');
    s
}

pub fn to_text(r: &Report) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}: {}", r.scenario, r.status.as_str().to_uppercase());
    for (name, sec) in &r.sections {
        let _ = writeln!(out, "\n[{name}] {}", sec.status.as_str());
        if let Some(obj) = sec.computed.as_object() {
            for (k, v) in obj {
                if k == "trace" {
                    continue;
                }
                let _ = writeln!(out, "  {k} = {}", compact(v));
            }
        }
        if let Some(obj) = sec.expected.as_object() {
            for (k, v) in obj {
                let _ = writeln!(out, "  expected {k} = {}", compact(v));
            }
        }
        for f in &sec.failures {
            let _ = writeln!(out, "  ! {f}");
        }
        for w in &sec.warnings {
            let _ = writeln!(out, "  ~ {w}");
        }
        if let Some(steps) = sec.computed.get("trace").and_then(|t| t.get("steps")).and_then(|s| s.as_array()) {
            let _ = writeln!(out, "  derivation:");
            for (i, st) in steps.iter().enumerate() {
                let prem = st["premises"]
                    .as_array()
                    .map(|p| p.iter().map(|x| format!("#{x}")).collect::<Vec<_>>().join(","))
                    .unwrap_or_default();
                let prem = if prem.is_empty() { "fact".to_string() } else { prem };
                let _ = writeln!(
                    out,
                    "    #{i} [{prem}] {}  ({})",
                    st["statement"].as_str().unwrap_or(""),
                    st["citation"].as_str().unwrap_or("")
                );
            }
        }
    }
    if !r.assumptions.is_empty() {
        let _ = writeln!(out, "\nassumptions (cited, not computed):");
        for a in &r.assumptions {
            let _ = writeln!(out, "  - {}: {} [{}]", a.key, a.claim, a.citation);
        }
    }
    out
}

fn compact(v: &Json) -> String {
    let s = v.to_string();
    if s.len() > 160 {
        format!("{}...", &s[..s.char_indices().take_while(|(i, _)| *i < 157).last().map(|(i, c)| i + c.len_utf8()).unwrap_or(0)])
    } else {
        s
    }
}
