//! Unramified double covers of configurations.
//!
//! Which curves split and how the preimages meet is declared, never
//! inferred. The lift is checked against the pullback rule: for every base
//! pair `(a, b)` the pairings among their preimages sum to `2 a.b`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::{blow_up, ConfigError, Configuration, Curve, InvariantSet, PointSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoverError {
    #[error("base fundamental group order {0:?} has no index-two subgroup to declare")]
    NoDoubleCover(Option<u64>),
    #[error("base curve `{0}` has no splitting declared")]
    Undeclared(String),
    #[error("splitting declared for unknown base curve `{0}`")]
    UnknownBase(String),
    #[error("`{0}` is rational, so its preimage cannot be connected")]
    RationalConnected(String),
    #[error("cover curve id `{0}` used twice")]
    DuplicateCoverId(String),
    #[error("cover pairing names `{0}`, which is no preimage")]
    UnknownCoverCurve(String),
    #[error("preimages of `{a}` and `{b}` meet {got} times in total, expected 2 x {base}")]
    PullbackSum { a: String, b: String, base: i64, got: i64 },
    #[error("base step {step}: cannot tell which preimage of `{curve}` passes through the first lifted point")]
    AmbiguousLift { step: usize, curve: String },
    #[error("base step {step}: lift override names `{curve}`, which is not over the point")]
    BadOverride { step: usize, curve: String },
    #[error("cover step {step}: {source}")]
    Blowup {
        step: usize,
        #[source]
        source: ConfigError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "ids", rename_all = "lowercase")]
pub enum Lift {
    Split(String, String),
    Connected(String),
}

impl Lift {
    pub fn ids(&self) -> Vec<&str> {
        match self {
            Lift::Split(a, b) => vec![a, b],
            Lift::Connected(a) => vec![a],
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplittingDecl {
    pub curves: BTreeMap<String, Lift>,
    /// Explicit pairings among preimages. A base pair with any entry here
    /// takes all its preimage pairings from this table (missing = 0).
    pub pairings: BTreeMap<(String, String), i64>,
    /// Base step index → cover curves through the first preimage point.
    pub step_overrides: BTreeMap<usize, Vec<String>>,
}

impl SplittingDecl {
    /// `id → (id_a, id_b)` for every curve of `base`.
    pub fn all_split(base: &Configuration) -> Self {
        SplittingDecl {
            curves: base
                .curves()
                .map(|c| (c.id.clone(), split_names(&c.id)))
                .collect(),
            ..Default::default()
        }
    }
}

pub fn split_names(id: &str) -> Lift {
    Lift::Split(format!("{id}_a"), format!("{id}_b"))
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Lifted invariants of an unramified double cover (`b1 = 0` on both sides).
pub fn doubled(a: &InvariantSet) -> InvariantSet {
    // chi(O) doubles; with q = 0 this gives p_g' = 2 p_g + 1
    InvariantSet::from_basic(2 * a.e, 2 * a.sigma, 2 * a.p_g + 1, a.q)
}

pub fn lift_configuration(base: &Configuration, d: &SplittingDecl) -> Result<Configuration, CoverError> {
    let order = match base.pi1_order {
        Some(o) if o % 2 == 0 => o,
        other => return Err(CoverError::NoDoubleCover(other)),
    };
    for c in base.curves() {
        if !d.curves.contains_key(&c.id) {
            return Err(CoverError::Undeclared(c.id.clone()));
        }
    }
    let mut used = BTreeSet::new();
    let mut owner: BTreeMap<&str, &str> = BTreeMap::new();
    for (b, lift) in &d.curves {
        if !base.contains(b) {
            return Err(CoverError::UnknownBase(b.clone()));
        }
        for id in lift.ids() {
            if !used.insert(id.to_string()) {
                return Err(CoverError::DuplicateCoverId(id.to_string()));
            }
            owner.insert(id, b);
        }
    }
    for (x, y) in d.pairings.keys() {
        for id in [x, y] {
            if !owner.contains_key(id.as_str()) {
                return Err(CoverError::UnknownCoverCurve(id.clone()));
            }
        }
    }

    let mut out = Configuration::empty(doubled(&base.ambient), Some(order / 2));
    for (b, lift) in &d.curves {
        let c = base.curve(b)?;
        match lift {
            Lift::Split(x, y) => {
                for id in [x, y] {
                    out.add_curve(Curve { id: id.clone(), ..c.clone() })?;
                }
            }
            Lift::Connected(x) => {
                // the normalization is an unramified double cover too: 2g' - 2 = 2(2g - 2)
                if c.genus == 0 {
                    return Err(CoverError::RationalConnected(b.clone()));
                }
                out.add_curve(Curve {
                    id: x.clone(),
                    self_int: 2 * c.self_int,
                    k_degree: 2 * c.k_degree,
                    genus: 2 * c.genus - 1,
                    node_count: 2 * c.node_count,
                    labels: c.labels.clone(),
                })?;
            }
        }
    }

    // group declared cover pairings by their base pair
    let mut declared: BTreeMap<(String, String), Vec<(&String, &String, i64)>> = BTreeMap::new();
    for ((x, y), &n) in &d.pairings {
        let (bx, by) = (owner[x.as_str()], owner[y.as_str()]);
        declared.entry(pair_key(bx, by)).or_default().push((x, y, n));
    }
    for ((a, b), list) in &declared {
        let base_n = base.pairing(a, b);
        let got: i64 = list.iter().map(|t| t.2).sum();
        if a == b || got != 2 * base_n {
            return Err(CoverError::PullbackSum { a: a.clone(), b: b.clone(), base: base_n, got });
        }
        for &(x, y, n) in list {
            out.set_pairing(x, y, out.pairing(x, y) + n)?;
        }
    }
    for (a, b, n) in base.pairings() {
        if declared.contains_key(&pair_key(a, b)) {
            continue;
        }
        match (&d.curves[a], &d.curves[b]) {
            (Lift::Split(a1, a2), Lift::Split(b1, b2)) => {
                out.set_pairing(a1, b1, n)?;
                out.set_pairing(a2, b2, n)?;
            }
            (Lift::Split(a1, a2), Lift::Connected(c)) | (Lift::Connected(c), Lift::Split(a1, a2)) => {
                out.set_pairing(a1, c, n)?;
                out.set_pairing(a2, c, n)?;
            }
            (Lift::Connected(x), Lift::Connected(y)) => out.set_pairing(x, y, 2 * n)?,
        }
    }
    Ok(out)
}

/// Checks the pullback sum rule for every pair of base curves.
pub fn pullback_violations(base: &Configuration, cover: &Configuration, lifts: &BTreeMap<String, Lift>) -> Vec<String> {
    let ids: Vec<&String> = lifts.keys().collect();
    let mut out = Vec::new();
    for (i, a) in ids.iter().enumerate() {
        for b in &ids[i + 1..] {
            let got: i64 = lifts[*a]
                .ids()
                .iter()
                .flat_map(|x| lifts[*b].ids().into_iter().map(move |y| (*x, y)))
                .map(|(x, y)| cover.pairing(x, y))
                .sum();
            let want = 2 * base.pairing(a, b);
            if got != want {
                out.push(format!("{a}.{b}: {got} != {want}"));
            }
        }
    }
    out
}

/// Splits one base blow-up into the two cover blow-ups over its point.
pub fn lift_point(
    cover: &Configuration,
    lifts: &BTreeMap<String, Lift>,
    step: usize,
    p: &PointSpec,
    exceptional: &str,
    first_override: Option<&[String]>,
) -> Result<(PointSpec, PointSpec, Lift), CoverError> {
    let mults = p.multiplicities();
    let mut first: BTreeMap<String, String> = BTreeMap::new();
    let mut second: BTreeMap<String, String> = BTreeMap::new();
    if let Some(ov) = first_override {
        for id in ov {
            let base = mults.iter().find(|(b, _)| lifts.get(b).is_some_and(|l| l.ids().contains(&id.as_str())));
            match base {
                Some((b, _)) => {
                    first.insert(b.clone(), id.clone());
                }
                None => return Err(CoverError::BadOverride { step, curve: id.clone() }),
            }
        }
    }
    for (b, _) in &mults {
        let lift = lifts.get(b).ok_or_else(|| CoverError::Undeclared(b.clone()))?;
        match lift {
            Lift::Connected(x) => {
                first.insert(b.clone(), x.clone());
                second.insert(b.clone(), x.clone());
            }
            Lift::Split(x, y) => {
                if let Some(chosen) = first.get(b).cloned() {
                    second.insert(b.clone(), if &chosen == x { y.clone() } else { x.clone() });
                    continue;
                }
                // anchor on a split curve already placed, otherwise take the a-copy
                let anchor = first.iter().find(|(k, v)| {
                    matches!(lifts[*k], Lift::Split(..)) && second.get(*k).is_some_and(|s| s != *v)
                });
                let pick = match anchor {
                    None => x.clone(),
                    Some((_, av)) => {
                        let (mx, my) = (cover.pairing(av, x) > 0, cover.pairing(av, y) > 0);
                        match (mx, my) {
                            (true, false) => x.clone(),
                            (false, true) => y.clone(),
                            _ => return Err(CoverError::AmbiguousLift { step, curve: b.clone() }),
                        }
                    }
                };
                let other = if &pick == x { y.clone() } else { x.clone() };
                first.insert(b.clone(), pick);
                second.insert(b.clone(), other);
            }
        }
    }
    let (ea, eb) = match split_names(exceptional) {
        Lift::Split(a, b) => (a, b),
        Lift::Connected(_) => unreachable!(),
    };
    let build = |side: &BTreeMap<String, String>, name: &str| {
        let mut q = PointSpec {
            exceptional: Some(name.to_string()),
            ..Default::default()
        };
        for (b, m) in &p.incidences {
            q.incidences.push((side[b].clone(), *m));
        }
        q.node_of = p.node_of.as_ref().map(|n| side[n].clone());
        for ((x, y), &n) in &p.pairwise_local {
            q.pairwise_local.insert(pair_key(&side[x], &side[y]), n);
        }
        q
    };
    Ok((build(&first, &ea), build(&second, &eb), Lift::Split(ea, eb)))
}

#[derive(Debug, Clone, Serialize)]
pub struct LiftStep {
    pub base_step: usize,
    pub base_e: i64,
    pub cover_e: i64,
    pub doubled: bool,
}

#[derive(Debug, Clone)]
pub struct LiftedProgram {
    pub base_states: Vec<Configuration>,
    pub cover_states: Vec<Configuration>,
    pub lifts: BTreeMap<String, Lift>,
    pub steps: Vec<LiftStep>,
    pub pullback_violations: Vec<String>,
}

/// Lifts `base` and then every blow-up of `steps`, two cover blow-ups per base
/// blow-up, checking doubling and the pullback rule after each step.
pub fn lift_program(
    base: &Configuration,
    steps: &[PointSpec],
    d: &SplittingDecl,
) -> Result<LiftedProgram, CoverError> {
    let mut cover = lift_configuration(base, d)?;
    let mut lifts = d.curves.clone();
    let mut base_states = vec![base.clone()];
    let mut cover_states = vec![cover.clone()];
    let mut log = vec![LiftStep {
        base_step: 0,
        base_e: base.ambient.e,
        cover_e: cover.ambient.e,
        doubled: cover.ambient == doubled(&base.ambient),
    }];
    let mut violations = pullback_violations(base, &cover, &lifts);
    let mut cur = base.clone();
    for (i, s) in steps.iter().enumerate() {
        let next = blow_up(&cur, s).map_err(|e| ConfigError::AtStep { index: i, source: Box::new(e) })?;
        let new_id = next
            .curves()
            .map(|c| c.id.clone())
            .find(|id| !cur.contains(id))
            .expect("blow-up adds a curve");
        let ov = d.step_overrides.get(&i).map(|v| v.as_slice());
        let (p1, p2, lift) = lift_point(&cover, &lifts, i, s, &new_id, ov)?;
        cover = blow_up(&cover, &p1).map_err(|e| CoverError::Blowup { step: 2 * i, source: e })?;
        cover = blow_up(&cover, &p2).map_err(|e| CoverError::Blowup { step: 2 * i + 1, source: e })?;
        lifts.insert(new_id, lift);
        cur = next;
        log.push(LiftStep {
            base_step: i + 1,
            base_e: cur.ambient.e,
            cover_e: cover.ambient.e,
            doubled: cover.ambient.e == 2 * cur.ambient.e
                && cover.ambient.sigma == 2 * cur.ambient.sigma
                && cover.ambient.k2 == 2 * cur.ambient.k2,
        });
        violations.extend(
            pullback_violations(&cur, &cover, &lifts)
                .into_iter()
                .map(|v| format!("after step {}: {v}", i + 1)),
        );
        base_states.push(cur.clone());
        cover_states.push(cover.clone());
    }
    Ok(LiftedProgram {
        base_states,
        cover_states,
        lifts,
        steps: log,
        pullback_violations: violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{adjunction_audit, preset};

    #[test]
    fn bare_invariants_double() {
        let base = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), Some(2));
        let c = lift_configuration(&base, &SplittingDecl::default()).unwrap();
        assert_eq!((c.ambient.e, c.ambient.sigma, c.ambient.k2), (24, -16, 0));
        assert_eq!(c.pi1_order, Some(1));
        assert!(c.ambient.violations().is_empty());
    }

    #[test]
    fn connected_preimage() {
        let mut base = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), Some(2));
        base.add_curve(Curve::new("G", 1, 1, -1, 0)).unwrap();
        base.add_curve(Curve::new("R", -2, 0, 0, 0)).unwrap();
        base.set_pairing("G", "R", 1).unwrap();
        let mut d = SplittingDecl::default();
        d.curves.insert("G".into(), Lift::Connected("G~".into()));
        d.curves.insert("R".into(), split_names("R"));
        let c = lift_configuration(&base, &d).unwrap();
        let g = c.curve("G~").unwrap();
        assert_eq!((g.self_int, g.genus, g.k_degree), (2, 1, -2));
        assert_eq!(g.adjunction_defect(), 0);
        assert_eq!(c.pairing("G~", "R_a") + c.pairing("G~", "R_b"), 2);
        d.curves.insert("R".into(), Lift::Connected("R~".into()));
        assert!(matches!(lift_configuration(&base, &d), Err(CoverError::RationalConnected(_))));
    }

    #[test]
    fn needs_even_group() {
        let base = Configuration::empty(InvariantSet::from_basic(12, -8, 0, 0), Some(1));
        assert!(matches!(
            lift_configuration(&base, &SplittingDecl::default()),
            Err(CoverError::NoDoubleCover(_))
        ));
    }

    #[test]
    fn enriques_lifts_to_k3() {
        let y = preset("enriques_kondo").unwrap();
        let d = SplittingDecl::all_split(&y);
        let k = lift_configuration(&y, &d).unwrap();
        let k3 = preset("k3_kondo_cover").unwrap();
        assert_eq!(k.ambient, k3.ambient);
        assert_eq!(k.curve_count(), k3.curve_count());
        assert!(adjunction_audit(&k).is_empty());
        assert!(pullback_violations(&y, &k, &d.curves).is_empty());
    }

    #[test]
    fn incomplete_or_wrong_declarations() {
        let y = preset("enriques_kondo").unwrap();
        let mut d = SplittingDecl::all_split(&y);
        d.curves.remove("F");
        assert_eq!(lift_configuration(&y, &d), Err(CoverError::Undeclared("F".into())));
        let mut d = SplittingDecl::all_split(&y);
        d.pairings.insert(("A1_a".into(), "A2_b".into()), 1);
        assert!(matches!(lift_configuration(&y, &d), Err(CoverError::PullbackSum { .. })));
        d.pairings.insert(("A1_b".into(), "A2_a".into()), 1);
        let k = lift_configuration(&y, &d).unwrap();
        assert_eq!(k.pairing("A1_a", "A2_a"), 0);
        assert_eq!(k.pairing("A1_a", "A2_b"), 1);
    }

    #[test]
    fn node_blowup_lifts_to_two() {
        let y = preset("enriques_kondo").unwrap();
        let d = SplittingDecl::all_split(&y);
        let prog = lift_program(&y, &[PointSpec::node("F")], &d).unwrap();
        let e: Vec<(i64, i64)> = prog.steps.iter().map(|s| (s.base_e, s.cover_e)).collect();
        assert_eq!(e, vec![(12, 24), (13, 26)]);
        let v = prog.cover_states.last().unwrap();
        assert_eq!(v.curve("F_a").unwrap().self_int, -4);
        assert_eq!(v.pairing("F_b", "E1_b"), 2);
        assert!(prog.pullback_violations.is_empty());
    }

    #[test]
    fn crossing_lift_follows_the_pairings() {
        let y = preset("enriques_kondo").unwrap();
        let mut d = SplittingDecl::all_split(&y);
        d.pairings.insert(("A1_a".into(), "A2_b".into()), 1);
        d.pairings.insert(("A1_b".into(), "A2_a".into()), 1);
        let prog = lift_program(&y, &[PointSpec::on(&["A1", "A2"])], &d).unwrap();
        let v = prog.cover_states.last().unwrap();
        assert_eq!(v.pairing("E1_a", "A1_a"), 1);
        assert_eq!(v.pairing("E1_a", "A2_b"), 1);
        assert!(prog.pullback_violations.is_empty());
    }
}
