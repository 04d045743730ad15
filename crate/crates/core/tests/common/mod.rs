//! Random blow-up programs shared by the property and acceptance targets.

use blowdown::config::*;

/// The Enriques preset with bisection incidences that respect the fibration.
pub fn start() -> Configuration {
    let mut c = preset("enriques_kondo").unwrap();
    for (a, b, n) in [
        ("S1", "A1", 1),
        ("S1", "A5", 1),
        ("S2", "A3", 1),
        ("S2", "A7", 1),
        ("S1", "F", 2),
        ("S2", "F", 2),
        ("S1", "S2", 2),
    ] {
        c.set_pairing(a, b, n).unwrap();
    }
    c
}

/// Turns raw choices into a point that exists on `c`.
pub fn pick_point(c: &Configuration, choice: (u16, u16, u16, u8)) -> PointSpec {
    let ids: Vec<String> = c.curves().map(|x| x.id.clone()).collect();
    let (a, b, d, kind) = choice;
    if kind % 7 == 0 {
        if let Some(f) = c.curves().find(|x| x.node_count > 0) {
            return PointSpec::node(&f.id);
        }
    }
    let first = &ids[a as usize % ids.len()];
    let mut on = vec![first.clone()];
    let partners: Vec<&str> = c.neighbors(first).filter(|&(_, n)| n > 0).map(|(x, _)| x).collect();
    if kind % 3 != 0 && !partners.is_empty() {
        let second = partners[b as usize % partners.len()].to_string();
        let thirds: Vec<&str> = partners
            .iter()
            .copied()
            .filter(|&x| x != second && c.pairing(x, &second) > 0)
            .collect();
        on.push(second);
        if kind % 5 == 0 && !thirds.is_empty() {
            on.push(thirds[d as usize % thirds.len()].to_string());
        }
    }
    let refs: Vec<&str> = on.iter().map(|s| s.as_str()).collect();
    PointSpec::on(&refs)
}
