//! Assigning freight items to crates with per-crate mass and volume limits.
//!
//! Volume is a scalar billing quantity; items are not nested geometrically.

use serde::{Deserialize, Serialize};

use crate::error::ErrorCode;

/// Largest instance [`pack_exact`] accepts.
pub const EXACT_MAX_ITEMS: usize = 12;
/// Relative slack on capacity comparisons so sums of decimal inputs that land
/// exactly on a limit still fit.
const CAPACITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PackingError {
    #[error("crate capacity must be positive and finite (mass {mass_kg} kg, volume {volume_m3} m³)")]
    InvalidCapacity { mass_kg: f64, volume_m3: f64 },
    #[error("item {name:?} needs positive finite mass and volume")]
    InvalidItem { name: String },
    #[error("exact packing supports at most {max} items, got {got}")]
    TooManyItems { got: usize, max: usize },
    #[error("item list line {line}: {message}")]
    Csv { line: u64, message: String },
}

impl ErrorCode for PackingError {
    fn code(&self) -> &'static str {
        match self {
            PackingError::InvalidCapacity { .. } => "InvalidCapacity",
            PackingError::InvalidItem { .. } => "InvalidItem",
            PackingError::TooManyItems { .. } => "TooManyItems",
            PackingError::Csv { .. } => "CsvError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreightItem {
    pub name: String,
    pub mass_kg: f64,
    pub volume_m3: f64,
    #[serde(default, deserialize_with = "flexible_bool")]
    pub fragile: bool,
}

impl FreightItem {
    pub fn new(name: impl Into<String>, mass_kg: f64, volume_m3: f64) -> Self {
        FreightItem {
            name: name.into(),
            mass_kg,
            volume_m3,
            fragile: false,
        }
    }
}

fn flexible_bool<'de, D: serde::Deserializer<'de>>(d: D) -> Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "" | "false" | "no" | "n" | "0" => Ok(false),
        "true" | "yes" | "y" | "1" => Ok(true),
        other => Err(serde::de::Error::custom(format!("expected true/false, got {other:?}"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrateCaps {
    pub mass_kg: f64,
    pub volume_m3: f64,
}

impl CrateCaps {
    fn validate(&self) -> Result<(), PackingError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.mass_kg) && ok(self.volume_m3) {
            Ok(())
        } else {
            Err(PackingError::InvalidCapacity {
                mass_kg: self.mass_kg,
                volume_m3: self.volume_m3,
            })
        }
    }

    fn fits(&self, mass: f64, volume: f64) -> bool {
        mass <= self.mass_kg * (1.0 + CAPACITY_SLACK) && volume <= self.volume_m3 * (1.0 + CAPACITY_SLACK)
    }

    /// `max(mass/mass_cap, volume/volume_cap)`
    pub fn dominant_ratio(&self, item: &FreightItem) -> f64 {
        (item.mass_kg / self.mass_kg).max(item.volume_m3 / self.volume_m3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crate {
    pub capacity_mass: f64,
    pub capacity_volume: f64,
    pub items: Vec<String>,
    pub used_mass: f64,
    pub used_volume: f64,
    /// Holds at least one fragile item.
    pub fragile: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnassignedItem {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrateManifest {
    pub crates: Vec<Crate>,
    pub unassigned: Vec<UnassignedItem>,
}

impl CrateManifest {
    pub fn crate_count(&self) -> usize {
        self.crates.len()
    }

    /// Every crate within its limits, and every item listed exactly once.
    pub fn is_consistent(&self, items: &[FreightItem]) -> bool {
        let caps_ok = self.crates.iter().all(|c| {
            let caps = CrateCaps {
                mass_kg: c.capacity_mass,
                volume_m3: c.capacity_volume,
            };
            caps.fits(c.used_mass, c.used_volume)
        });
        let mut listed: Vec<&str> = self
            .crates
            .iter()
            .flat_map(|c| c.items.iter().map(String::as_str))
            .chain(self.unassigned.iter().map(|u| u.name.as_str()))
            .collect();
        let mut expected: Vec<&str> = items.iter().map(|i| i.name.as_str()).collect();
        listed.sort_unstable();
        expected.sort_unstable();
        caps_ok && listed == expected
    }
}

fn validate_items(items: &[FreightItem]) -> Result<(), PackingError> {
    for it in items {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(it.mass_kg) && ok(it.volume_m3)) {
            return Err(PackingError::InvalidItem { name: it.name.clone() });
        }
    }
    Ok(())
}

/// Splits off items that cannot fit even an empty crate.
fn split_oversize<'a>(items: &'a [FreightItem], caps: &CrateCaps) -> (Vec<&'a FreightItem>, Vec<UnassignedItem>) {
    let mut fit = Vec::new();
    let mut out = Vec::new();
    for it in items {
        let over_m = !caps.fits(it.mass_kg, 0.0);
        let over_v = !caps.fits(0.0, it.volume_m3);
        if over_m || over_v {
            let reason = match (over_m, over_v) {
                (true, true) => format!(
                    "mass {} kg and volume {} m³ exceed the crate limits",
                    it.mass_kg, it.volume_m3
                ),
                (true, false) => format!("mass {} kg exceeds crate limit {} kg", it.mass_kg, caps.mass_kg),
                _ => format!("volume {} m³ exceeds crate limit {} m³", it.volume_m3, caps.volume_m3),
            };
            out.push(UnassignedItem {
                name: it.name.clone(),
                reason,
            });
        } else {
            fit.push(it);
        }
    }
    (fit, out)
}

fn by_dominant_ratio<'a>(mut items: Vec<&'a FreightItem>, caps: &CrateCaps) -> Vec<&'a FreightItem> {
    // stable sort keeps input order among equal ratios
    items.sort_by(|a, b| caps.dominant_ratio(b).total_cmp(&caps.dominant_ratio(a)));
    items
}

fn build(bins: Vec<Vec<&FreightItem>>, caps: &CrateCaps, unassigned: Vec<UnassignedItem>) -> CrateManifest {
    let crates = bins
        .into_iter()
        .map(|b| Crate {
            capacity_mass: caps.mass_kg,
            capacity_volume: caps.volume_m3,
            used_mass: b.iter().map(|i| i.mass_kg).sum(),
            used_volume: b.iter().map(|i| i.volume_m3).sum(),
            fragile: b.iter().any(|i| i.fragile),
            items: b.into_iter().map(|i| i.name.clone()).collect(),
        })
        .collect();
    CrateManifest { crates, unassigned }
}

/// First-fit decreasing on each item's dominant capacity ratio.
pub fn pack_ffd(items: &[FreightItem], caps: &CrateCaps) -> Result<CrateManifest, PackingError> {
    caps.validate()?;
    validate_items(items)?;
    let (fit, unassigned) = split_oversize(items, caps);
    let mut bins: Vec<(f64, f64, Vec<&FreightItem>)> = Vec::new();
    for it in by_dominant_ratio(fit, caps) {
        match bins.iter_mut().find(|(m, v, _)| caps.fits(m + it.mass_kg, v + it.volume_m3)) {
            Some(bin) => {
                bin.0 += it.mass_kg;
                bin.1 += it.volume_m3;
                bin.2.push(it);
            }
            None => bins.push((it.mass_kg, it.volume_m3, vec![it])),
        }
    }
    Ok(build(bins.into_iter().map(|b| b.2).collect(), caps, unassigned))
}

struct Search<'a> {
    items: Vec<&'a FreightItem>,
    caps: CrateCaps,
    best: Vec<usize>,
    best_count: usize,
    assign: Vec<usize>,
    loads: Vec<(f64, f64)>,
    suffix_mass: Vec<f64>,
    suffix_volume: Vec<f64>,
}

impl Search<'_> {
    fn lower_bound(&self, next: usize) -> usize {
        let (mut free_m, mut free_v) = (0.0, 0.0);
        for (m, v) in &self.loads {
            free_m += self.caps.mass_kg - m;
            free_v += self.caps.volume_m3 - v;
        }
        let extra = |need: f64, free: f64, cap: f64| ((need - free) / cap - CAPACITY_SLACK).ceil().max(0.0) as usize;
        self.loads.len()
            + extra(self.suffix_mass[next], free_m, self.caps.mass_kg).max(extra(self.suffix_volume[next], free_v, self.caps.volume_m3))
    }

    fn dfs(&mut self, i: usize) {
        if self.lower_bound(i) >= self.best_count {
            return;
        }
        if i == self.items.len() {
            self.best_count = self.loads.len();
            self.best = self.assign.clone();
            return;
        }
        let (m, v) = (self.items[i].mass_kg, self.items[i].volume_m3);
        for b in 0..self.loads.len() {
            let (bm, bv) = self.loads[b];
            // bins with identical loads are interchangeable
            if self.loads[..b].contains(&(bm, bv)) || !self.caps.fits(bm + m, bv + v) {
                continue;
            }
            self.loads[b] = (bm + m, bv + v);
            self.assign[i] = b;
            self.dfs(i + 1);
            self.loads[b] = (bm, bv);
        }
        if self.loads.len() + 1 < self.best_count {
            self.loads.push((m, v));
            self.assign[i] = self.loads.len() - 1;
            self.dfs(i + 1);
            self.loads.pop();
        }
    }
}

/// Minimal crate count by branch and bound over assignments, seeded with the
/// first-fit decreasing solution as the incumbent.
pub fn pack_exact(items: &[FreightItem], caps: &CrateCaps) -> Result<CrateManifest, PackingError> {
    caps.validate()?;
    validate_items(items)?;
    if items.len() > EXACT_MAX_ITEMS {
        return Err(PackingError::TooManyItems {
            got: items.len(),
            max: EXACT_MAX_ITEMS,
        });
    }
    let (fit, unassigned) = split_oversize(items, caps);
    let sorted = by_dominant_ratio(fit, caps);
    let n = sorted.len();
    let mut suffix_mass = vec![0.0; n + 1];
    let mut suffix_volume = vec![0.0; n + 1];
    for i in (0..n).rev() {
        suffix_mass[i] = suffix_mass[i + 1] + sorted[i].mass_kg;
        suffix_volume[i] = suffix_volume[i + 1] + sorted[i].volume_m3;
    }
    // one crate per item is always feasible and bounds the search
    let mut s = Search {
        items: sorted,
        caps: *caps,
        best: (0..n).collect(),
        best_count: n + 1,
        assign: vec![0; n],
        loads: Vec::new(),
        suffix_mass,
        suffix_volume,
    };
    if n > 0 {
        s.dfs(0);
    } else {
        s.best_count = 0;
    }
    let count = s.best_count.min(n);
    let mut bins: Vec<Vec<&FreightItem>> = vec![Vec::new(); count];
    for (i, &b) in s.best.iter().enumerate() {
        bins[b].push(s.items[i]);
    }
    Ok(build(bins, caps, unassigned))
}

/// Reads `name,mass_kg,volume_m3,fragile` rows with a header line.
pub fn parse_items_csv(src: &[u8]) -> Result<Vec<FreightItem>, PackingError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(src);
    let mut out = Vec::new();
    for rec in rdr.deserialize::<FreightItem>() {
        let item = rec.map_err(|e| PackingError::Csv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        out.push(item);
    }
    Ok(out)
}
