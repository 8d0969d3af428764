//! Longitudinal linkage of firm-years across adjacent years.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::record::FirmRecord;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FirmYear {
    pub firm_id: String,
    pub year: i32,
}

impl FirmYear {
    pub fn new(firm_id: &str, year: i32) -> Self {
        Self { firm_id: firm_id.into(), year }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkKind {
    Id,
    PhoneZip,
}

/// A (phone, zip) pair claimed by more than one candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ambiguity {
    pub year: i32,
    pub phone: String,
    pub zip: String,
    pub previous: Vec<String>,
    pub current: Vec<String>,
}

/// Map from each linked firm-year to its predecessor in the year before.
#[derive(Debug, Clone, Default)]
pub struct Links {
    prev: HashMap<FirmYear, (FirmYear, LinkKind)>,
    pub ambiguities: Vec<Ambiguity>,
}

impl Links {
    pub fn previous(&self, fy: &FirmYear) -> Option<&FirmYear> {
        self.prev.get(fy).map(|(p, _)| p)
    }

    pub fn kind(&self, fy: &FirmYear) -> Option<LinkKind> {
        self.prev.get(fy).map(|(_, k)| *k)
    }

    pub fn len(&self) -> usize {
        self.prev.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prev.is_empty()
    }

    pub fn count(&self, kind: LinkKind) -> usize {
        self.prev.values().filter(|(_, k)| *k == kind).count()
    }

    /// All links as (current, previous) pairs in sorted order.
    pub fn pairs(&self) -> Vec<(&FirmYear, &FirmYear)> {
        let mut v: Vec<_> = self.prev.iter().map(|(c, (p, _))| (c, p)).collect();
        v.sort();
        v
    }
}

type ContactKey<'a> = (&'a str, &'a str);

fn contact(r: &FirmRecord) -> Option<ContactKey<'_>> {
    match &r.phone {
        Some(p) if !p.is_empty() && !r.zip.is_empty() => Some((p.as_str(), r.zip.as_str())),
        _ => None,
    }
}

/// Links each year to the previous one: identical firm_id first, then an
/// exact (phone, zip) match among the firms still unlinked. A contact pair
/// shared by several candidates on either side links nothing.
pub fn link_firms(records: &[FirmRecord]) -> Links {
    let mut by_year: BTreeMap<i32, Vec<&FirmRecord>> = BTreeMap::new();
    for r in records {
        by_year.entry(r.year).or_default().push(r);
    }
    let mut links = Links::default();
    for (&year, current) in &by_year {
        let Some(previous) = by_year.get(&(year - 1)) else { continue };
        let prev_ids: HashSet<&str> = previous.iter().map(|r| r.firm_id.as_str()).collect();
        let mut taken: HashSet<&str> = HashSet::new();
        let mut open = Vec::new();
        for r in current {
            if prev_ids.contains(r.firm_id.as_str()) {
                taken.insert(&r.firm_id);
                links.prev.insert(FirmYear::new(&r.firm_id, year), (FirmYear::new(&r.firm_id, year - 1), LinkKind::Id));
            } else {
                open.push(*r);
            }
        }

        let mut prev_groups: HashMap<ContactKey, Vec<&str>> = HashMap::new();
        for r in previous.iter().filter(|r| !taken.contains(r.firm_id.as_str())) {
            if let Some(k) = contact(r) {
                prev_groups.entry(k).or_default().push(&r.firm_id);
            }
        }
        let mut cur_groups: BTreeMap<ContactKey, Vec<&str>> = BTreeMap::new();
        for r in open {
            if let Some(k) = contact(r) {
                cur_groups.entry(k).or_default().push(&r.firm_id);
            }
        }
        for (key, cur) in cur_groups {
            let Some(prev) = prev_groups.get(&key) else { continue };
            if prev.len() == 1 && cur.len() == 1 {
                links.prev.insert(FirmYear::new(cur[0], year), (FirmYear::new(prev[0], year - 1), LinkKind::PhoneZip));
            } else {
                log::warn!("ambiguous contact match in {year}: {} previous, {} current firms", prev.len(), cur.len());
                let mut previous: Vec<String> = prev.iter().map(|s| s.to_string()).collect();
                previous.sort();
                links.ambiguities.push(Ambiguity {
                    year,
                    phone: key.0.into(),
                    zip: key.1.into(),
                    previous,
                    current: cur.iter().map(|s| s.to_string()).collect(),
                });
            }
        }
    }
    links
}
