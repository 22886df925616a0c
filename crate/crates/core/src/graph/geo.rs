use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use super::Graph;
use crate::error::{Error, Result};

/// Label granularity a group test runs at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Country,
    Region,
}

impl Level {
    pub fn as_str(self) -> &'static str {
        match self {
            Level::Country => "country",
            Level::Region => "region",
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "country" => Ok(Level::Country),
            "region" => Ok(Level::Region),
            _ => Err(Error::invalid(format!("unknown level `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoRecord {
    pub name: String,
    pub country: Option<String>,
    pub region: Option<String>,
}

/// Geolocation rows keyed by external node name, not yet joined to a graph.
#[derive(Debug, Clone, Default)]
pub struct GeoRecords {
    pub records: Vec<GeoRecord>,
    /// Rows with a region but no country.
    pub rejected: usize,
    pub malformed_lines: usize,
}

/// Parses `node<TAB>country<TAB>region` rows; region may be empty or absent.
pub fn parse_geo<R: BufRead>(reader: R, strict: bool) -> Result<GeoRecords> {
    let mut out = GeoRecords::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let nonempty = |s: &str| (!s.is_empty()).then(|| s.to_string());
        let parsed = match fields.as_slice() {
            [name, country] => Some((*name, nonempty(country), None)),
            [name, country, region] => Some((*name, nonempty(country), nonempty(region))),
            _ => None,
        };
        match parsed {
            Some((name, country, region)) if !name.is_empty() => {
                if region.is_some() && country.is_none() {
                    out.rejected += 1;
                    continue;
                }
                out.records.push(GeoRecord {
                    name: name.to_string(),
                    country,
                    region,
                });
            }
            _ => {
                if strict {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "expected `node<TAB>country<TAB>region`".into(),
                    });
                }
                out.malformed_lines += 1;
            }
        }
    }
    Ok(out)
}

/// Node counts per geolocation precision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GeoTallies {
    pub none: usize,
    pub country_only: usize,
    pub country_and_region: usize,
}

/// Per-node labels for one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeoLabels {
    country: Vec<Option<String>>,
    region: Vec<Option<String>>,
    /// Record names that matched no graph node.
    pub unmatched: Vec<String>,
}

impl GeoLabels {
    pub fn unlabeled(n: usize) -> Self {
        GeoLabels {
            country: vec![None; n],
            region: vec![None; n],
            unmatched: Vec::new(),
        }
    }

    /// Attaches records to graph nodes by name. Later rows for the same node win.
    pub fn join(graph: &Graph, records: &GeoRecords) -> Self {
        let mut labels = Self::unlabeled(graph.n());
        for rec in &records.records {
            match graph.id_of(&rec.name) {
                Some(id) => labels.set(id, rec.country.clone(), rec.region.clone()),
                None => labels.unmatched.push(rec.name.clone()),
            }
        }
        labels
    }

    /// Sets node `id`'s labels; a region without a country is discarded.
    pub fn set(&mut self, id: usize, country: Option<String>, region: Option<String>) {
        self.region[id] = if country.is_some() { region } else { None };
        self.country[id] = country;
    }

    pub fn len(&self) -> usize {
        self.country.len()
    }

    pub fn is_empty(&self) -> bool {
        self.country.is_empty()
    }

    pub fn country(&self, id: usize) -> Option<&str> {
        self.country[id].as_deref()
    }

    pub fn region(&self, id: usize) -> Option<&str> {
        self.region[id].as_deref()
    }

    pub fn is_labeled(&self, id: usize) -> bool {
        self.country[id].is_some()
    }

    pub fn tallies(&self) -> GeoTallies {
        let mut t = GeoTallies::default();
        for (c, r) in self.country.iter().zip(&self.region) {
            match (c, r) {
                (None, _) => t.none += 1,
                (Some(_), None) => t.country_only += 1,
                (Some(_), Some(_)) => t.country_and_region += 1,
            }
        }
        t
    }

    /// Group key → member ids (ascending). Region keys are `country/region`.
    pub fn groups(&self, level: Level) -> BTreeMap<String, Vec<u32>> {
        let mut out: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for id in 0..self.len() {
            let key = match (level, &self.country[id], &self.region[id]) {
                (Level::Country, Some(c), _) => c.clone(),
                (Level::Region, Some(c), Some(r)) => format!("{c}/{r}"),
                _ => continue,
            };
            out.entry(key).or_default().push(id as u32);
        }
        out
    }
}

/// Writes labeled nodes as `node<TAB>country<TAB>region`, sorted by name.
pub fn write_geo_tsv<W: Write>(graph: &Graph, labels: &GeoLabels, mut w: W) -> Result<()> {
    for id in 0..graph.n() {
        if let Some(c) = labels.country(id) {
            writeln!(w, "{}\t{}\t{}", graph.name(id), c, labels.region(id).unwrap_or(""))?;
        }
    }
    w.flush()?;
    Ok(())
}
