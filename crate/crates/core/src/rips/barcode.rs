use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Right endpoint of a bar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Death {
    Finite(Rational),
    Infinite,
}

impl Death {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Death::Finite(r) => Some(r),
            Death::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Death::Infinite)
    }
}

impl Ord for Death {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Death::Finite(a), Death::Finite(b)) => a.cmp(b),
            (Death::Finite(_), Death::Infinite) => Ordering::Less,
            (Death::Infinite, Death::Finite(_)) => Ordering::Greater,
            (Death::Infinite, Death::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Death {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Death {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Death::Finite(r) => write!(f, "{r}"),
            Death::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Death {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Death {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Death::Finite(Rational::from_integer(v))),
            Raw::Text(t) => match t.trim() {
                "inf" | "Infinity" | "infinity" | "∞" => Ok(Death::Infinite),
                other => other.parse().map(Death::Finite).map_err(serde::de::Error::custom),
            },
        }
    }
}

/// A persistence interval `(birth, death]` in dimension `dim`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bar {
    pub dim: usize,
    pub birth: Rational,
    pub death: Death,
}

impl Bar {
    pub fn new(dim: usize, birth: Rational, death: Death) -> Self {
        Bar { dim, birth, death }
    }

    pub fn finite(dim: usize, birth: Rational, death: Rational) -> Self {
        Bar::new(dim, birth, Death::Finite(death))
    }

    pub fn infinite(dim: usize, birth: Rational) -> Self {
        Bar::new(dim, birth, Death::Infinite)
    }

    /// Whether scale `t` lies in `(birth, death]`.
    pub fn contains(&self, t: &Rational) -> bool {
        *t > self.birth && self.death.finite().is_none_or(|d| t <= d)
    }
}

impl fmt::Display for Bar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{} ({}, {}]", self.dim, self.birth, self.death)
    }
}

/// A multiset of bars, kept sorted by `(dim, birth, death)`.
///
/// `field` is the characteristic the bars were computed over; 0 marks a
/// barcode valid over every field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Barcode {
    field: u32,
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(field: u32, mut bars: Vec<Bar>) -> Self {
        bars.sort();
        Barcode { field, bars }
    }

    pub fn field(&self) -> u32 {
        self.field
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> + '_ {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    pub fn multiplicity(&self, bar: &Bar) -> usize {
        self.bars.iter().filter(|b| *b == bar).count()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.bars.iter().map(|b| b.dim).max()
    }

    /// Bars in the given dimension only.
    pub fn restrict_dim(&self, dim: usize) -> Barcode {
        Barcode::new(self.field, self.in_dim(dim).cloned().collect())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.bars).expect("bars serialize")
    }

    pub fn from_json(text: &str, field: u32) -> Result<Barcode> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let bars: Vec<Bar> = serde_path_to_error::deserialize(de).map_err(|err| Error::Schema {
            path: err.path().to_string(),
            message: err.inner().to_string(),
        })?;
        Ok(Barcode::new(field, bars))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,birth,death\n");
        for b in &self.bars {
            out.push_str(&format!("{},{},{}\n", b.dim, b.birth, b.death));
        }
        out
    }
}

impl fmt::Display for Barcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.bars.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Barcode of the open Rips filtration of a geodesic circle of the given
/// circumference, through dimension `max_dim`.
///
/// One bar `(0, inf)` in dimension 0 and, in each odd dimension `2k + 1`, one
/// bar `(kL / (2k + 1), (k + 1)L / (2k + 3)]`; even dimensions above 0 are empty.
pub fn circle_barcode_oracle(total_length: &Rational, max_dim: usize) -> Barcode {
    let mut bars = vec![Bar::infinite(0, Rational::zero())];
    let mut k = 0i64;
    while (2 * k + 1) as usize <= max_dim {
        let birth = total_length * Rational::new(k, 2 * k + 1);
        let death = total_length * Rational::new(k + 1, 2 * k + 3);
        bars.push(Bar::finite((2 * k + 1) as usize, birth, death));
        k += 1;
    }
    Barcode::new(0, bars)
}

/// Outcome of matching a computed barcode against a reference.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MatchReport {
    /// `(computed, reference)` pairs.
    pub matched: Vec<(Bar, Bar)>,
    pub unmatched_computed: Vec<Bar>,
    pub unmatched_reference: Vec<Bar>,
}

impl MatchReport {
    pub fn is_full_match(&self) -> bool {
        self.unmatched_computed.is_empty() && self.unmatched_reference.is_empty()
    }
}

fn endpoint_gap(a: &Bar, b: &Bar) -> Option<Rational> {
    let birth = (&a.birth - &b.birth).abs();
    let death = match (&a.death, &b.death) {
        (Death::Finite(x), Death::Finite(y)) => (x - y).abs(),
        (Death::Infinite, Death::Infinite) => Rational::zero(),
        _ => return None,
    };
    Some(birth.max(death))
}

/// Greedy per-dimension matching: each reference bar, in sorted order, takes
/// the closest unmatched computed bar whose endpoints both lie within `tol`.
/// Infinite deaths match only infinite deaths.
pub fn match_barcodes(computed: &Barcode, reference: &Barcode, tol: &Rational) -> MatchReport {
    let mut used = vec![false; computed.bars.len()];
    let mut report = MatchReport::default();
    for r in &reference.bars {
        let mut best: Option<(usize, Rational)> = None;
        for (i, c) in computed.bars.iter().enumerate() {
            if used[i] || c.dim != r.dim {
                continue;
            }
            if let Some(gap) = endpoint_gap(c, r) {
                if gap <= *tol && best.as_ref().is_none_or(|(_, g)| gap < *g) {
                    best = Some((i, gap));
                }
            }
        }
        match best {
            Some((i, _)) => {
                used[i] = true;
                report.matched.push((computed.bars[i].clone(), r.clone()));
            }
            None => report.unmatched_reference.push(r.clone()),
        }
    }
    report.unmatched_computed = computed
        .bars
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(b, _)| b.clone())
        .collect();
    report
}
