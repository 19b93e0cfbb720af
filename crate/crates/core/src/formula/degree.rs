use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Connective, Formula};

/// Nesting degree of every measured connective. A connective that is absent
/// from a textual or JSON representation has degree 0.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DegreeVector([u32; 4]);

impl DegreeVector {
    pub const ZERO: DegreeVector = DegreeVector([0; 4]);

    pub fn get(&self, c: Connective) -> u32 {
        self.0[c.index()]
    }

    pub fn set(&mut self, c: Connective, value: u32) {
        self.0[c.index()] = value;
    }

    pub fn with(mut self, c: Connective, value: u32) -> Self {
        self.set(c, value);
        self
    }

    /// Componentwise maximum.
    pub fn join(&self, other: &DegreeVector) -> DegreeVector {
        let mut out = *self;
        for i in 0..4 {
            out.0[i] = out.0[i].max(other.0[i]);
        }
        out
    }

    /// Componentwise `<=`.
    pub fn within(&self, caps: &DegreeVector) -> bool {
        self.0.iter().zip(caps.0.iter()).all(|(d, c)| d <= c)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Connective, u32)> + '_ {
        Connective::ALL.iter().map(move |&c| (c, self.get(c)))
    }

    /// Parses `"=>:2,&:1"`; unlisted connectives are 0.
    pub fn parse(text: &str) -> Result<DegreeVector, String> {
        let mut out = DegreeVector::ZERO;
        let mut seen = Vec::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (sym, value) = part
                .rsplit_once(':')
                .ok_or_else(|| format!("expected `connective:degree`, found `{part}`"))?;
            let c = Connective::from_symbol(sym.trim())
                .ok_or_else(|| format!("unknown connective `{}`", sym.trim()))?;
            if seen.contains(&c) {
                return Err(format!("connective `{c}` listed twice"));
            }
            seen.push(c);
            let v = value
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("invalid degree `{}` for `{c}`", value.trim()))?;
            out.set(c, v);
        }
        Ok(out)
    }
}

impl fmt::Display for DegreeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|(c, d)| format!("{c}:{d}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl Serialize for DegreeVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        for (c, d) in self.iter() {
            map.serialize_entry(c.symbol(), &d)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for DegreeVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<String, u32>::deserialize(deserializer)?;
        let mut out = DegreeVector::ZERO;
        for (k, v) in raw {
            let c = Connective::from_symbol(&k)
                .ok_or_else(|| serde::de::Error::custom(format!("unknown connective `{k}`")))?;
            out.set(c, v);
        }
        Ok(out)
    }
}

/// `D_θ(f)`: 0 without an occurrence of θ, one more than the children's
/// maximum at a θ node, the plain maximum at other connectives, and
/// transparent under quantifiers.
pub fn connective_degree(f: &Formula, c: Connective) -> u32 {
    match f {
        Formula::Schema(_) | Formula::Pred(..) => 0,
        Formula::Quant(_, _, body) => connective_degree(body, c),
        Formula::Not(child) => {
            let d = connective_degree(child, c);
            if c == Connective::Not {
                d + 1
            } else {
                d
            }
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
            let d = connective_degree(l, c).max(connective_degree(r, c));
            if f.connective() == Some(c) {
                d + 1
            } else {
                d
            }
        }
    }
}

/// All four degrees in one pass.
pub fn degree_vector(f: &Formula) -> DegreeVector {
    match f {
        Formula::Schema(_) | Formula::Pred(..) => DegreeVector::ZERO,
        Formula::Quant(_, _, body) => degree_vector(body),
        Formula::Not(child) => {
            let mut d = degree_vector(child);
            d.0[Connective::Not.index()] += 1;
            d
        }
        Formula::And(l, r) | Formula::Or(l, r) | Formula::Entail(l, r) => {
            let mut d = degree_vector(l).join(&degree_vector(r));
            if let Some(c) = f.connective() {
                d.0[c.index()] += 1;
            }
            d
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Classification {
    ZeroDegree,
    FirstDegreeConditional,
    FirstDegree,
    KthDegree(u32),
}

impl Classification {
    /// The conditional degree the label implies.
    pub fn degree(self) -> u32 {
        match self {
            Classification::ZeroDegree => 0,
            Classification::FirstDegreeConditional | Classification::FirstDegree => 1,
            Classification::KthDegree(k) => k,
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::ZeroDegree => f.write_str("zero-degree"),
            Classification::FirstDegreeConditional => f.write_str("first-degree-conditional"),
            Classification::FirstDegree => f.write_str("first-degree"),
            Classification::KthDegree(k) => write!(f, "kth-degree({k})"),
        }
    }
}

fn is_zero_degree(f: &Formula) -> bool {
    connective_degree(f, Connective::Entail) == 0
}

fn is_first_degree_conditional(f: &Formula) -> bool {
    matches!(f.matrix(), Formula::Entail(a, b) if is_zero_degree(a) && is_zero_degree(b))
}

/// The inductive notion of a first degree formula: a first degree
/// conditional, a one-place connective over a first degree formula, or a
/// two-place non-conditional connective joining first degree formulas (or one
/// first degree and one zero degree formula), each under an optional
/// quantifier prefix.
pub fn is_first_degree(f: &Formula) -> bool {
    match f.matrix() {
        Formula::Entail(..) => is_first_degree_conditional(f),
        Formula::Not(b) => is_first_degree(b),
        Formula::And(b, c) | Formula::Or(b, c) => {
            let (fb, fc) = (is_first_degree(b), is_first_degree(c));
            (fb && fc) || (fb && is_zero_degree(c)) || (is_zero_degree(b) && fc)
        }
        _ => false,
    }
}

/// Most specific label for `f`.
pub fn classify_formula(f: &Formula) -> Classification {
    if is_zero_degree(f) {
        Classification::ZeroDegree
    } else if is_first_degree_conditional(f) {
        Classification::FirstDegreeConditional
    } else if is_first_degree(f) {
        Classification::FirstDegree
    } else {
        Classification::KthDegree(connective_degree(f, Connective::Entail))
    }
}
