use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::instance::{AltId, CustomerId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    RrmUncap,
    RrmCap,
    Rum,
    /// Imported or hand-built models without a known family.
    Generic,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::RrmUncap => "rrm-uncap",
            ModelKind::RrmCap => "rrm-cap",
            ModelKind::Rum => "rum",
            ModelKind::Generic => "generic",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rrm-uncap" => Ok(ModelKind::RrmUncap),
            "rrm-cap" => Ok(ModelKind::RrmCap),
            "rum" => Ok(ModelKind::Rum),
            "generic" => Ok(ModelKind::Generic),
            other => Err(format!("unknown model kind '{other}'")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

/// Semantic role of a variable plus its indices. `r` is the 0-based scenario.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    YIn { i: AltId, n: CustomerId },
    YInr { i: AltId, n: CustomerId, r: usize },
    RR { i: AltId, j: AltId, n: CustomerId, r: usize },
    RAlt { i: AltId, n: CustomerId, r: usize },
    RCust { n: CustomerId, r: usize },
    B { i: AltId, j: AltId, n: CustomerId, r: usize },
    Z { i: AltId, j: AltId, n: CustomerId, r: usize },
    W { i: AltId, n: CustomerId, r: usize },
    Lambda { i: AltId, n: CustomerId, l: u32 },
    Alpha { i: AltId, n: CustomerId, r: usize, l: u32 },
    U { i: AltId, n: CustomerId, r: usize },
    UMax { n: CustomerId, r: usize },
    Named(String),
}

impl Tag {
    /// Family prefix used in file names of variables.
    pub fn family(&self) -> &'static str {
        match self {
            Tag::YIn { .. } => "y",
            Tag::YInr { .. } => "yr",
            Tag::RR { .. } => "RR",
            Tag::RAlt { .. } => "R",
            Tag::RCust { .. } => "Rn",
            Tag::B { .. } => "b",
            Tag::Z { .. } => "z",
            Tag::W { .. } => "w",
            Tag::Lambda { .. } => "lambda",
            Tag::Alpha { .. } => "alpha",
            Tag::U { .. } => "U",
            Tag::UMax { .. } => "Umax",
            Tag::Named(_) => "",
        }
    }

    /// Inverse of `Display`; names that do not match a family become `Named`.
    pub fn parse(name: &str) -> Tag {
        Self::parse_known(name).unwrap_or_else(|| Tag::Named(name.to_string()))
    }

    fn parse_known(name: &str) -> Option<Tag> {
        let mut parts = name.split('_');
        let family = parts.next()?;
        let nums: Vec<u64> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
        let u = |k: usize| -> Option<u32> { nums.get(k).and_then(|&x| u32::try_from(x).ok()) };
        let z = |k: usize| -> Option<usize> { nums.get(k).map(|&x| x as usize) };
        let tag = match (family, nums.len()) {
            ("y", 2) => Tag::YIn { i: u(0)?, n: u(1)? },
            ("yr", 3) => Tag::YInr { i: u(0)?, n: u(1)?, r: z(2)? },
            ("RR", 4) => Tag::RR { i: u(0)?, j: u(1)?, n: u(2)?, r: z(3)? },
            ("R", 3) => Tag::RAlt { i: u(0)?, n: u(1)?, r: z(2)? },
            ("Rn", 2) => Tag::RCust { n: u(0)?, r: z(1)? },
            ("b", 4) => Tag::B { i: u(0)?, j: u(1)?, n: u(2)?, r: z(3)? },
            ("z", 4) => Tag::Z { i: u(0)?, j: u(1)?, n: u(2)?, r: z(3)? },
            ("w", 3) => Tag::W { i: u(0)?, n: u(1)?, r: z(2)? },
            ("lambda", 3) => Tag::Lambda { i: u(0)?, n: u(1)?, l: u(2)? },
            ("alpha", 4) => Tag::Alpha { i: u(0)?, n: u(1)?, r: z(2)?, l: u(3)? },
            ("U", 3) => Tag::U { i: u(0)?, n: u(1)?, r: z(2)? },
            ("Umax", 2) => Tag::UMax { n: u(0)?, r: z(1)? },
            _ => return None,
        };
        // reject non-canonical spellings such as leading zeros
        (tag.to_string() == name).then_some(tag)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fam = self.family();
        match self {
            Tag::YIn { i, n } => write!(f, "{fam}_{i}_{n}"),
            Tag::YInr { i, n, r } | Tag::RAlt { i, n, r } | Tag::W { i, n, r } | Tag::U { i, n, r } => {
                write!(f, "{fam}_{i}_{n}_{r}")
            }
            Tag::RR { i, j, n, r } | Tag::B { i, j, n, r } | Tag::Z { i, j, n, r } => {
                write!(f, "{fam}_{i}_{j}_{n}_{r}")
            }
            Tag::RCust { n, r } | Tag::UMax { n, r } => write!(f, "{fam}_{n}_{r}"),
            Tag::Lambda { i, n, l } => write!(f, "{fam}_{i}_{n}_{l}"),
            Tag::Alpha { i, n, r, l } => write!(f, "{fam}_{i}_{n}_{r}_{l}"),
            Tag::Named(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarRef {
    pub id: usize,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub tag: Tag,
}

impl VarRef {
    pub fn name(&self) -> String {
        self.tag.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinConstraint {
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub label: String,
}

impl LinConstraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    /// Whether `values` satisfies the row within `tol`.
    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let a = self.activity(values);
        match self.sense {
            Sense::Le => a <= self.rhs + tol,
            Sense::Ge => a >= self.rhs - tol,
            Sense::Eq => (a - self.rhs).abs() <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjSense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelMeta {
    pub name: String,
    pub kind: ModelKind,
    pub instance_digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ModelCounts {
    pub n_vars: usize,
    pub n_constraints: usize,
    pub n_binaries: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpModel {
    pub variables: Vec<VarRef>,
    pub constraints: Vec<LinConstraint>,
    pub sense: ObjSense,
    /// Sparse objective sorted by variable id.
    pub objective: Vec<(usize, f64)>,
    pub meta: ModelMeta,
    index: BTreeMap<Tag, usize>,
}

impl MilpModel {
    pub fn new(kind: ModelKind, instance_digest: impl Into<String>) -> Self {
        MilpModel {
            variables: Vec::new(),
            constraints: Vec::new(),
            sense: ObjSense::Maximize,
            objective: Vec::new(),
            meta: ModelMeta {
                name: kind.name().to_string(),
                kind,
                instance_digest: instance_digest.into(),
            },
            index: BTreeMap::new(),
        }
    }

    /// Adds a variable; panics if the tag is already taken, since that is a
    /// builder bug rather than an input problem.
    pub fn add_var(&mut self, kind: VarKind, lower: f64, upper: f64, tag: Tag) -> usize {
        let id = self.variables.len();
        let prev = self.index.insert(tag.clone(), id);
        assert!(prev.is_none(), "duplicate variable tag {tag}");
        self.variables.push(VarRef {
            id,
            kind,
            lower,
            upper,
            tag,
        });
        id
    }

    pub fn binary(&mut self, tag: Tag) -> usize {
        self.add_var(VarKind::Binary, 0.0, 1.0, tag)
    }

    pub fn continuous(&mut self, lower: f64, upper: f64, tag: Tag) -> usize {
        self.add_var(VarKind::Continuous, lower, upper, tag)
    }

    /// Adds a row after merging repeated variables and dropping zero
    /// coefficients. Terms are kept sorted by variable id, which is also the
    /// order an MPS reader recovers them in.
    pub fn add_constraint(&mut self, terms: &[(usize, f64)], sense: Sense, rhs: f64, label: impl Into<String>) {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(v, a) in terms {
            assert!(a.is_finite() && rhs.is_finite(), "non-finite row data");
            match merged.iter_mut().find(|(u, _)| *u == v) {
                Some(slot) => slot.1 += a,
                None => merged.push((v, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        merged.sort_by_key(|&(v, _)| v);
        self.constraints.push(LinConstraint {
            terms: merged,
            sense,
            rhs,
            label: label.into(),
        });
    }

    /// Sets one objective coefficient; the sparse list stays sorted by id.
    pub fn set_objective_coef(&mut self, var: usize, coef: f64) {
        match self.objective.binary_search_by_key(&var, |&(v, _)| v) {
            Ok(k) if coef == 0.0 => {
                self.objective.remove(k);
            }
            Ok(k) => self.objective[k].1 = coef,
            Err(_) if coef == 0.0 => {}
            Err(k) => self.objective.insert(k, (var, coef)),
        }
    }

    pub fn var(&self, tag: &Tag) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn tags(&self) -> impl Iterator<Item = (&Tag, usize)> {
        self.index.iter().map(|(t, &v)| (t, v))
    }

    pub fn counts(&self) -> ModelCounts {
        ModelCounts {
            n_vars: self.variables.len(),
            n_constraints: self.constraints.len(),
            n_binaries: self
                .variables
                .iter()
                .filter(|v| v.kind == VarKind::Binary)
                .count(),
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v]).sum()
    }

    /// Ids of binary variables in id order.
    pub fn binaries(&self) -> Vec<usize> {
        self.variables
            .iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.id)
            .collect()
    }

    /// Whether every bound, row and integrality restriction holds within `tol`.
    pub fn is_feasible(&self, values: &[f64], tol: f64) -> bool {
        self.variables.iter().all(|v| {
            let x = values[v.id];
            x >= v.lower - tol
                && x <= v.upper + tol
                && (v.kind == VarKind::Continuous || (x - x.round()).abs() <= tol)
        }) && self.constraints.iter().all(|c| c.satisfied(values, tol))
    }
}

/// Free function form used by the harness.
pub fn model_counts(model: &MilpModel) -> ModelCounts {
    model.counts()
}
