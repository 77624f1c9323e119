//! Free-format MPS reader and writer.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use super::model::{MilpModel, ModelKind, ObjSense, Sense, Tag, VarKind};

const OBJ_ROW: &str = "obj";

#[derive(Debug, Error, PartialEq)]
#[error("MPS parse error in {section} at line {line}: {message}")]
pub struct MpsError {
    pub section: String,
    pub line: usize,
    pub message: String,
}

/// Unique, whitespace-free row names in constraint order.
pub(crate) fn row_names(model: &MilpModel) -> Vec<String> {
    let mut seen = BTreeSet::new();
    seen.insert(OBJ_ROW.to_string());
    model
        .constraints
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mut name: String = c
                .label
                .chars()
                .map(|ch| if ch.is_whitespace() { '_' } else { ch })
                .collect();
            if name.is_empty() {
                name = format!("c{k}");
            }
            if seen.contains(&name) {
                name = format!("{name}_{k}");
            }
            seen.insert(name.clone());
            name
        })
        .collect()
}

pub fn export_mps(model: &MilpModel) -> String {
    let rows = row_names(model);
    let cols: Vec<String> = model.variables.iter().map(|v| v.name()).collect();
    let mut out = String::new();
    let _ = writeln!(out, "* kind: {}", model.meta.kind);
    let _ = writeln!(out, "* instance: {}", model.meta.instance_digest);
    let _ = writeln!(out, "NAME {}", model.meta.name);
    out.push_str("OBJSENSE\n");
    out.push_str(match model.sense {
        ObjSense::Maximize => "    MAX\n",
        ObjSense::Minimize => "    MIN\n",
    });
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (c, name) in model.constraints.iter().zip(&rows) {
        let s = match c.sense {
            Sense::Le => 'L',
            Sense::Ge => 'G',
            Sense::Eq => 'E',
        };
        let _ = writeln!(out, " {s}  {name}");
    }

    // column-major view of the matrix
    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.variables.len()];
    for (k, c) in model.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            by_col[v].push((k, a));
        }
    }
    let mut obj = vec![0.0; model.variables.len()];
    for &(v, c) in &model.objective {
        obj[v] = c;
    }
    out.push_str("COLUMNS\n");
    for (v, col) in by_col.iter().enumerate() {
        let name = &cols[v];
        if obj[v] != 0.0 || col.is_empty() {
            let _ = writeln!(out, "    {name}  {OBJ_ROW}  {}", obj[v]);
        }
        for &(k, a) in col {
            let _ = writeln!(out, "    {name}  {}  {a}", rows[k]);
        }
    }

    out.push_str("RHS\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        if c.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {name}  {}", c.rhs);
        }
    }
    out.push_str("RANGES\n");
    out.push_str("BOUNDS\n");
    for (v, name) in model.variables.iter().zip(&cols) {
        let (lo, hi) = (v.lower, v.upper);
        if v.kind == VarKind::Binary {
            // a fixed binary as BV plus UP reads as a duplicate bound in some solvers
            if (lo, hi) == (0.0, 1.0) {
                let _ = writeln!(out, " BV BND  {name}");
            } else {
                if lo != 0.0 {
                    let _ = writeln!(out, " LI BND  {name}  {lo}");
                }
                let _ = writeln!(out, " UI BND  {name}  {hi}");
            }
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " FX BND  {name}  {lo}");
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " FR BND  {name}");
        } else {
            if lo == f64::NEG_INFINITY {
                let _ = writeln!(out, " MI BND  {name}");
            } else if lo != 0.0 {
                let _ = writeln!(out, " LO BND  {name}  {lo}");
            }
            if hi != f64::INFINITY {
                let _ = writeln!(out, " UP BND  {name}  {hi}");
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Start,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

impl Section {
    fn label(self) -> &'static str {
        match self {
            Section::Start => "header",
            Section::Name => "NAME",
            Section::ObjSense => "OBJSENSE",
            Section::Rows => "ROWS",
            Section::Columns => "COLUMNS",
            Section::Rhs => "RHS",
            Section::Ranges => "RANGES",
            Section::Bounds => "BOUNDS",
            Section::End => "ENDATA",
        }
    }
}

struct RowInfo {
    name: String,
    sense: Sense,
    rhs: f64,
    range: Option<f64>,
    terms: Vec<(usize, f64)>,
}

struct ColInfo {
    name: String,
    integer: bool,
    lower: f64,
    upper: f64,
    obj: f64,
}

pub fn import_mps(text: &str) -> Result<MilpModel, MpsError> {
    let mut section = Section::Start;
    let mut kind = ModelKind::Generic;
    let mut digest = String::new();
    let mut name = String::new();
    let mut sense = ObjSense::Minimize;
    let mut obj_row: Option<String> = None;
    let mut free_rows: BTreeSet<String> = BTreeSet::new();
    let mut rows: Vec<RowInfo> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<ColInfo> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut in_marker = false;

    for (ln0, raw) in text.lines().enumerate() {
        let line_no = ln0 + 1;
        let err = |section: Section, message: String| MpsError {
            section: section.label().to_string(),
            line: line_no,
            message,
        };
        let trimmed = raw.trim_end();
        if let Some(comment) = trimmed.strip_prefix('*') {
            let c = comment.trim();
            if let Some(k) = c.strip_prefix("kind:") {
                kind = k.trim().parse().unwrap_or(ModelKind::Generic);
            } else if let Some(d) = c.strip_prefix("instance:") {
                digest = d.trim().to_string();
            }
            continue;
        }
        if trimmed.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let is_header = !raw.starts_with(' ') && !raw.starts_with('\t');
        if is_header {
            let next = match tokens[0] {
                "NAME" => {
                    name = tokens.get(1).map(|s| s.to_string()).unwrap_or_default();
                    Section::Name
                }
                "OBJSENSE" => {
                    if let Some(s) = tokens.get(1) {
                        sense = parse_sense(s).ok_or_else(|| err(Section::ObjSense, format!("unknown sense '{s}'")))?;
                    }
                    Section::ObjSense
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => Section::Ranges,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                other if section == Section::ObjSense && parse_sense(other).is_some() => {
                    sense = parse_sense(other).unwrap();
                    continue;
                }
                other => {
                    return Err(err(section, format!("unknown section '{other}'")));
                }
            };
            section = next;
            if section == Section::End {
                break;
            }
            continue;
        }

        match section {
            Section::Start | Section::Name | Section::End => {
                return Err(err(section, format!("unexpected data line '{}'", trimmed.trim())));
            }
            Section::ObjSense => {
                sense = parse_sense(tokens[0])
                    .ok_or_else(|| err(section, format!("unknown sense '{}'", tokens[0])))?;
            }
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(section, "expected '<type> <name>'".into()));
                }
                let rname = tokens[1].to_string();
                let s = match tokens[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(rname);
                        } else {
                            free_rows.insert(rname);
                        }
                        continue;
                    }
                    "L" => Sense::Le,
                    "G" => Sense::Ge,
                    "E" => Sense::Eq,
                    t => return Err(err(section, format!("unknown row type '{t}'"))),
                };
                if row_index.contains_key(&rname) || obj_row.as_deref() == Some(rname.as_str()) {
                    return Err(err(section, format!("duplicate row '{rname}'")));
                }
                row_index.insert(rname.clone(), rows.len());
                rows.push(RowInfo {
                    name: rname,
                    sense: s,
                    rhs: 0.0,
                    range: None,
                    terms: Vec::new(),
                });
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match tokens[2] {
                        "'INTORG'" => in_marker = true,
                        "'INTEND'" => in_marker = false,
                        m => return Err(err(section, format!("unknown marker {m}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(err(section, "expected '<column> <row> <value> [<row> <value>]'".into()));
                }
                let cname = tokens[0];
                let v = *col_index.entry(cname.to_string()).or_insert_with(|| {
                    cols.push(ColInfo {
                        name: cname.to_string(),
                        integer: in_marker,
                        lower: 0.0,
                        upper: if in_marker { 1.0 } else { f64::INFINITY },
                        obj: 0.0,
                    });
                    cols.len() - 1
                });
                for pair in tokens[1..].chunks(2) {
                    let val = parse_num(pair[1]).ok_or_else(|| err(section, format!("bad number '{}'", pair[1])))?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        cols[v].obj += val;
                    } else if free_rows.contains(pair[0]) {
                        continue;
                    } else {
                        let &k = row_index
                            .get(pair[0])
                            .ok_or_else(|| err(section, format!("unknown row '{}'", pair[0])))?;
                        if val != 0.0 {
                            rows[k].terms.push((v, val));
                        }
                    }
                }
            }
            Section::Rhs | Section::Ranges => {
                let body = match tokens.len() {
                    2 | 4 => &tokens[..],
                    3 | 5 => &tokens[1..],
                    _ => return Err(err(section, "expected '[set] <row> <value> [<row> <value>]'".into())),
                };
                for pair in body.chunks(2) {
                    let val = parse_num(pair[1]).ok_or_else(|| err(section, format!("bad number '{}'", pair[1])))?;
                    if obj_row.as_deref() == Some(pair[0]) {
                        return Err(err(section, format!("objective row '{}' cannot carry a {}", pair[0], section.label())));
                    }
                    if free_rows.contains(pair[0]) {
                        continue;
                    }
                    let &k = row_index
                        .get(pair[0])
                        .ok_or_else(|| err(section, format!("unknown row '{}'", pair[0])))?;
                    if section == Section::Rhs {
                        rows[k].rhs = val;
                    } else {
                        rows[k].range = Some(val);
                    }
                }
            }
            Section::Bounds => {
                let btype = tokens[0];
                let needs_value = matches!(btype, "UP" | "LO" | "FX" | "LI" | "UI");
                let (cname, value) = match (needs_value, tokens.len()) {
                    (true, 3) => (tokens[1], Some(tokens[2])),
                    (true, 4) => (tokens[2], Some(tokens[3])),
                    (false, 2) => (tokens[1], None),
                    (false, 3) => (tokens[2], None),
                    (false, 4) => (tokens[2], None),
                    _ => return Err(err(section, format!("malformed {btype} bound"))),
                };
                let &v = col_index
                    .get(cname)
                    .ok_or_else(|| err(section, format!("unknown column '{cname}'")))?;
                let val = match value {
                    Some(s) => Some(parse_num(s).ok_or_else(|| err(section, format!("bad number '{s}'")))?),
                    None => None,
                };
                let col = &mut cols[v];
                match btype {
                    "UP" | "UI" => {
                        col.upper = val.unwrap();
                        if btype == "UI" {
                            col.integer = true;
                        }
                    }
                    "LO" | "LI" => {
                        col.lower = val.unwrap();
                        if btype == "LI" {
                            col.integer = true;
                        }
                    }
                    "FX" => {
                        col.lower = val.unwrap();
                        col.upper = val.unwrap();
                    }
                    "FR" => {
                        col.lower = f64::NEG_INFINITY;
                        col.upper = f64::INFINITY;
                    }
                    "MI" => col.lower = f64::NEG_INFINITY,
                    "PL" => col.upper = f64::INFINITY,
                    "BV" => {
                        col.integer = true;
                        col.lower = 0.0;
                        col.upper = 1.0;
                    }
                    t => return Err(err(section, format!("unknown bound type '{t}'"))),
                }
            }
        }
    }
    if section != Section::End {
        return Err(MpsError {
            section: section.label().to_string(),
            line: text.lines().count(),
            message: "missing ENDATA".into(),
        });
    }

    let mut model = MilpModel::new(kind, digest);
    if !name.is_empty() {
        model.meta.name = name;
    }
    model.sense = sense;
    for c in &cols {
        let vk = if c.integer {
            if c.lower < 0.0 || c.upper > 1.0 {
                return Err(MpsError {
                    section: "BOUNDS".into(),
                    line: 0,
                    message: format!("general integer column '{}' is not supported", c.name),
                });
            }
            VarKind::Binary
        } else {
            VarKind::Continuous
        };
        let id = model.add_var(vk, c.lower, c.upper, Tag::parse(&c.name));
        if c.obj != 0.0 {
            model.set_objective_coef(id, c.obj);
        }
    }
    for row in rows {
        match (row.range, row.sense) {
            (None, s) => model.add_constraint(&row.terms, s, row.rhs, row.name),
            (Some(rg), s) => {
                let (lo, hi) = match s {
                    Sense::Le => (row.rhs - rg.abs(), row.rhs),
                    Sense::Ge => (row.rhs, row.rhs + rg.abs()),
                    Sense::Eq if rg >= 0.0 => (row.rhs, row.rhs + rg),
                    Sense::Eq => (row.rhs + rg, row.rhs),
                };
                model.add_constraint(&row.terms, Sense::Ge, lo, format!("{}_lo", row.name));
                model.add_constraint(&row.terms, Sense::Le, hi, format!("{}_hi", row.name));
            }
        }
    }
    Ok(model)
}

fn parse_sense(s: &str) -> Option<ObjSense> {
    match s.to_ascii_uppercase().as_str() {
        "MAX" | "MAXIMIZE" => Some(ObjSense::Maximize),
        "MIN" | "MINIMIZE" => Some(ObjSense::Minimize),
        _ => None,
    }
}

fn parse_num(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "1e30" | "1e+30" => Some(f64::INFINITY),
        "-inf" | "-infinity" | "-1e30" | "-1e+30" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}
