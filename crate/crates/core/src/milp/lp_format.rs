//! CPLEX LP text export, same content and ordering as the MPS writer.

use std::fmt::Write as _;

use super::model::{MilpModel, ObjSense, Sense, VarKind};
use super::mps::row_names;

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, names: &[String], terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0 ");
        out.push_str(names.first().map_or("x", String::as_str));
        return;
    }
    for (k, &(v, a)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), names[v]);
    }
}

pub fn export_lp(model: &MilpModel) -> String {
    let names: Vec<String> = model.variables.iter().map(|v| v.name()).collect();
    let rows = row_names(model);
    let mut out = String::new();
    let _ = writeln!(out, "\\ kind: {}", model.meta.kind);
    let _ = writeln!(out, "\\ instance: {}", model.meta.instance_digest);
    out.push_str(match model.sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, &names, &model.objective);
    out.push_str("\nSubject To\n");
    for (c, name) in model.constraints.iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        write_terms(&mut out, &names, &c.terms);
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", c.rhs);
    }
    out.push_str("Bounds\n");
    for (v, name) in model.variables.iter().zip(&names) {
        let (lo, hi) = (v.lower, v.upper);
        if v.kind == VarKind::Binary && lo == 0.0 && hi == 1.0 {
            continue;
        }
        if lo == hi {
            let _ = writeln!(out, " {name} = {lo}");
        } else if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {name} free");
        } else {
            let lo_s = if lo == f64::NEG_INFINITY { "-inf".to_string() } else { lo.to_string() };
            let hi_s = if hi == f64::INFINITY { "+inf".to_string() } else { hi.to_string() };
            let _ = writeln!(out, " {lo_s} <= {name} <= {hi_s}");
        }
    }
    let bins: Vec<&str> = model
        .variables
        .iter()
        .zip(&names)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for chunk in bins.chunks(TERMS_PER_LINE) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
