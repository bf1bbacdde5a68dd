//! CPLEX LP text export, a structural reader for it, and solution files.

use std::collections::HashMap;
use std::fmt::Write;

use fjsp_core::Schedule;

use crate::error::{MilpError, Result};
use crate::model::{MilpModel, Sense, VarKind};
use crate::solver::SolveStatus;

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    let sign = if coef < 0.0 { '-' } else { '+' };
    let mag = coef.abs();
    if first {
        if coef < 0.0 {
            out.push_str("- ");
        }
    } else {
        let _ = write!(out, " {sign} ");
    }
    if mag != 1.0 {
        let _ = write!(out, "{mag} ");
    }
    out.push_str(name);
}

pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ FJSP re-solve at t={} with big-M {}", model.t_now, model.big_m);
    let _ = writeln!(out, "Minimize");
    let _ = writeln!(out, " obj: {}", model.vars[model.objective.0].name);
    let _ = writeln!(out, "Subject To");
    for c in &model.constraints {
        let mut line = format!(" {}: ", c.name);
        for (i, (v, a)) in c.terms.iter().enumerate() {
            term(&mut line, i == 0, *a, &model.vars[v.0].name);
        }
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, "{line} {op} {}", c.rhs);
    }
    let _ = writeln!(out, "Bounds");
    for v in model.vars.iter().filter(|v| v.kind == VarKind::Continuous) {
        let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
    }
    let _ = writeln!(out, "Binaries");
    for v in model.vars.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(out, " {}", v.name);
    }
    let _ = writeln!(out, "End");
    out
}

/// Section contents of an LP file, as read back.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpStructure {
    pub objective: String,
    pub constraints: Vec<String>,
    pub bounds: Vec<String>,
    pub binaries: Vec<String>,
}

pub fn parse_lp(text: &str) -> Result<LpStructure> {
    #[derive(PartialEq)]
    enum Section {
        Head,
        Objective,
        Constraints,
        Bounds,
        Binaries,
        End,
    }
    let mut s = LpStructure::default();
    let mut sec = Section::Head;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        let err = |msg: &str| MilpError::Parse { line: n + 1, msg: msg.to_string() };
        match line.to_ascii_lowercase().as_str() {
            "minimize" => sec = Section::Objective,
            "subject to" => sec = Section::Constraints,
            "bounds" => sec = Section::Bounds,
            "binaries" => sec = Section::Binaries,
            "end" => sec = Section::End,
            _ => match sec {
                Section::Objective => {
                    let (_, expr) = line.split_once(':').ok_or_else(|| err("objective needs a label"))?;
                    s.objective = expr.trim().to_string();
                }
                Section::Constraints => {
                    let (name, _) = line.split_once(':').ok_or_else(|| err("constraint needs a label"))?;
                    if !["<=", ">=", "="].iter().any(|op| line.contains(op)) {
                        return Err(err("constraint has no relation"));
                    }
                    s.constraints.push(name.trim().to_string());
                }
                Section::Bounds => {
                    let parts: Vec<&str> = line.split("<=").map(str::trim).collect();
                    if parts.len() != 3 {
                        return Err(err("expected `lower <= name <= upper`"));
                    }
                    s.bounds.push(parts[1].to_string());
                }
                Section::Binaries => s.binaries.extend(line.split_whitespace().map(String::from)),
                Section::Head | Section::End => return Err(err("text outside any section")),
            },
        }
    }
    if sec != Section::End {
        return Err(MilpError::Parse { line: text.lines().count(), msg: "missing End".into() });
    }
    Ok(s)
}

/// True when a name is safe in LP files: starts with a letter, then letters,
/// digits and underscores, and is not a section keyword.
pub fn is_valid_lp_name(name: &str) -> bool {
    const RESERVED: [&str; 12] =
        ["minimize", "maximize", "subject", "to", "st", "bounds", "binaries", "binary", "general", "end", "free", "inf"];
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !RESERVED.contains(&name.to_ascii_lowercase().as_str())
}

/// Reads `name value` lines (`#` comments; an optional `# status <word>`
/// header). Variables not listed are zero.
pub fn parse_solution(model: &MilpModel, text: &str) -> Result<(SolveStatus, Schedule)> {
    let index: HashMap<&str, usize> = model.vars.iter().enumerate().map(|(i, v)| (v.name.as_str(), i)).collect();
    let mut values = vec![0.0; model.vars.len()];
    let mut status = SolveStatus::FeasibleTimeLimit;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next().map(|w| w.trim_end_matches(':').eq_ignore_ascii_case("status")) == Some(true) {
                status = match words.next().map(str::to_ascii_lowercase).as_deref() {
                    Some("optimal") => SolveStatus::Optimal,
                    Some("infeasible") => SolveStatus::Infeasible,
                    Some("feasible") | Some("feasible-time-limit") | Some("time_limit") => {
                        SolveStatus::FeasibleTimeLimit
                    }
                    _ => SolveStatus::Error,
                };
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| MilpError::Parse { line: n + 1, msg };
        let mut parts = line.split_whitespace();
        let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(err(format!("expected `name value`, got `{line}`")));
        };
        let &i = index.get(name).ok_or_else(|| err(format!("unknown variable {name}")))?;
        values[i] = value.parse().map_err(|_| err(format!("bad number {value}")))?;
    }
    if matches!(status, SolveStatus::Infeasible | SolveStatus::Error) {
        return Ok((status, Schedule::new()));
    }
    Ok((status, model.decode(&values)?))
}

/// Writes a solution file in the format read by [`parse_solution`].
pub fn write_solution(model: &MilpModel, values: &[f64], status: SolveStatus) -> String {
    let mut out = String::new();
    let word = match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::FeasibleTimeLimit => "feasible",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::Error => "error",
    };
    let _ = writeln!(out, "# status {word}");
    for (v, x) in model.vars.iter().zip(values) {
        let _ = writeln!(out, "{} {}", v.name, x);
    }
    out
}
