//! Problem-file language: parsing, elaboration into jets and forms, canonical
//! printing, task dispatch and certificate documents.

pub mod elaborate;
pub mod lexer;
pub mod parser;
pub mod print;
pub mod tasks;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

pub use elaborate::{Elaborator, Value};
pub use parser::{DefKind, Expr, ExprKind};
pub use tasks::{run_task, Status, TaskReport};

use parser::{parse_statements, Statement};

pub const DEFAULT_DEGREE: u32 = 10;
pub const DEFAULT_TORDER: u32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct DslError {
    pub pos: Option<Pos>,
    pub message: String,
}

impl DslError {
    pub fn at(pos: Pos, message: impl Into<String>) -> Self {
        DslError {
            pos: Some(pos),
            message: message.into(),
        }
    }

    pub fn general(message: impl Into<String>) -> Self {
        DslError {
            pos: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for DslError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.pos {
            Some(p) => write!(f, "{p}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TaskName {
    CheckIntegrability,
    DecomposeRelative,
    DecomposeInvariant,
    Normalize,
    EmbedQh,
    Certify,
    AnalyzeSingularity,
    Theorem3,
}

impl TaskName {
    pub const ALL: [TaskName; 8] = [
        TaskName::CheckIntegrability,
        TaskName::DecomposeRelative,
        TaskName::DecomposeInvariant,
        TaskName::Normalize,
        TaskName::EmbedQh,
        TaskName::Certify,
        TaskName::AnalyzeSingularity,
        TaskName::Theorem3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskName::CheckIntegrability => "check-integrability",
            TaskName::DecomposeRelative => "decompose-relative",
            TaskName::DecomposeInvariant => "decompose-invariant",
            TaskName::Normalize => "normalize",
            TaskName::EmbedQh => "embed-qh",
            TaskName::Certify => "certify",
            TaskName::AnalyzeSingularity => "analyze-singularity",
            TaskName::Theorem3 => "theorem3",
        }
    }
}

impl FromStr for TaskName {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        TaskName::ALL.into_iter().find(|t| t.as_str() == s).ok_or(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub kind: DefKind,
    pub name: String,
    pub expr: Expr,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveDefinition {
    pub name: String,
    pub param: String,
    pub coords: Vec<Expr>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskCall {
    pub name: TaskName,
    pub args: Vec<Expr>,
    pub pos: Pos,
}

/// A parsed and name-checked problem file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemFile {
    pub vars: Vec<String>,
    pub degree: Option<u32>,
    pub torder: Option<u32>,
    pub weights: Option<Vec<u32>>,
    pub definitions: Vec<Definition>,
    pub curves: Vec<CurveDefinition>,
    pub task: TaskCall,
}

/// Truncation orders after command-line overrides.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Settings {
    pub degree: u32,
    pub torder: u32,
    pub degree_source: Source,
    pub torder_source: Source,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    File,
    Flag,
    Default,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::File => "file",
            Source::Flag => "flag",
            Source::Default => "default",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub degree: Option<u32>,
    pub torder: Option<u32>,
}

impl ProblemFile {
    pub fn settings(&self, overrides: Overrides) -> Settings {
        let pick = |flag: Option<u32>, file: Option<u32>, default: u32| match (flag, file) {
            (Some(v), _) => (v, Source::Flag),
            (None, Some(v)) => (v, Source::File),
            (None, None) => (default, Source::Default),
        };
        let (degree, degree_source) = pick(overrides.degree, self.degree, DEFAULT_DEGREE);
        let (torder, torder_source) = pick(overrides.torder, self.torder, DEFAULT_TORDER);
        Settings {
            degree,
            torder,
            degree_source,
            torder_source,
        }
    }
}

pub(crate) const KEYWORDS: [&str; 10] = [
    "vars", "degree", "torder", "weights", "poly", "form", "family", "curve", "task", "t",
];
pub(crate) const BUILTINS: [&str; 2] = ["d", "diff"];

pub fn parse_problem(text: &str) -> Result<ProblemFile, DslError> {
    let statements = parse_statements(text)?;
    let mut vars: Option<Vec<String>> = None;
    let mut degree = None;
    let mut torder = None;
    let mut weights = None;
    let mut definitions = Vec::new();
    let mut curves = Vec::new();
    let mut task = None;
    let mut defined: HashSet<String> = HashSet::new();

    for stmt in statements {
        match stmt {
            Statement::Vars(names) => {
                if vars.is_some() {
                    return Err(DslError::at(names[0].1, "variables are already declared"));
                }
                let mut seen = HashSet::new();
                for (name, pos) in &names {
                    if KEYWORDS.contains(&name.as_str()) || BUILTINS.contains(&name.as_str()) {
                        return Err(DslError::at(*pos, format!("`{name}` is reserved")));
                    }
                    if !seen.insert(name.clone()) {
                        return Err(DslError::at(*pos, format!("variable `{name}` declared twice")));
                    }
                }
                for (name, pos) in &names {
                    if let Some(rest) = name.strip_prefix('d') {
                        if seen.contains(rest) {
                            return Err(DslError::at(
                                *pos,
                                format!("`{name}` would shadow the differential of `{rest}`"),
                            ));
                        }
                    }
                }
                vars = Some(names.into_iter().map(|(n, _)| n).collect());
            }
            Statement::Degree(v, pos) => set_once(&mut degree, v, pos, "degree")?,
            Statement::TOrder(v, pos) => set_once(&mut torder, v, pos, "torder")?,
            Statement::Weights(w, pos) => set_once(&mut weights, w, pos, "weights")?,
            Statement::Def {
                kind,
                name,
                expr,
                pos,
            } => {
                let vars = vars
                    .as_ref()
                    .ok_or_else(|| DslError::at(pos, "declare `vars` before definitions"))?;
                check_new_name(&name, pos, vars, &defined)?;
                check_names(&expr, vars, &defined, None)?;
                defined.insert(name.clone());
                definitions.push(Definition {
                    kind,
                    name,
                    expr,
                    pos,
                });
            }
            Statement::Curve {
                name,
                param,
                coords,
                pos,
            } => {
                let vars = vars
                    .as_ref()
                    .ok_or_else(|| DslError::at(pos, "declare `vars` before curves"))?;
                check_new_name(&name, pos, vars, &defined)?;
                if coords.len() != vars.len() {
                    return Err(DslError::at(
                        pos,
                        format!("curve `{name}` needs {} coordinates, got {}", vars.len(), coords.len()),
                    ));
                }
                for c in &coords {
                    check_names(c, &[], &HashSet::new(), Some(&param))?;
                }
                defined.insert(name.clone());
                curves.push(CurveDefinition {
                    name,
                    param,
                    coords,
                    pos,
                });
            }
            Statement::Task { name, args, pos } => {
                if task.is_some() {
                    return Err(DslError::at(pos, "only one task per file"));
                }
                let vars = vars
                    .as_ref()
                    .ok_or_else(|| DslError::at(pos, "declare `vars` before the task"))?;
                let name = name.parse::<TaskName>().map_err(|_| {
                    let known: Vec<&str> = TaskName::ALL.iter().map(|t| t.as_str()).collect();
                    DslError::at(pos, format!("unknown task `{name}` (expected one of {})", known.join(", ")))
                })?;
                for a in &args {
                    check_names(a, vars, &defined, None)?;
                }
                task = Some(TaskCall { name, args, pos });
            }
        }
    }
    let vars = vars.ok_or_else(|| DslError::general("missing `vars` declaration"))?;
    let task = task.ok_or_else(|| DslError::general("missing `task` directive"))?;
    if let Some(w) = &weights {
        if w.len() != vars.len() {
            return Err(DslError::general(format!(
                "`weights` lists {} values for {} variables",
                w.len(),
                vars.len()
            )));
        }
    }
    Ok(ProblemFile {
        vars,
        degree,
        torder,
        weights,
        definitions,
        curves,
        task,
    })
}

fn set_once<T>(slot: &mut Option<T>, value: T, pos: Pos, what: &str) -> Result<(), DslError> {
    if slot.is_some() {
        return Err(DslError::at(pos, format!("`{what}` given twice")));
    }
    *slot = Some(value);
    Ok(())
}

fn check_new_name(name: &str, pos: Pos, vars: &[String], defined: &HashSet<String>) -> Result<(), DslError> {
    let is_differential = name
        .strip_prefix('d')
        .is_some_and(|rest| vars.iter().any(|v| v == rest));
    if KEYWORDS.contains(&name) || BUILTINS.contains(&name) || is_differential || vars.iter().any(|v| v == name) {
        return Err(DslError::at(pos, format!("`{name}` is reserved")));
    }
    if defined.contains(name) {
        return Err(DslError::at(pos, format!("`{name}` is defined twice")));
    }
    Ok(())
}

/// Every identifier must be a variable, a differential `dX`, `t`, an earlier
/// definition, or (inside a curve) its parameter.
fn check_names(
    expr: &Expr,
    vars: &[String],
    defined: &HashSet<String>,
    param: Option<&str>,
) -> Result<(), DslError> {
    match &expr.kind {
        ExprKind::Int(_) => Ok(()),
        ExprKind::Name(name) => {
            let known = defined.contains(name)
                || vars.iter().any(|v| v == name)
                || name
                    .strip_prefix('d')
                    .is_some_and(|rest| vars.iter().any(|v| v == rest))
                || (param.is_none() && name == "t")
                || param == Some(name.as_str());
            if known {
                Ok(())
            } else {
                Err(DslError::at(expr.pos, format!("unknown identifier `{name}`")))
            }
        }
        ExprKind::Neg(a) | ExprKind::Pow(a, _) => check_names(a, vars, defined, param),
        ExprKind::Add(a, b) | ExprKind::Sub(a, b) | ExprKind::Mul(a, b) | ExprKind::Div(a, b) => {
            check_names(a, vars, defined, param)?;
            check_names(b, vars, defined, param)
        }
        ExprKind::Call(name, args) => {
            if !BUILTINS.contains(&name.as_str()) {
                return Err(DslError::at(expr.pos, format!("unknown function `{name}`")));
            }
            args.iter().try_for_each(|a| check_names(a, vars, defined, param))
        }
        ExprKind::Tuple(items) => items.iter().try_for_each(|a| check_names(a, vars, defined, param)),
    }
}
