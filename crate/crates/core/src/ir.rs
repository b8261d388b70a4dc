//! Straight-line word-level IR: types, parser, validation, printing.
//!
//! Programs are single-assignment lists of unary/binary bitwise operations
//! over annotated inputs. The text format is one statement per line (`;`
//! also separates statements, `#` starts a comment):
//!
//! ```text
//! in <name> public|secret|random
//! <dest> = not <src>
//! <dest> = xor|and|or|gmul <src1> <src2>
//! out <name> [, <name>...]
//! ```
//!
//! Word width is a program-level parameter (default 8 bits) supplied by the
//! caller, not part of the text; `gmul` (multiplication in the 256-element
//! field) is only legal at width 8.

use std::collections::HashMap;
use std::fmt;

pub const DEFAULT_WIDTH: u32 = 8;
pub const MAX_WIDTH: u32 = 32;

/// Annotation of a program input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputClass {
    Public,
    Secret,
    Random,
}

impl fmt::Display for InputClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputClass::Public => "public",
            InputClass::Secret => "secret",
            InputClass::Random => "random",
        })
    }
}

/// Instruction operator. `Not` is unary; the rest take two operands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    Not,
    Xor,
    And,
    Or,
    GMul,
}

impl Op {
    pub fn is_unary(self) -> bool {
        self == Op::Not
    }

    pub fn name(self) -> &'static str {
        match self {
            Op::Not => "not",
            Op::Xor => "xor",
            Op::And => "and",
            Op::Or => "or",
            Op::GMul => "gmul",
        }
    }

    fn from_name(s: &str) -> Option<Op> {
        Some(match s {
            "not" => Op::Not,
            "xor" => Op::Xor,
            "and" => Op::And,
            "or" => Op::Or,
            "gmul" => Op::GMul,
            _ => return None,
        })
    }
}

/// `dest = op a [b]`; `b` is `None` exactly for unary operators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instruction {
    pub dest: String,
    pub op: Op,
    pub a: String,
    pub b: Option<String>,
}

impl Instruction {
    pub fn operands(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.a.as_str()).chain(self.b.as_deref())
    }
}

/// A validated straight-line program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub width: u32,
    pub inputs: Vec<(String, InputClass)>,
    pub instructions: Vec<Instruction>,
    pub outputs: Vec<String>,
}

impl Program {
    pub fn input_class(&self, name: &str) -> Option<InputClass> {
        self.inputs
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| *c)
    }
}

/// Pretty-printer; `parse(print(parse(s)))` is a fixpoint.
impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, class) in &self.inputs {
            writeln!(f, "in {name} {class}")?;
        }
        for ins in &self.instructions {
            match &ins.b {
                Some(b) => writeln!(f, "{} = {} {} {}", ins.dest, ins.op.name(), ins.a, b)?,
                None => writeln!(f, "{} = {} {}", ins.dest, ins.op.name(), ins.a)?,
            }
        }
        if !self.outputs.is_empty() {
            writeln!(f, "out {}", self.outputs.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownOperator(String),
    DuplicateDefinition(String),
    DuplicateInput(String),
    UseBeforeDef(String),
    UndefinedOutput(String),
    GmulWidth(u32),
    BadWidth(u32),
}

/// Parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: ", self.line, self.col)?;
        match &self.kind {
            ParseErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            ParseErrorKind::UnknownOperator(op) => write!(f, "unknown operator `{op}`"),
            ParseErrorKind::DuplicateDefinition(v) => write!(f, "`{v}` is defined more than once"),
            ParseErrorKind::DuplicateInput(v) => write!(f, "input `{v}` is declared more than once"),
            ParseErrorKind::UseBeforeDef(v) => write!(f, "`{v}` is used before it is defined"),
            ParseErrorKind::UndefinedOutput(v) => write!(f, "output `{v}` is not defined"),
            ParseErrorKind::GmulWidth(w) => {
                write!(f, "gmul requires width 8, program width is {w}")
            }
            ParseErrorKind::BadWidth(w) => write!(f, "unsupported word width {w}"),
        }
    }
}

impl std::error::Error for ParseError {}

/// Parse at the default width of 8 bits.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    parse_program_with_width(text, DEFAULT_WIDTH)
}

/// Parse with an explicit word width. The parser enforces all program
/// invariants, so `validate` is empty on anything it accepts.
pub fn parse_program_with_width(text: &str, width: u32) -> Result<Program, ParseError> {
    if width == 0 || width > MAX_WIDTH {
        return Err(ParseError {
            line: 1,
            col: 1,
            kind: ParseErrorKind::BadWidth(width),
        });
    }
    let mut p = Program {
        width,
        inputs: Vec::new(),
        instructions: Vec::new(),
        outputs: Vec::new(),
    };
    let mut defined: HashMap<String, ()> = HashMap::new();

    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let code = raw_line.split('#').next().unwrap_or("");
        for stmt in code.split(';') {
            let col = offset_of(raw_line, stmt) + leading_ws(stmt) + 1;
            let toks: Vec<&str> = stmt.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            let err = |kind| ParseError { line, col, kind };
            match toks[0] {
                "in" => {
                    if toks.len() != 3 {
                        return Err(err(ParseErrorKind::Syntax(
                            "expected `in <name> public|secret|random`".into(),
                        )));
                    }
                    let name = ident(toks[1]).map_err(|m| err(ParseErrorKind::Syntax(m)))?;
                    let class = match toks[2] {
                        "public" => InputClass::Public,
                        "secret" => InputClass::Secret,
                        "random" => InputClass::Random,
                        other => {
                            return Err(err(ParseErrorKind::Syntax(format!(
                                "unknown input annotation `{other}`"
                            ))))
                        }
                    };
                    if defined.insert(name.clone(), ()).is_some() {
                        return Err(err(ParseErrorKind::DuplicateInput(name)));
                    }
                    p.inputs.push((name, class));
                }
                "out" => {
                    let rest = stmt.trim_start().strip_prefix("out").unwrap_or("");
                    if rest.trim().is_empty() {
                        return Err(err(ParseErrorKind::Syntax(
                            "expected `out <name> [, <name>...]`".into(),
                        )));
                    }
                    for part in rest.split(',') {
                        let name = ident(part.trim()).map_err(|m| err(ParseErrorKind::Syntax(m)))?;
                        if !defined.contains_key(&name) {
                            return Err(err(ParseErrorKind::UndefinedOutput(name)));
                        }
                        p.outputs.push(name);
                    }
                }
                _ => {
                    // <dest> = <op> <src...>
                    if toks.len() < 4 || toks[1] != "=" {
                        return Err(err(ParseErrorKind::Syntax(
                            "expected `<dest> = <op> <operands>`".into(),
                        )));
                    }
                    let dest = ident(toks[0]).map_err(|m| err(ParseErrorKind::Syntax(m)))?;
                    let op = Op::from_name(toks[2])
                        .ok_or_else(|| err(ParseErrorKind::UnknownOperator(toks[2].into())))?;
                    if op == Op::GMul && width != 8 {
                        return Err(err(ParseErrorKind::GmulWidth(width)));
                    }
                    let want = if op.is_unary() { 4 } else { 5 };
                    if toks.len() != want {
                        return Err(err(ParseErrorKind::Syntax(format!(
                            "`{}` takes {} operand(s)",
                            op.name(),
                            want - 3
                        ))));
                    }
                    let a = ident(toks[3]).map_err(|m| err(ParseErrorKind::Syntax(m)))?;
                    let b = if op.is_unary() {
                        None
                    } else {
                        Some(ident(toks[4]).map_err(|m| err(ParseErrorKind::Syntax(m)))?)
                    };
                    for operand in std::iter::once(&a).chain(b.as_ref()) {
                        if !defined.contains_key(operand) {
                            return Err(err(ParseErrorKind::UseBeforeDef(operand.clone())));
                        }
                    }
                    if defined.insert(dest.clone(), ()).is_some() {
                        return Err(err(ParseErrorKind::DuplicateDefinition(dest)));
                    }
                    p.instructions.push(Instruction { dest, op, a, b });
                }
            }
        }
    }
    Ok(p)
}

fn ident(s: &str) -> Result<String, String> {
    const KEYWORDS: &[&str] = &[
        "in", "out", "public", "secret", "random", "not", "xor", "and", "or", "gmul",
    ];
    let ok = !s.is_empty()
        && s.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(format!("`{s}` is not a valid identifier"));
    }
    if KEYWORDS.contains(&s) {
        return Err(format!("`{s}` is a reserved word"));
    }
    Ok(s.to_string())
}

fn offset_of(line: &str, sub: &str) -> usize {
    let line_ptr = line.as_ptr() as usize;
    let sub_ptr = sub.as_ptr() as usize;
    sub_ptr.saturating_sub(line_ptr)
}

fn leading_ws(s: &str) -> usize {
    s.len() - s.trim_start().len()
}

/// A violated program invariant, reported by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    DuplicateInput { name: String },
    DuplicateDefinition { name: String, index: usize },
    UseBeforeDef { name: String, index: usize },
    BadArity { index: usize },
    GmulWidth { index: usize, width: u32 },
    UndefinedOutput { name: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::DuplicateInput { name } => write!(f, "duplicate input `{name}`"),
            Diagnostic::DuplicateDefinition { name, index } => {
                write!(f, "instruction {index}: `{name}` already defined")
            }
            Diagnostic::UseBeforeDef { name, index } => {
                write!(f, "instruction {index}: `{name}` used before definition")
            }
            Diagnostic::BadArity { index } => write!(f, "instruction {index}: wrong operand count"),
            Diagnostic::GmulWidth { index, width } => {
                write!(f, "instruction {index}: gmul at width {width}")
            }
            Diagnostic::UndefinedOutput { name } => write!(f, "output `{name}` is not defined"),
        }
    }
}

/// Check every program invariant; the empty list means the program is valid.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut defined: HashMap<&str, ()> = HashMap::new();
    for (name, _) in &p.inputs {
        if defined.insert(name, ()).is_some() {
            diags.push(Diagnostic::DuplicateInput { name: name.clone() });
        }
    }
    for (index, ins) in p.instructions.iter().enumerate() {
        let arity_ok = ins.op.is_unary() == ins.b.is_none();
        if !arity_ok {
            diags.push(Diagnostic::BadArity { index });
        }
        if ins.op == Op::GMul && p.width != 8 {
            diags.push(Diagnostic::GmulWidth {
                index,
                width: p.width,
            });
        }
        for operand in ins.operands() {
            if !defined.contains_key(operand) {
                diags.push(Diagnostic::UseBeforeDef {
                    name: operand.to_string(),
                    index,
                });
            }
        }
        if defined.insert(&ins.dest, ()).is_some() {
            diags.push(Diagnostic::DuplicateDefinition {
                name: ins.dest.clone(),
                index,
            });
        }
    }
    for name in &p.outputs {
        if !defined.contains_key(name.as_str()) {
            diags.push(Diagnostic::UndefinedOutput { name: name.clone() });
        }
    }
    diags
}

/// Dense numbering of a valid program's variables: inputs first, in
/// declaration order (their id doubles as the bitset ordinal), then
/// instruction destinations in program order.
#[derive(Debug, Clone)]
pub struct VarTable {
    names: Vec<String>,
    index: HashMap<String, usize>,
    n_inputs: usize,
    classes: Vec<InputClass>,
}

impl VarTable {
    pub fn build(p: &Program) -> VarTable {
        let mut names = Vec::new();
        let mut classes = Vec::new();
        for (name, class) in &p.inputs {
            names.push(name.clone());
            classes.push(*class);
        }
        for ins in &p.instructions {
            names.push(ins.dest.clone());
        }
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        VarTable {
            names,
            index,
            n_inputs: p.inputs.len(),
            classes,
        }
    }

    pub fn id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn is_input(&self, id: usize) -> bool {
        id < self.n_inputs
    }

    /// Input class of an input id; `None` for instruction-defined variables.
    pub fn class(&self, id: usize) -> Option<InputClass> {
        self.classes.get(id).copied()
    }

    /// Index of the instruction defining `id`, or `None` for inputs.
    pub fn def_index(&self, id: usize) -> Option<usize> {
        id.checked_sub(self.n_inputs)
    }

    pub fn ids(&self) -> std::ops::Range<usize> {
        0..self.names.len()
    }
}
