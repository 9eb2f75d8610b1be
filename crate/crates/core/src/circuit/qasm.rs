//! Parser and emitter for a small OpenQASM 2 subset.
//!
//! Accepted grammar (whitespace and `//` comments are free):
//!
//! ```text
//! program   := header? decl* stmt*
//! header    := "OPENQASM" real ";"
//! decl      := "include" string ";" | "qreg" id "[" int "]" ";" | "creg" id "[" int "]" ";"
//! stmt      := gate params? args ";"
//!            | "measure" arg "->" arg ";"
//!            | "barrier" args ";"
//! params    := "(" expr ("," expr)* ")"
//! args      := arg ("," arg)*
//! arg       := id ("[" int "]")?
//! expr      := arithmetic over real literals and `pi` with + - * / ^ and parentheses
//! ```
//!
//! Exactly one `qreg` is allowed. Gate names: `h x y z s sdg t tdg rz rx cx cz
//! rzz swap`. A bare register argument broadcasts single-qubit gates,
//! `measure` and `barrier` over the whole register.

use std::fmt::Write as _;

use thiserror::Error;

use super::{Circuit, CircuitError, Gate, GateKind};

const MAX_EXPR_DEPTH: usize = 64;
const MAX_QUBITS: usize = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QasmError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax { line: usize, col: usize, message: String },
    #[error("unsupported gate `{name}` at {line}:{col}")]
    UnsupportedGate { name: String, line: usize, col: usize },
    #[error("qubit {qubit} out of range for register of size {size} at {line}:{col}")]
    QubitOutOfRange { qubit: usize, size: usize, line: usize, col: usize },
    #[error("invalid gate at {line}:{col}: {source}")]
    InvalidGate { line: usize, col: usize, source: CircuitError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str,
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, QasmError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let syntax = |line, col, message: &str| QasmError::Syntax { line, col, message: message.to_string() };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tl, tc) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            let mut is_real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                is_real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if is_real {
                Tok::Real(text.parse().map_err(|_| syntax(tl, tc, "malformed number"))?)
            } else {
                Tok::Int(text.parse().map_err(|_| syntax(tl, tc, "integer literal too large"))?)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c == '"' {
            i += 1;
            col += 1;
            while i < chars.len() && chars[i] != '"' {
                if chars[i] == '\n' {
                    return Err(syntax(tl, tc, "unterminated string"));
                }
                i += 1;
                col += 1;
            }
            if i >= chars.len() {
                return Err(syntax(tl, tc, "unterminated string"));
            }
            i += 1;
            col += 1;
            out.push(Token { tok: Tok::Str, line: tl, col: tc });
            continue;
        }
        if c == '-' && chars.get(i + 1) == Some(&'>') {
            i += 2;
            col += 2;
            out.push(Token { tok: Tok::Sym("->"), line: tl, col: tc });
            continue;
        }
        let sym = match c {
            ';' => ";",
            ',' => ",",
            '(' => "(",
            ')' => ")",
            '[' => "[",
            ']' => "]",
            '+' => "+",
            '-' => "-",
            '*' => "*",
            '/' => "/",
            '^' => "^",
            _ => return Err(syntax(tl, tc, &format!("unexpected character `{c}`"))),
        };
        i += 1;
        col += 1;
        out.push(Token { tok: Tok::Sym(sym), line: tl, col: tc });
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    qreg: Option<(String, usize)>,
    cregs: Vec<(String, usize)>,
}

enum Arg {
    Qubit(usize),
    Register,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(t: &Token, message: impl Into<String>) -> QasmError {
        QasmError::Syntax { line: t.line, col: t.col, message: message.into() }
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<Token, QasmError> {
        let t = self.next();
        if t.tok == Tok::Sym(s) {
            Ok(t)
        } else {
            Err(Self::err_at(&t, format!("expected `{s}`")))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Token), QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) => Ok((s.clone(), t.clone())),
            _ => Err(Self::err_at(&t, "expected identifier")),
        }
    }

    fn expect_int(&mut self) -> Result<u64, QasmError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok(v),
            _ => Err(Self::err_at(&t, "expected integer")),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek().tok, Tok::Sym(x) if x == s)
    }

    fn program(&mut self) -> Result<Circuit, QasmError> {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == "OPENQASM") {
            self.next();
            let t = self.next();
            match t.tok {
                Tok::Real(v) if (2.0..3.0).contains(&v) => {}
                Tok::Int(2) => {}
                _ => return Err(Self::err_at(&t, "only OPENQASM 2.x is supported")),
            }
            self.expect_sym(";")?;
        }
        let mut circuit: Option<Circuit> = None;
        loop {
            let t = self.peek().clone();
            let name = match &t.tok {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return Err(Self::err_at(&t, "expected statement")),
            };
            match name.as_str() {
                "include" => {
                    self.next();
                    let s = self.next();
                    if s.tok != Tok::Str {
                        return Err(Self::err_at(&s, "expected file name string"));
                    }
                    self.expect_sym(";")?;
                }
                "qreg" => {
                    self.next();
                    if self.qreg.is_some() {
                        return Err(Self::err_at(&t, "only one qreg is supported"));
                    }
                    let (reg, _) = self.expect_ident()?;
                    self.expect_sym("[")?;
                    let size = self.expect_int()? as usize;
                    self.expect_sym("]")?;
                    self.expect_sym(";")?;
                    if size == 0 || size > MAX_QUBITS {
                        return Err(Self::err_at(&t, "qreg size out of bounds"));
                    }
                    self.qreg = Some((reg, size));
                    circuit = Some(Circuit::new("qasm", size));
                }
                "creg" => {
                    self.next();
                    let (reg, _) = self.expect_ident()?;
                    self.expect_sym("[")?;
                    let size = self.expect_int()? as usize;
                    self.expect_sym("]")?;
                    self.expect_sym(";")?;
                    self.cregs.push((reg, size));
                }
                _ => {
                    let c = circuit.as_mut().ok_or_else(|| Self::err_at(&t, "statement before qreg declaration"))?;
                    self.statement(c)?;
                }
            }
        }
        circuit.ok_or_else(|| {
            let t = self.peek();
            Self::err_at(t, "missing qreg declaration")
        })
    }

    fn statement(&mut self, c: &mut Circuit) -> Result<(), QasmError> {
        let (name, at) = self.expect_ident()?;
        let kind = GateKind::from_qasm_name(&name).ok_or_else(|| QasmError::UnsupportedGate {
            name: name.clone(),
            line: at.line,
            col: at.col,
        })?;
        let size = self.qreg.as_ref().map(|r| r.1).unwrap_or(0);
        let mut params = Vec::new();
        if self.is_sym("(") {
            self.next();
            if !self.is_sym(")") {
                params.push(self.expr(0)?);
                while self.is_sym(",") {
                    self.next();
                    params.push(self.expr(0)?);
                }
            }
            self.expect_sym(")")?;
        }
        let invalid = |source| QasmError::InvalidGate { line: at.line, col: at.col, source };
        match kind {
            GateKind::Measure => {
                let q = self.qarg()?;
                self.expect_sym("->")?;
                self.carg()?;
                self.expect_sym(";")?;
                let targets: Vec<usize> = match q {
                    Arg::Qubit(q) => vec![q],
                    Arg::Register => (0..size).collect(),
                };
                for q in targets {
                    c.push(Gate::new(kind, vec![q], params.clone()).map_err(invalid)?).map_err(invalid)?;
                }
            }
            _ => {
                let mut args = vec![self.qarg()?];
                while self.is_sym(",") {
                    self.next();
                    args.push(self.qarg()?);
                }
                self.expect_sym(";")?;
                let broadcast = args.iter().any(|a| matches!(a, Arg::Register));
                if kind == GateKind::Barrier {
                    let mut qs = Vec::new();
                    for a in args {
                        match a {
                            Arg::Qubit(q) if !qs.contains(&q) => qs.push(q),
                            Arg::Qubit(_) => {}
                            Arg::Register => {
                                for q in 0..size {
                                    if !qs.contains(&q) {
                                        qs.push(q);
                                    }
                                }
                            }
                        }
                    }
                    c.push(Gate::new(kind, qs, params).map_err(invalid)?).map_err(invalid)?;
                } else if broadcast {
                    if args.len() != 1 || kind.arity() != Some(1) {
                        return Err(QasmError::Syntax {
                            line: at.line,
                            col: at.col,
                            message: "register broadcast is only supported for single-qubit gates".into(),
                        });
                    }
                    for q in 0..size {
                        c.push(Gate::new(kind, vec![q], params.clone()).map_err(invalid)?).map_err(invalid)?;
                    }
                } else {
                    let qs = args
                        .into_iter()
                        .map(|a| match a {
                            Arg::Qubit(q) => q,
                            Arg::Register => unreachable!(),
                        })
                        .collect();
                    c.push(Gate::new(kind, qs, params).map_err(invalid)?).map_err(invalid)?;
                }
            }
        }
        Ok(())
    }

    fn qarg(&mut self) -> Result<Arg, QasmError> {
        let (reg, at) = self.expect_ident()?;
        let (qname, size) = self.qreg.clone().expect("qreg checked by caller");
        if reg != qname {
            return Err(Self::err_at(&at, format!("unknown quantum register `{reg}`")));
        }
        if self.is_sym("[") {
            self.next();
            let idx = self.expect_int()?;
            self.expect_sym("]")?;
            if idx as u128 >= size as u128 {
                return Err(QasmError::QubitOutOfRange {
                    qubit: idx.min(usize::MAX as u64) as usize,
                    size,
                    line: at.line,
                    col: at.col,
                });
            }
            Ok(Arg::Qubit(idx as usize))
        } else {
            Ok(Arg::Register)
        }
    }

    fn carg(&mut self) -> Result<(), QasmError> {
        let (reg, at) = self.expect_ident()?;
        let size = self
            .cregs
            .iter()
            .find(|(n, _)| *n == reg)
            .map(|(_, s)| *s)
            .ok_or_else(|| Self::err_at(&at, format!("unknown classical register `{reg}`")))?;
        if self.is_sym("[") {
            self.next();
            let idx = self.expect_int()?;
            self.expect_sym("]")?;
            if idx as u128 >= size as u128 {
                return Err(Self::err_at(&at, "classical bit out of range"));
            }
        }
        Ok(())
    }

    fn expr(&mut self, depth: usize) -> Result<f64, QasmError> {
        if depth > MAX_EXPR_DEPTH {
            return Err(Self::err_at(self.peek(), "expression nested too deeply"));
        }
        let mut v = self.term(depth + 1)?;
        loop {
            if self.is_sym("+") {
                self.next();
                v += self.term(depth + 1)?;
            } else if self.is_sym("-") {
                self.next();
                v -= self.term(depth + 1)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self, depth: usize) -> Result<f64, QasmError> {
        let mut v = self.unary(depth + 1)?;
        loop {
            if self.is_sym("*") {
                self.next();
                v *= self.unary(depth + 1)?;
            } else if self.is_sym("/") {
                self.next();
                v /= self.unary(depth + 1)?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self, depth: usize) -> Result<f64, QasmError> {
        if depth > MAX_EXPR_DEPTH {
            return Err(Self::err_at(self.peek(), "expression nested too deeply"));
        }
        if self.is_sym("-") {
            self.next();
            return Ok(-self.unary(depth + 1)?);
        }
        if self.is_sym("+") {
            self.next();
            return self.unary(depth + 1);
        }
        let base = self.primary(depth + 1)?;
        if self.is_sym("^") {
            self.next();
            let e = self.unary(depth + 1)?;
            return Ok(base.powf(e));
        }
        Ok(base)
    }

    fn primary(&mut self, depth: usize) -> Result<f64, QasmError> {
        let t = self.next();
        match &t.tok {
            Tok::Int(v) => Ok(*v as f64),
            Tok::Real(v) => Ok(*v),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Sym("(") => {
                let v = self.expr(depth + 1)?;
                self.expect_sym(")")?;
                Ok(v)
            }
            _ => Err(Self::err_at(&t, "expected number, `pi` or `(`")),
        }
    }
}

/// Parse OpenQASM-subset source into a [`Circuit`].
pub fn parse_qasm(text: &str) -> Result<Circuit, QasmError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, qreg: None, cregs: Vec::new() };
    p.program()
}

/// Emit a circuit as OpenQASM 2. Angles are written with round-trip precision.
pub fn emit_qasm(c: &Circuit) -> String {
    let mut s = String::new();
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{}];", c.num_qubits());
    let has_measure = c.gates().iter().any(|g| g.kind() == GateKind::Measure);
    if has_measure {
        let _ = writeln!(s, "creg c[{}];", c.num_qubits());
    }
    for g in c.gates() {
        match g.kind() {
            GateKind::Measure => {
                let q = g.qubits()[0];
                let _ = writeln!(s, "measure q[{q}] -> c[{q}];");
            }
            k => {
                s.push_str(k.qasm_name());
                if !g.params().is_empty() {
                    let ps: Vec<String> = g.params().iter().map(|p| format!("{p:?}")).collect();
                    let _ = write!(s, "({})", ps.join(","));
                }
                let qs: Vec<String> = g.qubits().iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(s, " {};", qs.join(","));
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_program() {
        let c = parse_qasm("qreg q[1];").unwrap();
        assert_eq!(c.num_qubits(), 1);
        assert!(c.is_empty());
    }

    #[test]
    fn bell_pair() {
        let c = parse_qasm("qreg q[2]; h q[0]; cx q[0],q[1];").unwrap();
        assert_eq!(c.gates(), &[Gate::single(GateKind::H, 0), Gate::cx(0, 1)]);
    }

    #[test]
    fn rejects_unsupported_gate() {
        let e = parse_qasm("qreg q[2]; ccx q[0],q[1],q[0];").unwrap_err();
        assert_eq!(e, QasmError::UnsupportedGate { name: "ccx".into(), line: 1, col: 12 });
    }

    #[test]
    fn angle_expressions() {
        let c = parse_qasm("qreg q[1];\nrz(pi/2) q[0];\nrx(-2*pi/4 + 0.5) q[0];\nrz(2^3) q[0];").unwrap();
        assert!((c.gates()[0].angle().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((c.gates()[1].angle().unwrap() - (0.5 - std::f64::consts::FRAC_PI_2)).abs() < 1e-15);
        assert_eq!(c.gates()[2].angle(), Some(8.0));
    }

    #[test]
    fn out_of_range_reports_position() {
        let e = parse_qasm("qreg q[2];\n  h q[2];").unwrap_err();
        assert_eq!(e, QasmError::QubitOutOfRange { qubit: 2, size: 2, line: 2, col: 5 });
    }

    #[test]
    fn syntax_error_reports_position() {
        match parse_qasm("qreg q[2];\nh q[0]\ncx q[0],q[1];") {
            Err(QasmError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_qasm("h q[0];"), Err(QasmError::Syntax { .. })));
        assert!(matches!(parse_qasm("qreg q[2]; qreg r[2];"), Err(QasmError::Syntax { .. })));
    }

    #[test]
    fn header_comments_measure_barrier() {
        let src = r#"OPENQASM 2.0;
include "qelib1.inc"; // standard header
qreg q[3];
creg c[3];
h q;            // broadcast
barrier q;
cz q[0],q[2];
rzz(0.25) q[1],q[2];
swap q[0],q[1];
measure q -> c;
"#;
        let c = parse_qasm(src).unwrap();
        assert_eq!(c.count_kind(GateKind::H), 3);
        assert_eq!(c.count_kind(GateKind::Measure), 3);
        assert_eq!(c.gates()[3].qubits(), &[0, 1, 2]);
        assert_eq!(c.two_qubit_count(), 3);
    }

    #[test]
    fn repeated_qubit_is_rejected() {
        assert!(matches!(parse_qasm("qreg q[2]; cx q[1],q[1];"), Err(QasmError::InvalidGate { .. })));
    }

    #[test]
    fn deep_nesting_does_not_overflow() {
        let src = format!("qreg q[1]; rz({}1{}) q[0];", "(".repeat(500), ")".repeat(500));
        assert!(parse_qasm(&src).is_err());
    }

    #[test]
    fn emit_then_parse_is_identical() {
        let src = "qreg q[3]; h q[0]; rz(0.1) q[1]; rzz(-1.2345678901234567) q[0],q[2]; t q[2]; measure q[1] -> c[1];";
        let src = src.replacen("qreg q[3];", "qreg q[3]; creg c[3];", 1);
        let c = parse_qasm(&src).unwrap();
        let back = parse_qasm(&emit_qasm(&c)).unwrap();
        assert_eq!(c.gates(), back.gates());
    }
}
