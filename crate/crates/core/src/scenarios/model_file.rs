//! Model and state files for the command line.
//!
//! A model file names a representation and gives the Hamiltonian and the
//! Lindblad operators as expressions over its operator labels:
//!
//! ```json
//! { "id": "damped", "rep": "boson:30",
//!   "hamiltonian": "adag*a + 0.5*id",
//!   "lindblads": ["sqrt(0.5)*a"] }
//! ```
//!
//! Expressions support `+ - * ^` (non-negative integer powers), parentheses,
//! real literals, `i`, `pi`, `sqrt(...)` of non-negative scalars, `id` and
//! every label of the representation (for instance `a`, `adag`, `x`, `p`,
//! `jp`, `jm`, `jx`, `jy`, `jz`, `a1`, `adag2`).

use std::path::Path;

use serde::Deserialize;

use super::config::json_error;
use crate::error::{Error, Result};
use crate::liealg::{LieRepresentation, RepSpec};
use crate::lindblad::LindbladModel;
use crate::opsalg::{CVector, OperatorMatrix, PureState, C64, I, ONE};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub id: Option<String>,
    pub rep: String,
    #[serde(default)]
    pub hamiltonian: Option<String>,
    pub lindblads: Vec<String>,
}

impl ModelFile {
    pub fn build(&self) -> Result<(LindbladModel, LieRepresentation)> {
        let rep = RepSpec::parse_short(&self.rep)?.build()?;
        let h = match &self.hamiltonian {
            Some(e) => parse_operator(e, &rep)?,
            None => OperatorMatrix::zeros(rep.dim()),
        };
        let ls = self.lindblads.iter().map(|e| parse_operator(e, &rep)).collect::<Result<Vec<_>>>()?;
        let model = LindbladModel::new(h, ls)?.with_id(self.id.clone().unwrap_or_else(|| "model".to_string()));
        Ok((model, rep))
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

pub fn load_model(path: &Path) -> Result<(LindbladModel, LieRepresentation)> {
    let text = read(path)?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| json_error(&path.display().to_string(), &text, &e))?;
    file.build()
}

/// `{"amplitudes": [[re, im], ...]}` or `{"basis": k}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateFile {
    Amplitudes { amplitudes: Vec<[f64; 2]> },
    Basis { basis: usize },
}

impl StateFile {
    pub fn build(&self, dim: usize) -> Result<PureState> {
        match self {
            StateFile::Amplitudes { amplitudes } => {
                if amplitudes.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, found: amplitudes.len() });
                }
                PureState::new(CVector::from_iterator(dim, amplitudes.iter().map(|[re, im]| C64::new(*re, *im))))
            }
            StateFile::Basis { basis } => {
                if *basis >= dim {
                    return Err(Error::OutOfRange { what: "basis index", value: *basis, min: 0, max: dim - 1 });
                }
                Ok(PureState::basis(dim, *basis))
            }
        }
    }
}

pub fn load_state(path: &Path, dim: usize) -> Result<PureState> {
    let text = read(path)?;
    let file: StateFile = serde_json::from_str(&text).map_err(|e| json_error(&path.display().to_string(), &text, &e))?;
    file.build(dim)
}

#[derive(Debug, Clone)]
enum Val {
    Scalar(C64),
    Op(OperatorMatrix),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    rep: &'a LieRepresentation,
}

fn syntax(src: &str, pos: usize, msg: &str) -> Error {
    Error::Config(format!("{msg} at position {pos} in operator expression `{src}`"))
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Option<char> {
        self.src[self.pos..].chars().find(|c| !c.is_whitespace())
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..].chars().next().map(char::len_utf8).unwrap_or(1);
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn err(&self, msg: &str) -> Error {
        syntax(self.src, self.pos, msg)
    }

    fn identity(&self) -> OperatorMatrix {
        OperatorMatrix::identity(self.rep.dim())
    }

    fn add(&self, a: Val, b: Val, sign: f64) -> Val {
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(x + y * sign),
            (Val::Op(x), Val::Scalar(y)) => Val::Op(&x + &self.identity().scale(y * sign)),
            (Val::Scalar(x), Val::Op(y)) => Val::Op(&self.identity().scale(x) + &y.scale_real(sign)),
            (Val::Op(x), Val::Op(y)) => Val::Op(&x + &y.scale_real(sign)),
        }
    }

    fn mul(a: Val, b: Val) -> Val {
        match (a, b) {
            (Val::Scalar(x), Val::Scalar(y)) => Val::Scalar(x * y),
            (Val::Op(x), Val::Scalar(y)) | (Val::Scalar(y), Val::Op(x)) => Val::Op(x.scale(y)),
            (Val::Op(x), Val::Op(y)) => Val::Op(&x * &y),
        }
    }

    fn expr(&mut self) -> Result<Val> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                let t = self.term()?;
                acc = self.add(acc, t, 1.0);
            } else if self.eat('-') {
                let t = self.term()?;
                acc = self.add(acc, t, -1.0);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Val> {
        let mut acc = self.unary()?;
        while self.eat('*') {
            let f = self.unary()?;
            acc = Self::mul(acc, f);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Val> {
        if self.eat('-') {
            return Ok(Self::mul(Val::Scalar(-ONE), self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Val> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        self.skip_ws();
        let start = self.pos;
        while self.src[self.pos..].starts_with(|c: char| c.is_ascii_digit()) {
            self.pos += 1;
        }
        let n: u32 = self.src[start..self.pos].parse().map_err(|_| self.err("expected a non-negative integer exponent"))?;
        Ok(match base {
            Val::Scalar(x) => Val::Scalar(x.powu(n)),
            Val::Op(x) => Val::Op(x.powi(n)),
        })
    }

    fn atom(&mut self) -> Result<Val> {
        self.skip_ws();
        let c = self.peek().ok_or_else(|| self.err("unexpected end"))?;
        if self.eat('(') {
            let v = self.expr()?;
            if !self.eat(')') {
                return Err(self.err("expected `)`"));
            }
            return Ok(v);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = self.pos;
            while self.src[self.pos..].starts_with(|c: char| c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            let name = &self.src[start..self.pos];
            return match name {
                "i" => Ok(Val::Scalar(I)),
                "pi" => Ok(Val::Scalar(C64::new(std::f64::consts::PI, 0.0))),
                "id" => Ok(Val::Op(self.identity())),
                "sqrt" => {
                    if !self.eat('(') {
                        return Err(self.err("expected `(` after sqrt"));
                    }
                    let inner = self.expr()?;
                    if !self.eat(')') {
                        return Err(self.err("expected `)`"));
                    }
                    match inner {
                        Val::Scalar(x) if x.im == 0.0 && x.re >= 0.0 => Ok(Val::Scalar(C64::new(x.re.sqrt(), 0.0))),
                        _ => Err(self.err("sqrt takes a non-negative real scalar")),
                    }
                }
                label => self.rep.operator(label).cloned().map(Val::Op).ok_or_else(|| {
                    let mut known: Vec<&str> = self
                        .rep
                        .basis()
                        .iter()
                        .chain(self.rep.hermitian_basis())
                        .map(|l| l.label.as_str())
                        .collect();
                    known.sort_unstable();
                    known.dedup();
                    Error::Config(format!(
                        "unknown operator `{label}` in `{}` (representation {} defines: {})",
                        self.src,
                        self.rep.name(),
                        known.join(", ")
                    ))
                }),
            };
        }
        Err(self.err(&format!("unexpected `{c}`")))
    }

    fn number(&mut self) -> Result<Val> {
        self.skip_ws();
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
            end += 1;
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                end = k;
                while end < bytes.len() && bytes[end].is_ascii_digit() {
                    end += 1;
                }
            }
        }
        let x: f64 = self.src[start..end].parse().map_err(|_| self.err("malformed number"))?;
        self.pos = end;
        Ok(Val::Scalar(C64::new(x, 0.0)))
    }
}

/// Evaluates an operator expression over a representation's labels.
pub fn parse_operator(expr: &str, rep: &LieRepresentation) -> Result<OperatorMatrix> {
    let mut p = Parser { src: expr, pos: 0, rep };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != expr.len() {
        return Err(p.err("trailing input"));
    }
    Ok(match v {
        Val::Scalar(x) => OperatorMatrix::identity(rep.dim()).scale(x),
        Val::Op(m) => m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{boson_rep, spin_rep};

    #[test]
    fn arithmetic() {
        let rep = boson_rep(6, 1).unwrap();
        let a = rep.operator("a").unwrap();
        let n = &a.adjoint() * a;
        let h = parse_operator("adag*a + 0.5*id", &rep).unwrap();
        assert!((&h - &(&n + &OperatorMatrix::identity(7).scale_real(0.5))).norm() < 1e-14);
        let l = parse_operator("sqrt(2) * (a - i*adag)^2", &rep).unwrap();
        let m = &(a - &a.adjoint().scale(I)).powi(2).scale_real(2f64.sqrt()) - &l;
        assert!(m.norm() < 1e-12);
        let e = parse_operator("-1.5e-1*a^0 + 2", &rep).unwrap();
        assert!((&e - &OperatorMatrix::identity(7).scale_real(1.85)).norm() < 1e-14);
    }

    #[test]
    fn errors_name_the_symbol() {
        let rep = spin_rep(1.0).unwrap();
        match parse_operator("jq + jz", &rep) {
            Err(Error::Config(m)) => assert!(m.contains("jq") && m.contains("jz")),
            other => panic!("{other:?}"),
        }
        assert!(parse_operator("jz +", &rep).is_err());
        assert!(parse_operator("sqrt(jz)", &rep).is_err());
        assert!(parse_operator("(jz", &rep).is_err());
    }

    #[test]
    fn state_files() {
        let s: StateFile = serde_json::from_str(r#"{"basis": 1}"#).unwrap();
        assert_eq!(s.build(3).unwrap().amplitudes()[1], ONE);
        let s: StateFile = serde_json::from_str(r#"{"amplitudes": [[0.6, 0], [0, 0.8]]}"#).unwrap();
        assert!(s.build(2).is_ok());
        assert!(s.build(3).is_err());
    }
}
