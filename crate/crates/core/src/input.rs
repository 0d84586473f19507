//! The manifold file format.
//!
//! ```text
//! # Heisenberg hypersurface
//! name = heis2
//! n = 1
//! d = 1
//! phi1 = z1*zb1
//! point p: z1 = 1, s1 = 0
//! ```
//!
//! Expressions use `z1..zn`, their conjugates `zb1..zbn`, `s1..sd` for
//! `Re w`, integer literals, `i`, `+ - * /`, `^` with a nonnegative integer
//! exponent, and parentheses. Division is only by constants.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::manifold::GenericManifold;
use crate::poly::Poly;
use crate::registry::Registry;
use crate::scalar::{Qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Num(BigInt),
    Var(String),
    I,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSpec {
    pub name: String,
    pub assignments: Vec<(String, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifoldFile {
    pub name: String,
    pub n: usize,
    pub d: usize,
    pub phi: Vec<Expr>,
    pub points: Vec<PointSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
}

impl Lexer {
    /// Tokenizes `src`; `col0` is the 1-based column of its first character.
    fn new(src: &str, line: usize, col0: usize) -> Result<Self> {
        let chars: Vec<char> = src.chars().collect();
        let mut toks = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let col = col0 + k;
            if c.is_whitespace() {
                k += 1;
            } else if c.is_ascii_digit() {
                let start = k;
                while k < chars.len() && chars[k].is_ascii_digit() {
                    k += 1;
                }
                let s: String = chars[start..k].iter().collect();
                toks.push((Tok::Num(s.parse().expect("digits")), col));
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = k;
                while k < chars.len() && (chars[k].is_ascii_alphanumeric() || chars[k] == '_') {
                    k += 1;
                }
                toks.push((Tok::Ident(chars[start..k].iter().collect()), col));
            } else if "+-*/^(),=:".contains(c) {
                toks.push((Tok::Sym(c), col));
                k += 1;
            } else {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character {c:?}"),
                });
            }
        }
        toks.push((Tok::End, col0 + chars.len()));
        Ok(Self { toks, pos: 0, line })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        match self.bump() {
            Tok::Num(e) => match u32::try_from(e) {
                Ok(e) => Ok(Expr::Pow(Box::new(base), e)),
                Err(_) => {
                    self.pos -= 1;
                    self.err("exponent too large")
                }
            },
            _ => {
                self.pos -= 1;
                self.err("expected a nonnegative integer exponent")
            }
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(if s == "i" { Expr::I } else { Expr::Var(s) })
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::End => self.err("unexpected end of expression"),
            Tok::Sym(c) => self.err(format!("unexpected '{c}'")),
        }
    }

    fn finish(&self) -> Result<()> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => self.err("unexpected trailing input"),
        }
    }
}

/// Parses a single expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    parse_expr_at(src, 1, 1)
}

fn parse_expr_at(src: &str, line: usize, col: usize) -> Result<Expr> {
    let mut lx = Lexer::new(src, line, col)?;
    let e = lx.expr()?;
    lx.finish()?;
    Ok(e)
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Var(_) | Expr::I => 5,
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "(")?;
        write_prec(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Var(s) => write!(f, "{s}"),
        Expr::I => write!(f, "i"),
        Expr::Neg(x) => {
            write!(f, "-")?;
            write_prec(f, x, 3)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, " {} ", if matches!(e, Expr::Add(..)) { '+' } else { '-' })?;
            write_prec(f, b, 2)
        }
        Expr::Mul(a, b) | Expr::Div(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "{}", if matches!(e, Expr::Mul(..)) { '*' } else { '/' })?;
            write_prec(f, b, 3)
        }
        Expr::Pow(a, k) => {
            write_prec(f, a, 5)?;
            write!(f, "^{k}")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self, 0)
    }
}

impl Expr {
    /// Evaluates over the base registry: `zK -> z_K`, `zbK -> chi_K`, `sK -> s_K`.
    pub fn to_poly(&self, reg: &std::sync::Arc<Registry>) -> std::result::Result<Poly, String> {
        Ok(match self {
            Expr::Num(v) => Poly::constant(reg, Qi::from_q(Q::from_integer(v.clone()))),
            Expr::I => Poly::constant(reg, Qi::i()),
            Expr::Var(s) => Poly::var(reg, var_index(reg, s)?),
            Expr::Neg(x) => -x.to_poly(reg)?,
            Expr::Add(a, b) => a.to_poly(reg)? + b.to_poly(reg)?,
            Expr::Sub(a, b) => a.to_poly(reg)? - b.to_poly(reg)?,
            Expr::Mul(a, b) => a.to_poly(reg)? * b.to_poly(reg)?,
            Expr::Div(a, b) => {
                let den = b.to_poly(reg)?;
                if !den.is_constant() || den.is_zero() {
                    return Err("division by a non-constant or zero expression".into());
                }
                a.to_poly(reg)?.scale(&den.constant_term().inv())
            }
            Expr::Pow(a, k) => a.to_poly(reg)?.pow(*k),
        })
    }
}

fn var_index(reg: &Registry, name: &str) -> std::result::Result<usize, String> {
    let parse = |prefix: &str, bound: usize| -> Option<usize> {
        let k: usize = name.strip_prefix(prefix)?.parse().ok()?;
        (1..=bound).contains(&k).then_some(k - 1)
    };
    if let Some(k) = parse("zb", reg.n()) {
        return Ok(reg.chi(k));
    }
    if let Some(k) = parse("z", reg.n()) {
        return Ok(reg.z(k));
    }
    if let Some(k) = parse("s", reg.d()) {
        return Ok(reg.s(k));
    }
    Err(format!("unknown variable {name}"))
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("")
}

/// Column (1-based) of the first non-space character after byte offset `at`.
fn col_after(line: &str, at: usize) -> usize {
    let skipped = line[at..].chars().take_while(|c| c.is_whitespace()).count();
    line[..at].chars().count() + skipped + 1
}

fn parse_point_line(rest: &str, line_no: usize, col0: usize) -> Result<PointSpec> {
    let mut lx = Lexer::new(rest, line_no, col0)?;
    let name = match lx.bump() {
        Tok::Ident(s) => s,
        _ => {
            lx.pos = 0;
            return lx.err("expected a point name");
        }
    };
    lx.expect_sym(':')?;
    let assignments = parse_assignments(&mut lx)?;
    Ok(PointSpec { name, assignments })
}

fn parse_assignments(lx: &mut Lexer) -> Result<Vec<(String, Expr)>> {
    let mut out = Vec::new();
    loop {
        let var = match lx.peek().clone() {
            Tok::Ident(s) => {
                lx.bump();
                s
            }
            _ => return lx.err("expected a coordinate name"),
        };
        lx.expect_sym('=')?;
        out.push((var, lx.expr()?));
        match lx.peek() {
            Tok::Sym(',') => {
                lx.bump();
            }
            Tok::End => return Ok(out),
            _ => return lx.err("expected ',' or end of line"),
        }
    }
}

/// Parses `z1 = 1, s1 = 0` style coordinate lists.
pub fn parse_assignment_list(src: &str) -> Result<Vec<(String, Expr)>> {
    let mut lx = Lexer::new(src, 1, 1)?;
    parse_assignments(&mut lx)
}

pub fn parse_manifold_file(src: &str) -> Result<ManifoldFile> {
    let mut name = None;
    let mut n = None;
    let mut d = None;
    let mut phis: Vec<(usize, Expr, usize)> = Vec::new();
    let mut points = Vec::new();
    let mut last_line = 1;
    for (idx, raw) in src.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let trimmed = line.trim_start();
        let lead = line.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix("point ") {
            points.push(parse_point_line(rest, line_no, lead + "point ".len() + 1)?);
            continue;
        }
        let Some(eq) = line.find('=') else {
            return Err(Error::Syntax {
                line: line_no,
                col: lead + 1,
                msg: "expected 'key = value'".into(),
            });
        };
        let key = line[..eq].trim();
        let value = &line[eq + 1..];
        let vcol = col_after(line, eq + 1);
        let int_value = |what: &str| -> Result<usize> {
            value.trim().parse().map_err(|_| Error::Syntax {
                line: line_no,
                col: vcol,
                msg: format!("{what} must be a positive integer"),
            })
        };
        match key {
            "name" => name = Some(value.trim().to_string()),
            "n" => n = Some(int_value("n")?),
            "d" => d = Some(int_value("d")?),
            _ => {
                let Some(k) = key.strip_prefix("phi").and_then(|k| k.parse::<usize>().ok()) else {
                    return Err(Error::Syntax {
                        line: line_no,
                        col: lead + 1,
                        msg: format!("unknown key {key:?}"),
                    });
                };
                let e = parse_expr_at(value.trim_start(), line_no, vcol)?;
                phis.push((k, e, line_no));
            }
        }
    }
    let missing = |what: &str| Error::Syntax {
        line: last_line,
        col: 1,
        msg: format!("missing {what}"),
    };
    let n = n.ok_or_else(|| missing("n"))?;
    let d = d.ok_or_else(|| missing("d"))?;
    let mut phi: Vec<Option<Expr>> = vec![None; d];
    for (k, e, line) in phis {
        if k == 0 || k > d || phi[k - 1].is_some() {
            return Err(Error::Syntax {
                line,
                col: 1,
                msg: format!("phi{k} is out of range or repeated"),
            });
        }
        phi[k - 1] = Some(e);
    }
    let phi = phi
        .into_iter()
        .enumerate()
        .map(|(k, e)| e.ok_or_else(|| missing(&format!("phi{}", k + 1))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ManifoldFile {
        name: name.unwrap_or_else(|| "manifold".into()),
        n,
        d,
        phi,
        points,
    })
}

impl ManifoldFile {
    pub fn registry(&self) -> std::sync::Arc<Registry> {
        Registry::base(self.n, self.d)
    }

    pub fn to_manifold(&self) -> Result<GenericManifold> {
        let reg = self.registry();
        let phi = self
            .phi
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.to_poly(&reg)
                    .map_err(|m| Error::InvalidManifold(format!("phi{}: {m}", k + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        GenericManifold::new(self.name.clone(), phi)
    }

    pub fn point(&self, name: &str) -> Option<&PointSpec> {
        self.points.iter().find(|p| p.name == name)
    }
}

/// Resolves coordinate assignments to `(z0, s0)`; unassigned coordinates
/// are zero, `s` values must be real.
pub fn resolve_point(n: usize, d: usize, assignments: &[(String, Expr)]) -> Result<(Vec<Qi>, Vec<Q>)> {
    let reg = Registry::base(n, d);
    let mut z0 = vec![Qi::zero(); n];
    let mut s0 = vec![Q::zero(); d];
    for (var, e) in assignments {
        let v = e.to_poly(&reg).map_err(Error::InvalidArgument)?;
        if !v.is_constant() {
            return Err(Error::InvalidArgument(format!("{var} must be assigned a constant")));
        }
        let c = v.constant_term();
        let idx = |prefix: &str, bound: usize| -> Option<usize> {
            let k: usize = var.strip_prefix(prefix)?.parse().ok()?;
            (1..=bound).contains(&k).then_some(k - 1)
        };
        if let Some(k) = idx("z", n).filter(|_| !var.starts_with("zb")) {
            z0[k] = c;
        } else if let Some(k) = idx("s", d) {
            if !c.is_real() {
                return Err(Error::InvalidArgument(format!("{var} must be real")));
            }
            s0[k] = c.re;
        } else {
            return Err(Error::InvalidArgument(format!("unknown coordinate {var}")));
        }
    }
    Ok((z0, s0))
}

impl fmt::Display for ManifoldFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "name = {}", self.name)?;
        writeln!(f, "n = {}", self.n)?;
        writeln!(f, "d = {}", self.d)?;
        for (k, e) in self.phi.iter().enumerate() {
            writeln!(f, "phi{} = {e}", k + 1)?;
        }
        for p in &self.points {
            let body: Vec<String> = p.assignments.iter().map(|(v, e)| format!("{v} = {e}")).collect();
            writeln!(f, "point {}: {}", p.name, body.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heisenberg_file() {
        let f = parse_manifold_file("name = heis2\nn = 1\nd = 1\nphi1 = z1*zb1\n").unwrap();
        let m = f.to_manifold().unwrap();
        let r = m.registry();
        assert_eq!(m.phi()[0], Poly::var(r, 0) * Poly::var(r, r.chi(0)));
    }

    #[test]
    fn syntax_error_points_at_the_star() {
        let err = parse_manifold_file("n = 1\nd = 1\nphi1 = z1 + * zb1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Syntax {
                line: 3,
                col: 13,
                msg: "unexpected '*'".into()
            }
        );
        assert!(matches!(parse_expr("z1 + * zb1"), Err(Error::Syntax { col: 6, .. })));
    }

    #[test]
    fn precedence() {
        let r = Registry::base(1, 1);
        let e = parse_expr("-z1^2 + 2*zb1/4").unwrap();
        let p = e.to_poly(&r).unwrap();
        let expect = -Poly::var(&r, 0).pow(2) + Poly::var(&r, r.chi(0)).scale(&Qi::ratio(1, 2));
        assert_eq!(p, expect);
        let e = parse_expr("a - (b - c)").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        assert_eq!(e.to_string(), "a - (b - c)");
    }

    #[test]
    fn unknown_variable_is_reported() {
        let f = parse_manifold_file("n = 1\nd = 1\nphi1 = z2*zb1\n").unwrap();
        assert!(matches!(f.to_manifold(), Err(Error::InvalidManifold(_))));
    }

    #[test]
    fn points() {
        let f = parse_manifold_file("n = 1\nd = 1\nphi1 = z1*zb1\npoint p: z1 = 1/2 + i, s1 = -3\n").unwrap();
        let p = f.point("p").unwrap();
        let (z, s) = resolve_point(1, 1, &p.assignments).unwrap();
        assert_eq!(z, vec![Qi::complex(1, 2, 1, 1)]);
        assert_eq!(s, vec![Q::from_integer((-3).into())]);
        assert_eq!(parse_manifold_file(&f.to_string()).unwrap(), f);
        assert!(resolve_point(1, 1, &parse_assignment_list("s1 = i").unwrap()).is_err());
    }
}
