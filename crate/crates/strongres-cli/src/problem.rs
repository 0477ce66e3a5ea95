use std::fmt;

use strongres::rational::parse_rational;
use strongres::{Ideal, Polynomial, Rational, Ring, RingRef};
use thiserror::Error;

/// A parsed problem: ambient coordinates, generators, seeded exceptional coordinates and
/// the threshold.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub ring: RingRef,
    pub generators: Vec<Polynomial>,
    /// Indices of the seeded exceptional coordinates, in declaration order.
    pub exceptional: Vec<usize>,
    pub threshold: u32,
}

impl ProblemFile {
    pub fn variables(&self) -> &[String] {
        self.ring.names()
    }

    pub fn ideal(&self) -> Ideal {
        Ideal::new(&self.ring, self.generators.clone())
    }

    pub fn exceptional_names(&self) -> Vec<String> {
        self.exceptional.iter().map(|&i| self.ring.name(i).to_string()).collect()
    }

    /// Adds seeded coordinates by name, skipping ones already present.
    pub fn seed(&mut self, names: &[String]) -> Result<(), ProblemError> {
        for n in names {
            let i = self.ring.index_of(n).ok_or_else(|| ProblemError::UndeclaredVariable {
                name: n.clone(),
                line: 0,
                col: 0,
            })?;
            if !self.exceptional.contains(&i) {
                self.exceptional.push(i);
            }
        }
        Ok(())
    }
}

impl PartialEq for ProblemFile {
    fn eq(&self, other: &Self) -> bool {
        self.variables() == other.variables()
            && self.exceptional == other.exceptional
            && self.threshold == other.threshold
            && self.generators.len() == other.generators.len()
            && self
                .generators
                .iter()
                .zip(&other.generators)
                .all(|(a, b)| a.terms().eq(b.terms()))
    }
}

/// Canonical text form; `parse_problem` reads it back to an equal problem.
impl fmt::Display for ProblemFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring {}", self.variables().join(" "))?;
        let gens: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        writeln!(f, "ideal {}", gens.join(", "))?;
        if !self.exceptional.is_empty() {
            writeln!(f, "exceptional {}", self.exceptional_names().join(" "))?;
        }
        if self.threshold != 1 {
            writeln!(f, "threshold {}", self.threshold)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("{line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{line}:{col}: undeclared variable `{name}`")]
    UndeclaredVariable { name: String, line: usize, col: usize },
    #[error("{line}:{col}: generator is zero")]
    ZeroGenerator { line: usize, col: usize },
    #[error("{line}:{col}: {message}")]
    Invalid { line: usize, col: usize, message: String },
    #[error("missing `{0}` declaration")]
    Missing(&'static str),
}

impl ProblemError {
    pub fn reason(&self) -> &'static str {
        match self {
            ProblemError::Syntax { .. } => "SyntaxError",
            ProblemError::UndeclaredVariable { .. } => "UndeclaredVariable",
            ProblemError::ZeroGenerator { .. } => "ZeroGenerator",
            ProblemError::Invalid { .. } => "InvalidDeclaration",
            ProblemError::Missing(_) => "MissingDeclaration",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(String),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(s) => write!(f, "`{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of line"),
        }
    }
}

fn tokenize(text: &str, line: usize, col0: usize) -> Result<Vec<(Tok, usize)>, ProblemError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push((Tok::Int(chars[start..i].iter().collect()), col));
        } else if "+-*^/(),".contains(c) {
            out.push((Tok::Sym(c), col));
            i += 1;
        } else {
            return Err(ProblemError::Syntax {
                line,
                col,
                expected: vec!["a term".into()],
                found: format!("`{c}`"),
            });
        }
    }
    out.push((Tok::End, col0 + chars.len()));
    Ok(out)
}

/// Recursive-descent reader over one line of tokens.
struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    ring: &'a RingRef,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, ProblemError> {
        Err(ProblemError::Syntax {
            line: self.line,
            col: self.col(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, ProblemError> {
        let mut acc = if self.eat('-') {
            -&self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ProblemError> {
        let mut acc = self.factor()?;
        while self.eat('*') {
            acc = &acc * &self.factor()?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Polynomial, ProblemError> {
        if self.eat('-') {
            return Ok(-&self.factor()?);
        }
        let base = self.atom()?;
        if self.eat('^') {
            let Tok::Int(s) = self.peek().clone() else {
                return self.fail(&["an exponent"]);
            };
            let Ok(k) = s.parse::<u32>() else {
                return self.fail(&["an exponent below 2^32"]);
            };
            self.pos += 1;
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ProblemError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.pos += 1;
                let mut text = n;
                if self.eat('/') {
                    let Tok::Int(d) = self.peek().clone() else {
                        return self.fail(&["a denominator"]);
                    };
                    if d.chars().all(|c| c == '0') {
                        return self.fail(&["a nonzero denominator"]);
                    }
                    self.pos += 1;
                    text = format!("{text}/{d}");
                }
                let q: Rational = parse_rational(&text).expect("digits");
                Ok(Polynomial::constant(self.ring, q))
            }
            Tok::Ident(name) => match self.ring.index_of(&name) {
                Some(i) => {
                    self.pos += 1;
                    Ok(Polynomial::var(self.ring, i))
                }
                None => Err(ProblemError::UndeclaredVariable {
                    name,
                    line: self.line,
                    col: self.col(),
                }),
            },
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return self.fail(&["`)`"]);
                }
                Ok(e)
            }
            _ => self.fail(&["a variable", "a number", "`(`"]),
        }
    }
}

/// Parses a comma-separated list of generators on one line starting at column `col0`.
fn parse_generators(
    ring: &RingRef,
    text: &str,
    line: usize,
    col0: usize,
) -> Result<Vec<Polynomial>, ProblemError> {
    let mut p = Parser {
        toks: tokenize(text, line, col0)?,
        pos: 0,
        line,
        ring,
    };
    let mut gens = Vec::new();
    loop {
        let col = p.col();
        let g = p.expr()?;
        if g.is_zero() {
            return Err(ProblemError::ZeroGenerator { line, col });
        }
        gens.push(g);
        if p.eat(',') {
            continue;
        }
        if *p.peek() == Tok::End {
            return Ok(gens);
        }
        return p.fail(&["`,`", "an operator", "end of line"]);
    }
}

/// Parses one polynomial over `ring`; used when reading emitted documents back.
pub fn parse_polynomial(ring: &RingRef, text: &str) -> Result<Polynomial, ProblemError> {
    let mut p = Parser {
        toks: tokenize(text, 1, 1)?,
        pos: 0,
        line: 1,
        ring,
    };
    let g = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail(&["an operator", "end of input"]);
    }
    Ok(g)
}

/// Parses the line-oriented problem format: `ring`, `ideal`, optional `exceptional` and
/// `threshold` declarations, `#` comments.
pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let mut ring: Option<RingRef> = None;
    let mut generators: Option<Vec<Polynomial>> = None;
    let mut exceptional: Option<Vec<usize>> = None;
    let mut threshold: Option<u32> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.chars().count() - trimmed.chars().count();
        let keyword: String = trimmed.chars().take_while(|c| !c.is_whitespace()).collect();
        let rest = &trimmed[keyword.len()..];
        let rest_col = indent + keyword.chars().count() + 1;
        let duplicate = |what: &str| ProblemError::Invalid {
            line,
            col: indent + 1,
            message: format!("duplicate `{what}` declaration"),
        };
        match keyword.as_str() {
            "ring" => {
                if ring.is_some() {
                    return Err(duplicate("ring"));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                let r = Ring::new(&names).map_err(|e| ProblemError::Invalid {
                    line,
                    col: rest_col,
                    message: e.to_string(),
                })?;
                ring = Some(r);
            }
            "ideal" => {
                if generators.is_some() {
                    return Err(duplicate("ideal"));
                }
                let Some(r) = &ring else {
                    return Err(ProblemError::Invalid {
                        line,
                        col: indent + 1,
                        message: "`ideal` before `ring`".into(),
                    });
                };
                generators = Some(parse_generators(r, rest, line, rest_col)?);
            }
            "exceptional" => {
                if exceptional.is_some() {
                    return Err(duplicate("exceptional"));
                }
                let Some(r) = &ring else {
                    return Err(ProblemError::Invalid {
                        line,
                        col: indent + 1,
                        message: "`exceptional` before `ring`".into(),
                    });
                };
                let mut idx = Vec::new();
                for (tok, col) in tokenize(rest, line, rest_col)? {
                    match tok {
                        Tok::Ident(name) => match r.index_of(&name) {
                            Some(i) if idx.contains(&i) => {
                                return Err(ProblemError::Invalid {
                                    line,
                                    col,
                                    message: format!("`{name}` seeded twice"),
                                })
                            }
                            Some(i) => idx.push(i),
                            None => return Err(ProblemError::UndeclaredVariable { name, line, col }),
                        },
                        Tok::End => {}
                        other => {
                            return Err(ProblemError::Syntax {
                                line,
                                col,
                                expected: vec!["a variable".into()],
                                found: other.to_string(),
                            })
                        }
                    }
                }
                exceptional = Some(idx);
            }
            "threshold" => {
                if threshold.is_some() {
                    return Err(duplicate("threshold"));
                }
                let toks = tokenize(rest, line, rest_col)?;
                match toks.as_slice() {
                    [(Tok::Int(n), col), (Tok::End, _)] => match n.parse::<u32>() {
                        Ok(b) if b >= 1 => threshold = Some(b),
                        _ => {
                            return Err(ProblemError::Invalid {
                                line,
                                col: *col,
                                message: "threshold must be a positive integer".into(),
                            })
                        }
                    },
                    [(t, col), ..] => {
                        return Err(ProblemError::Syntax {
                            line,
                            col: *col,
                            expected: vec!["a positive integer".into()],
                            found: t.to_string(),
                        })
                    }
                    [] => unreachable!("token list ends with End"),
                }
            }
            _ => {
                return Err(ProblemError::Syntax {
                    line,
                    col: indent + 1,
                    expected: ["`ring`", "`ideal`", "`exceptional`", "`threshold`"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                    found: format!("`{keyword}`"),
                })
            }
        }
    }
    let ring = ring.ok_or(ProblemError::Missing("ring"))?;
    let generators = generators.ok_or(ProblemError::Missing("ideal"))?;
    Ok(ProblemFile {
        ring,
        generators,
        exceptional: exceptional.unwrap_or_default(),
        threshold: threshold.unwrap_or(1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn curve_problem() {
        let p = parse_problem("ring x1 x2 x3\nideal x1, x2*x3 + x2^3 + x3^3\n").unwrap();
        assert_eq!(p.variables(), ["x1", "x2", "x3"]);
        assert_eq!(p.generators.len(), 2);
        assert_eq!(p.generators[1].to_string(), "x2^3 + x3^3 + x2*x3");
        assert_eq!(p.threshold, 1);
        assert!(p.exceptional.is_empty());
    }

    #[test]
    fn full_syntax() {
        let text = "# comment\nring x y\n  ideal -(x - 1/2)^2*y, 3*x*-y + 2  # trailing\nexceptional y\nthreshold 2\n";
        let p = parse_problem(text).unwrap();
        assert_eq!(p.generators[0].to_string(), "-x^2*y + x*y - 1/4*y");
        assert_eq!(p.generators[1].to_string(), "-3*x*y + 2");
        assert_eq!(p.exceptional, vec![1]);
        assert_eq!(p.threshold, 2);
        assert_eq!(parse_problem(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn errors_are_positioned() {
        assert_eq!(
            parse_problem("ring x1 x2 x3\nideal x4").unwrap_err(),
            ProblemError::UndeclaredVariable {
                name: "x4".into(),
                line: 2,
                col: 7
            }
        );
        assert!(matches!(
            parse_problem("ring x\nideal"),
            Err(ProblemError::Syntax { line: 2, .. })
        ));
        assert!(matches!(parse_problem("ring x\n"), Err(ProblemError::Missing("ideal"))));
        assert_eq!(
            parse_problem("ring x y\nideal x, y - y").unwrap_err(),
            ProblemError::ZeroGenerator { line: 2, col: 10 }
        );
        match parse_problem("ring x y\nideal x + * y").unwrap_err() {
            ProblemError::Syntax { line, col, expected, found } => {
                assert_eq!((line, col), (2, 11));
                assert!(expected.contains(&"a variable".to_string()));
                assert_eq!(found, "`*`");
            }
            e => panic!("{e:?}"),
        }
        assert!(matches!(
            parse_problem("ring x y\nideal x\nexceptional z"),
            Err(ProblemError::UndeclaredVariable { line: 3, .. })
        ));
        assert!(matches!(parse_problem("ring x\nideal 1/0"), Err(ProblemError::Syntax { .. })));
    }
}
