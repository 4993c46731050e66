use std::collections::BTreeMap;

use super::lexer::{syntax, tokenize, Pos, Tok, Token};
use super::{Branch, DslError, Expr, MAX_DEPTH};
use crate::graph::DistSpec;
use crate::ops::{self, ParamError};

pub(super) struct Parser {
    toks: Vec<Token>,
    at: usize,
    depth: usize,
    /// Validate leaves against the op catalog and fill defaults.
    check: bool,
}

impl Parser {
    pub(super) fn new(src: &str, check: bool) -> Result<Self, DslError> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
            depth: 0,
            check,
        })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, DslError> {
        let t = self.peek();
        Err(syntax(t.pos, expected, &t.tok.describe()))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, DslError> {
        if self.peek().tok == tok {
            Ok(self.bump().pos)
        } else {
            self.fail(&[what])
        }
    }

    /// Whole input: one expression followed by end of input.
    pub(super) fn program(&mut self) -> Result<Expr, DslError> {
        let e = self.expr()?;
        if self.peek().tok != Tok::Eof {
            return self.fail(&["'^'", "'|'", "':'", "end of input"]);
        }
        Ok(e)
    }

    // expr := wterm ('^' wterm)*
    fn expr(&mut self) -> Result<Expr, DslError> {
        let start = self.peek().pos;
        let mut branches = vec![self.weighted_term()?];
        while self.peek().tok == Tok::Caret {
            self.bump();
            branches.push(self.weighted_term()?);
        }
        if branches.len() == 1 && branches[0].weight.is_none() {
            return Ok(branches.pop().unwrap().expr);
        }
        let weighted = branches.iter().any(|b| b.weight.is_some());
        if weighted && branches.iter().map(|b| b.weight.unwrap_or(1.0)).sum::<f64>() <= 0.0 {
            return Err(DslError::InvalidDist {
                line: start.line,
                col: start.col,
                message: "branch weights must have a positive sum".into(),
            });
        }
        Ok(Expr::Choice(branches))
    }

    // wterm := term (':' num)?
    fn weighted_term(&mut self) -> Result<Branch, DslError> {
        let expr = self.term()?;
        let weight = if self.peek().tok == Tok::Colon {
            self.bump();
            let t = self.bump();
            match t.tok {
                Tok::Num(w) if w >= 0.0 => Some(w),
                Tok::Num(w) => {
                    return Err(DslError::InvalidDist {
                        line: t.pos.line,
                        col: t.pos.col,
                        message: format!("branch weight must be non-negative, got {w}"),
                    })
                }
                other => return Err(syntax(t.pos, &["weight"], &other.describe())),
            }
        } else {
            None
        };
        Ok(Branch { expr, weight })
    }

    // term := factor ('|' factor)*
    fn term(&mut self) -> Result<Expr, DslError> {
        let mut parts = vec![self.factor()?];
        while self.peek().tok == Tok::Pipe {
            self.bump();
            parts.push(self.factor()?);
        }
        if parts.len() == 1 {
            return Ok(parts.pop().unwrap());
        }
        Ok(Expr::Cascade(parts))
    }

    // factor := IDENT '(' args ')' | 'identity' ['(' ')'] | '(' expr ')'
    fn factor(&mut self) -> Result<Expr, DslError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::LParen => {
                if self.depth >= MAX_DEPTH {
                    return Err(DslError::TooDeep {
                        line: t.pos.line,
                        col: t.pos.col,
                        limit: MAX_DEPTH,
                    });
                }
                self.bump();
                self.depth += 1;
                let e = self.expr()?;
                self.depth -= 1;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "identity" => {
                self.bump();
                if self.peek().tok == Tok::LParen {
                    self.bump();
                    self.expect(Tok::RParen, "')'")?;
                }
                Ok(Expr::Identity)
            }
            Tok::Ident(name) => {
                self.bump();
                self.expect(Tok::LParen, "'('")?;
                let raw = self.args()?;
                self.expect(Tok::RParen, "')'")?;
                let args = if self.check {
                    checked_args(&name, t.pos, raw)?
                } else {
                    raw.into_iter().map(|(n, d, _)| (n, d)).collect()
                };
                Ok(Expr::Leaf { name, args })
            }
            _ => self.fail(&["operation", "'identity'", "'('"]),
        }
    }

    fn args(&mut self) -> Result<Vec<(String, DistSpec, Pos)>, DslError> {
        let mut out: Vec<(String, DistSpec, Pos)> = Vec::new();
        if self.peek().tok == Tok::RParen {
            return Ok(out);
        }
        loop {
            let t = self.bump();
            let name = match t.tok {
                Tok::Ident(n) => n,
                other => return Err(syntax(t.pos, &["argument name"], &other.describe())),
            };
            if out.iter().any(|(n, ..)| *n == name) {
                return Err(DslError::DuplicateArg {
                    line: t.pos.line,
                    col: t.pos.col,
                    name,
                });
            }
            self.expect(Tok::Eq, "'='")?;
            let d = self.dist()?;
            out.push((name, d, t.pos));
            match self.peek().tok {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => return Ok(out),
                _ => return self.fail(&["','", "')'"]),
            }
        }
    }

    // dist := 'U(' num ',' num ')' | 'B(' num ')' | 'C(' num {',' num} ')' | num
    fn dist(&mut self) -> Result<DistSpec, DslError> {
        let t = self.bump();
        let d = match t.tok {
            Tok::Num(v) => DistSpec::Constant { value: v },
            Tok::Ident(ref f) if matches!(f.as_str(), "U" | "B" | "C") => {
                self.expect(Tok::LParen, "'('")?;
                let mut nums = vec![self.num()?];
                while self.peek().tok == Tok::Comma {
                    self.bump();
                    nums.push(self.num()?);
                }
                self.expect(Tok::RParen, "')'")?;
                let arity_err = |want: &str| DslError::InvalidDist {
                    line: t.pos.line,
                    col: t.pos.col,
                    message: format!("{f}(...) takes {want}, got {}", nums.len()),
                };
                match f.as_str() {
                    "U" if nums.len() == 2 => DistSpec::Uniform {
                        lo: nums[0],
                        hi: nums[1],
                    },
                    "U" => return Err(arity_err("2 numbers")),
                    "B" if nums.len() == 1 => DistSpec::Bernoulli { p: nums[0] },
                    "B" => return Err(arity_err("1 number")),
                    _ => DistSpec::Categorical { weights: nums },
                }
            }
            other => {
                return Err(syntax(
                    t.pos,
                    &["number", "'U('", "'B('", "'C('"],
                    &other.describe(),
                ))
            }
        };
        d.validate().map_err(|message| DslError::InvalidDist {
            line: t.pos.line,
            col: t.pos.col,
            message,
        })?;
        Ok(d)
    }

    fn num(&mut self) -> Result<f64, DslError> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(v),
            other => Err(syntax(t.pos, &["number"], &other.describe())),
        }
    }
}

fn checked_args(
    op: &str,
    at: Pos,
    raw: Vec<(String, DistSpec, Pos)>,
) -> Result<BTreeMap<String, DistSpec>, DslError> {
    let desc = ops::descriptor(op).ok_or_else(|| DslError::UnknownOp {
        line: at.line,
        col: at.col,
        name: op.to_string(),
    })?;
    let pos_of = |name: &str| {
        raw.iter()
            .find(|(n, ..)| n == name)
            .map(|(.., p)| *p)
            .unwrap_or(at)
    };
    let given: BTreeMap<String, DistSpec> =
        raw.iter().map(|(n, d, _)| (n.clone(), d.clone())).collect();
    desc.complete_params(&given).map_err(|(name, e)| {
        let p = pos_of(&name);
        let (line, col) = (p.line, p.col);
        match e {
            ParamError::Unknown => DslError::UnknownArg {
                line,
                col,
                op: op.to_string(),
                name,
            },
            ParamError::Invalid(message) => DslError::InvalidDist { line, col, message },
            e @ ParamError::OutOfBounds { .. } => DslError::OutOfBounds {
                line,
                col,
                op: op.to_string(),
                name,
                message: e.to_string(),
            },
        }
    })
}
