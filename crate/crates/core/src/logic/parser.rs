//! Parser for the knowledge language.
//!
//! ```text
//! decl := "const" ident ("," ident)* "."
//!       | "pred" ident "/" nat "."
//!       | "fact" formula "."
//!       | "rule" "all" ident ":" formula "->" formula "."
//!       | "stat" ident ":" formula "|" formula "in" "[" num "," num "]" "."
//!       | "default" [formula] ":" "M" formula ("," "M" formula)* "/" formula "."
//! formula := literal | "~" formula | formula "&" formula | formula "v" formula | "(" formula ")"
//! ```
//!
//! `#` starts a comment that runs to end of line. Precedence: `~` binds
//! tighter than `&`, which binds tighter than `v`. Constants must be
//! declared before use; predicates are declared implicitly at first use
//! and their arity is checked everywhere else.

use crate::error::{Error, Result};
use crate::evidence::{ProbabilityInterval, StatisticalStatement};
use crate::logic::{Formula, OpenAtom, OpenFormula, Signature, Term, Theory, UniversalRule};
use crate::rivals::DefaultRule;

/// A fully resolved knowledge base as read from a program text.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub signature: Signature,
    /// Explicit ground facts, in declaration order.
    pub facts: Vec<Formula>,
    /// Universal rules, unexpanded.
    pub rules: Vec<UniversalRule>,
    /// Facts plus the eager ground expansion of every rule.
    pub theory: Theory,
    pub stats: Vec<StatisticalStatement>,
    pub defaults: Vec<DefaultRule>,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Dot,
    Comma,
    Colon,
    Slash,
    Pipe,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Tilde,
    Amp,
    Arrow,
}

struct Lexer {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

impl Lexer {
    fn new(text: &str) -> Result<Lexer> {
        let mut toks = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            let (l, co) = (line, col);
            let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
                let c = chars.next().unwrap();
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                c
            };
            if c.is_whitespace() {
                bump(&mut chars);
                continue;
            }
            if c == '#' {
                while let Some(&c2) = chars.peek() {
                    bump(&mut chars);
                    if c2 == '\n' {
                        break;
                    }
                }
                continue;
            }
            if is_ident_start(c) {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if is_ident_char(c2) {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Ident(s), l, co));
                continue;
            }
            if c.is_ascii_digit() {
                let mut s = String::new();
                while let Some(&c2) = chars.peek() {
                    if c2.is_ascii_digit() || c2 == '.' {
                        // a dot not followed by a digit terminates the number
                        if c2 == '.' {
                            let mut look = chars.clone();
                            look.next();
                            if !look.peek().is_some_and(|d| d.is_ascii_digit()) {
                                break;
                            }
                        }
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                toks.push((Tok::Number(s), l, co));
                continue;
            }
            bump(&mut chars);
            let tok = match c {
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                '/' => Tok::Slash,
                '|' => Tok::Pipe,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '~' => Tok::Tilde,
                '&' => Tok::Amp,
                '-' => {
                    if chars.peek() == Some(&'>') {
                        bump(&mut chars);
                        Tok::Arrow
                    } else {
                        return Err(Error::Syntax {
                            line: l,
                            col: co,
                            msg: "expected `->`".into(),
                        });
                    }
                }
                other => {
                    return Err(Error::Syntax {
                        line: l,
                        col: co,
                        msg: format!("unexpected character `{other}`"),
                    })
                }
            };
            toks.push((tok, l, co));
        }
        Ok(Lexer { toks, pos: 0 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn loc(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|(_, l, c)| (*l, *c))
            .unwrap_or((1, 1))
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.loc();
        Error::Syntax {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }
}

struct Parser {
    lex: Lexer,
    sig: Signature,
    facts: Vec<Formula>,
    rules: Vec<UniversalRule>,
    stats: Vec<StatisticalStatement>,
    defaults: Vec<DefaultRule>,
}

impl Parser {
    fn run(mut self) -> Result<Program> {
        while self.lex.peek().is_some() {
            self.decl()?;
        }
        let mut theory = Theory::new();
        for f in &self.facts {
            theory.push(f.clone());
        }
        for r in &self.rules {
            for g in r.ground(&self.sig) {
                theory.push(g);
            }
        }
        Ok(Program {
            signature: self.sig,
            facts: self.facts,
            rules: self.rules,
            theory,
            stats: self.stats,
            defaults: self.defaults,
        })
    }

    fn decl(&mut self) -> Result<()> {
        let kw = self.lex.expect_ident("a declaration keyword")?;
        match kw.as_str() {
            "const" => {
                loop {
                    let name = self.lex.expect_ident("a constant name")?;
                    self.sig.add_constant(&name);
                    if self.lex.peek() == Some(&Tok::Comma) {
                        self.lex.next();
                    } else {
                        break;
                    }
                }
                self.lex.expect(Tok::Dot, "`.`")
            }
            "pred" => {
                let name = self.lex.expect_ident("a predicate name")?;
                self.lex.expect(Tok::Slash, "`/`")?;
                let arity = match self.lex.next() {
                    Some(Tok::Number(n)) => n
                        .parse::<usize>()
                        .map_err(|_| self.lex.err("expected an arity"))?,
                    _ => return Err(self.lex.err("expected an arity")),
                };
                self.sig.add_predicate(&name, arity)?;
                self.lex.expect(Tok::Dot, "`.`")
            }
            "fact" => {
                let f = self.formula(None)?;
                let f = close(f)?;
                self.facts.push(f);
                self.lex.expect(Tok::Dot, "`.`")
            }
            "rule" => {
                let all = self.lex.expect_ident("`all`")?;
                if all != "all" {
                    return Err(self.lex.err("expected `all`"));
                }
                let var = self.lex.expect_ident("a variable name")?;
                self.lex.expect(Tok::Colon, "`:`")?;
                let ante = self.formula(Some(&var))?;
                self.lex.expect(Tok::Arrow, "`->`")?;
                let cons = self.formula(Some(&var))?;
                self.lex.expect(Tok::Dot, "`.`")?;
                self.rules.push(UniversalRule {
                    variable: var,
                    antecedent: ante,
                    consequent: cons,
                });
                Ok(())
            }
            "stat" => {
                let var = self.lex.expect_ident("a variable name")?;
                self.lex.expect(Tok::Colon, "`:`")?;
                let target = self.formula(Some(&var))?;
                self.lex.expect(Tok::Pipe, "`|`")?;
                let reference = self.formula(Some(&var))?;
                let in_kw = self.lex.expect_ident("`in`")?;
                if in_kw != "in" {
                    return Err(self.lex.err("expected `in`"));
                }
                self.lex.expect(Tok::LBracket, "`[`")?;
                let lower = self.number()?;
                self.lex.expect(Tok::Comma, "`,`")?;
                let upper = self.number()?;
                self.lex.expect(Tok::RBracket, "`]`")?;
                self.lex.expect(Tok::Dot, "`.`")?;
                let interval = ProbabilityInterval::new(lower, upper)?;
                self.stats.push(StatisticalStatement {
                    variable: var,
                    target,
                    reference,
                    interval,
                });
                Ok(())
            }
            "default" => {
                let prerequisite = if self.lex.peek() == Some(&Tok::Colon) {
                    None
                } else {
                    Some(close(self.formula(None)?)?)
                };
                self.lex.expect(Tok::Colon, "`:`")?;
                let mut justifications = Vec::new();
                loop {
                    let m = self.lex.expect_ident("`M`")?;
                    if m != "M" {
                        return Err(self.lex.err("expected `M`"));
                    }
                    justifications.push(close(self.formula(None)?)?);
                    if self.lex.peek() == Some(&Tok::Comma) {
                        self.lex.next();
                    } else {
                        break;
                    }
                }
                self.lex.expect(Tok::Slash, "`/`")?;
                let consequent = close(self.formula(None)?)?;
                self.lex.expect(Tok::Dot, "`.`")?;
                self.defaults.push(DefaultRule {
                    prerequisite,
                    justifications,
                    consequent,
                });
                Ok(())
            }
            other => Err(self.lex.err(format!("unknown declaration `{other}`"))),
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.lex.next() {
            Some(Tok::Number(n)) => n
                .parse::<f64>()
                .map_err(|_| self.lex.err("malformed number")),
            _ => Err(self.lex.err("expected a number")),
        }
    }

    /// Disjunction level. `v` is recognized as the infix or-operator.
    fn formula(&mut self, var: Option<&str>) -> Result<OpenFormula> {
        let mut parts = vec![self.conjunction(var)?];
        while matches!(self.lex.peek(), Some(Tok::Ident(s)) if s == "v") {
            self.lex.next();
            parts.push(self.conjunction(var)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            OpenFormula::Or(parts)
        })
    }

    fn conjunction(&mut self, var: Option<&str>) -> Result<OpenFormula> {
        let mut parts = vec![self.unary(var)?];
        while self.lex.peek() == Some(&Tok::Amp) {
            self.lex.next();
            parts.push(self.unary(var)?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            OpenFormula::And(parts)
        })
    }

    fn unary(&mut self, var: Option<&str>) -> Result<OpenFormula> {
        match self.lex.peek() {
            Some(Tok::Tilde) => {
                self.lex.next();
                Ok(OpenFormula::Not(Box::new(self.unary(var)?)))
            }
            Some(Tok::LParen) => {
                self.lex.next();
                let f = self.formula(var)?;
                self.lex.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(_)) => self.atom(var),
            _ => Err(self.lex.err("expected a formula")),
        }
    }

    fn atom(&mut self, var: Option<&str>) -> Result<OpenFormula> {
        let name = self.lex.expect_ident("a predicate")?;
        let mut args = Vec::new();
        if self.lex.peek() == Some(&Tok::LParen) {
            self.lex.next();
            loop {
                let arg = self.lex.expect_ident("an argument")?;
                if var == Some(arg.as_str()) {
                    args.push(Term::Var);
                } else if let Some(c) = self.sig.constant(&arg) {
                    args.push(Term::Const(c));
                } else {
                    return Err(Error::UndeclaredConstant(arg));
                }
                if self.lex.peek() == Some(&Tok::Comma) {
                    self.lex.next();
                } else {
                    break;
                }
            }
            self.lex.expect(Tok::RParen, "`)`")?;
        }
        let pred = self.sig.add_predicate(&name, args.len())?;
        Ok(OpenFormula::Atom(OpenAtom { pred, args }))
    }
}

/// Converts an open formula that mentions no variable into a ground one.
fn close(f: OpenFormula) -> Result<Formula> {
    if f.mentions_var() {
        // unreachable through the grammar: ground contexts never bind a var
        return Err(Error::UnknownName("free variable in ground context".into()));
    }
    Ok(f.instantiate(0))
}

/// Parses a whole program text.
pub fn parse_program(text: &str) -> Result<Program> {
    let lex = Lexer::new(text)?;
    Parser {
        lex,
        sig: Signature::new(),
        facts: Vec::new(),
        rules: Vec::new(),
        stats: Vec::new(),
        defaults: Vec::new(),
    }
    .run()
}

/// Parses a single ground formula (a query or universe line) against an
/// existing signature. New predicates are declared implicitly, as in
/// programs; constants must already be declared.
pub fn parse_formula(text: &str, sig: &mut Signature) -> Result<Formula> {
    let lex = Lexer::new(text)?;
    let mut p = Parser {
        lex,
        sig: sig.clone(),
        facts: Vec::new(),
        rules: Vec::new(),
        stats: Vec::new(),
        defaults: Vec::new(),
    };
    let f = p.formula(None)?;
    if p.lex.peek().is_some() {
        return Err(p.lex.err("trailing input after formula"));
    }
    *sig = p.sig;
    close(f)
}
