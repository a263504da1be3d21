//! Recursive-descent parser with operator priorities.
//!
//! Priorities follow the usual Prolog layout: `;` binds looser than `,`,
//! which binds looser than `\+`, then comparison/unification operators,
//! then arithmetic. Parentheses are always honored. `%` starts a line
//! comment. Parsing is total: malformed input yields a [`SyntaxError`],
//! never a partial program.

use super::{goal_from_term, infix_op, Assoc, Atom, Clause, Goal, Program, Term};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("syntax error at {line}:{column}: {message}")]
pub struct SyntaxError {
    /// Byte offset into the input.
    pub position: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Var(v) => format!("variable `{v}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }
}

const SYMBOLS: &[&str] = &[
    ":-", "=:=", "=\\=", "==", "=<", "=", "\\+", "\\=", ">=", ">", "<", "+", "-", "*", "//",
    ";", ",", "|", "(", ")", "[", "]", "!", ".",
];

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn skip_trivia(&mut self) {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() {
            let b = bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'%' {
                while self.pos < bytes.len() && bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize), SyntaxError> {
        self.skip_trivia();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::Eof, start));
        };
        if c.is_ascii_digit() {
            let len = rest.chars().take_while(|c| c.is_ascii_digit()).count();
            let text = &rest[..len];
            self.pos += len;
            let n: i64 = text.parse().map_err(|_| self.err_at(start, "integer overflow"))?;
            return Ok((Tok::Int(n), start));
        }
        if c.is_ascii_lowercase() {
            let len = rest
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .count();
            let text = rest[..len].to_string();
            self.pos += len;
            return Ok((Tok::Ident(text), start));
        }
        if c.is_ascii_uppercase() || c == '_' {
            let len = rest
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric() || *c == '_')
                .count();
            let text = rest[..len].to_string();
            self.pos += len;
            return Ok((Tok::Var(text), start));
        }
        for sym in SYMBOLS {
            if rest.starts_with(sym) {
                self.pos += sym.len();
                return Ok((Tok::Sym(sym), start));
            }
        }
        Err(self.err_at(start, &format!("unexpected character `{c}`")))
    }

    fn err_at(&self, position: usize, message: &str) -> SyntaxError {
        let mut line = 1;
        let mut column = 1;
        for (i, c) in self.src.char_indices() {
            if i >= position {
                break;
            }
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        }
        SyntaxError { position, line, column, message: message.to_string() }
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
    anon_counter: u64,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, SyntaxError> {
        let mut lexer = Lexer::new(src);
        let (tok, tok_pos) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_pos, anon_counter: 0 })
    }

    fn bump(&mut self) -> Result<(), SyntaxError> {
        let (tok, pos) = self.lexer.next()?;
        self.tok = tok;
        self.tok_pos = pos;
        Ok(())
    }

    fn err(&self, message: impl Into<String>) -> SyntaxError {
        self.lexer.err_at(self.tok_pos, &message.into())
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), SyntaxError> {
        if self.tok == Tok::Sym(sym) {
            self.bump()
        } else {
            Err(self.err(format!("expected `{sym}`, found {}", self.tok.describe())))
        }
    }

    /// Operator priority climbing. `max_prio` bounds which infix
    /// operators may be consumed.
    fn parse_expr(&mut self, max_prio: u32) -> Result<Term, SyntaxError> {
        let mut left = self.parse_prefix(max_prio)?;
        loop {
            let op = match &self.tok {
                Tok::Sym(s) => *s,
                Tok::Ident(s) if s == "is" || s == "mod" => {
                    // leak-free static mapping for the two ident-shaped operators
                    if s == "is" {
                        "is"
                    } else {
                        "mod"
                    }
                }
                _ => break,
            };
            let Some(info) = infix_op(op) else { break };
            if info.prio > max_prio {
                break;
            }
            self.bump()?;
            let right_max = match info.assoc {
                Assoc::Xfy => info.prio,
                Assoc::Xfx | Assoc::Yfx => info.prio - 1,
            };
            let right = self.parse_expr(right_max)?;
            left = Term::Compound(op.to_string(), vec![left, right]);
            if info.assoc == Assoc::Xfx {
                // xfx operators do not chain
                if let Tok::Sym(s) = &self.tok {
                    if infix_op(s).map(|i| i.prio) == Some(info.prio) {
                        return Err(self.err(format!("operator `{s}` cannot follow `{op}`")));
                    }
                }
            }
        }
        Ok(left)
    }

    fn parse_prefix(&mut self, max_prio: u32) -> Result<Term, SyntaxError> {
        match &self.tok {
            Tok::Sym("\\+") => {
                if max_prio < 900 {
                    return Err(self.err("`\\+` not allowed here; add parentheses"));
                }
                self.bump()?;
                let operand = self.parse_expr(900)?;
                Ok(Term::Compound("\\+".into(), vec![operand]))
            }
            Tok::Sym("-") => {
                self.bump()?;
                if let Tok::Int(n) = self.tok {
                    self.bump()?;
                    Ok(Term::Int(-n))
                } else {
                    let operand = self.parse_expr(200)?;
                    Ok(Term::Compound("-".into(), vec![operand]))
                }
            }
            _ => self.parse_primary(),
        }
    }

    fn parse_primary(&mut self) -> Result<Term, SyntaxError> {
        match self.tok.clone() {
            Tok::Int(n) => {
                self.bump()?;
                Ok(Term::Int(n))
            }
            Tok::Var(v) => {
                self.bump()?;
                if v == "_" {
                    // each bare underscore is a fresh variable
                    self.anon_counter += 1;
                    Ok(Term::Variable(format!("_Anon{}", self.anon_counter)))
                } else {
                    Ok(Term::Variable(v))
                }
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::Sym("(") {
                    self.bump()?;
                    let args = self.parse_args()?;
                    Ok(Term::Compound(name, args))
                } else {
                    Ok(Term::Constant(name))
                }
            }
            Tok::Sym("(") => {
                self.bump()?;
                let inner = self.parse_expr(1100)?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            Tok::Sym("[") => {
                self.bump()?;
                self.parse_list()
            }
            Tok::Sym("!") => {
                self.bump()?;
                Ok(Term::Constant("!".into()))
            }
            other => Err(self.err(format!("expected a term, found {}", other.describe()))),
        }
    }

    fn parse_args(&mut self) -> Result<Vec<Term>, SyntaxError> {
        let mut args = vec![self.parse_expr(999)?];
        while self.tok == Tok::Sym(",") {
            self.bump()?;
            args.push(self.parse_expr(999)?);
        }
        self.expect_sym(")")?;
        Ok(args)
    }

    fn parse_list(&mut self) -> Result<Term, SyntaxError> {
        if self.tok == Tok::Sym("]") {
            self.bump()?;
            return Ok(Term::nil());
        }
        let mut items = vec![self.parse_expr(999)?];
        while self.tok == Tok::Sym(",") {
            self.bump()?;
            items.push(self.parse_expr(999)?);
        }
        let tail = if self.tok == Tok::Sym("|") {
            self.bump()?;
            Some(self.parse_expr(999)?)
        } else {
            None
        };
        self.expect_sym("]")?;
        // normalize a literal list tail into the item sequence
        match tail {
            Some(Term::List(tail_items, tail_tail)) => {
                items.extend(tail_items);
                Ok(Term::List(items, tail_tail))
            }
            Some(t) => Ok(Term::List(items, Some(Box::new(t)))),
            None => Ok(Term::List(items, None)),
        }
    }

    fn parse_clause(&mut self) -> Result<Clause, SyntaxError> {
        let term = self.parse_expr(1200)?;
        self.expect_sym(".")?;
        match term {
            Term::Compound(neck, args) if neck == ":-" && args.len() == 2 => {
                let mut it = args.into_iter();
                let head = self.head_atom(it.next().unwrap())?;
                let body_term = it.next().unwrap();
                let goal = goal_from_term(&body_term).map_err(|m| self.err(m))?;
                let body = match goal {
                    Goal::Conjunction(gs) => gs,
                    g => vec![g],
                };
                Ok(Clause { head, body })
            }
            t => Ok(Clause::fact(self.head_atom(t)?)),
        }
    }

    fn head_atom(&self, t: Term) -> Result<Atom, SyntaxError> {
        match t {
            Term::Compound(f, args) if infix_op(&f).is_none() && f != "\\+" => {
                Ok(Atom::new(f, args))
            }
            Term::Constant(c) if c != "!" => Ok(Atom::new(c, Vec::new())),
            other => Err(self.err(format!("`{other}` is not a valid clause head"))),
        }
    }
}

/// Parses a sequence of period-terminated clauses.
pub fn parse_program(text: &str) -> Result<Program, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while p.tok != Tok::Eof {
        p.anon_counter = 0;
        clauses.push(p.parse_clause()?);
    }
    Ok(Program { clauses })
}

/// Parses a single term (no trailing period).
pub fn parse_term(text: &str) -> Result<Term, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.parse_expr(1100)?;
    if p.tok != Tok::Eof {
        return Err(p.err(format!("unexpected {} after term", p.tok.describe())));
    }
    Ok(t)
}

/// Parses a single atom such as `eastbound(train1)` (no trailing period).
pub fn parse_atom(text: &str) -> Result<Atom, SyntaxError> {
    let mut p = Parser::new(text)?;
    let t = p.parse_expr(999)?;
    if p.tok != Tok::Eof {
        return Err(p.err(format!("unexpected {} after atom", p.tok.describe())));
    }
    match t {
        Term::Compound(f, args) if infix_op(&f).is_none() && f != "\\+" => Ok(Atom::new(f, args)),
        Term::Constant(c) if c != "!" => Ok(Atom::new(c, Vec::new())),
        other => Err(SyntaxError {
            position: 0,
            line: 1,
            column: 1,
            message: format!("`{other}` is not an atom"),
        }),
    }
}
