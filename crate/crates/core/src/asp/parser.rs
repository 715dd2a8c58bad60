//! Recursive-descent parser for the normal-program subset.
//!
//! ```text
//! rule    := [atom] [":-" literal ("," literal)*] "."
//! literal := ["not"] atom
//! atom    := ident ["(" term ("," term)* ")"]
//! term    := ident | Variable | integer | "string"
//! ```
//!
//! `%` starts a comment running to the end of the line.

use std::collections::HashMap;

use thiserror::Error;

use super::syntax::{Atom, Constant, Program, Rule, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at {line}:{col}: {message}")]
    SyntaxError { line: usize, col: usize, message: String },
    #[error("rule {rule} is unsafe: variable {variable} does not occur in a positive body literal")]
    UnsafeRule { rule: usize, variable: String },
    #[error("predicate {predicate} is used with more than one arity")]
    ArityMismatch { predicate: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    Dot,
    If,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, message: impl Into<String>) -> ParseError {
    ParseError::SyntaxError {
        line,
        col,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    macro_rules! bump {
        () => {{
            if chars[i] == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
        }};
    }
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                col: start_col,
            })
        };
        if c.is_whitespace() {
            bump!();
        } else if c == '%' {
            while i < chars.len() && chars[i] != '\n' {
                bump!();
            }
        } else if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                bump!();
            }
            let tok = if c.is_ascii_uppercase() { Tok::Var(s) } else { Tok::Ident(s) };
            push(&mut out, tok);
        } else if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            s.push(c);
            bump!();
            while i < chars.len() && chars[i].is_ascii_digit() {
                s.push(chars[i]);
                bump!();
            }
            let n = s
                .parse::<i64>()
                .map_err(|_| syntax(start_line, start_col, format!("integer {s} out of range")))?;
            push(&mut out, Tok::Int(n));
        } else if c == '"' {
            bump!();
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None => return Err(syntax(start_line, start_col, "unterminated string")),
                    Some('"') => {
                        bump!();
                        break;
                    }
                    Some('\\') => {
                        bump!();
                        let escaped = match chars.get(i) {
                            Some('"') => '"',
                            Some('\\') => '\\',
                            Some('n') => '\n',
                            _ => return Err(syntax(line, col, "invalid escape sequence")),
                        };
                        s.push(escaped);
                        bump!();
                    }
                    Some(&ch) => {
                        s.push(ch);
                        bump!();
                    }
                }
            }
            push(&mut out, Tok::Str(s));
        } else if c == ':' && chars.get(i + 1) == Some(&'-') {
            bump!();
            bump!();
            push(&mut out, Tok::If);
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                other => return Err(syntax(line, col, format!("unexpected character {other:?}"))),
            };
            bump!();
            push(&mut out, tok);
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn rule(&mut self) -> Result<Rule, ParseError> {
        let head = match self.peek().tok {
            Tok::If => None,
            _ => Some(self.atom()?),
        };
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let t = self.next();
        match t.tok {
            Tok::Dot if head.is_some() => {}
            Tok::If => {
                loop {
                    self.literal(&mut pos, &mut neg)?;
                    let t = self.next();
                    match t.tok {
                        Tok::Comma => continue,
                        Tok::Dot => break,
                        other => {
                            return Err(syntax(
                                t.line,
                                t.col,
                                format!("expected ',' or '.', found {}", describe(&other)),
                            ))
                        }
                    }
                }
            }
            other => {
                return Err(syntax(t.line, t.col, format!("expected ':-' or '.', found {}", describe(&other))))
            }
        }
        Ok(Rule { head, pos, neg })
    }

    fn literal(&mut self, pos: &mut Vec<Atom>, neg: &mut Vec<Atom>) -> Result<(), ParseError> {
        let negated = matches!(&self.peek().tok, Tok::Ident(s) if s == "not")
            && matches!(self.tokens.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Ident(_)));
        if negated {
            self.next();
            neg.push(self.atom()?);
        } else {
            pos.push(self.atom()?);
        }
        Ok(())
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let t = self.next();
        let Tok::Ident(predicate) = t.tok else {
            return Err(syntax(t.line, t.col, format!("expected a predicate name, found {}", describe(&t.tok))));
        };
        let mut args = Vec::new();
        if self.peek().tok == Tok::LParen {
            self.next();
            loop {
                args.push(self.term()?);
                let t = self.next();
                match t.tok {
                    Tok::Comma => continue,
                    Tok::RParen => break,
                    other => {
                        return Err(syntax(t.line, t.col, format!("expected ',' or ')', found {}", describe(&other))))
                    }
                }
            }
        }
        Ok(Atom { predicate, args })
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let t = self.next();
        Ok(match t.tok {
            Tok::Ident(s) => Term::Const(Constant::Symbol(s)),
            Tok::Var(v) => Term::Var(v),
            Tok::Int(n) => Term::Const(Constant::Int(n)),
            Tok::Str(s) => Term::Const(Constant::Str(s)),
            other => return Err(syntax(t.line, t.col, format!("expected a term, found {}", describe(&other)))),
        })
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Ident(s) | Tok::Var(s) => format!("'{s}'"),
        Tok::Int(n) => format!("'{n}'"),
        Tok::Str(s) => format!("{s:?}"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::Comma => "','".into(),
        Tok::Dot => "'.'".into(),
        Tok::If => "':-'".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses a program and checks arity consistency and rule safety.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        pos: 0,
    };
    let mut rules = Vec::new();
    while parser.peek().tok != Tok::Eof {
        rules.push(parser.rule()?);
    }
    let program = Program::new(rules);
    check_program(&program)?;
    Ok(program)
}

/// The arity and safety checks applied by [`parse_program`].
pub fn check_program(program: &Program) -> Result<(), ParseError> {
    let mut arity: HashMap<&str, usize> = HashMap::new();
    for r in &program.rules {
        for a in r.head.iter().chain(&r.pos).chain(&r.neg) {
            match arity.get(a.predicate.as_str()) {
                Some(&n) if n != a.args.len() => {
                    return Err(ParseError::ArityMismatch {
                        predicate: a.predicate.clone(),
                    })
                }
                Some(_) => {}
                None => {
                    arity.insert(&a.predicate, a.args.len());
                }
            }
        }
    }
    for (i, r) in program.rules.iter().enumerate() {
        if let Some(v) = r.unsafe_variable() {
            return Err(ParseError::UnsafeRule {
                rule: i,
                variable: v.to_string(),
            });
        }
    }
    Ok(())
}
