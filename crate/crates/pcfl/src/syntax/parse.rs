//! Lexer and recursive-descent parser for the surface syntax.
//!
//! Types: `bool | int | T -> T | T * T | [T]` with `->` right
//! associative and `*` binding tighter. Terms: literals, `\x:T. M`,
//! `fix f:T. M`, juxtaposition application (left associative),
//! `M (+) N` (right associative), `if`/`then`/`else`, `+`, `<=`, `==`,
//! pairs `(M, N)`, `fst`/`snd`, `M :: N` (right associative) and
//! `case L of { nil -> M | h::t -> N }`.

use super::{OpKind, Term, Type};
use num::BigUint;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Ident(String),
    Nat(BigUint),
    Lambda,
    Colon,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Arrow,
    ChoiceOp,
    Plus,
    Le,
    EqEq,
    ConsOp,
    Comma,
    Bar,
    Lt,
    Gt,
    Star,
    True,
    False,
    Nil,
    Fix,
    If,
    Then,
    Else,
    Case,
    Of,
    Fst,
    Snd,
    BoolTy,
    IntTy,
    Eof,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Token::Ident(x) => return write!(f, "identifier `{}`", x),
            Token::Nat(n) => return write!(f, "number `{}`", n),
            Token::Lambda => "\\",
            Token::Colon => ":",
            Token::Dot => ".",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBracket => "[",
            Token::RBracket => "]",
            Token::LBrace => "{",
            Token::RBrace => "}",
            Token::Arrow => "->",
            Token::ChoiceOp => "(+)",
            Token::Plus => "+",
            Token::Le => "<=",
            Token::EqEq => "==",
            Token::ConsOp => "::",
            Token::Comma => ",",
            Token::Bar => "|",
            Token::Lt => "<",
            Token::Gt => ">",
            Token::Star => "*",
            Token::True => "true",
            Token::False => "false",
            Token::Nil => "nil",
            Token::Fix => "fix",
            Token::If => "if",
            Token::Then => "then",
            Token::Else => "else",
            Token::Case => "case",
            Token::Of => "of",
            Token::Fst => "fst",
            Token::Snd => "snd",
            Token::BoolTy => "bool",
            Token::IntTy => "int",
            Token::Eof => "end of input",
        };
        write!(f, "`{}`", s)
    }
}

/// Token stream with source positions; shared by the term, type and
/// test parsers.
pub struct Lexer {
    tokens: Vec<(Token, usize, usize)>,
    pos: usize,
}

impl Lexer {
    pub fn new(text: &str) -> Result<Lexer, ParseError> {
        let mut tokens = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0usize;
        let err = |line, col, message: String| ParseError { line, col, message };
        while i < chars.len() {
            let c = chars[i];
            let (tl, tc) = (line, col);
            macro_rules! push {
                ($tok:expr, $n:expr) => {{
                    tokens.push(($tok, tl, tc));
                    i += $n;
                    col += $n;
                }};
            }
            match c {
                '\n' => {
                    i += 1;
                    line += 1;
                    col = 1;
                }
                c if c.is_whitespace() => {
                    i += 1;
                    col += 1;
                }
                '#' => {
                    // line comment
                    while i < chars.len() && chars[i] != '\n' {
                        i += 1;
                    }
                }
                '\\' => push!(Token::Lambda, 1),
                '.' => push!(Token::Dot, 1),
                ')' => push!(Token::RParen, 1),
                '[' => push!(Token::LBracket, 1),
                ']' => push!(Token::RBracket, 1),
                '{' => push!(Token::LBrace, 1),
                '}' => push!(Token::RBrace, 1),
                ',' => push!(Token::Comma, 1),
                '|' => push!(Token::Bar, 1),
                '>' => push!(Token::Gt, 1),
                '*' => push!(Token::Star, 1),
                '+' => push!(Token::Plus, 1),
                '(' => {
                    if i + 2 < chars.len() && chars[i + 1] == '+' && chars[i + 2] == ')' {
                        push!(Token::ChoiceOp, 3);
                    } else {
                        push!(Token::LParen, 1);
                    }
                }
                ':' => {
                    if i + 1 < chars.len() && chars[i + 1] == ':' {
                        push!(Token::ConsOp, 2);
                    } else {
                        push!(Token::Colon, 1);
                    }
                }
                '-' => {
                    if i + 1 < chars.len() && chars[i + 1] == '>' {
                        push!(Token::Arrow, 2);
                    } else {
                        return Err(err(tl, tc, "expected `->`".into()));
                    }
                }
                '<' => {
                    if i + 1 < chars.len() && chars[i + 1] == '=' {
                        push!(Token::Le, 2);
                    } else {
                        push!(Token::Lt, 1);
                    }
                }
                '=' => {
                    if i + 1 < chars.len() && chars[i + 1] == '=' {
                        push!(Token::EqEq, 2);
                    } else {
                        return Err(err(tl, tc, "expected `==`".into()));
                    }
                }
                c if c.is_ascii_digit() => {
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let n: BigUint = s.parse().expect("digits");
                    tokens.push((Token::Nat(n), tl, tc));
                    col += i - start;
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let start = i;
                    while i < chars.len()
                        && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '\'')
                    {
                        i += 1;
                    }
                    let s: String = chars[start..i].iter().collect();
                    let tok = match s.as_str() {
                        "true" => Token::True,
                        "false" => Token::False,
                        "nil" => Token::Nil,
                        "fix" => Token::Fix,
                        "if" => Token::If,
                        "then" => Token::Then,
                        "else" => Token::Else,
                        "case" => Token::Case,
                        "of" => Token::Of,
                        "fst" => Token::Fst,
                        "snd" => Token::Snd,
                        "bool" => Token::BoolTy,
                        "int" => Token::IntTy,
                        _ => Token::Ident(s),
                    };
                    tokens.push((tok, tl, tc));
                    col += i - start;
                }
                other => {
                    return Err(err(tl, tc, format!("unexpected character `{}`", other)));
                }
            }
        }
        tokens.push((Token::Eof, line, col));
        Ok(Lexer { tokens, pos: 0 })
    }

    pub fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    pub fn peek2(&self) -> &Token {
        let i = (self.pos + 1).min(self.tokens.len() - 1);
        &self.tokens[i].0
    }

    pub fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    pub fn here(&self) -> (usize, usize) {
        let (_, l, c) = self.tokens[self.pos];
        (l, c)
    }

    pub fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError { line, col, message: message.into() }
    }

    pub fn expect(&mut self, tok: Token) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(format!("expected {}, found {}", tok, self.peek())))
        }
    }

    pub fn expect_ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Token::Ident(x) => {
                self.next();
                Ok(x)
            }
            other => Err(self.error(format!("expected identifier, found {}", other))),
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Token::Eof {
            Ok(())
        } else {
            Err(self.error(format!("unexpected {}", self.peek())))
        }
    }
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut lx = Lexer::new(text)?;
    let t = term(&mut lx)?;
    lx.expect_eof()?;
    Ok(t)
}

pub fn parse_type(text: &str) -> Result<Type, ParseError> {
    let mut lx = Lexer::new(text)?;
    let t = ty(&mut lx)?;
    lx.expect_eof()?;
    Ok(t)
}

pub fn term(lx: &mut Lexer) -> Result<Term, ParseError> {
    match lx.peek() {
        Token::Lambda => {
            lx.next();
            let x = lx.expect_ident()?;
            lx.expect(Token::Colon)?;
            let t = ty(lx)?;
            lx.expect(Token::Dot)?;
            let body = term(lx)?;
            Ok(Term::Lam(x, t, Box::new(body)))
        }
        Token::Fix => {
            lx.next();
            let x = lx.expect_ident()?;
            lx.expect(Token::Colon)?;
            let t = ty(lx)?;
            lx.expect(Token::Dot)?;
            let body = term(lx)?;
            Ok(Term::Fix(x, t, Box::new(body)))
        }
        Token::If => {
            lx.next();
            let c = term(lx)?;
            lx.expect(Token::Then)?;
            let t = term(lx)?;
            lx.expect(Token::Else)?;
            let e = term(lx)?;
            Ok(Term::ite(c, t, e))
        }
        Token::Case => {
            lx.next();
            let scrut = term(lx)?;
            lx.expect(Token::Of)?;
            lx.expect(Token::LBrace)?;
            lx.expect(Token::Nil)?;
            lx.expect(Token::Arrow)?;
            let nil = term(lx)?;
            lx.expect(Token::Bar)?;
            let h = lx.expect_ident()?;
            lx.expect(Token::ConsOp)?;
            let t = lx.expect_ident()?;
            lx.expect(Token::Arrow)?;
            let cons = term(lx)?;
            lx.expect(Token::RBrace)?;
            Ok(Term::case(scrut, nil, &h, &t, cons))
        }
        _ => choice(lx),
    }
}

fn choice(lx: &mut Lexer) -> Result<Term, ParseError> {
    let l = cons(lx)?;
    if *lx.peek() == Token::ChoiceOp {
        lx.next();
        let r = choice(lx)?;
        Ok(Term::choice(l, r))
    } else {
        Ok(l)
    }
}

fn cons(lx: &mut Lexer) -> Result<Term, ParseError> {
    let l = cmp(lx)?;
    if *lx.peek() == Token::ConsOp {
        lx.next();
        let r = cons(lx)?;
        Ok(Term::cons(l, r))
    } else {
        Ok(l)
    }
}

fn cmp(lx: &mut Lexer) -> Result<Term, ParseError> {
    let l = add(lx)?;
    let op = match lx.peek() {
        Token::Le => OpKind::Le,
        Token::EqEq => OpKind::Eq,
        _ => return Ok(l),
    };
    lx.next();
    let r = add(lx)?;
    Ok(Term::op(op, l, r))
}

fn add(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut l = app(lx)?;
    while *lx.peek() == Token::Plus {
        lx.next();
        let r = app(lx)?;
        l = Term::op(OpKind::Add, l, r);
    }
    Ok(l)
}

fn starts_prefix(tok: &Token) -> bool {
    matches!(
        tok,
        Token::Ident(_)
            | Token::Nat(_)
            | Token::True
            | Token::False
            | Token::Nil
            | Token::Fst
            | Token::Snd
            | Token::LParen
    )
}

fn app(lx: &mut Lexer) -> Result<Term, ParseError> {
    let mut t = prefix(lx)?;
    while starts_prefix(lx.peek()) {
        let arg = prefix(lx)?;
        t = Term::app(t, arg);
    }
    Ok(t)
}

fn prefix(lx: &mut Lexer) -> Result<Term, ParseError> {
    match lx.peek() {
        Token::Fst => {
            lx.next();
            Ok(Term::fst(prefix(lx)?))
        }
        Token::Snd => {
            lx.next();
            Ok(Term::snd(prefix(lx)?))
        }
        _ => atom(lx),
    }
}

fn atom(lx: &mut Lexer) -> Result<Term, ParseError> {
    match lx.peek().clone() {
        Token::Nat(n) => {
            lx.next();
            Ok(Term::Num(n))
        }
        Token::True => {
            lx.next();
            Ok(Term::Bool(true))
        }
        Token::False => {
            lx.next();
            Ok(Term::Bool(false))
        }
        Token::Ident(x) => {
            lx.next();
            Ok(Term::Var(x))
        }
        Token::Nil => {
            lx.next();
            lx.expect(Token::LBracket)?;
            let t = ty(lx)?;
            lx.expect(Token::RBracket)?;
            Ok(Term::Nil(t))
        }
        Token::LParen => {
            lx.next();
            let t = term(lx)?;
            if *lx.peek() == Token::Comma {
                lx.next();
                let s = term(lx)?;
                lx.expect(Token::RParen)?;
                Ok(Term::pair(t, s))
            } else {
                lx.expect(Token::RParen)?;
                Ok(t)
            }
        }
        other => Err(lx.error(format!("expected a term, found {}", other))),
    }
}

pub fn ty(lx: &mut Lexer) -> Result<Type, ParseError> {
    let l = prod_ty(lx)?;
    if *lx.peek() == Token::Arrow {
        lx.next();
        let r = ty(lx)?;
        Ok(Type::arrow(l, r))
    } else {
        Ok(l)
    }
}

fn prod_ty(lx: &mut Lexer) -> Result<Type, ParseError> {
    let l = atom_ty(lx)?;
    if *lx.peek() == Token::Star {
        lx.next();
        let r = prod_ty(lx)?;
        Ok(Type::prod(l, r))
    } else {
        Ok(l)
    }
}

fn atom_ty(lx: &mut Lexer) -> Result<Type, ParseError> {
    match lx.peek().clone() {
        Token::BoolTy => {
            lx.next();
            Ok(Type::Bool)
        }
        Token::IntTy => {
            lx.next();
            Ok(Type::Int)
        }
        Token::LBracket => {
            lx.next();
            let t = ty(lx)?;
            lx.expect(Token::RBracket)?;
            Ok(Type::list(t))
        }
        Token::LParen => {
            lx.next();
            let t = ty(lx)?;
            lx.expect(Token::RParen)?;
            Ok(t)
        }
        other => Err(lx.error(format!("expected a type, found {}", other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_lambda() {
        let t = parse_term("\\x:bool. x").unwrap();
        assert_eq!(t, Term::lam("x", Type::Bool, Term::var("x")));
    }

    #[test]
    fn parse_fix_with_lambda_body() {
        let t = parse_term("fix f:int->int. \\x:int. f x").unwrap();
        match t {
            Term::Fix(f, ty, body) => {
                assert_eq!(f, "f");
                assert_eq!(ty, Type::arrow(Type::Int, Type::Int));
                assert!(matches!(*body, Term::Lam(_, _, _)));
            }
            other => panic!("expected fix, got {:?}", other),
        }
    }

    #[test]
    fn parse_error_has_position() {
        let e = parse_term("\\x:bool").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.col >= 7, "col was {}", e.col);
    }

    #[test]
    fn application_is_left_associative() {
        let t = parse_term("f x y").unwrap();
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")));
    }

    #[test]
    fn choice_is_right_associative() {
        let t = parse_term("1 (+) 2 (+) 3").unwrap();
        assert_eq!(t, Term::choice(Term::num(1), Term::choice(Term::num(2), Term::num(3))));
    }

    #[test]
    fn types_nest_as_documented() {
        let t = parse_type("bool * int -> [int] -> int").unwrap();
        assert_eq!(
            t,
            Type::arrow(
                Type::prod(Type::Bool, Type::Int),
                Type::arrow(Type::list(Type::Int), Type::Int)
            )
        );
    }

    #[test]
    fn print_parse_round_trip() {
        let samples = [
            "\\x:bool. x",
            "fix f:int -> int. \\x:int. f (x + 1)",
            "if true then 1 (+) 2 else fst (1, 2)",
            "case 1 :: nil[int] of { nil -> 0 | h::t -> h + 1 }",
            "(\\x:bool. x) (true (+) false)",
            "snd ((1, 2), 3)",
            "1 + 2 + 3 <= 4",
            "(1 (+) 2) (+) 3",
        ];
        for s in samples {
            let t = parse_term(s).unwrap();
            let printed = t.to_string();
            let t2 = parse_term(&printed).unwrap_or_else(|e| panic!("reparse `{}`: {}", printed, e));
            assert!(t.alpha_eq(&t2), "round trip failed: `{}` -> `{}`", s, printed);
        }
    }
}
