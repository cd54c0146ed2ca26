//! Circuit text format: a small line-oriented language with one header and
//! one instruction per statement.
//!
//! ```text
//! program := header instr*
//! header  := "qubits" INT ";" "cbits" INT ";"
//! instr   := MNEMONIC [ "(" FLOAT ")" ] INT [ "," INT ] ";"
//!          | "measure" INT "->" INT ";"
//! ```
//!
//! `#` starts a comment that runs to end of line. Tokens may be separated by
//! arbitrary whitespace. [`print_circuit`] emits the canonical form: the
//! header on the first line, one instruction per line, lowercase mnemonics,
//! a single space after commas, angles in shortest round-trip decimal form,
//! and exactly one trailing newline. Parsing the canonical form recovers the
//! circuit exactly, including angle bit patterns.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, GateKind, Instruction};

/// Parse failure with a 1-based source position. Semantic violations
/// (invalid indices, gate after measurement, duplicate classical bit) are
/// reported at the first token of the offending statement.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TokenKind {
    Ident,
    Number,
    Semi,
    LParen,
    RParen,
    Comma,
    Arrow,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    kind: TokenKind,
    text: &'a str,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, line: usize, column: usize, message: impl Into<String>) -> ParseError {
        ParseError {
            line,
            column,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Token<'a>>, ParseError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek_char() {
                if c == '#' {
                    while let Some(c) = self.peek_char() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                } else if c.is_whitespace() {
                    self.bump();
                } else {
                    break;
                }
            }
            let (line, column, start) = (self.line, self.column, self.pos);
            let Some(c) = self.peek_char() else {
                return Ok(out);
            };
            let kind = match c {
                ';' => {
                    self.bump();
                    TokenKind::Semi
                }
                '(' => {
                    self.bump();
                    TokenKind::LParen
                }
                ')' => {
                    self.bump();
                    TokenKind::RParen
                }
                ',' => {
                    self.bump();
                    TokenKind::Comma
                }
                '-' => {
                    self.bump();
                    if self.peek_char() == Some('>') {
                        self.bump();
                        TokenKind::Arrow
                    } else {
                        self.lex_number_tail()?;
                        TokenKind::Number
                    }
                }
                '+' => {
                    self.bump();
                    self.lex_number_tail()?;
                    TokenKind::Number
                }
                c if c.is_ascii_digit() || c == '.' => {
                    self.lex_number_tail()?;
                    TokenKind::Number
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while let Some(c) = self.peek_char() {
                        if c.is_ascii_alphanumeric() || c == '_' {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    TokenKind::Ident
                }
                other => {
                    return Err(self.error(line, column, format!("unexpected character '{}'", other)))
                }
            };
            out.push(Token {
                kind,
                text: &self.src[start..self.pos],
                line,
                column,
            });
        }
    }

    /// Consumes the remainder of a numeric literal: digits, at most one dot,
    /// and an optional exponent. The leading sign or first digit has already
    /// been taken.
    fn lex_number_tail(&mut self) -> Result<(), ParseError> {
        let (line, column) = (self.line, self.column);
        let mut saw_digit = self
            .src[..self.pos]
            .chars()
            .next_back()
            .is_some_and(|c| c.is_ascii_digit());
        let mut saw_dot = self.src[..self.pos].ends_with('.');
        while let Some(c) = self.peek_char() {
            match c {
                '0'..='9' => {
                    saw_digit = true;
                    self.bump();
                }
                '.' if !saw_dot => {
                    saw_dot = true;
                    self.bump();
                }
                'e' | 'E' if saw_digit => {
                    self.bump();
                    if matches!(self.peek_char(), Some('+') | Some('-')) {
                        self.bump();
                    }
                    let mut exp_digits = false;
                    while let Some(c) = self.peek_char() {
                        if c.is_ascii_digit() {
                            exp_digits = true;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    if !exp_digits {
                        return Err(self.error(line, column, "malformed number"));
                    }
                    return Ok(());
                }
                _ => break,
            }
        }
        if saw_digit {
            Ok(())
        } else {
            Err(self.error(line, column, "malformed number"))
        }
    }
}

struct Parser<'a> {
    tokens: Vec<Token<'a>>,
    index: usize,
    end_line: usize,
    end_column: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token<'a>> {
        self.tokens.get(self.index)
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let tok = self.tokens.get(self.index).copied();
        if tok.is_some() {
            self.index += 1;
        }
        tok
    }

    fn error_at_end(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.end_line,
            column: self.end_column,
            message: message.into(),
        }
    }

    fn error_at(&self, tok: &Token<'_>, message: impl Into<String>) -> ParseError {
        ParseError {
            line: tok.line,
            column: tok.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token<'a>, ParseError> {
        match self.next() {
            Some(tok) if tok.kind == kind => Ok(tok),
            Some(tok) => Err(self.error_at(&tok, format!("expected {}, found '{}'", what, tok.text))),
            None => Err(self.error_at_end(format!("expected {}, found end of input", what))),
        }
    }

    fn expect_keyword(&mut self, word: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(tok) if tok.kind == TokenKind::Ident && tok.text == word => Ok(()),
            Some(tok) => Err(self.error_at(&tok, format!("expected \"{}\", found '{}'", word, tok.text))),
            None => Err(self.error_at_end(format!("expected \"{}\", found end of input", word))),
        }
    }

    fn expect_int(&mut self, what: &str) -> Result<(usize, Token<'a>), ParseError> {
        let tok = self.expect(TokenKind::Number, what)?;
        if !tok.text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(self.error_at(&tok, format!("expected {}, found '{}'", what, tok.text)));
        }
        let value = tok
            .text
            .parse::<usize>()
            .map_err(|_| self.error_at(&tok, format!("{} '{}' is too large", what, tok.text)))?;
        Ok((value, tok))
    }

    fn expect_float(&mut self, what: &str) -> Result<f64, ParseError> {
        let tok = self.expect(TokenKind::Number, what)?;
        tok.text
            .parse::<f64>()
            .map_err(|_| self.error_at(&tok, format!("malformed {} '{}'", what, tok.text)))
    }
}

/// Parses program text into a validated [`Circuit`].
pub fn parse_circuit(src: &str) -> Result<Circuit, ParseError> {
    let mut end = Lexer::new(src);
    while end.bump().is_some() {}
    let (end_line, end_column) = (end.line, end.column);
    let tokens = Lexer::new(src).tokens()?;
    let mut p = Parser {
        tokens,
        index: 0,
        end_line,
        end_column,
    };

    p.expect_keyword("qubits")?;
    let (num_qubits, nq_tok) = p.expect_int("qubit count")?;
    p.expect(TokenKind::Semi, "';'")?;
    p.expect_keyword("cbits")?;
    let (num_cbits, _) = p.expect_int("classical bit count")?;
    p.expect(TokenKind::Semi, "';'")?;

    let mut circuit = Circuit::new(num_qubits, num_cbits)
        .map_err(|e| p.error_at(&nq_tok, e.to_string()))?;

    while let Some(&head) = p.peek() {
        if head.kind != TokenKind::Ident {
            return Err(p.error_at(&head, format!("expected mnemonic, found '{}'", head.text)));
        }
        p.next();
        let instr = if head.text == "measure" {
            let (qubit, _) = p.expect_int("qubit index")?;
            p.expect(TokenKind::Arrow, "'->'")?;
            let (cbit, _) = p.expect_int("classical bit index")?;
            p.expect(TokenKind::Semi, "';'")?;
            Instruction::measure(qubit, cbit)
        } else {
            let Some(kind) = GateKind::from_mnemonic(head.text) else {
                return Err(p.error_at(&head, format!("unknown mnemonic '{}'", head.text)));
            };
            let param = if p.peek().is_some_and(|t| t.kind == TokenKind::LParen) {
                p.next();
                let angle = p.expect_float("angle")?;
                p.expect(TokenKind::RParen, "')'")?;
                Some(angle)
            } else {
                None
            };
            let (first, _) = p.expect_int("qubit index")?;
            let mut qubits = vec![first];
            if p.peek().is_some_and(|t| t.kind == TokenKind::Comma) {
                p.next();
                let (second, _) = p.expect_int("qubit index")?;
                qubits.push(second);
            }
            p.expect(TokenKind::Semi, "';'")?;
            Instruction::Gate {
                kind,
                qubits,
                param,
            }
        };
        circuit = circuit.append(instr).map_err(|e| {
            let message = match e {
                CircuitError::InvalidInstruction { message, .. } => message,
                other => other.to_string(),
            };
            p.error_at(&head, message)
        })?;
    }
    Ok(circuit)
}

/// Renders a circuit in canonical text form.
pub fn print_circuit(circuit: &Circuit) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "qubits {}; cbits {};",
        circuit.num_qubits, circuit.num_cbits
    );
    for instr in &circuit.instructions {
        match instr {
            Instruction::Gate {
                kind,
                qubits,
                param,
            } => {
                let _ = match (param, qubits.as_slice()) {
                    (Some(angle), [q]) => writeln!(out, "{}({}) {};", kind, angle, q),
                    (None, [q]) => writeln!(out, "{} {};", kind, q),
                    (None, [a, b]) => writeln!(out, "{} {}, {};", kind, a, b),
                    _ => unreachable!("validated circuits have fixed arity"),
                };
            }
            Instruction::Measure { qubit, cbit } => {
                let _ = writeln!(out, "measure {} -> {};", qubit, cbit);
            }
        }
    }
    out
}
