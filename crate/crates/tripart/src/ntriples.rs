//! Line-oriented N-Triples reader and writer.
//!
//! One `<s> <p> <o> .` statement per line; `#` comment lines and blank lines
//! are allowed. Parsing aborts on the first malformed line so a bad dump can
//! never load partially and skew the per-predicate statistics.

use std::io::BufRead;

use thiserror::Error;

use crate::term::{Dictionary, LiteralAnnotation, Term, Triple};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
}

impl ParseError {
    fn at(line: usize, reason: impl Into<String>) -> ParseError {
        ParseError::MalformedLine {
            line,
            reason: reason.into(),
        }
    }
}

/// Parse an N-Triples document, interning every term.
///
/// Triples come back in input order with duplicates preserved (bag
/// semantics). Literal escapes (`\n`, `\r`, `\t`, `\"`, `\\`, `\uXXXX`,
/// `\UXXXXXXXX`) are decoded.
pub fn parse_ntriples<R: BufRead>(reader: R) -> Result<(Vec<Triple>, Dictionary), ParseError> {
    let mut dict = Dictionary::new();
    let mut triples = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if let Some(triple) = parse_line(&line, i + 1, &mut dict)? {
            triples.push(triple);
        }
    }
    Ok((triples, dict))
}

/// Convenience wrapper over [`parse_ntriples`] for in-memory text.
pub fn parse_ntriples_str(input: &str) -> Result<(Vec<Triple>, Dictionary), ParseError> {
    parse_ntriples(input.as_bytes())
}

/// Serialize triples as N-Triples, one statement per line.
pub fn write_ntriples(triples: &[Triple], dict: &Dictionary) -> String {
    let mut out = String::new();
    for t in triples {
        out.push_str(&format!(
            "{} {} {} .\n",
            dict.resolve(t.subject),
            dict.resolve(t.predicate),
            dict.resolve(t.object)
        ));
    }
    out
}

/// Parse a single term in N-Triples syntax, requiring full consumption.
/// Used by the dataset loader to read literals back out of `dict.tsv`.
pub(crate) fn parse_term_str(input: &str) -> Result<Term, String> {
    let mut scan = Scanner::new(input, 0);
    let term = scan.term().map_err(|e| e.to_string())?;
    if !scan.at_end() {
        return Err("trailing content after term".into());
    }
    Ok(term)
}

fn parse_line(
    line: &str,
    line_no: usize,
    dict: &mut Dictionary,
) -> Result<Option<Triple>, ParseError> {
    let mut scan = Scanner::new(line, line_no);
    scan.skip_ws();
    if scan.at_end() || scan.peek() == Some('#') {
        return Ok(None);
    }

    let subject = scan.term()?;
    if !subject.is_subject_kind() {
        return Err(ParseError::at(line_no, "literal in subject position"));
    }
    scan.skip_ws();
    let predicate = scan.term()?;
    if !predicate.is_iri() {
        return Err(ParseError::at(line_no, "predicate must be an IRI"));
    }
    scan.skip_ws();
    let object = scan.term()?;
    scan.skip_ws();
    if scan.next() != Some('.') {
        return Err(ParseError::at(line_no, "missing terminal '.'"));
    }
    scan.skip_ws();
    if !scan.at_end() && scan.peek() != Some('#') {
        return Err(ParseError::at(line_no, "trailing content after '.'"));
    }

    Ok(Some(Triple::new(
        dict.intern(subject),
        dict.intern(predicate),
        dict.intern(object),
    )))
}

struct Scanner<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Scanner<'a> {
    fn new(line: &'a str, line_no: usize) -> Scanner<'a> {
        // Accept CRLF input: a trailing '\r' survives BufRead::lines.
        let line = line.strip_suffix('\r').unwrap_or(line);
        Scanner {
            chars: line.chars().peekable(),
            line: line_no,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn next(&mut self) -> Option<char> {
        self.chars.next()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ') | Some('\t')) {
            self.next();
        }
    }

    fn err(&self, reason: impl Into<String>) -> ParseError {
        ParseError::at(self.line, reason)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            Some('<') => self.iri().map(Term::Iri),
            Some('_') => self.blank_node(),
            Some('"') => self.literal(),
            Some(c) => Err(self.err(format!("expected term, found '{c}'"))),
            None => Err(self.err("expected term, found end of line")),
        }
    }

    fn iri(&mut self) -> Result<String, ParseError> {
        self.next(); // consume '<'
        let mut iri = String::new();
        loop {
            match self.next() {
                Some('>') => break,
                Some(c) if c.is_whitespace() => {
                    return Err(self.err("whitespace inside IRI"));
                }
                Some(c) => iri.push(c),
                None => return Err(self.err("unclosed IRI")),
            }
        }
        if iri.is_empty() {
            return Err(self.err("empty IRI"));
        }
        Ok(iri)
    }

    fn blank_node(&mut self) -> Result<Term, ParseError> {
        self.next(); // consume '_'
        if self.next() != Some(':') {
            return Err(self.err("expected ':' after '_' in blank node"));
        }
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || c == '_' || c == '-' {
                label.push(c);
                self.next();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.err("empty blank node label"));
        }
        Ok(Term::BlankNode(label))
    }

    fn literal(&mut self) -> Result<Term, ParseError> {
        self.next(); // consume '"'
        let mut value = String::new();
        loop {
            match self.next() {
                Some('"') => break,
                Some('\\') => value.push(self.escape()?),
                Some(c) => value.push(c),
                None => return Err(self.err("unclosed literal")),
            }
        }
        let annotation = match self.peek() {
            Some('@') => {
                self.next();
                let mut lang = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        lang.push(c);
                        self.next();
                    } else {
                        break;
                    }
                }
                if lang.is_empty() {
                    return Err(self.err("empty language tag"));
                }
                Some(LiteralAnnotation::Language(lang))
            }
            Some('^') => {
                self.next();
                if self.next() != Some('^') {
                    return Err(self.err("expected '^^' before datatype IRI"));
                }
                if self.peek() != Some('<') {
                    return Err(self.err("expected '<' after '^^'"));
                }
                Some(LiteralAnnotation::Datatype(self.iri()?))
            }
            _ => None,
        };
        Ok(Term::Literal { value, annotation })
    }

    fn escape(&mut self) -> Result<char, ParseError> {
        match self.next() {
            Some('t') => Ok('\t'),
            Some('b') => Ok('\u{8}'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.unicode_escape(4),
            Some('U') => self.unicode_escape(8),
            Some(c) => Err(self.err(format!("invalid escape '\\{c}'"))),
            None => Err(self.err("dangling '\\' at end of line")),
        }
    }

    fn unicode_escape(&mut self, digits: u32) -> Result<char, ParseError> {
        let mut code = 0u32;
        for _ in 0..digits {
            let c = self
                .next()
                .ok_or_else(|| self.err("truncated unicode escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| self.err(format!("invalid hex digit '{c}' in unicode escape")))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| self.err(format!("invalid code point U+{code:X}")))
    }
}
