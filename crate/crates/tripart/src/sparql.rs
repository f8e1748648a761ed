//! Parser for the supported SPARQL subset: `SELECT` (optionally `DISTINCT`)
//! over a single basic graph pattern, with `PREFIX` expansion and the `a`
//! shorthand for `rdf:type`.
//!
//! Everything outside the subset is rejected with a classified error:
//! `FILTER`, `OPTIONAL`, `UNION` and friends are [`UnsupportedFeature`],
//! malformed input is [`Syntax`] with a byte position.
//!
//! [`UnsupportedFeature`]: QueryParseError::UnsupportedFeature
//! [`Syntax`]: QueryParseError::Syntax

use std::fmt;

use thiserror::Error;

use crate::term::{LiteralAnnotation, Term};

const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

/// A query variable. The name is stored without the leading `?`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(String);

impl Variable {
    /// Construct from a bare name matching `[A-Za-z_][A-Za-z0-9_]*`.
    pub fn new(name: impl Into<String>) -> Option<Variable> {
        let name = name.into();
        let mut chars = name.chars();
        let valid_first = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
        if valid_first && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
            Some(Variable(name))
        } else {
            None
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?{}", self.0)
    }
}

/// Subject or object position of a pattern: a variable or a constant term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PatternTerm {
    Var(Variable),
    Const(Term),
}

impl PatternTerm {
    pub fn as_var(&self) -> Option<&Variable> {
        match self {
            PatternTerm::Var(v) => Some(v),
            PatternTerm::Const(_) => None,
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, PatternTerm::Const(_))
    }
}

impl fmt::Display for PatternTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternTerm::Var(v) => v.fmt(f),
            PatternTerm::Const(t) => t.fmt(f),
        }
    }
}

/// One triple pattern. The predicate is always a constant IRI: variable
/// predicates are outside the supported subset because the storage layout
/// and statistics are keyed by predicate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: Term,
    pub object: PatternTerm,
}

impl TriplePattern {
    /// Variables of this pattern in (subject, object) position order.
    pub fn variables(&self) -> impl Iterator<Item = &Variable> {
        self.subject
            .as_var()
            .into_iter()
            .chain(self.object.as_var())
    }

    pub fn has_constant_object(&self) -> bool {
        self.object.is_const()
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

/// `SELECT *` or an explicit variable list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<Variable>),
}

/// A parsed query: projection plus one conjunctive basic graph pattern.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BgpQuery {
    pub projection: Projection,
    pub distinct: bool,
    pub patterns: Vec<TriplePattern>,
}

impl BgpQuery {
    /// All variables in first-occurrence order across patterns.
    pub fn variables(&self) -> Vec<Variable> {
        let mut vars = Vec::new();
        for p in &self.patterns {
            for v in p.variables() {
                if !vars.contains(v) {
                    vars.push(v.clone());
                }
            }
        }
        vars
    }

    /// The output columns: the projection list, or every variable in
    /// first-occurrence order for `SELECT *`.
    pub fn projected_variables(&self) -> Vec<Variable> {
        match &self.projection {
            Projection::All => self.variables(),
            Projection::Vars(vs) => vs.clone(),
        }
    }
}

impl fmt::Display for BgpQuery {
    /// Canonical rendering; parsing it back yields an equal query.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SELECT ")?;
        if self.distinct {
            write!(f, "DISTINCT ")?;
        }
        match &self.projection {
            Projection::All => write!(f, "*")?,
            Projection::Vars(vs) => {
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{v}")?;
                }
            }
        }
        writeln!(f, " WHERE {{")?;
        for p in &self.patterns {
            writeln!(f, "  {p} .")?;
        }
        write!(f, "}}")
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QueryParseError {
    #[error("syntax error at byte {position}: {reason}")]
    Syntax { position: usize, reason: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("projected variable ?{0} occurs in no pattern")]
    UnboundProjection(String),
}

fn syntax(position: usize, reason: impl Into<String>) -> QueryParseError {
    QueryParseError::Syntax {
        position,
        reason: reason.into(),
    }
}

/// Features recognized and refused, so the error names the construct rather
/// than pointing at a confusing parse position.
const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "FILTER",
    "OPTIONAL",
    "UNION",
    "GROUP",
    "ORDER",
    "LIMIT",
    "OFFSET",
    "HAVING",
    "MINUS",
    "SERVICE",
    "BIND",
    "VALUES",
    "GRAPH",
    "EXISTS",
    "NOT",
    "ASK",
    "CONSTRUCT",
    "DESCRIBE",
    "BASE",
    "REDUCED",
    "FROM",
];

/// Parse a query in the supported subset.
pub fn parse_query(input: &str) -> Result<BgpQuery, QueryParseError> {
    Parser::new(input).query()
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    prefixes: Vec<(String, String)>,
}

impl<'a> Parser<'a> {
    fn new(input: &'a str) -> Parser<'a> {
        Parser {
            input: input.as_bytes(),
            pos: 0,
            prefixes: Vec::new(),
        }
    }

    fn query(&mut self) -> Result<BgpQuery, QueryParseError> {
        self.skip_trivia();
        loop {
            match self.peek_keyword() {
                Some(kw) if kw.eq_ignore_ascii_case("PREFIX") => self.prefix_decl()?,
                _ => break,
            }
        }

        let kw_pos = self.pos;
        match self.peek_keyword() {
            Some(kw) if kw.eq_ignore_ascii_case("SELECT") => {
                self.take_keyword();
            }
            Some(kw) if is_unsupported_keyword(&kw) => {
                return Err(QueryParseError::UnsupportedFeature(kw.to_uppercase()));
            }
            _ => return Err(syntax(kw_pos, "expected SELECT")),
        }

        self.skip_trivia();
        let distinct = match self.peek_keyword() {
            Some(kw) if kw.eq_ignore_ascii_case("DISTINCT") => {
                self.take_keyword();
                true
            }
            Some(kw) if kw.eq_ignore_ascii_case("REDUCED") => {
                return Err(QueryParseError::UnsupportedFeature("REDUCED".into()));
            }
            _ => false,
        };

        self.skip_trivia();
        let projection = if self.peek_byte() == Some(b'*') {
            self.pos += 1;
            Projection::All
        } else {
            let mut vars = Vec::new();
            while let Some(b'?') = {
                self.skip_trivia();
                self.peek_byte()
            } {
                vars.push(self.variable()?);
            }
            if vars.is_empty() {
                return Err(syntax(
                    self.pos,
                    "expected '*' or variable list after SELECT",
                ));
            }
            Projection::Vars(vars)
        };

        self.skip_trivia();
        match self.peek_keyword() {
            Some(kw) if kw.eq_ignore_ascii_case("WHERE") => {
                self.take_keyword();
            }
            _ => return Err(syntax(self.pos, "expected WHERE")),
        }

        self.skip_trivia();
        self.expect_byte(b'{', "expected '{' to open the graph pattern")?;
        let patterns = self.graph_pattern()?;
        if patterns.is_empty() {
            return Err(syntax(self.pos, "empty basic graph pattern"));
        }

        self.skip_trivia();
        if self.pos < self.input.len() {
            if let Some(kw) = self.peek_keyword() {
                if is_unsupported_keyword(&kw) {
                    return Err(QueryParseError::UnsupportedFeature(kw.to_uppercase()));
                }
            }
            return Err(syntax(self.pos, "unexpected content after '}'"));
        }

        let query = BgpQuery {
            projection,
            distinct,
            patterns,
        };
        if let Projection::Vars(vs) = &query.projection {
            let bound = query.variables();
            for v in vs {
                if !bound.contains(v) {
                    return Err(QueryParseError::UnboundProjection(v.name().to_string()));
                }
            }
        }
        Ok(query)
    }

    fn prefix_decl(&mut self) -> Result<(), QueryParseError> {
        self.take_keyword(); // PREFIX
        self.skip_trivia();
        let start = self.pos;
        let mut name = String::new();
        while let Some(b) = self.peek_byte() {
            if b == b':' {
                break;
            }
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
                name.push(b as char);
                self.pos += 1;
            } else {
                return Err(syntax(start, "expected prefix name followed by ':'"));
            }
        }
        self.expect_byte(b':', "expected ':' in PREFIX declaration")?;
        self.skip_trivia();
        let iri = self.iri_ref()?;
        self.prefixes.retain(|(n, _)| n != &name);
        self.prefixes.push((name, iri));
        self.skip_trivia();
        Ok(())
    }

    fn graph_pattern(&mut self) -> Result<Vec<TriplePattern>, QueryParseError> {
        let mut patterns = Vec::new();
        loop {
            self.skip_trivia();
            match self.peek_byte() {
                Some(b'}') => {
                    self.pos += 1;
                    return Ok(patterns);
                }
                Some(b'{') => {
                    return Err(QueryParseError::UnsupportedFeature(
                        "nested group pattern".into(),
                    ));
                }
                None => return Err(syntax(self.pos, "unterminated graph pattern")),
                _ => {}
            }
            if let Some(kw) = self.peek_keyword() {
                if is_unsupported_keyword(&kw) {
                    return Err(QueryParseError::UnsupportedFeature(kw.to_uppercase()));
                }
                if kw.eq_ignore_ascii_case("SELECT") {
                    return Err(QueryParseError::UnsupportedFeature("subquery".into()));
                }
            }
            patterns.push(self.triple_pattern()?);
            self.skip_trivia();
            match self.peek_byte() {
                Some(b'.') => {
                    self.pos += 1;
                }
                Some(b'}') => {} // final pattern may omit the dot
                Some(b';') | Some(b',') => {
                    return Err(syntax(
                        self.pos,
                        "predicate/object lists are not supported; write full patterns separated by '.'",
                    ));
                }
                _ => return Err(syntax(self.pos, "expected '.' or '}' after pattern")),
            }
        }
    }

    fn triple_pattern(&mut self) -> Result<TriplePattern, QueryParseError> {
        let subject = self.pattern_term(false)?;
        if let PatternTerm::Const(t) = &subject {
            if t.is_literal() {
                return Err(syntax(self.pos, "literal in subject position"));
            }
        }
        self.skip_trivia();
        let pred_pos = self.pos;
        let predicate = match self.peek_byte() {
            Some(b'?') | Some(b'$') => {
                return Err(QueryParseError::UnsupportedFeature(
                    "variable predicate".into(),
                ));
            }
            Some(b'a') if self.keyword_is_bare_a() => {
                self.pos += 1;
                Term::iri(RDF_TYPE)
            }
            _ => match self.pattern_term(true)? {
                PatternTerm::Const(t) if t.is_iri() => t,
                _ => return Err(syntax(pred_pos, "predicate must be an IRI")),
            },
        };
        // a path operator right after the predicate means a property path
        if matches!(
            self.peek_byte(),
            Some(b'/') | Some(b'|') | Some(b'+') | Some(b'*') | Some(b'^')
        ) {
            return Err(QueryParseError::UnsupportedFeature("property path".into()));
        }
        self.skip_trivia();
        let object = self.pattern_term(false)?;
        Ok(TriplePattern {
            subject,
            predicate,
            object,
        })
    }

    /// True when the next token is exactly the bare keyword `a`.
    fn keyword_is_bare_a(&mut self) -> bool {
        if self.peek_byte() != Some(b'a') {
            return false;
        }
        match self.input.get(self.pos + 1) {
            None => true,
            Some(&b) => !(b.is_ascii_alphanumeric() || b == b'_' || b == b':'),
        }
    }

    fn pattern_term(&mut self, as_predicate: bool) -> Result<PatternTerm, QueryParseError> {
        self.skip_trivia();
        match self.peek_byte() {
            Some(b'?') => Ok(PatternTerm::Var(self.variable()?)),
            Some(b'$') => Err(syntax(self.pos, "use '?' for variables")),
            Some(b'<') => Ok(PatternTerm::Const(Term::Iri(self.iri_ref()?))),
            Some(b'"') => {
                if as_predicate {
                    return Err(syntax(self.pos, "predicate must be an IRI"));
                }
                Ok(PatternTerm::Const(self.literal()?))
            }
            Some(b'\'') => Err(syntax(self.pos, "use double quotes for literals")),
            Some(b'_') => {
                self.pos += 1;
                self.expect_byte(b':', "expected ':' after '_' in blank node")?;
                let start = self.pos;
                let mut label = String::new();
                while let Some(b) = self.peek_byte() {
                    if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' {
                        label.push(b as char);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if label.is_empty() {
                    return Err(syntax(start, "empty blank node label"));
                }
                Ok(PatternTerm::Const(Term::BlankNode(label)))
            }
            Some(b) if b.is_ascii_digit() || b == b'+' || b == b'-' => Err(syntax(
                self.pos,
                "bare numeric literals are not supported; quote the value",
            )),
            Some(_) => {
                // prefixed name such as foaf:name
                let pos = self.pos;
                let (prefix, local) = self.prefixed_name()?;
                let base = self
                    .prefixes
                    .iter()
                    .rev()
                    .find(|(n, _)| n == &prefix)
                    .map(|(_, iri)| iri.clone())
                    .ok_or_else(|| syntax(pos, format!("unknown prefix '{prefix}:'")))?;
                Ok(PatternTerm::Const(Term::Iri(format!("{base}{local}"))))
            }
            None => Err(syntax(self.pos, "expected term, found end of input")),
        }
    }

    fn variable(&mut self) -> Result<Variable, QueryParseError> {
        let start = self.pos;
        self.pos += 1; // consume '?'
        let name = self.ident_chars();
        Variable::new(name).ok_or_else(|| syntax(start, "invalid variable name"))
    }

    fn ident_chars(&mut self) -> String {
        let start = self.pos;
        while let Some(b) = self.peek_byte() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        String::from_utf8_lossy(&self.input[start..self.pos]).into_owned()
    }

    fn prefixed_name(&mut self) -> Result<(String, String), QueryParseError> {
        let start = self.pos;
        let prefix = self.ident_chars();
        if self.peek_byte() != Some(b':') {
            return Err(syntax(start, format!("unexpected token '{prefix}'")));
        }
        self.pos += 1;
        let mut local = String::new();
        while let Some(b) = self.peek_byte() {
            if b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || b == b'.' || b == b'#' {
                local.push(b as char);
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((prefix, local))
    }

    fn iri_ref(&mut self) -> Result<String, QueryParseError> {
        let start = self.pos;
        self.expect_byte(b'<', "expected '<'")?;
        let mut iri = String::new();
        loop {
            match self.next_char() {
                Some('>') => break,
                Some(c) if c.is_whitespace() => {
                    return Err(syntax(start, "whitespace inside IRI"));
                }
                Some(c) => iri.push(c),
                None => return Err(syntax(start, "unclosed IRI")),
            }
        }
        if iri.is_empty() {
            return Err(syntax(start, "empty IRI"));
        }
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Term, QueryParseError> {
        let start = self.pos;
        self.pos += 1; // consume '"'
        let mut value = String::new();
        loop {
            match self.next_char() {
                Some('"') => break,
                Some('\\') => {
                    let escaped = self
                        .next_char()
                        .ok_or_else(|| syntax(start, "dangling escape at end of input"))?;
                    match escaped {
                        't' => value.push('\t'),
                        'b' => value.push('\u{8}'),
                        'n' => value.push('\n'),
                        'r' => value.push('\r'),
                        'f' => value.push('\u{c}'),
                        '"' => value.push('"'),
                        '\'' => value.push('\''),
                        '\\' => value.push('\\'),
                        'u' => value.push(self.unicode_escape(start, 4)?),
                        'U' => value.push(self.unicode_escape(start, 8)?),
                        other => return Err(syntax(start, format!("invalid escape '\\{other}'"))),
                    }
                }
                Some(c) => value.push(c),
                None => return Err(syntax(start, "unclosed literal")),
            }
        }
        let annotation = match self.peek_byte() {
            Some(b'@') => {
                self.pos += 1;
                let mut lang = String::new();
                while let Some(b) = self.peek_byte() {
                    if b.is_ascii_alphanumeric() || b == b'-' {
                        lang.push(b as char);
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                if lang.is_empty() {
                    return Err(syntax(self.pos, "empty language tag"));
                }
                Some(LiteralAnnotation::Language(lang))
            }
            Some(b'^') => {
                self.pos += 1;
                self.expect_byte(b'^', "expected '^^' before datatype")?;
                match self.peek_byte() {
                    Some(b'<') => Some(LiteralAnnotation::Datatype(self.iri_ref()?)),
                    _ => {
                        let pos = self.pos;
                        let (prefix, local) = self.prefixed_name()?;
                        let base = self
                            .prefixes
                            .iter()
                            .rev()
                            .find(|(n, _)| n == &prefix)
                            .map(|(_, iri)| iri.clone())
                            .ok_or_else(|| syntax(pos, format!("unknown prefix '{prefix}:'")))?;
                        Some(LiteralAnnotation::Datatype(format!("{base}{local}")))
                    }
                }
            }
            _ => None,
        };
        Ok(Term::Literal { value, annotation })
    }

    fn unicode_escape(&mut self, start: usize, digits: u32) -> Result<char, QueryParseError> {
        let mut code = 0u32;
        for _ in 0..digits {
            let c = self
                .next_char()
                .ok_or_else(|| syntax(start, "truncated unicode escape"))?;
            let d = c
                .to_digit(16)
                .ok_or_else(|| syntax(start, "invalid hex digit in unicode escape"))?;
            code = code * 16 + d;
        }
        char::from_u32(code).ok_or_else(|| syntax(start, "invalid code point"))
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek_byte() {
                Some(b) if (b as char).is_ascii_whitespace() => self.pos += 1,
                Some(b'#') => {
                    while let Some(b) = self.peek_byte() {
                        self.pos += 1;
                        if b == b'\n' {
                            break;
                        }
                    }
                }
                _ => return,
            }
        }
    }

    fn peek_byte(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn next_char(&mut self) -> Option<char> {
        let rest = std::str::from_utf8(&self.input[self.pos..]).ok()?;
        let c = rest.chars().next()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn expect_byte(&mut self, byte: u8, reason: &str) -> Result<(), QueryParseError> {
        if self.peek_byte() == Some(byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(syntax(self.pos, reason))
        }
    }

    /// The upcoming bare word, if the cursor sits on one. Does not advance.
    fn peek_keyword(&self) -> Option<String> {
        let mut end = self.pos;
        while let Some(&b) = self.input.get(end) {
            if b.is_ascii_alphabetic() || (end > self.pos && b.is_ascii_digit()) {
                end += 1;
            } else {
                break;
            }
        }
        if end == self.pos {
            return None;
        }
        // a keyword is not a prefixed name
        if self.input.get(end) == Some(&b':') {
            return None;
        }
        Some(String::from_utf8_lossy(&self.input[self.pos..end]).into_owned())
    }

    fn take_keyword(&mut self) {
        while let Some(b) = self.peek_byte() {
            if b.is_ascii_alphanumeric() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }
}

fn is_unsupported_keyword(word: &str) -> bool {
    UNSUPPORTED_KEYWORDS
        .iter()
        .any(|kw| word.eq_ignore_ascii_case(kw))
}
