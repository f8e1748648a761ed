//! RDF terms and the dictionary that maps them to dense integer ids.
//!
//! All storage and query machinery works on [`TermId`]s; the [`Dictionary`]
//! is the single place where lexical forms live. It is immutable once a load
//! completes and can be shared freely across threads.

use std::collections::HashMap;
use std::fmt;

/// Extra information carried by a literal: either a language tag or a
/// datatype IRI, exactly as recorded in the source.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LiteralAnnotation {
    /// `"chat"@en`
    Language(String),
    /// `"42"^^<http://www.w3.org/2001/XMLSchema#integer>`
    Datatype(String),
}

/// An RDF term: IRI, literal, or blank node.
///
/// Two terms are equal iff their kind and full lexical form (including any
/// literal annotation) are equal. No datatype-aware normalization is applied:
/// `"1"^^xsd:int` and `"01"^^xsd:int` are distinct terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(String),
    Literal {
        value: String,
        annotation: Option<LiteralAnnotation>,
    },
    BlankNode(String),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Term {
        Term::Iri(iri.into())
    }

    pub fn literal(value: impl Into<String>) -> Term {
        Term::Literal {
            value: value.into(),
            annotation: None,
        }
    }

    pub fn lang_literal(value: impl Into<String>, lang: impl Into<String>) -> Term {
        Term::Literal {
            value: value.into(),
            annotation: Some(LiteralAnnotation::Language(lang.into())),
        }
    }

    pub fn typed_literal(value: impl Into<String>, datatype: impl Into<String>) -> Term {
        Term::Literal {
            value: value.into(),
            annotation: Some(LiteralAnnotation::Datatype(datatype.into())),
        }
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::BlankNode(label.into())
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }

    /// True for terms allowed in subject position (IRIs and blank nodes).
    pub fn is_subject_kind(&self) -> bool {
        matches!(self, Term::Iri(_) | Term::BlankNode(_))
    }
}

/// Escape a literal value for N-Triples output: `\` `"` and the control
/// characters tab, newline, carriage return become backslash escapes.
pub(crate) fn escape_literal(value: &str, out: &mut String) {
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
}

impl fmt::Display for Term {
    /// N-Triples rendering. This is also the canonical lexical form used for
    /// partition hashing and result output, so it must stay stable.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::Literal { value, annotation } => {
                let mut escaped = String::with_capacity(value.len() + 2);
                escape_literal(value, &mut escaped);
                write!(f, "\"{escaped}\"")?;
                match annotation {
                    Some(LiteralAnnotation::Language(lang)) => write!(f, "@{lang}"),
                    Some(LiteralAnnotation::Datatype(dt)) => write!(f, "^^<{dt}>"),
                    None => Ok(()),
                }
            }
            Term::BlankNode(label) => write!(f, "_:{label}"),
        }
    }
}

/// Dense integer identity of a term within one [`Dictionary`].
///
/// Ids start at 0 and grow by one per distinct term, so they double as
/// indexes into columnar structures.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TermId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A triple with all three positions dictionary-encoded.
#[derive(Debug, Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: TermId,
    pub predicate: TermId,
    pub object: TermId,
}

impl Triple {
    pub fn new(subject: TermId, predicate: TermId, object: TermId) -> Triple {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

/// Bijective map between terms and dense ids.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    forward: HashMap<Term, TermId>,
    reverse: Vec<Term>,
}

impl Dictionary {
    pub fn new() -> Dictionary {
        Dictionary::default()
    }

    /// Return the id of `term`, assigning the next dense id if unseen.
    pub fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.forward.get(&term) {
            return id;
        }
        let id = TermId(self.reverse.len() as u32);
        self.reverse.push(term.clone());
        self.forward.insert(term, id);
        id
    }

    /// Id of `term` if it has been interned.
    pub fn lookup(&self, term: &Term) -> Option<TermId> {
        self.forward.get(term).copied()
    }

    /// The term behind `id`. Panics if `id` was not issued by this dictionary.
    pub fn resolve(&self, id: TermId) -> &Term {
        &self.reverse[id.index()]
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// Iterate terms in id order.
    pub fn iter(&self) -> impl Iterator<Item = (TermId, &Term)> {
        self.reverse
            .iter()
            .enumerate()
            .map(|(i, t)| (TermId(i as u32), t))
    }
}
