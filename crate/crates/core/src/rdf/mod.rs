//! RDF terms, triples and the AA vocabulary.

mod export;
mod serialize;
mod validate;
pub mod vocab;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use export::{export_data, export_ontology, instance_iri, InstanceKind};
pub use serialize::{escape_iri, escape_literal, serialize, to_ntriples, to_turtle, RdfFormat};
pub use validate::{validate_graph, Rule, Violation};
pub use vocab::Vocabulary;

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    Iri { iri: String },
    Literal { lexical: String, datatype: String },
    Blank { label: String },
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Term {
        Term::Iri { iri: iri.into() }
    }

    pub fn string(lexical: impl Into<String>) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: XSD_STRING.to_string(),
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: &str) -> Term {
        Term::Literal {
            lexical: lexical.into(),
            datatype: datatype.to_string(),
        }
    }

    pub fn blank(label: impl Into<String>) -> Term {
        Term::Blank {
            label: label.into(),
        }
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri { iri } => Some(iri),
            _ => None,
        }
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal { .. })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri { iri } => write!(f, "<{}>", escape_iri(iri)),
            Term::Blank { label } => write!(f, "_:{label}"),
            Term::Literal { lexical, datatype } => {
                write!(f, "\"{}\"", escape_literal(lexical))?;
                if datatype != XSD_STRING {
                    write!(f, "^^<{}>", escape_iri(datatype))?;
                }
                Ok(())
            }
        }
    }
}

/// One statement. The predicate is always an IRI.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: impl Into<String>, object: Term) -> Triple {
        debug_assert!(!subject.is_literal(), "literal subject");
        Triple {
            subject,
            predicate: predicate.into(),
            object,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} <{}> {} .",
            self.subject,
            escape_iri(&self.predicate),
            self.object
        )
    }
}
