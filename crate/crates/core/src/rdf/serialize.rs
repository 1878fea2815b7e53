use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::vocab::{prefixes, Vocabulary, RDF_TYPE};
use super::{Term, Triple, XSD_STRING};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RdfFormat {
    Ntriples,
    Turtle,
}

impl std::str::FromStr for RdfFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ntriples" | "nt" | "n-triples" => Ok(RdfFormat::Ntriples),
            "turtle" | "ttl" => Ok(RdfFormat::Turtle),
            other => Err(format!("unknown rdf format {other:?}")),
        }
    }
}

fn push_uchar(out: &mut String, c: char) {
    let v = c as u32;
    if v <= 0xFFFF {
        let _ = write!(out, "\\u{v:04X}");
    } else {
        let _ = write!(out, "\\U{v:08X}");
    }
}

/// Literal escaping: `"` `\` and line breaks as ECHAR, other controls as UCHAR.
pub fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            '\u{08}' => out.push_str("\\b"),
            '\u{0C}' => out.push_str("\\f"),
            c if c.is_control() && (c as u32) < 0x80 => push_uchar(&mut out, c),
            c => out.push(c),
        }
    }
    out
}

/// Characters not allowed inside `<...>` are written as UCHAR.
pub fn escape_iri(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        if (c as u32) <= 0x20 || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\') {
            push_uchar(&mut out, c);
        } else {
            out.push(c);
        }
    }
    out
}

/// One triple per line, sorted and deduplicated.
pub fn to_ntriples(triples: &[Triple]) -> String {
    let mut lines: Vec<String> = triples.iter().map(|t| t.to_string()).collect();
    lines.sort();
    lines.dedup();
    let mut out = String::new();
    for line in lines {
        out.push_str(&line);
        out.push('\n');
    }
    out
}

fn is_pn_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    local
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

struct TurtleNames {
    prefixes: Vec<(&'static str, String)>,
}

impl TurtleNames {
    fn predicate(&self, iri: &str) -> String {
        if iri == RDF_TYPE {
            return "a".into();
        }
        self.iri(iri)
    }

    fn iri(&self, iri: &str) -> String {
        self.qname(iri)
            .unwrap_or_else(|| format!("<{}>", escape_iri(iri)))
    }

    fn qname(&self, iri: &str) -> Option<String> {
        self.prefixes
            .iter()
            .filter_map(|(p, ns)| {
                let local = iri.strip_prefix(ns.as_str())?;
                is_pn_local(local).then(|| (ns.len(), format!("{p}:{local}")))
            })
            .max_by_key(|(len, _)| *len)
            .map(|(_, q)| q)
    }

    fn term(&self, t: &Term) -> String {
        match t {
            Term::Iri { iri } => self.iri(iri),
            Term::Blank { label } => format!("_:{label}"),
            Term::Literal { lexical, datatype } => {
                let mut s = format!("\"{}\"", escape_literal(lexical));
                if datatype != XSD_STRING {
                    s.push_str("^^");
                    s.push_str(&self.iri(datatype));
                }
                s
            }
        }
    }
}

/// Prefixed Turtle, one block per subject, subjects and predicates sorted.
pub fn to_turtle(triples: &[Triple], vocab: &Vocabulary) -> String {
    let names = TurtleNames {
        prefixes: prefixes(vocab),
    };
    let mut out = String::new();
    for (p, ns) in &names.prefixes {
        let _ = writeln!(out, "@prefix {p}: <{}> .", escape_iri(ns));
    }
    let mut grouped: BTreeMap<String, BTreeMap<String, Vec<String>>> = BTreeMap::new();
    for t in triples {
        let s = names.term(&t.subject);
        let p = names.predicate(&t.predicate);
        grouped
            .entry(s)
            .or_default()
            .entry(p)
            .or_default()
            .push(names.term(&t.object));
    }
    for (subject, predicates) in grouped {
        out.push('\n');
        out.push_str(&subject);
        let count = predicates.len();
        for (i, (predicate, mut objects)) in predicates.into_iter().enumerate() {
            objects.sort();
            objects.dedup();
            let sep = if i == 0 { " " } else { "    " };
            let _ = write!(out, "{sep}{predicate} {}", objects.join(", "));
            out.push_str(if i + 1 == count { " .\n" } else { " ;\n" });
        }
    }
    out
}

pub fn serialize(triples: &[Triple], format: RdfFormat, vocab: &Vocabulary) -> String {
    match format {
        RdfFormat::Ntriples => to_ntriples(triples),
        RdfFormat::Turtle => to_turtle(triples, vocab),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_single() {
        assert_eq!(to_ntriples(&[]), "");
        let t = Triple::new(
            Term::iri("http://x/s"),
            "http://x/p",
            Term::string("say \"hi\"\n"),
        );
        let doc = to_ntriples(&[t]);
        assert_eq!(doc, "<http://x/s> <http://x/p> \"say \\\"hi\\\"\\n\" .\n");
        assert_eq!(doc.lines().count(), 1);
        assert!(doc.lines().all(|l| l.ends_with(" .")));
    }

    #[test]
    fn control_characters_use_uchar() {
        assert_eq!(escape_literal("a\u{1}b\tc"), "a\\u0001b\\tc");
        assert_eq!(escape_iri("http://x/a b"), "http://x/a\\u0020b");
    }

    #[test]
    fn turtle_groups_by_subject() {
        let vocab = Vocabulary::default();
        let s = Term::iri(vocab.term("User"));
        let doc = to_turtle(
            &[
                Triple::new(
                    s.clone(),
                    RDF_TYPE,
                    Term::iri("http://www.w3.org/2002/07/owl#Class"),
                ),
                Triple::new(
                    s,
                    "http://www.w3.org/2000/01/rdf-schema#label",
                    Term::string("User"),
                ),
            ],
            &vocab,
        );
        assert!(
            doc.contains("aa:User a owl:Class ;\n    rdfs:label \"User\" .\n"),
            "{doc}"
        );
    }
}
