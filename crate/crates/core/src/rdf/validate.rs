use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::vocab::{Vocabulary, EXISTENTIAL, RDF_TYPE};
use super::{Term, Triple};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    Functional,
    Existential,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Violation {
    pub subject: Term,
    pub property: String,
    pub rule: Rule,
}

/// Checks functional properties and the existential restrictions.
///
/// A functional property used with two or more distinct objects on one subject
/// yields one violation; each missing mandatory property yields one.
pub fn validate_graph(triples: &[Triple], vocab: &Vocabulary) -> Vec<Violation> {
    let functional: BTreeSet<String> = vocab.functional_iris().into_iter().collect();
    let mut values: BTreeMap<(&Term, &str), BTreeSet<&Term>> = BTreeMap::new();
    let mut present: BTreeSet<(&Term, &str)> = BTreeSet::new();
    let mut typed: BTreeMap<&str, BTreeSet<&Term>> = BTreeMap::new();
    for t in triples {
        present.insert((&t.subject, t.predicate.as_str()));
        if functional.contains(&t.predicate) {
            values
                .entry((&t.subject, t.predicate.as_str()))
                .or_default()
                .insert(&t.object);
        }
        if t.predicate == RDF_TYPE {
            if let Some(class) = t.object.as_iri() {
                typed.entry(class).or_default().insert(&t.subject);
            }
        }
    }

    let mut out = Vec::new();
    for ((subject, property), objects) in values {
        if objects.len() > 1 {
            out.push(Violation {
                subject: subject.clone(),
                property: property.to_string(),
                rule: Rule::Functional,
            });
        }
    }
    for (class, property) in EXISTENTIAL {
        let class_iri = vocab.term(class);
        let property_iri = vocab.term(property);
        for subject in typed.get(class_iri.as_str()).into_iter().flatten() {
            if !present.contains(&(*subject, property_iri.as_str())) {
                out.push(Violation {
                    subject: (*subject).clone(),
                    property: property_iri.clone(),
                    rule: Rule::Existential,
                });
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::XSD_DATE_TIME;

    fn shout(vocab: &Vocabulary) -> Vec<Triple> {
        let s = Term::iri("http://x/shout/1");
        let u = Term::iri("http://x/user/bob");
        vec![
            Triple::new(s.clone(), RDF_TYPE, Term::iri(vocab.term("Shout"))),
            Triple::new(s.clone(), vocab.term("user"), u.clone()),
            Triple::new(s.clone(), vocab.term("shoutMessage"), Term::string("hi")),
            Triple::new(
                s,
                vocab.term("created"),
                Term::typed("2013-05-02T14:30:11Z", XSD_DATE_TIME),
            ),
            Triple::new(u.clone(), RDF_TYPE, Term::iri(vocab.term("User"))),
            Triple::new(u, vocab.term("nick"), Term::string("bob")),
        ]
    }

    #[test]
    fn clean_graph() {
        let vocab = Vocabulary::default();
        assert!(validate_graph(&shout(&vocab), &vocab).is_empty());
    }

    #[test]
    fn duplicate_created_is_functional_violation() {
        let vocab = Vocabulary::default();
        let mut g = shout(&vocab);
        g.push(Triple::new(
            Term::iri("http://x/shout/1"),
            vocab.term("created"),
            Term::typed("2013-05-02T14:30:12Z", XSD_DATE_TIME),
        ));
        let v = validate_graph(&g, &vocab);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Functional);
        assert_eq!(v[0].property, vocab.term("created"));
    }

    #[test]
    fn two_nicks_are_fine() {
        let vocab = Vocabulary::default();
        let mut g = shout(&vocab);
        g.push(Triple::new(
            Term::iri("http://x/user/bob"),
            vocab.term("nick"),
            Term::string("bobby"),
        ));
        assert!(validate_graph(&g, &vocab).is_empty());
    }

    #[test]
    fn missing_message_is_existential_violation() {
        let vocab = Vocabulary::default();
        let g: Vec<Triple> = shout(&vocab)
            .into_iter()
            .filter(|t| t.predicate != vocab.term("shoutMessage"))
            .collect();
        let v = validate_graph(&g, &vocab);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::Existential);
        assert_eq!(v[0].property, vocab.term("shoutMessage"));
    }
}
