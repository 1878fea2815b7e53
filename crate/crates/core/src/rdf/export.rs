use std::collections::BTreeSet;

use percent_encoding::{utf8_percent_encode, AsciiSet, NON_ALPHANUMERIC};

use super::vocab::{
    self, owl, rdfs, xsd, PropertyKind, Vocabulary, CLASSES, CLASS_MAPPINGS, EXISTENTIAL,
    PROPERTIES, PROPERTY_MAPPINGS, RDF_TYPE,
};
use super::{Term, Triple, XSD_DATE_TIME, XSD_DECIMAL};
use crate::model::{Timestamp, UserId};
use crate::store::Snapshot;

const ID_ENCODE: &AsciiSet = &NON_ALPHANUMERIC
    .remove(b'-')
    .remove(b'.')
    .remove(b'_')
    .remove(b'~');

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    User,
    Shout,
    Session,
    Review,
}

impl InstanceKind {
    fn segment(self) -> &'static str {
        match self {
            InstanceKind::User => "user",
            InstanceKind::Shout => "shout",
            InstanceKind::Session => "session",
            InstanceKind::Review => "review",
        }
    }
}

/// `{namespace}{kind}/{percent-encoded id}`.
pub fn instance_iri(vocab: &Vocabulary, kind: InstanceKind, id: &str) -> String {
    format!(
        "{}{}/{}",
        vocab.namespace,
        kind.segment(),
        utf8_percent_encode(id, ID_ENCODE)
    )
}

fn a(subject: &Term, class: String) -> Triple {
    Triple::new(subject.clone(), RDF_TYPE, Term::iri(class))
}

/// Class and property declarations, constraint axioms and upper-ontology links.
pub fn export_ontology(vocab: &Vocabulary) -> Vec<Triple> {
    let mut out = Vec::new();
    let ontology = Term::iri(vocab.namespace.clone());
    out.push(a(&ontology, owl("Ontology")));
    out.push(Triple::new(
        ontology.clone(),
        rdfs("label"),
        Term::string("AA ontology"),
    ));
    for see_also in [vocab::GNDO, vocab::OPS] {
        out.push(Triple::new(
            ontology.clone(),
            rdfs("seeAlso"),
            Term::iri(see_also),
        ));
    }

    for class in CLASSES {
        let c = Term::iri(vocab.term(class));
        out.push(a(&c, owl("Class")));
        out.push(Triple::new(c.clone(), rdfs("label"), Term::string(*class)));
        if matches!(*class, "Session" | "ValidationReview") {
            out.push(Triple::new(
                c,
                rdfs("comment"),
                Term::string("extension term"),
            ));
        }
    }

    for p in PROPERTIES {
        let t = Term::iri(vocab.term(p.name));
        out.push(a(
            &t,
            owl(match p.kind {
                PropertyKind::Object => "ObjectProperty",
                PropertyKind::Data => "DatatypeProperty",
            }),
        ));
        if p.functional {
            out.push(a(&t, owl("FunctionalProperty")));
        }
        out.push(Triple::new(t.clone(), rdfs("label"), Term::string(p.name)));
        out.push(Triple::new(
            t.clone(),
            rdfs("domain"),
            Term::iri(vocab.term(p.domain)),
        ));
        if !p.range.is_empty() {
            let range = match p.kind {
                PropertyKind::Object => vocab.term(p.range),
                PropertyKind::Data => xsd(p.range),
            };
            out.push(Triple::new(t.clone(), rdfs("range"), Term::iri(range)));
        }
        if p.extension {
            out.push(Triple::new(
                t,
                rdfs("comment"),
                Term::string("extension term"),
            ));
        }
    }

    for (i, (class, property)) in EXISTENTIAL.iter().enumerate() {
        let def = Vocabulary::property(property).expect("existential property is declared");
        let restriction = Term::blank(format!("r{i}"));
        let filler = match def.kind {
            PropertyKind::Object => vocab.term(def.range),
            PropertyKind::Data => xsd(def.range),
        };
        out.push(Triple::new(
            Term::iri(vocab.term(class)),
            rdfs("subClassOf"),
            restriction.clone(),
        ));
        out.push(a(&restriction, owl("Restriction")));
        out.push(Triple::new(
            restriction.clone(),
            owl("onProperty"),
            Term::iri(vocab.term(property)),
        ));
        out.push(Triple::new(
            restriction,
            owl("someValuesFrom"),
            Term::iri(filler),
        ));
    }

    for (class, upper) in CLASS_MAPPINGS {
        out.push(Triple::new(
            Term::iri(vocab.term(class)),
            rdfs("subClassOf"),
            Term::iri(*upper),
        ));
    }
    for (property, upper) in PROPERTY_MAPPINGS {
        out.push(Triple::new(
            Term::iri(vocab.term(property)),
            rdfs("subPropertyOf"),
            Term::iri(*upper),
        ));
    }
    out
}

fn date_time(t: Timestamp) -> Term {
    Term::typed(t.to_rfc3339(), XSD_DATE_TIME)
}

/// Instance triples for every record of the snapshot.
///
/// Every user referenced by a shout, session or review gets a node carrying
/// at least its normalized nick.
pub fn export_data(snapshot: &Snapshot, vocab: &Vocabulary) -> Vec<Triple> {
    let mut out = Vec::new();
    let p = |name: &str| vocab.term(name);
    let user_term = |id: &UserId| Term::iri(instance_iri(vocab, InstanceKind::User, &id.0));

    let mut users: std::collections::BTreeMap<UserId, (BTreeSet<String>, BTreeSet<String>)> =
        Default::default();
    for u in &snapshot.users {
        let entry = users.entry(u.id.clone()).or_default();
        entry.0.extend(u.nicks.iter().cloned());
        entry.1.extend(u.emails.iter().cloned());
    }
    let referenced = snapshot
        .shouts
        .iter()
        .map(|s| UserId(s.nick.clone()))
        .chain(snapshot.sessions.iter().map(|s| s.user.clone()))
        .chain(snapshot.reviews.iter().map(|r| r.reviewer.clone()));
    for id in referenced {
        users.entry(id).or_default();
    }
    for (id, (nicks, emails)) in &users {
        let node = user_term(id);
        out.push(a(&node, p("User")));
        if nicks.is_empty() {
            out.push(Triple::new(
                node.clone(),
                p("nick"),
                Term::string(id.0.clone()),
            ));
        }
        for nick in nicks {
            out.push(Triple::new(
                node.clone(),
                p("nick"),
                Term::string(nick.clone()),
            ));
        }
        for email in emails {
            out.push(Triple::new(
                node.clone(),
                p("email"),
                Term::string(email.clone()),
            ));
        }
    }

    let sessions: BTreeSet<&str> = snapshot.sessions.iter().map(|s| s.id.0.as_str()).collect();
    for s in &snapshot.shouts {
        let node = Term::iri(instance_iri(
            vocab,
            InstanceKind::Shout,
            &s.id.0.to_string(),
        ));
        out.push(a(&node, p("Shout")));
        out.push(Triple::new(
            node.clone(),
            p("user"),
            user_term(&UserId(s.nick.clone())),
        ));
        out.push(Triple::new(
            node.clone(),
            p("shoutMessage"),
            Term::string(s.message.clone()),
        ));
        out.push(Triple::new(
            node.clone(),
            p("created"),
            date_time(s.created),
        ));
        if let Some(t) = s.client_created {
            out.push(Triple::new(node.clone(), p("clientCreated"), date_time(t)));
        }
        if let Some(sid) = s
            .session_ref
            .as_ref()
            .filter(|sid| sessions.contains(sid.0.as_str()))
        {
            out.push(Triple::new(
                node,
                p("session"),
                Term::iri(instance_iri(vocab, InstanceKind::Session, &sid.0)),
            ));
        }
    }

    for s in &snapshot.sessions {
        let node = Term::iri(instance_iri(vocab, InstanceKind::Session, &s.id.0));
        out.push(a(&node, p("Session")));
        out.push(Triple::new(node.clone(), p("owner"), user_term(&s.user)));
        out.push(Triple::new(
            node.clone(),
            p("startTime"),
            date_time(s.start),
        ));
        out.push(Triple::new(node.clone(), p("endTime"), date_time(s.end)));
        if let Some(url) = &s.screencast {
            out.push(Triple::new(node, p("screencast"), Term::iri(url.clone())));
        }
    }

    for r in &snapshot.reviews {
        let node = Term::iri(instance_iri(vocab, InstanceKind::Review, &r.session.0));
        out.push(a(&node, p("ValidationReview")));
        out.push(Triple::new(
            node.clone(),
            p("reviewed"),
            Term::iri(instance_iri(vocab, InstanceKind::Session, &r.session.0)),
        ));
        out.push(Triple::new(
            node.clone(),
            p("reviewer"),
            user_term(&r.reviewer),
        ));
        out.push(Triple::new(
            node.clone(),
            p("score"),
            Term::typed(decimal(r.score.value()), XSD_DECIMAL),
        ));
        if let Some(c) = &r.comment {
            out.push(Triple::new(
                node.clone(),
                p("comment"),
                Term::string(c.clone()),
            ));
        }
        out.push(Triple::new(node, p("reviewTime"), date_time(r.created)));
    }
    out
}

/// Canonical xsd:decimal lexical form: always a point, no trailing zeros past one digit.
fn decimal(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{MessageKind, Shout, ShoutId, Source};

    fn shout(id: u64, nick: &str, msg: &str) -> Shout {
        Shout {
            id: ShoutId(id),
            nick: nick.into(),
            message: msg.into(),
            created: Timestamp::from_secs(1_367_505_011),
            client_created: None,
            source: Source::Http,
            kind: MessageKind::Shout,
            tags: vec![],
            session_ref: None,
            deviation: None,
        }
    }

    #[test]
    fn empty_snapshot_has_no_instances() {
        assert!(export_data(&Snapshot::default(), &Vocabulary::default()).is_empty());
    }

    #[test]
    fn one_shout_expands_to_template() {
        let snap = Snapshot {
            shouts: vec![shout(1, "bob", "fixing timer")],
            ..Default::default()
        };
        let triples = export_data(&snap, &Vocabulary::default());
        // shout: type, user, message, created; user: type, nick
        assert_eq!(triples.len(), 6);
    }

    #[test]
    fn users_are_reused() {
        let snap = Snapshot {
            shouts: vec![shout(1, "bob", "a"), shout(2, "bob", "b")],
            ..Default::default()
        };
        let vocab = Vocabulary::default();
        let user_nodes = export_data(&snap, &vocab)
            .into_iter()
            .filter(|t| t.predicate == RDF_TYPE && t.object == Term::iri(vocab.term("User")))
            .count();
        assert_eq!(user_nodes, 1);
    }

    #[test]
    fn ontology_axioms() {
        let vocab = Vocabulary::default();
        let onto = export_ontology(&vocab);
        let functional = |name: &str| {
            onto.contains(&Triple::new(
                Term::iri(vocab.term(name)),
                RDF_TYPE,
                Term::iri(owl("FunctionalProperty")),
            ))
        };
        assert!(functional("created"));
        assert!(functional("user"));
        assert!(!functional("nick"));
        assert!(!functional("email"));
        assert!(onto.contains(&Triple::new(
            Term::iri(vocab.term("User")),
            rdfs("subClassOf"),
            Term::iri("http://xmlns.com/foaf/0.1/Person"),
        )));
    }

    #[test]
    fn ids_are_percent_encoded() {
        let vocab = Vocabulary::new("http://example.org/aa");
        assert_eq!(
            instance_iri(&vocab, InstanceKind::User, "joão silva"),
            "http://example.org/aa/user/jo%C3%A3o%20silva"
        );
        assert_eq!(decimal(1.0), "1.0");
        assert_eq!(decimal(0.25), "0.25");
    }
}
