//! Vocabulary terms and well-known namespaces.

use serde::{Deserialize, Serialize};

pub const DEFAULT_NAMESPACE: &str = "http://purl.org/socialparticipation/aa/";

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";
pub const FOAF: &str = "http://xmlns.com/foaf/0.1/";
pub const DCTERMS: &str = "http://purl.org/dc/terms/";
pub const SCHEMA: &str = "http://schema.org/";
pub const SIOC: &str = "http://rdfs.org/sioc/ns#";
pub const GNDO: &str = "https://d-nb.info/standards/elementset/gnd#";
pub const OPS: &str = "http://purl.org/socialparticipation/ops#";

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

pub const CLASSES: &[&str] = &["User", "Shout", "Session", "ValidationReview"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Object,
    Data,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PropertyDef {
    pub name: &'static str,
    pub kind: PropertyKind,
    pub domain: &'static str,
    /// Class local name for object properties, XSD local name for data properties.
    /// Empty when unconstrained.
    pub range: &'static str,
    pub functional: bool,
    /// Terms beyond the pictured core vocabulary.
    pub extension: bool,
}

const fn prop(
    name: &'static str,
    kind: PropertyKind,
    domain: &'static str,
    range: &'static str,
    functional: bool,
    extension: bool,
) -> PropertyDef {
    PropertyDef {
        name,
        kind,
        domain,
        range,
        functional,
        extension,
    }
}

use PropertyKind::{Data, Object};

pub const PROPERTIES: &[PropertyDef] = &[
    prop("user", Object, "Shout", "User", true, false),
    prop("nick", Data, "User", "string", false, false),
    prop("email", Data, "User", "string", false, false),
    prop("shoutMessage", Data, "Shout", "string", true, false),
    prop("created", Data, "Shout", "dateTime", true, false),
    prop("session", Object, "Shout", "Session", true, true),
    prop("reviewer", Object, "ValidationReview", "User", true, true),
    prop("score", Data, "ValidationReview", "decimal", true, true),
    prop("clientCreated", Data, "Shout", "dateTime", true, true),
    prop("owner", Object, "Session", "User", true, true),
    prop("startTime", Data, "Session", "dateTime", true, true),
    prop("endTime", Data, "Session", "dateTime", true, true),
    prop("screencast", Object, "Session", "", true, true),
    prop(
        "reviewed",
        Object,
        "ValidationReview",
        "Session",
        true,
        true,
    ),
    prop("comment", Data, "ValidationReview", "string", true, true),
    prop(
        "reviewTime",
        Data,
        "ValidationReview",
        "dateTime",
        true,
        true,
    ),
];

/// (class, property) pairs every instance of the class must carry.
pub const EXISTENTIAL: &[(&str, &str)] = &[
    ("Shout", "user"),
    ("Shout", "shoutMessage"),
    ("Shout", "created"),
    ("User", "nick"),
];

pub const CLASS_MAPPINGS: &[(&str, &str)] = &[
    ("User", "http://xmlns.com/foaf/0.1/Person"),
    ("User", "http://schema.org/Person"),
    ("User", "http://rdfs.org/sioc/ns#UserAccount"),
    ("Shout", "http://rdfs.org/sioc/ns#Post"),
    ("Shout", "http://schema.org/SocialMediaPosting"),
];

pub const PROPERTY_MAPPINGS: &[(&str, &str)] = &[
    ("nick", "http://xmlns.com/foaf/0.1/nick"),
    ("email", "http://schema.org/email"),
    ("shoutMessage", "http://rdfs.org/sioc/ns#content"),
    ("created", "http://purl.org/dc/terms/created"),
    ("user", "http://rdfs.org/sioc/ns#has_creator"),
];

/// The namespace all vocabulary and instance IRIs are minted under.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub namespace: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        Vocabulary::new(DEFAULT_NAMESPACE)
    }
}

impl Vocabulary {
    /// A namespace without a trailing `/` or `#` gets a `/`.
    pub fn new(namespace: &str) -> Self {
        let mut namespace = namespace.trim().to_string();
        if !namespace.ends_with(['/', '#']) {
            namespace.push('/');
        }
        Vocabulary { namespace }
    }

    pub fn term(&self, local: &str) -> String {
        format!("{}{local}", self.namespace)
    }

    pub fn property(name: &str) -> Option<&'static PropertyDef> {
        PROPERTIES.iter().find(|p| p.name == name)
    }

    pub fn functional_iris(&self) -> Vec<String> {
        PROPERTIES
            .iter()
            .filter(|p| p.functional)
            .map(|p| self.term(p.name))
            .collect()
    }
}

pub fn xsd(local: &str) -> String {
    format!("{XSD}{local}")
}

pub fn rdfs(local: &str) -> String {
    format!("{RDFS}{local}")
}

pub fn owl(local: &str) -> String {
    format!("{OWL}{local}")
}

/// Prefixes used by the Turtle writer, longest namespace first wins.
pub fn prefixes(vocab: &Vocabulary) -> Vec<(&'static str, String)> {
    vec![
        ("aa", vocab.namespace.clone()),
        ("rdf", RDF.into()),
        ("rdfs", RDFS.into()),
        ("owl", OWL.into()),
        ("xsd", XSD.into()),
        ("foaf", FOAF.into()),
        ("dcterms", DCTERMS.into()),
        ("schema", SCHEMA.into()),
        ("sioc", SIOC.into()),
    ]
}
