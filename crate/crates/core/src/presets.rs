//! Label spaces for the four benchmark tasks.

use crate::model::{LabelSpace, TaskKind, TaskSpec};

pub const SST2_LABELS: [&str; 2] = ["Positive", "Negative"];

pub const ASTE_SENTIMENTS: [&str; 3] = ["positive", "negative", "neutral"];

/// FewRel relation names, in the order the annotation prompt lists them.
pub const FEWREL_RELATIONS: [&str; 64] = [
    "place served by transport hub",
    "mountain range",
    "religion",
    "participating team",
    "contains administrative territorial entity",
    "head of government",
    "country of citizenship",
    "original network",
    "heritage designation",
    "performer",
    "participant of",
    "position held",
    "has part",
    "location of formation",
    "located on terrain feature",
    "architect",
    "country of origin",
    "publisher",
    "director",
    "father",
    "developer",
    "military branch",
    "mouth of the watercourse",
    "nominated for",
    "movement",
    "successful candidate",
    "followed by",
    "manufacturer",
    "instance of",
    "after a work by",
    "member of political party",
    "licensed to broadcast to",
    "headquarters location",
    "sibling",
    "instrument",
    "country",
    "occupation",
    "residence",
    "work location",
    "subsidiary",
    "participant",
    "operator",
    "characters",
    "occupant",
    "genre",
    "operating system",
    "owned by",
    "platform",
    "tributary",
    "winner",
    "said to be the same as",
    "composer",
    "league",
    "record label",
    "distributor",
    "screenwriter",
    "sports season of league or competition",
    "taxon rank",
    "location",
    "field of work",
    "language of work or name",
    "applies to jurisdiction",
    "notable work",
    "located in the administrative territorial entity",
];

/// Relation definitions that appear verbatim in the published prompts.
pub const FEWREL_DEFINITIONS: [(&str, &str); 3] = [
    (
        "place served by transport hub",
        "territorial entity or entities served by this transport hub (airport, train station, etc.)",
    ),
    ("mountain range", "range or subrange to which the geographical item belongs"),
    (
        "head of government",
        "head of the executive power of this town, city, municipality, state, country, or other governmental body",
    ),
];

/// CrossNER AI-domain entity types.
pub const CROSSNER_AI_TYPES: [&str; 14] = [
    "product",
    "field",
    "task",
    "researcher",
    "university",
    "programming language",
    "algorithm",
    "misc",
    "metrics",
    "organisation",
    "conference",
    "country",
    "location",
    "person",
];

pub fn sst2() -> TaskSpec {
    TaskSpec::new(TaskKind::Classification, LabelSpace::new(SST2_LABELS).expect("static labels"))
}

pub fn fewrel() -> TaskSpec {
    let defs = FEWREL_DEFINITIONS.iter().map(|(k, v)| (k.to_string(), v.to_string()));
    let labels = FEWREL_RELATIONS.iter().map(|r| r.to_string()).collect();
    let space = LabelSpace::with_definitions(labels, defs.collect()).expect("static labels");
    TaskSpec::new(TaskKind::RelationExtraction, space)
}

pub fn crossner_ai() -> TaskSpec {
    TaskSpec::new(TaskKind::Ner, LabelSpace::new(CROSSNER_AI_TYPES).expect("static labels")).with_domain("AI")
}

pub fn aste_laptop() -> TaskSpec {
    TaskSpec::new(TaskKind::Aste, LabelSpace::new(ASTE_SENTIMENTS).expect("static labels")).with_domain("laptop")
}

pub fn for_kind(kind: TaskKind) -> TaskSpec {
    match kind {
        TaskKind::Classification => sst2(),
        TaskKind::RelationExtraction => fewrel(),
        TaskKind::Ner => crossner_ai(),
        TaskKind::Aste => aste_laptop(),
    }
}
