// Reference prompt scenarios, one per built-in template id.
// Shared by the golden-file test and the acceptance suite.
#![allow(dead_code)]

use annotis::model::{
    Annotation, AsteTriplet, EntitySpan, FewShotExample, Mention, RelationInstance, SeedPayload, Sentiment,
    SurfaceTriplet, TaskKind, TaskSpec,
};
use annotis::presets;
use annotis::prompt::{DisambiguationShot, PromptEngine, Query, RenderedPrompt};

pub const RESEARCHER_DEF: &str = "A researcher in AI domain is an individual who conducts research and experiments related to Artificial Intelligence and its related fields, such as Machine Learning.";

const MIT: &str = "Advocates of procedural representations were mainly centered at MIT , under the leadership of Marvin Minsky and Seymour Papert .";
const BOX: &str = "The biggest problem is that the box had no instructions in it .";

fn cls(text: &str, label: &str) -> FewShotExample {
    FewShotExample::new(Annotation::Classification { text: text.into(), label: label.into() })
}

fn rel(sentence: &str, head: &str, tail: &str, relation: &str) -> FewShotExample {
    FewShotExample::new(Annotation::Relation(RelationInstance {
        sentence: sentence.into(),
        head: Mention::new(head),
        tail: Mention::new(tail),
        relation: relation.into(),
    }))
}

fn ner(sentence: &str, ents: &[(&str, &str)]) -> FewShotExample {
    let spans = ents
        .iter()
        .map(|(surf, ty)| {
            let i = sentence.find(surf).expect("entity in sentence");
            EntitySpan::new(sentence, i, i + surf.len(), *ty).unwrap()
        })
        .collect();
    FewShotExample::new(Annotation::Ner { sentence: sentence.into(), spans })
}

fn aste(sentence: &str, trips: &[(Vec<usize>, Vec<usize>, Sentiment)]) -> FewShotExample {
    let triplets =
        trips.iter().map(|(t, o, s)| AsteTriplet::from_indices(sentence, t.clone(), o.clone(), *s).unwrap()).collect();
    FewShotExample::new(Annotation::Aste { sentence: sentence.into(), triplets })
}

pub fn sst2_spec() -> TaskSpec {
    presets::sst2()
        .with_shots(vec![cls("a feast for the eyes", "Positive"), cls("boring and obvious", "Negative")])
        .unwrap()
}

pub fn fewrel_shots() -> Vec<FewShotExample> {
    vec![
        rel(
            "Merpati flight 106 departed Jakarta ( CGK ) on a domestic flight to Tanjung Pandan ( TJQ ) .",
            "TJQ",
            "Tanjung Pandan",
            "place served by transport hub",
        ),
        rel(
            "It is approximately 8 km away from Mount Korbu , the tallest mountain of the Titiwangsa Mountains .",
            "Mount Korbu",
            "Titiwangsa Mountains",
            "mountain range",
        ),
        rel(
            "In 1689 , Konstanty was one of the judges who sentenced Kazimierz Łyszczyński to death for atheism .",
            "Kazimierz Łyszczyński",
            "atheism",
            "religion",
        ),
    ]
}

pub fn fewrel_spec() -> TaskSpec {
    presets::fewrel().with_shots(fewrel_shots()).unwrap()
}

pub fn fewrel_query() -> Query {
    Query::relation(
        "The Dallas Airport is a transport hub that serves the city of Dallas .",
        "Dallas Airport",
        "Dallas",
    )
}

/// Two-relation space carrying the definitions printed with the fifth variant.
pub fn fewrel_defined_spec() -> TaskSpec {
    let full = presets::fewrel().label_space;
    let space = full.restricted(["place served by transport hub", "mountain range"]).unwrap();
    TaskSpec::new(TaskKind::RelationExtraction, space).with_shots(fewrel_shots()[..1].to_vec()).unwrap()
}

pub fn fewrel_gen_spec() -> TaskSpec {
    let chester = rel(
        "Chester Alan Arthur , 21st President of the United States , died of this disease , November 18 , 1886",
        "United States",
        "Chester Alan Arthur",
        "head of government",
    );
    let mut shots = vec![chester];
    shots.extend(fewrel_shots());
    presets::fewrel().with_shots(shots).unwrap()
}

pub fn crossner_spec() -> TaskSpec {
    let mut spec = presets::crossner_ai();
    spec.label_space.set_definition("researcher", RESEARCHER_DEF);
    spec.with_shots(vec![
        ner(MIT, &[("MIT", "university"), ("Marvin Minsky", "researcher"), ("Seymour Papert", "researcher")]),
        ner(
            "David Silver , Fei-Fei Li and Claude Shannon were cited next to Ruslan Salakhutdinov .",
            &[
                ("David Silver", "researcher"),
                ("Fei-Fei Li", "researcher"),
                ("Claude Shannon", "researcher"),
                ("Ruslan Salakhutdinov", "researcher"),
            ],
        ),
    ])
    .unwrap()
}

/// Entity pool shot ordered as printed: David Silver first, Marvin Minsky fourth.
pub fn crossner_pool_spec() -> TaskSpec {
    let mut spec = presets::crossner_ai();
    spec.label_space.set_definition("researcher", RESEARCHER_DEF);
    spec.with_shots(vec![
        ner(
            "David Silver , Fei-Fei Li and Claude Shannon met Marvin Minsky .",
            &[
                ("David Silver", "researcher"),
                ("Fei-Fei Li", "researcher"),
                ("Claude Shannon", "researcher"),
                ("Marvin Minsky", "researcher"),
            ],
        ),
        ner("Ruslan Salakhutdinov joined Apple .", &[("Ruslan Salakhutdinov", "researcher")]),
    ])
    .unwrap()
}

pub fn aste_box_shot() -> FewShotExample {
    // tokens: The0 biggest1 problem2 is3 that4 the5 box6 had7 no8 instructions9
    aste(BOX, &[(vec![9], vec![2], Sentiment::Negative), (vec![9], vec![8], Sentiment::Negative)])
}

pub fn aste_spec() -> TaskSpec {
    presets::aste_laptop().with_shots(vec![aste_box_shot()]).unwrap()
}

pub fn aste_positive_spec() -> TaskSpec {
    // tokens: The0 features1 are2 nice3 and4 it5 is6 reasonable7 priced8 .9
    let pos = aste(
        "The features are nice and it is reasonable priced .",
        &[(vec![1], vec![3], Sentiment::Positive), (vec![8], vec![7], Sentiment::Positive)],
    );
    presets::aste_laptop().with_shots(vec![pos, aste_box_shot()]).unwrap()
}

pub fn disambiguation_shot() -> DisambiguationShot {
    DisambiguationShot {
        text: "Advocates of procedural representations were mainly centered at MIT, under the leadership of Marvin Minsky and Seymour Papert .".into(),
        entity: "Marvin Minsky".into(),
        candidates: ["product", "task", "researcher", "university", "organisation", "person"].map(String::from).to_vec(),
        label: "researcher".into(),
    }
}

fn ls(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

/// Every built-in template rendered on its reference scenario.
pub fn golden_prompts() -> Vec<(String, RenderedPrompt)> {
    let e = PromptEngine::default();
    let unl = Query::text("[Unlabeled Data]");
    let mut out: Vec<RenderedPrompt> = Vec::new();

    out.push(e.render_pgda(&sst2_spec(), &unl, "pgda-sst2").unwrap());
    out.push(e.render_pgdg_span(&sst2_spec(), "Positive", 20, "pgdg-sst2").unwrap());
    let seed = SeedPayload::Label { label: "Positive".into(), entity: Some("Tom Hanks".into()) };
    out.push(e.render_sentence_gen(&sst2_spec(), &seed, "dadg-sst2").unwrap());

    for v in 1..=4 {
        out.push(e.render_pgda(&fewrel_spec(), &fewrel_query(), &format!("pgda-fewrel-{v}")).unwrap());
    }
    out.push(e.render_pgda(&fewrel_defined_spec(), &fewrel_query(), "pgda-fewrel-5").unwrap());
    out.push(e.render_pgdg_span(&fewrel_gen_spec(), "head of government", 20, "pgdg-fewrel-span").unwrap());
    let pair = SeedPayload::Pair {
        head: "France".into(),
        tail: "Emmanuel Macron".into(),
        relation: "head of government".into(),
    };
    out.push(e.render_sentence_gen(&fewrel_gen_spec(), &pair, "fewrel-sentence").unwrap());

    out.push(e.render_definition(&crossner_spec(), "researcher").unwrap());
    out.push(e.render_ner_type_pass(&crossner_spec(), "researcher", RESEARCHER_DEF, "[Unlabeled Data]").unwrap());
    let s = "Geoffrey Hinton moved to the University of Toronto .";
    let cands = ls(&["researcher", "person"]);
    out.push(e.render_disambiguation(s, "Geoffrey Hinton", &cands, &[disambiguation_shot()]).unwrap());
    out.push(e.render_pgdg_span(&crossner_pool_spec(), "researcher", 15, "pgdg-crossner-entity").unwrap());
    let ents = SeedPayload::Entities {
        entities: vec![
            ("Marvin Minsky".into(), "researcher".into()),
            ("MIT".into(), "university".into()),
            ("machine learning".into(), "field".into()),
        ],
    };
    out.push(e.render_sentence_gen(&presets::crossner_ai(), &ents, "crossner-sentence").unwrap());

    for v in 1..=3 {
        out.push(e.render_pgda(&aste_spec(), &unl, &format!("pgda-aste-{v}")).unwrap());
    }
    out.push(e.render_pgdg_span(&aste_spec(), "negative", 20, "pgdg-aste-1").unwrap());
    out.push(e.render_pgdg_span(&aste_spec(), "negative", 20, "pgdg-aste-2").unwrap());
    out.push(e.render_pgdg_span(&aste_positive_spec(), "positive", 20, "pgdg-aste-3").unwrap());
    for v in 1..=3 {
        out.push(
            e.render_aste_opinion(
                &aste_positive_spec(),
                "battery life",
                Sentiment::Positive,
                &format!("dadg-aste-opinion-{v}"),
            )
            .unwrap(),
        );
    }
    let trips = SeedPayload::Triplets {
        triplets: vec![
            SurfaceTriplet::new("battery life", "long", Sentiment::Positive),
            SurfaceTriplet::new("keyboard", "cramped", Sentiment::Negative),
        ],
    };
    out.push(e.render_sentence_gen(&aste_spec(), &trips, "aste-sentence").unwrap());

    out.into_iter().map(|p| (p.template_id.clone(), p)).collect()
}
