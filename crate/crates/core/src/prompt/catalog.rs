use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::template::{Format, RenderError, TemplateError, Vars};
use crate::model::TaskKind;
use crate::parse::AnswerGrammar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Label elicitation over existing text.
    Pgda,
    /// First generation step: labels, pairs, entities or triplets.
    Span,
    /// Second generation step: a sentence carrying a seed.
    Sentence,
    TypePass,
    Disambiguation,
    Definition,
    /// Opinion and sentiment for a dictionary-supplied target.
    Opinion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    Preamble,
    Definitions,
    Instruction,
    Shots,
}

/// How task shots become example blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotSource {
    /// One block per shot instance.
    #[default]
    Instances,
    /// One block per ASTE triplet across all shots.
    Triplets,
    /// A single block listing every shot entity of the focus type.
    EntityPool,
    /// Disambiguation shots supplied separately.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShotFilter {
    #[default]
    None,
    /// Keep shots carrying the focus label (class, relation, entity type or sentiment).
    Label,
}

fn default_order() -> Vec<Section> {
    vec![Section::Preamble, Section::Definitions, Section::Instruction, Section::Shots]
}
fn default_section_sep() -> String {
    "\n\n".into()
}
fn default_line_sep() -> String {
    "\n".into()
}
fn default_max_tokens() -> u32 {
    64
}

/// On-disk template record; one JSON file per template id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFile {
    pub template_id: String,
    pub kind: TaskKind,
    pub family: Family,
    /// How completions for this template are parsed.
    pub answer: AnswerGrammar,
    #[serde(default)]
    pub instruction: String,
    #[serde(default)]
    pub preamble: String,
    /// Rendered once per label that has a definition.
    #[serde(default)]
    pub definition_format: String,
    #[serde(default)]
    pub example_block_format: String,
    pub query_block_format: String,
    #[serde(default = "default_order")]
    pub order: Vec<Section>,
    #[serde(default = "default_section_sep")]
    pub section_separator: String,
    #[serde(default = "default_line_sep")]
    pub shot_separator: String,
    /// Between the last section and the query block.
    #[serde(default = "default_line_sep")]
    pub join_separator: String,
    #[serde(default)]
    pub shots_from: ShotSource,
    #[serde(default)]
    pub shot_filter: ShotFilter,
    #[serde(default)]
    pub stop: Vec<String>,
    #[serde(default = "default_max_tokens")]
    pub max_tokens: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("template {id}: {field}: {source}")]
    Format { id: String, field: &'static str, source: TemplateError },
    #[error("template {0}: query_block_format is empty")]
    EmptyQuery(String),
    #[error("template {0}: more than 4 stop sequences")]
    TooManyStops(String),
    #[error("template {0}: max_tokens must be positive")]
    ZeroMaxTokens(String),
    #[error("template file {path}: {message}")]
    File { path: String, message: String },
    #[error("duplicate template id {0}")]
    Duplicate(String),
}

#[derive(Debug, Clone)]
pub struct PromptTemplate {
    pub file: TemplateFile,
    pub instruction: Format,
    pub preamble: Format,
    pub definition: Format,
    pub example: Format,
    pub query: Format,
}

impl PromptTemplate {
    pub fn compile(file: TemplateFile) -> Result<Self, CatalogError> {
        let id = file.template_id.clone();
        let f = |field: &'static str, src: &str| {
            Format::parse(src).map_err(|source| CatalogError::Format { id: id.clone(), field, source })
        };
        if file.query_block_format.trim().is_empty() {
            return Err(CatalogError::EmptyQuery(id));
        }
        if file.stop.len() > crate::backend::MAX_STOP_SEQUENCES {
            return Err(CatalogError::TooManyStops(id));
        }
        if file.max_tokens == 0 {
            return Err(CatalogError::ZeroMaxTokens(id));
        }
        Ok(PromptTemplate {
            instruction: f("instruction", &file.instruction)?,
            preamble: f("preamble", &file.preamble)?,
            definition: f("definition_format", &file.definition_format)?,
            example: f("example_block_format", &file.example_block_format)?,
            query: f("query_block_format", &file.query_block_format)?,
            file,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CatalogError> {
        let file: TemplateFile = serde_json::from_str(text)
            .map_err(|e| CatalogError::File { path: "<inline>".into(), message: e.to_string() })?;
        PromptTemplate::compile(file)
    }

    pub fn id(&self) -> &str {
        &self.file.template_id
    }

    pub fn kind(&self) -> TaskKind {
        self.file.kind
    }

    pub fn family(&self) -> Family {
        self.file.family
    }

    /// Renders the example block for `local` and splits it at the end of the
    /// matching query block: (query block, answer). `None` when the example
    /// does not extend the query.
    pub fn example_answer(&self, local: &Vars, global: &Vars) -> Result<Option<(String, String)>, RenderError> {
        if self.example.is_empty() {
            return Ok(None);
        }
        let ex = self.example.render(local, global)?;
        let q = self.query.render(local, global)?;
        Ok(ex.strip_prefix(&q).map(|a| (q.clone(), a.to_string())))
    }
}

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../templates/", $name, ".json")))),*]
    };
}

const BUILTIN: &[(&str, &str)] = builtin![
    "pgda-sst2",
    "pgdg-sst2",
    "dadg-sst2",
    "pgda-fewrel-1",
    "pgda-fewrel-2",
    "pgda-fewrel-3",
    "pgda-fewrel-4",
    "pgda-fewrel-5",
    "pgdg-fewrel-span",
    "fewrel-sentence",
    "crossner-definition",
    "crossner-type-pass",
    "crossner-disambiguation",
    "pgdg-crossner-entity",
    "crossner-sentence",
    "pgda-aste-1",
    "pgda-aste-2",
    "pgda-aste-3",
    "pgdg-aste-1",
    "pgdg-aste-2",
    "pgdg-aste-3",
    "dadg-aste-opinion-1",
    "dadg-aste-opinion-2",
    "dadg-aste-opinion-3",
    "aste-sentence",
];

#[derive(Debug, Clone, Default)]
pub struct Catalog {
    templates: BTreeMap<String, PromptTemplate>,
}

impl Catalog {
    pub fn empty() -> Self {
        Catalog::default()
    }

    /// The templates shipped with the crate.
    pub fn builtin() -> Self {
        let mut c = Catalog::empty();
        for (name, text) in BUILTIN {
            let t = PromptTemplate::from_json(text).unwrap_or_else(|e| panic!("builtin {name}: {e}"));
            assert_eq!(t.id(), *name, "builtin template file name and id differ");
            c.templates.insert(t.id().to_string(), t);
        }
        c
    }

    pub fn builtin_ids() -> Vec<&'static str> {
        BUILTIN.iter().map(|(n, _)| *n).collect()
    }

    /// Adds or replaces a template.
    pub fn insert(&mut self, t: PromptTemplate) {
        self.templates.insert(t.id().to_string(), t);
    }

    pub fn get(&self, id: &str) -> Option<&PromptTemplate> {
        self.templates.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    /// Loads every `*.json` file in `dir`, overriding same-id templates.
    /// Returns the number of templates read.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, CatalogError> {
        let err = |p: &Path, m: String| CatalogError::File { path: p.display().to_string(), message: m };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(|e| err(dir, e.to_string()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut seen = std::collections::HashSet::new();
        for p in &paths {
            let text = std::fs::read_to_string(p).map_err(|e| err(p, e.to_string()))?;
            let file: TemplateFile = serde_json::from_str(&text).map_err(|e| err(p, e.to_string()))?;
            let t = PromptTemplate::compile(file)?;
            if !seen.insert(t.id().to_string()) {
                return Err(CatalogError::Duplicate(t.id().to_string()));
            }
            self.insert(t);
        }
        Ok(paths.len())
    }
}
