//! Named word lists: flat token lists and female/male pair lists.
//!
//! File format is UTF-8, one entry per line. Pair lines are
//! `female<TAB>male`. Lines starting with `#` are comments. Blank lines are
//! allowed only at the end of the file.
//!
//! The WEAT target and attribute sets are compiled in. Gendered-word
//! exclusions, equality pairs, definitional pairs and professions ship as
//! data files under `data/` and are exposed through the `builtin_*`
//! functions; any of them can be replaced by a user file.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::weat::WeatSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WordListKind {
    Flat,
    Pairs,
}

/// An ordered list of unique tokens. Pair lists store their entries
/// flattened as `[female0, male0, female1, male1, ...]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordList {
    name: String,
    kind: WordListKind,
    words: Vec<String>,
}

fn validate_token(list: &str, token: &str) -> Result<()> {
    if token.is_empty() || token.chars().any(char::is_whitespace) {
        return Err(Error::WordList {
            list: list.to_string(),
            message: format!("invalid token {token:?}"),
        });
    }
    Ok(())
}

impl WordList {
    pub fn flat<I, S>(name: &str, words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::build(
            name,
            WordListKind::Flat,
            words.into_iter().map(Into::into).collect(),
        )
    }

    pub fn pairs<I, S>(name: &str, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let words = pairs
            .into_iter()
            .flat_map(|(f, m)| [f.into(), m.into()])
            .collect();
        Self::build(name, WordListKind::Pairs, words)
    }

    fn build(name: &str, kind: WordListKind, words: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(words.len());
        for w in &words {
            validate_token(name, w)?;
            if !seen.insert(w.as_str()) {
                return Err(Error::WordList {
                    list: name.to_string(),
                    message: format!("duplicate word {w}"),
                });
            }
        }
        Ok(Self {
            name: name.to_string(),
            kind,
            words,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> WordListKind {
        self.kind
    }

    /// Every token, pair members included.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn len(&self) -> usize {
        match self.kind {
            WordListKind::Flat => self.words.len(),
            WordListKind::Pairs => self.words.len() / 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// `(female, male)` entries; empty for flat lists.
    pub fn pairs_iter(&self) -> impl Iterator<Item = (&str, &str)> {
        let chunk = if self.kind == WordListKind::Pairs {
            2
        } else {
            usize::MAX
        };
        self.words
            .chunks(chunk)
            .filter(|c| c.len() == 2)
            .map(|c| (c[0].as_str(), c[1].as_str()))
    }

    pub fn token_set(&self) -> HashSet<&str> {
        self.words.iter().map(String::as_str).collect()
    }

    /// Merges several lists into one flat list, dropping repeats.
    pub fn union(name: &str, lists: &[&WordList]) -> Result<Self> {
        let mut seen = HashSet::new();
        let words: Vec<String> = lists
            .iter()
            .flat_map(|l| l.words.iter())
            .filter(|w| seen.insert(w.as_str()))
            .cloned()
            .collect();
        Self::flat(name, words)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.kind {
            WordListKind::Flat => {
                for w in &self.words {
                    let _ = writeln!(out, "{w}");
                }
            }
            WordListKind::Pairs => {
                for (f, m) in self.pairs_iter() {
                    let _ = writeln!(out, "{f}\t{m}");
                }
            }
        }
        out
    }
}

pub fn parse_wordlist(name: &str, text: &str, kind: WordListKind) -> Result<WordList> {
    let err = |line: usize, message: String| Error::WordList {
        list: name.to_string(),
        message: format!("line {line}: {message}"),
    };
    let lines: Vec<&str> = text.lines().map(|l| l.trim_end_matches('\r')).collect();
    let last_content = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut words = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            if last_content.is_some_and(|last| i < last) {
                return Err(err(i + 1, "empty line".into()));
            }
            continue;
        }
        match kind {
            WordListKind::Flat => words.push(line.trim().to_string()),
            WordListKind::Pairs => {
                let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
                if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                    return Err(err(
                        i + 1,
                        format!("expected female<TAB>male, got {line:?}"),
                    ));
                }
                words.push(fields[0].to_string());
                words.push(fields[1].to_string());
            }
        }
    }
    WordList::build(name, kind, words)
}

pub fn load_wordlist(path: impl AsRef<Path>, kind: WordListKind) -> Result<WordList> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_wordlist(&name, &text, kind)
}

fn builtin(name: &str, text: &str, kind: WordListKind) -> WordList {
    parse_wordlist(name, text, kind).expect("builtin word list is valid")
}

/// The ten female/male pairs used to build the PCA gender direction.
pub fn builtin_definitional_pairs() -> WordList {
    builtin(
        "definitional_pairs",
        include_str!("../data/definitional_pairs.txt"),
        WordListKind::Pairs,
    )
}

/// Female/male pairs made equidistant from every neutral word by equalize.
pub fn builtin_equalize_pairs() -> WordList {
    builtin(
        "equalize_pairs",
        include_str!("../data/equalize_pairs.txt"),
        WordListKind::Pairs,
    )
}

/// Inherently gendered words: excluded from the audited vocabulary and left
/// untouched by neutralize.
pub fn builtin_gender_specific() -> WordList {
    builtin(
        "gender_specific",
        include_str!("../data/gender_specific.txt"),
        WordListKind::Flat,
    )
}

pub fn builtin_professions() -> WordList {
    builtin(
        "professions",
        include_str!("../data/professions.txt"),
        WordListKind::Flat,
    )
}

const FEMALE_NAMES: [&str; 8] = [
    "Amy", "Joan", "Lisa", "Sarah", "Diana", "Kate", "Ann", "Donna",
];
const MALE_NAMES: [&str; 8] = [
    "John", "Paul", "Mike", "Kevin", "Steve", "Greg", "Jeff", "Bill",
];
const FAMILY: [&str; 8] = [
    "home",
    "parents",
    "children",
    "family",
    "cousins",
    "marriage",
    "wedding",
    "relatives",
];
const CAREER: [&str; 8] = [
    "executive",
    "management",
    "professional",
    "corporation",
    "salary",
    "office",
    "business",
    "career",
];
const ARTS_MATH: [&str; 8] = [
    "poetry",
    "art",
    "dance",
    "literature",
    "novel",
    "symphony",
    "drama",
    "sculpture",
];
const MATH: [&str; 8] = [
    "math",
    "algebra",
    "geometry",
    "calculus",
    "equations",
    "computation",
    "numbers",
    "addition",
];
const ARTS_SCIENCE: [&str; 8] = [
    "poetry",
    "art",
    "Shakespeare",
    "dance",
    "literature",
    "novel",
    "symphony",
    "drama",
];
const SCIENCE: [&str; 8] = [
    "science",
    "technology",
    "physics",
    "chemistry",
    "Einstein",
    "NASA",
    "experiment",
    "astronomy",
];

fn spec(label: &str, x: (&str, &[&str]), y: (&str, &[&str])) -> WeatSpec {
    let list = |name: &str, words: &[&str]| WordList::flat(name, words.iter().copied()).unwrap();
    WeatSpec::new(
        label,
        list(x.0, x.1),
        list(y.0, y.1),
        list("male_names", &MALE_NAMES),
        list("female_names", &FEMALE_NAMES),
    )
    .expect("builtin WEAT spec is valid")
}

/// The three gender association tests: male-stereotyped targets (X) against
/// female-stereotyped targets (Y), with male names (A) and female names (B)
/// as attributes.
pub fn builtin_weat_specs() -> Vec<WeatSpec> {
    vec![
        spec("career_family", ("career", &CAREER), ("family", &FAMILY)),
        spec("math_arts", ("math", &MATH), ("arts", &ARTS_MATH)),
        spec(
            "science_arts",
            ("science", &SCIENCE),
            ("arts", &ARTS_SCIENCE),
        ),
    ]
}
