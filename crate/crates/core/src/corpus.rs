//! Resume corpus loading, validation, and length-based subsampling.
//!
//! A corpus is an ordered collection of anonymized resumes, each tagged with
//! the industry and role it was submitted for. Resumes are kept sorted by id
//! so every downstream artifact (fingerprints, manifests, reports) is
//! reproducible. Text is newline-normalized at load; word counts are derived,
//! never trusted from input.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: no records")]
    NoRecords { path: PathBuf },
    #[error("{path}:{line}: malformed record: {detail}")]
    Malformed {
        path: PathBuf,
        line: u64,
        detail: String,
    },
    #[error("{path}:{line}: field `{field}` is empty")]
    EmptyField {
        path: PathBuf,
        line: u64,
        field: &'static str,
    },
    #[error("resume `{id}`: {detail}")]
    InvalidResume { id: String, detail: String },
    #[error("duplicate resume id `{id}`")]
    DuplicateId { id: String },
    #[error("industry {industry}: have {available} resumes, need {requested}")]
    Insufficient {
        industry: String,
        available: usize,
        requested: usize,
    },
}

/// Sector a resume was submitted under. Unrecognized names are preserved
/// verbatim as `Other` rather than rejected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Industry {
    Healthcare,
    Finance,
    Construction,
    Other(String),
}

#[derive(Debug, Error)]
#[error("industry name is empty")]
pub struct EmptyIndustry;

impl FromStr for Industry {
    type Err = EmptyIndustry;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        match trimmed.to_ascii_lowercase().as_str() {
            "" => Err(EmptyIndustry),
            "healthcare" => Ok(Industry::Healthcare),
            "finance" => Ok(Industry::Finance),
            "construction" => Ok(Industry::Construction),
            _ => Ok(Industry::Other(trimmed.to_string())),
        }
    }
}

impl fmt::Display for Industry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Industry::Healthcare => f.write_str("Healthcare"),
            Industry::Finance => f.write_str("Finance"),
            Industry::Construction => f.write_str("Construction"),
            Industry::Other(name) => f.write_str(name),
        }
    }
}

impl Serialize for Industry {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Industry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// One anonymized resume. `word_count` is always `count_words(&text)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Resume {
    pub id: String,
    pub industry: Industry,
    pub role: String,
    pub text: String,
    pub word_count: usize,
}

impl Resume {
    /// Builds a validated resume; text is newline-normalized and the word
    /// count derived.
    pub fn new(
        id: impl Into<String>,
        industry: Industry,
        role: impl Into<String>,
        text: impl Into<String>,
    ) -> Result<Self, CorpusError> {
        let id = id.into();
        let role = role.into();
        let text = normalize_newlines(&text.into());
        let invalid = |id: &str, detail: &str| CorpusError::InvalidResume {
            id: id.to_string(),
            detail: detail.to_string(),
        };
        if id.trim().is_empty() {
            return Err(invalid("<unnamed>", "id is empty"));
        }
        if role.trim().is_empty() {
            return Err(invalid(&id, "role is empty"));
        }
        let word_count = count_words(&text);
        if word_count == 0 {
            return Err(invalid(&id, "text is empty"));
        }
        Ok(Resume {
            id,
            industry,
            role,
            text,
            word_count,
        })
    }
}

/// Number of maximal whitespace-separated tokens in `text`. No punctuation
/// stripping; any Unicode whitespace separates.
pub fn count_words(text: &str) -> usize {
    text.split_whitespace().count()
}

fn normalize_newlines(text: &str) -> String {
    text.replace("\r\n", "\n").replace('\r', "\n")
}

/// Validated resume set, sorted by id. Construction rejects duplicate ids and
/// invalid resumes; the sorted order is the canonical one everywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    resumes: Vec<Resume>,
}

impl Corpus {
    pub fn new(mut resumes: Vec<Resume>) -> Result<Self, CorpusError> {
        for r in &resumes {
            let rebuilt = Resume::new(r.id.clone(), r.industry.clone(), r.role.clone(), r.text.clone())?;
            if rebuilt.word_count != r.word_count || rebuilt.text != r.text {
                return Err(CorpusError::InvalidResume {
                    id: r.id.clone(),
                    detail: "word_count or text inconsistent with normalized content".to_string(),
                });
            }
        }
        resumes.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in resumes.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(CorpusError::DuplicateId {
                    id: pair[0].id.clone(),
                });
            }
        }
        Ok(Corpus { resumes })
    }

    pub fn resumes(&self) -> &[Resume] {
        &self.resumes
    }

    pub fn len(&self) -> usize {
        self.resumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resumes.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Resume> {
        self.resumes
            .binary_search_by(|r| r.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.resumes[i])
    }

    pub fn per_industry_counts(&self) -> BTreeMap<Industry, usize> {
        let mut counts = BTreeMap::new();
        for r in &self.resumes {
            *counts.entry(r.industry.clone()).or_insert(0) += 1;
        }
        counts
    }

    /// Content hash covering every field of every resume, in canonical order.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for r in &self.resumes {
            hasher.update(r.id.as_bytes());
            hasher.update([0x1f]);
            hasher.update(r.industry.to_string().as_bytes());
            hasher.update([0x1f]);
            hasher.update(r.role.as_bytes());
            hasher.update([0x1f]);
            hasher.update(r.text.as_bytes());
            hasher.update([0x1e]);
        }
        hex::encode(hasher.finalize())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Error)]
#[error("unknown corpus format `{0}` (expected csv or jsonl)")]
pub struct UnknownFormat(String);

impl FromStr for CorpusFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

/// Fields persisted for one resume; word counts are derived on load, so the
/// on-disk shape carries only the source data.
#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    industry: String,
    role: &'a str,
    text: &'a str,
}

pub fn load_corpus(path: &Path, format: CorpusFormat) -> Result<Corpus, CorpusError> {
    let content = fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if content.trim().is_empty() {
        return Err(CorpusError::NoRecords {
            path: path.to_path_buf(),
        });
    }
    let resumes = match format {
        CorpusFormat::Csv => parse_csv(path, &content)?,
        CorpusFormat::Jsonl => parse_jsonl(path, &content)?,
    };
    if resumes.is_empty() {
        return Err(CorpusError::NoRecords {
            path: path.to_path_buf(),
        });
    }
    Corpus::new(resumes)
}

pub fn save_corpus(corpus: &Corpus, path: &Path, format: CorpusFormat) -> Result<(), CorpusError> {
    let io_err = |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out: Vec<u8> = Vec::new();
    match format {
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_writer(&mut out);
            for r in corpus.resumes() {
                writer
                    .serialize(RecordOut {
                        id: &r.id,
                        industry: r.industry.to_string(),
                        role: &r.role,
                        text: &r.text,
                    })
                    .map_err(|e| CorpusError::Malformed {
                        path: path.to_path_buf(),
                        line: 0,
                        detail: e.to_string(),
                    })?;
            }
            writer.flush().map_err(io_err)?;
            drop(writer);
        }
        CorpusFormat::Jsonl => {
            for r in corpus.resumes() {
                let record = RecordOut {
                    id: &r.id,
                    industry: r.industry.to_string(),
                    role: &r.role,
                    text: &r.text,
                };
                let line = serde_json::to_string(&record).expect("record serializes");
                out.extend_from_slice(line.as_bytes());
                out.push(b'\n');
            }
        }
    }
    fs::write(path, out).map_err(io_err)
}

fn parse_csv(path: &Path, content: &str) -> Result<Vec<Resume>, CorpusError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(false)
        .from_reader(content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CorpusError::Malformed {
            path: path.to_path_buf(),
            line: 1,
            detail: e.to_string(),
        })?
        .clone();
    let column = |name: &'static str| -> Result<usize, CorpusError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CorpusError::Malformed {
                path: path.to_path_buf(),
                line: 1,
                detail: format!("missing column `{name}`"),
            })
    };
    let (id_col, industry_col, role_col, text_col) =
        (column("id")?, column("industry")?, column("role")?, column("text")?);

    let mut resumes = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line())
                .unwrap_or(0);
            CorpusError::Malformed {
                path: path.to_path_buf(),
                line,
                detail: e.to_string(),
            }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize, name: &'static str| -> Result<&str, CorpusError> {
            let value = record.get(idx).unwrap_or("");
            if value.trim().is_empty() {
                Err(CorpusError::EmptyField {
                    path: path.to_path_buf(),
                    line,
                    field: name,
                })
            } else {
                Ok(value)
            }
        };
        let id = field(id_col, "id")?;
        let industry: Industry = field(industry_col, "industry")?
            .parse()
            .expect("non-empty industry parses");
        let role = field(role_col, "role")?;
        let text = field(text_col, "text")?;
        resumes.push(Resume::new(id, industry, role, text)?);
    }
    Ok(resumes)
}

fn parse_jsonl(path: &Path, content: &str) -> Result<Vec<Resume>, CorpusError> {
    let mut resumes = Vec::new();
    for (idx, raw_line) in content.lines().enumerate() {
        let line = (idx + 1) as u64;
        if raw_line.trim().is_empty() {
            continue;
        }
        let malformed = |detail: String| CorpusError::Malformed {
            path: path.to_path_buf(),
            line,
            detail,
        };
        let value: serde_json::Value =
            serde_json::from_str(raw_line).map_err(|e| malformed(e.to_string()))?;
        let object = value
            .as_object()
            .ok_or_else(|| malformed("not an object".to_string()))?;
        let field = |name: &'static str| -> Result<&str, CorpusError> {
            let raw = object
                .get(name)
                .ok_or_else(|| CorpusError::Malformed {
                    path: path.to_path_buf(),
                    line,
                    detail: format!("missing field `{name}`"),
                })?
                .as_str()
                .ok_or_else(|| CorpusError::Malformed {
                    path: path.to_path_buf(),
                    line,
                    detail: format!("field `{name}` must be a string"),
                })?;
            if raw.trim().is_empty() {
                Err(CorpusError::EmptyField {
                    path: path.to_path_buf(),
                    line,
                    field: name,
                })
            } else {
                Ok(raw)
            }
        };
        let id = field("id")?;
        let industry: Industry = field("industry")?.parse().expect("non-empty industry parses");
        let role = field("role")?;
        let text = field("text")?;
        resumes.push(Resume::new(id, industry, role, text)?);
    }
    Ok(resumes)
}

/// Within each industry, keeps a contiguous block of `per_industry` resumes
/// from the middle of the length ordering, dropping `floor((n-k)/2)` shortest
/// and the remainder longest. Ties in word count break by id so the block is
/// deterministic.
pub fn subsample_middle_by_length(
    corpus: &Corpus,
    per_industry: usize,
) -> Result<Corpus, CorpusError> {
    let mut groups: BTreeMap<Industry, Vec<&Resume>> = BTreeMap::new();
    for r in corpus.resumes() {
        groups.entry(r.industry.clone()).or_default().push(r);
    }
    let mut kept = Vec::new();
    for (industry, mut members) in groups {
        if members.len() < per_industry {
            return Err(CorpusError::Insufficient {
                industry: industry.to_string(),
                available: members.len(),
                requested: per_industry,
            });
        }
        members.sort_by(|a, b| (a.word_count, &a.id).cmp(&(b.word_count, &b.id)));
        let start = (members.len() - per_industry) / 2;
        kept.extend(members[start..start + per_industry].iter().map(|r| (*r).clone()));
    }
    Corpus::new(kept)
}

const HEALTHCARE_ROLES: &[&str] = &[
    "Registered Nurse",
    "Medical Assistant",
    "Physical Therapist",
    "Clinical Lab Technician",
    "Pharmacy Technician",
];
const FINANCE_ROLES: &[&str] = &[
    "Financial Analyst",
    "Accountant",
    "Credit Risk Associate",
    "Auditor",
    "Investment Operations Specialist",
];
const CONSTRUCTION_ROLES: &[&str] = &[
    "Site Supervisor",
    "Civil Engineer",
    "Project Estimator",
    "Safety Coordinator",
    "Construction Foreman",
];

const HEALTHCARE_TASKS: &[&str] = &[
    "coordinated patient intake and discharge planning",
    "administered medications and tracked adverse reactions",
    "maintained electronic health records for a 40-bed unit",
    "assisted physicians during routine and emergency procedures",
    "trained new staff on infection control protocols",
    "managed triage during high-volume clinic hours",
    "documented care plans in compliance with audit requirements",
];
const FINANCE_TASKS: &[&str] = &[
    "reconciled general ledger accounts across three entities",
    "built monthly variance reports for senior management",
    "modelled credit exposure for a commercial loan portfolio",
    "prepared quarterly regulatory filings ahead of deadline",
    "automated invoice matching, reducing close time by two days",
    "reviewed counterparty risk limits and escalated breaches",
    "supported the annual external audit with full documentation",
];
const CONSTRUCTION_TASKS: &[&str] = &[
    "supervised crews of up to 25 across concurrent work fronts",
    "scheduled subcontractors and tracked milestone completion",
    "performed daily safety walkdowns and toolbox talks",
    "estimated material quantities for mid-rise residential builds",
    "coordinated inspections with municipal code officers",
    "managed equipment logistics across three active sites",
    "read and redlined structural drawings with the design team",
];

const SKILLS: &[&str] = &[
    "clear written communication",
    "scheduling and prioritization",
    "data entry with high accuracy",
    "vendor coordination",
    "spreadsheet reporting",
    "team supervision",
    "regulatory compliance",
    "process documentation",
    "incident reporting",
    "budget tracking",
];

const EDUCATION: &[&str] = &[
    "Associate degree, regional community college",
    "Bachelor of Science, state university",
    "Certificate program, technical institute",
    "Diploma with honors, vocational school",
];

/// Deterministic demo corpus: `per_industry` resumes per core industry with
/// sectioned, bulleted text whose length varies enough to exercise length
/// subsampling, chunking, and the information-density fits.
pub fn generate_synthetic(per_industry: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut resumes = Vec::new();
    let plans = [
        (Industry::Healthcare, 'h', HEALTHCARE_ROLES, HEALTHCARE_TASKS),
        (Industry::Finance, 'f', FINANCE_ROLES, FINANCE_TASKS),
        (Industry::Construction, 'c', CONSTRUCTION_ROLES, CONSTRUCTION_TASKS),
    ];
    for (industry, prefix, roles, tasks) in plans {
        for i in 0..per_industry {
            let id = format!("{prefix}{:04}", i + 1);
            let role = *roles.choose(&mut rng).expect("role pool non-empty");
            let text = synth_text(&mut rng, role, tasks);
            let resume =
                Resume::new(id, industry.clone(), role, text).expect("generated resume is valid");
            resumes.push(resume);
        }
    }
    Corpus::new(resumes).expect("generated ids are unique")
}

fn synth_text(rng: &mut ChaCha8Rng, role: &str, tasks: &[&str]) -> String {
    let years: u32 = rng.gen_range(2..=18);
    let mut sections = vec![format!(
        "Summary:\n{years} years of experience in roles comparable to {role}. \
         Known for reliable delivery, careful documentation, and steady communication \
         with colleagues and clients."
    )];

    let n_jobs = rng.gen_range(2..=4);
    let mut experience = String::from("Experience:");
    for _ in 0..n_jobs {
        let n_bullets = rng.gen_range(2..=5);
        for _ in 0..n_bullets {
            let task = tasks.choose(rng).expect("task pool non-empty");
            let pct: u32 = rng.gen_range(5..=35);
            experience.push_str(&format!("\n- In a prior position, {task}, improving outcomes by {pct} percent."));
        }
    }
    sections.push(experience);

    let mut skills = String::from("Skills:");
    let n_skills = rng.gen_range(3..=6);
    let mut pool: Vec<&str> = SKILLS.to_vec();
    pool.shuffle(rng);
    for skill in pool.into_iter().take(n_skills) {
        skills.push_str(&format!("\n- {skill}"));
    }
    sections.push(skills);

    let education = EDUCATION.choose(rng).expect("education pool non-empty");
    sections.push(format!("Education:\n- {education}"));

    if rng.gen_bool(0.5) {
        sections.push(
            "Certifications:\n- Workplace safety certification, current\n- First aid and CPR"
                .to_string(),
        );
    }

    sections.join("\n\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resume(id: &str, industry: Industry, words: usize) -> Resume {
        let text = vec!["w"; words].join(" ");
        Resume::new(id, industry, "Analyst", text).unwrap()
    }

    #[test]
    fn count_words_splits_on_any_whitespace() {
        assert_eq!(count_words("a b  c"), 3);
        assert_eq!(count_words(""), 0);
        assert_eq!(count_words("Line1\nLine2 word"), 3);
        assert_eq!(count_words("  \t \n "), 0);
    }

    #[test]
    fn load_csv_counts_industries() {
        let corpus = generate_synthetic(100, 7);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        save_corpus(&corpus, &path, CorpusFormat::Csv).unwrap();
        let loaded = load_corpus(&path, CorpusFormat::Csv).unwrap();
        let counts = loaded.per_industry_counts();
        assert_eq!(counts[&Industry::Healthcare], 100);
        assert_eq!(counts[&Industry::Finance], 100);
        assert_eq!(counts[&Industry::Construction], 100);
        assert_eq!(loaded, corpus);
    }

    #[test]
    fn empty_file_reports_no_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        fs::write(&path, "").unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("no records"), "{err}");
    }

    #[test]
    fn header_only_file_reports_no_records() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("header.csv");
        fs::write(&path, "id,industry,role,text\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv).unwrap_err();
        assert!(matches!(err, CorpusError::NoRecords { .. }), "{err}");
    }

    #[test]
    fn duplicate_id_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dup.csv");
        fs::write(
            &path,
            "id,industry,role,text\nr1,Healthcare,Nurse,alpha text\nr1,Finance,Analyst,beta text\n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { ref id } if id == "r1"), "{err}");
        assert!(err.to_string().contains("r1"));
    }

    #[test]
    fn missing_column_names_field_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cols.csv");
        fs::write(&path, "id,industry,role\nr1,Healthcare,Nurse\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`text`"), "{msg}");
        assert!(msg.contains(":1:"), "{msg}");
    }

    #[test]
    fn blank_text_field_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("blank.csv");
        fs::write(
            &path,
            "id,industry,role,text\nr1,Healthcare,Nurse,ok text\nr2,Finance,Analyst,   \n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv).unwrap_err();
        match err {
            CorpusError::EmptyField { line, field, .. } => {
                assert_eq!(field, "text");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn jsonl_malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        fs::write(
            &path,
            "{\"id\":\"r1\",\"industry\":\"Finance\",\"role\":\"Analyst\",\"text\":\"body\"}\n{broken\n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Jsonl).unwrap_err();
        match err {
            CorpusError::Malformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn jsonl_missing_field_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("missing.jsonl");
        fs::write(&path, "{\"id\":\"r1\",\"industry\":\"Finance\",\"text\":\"body\"}\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Jsonl).unwrap_err();
        assert!(err.to_string().contains("`role`"), "{err}");
    }

    #[test]
    fn industry_parse_is_case_insensitive_and_preserves_other() {
        assert_eq!("HEALTHCARE".parse::<Industry>().unwrap(), Industry::Healthcare);
        assert_eq!(" finance ".parse::<Industry>().unwrap(), Industry::Finance);
        assert_eq!(
            "Retail".parse::<Industry>().unwrap(),
            Industry::Other("Retail".to_string())
        );
        assert!("  ".parse::<Industry>().is_err());
    }

    #[test]
    fn subsample_takes_centered_block() {
        let resumes: Vec<Resume> = [10, 20, 30, 40, 50]
            .iter()
            .enumerate()
            .map(|(i, &w)| resume(&format!("r{i}"), Industry::Healthcare, w))
            .collect();
        let corpus = Corpus::new(resumes).unwrap();

        let picked = subsample_middle_by_length(&corpus, 3).unwrap();
        let counts: Vec<usize> = picked.resumes().iter().map(|r| r.word_count).collect();
        assert_eq!(counts, vec![20, 30, 40]);

        let picked = subsample_middle_by_length(&corpus, 4).unwrap();
        let counts: Vec<usize> = picked.resumes().iter().map(|r| r.word_count).collect();
        assert_eq!(counts, vec![10, 20, 30, 40]);

        let picked = subsample_middle_by_length(&corpus, 5).unwrap();
        assert_eq!(picked, corpus);
    }

    #[test]
    fn subsample_insufficient_names_industry() {
        let corpus = Corpus::new(vec![resume("r1", Industry::Finance, 30)]).unwrap();
        let err = subsample_middle_by_length(&corpus, 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("Finance"), "{msg}");
        assert!(msg.contains("have 1"), "{msg}");
        assert!(msg.contains("need 2"), "{msg}");
    }

    #[test]
    fn subsample_is_idempotent_and_trims_extremes() {
        let corpus = generate_synthetic(40, 11);
        let once = subsample_middle_by_length(&corpus, 20).unwrap();
        let twice = subsample_middle_by_length(&once, 20).unwrap();
        assert_eq!(once, twice);

        for (industry, _) in once.per_industry_counts() {
            let all: Vec<usize> = corpus
                .resumes()
                .iter()
                .filter(|r| r.industry == industry)
                .map(|r| r.word_count)
                .collect();
            let kept: Vec<usize> = once
                .resumes()
                .iter()
                .filter(|r| r.industry == industry)
                .map(|r| r.word_count)
                .collect();
            let global_min = *all.iter().min().unwrap();
            let global_max = *all.iter().max().unwrap();
            // The shortest and longest resumes must be outside the middle block
            // whenever at least two are dropped; with 40 -> 20 that holds.
            let n_min = all.iter().filter(|&&w| w == global_min).count();
            let n_max = all.iter().filter(|&&w| w == global_max).count();
            if n_min == 1 {
                assert!(kept.iter().filter(|&&w| w == global_min).count() == 0);
            }
            if n_max == 1 {
                assert!(kept.iter().filter(|&&w| w == global_max).count() == 0);
            }
        }
    }

    #[test]
    fn crlf_text_is_normalized() {
        let r = Resume::new("r1", Industry::Finance, "Analyst", "line one\r\nline two\rlast").unwrap();
        assert_eq!(r.text, "line one\nline two\nlast");
        assert_eq!(r.word_count, 5);
    }

    #[test]
    fn synthetic_corpus_is_deterministic() {
        let a = generate_synthetic(10, 42);
        let b = generate_synthetic(10, 42);
        let c = generate_synthetic(10, 43);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 30);
    }

    proptest! {
        #[test]
        fn round_trip_preserves_text_fields(
            seeds in proptest::collection::vec(
                ("[A-Za-z0-9 ,.'\"-]{1,60}", "[a-z ]{1,20}"), 1..8,
            )
        ) {
            let mut resumes = Vec::new();
            for (i, (text, role_raw)) in seeds.iter().enumerate() {
                prop_assume!(count_words(text) > 0);
                prop_assume!(!role_raw.trim().is_empty());
                let body = format!("{text}\nsecond, line!");
                resumes.push(
                    Resume::new(format!("r{i}"), Industry::Healthcare, role_raw.trim(), body)
                        .unwrap(),
                );
            }
            let corpus = Corpus::new(resumes).unwrap();
            let dir = tempfile::tempdir().unwrap();
            for format in [CorpusFormat::Csv, CorpusFormat::Jsonl] {
                let path = dir.path().join(match format {
                    CorpusFormat::Csv => "c.csv",
                    CorpusFormat::Jsonl => "c.jsonl",
                });
                save_corpus(&corpus, &path, format).unwrap();
                let loaded = load_corpus(&path, format).unwrap();
                prop_assert_eq!(&loaded, &corpus);
            }
        }
    }
}
