//! Transcribed tours with their expected classification and margins.
//!
//! A fixture file is a tour document with extra header lines:
//!
//! ```text
//! source Magic tours on the 4x18 board, MT.3
//! kind knight
//! class magic
//! short_sums 146 146 ...
//! long_sums 657 657 657 657
//! board 18x4
//! ...
//! ```
//!
//! `short_sums` and `long_sums` list the printed margins of the short and
//! long lines in the order they are printed. A `quarantine <note>` header
//! marks a fixture whose printed data is known to be inconsistent; it is still
//! checked, but its failures are reported separately.
//!
//! A `semi_short` or `semi_long` class also accepts the quasi and near
//! refinements in that direction, the same way the counts include them.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::{classify, MagicClass};
use crate::emperor::validate_emperor;
use crate::error::{Error, Result};
use crate::tour::{parse_document, Tour};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Knight,
    Emperor,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Fixture {
    pub id: String,
    pub source: Option<String>,
    pub kind: FixtureKind,
    pub tour: Tour,
    pub expected_class: MagicClass,
    pub expected_short_sums: Option<Vec<u64>>,
    pub expected_long_sums: Option<Vec<u64>>,
    pub quarantine: Option<String>,
}

fn parse_sums(line: usize, rest: &str) -> Result<Vec<u64>> {
    rest.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::parse(line, 1, format!("not a number: {t:?}")))
        })
        .collect()
}

/// Parses a fixture. `id` is used unless the file has its own `id` header.
pub fn parse_fixture(id: &str, text: &str) -> Result<Fixture> {
    let doc = parse_document(text)?;
    let dims = doc.tour.dims();
    let mut fixture = Fixture {
        id: id.to_string(),
        source: None,
        kind: FixtureKind::Knight,
        tour: doc.tour,
        expected_class: MagicClass::NonMagic,
        expected_short_sums: None,
        expected_long_sums: None,
        quarantine: None,
    };
    let mut class_seen = false;
    for (line, key, rest) in doc.headers {
        match key.as_str() {
            "id" => fixture.id = rest,
            "source" => fixture.source = Some(rest),
            "quarantine" => fixture.quarantine = Some(rest),
            "kind" => {
                fixture.kind = match rest.as_str() {
                    "knight" => FixtureKind::Knight,
                    "emperor" => FixtureKind::Emperor,
                    other => return Err(Error::parse(line, 6, format!("unknown kind {other:?}"))),
                }
            }
            "class" => {
                fixture.expected_class = rest.parse().map_err(|e: Error| {
                    let msg = match e {
                        Error::InvalidArgument(m) => m,
                        other => other.to_string(),
                    };
                    Error::parse(line, 7, msg)
                })?;
                class_seen = true;
            }
            "short_sums" => {
                let sums = parse_sums(line, &rest)?;
                if sums.len() != dims.height() {
                    return Err(Error::parse(
                        line,
                        1,
                        format!(
                            "expected {} short line sums, found {}",
                            dims.height(),
                            sums.len()
                        ),
                    ));
                }
                fixture.expected_short_sums = Some(sums);
            }
            "long_sums" => {
                let sums = parse_sums(line, &rest)?;
                if sums.len() != dims.width() {
                    return Err(Error::parse(
                        line,
                        1,
                        format!(
                            "expected {} long line sums, found {}",
                            dims.width(),
                            sums.len()
                        ),
                    ));
                }
                fixture.expected_long_sums = Some(sums);
            }
            other => return Err(Error::parse(line, 1, format!("unknown header {other:?}"))),
        }
    }
    if !class_seen {
        return Err(Error::parse(1, 1, "missing `class` header"));
    }
    Ok(fixture)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FixtureOutcome {
    Pass,
    Fail { reasons: Vec<String> },
}

impl FixtureOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, FixtureOutcome::Pass)
    }
}

/// Checks the tour, its class and its printed margins.
pub fn verify_fixture(f: &Fixture) -> FixtureOutcome {
    let mut reasons = Vec::new();
    match f.kind {
        FixtureKind::Knight => {
            if let Err(v) = f.tour.validate() {
                reasons.push(format!("not a knight tour: {v}"));
            }
        }
        FixtureKind::Emperor => {
            if let Err(v) = validate_emperor(&f.tour) {
                reasons.push(format!("not an emperor tour: {v}"));
            }
        }
    }
    let report = classify(&f.tour);
    if !report.class.refines(f.expected_class) {
        reasons.push(format!(
            "class is {}, expected {}",
            report.class, f.expected_class
        ));
    }
    if let Some(exp) = &f.expected_short_sums {
        if *exp != report.profile.short_sums {
            reasons.push(format!(
                "short sums are {:?}, printed {:?}",
                report.profile.short_sums, exp
            ));
        }
    }
    if let Some(exp) = &f.expected_long_sums {
        if *exp != report.profile.long_sums {
            reasons.push(format!(
                "long sums are {:?}, printed {:?}",
                report.profile.long_sums, exp
            ));
        }
    }
    if reasons.is_empty() {
        FixtureOutcome::Pass
    } else {
        FixtureOutcome::Fail { reasons }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FixtureReport {
    pub id: String,
    pub path: PathBuf,
    pub quarantine: Option<String>,
    #[serde(flatten)]
    pub outcome: FixtureOutcome,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusStatus {
    AllPassed,
    Failures,
    NothingVerified,
}

impl fmt::Display for CorpusStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorpusStatus::AllPassed => "all passed",
            CorpusStatus::Failures => "failures",
            CorpusStatus::NothingVerified => "nothing verified",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub status: CorpusStatus,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Quarantined fixtures, whatever their outcome.
    pub quarantined: usize,
    pub fixtures: Vec<FixtureReport>,
}

impl CorpusReport {
    pub fn failures(&self) -> impl Iterator<Item = &FixtureReport> {
        self.fixtures
            .iter()
            .filter(|r| r.quarantine.is_none() && !r.outcome.passed())
    }
}

/// Verifies every `*.tour` file in `dir`, in file-name order. Files that fail
/// to parse count as failures. Quarantined fixtures are reported but never
/// count as failures.
pub fn verify_corpus(dir: &Path) -> Result<CorpusReport> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "tour"));
    paths.sort();

    let mut fixtures = Vec::with_capacity(paths.len());
    for path in paths {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let text = std::fs::read_to_string(&path)?;
        let report = match parse_fixture(&stem, &text) {
            Ok(f) => FixtureReport {
                id: f.id.clone(),
                path,
                quarantine: f.quarantine.clone(),
                outcome: verify_fixture(&f),
            },
            Err(e) => FixtureReport {
                id: stem,
                path,
                quarantine: None,
                outcome: FixtureOutcome::Fail {
                    reasons: vec![e.to_string()],
                },
            },
        };
        fixtures.push(report);
    }
    let quarantined = fixtures.iter().filter(|r| r.quarantine.is_some()).count();
    let passed = fixtures
        .iter()
        .filter(|r| r.quarantine.is_none() && r.outcome.passed())
        .count();
    let failed = fixtures.len() - quarantined - passed;
    let status = if passed + failed == 0 {
        CorpusStatus::NothingVerified
    } else if failed > 0 {
        CorpusStatus::Failures
    } else {
        CorpusStatus::AllPassed
    };
    Ok(CorpusReport {
        status,
        total: fixtures.len(),
        passed,
        failed,
        quarantined,
        fixtures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "source test\nclass none\nshort_sums 16 19 20 23\nlong_sums 22 28 28\nboard 3x4\n1 12 3\n4 9 6\n7 2 11\n10 5 8\n";

    #[test]
    fn parse_and_verify() {
        let f = parse_fixture("small", SMALL).unwrap();
        assert_eq!(f.id, "small");
        assert_eq!(f.kind, FixtureKind::Knight);
        assert_eq!(verify_fixture(&f), FixtureOutcome::Pass);
    }

    #[test]
    fn wrong_margin_fails() {
        let bad = SMALL.replace("16 19 20 23", "16 19 21 22");
        let f = parse_fixture("small", &bad).unwrap();
        match verify_fixture(&f) {
            FixtureOutcome::Fail { reasons } => assert!(reasons[0].starts_with("short sums")),
            FixtureOutcome::Pass => panic!("corrupted margins accepted"),
        }
    }

    #[test]
    fn parse_errors() {
        let e = parse_fixture("x", &SMALL.replace("class none", "class semi")).unwrap_err();
        assert!(e.to_string().contains("unknown class"), "{e}");
        let e = parse_fixture("x", &SMALL.replace("1 12 3\n", "1 12\n")).unwrap_err();
        assert!(e.to_string().contains("expected 3 values"), "{e}");
        let e = parse_fixture("x", &SMALL.replace("long_sums 22 28 28", "long_sums 22 28"))
            .unwrap_err();
        assert!(e.to_string().contains("expected 3 long line sums"), "{e}");
        assert!(parse_fixture("x", &SMALL.replace("class none\n", "")).is_err());
    }
}
