//! Predicates over classification reports, used to select which tours a
//! search counts, and the line-sum requirements they imply for pruning.
//!
//! Text syntax, conjunctions joined with `&`:
//!
//! ```text
//! class=magic            class=semi_short       class=quasi
//! distinct(long)=2       mc_lines(short)>=13    consecutive(long)
//! ```
//!
//! Class tokens `semi_short` / `semi_long` select every tour whose short
//! (long) lines are all magic, including the quasi and near refinements;
//! `plain_short` / `plain_long` select only the unrefined ones. The bare
//! tokens `semi`, `quasi`, `near` and `plain` accept either direction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{magic_constants, BoardDims};
use crate::classify::{ClassificationReport, Direction, MagicClass, Refinement};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClassFilter {
    Magic,
    NonMagic,
    /// Semi-magic with any refinement.
    Semi(Option<Direction>),
    Plain(Option<Direction>),
    Quasi(Option<Direction>),
    Near(Option<Direction>),
}

impl ClassFilter {
    fn matches(self, class: MagicClass) -> bool {
        let semi = |want: Option<Direction>, refine: Option<Refinement>| match class {
            MagicClass::SemiMagic {
                magic_direction,
                refinement,
            } => {
                want.is_none_or(|d| d == magic_direction) && refine.is_none_or(|r| r == refinement)
            }
            _ => false,
        };
        match self {
            ClassFilter::Magic => class == MagicClass::Magic,
            ClassFilter::NonMagic => class == MagicClass::NonMagic,
            ClassFilter::Semi(d) => semi(d, None),
            ClassFilter::Plain(d) => semi(d, Some(Refinement::Plain)),
            ClassFilter::Quasi(d) => semi(d, Some(Refinement::Quasi)),
            ClassFilter::Near(d) => semi(d, Some(Refinement::Near)),
        }
    }

    fn magic_direction(self) -> Option<Option<Direction>> {
        match self {
            ClassFilter::Semi(d)
            | ClassFilter::Plain(d)
            | ClassFilter::Quasi(d)
            | ClassFilter::Near(d) => Some(d),
            _ => None,
        }
    }
}

impl FromStr for ClassFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "magic" => return Ok(ClassFilter::Magic),
            "none" => return Ok(ClassFilter::NonMagic),
            _ => {}
        }
        let (kind, dir) = match s.split_once('_') {
            Some((k, d)) => (
                k,
                Some(d.parse::<Direction>().map_err(|_| unknown_class(s))?),
            ),
            None => (s, None),
        };
        match kind {
            "semi" => Ok(ClassFilter::Semi(dir)),
            "plain" => Ok(ClassFilter::Plain(dir)),
            "quasi" => Ok(ClassFilter::Quasi(dir)),
            "near" => Ok(ClassFilter::Near(dir)),
            _ => Err(unknown_class(s)),
        }
    }
}

fn unknown_class(s: &str) -> Error {
    Error::invalid(format!("unknown class {s:?}"))
}

impl fmt::Display for ClassFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, dir) = match *self {
            ClassFilter::Magic => return f.write_str("magic"),
            ClassFilter::NonMagic => return f.write_str("none"),
            ClassFilter::Semi(d) => ("semi", d),
            ClassFilter::Plain(d) => ("plain", d),
            ClassFilter::Quasi(d) => ("quasi", d),
            ClassFilter::Near(d) => ("near", d),
        };
        match dir {
            Some(d) => write!(f, "{kind}_{}", d.as_str()),
            None => f.write_str(kind),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cmp {
    Eq,
    Ne,
    Ge,
    Gt,
    Le,
    Lt,
}

impl Cmp {
    fn holds(self, lhs: usize, rhs: usize) -> bool {
        match self {
            Cmp::Eq => lhs == rhs,
            Cmp::Ne => lhs != rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Lt => lhs < rhs,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Ne => "!=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
        }
    }

    /// Smallest `lhs` this comparison can accept, if it implies one.
    fn lower_bound(self, rhs: usize) -> usize {
        match self {
            Cmp::Eq | Cmp::Ge => rhs,
            Cmp::Gt => rhs + 1,
            _ => 0,
        }
    }
}

/// A pure predicate over [`ClassificationReport`]s.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub enum Filter {
    #[default]
    Any,
    Class(ClassFilter),
    /// Number of lines in a direction equal to that direction's constant.
    McLines {
        dir: Direction,
        cmp: Cmp,
        value: usize,
    },
    /// Number of distinct sums in a direction.
    Distinct {
        dir: Direction,
        cmp: Cmp,
        value: usize,
    },
    /// The distinct sums in a direction form a run of consecutive integers.
    Consecutive(Direction),
    All(Vec<Filter>),
}

/// Minimum number of lines that must sit at their constant, per direction.
/// A filter yields a list of these; a tour can match only if it meets at least
/// one of them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LineRequirement {
    pub short: usize,
    pub long: usize,
}

impl LineRequirement {
    pub fn is_trivial(&self) -> bool {
        self.short == 0 && self.long == 0
    }

    fn transposed(self) -> Self {
        LineRequirement {
            short: self.long,
            long: self.short,
        }
    }

    fn merge(self, other: Self) -> Self {
        LineRequirement {
            short: self.short.max(other.short),
            long: self.long.max(other.long),
        }
    }
}

impl Filter {
    pub fn class(c: ClassFilter) -> Filter {
        Filter::Class(c)
    }

    /// Evaluates the filter on a report. On square boards the predicate is
    /// symmetrized over the transpose, so that it is invariant under the whole
    /// symmetry group of the board.
    pub fn matches(&self, report: &ClassificationReport, dims: BoardDims) -> bool {
        self.matches_oriented(report)
            || (dims.is_square() && self.matches_oriented(&report.transposed()))
    }

    fn matches_oriented(&self, r: &ClassificationReport) -> bool {
        match self {
            Filter::Any => true,
            Filter::Class(c) => c.matches(r.class),
            Filter::McLines { dir, cmp, value } => cmp.holds(r.mc_lines(*dir), *value),
            Filter::Distinct { dir, cmp, value } => cmp.holds(r.distinct_values(*dir), *value),
            Filter::Consecutive(dir) => r.sums_are_consecutive(*dir),
            Filter::All(fs) => fs.iter().all(|f| f.matches_oriented(r)),
        }
    }

    fn oriented_requirements(&self, dims: BoardDims) -> Vec<LineRequirement> {
        let (rows, cols) = (dims.height(), dims.width());
        let one = |short, long| vec![LineRequirement { short, long }];
        match self {
            Filter::Class(ClassFilter::Magic) => one(rows, cols),
            Filter::Class(c) => match c.magic_direction() {
                Some(Some(Direction::Short)) => one(rows, 0),
                Some(Some(Direction::Long)) => one(0, cols),
                Some(None) => vec![
                    LineRequirement {
                        short: rows,
                        long: 0,
                    },
                    LineRequirement {
                        short: 0,
                        long: cols,
                    },
                ],
                None => one(0, 0),
            },
            Filter::McLines { dir, cmp, value } => {
                let k = cmp.lower_bound(*value);
                match dir {
                    Direction::Short => one(k, 0),
                    Direction::Long => one(0, k),
                }
            }
            Filter::All(fs) => {
                let mut acc = one(0, 0);
                for f in fs {
                    let reqs = f.oriented_requirements(dims);
                    acc = acc
                        .iter()
                        .flat_map(|a| reqs.iter().map(move |b| a.merge(*b)))
                        .collect();
                }
                acc
            }
            Filter::Any | Filter::Distinct { .. } | Filter::Consecutive(_) => one(0, 0),
        }
    }

    /// Line-sum requirements implied by this filter on `dims`, with
    /// alternatives that cannot be met (a required direction whose constant is
    /// not an integer) removed. An empty result means no tour can match.
    pub fn requirements(&self, dims: BoardDims) -> Vec<LineRequirement> {
        let mut reqs = self.oriented_requirements(dims);
        if dims.is_square() {
            let extra: Vec<_> = reqs.iter().map(|r| r.transposed()).collect();
            reqs.extend(extra);
        }
        let mc = magic_constants(dims);
        reqs.retain(|r| {
            (r.short == 0 || mc.short_is_integral) && (r.long == 0 || mc.long_is_integral)
        });
        simplify(reqs)
    }
}

/// Sorts, dedups and drops alternatives dominated by a weaker one.
pub(crate) fn simplify(mut reqs: Vec<LineRequirement>) -> Vec<LineRequirement> {
    reqs.sort();
    reqs.dedup();
    let snapshot = reqs.clone();
    reqs.retain(|r| {
        !snapshot
            .iter()
            .any(|o| o != r && o.short <= r.short && o.long <= r.long)
    });
    reqs
}

impl fmt::Display for Filter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Filter::Any => f.write_str("any"),
            Filter::Class(c) => write!(f, "class={c}"),
            Filter::McLines { dir, cmp, value } => {
                write!(f, "mc_lines({}){}{value}", dir.as_str(), cmp.as_str())
            }
            Filter::Distinct { dir, cmp, value } => {
                write!(f, "distinct({}){}{value}", dir.as_str(), cmp.as_str())
            }
            Filter::Consecutive(dir) => write!(f, "consecutive({})", dir.as_str()),
            Filter::All(fs) => {
                let parts: Vec<String> = fs.iter().map(ToString::to_string).collect();
                f.write_str(&parts.join("&"))
            }
        }
    }
}

impl FromStr for Filter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('&').map(str::trim).collect();
        if parts.len() > 1 {
            return Ok(Filter::All(
                parts.into_iter().map(parse_atom).collect::<Result<_>>()?,
            ));
        }
        parse_atom(parts[0])
    }
}

fn parse_atom(s: &str) -> Result<Filter> {
    let s = s.trim();
    if s.is_empty() || s == "any" {
        return Ok(Filter::Any);
    }
    if let Some(token) = s.strip_prefix("class") {
        let token = token
            .trim_start()
            .strip_prefix('=')
            .ok_or_else(|| Error::invalid(format!("expected class=<token>, got {s:?}")))?;
        return Ok(Filter::Class(token.parse()?));
    }
    let (name, rest) = s
        .split_once('(')
        .ok_or_else(|| Error::invalid(format!("cannot parse filter term {s:?}")))?;
    let (arg, tail) = rest
        .split_once(')')
        .ok_or_else(|| Error::invalid(format!("missing ')' in {s:?}")))?;
    let dir: Direction = arg.parse()?;
    if name.trim() == "consecutive" {
        if !tail.trim().is_empty() {
            return Err(Error::invalid(format!(
                "consecutive(..) takes no comparison: {s:?}"
            )));
        }
        return Ok(Filter::Consecutive(dir));
    }
    let tail = tail.trim();
    let (cmp, num) = [
        (">=", Cmp::Ge),
        ("<=", Cmp::Le),
        ("!=", Cmp::Ne),
        ("=", Cmp::Eq),
        (">", Cmp::Gt),
        ("<", Cmp::Lt),
    ]
    .iter()
    .find_map(|(op, cmp)| tail.strip_prefix(op).map(|n| (*cmp, n)))
    .ok_or_else(|| Error::invalid(format!("missing comparison in {s:?}")))?;
    let value = num
        .trim()
        .parse::<usize>()
        .map_err(|_| Error::invalid(format!("bad number in {s:?}")))?;
    match name.trim() {
        "distinct" => Ok(Filter::Distinct { dir, cmp, value }),
        "mc_lines" => Ok(Filter::McLines { dir, cmp, value }),
        other => Err(Error::invalid(format!("unknown filter function {other:?}"))),
    }
}

impl Serialize for Filter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Filter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::classify_profile;
    use crate::tour::LineSumProfile;

    fn d(s: &str) -> BoardDims {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in [
            "any",
            "class=magic",
            "class=semi_short",
            "class=quasi",
            "distinct(long)=2",
            "mc_lines(short)>=13",
            "class=semi_short&distinct(long)=2",
            "consecutive(long)",
        ] {
            let f: Filter = text.parse().unwrap();
            assert_eq!(f.to_string(), text);
        }
        assert!("class=weird".parse::<Filter>().is_err());
        assert!("distinct(up)=2".parse::<Filter>().is_err());
        assert!("distinct(long)".parse::<Filter>().is_err());
        assert!("foo(long)=1".parse::<Filter>().is_err());
    }

    #[test]
    fn requirements_follow_the_class() {
        let dims = d("6x8");
        let req = |s: &str| s.parse::<Filter>().unwrap().requirements(dims);
        assert_eq!(
            req("class=magic"),
            vec![LineRequirement { short: 8, long: 6 }]
        );
        assert_eq!(
            req("class=quasi_long"),
            vec![LineRequirement { short: 0, long: 6 }]
        );
        assert_eq!(
            req("mc_lines(short)>=5"),
            vec![LineRequirement { short: 5, long: 0 }]
        );
        assert_eq!(req("distinct(long)=2"), vec![LineRequirement::default()]);
        assert_eq!(req("class=semi").len(), 2);
        assert_eq!(
            req("class=semi_short&mc_lines(long)>2"),
            vec![LineRequirement { short: 8, long: 3 }]
        );
        // the long constant of 4x9 is not an integer
        assert!("class=magic"
            .parse::<Filter>()
            .unwrap()
            .requirements(d("4x9"))
            .is_empty());
        assert_eq!(
            "class=semi_short"
                .parse::<Filter>()
                .unwrap()
                .requirements(d("6x6")),
            vec![
                LineRequirement { short: 0, long: 6 },
                LineRequirement { short: 6, long: 0 }
            ]
        );
    }

    #[test]
    fn semi_includes_refinements() {
        let dims = d("6x8");
        let near = classify_profile(
            dims,
            LineSumProfile {
                short_sums: vec![147; 8],
                long_sums: vec![196, 208, 184, 196, 196, 196],
            },
        );
        let yes = |s: &str| s.parse::<Filter>().unwrap().matches(&near, dims);
        assert!(yes("class=semi_short"));
        assert!(yes("class=near_short"));
        assert!(yes("class=near"));
        assert!(!yes("class=plain_short"));
        assert!(!yes("class=quasi_short"));
        assert!(!yes("class=semi_long"));
        assert!(yes("mc_lines(long)=4"));
        assert!(yes("distinct(long)=3&mc_lines(short)>=8"));
    }

    #[test]
    fn square_boards_match_either_orientation() {
        let dims = d("6x6");
        let r = classify_profile(
            dims,
            LineSumProfile {
                short_sums: vec![111; 6],
                long_sums: vec![111, 127, 95, 109, 113, 111],
            },
        );
        let f: Filter = "class=semi_long".parse().unwrap();
        assert!(f.matches(&r, dims));
    }
}
