//! Magic classification of a tour's line sums.
//!
//! A direction is *magic* when every line in it hits that direction's magic
//! constant. With both directions magic the tour is magic; with exactly one it
//! is semi-magic, refined by looking at the off-direction sums:
//!
//! * quasi: exactly two distinct values, neither of them the constant;
//! * near: the constant plus exactly two other values;
//! * plain: anything else.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::board::{magic_constants, BoardDims, MagicConstants};
use crate::error::{Error, Result};
use crate::tour::{LineSumProfile, Tour};

/// Line direction. Short lines are rows (`width` cells), long lines are
/// columns (`height` cells).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Short,
    Long,
}

impl Direction {
    pub fn other(self) -> Direction {
        match self {
            Direction::Short => Direction::Long,
            Direction::Long => Direction::Short,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Short => "short",
            Direction::Long => "long",
        }
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "short" => Ok(Direction::Short),
            "long" => Ok(Direction::Long),
            other => Err(Error::invalid(format!("unknown direction {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Refinement {
    Plain,
    Quasi,
    Near,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MagicClass {
    Magic,
    SemiMagic {
        magic_direction: Direction,
        refinement: Refinement,
    },
    NonMagic,
}

impl MagicClass {
    pub const TOKENS: [&'static str; 8] = [
        "magic",
        "semi_short",
        "semi_long",
        "quasi_short",
        "quasi_long",
        "near_short",
        "near_long",
        "none",
    ];

    pub fn token(self) -> &'static str {
        use Direction::*;
        use Refinement::*;
        match self {
            MagicClass::Magic => "magic",
            MagicClass::NonMagic => "none",
            MagicClass::SemiMagic {
                magic_direction,
                refinement,
            } => match (refinement, magic_direction) {
                (Plain, Short) => "semi_short",
                (Plain, Long) => "semi_long",
                (Quasi, Short) => "quasi_short",
                (Quasi, Long) => "quasi_long",
                (Near, Short) => "near_short",
                (Near, Long) => "near_long",
            },
        }
    }

    pub fn magic_direction(self) -> Option<Direction> {
        match self {
            MagicClass::SemiMagic {
                magic_direction, ..
            } => Some(magic_direction),
            _ => None,
        }
    }

    /// Whether `self` is `other` or one of its refinements: a plain
    /// semi-magic class also covers the quasi and near classes in its
    /// direction.
    pub fn refines(self, other: MagicClass) -> bool {
        match (self, other) {
            (
                MagicClass::SemiMagic {
                    magic_direction, ..
                },
                MagicClass::SemiMagic {
                    magic_direction: want,
                    refinement: Refinement::Plain,
                },
            ) => magic_direction == want,
            _ => self == other,
        }
    }

    /// The same class with the two directions exchanged, as seen after
    /// transposing a square board.
    pub fn transposed(self) -> MagicClass {
        match self {
            MagicClass::SemiMagic {
                magic_direction,
                refinement,
            } => MagicClass::SemiMagic {
                magic_direction: magic_direction.other(),
                refinement,
            },
            other => other,
        }
    }
}

impl fmt::Display for MagicClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for MagicClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        use Direction::*;
        use Refinement::*;
        let semi = |d, r| MagicClass::SemiMagic {
            magic_direction: d,
            refinement: r,
        };
        Ok(match s.trim() {
            "magic" => MagicClass::Magic,
            "none" => MagicClass::NonMagic,
            "semi_short" => semi(Short, Plain),
            "semi_long" => semi(Long, Plain),
            "quasi_short" => semi(Short, Quasi),
            "quasi_long" => semi(Long, Quasi),
            "near_short" => semi(Short, Near),
            "near_long" => semi(Long, Near),
            other => return Err(Error::invalid(format!("unknown class {other:?}"))),
        })
    }
}

impl Serialize for MagicClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.token())
    }
}

impl<'de> Deserialize<'de> for MagicClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Full line-sum profile of a tour together with its classification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub profile: LineSumProfile,
    pub constants: MagicConstants,
    pub class: MagicClass,
    /// Distinct sums in the non-magic direction of a semi-magic tour, sorted.
    /// Empty for magic and non-magic tours.
    pub off_direction_distinct_values: Vec<u64>,
    /// Whether the non-magic direction of a semi-magic tour has a line equal
    /// to its constant.
    pub contains_mc: bool,
}

impl ClassificationReport {
    pub fn sums(&self, dir: Direction) -> &[u64] {
        match dir {
            Direction::Short => &self.profile.short_sums,
            Direction::Long => &self.profile.long_sums,
        }
    }

    pub fn constant(&self, dir: Direction) -> Option<u64> {
        match dir {
            Direction::Short => self.constants.short(),
            Direction::Long => self.constants.long(),
        }
    }

    /// Number of lines in `dir` whose sum equals that direction's constant.
    pub fn mc_lines(&self, dir: Direction) -> usize {
        match self.constant(dir) {
            Some(mc) => self.sums(dir).iter().filter(|&&s| s == mc).count(),
            None => 0,
        }
    }

    pub fn distinct_values(&self, dir: Direction) -> usize {
        self.sums(dir).iter().collect::<BTreeSet<_>>().len()
    }

    pub fn sums_are_consecutive(&self, dir: Direction) -> bool {
        let set: BTreeSet<u64> = self.sums(dir).iter().copied().collect();
        match (set.first(), set.last()) {
            (Some(lo), Some(hi)) => hi - lo + 1 == set.len() as u64,
            _ => true,
        }
    }

    /// The report as seen after transposing the board. Only meaningful for
    /// square boards, where both directions have the same constant.
    pub fn transposed(&self) -> ClassificationReport {
        ClassificationReport {
            profile: self.profile.transposed(),
            constants: self.constants,
            class: self.class.transposed(),
            off_direction_distinct_values: self.off_direction_distinct_values.clone(),
            contains_mc: self.contains_mc,
        }
    }
}

fn all_at(sums: &[u64], mc: Option<u64>) -> bool {
    mc.is_some_and(|mc| sums.iter().all(|&s| s == mc))
}

/// Classifies a line-sum profile for a board of the given dimensions.
pub fn classify_profile(dims: BoardDims, profile: LineSumProfile) -> ClassificationReport {
    let constants = magic_constants(dims);
    let short_magic = all_at(&profile.short_sums, constants.short());
    let long_magic = all_at(&profile.long_sums, constants.long());

    let (class, distinct, contains_mc) = match (short_magic, long_magic) {
        (true, true) => (MagicClass::Magic, Vec::new(), false),
        (false, false) => (MagicClass::NonMagic, Vec::new(), false),
        (short, _) => {
            let magic_direction = if short {
                Direction::Short
            } else {
                Direction::Long
            };
            let (off, mc) = match magic_direction {
                Direction::Short => (&profile.long_sums, constants.long()),
                Direction::Long => (&profile.short_sums, constants.short()),
            };
            let distinct: Vec<u64> = off
                .iter()
                .copied()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            let contains_mc = mc.is_some_and(|mc| distinct.contains(&mc));
            let others = distinct.len() - usize::from(contains_mc);
            // With one direction magic the off-direction total is fixed, so a
            // single off value (with or without the constant) cannot occur.
            debug_assert!(
                others >= 2,
                "off-direction sums {distinct:?} contradict the total"
            );
            let refinement = match (contains_mc, others) {
                (false, 2) => Refinement::Quasi,
                (true, 2) => Refinement::Near,
                _ => Refinement::Plain,
            };
            (
                MagicClass::SemiMagic {
                    magic_direction,
                    refinement,
                },
                distinct,
                contains_mc,
            )
        }
    };
    ClassificationReport {
        profile,
        constants,
        class,
        off_direction_distinct_values: distinct,
        contains_mc,
    }
}

pub fn classify(t: &Tour) -> ClassificationReport {
    classify_profile(t.dims(), t.line_sums())
}

pub fn distinct_value_count(t: &Tour, dir: Direction) -> usize {
    classify(t).distinct_values(dir)
}

pub fn sums_are_consecutive(t: &Tour, dir: Direction) -> bool {
    classify(t).sums_are_consecutive(dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(short: &[u64], long: &[u64]) -> LineSumProfile {
        LineSumProfile {
            short_sums: short.to_vec(),
            long_sums: long.to_vec(),
        }
    }

    fn d(s: &str) -> BoardDims {
        s.parse().unwrap()
    }

    #[test]
    fn refinement_order() {
        let c = |t: &str| t.parse::<MagicClass>().unwrap();
        assert!(c("near_long").refines(c("semi_long")));
        assert!(c("quasi_short").refines(c("semi_short")));
        assert!(!c("semi_long").refines(c("near_long")));
        assert!(!c("near_short").refines(c("semi_long")));
        assert!(c("magic").refines(c("magic")));
        assert!(!c("magic").refines(c("semi_short")));
    }

    #[test]
    fn token_round_trip() {
        for tok in MagicClass::TOKENS {
            assert_eq!(tok.parse::<MagicClass>().unwrap().token(), tok);
        }
        let err = "semi".parse::<MagicClass>().unwrap_err().to_string();
        assert!(err.contains("unknown class"));
    }

    #[test]
    fn quasi_and_near_on_6x8() {
        // margins of the 6x8 figures: short rows all 147
        let short = [147; 8];
        let q = classify_profile(d("6x8"), profile(&short, &[194, 194, 200, 200, 194, 194]));
        assert_eq!(q.class.token(), "quasi_short");
        assert_eq!(q.off_direction_distinct_values, vec![194, 200]);
        assert!(!q.contains_mc);

        let n = classify_profile(d("6x8"), profile(&short, &[196, 208, 184, 196, 196, 196]));
        assert_eq!(n.class.token(), "near_short");
        assert_eq!(n.mc_lines(Direction::Long), 4);

        let p = classify_profile(d("6x8"), profile(&short, &[194, 208, 186, 196, 196, 196]));
        assert_eq!(p.class.token(), "semi_short");
    }

    #[test]
    fn non_integral_off_constant_is_never_contained() {
        // 4x9: long constant is 166.5
        let r = classify_profile(d("4x9"), profile(&[74; 9], &[161, 166, 167, 172]));
        assert_eq!(r.class.token(), "semi_short");
        assert!(!r.contains_mc);
        assert!(!r.sums_are_consecutive(Direction::Long));
        assert_eq!(r.distinct_values(Direction::Long), 4);
        assert_eq!(r.mc_lines(Direction::Long), 0);
    }

    #[test]
    fn magic_and_none() {
        let m = classify_profile(d("6x12"), profile(&[219; 12], &[438; 6]));
        assert_eq!(m.class, MagicClass::Magic);
        assert_eq!(m.distinct_values(Direction::Short), 1);
        assert!(m.sums_are_consecutive(Direction::Long));
        let n = classify_profile(
            d("5x6"),
            profile(&[95, 95, 85, 95, 95, 100], &[81, 66, 81, 76, 161]),
        );
        assert_eq!(n.class, MagicClass::NonMagic);
    }

    #[test]
    fn transposed_swaps_direction() {
        let r = classify_profile(d("6x6"), profile(&[111; 6], &[111, 127, 95, 109, 113, 111]));
        assert_eq!(r.class.token(), "semi_short");
        assert_eq!(r.transposed().class.token(), "semi_long");
    }
}
