//! International Patent Classification symbols.
//!
//! An IPC symbol names a position in WIPO's five-level hierarchy: section
//! (`G`), class (`G06`), subclass (`G06F`), main group (`G06F17`), and
//! subgroup (`G06F17/30`). Parsing is strict on structure and lenient on
//! formatting: surrounding whitespace, whitespace between the subclass and
//! the main group, and lowercase letters are all accepted; anything else
//! (edition markers, CPC suffixes, stray characters) is rejected so the
//! caller can count and report bad rows instead of silently mangling them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Depth of an IPC symbol. The derived order follows the hierarchy:
/// `Section < Class < Subclass < MainGroup < Subgroup`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IpcLevel {
    Section,
    Class,
    Subclass,
    MainGroup,
    Subgroup,
}

impl IpcLevel {
    pub const ALL: [IpcLevel; 5] = [
        IpcLevel::Section,
        IpcLevel::Class,
        IpcLevel::Subclass,
        IpcLevel::MainGroup,
        IpcLevel::Subgroup,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IpcLevel::Section => "section",
            IpcLevel::Class => "class",
            IpcLevel::Subclass => "subclass",
            IpcLevel::MainGroup => "main-group",
            IpcLevel::Subgroup => "subgroup",
        }
    }
}

impl fmt::Display for IpcLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IpcLevel {
    type Err = IpcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "section" => Ok(IpcLevel::Section),
            "class" => Ok(IpcLevel::Class),
            "subclass" | "sub-class" => Ok(IpcLevel::Subclass),
            "main-group" | "maingroup" | "group" => Ok(IpcLevel::MainGroup),
            "subgroup" | "sub-group" => Ok(IpcLevel::Subgroup),
            other => Err(IpcError::Malformed {
                input: other.to_owned(),
                reason: "unknown IPC level name".to_owned(),
            }),
        }
    }
}

/// Errors raised by symbol parsing and truncation.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IpcError {
    /// The input does not follow the IPC symbol grammar.
    #[error("malformed IPC symbol {input:?}: {reason}")]
    Malformed { input: String, reason: String },
    /// A truncation asked for a level deeper than the symbol carries.
    #[error("{code} has no {requested} component (deepest level is {actual})")]
    LevelUnavailable {
        code: String,
        requested: IpcLevel,
        actual: IpcLevel,
    },
}

/// A parsed IPC symbol. Populated components always form a contiguous
/// prefix of the hierarchy; [`IpcCode::level`] is the deepest one present.
///
/// The derived `Ord` compares components numerically, which is stable but
/// not identical to lexicographic text order once main groups differ in
/// digit count (`G06K9` vs `G06K17`). Output surfaces that promise
/// lexicographic order sort by the formatted symbol instead.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IpcCode {
    section: u8,
    class: Option<u8>,
    subclass: Option<u8>,
    main_group: Option<u16>,
    subgroup: Option<u32>,
}

impl IpcCode {
    pub const SECTIONS: [char; 8] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H'];

    /// Builds a code from raw components, enforcing ranges and the
    /// contiguous-prefix rule.
    pub fn new(
        section: char,
        class: Option<u8>,
        subclass: Option<char>,
        main_group: Option<u16>,
        subgroup: Option<u32>,
    ) -> Result<Self, IpcError> {
        let bad = |reason: &str| IpcError::Malformed {
            input: format!(
                "section={section:?} class={class:?} subclass={subclass:?} \
                 main_group={main_group:?} subgroup={subgroup:?}"
            ),
            reason: reason.to_owned(),
        };
        let section = section.to_ascii_uppercase();
        if !('A'..='H').contains(&section) {
            return Err(bad("section must be a letter A-H"));
        }
        if let Some(c) = class {
            if c > 99 {
                return Err(bad("class must be two decimal digits"));
            }
        }
        let subclass = subclass.map(|c| c.to_ascii_uppercase());
        if let Some(c) = subclass {
            if !c.is_ascii_uppercase() {
                return Err(bad("subclass must be a letter"));
            }
        }
        if let Some(g) = main_group {
            if g == 0 || g > 9999 {
                return Err(bad("main group must be in 1..=9999"));
            }
        }
        if let Some(s) = subgroup {
            if s > 999_999 {
                return Err(bad("subgroup must be in 0..=999999"));
            }
        }
        if (subgroup.is_some() && main_group.is_none())
            || (main_group.is_some() && subclass.is_none())
            || (subclass.is_some() && class.is_none())
        {
            return Err(bad("components must form a contiguous hierarchy prefix"));
        }
        Ok(IpcCode {
            section: section as u8,
            class,
            subclass: subclass.map(|c| c as u8),
            main_group,
            subgroup,
        })
    }

    pub fn section(&self) -> char {
        self.section as char
    }

    pub fn class_digits(&self) -> Option<u8> {
        self.class
    }

    pub fn subclass_letter(&self) -> Option<char> {
        self.subclass.map(|c| c as char)
    }

    pub fn main_group(&self) -> Option<u16> {
        self.main_group
    }

    pub fn subgroup(&self) -> Option<u32> {
        self.subgroup
    }

    /// Deepest populated level.
    pub fn level(&self) -> IpcLevel {
        if self.subgroup.is_some() {
            IpcLevel::Subgroup
        } else if self.main_group.is_some() {
            IpcLevel::MainGroup
        } else if self.subclass.is_some() {
            IpcLevel::Subclass
        } else if self.class.is_some() {
            IpcLevel::Class
        } else {
            IpcLevel::Section
        }
    }

    /// Returns the prefix of this code at exactly `level`. Idempotent when
    /// `level` equals the code's own level; fails when the code is shallower
    /// than the requested level.
    pub fn truncate(&self, level: IpcLevel) -> Result<Self, IpcError> {
        if level > self.level() {
            return Err(IpcError::LevelUnavailable {
                code: self.to_string(),
                requested: level,
                actual: self.level(),
            });
        }
        let mut out = *self;
        if level < IpcLevel::Subgroup {
            out.subgroup = None;
        }
        if level < IpcLevel::MainGroup {
            out.main_group = None;
        }
        if level < IpcLevel::Subclass {
            out.subclass = None;
        }
        if level < IpcLevel::Class {
            out.class = None;
        }
        Ok(out)
    }
}

/// Parses an IPC symbol at whatever depth the input specifies.
///
/// Accepted surface forms: `G`, `G06`, `G06F`, `G06F17`, `G06F17/30`, with
/// optional whitespace between the subclass letter and the main group
/// (`G06F 17/30`). Lowercase letters are upcased; leading zeros on group
/// numbers are accepted and dropped.
pub fn parse_ipc(raw: &str) -> Result<IpcCode, IpcError> {
    let s = raw.trim();
    let malformed = |reason: &str| IpcError::Malformed {
        input: raw.to_owned(),
        reason: reason.to_owned(),
    };
    if s.is_empty() {
        return Err(malformed("empty symbol"));
    }
    if !s.is_ascii() {
        return Err(malformed("non-ASCII character"));
    }
    let b = s.as_bytes();
    let mut i = 0;

    let section = b[i].to_ascii_uppercase();
    if !b[i].is_ascii_alphabetic() || !(b'A'..=b'H').contains(&section) {
        return Err(malformed("section must be a letter A-H"));
    }
    i += 1;
    if i == b.len() {
        return Ok(IpcCode {
            section,
            class: None,
            subclass: None,
            main_group: None,
            subgroup: None,
        });
    }

    if !b[i].is_ascii_digit() {
        return Err(malformed("expected two-digit class after the section"));
    }
    if i + 1 >= b.len() || !b[i + 1].is_ascii_digit() {
        return Err(malformed("class must be exactly two digits"));
    }
    let class = (b[i] - b'0') * 10 + (b[i + 1] - b'0');
    i += 2;
    if i == b.len() {
        return Ok(IpcCode {
            section,
            class: Some(class),
            subclass: None,
            main_group: None,
            subgroup: None,
        });
    }

    if !b[i].is_ascii_alphabetic() {
        return Err(malformed("expected subclass letter after the class"));
    }
    let subclass = b[i].to_ascii_uppercase();
    i += 1;
    // Exports often put a space between subclass and main group ("G06F 17/30").
    while i < b.len() && (b[i] == b' ' || b[i] == b'\t') {
        i += 1;
    }
    if i == b.len() {
        return Ok(IpcCode {
            section,
            class: Some(class),
            subclass: Some(subclass),
            main_group: None,
            subgroup: None,
        });
    }

    let group_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i == group_start {
        return Err(malformed("expected main group digits after the subclass"));
    }
    let main_group: u32 = s[group_start..i].parse().map_err(|_| malformed("main group overflow"))?;
    if main_group == 0 || main_group > 9999 {
        return Err(malformed("main group must be in 1..=9999"));
    }
    let main_group = main_group as u16;
    if i == b.len() {
        return Ok(IpcCode {
            section,
            class: Some(class),
            subclass: Some(subclass),
            main_group: Some(main_group),
            subgroup: None,
        });
    }

    if b[i] != b'/' {
        return Err(malformed("expected '/' between main group and subgroup"));
    }
    i += 1;
    let sub_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    if i == sub_start {
        return Err(malformed("empty group after slash"));
    }
    if i != b.len() {
        return Err(malformed("trailing characters after the subgroup"));
    }
    let subgroup: u32 = s[sub_start..].parse().map_err(|_| malformed("subgroup overflow"))?;
    if subgroup > 999_999 {
        return Err(malformed("subgroup must be in 0..=999999"));
    }
    Ok(IpcCode {
        section,
        class: Some(class),
        subclass: Some(subclass),
        main_group: Some(main_group),
        subgroup: Some(subgroup),
    })
}

/// Canonical text form. `parse_ipc(format_ipc(c)) == c` for every valid code.
pub fn format_ipc(code: &IpcCode) -> String {
    code.to_string()
}

impl fmt::Display for IpcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.section as char)?;
        if let Some(c) = self.class {
            write!(f, "{c:02}")?;
        }
        if let Some(sc) = self.subclass {
            write!(f, "{}", sc as char)?;
        }
        if let Some(g) = self.main_group {
            write!(f, "{g}")?;
        }
        if let Some(s) = self.subgroup {
            write!(f, "/{s}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for IpcCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IpcCode({self})")
    }
}

impl FromStr for IpcCode {
    type Err = IpcError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_ipc(s)
    }
}

impl Serialize for IpcCode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IpcCode {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_ipc(&s).map_err(serde::de::Error::custom)
    }
}
