//! Reader for cachegrind output files (`cachegrind.out.<pid>`).
//!
//! Only the header and the final `summary:` totals are interpreted. Body lines
//! (`fl=`, `fn=`, cost lines) are checked for shape and otherwise skipped.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::domain::{EventKind, EventVector};
use crate::error::Result;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProfileError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("line {line}: summary lists {found} counts but `events:` names {expected}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: summary token `{token}` is not a non-negative integer")]
    InvalidCount { line: usize, token: String },

    #[error("profile has no `{0}` event")]
    UnmappedEvent(String),

    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Header fields and program totals of one cachegrind run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CachegrindProfile {
    pub command: String,
    pub event_names: Vec<String>,
    pub totals: Vec<u64>,
    /// `desc:` lines and any header keys this reader does not interpret,
    /// stored as the full original line.
    pub description_lines: Vec<String>,
}

fn malformed(line: usize, reason: impl Into<String>) -> ProfileError {
    ProfileError::Malformed {
        line,
        reason: reason.into(),
    }
}

/// Header key of a `key: value` line, if the line has that shape.
fn header_key(line: &[u8]) -> Option<&[u8]> {
    let colon = line.iter().position(|&b| b == b':')?;
    let key = &line[..colon];
    let valid = !key.is_empty()
        && key
            .iter()
            .all(|b| b.is_ascii_alphanumeric() || *b == b'_' || *b == b'-');
    valid.then_some(key)
}

fn is_body_line(line: &[u8]) -> bool {
    match line.first() {
        None => true,
        Some(b'#') => true,
        Some(b) if b.is_ascii_digit() || *b == b'+' || *b == b'-' || *b == b'*' => true,
        Some(_) => {
            // `fl=...`, `fn=...`, `calls=...` and friends
            let eq = line.iter().position(|&b| b == b'=');
            let colon = line.iter().position(|&b| b == b':');
            match (eq, colon) {
                (Some(e), Some(c)) => e < c,
                (Some(_), None) => true,
                _ => false,
            }
        }
    }
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

/// Parses the bytes of a cachegrind output file.
pub fn parse_profile(input: &[u8]) -> Result<CachegrindProfile, ProfileError> {
    let mut profile = CachegrindProfile::default();
    let mut command = None;
    let mut events_line = None;
    let mut summary: Option<(usize, &[u8])> = None;
    let mut n_lines = 0;

    let input = input.strip_suffix(b"\n").unwrap_or(input);
    for (i, raw) in input.split(|&b| b == b'\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix(b"\r").unwrap_or(raw);
        n_lines = line_no;

        if let Some(rest) = line.strip_prefix(b"summary:") {
            if summary.is_some() {
                return Err(malformed(line_no, "duplicate `summary:` line"));
            }
            summary = Some((line_no, rest));
        } else if let Some(rest) = line.strip_prefix(b"events:") {
            if events_line.is_some() {
                return Err(malformed(line_no, "duplicate `events:` line"));
            }
            let names: Vec<String> = tokens(rest).map(text).collect();
            if names.is_empty() {
                return Err(malformed(line_no, "`events:` line names no events"));
            }
            events_line = Some(line_no);
            profile.event_names = names;
        } else if let Some(rest) = line.strip_prefix(b"cmd:") {
            if command.is_some() {
                return Err(malformed(line_no, "duplicate `cmd:` line"));
            }
            command = Some(text(rest.strip_prefix(b" ").unwrap_or(rest)));
        } else if line.starts_with(b"desc:") {
            profile.description_lines.push(text(line));
        } else if is_body_line(line) {
            if summary.is_some() && !line.iter().all(u8::is_ascii_whitespace) {
                return Err(malformed(line_no, "content after `summary:` line"));
            }
        } else if header_key(line).is_some() {
            profile.description_lines.push(text(line));
        } else {
            return Err(malformed(
                line_no,
                format!("unrecognised line `{}`", text(line)),
            ));
        }
    }

    let events_line = events_line.ok_or_else(|| malformed(n_lines, "missing `events:` line"))?;
    let (summary_line, summary) =
        summary.ok_or_else(|| malformed(n_lines, "missing `summary:` line"))?;
    if summary_line < events_line {
        return Err(malformed(summary_line, "`summary:` precedes `events:`"));
    }

    let totals = tokens(summary)
        .map(|tok| {
            std::str::from_utf8(tok)
                .ok()
                .filter(|t| t.bytes().all(|b| b.is_ascii_digit()))
                .and_then(|t| t.parse::<u64>().ok())
                .ok_or_else(|| ProfileError::InvalidCount {
                    line: summary_line,
                    token: text(tok),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    if totals.len() != profile.event_names.len() {
        return Err(ProfileError::Arity {
            line: summary_line,
            expected: profile.event_names.len(),
            found: totals.len(),
        });
    }
    profile.totals = totals;
    profile.command = command.unwrap_or_default();
    Ok(profile)
}

/// Space-separated tokens after a header colon. Cachegrind writes a single
/// space between fields and sometimes a trailing one.
fn tokens(rest: &[u8]) -> impl Iterator<Item = &[u8]> {
    let rest = rest.strip_prefix(b" ").unwrap_or(rest);
    let end = rest
        .iter()
        .rposition(|b| !b.is_ascii_whitespace())
        .map_or(0, |p| p + 1);
    let rest = &rest[..end];
    rest.split(|&b| b == b' ').filter(move |_| !rest.is_empty())
}

pub fn read_profile(path: impl AsRef<Path>) -> Result<CachegrindProfile, ProfileError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| ProfileError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_profile(&bytes)
}

impl CachegrindProfile {
    pub fn total(&self, name: &str) -> Option<u64> {
        self.event_names
            .iter()
            .position(|n| n == name)
            .map(|i| self.totals[i])
    }

    /// Minimal cachegrind text holding this profile's header and totals.
    pub fn to_summary_text(&self) -> String {
        let mut out = String::new();
        for line in &self.description_lines {
            out.push_str(line);
            out.push('\n');
        }
        let _ = writeln!(out, "cmd: {}", self.command);
        let _ = writeln!(out, "events: {}", self.event_names.join(" "));
        let totals: Vec<String> = self.totals.iter().map(u64::to_string).collect();
        let _ = writeln!(out, "summary: {}", totals.join(" "));
        out
    }

    /// Maps the nine canonical cachegrind columns onto an [`EventVector`];
    /// extra columns such as branch counts are ignored.
    pub fn to_event_vector(&self) -> Result<EventVector> {
        let mut counts = [0u64; 9];
        for kind in EventKind::ALL {
            let name = kind.cachegrind_name();
            counts[kind.index()] = self
                .total(name)
                .ok_or_else(|| ProfileError::UnmappedEvent(name.to_string()))?;
        }
        EventVector::new(counts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    const CANONICAL: &str = "events: Ir I1mr ILmr Dr D1mr DLmr Dw D1mw DLmw\n";

    fn profile(body: &str) -> Result<CachegrindProfile, ProfileError> {
        parse_profile(body.as_bytes())
    }

    #[test]
    fn summary_totals_extracted() {
        let p = profile(&format!(
            "desc: I1 cache: 32768 B, 64 B, 8-way associative\ncmd: ./a.out\n{CANONICAL}fl=a.c\nfn=main\n3 1 1 1 0 0 0 0 0 0\nsummary: 100 10 2 30 3 1 20 2 1\n"
        ))
        .unwrap();
        assert_eq!(p.totals, [100, 10, 2, 30, 3, 1, 20, 2, 1]);
        assert_eq!(p.command, "./a.out");
        assert_eq!(p.description_lines.len(), 1);
        let v = p.to_event_vector().unwrap();
        assert_eq!(v.get(EventKind::I_R), 100);
        assert_eq!(v.get(EventKind::R_R), 30);
        assert_eq!(v.get(EventKind::W_LL), 1);
    }

    #[test]
    fn arity_mismatch() {
        let err = profile(&format!(
            "cmd: x\n{CANONICAL}summary: 100 10 2 30 3 1 20 2\n"
        ))
        .unwrap_err();
        assert_eq!(
            err,
            ProfileError::Arity {
                line: 3,
                expected: 9,
                found: 8
            }
        );
    }

    #[test]
    fn missing_lines_report_position() {
        let err = profile("cmd: x\nsummary: 1\n").unwrap_err();
        assert!(
            matches!(err, ProfileError::Malformed { line: 2, ref reason } if reason.contains("events"))
        );
        let err = profile(&format!("cmd: x\n{CANONICAL}")).unwrap_err();
        assert!(
            matches!(err, ProfileError::Malformed { ref reason, .. } if reason.contains("summary"))
        );
    }

    #[test]
    fn non_integer_summary_token() {
        let err = profile(&format!(
            "cmd: x\n{CANONICAL}summary: 100 10 2 30 x 1 20 2 1\n"
        ))
        .unwrap_err();
        assert!(matches!(err, ProfileError::InvalidCount { line: 3, ref token } if token == "x"));
        let err = profile(&format!(
            "cmd: x\n{CANONICAL}summary: 100 10 2 30 -3 1 20 2 1\n"
        ))
        .unwrap_err();
        assert!(matches!(err, ProfileError::InvalidCount { .. }));
    }

    #[test]
    fn extra_columns_dropped() {
        let p = profile(
            "cmd: x\nevents: Ir I1mr ILmr Dr D1mr DLmr Dw D1mw DLmw Bc Bcm\nsummary: 100 10 2 30 3 1 20 2 1 7 3\n",
        )
        .unwrap();
        assert_eq!(
            p.to_event_vector().unwrap().counts(),
            &[100, 10, 2, 30, 3, 1, 20, 2, 1]
        );
    }

    #[test]
    fn missing_canonical_event() {
        let p = profile(
            "cmd: x\nevents: Ir I1mr ILmr Dr D1mr DLmr Dw D1mw\nsummary: 100 10 2 30 3 1 20 2\n",
        )
        .unwrap();
        assert!(matches!(
            p.to_event_vector(),
            Err(Error::Profile(ProfileError::UnmappedEvent(name))) if name == "DLmw"
        ));
    }

    #[test]
    fn crlf_and_trailing_space() {
        let p = profile("cmd: x\r\nevents: Ir I1mr ILmr Dr D1mr DLmr Dw D1mw DLmw \r\nsummary: 9 1 0 4 1 0 2 0 0\r\n")
            .unwrap();
        assert_eq!(p.totals, [9, 1, 0, 4, 1, 0, 2, 0, 0]);
        assert_eq!(p.event_names.last().unwrap(), "DLmw");
    }

    #[test]
    fn unknown_header_preserved() {
        let p = profile(&format!(
            "version: 1\ncreator: cachegrind\ncmd: x\n{CANONICAL}summary: 1 0 0 1 0 0 1 0 0\n"
        ))
        .unwrap();
        assert_eq!(p.description_lines, ["version: 1", "creator: cachegrind"]);
    }

    #[test]
    fn garbage_line_is_malformed() {
        let err = profile(&format!(
            "cmd: x\n{CANONICAL}this is not cachegrind\nsummary: 1 0 0 1 0 0 1 0 0\n"
        ))
        .unwrap_err();
        assert!(matches!(err, ProfileError::Malformed { line: 3, .. }));
    }

    #[test]
    fn non_monotone_totals_rejected() {
        let p = profile(&format!(
            "cmd: x\n{CANONICAL}summary: 100 10 2 30 3 1 7 9 1\n"
        ))
        .unwrap();
        assert!(matches!(
            p.to_event_vector(),
            Err(Error::InvalidEventVector { .. })
        ));
    }

    #[test]
    fn non_ascii_command_passes_through() {
        let mut bytes = b"cmd: ./d\xc3\xa9code --in v.bit\n".to_vec();
        bytes.extend_from_slice(CANONICAL.as_bytes());
        bytes.extend_from_slice(b"summary: 1 0 0 1 0 0 1 0 0\n");
        let p = parse_profile(&bytes).unwrap();
        assert_eq!(p.command, "./d\u{e9}code --in v.bit");
    }
}
