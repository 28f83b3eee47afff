//! Token classes. Every class matches leftmost, non-overlapping, longest
//! runs:
//!
//! | class         | pattern          |
//! |---------------|------------------|
//! | `NUMBER`      | `[0-9]+`         |
//! | `WORD`        | `[A-Za-z]+`      |
//! | `ALPHANUM`    | `[A-Za-z0-9]+`   |
//! | `ALL_CAPS`    | `[A-Z]+`         |
//! | `PROPER_CASE` | `[A-Z][a-z]+`    |
//! | `LOWER`       | `[a-z]+`         |
//! | `DIGIT`       | `[0-9]`          |
//! | `CHAR`        | one alphabet character (alphanumeric or delimiter) |
//! | delimiter     | the literal character |

use super::{RfChar, RfRegex};

/// Half-open character range `[start, end)` of one match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

fn runs(s: &[char], class: impl Fn(char) -> bool, out: &mut Vec<Span>) {
    let mut i = 0;
    while i < s.len() {
        if class(s[i]) {
            let start = i;
            while i < s.len() && class(s[i]) {
                i += 1;
            }
            out.push(Span { start, end: i });
        } else {
            i += 1;
        }
    }
}

fn singles(s: &[char], class: impl Fn(char) -> bool, out: &mut Vec<Span>) {
    out.extend(
        s.iter()
            .enumerate()
            .filter(|(_, c)| class(**c))
            .map(|(i, _)| Span { start: i, end: i + 1 }),
    );
}

/// Appends every match of `regex` in `s` to `out`, left to right.
pub fn find_matches_into(regex: RfRegex, s: &[char], out: &mut Vec<Span>) {
    match regex {
        RfRegex::Number => runs(s, |c| c.is_ascii_digit(), out),
        RfRegex::Word => runs(s, |c| c.is_ascii_alphabetic(), out),
        RfRegex::Alphanum => runs(s, |c| c.is_ascii_alphanumeric(), out),
        RfRegex::AllCaps => runs(s, |c| c.is_ascii_uppercase(), out),
        RfRegex::Lower => runs(s, |c| c.is_ascii_lowercase(), out),
        RfRegex::ProperCase => {
            let mut i = 0;
            while i + 1 < s.len() {
                if s[i].is_ascii_uppercase() && s[i + 1].is_ascii_lowercase() {
                    let start = i;
                    i += 2;
                    while i < s.len() && s[i].is_ascii_lowercase() {
                        i += 1;
                    }
                    out.push(Span { start, end: i });
                } else {
                    i += 1;
                }
            }
        }
        RfRegex::Digit => singles(s, |c| c.is_ascii_digit(), out),
        RfRegex::Char => singles(s, |c| RfChar::from_char(c).is_some(), out),
        RfRegex::Delim(d) => {
            let d = d.as_char();
            singles(s, |c| c == d, out)
        }
    }
}

pub fn find_matches(regex: RfRegex, s: &[char]) -> Vec<Span> {
    let mut out = Vec::new();
    find_matches_into(regex, s, &mut out);
    out
}
