//! Prefix checks for a modification applied to an intermediate string,
//! without materialising the result.

use super::regex::{find_matches_into, Span};
use super::{Case, Index, Modification, RfChar, RfRegex};

/// An outer modification, possibly with a character parameter that the
/// examples seen so far leave open.
#[derive(Clone, Copy, Debug)]
pub(super) enum Outer {
    Known(Modification),
    /// `Replace` on a string that already is a prefix of the target.
    OpenReplace,
    /// `SubstituteAll(r, _)` on a string without matches of `r`.
    OpenSubstituteAll(RfRegex),
}

pub(super) struct View<'a> {
    u: &'a [char],
    t: &'a [char],
    lcp: usize,
    cache: Vec<Option<Vec<Span>>>,
}

fn cased(case: Case, c: char, prev_alpha: bool) -> char {
    match case {
        Case::AllCaps => c.to_ascii_uppercase(),
        Case::Lower => c.to_ascii_lowercase(),
        Case::ProperCase if c.is_ascii_alphabetic() && !prev_alpha => c.to_ascii_uppercase(),
        Case::ProperCase => c.to_ascii_lowercase(),
    }
}

impl<'a> View<'a> {
    pub(super) fn new(u: &'a [char], t: &'a [char]) -> View<'a> {
        let lcp = u.iter().zip(t).take_while(|(a, b)| a == b).count();
        View {
            u,
            t,
            lcp,
            cache: vec![None; RfRegex::COUNT],
        }
    }

    pub(super) fn is_prefix(&self) -> bool {
        self.lcp == self.u.len()
    }

    pub(super) fn len(&self) -> u32 {
        self.u.len() as u32
    }

    pub(super) fn has_match(&mut self, r: RfRegex) -> bool {
        !self.matches(r).is_empty()
    }

    fn matches(&mut self, r: RfRegex) -> &[Span] {
        let u = self.u;
        self.cache[r.index()].get_or_insert_with(|| {
            let mut m = Vec::new();
            find_matches_into(r, u, &mut m);
            m
        })
    }

    /// Whether the case mapping changes `u`.
    pub(super) fn case_changes(&self, case: Case) -> bool {
        let mut prev = false;
        self.u.iter().any(|&c| {
            let out = cased(case, c, prev);
            prev = c.is_ascii_alphabetic();
            out != c
        })
    }

    /// Output length of `m` applied to `u`, if that output is a prefix of
    /// the target.
    pub(super) fn check(&mut self, m: &Modification) -> Option<u32> {
        let (u, t, lcp) = (self.u, self.t, self.lcp);
        let len = match *m {
            Modification::ToCase(case) => {
                if u.len() > t.len() {
                    return None;
                }
                let mut prev = false;
                for (&c, &want) in u.iter().zip(t) {
                    if cased(case, c, prev) != want {
                        return None;
                    }
                    prev = c.is_ascii_alphabetic();
                }
                u.len()
            }
            Modification::Replace(c1, c2) => {
                let (c1, c2) = (c1.as_char(), c2.as_char());
                if u.len() > t.len() || !u.iter().zip(t).all(|(&x, &y)| y == if x == c1 { c2 } else { x }) {
                    return None;
                }
                u.len()
            }
            Modification::Trim => {
                let start = u.iter().position(|&c| c != ' ').unwrap_or(u.len());
                let end = u.iter().rposition(|&c| c != ' ').map_or(start, |e| e + 1);
                let s = &u[start..end];
                if s.len() > t.len() || t[..s.len()] != *s {
                    return None;
                }
                s.len()
            }
            Modification::GetFirst(r, i) => {
                let ms = self.matches(r);
                let j = i.resolve(ms.len())?;
                let mut at = 0;
                for m in &ms[..=j] {
                    let piece = &u[m.start..m.end];
                    if at + piece.len() > t.len() || t[at..at + piece.len()] != *piece {
                        return None;
                    }
                    at += piece.len();
                }
                at
            }
            Modification::GetAll(r) => {
                let ms = self.matches(r);
                let mut at = 0;
                for (j, m) in ms.iter().enumerate() {
                    if j > 0 {
                        if t.get(at) != Some(&' ') {
                            return None;
                        }
                        at += 1;
                    }
                    let piece = &u[m.start..m.end];
                    if at + piece.len() > t.len() || t[at..at + piece.len()] != *piece {
                        return None;
                    }
                    at += piece.len();
                }
                at
            }
            Modification::Remove(r, i) => {
                let ms = self.matches(r);
                let m = ms[i.resolve(ms.len())?];
                splice_len(u, t, lcp, &[m], None)?
            }
            Modification::Substitute(r, i, c) => {
                let ms = self.matches(r);
                let m = ms[i.resolve(ms.len())?];
                splice_len(u, t, lcp, &[m], Some(c.as_char()))?
            }
            Modification::RemoveAll(r) => {
                let ms = self.matches(r).to_vec();
                splice_len(u, t, lcp, &ms, None)?
            }
            Modification::SubstituteAll(r, c) => {
                let ms = self.matches(r).to_vec();
                splice_len(u, t, lcp, &ms, Some(c.as_char()))?
            }
        };
        Some(len as u32)
    }

    /// Every outer modification valid on this example, with parameters
    /// inferred from the target where it pins them down.
    pub(super) fn candidates(&mut self, out: &mut Vec<(Outer, u32)>) {
        for case in Case::ALL {
            let m = Modification::ToCase(case);
            if let Some(l) = self.check(&m) {
                out.push((Outer::Known(m), l));
            }
        }
        if self.u.len() <= self.t.len() {
            if self.is_prefix() {
                out.push((Outer::OpenReplace, self.len()));
            } else {
                let k = self.lcp;
                if let (Some(c1), Some(c2)) = (RfChar::from_char(self.u[k]), RfChar::from_char(self.t[k])) {
                    let m = Modification::Replace(c1, c2);
                    if let Some(l) = self.check(&m) {
                        out.push((Outer::Known(m), l));
                    }
                }
            }
        }
        if let Some(l) = self.check(&Modification::Trim) {
            out.push((Outer::Known(Modification::Trim), l));
        }
        for r in RfRegex::all() {
            let ms = self.matches(r).to_vec();
            let (u, t, lcp) = (self.u, self.t, self.lcp);
            // Leading matches whose concatenation stays a prefix.
            let mut at = 0;
            let mut cumulative = Vec::new();
            for m in &ms {
                let piece = &u[m.start..m.end];
                if at + piece.len() > t.len() || t[at..at + piece.len()] != *piece {
                    break;
                }
                at += piece.len();
                cumulative.push(at as u32);
            }
            for i in Index::all() {
                if let Some(&l) = i.resolve(ms.len()).and_then(|j| cumulative.get(j)) {
                    out.push((Outer::Known(Modification::GetFirst(r, i)), l));
                }
            }
            if cumulative.len() >= ms.len().min(1) {
                if let Some(l) = self.check(&Modification::GetAll(r)) {
                    out.push((Outer::Known(Modification::GetAll(r)), l));
                }
            }
            if ms.is_empty() {
                // Both are the identity here; another example must decide.
                if self.is_prefix() {
                    out.push((Outer::Known(Modification::RemoveAll(r)), self.len()));
                    out.push((Outer::OpenSubstituteAll(r), self.len()));
                }
                continue;
            }
            // Everything before the changed match is kept verbatim.
            for i in Index::all() {
                let Some(j) = i.resolve(ms.len()) else { continue };
                if ms[j].start > lcp {
                    continue;
                }
                let m = Modification::Remove(r, i);
                if let Some(l) = self.check(&m) {
                    out.push((Outer::Known(m), l));
                }
                if let Some(c) = t.get(ms[j].start).copied().and_then(RfChar::from_char) {
                    let m = Modification::Substitute(r, i, c);
                    if let Some(l) = self.check(&m) {
                        out.push((Outer::Known(m), l));
                    }
                }
            }
            if ms[0].start > lcp {
                continue;
            }
            let m = Modification::RemoveAll(r);
            if let Some(l) = self.check(&m) {
                out.push((Outer::Known(m), l));
            }
            if let Some(c) = t.get(ms[0].start).copied().and_then(RfChar::from_char) {
                let m = Modification::SubstituteAll(r, c);
                if let Some(l) = self.check(&m) {
                    out.push((Outer::Known(m), l));
                }
            }
        }
    }

    /// Pins down an open parameter from this example, if it can.
    pub(super) fn resolve(&mut self, open: Outer) -> Option<Modification> {
        match open {
            Outer::Known(m) => Some(m),
            Outer::OpenReplace => {
                if self.is_prefix() || self.lcp >= self.t.len() {
                    return None;
                }
                let k = self.lcp;
                Some(Modification::Replace(
                    RfChar::from_char(self.u[k])?,
                    RfChar::from_char(self.t[k])?,
                ))
            }
            Outer::OpenSubstituteAll(r) => {
                let start = self.matches(r).first()?.start;
                Some(Modification::SubstituteAll(r, RfChar::from_char(*self.t.get(start)?)?))
            }
        }
    }
}

/// Length of `u` with the given matches replaced by `with` (or removed),
/// if the result is a prefix of `t`.
fn splice_len(u: &[char], t: &[char], lcp: usize, matches: &[Span], with: Option<char>) -> Option<usize> {
    if matches.first().is_some_and(|m| m.start > lcp) {
        return None;
    }
    let mut at_u = 0;
    let mut at_t = 0;
    let take = |piece: &[char], at_t: &mut usize| -> Option<()> {
        let end = *at_t + piece.len();
        if end > t.len() || t[*at_t..end] != *piece {
            return None;
        }
        *at_t = end;
        Some(())
    };
    for m in matches {
        take(&u[at_u..m.start], &mut at_t)?;
        if let Some(c) = with {
            take(&[c], &mut at_t)?;
        }
        at_u = m.end;
    }
    take(&u[at_u..], &mut at_t)?;
    Some(at_t)
}
