//! Goal-directed single-expression search.
//!
//! Given input strings and target strings, finds every distinct tuple of
//! outputs that are prefixes of their targets (and not all empty), each
//! with a representative expression. Parameters that only matter through
//! the target (the replacement character of `Replace`, `Substitute`, ...)
//! are inferred from the target rather than enumerated, and substring
//! expressions are grouped by the positions they resolve to, so the search
//! is exhaustive over output tuples at a fraction of the enumeration cost.
//!
//! Representatives are the smallest expression in enumeration order among
//! those the search visits. For outputs of a single non-composed expression
//! that is the global minimum; composed expressions whose inner character
//! parameter never reaches the output are represented by one character per
//! character class.

use std::collections::HashMap;

use indexmap::IndexMap;

use super::outer::{Outer, View};
use super::regex::{find_matches_into, Span};
use super::{
    Boundary, Case, ComposeInner, Index, Modification, Position, RfChar, RfExpr, RfOpKind, RfRegex, Substring,
};

/// One distinct prefix tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Found {
    pub expr: RfExpr,
    /// Per-example output, a prefix of that example's target.
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchOutcome {
    /// Sorted by expression.
    pub found: Vec<Found>,
    /// The budget ran out; `found` is partial.
    pub truncated: bool,
}

/// Expression families in enumeration order; a search may stop after one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Family {
    Substring,
    Modification,
    Compose,
    Const,
}

fn family(e: &RfExpr) -> Family {
    match e {
        RfExpr::Substring(_) => Family::Substring,
        RfExpr::Modification(_) => Family::Modification,
        RfExpr::Compose(..) => Family::Compose,
        RfExpr::ConstStr(_) => Family::Const,
    }
}

type Tuple = Vec<Vec<char>>;

struct Searcher {
    xs: Vec<Vec<char>>,
    ts: Vec<Vec<char>>,
    /// `tables[e][r]`: matches of regex `r` in input `e`.
    tables: Vec<Vec<Vec<Span>>>,
    allowed: [bool; RfOpKind::ALL.len()],
    budget: u64,
    spent: u64,
    truncated: bool,
    found: HashMap<Vec<u32>, RfExpr>,
    chars: Vec<RfChar>,
}

fn is_prefix(out: &[char], target: &[char]) -> bool {
    out.len() <= target.len() && target[..out.len()] == *out
}

fn kind_slot(k: RfOpKind) -> usize {
    RfOpKind::ALL.iter().position(|x| *x == k).expect("kind listed")
}

/// Characters a replacement parameter may usefully take: those in the
/// targets (and their other case), plus one per character class.
fn useful_chars(targets: &[Vec<char>]) -> Vec<RfChar> {
    let mut set = [false; RfChar::COUNT];
    for c in targets.iter().flatten() {
        for v in [*c, c.to_ascii_uppercase(), c.to_ascii_lowercase()] {
            if let Some(rc) = RfChar::from_char(v) {
                set[rc.index()] = true;
            }
        }
    }
    for c in ['A', 'a', '0'] {
        set[RfChar::from_char(c).expect("alphabet").index()] = true;
    }
    for d in RfChar::delimiters() {
        set[d.index()] = true;
    }
    RfChar::all().filter(|c| set[c.index()]).collect()
}

fn regex_index() -> impl Iterator<Item = (RfRegex, Index)> {
    RfRegex::all().flat_map(|r| Index::all().map(move |i| (r, i)))
}

impl Searcher {
    fn new(inputs: &[&str], targets: &[&str], allowed: &[RfOpKind], budget: Option<u64>) -> Searcher {
        let xs: Vec<Vec<char>> = inputs.iter().map(|s| s.chars().collect()).collect();
        let ts: Vec<Vec<char>> = targets.iter().map(|s| s.chars().collect()).collect();
        let tables = xs
            .iter()
            .map(|x| {
                RfRegex::all()
                    .map(|r| {
                        let mut m = Vec::new();
                        find_matches_into(r, x, &mut m);
                        m
                    })
                    .collect()
            })
            .collect();
        let mut flags = [false; RfOpKind::ALL.len()];
        for k in allowed {
            flags[kind_slot(*k)] = true;
        }
        let chars = useful_chars(&ts);
        Searcher {
            xs,
            ts,
            tables,
            allowed: flags,
            budget: budget.unwrap_or(u64::MAX),
            spent: 0,
            truncated: false,
            found: HashMap::new(),
            chars,
        }
    }

    fn allows(&self, k: RfOpKind) -> bool {
        self.allowed[kind_slot(k)]
    }

    fn n(&self) -> usize {
        self.xs.len()
    }

    /// Charges `units`; false once the budget is exhausted.
    fn charge(&mut self, units: u64) -> bool {
        if self.truncated {
            return false;
        }
        self.spent = self.spent.saturating_add(units);
        if self.spent > self.budget {
            self.truncated = true;
            return false;
        }
        true
    }

    fn record(&mut self, lens: Vec<u32>, expr: RfExpr) {
        if lens.iter().all(|&l| l == 0) {
            return;
        }
        self.found
            .entry(lens)
            .and_modify(|e| {
                if expr < *e {
                    *e = expr
                }
            })
            .or_insert(expr);
    }

    fn record_tuple_if_prefix(&mut self, outs: &Tuple, expr: RfExpr) {
        if outs.iter().zip(&self.ts).all(|(o, t)| is_prefix(o, t)) {
            let lens = outs.iter().map(|o| o.len() as u32).collect();
            self.record(lens, expr);
        }
    }

    fn substring_tuples(&mut self) -> Vec<(Vec<Span>, Substring)> {
        let mut out = Vec::new();
        let n = self.n();

        if self.xs.iter().all(|x| !x.is_empty()) {
            let mut groups: IndexMap<Vec<usize>, Position> = IndexMap::new();
            for k in Position::all() {
                let key: Vec<usize> = self.xs.iter().map(|x| k.resolve(x.len())).collect();
                groups.entry(key).or_insert(k);
            }
            for (p1, k1) in &groups {
                for (p2, k2) in &groups {
                    if (0..n).all(|e| p1[e] <= p2[e]) {
                        let spans = (0..n)
                            .map(|e| Span {
                                start: p1[e],
                                end: p2[e] + 1,
                            })
                            .collect();
                        out.push((spans, Substring::SubStr(*k1, *k2)));
                    }
                }
            }
        }

        let mut sides: IndexMap<Vec<usize>, (RfRegex, Index, Boundary)> = IndexMap::new();
        for (r, i) in regex_index() {
            let resolved: Option<Vec<Span>> = (0..n)
                .map(|e| {
                    let m = &self.tables[e][r.index()];
                    i.resolve(m.len()).map(|j| m[j])
                })
                .collect();
            let Some(spans) = resolved else { continue };
            for b in Boundary::ALL {
                let key = spans
                    .iter()
                    .map(|s| match b {
                        Boundary::Start => s.start,
                        Boundary::End => s.end,
                    })
                    .collect();
                sides.entry(key).or_insert((r, i, b));
            }
            out.push((
                (0..n)
                    .map(|e| Span {
                        start: 0,
                        end: spans[e].end,
                    })
                    .collect(),
                Substring::GetUpto(r, i),
            ));
            out.push((
                (0..n)
                    .map(|e| Span {
                        start: spans[e].end,
                        end: self.xs[e].len(),
                    })
                    .collect(),
                Substring::GetFrom(r, i),
            ));
            out.push((spans, Substring::GetToken(r, i)));
        }
        for (a, (r1, i1, b1)) in &sides {
            for (b, (r2, i2, b2)) in &sides {
                if (0..n).all(|e| a[e] <= b[e]) {
                    let spans = (0..n).map(|e| Span { start: a[e], end: b[e] }).collect();
                    out.push((spans, Substring::GetSpan(*r1, *i1, *b1, *r2, *i2, *b2)));
                }
            }
        }
        self.charge((out.len() * n) as u64);
        out
    }

    /// Evaluates a modification on input `e` using the precomputed tables.
    fn apply_on_input(&self, m: &Modification, e: usize) -> Option<Vec<char>> {
        let x = &self.xs[e];
        let table = |r: RfRegex| &self.tables[e][r.index()];
        let splice = |matches: &[Span], which: Option<usize>, with: Option<char>| {
            let mut out = Vec::with_capacity(x.len());
            let mut at = 0;
            for (j, s) in matches.iter().enumerate() {
                if which.is_some_and(|w| w != j) {
                    continue;
                }
                out.extend_from_slice(&x[at..s.start]);
                out.extend(with);
                at = s.end;
            }
            out.extend_from_slice(&x[at..]);
            out
        };
        Some(match *m {
            Modification::GetFirst(r, i) => {
                let ms = table(r);
                let j = i.resolve(ms.len())?;
                ms[..=j]
                    .iter()
                    .flat_map(|s| x[s.start..s.end].iter().copied())
                    .collect()
            }
            Modification::GetAll(r) => {
                let mut out = Vec::new();
                for (j, s) in table(r).iter().enumerate() {
                    if j > 0 {
                        out.push(' ');
                    }
                    out.extend_from_slice(&x[s.start..s.end]);
                }
                out
            }
            Modification::Substitute(r, i, c) => {
                let ms = table(r);
                let j = i.resolve(ms.len())?;
                splice(ms, Some(j), Some(c.as_char()))
            }
            Modification::SubstituteAll(r, c) => splice(table(r), None, Some(c.as_char())),
            Modification::Remove(r, i) => {
                let ms = table(r);
                let j = i.resolve(ms.len())?;
                splice(ms, Some(j), None)
            }
            Modification::RemoveAll(r) => splice(table(r), None, None),
            other => super::eval::apply_modification(&other, x).ok()?,
        })
    }

    /// Modifications of the input, with character parameters drawn from
    /// the useful set, in enumeration order.
    fn input_modifications(&self) -> Vec<Modification> {
        let present: Vec<RfChar> = RfChar::all()
            .filter(|c| self.xs.iter().any(|x| x.contains(&c.as_char())))
            .collect();
        let a = RfChar::from_char('A').expect("alphabet");
        let mut mods: Vec<Modification> = Case::ALL.into_iter().map(Modification::ToCase).collect();
        let mut replaces = vec![Modification::Replace(a, a)];
        for &c1 in &present {
            replaces.extend(
                self.chars
                    .iter()
                    .filter(|&&c2| c2 != c1)
                    .map(|&c2| Modification::Replace(c1, c2)),
            );
        }
        replaces.sort();
        replaces.dedup();
        mods.extend(replaces);
        mods.push(Modification::Trim);
        mods.extend(regex_index().map(|(r, i)| Modification::GetFirst(r, i)));
        mods.extend(RfRegex::all().map(Modification::GetAll));
        for (r, i) in regex_index() {
            mods.extend(self.chars.iter().map(|&c| Modification::Substitute(r, i, c)));
        }
        for r in RfRegex::all() {
            mods.extend(self.chars.iter().map(|&c| Modification::SubstituteAll(r, c)));
        }
        mods.extend(regex_index().map(|(r, i)| Modification::Remove(r, i)));
        mods.extend(RfRegex::all().map(Modification::RemoveAll));
        mods
    }

    fn run(&mut self, last: Family) {
        let n = self.n();
        let compose_mod = self.allows(RfOpKind::ComposeModification) && last >= Family::Compose;
        let compose_sub = self.allows(RfOpKind::ComposeSubstring) && last >= Family::Compose;
        let mut inner: HashMap<Tuple, ComposeInner> = HashMap::new();

        // Substrings.
        let any_direct_sub = RfOpKind::SUBSTRING.iter().any(|k| self.allows(*k));
        if any_direct_sub || compose_sub {
            let tuples = self.substring_tuples();
            let mut direct: HashMap<Vec<Span>, Substring> = HashMap::new();
            let mut for_inner: HashMap<Vec<Span>, Substring> = HashMap::new();
            for (spans, s) in tuples {
                if self.allows(s.kind()) {
                    direct
                        .entry(spans.clone())
                        .and_modify(|cur| *cur = (*cur).min(s))
                        .or_insert(s);
                }
                if compose_sub {
                    for_inner
                        .entry(spans)
                        .and_modify(|cur| *cur = (*cur).min(s))
                        .or_insert(s);
                }
            }
            for (spans, s) in direct {
                let outs: Tuple = (0..n)
                    .map(|e| self.xs[e][spans[e].start..spans[e].end].to_vec())
                    .collect();
                self.record_tuple_if_prefix(&outs, RfExpr::Substring(s));
            }
            if last == Family::Substring {
                return;
            }
            // Substring tuples precede modifications in enumeration order.
            let mut subs: Vec<(Tuple, Substring)> = for_inner
                .into_iter()
                .map(|(spans, s)| {
                    let t = (0..n)
                        .map(|e| self.xs[e][spans[e].start..spans[e].end].to_vec())
                        .collect();
                    (t, s)
                })
                .collect();
            subs.sort_by_key(|a| a.1);
            for (t, s) in subs {
                inner.entry(t).or_insert(ComposeInner::Substring(s));
            }
        } else if last == Family::Substring {
            return;
        }
        let any_direct_mod = RfOpKind::MODIFICATION.iter().any(|k| self.allows(*k));
        if any_direct_mod || compose_mod {
            self.modifications(&mut inner, compose_mod);
        }
        if last == Family::Modification {
            return;
        }

        if compose_mod || compose_sub {
            self.compose(&inner);
        }
        if last == Family::Compose {
            return;
        }

        if self.allows(RfOpKind::ConstStr) && self.charge(n as u64) {
            if let Some(&c0) = self.ts.first().and_then(|t| t.first()) {
                if let Some(c) = RfChar::from_char(c0) {
                    if self.ts.iter().all(|t| t.first() == Some(&c0)) {
                        self.record(vec![1; n], RfExpr::ConstStr(c));
                    }
                }
            }
        }
    }

    fn modifications(&mut self, inner: &mut HashMap<Tuple, ComposeInner>, compose_mod: bool) {
        let n = self.n();
        for m in self.input_modifications() {
            if !self.charge(n as u64) {
                return;
            }
            let direct = self.allows(m.kind());
            if !direct && !compose_mod {
                continue;
            }
            let Some(outs) = (0..n).map(|e| self.apply_on_input(&m, e)).collect::<Option<Tuple>>() else {
                continue;
            };
            if direct {
                self.record_tuple_if_prefix(&outs, RfExpr::Modification(m));
            }
            if compose_mod {
                inner.entry(outs).or_insert(ComposeInner::Modification(m));
            }
        }
    }

    fn compose(&mut self, inner: &HashMap<Tuple, ComposeInner>) {
        let n = self.n();
        let mut entries: Vec<(&Tuple, &ComposeInner)> = inner.iter().collect();
        entries.sort_by(|a, b| a.1.cmp(b.1));
        // Intermediate strings repeat across tuples; views cache their regex
        // matches, and outer candidates valid on the first example depend
        // only on its intermediate string.
        let ts = self.ts.clone();
        let mut views: Vec<Vec<View>> = (0..n).map(|_| Vec::new()).collect();
        let mut index: Vec<HashMap<&[char], usize>> = vec![HashMap::new(); n];
        let mut first: Vec<Vec<(Outer, u32)>> = Vec::new();
        let mut results: Vec<(Modification, Vec<u32>)> = Vec::new();
        let mut at = vec![0; n];
        for (u, rep) in entries {
            if !self.charge((n * RfRegex::COUNT) as u64) {
                return;
            }
            for e in 0..n {
                at[e] = *index[e].entry(&u[e]).or_insert_with(|| {
                    views[e].push(View::new(&u[e], &ts[e]));
                    views[e].len() - 1
                });
            }
            if at[0] == first.len() {
                let mut out = Vec::new();
                views[0][at[0]].candidates(&mut out);
                first.push(out);
            }
            let first = &first[at[0]];
            if first.is_empty() {
                continue;
            }
            let inner_direct = match rep {
                ComposeInner::Modification(m) => self.allows(m.kind()),
                ComposeInner::Substring(s) => self.allows(s.kind()),
            };
            let mut vs: Vec<&mut View> = views.iter_mut().zip(&at).map(|(v, &i)| &mut v[i]).collect();
            results.clear();
            Self::verify(first, &mut vs, !inner_direct, &mut results);
            let is_input = *u == self.xs;
            for (outer, lens) in results.drain(..) {
                // Applying a modification to the unchanged input is the
                // modification itself, which precedes any composition.
                if is_input && self.allows(outer.kind()) {
                    continue;
                }
                self.record(lens, RfExpr::Compose(outer, *rep));
            }
        }
    }

    /// Extends candidates valid on the first example to all examples.
    fn verify(
        first: &[(Outer, u32)],
        views: &mut [&mut View],
        want_identity: bool,
        out: &mut Vec<(Modification, Vec<u32>)>,
    ) {
        let n = views.len();
        if want_identity && views.iter().all(|v| v.is_prefix()) {
            let identity = Case::ALL
                .into_iter()
                .find(|&a| views.iter().all(|v| !v.case_changes(a)))
                .map(Modification::ToCase)
                .unwrap_or_else(|| {
                    let a = RfChar::from_char('A').expect("alphabet");
                    Modification::Replace(a, a)
                });
            out.push((identity, views.iter().map(|v| v.len()).collect()));
        }
        'candidates: for &(outer, len0) in first {
            let (m, from) = match outer {
                Outer::Known(m) => (m, 1),
                open => {
                    let Some(m) = (1..n).find_map(|e| views[e].resolve(open)) else {
                        continue;
                    };
                    // Earlier examples left the parameter open; recheck them.
                    (m, 0)
                }
            };
            let mut lens = vec![len0; n];
            for e in from..n {
                match views[e].check(&m) {
                    Some(l) => lens[e] = l,
                    None => continue 'candidates,
                }
            }
            let changes = match m {
                Modification::ToCase(a) => views.iter().any(|v| v.case_changes(a)),
                Modification::Trim => views.iter().zip(&lens).any(|(v, &l)| v.len() != l),
                Modification::RemoveAll(r) => views.iter_mut().any(|v| v.has_match(r)),
                _ => true,
            };
            if changes {
                out.push((m, lens));
            }
        }
    }

    fn finish(self) -> SearchOutcome {
        let ts = self.ts;
        let mut found: Vec<Found> = self
            .found
            .into_iter()
            .map(|(lens, expr)| Found {
                expr,
                outputs: lens
                    .iter()
                    .zip(&ts)
                    .map(|(&l, t)| t[..l as usize].iter().collect())
                    .collect(),
            })
            .collect();
        found.sort_by(|a, b| a.expr.cmp(&b.expr));
        SearchOutcome {
            found,
            truncated: self.truncated,
        }
    }
}

/// Every distinct tuple of per-example outputs that are prefixes of the
/// targets, not all empty, reachable by one expression of an allowed kind.
/// `budget` caps the work (roughly, per-example evaluations).
pub fn prefix_candidates(
    inputs: &[&str],
    targets: &[&str],
    allowed: &[RfOpKind],
    budget: Option<u64>,
) -> SearchOutcome {
    assert_eq!(inputs.len(), targets.len(), "one target per input");
    let mut s = Searcher::new(inputs, targets, allowed, budget);
    s.run(Family::Const);
    s.finish()
}

/// The representative expression the search reports for exactly these
/// outputs, looking no further in enumeration order than `bound`'s family.
/// Returns `None` when no expression up to that family produces them.
pub fn representative(inputs: &[&str], outputs: &[&str], bound: &RfExpr) -> Option<RfExpr> {
    let mut s = Searcher::new(inputs, outputs, &RfOpKind::ALL, None);
    s.run(family(bound));
    let full: Vec<u32> = s.ts.iter().map(|t| t.len() as u32).collect();
    s.found.get(&full).copied()
}
