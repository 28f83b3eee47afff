use thiserror::Error;

use super::{
    Boundary, Case, ComposeInner, Index, Modification, Position, RfChar, RfExpr, RfOpKind, RfRegex, Substring,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("the allowed operation set is empty")]
    NoOperations,
}

fn regex_index() -> impl Iterator<Item = (RfRegex, Index)> + Clone {
    RfRegex::all().flat_map(|r| Index::all().map(move |i| (r, i)))
}

fn regex_index_boundary() -> impl Iterator<Item = (RfRegex, Index, Boundary)> + Clone {
    regex_index().flat_map(|(r, i)| Boundary::ALL.into_iter().map(move |b| (r, i, b)))
}

/// Every substring expression in enumeration order.
pub fn all_substrings() -> impl Iterator<Item = Substring> + Clone {
    let substr = Position::all().flat_map(|k1| Position::all().map(move |k2| Substring::SubStr(k1, k2)));
    let span = regex_index_boundary().flat_map(|(r1, i1, b1)| {
        regex_index_boundary().map(move |(r2, i2, b2)| Substring::GetSpan(r1, i1, b1, r2, i2, b2))
    });
    regex_index()
        .map(|(r, i)| Substring::GetToken(r, i))
        .chain(regex_index().map(|(r, i)| Substring::GetUpto(r, i)))
        .chain(regex_index().map(|(r, i)| Substring::GetFrom(r, i)))
        .chain(substr)
        .chain(span)
}

/// Every modification in enumeration order.
pub fn all_modifications() -> impl Iterator<Item = Modification> + Clone {
    Case::ALL
        .into_iter()
        .map(Modification::ToCase)
        .chain(RfChar::all().flat_map(|a| RfChar::all().map(move |b| Modification::Replace(a, b))))
        .chain(std::iter::once(Modification::Trim))
        .chain(regex_index().map(|(r, i)| Modification::GetFirst(r, i)))
        .chain(RfRegex::all().map(Modification::GetAll))
        .chain(regex_index().flat_map(|(r, i)| RfChar::all().map(move |c| Modification::Substitute(r, i, c))))
        .chain(RfRegex::all().flat_map(|r| RfChar::all().map(move |c| Modification::SubstituteAll(r, c))))
        .chain(regex_index().map(|(r, i)| Modification::Remove(r, i)))
        .chain(RfRegex::all().map(Modification::RemoveAll))
}

/// Streams well-formed expressions of the allowed kinds in enumeration
/// order, stopping after `max_candidates`.
pub fn enumerate_expressions(
    allowed: &[RfOpKind],
    max_candidates: usize,
) -> Result<impl Iterator<Item = RfExpr>, EnumerateError> {
    if allowed.is_empty() {
        return Err(EnumerateError::NoOperations);
    }
    let allowed = allowed.to_vec();
    let ok = move |k: RfOpKind| allowed.contains(&k);
    let ok1 = ok.clone();
    let ok2 = ok.clone();
    let ok3 = ok.clone();
    let ok4 = ok.clone();
    let compose_mod = ok(RfOpKind::ComposeModification);
    let compose_sub = ok(RfOpKind::ComposeSubstring);
    let inner = all_substrings()
        .filter(move |_| compose_sub)
        .map(ComposeInner::Substring)
        .chain(
            all_modifications()
                .filter(move |_| compose_mod)
                .map(ComposeInner::Modification),
        );
    let outer = all_modifications().filter(move |_| compose_mod || compose_sub);
    let stream = all_substrings()
        .filter(move |s| ok1(s.kind()))
        .map(RfExpr::Substring)
        .chain(
            all_modifications()
                .filter(move |m| ok2(m.kind()))
                .map(RfExpr::Modification),
        )
        .chain(outer.flat_map(move |o| inner.clone().map(move |i| RfExpr::Compose(o, i))))
        .chain(
            RfChar::all()
                .filter(move |_| ok3(RfOpKind::ConstStr))
                .map(RfExpr::ConstStr),
        )
        .filter(move |e| ok4(e.kind()));
    Ok(stream.take(max_candidates))
}
