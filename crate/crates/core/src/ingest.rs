//! Externally computed Mordell–Weil ranks, read from `A,B,rank` CSV files.
//!
//! Ranks are never computed here. Input is untrusted: every row is checked
//! against the curve invariants and conflicting duplicates are rejected.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use crate::curves::CurveModel;
use crate::error::{Error, Result};

/// Provenance note attached to census output: rank-1 densities are only
/// known conditionally on finiteness of Sha.
pub const SHA_PROVENANCE: &str = "rank data is external; rank-1 density statements assume Sha(E/Q) is finite";

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankTable {
    ranks: BTreeMap<CurveModel, u32>,
}

impl RankTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `None` means the rank is unknown.
    pub fn get(&self, c: &CurveModel) -> Option<u32> {
        self.ranks.get(c).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&CurveModel, &u32)> {
        self.ranks.iter()
    }

    pub fn rank_one_count(&self) -> usize {
        self.ranks.values().filter(|&&r| r == 1).count()
    }

    /// Idempotent on equal duplicates.
    pub fn insert(&mut self, c: CurveModel, rank: u32) -> std::result::Result<(), u32> {
        match self.ranks.get(&c) {
            Some(&old) if old != rank => Err(old),
            _ => {
                self.ranks.insert(c, rank);
                Ok(())
            }
        }
    }
}

impl FromIterator<(CurveModel, u32)> for RankTable {
    fn from_iter<I: IntoIterator<Item = (CurveModel, u32)>>(iter: I) -> Self {
        Self {
            ranks: iter.into_iter().collect(),
        }
    }
}

pub fn load_rank_csv(path: impl AsRef<Path>) -> Result<RankTable> {
    let file = std::fs::File::open(path)?;
    parse_rank_csv(file)
}

/// Line numbers in errors are 1-based file lines (the header is line 1).
pub fn parse_rank_csv<R: Read>(input: R) -> Result<RankTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers().map_err(|e| Error::ParseError {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.iter().collect::<Vec<_>>() != ["A", "B", "rank"] {
        return Err(Error::ParseError {
            line: 1,
            msg: format!(
                "expected header `A,B,rank`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut table = RankTable::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::ParseError {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(Error::ParseError {
                line,
                msg: format!("expected 3 fields, found {}", row.len()),
            });
        }
        let field = |i: usize| -> Result<i64> {
            row[i].parse::<i64>().map_err(|e| Error::ParseError {
                line,
                msg: format!("field {} `{}`: {e}", i + 1, &row[i]),
            })
        };
        let (a, b) = (field(0)?, field(1)?);
        let rank: u32 = row[2].parse().map_err(|e| Error::ParseError {
            line,
            msg: format!("rank `{}`: {e}", &row[2]),
        })?;
        let curve = CurveModel::new(a, b).map_err(|_| Error::InvalidCurveRow { line, a, b })?;
        table.insert(curve, rank).map_err(|old| Error::ConflictingRank {
            line,
            a,
            b,
            left: old,
            right: rank,
        })?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RankTable> {
        parse_rank_csv(s.as_bytes())
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse("A,B,rank\n").unwrap().is_empty());
    }

    #[test]
    fn malformed_rank() {
        let err = parse("A,B,rank\n1,1,?\n").unwrap_err();
        assert!(matches!(err, Error::ParseError { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn conflicting_rank() {
        let err = parse("A,B,rank\n1,0,0\n1,0,1\n").unwrap_err();
        assert!(
            matches!(
                err,
                Error::ConflictingRank {
                    line: 3,
                    left: 0,
                    right: 1,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn duplicate_equal_rank_is_idempotent() {
        let t = parse("A,B,rank\n1,0,0\n1,0,0\n-1,1,1\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.get(&CurveModel::new(1, 0).unwrap()), Some(0));
        assert_eq!(t.get(&CurveModel::new(-1, 1).unwrap()), Some(1));
        assert_eq!(t.get(&CurveModel::new(2, 2).unwrap()), None);
        assert_eq!(t.rank_one_count(), 1);
    }

    #[test]
    fn invalid_curves_rejected() {
        assert!(matches!(
            parse("A,B,rank\n-3,2,0\n"),
            Err(Error::InvalidCurveRow { line: 2, .. })
        ));
        assert!(matches!(
            parse("A,B,rank\n16,64,0\n"),
            Err(Error::InvalidCurveRow { .. })
        ));
        assert!(matches!(parse("A,B,rank\n1,1,-1\n"), Err(Error::ParseError { .. })));
        assert!(matches!(parse("A,B\n1,1\n"), Err(Error::ParseError { line: 1, .. })));
        assert!(matches!(
            parse("A,B,rank\n1,1\n"),
            Err(Error::ParseError { line: 2, .. })
        ));
    }
}
