//! Text formats for matrices, channels and sequence families.
//!
//! Matrix: `{"dim": d, "entries": [[re, im], ...]}` with `d²` entries in
//! row-major order. Kraus operators may be rectangular; they carry
//! `"rows"` and `"cols"` instead of `"dim"`.
//!
//! Channel: `{"dimIn": d, "dimOut": e, "kraus": [matrix, ...]}`.
//!
//! Family: `{"kind": "jump", "c": 0.6931, "dim": 2}`,
//! `{"kind": "continuous", "dim": 3, "seed": 7}`, or
//! `{"kind": "custom", "terms": [{"n": 1, "rho": matrix, "sigma": matrix}, ...],
//! "limit": {"rho": matrix, "sigma": matrix}}` with an optional `"jump"`
//! (a number or `"inf"`).

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::channel::{pinching, random_channel, KrausOperation};
use crate::error::{Error, Result};
use crate::extended::ExtendedNonNegative;
use crate::operator::{CMatrix, HermitianMatrix, PositiveOperator, Projector, C64};
use crate::sequence::{make_continuous_family, make_jump_family, StateSequenceFamily};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixDoc {
    pub fn from_matrix(m: &CMatrix) -> Self {
        let (rows, cols) = m.shape();
        let entries = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| [m[(i, j)].re, m[(i, j)].im])
            .collect();
        if rows == cols {
            Self {
                dim: Some(rows),
                rows: None,
                cols: None,
                entries,
            }
        } else {
            Self {
                dim: None,
                rows: Some(rows),
                cols: Some(cols),
                entries,
            }
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        let (rows, cols) = match (self.dim, self.rows, self.cols) {
            (Some(d), None, None) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            (Some(d), Some(r), Some(c)) if r == d && c == d => (d, d),
            _ => return Err(parse("matrix needs either \"dim\" or both \"rows\" and \"cols\"")),
        };
        if self.entries.len() != rows * cols {
            return Err(parse(format!(
                "matrix of shape {rows}x{cols} needs {} entries, found {}",
                rows * cols,
                self.entries.len()
            )));
        }
        if self.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(parse("matrix entries must be finite"));
        }
        Ok(CMatrix::from_fn(rows, cols, |i, j| {
            let [re, im] = self.entries[i * cols + j];
            C64::new(re, im)
        }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    #[serde(rename = "dimIn")]
    pub dim_in: usize,
    #[serde(rename = "dimOut")]
    pub dim_out: usize,
    pub kraus: Vec<MatrixDoc>,
}

fn parse(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| parse(format!("{what}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| parse(format!("{}: {e}", path.display())))
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    from_json::<MatrixDoc>(text, "matrix")?.to_matrix()
}

/// Parses a matrix and checks it is a positive operator.
pub fn parse_positive(text: &str) -> Result<PositiveOperator> {
    let m = parse_matrix(text)?;
    PositiveOperator::new(HermitianMatrix::new(m)?)
}

pub fn parse_projector(text: &str) -> Result<Projector> {
    Projector::new(parse_matrix(text)?)
}

pub fn matrix_to_json(m: &CMatrix) -> String {
    serde_json::to_string(&MatrixDoc::from_matrix(m)).expect("matrix serializes")
}

pub fn parse_channel(text: &str) -> Result<KrausOperation> {
    let doc: ChannelDoc = from_json(text, "channel")?;
    let kraus = doc.kraus.iter().map(MatrixDoc::to_matrix).collect::<Result<Vec<_>>>()?;
    let op = KrausOperation::new(kraus)?;
    if op.dim_in() != doc.dim_in || op.dim_out() != doc.dim_out {
        return Err(parse(format!(
            "channel declares {}->{} but its Kraus operators map {}->{}",
            doc.dim_in,
            doc.dim_out,
            op.dim_in(),
            op.dim_out()
        )));
    }
    Ok(op)
}

pub fn channel_to_json(op: &KrausOperation) -> String {
    let doc = ChannelDoc {
        dim_in: op.dim_in(),
        dim_out: op.dim_out(),
        kraus: op.kraus().iter().map(MatrixDoc::from_matrix).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("channel serializes")
}

pub fn load_positive(path: &Path) -> Result<PositiveOperator> {
    parse_positive(&read(path)?)
}

pub fn load_channel(path: &Path) -> Result<KrausOperation> {
    parse_channel(&read(path)?)
}

pub fn load_family(path: &Path) -> Result<StateSequenceFamily> {
    parse_family(&read(path)?)
}

/// Resolves a channel id for operators on `dim` dimensions.
///
/// Ids: `identity`, `dephasing`, `depolarizing`, `amplitude-damping(γ)`
/// (qubits only), `random(dimOut,k)` (needs a seed), `pinching(path)` with
/// the projector in matrix format, or a path to a channel file.
pub fn resolve_channel(id: &str, dim: usize, seed: Option<u64>) -> Result<KrausOperation> {
    let id = id.trim();
    let (name, arg) = match id.split_once('(') {
        Some((name, rest)) => {
            let arg = rest
                .strip_suffix(')')
                .ok_or_else(|| parse(format!("unbalanced parentheses in channel id {id:?}")))?;
            (name.trim(), Some(arg.trim()))
        }
        None => (id, None),
    };
    let op = match (name, arg) {
        ("identity", None) => KrausOperation::identity(dim),
        ("dephasing", None) => KrausOperation::dephasing(dim),
        ("depolarizing", None) => KrausOperation::depolarizing(dim),
        ("amplitude-damping", Some(g)) => {
            let gamma: f64 = g
                .parse()
                .map_err(|_| parse(format!("amplitude-damping parameter {g:?} is not a number")))?;
            KrausOperation::amplitude_damping(gamma)?
        }
        ("random", Some(args)) => {
            let parts: Vec<&str> = args.split(',').map(str::trim).collect();
            let [dim_out, k] = parts.as_slice() else {
                return Err(parse(format!("random channel needs (dimOut,k), got ({args})")));
            };
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse(format!("{s:?} is not a non-negative integer")))
            };
            let seed = seed.ok_or_else(|| Error::InvalidArgument("random channels need a seed".into()))?;
            random_channel(dim, num(dim_out)?, num(k)?, seed)?
        }
        ("pinching", Some(path)) => pinching(&parse_projector(&read(Path::new(path))?)?),
        _ if arg.is_none() && Path::new(id).is_file() => load_channel(Path::new(id))?,
        _ => return Err(parse(format!("unknown channel id {id:?}"))),
    };
    if op.dim_in() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: op.dim_in(),
        });
    }
    Ok(op)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    rho: MatrixDoc,
    sigma: MatrixDoc,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TermDoc {
    n: usize,
    rho: MatrixDoc,
    sigma: MatrixDoc,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum FamilyDoc {
    Jump { c: f64, dim: usize },
    Continuous { dim: usize, seed: u64 },
    Custom {
        terms: Vec<TermDoc>,
        limit: PairDoc,
        #[serde(default)]
        jump: Option<Value>,
    },
}

fn positive(doc: &MatrixDoc) -> Result<PositiveOperator> {
    PositiveOperator::new(HermitianMatrix::new(doc.to_matrix()?)?)
}

pub fn parse_family(text: &str) -> Result<StateSequenceFamily> {
    match from_json::<FamilyDoc>(text, "family")? {
        FamilyDoc::Jump { c, dim } => make_jump_family(c, dim),
        FamilyDoc::Continuous { dim, seed } => make_continuous_family(dim, seed),
        FamilyDoc::Custom { terms, limit, jump } => {
            let mut map = BTreeMap::new();
            for t in &terms {
                if t.n == 0 {
                    return Err(parse("custom terms start at n = 1; the limit is given separately"));
                }
                if map.insert(t.n, (positive(&t.rho)?, positive(&t.sigma)?)).is_some() {
                    return Err(parse(format!("term n = {} listed twice", t.n)));
                }
            }
            let jump = match jump {
                None => None,
                Some(Value::String(s)) if s == "inf" => Some(ExtendedNonNegative::PositiveInfinity),
                Some(Value::Number(x)) => {
                    let x = x.as_f64().filter(|x| *x >= 0.0 && x.is_finite()).ok_or_else(|| {
                        parse("jump must be a non-negative number or \"inf\"")
                    })?;
                    Some(ExtendedNonNegative::Finite(x))
                }
                Some(_) => return Err(parse("jump must be a non-negative number or \"inf\"")),
            };
            StateSequenceFamily::custom(map, (positive(&limit.rho)?, positive(&limit.sigma)?), jump)
        }
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| parse(format!("line {}: expected key=value", i + 1)))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(parse(format!("line {}: empty key", i + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(i as f64, -(j as f64)));
        assert_eq!(parse_matrix(&matrix_to_json(&m)).unwrap(), m);
        let sq = CMatrix::identity(2, 2);
        assert!(matrix_to_json(&sq).contains("\"dim\":2"));
    }

    #[test]
    fn malformed_matrices() {
        for bad in [
            "",
            "{",
            r#"{"dim": 2, "entries": [[1, 0]]}"#,
            r#"{"dim": 1, "entries": [[1]]}"#,
            r#"{"entries": [[1, 0]]}"#,
            r#"{"dim": 1, "entries": [[1, 0]], "extra": 1}"#,
        ] {
            assert!(matches!(parse_matrix(bad), Err(Error::Parse(_))), "{bad}");
        }
        let not_psd = r#"{"dim": 1, "entries": [[-1, 0]]}"#;
        assert!(matches!(parse_positive(not_psd), Err(Error::NotPositive { .. })));
    }

    #[test]
    fn channel_round_trip_and_ids() {
        let ch = KrausOperation::amplitude_damping(0.3).unwrap();
        assert_eq!(parse_channel(&channel_to_json(&ch)).unwrap(), ch);
        assert_eq!(resolve_channel("identity", 3, None).unwrap(), KrausOperation::identity(3));
        assert_eq!(resolve_channel("amplitude-damping(0.3)", 2, None).unwrap(), ch);
        assert!(resolve_channel("random(3,2)", 2, None).is_err());
        let a = resolve_channel("random(3, 2)", 2, Some(9)).unwrap();
        assert_eq!(a, random_channel(2, 3, 2, 9).unwrap());
        assert!(matches!(resolve_channel("warp", 2, None), Err(Error::Parse(_))));
        assert!(resolve_channel("amplitude-damping(0.3)", 3, None).is_err());
    }

    #[test]
    fn families() {
        let f = parse_family(r#"{"kind": "jump", "c": 0.5, "dim": 2}"#).unwrap();
        assert_eq!(f, make_jump_family(0.5, 2).unwrap());
        let g = parse_family(r#"{"kind": "continuous", "dim": 3, "seed": 7}"#).unwrap();
        assert_eq!(g, make_continuous_family(3, 7).unwrap());
        let custom = r#"{"kind": "custom",
            "terms": [{"n": 1, "rho": {"dim": 1, "entries": [[1, 0]]}, "sigma": {"dim": 1, "entries": [[2, 0]]}}],
            "limit": {"rho": {"dim": 1, "entries": [[1, 0]]}, "sigma": {"dim": 1, "entries": [[1, 0]]}},
            "jump": "inf"}"#;
        let h = parse_family(custom).unwrap();
        assert_eq!(h.analytic_jump(), Some(ExtendedNonNegative::PositiveInfinity));
        assert!(parse_family(r#"{"kind": "jump", "c": -1, "dim": 2}"#).is_err());
        assert!(matches!(parse_family(r#"{"kind": "spiral"}"#), Err(Error::Parse(_))));
    }

    #[test]
    fn key_values() {
        let kv = parse_key_values("seed = 4\n# comment\n n_max=10 # trailing\n").unwrap();
        assert_eq!(kv["seed"], "4");
        assert_eq!(kv["n_max"], "10");
        assert!(parse_key_values("novalue").is_err());
    }
}
