//! JSON file formats for games, distributions and regret reports.
//!
//! Numbers are written in shortest round-trip form, so decoding an encoded
//! value reproduces it bit for bit. Decoding errors carry the path of the
//! offending field, e.g. `payoffs.0,1[2]` or `aggregator.formula.args[1]`.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};

use crate::equilibrium::{Deviation, JointDistribution, MixtureDistribution, RegretEntry, RegretReport};
use crate::error::{Error, Result};
use crate::game::{
    Aggregator, ExplicitDistribution, Formula, PayoffMatrix, PolymatrixGame, ProductDistribution, StrategyProfile,
};

fn decode<T: DeserializeOwned>(bytes: &[u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        Error::parse(path, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| Error::parse(".", e.to_string()))?;
    Ok(value)
}

fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec(value).expect("in-memory JSON encoding");
    out.push(b'\n');
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    n: usize,
    strategy_counts: Vec<usize>,
    aggregator: AggregatorFile,
    #[serde(serialize_with = "payoffs_in_player_order")]
    payoffs: BTreeMap<String, Vec<Vec<f64>>>,
}

// keys sort as (p, q) numerically rather than as strings
fn payoffs_in_player_order<S: Serializer>(
    payoffs: &BTreeMap<String, Vec<Vec<f64>>>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let mut keyed: Vec<_> = payoffs.iter().map(|(k, v)| (parse_pair(k), k, v)).collect();
    keyed.sort_by_key(|(pair, _, _)| *pair);
    let mut map = serializer.serialize_map(Some(keyed.len()))?;
    for (_, k, v) in keyed {
        map.serialize_entry(k, v)?;
    }
    map.end()
}

fn parse_pair(key: &str) -> Option<(usize, usize)> {
    let (p, q) = key.split_once(',')?;
    Some((p.trim().parse().ok()?, q.trim().parse().ok()?))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum AggregatorFile {
    Sum,
    Max,
    Min,
    SortedLinear { coeffs: Vec<f64> },
    BooleanFormula { formula: FormulaNode },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FormulaNode {
    #[serde(skip_serializing_if = "Option::is_none")]
    op: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    args: Option<Vec<FormulaNode>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    var: Option<usize>,
}

impl FormulaNode {
    fn from_formula(f: &Formula) -> Self {
        let node = |op: &str, args: Vec<FormulaNode>| FormulaNode {
            op: Some(op.into()),
            args: Some(args),
            var: None,
        };
        match f {
            Formula::Var(k) => FormulaNode {
                op: None,
                args: None,
                var: Some(*k),
            },
            Formula::Not(inner) => node("not", vec![Self::from_formula(inner)]),
            Formula::And(args) => node("and", args.iter().map(Self::from_formula).collect()),
            Formula::Or(args) => node("or", args.iter().map(Self::from_formula).collect()),
        }
    }

    fn into_formula(self, path: &str) -> Result<Formula> {
        match (self.op, self.args, self.var) {
            (None, None, Some(k)) => Ok(Formula::Var(k)),
            (Some(op), Some(args), None) => {
                let mut children = args
                    .into_iter()
                    .enumerate()
                    .map(|(k, a)| a.into_formula(&format!("{path}.args[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                match op.as_str() {
                    "and" => Ok(Formula::And(children)),
                    "or" => Ok(Formula::Or(children)),
                    "not" if children.len() == 1 => Ok(Formula::Not(Box::new(children.remove(0)))),
                    "not" => Err(Error::parse(
                        format!("{path}.args"),
                        format!("`not` takes one argument, found {}", children.len()),
                    )),
                    other => Err(Error::parse(
                        format!("{path}.op"),
                        format!("unknown operator `{other}`, expected one of `and`, `or`, `not`"),
                    )),
                }
            }
            _ => Err(Error::parse(
                path,
                "expected either {\"var\": int} or {\"op\": ..., \"args\": [...]}",
            )),
        }
    }
}

/// Serializes a game as UTF-8 JSON.
pub fn encode_game(game: &PolymatrixGame) -> Vec<u8> {
    let aggregator = match game.aggregator() {
        Aggregator::Sum => AggregatorFile::Sum,
        Aggregator::Max => AggregatorFile::Max,
        Aggregator::Min => AggregatorFile::Min,
        Aggregator::SortedLinear(coeffs) => AggregatorFile::SortedLinear { coeffs: coeffs.clone() },
        Aggregator::BooleanFormula(f) => AggregatorFile::BooleanFormula {
            formula: FormulaNode::from_formula(f),
        },
    };
    let payoffs = game
        .matrices()
        .map(|((p, q), m)| (format!("{p},{q}"), m.to_rows()))
        .collect();
    encode(&GameFile {
        n: game.n(),
        strategy_counts: game.strategy_counts().to_vec(),
        aggregator,
        payoffs,
    })
}

/// Parses and validates a game file.
pub fn decode_game(bytes: &[u8]) -> Result<PolymatrixGame> {
    let file: GameFile = decode(bytes)?;
    if file.n != file.strategy_counts.len() {
        return Err(Error::parse(
            "n",
            format!(
                "n = {} but {} strategy counts given",
                file.n,
                file.strategy_counts.len()
            ),
        ));
    }
    let aggregator = match file.aggregator {
        AggregatorFile::Sum => Aggregator::Sum,
        AggregatorFile::Max => Aggregator::Max,
        AggregatorFile::Min => Aggregator::Min,
        AggregatorFile::SortedLinear { coeffs } => Aggregator::SortedLinear(coeffs),
        AggregatorFile::BooleanFormula { formula } => {
            Aggregator::BooleanFormula(formula.into_formula("aggregator.formula")?)
        }
    };
    let mut matrices = Vec::with_capacity(file.payoffs.len());
    for (key, rows) in file.payoffs {
        let path = format!("payoffs.{key}");
        let (p, q) = parse_pair(&key).ok_or_else(|| Error::parse(&path, "key must be \"p,q\""))?;
        if p >= file.n || q >= file.n || p == q {
            return Err(Error::parse(
                &path,
                format!("no ordered pair ({p},{q}) among {} players", file.n),
            ));
        }
        let matrix = PayoffMatrix::from_rows(rows).map_err(|e| Error::parse(&path, e.to_string()))?;
        matrices.push(((p, q), matrix));
    }
    PolymatrixGame::new(file.strategy_counts, matrices, aggregator)
}

/// Parses a formula AST on its own, as it appears under `aggregator.formula`.
pub fn decode_formula(bytes: &[u8]) -> Result<Formula> {
    decode::<FormulaNode>(bytes)?.into_formula(".")
}

pub fn encode_formula(f: &Formula) -> Vec<u8> {
    encode(&FormulaNode::from_formula(f))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductFile {
    marginals: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Atom {
    profile: Vec<usize>,
    prob: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitFile {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Component {
    weight: f64,
    marginals: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    components: Vec<Component>,
}

pub fn encode_product(x: &ProductDistribution) -> Vec<u8> {
    encode(&ProductFile {
        marginals: x.marginals().to_vec(),
    })
}

pub fn decode_product(bytes: &[u8]) -> Result<ProductDistribution> {
    let file: ProductFile = decode(bytes)?;
    ProductDistribution::new(file.marginals)
}

pub fn encode_explicit(d: &ExplicitDistribution) -> Vec<u8> {
    let atoms = d
        .atoms()
        .map(|(s, prob)| Atom {
            profile: s.0.clone(),
            prob,
        })
        .collect();
    encode(&ExplicitFile { atoms })
}

pub fn decode_explicit(bytes: &[u8]) -> Result<ExplicitDistribution> {
    let file: ExplicitFile = decode(bytes)?;
    ExplicitDistribution::new(file.atoms.into_iter().map(|a| (StrategyProfile(a.profile), a.prob)))
}

pub fn encode_mixture(m: &MixtureDistribution) -> Vec<u8> {
    let components = m
        .components()
        .map(|(weight, x)| Component {
            weight,
            marginals: x.marginals().to_vec(),
        })
        .collect();
    encode(&MixtureFile { components })
}

pub fn decode_mixture(bytes: &[u8]) -> Result<MixtureDistribution> {
    let file: MixtureFile = decode(bytes)?;
    let components = file
        .components
        .into_iter()
        .map(|c| Ok((c.weight, ProductDistribution::new(c.marginals)?)))
        .collect::<Result<Vec<_>>>()?;
    MixtureDistribution::new(components)
}

/// Reads any of the three distribution files, telling them apart by their
/// top-level key. A product distribution becomes a one-component mixture.
pub fn decode_distribution(bytes: &[u8]) -> Result<JointDistribution> {
    let value: serde_json::Value = decode(bytes)?;
    let key = value.as_object().and_then(|o| {
        ["marginals", "atoms", "components"]
            .into_iter()
            .find(|k| o.contains_key(*k))
    });
    match key {
        Some("marginals") => Ok(decode_product(bytes)?.into()),
        Some("atoms") => Ok(decode_explicit(bytes)?.into()),
        Some("components") => Ok(decode_mixture(bytes)?.into()),
        _ => Err(Error::parse(
            ".",
            "expected a `marginals`, `atoms` or `components` field",
        )),
    }
}

pub fn encode_distribution(d: &JointDistribution) -> Vec<u8> {
    match d {
        JointDistribution::Explicit(d) => encode_explicit(d),
        JointDistribution::Mixture(m) => encode_mixture(m),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportFile {
    entries: Vec<EntryFile>,
    max_violation: f64,
    witness: Option<DeviationFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryFile {
    p: usize,
    i: usize,
    j: usize,
    g: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviationFile {
    p: usize,
    i: usize,
    j: usize,
}

pub fn encode_report(report: &RegretReport) -> Vec<u8> {
    encode(&ReportFile {
        entries: report
            .entries
            .iter()
            .map(|e| EntryFile {
                p: e.p,
                i: e.i,
                j: e.j,
                g: e.g,
            })
            .collect(),
        max_violation: report.max_violation,
        witness: report.witness.map(|d| DeviationFile { p: d.p, i: d.i, j: d.j }),
    })
}

/// Parses a report. The violation and witness are recomputed from the entries.
pub fn decode_report(bytes: &[u8]) -> Result<RegretReport> {
    let file: ReportFile = decode(bytes)?;
    let report = RegretReport::from_entries(
        file.entries
            .into_iter()
            .map(|e| RegretEntry {
                p: e.p,
                i: e.i,
                j: e.j,
                g: e.g,
            })
            .collect(),
    );
    if let Some(w) = file.witness {
        if report.witness != Some(Deviation { p: w.p, i: w.i, j: w.j }) {
            return Err(Error::parse("witness", "does not match the smallest entry"));
        }
    }
    Ok(report)
}
