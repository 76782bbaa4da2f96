//! The ingredient document format: JSON with rationals as strings, so exact
//! coefficients survive transport.
//!
//! Strict parsing (`parse_ingredient`) admits only documents whose content
//! passes `validate_ingredient`.  The lax variant builds the value as long
//! as each label satisfies its own axioms, leaving base defects to the
//! caller; tools that repair or transform files need that.

use serde::{Deserialize, Serialize};

use crate::base::{BaseDiagram, CutSign, Node};
use crate::coeff::{Coeff, Rational};
use crate::ingredients::{
    validate_parts, CompleteIngredient, IngredientFinding, IngredientReport, RawLabel,
};
use crate::jets::Jet2;
use crate::labels::{FocusLabel, LabelError};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("malformed document: {0}")]
    Structure(String),
    #[error("ingredient fails validation:\n{0}")]
    Invalid(IngredientReport),
}

#[derive(Serialize, Deserialize)]
struct DocRoot {
    version: u32,
    base: DocBase,
    labels: Vec<DocLabel>,
    k: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct DocBase {
    polygon: Vec<[String; 2]>,
    nodes: Vec<DocNode>,
}

#[derive(Serialize, Deserialize)]
struct DocNode {
    pos: [String; 2],
    mult: u32,
    eigen: [i64; 2],
    cut: String,
}

/// Jet coefficients are stored sparsely as (p, q, rational part, tau part);
/// the truncation order is explicit because equality is order-relative.
#[derive(Serialize, Deserialize)]
struct DocLabel {
    order: u32,
    s: Vec<Vec<(u32, u32, String, String)>>,
    g: Vec<Vec<Vec<(u32, u32, String, String)>>>,
}

fn rational_to_string(r: &Rational) -> String {
    r.to_string()
}

fn rational_from_string(s: &str, what: &str) -> Result<Rational, IoError> {
    s.parse()
        .map_err(|_| IoError::Structure(format!("{what}: `{s}` is not a rational p/q")))
}

fn coeff_entries(j: &Jet2) -> Result<Vec<(u32, u32, String, String)>, IoError> {
    let mut out = Vec::new();
    for ((p, q), c) in j.support() {
        if c.tau_degree() > 1 {
            return Err(IoError::Structure(format!(
                "coefficient of X^{p} Y^{q} has tau-degree {} and the document format stops at 1",
                c.tau_degree()
            )));
        }
        out.push((p, q, rational_to_string(c.rational_part()), rational_to_string(&c.tau_part())));
    }
    Ok(out)
}

fn jet_from_entries(
    order: u32,
    entries: &[(u32, u32, String, String)],
    what: &str,
) -> Result<Jet2, IoError> {
    let mut terms = Vec::new();
    for (p, q, rat, tau) in entries {
        let r = rational_from_string(rat, what)?;
        let t = rational_from_string(tau, what)?;
        terms.push(((*p, *q), Coeff::from_parts(r, t)));
    }
    Jet2::from_entries(order, terms)
        .map_err(|e| IoError::Structure(format!("{what}: {e}")))
}

fn base_to_doc(base: &BaseDiagram) -> DocBase {
    DocBase {
        polygon: base
            .polygon
            .iter()
            .map(|(x, y)| [rational_to_string(x), rational_to_string(y)])
            .collect(),
        nodes: base
            .nodes
            .iter()
            .map(|n| DocNode {
                pos: [rational_to_string(&n.pos.0), rational_to_string(&n.pos.1)],
                mult: n.mult,
                eigen: [n.eigen.0, n.eigen.1],
                cut: n.cut.to_string(),
            })
            .collect(),
    }
}

fn base_from_doc(doc: &DocBase) -> Result<BaseDiagram, IoError> {
    let mut polygon = Vec::new();
    for (i, [x, y]) in doc.polygon.iter().enumerate() {
        polygon.push((
            rational_from_string(x, &format!("polygon vertex {i}"))?,
            rational_from_string(y, &format!("polygon vertex {i}"))?,
        ));
    }
    let mut nodes = Vec::new();
    for (i, n) in doc.nodes.iter().enumerate() {
        let cut = match n.cut.as_str() {
            "+" => CutSign::Plus,
            "-" => CutSign::Minus,
            other => {
                return Err(IoError::Structure(format!(
                    "node {i}: cut must be \"+\" or \"-\", got `{other}`"
                )))
            }
        };
        nodes.push(Node {
            pos: (
                rational_from_string(&n.pos[0], &format!("node {i} position"))?,
                rational_from_string(&n.pos[1], &format!("node {i} position"))?,
            ),
            mult: n.mult,
            eigen: (n.eigen[0], n.eigen[1]),
            cut,
        });
    }
    Ok(BaseDiagram { polygon, nodes })
}

fn label_to_doc(raw: &RawLabel) -> Result<DocLabel, IoError> {
    let order = raw.s.first().map_or(0, |j| j.order());
    let mut s = Vec::new();
    for j in &raw.s {
        s.push(coeff_entries(j)?);
    }
    let mut g = Vec::new();
    for row in &raw.g {
        let mut out = Vec::new();
        for j in row {
            out.push(coeff_entries(j)?);
        }
        g.push(out);
    }
    Ok(DocLabel { order, s, g })
}

fn label_from_doc(doc: &DocLabel, node: usize) -> Result<RawLabel, IoError> {
    let mut s = Vec::new();
    for (u, entries) in doc.s.iter().enumerate() {
        s.push(jet_from_entries(doc.order, entries, &format!("label {node}, series {u}"))?);
    }
    let mut g = Vec::new();
    for (u, row) in doc.g.iter().enumerate() {
        let mut out = Vec::new();
        for (v, entries) in row.iter().enumerate() {
            out.push(jet_from_entries(
                doc.order,
                entries,
                &format!("label {node}, transition ({u},{v})"),
            )?);
        }
        g.push(out);
    }
    Ok(RawLabel { s, g })
}

fn root_from_text(text: &str) -> Result<DocRoot, IoError> {
    let root: DocRoot = serde_json::from_str(text).map_err(|e| IoError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if root.version != FORMAT_VERSION {
        return Err(IoError::Structure(format!(
            "unsupported version {}, this build reads {FORMAT_VERSION}",
            root.version
        )));
    }
    Ok(root)
}

/// Structural parse: base, unchecked labels, twisting indices.
pub fn parse_parts(text: &str) -> Result<(BaseDiagram, Vec<RawLabel>, Vec<i64>), IoError> {
    let root = root_from_text(text)?;
    let base = base_from_doc(&root.base)?;
    let mut labels = Vec::new();
    for (i, doc) in root.labels.iter().enumerate() {
        labels.push(label_from_doc(doc, i)?);
    }
    Ok((base, labels, root.k))
}

/// Only the base diagram of a document; label payloads are not interpreted.
pub fn parse_diagram(text: &str) -> Result<BaseDiagram, IoError> {
    let root = root_from_text(text)?;
    base_from_doc(&root.base)
}

/// Full strict parse: the result passes `validate_ingredient`, or the
/// aggregated report is returned as the error.
pub fn parse_ingredient(text: &str) -> Result<CompleteIngredient, IoError> {
    let (base, raw, k) = parse_parts(text)?;
    let report = validate_parts(&base, &raw, &k);
    if !report.is_valid() {
        return Err(IoError::Invalid(report));
    }
    let mut labels = Vec::new();
    for r in raw {
        labels.push(FocusLabel::new(r.s, r.g).expect("label axioms were just verified"));
    }
    Ok(CompleteIngredient { base, labels, k })
}

/// Lax parse for transforming tools: each label must satisfy its own axioms
/// (the result type demands it), but base defects and compatibility are the
/// caller's problem.
pub fn parse_ingredient_lax(text: &str) -> Result<CompleteIngredient, IoError> {
    let (base, raw, k) = parse_parts(text)?;
    let mut labels = Vec::new();
    for (i, r) in raw.into_iter().enumerate() {
        let label = FocusLabel::new(r.s, r.g).map_err(|e| {
            let findings = match e {
                LabelError::Shape(error) => {
                    vec![IngredientFinding::LabelShape { node: i, error }]
                }
                LabelError::Invalid(report) => report
                    .violations()
                    .iter()
                    .map(|v| IngredientFinding::Label { node: i, violation: v.clone() })
                    .collect(),
            };
            IoError::Invalid(IngredientReport::from_findings(findings))
        })?;
        labels.push(label);
    }
    Ok(CompleteIngredient { base, labels, k })
}

/// Serializes to the document format.  Coefficients of tau-degree 2 or more
/// have no representation there and error out.
pub fn serialize_ingredient(ing: &CompleteIngredient) -> Result<String, IoError> {
    let mut labels = Vec::new();
    for l in &ing.labels {
        labels.push(label_to_doc(&RawLabel::of(l))?);
    }
    let root = DocRoot {
        version: FORMAT_VERSION,
        base: base_to_doc(&ing.base),
        labels,
        k: ing.k.clone(),
    };
    let mut text = serde_json::to_string_pretty(&root)
        .map_err(|e| IoError::Structure(e.to_string()))?;
    text.push('\n');
    Ok(text)
}
