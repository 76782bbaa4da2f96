//! Complete ingredients: a base diagram together with one focus-focus label
//! and one twisting index per node, their equivalence, and the partial
//! action of permutations and sign flips.

use crate::base::{find_iso, validate_diagram, verify_iso, AffineIso, BaseDiagram, DiagramFinding};
use crate::jets::Jet2;
use crate::labels::{
    flip_label, labels_equal, verify_label, FocusLabel, LabelShapeError, LabelViolation,
};

/// Label data before the axioms have been checked, as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawLabel {
    pub s: Vec<Jet2>,
    pub g: Vec<Vec<Jet2>>,
}

impl RawLabel {
    pub fn of(label: &FocusLabel) -> RawLabel {
        RawLabel {
            s: label.series().iter().map(|a| a.rep().clone()).collect(),
            g: label.transitions().to_vec(),
        }
    }
}

/// A marked base diagram with its per-node labels and twisting indices.
/// Node order is data: slot i of every list describes node i.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompleteIngredient {
    pub base: BaseDiagram,
    pub labels: Vec<FocusLabel>,
    pub k: Vec<i64>,
}

/// Signs and the externally supplied twisting-index offsets for `act_sign`.
///
/// The offsets are inputs rather than computed values: the source definition
/// expresses them through reference systems that are never constructed here,
/// so each caller must say what offset convention it wants.  Zero is the
/// involutive choice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    pub sigma: Vec<i8>,
    pub delta_k: Vec<i64>,
}

impl SignVector {
    pub fn new(sigma: Vec<i8>, delta_k: Vec<i64>) -> Result<Self, IngredientError> {
        let sv = SignVector { sigma, delta_k };
        sv.check()?;
        Ok(sv)
    }

    /// All `+1`, zero offsets: the trivial action.
    pub fn identity(f: usize) -> Self {
        SignVector { sigma: vec![1; f], delta_k: vec![0; f] }
    }

    fn check(&self) -> Result<(), IngredientError> {
        if self.sigma.len() != self.delta_k.len() {
            return Err(IngredientError::SignLengthMismatch {
                sigma: self.sigma.len(),
                delta_k: self.delta_k.len(),
            });
        }
        if let Some(&s) = self.sigma.iter().find(|s| s.abs() != 1) {
            return Err(IngredientError::InvalidSign { value: s });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngredientError {
    #[error("rho is not a permutation of 0..{f}")]
    NotAPermutation { f: usize },
    #[error("sign vector lengths differ: {sigma} signs, {delta_k} offsets")]
    SignLengthMismatch { sigma: usize, delta_k: usize },
    #[error("sign entries must be +1 or -1, got {value}")]
    InvalidSign { value: i8 },
    #[error("ingredient has {expected} nodes but the argument has length {got}")]
    WrongLength { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum IngredientFinding {
    #[error("base: {0}")]
    Diagram(DiagramFinding),
    #[error("node {node} label: {violation}")]
    Label { node: usize, violation: LabelViolation },
    #[error("node {node} label: {error}")]
    LabelShape { node: usize, error: LabelShapeError },
    #[error("{nodes} nodes but {labels} labels and {k} twisting indices")]
    LengthMismatch { nodes: usize, labels: usize, k: usize },
    #[error("node {node} has multiplicity {node_mult} but its label has {label_mult}")]
    MultiplicityMismatch { node: usize, node_mult: u32, label_mult: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngredientReport {
    findings: Vec<IngredientFinding>,
}

impl IngredientReport {
    pub(crate) fn from_findings(findings: Vec<IngredientFinding>) -> Self {
        IngredientReport { findings }
    }

    pub fn is_valid(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn findings(&self) -> &[IngredientFinding] {
        &self.findings
    }
}

impl std::fmt::Display for IngredientReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.findings.is_empty() {
            return f.write_str("ingredient is valid");
        }
        writeln!(f, "{} finding(s):", self.findings.len())?;
        for x in &self.findings {
            writeln!(f, "  - {x}")?;
        }
        Ok(())
    }
}

/// Checks the base diagram, every label, and the compatibility between the
/// two: label i must have the multiplicity of node i.  All findings are
/// aggregated; nothing errors.
pub fn validate_ingredient(ing: &CompleteIngredient) -> IngredientReport {
    // Labels were validated at construction; re-deriving the report keeps one
    // code path with file inputs, where nothing is pre-validated.
    let raw: Vec<RawLabel> = ing.labels.iter().map(RawLabel::of).collect();
    validate_parts(&ing.base, &raw, &ing.k)
}

/// The same aggregation over unchecked label data.
pub fn validate_parts(base: &BaseDiagram, labels: &[RawLabel], k: &[i64]) -> IngredientReport {
    let mut findings = Vec::new();
    for f in validate_diagram(base).findings() {
        findings.push(IngredientFinding::Diagram(f.clone()));
    }
    let nodes = base.nodes.len();
    if labels.len() != nodes || k.len() != nodes {
        findings.push(IngredientFinding::LengthMismatch {
            nodes,
            labels: labels.len(),
            k: k.len(),
        });
    }
    for (i, label) in labels.iter().enumerate() {
        let m = label.s.len();
        match verify_label(m, &label.s, &label.g) {
            Ok(report) => {
                for v in report.violations() {
                    findings.push(IngredientFinding::Label { node: i, violation: v.clone() });
                }
            }
            Err(error) => findings.push(IngredientFinding::LabelShape { node: i, error }),
        }
        if let Some(node) = base.nodes.get(i) {
            if m != node.mult as usize {
                findings.push(IngredientFinding::MultiplicityMismatch {
                    node: i,
                    node_mult: node.mult,
                    label_mult: m,
                });
            }
        }
    }
    IngredientReport { findings }
}

/// Equivalence of complete ingredients: an affine isomorphism of the marked
/// bases carrying labels and twisting indices unchanged.  Returns a witness,
/// or `None` when no witness exists within the search bound; for matching
/// invariants this is never a proof of inequivalence.  Both ingredients are
/// assumed valid.
pub fn ingredients_equivalent(
    a: &CompleteIngredient,
    b: &CompleteIngredient,
    bound: i64,
) -> Option<AffineIso> {
    if a.k != b.k || a.labels.len() != b.labels.len() {
        return None;
    }
    if !a.labels.iter().zip(&b.labels).all(|(x, y)| labels_equal(x, y)) {
        return None;
    }
    let g = find_iso(&a.base, &b.base, bound)?;
    debug_assert!(verify_iso(&a.base, &b.base, &g));
    Some(g)
}

/// Reindexes nodes, labels, and twisting indices simultaneously: slot i of
/// the result is slot `rho[i]` of the input.
pub fn act_perm(
    rho: &[usize],
    ing: &CompleteIngredient,
) -> Result<CompleteIngredient, IngredientError> {
    let f = ing.base.nodes.len();
    if rho.len() != f {
        return Err(IngredientError::WrongLength { expected: f, got: rho.len() });
    }
    let mut seen = vec![false; f];
    for &j in rho {
        if j >= f || seen[j] {
            return Err(IngredientError::NotAPermutation { f });
        }
        seen[j] = true;
    }
    let mut base = ing.base.clone();
    base.nodes = rho.iter().map(|&j| ing.base.nodes[j].clone()).collect();
    Ok(CompleteIngredient {
        base,
        labels: rho.iter().map(|&j| ing.labels[j].clone()).collect(),
        k: rho.iter().map(|&j| ing.k[j]).collect(),
    })
}

/// Applies a sign vector: every `-1` slot flips that node's cut ray, flips
/// its label, and sends the twisting index to `-k + delta_k`.  `+1` slots
/// are untouched.
pub fn act_sign(
    sv: &SignVector,
    ing: &CompleteIngredient,
) -> Result<CompleteIngredient, IngredientError> {
    sv.check()?;
    let f = ing.base.nodes.len();
    if sv.sigma.len() != f {
        return Err(IngredientError::WrongLength { expected: f, got: sv.sigma.len() });
    }
    let mut out = ing.clone();
    for i in 0..f {
        if sv.sigma[i] == 1 {
            continue;
        }
        out.base.nodes[i].cut = out.base.nodes[i].cut.flip();
        out.labels[i] = flip_label(&out.labels[i]);
        out.k[i] = -ing.k[i] + sv.delta_k[i];
    }
    Ok(out)
}
