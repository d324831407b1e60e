//! Unitary representations of finite groups, stored as one explicit matrix
//! per element.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{FiniteGroup, GroupElement};
use crate::hilbert::{matrix_from_rows, matrix_to_rows};
use crate::linalg::{self, CMatrix, ALGEBRA_TOL, ONE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReprError {
    #[error("expected {expected} matrices (one per element), got {got}")]
    WrongCount { expected: usize, got: usize },
    #[error("matrix for element {element} is {rows}x{cols}, expected {dim}x{dim}")]
    DimensionMismatch { element: usize, rows: usize, cols: usize, dim: usize },
    #[error("matrix for element {element} is not unitary (residual {residual:e})")]
    NotUnitary { element: usize, residual: f64 },
    #[error("identity element not mapped to the identity matrix (residual {residual:e})")]
    IdentityNotMappedToIdentity { residual: f64 },
    #[error("U({g})U({h}) != U({g}·{h}) (residual {residual:e})")]
    NotHomomorphism { g: usize, h: usize, residual: f64 },
    #[error("representations act on different groups")]
    GroupMismatch,
    #[error("invalid representation spec {0:?}")]
    BadSpec(String),
    #[error("malformed matrix: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    group: FiniteGroup,
    dim: usize,
    matrices: Vec<CMatrix>,
}

impl Representation {
    /// Left-regular representation on `L²(G)`: `U(g')|g⟩ = |g'·g⟩`.
    pub fn regular(group: &FiniteGroup) -> Self {
        let n = group.order();
        let matrices = group
            .elements()
            .map(|a| {
                let mut m = CMatrix::zeros(n, n);
                for g in group.elements() {
                    m[(group.mul(a, g).index(), g.index())] = ONE;
                }
                m
            })
            .collect();
        Self { group: group.clone(), dim: n, matrices }
    }

    pub fn trivial(group: &FiniteGroup, dim: usize) -> Self {
        Self {
            group: group.clone(),
            dim,
            matrices: vec![linalg::identity(dim); group.order()],
        }
    }

    /// Validates unitarity, `U(e) = 1`, and the homomorphism property over
    /// all `|G|²` pairs.
    pub fn from_matrices(group: &FiniteGroup, matrices: Vec<CMatrix>) -> Result<Self, ReprError> {
        let n = group.order();
        if matrices.len() != n {
            return Err(ReprError::WrongCount { expected: n, got: matrices.len() });
        }
        let dim = matrices[0].nrows();
        for (element, m) in matrices.iter().enumerate() {
            if m.nrows() != dim || m.ncols() != dim || dim == 0 {
                return Err(ReprError::DimensionMismatch {
                    element,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    dim,
                });
            }
        }
        for (element, m) in matrices.iter().enumerate() {
            let residual = linalg::unitarity_residual(m);
            if residual > ALGEBRA_TOL {
                return Err(ReprError::NotUnitary { element, residual });
            }
        }
        let residual = linalg::max_abs_diff(&matrices[group.identity().index()], &linalg::identity(dim));
        if residual > ALGEBRA_TOL {
            return Err(ReprError::IdentityNotMappedToIdentity { residual });
        }
        for g in group.elements() {
            for h in group.elements() {
                let gh = group.mul(g, h);
                let residual = linalg::max_abs_diff(
                    &(&matrices[g.index()] * &matrices[h.index()]),
                    &matrices[gh.index()],
                );
                if residual > ALGEBRA_TOL {
                    return Err(ReprError::NotHomomorphism { g: g.index(), h: h.index(), residual });
                }
            }
        }
        Ok(Self { group: group.clone(), dim, matrices })
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, g: GroupElement) -> &CMatrix {
        &self.matrices[g.index()]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.matrices
    }

    pub fn is_faithful(&self) -> bool {
        let id = linalg::identity(self.dim);
        self.group
            .elements()
            .filter(|&g| g != self.group.identity())
            .all(|g| linalg::max_abs_diff(self.matrix(g), &id) > ALGEBRA_TOL)
    }
}

/// `U_1(g) ⊗ … ⊗ U_N(g)`; the 1×1 identity when `reps` is empty.
pub fn combined_action(reps: &[Representation], g: GroupElement) -> Result<CMatrix, ReprError> {
    if let Some(first) = reps.first() {
        if reps.iter().any(|r| r.group != first.group) {
            return Err(ReprError::GroupMismatch);
        }
        if g.index() >= first.group.order() {
            return Err(ReprError::BadSpec(format!("element {g} out of range")));
        }
    }
    Ok(linalg::kron_all(reps.iter().map(|r| r.matrix(g))))
}

/// Tensor-product representation `g ↦ ⊗_j U_j(g)` as a validated value.
pub fn combined_representation(reps: &[Representation]) -> Result<Representation, ReprError> {
    let group = reps.first().ok_or(ReprError::BadSpec("empty list".into()))?.group.clone();
    let matrices = group
        .elements()
        .map(|g| combined_action(reps, g))
        .collect::<Result<Vec<_>, _>>()?;
    Representation::from_matrices(&group, matrices)
}

/// How a scenario names a representation: `"regular"`, `"trivial(d)"`, or
/// one inline matrix per element (rows of `(re, im)` pairs).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RepSpecDoc", into = "RepSpecDoc")]
pub enum RepSpec {
    Regular,
    Trivial(usize),
    Matrices(Vec<Vec<Vec<[f64; 2]>>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RepSpecDoc {
    Name(String),
    Matrices(Vec<Vec<Vec<[f64; 2]>>>),
}

impl TryFrom<RepSpecDoc> for RepSpec {
    type Error = ReprError;

    fn try_from(doc: RepSpecDoc) -> Result<Self, Self::Error> {
        match doc {
            RepSpecDoc::Matrices(m) => Ok(RepSpec::Matrices(m)),
            RepSpecDoc::Name(name) => name.parse(),
        }
    }
}

impl From<RepSpec> for RepSpecDoc {
    fn from(spec: RepSpec) -> Self {
        match spec {
            RepSpec::Matrices(m) => RepSpecDoc::Matrices(m),
            other => RepSpecDoc::Name(other.to_string()),
        }
    }
}

impl std::str::FromStr for RepSpec {
    type Err = ReprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "regular" {
            return Ok(RepSpec::Regular);
        }
        s.strip_prefix("trivial(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|d| d.trim().parse::<usize>().ok())
            .filter(|&d| d >= 1)
            .map(RepSpec::Trivial)
            .ok_or_else(|| ReprError::BadSpec(s.to_string()))
    }
}

impl fmt::Display for RepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepSpec::Regular => f.write_str("regular"),
            RepSpec::Trivial(d) => write!(f, "trivial({d})"),
            RepSpec::Matrices(m) => write!(f, "inline({}x{})", m.first().map_or(0, Vec::len), m.first().map_or(0, Vec::len)),
        }
    }
}

impl RepSpec {
    pub fn inline(matrices: &[CMatrix]) -> Self {
        RepSpec::Matrices(matrices.iter().map(matrix_to_rows).collect())
    }

    pub fn resolve(&self, group: &FiniteGroup) -> Result<Representation, ReprError> {
        match self {
            RepSpec::Regular => Ok(Representation::regular(group)),
            RepSpec::Trivial(d) => Ok(Representation::trivial(group, *d)),
            RepSpec::Matrices(ms) => {
                let matrices = ms
                    .iter()
                    .map(|rows| matrix_from_rows(rows).map_err(|e| ReprError::Malformed(e.to_string())))
                    .collect::<Result<Vec<_>, _>>()?;
                Representation::from_matrices(group, matrices)
            }
        }
    }
}
