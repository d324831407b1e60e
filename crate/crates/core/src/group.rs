//! Finite groups as validated multiplication tables.
//!
//! The integral over the group is realized as an unweighted sum over the
//! elements and the delta at the origin as a Kronecker delta at the
//! identity. The counting measure is left-invariant, so the resolution of
//! identity on `L²(G)` is simply `Σ_g |g⟩⟨g| = 1`.
//!
//! Construction validates the table exhaustively (associativity is an
//! `O(n³)` scan). Groups up to [`SOFT_ORDER_CAP`] elements are the intended
//! range; larger tables are accepted, but transform matrices grow as
//! `|G|^m · d_phys` and become impractical quickly.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest order the dense transform machinery is sized for.
pub const SOFT_ORDER_CAP: usize = 24;

/// Opaque label of a group element: an index into the multiplication table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub usize);

impl GroupElement {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("group order must be positive")]
    InvalidOrder,
    #[error("multiplication table is not square: row {row} has {len} entries, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("table entry [{row}][{col}] = {value} is outside 0..{order}")]
    NotClosed { row: usize, col: usize, value: usize, order: usize },
    #[error("no inverse structure: {line} {index} repeats element {value}")]
    NonInvertible { line: &'static str, index: usize, value: usize },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("associativity fails for ({a}·{b})·{c} = {left} but {a}·({b}·{c}) = {right}")]
    NotAssociative { a: usize, b: usize, c: usize, left: usize, right: usize },
    #[error("element index {index} out of range for group of order {order}")]
    IndexOutOfRange { index: usize, order: usize },
    #[error("unknown group name {0:?}")]
    UnknownGroup(String),
}

/// A finite group stored as its full multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Validates a multiplication table and computes identity and inverses.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::InvalidOrder);
        }
        for (row, entries) in table.iter().enumerate() {
            if entries.len() != n {
                return Err(GroupError::NotSquare { row, len: entries.len(), expected: n });
            }
            for (col, &value) in entries.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::NotClosed { row, col, value, order: n });
                }
            }
        }

        // Latin square: each row and column a permutation.
        for (i, row) in table.iter().enumerate() {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for (j, &r) in row.iter().enumerate() {
                if std::mem::replace(&mut row_seen[r], true) {
                    return Err(GroupError::NonInvertible { line: "row", index: i, value: r });
                }
                let c = table[j][i];
                if std::mem::replace(&mut col_seen[c], true) {
                    return Err(GroupError::NonInvertible { line: "column", index: i, value: c });
                }
            }
        }

        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e][g] == g && table[g][e] == g))
            .ok_or(GroupError::NoIdentity)?;

        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    let left = table[ab][c];
                    let right = table[a][table[b][c]];
                    if left != right {
                        return Err(GroupError::NotAssociative { a, b, c, left, right });
                    }
                }
            }
        }

        let inverses = (0..n)
            .map(|g| {
                (0..n)
                    .find(|&h| table[g][h] == identity)
                    .expect("latin square has an inverse in every row")
            })
            .collect();

        Ok(Self { table, identity, inverses })
    }

    /// The cyclic group `ℤ_n` with `i·j = (i + j) mod n`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::InvalidOrder);
        }
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::from_table(table)
    }

    /// Componentwise product; the pair `(g, h)` is labelled `g·|H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (ng, nh) = (g.order(), h.order());
        let n = ng * nh;
        let table = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| {
                        let (xg, xh) = (x / nh, x % nh);
                        let (yg, yh) = (y / nh, y % nh);
                        g.table[xg][yg] * nh + h.table[xh][yh]
                    })
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("direct product of valid groups is a group")
    }

    /// The symmetric group on `letters` letters, elements ordered by
    /// lexicographic order of their images; composition is
    /// `(σ·τ)(x) = σ(τ(x))`.
    pub fn symmetric(letters: usize) -> Result<Self, GroupError> {
        if letters == 0 {
            return Err(GroupError::InvalidOrder);
        }
        let perms = permutations(letters);
        let lookup = |p: &[usize]| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let composed: Vec<usize> = t.iter().map(|&x| s[x]).collect();
                        lookup(&composed)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(table)
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement(self.identity)
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn elements(&self) -> impl ExactSizeIterator<Item = GroupElement> {
        (0..self.order()).map(GroupElement)
    }

    pub fn element(&self, index: usize) -> Result<GroupElement, GroupError> {
        if index < self.order() {
            Ok(GroupElement(index))
        } else {
            Err(GroupError::IndexOutOfRange { index, order: self.order() })
        }
    }

    /// `g·h`. Panics on foreign indices; use [`FiniteGroup::element`] to
    /// validate untrusted labels first.
    pub fn mul(&self, g: GroupElement, h: GroupElement) -> GroupElement {
        GroupElement(self.table[g.0][h.0])
    }

    pub fn inv(&self, g: GroupElement) -> GroupElement {
        GroupElement(self.inverses[g.0])
    }

    /// Checked product and inverse of `g`, for untrusted indices.
    pub fn element_ops(
        &self,
        g: usize,
        h: usize,
    ) -> Result<(GroupElement, GroupElement), GroupError> {
        let g = self.element(g)?;
        let h = self.element(h)?;
        Ok((self.mul(g, h), self.inv(g)))
    }

    /// Smallest `k ≥ 1` with `g^k = e`.
    pub fn element_order(&self, g: GroupElement) -> usize {
        let mut acc = g;
        let mut k = 1;
        while acc.0 != self.identity {
            acc = self.mul(acc, g);
            k += 1;
        }
        k
    }

    /// Sorted list of element orders, a cheap isomorphism-class diagnostic.
    pub fn order_profile(&self) -> Vec<usize> {
        let mut orders: Vec<usize> = self.elements().map(|g| self.element_order(g)).collect();
        orders.sort_unstable();
        orders
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.table[a][b] == self.table[b][a]))
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for x in 0..used.len() {
            if !used[x] {
                used[x] = true;
                prefix.push(x);
                extend(prefix, used, out);
                prefix.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    extend(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// How a scenario names a group: a builtin name or an inline table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSpec {
    Named(String),
    Table(Vec<Vec<usize>>),
}

impl GroupSpec {
    pub fn named(name: &str) -> Self {
        GroupSpec::Named(name.to_string())
    }

    /// Builtin names: `Z<n>`, `Z<a>xZ<b>` (any factor count) and `S<n>` for
    /// `n ≤ 4`.
    pub fn resolve(&self) -> Result<FiniteGroup, GroupError> {
        match self {
            GroupSpec::Table(t) => FiniteGroup::from_table(t.clone()),
            GroupSpec::Named(name) => resolve_name(name),
        }
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupSpec::Named(n) => f.write_str(n),
            GroupSpec::Table(t) => write!(f, "table(order {})", t.len()),
        }
    }
}

fn resolve_name(name: &str) -> Result<FiniteGroup, GroupError> {
    let unknown = || GroupError::UnknownGroup(name.to_string());
    if let Some(rest) = name.strip_prefix('S') {
        let n: usize = rest.parse().map_err(|_| unknown())?;
        if !(1..=4).contains(&n) {
            return Err(unknown());
        }
        return FiniteGroup::symmetric(n);
    }
    let mut group: Option<FiniteGroup> = None;
    for part in name.split('x') {
        let n: usize = part
            .strip_prefix('Z')
            .and_then(|s| s.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(unknown)?;
        let factor = FiniteGroup::cyclic(n)?;
        group = Some(match group {
            None => factor,
            Some(g) => FiniteGroup::direct_product(&g, &factor),
        });
    }
    group.ok_or_else(unknown)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Permutations of three letters composed directly, independent of
    /// `FiniteGroup::symmetric`.
    fn s3_oracle() -> (Vec<[usize; 3]>, Vec<Vec<usize>>) {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [1, 0, 2],
            [2, 1, 0],
            [0, 2, 1],
            [1, 2, 0],
            [2, 0, 1],
        ];
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| {
                        let comp = [s[t[0]], s[t[1]], s[t[2]]];
                        perms.iter().position(|p| *p == comp).unwrap()
                    })
                    .collect()
            })
            .collect();
        (perms, table)
    }

    #[test]
    fn z2_from_table() {
        let g = FiniteGroup::from_table(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.identity(), GroupElement(0));
        assert_eq!(g.order(), 2);
    }

    #[test]
    fn repeated_column_is_non_invertible() {
        let err = FiniteGroup::from_table(vec![vec![0, 1], vec![0, 1]]).unwrap_err();
        assert!(matches!(err, GroupError::NonInvertible { line: "column", .. }), "{err}");
    }

    #[test]
    fn constructor_error_paths() {
        assert_eq!(FiniteGroup::from_table(vec![]), Err(GroupError::InvalidOrder));
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 2], vec![1, 0]]),
            Err(GroupError::NotClosed { row: 0, col: 1, value: 2, .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(vec![vec![0, 1], vec![1]]),
            Err(GroupError::NotSquare { row: 1, .. })
        ));
        // Latin square without identity.
        assert_eq!(
            FiniteGroup::from_table(vec![vec![0, 2, 1], vec![2, 1, 0], vec![1, 0, 2]]),
            Err(GroupError::NoIdentity)
        );
        // Latin square with identity 0 but not associative (order-5 loop).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(
            FiniteGroup::from_table(loop5),
            Err(GroupError::NotAssociative { .. })
        ));
    }

    #[test]
    fn s3_from_composed_permutations() {
        let (perms, table) = s3_oracle();
        let g = FiniteGroup::from_table(table).unwrap();
        assert_eq!(g.order(), 6);
        assert!(!g.is_abelian());
        assert_eq!(g.order_profile(), vec![1, 2, 2, 2, 3, 3]);
        // Two distinct transpositions compose to a 3-cycle.
        let (prod, _) = g.element_ops(1, 2).unwrap();
        let comp = [perms[1][perms[2][0]], perms[1][perms[2][1]], perms[1][perms[2][2]]];
        assert_eq!(perms[prod.0], comp);
        assert_eq!(g.element_order(prod), 3);
        // The builtin agrees with the oracle table up to labelling.
        let builtin = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(builtin.order_profile(), g.order_profile());
        assert!(!builtin.is_abelian());
    }

    #[test]
    fn cyclic_groups() {
        assert_eq!(FiniteGroup::cyclic(0), Err(GroupError::InvalidOrder));
        let trivial = FiniteGroup::cyclic(1).unwrap();
        assert_eq!(trivial.mul(GroupElement(0), GroupElement(0)), trivial.identity());
        assert_eq!(FiniteGroup::cyclic(2).unwrap().table(), &[vec![0, 1], vec![1, 0]]);
        let z4 = FiniteGroup::cyclic(4).unwrap();
        assert!(z4.elements().any(|g| z4.element_order(g) == 4));
        let v4 = FiniteGroup::direct_product(&FiniteGroup::cyclic(2).unwrap(), &FiniteGroup::cyclic(2).unwrap());
        assert!(v4.elements().all(|g| v4.element_order(g) != 4));
    }

    #[test]
    fn direct_products() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        let z3 = FiniteGroup::cyclic(3).unwrap();
        let trivial = FiniteGroup::cyclic(1).unwrap();
        assert_eq!(FiniteGroup::direct_product(&trivial, &z3).table(), z3.table());
        let v4 = FiniteGroup::direct_product(&z2, &z2);
        assert_eq!(v4.order_profile(), vec![1, 2, 2, 2]);
        let z6 = FiniteGroup::direct_product(&z2, &z3);
        assert!(z6.is_abelian());
        let mut distinct = z6.order_profile();
        distinct.dedup();
        assert_eq!(distinct, vec![1, 2, 3, 6]);
        // pairing convention (g, h) -> g·|H| + h: (1, 2) · (1, 1) = (0, 0)
        let x = GroupElement(5);
        let y = GroupElement(4);
        assert_eq!(z6.mul(x, y), GroupElement(0));
    }

    #[test]
    fn element_ops_and_ranges() {
        let z2 = FiniteGroup::cyclic(2).unwrap();
        assert_eq!(z2.element_ops(1, 1).unwrap().0, GroupElement(0));
        assert_eq!(
            z2.element_ops(2, 0),
            Err(GroupError::IndexOutOfRange { index: 2, order: 2 })
        );
    }

    #[test]
    fn builtin_names() {
        assert_eq!(GroupSpec::named("Z2").resolve().unwrap().order(), 2);
        assert_eq!(GroupSpec::named("Z2xZ2").resolve().unwrap().order_profile(), vec![1, 2, 2, 2]);
        assert_eq!(GroupSpec::named("S3").resolve().unwrap().order(), 6);
        for bad in ["Z5x", "Z0", "Q8", "", "S9", "x"] {
            assert_eq!(
                GroupSpec::named(bad).resolve(),
                Err(GroupError::UnknownGroup(bad.to_string())),
                "{bad}"
            );
        }
    }

    #[test]
    fn group_axioms_exhaustive_for_builtins() {
        for name in ["Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z2xZ3", "S3", "Z3xZ4"] {
            let g = GroupSpec::named(name).resolve().unwrap();
            for a in g.elements() {
                assert_eq!(g.inv(g.inv(a)), a);
                assert_eq!(g.mul(a, g.inv(a)), g.identity());
                // left multiplication by a is a bijection
                let mut image: Vec<_> = g.elements().map(|x| g.mul(a, x)).collect();
                image.sort();
                assert!(image.iter().copied().eq(g.elements()));
                for b in g.elements() {
                    for c in g.elements() {
                        assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                    }
                }
            }
        }
    }
}
