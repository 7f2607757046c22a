//! Finite groups as multiplication tables, their Cayley graphs, and the
//! correspondence between orderings of a generating set and rainbow paths.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ColouredDigraph, Edge, RainbowPath, RainbowWalk, Vertex};

/// Tables up to this order get a full associativity check.
pub const FULL_LAW_CHECK_LIMIT: usize = 512;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("unrecognised group spec `{0}`")]
    UnknownSpec(String),
    #[error("bad multiplication table: {0}")]
    BadTable(String),
    #[error("group law fails: {0}")]
    LawViolated(String),
    #[error("element {0} is not in the group")]
    ElementOutOfRange(usize),
    #[error("element {0} appears twice in the generating set")]
    DuplicateElement(usize),
    #[error("the identity belongs to the generating set")]
    IdentityInS,
    #[error("ordering is not a permutation of the generating set")]
    NotAPermutation,
    #[error("partial products {0} and {1} coincide")]
    PrefixCollision(usize, usize),
    #[error("not a rainbow walk in this Cayley graph: {0}")]
    NotAWalkInThisCayleyGraph(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupTable {
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    identity: usize,
    abelian: bool,
    label: String,
}

impl GroupTable {
    /// Parses `cyclic:N`, `elem2:k`, `prod:<a>,<b>`, `dihedral:2N`,
    /// `quaternion8` or `table:<file>`. Factors of a product may be wrapped
    /// in parentheses to nest products.
    pub fn from_spec(spec: &str) -> Result<Self, GroupError> {
        let spec = spec.trim();
        let unknown = || GroupError::UnknownSpec(spec.to_string());
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| unknown());
        match kind {
            "cyclic" => {
                let n = num(arg)?;
                if n == 0 {
                    return Err(unknown());
                }
                Ok(Self::cyclic(n))
            }
            "elem2" => {
                let k = num(arg)?;
                if k > 16 {
                    return Err(unknown());
                }
                Ok(Self::elementary_abelian_2(k))
            }
            "dihedral" => {
                let n = num(arg)?;
                if n < 2 || n % 2 == 1 {
                    return Err(unknown());
                }
                Ok(Self::dihedral(n))
            }
            "quaternion8" => Ok(Self::quaternion8()),
            "prod" => {
                let (a, b) = split_top_level(arg).ok_or_else(unknown)?;
                Ok(Self::product(&Self::from_spec(a)?, &Self::from_spec(b)?))
            }
            "table" => Self::from_table_file(Path::new(arg)),
            _ => Err(unknown()),
        }
    }

    pub fn cyclic(n: usize) -> Self {
        let mul = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        Self::assemble(n, mul, format!("cyclic:{n}"))
    }

    /// `(Z_2)^k`, elements as bitmasks.
    pub fn elementary_abelian_2(k: usize) -> Self {
        let n = 1usize << k;
        let mul = (0..n * n).map(|i| ((i / n) ^ (i % n)) as u32).collect();
        Self::assemble(n, mul, format!("elem2:{k}"))
    }

    /// Dihedral group of the given (even) order. Element `s*m + r` stands
    /// for a rotation by `r` followed by `s` reflections, `m = order / 2`.
    pub fn dihedral(order: usize) -> Self {
        let m = order / 2;
        let mut mul = Vec::with_capacity(order * order);
        for a in 0..order {
            for b in 0..order {
                let (sa, ra) = (a / m, a % m);
                let (sb, rb) = (b / m, b % m);
                let r = if sa == 0 { (ra + rb) % m } else { (ra + m - rb) % m };
                mul.push((((sa + sb) % 2) * m + r) as u32);
            }
        }
        Self::assemble(order, mul, format!("dihedral:{order}"))
    }

    /// Quaternion units; element `4*sign + u` is `±{1,i,j,k}[u]`.
    pub fn quaternion8() -> Self {
        // unit_mul[a][b] = (sign, unit) of unit a times unit b.
        const UNIT: [[(usize, usize); 4]; 4] = [
            [(0, 0), (0, 1), (0, 2), (0, 3)],
            [(0, 1), (1, 0), (0, 3), (1, 2)],
            [(0, 2), (1, 3), (1, 0), (0, 1)],
            [(0, 3), (0, 2), (1, 1), (1, 0)],
        ];
        let mut mul = Vec::with_capacity(64);
        for a in 0..8 {
            for b in 0..8 {
                let (s, u) = UNIT[a % 4][b % 4];
                mul.push((((a / 4 + b / 4 + s) % 2) * 4 + u) as u32);
            }
        }
        Self::assemble(8, mul, "quaternion8".to_string())
    }

    /// Direct product; `(a, b)` has index `a * |B| + b`.
    pub fn product(a: &GroupTable, b: &GroupTable) -> Self {
        let (na, nb) = (a.order, b.order);
        let n = na * nb;
        let mut mul = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                let p = a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb);
                mul.push(p as u32);
            }
        }
        Self::assemble(n, mul, format!("prod:({}),({})", a.label, b.label))
    }

    /// Reads the table format: first line `n`, then `n` rows of `n`
    /// space-separated 0-based indices.
    pub fn from_table_text(text: &str, label: &str) -> Result<Self, GroupError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let n: usize = lines
            .next()
            .and_then(|l| l.trim().parse().ok())
            .ok_or_else(|| GroupError::BadTable("missing order line".into()))?;
        if n == 0 {
            return Err(GroupError::BadTable("order 0".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for r in 0..n {
            let line = lines.next().ok_or_else(|| GroupError::BadTable(format!("missing row {r}")))?;
            let row: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse::<u32>())
                .collect::<Result<_, _>>()
                .map_err(|_| GroupError::BadTable(format!("row {r} is not numeric")))?;
            if row.len() != n || row.iter().any(|&x| x as usize >= n) {
                return Err(GroupError::BadTable(format!("row {r} has wrong length or range")));
            }
            mul.extend(row);
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| mul[e * n + x] as usize == x && mul[x * n + e] as usize == x))
            .ok_or_else(|| GroupError::LawViolated("no identity".into()))?;
        for x in 0..n {
            let y = (0..n)
                .find(|&y| mul[x * n + y] as usize == identity)
                .ok_or_else(|| GroupError::LawViolated(format!("{x} has no inverse")))?;
            if mul[y * n + x] as usize != identity {
                return Err(GroupError::LawViolated(format!("{x} has no two-sided inverse")));
            }
        }
        let g = Self::assemble(n, mul, label.to_string());
        g.check_associativity(0x5eed)?;
        Ok(g)
    }

    pub fn from_table_file(path: &Path) -> Result<Self, GroupError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| GroupError::BadTable(format!("{}: {e}", path.display())))?;
        Self::from_table_text(&text, &format!("table:{}", path.display()))
    }

    fn assemble(order: usize, mul: Vec<u32>, label: String) -> Self {
        let n = order;
        let identity = (0..n).find(|&e| (0..n).all(|x| mul[e * n + x] as usize == x)).unwrap_or(0);
        let inv = (0..n).map(|x| (0..n).find(|&y| mul[x * n + y] as usize == identity).unwrap_or(0) as u32).collect();
        let abelian = (0..n).all(|x| (x + 1..n).all(|y| mul[x * n + y] == mul[y * n + x]));
        GroupTable { order, mul, inv, identity, abelian, label }
    }

    /// Full check up to [`FULL_LAW_CHECK_LIMIT`], seeded spot check above.
    pub fn check_associativity(&self, seed: u64) -> Result<(), GroupError> {
        let n = self.order;
        let check = |a: usize, b: usize, c: usize| {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                Err(GroupError::LawViolated(format!("({a}*{b})*{c} != {a}*({b}*{c})")))
            } else {
                Ok(())
            }
        };
        if n <= FULL_LAW_CHECK_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut rng = crate::rng::stage_rng(seed, "group-laws");
            for _ in 0..200_000 {
                check(rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))?;
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `a² = e` with `a ≠ e`.
    pub fn is_involution(&self, a: usize) -> bool {
        a != self.identity && self.mul(a, a) == self.identity
    }

    /// Partial products `a_1, a_1a_2, …` of a sequence.
    pub fn prefix_products(&self, seq: &[usize]) -> Vec<usize> {
        let mut acc = self.identity;
        seq.iter()
            .map(|&a| {
                acc = self.mul(acc, a);
                acc
            })
            .collect()
    }

    pub fn distinct_prefix_count(&self, seq: &[usize]) -> usize {
        let mut seen = vec![false; self.order];
        self.prefix_products(seq).into_iter().filter(|&p| !std::mem::replace(&mut seen[p], true)).count()
    }
}

fn split_top_level(s: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                return Some((strip_parens(&s[..i]), strip_parens(&s[i + 1..])));
            }
            _ => {}
        }
    }
    None
}

fn strip_parens(s: &str) -> &str {
    let s = s.trim();
    if s.starts_with('(') && s.ends_with(')') {
        &s[1..s.len() - 1]
    } else {
        s
    }
}

/// A set of distinct group elements, in a fixed order. Position `i` is
/// colour `i` of the Cayley graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSet {
    elements: Vec<usize>,
}

impl GeneratorSet {
    pub fn new(group: &GroupTable, elements: Vec<usize>) -> Result<Self, GroupError> {
        let mut seen = vec![false; group.order()];
        for &a in &elements {
            if a >= group.order() {
                return Err(GroupError::ElementOutOfRange(a));
            }
            if std::mem::replace(&mut seen[a], true) {
                return Err(GroupError::DuplicateElement(a));
            }
        }
        Ok(GeneratorSet { elements })
    }

    /// `d` distinct non-identity elements, in increasing order.
    pub fn random<R: Rng>(group: &GroupTable, d: usize, rng: &mut R) -> Result<Self, GroupError> {
        let mut pool: Vec<usize> = (0..group.order()).filter(|&a| a != group.identity()).collect();
        if d > pool.len() {
            return Err(GroupError::ElementOutOfRange(d));
        }
        pool.shuffle(rng);
        pool.truncate(d);
        pool.sort_unstable();
        Ok(GeneratorSet { elements: pool })
    }

    /// Every non-identity element.
    pub fn all_nonidentity(group: &GroupTable) -> Self {
        GeneratorSet { elements: (0..group.order()).filter(|&a| a != group.identity()).collect() }
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains_identity(&self, group: &GroupTable) -> bool {
        self.elements.contains(&group.identity())
    }

    pub fn colour_of(&self, a: usize) -> Option<usize> {
        self.elements.iter().position(|&x| x == a)
    }
}

/// `Cay(Γ, S)` with the colour-to-element map kept alongside.
#[derive(Debug, Clone)]
pub struct CayleyGraph {
    pub graph: ColouredDigraph,
    pub generators: GeneratorSet,
}

impl CayleyGraph {
    pub fn element_of(&self, colour: usize) -> usize {
        self.generators.elements[colour]
    }
}

/// Edge `a -> a·g` coloured by the position of `g` in `s`. The result is
/// symmetric exactly when every generator is an involution.
pub fn cayley_graph(group: &GroupTable, s: &GeneratorSet) -> Result<CayleyGraph, GroupError> {
    if s.contains_identity(group) {
        return Err(GroupError::IdentityInS);
    }
    let n = group.order();
    let mut edges = Vec::with_capacity(n * s.len());
    for a in 0..n {
        for (c, &g) in s.elements.iter().enumerate() {
            edges.push(Edge::new(a, group.mul(a, g), c));
        }
    }
    let graph = ColouredDigraph::new(n, s.len(), &edges)
        .expect("Cayley graph edges are distinct and loop-free")
        .with_vertex_transitive(true);
    Ok(CayleyGraph { graph, generators: s.clone() })
}

/// The path `start·p_1, start·p_2, …, start·p_d` through the partial
/// products of `ordering`, whose edges carry the colours of the 2nd..d-th
/// elements.
pub fn ordering_to_path(
    group: &GroupTable,
    s: &GeneratorSet,
    ordering: &[usize],
    start: Vertex,
) -> Result<RainbowPath, GroupError> {
    check_permutation(s, ordering)?;
    let prefixes = group.prefix_products(ordering);
    let mut first_seen = vec![usize::MAX; group.order()];
    for (t, &p) in prefixes.iter().enumerate() {
        if first_seen[p] != usize::MAX {
            return Err(GroupError::PrefixCollision(first_seen[p] + 1, t + 1));
        }
        first_seen[p] = t;
    }
    let vertices = prefixes.iter().map(|&p| group.mul(start, p)).collect();
    let colours = ordering.iter().skip(1).map(|&a| s.colour_of(a).expect("checked")).collect();
    Ok(RainbowPath { vertices, colours })
}

fn check_permutation(s: &GeneratorSet, ordering: &[usize]) -> Result<(), GroupError> {
    let mut sorted = ordering.to_vec();
    sorted.sort_unstable();
    let mut expected = s.elements.clone();
    expected.sort_unstable();
    if sorted == expected {
        Ok(())
    } else {
        Err(GroupError::NotAPermutation)
    }
}

/// An ordering of a generating set and how many distinct partial products
/// it has.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rearrangement {
    pub ordering: Vec<usize>,
    pub distinct_prefix_count: usize,
    /// How many trailing elements were appended because the source walk
    /// did not use their colour.
    pub appended: usize,
}

impl Rearrangement {
    pub fn from_ordering(group: &GroupTable, ordering: Vec<usize>, appended: usize) -> Self {
        let distinct_prefix_count = group.distinct_prefix_count(&ordering);
        Rearrangement { ordering, distinct_prefix_count, appended }
    }

    pub fn is_complete(&self) -> bool {
        self.distinct_prefix_count == self.ordering.len()
    }
}

fn check_cayley_walk(
    group: &GroupTable,
    cay: &CayleyGraph,
    vertices: &[Vertex],
    colours: &[usize],
) -> Result<(), GroupError> {
    let bad = |m: String| Err(GroupError::NotAWalkInThisCayleyGraph(m));
    if vertices.len() != colours.len() + 1 {
        return bad("vertex and colour counts disagree".into());
    }
    let mut used = vec![false; cay.generators.len()];
    for (i, &c) in colours.iter().enumerate() {
        if c >= used.len() {
            return bad(format!("colour {c} is not a generator"));
        }
        if std::mem::replace(&mut used[c], true) {
            return bad(format!("colour {c} is used twice"));
        }
        if vertices[i] >= group.order() || group.mul(vertices[i], cay.element_of(c)) != vertices[i + 1] {
            return bad(format!("step {i} does not follow colour {c}"));
        }
    }
    Ok(())
}

/// Reads a rainbow walk as an ordering of `S`: walk colours first, then
/// the unused generators in set order.
pub fn walk_to_rearrangement(
    group: &GroupTable,
    cay: &CayleyGraph,
    walk: &RainbowWalk,
) -> Result<Rearrangement, GroupError> {
    check_cayley_walk(group, cay, &walk.vertices, &walk.colours)?;
    let mut ordering: Vec<usize> = walk.colours.iter().map(|&c| cay.element_of(c)).collect();
    let appended = append_unused(cay, &walk.colours, &mut ordering);
    Ok(Rearrangement::from_ordering(group, ordering, appended))
}

/// Like [`walk_to_rearrangement`], but a path of length `L < |S|` is read
/// with an unused generator in front, giving `L + 1` distinct partial
/// products instead of `L`.
pub fn path_to_rearrangement(
    group: &GroupTable,
    cay: &CayleyGraph,
    path: &RainbowPath,
) -> Result<Rearrangement, GroupError> {
    check_cayley_walk(group, cay, &path.vertices, &path.colours)?;
    let mut used = vec![false; cay.generators.len()];
    for &c in &path.colours {
        used[c] = true;
    }
    let mut ordering = Vec::with_capacity(cay.generators.len());
    let mut lead = vec![];
    if let Some(c) = (0..used.len()).find(|&c| !used[c]) {
        ordering.push(cay.element_of(c));
        lead.push(c);
    }
    ordering.extend(path.colours.iter().map(|&c| cay.element_of(c)));
    let mut consumed = lead;
    consumed.extend_from_slice(&path.colours);
    let appended = append_unused(cay, &consumed, &mut ordering);
    Ok(Rearrangement::from_ordering(group, ordering, appended))
}

fn append_unused(cay: &CayleyGraph, used_colours: &[usize], ordering: &mut Vec<usize>) -> usize {
    let mut used = vec![false; cay.generators.len()];
    for &c in used_colours {
        used[c] = true;
    }
    let before = ordering.len();
    ordering.extend((0..used.len()).filter(|&c| !used[c]).map(|c| cay.element_of(c)));
    ordering.len() - before
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn builtin_groups_satisfy_the_laws() {
        for spec in [
            "cyclic:1",
            "cyclic:12",
            "elem2:3",
            "dihedral:6",
            "dihedral:10",
            "quaternion8",
            "prod:cyclic:3,elem2:2",
            "prod:(prod:cyclic:2,cyclic:2),dihedral:6",
        ] {
            let g = GroupTable::from_spec(spec).unwrap();
            g.check_associativity(1).unwrap();
            for x in 0..g.order() {
                assert_eq!(g.mul(x, g.inv(x)), g.identity(), "{spec}");
                assert_eq!(g.mul(g.identity(), x), x);
            }
        }
    }

    #[test]
    fn abelian_flags() {
        assert!(GroupTable::from_spec("cyclic:7").unwrap().is_abelian());
        assert!(!GroupTable::from_spec("dihedral:6").unwrap().is_abelian());
        assert!(!GroupTable::from_spec("quaternion8").unwrap().is_abelian());
        let q = GroupTable::quaternion8();
        // Exactly one involution, -1.
        assert_eq!((0..8).filter(|&a| q.is_involution(a)).count(), 1);
        let d = GroupTable::dihedral(8);
        // Four reflections and the half turn.
        assert_eq!((0..8).filter(|&a| d.is_involution(a)).count(), 5);
    }

    #[test]
    fn table_round_trip_and_rejection() {
        let z3 = "3\n0 1 2\n1 2 0\n2 0 1\n";
        let g = GroupTable::from_table_text(z3, "z3").unwrap();
        assert_eq!(g.mul(2, 2), 1);
        let bad = "2\n0 1\n0 1\n";
        assert!(GroupTable::from_table_text(bad, "bad").is_err());
        let nonassoc = "3\n0 1 2\n1 0 0\n2 0 0\n";
        assert!(GroupTable::from_table_text(nonassoc, "x").is_err());
    }

    #[test]
    fn identity_in_s_is_refused() {
        let g = GroupTable::cyclic(5);
        let s = GeneratorSet::new(&g, vec![0, 1]).unwrap();
        assert_eq!(cayley_graph(&g, &s).unwrap_err(), GroupError::IdentityInS);
    }

    #[test]
    fn small_cayley_graph() {
        let g = GroupTable::cyclic(5);
        let s = GeneratorSet::new(&g, vec![1, 2]).unwrap();
        let cay = cayley_graph(&g, &s).unwrap();
        assert_eq!(cay.graph.edge_count(), 10);
        assert!(crate::graph::ensure_proper(&cay.graph).is_ok());
        assert!(!cay.graph.is_symmetric());
        let e2 = GroupTable::elementary_abelian_2(3);
        let cay = cayley_graph(&e2, &GeneratorSet::all_nonidentity(&e2)).unwrap();
        assert!(cay.graph.is_symmetric());
    }

    #[test]
    fn ordering_of_z4() {
        let g = GroupTable::cyclic(4);
        let s = GeneratorSet::new(&g, vec![0, 1, 2, 3]).unwrap();
        assert_eq!(g.prefix_products(&[0, 1, 2, 3]), vec![0, 1, 3, 2]);
        let p = ordering_to_path(&g, &s, &[0, 1, 2, 3], 0).unwrap();
        assert_eq!(p.vertices, vec![0, 1, 3, 2]);
        assert_eq!(ordering_to_path(&g, &s, &[1, 3, 0, 2], 0).unwrap_err(), GroupError::PrefixCollision(2, 3));
    }

    #[test]
    fn reused_colour_is_not_a_walk() {
        let g = GroupTable::cyclic(5);
        let s = GeneratorSet::new(&g, vec![1, 2]).unwrap();
        let cay = cayley_graph(&g, &s).unwrap();
        let w = RainbowWalk { vertices: vec![0, 1, 3, 0], colours: vec![0, 1, 1] };
        assert!(matches!(walk_to_rearrangement(&g, &cay, &w), Err(GroupError::NotAWalkInThisCayleyGraph(_))));
        let w = RainbowWalk { vertices: vec![0, 1, 3], colours: vec![0, 1] };
        let r = walk_to_rearrangement(&g, &cay, &w).unwrap();
        assert_eq!(r.ordering, vec![1, 2]);
        assert_eq!(r.distinct_prefix_count, 2);
    }

    #[test]
    fn short_path_gains_a_leading_element() {
        let g = GroupTable::cyclic(7);
        let s = GeneratorSet::new(&g, vec![1, 2, 4]).unwrap();
        let cay = cayley_graph(&g, &s).unwrap();
        let p = RainbowPath { vertices: vec![3, 4], colours: vec![0] };
        let r = path_to_rearrangement(&g, &cay, &p).unwrap();
        assert_eq!(r.ordering[..2], [2, 1]);
        assert!(r.distinct_prefix_count >= 2);
    }

    fn arb_cyclic_ordering() -> impl Strategy<Value = (usize, Vec<usize>)> {
        (3usize..30).prop_flat_map(|n| {
            proptest::sample::subsequence((1..n).collect::<Vec<_>>(), 1..(n - 1).min(8))
                .prop_shuffle()
                .prop_map(move |s| (n, s))
        })
    }

    proptest! {
        #[test]
        fn ordering_and_path_agree((n, ord) in arb_cyclic_ordering(), start in 0usize..30) {
            let g = GroupTable::cyclic(n);
            let s = GeneratorSet::new(&g, ord.clone()).unwrap();
            let cay = cayley_graph(&g, &s).unwrap();
            let start = start % n;
            match ordering_to_path(&g, &s, &ord, start) {
                Ok(p) => {
                    prop_assert_eq!(crate::graph::validate_rainbow(&cay.graph, &p), Ok(()));
                    prop_assert_eq!(g.distinct_prefix_count(&ord), ord.len());
                }
                Err(GroupError::PrefixCollision(..)) => {
                    prop_assert!(g.distinct_prefix_count(&ord) < ord.len());
                }
                Err(e) => prop_assert!(false, "{e}"),
            }
        }

        #[test]
        fn walk_prefix_bound((n, ord) in arb_cyclic_ordering()) {
            let g = GroupTable::cyclic(n);
            let s = GeneratorSet::new(&g, ord.clone()).unwrap();
            let cay = cayley_graph(&g, &s).unwrap();
            let mut w = RainbowWalk::start_at(0);
            for (c, &a) in ord.iter().enumerate() {
                let next = g.mul(w.end(), a);
                w.push(c, next);
            }
            let r = walk_to_rearrangement(&g, &cay, &w).unwrap();
            prop_assert!(r.distinct_prefix_count + w.repetition_count() >= ord.len());
        }

        #[test]
        fn cayley_graphs_are_proper(k in 1usize..4, pick in any::<u64>()) {
            let g = GroupTable::product(&GroupTable::dihedral(6), &GroupTable::elementary_abelian_2(k));
            let mut rng = crate::rng::stage_rng(pick, "test");
            let d = (pick as usize % (g.order() - 1)) + 1;
            let s = GeneratorSet::random(&g, d, &mut rng).unwrap();
            let cay = cayley_graph(&g, &s).unwrap();
            prop_assert!(crate::graph::ensure_proper(&cay.graph).is_ok());
            prop_assert_eq!(cay.graph.min_semidegree(), d);
        }
    }
}
