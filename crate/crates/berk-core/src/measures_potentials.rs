//! Finite atomic measures, finite subtrees of the hyperbolic space,
//! piecewise-affine functions on them, potentials and the tree Laplacian.
//!
//! Potentials use the Gromov product convention
//! ĝ_ρ(S) = −ρ(P¹) − Σ m_i ⟨S, S_i⟩_{S0}, so that Δĝ_ρ = ρ − ρ(P¹)[S0]
//! with Δ at a vertex the sum of the outgoing slopes.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::berkovich::{gromov_product, hyperbolic_distance, join, order_leq, BerkPoint};
use crate::error::{BerkError, Result};
use crate::rational_map::RationalMap;
use crate::valued_field::arith::qi;
use crate::valued_field::{Backend, Q};

/// Anything that moves points of the line: rational maps, skeleton maps.
pub trait PointMap {
    fn image(&self, s: &BerkPoint) -> Result<BerkPoint>;
}

impl PointMap for RationalMap {
    fn image(&self, s: &BerkPoint) -> Result<BerkPoint> {
        self.image_point(s)
    }
}

/// Finitely many atoms with nonzero rational masses.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AtomicMeasure {
    atoms: BTreeMap<BerkPoint, Q>,
}

impl AtomicMeasure {
    pub fn zero() -> Self {
        AtomicMeasure::default()
    }

    pub fn dirac(s: BerkPoint) -> Self {
        AtomicMeasure::from_atoms([(s, qi(1))])
    }

    /// Merges repeated points and drops zero masses.
    pub fn from_atoms<I: IntoIterator<Item = (BerkPoint, Q)>>(atoms: I) -> Self {
        let mut m = AtomicMeasure::zero();
        for (s, w) in atoms {
            m.add_mass(s, w);
        }
        m
    }

    pub fn add_mass(&mut self, s: BerkPoint, w: Q) {
        if w.is_zero() {
            return;
        }
        let e = self.atoms.entry(s).or_insert_with(Q::zero);
        *e += w;
        if e.is_zero() {
            self.atoms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&BerkPoint, &Q)> {
        self.atoms.iter()
    }

    pub fn points(&self) -> impl Iterator<Item = &BerkPoint> {
        self.atoms.keys()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass_at(&self, s: &BerkPoint) -> Q {
        self.atoms.get(s).cloned().unwrap_or_else(Q::zero)
    }

    pub fn total_mass(&self) -> Q {
        self.atoms.values().sum()
    }

    /// Whether every mass is positive.
    pub fn is_positive(&self) -> bool {
        self.atoms.values().all(|w| w.is_positive())
    }

    pub fn scale(&self, c: &Q) -> Self {
        AtomicMeasure::from_atoms(self.atoms.iter().map(|(s, w)| (s.clone(), w * c)))
    }

    pub fn add(&self, other: &Self) -> Self {
        AtomicMeasure::from_atoms(self.atoms().chain(other.atoms()).map(|(s, w)| (s.clone(), w.clone())))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&qi(-1)))
    }

    /// Mass of the atoms satisfying `pred`.
    pub fn mass_where(&self, pred: impl Fn(&BerkPoint) -> bool) -> Q {
        self.atoms.iter().filter(|(s, _)| pred(s)).map(|(_, w)| w.clone()).sum()
    }

    /// Total variation distance, half the sum of the atom differences.
    pub fn total_variation(&self, other: &Self) -> Q {
        self.sub(other).atoms.values().map(|w| w.abs()).sum::<Q>() / qi(2)
    }

    /// ∫ f dρ.
    pub fn integrate(&self, f: impl Fn(&BerkPoint) -> Result<Q>) -> Result<Q> {
        let mut acc = Q::zero();
        for (s, w) in &self.atoms {
            acc += f(s)? * w;
        }
        Ok(acc)
    }
}

/// f_*ρ: atoms move through the map, colliding masses add.
pub fn pushforward(f: &dyn PointMap, rho: &AtomicMeasure) -> Result<AtomicMeasure> {
    let mut out = AtomicMeasure::zero();
    for (s, w) in rho.atoms() {
        out.add_mass(f.image(s)?, w.clone());
    }
    Ok(out)
}

/// R^*ρ = Σ over atoms S of mass(S) Σ_{R(S') = S} deg_R(S') [S'].
pub fn pullback(r: &RationalMap, rho: &AtomicMeasure) -> Result<AtomicMeasure> {
    let mut out = AtomicMeasure::zero();
    for (s, w) in rho.atoms() {
        for (t, m) in r.preimages(s)? {
            out.add_mass(t, w * qi(m as i64));
        }
    }
    Ok(out)
}

/// A finite subtree of the hyperbolic space, closed under joins, rooted at
/// its highest vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTree {
    vertices: Vec<BerkPoint>,
    parent: Vec<Option<usize>>,
    lengths: Vec<Q>,
}

/// Type I points become balls of log-radius `clamp`, ∞ the ball of log-radius −clamp about 0.
fn clamp_point(s: &BerkPoint, clamp: &Q, backend: &Backend) -> Result<BerkPoint> {
    match s {
        BerkPoint::TypeII { .. } => Ok(s.clone()),
        BerkPoint::TypeI(z) => BerkPoint::type2(z, clamp.clone()),
        BerkPoint::Infinity => BerkPoint::type2(&backend.zero(), -clamp),
    }
}

impl FiniteTree {
    /// The convex hull of the points: the points and their pairwise joins.
    pub fn convex_hull(points: &[BerkPoint], clamp: &Q) -> Result<FiniteTree> {
        let Some(backend) = points.iter().find_map(|s| s.backend()).copied() else {
            return Err(BerkError::ParamDomain("convex hull needs a finite point".into()));
        };
        let pts: Vec<BerkPoint> = points.iter().map(|s| clamp_point(s, clamp, &backend)).collect::<Result<_>>()?;
        let mut vs: Vec<BerkPoint> = pts.clone();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                vs.push(join(&pts[i], &pts[j]));
            }
        }
        vs.sort();
        vs.dedup();
        FiniteTree::from_vertices(vs)
    }

    /// Tree on a join-closed vertex set.
    pub fn from_vertices(vertices: Vec<BerkPoint>) -> Result<FiniteTree> {
        let n = vertices.len();
        let mut parent = vec![None; n];
        let mut lengths = vec![Q::zero(); n];
        for i in 0..n {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if i == j || !order_leq(&vertices[i], &vertices[j]) {
                    continue;
                }
                if best.is_none_or(|b| order_leq(&vertices[j], &vertices[b])) {
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                parent[i] = Some(j);
                lengths[i] = hyperbolic_distance(&vertices[i], &vertices[j])?;
            }
        }
        if parent.iter().filter(|p| p.is_none()).count() > 1 {
            return Err(BerkError::ParamDomain("vertex set is not closed under joins".into()));
        }
        Ok(FiniteTree { vertices, parent, lengths })
    }

    pub fn vertices(&self) -> &[BerkPoint] {
        &self.vertices
    }

    pub fn index_of(&self, s: &BerkPoint) -> Option<usize> {
        self.vertices.iter().position(|v| v == s)
    }

    /// Edges (child, parent, d_H length).
    pub fn edges(&self) -> Vec<(usize, usize, Q)> {
        (0..self.vertices.len())
            .filter_map(|i| self.parent[i].map(|j| (i, j, self.lengths[i].clone())))
            .collect()
    }

    pub fn total_length(&self) -> Q {
        self.lengths.iter().sum()
    }

    /// The retraction of s onto the tree, as (child vertex, d_H distance up
    /// its edge). Tree points above s form a chain; the lowest one is it.
    pub fn retract(&self, s: &BerkPoint) -> (usize, Q) {
        let root = self.root();
        if !order_leq(s, &self.vertices[root]) {
            return (root, Q::zero());
        }
        let mut best: (usize, Q, BerkPoint) = (root, Q::zero(), self.vertices[root].clone());
        for (i, c) in self.vertices.iter().enumerate() {
            let Some(p) = self.parent[i] else { continue };
            if !order_leq(s, &self.vertices[p]) {
                continue;
            }
            let j = join(s, c);
            if !order_leq(&j, &self.vertices[p]) || !order_leq(&j, &best.2) {
                continue;
            }
            let d = hyperbolic_distance(c, &j).expect("tree points are type II");
            best = (i, d, j);
        }
        (best.0, best.1)
    }

    pub fn root(&self) -> usize {
        self.parent.iter().position(|p| p.is_none()).expect("a tree has a root")
    }

    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tree {\n");
        for (i, v) in self.vertices.iter().enumerate() {
            s.push_str(&format!("  v{i} [label=\"{}\"];\n", v.to_display().replace('"', "'")));
        }
        for (c, p, l) in self.edges() {
            s.push_str(&format!("  v{c} -- v{p} [label=\"{l}\"];\n"));
        }
        s.push_str("}\n");
        s
    }
}

/// The smallest join-closed tree containing the points.
pub fn convex_hull_tree(points: &[BerkPoint], clamp: &Q) -> Result<FiniteTree> {
    FiniteTree::convex_hull(points, clamp)
}

/// A continuous function on a finite tree, affine on each edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeFunction {
    tree: FiniteTree,
    values: Vec<Q>,
}

impl TreeFunction {
    pub fn new(tree: FiniteTree, values: Vec<Q>) -> Result<Self> {
        if values.len() != tree.vertices.len() {
            return Err(BerkError::ParamDomain("one value per vertex".into()));
        }
        Ok(TreeFunction { tree, values })
    }

    pub fn from_fn(tree: FiniteTree, f: impl Fn(&BerkPoint) -> Result<Q>) -> Result<Self> {
        let values = tree.vertices.iter().map(f).collect::<Result<_>>()?;
        Ok(TreeFunction { tree, values })
    }

    pub fn tree(&self) -> &FiniteTree {
        &self.tree
    }

    pub fn values(&self) -> &[Q] {
        &self.values
    }

    /// Slope on the edge from child i up to its parent.
    pub fn slope(&self, i: usize) -> Option<Q> {
        let p = self.tree.parent[i]?;
        Some((&self.values[p] - &self.values[i]) / &self.tree.lengths[i])
    }

    /// Value at any point, through the retraction onto the tree.
    pub fn eval(&self, s: &BerkPoint) -> Q {
        let (i, d) = self.tree.retract(s);
        match self.slope(i) {
            Some(k) if !d.is_zero() => &self.values[i] + k * d,
            _ => self.values[i].clone(),
        }
    }

    /// Δφ: at each vertex, the sum of the outgoing slopes.
    pub fn laplacian(&self) -> AtomicMeasure {
        let mut out = AtomicMeasure::zero();
        for i in 0..self.values.len() {
            if let (Some(p), Some(k)) = (self.tree.parent[i], self.slope(i)) {
                out.add_mass(self.tree.vertices[i].clone(), k.clone());
                out.add_mass(self.tree.vertices[p].clone(), -k);
            }
        }
        out
    }

    /// ⟨φ, φ⟩ = ∫ (∂φ)² dλ, with λ the d_H length.
    pub fn dirichlet_norm(&self) -> Q {
        (0..self.values.len())
            .filter_map(|i| self.slope(i).map(|k| &k * &k * &self.tree.lengths[i]))
            .sum()
    }
}

fn finite_gromov(s: &BerkPoint, t: &BerkPoint, base: &BerkPoint) -> Result<Q> {
    gromov_product(s, t, base)?.ok_or(BerkError::TypeIAtom)
}

/// ĝ_ρ(S) = −ρ(P¹) − Σ m_i ⟨S, S_i⟩_{S0} at each query point.
pub fn potential_of_measure(rho: &AtomicMeasure, base: &BerkPoint, queries: &[BerkPoint]) -> Result<Vec<Q>> {
    if !base.is_type2() {
        return Err(BerkError::TypeIOperand);
    }
    let mass = rho.total_mass();
    queries
        .iter()
        .map(|s| {
            let mut acc = -mass.clone();
            for (t, w) in rho.atoms() {
                acc -= w * finite_gromov(s, t, base)?;
            }
            Ok(acc)
        })
        .collect()
}

/// The potential ĝ_ρ on the hull of the atoms and the base point.
pub fn potential_on_hull(rho: &AtomicMeasure, base: &BerkPoint) -> Result<TreeFunction> {
    let mut pts: Vec<BerkPoint> = rho.points().cloned().collect();
    pts.push(base.clone());
    if pts.iter().any(|s| !s.is_type2()) {
        return Err(BerkError::TypeIAtom);
    }
    let tree = FiniteTree::convex_hull(&pts, &Q::zero())?;
    let values = potential_of_measure(rho, base, tree.vertices())?;
    TreeFunction::new(tree, values)
}

/// (ρ, ρ') = Σ m_i m'_j ⟨S_i, S'_j⟩_{S0} for mass-zero measures on the hyperbolic space.
pub fn energy_pairing(rho: &AtomicMeasure, rho2: &AtomicMeasure, base: &BerkPoint) -> Result<Q> {
    if !rho.total_mass().is_zero() || !rho2.total_mass().is_zero() {
        return Err(BerkError::NonzeroMass);
    }
    if rho.points().chain(rho2.points()).any(|s| !s.is_type2()) {
        return Err(BerkError::TypeIAtom);
    }
    let mut acc = Q::zero();
    for (s, w) in rho.atoms() {
        for (t, w2) in rho2.atoms() {
            acc += w * w2 * finite_gromov(s, t, base)?;
        }
    }
    Ok(acc)
}

pub fn dirichlet_norm(psi: &TreeFunction) -> Q {
    psi.dirichlet_norm()
}

/// ∫ (φ∘fⁿ) ψ dρ − ∫ φ dρ · ∫ ψ dρ.
pub fn correlation(
    f: &dyn PointMap,
    rho: &AtomicMeasure,
    phi: &dyn Fn(&BerkPoint) -> Result<Q>,
    psi: &dyn Fn(&BerkPoint) -> Result<Q>,
    n: usize,
) -> Result<Q> {
    let mut joint = Q::zero();
    for (s, w) in rho.atoms() {
        let mut x = s.clone();
        for _ in 0..n {
            x = f.image(&x)?;
        }
        joint += w * phi(&x)? * psi(s)?;
    }
    Ok(joint - rho.integrate(phi)? * rho.integrate(psi)?)
}

/// sup over the atoms and base of ∫ ⟨S, S'⟩_{S0} dρ(S'); the mixing constant is 2·√ of it.
pub fn gromov_sup(rho: &AtomicMeasure, base: &BerkPoint) -> Result<Q> {
    let mut best = Q::zero();
    for s in rho.points() {
        let mut acc = Q::zero();
        for (t, w) in rho.atoms() {
            acc += w * finite_gromov(s, t, base)?;
        }
        if acc > best {
            best = acc;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests;
