//! Approximations of the equilibrium measure by normalized iterated
//! pullbacks, and the diagnostics built on them.

use num_traits::{ToPrimitive, Zero};

use crate::berkovich::{hyperbolic_distance, join, order_leq, BerkPoint};
use crate::error::{BerkError, Result};
use crate::measures_potentials::{pullback, AtomicMeasure};
use crate::rational_map::RationalMap;
use crate::valued_field::arith::{floor_q, q_to_f64, qi};
use crate::valued_field::roots::roots;
use crate::valued_field::{Backend, Q};

/// deg(R)^(−n) (R^*)^n [base].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquilibriumApprox {
    pub map: RationalMap,
    pub base: BerkPoint,
    pub n: usize,
    pub measure: AtomicMeasure,
}

/// All levels ρ_0, …, ρ_n of the pullback chain.
pub fn equilibrium_chain(r: &RationalMap, base: &BerkPoint, n: usize) -> Result<Vec<AtomicMeasure>> {
    let d = r.degree();
    if d < 2 {
        return Err(BerkError::ParamDomain("equilibrium measure needs degree at least 2".into()));
    }
    if !base.is_type2() {
        return Err(BerkError::TypeIOperand);
    }
    let inv_d = Q::new(1.into(), (d as i64).into());
    let mut levels = vec![AtomicMeasure::dirac(base.clone())];
    for k in 0..n {
        let next = pullback(r, &levels[k]).map_err(|e| at_depth(e, k))?;
        levels.push(next.scale(&inv_d));
    }
    Ok(levels)
}

fn at_depth(e: BerkError, k: usize) -> BerkError {
    match e {
        BerkError::ExtensionBound(m) => BerkError::ExtensionBound(format!("depth {k} reached: {m}")),
        BerkError::PrecisionExhausted(m) => BerkError::PrecisionExhausted(format!("depth {k} reached: {m}")),
        e => e,
    }
}

pub fn equilibrium_approx(r: &RationalMap, base: &BerkPoint, n: usize) -> Result<EquilibriumApprox> {
    let measure = equilibrium_chain(r, base, n)?.pop().expect("chain has level 0");
    Ok(EquilibriumApprox { map: r.clone(), base: base.clone(), n, measure })
}

/// Total variation between deg(R)^(−1) R^* ρ_n and a fresh ρ_{n+1}.
pub fn invariance_defect(a: &EquilibriumApprox) -> Result<Q> {
    let d = qi(a.map.degree() as i64);
    let pulled = pullback(&a.map, &a.measure)?.scale(&(qi(1) / d));
    let fresh = equilibrium_approx(&a.map, &a.base, a.n + 1)?;
    Ok(pulled.total_variation(&fresh.measure))
}

/// The image of a point under z ↦ 1/z.
pub fn invert_point(s: &BerkPoint, backend: &Backend) -> Result<BerkPoint> {
    Ok(match s {
        BerkPoint::Infinity => BerkPoint::TypeI(backend.zero()),
        BerkPoint::TypeI(z) if z.is_zero() => BerkPoint::Infinity,
        BerkPoint::TypeI(z) => BerkPoint::TypeI(z.inv()?),
        BerkPoint::TypeII { center, logr } => match center.valuation() {
            Some(v) if &v < logr => BerkPoint::type2(&center.inv()?, logr - qi(2) * v)?,
            _ => BerkPoint::type2(&center.backend().zero(), -logr)?,
        },
    })
}

/// ρ of the hull of the chordal ball of radius base^(−r_log) about z;
/// `None` stands for r_log = −∞, the whole line.
pub fn ball_mass(rho: &AtomicMeasure, z: &BerkPoint, r_log: Option<&Q>) -> Result<Q> {
    let Some(r_log) = r_log else {
        return Ok(rho.total_mass());
    };
    if r_log <= &Q::zero() {
        return Ok(rho.total_mass());
    }
    let outside = match z {
        BerkPoint::Infinity => true,
        BerkPoint::TypeI(w) => w.valuation().is_some_and(|v| v < Q::zero()),
        BerkPoint::TypeII { .. } => return Err(BerkError::ParamDomain("balls are centered at type I points".into())),
    };
    let (center, flip) = match z {
        BerkPoint::Infinity => (None, true),
        BerkPoint::TypeI(w) if outside => (Some(w.inv()?), true),
        BerkPoint::TypeI(w) => (Some(w.clone()), false),
        _ => unreachable!(),
    };
    let backend = rho.points().find_map(|s| s.backend()).copied();
    let Some(backend) = backend.or(center.as_ref().map(|c| *c.backend())) else {
        return Ok(rho.total_mass());
    };
    let center = center.unwrap_or_else(|| backend.zero());
    let ball = BerkPoint::type2(&center, r_log.clone())?;
    let mut acc = Q::zero();
    for (s, w) in rho.atoms() {
        let s = if flip { invert_point(s, &backend)? } else { s.clone() };
        if order_leq(&s, &ball) {
            acc += w;
        }
    }
    Ok(acc)
}

/// A chordal Lipschitz bound for R: |Res|^(−2) of the normalized
/// homogeneous pair, raised to deg(R) + 1 when smaller.
pub fn lipschitz_bound(r: &RationalMap) -> Result<f64> {
    let d = r.degree();
    let res = r.resultant()?;
    let v = res.valuation().ok_or_else(|| BerkError::ParamDomain("P and Q have a common zero".into()))?;
    let m = r.coefficient_valuation().unwrap_or_else(Q::zero);
    let v_norm = v - qi(2 * d as i64) * m;
    let base = r.backend().norm_base();
    let lip = base.powf(2.0 * q_to_f64(&v_norm));
    Ok(lip.max(d as f64 + 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HolderFit {
    pub c: f64,
    pub alpha: f64,
    pub lipschitz: f64,
    pub checked: usize,
    pub violations: usize,
}

/// Fits C on the calibration balls for α = log deg / log M, then counts
/// the test balls with mass > C·r^α. Balls are (center, r_log).
pub fn holder_probe(
    a: &EquilibriumApprox,
    calibration: &[(BerkPoint, Q)],
    test: &[(BerkPoint, Q)],
) -> Result<HolderFit> {
    let d = a.map.degree() as f64;
    let lipschitz = lipschitz_bound(&a.map)?;
    let alpha = (d.ln() / lipschitz.ln()).min(1.0);
    let base = a.map.backend().norm_base();
    let radius = |r_log: &Q| base.powf(-q_to_f64(r_log));
    let mut c: f64 = 0.0;
    for (z, r_log) in calibration {
        let m = q_to_f64(&ball_mass(&a.measure, z, Some(r_log))?);
        c = c.max(m / radius(r_log).powf(alpha));
    }
    let mut violations = 0;
    for (z, r_log) in test {
        let m = q_to_f64(&ball_mass(&a.measure, z, Some(r_log))?);
        if m > c * radius(r_log).powf(alpha) * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    Ok(HolderFit { c, alpha, lipschitz, checked: test.len(), violations })
}

/// exp ∫ log deg_R dρ.
pub fn mean_degree(r: &RationalMap, rho: &AtomicMeasure) -> Result<f64> {
    let mut acc = 0.0;
    for (s, w) in rho.atoms() {
        acc += q_to_f64(w) * (r.local_degree(s)? as f64).ln();
    }
    Ok(acc.exp())
}

/// log deg(R) − log mean_degree, a lower bound for the metric entropy.
pub fn entropy_lower_bound(r: &RationalMap, rho: &AtomicMeasure) -> Result<f64> {
    let mut acc = 0.0;
    for (s, w) in rho.atoms() {
        acc += q_to_f64(w) * (r.local_degree(s)? as f64).ln();
    }
    Ok((r.degree() as f64).ln() - acc)
}

/// Jac(S) = deg(R)/deg_R(S).
pub fn jacobian(r: &RationalMap, s: &BerkPoint) -> Result<Q> {
    let k = r.local_degree(s)?;
    Ok(Q::new((r.degree() as i64).into(), (k as i64).into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Detection {
    /// Whether R has potential good reduction.
    pub good: bool,
    /// The totally invariant type II point, when found.
    pub point: Option<BerkPoint>,
    /// Pullback depth at which the decision was made.
    pub level: usize,
}

fn totally_invariant(r: &RationalMap, s: &BerkPoint) -> bool {
    matches!(r.preimages(s), Ok(f) if f == vec![(s.clone(), r.degree())])
}

fn diameter(rho: &AtomicMeasure) -> Q {
    let pts: Vec<&BerkPoint> = rho.points().collect();
    let mut best = Q::zero();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if let Ok(d) = hyperbolic_distance(pts[i], pts[j]) {
                if d > best {
                    best = d;
                }
            }
        }
    }
    best
}

fn max_mass(rho: &AtomicMeasure) -> Q {
    rho.atoms().map(|(_, w)| w.clone()).max().unwrap_or_else(Q::zero)
}

/// Continues a single-atom chain S_{n−2}, S_{n−1}, S_n geometrically.
fn extrapolate(a: &BerkPoint, b: &BerkPoint, c: &BerkPoint) -> Option<BerkPoint> {
    let d1 = hyperbolic_distance(a, b).ok()?;
    let d2 = hyperbolic_distance(b, c).ok()?;
    if d1.is_zero() || d2.is_zero() || d2 >= d1 {
        return None;
    }
    let ratio = &d2 / &d1;
    let ext = &d2 * &ratio / (qi(1) - &ratio);
    let v = c.logr()?;
    let w = if order_leq(b, c) { v - ext } else { v + ext };
    BerkPoint::type2(c.center()?, w).ok()
}

/// Theorem E as a semi-decision: `good` when a totally invariant type II
/// point is found, not good when the pullbacks spread (at least two atoms,
/// d_H-diameter ≥ 1/4, strictly decreasing top mass over three levels).
pub fn theorem_e_detect(r: &RationalMap, n_max: usize) -> Result<Detection> {
    if r.degree() < 2 {
        return Err(BerkError::ParamDomain("detection needs degree at least 2".into()));
    }
    let base = BerkPoint::can(r.backend());
    let margin = Q::new(1.into(), 4.into());
    let mut levels: Vec<AtomicMeasure> = vec![AtomicMeasure::dirac(base.clone())];
    let inv_d = Q::new(1.into(), (r.degree() as i64).into());
    let mut tried: Vec<BerkPoint> = Vec::new();
    for n in 0..=n_max {
        let rho = &levels[n];
        let mut cands: Vec<BerkPoint> = Vec::new();
        let pts: Vec<&BerkPoint> = rho.points().collect();
        if pts.iter().all(|s| s.is_type2()) {
            let top = pts.iter().skip(1).fold(pts[0].clone(), |acc, s| join(&acc, s));
            cands.push(top);
        }
        if n >= 2 && levels[n - 2..=n].iter().all(|m| m.len() == 1) {
            let s: Vec<&BerkPoint> = levels[n - 2..=n].iter().map(|m| m.points().next().unwrap()).collect();
            if let Some(x) = extrapolate(s[0], s[1], s[2]) {
                cands.push(x);
            }
        }
        for c in cands {
            if !c.is_type2() || tried.contains(&c) {
                continue;
            }
            if totally_invariant(r, &c) {
                return Ok(Detection { good: true, point: Some(c), level: n });
            }
            tried.push(c);
        }
        if n >= 2 {
            let w = &levels[n - 2..=n];
            let spread = w.iter().all(|m| m.len() >= 2 && diameter(m) >= margin)
                && max_mass(&w[0]) > max_mass(&w[1])
                && max_mass(&w[1]) > max_mass(&w[2]);
            if spread {
                return Ok(Detection { good: false, point: None, level: n });
            }
        }
        if n < n_max {
            let next = pullback(r, rho).map_err(|e| at_depth(e, n))?.scale(&inv_d);
            levels.push(next);
        }
    }
    Err(BerkError::Inconclusive(n_max))
}

/// [Rⁿ = S]: the solutions of Rⁿ(z) = S(z) with multiplicity, ∞ included.
pub fn periodic_solution_measure(r: &RationalMap, s: &RationalMap, n: u32) -> Result<AtomicMeasure> {
    let rn = r.iterate(n);
    let (a, b) = (rn.num(), rn.den());
    let (c, d) = (s.num(), s.den());
    let eq = a.mul(d).sub(&b.mul(c)).trimmed();
    let total = rn.degree() + s.degree();
    let Some(deg) = eq.degree() else {
        return Err(BerkError::ParamDomain("Rⁿ = S identically".into()));
    };
    let rts = roots(&eq)?;
    if !rts.is_resolved() {
        return Err(BerkError::ExtensionBound(format!(
            "{} solutions need a residue extension",
            rts.clusters.iter().map(|c| c.count).sum::<usize>()
        )));
    }
    let mut out = AtomicMeasure::zero();
    for (z, m) in rts.roots {
        out.add_mass(BerkPoint::TypeI(z), qi(m as i64));
    }
    if total > deg {
        out.add_mass(BerkPoint::Infinity, qi((total - deg) as i64));
    }
    Ok(out)
}

/// A finite partition of the line: each point goes to the smallest ball
/// B(a, k·step), 0 ≤ k ≤ depth, containing it, in the chart of 0 for
/// points of the closed unit ball and in the chart of ∞ (after z ↦ 1/z)
/// otherwise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BallPartition {
    pub depth: u32,
    pub step: Q,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cell {
    pub at_infinity: bool,
    pub ball: BerkPoint,
}

impl BallPartition {
    pub fn residue(depth: u32) -> Self {
        BallPartition { depth, step: qi(1) }
    }

    pub fn with_step(depth: u32, step: Q) -> Self {
        BallPartition { depth, step }
    }

    /// Parses "residue:depth=2" or "residue:depth=4,step=1/2".
    pub fn parse(s: &str) -> Result<Self> {
        let rest = s.strip_prefix("residue:").ok_or_else(|| BerkError::Parse(format!("partition {s}")))?;
        let mut p = BallPartition::residue(2);
        for kv in rest.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| BerkError::Parse(format!("partition {s}")))?;
            match k.trim() {
                "depth" => p.depth = v.trim().parse().map_err(|_| BerkError::Parse(format!("depth {v}")))?,
                "step" => {
                    p.step = crate::valued_field::arith::parse_q(v.trim())
                        .filter(|x| x > &Q::zero())
                        .ok_or_else(|| BerkError::Parse(format!("step {v}")))?
                }
                _ => return Err(BerkError::Parse(format!("partition key {k}"))),
            }
        }
        Ok(p)
    }

    pub fn cell(&self, s: &BerkPoint, backend: &Backend) -> Result<Cell> {
        let in_unit = match s {
            BerkPoint::Infinity => false,
            BerkPoint::TypeI(z) => z.valuation().is_none_or(|v| v >= Q::zero()),
            BerkPoint::TypeII { center, logr } => {
                logr >= &Q::zero() && center.valuation().is_none_or(|v| v >= Q::zero())
            }
        };
        let (t, at_infinity) = if in_unit { (s.clone(), false) } else { (invert_point(s, backend)?, true) };
        let (center, v) = match &t {
            BerkPoint::TypeI(z) => (z.clone(), None),
            BerkPoint::TypeII { center, logr } => (center.clone(), Some(logr.clone())),
            BerkPoint::Infinity => (backend.zero(), None),
        };
        let mut k = self.depth as i64;
        if let Some(v) = v {
            k = k.min(floor_q(&(v / &self.step)).max(0));
        }
        let ball = BerkPoint::type2(&center, &self.step * qi(k))?;
        Ok(Cell { at_infinity, ball })
    }

    /// Masses of the cells met by ρ.
    pub fn masses(&self, rho: &AtomicMeasure) -> Result<Vec<(Cell, Q)>> {
        let Some(backend) = rho.points().find_map(|s| s.backend()).copied() else {
            return Ok(vec![]);
        };
        let mut out: std::collections::BTreeMap<Cell, Q> = Default::default();
        for (s, w) in rho.atoms() {
            *out.entry(self.cell(s, &backend)?).or_insert_with(Q::zero) += w;
        }
        Ok(out.into_iter().collect())
    }

    /// Largest cellwise mass difference.
    pub fn distance(&self, a: &AtomicMeasure, b: &AtomicMeasure) -> Result<f64> {
        let ma = self.masses(a)?;
        let mb = self.masses(b)?;
        let mut cells: Vec<&Cell> = ma.iter().map(|x| &x.0).chain(mb.iter().map(|x| &x.0)).collect();
        cells.sort();
        cells.dedup();
        let get = |m: &[(Cell, Q)], c: &Cell| m.iter().find(|x| &x.0 == c).map(|x| x.1.clone()).unwrap_or_default();
        Ok(cells
            .into_iter()
            .map(|c| (get(&ma, c) - get(&mb, c)).to_f64().unwrap_or(f64::NAN).abs())
            .fold(0.0, f64::max))
    }
}
