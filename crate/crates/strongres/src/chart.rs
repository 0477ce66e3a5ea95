use std::collections::{BTreeMap, BTreeSet};

use crate::automorphism::Automorphism;
use crate::error::{Error, Result};
use crate::ideal::Ideal;
use crate::poly::{Polynomial, Ring, RingRef};

pub type DivisorId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DivisorRecord {
    pub id: DivisorId,
    pub coordinate: usize,
    pub birth: usize,
    /// Divisor whose role this one continues (a strict transform across a flag blowup).
    pub lineage: Option<DivisorId>,
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub id: usize,
    /// (parent chart id, pivot coordinate).
    pub parent: Option<(usize, usize)>,
    /// Number (from 1) of the global step that created this chart.
    pub created_at: Option<usize>,
    /// Images of the parent's coordinates under the blowup substitution.
    pub edge: Vec<Polynomial>,
    /// Coordinate changes applied in this chart, in order.
    pub automorphisms: Vec<Automorphism>,
    /// Images of the root coordinates in this chart's coordinates.
    pub to_root: Vec<Polynomial>,
    pub exceptional: Vec<DivisorRecord>,
    /// Coordinates blown up to create the children.
    pub center: Option<Vec<usize>>,
    pub children: Vec<usize>,
}

impl Chart {
    pub fn divisor_at(&self, coordinate: usize) -> Option<&DivisorRecord> {
        self.exceptional.iter().find(|d| d.coordinate == coordinate)
    }

    pub fn divisor(&self, id: DivisorId) -> Option<&DivisorRecord> {
        self.exceptional.iter().find(|d| d.id == id)
    }

    pub fn exceptional_coordinates(&self) -> BTreeSet<usize> {
        self.exceptional.iter().map(|d| d.coordinate).collect()
    }

    /// Images of the parent's coordinates composed with this chart's automorphisms.
    pub fn pullback(&self) -> Vec<Polynomial> {
        let mut images = self.edge.clone();
        for phi in &self.automorphisms {
            images = phi.apply_all(&images);
        }
        images
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    pub index: usize,
    /// (chart id, center coordinates) for every chart blown up at this step.
    pub centers: Vec<(usize, Vec<usize>)>,
    pub divisor: DivisorId,
}

#[derive(Debug, Clone)]
pub struct ChartTree {
    ring: RingRef,
    charts: Vec<Chart>,
    steps: Vec<StepRecord>,
    next_divisor: DivisorId,
}

fn check_coordinates(ring: &RingRef, s: &[usize]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for &i in s {
        if i >= ring.arity() {
            return Err(Error::UnknownCoordinate(i));
        }
        if !seen.insert(i) {
            return Err(Error::RepeatedCoordinate(i));
        }
    }
    if s.is_empty() {
        return Err(Error::PreconditionViolated("empty center".into()));
    }
    Ok(())
}

impl ChartTree {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let ring = Ring::new(names)?;
        Ok(Self::on_ring(&ring))
    }

    pub fn on_ring(ring: &RingRef) -> Self {
        let ids: Vec<Polynomial> = (0..ring.arity()).map(|i| Polynomial::var(ring, i)).collect();
        ChartTree {
            ring: ring.clone(),
            charts: vec![Chart {
                id: 0,
                parent: None,
                created_at: None,
                edge: ids.clone(),
                automorphisms: Vec::new(),
                to_root: ids,
                exceptional: Vec::new(),
                center: None,
                children: Vec::new(),
            }],
            steps: Vec::new(),
            next_divisor: 1,
        }
    }

    /// Seeds the root with exceptional hyperplanes V(x_i), born at step 0.
    pub fn seed_exceptional(&mut self, coordinates: &[usize]) -> Result<Vec<DivisorId>> {
        if coordinates.is_empty() {
            return Ok(Vec::new());
        }
        check_coordinates(&self.ring, coordinates)?;
        let mut ids = Vec::new();
        for &c in coordinates {
            let id = self.fresh_divisor();
            self.charts[0].exceptional.push(DivisorRecord {
                id,
                coordinate: c,
                birth: 0,
                lineage: None,
            });
            ids.push(id);
        }
        Ok(ids)
    }

    pub fn ring(&self) -> &RingRef {
        &self.ring
    }

    pub fn chart(&self, id: usize) -> &Chart {
        &self.charts[id]
    }

    pub fn charts(&self) -> &[Chart] {
        &self.charts
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.charts
            .iter()
            .filter(|c| c.children.is_empty())
            .map(|c| c.id)
            .collect()
    }

    pub fn fresh_divisor(&mut self) -> DivisorId {
        let id = self.next_divisor;
        self.next_divisor += 1;
        id
    }

    pub fn record_step(&mut self, centers: Vec<(usize, Vec<usize>)>, divisor: DivisorId) -> usize {
        let index = self.steps.len();
        self.steps.push(StepRecord {
            index,
            centers,
            divisor,
        });
        index
    }

    /// Applies a coordinate change inside a leaf chart; exceptional coordinates must be fixed.
    pub fn apply_automorphism(&mut self, chart: usize, phi: &Automorphism) -> Result<()> {
        if phi.is_identity() {
            return Ok(());
        }
        let frozen = self.charts[chart].exceptional_coordinates();
        let checked = Automorphism::new(&self.ring, phi.moves().to_vec(), &frozen)?;
        let c = &mut self.charts[chart];
        c.to_root = checked.apply_all(&c.to_root);
        c.automorphisms.push(checked);
        Ok(())
    }

    /// Blows up V(x_i : i in s) in a leaf chart. Codimension one centers are bookkeeping only.
    pub fn blowup(
        &mut self,
        chart: usize,
        s: &[usize],
        divisor: DivisorId,
        step: usize,
        lineage: Option<DivisorId>,
    ) -> Result<Vec<usize>> {
        check_coordinates(&self.ring, s)?;
        if !self.charts[chart].children.is_empty() {
            return Err(Error::PreconditionViolated(format!("chart {chart} is not a leaf")));
        }
        if s.len() == 1 {
            let p = s[0];
            let c = &mut self.charts[chart];
            if c.divisor_at(p).is_none() {
                c.exceptional.push(DivisorRecord {
                    id: divisor,
                    coordinate: p,
                    birth: step,
                    lineage,
                });
                c.exceptional.sort_by_key(|d| d.id);
            }
            return Ok(Vec::new());
        }
        let mut pivots = s.to_vec();
        pivots.sort();
        let mut created = Vec::new();
        for &p in &pivots {
            let parent = self.charts[chart].clone();
            let edge: Vec<Polynomial> = (0..self.ring.arity())
                .map(|i| {
                    let x = Polynomial::var(&self.ring, i);
                    if i != p && s.contains(&i) {
                        &Polynomial::var(&self.ring, p) * &x
                    } else {
                        x
                    }
                })
                .collect();
            let to_root: Vec<Polynomial> = parent
                .to_root
                .iter()
                .map(|g| g.substitute(&edge).expect("arity"))
                .collect();
            let mut exceptional: Vec<DivisorRecord> = parent
                .exceptional
                .iter()
                .filter(|d| d.coordinate != p)
                .cloned()
                .collect();
            exceptional.push(DivisorRecord {
                id: divisor,
                coordinate: p,
                birth: step,
                lineage,
            });
            exceptional.sort_by_key(|d| d.id);
            let id = self.charts.len();
            self.charts.push(Chart {
                id,
                parent: Some((chart, p)),
                created_at: Some(step),
                edge,
                automorphisms: Vec::new(),
                to_root,
                exceptional,
                center: None,
                children: Vec::new(),
            });
            created.push(id);
        }
        let c = &mut self.charts[chart];
        c.center = Some(pivots);
        c.children = created.clone();
        Ok(created)
    }

    /// Pullback of a root ideal to a chart.
    pub fn total_transform(&self, chart: usize, ideal: &Ideal) -> Ideal {
        ideal
            .substitute(&self.charts[chart].to_root)
            .expect("arity matches the root ring")
    }

    /// Maximal exceptional-monomial factorization of an ideal in a chart.
    pub fn factor_exceptional(&self, chart: usize, ideal: &Ideal) -> (BTreeMap<DivisorId, u32>, Ideal) {
        factor_exceptional(&self.charts[chart].exceptional, ideal)
    }

    /// Composite pullback from the root to `chart`, rebuilt from the individual edges.
    pub fn composed_pullback(&self, chart: usize) -> Vec<Polynomial> {
        let mut path = vec![chart];
        let mut cur = chart;
        while let Some((p, _)) = self.charts[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        let root = &self.charts[path[0]];
        let mut images: Vec<Polynomial> = (0..self.ring.arity())
            .map(|i| Polynomial::var(&self.ring, i))
            .collect();
        for phi in &root.automorphisms {
            images = phi.apply_all(&images);
        }
        for &c in &path[1..] {
            let pull = self.charts[c].pullback();
            images = images
                .iter()
                .map(|g| g.substitute(&pull).expect("arity"))
                .collect();
        }
        images
    }
}

/// Splits off the largest power of every exceptional coordinate dividing all generators.
pub fn factor_exceptional(
    registry: &[DivisorRecord],
    ideal: &Ideal,
) -> (BTreeMap<DivisorId, u32>, Ideal) {
    let ring = ideal.ring().clone();
    let mut exps = BTreeMap::new();
    let mut mono = vec![0u32; ring.arity()];
    for d in registry {
        let k = ideal
            .generators()
            .iter()
            .map(|g| g.order_along(&[d.coordinate]).unwrap_or(0))
            .min()
            .unwrap_or(0);
        exps.insert(d.id, k);
        mono[d.coordinate] = k;
    }
    let weak = Ideal::new(
        &ring,
        ideal.generators().iter().map(|g| g.div_monomial(&mono)).collect(),
    );
    (exps, weak)
}

/// J = prod x_H^a * weak (controlled), J0 O = prod x_H^c * weak (total), threshold b.
/// With b = 0 the a-exponents equal the c-exponents and the object is a total transform.
#[derive(Debug, Clone)]
pub struct MarkedFactorization {
    pub b: u32,
    pub a: BTreeMap<DivisorId, u32>,
    pub c: BTreeMap<DivisorId, u32>,
    pub weak: Ideal,
}

impl MarkedFactorization {
    /// Factorization of an ideal in a chart with the given registry, as the initial object.
    pub fn initial(registry: &[DivisorRecord], ideal: &Ideal, b: u32) -> Self {
        let (exps, weak) = factor_exceptional(registry, ideal);
        MarkedFactorization {
            b,
            a: exps.clone(),
            c: exps,
            weak,
        }
    }

    fn monomial(&self, registry: &[DivisorRecord], exps: &BTreeMap<DivisorId, u32>) -> Vec<u32> {
        let mut m = vec![0u32; self.weak.ring().arity()];
        for d in registry {
            m[d.coordinate] += exps.get(&d.id).copied().unwrap_or(0);
        }
        m
    }

    /// The controlled ideal J = prod x_H^a * weak.
    pub fn controlled_ideal(&self, registry: &[DivisorRecord]) -> Ideal {
        self.weak.times_monomial(&self.monomial(registry, &self.a))
    }

    /// The total ideal prod x_H^c * weak.
    pub fn total_ideal(&self, registry: &[DivisorRecord]) -> Ideal {
        self.weak.times_monomial(&self.monomial(registry, &self.c))
    }

    /// Coordinate exponents of the monomial prod x_H^a.
    pub fn a_monomial(&self, registry: &[DivisorRecord]) -> Vec<u32> {
        self.monomial(registry, &self.a)
    }
}

/// Order of an ideal along the coordinate subspace V(x_i : i in s).
pub fn order_along_coordinates(ideal: &Ideal, s: &[usize]) -> u32 {
    ideal
        .generators()
        .iter()
        .map(|g| g.order_along(s).unwrap_or(0))
        .min()
        .unwrap_or(0)
}

/// Applies the transform laws across the blowup of V(x_s) in the chart with pivot p
/// (p = s[0] for a codimension-one center). `new_divisor` is the id of the divisor at p in
/// the child; it equals the existing id when a divisor is blown up onto itself.
pub fn controlled_transform(
    parent: &MarkedFactorization,
    registry: &[DivisorRecord],
    s: &[usize],
    pivot: usize,
    new_divisor: DivisorId,
) -> Result<MarkedFactorization> {
    let ring = parent.weak.ring().clone();
    let nu = order_along_coordinates(&parent.weak, s);
    let in_center: Vec<&DivisorRecord> = registry.iter().filter(|d| s.contains(&d.coordinate)).collect();
    let order: u32 = in_center
        .iter()
        .map(|d| parent.a.get(&d.id).copied().unwrap_or(0))
        .sum::<u32>()
        + nu;
    if order < parent.b {
        return Err(Error::ImpermissibleCenter {
            order,
            threshold: parent.b,
        });
    }
    let total: u32 = in_center
        .iter()
        .map(|d| parent.c.get(&d.id).copied().unwrap_or(0))
        .sum::<u32>()
        + nu;
    let images: Vec<Polynomial> = (0..ring.arity())
        .map(|i| {
            let x = Polynomial::var(&ring, i);
            if i != pivot && s.contains(&i) {
                &Polynomial::var(&ring, pivot) * &x
            } else {
                x
            }
        })
        .collect();
    let mut div = vec![0u32; ring.arity()];
    div[pivot] = nu;
    let weak = Ideal::new(
        &ring,
        parent
            .weak
            .generators()
            .iter()
            .map(|g| g.substitute(&images).expect("arity").div_monomial(&div))
            .collect(),
    );
    let mut a = BTreeMap::new();
    let mut c = BTreeMap::new();
    for d in registry {
        if d.coordinate == pivot {
            continue;
        }
        a.insert(d.id, parent.a.get(&d.id).copied().unwrap_or(0));
        c.insert(d.id, parent.c.get(&d.id).copied().unwrap_or(0));
    }
    a.insert(new_divisor, order - parent.b);
    c.insert(new_divisor, total);
    Ok(MarkedFactorization {
        b: parent.b,
        a,
        c,
        weak,
    })
}

/// A chart restricted to a flag V(z): the remaining variables and the restricted ideals.
#[derive(Debug, Clone)]
pub struct FlagView {
    pub ring: RingRef,
    /// Original index of each remaining variable.
    pub keep: Vec<usize>,
    pub exceptional: Vec<DivisorRecord>,
}

impl FlagView {
    pub fn restrict(&self, ideal: &Ideal) -> Ideal {
        let drop: Vec<usize> = (0..ideal.ring().arity())
            .filter(|i| !self.keep.contains(i))
            .collect();
        let r = ideal.restrict_zero(&drop);
        Ideal::new(
            &self.ring,
            r.generators()
                .iter()
                .map(|g| g.restrict_into(&self.ring, &self.keep).expect("flag variables removed"))
                .collect(),
        )
    }
}

pub fn restrict_to_flag(chart: &Chart, ring: &RingRef, z: &[usize]) -> Result<FlagView> {
    for &i in z {
        if i >= ring.arity() {
            return Err(Error::UnknownCoordinate(i));
        }
        if chart.divisor_at(i).is_some() {
            return Err(Error::FlagAlongExceptional(i));
        }
    }
    let keep: Vec<usize> = (0..ring.arity()).filter(|i| !z.contains(i)).collect();
    let sub = ring.sub_ring(&keep);
    let exceptional = chart
        .exceptional
        .iter()
        .map(|d| DivisorRecord {
            coordinate: keep.iter().position(|&k| k == d.coordinate).expect("kept"),
            ..d.clone()
        })
        .collect();
    Ok(FlagView {
        ring: sub,
        keep,
        exceptional,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(tree: &ChartTree) -> Ideal {
        let r = tree.ring().clone();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let f = &(&(&x2 * &x3) + &x2.pow(3)) + &x3.pow(3);
        Ideal::new(&r, vec![x1, f])
    }

    #[test]
    fn init_and_errors() {
        let t = ChartTree::new(&["x1", "x2", "x3"]).unwrap();
        assert_eq!(t.charts().len(), 1);
        assert!(t.chart(0).exceptional.is_empty());
        assert!(ChartTree::new::<&str>(&[]).is_err());
        assert!(ChartTree::new(&["x", "x"]).is_err());
        let mut t = t;
        assert_eq!(t.blowup(0, &[0, 0], 1, 0, None), Err(Error::RepeatedCoordinate(0)));
        assert_eq!(t.blowup(0, &[5], 1, 0, None), Err(Error::UnknownCoordinate(5)));
    }

    #[test]
    fn origin_blowup_of_the_curve() {
        let mut t = ChartTree::new(&["x1", "x2", "x3"]).unwrap();
        let d = t.fresh_divisor();
        let kids = t.blowup(0, &[0, 1, 2], d, 0, None).unwrap();
        assert_eq!(kids.len(), 3);
        let i = curve(&t);
        let r = t.ring().clone();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let tt = t.total_transform(kids[1], &i);
        let expected = Ideal::new(
            &r,
            vec![
                &x2 * &x1,
                &x2.pow(2) * &(&(&x3 + &x2) + &(&x2 * &x3.pow(3))),
            ],
        );
        assert!(tt.equals(&expected));
        let (c, weak) = t.factor_exceptional(kids[1], &tt);
        assert_eq!(c.get(&d), Some(&1));
        assert!(weak.equals(&Ideal::new(
            &r,
            vec![x1.clone(), &x2 * &(&(&x3 + &x2) + &(&x2 * &x3.pow(3)))]
        )));
        let (c0, weak0) = t.factor_exceptional(kids[0], &t.total_transform(kids[0], &i));
        assert_eq!(c0.get(&d), Some(&1));
        assert!(weak0.is_unit());
    }

    #[test]
    fn controlled_law_matches_factorization() {
        let mut t = ChartTree::new(&["x1", "x2", "x3"]).unwrap();
        let i = curve(&t);
        let mf = MarkedFactorization::initial(&t.chart(0).exceptional, &i, 1);
        let d = t.fresh_divisor();
        let reg = t.chart(0).exceptional.clone();
        let kids = t.blowup(0, &[0, 1, 2], d, 0, None).unwrap();
        for (k, &child) in kids.iter().enumerate() {
            let m = controlled_transform(&mf, &reg, &[0, 1, 2], k, d).unwrap();
            assert_eq!(m.a.get(&d), Some(&0));
            let tt = t.total_transform(child, &i);
            assert!(tt.equals(&m.total_ideal(&t.chart(child).exceptional)));
        }
        let too_high = MarkedFactorization::initial(&reg, &i, 2);
        assert!(matches!(
            controlled_transform(&too_high, &reg, &[0, 1, 2], 0, d),
            Err(Error::ImpermissibleCenter { .. })
        ));
    }

    #[test]
    fn codimension_one_bookkeeping() {
        let mut t = ChartTree::new(&["x", "y"]).unwrap();
        let ids = t.seed_exceptional(&[0]).unwrap();
        let r = t.ring().clone();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let i = Ideal::principal(&x.pow(2) * &y);
        let reg = t.chart(0).exceptional.clone();
        let mf = MarkedFactorization::initial(&reg, &i, 1);
        assert_eq!(mf.a.get(&ids[0]), Some(&2));
        let kids = t.blowup(0, &[0], ids[0], 1, None).unwrap();
        assert!(kids.is_empty());
        assert_eq!(t.charts().len(), 1);
        let m = controlled_transform(&mf, &reg, &[0], 0, ids[0]).unwrap();
        assert_eq!(m.a.get(&ids[0]), Some(&1));
        assert!(m.weak.equals(&Ideal::principal(y.clone())));
    }

    #[test]
    fn flag_restriction() {
        let t = ChartTree::new(&["x1", "x2", "x3"]).unwrap();
        let i = curve(&t);
        let v = restrict_to_flag(t.chart(0), t.ring(), &[0]).unwrap();
        let r = v.restrict(&i);
        assert_eq!(r.ring().names(), &["x2".to_string(), "x3".to_string()]);
        assert_eq!(r.generators().len(), 1);
        assert_eq!(r.generators()[0].to_string(), "x2^3 + x3^3 + x2*x3");
        let mut t2 = ChartTree::new(&["x", "y"]).unwrap();
        t2.seed_exceptional(&[0]).unwrap();
        assert!(matches!(
            restrict_to_flag(t2.chart(0), t2.ring(), &[0]),
            Err(Error::FlagAlongExceptional(0))
        ));
    }
}
