use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::automorphism::Automorphism;
use crate::chart::{factor_exceptional, DivisorId, DivisorRecord, MarkedFactorization};
use crate::error::{Error, Result};
use crate::gcd::{gcd, squarefree_gcd};
use crate::ideal::{subsets_of_size, Ideal};
use crate::poly::Polynomial;
use crate::rational::{format_rational, Rational};

/// Value of the monomial-case function: fewest divisors p reaching the threshold, the best
/// normalized sum among those, and the chosen divisor ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaVal {
    pub p: u32,
    pub ratio: Rational,
    pub ids: Vec<DivisorId>,
}

impl Ord for GammaVal {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .p
            .cmp(&self.p)
            .then_with(|| self.ratio.cmp(&other.ratio))
            .then_with(|| self.ids.cmp(&other.ids))
    }
}

impl PartialOrd for GammaVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TValue {
    Gamma(GammaVal),
    Pair { w: Rational, n: u32 },
    Infinity,
}

impl TValue {
    pub fn pair(w: Rational, n: u32) -> Self {
        TValue::Pair { w, n }
    }

    fn rank(&self) -> u8 {
        match self {
            TValue::Gamma(_) => 0,
            TValue::Pair { .. } => 1,
            TValue::Infinity => 2,
        }
    }
}

impl Ord for TValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (TValue::Gamma(a), TValue::Gamma(b)) => a.cmp(b),
            (TValue::Pair { w: w1, n: n1 }, TValue::Pair { w: w2, n: n2 }) => {
                w1.cmp(w2).then_with(|| n1.cmp(n2))
            }
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for TValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TValue::Gamma(g) => {
                let ids: Vec<String> = g.ids.iter().map(|i| i.to_string()).collect();
                write!(f, "gamma({},{},[{}])", g.p, format_rational(&g.ratio), ids.join(","))
            }
            TValue::Pair { w, n } => write!(f, "({},{})", format_rational(w), n),
            TValue::Infinity => write!(f, "inf"),
        }
    }
}

/// Lexicographically ordered tuple of t-values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FValue(pub Vec<TValue>);

impl fmt::Display for FValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Basic object at one level in one chart: J = prod x_H^a * weak inside the flag V(flags).
/// All ideals live in the chart ring and are free of the flag coordinates.
#[derive(Debug, Clone)]
pub struct LevelObject {
    pub flags: Vec<usize>,
    pub a: BTreeMap<DivisorId, u32>,
    pub weak: Ideal,
    pub divisors: Vec<DivisorRecord>,
}

impl LevelObject {
    /// Object from a marked factorization; divisors on flag coordinates are discarded.
    pub fn from_marked(mf: &MarkedFactorization, registry: &[DivisorRecord], flags: &[usize]) -> Self {
        let divisors: Vec<DivisorRecord> = registry
            .iter()
            .filter(|d| !flags.contains(&d.coordinate))
            .cloned()
            .collect();
        let a = divisors
            .iter()
            .map(|d| (d.id, mf.a.get(&d.id).copied().unwrap_or(0)))
            .collect();
        LevelObject {
            flags: flags.to_vec(),
            a,
            weak: mf.weak.clone(),
            divisors,
        }
    }

    pub fn arity(&self) -> usize {
        self.weak.ring().arity()
    }

    pub fn dim(&self) -> usize {
        self.arity() - self.flags.len()
    }

    pub fn monomial(&self) -> Vec<u32> {
        let mut m = vec![0u32; self.arity()];
        for d in &self.divisors {
            m[d.coordinate] += self.a.get(&d.id).copied().unwrap_or(0);
        }
        m
    }

    pub fn monomial_ideal(&self) -> Ideal {
        let ring = self.weak.ring().clone();
        Ideal::principal(Polynomial::monomial(&ring, self.monomial(), Rational::one()))
    }

    pub fn ideal(&self) -> Ideal {
        self.weak.times_monomial(&self.monomial())
    }

    pub fn flag_ideal(&self) -> Ideal {
        Ideal::coordinates(self.weak.ring(), &self.flags)
    }

    fn frozen(&self) -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = self.flags.iter().copied().collect();
        s.extend(self.divisors.iter().map(|d| d.coordinate));
        s
    }

    fn apply(&self, phi: &Automorphism) -> LevelObject {
        LevelObject {
            weak: self.weak.apply(phi),
            ..self.clone()
        }
    }
}

/// Ideal whose zero set is Sing(J, b) inside the flag.
pub fn singular_locus_ideal(obj: &LevelObject, b: u32) -> Ideal {
    if b == 0 {
        return obj.flag_ideal();
    }
    obj.ideal()
        .delta_power(b - 1)
        .sum(&obj.flag_ideal())
        .reduced()
}

/// (m, locus): maximal order of the weak ideal on Sing, with w = m / b.
pub fn max_w_ord(obj: &LevelObject, b: u32) -> Result<(Rational, u32, Ideal)> {
    let sing = singular_locus_ideal(obj, b);
    if sing.is_unit() {
        return Err(Error::EmptySingularLocus);
    }
    let (m, locus) = obj.weak.max_order_on(&sing);
    Ok((
        Rational::new(BigInt::from(m), BigInt::from(b)),
        m,
        locus.reduced(),
    ))
}

/// Which divisors count as old for the n-invariant at one level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EMinusRule {
    /// No drop since the level history started at this stage: births up to it.
    UpTo(usize),
    /// Last drop of max w-ord happened at this stage: births strictly before it. The divisor
    /// born at the drop also counts where Max w-ord lacks normal crossings with it and the
    /// later divisors.
    Before(usize),
}

impl EMinusRule {
    pub fn contains(&self, d: &DivisorRecord) -> bool {
        match self {
            EMinusRule::UpTo(s) => d.birth <= *s,
            EMinusRule::Before(k) => d.birth < *k,
        }
    }
}

#[derive(Debug, Clone)]
struct LevelHistory {
    prefix: Vec<TValue>,
    start: usize,
    records: Vec<(usize, Rational)>,
}

/// Per-level record of max w-ord, restarted whenever the values above the level change.
#[derive(Debug, Clone, Default)]
pub struct History {
    levels: Vec<LevelHistory>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        self.levels.clear();
    }

    /// Records max w-ord at this stage and returns the E- rule.
    pub fn observe(&mut self, depth: usize, prefix: &[TValue], stage: usize, wmax: &Rational) -> EMinusRule {
        if self.levels.len() > depth && self.levels[depth].prefix != prefix {
            self.levels.truncate(depth);
        }
        if self.levels.len() <= depth {
            self.levels.truncate(depth);
            self.levels.push(LevelHistory {
                prefix: prefix.to_vec(),
                start: stage,
                records: Vec::new(),
            });
        }
        let lh = &mut self.levels[depth];
        match lh.records.last_mut() {
            Some(last) if last.0 == stage => last.1 = wmax.clone(),
            _ => lh.records.push((stage, wmax.clone())),
        }
        self.rule(depth)
    }

    fn rule(&self, depth: usize) -> EMinusRule {
        let lh = &self.levels[depth];
        for i in (1..lh.records.len()).rev() {
            if lh.records[i].1 < lh.records[i - 1].1 {
                return EMinusRule::Before(lh.records[i].0);
            }
        }
        EMinusRule::UpTo(lh.start)
    }

    /// (E+, E-) split of the given divisors under the current rule at `depth`.
    pub fn e_split(&self, depth: usize, divisors: &[DivisorRecord]) -> (Vec<DivisorId>, Vec<DivisorId>) {
        let rule = self.rule(depth);
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for d in divisors {
            if rule.contains(d) {
                minus.push(d.id);
            } else {
                plus.push(d.id);
            }
        }
        (plus, minus)
    }
}

/// Whether the locus is smooth and has normal crossings with V(x_coordinate) together with
/// every subset of `others`: each such intersection is empty or smooth of the expected
/// codimension. Loci that are not smooth count as not transversal.
pub fn crosses_normally(locus: &Ideal, coordinate: usize, others: &[usize]) -> bool {
    let ring = locus.ring().clone();
    let codim = (ring.arity() as i64 - locus.dimension()) as usize;
    if !matches!(locus.jacobian_smoothness(codim), Ok((true, _))) {
        return false;
    }
    (0..=others.len()).all(|k| {
        subsets_of_size(others.len(), k).into_iter().all(|sub| {
            let mut coords: Vec<usize> = sub.iter().map(|&i| others[i]).collect();
            coords.push(coordinate);
            let meet = locus.sum(&Ideal::coordinates(&ring, &coords));
            meet.is_unit() || matches!(meet.jacobian_smoothness(codim + coords.len()), Ok((true, _)))
        })
    })
}

/// Largest s such that some s-subset of `candidates` (coordinates) meets the locus, with all
/// achieving subsets.
pub fn max_n(locus: &Ideal, candidates: &[usize]) -> (u32, Vec<Vec<usize>>) {
    let ring = locus.ring().clone();
    for s in (1..=candidates.len()).rev() {
        let mut hits = Vec::new();
        for sub in subsets_of_size(candidates.len(), s) {
            let coords: Vec<usize> = sub.iter().map(|&k| candidates[k]).collect();
            if locus.sum(&Ideal::coordinates(&ring, &coords)).is_proper() {
                hits.push(coords);
            }
        }
        if !hits.is_empty() {
            return (s as u32, hits);
        }
    }
    (0, vec![Vec::new()])
}

/// Squarefree codimension-one part of a locus inside the flag, if any.
pub fn r1_component(locus: &Ideal, flags: &[usize]) -> Option<Polynomial> {
    let restricted = locus.restrict_zero(flags);
    if restricted.is_zero() {
        return None;
    }
    let g = squarefree_gcd(restricted.generators()).ok()?;
    if g.is_constant() {
        None
    } else {
        Some(g)
    }
}

/// Makes V(g) a coordinate hyperplane; returns the coordinate change and the coordinate.
pub fn realize_hypersurface(g: &Polynomial, obj: &LevelObject) -> Result<(Automorphism, usize)> {
    let ring = obj.weak.ring().clone();
    let vars = g.variables();
    if vars.len() == 1 && g.num_terms() == 1 && g.total_degree() == Some(1) {
        let k = *vars.iter().next().expect("one variable");
        if !obj.flags.contains(&k) {
            return Ok((Automorphism::identity(&ring), k));
        }
    }
    let frozen = obj.frozen();
    for i in 0..ring.arity() {
        if frozen.contains(&i) {
            continue;
        }
        if let Some((c, h)) = g.linear_in(i) {
            let phi = shift_move(&ring, i, &c, &h, &frozen)?;
            return Ok((phi, i));
        }
    }
    Err(Error::R1NotRealizable(g.to_string()))
}

/// x_i -> x_i - h / c, so that c*x_i + h becomes c*x_i.
fn shift_move(
    ring: &crate::poly::RingRef,
    i: usize,
    c: &Rational,
    h: &Polynomial,
    frozen: &BTreeSet<usize>,
) -> Result<Automorphism> {
    if h.is_zero() {
        return Ok(Automorphism::identity(ring));
    }
    Automorphism::triangular(ring, i, h.scale(&(-(Rational::one() / c))), frozen)
}

fn factorial(n: u32) -> u32 {
    (1..=n).product::<u32>().max(1)
}

/// Companion object whose singular locus is Max t. `old` are the coordinates of the E-
/// divisors in this chart and `n` the maximal number of them through a point of Max t.
pub fn companion(obj: &LevelObject, b: u32, m: u32, n: u32, old: &[usize]) -> Result<(Ideal, u32)> {
    if m == 0 {
        return Err(Error::MonomialCase);
    }
    let ring = obj.weak.ring().clone();
    let (mut j, bpp) = if m >= b {
        (obj.weak.reduced(), m)
    } else {
        let part1 = obj.weak.power(b - m);
        let part2 = obj.monomial_ideal().power(m);
        (part1.sum(&part2).reduced(), m * (b - m))
    };
    if n > 0 {
        let size = old.len() - n as usize + 1;
        let mut extra = Vec::new();
        for sub in subsets_of_size(old.len(), size) {
            let mut e = vec![0u32; ring.arity()];
            for &k in &sub {
                e[old[k]] = bpp;
            }
            extra.push(Polynomial::monomial(&ring, e, Rational::one()));
        }
        j = j.with(&extra).reduced();
    }
    Ok((j, bpp))
}

/// A generator of Delta^(b''-1)(J'') of the form c*x_i + h, turned into the coordinate x_i.
/// Falls back to an exceptional coordinate lying in Delta^(b''-1)(J'').
pub fn maximal_contact(
    jpp: &Ideal,
    bpp: u32,
    obj: &LevelObject,
) -> Result<(Automorphism, usize, Option<DivisorId>)> {
    let ring = jpp.ring().clone();
    let top = jpp.delta_power(bpp.saturating_sub(1));
    let mut cands = jpp.delta_power_generators(bpp.saturating_sub(1));
    cands.extend(top.generators().iter().cloned());
    let frozen = obj.frozen();
    let mut best: Option<(u32, usize, usize, Rational, Polynomial)> = None;
    for (pos, g) in cands.iter().enumerate() {
        let deg = g.total_degree().unwrap_or(0);
        for i in 0..ring.arity() {
            if frozen.contains(&i) {
                continue;
            }
            if let Some((c, h)) = g.linear_in(i) {
                let key = (deg, i, pos);
                let better = match &best {
                    None => true,
                    Some((d0, i0, p0, _, _)) => key < (*d0, *i0, *p0),
                };
                if better {
                    best = Some((deg, i, pos, c, h));
                }
            }
        }
    }
    if let Some((_, i, _, c, h)) = best {
        let phi = shift_move(&ring, i, &c, &h, &frozen)?;
        return Ok((phi, i, None));
    }
    for d in &obj.divisors {
        if top.contains(&Polynomial::var(&ring, d.coordinate)) {
            return Ok((Automorphism::identity(&ring), d.coordinate, Some(d.id)));
        }
    }
    Err(Error::MaximalContactNotRealizable(top.to_string()))
}

/// Coefficient ideal of J'' with respect to z, with its weight b''!.
pub fn coefficient_ideal(jpp: &Ideal, bpp: u32, z: usize) -> (Ideal, u32) {
    let ring = jpp.ring().clone();
    let weight = factorial(bpp);
    let mut gens = Vec::new();
    for f in jpp.reduced().generators() {
        let co = f.coefficients_in(z);
        for (i, a) in co.iter().enumerate().take(bpp as usize) {
            if !a.is_zero() {
                gens.push(a.pow(weight / (bpp - i as u32)));
            }
        }
    }
    (Ideal::new(&ring, gens).reduced(), weight)
}

/// Monomial-case value over Sing, optionally restricted to divisors through a point.
pub fn gamma_value(obj: &LevelObject, b: u32, through: Option<&[Rational]>) -> Option<GammaVal> {
    let cands: Vec<(DivisorId, u32)> = obj
        .divisors
        .iter()
        .filter(|d| through.is_none_or(|p| p[d.coordinate].is_zero()))
        .map(|d| (d.id, obj.a.get(&d.id).copied().unwrap_or(0)))
        .filter(|(_, a)| *a > 0)
        .collect();
    for p in 1..=cands.len() {
        let mut best: Option<(u32, Vec<DivisorId>)> = None;
        for sub in subsets_of_size(cands.len(), p) {
            let sum: u32 = sub.iter().map(|&k| cands[k].1).sum();
            if sum < b {
                continue;
            }
            let mut ids: Vec<DivisorId> = sub.iter().map(|&k| cands[k].0).collect();
            ids.sort();
            let better = match &best {
                None => true,
                Some((s0, i0)) => (sum, &ids) > (*s0, i0),
            };
            if better {
                best = Some((sum, ids));
            }
        }
        if let Some((sum, ids)) = best {
            return Some(GammaVal {
                p: p as u32,
                ratio: Rational::new(BigInt::from(sum), BigInt::from(b)),
                ids,
            });
        }
    }
    None
}

/// Center coordinates of the monomial case in one chart.
pub fn gamma_center(obj: &LevelObject, b: u32) -> Option<(GammaVal, Vec<usize>)> {
    let g = gamma_value(obj, b, None)?;
    let mut coords = obj.flags.clone();
    for id in &g.ids {
        let d = obj.divisors.iter().find(|d| d.id == *id).expect("divisor present");
        coords.push(d.coordinate);
    }
    coords.sort();
    Some((g, coords))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    Gamma,
    Hypersurface,
}

/// Data of one chart at one level of a descent.
#[derive(Debug, Clone)]
pub struct ChartLevel {
    pub object: LevelObject,
    pub sing: Ideal,
    pub order: u32,
    pub w_locus: Ideal,
    pub n: u32,
    pub t_locus: Option<Ideal>,
    pub hypersurface: Option<Polynomial>,
    pub companion: Option<(Ideal, u32)>,
    pub contact: Option<(Automorphism, usize, Option<DivisorId>)>,
    pub gamma: Option<GammaVal>,
}

#[derive(Debug, Clone)]
pub struct LevelRecord {
    pub depth: usize,
    pub dim: usize,
    pub b: u32,
    pub wmax: Rational,
    pub t: TValue,
    pub e_minus: BTreeSet<DivisorId>,
    pub charts: BTreeMap<usize, ChartLevel>,
    pub terminal: Option<Terminal>,
}

#[derive(Debug, Clone)]
pub struct ChartCenter {
    pub chart: usize,
    pub automorphism: Automorphism,
    pub coordinates: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct StepPlan {
    pub f: FValue,
    pub levels: Vec<LevelRecord>,
    pub centers: Vec<ChartCenter>,
}

impl StepPlan {
    /// Dimension of the level that produced the center.
    pub fn level(&self) -> usize {
        self.levels.last().map(|l| l.dim).unwrap_or(0)
    }
}

fn ratio(m: u32, b: u32) -> Rational {
    Rational::new(BigInt::from(m), BigInt::from(b))
}

/// One step of the descent over all charts: the maximal f-value and the center per chart.
pub fn resolution_step(
    objects: &BTreeMap<usize, LevelObject>,
    b: u32,
    history: &mut History,
    stage: usize,
) -> Result<StepPlan> {
    resolution_step_until(objects, b, history, stage, &|_| false)
        .map(|p| p.expect("never stopped"))
}

/// As `resolution_step`, but returns None as soon as `stop` accepts the top-level t-value.
pub fn resolution_step_until(
    objects: &BTreeMap<usize, LevelObject>,
    b: u32,
    history: &mut History,
    stage: usize,
    stop: &dyn Fn(&TValue) -> bool,
) -> Result<Option<StepPlan>> {
    let mut levels = Vec::new();
    let mut autos: BTreeMap<usize, Automorphism> = BTreeMap::new();
    for (&c, obj) in objects {
        autos.insert(c, Automorphism::identity(obj.weak.ring()));
    }
    let mut current: BTreeMap<usize, LevelObject> = objects.clone();
    let mut b = b;
    let mut prefix: Vec<TValue> = Vec::new();
    let mut depth = 0;
    loop {
        let mut charts: BTreeMap<usize, ChartLevel> = BTreeMap::new();
        for (&c, obj) in &current {
            let sing = singular_locus_ideal(obj, b);
            if sing.is_unit() {
                continue;
            }
            let (order, w_locus) = obj.weak.max_order_on(&sing);
            charts.insert(
                c,
                ChartLevel {
                    object: obj.clone(),
                    sing,
                    order,
                    w_locus: w_locus.reduced(),
                    n: 0,
                    t_locus: None,
                    hypersurface: None,
                    companion: None,
                    contact: None,
                    gamma: None,
                },
            );
        }
        if charts.is_empty() {
            return Err(Error::EmptySingularLocus);
        }
        let dim = charts.values().next().expect("nonempty").object.dim();
        let wmax = charts.values().map(|cl| ratio(cl.order, b)).max().expect("nonempty");
        let rule = history.observe(depth, &prefix, stage, &wmax);
        let mut e_minus: BTreeSet<DivisorId> = charts
            .values()
            .flat_map(|cl| cl.object.divisors.iter())
            .filter(|d| rule.contains(d))
            .map(|d| d.id)
            .collect();
        if let EMinusRule::Before(k) = rule {
            for cl in charts.values() {
                if ratio(cl.order, b) != wmax {
                    continue;
                }
                for d in cl.object.divisors.iter().filter(|d| d.birth == k) {
                    let later: Vec<usize> = cl
                        .object
                        .divisors
                        .iter()
                        .filter(|e| e.birth > k)
                        .map(|e| e.coordinate)
                        .collect();
                    if !crosses_normally(&cl.w_locus, d.coordinate, &later) {
                        e_minus.insert(d.id);
                    }
                }
            }
        }

        if wmax.is_zero() {
            let mut best: Option<GammaVal> = None;
            for cl in charts.values_mut() {
                cl.gamma = gamma_value(&cl.object, b, None);
                if let Some(g) = &cl.gamma {
                    if best.as_ref().is_none_or(|b0| g > b0) {
                        best = Some(g.clone());
                    }
                }
            }
            let best = best.ok_or(Error::EmptySingularLocus)?;
            if depth == 0 && stop(&TValue::Gamma(best.clone())) {
                return Ok(None);
            }
            let mut centers = Vec::new();
            for (&c, cl) in &charts {
                if cl.gamma.as_ref() == Some(&best) {
                    let (_, coords) = gamma_center(&cl.object, b).expect("gamma present");
                    centers.push(ChartCenter {
                        chart: c,
                        automorphism: autos[&c].clone(),
                        coordinates: coords,
                    });
                }
            }
            prefix.push(TValue::Gamma(best.clone()));
            levels.push(LevelRecord {
                depth,
                dim,
                b,
                wmax,
                t: TValue::Gamma(best),
                e_minus,
                charts,
                terminal: Some(Terminal::Gamma),
            });
            return Ok(Some(StepPlan {
                f: FValue(prefix),
                levels,
                centers,
            }));
        }

        let mut nmax = 0u32;
        let mut subsets: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for (&c, cl) in charts.iter_mut() {
            if ratio(cl.order, b) != wmax {
                continue;
            }
            let old: Vec<usize> = cl
                .object
                .divisors
                .iter()
                .filter(|d| e_minus.contains(&d.id))
                .map(|d| d.coordinate)
                .collect();
            let (n, subs) = max_n(&cl.w_locus, &old);
            cl.n = n;
            nmax = nmax.max(n);
            subsets.insert(c, subs);
        }
        let t = TValue::pair(wmax.clone(), nmax);
        if depth == 0 && stop(&t) {
            return Ok(None);
        }
        for (&c, cl) in charts.iter_mut() {
            if ratio(cl.order, b) != wmax || cl.n != nmax {
                continue;
            }
            let ring = cl.object.weak.ring().clone();
            let subs = &subsets[&c];
            let mut locus: Option<Ideal> = None;
            for s in subs {
                let piece = cl.w_locus.sum(&Ideal::coordinates(&ring, s));
                locus = Some(match locus {
                    None => piece,
                    Some(l) => l.intersect(&piece),
                });
            }
            let locus = locus.expect("at least one subset").reduced();
            cl.hypersurface = r1_component(&locus, &cl.object.flags);
            cl.t_locus = Some(locus);
        }
        prefix.push(t.clone());

        if charts.values().any(|cl| cl.hypersurface.is_some()) {
            let mut centers = Vec::new();
            for (&c, cl) in &charts {
                if let Some(g) = &cl.hypersurface {
                    let (phi, k) = realize_hypersurface(g, &cl.object)?;
                    let mut coords = cl.object.flags.clone();
                    coords.push(k);
                    coords.sort();
                    centers.push(ChartCenter {
                        chart: c,
                        automorphism: autos[&c].then(&phi),
                        coordinates: coords,
                    });
                }
            }
            if dim >= 2 {
                prefix.push(TValue::Infinity);
            }
            levels.push(LevelRecord {
                depth,
                dim,
                b,
                wmax,
                t,
                e_minus,
                charts,
                terminal: Some(Terminal::Hypersurface),
            });
            return Ok(Some(StepPlan {
                f: FValue(prefix),
                levels,
                centers,
            }));
        }
        if dim <= 1 {
            return Err(Error::PreconditionViolated(
                "one-dimensional locus without a divisorial part".into(),
            ));
        }

        let mut next: BTreeMap<usize, LevelObject> = BTreeMap::new();
        let mut next_b = 0;
        for (&c, cl) in charts.iter_mut() {
            if cl.t_locus.is_none() {
                continue;
            }
            let old: Vec<usize> = cl
                .object
                .divisors
                .iter()
                .filter(|d| e_minus.contains(&d.id))
                .map(|d| d.coordinate)
                .collect();
            let (jpp, bpp) = companion(&cl.object, b, cl.order, nmax, &old)?;
            let (phi, z, zdiv) = maximal_contact(&jpp, bpp, &cl.object)?;
            let jpp_new = jpp.apply(&phi);
            let (coef, weight) = coefficient_ideal(&jpp_new, bpp, z);
            let moved = cl.object.apply(&phi);
            let divisors: Vec<DivisorRecord> = moved
                .divisors
                .iter()
                .filter(|d| Some(d.id) != zdiv)
                .cloned()
                .collect();
            let (a, weak) = factor_exceptional(&divisors, &coef);
            let mut flags = moved.flags.clone();
            flags.push(z);
            flags.sort();
            next.insert(
                c,
                LevelObject {
                    flags,
                    a,
                    weak,
                    divisors,
                },
            );
            autos.insert(c, autos[&c].then(&phi));
            cl.companion = Some((jpp, bpp));
            cl.contact = Some((phi, z, zdiv));
            next_b = weight;
        }
        levels.push(LevelRecord {
            depth,
            dim,
            b,
            wmax,
            t,
            e_minus,
            charts,
            terminal: None,
        });
        current = next;
        b = next_b;
        depth += 1;
    }
}

fn through(d: &DivisorRecord, point: &[Rational]) -> bool {
    point[d.coordinate].is_zero()
}

/// Order at a point of J = prod x_H^a * weak.
fn object_order(obj: &LevelObject, point: &[Rational]) -> Option<u32> {
    let m = obj.weak.order_at(point)?;
    let mono: u32 = obj
        .divisors
        .iter()
        .filter(|d| through(d, point))
        .map(|d| obj.a.get(&d.id).copied().unwrap_or(0))
        .sum();
    Some(m + mono)
}

/// Remaining entries of f at a point, built from local data only. `counted` selects the
/// divisors entering n at this level; `w` and `n` are the point's values here.
/// An ideal with the same extension to the local ring at `point`: saturates by coordinates
/// and pairwise generator gcds that do not vanish there, until nothing changes.
pub fn localize(ideal: &Ideal, point: &[Rational]) -> Ideal {
    let ring = ideal.ring().clone();
    let mut cur = ideal.reduced();
    for _ in 0..4 {
        let gens = cur.generators().to_vec();
        let mut units: Vec<Polynomial> = (0..ring.arity())
            .filter(|&i| !point[i].is_zero())
            .map(|i| Polynomial::var(&ring, i))
            .collect();
        for (i, f) in gens.iter().enumerate() {
            for g in &gens[i + 1..] {
                let h = gcd(f, g);
                if h.total_degree().unwrap_or(0) > 0 && !h.evaluate(point).is_zero() {
                    units.push(h);
                }
            }
        }
        let mut next = cur.clone();
        for u in &units {
            next = next.saturate_by(u).0;
        }
        let next = next.reduced();
        if next.equals(&cur) {
            return next;
        }
        cur = next;
    }
    cur
}

fn local_tail(
    obj: &LevelObject,
    b: u32,
    point: &[Rational],
    m: u32,
    counted: &dyn Fn(&DivisorRecord) -> bool,
) -> Result<Vec<TValue>> {
    let ring = obj.weak.ring().clone();
    let old: Vec<usize> = obj
        .divisors
        .iter()
        .filter(|d| counted(d) && through(d, point))
        .map(|d| d.coordinate)
        .collect();
    let sing = singular_locus_ideal(obj, b);
    let mut locus = obj.weak.delta_power(m.saturating_sub(1)).sum(&sing);
    locus = locus.sum(&Ideal::coordinates(&ring, &old));
    if let Some(g) = r1_component(&locus, &obj.flags) {
        if g.evaluate(point).is_zero() {
            return Ok(if obj.dim() >= 2 { vec![TValue::Infinity] } else { Vec::new() });
        }
    }
    if obj.dim() <= 1 {
        return Ok(Vec::new());
    }
    let n = old.len() as u32;
    let (jpp, bpp) = companion(obj, b, m, n, &old)?;
    let jpp = localize(&jpp, point);
    let (phi, z, zdiv) = maximal_contact(&jpp, bpp, obj)?;
    let jpp_new = jpp.apply(&phi);
    let (coef, weight) = coefficient_ideal(&jpp_new, bpp, z);
    let p2 = phi.point_to_new(point);
    let moved = obj.apply(&phi);
    let divisors: Vec<DivisorRecord> = moved
        .divisors
        .iter()
        .filter(|d| Some(d.id) != zdiv)
        .cloned()
        .collect();
    let (a, weak) = factor_exceptional(&divisors, &coef);
    let mut flags = moved.flags.clone();
    flags.push(z);
    flags.sort();
    let lower = LevelObject {
        flags,
        a,
        weak,
        divisors,
    };
    local_level(&lower, weight, &p2, &|_| true)
}

fn local_level(
    obj: &LevelObject,
    b: u32,
    point: &[Rational],
    counted: &dyn Fn(&DivisorRecord) -> bool,
) -> Result<Vec<TValue>> {
    let m = obj.weak.order_at(point).unwrap_or(0);
    if m == 0 {
        return Ok(match gamma_value(obj, b, Some(point)) {
            Some(g) => vec![TValue::Gamma(g)],
            None => Vec::new(),
        });
    }
    let n = obj
        .divisors
        .iter()
        .filter(|d| counted(d) && through(d, point))
        .count() as u32;
    let mut out = vec![TValue::pair(ratio(m, b), n)];
    out.extend(local_tail(obj, b, point, m, counted)?);
    Ok(out)
}

/// f-value at a rational point of a chart (chart coordinates), using the global data of the
/// step where the point lies on the maximal loci and local data elsewhere. None if the point
/// is outside Sing.
pub fn f_value_at(plan: &StepPlan, chart: usize, point: &[Rational]) -> Result<Option<FValue>> {
    let mut out = Vec::new();
    let mut pt = point.to_vec();
    for rec in &plan.levels {
        let Some(cl) = rec.charts.get(&chart) else {
            return Ok(if rec.depth == 0 { None } else { Some(FValue(out)) });
        };
        let obj = &cl.object;
        if rec.depth == 0 {
            match object_order(obj, &pt) {
                Some(o) if o >= rec.b && obj.flags.iter().all(|&z| pt[z].is_zero()) => {}
                _ => return Ok(None),
            }
        }
        let m = obj.weak.order_at(&pt).unwrap_or(0);
        let w = ratio(m, rec.b);
        if m == 0 {
            if let Some(g) = gamma_value(obj, rec.b, Some(&pt)) {
                out.push(TValue::Gamma(g));
            }
            return Ok(Some(FValue(out)));
        }
        let on_max_w = w == rec.wmax;
        let e_minus = rec.e_minus.clone();
        let counted = move |d: &DivisorRecord| !on_max_w || e_minus.contains(&d.id);
        let n = obj
            .divisors
            .iter()
            .filter(|d| counted(d) && through(d, &pt))
            .count() as u32;
        let t = TValue::pair(w, n);
        out.push(t.clone());
        let on_max = t == rec.t
            && cl
                .t_locus
                .as_ref()
                .is_some_and(|l| l.vanishes_at(&pt));
        if !on_max {
            out.extend(local_tail(obj, rec.b, &pt, m, &counted)?);
            return Ok(Some(FValue(out)));
        }
        match rec.terminal {
            Some(Terminal::Hypersurface) => {
                if cl.hypersurface.as_ref().is_some_and(|g| g.evaluate(&pt).is_zero()) {
                    if rec.dim >= 2 {
                        out.push(TValue::Infinity);
                    }
                } else {
                    out.extend(local_tail(obj, rec.b, &pt, m, &counted)?);
                }
                return Ok(Some(FValue(out)));
            }
            Some(Terminal::Gamma) => return Ok(Some(FValue(out))),
            None => {
                let (phi, _, _) = cl.contact.as_ref().expect("descended chart has a contact");
                pt = phi.point_to_new(&pt);
            }
        }
    }
    Ok(Some(FValue(out)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{Ring, RingRef};
    use crate::rational::rat;

    fn obj(ring: &RingRef, gens: Vec<Polynomial>) -> LevelObject {
        LevelObject {
            flags: Vec::new(),
            a: BTreeMap::new(),
            weak: Ideal::new(ring, gens),
            divisors: Vec::new(),
        }
    }

    fn pair(w: i64, n: u32) -> TValue {
        TValue::pair(rat(w), n)
    }

    #[test]
    fn tvalue_order() {
        let g = TValue::Gamma(GammaVal {
            p: 1,
            ratio: rat(3),
            ids: vec![2],
        });
        assert!(g < pair(0, 0));
        assert!(pair(1, 5) < pair(2, 0));
        assert!(pair(2, 0) < TValue::Infinity);
        let g2 = TValue::Gamma(GammaVal {
            p: 2,
            ratio: rat(9),
            ids: vec![1, 2],
        });
        assert!(g2 < g);
        assert!(FValue(vec![pair(1, 0), pair(1, 0)]) < FValue(vec![pair(1, 0), pair(2, 0)]));
    }

    #[test]
    fn localization_drops_units_at_the_point() {
        let r = Ring::new(&["x", "y", "z"]).unwrap();
        let v = |i| Polynomial::var(&r, i);
        let j = Ideal::new(&r, vec![v(2).pow(2), &v(0) * &v(1)]);
        let p = vec![rat(0), rat(-1), rat(0)];
        assert!(localize(&j, &p).equals(&Ideal::new(&r, vec![v(2).pow(2), v(0)])));
        let origin = vec![rat(0), rat(0), rat(0)];
        assert!(localize(&j, &origin).equals(&j));
        let o = obj(&r, vec![v(2).pow(2), &v(0) * &v(1)]);
        let plan = resolution_step(&BTreeMap::from([(0, o)]), 1, &mut History::new(), 0).unwrap();
        let f = f_value_at(&plan, 0, &p).unwrap().unwrap();
        assert_eq!(f.0[0], pair(1, 0));
    }

    #[test]
    fn example_one_descends_to_the_origin() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let f = &(&(&x2 * &x3) + &x2.pow(3)) + &x3.pow(3);
        let o = obj(&r, vec![x1.clone(), f]);
        let mut objs = BTreeMap::new();
        objs.insert(0, o);
        let mut h = History::new();
        let plan = resolution_step(&objs, 1, &mut h, 0).unwrap();
        assert_eq!(plan.f.0[..2], [pair(1, 0), pair(2, 0)]);
        assert_eq!(plan.f.0.len(), 3);
        assert_eq!(plan.centers.len(), 1);
        assert_eq!(plan.centers[0].coordinates, vec![0, 1, 2]);
        let origin = vec![rat(0), rat(0), rat(0)];
        assert_eq!(f_value_at(&plan, 0, &origin).unwrap(), Some(plan.f.clone()));
    }

    #[test]
    fn example_three_is_a_codimension_one_center_in_the_flag() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let mut objs = BTreeMap::new();
        objs.insert(0, obj(&r, vec![x1, x2]));
        let plan = resolution_step(&objs, 1, &mut History::new(), 0).unwrap();
        assert_eq!(plan.f, FValue(vec![pair(1, 0), pair(1, 0), TValue::Infinity]));
        assert_eq!(plan.centers[0].coordinates, vec![0, 1]);
    }

    #[test]
    fn gamma_examples() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let mut o = obj(&r, vec![Polynomial::one(&r)]);
        o.divisors = vec![
            DivisorRecord { id: 1, coordinate: 0, birth: 0, lineage: None },
            DivisorRecord { id: 2, coordinate: 1, birth: 0, lineage: None },
        ];
        o.a = [(1, 2), (2, 3)].into_iter().collect();
        let (g, c) = gamma_center(&o, 1).unwrap();
        assert_eq!((g.p, g.ratio.clone(), c), (1, rat(3), vec![1]));
        o.a = [(1, 1), (2, 1)].into_iter().collect();
        let (g, c) = gamma_center(&o, 2).unwrap();
        assert_eq!((g.p, c), (2, vec![0, 1]));
    }

    #[test]
    fn maximal_contact_prefers_low_index() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        let o = obj(&r, vec![&x1 * &x2]);
        let (phi, z, zdiv) = maximal_contact(&o.weak, 2, &o).unwrap();
        assert!(phi.is_identity());
        assert_eq!((z, zdiv), (0, None));
        let o2 = obj(&r, vec![&x1 + &x2.pow(2)]);
        let (phi, z, _) = maximal_contact(&o2.weak, 1, &o2).unwrap();
        assert_eq!(z, 0);
        assert_eq!(phi.apply(&(&x1 + &x2.pow(2))), x1.clone());
    }

    #[test]
    fn r1_detection() {
        let r = Ring::new(&["x1", "x2"]).unwrap();
        let x1 = Polynomial::var(&r, 0);
        let x2 = Polynomial::var(&r, 1);
        assert!(r1_component(&Ideal::new(&r, vec![x1.clone(), x2.clone()]), &[]).is_none());
        let g = r1_component(&Ideal::principal(&x1.pow(2) * &x2), &[]).unwrap();
        assert_eq!(g.to_string(), "x1*x2");
        let o = obj(&r, vec![&x1 * &x2]);
        assert!(matches!(realize_hypersurface(&g, &o), Err(Error::R1NotRealizable(_))));
    }

    fn curve(r: &RingRef, a: usize, b: usize) -> Polynomial {
        let u = Polynomial::var(r, a);
        let v = Polynomial::var(r, b);
        &(&(&u * &v) + &u.pow(3)) + &v.pow(3)
    }

    #[test]
    fn example_one_off_the_origin() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let mut objs = BTreeMap::new();
        objs.insert(0, obj(&r, vec![Polynomial::var(&r, 0), curve(&r, 1, 2)]));
        let plan = resolution_step(&objs, 1, &mut History::new(), 0).unwrap();
        assert_eq!(plan.f, FValue(vec![pair(1, 0), pair(2, 0), pair(1, 0)]));
        let (_, z, _) = plan.levels[1].charts[&0].contact.clone().unwrap();
        assert_eq!(z, 1);
        let pt = vec![rat(0), crate::rational::ratio(-1, 2), crate::rational::ratio(-1, 2)];
        assert_eq!(
            f_value_at(&plan, 0, &pt).unwrap(),
            Some(FValue(vec![pair(1, 0), pair(1, 0), TValue::Infinity]))
        );
        assert_eq!(f_value_at(&plan, 0, &[rat(1), rat(0), rat(0)]).unwrap(), None);
    }

    #[test]
    fn example_two_at_the_origin() {
        let r = Ring::new(&["x0", "x1", "x2", "x3"]).unwrap();
        let mut objs = BTreeMap::new();
        objs.insert(
            0,
            obj(&r, vec![Polynomial::var(&r, 0), Polynomial::var(&r, 1), curve(&r, 2, 3)]),
        );
        let plan = resolution_step(&objs, 1, &mut History::new(), 0).unwrap();
        assert_eq!(plan.f, FValue(vec![pair(1, 0), pair(1, 0), pair(2, 0), pair(1, 0)]));
        assert_eq!(plan.centers[0].coordinates, vec![0, 1, 2, 3]);
    }

    #[test]
    fn coefficient_ideal_of_the_curve() {
        let r = Ring::new(&["x1", "x2", "x3"]).unwrap();
        let x2 = Polynomial::var(&r, 1);
        let x3 = Polynomial::var(&r, 2);
        let j = Ideal::principal(&x2.pow(2) - &x3.pow(3));
        let (c, w) = coefficient_ideal(&j, 2, 1);
        assert_eq!(w, 2);
        assert!(c.equals(&Ideal::principal(x3.pow(3))));
    }

    #[test]
    fn history_drop_moves_the_old_divisors() {
        let mut h = History::new();
        let d = |id, birth| DivisorRecord { id, coordinate: 0, birth, lineage: None };
        let divs = vec![d(1, 0), d(2, 1), d(3, 2)];
        assert_eq!(h.observe(0, &[], 0, &rat(2)), EMinusRule::UpTo(0));
        h.observe(0, &[], 1, &rat(2));
        assert_eq!(h.e_split(0, &divs), (vec![2, 3], vec![1]));
        assert_eq!(h.observe(0, &[], 2, &rat(1)), EMinusRule::Before(2));
        assert_eq!(h.e_split(0, &divs), (vec![3], vec![1, 2]));
        h.observe(1, &[pair(1, 0)], 2, &rat(1));
        assert_eq!(h.observe(1, &[pair(1, 1)], 3, &rat(1)), EMinusRule::UpTo(3));
    }

    #[test]
    fn normal_crossings_of_a_locus_with_divisors() {
        let r = Ring::new(&["x", "y"]).unwrap();
        let x = Polynomial::var(&r, 0);
        let y = Polynomial::var(&r, 1);
        let tangent = Ideal::principal(&y.pow(2) - &x);
        assert!(!crosses_normally(&tangent, 0, &[]));
        assert!(crosses_normally(&tangent, 1, &[]));
        let diagonal = Ideal::principal(&y - &x);
        assert!(crosses_normally(&diagonal, 0, &[]));
        assert!(!crosses_normally(&diagonal, 0, &[1]));
        assert!(!crosses_normally(&Ideal::principal(&x * &y), 0, &[]));
        assert!(crosses_normally(&Ideal::principal(&x - &Polynomial::one(&r)), 0, &[1]));
    }

}
