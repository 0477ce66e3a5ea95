use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::automorphism::Automorphism;
use crate::chart::{
    controlled_transform, factor_exceptional, ChartTree, DivisorId, DivisorRecord,
    MarkedFactorization,
};
use crate::error::{Error, Result};
use crate::ideal::{subsets_of_size, Ideal};
use crate::invariants::{
    maximal_contact, resolution_step, resolution_step_until, singular_locus_ideal, ChartCenter, FValue, History,
    LevelObject, StepPlan, TValue,
};
use crate::poly::Polynomial;
use crate::primes::{component_dimensions, intersect_all, minimal_primes};
use crate::rational::Rational;

pub const DEFAULT_BUDGET: usize = 200;

/// Which driver produced a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Resolution of a basic object.
    Resolve,
    /// Step A at relative codimension `level`.
    Advance { level: usize },
    /// Step B at relative codimension `level`.
    Unload { level: usize },
    /// Principalization of the residual factor A2.
    Residual,
}

#[derive(Debug, Clone)]
pub struct RunStep {
    pub index: usize,
    pub phase: Phase,
    /// f-value of the step; None for unloading steps.
    pub f: Option<FValue>,
    /// Dimension of the level that produced the center.
    pub level: usize,
    pub centers: Vec<ChartCenter>,
    pub divisor: DivisorId,
    pub plan: Option<StepPlan>,
}

/// Chart tree plus the step log shared by all drivers.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub tree: ChartTree,
    pub steps: Vec<RunStep>,
    pub budget: usize,
}

type Flags = BTreeMap<usize, Vec<usize>>;

fn flags_of(flags: &Flags, chart: usize) -> &[usize] {
    flags.get(&chart).map(|v| v.as_slice()).unwrap_or(&[])
}

fn root_of(d: &DivisorRecord) -> DivisorId {
    d.lineage.unwrap_or(d.id)
}

impl Workspace {
    pub fn new(tree: ChartTree, budget: usize) -> Self {
        Workspace {
            tree,
            steps: Vec::new(),
            budget,
        }
    }

    /// Blows up the given centers as one step and transforms the tracked objects. Children
    /// whose pivot is a flag coordinate carry no object.
    #[allow(clippy::too_many_arguments)]
    fn apply_centers(
        &mut self,
        objects: &mut BTreeMap<usize, MarkedFactorization>,
        flags: &mut Flags,
        centers: Vec<ChartCenter>,
        phase: Phase,
        f: Option<FValue>,
        level: usize,
        plan: Option<StepPlan>,
        lineage: Option<DivisorId>,
    ) -> Result<()> {
        if self.steps.len() >= self.budget {
            return Err(Error::BudgetExceeded(self.budget));
        }
        let birth = self.tree.steps().len() + 1;
        let ring = self.tree.ring().clone();
        let mut fresh: Option<DivisorId> = None;
        let mut step_divisor: Option<DivisorId> = None;
        let mut applied = Vec::new();
        for cc in centers {
            let c = cc.chart;
            let center = Ideal::coordinates(&ring, &cc.coordinates);
            let phi = if center.apply(&cc.automorphism).equals(&center) {
                Automorphism::identity(&ring)
            } else {
                cc.automorphism.clone()
            };
            if !phi.is_identity() {
                self.tree.apply_automorphism(c, &phi)?;
                if let Some(mf) = objects.get_mut(&c) {
                    mf.weak = mf.weak.apply(&phi);
                }
            }
            let registry = self.tree.chart(c).exceptional.clone();
            let existing = if cc.coordinates.len() == 1 {
                registry
                    .iter()
                    .find(|d| d.coordinate == cc.coordinates[0])
                    .map(|d| d.id)
            } else {
                None
            };
            let id = match existing {
                Some(id) => id,
                None => match fresh {
                    Some(id) => id,
                    None => {
                        let id = self.tree.fresh_divisor();
                        fresh = Some(id);
                        id
                    }
                },
            };
            step_divisor.get_or_insert(id);
            let children = self.tree.blowup(c, &cc.coordinates, id, birth, lineage)?;
            let parent_mf = objects.remove(&c);
            if children.is_empty() {
                if let Some(mf) = parent_mf {
                    objects.insert(
                        c,
                        controlled_transform(&mf, &registry, &cc.coordinates, cc.coordinates[0], id)?,
                    );
                }
            } else {
                let parent_flags = flags.remove(&c);
                for ch in children {
                    let pivot = self.tree.chart(ch).parent.expect("child has a parent").1;
                    if let Some(fl) = &parent_flags {
                        if fl.contains(&pivot) {
                            continue;
                        }
                        flags.insert(ch, fl.clone());
                    }
                    if let Some(mf) = &parent_mf {
                        objects.insert(
                            ch,
                            controlled_transform(mf, &registry, &cc.coordinates, pivot, id)?,
                        );
                    }
                }
            }
            applied.push(ChartCenter {
                chart: c,
                automorphism: phi,
                coordinates: cc.coordinates,
            });
        }
        let divisor = step_divisor.ok_or_else(|| Error::PreconditionViolated("step without centers".into()))?;
        let index = self.tree.record_step(
            applied.iter().map(|c| (c.chart, c.coordinates.clone())).collect(),
            divisor,
        );
        self.steps.push(RunStep {
            index,
            phase,
            f,
            level,
            centers: applied,
            divisor,
            plan,
        });
        Ok(())
    }

    fn level_objects(
        &self,
        objects: &BTreeMap<usize, MarkedFactorization>,
        flags: &Flags,
    ) -> BTreeMap<usize, LevelObject> {
        objects
            .iter()
            .map(|(&c, mf)| {
                (
                    c,
                    LevelObject::from_marked(mf, &self.tree.chart(c).exceptional, flags_of(flags, c)),
                )
            })
            .collect()
    }

    /// Runs resolution steps on the objects until Sing is empty or `stop` accepts a plan.
    fn run_objects(
        &mut self,
        objects: &mut BTreeMap<usize, MarkedFactorization>,
        flags: &mut Flags,
        b: u32,
        phase: Phase,
        stop: &dyn Fn(&TValue) -> bool,
    ) -> Result<()> {
        let mut history = History::new();
        loop {
            if objects.is_empty() {
                return Ok(());
            }
            let lobjs = self.level_objects(objects, flags);
            let stage = self.tree.steps().len();
            let plan = match resolution_step_until(&lobjs, b, &mut history, stage, stop) {
                Ok(Some(p)) => p,
                Ok(None) | Err(Error::EmptySingularLocus) => return Ok(()),
                Err(e) => return Err(e),
            };
            let centers = plan.centers.clone();
            let level = plan.level();
            let f = plan.f.clone();
            self.apply_centers(objects, flags, centers, phase, Some(f), level, Some(plan), None)?;
        }
    }
}

/// Drains the exceptional exponents of the objects: repeatedly blows up V(flags, x_H) for the
/// divisor with smallest (lineage root, id) among those with a >= 1.
pub fn exceptional_unloading(
    ws: &mut Workspace,
    objects: &mut BTreeMap<usize, MarkedFactorization>,
    flags: &mut Flags,
    level: usize,
) -> Result<()> {
    loop {
        let mut best: Option<(DivisorId, DivisorId)> = None;
        for (&c, mf) in objects.iter() {
            let fl = flags_of(flags, c);
            for d in &ws.tree.chart(c).exceptional {
                if fl.contains(&d.coordinate) || mf.a.get(&d.id).copied().unwrap_or(0) == 0 {
                    continue;
                }
                let key = (root_of(d), d.id);
                if best.is_none_or(|b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((root, id)) = best else {
            return Ok(());
        };
        let ring = ws.tree.ring().clone();
        let mut centers = Vec::new();
        let mut real = false;
        for (&c, mf) in objects.iter() {
            let Some(d) = ws.tree.chart(c).divisor(id) else { continue };
            if mf.a.get(&id).copied().unwrap_or(0) == 0 {
                continue;
            }
            let mut coords = flags_of(flags, c).to_vec();
            real |= !coords.is_empty();
            coords.push(d.coordinate);
            coords.sort();
            centers.push(ChartCenter {
                chart: c,
                automorphism: Automorphism::identity(&ring),
                coordinates: coords,
            });
        }
        let dim = ring.arity() - centers[0].coordinates.len() + 1;
        ws.apply_centers(
            objects,
            flags,
            centers,
            Phase::Unload { level },
            None,
            dim,
            None,
            real.then_some(root),
        )?;
    }
}

/// A finished resolution of a basic object.
#[derive(Debug, Clone)]
pub struct ResolutionRun {
    pub input: Ideal,
    pub b: u32,
    pub seeded: Vec<usize>,
    pub ws: Workspace,
    /// Final marked factorization per leaf chart.
    pub objects: BTreeMap<usize, MarkedFactorization>,
}

impl ResolutionRun {
    pub fn tree(&self) -> &ChartTree {
        &self.ws.tree
    }

    pub fn steps(&self) -> &[RunStep] {
        &self.ws.steps
    }

    /// Sing(J, b) is empty in every leaf chart.
    pub fn is_resolved(&self) -> bool {
        self.ws.tree.leaves().iter().all(|c| match self.objects.get(c) {
            None => true,
            Some(mf) => {
                let obj = LevelObject::from_marked(mf, &self.ws.tree.chart(*c).exceptional, &[]);
                singular_locus_ideal(&obj, self.b).is_unit()
            }
        })
    }

    /// Every leaf has trivial weak transform and the pulled back input equals prod x_H^c.
    pub fn is_monomial(&self) -> bool {
        self.ws.tree.leaves().iter().all(|&c| {
            let Some(mf) = self.objects.get(&c) else { return false };
            let registry = &self.ws.tree.chart(c).exceptional;
            let mono = exponent_vector(registry, &mf.c, self.input.ring().arity());
            let expected = Ideal::unit(self.input.ring()).times_monomial(&mono);
            mf.weak.is_unit() && self.ws.tree.total_transform(c, &self.input).equals(&expected)
        })
    }

    /// Every center maps into V(input).
    pub fn centers_inside_input(&self) -> bool {
        self.ws.steps.iter().all(|s| {
            s.centers.iter().all(|cc| {
                center_image(&self.ws.tree, cc.chart, &cc.coordinates).radical_contains(&self.input)
            })
        })
    }
}

pub fn exponent_vector(registry: &[DivisorRecord], exps: &BTreeMap<DivisorId, u32>, arity: usize) -> Vec<u32> {
    let mut m = vec![0u32; arity];
    for d in registry {
        m[d.coordinate] += exps.get(&d.id).copied().unwrap_or(0);
    }
    m
}

/// Resolves (ideal, b) with the given seeded exceptional coordinates.
pub fn resolve_basic_object(ideal: &Ideal, b: u32, seeded: &[usize], budget: usize) -> Result<ResolutionRun> {
    if ideal.is_zero() {
        return Err(Error::AllZeroInput);
    }
    if b == 0 {
        return Err(Error::PreconditionViolated("threshold must be at least 1".into()));
    }
    let mut tree = ChartTree::on_ring(ideal.ring());
    tree.seed_exceptional(seeded)?;
    let mut objects = BTreeMap::new();
    objects.insert(0, MarkedFactorization::initial(&tree.chart(0).exceptional, ideal, b));
    let mut ws = Workspace::new(tree, budget);
    ws.run_objects(&mut objects, &mut Flags::new(), b, Phase::Resolve, &|_| false)?;
    Ok(ResolutionRun {
        input: ideal.clone(),
        b,
        seeded: seeded.to_vec(),
        ws,
        objects,
    })
}

/// Resolution of (ideal, 1): afterwards the ideal is a monomial in the exceptional divisors.
pub fn principalize(ideal: &Ideal, seeded: &[usize], budget: usize) -> Result<ResolutionRun> {
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    resolve_basic_object(ideal, 1, seeded, budget)
}

/// Ideal of the image in the root of the center V(x_coords) of a chart, by eliminating the
/// chart variables from the center plus the graph of the chart map.
pub fn center_image(tree: &ChartTree, chart: usize, coords: &[usize]) -> Ideal {
    image_in_root(&tree.chart(chart).to_root, coords)
}

/// Image of V(x_coords) under the map given by the images of the root coordinates.
pub fn image_in_root(to_root: &[Polynomial], coords: &[usize]) -> Ideal {
    let root = to_root[0].ring().clone();
    let d = root.arity();
    let ext = root.with_prefix(d);
    let to_aux: Vec<usize> = (0..d).collect();
    let mut gens: Vec<Polynomial> = coords.iter().map(|&i| Polynomial::var(&ext, i)).collect();
    for (j, img) in to_root.iter().enumerate() {
        gens.push(&Polynomial::var(&ext, d + j) - &img.map_into(&ext, &to_aux));
    }
    let elim = Ideal::new(&ext, gens).eliminate(&to_aux);
    let keep: Vec<usize> = (d..2 * d).collect();
    let out = elim
        .generators()
        .iter()
        .filter_map(|g| g.restrict_into(&root, &keep))
        .collect();
    Ideal::new(&root, out).reduced()
}

fn codimension(ideal: &Ideal) -> usize {
    (ideal.ring().arity() as i64 - ideal.dimension()) as usize
}

/// Points of Sing(I, 1) that lie on a seeded divisor or where V(I) is not regular.
pub fn rsing(ideal: &Ideal, seeded: &[usize]) -> Result<Ideal> {
    let codim = codimension(ideal);
    let (_, obstruction) = ideal.jacobian_smoothness(codim)?;
    let mut out = obstruction.reduced();
    if !seeded.is_empty() {
        let ring = ideal.ring().clone();
        let mut e = vec![0u32; ring.arity()];
        for &i in seeded {
            e[i] = 1;
        }
        let on_e = ideal.with(&[Polynomial::monomial(&ring, e, Rational::one())]);
        out = out.intersect(&on_e).reduced();
    }
    Ok(out)
}

/// Flag coordinates z_1..z_a per chart: z_i lies in the weak transform, no exceptional
/// divisor sits on a flag coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelCodimCertificate {
    pub level: usize,
    pub flags: BTreeMap<usize, Vec<usize>>,
    /// The last coordinate is certified pointwise (order one everywhere) rather than chosen.
    pub pointwise_last: bool,
}

/// State of the strong driver between levels.
#[derive(Debug, Clone)]
pub struct StrongState {
    pub input: Ideal,
    pub seeded: Vec<usize>,
    pub codim: usize,
    pub ws: Workspace,
    /// Charts meeting the strict transform, with their flag coordinates.
    pub flags: Flags,
    pub certificates: Vec<RelCodimCertificate>,
    level: usize,
}

impl StrongState {
    pub fn new(input: &Ideal, seeded: &[usize], budget: usize) -> Result<Self> {
        let mut tree = ChartTree::on_ring(input.ring());
        tree.seed_exceptional(seeded)?;
        let mut flags = Flags::new();
        flags.insert(0, Vec::new());
        Ok(StrongState {
            input: input.clone(),
            seeded: seeded.to_vec(),
            codim: codimension(input),
            ws: Workspace::new(tree, budget),
            flags,
            certificates: Vec::new(),
            level: 0,
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    /// Weak transform of the input in a chart, with the exceptional exponents.
    pub fn weak(&self, chart: usize) -> (BTreeMap<DivisorId, u32>, Ideal) {
        factor_exceptional(
            &self.ws.tree.chart(chart).exceptional,
            &self.ws.tree.total_transform(chart, &self.input),
        )
    }

    /// Drops charts where the weak transform became the unit ideal.
    fn prune(&mut self) {
        let absent: Vec<usize> = self
            .flags
            .keys()
            .copied()
            .filter(|&c| self.weak(c).1.is_unit())
            .collect();
        for c in absent {
            self.flags.remove(&c);
        }
    }

    pub fn check_certificate(&self) -> Result<()> {
        for (&c, fl) in &self.flags {
            let (_, w) = self.weak(c);
            let chart = self.ws.tree.chart(c);
            for &z in fl {
                if chart.divisor_at(z).is_some() {
                    return Err(Error::RelativePropertyViolated(format!(
                        "chart {c}: flag coordinate {z} is exceptional"
                    )));
                }
                if !w.contains(&Polynomial::var(w.ring(), z)) {
                    return Err(Error::RelativePropertyViolated(format!(
                        "chart {c}: flag coordinate {z} is not in the weak transform {w}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Greedy initial level: coordinates c*x_i + h of the input made into flags at the root.
    pub fn initial_level(&mut self) -> Result<usize> {
        let ring = self.input.ring().clone();
        let mut fl: Vec<usize> = Vec::new();
        loop {
            if fl.len() >= self.codim {
                break;
            }
            let current = self.ws.tree.total_transform(0, &self.input).reduced();
            let mut frozen: BTreeSet<usize> = fl.iter().copied().collect();
            frozen.extend(self.ws.tree.chart(0).exceptional_coordinates());
            let mut found = None;
            'scan: for g in current.generators() {
                for i in 0..ring.arity() {
                    if frozen.contains(&i) {
                        continue;
                    }
                    if let Some((c, h)) = g.linear_in(i) {
                        found = Some((i, c, h));
                        break 'scan;
                    }
                }
            }
            let Some((i, c, h)) = found else { break };
            if !h.is_zero() {
                let phi = Automorphism::triangular(&ring, i, h.scale(&(-(Rational::one() / c))), &frozen)?;
                self.ws.tree.apply_automorphism(0, &phi)?;
            }
            fl.push(i);
        }
        fl.sort();
        self.flags.insert(0, fl.clone());
        self.level = fl.len();
        self.check_certificate()?;
        self.certificates.push(RelCodimCertificate {
            level: fl.len(),
            flags: self.flags.clone(),
            pointwise_last: false,
        });
        Ok(fl.len())
    }

    fn restricted_objects(&self) -> BTreeMap<usize, MarkedFactorization> {
        self.flags
            .iter()
            .map(|(&c, fl)| {
                let (_, w) = self.weak(c);
                (
                    c,
                    MarkedFactorization::initial(&self.ws.tree.chart(c).exceptional, &w.restrict_zero(fl), 1),
                )
            })
            .collect()
    }
}

/// Step A and Step B at the current level, then the next flag coordinate.
pub fn advance_relative_codim(state: &mut StrongState) -> Result<RelCodimCertificate> {
    let e = state.level();
    state.prune();
    let mut objects = state.restricted_objects();
    let one = TValue::pair(Rational::one(), 0);
    state.ws.run_objects(
        &mut objects,
        &mut state.flags,
        1,
        Phase::Advance { level: e },
        &|t| *t <= one,
    )?;
    state.prune();
    objects.retain(|c, _| state.flags.contains_key(c));
    state.check_certificate()?;
    exceptional_unloading(&mut state.ws, &mut objects, &mut state.flags, e)?;
    state.prune();
    objects.retain(|c, _| state.flags.contains_key(c));
    state.check_certificate()?;
    let last = e + 1 == state.codim;
    let charts: Vec<usize> = state.flags.keys().copied().collect();
    for c in charts {
        let mf = &objects[&c];
        let fl = state.flags[&c].clone();
        let obj = LevelObject::from_marked(mf, &state.ws.tree.chart(c).exceptional, &fl);
        if last {
            let order_two = mf.weak.sum(&mf.weak.delta()).sum(&obj.flag_ideal());
            if !order_two.is_unit() {
                return Err(Error::RelativePropertyViolated(format!(
                    "chart {c}: restricted weak transform {} has order above one",
                    mf.weak
                )));
            }
            continue;
        }
        let (phi, z, zdiv) = maximal_contact(&mf.weak, 1, &obj)?;
        if zdiv.is_some() {
            return Err(Error::MaximalContactNotRealizable(format!(
                "chart {c}: only an exceptional coordinate is available"
            )));
        }
        state.ws.tree.apply_automorphism(c, &phi)?;
        let mut fl = fl;
        fl.push(z);
        fl.sort();
        state.flags.insert(c, fl);
    }
    state.check_certificate()?;
    let cert = RelCodimCertificate {
        level: e + 1,
        flags: state.flags.clone(),
        pointwise_last: last,
    };
    state.level = e + 1;
    state.certificates.push(cert.clone());
    Ok(cert)
}

/// A1: smooth components of codimension `codim` disjoint from everything else; A2: the
/// saturation of the weak transform by A1.
pub fn split_components(weak: &Ideal, codim: usize, exceptional: &[usize]) -> Result<(Ideal, Ideal)> {
    let ring = weak.ring().clone();
    if weak.is_unit() {
        return Ok((Ideal::unit(&ring), Ideal::unit(&ring)));
    }
    let d = ring.arity() as i64;
    let primes = minimal_primes(weak)?;
    let mut group1 = Vec::new();
    for (i, p) in primes.iter().enumerate() {
        let on_e = exceptional
            .iter()
            .any(|&h| p.contains(&Polynomial::var(&ring, h)));
        let dim = p.dimension();
        let smooth = dim == d - codim as i64 && p.jacobian_smoothness(codim).map(|r| r.0).unwrap_or(false);
        let disjoint = primes
            .iter()
            .enumerate()
            .all(|(k, q)| k == i || p.sum(q).is_unit());
        if smooth && disjoint && !on_e {
            group1.push(p.clone());
        } else if !on_e {
            if dim < d - codim as i64 {
                let mut dims: Vec<i64> = primes.iter().map(|q| q.dimension()).collect();
                dims.sort();
                dims.dedup();
                return Err(Error::NonPureDimensional(dims));
            }
            return Err(Error::PreconditionViolated(format!(
                "component {p} of the strict transform is not smooth and isolated"
            )));
        }
    }
    let a1 = intersect_all(&group1).unwrap_or_else(|| Ideal::unit(&ring)).reduced();
    let a2 = if a1.is_unit() {
        weak.reduced()
    } else {
        weak.saturate(&a1).0.reduced()
    };
    if !weak.same_radical(&a1.intersect(&a2)) || !a1.sum(&a2).is_unit() {
        return Err(Error::DecompositionIncomplete(weak.to_string()));
    }
    Ok((a1, a2))
}

/// Per leaf chart: exceptional exponents of the total transform and the strict transform.
#[derive(Debug, Clone)]
pub struct ChartResult {
    pub chart: usize,
    pub c: BTreeMap<DivisorId, u32>,
    pub strict: Ideal,
}

#[derive(Debug, Clone)]
pub struct StrongOutput {
    pub input: Ideal,
    pub seeded: Vec<usize>,
    pub codim: usize,
    pub tree: ChartTree,
    pub steps: Vec<RunStep>,
    pub charts: Vec<ChartResult>,
    pub rsing: Ideal,
    pub certificates: Vec<RelCodimCertificate>,
    /// Constant value of the resolution function on a regular input.
    pub regular_value: Option<FValue>,
}

fn strict_transform(registry: &[DivisorRecord], weak: &Ideal) -> Ideal {
    let ring = weak.ring().clone();
    if registry.is_empty() || weak.is_unit() {
        return weak.reduced();
    }
    let mut e = vec![0u32; ring.arity()];
    for d in registry {
        e[d.coordinate] = 1;
    }
    weak.saturate_by(&Polynomial::monomial(&ring, e, Rational::one())).0.reduced()
}

/// Embedded desingularization of V(ideal) with exact factorization of the total transform.
pub fn strong_desingularize(ideal: &Ideal, seeded: &[usize], budget: usize) -> Result<StrongOutput> {
    if ideal.is_zero() {
        return Err(Error::AllZeroInput);
    }
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let dims = component_dimensions(ideal)?;
    if dims.len() > 1 {
        return Err(Error::NonPureDimensional(dims));
    }
    let rs = rsing(ideal, seeded)?;
    let mut state = StrongState::new(ideal, seeded, budget)?;
    let codim = state.codim;
    if rs.is_unit() {
        let mut objs = BTreeMap::new();
        let mf = MarkedFactorization::initial(&state.ws.tree.chart(0).exceptional, ideal, 1);
        objs.insert(0, LevelObject::from_marked(&mf, &state.ws.tree.chart(0).exceptional, &[]));
        let plan = resolution_step(&objs, 1, &mut History::new(), 0)?;
        let value = FValue(plan.f.0.into_iter().take(codim).collect());
        return Ok(finish(state, rs, Some(value)));
    }
    state.initial_level()?;
    while state.level() < codim {
        advance_relative_codim(&mut state)?;
    }
    let mut residual = BTreeMap::new();
    for &c in state.flags.keys() {
        let (_, w) = state.weak(c);
        let exc: Vec<usize> = state.ws.tree.chart(c).exceptional_coordinates().into_iter().collect();
        let (_, a2) = split_components(&w, codim, &exc)?;
        if a2.is_proper() {
            residual.insert(
                c,
                MarkedFactorization::initial(&state.ws.tree.chart(c).exceptional, &a2, 1),
            );
        }
    }
    let first_residual = state.ws.steps.len();
    state
        .ws
        .run_objects(&mut residual, &mut Flags::new(), 1, Phase::Residual, &|_| false)?;
    for step in &state.ws.steps[first_residual..] {
        for cc in &step.centers {
            let (_, w) = state.weak(cc.chart);
            let strict = strict_transform(&state.ws.tree.chart(cc.chart).exceptional, &w);
            let center = Ideal::coordinates(state.input.ring(), &cc.coordinates);
            if !center.sum(&strict).is_unit() {
                return Err(Error::RelativePropertyViolated(format!(
                    "residual center in chart {} meets the strict transform",
                    cc.chart
                )));
            }
        }
    }
    Ok(finish(state, rs, None))
}

fn finish(state: StrongState, rs: Ideal, regular_value: Option<FValue>) -> StrongOutput {
    let tree = state.ws.tree;
    let mut charts = Vec::new();
    for c in tree.leaves() {
        let (exps, w) = factor_exceptional(&tree.chart(c).exceptional, &tree.total_transform(c, &state.input));
        let strict = strict_transform(&tree.chart(c).exceptional, &w);
        charts.push(ChartResult {
            chart: c,
            c: exps,
            strict,
        });
    }
    StrongOutput {
        input: state.input,
        seeded: state.seeded,
        codim: state.codim,
        tree,
        steps: state.ws.steps,
        charts,
        rsing: rs,
        certificates: state.certificates,
        regular_value,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartCheck {
    pub chart: usize,
    pub factorization: bool,
    pub smooth: bool,
    pub normal_crossings: bool,
    pub weak_nonvanishing: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub per_chart: Vec<ChartCheck>,
    pub relative_property: bool,
    pub diagnostics: Vec<String>,
}

impl VerificationReport {
    pub fn factorization(&self) -> bool {
        self.per_chart.iter().all(|c| c.factorization)
    }

    pub fn smooth(&self) -> bool {
        self.per_chart.iter().all(|c| c.smooth)
    }

    pub fn normal_crossings(&self) -> bool {
        self.per_chart.iter().all(|c| c.normal_crossings)
    }

    pub fn weak_nonvanishing(&self) -> bool {
        self.per_chart.iter().all(|c| c.weak_nonvanishing)
    }

    pub fn passed(&self) -> bool {
        self.factorization()
            && self.smooth()
            && self.normal_crossings()
            && self.weak_nonvanishing()
            && self.relative_property
    }
}

fn smooth_of_codim(ideal: &Ideal, codim: usize) -> std::result::Result<(), String> {
    if ideal.is_unit() {
        return Ok(());
    }
    match ideal.jacobian_smoothness(codim) {
        Ok((true, _)) => Ok(()),
        Ok((false, obstruction)) => Err(format!("singular along {obstruction}")),
        Err(e) => Err(e.to_string()),
    }
}

/// Data of one final chart as seen by the verifier.
#[derive(Debug, Clone)]
pub struct ChartEvidence {
    pub chart: usize,
    pub to_root: Vec<Polynomial>,
    pub exceptional: Vec<usize>,
    /// Exponent of each coordinate in the claimed exceptional monomial.
    pub monomial: Vec<u32>,
    pub strict: Ideal,
}

/// Checks the five output properties from chart data and center lists.
pub fn verify_evidence(
    input: &Ideal,
    codim: usize,
    rsing: &Ideal,
    charts: &[ChartEvidence],
    centers: &[(usize, Vec<Polynomial>, Vec<usize>)],
) -> VerificationReport {
    let ring = input.ring().clone();
    let mut per_chart = Vec::new();
    for r in charts {
        let mut diagnostics = Vec::new();
        let total = input.substitute(&r.to_root).expect("arity");
        let factorization = total.equals(&r.strict.times_monomial(&r.monomial));
        if !factorization {
            diagnostics.push(format!("total transform {} differs from x^c * strict", total.reduced()));
        }
        let smooth = match smooth_of_codim(&r.strict, codim) {
            Ok(()) => true,
            Err(msg) => {
                diagnostics.push(format!("strict transform {msg}"));
                false
            }
        };
        let exc = &r.exceptional;
        let mut normal_crossings = true;
        if !r.strict.is_unit() {
            for k in 1..=exc.len() {
                for sub in subsets_of_size(exc.len(), k) {
                    let coords: Vec<usize> = sub.iter().map(|&i| exc[i]).collect();
                    let meet = r.strict.sum(&Ideal::coordinates(&ring, &coords));
                    if meet.is_unit() {
                        continue;
                    }
                    if let Err(msg) = smooth_of_codim(&meet, codim + k) {
                        normal_crossings = false;
                        diagnostics.push(format!("no normal crossings with {coords:?}: {msg}"));
                    }
                }
            }
        }
        let weak_nonvanishing = r.strict.is_unit()
            || exc
                .iter()
                .all(|&h| !Ideal::coordinates(&ring, &[h]).contains_ideal(&r.strict));
        if !weak_nonvanishing {
            diagnostics.push("strict transform vanishes along an exceptional divisor".into());
        }
        per_chart.push(ChartCheck {
            chart: r.chart,
            factorization,
            smooth,
            normal_crossings,
            weak_nonvanishing,
            diagnostics,
        });
    }
    let mut diagnostics = Vec::new();
    let mut relative_property = true;
    for (step, to_root, coords) in centers {
        let image = image_in_root(to_root, coords);
        if !image.radical_contains(rsing) {
            relative_property = false;
            diagnostics.push(format!(
                "step {step}: center image {image} leaves the relative singular locus"
            ));
        }
    }
    VerificationReport {
        per_chart,
        relative_property,
        diagnostics,
    }
}

/// Independent re-check of a strong output.
pub fn verify_output(out: &StrongOutput) -> VerificationReport {
    let arity = out.input.ring().arity();
    let charts: Vec<ChartEvidence> = out
        .charts
        .iter()
        .map(|r| {
            let chart = out.tree.chart(r.chart);
            ChartEvidence {
                chart: r.chart,
                to_root: chart.to_root.clone(),
                exceptional: chart.exceptional.iter().map(|d| d.coordinate).collect(),
                monomial: exponent_vector(&chart.exceptional, &r.c, arity),
                strict: r.strict.clone(),
            }
        })
        .collect();
    let centers: Vec<(usize, Vec<Polynomial>, Vec<usize>)> = out
        .steps
        .iter()
        .flat_map(|s| {
            s.centers
                .iter()
                .map(|cc| (s.index, out.tree.chart(cc.chart).to_root.clone(), cc.coordinates.clone()))
        })
        .collect();
    verify_evidence(&out.input, out.codim, &out.rsing, &charts, &centers)
}

/// Per chart and generator: whether the pullback is divisible by prod x_H^c, and the
/// exponent of each exceptional coordinate in its monomial content.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoszulReport {
    pub charts: Vec<KoszulChart>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KoszulChart {
    pub chart: usize,
    pub divisible: Vec<bool>,
    pub twists: Vec<BTreeMap<DivisorId, u32>>,
}

impl KoszulReport {
    pub fn all_divisible(&self) -> bool {
        self.charts.iter().all(|c| c.divisible.iter().all(|&b| b))
    }
}

pub fn koszul_report(out: &StrongOutput) -> Result<KoszulReport> {
    let gens = out.input.generators();
    if gens.len() != out.codim {
        return Err(Error::NotCompleteIntersection {
            gens: gens.len(),
            codim: out.codim,
        });
    }
    let mut charts = Vec::new();
    for r in &out.charts {
        let chart = out.tree.chart(r.chart);
        let mut divisible = Vec::new();
        let mut twists = Vec::new();
        for g in gens {
            let p = g.substitute(&chart.to_root).expect("arity");
            let content = p.monomial_content();
            let mut tw = BTreeMap::new();
            let mut ok = true;
            for d in &chart.exceptional {
                let need = r.c.get(&d.id).copied().unwrap_or(0);
                ok &= content[d.coordinate] >= need;
                tw.insert(d.id, content[d.coordinate]);
            }
            divisible.push(ok);
            twists.push(tw);
        }
        charts.push(KoszulChart {
            chart: r.chart,
            divisible,
            twists,
        });
    }
    Ok(KoszulReport { charts })
}
