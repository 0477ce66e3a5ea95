use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::rngs::StdRng;
use rand::SeedableRng;
use strongres::chart::{ChartTree, DivisorId, MarkedFactorization};
use strongres::invariants::{f_value_at, resolution_step, singular_locus_ideal, History, LevelObject, StepPlan};
use strongres::rational::format_rational;
use strongres::resolver::{
    image_in_root, koszul_report, principalize, resolve_basic_object, rsing, strong_desingularize,
    verify_evidence, verify_output, ChartEvidence, Phase, ResolutionRun, RunStep, StrongOutput,
    DEFAULT_BUDGET,
};
use strongres::sample::rational_points;
use strongres::{Error, Ideal, Polynomial, RingRef};

use crate::doc::*;
use crate::problem::{parse_polynomial, parse_problem, ProblemError, ProblemFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Strong,
    Principalize,
    Invariants,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Strong => "strong",
            Command::Principalize => "principalize",
            Command::Invariants => "invariants",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Options {
    pub verify: bool,
    pub max_steps: usize,
    pub seed_exceptional: Vec<String>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            verify: false,
            max_steps: DEFAULT_BUDGET,
            seed_exceptional: Vec::new(),
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_ALGORITHM: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Everything a command produces. `json` always holds a document, including for errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunArtifacts {
    pub json: String,
    pub dot: Option<String>,
    pub trace: Vec<String>,
    pub summary: String,
    pub exit_code: i32,
}

/// Machine-readable name of a library error.
pub fn reason(e: &Error) -> &'static str {
    match e {
        Error::EmptyNames => "EmptyNames",
        Error::DuplicateNames(_) => "DuplicateNames",
        Error::MalformedName(_) => "MalformedName",
        Error::ArityMismatch { .. } => "ArityMismatch",
        Error::FrozenViolation(_) => "FrozenViolation",
        Error::SingularMove => "SingularMove",
        Error::AllZeroInput => "AllZeroInput",
        Error::DimensionMismatch { .. } => "DimensionMismatch",
        Error::DecompositionIncomplete(_) => "DecompositionIncomplete",
        Error::UnknownCoordinate(_) => "UnknownCoordinate",
        Error::RepeatedCoordinate(_) => "RepeatedCoordinate",
        Error::ImpermissibleCenter { .. } => "ImpermissibleCenter",
        Error::FlagAlongExceptional(_) => "FlagAlongExceptional",
        Error::EmptySingularLocus => "EmptySingularLocus",
        Error::MonomialCase => "MonomialCase",
        Error::R1NotRealizable(_) => "R1NotRealizable",
        Error::MaximalContactNotRealizable(_) => "MaximalContactNotRealizable",
        Error::BudgetExceeded(_) => "BudgetExceeded",
        Error::NonPureDimensional(_) => "NonPureDimensional",
        Error::RelativePropertyViolated(_) => "RelativePropertyViolated",
        Error::NotCompleteIntersection { .. } => "NotCompleteIntersection",
        Error::UnitIdeal => "UnitIdeal",
        Error::PreconditionViolated(_) => "PreconditionViolated",
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::BudgetExceeded(_) => EXIT_BUDGET,
        Error::RelativePropertyViolated(_) => EXIT_VERIFY,
        Error::UnitIdeal | Error::AllZeroInput | Error::EmptySingularLocus => EXIT_INPUT,
        _ => EXIT_ALGORITHM,
    }
}

fn to_json<T: serde::Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn error_artifacts(command: Command, problem: Option<&ProblemFile>, reason: &str, message: String, code: i32) -> RunArtifacts {
    let doc = ErrorDoc {
        schema: SCHEMA,
        command: command.name().into(),
        problem: problem.map(problem_doc),
        error: ErrorBody {
            reason: reason.into(),
            message: message.clone(),
        },
    };
    RunArtifacts {
        json: to_json(&doc),
        dot: None,
        trace: Vec::new(),
        summary: format!("error ({reason}): {message}\n"),
        exit_code: code,
    }
}

fn problem_error(command: Command, e: &ProblemError) -> RunArtifacts {
    error_artifacts(command, None, e.reason(), e.to_string(), EXIT_INPUT)
}

fn library_error(command: Command, problem: &ProblemFile, e: &Error) -> RunArtifacts {
    error_artifacts(command, Some(problem), reason(e), e.to_string(), exit_code(e))
}

pub fn problem_doc(p: &ProblemFile) -> ProblemDoc {
    ProblemDoc {
        text: p.to_string(),
        variables: p.variables().to_vec(),
        generators: p.generators.iter().map(|g| g.to_string()).collect(),
        exceptional: p.exceptional_names(),
        threshold: p.threshold,
    }
}

fn strings(ideal: &Ideal) -> Vec<String> {
    ideal.reduced().generators().iter().map(|g| g.to_string()).collect()
}

fn names(ring: &RingRef, coords: &[usize]) -> Vec<String> {
    coords.iter().map(|&i| ring.name(i).to_string()).collect()
}

fn zero_locus(ring: &RingRef, coords: &[usize]) -> String {
    format!("V({})", names(ring, coords).join(", "))
}

fn phase_name(p: Phase) -> &'static str {
    match p {
        Phase::Resolve => "resolve",
        Phase::Advance { .. } => "advance",
        Phase::Unload { .. } => "unload",
        Phase::Residual => "residual",
    }
}

fn exponent_docs(m: &BTreeMap<DivisorId, u32>) -> Vec<ExponentDoc> {
    m.iter()
        .filter(|(_, &e)| e > 0)
        .map(|(&divisor, &exponent)| ExponentDoc { divisor, exponent })
        .collect()
}

fn step_docs(ring: &RingRef, steps: &[RunStep]) -> Vec<StepDoc> {
    let mut out = Vec::new();
    for s in steps {
        for cc in &s.centers {
            out.push(StepDoc {
                index: s.index + 1,
                phase: phase_name(s.phase).into(),
                level: s.level,
                t_value: s.f.as_ref().and_then(|f| f.0.first()).map(|t| t.to_string()),
                f_value: s.f.as_ref().map(|f| f.to_string()),
                divisor: s.divisor,
                center: CenterDoc {
                    chart: cc.chart,
                    coordinates: names(ring, &cc.coordinates),
                },
            });
        }
    }
    out
}

fn trace_lines(ring: &RingRef, steps: &[RunStep]) -> Vec<String> {
    steps
        .iter()
        .map(|s| {
            let t = s
                .f
                .as_ref()
                .and_then(|f| f.0.first())
                .map(|t| t.to_string())
                .unwrap_or_else(|| "unload".into());
            let centers: Vec<String> = s
                .centers
                .iter()
                .map(|cc| format!("chart {}: {}", cc.chart, zero_locus(ring, &cc.coordinates)))
                .collect();
            format!("step {}: level {}, t={}, center={}", s.index + 1, s.level, t, centers.join("; "))
        })
        .collect()
}

/// Final data of a leaf chart: total-transform exponents, weak and strict transform.
struct LeafData {
    c: BTreeMap<DivisorId, u32>,
    weak: Ideal,
    strict: Ideal,
}

fn chart_docs(tree: &ChartTree, leaves: &BTreeMap<usize, LeafData>) -> Vec<ChartDoc> {
    let ring = tree.ring();
    tree.charts()
        .iter()
        .map(|ch| {
            let leaf = leaves.get(&ch.id);
            ChartDoc {
                id: ch.id,
                parent: ch.parent.map(|(p, _)| p),
                pivot: ch.parent.map(|(_, v)| ring.name(v).to_string()),
                created_at: ch.created_at,
                leaf: ch.children.is_empty(),
                variables: ring.names().to_vec(),
                exceptional: ch
                    .exceptional
                    .iter()
                    .map(|d| DivisorDoc {
                        divisor: d.id,
                        coordinate: ring.name(d.coordinate).to_string(),
                        birth: d.birth,
                    })
                    .collect(),
                to_root: ch.to_root.iter().map(|p| p.to_string()).collect(),
                c_exponents: leaf.map(|l| exponent_docs(&l.c)),
                weak_generators: leaf.map(|l| strings(&l.weak)),
                strict_transform_generators: leaf.map(|l| strings(&l.strict)),
            }
        })
        .collect()
}

/// One node per chart labelled id/pivot, one edge per parent link labelled by the step.
pub fn render_dot(tree: &ChartTree) -> String {
    let ring = tree.ring();
    let mut s = String::from("digraph charts {\n");
    for ch in tree.charts() {
        let label = match ch.parent {
            Some((_, v)) => format!("{} / {}", ch.id, ring.name(v)),
            None => ch.id.to_string(),
        };
        let _ = writeln!(s, "  c{} [label=\"{}\"];", ch.id, label);
    }
    for ch in tree.charts() {
        if let Some((p, _)) = ch.parent {
            let step = ch.created_at.unwrap_or(0);
            let _ = writeln!(s, "  c{} -> c{} [label=\"{}\"];", p, ch.id, step);
        }
    }
    s.push_str("}\n");
    s
}

fn exceptional_product(tree: &ChartTree, chart: usize) -> Polynomial {
    let ring = tree.ring();
    tree.chart(chart)
        .exceptional
        .iter()
        .fold(Polynomial::one(ring), |acc, d| &acc * &Polynomial::var(ring, d.coordinate))
}

fn strong_document(problem: &ProblemFile, out: &StrongOutput) -> StrongDoc {
    let ring = out.input.ring();
    let report = verify_output(out);
    let leaves: BTreeMap<usize, LeafData> = out
        .charts
        .iter()
        .map(|r| {
            let (_, weak) = out.tree.factor_exceptional(r.chart, &out.input);
            (
                r.chart,
                LeafData {
                    c: r.c.clone(),
                    weak,
                    strict: r.strict.clone(),
                },
            )
        })
        .collect();
    let center_images = out
        .steps
        .iter()
        .flat_map(|s| {
            s.centers.iter().map(move |cc| CenterImageDoc {
                step: s.index + 1,
                chart: cc.chart,
                image: strings(&image_in_root(&out.tree.chart(cc.chart).to_root, &cc.coordinates)),
            })
        })
        .collect();
    let per_chart = report
        .per_chart
        .iter()
        .map(|c| ChartReportDoc {
            chart: c.chart,
            factorization: c.factorization,
            smooth: c.smooth,
            normal_crossings: c.normal_crossings,
            weak_nonvanishing: c.weak_nonvanishing,
            diagnostics: c.diagnostics.clone(),
        })
        .collect();
    let koszul = koszul_report(out).ok().map(|k| {
        k.charts
            .iter()
            .map(|c| KoszulChartDoc {
                chart: c.chart,
                divisible: c.divisible.clone(),
                twists: c.twists.iter().map(exponent_docs).collect(),
            })
            .collect()
    });
    StrongDoc {
        schema: SCHEMA,
        command: Command::Strong.name().into(),
        problem: problem_doc(problem),
        codim: out.codim,
        regular_value: out.regular_value.as_ref().map(|f| f.to_string()),
        steps: step_docs(ring, &out.steps),
        charts: chart_docs(&out.tree, &leaves),
        report: StrongReportDoc {
            passed: report.passed(),
            factorization: report.factorization(),
            smooth: report.smooth(),
            normal_crossings: report.normal_crossings(),
            weak_nonvanishing: report.weak_nonvanishing(),
            relative_property: report.relative_property,
            rsing: strings(&out.rsing),
            center_images,
            per_chart,
            diagnostics: report.diagnostics.clone(),
        },
        koszul,
    }
}

fn principalize_document(problem: &ProblemFile, run: &ResolutionRun) -> PrincipalizeDoc {
    let tree = run.tree();
    let leaves: BTreeMap<usize, LeafData> = run
        .objects
        .iter()
        .filter(|(c, _)| tree.chart(**c).children.is_empty())
        .map(|(&c, mf)| {
            let total = tree.total_transform(c, &run.input);
            let strict = total.saturate_by(&exceptional_product(tree, c)).0;
            (
                c,
                LeafData {
                    c: mf.c.clone(),
                    weak: mf.weak.clone(),
                    strict,
                },
            )
        })
        .collect();
    let resolved = run.is_resolved();
    let monomial = run.b != 1 || run.is_monomial();
    let inside = run.centers_inside_input();
    PrincipalizeDoc {
        schema: SCHEMA,
        command: Command::Principalize.name().into(),
        problem: problem_doc(problem),
        steps: step_docs(tree.ring(), run.steps()),
        charts: chart_docs(tree, &leaves),
        report: PrincipalizeReportDoc {
            passed: resolved && monomial && inside,
            resolved,
            monomial,
            centers_inside_input: inside,
        },
    }
}

/// The first resolution step of (ideal, b) on the root chart, without blowing up.
pub fn initial_plan(problem: &ProblemFile) -> strongres::Result<(ChartTree, StepPlan)> {
    let ideal = problem.ideal();
    if ideal.is_unit() {
        return Err(Error::UnitIdeal);
    }
    let mut tree = ChartTree::on_ring(&problem.ring);
    tree.seed_exceptional(&problem.exceptional)?;
    let registry = tree.chart(0).exceptional.clone();
    let mf = MarkedFactorization::initial(&registry, &ideal, problem.threshold);
    let mut objects = BTreeMap::new();
    objects.insert(0, LevelObject::from_marked(&mf, &registry, &[]));
    let plan = resolution_step(&objects, problem.threshold, &mut History::new(), 0)?;
    Ok((tree, plan))
}

const SAMPLE_COUNT: usize = 20;

fn invariants_document(problem: &ProblemFile, tree: &ChartTree, plan: &StepPlan) -> strongres::Result<InvariantsDoc> {
    let ring = &problem.ring;
    let mut levels = Vec::new();
    for l in &plan.levels {
        let charts = l
            .charts
            .iter()
            .map(|(&chart, c)| ChartLevelDoc {
                chart,
                object: strings(&c.object.ideal()),
                order: c.order,
                n: c.n,
                sing: strings(&c.sing),
                w_locus: strings(&c.w_locus),
                t_locus: c.t_locus.as_ref().map(strings),
                hypersurface: c.hypersurface.as_ref().map(|h| h.to_string()),
                companion: c.companion.as_ref().map(|(i, b)| CompanionDoc {
                    generators: strings(i),
                    b: *b,
                }),
                contact: c.contact.as_ref().map(|(_, z, d)| ContactDoc {
                    coordinate: ring.name(*z).to_string(),
                    divisor: *d,
                }),
                gamma: c.gamma.as_ref().map(|g| strongres::invariants::TValue::Gamma(g.clone()).to_string()),
            })
            .collect();
        levels.push(LevelDoc {
            depth: l.depth,
            dim: l.dim,
            b: l.b,
            max_w_ord: format_rational(&l.wmax),
            t: l.t.to_string(),
            e_minus: l.e_minus.iter().copied().collect(),
            terminal: l.terminal.map(|t| format!("{t:?}").to_lowercase()),
            charts,
        });
    }
    let mut max_locus = Ideal::unit(ring);
    let mut center = Vec::new();
    for cc in &plan.centers {
        let to_root = cc.automorphism.apply_all(&tree.chart(cc.chart).to_root);
        max_locus = max_locus.intersect(&image_in_root(&to_root, &cc.coordinates));
        center.push(CenterDoc {
            chart: cc.chart,
            coordinates: names(ring, &cc.coordinates),
        });
    }
    let registry = &tree.chart(0).exceptional;
    let mf = MarkedFactorization::initial(registry, &problem.ideal(), problem.threshold);
    let sing = singular_locus_ideal(&LevelObject::from_marked(&mf, registry, &[]), problem.threshold);
    let mut rng = StdRng::seed_from_u64(0);
    let mut points = rational_points(&sing, &mut rng, SAMPLE_COUNT, 10 * SAMPLE_COUNT, 3);
    points.sort();
    let mut samples = Vec::new();
    for p in points {
        let f = f_value_at(plan, 0, &p)?;
        samples.push(SampleDoc {
            point: p.iter().map(format_rational).collect(),
            f_value: f.map(|f| f.to_string()),
        });
    }
    Ok(InvariantsDoc {
        schema: SCHEMA,
        command: Command::Invariants.name().into(),
        problem: problem_doc(problem),
        f_value: plan.f.to_string(),
        max_locus: strings(&max_locus),
        center,
        levels,
        samples,
    })
}

fn invariants_summary(doc: &InvariantsDoc) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "f-value: {}", doc.f_value);
    let _ = writeln!(s, "max locus: V({})", doc.max_locus.join(", "));
    for l in &doc.levels {
        let _ = writeln!(s, "level {} (dim {}): t={}, max w-ord={}", l.depth, l.dim, l.t, l.max_w_ord);
    }
    for c in &doc.center {
        let _ = writeln!(s, "center: chart {}: V({})", c.chart, c.coordinates.join(", "));
    }
    for p in &doc.samples {
        let _ = writeln!(
            s,
            "sample ({}): {}",
            p.point.join(", "),
            p.f_value.as_deref().unwrap_or("outside Sing")
        );
    }
    s
}

/// Runs a command on the text of its input file.
pub fn execute(command: Command, input: &str, opts: &Options) -> RunArtifacts {
    if command == Command::Verify {
        return verify_text(input);
    }
    let mut problem = match parse_problem(input) {
        Ok(p) => p,
        Err(e) => return problem_error(command, &e),
    };
    if let Err(e) = problem.seed(&opts.seed_exceptional) {
        return problem_error(command, &e);
    }
    let ideal = problem.ideal();
    let ring = problem.ring.clone();
    match command {
        Command::Strong => {
            if problem.threshold != 1 {
                let e = ProblemError::Invalid {
                    line: 0,
                    col: 0,
                    message: "strong desingularization takes threshold 1".into(),
                };
                return problem_error(command, &e);
            }
            let out = match strong_desingularize(&ideal, &problem.exceptional, opts.max_steps) {
                Ok(o) => o,
                Err(e) => return library_error(command, &problem, &e),
            };
            let doc = strong_document(&problem, &out);
            let json = to_json(&doc);
            let mut summary = String::new();
            let _ = writeln!(summary, "blowups: {}", out.steps.len());
            let _ = writeln!(summary, "charts: {}", out.tree.charts().len());
            if let Some(v) = &doc.regular_value {
                let _ = writeln!(summary, "regular input, constant value {v}");
            }
            let r = &doc.report;
            let _ = writeln!(
                summary,
                "factorization={} smooth={} normal_crossings={} weak_nonvanishing={} relative_property={}",
                r.factorization, r.smooth, r.normal_crossings, r.weak_nonvanishing, r.relative_property
            );
            let mut passed = r.passed;
            if opts.verify {
                let check = verify_text(&json);
                let _ = writeln!(
                    summary,
                    "independent check: {}",
                    if check.exit_code == EXIT_OK { "pass" } else { "fail" }
                );
                passed &= check.exit_code == EXIT_OK;
            }
            let _ = writeln!(summary, "verification: {}", if passed { "pass" } else { "fail" });
            RunArtifacts {
                json,
                dot: Some(render_dot(&out.tree)),
                trace: trace_lines(&ring, &out.steps),
                summary,
                exit_code: if passed { EXIT_OK } else { EXIT_VERIFY },
            }
        }
        Command::Principalize => {
            let run = if problem.threshold == 1 {
                principalize(&ideal, &problem.exceptional, opts.max_steps)
            } else {
                resolve_basic_object(&ideal, problem.threshold, &problem.exceptional, opts.max_steps)
            };
            let run = match run {
                Ok(r) => r,
                Err(e) => return library_error(command, &problem, &e),
            };
            let doc = principalize_document(&problem, &run);
            let r = &doc.report;
            let summary = format!(
                "blowups: {}\ncharts: {}\nresolved={} monomial={} centers_inside_input={}\nverification: {}\n",
                run.steps().len(),
                run.tree().charts().len(),
                r.resolved,
                r.monomial,
                r.centers_inside_input,
                if r.passed { "pass" } else { "fail" }
            );
            RunArtifacts {
                json: to_json(&doc),
                dot: Some(render_dot(run.tree())),
                trace: trace_lines(&ring, run.steps()),
                summary,
                exit_code: if r.passed { EXIT_OK } else { EXIT_VERIFY },
            }
        }
        Command::Invariants => {
            let doc = initial_plan(&problem).and_then(|(tree, plan)| invariants_document(&problem, &tree, &plan));
            match doc {
                Ok(doc) => RunArtifacts {
                    json: to_json(&doc),
                    dot: None,
                    trace: Vec::new(),
                    summary: invariants_summary(&doc),
                    exit_code: EXIT_OK,
                },
                Err(e) => library_error(command, &problem, &e),
            }
        }
        Command::Verify => unreachable!("handled above"),
    }
}

fn check(name: &str, passed: bool, detail: Vec<String>) -> CheckDoc {
    CheckDoc {
        name: name.into(),
        passed,
        detail,
    }
}

fn index_of(ring: &RingRef, name: &str) -> Result<usize, String> {
    ring.index_of(name).ok_or_else(|| format!("unknown coordinate `{name}`"))
}

fn parse_all(ring: &RingRef, gens: &[String]) -> Result<Vec<Polynomial>, String> {
    gens.iter()
        .map(|g| parse_polynomial(ring, g).map_err(|e| format!("`{g}`: {e}")))
        .collect()
}

/// Rebuilds the verifier's evidence from a document and checks the output properties.
fn check_evidence(problem: &ProblemFile, doc: &StrongDoc) -> Result<CheckDoc, String> {
    let ring = &problem.ring;
    let d = ring.arity();
    let input = problem.ideal();
    let codim = (d as i64 - input.dimension()) as usize;
    let rs = rsing(&input, &problem.exceptional).map_err(|e| e.to_string())?;
    let mut to_roots: BTreeMap<usize, Vec<Polynomial>> = BTreeMap::new();
    let mut evidence = Vec::new();
    for ch in &doc.charts {
        if ch.variables != ring.names() {
            return Err(format!("chart {} has foreign variables", ch.id));
        }
        let to_root = parse_all(ring, &ch.to_root)?;
        if to_root.len() != d {
            return Err(format!("chart {} has {} root images", ch.id, to_root.len()));
        }
        to_roots.insert(ch.id, to_root.clone());
        if !ch.leaf {
            continue;
        }
        let mut coordinate_of: BTreeMap<u32, usize> = BTreeMap::new();
        let mut exceptional = Vec::new();
        for e in &ch.exceptional {
            let i = index_of(ring, &e.coordinate)?;
            coordinate_of.insert(e.divisor, i);
            exceptional.push(i);
        }
        let mut monomial = vec![0u32; d];
        for e in ch.c_exponents.as_ref().ok_or(format!("leaf chart {} lacks c_exponents", ch.id))? {
            let i = coordinate_of
                .get(&e.divisor)
                .ok_or(format!("chart {}: divisor {} is not registered", ch.id, e.divisor))?;
            monomial[*i] += e.exponent;
        }
        let strict = ch
            .strict_transform_generators
            .as_ref()
            .ok_or(format!("leaf chart {} lacks a strict transform", ch.id))?;
        evidence.push(ChartEvidence {
            chart: ch.id,
            to_root,
            exceptional,
            monomial,
            strict: Ideal::new(ring, parse_all(ring, strict)?),
        });
    }
    if evidence.is_empty() {
        return Err("no leaf charts".into());
    }
    let mut centers = Vec::new();
    for s in &doc.steps {
        let to_root = to_roots
            .get(&s.center.chart)
            .ok_or(format!("step {} names unknown chart {}", s.index, s.center.chart))?;
        let coords = s
            .center
            .coordinates
            .iter()
            .map(|n| index_of(ring, n))
            .collect::<Result<Vec<usize>, String>>()?;
        centers.push((s.index, to_root.clone(), coords));
    }
    let report = verify_evidence(&input, codim, &rs, &evidence, &centers);
    let mut detail: Vec<String> = report
        .per_chart
        .iter()
        .flat_map(|c| c.diagnostics.iter().map(move |m| format!("chart {}: {m}", c.chart)))
        .collect();
    detail.extend(report.diagnostics.iter().cloned());
    Ok(check("output properties", report.passed(), detail))
}

fn verify_text(text: &str) -> RunArtifacts {
    let command = Command::Verify;
    let doc: StrongDoc = match serde_json::from_str(text) {
        Ok(d) => d,
        Err(e) => return error_artifacts(command, None, "MalformedDocument", e.to_string(), EXIT_INPUT),
    };
    if doc.schema != SCHEMA || doc.command != Command::Strong.name() {
        return error_artifacts(
            command,
            None,
            "MalformedDocument",
            format!("expected a schema {SCHEMA} `strong` document"),
            EXIT_INPUT,
        );
    }
    let problem = match parse_problem(&doc.problem.text) {
        Ok(p) => p,
        Err(e) => return problem_error(command, &e),
    };
    let mut checks = Vec::new();
    checks.push(check(
        "problem fields",
        problem_doc(&problem) == doc.problem,
        Vec::new(),
    ));
    checks.push(match check_evidence(&problem, &doc) {
        Ok(c) => c,
        Err(msg) => check("output properties", false, vec![msg]),
    });
    checks.push(check("recorded report", doc.report.passed, Vec::new()));
    // The replay budget is the recorded number of steps, so a shortened log fails here.
    let recorded: BTreeSet<usize> = doc.steps.iter().map(|s| s.index).collect();
    let replay = match strong_desingularize(&problem.ideal(), &problem.exceptional, recorded.len()) {
        Ok(out) => {
            let fresh = strong_document(&problem, &out);
            check("replay", fresh == doc, if fresh == doc { Vec::new() } else { vec!["document differs from a fresh run".into()] })
        }
        Err(e) => check("replay", false, vec![e.to_string()]),
    };
    checks.push(replay);
    let passed = checks.iter().all(|c| c.passed);
    let mut summary = String::new();
    for c in &checks {
        let _ = writeln!(summary, "{}: {}", c.name, if c.passed { "pass" } else { "fail" });
        for d in &c.detail {
            let _ = writeln!(summary, "  {d}");
        }
    }
    let _ = writeln!(summary, "verification: {}", if passed { "pass" } else { "fail" });
    RunArtifacts {
        json: to_json(&VerifyDoc {
            schema: SCHEMA,
            command: command.name().into(),
            passed,
            checks,
        }),
        dot: None,
        trace: Vec::new(),
        summary,
        exit_code: if passed { EXIT_OK } else { EXIT_VERIFY },
    }
}

