//! Verification of a parametric coloring: the sets partition `[1, N]` and no
//! color class contains a solution of the equation, for every admissible
//! parameter value.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diophantine::LinearEquation;
use crate::oracle::monochromatic_solutions;
use crate::scalar::Scalar;
use crate::smt::strengthen::{strengthen, Limits, Rung};
use crate::smt::{replay, Constraint, Problem, SmtProver, SmtSolver, SolverError, Verdict};
use crate::symcore::{Bindings, Fresh, Poly, Simplifier, SymExpr, Symbol};
use crate::symset::{
    membership, size_poly, ColoringSpec, FormatSet, Hint, Injectivity, SetError, SetShape, SpecError, SymbolicSet,
};

#[derive(Debug, Clone)]
pub struct ProverConfig {
    pub solver: SmtSolver,
    /// Timeout for every rung but the last, which uses the solver's own.
    pub step_timeout: Duration,
    pub rungs: Vec<Rung>,
    pub limits: Limits,
    /// Worker threads; 0 lets rayon decide.
    pub jobs: usize,
    /// Report each finished check on stderr.
    pub progress: bool,
}

impl ProverConfig {
    pub fn new(solver: SmtSolver) -> Self {
        let step_timeout = solver.command.timeout.min(Duration::from_secs(3));
        ProverConfig { solver, step_timeout, rungs: Rung::ALL.to_vec(), limits: Limits::default(), jobs: 0, progress: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Passed,
    Failed,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Outcome of one refutation attempt through the rungs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    /// `unsat`, `sat`, `unknown`, `timeout` or `error`.
    pub verdict: String,
    pub rung: Option<Rung>,
    pub seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Attempt {
    pub fn is_unsat(&self) -> bool {
        self.verdict == "unsat"
    }

    fn status(&self) -> Status {
        match self.verdict.as_str() {
            "unsat" => Status::Passed,
            "sat" => Status::Failed,
            _ => Status::Unknown,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Case {
    pub id: usize,
    pub class: String,
    /// Set holding each variable, in equation order.
    pub sets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseResult {
    #[serde(flatten)]
    pub case: Case,
    #[serde(flatten)]
    pub attempt: Attempt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub cases: usize,
    pub unsat: usize,
    pub sat: usize,
    pub inconclusive: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub spec: String,
    pub n: String,
    /// `N + 1`, a lower bound on the Rado number when `verified`.
    pub bound: String,
    pub assumptions: Vec<String>,
    pub partition: Vec<Check>,
    pub hints: Vec<Check>,
    pub sizes: BTreeMap<String, String>,
    pub cases: Vec<CaseResult>,
    pub summary: Summary,
    pub verified: bool,
    pub seconds: f64,
}

/// Colorings enumerated by class: every tuple of member sets, one per variable.
pub fn enumerate_cases<T: Scalar>(spec: &ColoringSpec<T>) -> Vec<Case> {
    let m = spec.equation.arity();
    let mut out = Vec::new();
    for class in &spec.classes {
        let t = class.members.len();
        if t == 0 {
            continue;
        }
        let mut digits = vec![0usize; m];
        loop {
            out.push(Case {
                id: out.len(),
                class: class.name.clone(),
                sets: digits.iter().map(|&d| class.members[d].name.clone()).collect(),
            });
            let mut p = m;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                digits[p] += 1;
                if digits[p] < t {
                    break;
                }
                digits[p] = 0;
            }
            if digits.iter().all(|&d| d == 0) {
                break;
            }
        }
    }
    out
}

/// Variable names used for the equation's unknowns.
pub fn variable_names(arity: usize) -> Vec<Symbol> {
    if arity == 3 {
        return ["x", "y", "z"].iter().map(|s| Symbol::new(s)).collect();
    }
    (1..=arity).map(|i| Symbol::new(&format!("x{i}"))).collect()
}

pub struct Prover<'a, T: Scalar> {
    pub spec: &'a ColoringSpec<T>,
    pub config: ProverConfig,
    guard: SmtProver,
    /// Hints that passed their check; `None` until checked.
    verified_hints: Option<Vec<Hint<T>>>,
}

impl<'a, T: Scalar> Prover<'a, T> {
    pub fn new(spec: &'a ColoringSpec<T>, config: ProverConfig) -> Self {
        let guard = SmtProver { solver: config.solver.clone() };
        Prover { spec, config, guard, verified_hints: None }
    }

    pub fn simplifier(&self) -> Simplifier<'_, T> {
        Simplifier::new(&self.spec.asm, &self.guard)
    }

    fn problem(&self) -> (Problem<T>, Fresh) {
        let mut p = Problem::new(self.spec.asm.clone());
        p.params = self.spec.symbols.iter().filter(|s| self.spec.asm.lower(s).is_none()).cloned().collect();
        let mut taken: Vec<Symbol> = self.spec.symbols.clone();
        for s in self.spec.sets() {
            taken.extend(s.parameters());
        }
        (p, Fresh::new(taken))
    }

    fn add_member(&self, p: &mut Problem<T>, fresh: &mut Fresh, set: &SymbolicSet<T>, v: &Symbol, tag: &str) {
        p.vars.insert(v.clone());
        fresh.reserve(v);
        let m = membership(set, &SymExpr::symbol(v.clone()), tag, fresh);
        p.vars.extend(m.vars);
        p.constraints.push(m.constraint);
    }

    /// Try to show `p` unsatisfiable, climbing the rungs until one decides.
    pub fn refute(&self, p: &Problem<T>, prefer: &[Symbol], name: &str) -> Attempt {
        let start = Instant::now();
        let simp = self.simplifier();
        let mut last = ("unknown".to_string(), None::<String>);
        let rungs = &self.config.rungs;
        for (i, &rung) in rungs.iter().enumerate() {
            let q = strengthen(p, rung, prefer, &simp, self.config.limits);
            let solver = if i + 1 < rungs.len() {
                self.config.solver.with_timeout(self.config.step_timeout)
            } else {
                self.config.solver.clone()
            };
            let tag = format!("{name}_{}", rung_tag(rung));
            match solver.check(&q, &tag) {
                Ok(v) => match v.verdict {
                    Verdict::Unsat => return attempt("unsat", Some(rung), start, None, None),
                    Verdict::Sat(model) => {
                        return match replay(p, &model) {
                            Ok(()) => attempt("sat", Some(rung), start, Some(render(&model)), None),
                            Err(e) => attempt("error", Some(rung), start, Some(render(&model)), Some(e.to_string())),
                        };
                    }
                    Verdict::Unknown(r) => last = ("unknown".into(), Some(r)),
                    Verdict::Timeout => last = ("timeout".into(), None),
                },
                Err(SolverError::Launch(e)) => return attempt("error", None, start, None, Some(e.to_string())),
                Err(e) => last = ("error".into(), Some(e.to_string())),
            }
        }
        attempt(&last.0, None, start, None, last.1)
    }

    /// Problem whose solutions are monochromatic solutions in the given sets.
    pub fn case_problem(&self, case: &Case) -> (Problem<T>, Vec<Symbol>) {
        let (mut p, mut fresh) = self.problem();
        let names = variable_names(self.spec.equation.arity());
        let hints = self.usable_hints();
        for (v, set_name) in names.iter().zip(&case.sets) {
            let set = self.spec.set(set_name).expect("case sets come from the spec");
            self.add_member(&mut p, &mut fresh, set, v, v.as_str());
            for h in hints.iter().filter(|h| &h.set == set_name) {
                p.constraints.push(Constraint::Divides(h.divides.clone(), SymExpr::symbol(v.clone())));
            }
        }
        let eq = &self.spec.equation;
        let (last, init) = names.split_last().expect("arity >= 3");
        let mut lhs: Vec<SymExpr<T>> = eq.lhs.iter().zip(init).map(|(c, v)| c.clone() * SymExpr::symbol(v.clone())).collect();
        lhs.push(eq.constant.clone());
        p.constraints.push(Constraint::eq(SymExpr::add_all(lhs), eq.rhs.clone() * SymExpr::symbol(last.clone())));
        (p, names)
    }

    pub fn verify_case(&self, case: &Case) -> CaseResult {
        let (p, names) = self.case_problem(case);
        let attempt = self.refute(&p, &names, &format!("case{}", case.id));
        self.report(&format!("case {} ({})", case.id, case.sets.join(", ")), &attempt);
        CaseResult { case: case.clone(), attempt }
    }

    fn report(&self, label: &str, a: &Attempt) {
        if self.config.progress {
            eprintln!("{label}: {} [{:.1}s]", describe(a), a.seconds);
        }
    }

    fn usable_hints(&self) -> Vec<Hint<T>> {
        self.verified_hints.clone().unwrap_or_default()
    }

    /// Each hint as a check: no member of the set escapes the divisor.
    pub fn check_hints(&self) -> Vec<(Hint<T>, Check)> {
        let x = Symbol::new("x");
        self.spec
            .hints
            .iter()
            .map(|h| {
                let (mut p, mut fresh) = self.problem();
                let set = self.spec.set(&h.set).expect("hint sets validated at load");
                self.add_member(&mut p, &mut fresh, set, &x, "x");
                p.constraints.push(Constraint::NotDivides(h.divides.clone(), SymExpr::symbol(x.clone())));
                let a = self.refute(&p, &[x.clone()], &format!("hint_{}", h.set));
                let name = format!("hint {} divides {}", h.divides, h.set);
                self.report(&name, &a);
                let check = Check {
                    name,
                    status: a.status(),
                    detail: describe(&a),
                };
                (h.clone(), check)
            })
            .collect()
    }

    /// Two distinct index tuples with the same image are impossible.
    pub fn check_injective(&self, set: &SymbolicSet<T>) -> Attempt {
        let SetShape::Format(f) = &set.shape else {
            return attempt("unsat", None, Instant::now(), None, Some("interval".into()));
        };
        let (mut p, mut fresh) = self.problem();
        let x = Symbol::new("x");
        p.vars.insert(x.clone());
        fresh.reserve(&x);
        let bare = SymbolicSet::format(&set.name, FormatSet { exclude: Vec::new(), ..f.clone() });
        let mu = membership(&bare, &SymExpr::symbol(x.clone()), "u", &mut fresh);
        let mv = membership(&bare, &SymExpr::symbol(x.clone()), "v", &mut fresh);
        let differ = Constraint::or(
            mu.vars.iter().zip(&mv.vars).map(|(u, v)| Constraint::ne(SymExpr::symbol(u.clone()), SymExpr::symbol(v.clone()))).collect(),
        );
        p.vars.extend(mu.vars.iter().cloned());
        p.vars.extend(mv.vars.iter().cloned());
        p.constraints.extend([mu.constraint, mv.constraint, differ]);
        let a = self.refute(&p, &[x], &format!("inj_{}", set.name));
        self.report(&format!("{} injective", set.name), &a);
        a
    }

    /// Subset of `[1, N]`, pairwise disjoint, nonnegative range lengths and
    /// sizes summing to `N`. Returns the checks and the size of each set.
    pub fn verify_partition(&self) -> (Vec<Check>, BTreeMap<String, String>) {
        let sets: Vec<&SymbolicSet<T>> = self.spec.sets().collect();
        let x = Symbol::new("x");
        let mut jobs: Vec<(String, Problem<T>)> = Vec::new();
        let n = self.spec.n.clone();
        for s in &sets {
            let (mut p, mut fresh) = self.problem();
            self.add_member(&mut p, &mut fresh, s, &x, "x");
            let xv = SymExpr::symbol(x.clone());
            p.constraints.push(Constraint::or(vec![
                Constraint::lt(xv.clone(), SymExpr::one()),
                Constraint::lt(n.clone(), xv),
            ]));
            jobs.push((format!("{} within [1, N]", s.name), p));
            for (k, lo, hi) in self.ranges(s) {
                let (mut p, mut fresh) = self.problem();
                let outer = self.outer_indices(s, &k, &mut fresh);
                p.vars.extend(outer.1);
                p.constraints.extend(outer.0);
                p.constraints.push(Constraint::lt(hi.replace(&outer.2) + 1, lo.replace(&outer.2)));
                jobs.push((format!("{} range of {k} has length >= 0", s.name), p));
            }
        }
        for (i, a) in sets.iter().enumerate() {
            for b in &sets[i + 1..] {
                let (mut p, mut fresh) = self.problem();
                self.add_member(&mut p, &mut fresh, a, &x, "u");
                self.add_member(&mut p, &mut fresh, b, &x, "v");
                jobs.push((format!("{} and {} disjoint", a.name, b.name), p));
            }
        }
        let mut checks = self.pool().install(|| {
            jobs.par_iter()
                .enumerate()
                .map(|(i, (name, p))| {
                    let a = self.refute(p, &[x.clone()], &format!("part{i}"));
                    self.report(name, &a);
                    Check { name: name.clone(), status: a.status(), detail: describe(&a) }
                })
                .collect::<Vec<_>>()
        });
        let (size_check, sizes) = self.size_check();
        checks.extend(size_check);
        (checks, sizes)
    }

    /// `(index, lower, upper)` for every range whose length must be nonnegative.
    fn ranges(&self, s: &SymbolicSet<T>) -> Vec<(Symbol, SymExpr<T>, SymExpr<T>)> {
        match &s.shape {
            SetShape::Interval(i) => vec![(Symbol::new("v"), i.lower.clone(), i.upper.clone())],
            SetShape::Format(f) => f.indices.iter().map(|v| (v.name.clone(), v.lower.clone(), v.upper.clone())).collect(),
        }
    }

    /// Range constraints of the indices enclosing `k`, renamed apart.
    fn outer_indices(
        &self,
        s: &SymbolicSet<T>,
        k: &Symbol,
        fresh: &mut Fresh,
    ) -> (Vec<Constraint<T>>, Vec<Symbol>, BTreeMap<Symbol, SymExpr<T>>) {
        let mut cons = Vec::new();
        let mut vars = Vec::new();
        let mut map = BTreeMap::new();
        if let SetShape::Format(f) = &s.shape {
            for v in f.indices.iter().take_while(|v| &v.name != k) {
                let name = fresh.fresh(&format!("{}_o", v.name));
                cons.push(Constraint::between(v.lower.replace(&map), SymExpr::symbol(name.clone()), v.upper.replace(&map)));
                map.insert(v.name.clone(), SymExpr::symbol(name.clone()));
                vars.push(name);
            }
        }
        (cons, vars, map)
    }

    /// Sizes of all sets and whether they sum to `N`. Format sets need
    /// injectivity, proven here or declared in the spec.
    fn size_check(&self) -> (Vec<Check>, BTreeMap<String, String>) {
        let simp = self.simplifier();
        let mut checks = Vec::new();
        let mut sizes = BTreeMap::new();
        let mut total = Poly::zero();
        let mut complete = true;
        for s in self.spec.sets() {
            let mut s = s.clone();
            let mut outside = Vec::new();
            if let SetShape::Format(f) = &s.shape {
                let a = self.check_injective(&s);
                let declared = f.injectivity == Injectivity::Declared;
                let status = if a.is_unsat() || declared { Status::Passed } else { a.status() };
                let detail = if a.is_unsat() || !declared { describe(&a) } else { format!("declared; solver: {}", describe(&a)) };
                checks.push(Check { name: format!("{} injective", s.name), status, detail });
                outside = self.proven_outside(&s, f);
                if a.is_unsat() {
                    if let SetShape::Format(f) = &mut s.shape {
                        f.injectivity = Injectivity::Proven;
                    }
                }
            }
            match size_poly(&s, &simp, &outside) {
                Ok(p) => {
                    sizes.insert(s.name.clone(), p.to_expr().to_string());
                    total += p;
                }
                Err(e) => {
                    complete = false;
                    sizes.insert(s.name.clone(), format!("error: {e}"));
                }
            }
        }
        let n = simp.to_poly(&self.spec.n);
        let diff = &total - &n;
        let (status, detail) = if !complete {
            (Status::Unknown, "some sizes could not be computed".to_string())
        } else if diff.is_zero() {
            (Status::Passed, format!("sum = {}", total.to_expr()))
        } else {
            (Status::Failed, format!("sum - N = {}", diff.to_expr()))
        };
        checks.push(Check { name: "sizes sum to N".into(), status, detail });
        (checks, sizes)
    }

    /// Excluded values that the raw set provably does not contain.
    fn proven_outside(&self, s: &SymbolicSet<T>, f: &FormatSet<T>) -> Vec<SymExpr<T>> {
        let mut out = Vec::new();
        let bare = SymbolicSet::format(&s.name, FormatSet { exclude: Vec::new(), ..f.clone() });
        let x = Symbol::new("x");
        for ex in f.exclude.iter().filter(|e| e.witness.is_none()) {
            let (mut p, mut fresh) = self.problem();
            self.add_member(&mut p, &mut fresh, &bare, &x, "x");
            p.constraints.push(Constraint::eq(SymExpr::symbol(x.clone()), ex.value.clone()));
            let a = self.refute(&p, &[x.clone()], &format!("excl_{}", s.name));
            self.report(&format!("{} excludes {}", s.name, ex.value), &a);
            if a.is_unsat() {
                out.push(ex.value.clone());
            }
        }
        out
    }

    fn pool(&self) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new().num_threads(self.config.jobs).build().expect("thread pool")
    }

    /// Full verification: partition, hints, then every case.
    pub fn verify(&mut self) -> VerificationReport {
        let start = Instant::now();
        let hint_checks = self.check_hints();
        self.verified_hints = Some(
            hint_checks.iter().filter(|(_, c)| c.status == Status::Passed).map(|(h, _)| h.clone()).collect(),
        );
        let hints: Vec<Check> = hint_checks.into_iter().map(|(_, c)| c).collect();
        let (partition, sizes) = self.verify_partition();
        let cases = enumerate_cases(self.spec);
        let results: Vec<CaseResult> =
            self.pool().install(|| cases.par_iter().map(|c| self.verify_case(c)).collect());
        let count = |v: &str| results.iter().filter(|r| r.attempt.verdict == v).count();
        let summary = Summary {
            cases: results.len(),
            unsat: count("unsat"),
            sat: count("sat"),
            inconclusive: results.len() - count("unsat") - count("sat"),
        };
        let verified = partition.iter().all(|c| c.status == Status::Passed) && summary.unsat == summary.cases;
        VerificationReport {
            spec: self.spec.name.clone(),
            n: self.spec.n.to_string(),
            bound: self.simplifier().simplify(&(self.spec.n.clone() + SymExpr::one())).to_string(),
            assumptions: describe_assumptions(self.spec),
            partition,
            hints,
            sizes,
            cases: results,
            summary,
            verified,
            seconds: start.elapsed().as_secs_f64(),
        }
    }
}

fn rung_tag(r: Rung) -> &'static str {
    match r {
        Rung::Direct => "direct",
        Rung::Substituted => "subst",
        Rung::Residue => "residue",
    }
}

fn attempt(v: &str, rung: Option<Rung>, start: Instant, model: Option<BTreeMap<String, String>>, note: Option<String>) -> Attempt {
    Attempt { verdict: v.to_string(), rung, seconds: start.elapsed().as_secs_f64(), model, note }
}

fn render<T: Scalar>(m: &Bindings<T>) -> BTreeMap<String, String> {
    m.iter().filter(|(k, _)| !k.as_str().starts_with("__")).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn describe(a: &Attempt) -> String {
    let mut s = a.verdict.clone();
    if let Some(r) = a.rung {
        s.push_str(&format!(" ({})", rung_tag(r)));
    }
    if let Some(m) = &a.model {
        let kv: Vec<String> = m.iter().map(|(k, v)| format!("{k}={v}")).collect();
        s.push_str(&format!(" at {}", kv.join(", ")));
    }
    if let Some(n) = &a.note {
        s.push_str(&format!(": {n}"));
    }
    s
}

fn describe_assumptions<T: Scalar>(spec: &ColoringSpec<T>) -> Vec<String> {
    let asm = &spec.asm;
    let mut out: Vec<String> = asm.lower_bounds().iter().map(|(s, v)| format!("{s} >= {v}")).collect();
    out.extend(asm.parities().iter().map(|(s, p)| format!("{s} {}", if p.residue() == 1 { "odd" } else { "even" })));
    out.extend(asm.coprime_pairs().iter().map(|(a, b)| format!("gcd({a}, {b}) = 1")));
    out.extend(asm.facts().iter().map(|f| format!("{f} >= 0")));
    out
}

/// Ground-truth check of one instantiation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcreteCheck {
    pub parameters: BTreeMap<String, String>,
    pub equation: String,
    pub n: usize,
    /// Integers of `[1, N]` no set claims.
    pub uncovered: Vec<usize>,
    /// Integers claimed by more than one set.
    pub overlapping: Vec<usize>,
    /// Set elements outside `[1, N]`.
    pub out_of_range: Vec<String>,
    pub monochromatic: Option<Vec<i64>>,
    pub clean: bool,
}

/// A concrete coloring of `[1, n]`, as written by `instantiate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringRecord {
    pub equation: String,
    pub parameters: BTreeMap<String, String>,
    pub classes: Vec<String>,
    /// `colors[t - 1]` indexes `classes`.
    pub colors: Vec<usize>,
}

impl ColoringRecord {
    pub fn n(&self) -> usize {
        self.colors.len()
    }
}

/// Instantiate every set at `env` and test the coloring by brute force.
pub fn check_concrete<T: Scalar>(spec: &ColoringSpec<T>, env: &Bindings<T>) -> Result<(ConcreteCheck, Vec<usize>), SpecError> {
    let eq: LinearEquation = spec.equation.instantiate(env)?;
    let n = spec.n.eval(env)?.to_usize().ok_or_else(|| SpecError::Overflow(spec.n.to_string()))?;
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut overlapping = Vec::new();
    let mut out_of_range = Vec::new();
    for (c, class) in spec.classes.iter().enumerate() {
        for set in &class.members {
            let elems = set.instantiate(env).map_err(|e: SetError| SpecError::Expr { field: set.name.clone(), message: e.to_string() })?;
            for v in elems {
                match v.to_usize().filter(|&t| (1..=n).contains(&t)) {
                    Some(t) if owner[t - 1].is_some() => overlapping.push(t),
                    Some(t) => owner[t - 1] = Some(c),
                    None => out_of_range.push(format!("{v} in {}", set.name)),
                }
            }
        }
    }
    let uncovered: Vec<usize> = (1..=n).filter(|t| owner[t - 1].is_none()).collect();
    let colors: Vec<usize> = owner.iter().map(|c| c.unwrap_or(usize::MAX)).collect();
    let monochromatic = if uncovered.is_empty() { monochromatic_solutions(&colors, &eq).into_iter().next() } else { None };
    let clean = uncovered.is_empty() && overlapping.is_empty() && out_of_range.is_empty() && monochromatic.is_none();
    let check = ConcreteCheck {
        parameters: env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        equation: eq.to_string(),
        n,
        uncovered,
        overlapping,
        out_of_range,
        monochromatic,
        clean,
    };
    Ok((check, colors))
}
