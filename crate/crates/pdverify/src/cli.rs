//! Command-line front end: problem files in, verdict report and certificate out.
//!
//! Exit codes: 0 witness (safe, terminating, valid), 10 counter-witness
//! (unsafe, invalid), 20 unknown or out of budget, 2 bad input.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use thiserror::Error;

use crate::cegar::{self, abstract_error_search, AbstractResult, CegarConfig, CegarVerdict};
use crate::fixpoint::{
    self, fix_choice_of, parse_fix_problem, run_fix, FixChoice, FixConfig, FixError, FixLagrangian, FixPools,
    FixProblem, FixVerdict,
};
use crate::houdini::{conj_inductive, mask_members, pair_of, run_pd_houdini, DualPair, HoudiniConfig, HoudiniVerdict};
use crate::ice::{self, run_ice, IceConfig, IceVerdict};
use crate::lra::{prenex_of, Prenex};
use crate::qlra::{self, run_fk, skeleton_of, FkConfig, FkVerdict, QlraError, SkSide, Skeleton};
use crate::sexp::{parse_all, ParseError, Sexp};
use crate::termination::{
    self, dual_check, run_termination, template_pool, RankCheck, RankWitness, RankingTemplate, TermConfig, TermMethod,
    TermVerdict,
};
use crate::ts::{
    fmt_state, fmt_trace, invariant_check, keyword_map, parse_pool, state_of, system_of, ExplicitTS, InvCheck,
    PredBody, Predicate, System, Witness,
};

pub const EXIT_WITNESS: i32 = 0;
pub const EXIT_COUNTER: i32 = 10;
pub const EXIT_UNKNOWN: i32 = 20;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}:{err}")]
    Parse { path: String, err: ParseError },
    #[error("{0}")]
    Invalid(String),
    #[error("a {cert} certificate does not apply to a {problem} problem")]
    KindMismatch { cert: &'static str, problem: &'static str },
    #[error(transparent)]
    Fix(#[from] FixError),
    #[error(transparent)]
    Qlra(#[from] QlraError),
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn in_file<T>(path: &Path, r: Result<T, ParseError>) -> Result<T, CliError> {
    r.map_err(|err| CliError::Parse { path: path.display().to_string(), err })
}

/// A parsed input file. Termination reuses transition systems.
#[derive(Clone, Debug)]
pub enum Problem {
    System(System),
    Pair(DualPair),
    Qlra(Prenex),
    Fixpoint(FixProblem),
}

impl Problem {
    pub fn kind(&self) -> &'static str {
        match self {
            Problem::System(_) => "system",
            Problem::Pair(_) => "pair",
            Problem::Qlra(_) => "qlra",
            Problem::Fixpoint(_) => "fixpoint",
        }
    }

    /// Dispatch on the first form: `(system …)`, `(pair …)`, `(define …)`/`(query …)`, else a sentence.
    pub fn parse(src: &str) -> Result<Problem, ProblemError> {
        let forms = parse_all(src)?;
        let first = forms.first().ok_or_else(|| ParseError::new(Default::default(), "empty input"))?;
        let single = || {
            if forms.len() > 1 {
                Err(ParseError::new(forms[1].pos(), "unexpected form after the problem"))
            } else {
                Ok(first)
            }
        };
        Ok(match first.head() {
            Some("system") => Problem::System(system_of(single()?)?),
            Some("pair") => Problem::Pair(pair_of(single()?)?),
            Some("define" | "query") => Problem::Fixpoint(parse_fix_problem(src)?),
            _ => Problem::Qlra(prenex_of(single()?)?),
        })
    }

    pub fn load(path: &Path) -> Result<Problem, CliError> {
        Problem::parse(&read(path)?).map_err(|e| match e {
            ProblemError::Parse(err) => CliError::Parse { path: path.display().to_string(), err },
            ProblemError::Fix(FixError::Parse(err)) => CliError::Parse { path: path.display().to_string(), err },
            ProblemError::Fix(e) => CliError::Invalid(format!("{}: {e}", path.display())),
        })
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Fix(#[from] FixError),
}

/// A witness or counter-witness that can be re-checked without solver state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Certificate {
    /// CEGAR: predicates whose abstraction has no error path.
    Abstraction(Vec<Predicate>),
    /// ICE: a safe inductive invariant.
    Invariant(Predicate),
    /// An initial-to-bad path.
    ErrorTrace(Vec<crate::ts::State>),
    /// Houdini: base predicates whose conjunction is a safe inductive invariant.
    Conjunction(Vec<String>),
    /// A disjunctively well-founded set; `domain` grids a symbolic system.
    Ranking { domain: Option<i64>, templates: Vec<RankingTemplate> },
    Skeleton { side: SkSide, skeleton: Skeleton },
    Fix { side: SkSide, pools: FixPools, choice: FixChoice },
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::Abstraction(_) => "abstraction",
            Certificate::Invariant(_) => "invariant",
            Certificate::ErrorTrace(_) => "error-trace",
            Certificate::Conjunction(_) => "conjunction",
            Certificate::Ranking { .. } => "ranking",
            Certificate::Skeleton { side: SkSide::Sat, .. } => "sat-skeleton",
            Certificate::Skeleton { side: SkSide::Unsat, .. } => "unsat-skeleton",
            Certificate::Fix { side: SkSide::Sat, .. } => "fix-valid",
            Certificate::Fix { side: SkSide::Unsat, .. } => "fix-invalid",
        }
    }

    /// The s-expression form; fixpoint choices need the problem for predicate names.
    pub fn render(&self, problem: &Problem) -> String {
        let kind = self.kind();
        match self {
            Certificate::Abstraction(ps) => {
                let items: Vec<String> = ps.iter().map(render_predicate).collect();
                format!("({kind} {})", items.join(" "))
            }
            Certificate::Invariant(p) => format!("({kind} {})", render_predicate(p)),
            Certificate::ErrorTrace(t) => {
                format!("({kind} {})", t.iter().map(fmt_state).collect::<Vec<_>>().join(" "))
            }
            Certificate::Conjunction(names) => format!("({kind}{})", names.iter().map(|n| format!(" {n}")).collect::<String>()),
            Certificate::Ranking { domain, templates } => {
                let d = domain.map(|d| format!(" :domain {d}")).unwrap_or_default();
                let ts: Vec<String> = templates.iter().map(render_template).collect();
                format!("({kind}{d} :templates ({}))", ts.join(" "))
            }
            Certificate::Skeleton { side, skeleton } => format!("({kind} {})", skeleton.render(*side)),
            Certificate::Fix { side, pools, choice } => {
                let Problem::Fixpoint(p) = problem else {
                    return format!("({kind})");
                };
                format!(
                    "({kind} :max-coef {} :max-offset {} :term-depth {} :domain-bound {} :choice {})",
                    pools.max_coef,
                    pools.max_offset,
                    pools.term_depth,
                    pools.domain_bound,
                    choice.render(p, *side)
                )
            }
        }
    }

    pub fn parse(src: &str, problem: &Problem) -> Result<Certificate, CliError> {
        let forms = parse_all(src).map_err(|err| CliError::Parse { path: "certificate".into(), err })?;
        let [e] = forms.as_slice() else {
            return Err(CliError::Invalid("a certificate file holds exactly one form".into()));
        };
        certificate_of(e, problem)
    }
}

fn render_predicate(p: &Predicate) -> String {
    match &p.body {
        PredBody::Symbolic(f) => f.to_string(),
        PredBody::Explicit(set) => {
            let states: String = set.iter().map(|s| format!(" {}", fmt_state(s))).collect();
            format!("(set {}{states})", p.name)
        }
    }
}

fn render_template(t: &RankingTemplate) -> String {
    let cs: Vec<String> = t.coeffs.iter().map(|c| c.to_string()).collect();
    format!("(({}) {})", cs.join(" "), t.offset)
}

fn predicates_of(items: &[Sexp]) -> Result<Vec<Predicate>, ParseError> {
    let body: String = items.iter().map(|p| format!(" {p}")).collect();
    parse_pool(&format!("(pool (0{body}))"))
}

fn int_of(e: &Sexp) -> Result<i64, ParseError> {
    e.expect_atom("integer")?.parse().map_err(|_| ParseError::new(e.pos(), "expected an integer"))
}

fn certificate_of(e: &Sexp, problem: &Problem) -> Result<Certificate, CliError> {
    let perr = |err| CliError::Parse { path: "certificate".into(), err };
    let items = e.expect_list("certificate").map_err(perr)?;
    let args = &items[1..];
    let cert = match e.head() {
        Some("abstraction") => Certificate::Abstraction(predicates_of(args).map_err(perr)?),
        Some("invariant") if args.len() == 1 => {
            Certificate::Invariant(predicates_of(args).map_err(perr)?.remove(0))
        }
        Some("error-trace") => {
            Certificate::ErrorTrace(args.iter().map(state_of).collect::<Result<_, _>>().map_err(perr)?)
        }
        Some("conjunction") => Certificate::Conjunction(
            args.iter().map(|a| a.expect_atom("predicate name").map(str::to_string)).collect::<Result<_, _>>().map_err(perr)?,
        ),
        Some("ranking") => {
            let kw = keyword_map(items).map_err(perr)?;
            let domain = kw.get("domain").map(|d| int_of(d)).transpose().map_err(perr)?;
            let list = kw.get("templates").ok_or_else(|| perr(ParseError::new(e.pos(), "missing :templates")))?;
            let mut templates = Vec::new();
            for t in list.expect_list("templates").map_err(perr)? {
                let pair = t.expect_list("template").map_err(perr)?;
                if pair.len() != 2 {
                    return Err(perr(ParseError::new(t.pos(), "template is ((coefficients) offset)")));
                }
                let cs = pair[0].expect_list("coefficients").map_err(perr)?.iter().map(int_of).collect::<Result<_, _>>();
                templates.push(RankingTemplate::new(cs.map_err(perr)?, int_of(&pair[1]).map_err(perr)?));
            }
            Certificate::Ranking { domain, templates }
        }
        Some(k @ ("sat-skeleton" | "unsat-skeleton")) if args.len() == 1 => {
            let side = if k == "sat-skeleton" { SkSide::Sat } else { SkSide::Unsat };
            Certificate::Skeleton { side, skeleton: skeleton_of(&args[0])? }
        }
        Some(k @ ("fix-valid" | "fix-invalid")) => {
            let Problem::Fixpoint(p) = problem else {
                return Err(CliError::KindMismatch { cert: if k == "fix-valid" { "fix-valid" } else { "fix-invalid" }, problem: problem.kind() });
            };
            let kw = keyword_map(items).map_err(perr)?;
            let num = |k: &str| -> Result<i64, CliError> {
                let v = kw.get(k).ok_or_else(|| perr(ParseError::new(e.pos(), format!("missing :{k}"))))?;
                int_of(v).map_err(perr)
            };
            let pools = FixPools {
                max_coef: num("max-coef")?,
                max_offset: num("max-offset")?,
                term_depth: num("term-depth")? as usize,
                domain_bound: num("domain-bound")?,
            };
            let c = kw.get("choice").ok_or_else(|| perr(ParseError::new(e.pos(), "missing :choice")))?;
            let side = if k == "fix-valid" { SkSide::Sat } else { SkSide::Unsat };
            Certificate::Fix { side, pools, choice: fix_choice_of(c, p)? }
        }
        _ => return Err(perr(ParseError::new(e.pos(), "unknown certificate form"))),
    };
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertCheck {
    Accept,
    Reject(String),
}

impl fmt::Display for CertCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertCheck::Accept => write!(f, "accept"),
            CertCheck::Reject(r) => write!(f, "reject: {r}"),
        }
    }
}

fn verdict(ok: bool, reason: impl FnOnce() -> String) -> CertCheck {
    if ok {
        CertCheck::Accept
    } else {
        CertCheck::Reject(reason())
    }
}

fn explicit(sys: &System, domain: Option<i64>) -> Result<ExplicitTS, CliError> {
    match sys {
        System::Explicit(e) => Ok(e.clone()),
        System::Symbolic(y) => match domain.or(y.domain) {
            Some(d) => Ok(y.to_explicit(d)),
            None => Err(CliError::Invalid("a symbolic system needs :domain for termination".into())),
        },
    }
}

/// Re-run only the witness check for `cert`, from scratch.
pub fn check_certificate(problem: &Problem, cert: &Certificate) -> Result<CertCheck, CliError> {
    let mismatch = || CliError::KindMismatch { cert: cert.kind(), problem: problem.kind() };
    Ok(match (problem, cert) {
        (Problem::System(sys), Certificate::Abstraction(ps)) => match abstract_error_search(sys, ps) {
            AbstractResult::AbstractSafe => CertCheck::Accept,
            AbstractResult::Trace(t) => CertCheck::Reject(format!("abstract error path through {}", fmt_trace(&t.reps))),
        },
        (Problem::System(sys), Certificate::Invariant(p)) => match invariant_check(sys, std::slice::from_ref(p)) {
            Ok(InvCheck::Inductive) => CertCheck::Accept,
            Ok(InvCheck::Violation(k, w)) => {
                let at = match w {
                    Witness::State(s) => fmt_state(&s),
                    Witness::Transition(s, t) => format!("{} -> {}", fmt_state(&s), fmt_state(&t)),
                };
                CertCheck::Reject(format!("{} at {at}", k.name()))
            }
            Err(e) => CertCheck::Reject(e.to_string()),
        },
        (Problem::System(sys), Certificate::ErrorTrace(t)) => {
            verdict(sys.is_error_trace(t), || format!("{} is not an error trace", fmt_trace(t)))
        }
        (Problem::System(sys), Certificate::Ranking { domain, templates }) => {
            let ts = explicit(sys, *domain)?;
            if templates.iter().any(|t| t.coeffs.len() != ts.vars().len()) {
                return Ok(CertCheck::Reject("template dimension differs from the system".into()));
            }
            match dual_check(&ts, RankWitness::Dwf(templates)) {
                RankCheck::Pass => CertCheck::Accept,
                RankCheck::Counter(c) => CertCheck::Reject(format!("not well-founded: {c:?}")),
            }
        }
        (Problem::Pair(pair), Certificate::Conjunction(names)) => {
            let mut idx = Vec::new();
            for n in names {
                match pair.base.iter().position(|b| b == n) {
                    Some(i) => idx.push(i),
                    None => return Ok(CertCheck::Reject(format!("unknown predicate {n}"))),
                }
            }
            let ok = conj_inductive(&pair.t, &idx, |s, i| pair.sat(s, 1 << i), true);
            verdict(ok, || "the conjunction is not a safe inductive invariant".into())
        }
        (Problem::Qlra(phi), Certificate::Skeleton { side, skeleton }) => {
            verdict(qlra::certify(phi, skeleton, *side)?, || "the projection is not valid".into())
        }
        (Problem::Fixpoint(p), Certificate::Fix { side, pools, choice }) => {
            let cfg = FixConfig { pools: pools.clone(), ..FixConfig::default() };
            let l = FixLagrangian::new(p, &cfg);
            let ok = match side {
                SkSide::Sat => l.certify_valid(choice),
                SkSide::Unsat => l.certify_invalid(choice),
            };
            match ok {
                Ok(ok) => verdict(ok, || "the largest opposing pool candidate wins".into()),
                Err(e) => CertCheck::Reject(e.to_string()),
            }
        }
        _ => return Err(mismatch()),
    })
}

#[derive(Parser, Debug)]
#[command(name = "pdverify", version, about = "Primal-dual verification of safety, termination and quantified formulas")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Prove or refute a property of a transition system or induction-dual pair.
    Verify {
        kind: VerifyKind,
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Decide a sentence or a fixpoint problem.
    Solve {
        kind: SolveKind,
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Termination by ranking-function ICE learning.
    TermIce {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Termination by disjunctive well-foundedness refinement.
    TermCegar {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Primal-dual Houdini on an induction-dual pair.
    PdHoudini {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Fixpoint-logic validity.
    Fixpoint {
        input: PathBuf,
        #[command(flatten)]
        opts: Opts,
    },
    /// Re-check a certificate against a problem file.
    Check { problem: PathBuf, certificate: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VerifyKind {
    Safety,
    Termination,
    Houdini,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SolveKind {
    Qlra,
    Fixpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Cegar,
    Ice,
    TermIce,
    TermCegar,
    PdHoudini,
}

#[derive(Args, Debug, Clone)]
struct Opts {
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// Predicate pool file for safety.
    #[arg(long)]
    pool: Option<PathBuf>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long, env = "PDVERIFY_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the JSON iteration trace here.
    #[arg(long, value_name = "PATH")]
    emit_trace: Option<PathBuf>,
    /// Write the certificate here.
    #[arg(long, value_name = "PATH")]
    certificate: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    max_coef: i64,
    #[arg(long, default_value_t = 1)]
    max_offset: i64,
    #[arg(long, default_value_t = 1)]
    term_depth: usize,
    #[arg(long, default_value_t = 16)]
    domain_bound: i64,
}

/// What a solver run produced, before printing.
struct Outcome {
    code: i32,
    label: &'static str,
    detail: String,
    iterations: usize,
    trace: Value,
    certificate: Option<Certificate>,
}

fn system_problem(path: &Path) -> Result<(Problem, System), CliError> {
    match Problem::load(path)? {
        Problem::System(s) => Ok((Problem::System(s.clone()), s)),
        p => Err(CliError::Invalid(format!("{}: expected a (system ...), found a {} problem", path.display(), p.kind()))),
    }
}

fn safety(input: &Path, method: Method, o: &Opts) -> Result<(Problem, Outcome), CliError> {
    let (problem, sys) = system_problem(input)?;
    let pool_path = o.pool.as_ref().ok_or_else(|| CliError::Invalid("safety needs --pool".into()))?;
    let pool = in_file(pool_path, parse_pool(&read(pool_path)?))?;
    let out = match method {
        Method::Cegar => {
            let mut cfg = CegarConfig { seed: o.seed, ..CegarConfig::default() };
            if let Some(n) = o.max_iters {
                cfg.max_iterations = n;
            }
            let r = cegar::run_cegar(&sys, &pool, &cfg);
            let detail = cegar::describe(&r.verdict);
            let (code, label, certificate) = match r.verdict {
                CegarVerdict::Safe(a) => (EXIT_WITNESS, "safe", Some(Certificate::Abstraction(a))),
                CegarVerdict::Unsafe(t) => (EXIT_COUNTER, "unsafe", Some(Certificate::ErrorTrace(t))),
                CegarVerdict::Unknown(_) => (EXIT_UNKNOWN, "unknown", None),
                CegarVerdict::Budget => (EXIT_UNKNOWN, "budget", None),
            };
            Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }
        }
        Method::Ice => {
            let mut cfg = IceConfig { seed: o.seed, ..IceConfig::default() };
            if let Some(n) = o.max_iters {
                cfg.max_iterations = n;
            }
            let r = run_ice(&sys, &pool, &cfg);
            let (code, label, detail, certificate) = match r.verdict {
                IceVerdict::Safe(p) => (EXIT_WITNESS, "safe", format!("safe with invariant {}", p.name), Some(Certificate::Invariant(p))),
                IceVerdict::Unknown(s) => {
                    let detail = format!("unknown: no pool predicate fits the sample {}", ice::render_sample(&s));
                    (EXIT_UNKNOWN, "unknown", detail, None)
                }
                IceVerdict::Budget => (EXIT_UNKNOWN, "budget", "budget exhausted".into(), None),
            };
            Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }
        }
        m => return Err(CliError::Invalid(format!("method {m:?} does not apply to safety"))),
    };
    Ok((problem, out))
}

fn termination_run(input: &Path, method: TermMethod, o: &Opts) -> Result<(Problem, Outcome), CliError> {
    let (problem, sys) = system_problem(input)?;
    let domain = match &sys {
        System::Symbolic(y) => Some(y.domain.unwrap_or(o.domain_bound)),
        System::Explicit(_) => None,
    };
    let ts = explicit(&sys, domain)?;
    let pool = template_pool(ts.vars().len(), o.max_coef, o.max_offset);
    let mut cfg = TermConfig { seed: o.seed, ..TermConfig::default() };
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    let r = run_termination(&ts, &pool, method, &cfg);
    let detail = termination::describe(&r.verdict, ts.vars());
    let (code, label, certificate) = match r.verdict {
        TermVerdict::Terminating(templates) => (EXIT_WITNESS, "terminating", Some(Certificate::Ranking { domain, templates })),
        TermVerdict::Unknown(_) => (EXIT_UNKNOWN, "unknown", None),
        TermVerdict::Budget => (EXIT_UNKNOWN, "budget", None),
    };
    Ok((problem, Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }))
}

fn houdini_run(input: &Path, o: &Opts) -> Result<(Problem, Outcome), CliError> {
    let problem = Problem::load(input)?;
    let Problem::Pair(pair) = &problem else {
        return Err(CliError::Invalid(format!("{}: expected a (pair ...), found a {} problem", input.display(), problem.kind())));
    };
    let mut cfg = HoudiniConfig { seed: o.seed, ..HoudiniConfig::default() };
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    let r = run_pd_houdini(pair, &cfg).map_err(|e| CliError::Invalid(e.to_string()))?;
    let (code, label, detail, certificate) = match &r.verdict {
        HoudiniVerdict::Safe { predicates, invariant } => {
            let names = mask_members(*invariant).map(|i| pair.base[i].clone()).collect();
            let detail = format!("safe; predicates {}, invariant {}", pair.fmt_mask(*predicates), pair.fmt_mask(*invariant));
            (EXIT_WITNESS, "safe", detail, Some(Certificate::Conjunction(names)))
        }
        HoudiniVerdict::Unknown(x) => {
            let states: Vec<String> = x.iter().map(fmt_state).collect();
            (EXIT_UNKNOWN, "unknown", format!("unknown: good states {{{}}} admit no safe conjunction", states.join(", ")), None)
        }
        HoudiniVerdict::Budget => (EXIT_UNKNOWN, "budget", "budget exhausted".into(), None),
    };
    Ok((problem, Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }))
}

fn qlra_run(input: &Path, o: &Opts) -> Result<(Problem, Outcome), CliError> {
    let problem = Problem::load(input)?;
    let Problem::Qlra(phi) = &problem else {
        return Err(CliError::Invalid(format!("{}: expected a sentence, found a {} problem", input.display(), problem.kind())));
    };
    let mut cfg = FkConfig { seed: o.seed, ..FkConfig::default() };
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    let r = run_fk(phi, &cfg)?;
    let detail = qlra::describe(&r.verdict);
    let (code, label, certificate) = match r.verdict {
        FkVerdict::Valid(sk) => (EXIT_WITNESS, "valid", Some(Certificate::Skeleton { side: SkSide::Sat, skeleton: sk })),
        FkVerdict::Invalid(sk) => (EXIT_COUNTER, "invalid", Some(Certificate::Skeleton { side: SkSide::Unsat, skeleton: sk })),
        FkVerdict::Budget => (EXIT_UNKNOWN, "budget", None),
    };
    Ok((problem, Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }))
}

fn fixpoint_run(input: &Path, o: &Opts) -> Result<(Problem, Outcome), CliError> {
    let problem = Problem::load(input)?;
    let Problem::Fixpoint(p) = &problem else {
        return Err(CliError::Invalid(format!("{}: expected a fixpoint problem, found a {} problem", input.display(), problem.kind())));
    };
    let pools = FixPools { max_coef: o.max_coef, max_offset: o.max_offset, term_depth: o.term_depth, domain_bound: o.domain_bound };
    let mut cfg = FixConfig { seed: o.seed, pools: pools.clone(), ..FixConfig::default() };
    if let Some(n) = o.max_iters {
        cfg.max_iterations = n;
    }
    let r = run_fix(p, &cfg)?;
    let detail = fixpoint::describe(p, &r.verdict);
    let (code, label, certificate) = match r.verdict {
        FixVerdict::Valid(y) => (EXIT_WITNESS, "valid", Some(Certificate::Fix { side: SkSide::Sat, pools, choice: y })),
        FixVerdict::Invalid(x) => (EXIT_COUNTER, "invalid", Some(Certificate::Fix { side: SkSide::Unsat, pools, choice: x })),
        FixVerdict::Budget => (EXIT_UNKNOWN, "budget", None),
    };
    Ok((problem, Outcome { code, label, detail, iterations: r.iterations, trace: r.trace, certificate }))
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
}

fn report(problem: &Problem, res: Outcome, o: &Opts, out: &mut dyn Write) -> Result<i32, CliError> {
    let cert = res.certificate.as_ref().map(|c| c.render(problem));
    let _ = writeln!(out, "verdict: {}", res.label);
    let _ = writeln!(out, "detail: {}", res.detail);
    let _ = writeln!(out, "iterations: {}", res.iterations);
    if let Some(c) = &cert {
        let _ = writeln!(out, "certificate: {c}");
    }
    if let (Some(path), Some(c)) = (&o.certificate, &cert) {
        write_file(path, &format!("{c}\n"))?;
        let _ = writeln!(out, "certificate file: {}", path.display());
    }
    if let Some(path) = &o.emit_trace {
        let json = serde_json::to_string_pretty(&res.trace).expect("traces are plain JSON");
        write_file(path, &json)?;
        let _ = writeln!(out, "trace file: {}", path.display());
    }
    Ok(res.code)
}

fn dispatch(cmd: Cmd, out: &mut dyn Write) -> Result<i32, CliError> {
    let (opts, run) = match cmd {
        Cmd::Check { problem, certificate } => {
            let p = Problem::load(&problem)?;
            let c = Certificate::parse(&read(&certificate)?, &p)?;
            let r = check_certificate(&p, &c)?;
            let _ = writeln!(out, "{} certificate: {r}", c.kind());
            return Ok(if r == CertCheck::Accept { EXIT_WITNESS } else { EXIT_COUNTER });
        }
        Cmd::Verify { kind, input, opts } => {
            let run = match (kind, opts.method) {
                (VerifyKind::Safety, None) => safety(&input, Method::Cegar, &opts),
                (VerifyKind::Safety, Some(m)) => safety(&input, m, &opts),
                (VerifyKind::Termination, None | Some(Method::TermIce | Method::Ice)) => {
                    termination_run(&input, TermMethod::Ice, &opts)
                }
                (VerifyKind::Termination, Some(Method::TermCegar | Method::Cegar)) => {
                    termination_run(&input, TermMethod::Cegar, &opts)
                }
                (VerifyKind::Houdini, None | Some(Method::PdHoudini)) => houdini_run(&input, &opts),
                (k, Some(m)) => return Err(CliError::Invalid(format!("method {m:?} does not apply to {k:?}"))),
            };
            (opts, run)
        }
        Cmd::Solve { kind: SolveKind::Qlra, input, opts } => {
            let run = qlra_run(&input, &opts);
            (opts, run)
        }
        Cmd::Solve { kind: SolveKind::Fixpoint, input, opts } | Cmd::Fixpoint { input, opts } => {
            let run = fixpoint_run(&input, &opts);
            (opts, run)
        }
        Cmd::TermIce { input, opts } => {
            let run = termination_run(&input, TermMethod::Ice, &opts);
            (opts, run)
        }
        Cmd::TermCegar { input, opts } => {
            let run = termination_run(&input, TermMethod::Cegar, &opts);
            (opts, run)
        }
        Cmd::PdHoudini { input, opts } => {
            let run = houdini_run(&input, &opts);
            (opts, run)
        }
    };
    let (problem, res) = run?;
    report(&problem, res, &opts, out)
}

/// Parse `argv` (program name first), run, print the report, return the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_WITNESS };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.cmd, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INPUT
        }
    }
}
