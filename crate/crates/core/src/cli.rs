//! Command-line interface.
//!
//! Every invocation prints one JSON report line on stdout. Diagnostics go to
//! stderr. Exit codes: 0 success, 1 logical rejection, 2 input error,
//! 3 budget exceeded.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::paths::dependents;
use crate::analysis::{drrs, outer_clause, outer_clause_univ, res_paths, unit_propagate, Outcome, PropagationTrace};
use crate::formula::{gen_duality, gen_select, parse_instance, serialize, Clause, Formula, Lit, Var};
use crate::kernel::oracle::{dqbf_truth_with_budget, DEFAULT_BUDGET};
use crate::kernel::{check_proof_with_mode, parse_proof, serialize_proof, CheckMode, Verdict};
use crate::translate::{
    expand_prove, parse_exp_proof, parse_fork_proof, parse_qrat_proof, translate_dqrat, translate_expres,
    translate_fork, translate_idrc, translate_qrat, TranslateError, Translation,
};

#[derive(Parser, Debug)]
#[command(name = "dqbf-kernel", version, about = "DQBF refutation kernel: check, translate, analyze")]
struct Cli {
    /// Worker threads for commands that take several files.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// `truth`: Skolem table bits. `translate`: maximum kernel steps.
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check kernel proofs against an instance.
    Check {
        instance: PathBuf,
        #[arg(required = true)]
        proofs: Vec<PathBuf>,
        /// Accept proofs that do not end in the empty clause.
        #[arg(long)]
        derivation: bool,
    },
    /// Translate a proof into a kernel proof and re-check it.
    Translate {
        #[arg(long, value_enum)]
        from: Format,
        instance: PathBuf,
        /// Not used with `--from expand`.
        proof: Option<PathBuf>,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
    },
    /// Clause-set analyses.
    Analyze {
        #[command(subcommand)]
        what: Analysis,
    },
    /// Decide truth with the brute-force oracle.
    Truth {
        #[arg(required = true)]
        instances: Vec<PathBuf>,
    },
    /// Build a formula family member from an inner QBF.
    Gen {
        #[arg(value_enum)]
        family: Family,
        inner: PathBuf,
        #[arg(short = 'o')]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Analysis {
    /// Outer clauses, for one (clause, literal) pair or all of them.
    Outer {
        instance: PathBuf,
        #[arg(long)]
        clause: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        lit: Option<i64>,
    },
    /// Resolution paths from seed clauses over the dependents of a universal
    /// or over an explicit variable set.
    Paths {
        instance: PathBuf,
        #[arg(long = "seed", required = true)]
        seeds: Vec<usize>,
        #[arg(long, conflicts_with = "vars")]
        universal: Option<u32>,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<u32>,
    },
    /// Reflexive resolution-path dependency pairs.
    Drrs { instance: PathBuf },
    /// Unit propagation under assumptions.
    Up {
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        assume: Vec<i64>,
        /// Clause indices to leave out.
        #[arg(long)]
        skip: Vec<usize>,
    },
    /// The side conditions for removing universal `lit` from a clause.
    Reduce {
        instance: PathBuf,
        #[arg(long)]
        clause: usize,
        #[arg(long, allow_hyphen_values = true)]
        lit: i64,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Expres,
    Idrc,
    Fork,
    Qrat,
    Dqrat,
    /// Build an expansion refutation with the internal prover first.
    Expand,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Family {
    Select,
    Duality,
}

#[derive(Serialize)]
struct InputHash {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunReport {
    command: &'static str,
    inputs: Vec<InputHash>,
    result: Value,
    steps: Option<usize>,
    wall_ms: u64,
}

#[derive(Debug)]
enum Failure {
    Rejected(String),
    Input(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Rejected(_) => 1,
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Rejected(m) | Failure::Input(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<TranslateError> for Failure {
    fn from(e: TranslateError) -> Failure {
        match e {
            TranslateError::Parse { .. } => Failure::Input(e.to_string()),
            TranslateError::Budget(_) => Failure::Budget(e.to_string()),
            _ => Failure::Rejected(e.to_string()),
        }
    }
}

/// What a command produced: the report payload, a step count, and the exit
/// code (a command over several files may succeed with a nonzero code).
struct Done {
    result: Value,
    steps: Option<usize>,
    code: i32,
}

impl Done {
    fn ok(result: Value) -> Done {
        Done {
            result,
            steps: None,
            code: 0,
        }
    }
}

#[derive(Default)]
struct Inputs {
    hashes: Vec<InputHash>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        self.hashes.push(InputHash {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
        Ok(text)
    }

    fn formula(&mut self, path: &Path) -> Result<Formula, Failure> {
        let text = self.read(path)?;
        parse_instance(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
    }
}

fn dimacs(c: &Clause) -> Vec<i64> {
    c.iter().map(Lit::to_dimacs).collect()
}

fn trace_json(t: &PropagationTrace) -> Value {
    let forced: Vec<Value> = t
        .forced
        .iter()
        .map(|(l, i)| json!({"lit": l.to_dimacs(), "clause": i}))
        .collect();
    let outcome = match &t.outcome {
        Outcome::Conflict(c) => json!({"conflict": c}),
        Outcome::Fixpoint(ls) => json!({"fixpoint": ls.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>()}),
    };
    json!({"forced": forced, "outcome": outcome})
}

fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Accepted => json!({"verdict": "accepted"}),
        Verdict::Rejected { step, reason } => json!({"verdict": "rejected", "step": step, "reason": reason}),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::Input(format!("thread pool: {e}")))
}

fn write_out(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn clause_at(f: &Formula, i: usize) -> Result<&Clause, Failure> {
    f.matrix
        .get(i)
        .ok_or_else(|| Failure::Input(format!("clause index {i} out of range")))
}

fn check(
    inputs: &mut Inputs,
    err: &mut dyn Write,
    jobs: usize,
    instance: &Path,
    proofs: &[PathBuf],
    mode: CheckMode,
) -> Result<Done, Failure> {
    let f = inputs.formula(instance)?;
    let texts = proofs
        .iter()
        .map(|p| inputs.read(p))
        .collect::<Result<Vec<_>, _>>()?;
    let parsed = texts
        .iter()
        .zip(proofs)
        .map(|(t, p)| parse_proof(t).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((_, p)) = parsed.iter().zip(proofs).find(|(k, _)| !k.matches(&f)) {
        return Err(Failure::Input(format!("{}: proof header names a different formula", p.display())));
    }
    let verdicts: Vec<Verdict> =
        pool(jobs)?.install(|| parsed.par_iter().map(|p| check_proof_with_mode(&f, p, mode)).collect());
    let mut code = 0;
    for (v, p) in verdicts.iter().zip(proofs) {
        if let Verdict::Rejected { step, reason } = v {
            let _ = writeln!(err, "{}: rejected at step {step}: {reason}", p.display());
            code = 1;
        }
    }
    Ok(Done {
        result: json!({"results": verdicts.iter().map(verdict_json).collect::<Vec<_>>()}),
        steps: Some(parsed.iter().map(|p| p.steps.len()).sum()),
        code,
    })
}

fn translate(
    inputs: &mut Inputs,
    err: &mut dyn Write,
    budget: Option<u64>,
    from: Format,
    instance: &Path,
    proof: Option<&Path>,
    out: Option<&Path>,
) -> Result<Done, Failure> {
    let f = inputs.formula(instance)?;
    let mut text = || match proof {
        Some(p) => inputs.read(p),
        None => Err(Failure::Input(format!("--from {from:?} needs a proof file").to_lowercase())),
    };
    let t: Translation = match from {
        Format::Expres => translate_expres(&f, &parse_exp_proof(&text()?)?)?,
        Format::Idrc => translate_idrc(&f, &parse_exp_proof(&text()?)?)?,
        Format::Fork => translate_fork(&f, &parse_fork_proof(&text()?)?)?,
        Format::Qrat => translate_qrat(&f, &parse_qrat_proof(&text()?)?)?,
        Format::Dqrat => translate_dqrat(&f, &parse_qrat_proof(&text()?)?)?,
        Format::Expand => translate_expres(&f, &expand_prove(&f)?)?,
    };
    let steps = t.proof.steps.len();
    if let Some(b) = budget {
        if steps as u64 > b {
            return Err(Failure::Budget(format!("translation has {steps} steps, budget is {b}")));
        }
    }
    let mode = if t.refutation {
        CheckMode::Refutation
    } else {
        CheckMode::Derivation
    };
    let verdict = check_proof_with_mode(&f, &t.proof, mode);
    let summary = format!(
        "steps={steps} exts={} checked={}",
        t.proof.ext_count(),
        if verdict.is_accepted() { "yes" } else { "no" }
    );
    let _ = writeln!(err, "{summary}");
    if let Verdict::Rejected { step, reason } = &verdict {
        return Err(Failure::Rejected(format!(
            "translated proof rejected at step {step}: {reason}; nothing written"
        )));
    }
    let kernel = serialize_proof(&t.proof);
    let mut result = json!({
        "summary": summary,
        "refutation": t.refutation,
        "exts": t.proof.ext_count(),
        "checked": verdict_json(&verdict),
    });
    match out {
        Some(o) => write_out(o, &kernel)?,
        None => result["proof"] = Value::String(kernel),
    }
    Ok(Done {
        result,
        steps: Some(steps),
        code: 0,
    })
}

fn analyze(inputs: &mut Inputs, what: &Analysis) -> Result<Done, Failure> {
    match what {
        Analysis::Outer { instance, clause, lit } => {
            let f = inputs.formula(instance)?;
            let mut rows = Vec::new();
            for (i, c) in f.matrix.iter().enumerate() {
                if clause.is_some_and(|k| k != i) {
                    continue;
                }
                for l in c.iter() {
                    if lit.is_some_and(|k| k != l.to_dimacs()) {
                        continue;
                    }
                    rows.push(json!({
                        "clause": i,
                        "lit": l.to_dimacs(),
                        "outer": dimacs(&outer_clause(&f.prefix, c, l)),
                    }));
                }
            }
            if rows.is_empty() {
                return Err(Failure::Input("no matching (clause, literal) pair".into()));
            }
            Ok(Done::ok(json!({"outer": rows})))
        }
        Analysis::Paths {
            instance,
            seeds,
            universal,
            vars,
        } => {
            let f = inputs.formula(instance)?;
            for &i in seeds {
                clause_at(&f, i)?;
            }
            let s: BTreeSet<Var> = match universal {
                Some(u) if f.prefix.is_universal(Var(*u)) => dependents(&f.prefix, Var(*u)),
                Some(u) => return Err(Failure::Input(format!("{u} is not a universal"))),
                None => vars.iter().map(|&v| Var(v)).collect(),
            };
            let r = res_paths(&f.matrix, &seeds.iter().copied().collect(), &s);
            Ok(Done::ok(json!({
                "s": s.iter().map(|v| v.id()).collect::<Vec<_>>(),
                "pathc": r.pathc,
                "pathl": r.pathl.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>(),
            })))
        }
        Analysis::Drrs { instance } => {
            let f = inputs.formula(instance)?;
            let pairs: Vec<[u32; 2]> = drrs(&f).iter().map(|(u, x)| [u.id(), x.id()]).collect();
            Ok(Done::ok(json!({"drrs": pairs})))
        }
        Analysis::Up { instance, assume, skip } => {
            let f = inputs.formula(instance)?;
            if assume.contains(&0) {
                return Err(Failure::Input("0 is not a literal".into()));
            }
            let kept: Vec<usize> = (0..f.matrix.len()).filter(|i| !skip.contains(i)).collect();
            let clauses: Vec<Clause> = kept.iter().map(|&i| f.matrix[i].clone()).collect();
            let assume: Vec<Lit> = assume.iter().map(|&n| Lit::from_dimacs(n)).collect();
            let mut t = unit_propagate(&clauses, &assume);
            for (_, i) in t.forced.iter_mut() {
                *i = kept[*i];
            }
            if let Outcome::Conflict(Some(i)) = &mut t.outcome {
                *i = kept[*i];
            }
            Ok(Done::ok(json!({"trace": trace_json(&t)})))
        }
        Analysis::Reduce { instance, clause, lit } => {
            let f = inputs.formula(instance)?;
            let seed = clause_at(&f, *clause)?;
            let r = Lit::from_dimacs(*lit);
            if *lit == 0 || !seed.contains(r) || !f.prefix.is_universal(r.var()) {
                return Err(Failure::Input(format!("{lit} is not a universal literal of clause {clause}")));
            }
            let c = seed.without(r);
            let s = dependents(&f.prefix, r.var());
            let paths = res_paths(&f.matrix, &BTreeSet::from([*clause]), &s);
            let kept: Vec<usize> = (0..f.matrix.len()).filter(|i| i != clause).collect();
            let phi: Vec<Clause> = kept.iter().map(|&i| f.matrix[i].clone()).collect();
            let mut checks = Vec::new();
            let mut sound = true;
            for &j in &paths.pathc {
                if j == *clause || !f.matrix[j].contains(!r) {
                    continue;
                }
                let o = outer_clause_univ(&f.prefix, &f.matrix[j], r);
                let assume: Vec<Lit> = c.iter().chain(o.iter()).map(|l| !l).collect();
                let mut t = unit_propagate(&phi, &assume);
                for (_, i) in t.forced.iter_mut() {
                    *i = kept[*i];
                }
                if let Outcome::Conflict(Some(i)) = &mut t.outcome {
                    *i = kept[*i];
                }
                sound &= t.is_conflict();
                checks.push(json!({"clause": j, "outer": dimacs(&o), "trace": trace_json(&t)}));
            }
            Ok(Done {
                result: json!({
                    "chi0": paths.pathc,
                    "pathl": paths.pathl.iter().map(|l| l.to_dimacs()).collect::<Vec<_>>(),
                    "checks": checks,
                    "certifiable": sound,
                }),
                steps: None,
                code: if sound { 0 } else { 1 },
            })
        }
    }
}

fn truth(inputs: &mut Inputs, err: &mut dyn Write, jobs: usize, budget: Option<u64>, paths: &[PathBuf]) -> Result<Done, Failure> {
    let fs = paths
        .iter()
        .map(|p| inputs.formula(p))
        .collect::<Result<Vec<_>, _>>()?;
    let budget = budget.unwrap_or(DEFAULT_BUDGET);
    let answers: Vec<_> =
        pool(jobs)?.install(|| fs.par_iter().map(|f| dqbf_truth_with_budget(f, budget)).collect());
    let mut code = 0;
    let mut results = Vec::new();
    for (a, p) in answers.iter().zip(paths) {
        match a {
            Ok(b) => results.push(json!(if *b { "true" } else { "false" })),
            Err(e) => {
                let _ = writeln!(err, "{}: {e}", p.display());
                results.push(json!({"error": e.to_string()}));
                code = 3;
            }
        }
    }
    Ok(Done {
        result: json!({"results": results}),
        steps: None,
        code,
    })
}

fn gen(inputs: &mut Inputs, family: Family, inner: &Path, out: Option<&Path>) -> Result<Done, Failure> {
    let f = inputs.formula(inner)?;
    let g = match family {
        Family::Select => gen_select(&f),
        Family::Duality => gen_duality(&f),
    }
    .map_err(|e| Failure::Input(e.to_string()))?;
    let text = serialize(&g);
    let mut result = json!({
        "vars": g.prefix.len(),
        "clauses": g.matrix.len(),
    });
    match out {
        Some(o) => write_out(o, &text)?,
        None => result["formula"] = Value::String(text),
    }
    Ok(Done::ok(result))
}

fn name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Translate { .. } => "translate",
        Command::Analyze { what } => match what {
            Analysis::Outer { .. } => "analyze outer",
            Analysis::Paths { .. } => "analyze paths",
            Analysis::Drrs { .. } => "analyze drrs",
            Analysis::Up { .. } => "analyze up",
            Analysis::Reduce { .. } => "analyze reduce",
        },
        Command::Truth { .. } => "truth",
        Command::Gen { .. } => "gen",
    }
}

/// Runs one invocation, writing the report to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let done = match &cli.command {
        Command::Check {
            instance,
            proofs,
            derivation,
        } => {
            let mode = if *derivation {
                CheckMode::Derivation
            } else {
                CheckMode::Refutation
            };
            check(&mut inputs, err, cli.jobs, instance, proofs, mode)
        }
        Command::Translate {
            from,
            instance,
            proof,
            out,
        } => translate(&mut inputs, err, cli.budget, *from, instance, proof.as_deref(), out.as_deref()),
        Command::Analyze { what } => analyze(&mut inputs, what),
        Command::Truth { instances } => truth(&mut inputs, err, cli.jobs, cli.budget, instances),
        Command::Gen { family, inner, out } => gen(&mut inputs, *family, inner, out.as_deref()),
    };
    let done = done.unwrap_or_else(|f| {
        let _ = writeln!(err, "error: {}", f.message());
        Done {
            result: json!({"error": f.message()}),
            steps: None,
            code: f.code(),
        }
    });
    let report = RunReport {
        command: name(&cli.command),
        inputs: inputs.hashes,
        result: done.result,
        steps: done.steps,
        wall_ms: start.elapsed().as_millis() as u64,
    };
    let _ = writeln!(out, "{}", serde_json::to_string(&report).expect("report serializes"));
    done.code
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    const EUR: &str = "p cnf 5 7\ne 1 0\na 2 0\ne 3 4 5 0\n2 4 0\n1 -2 3 -4 0\n-3 4 5 0\n1 -5 0\n1 3 4 0\n-3 -4 0\n-1 -2 5 0\n";

    fn call(args: &[&str]) -> (i32, Value, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("dqbf-kernel").chain(args.iter().copied()), &mut out, &mut err);
        let out = String::from_utf8(out).unwrap();
        let report = serde_json::from_str(out.trim()).unwrap_or(Value::Null);
        (code, report, String::from_utf8(err).unwrap())
    }

    fn file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let (code, report, _) = call(&["truth", "/nonexistent/x.qdimacs"]);
        assert_eq!(code, 2);
        assert_eq!(report["command"], "truth");
    }

    #[test]
    fn truth_of_empty_matrix() {
        let dir = tempfile::tempdir().unwrap();
        let f = file(&dir, "t.qdimacs", "p cnf 2 0\na 1 0\ne 2 0\n");
        let (code, report, _) = call(&["truth", &f]);
        assert_eq!(code, 0);
        assert_eq!(report["result"]["results"][0], "true");
        assert_eq!(report["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
    }

    #[test]
    fn truth_over_budget() {
        let dir = tempfile::tempdir().unwrap();
        let f = file(&dir, "t.qdimacs", "p cnf 4 1\na 1 2 3 0\ne 4 0\n1 4 0\n");
        let (code, ..) = call(&["--budget", "2", "truth", &f]);
        assert_eq!(code, 3);
    }

    #[test]
    fn dangling_id_is_rejected_with_step() {
        let dir = tempfile::tempdir().unwrap();
        let f = file(&dir, "f.qdimacs", EUR);
        let (code, report, err) = call(&["check", &f, &file(&dir, "k.proof", "a 0 0\nr 0 9 4 0\n")]);
        assert_eq!(code, 1, "{err}");
        assert_eq!(report["result"]["results"][0]["step"], 1);
        assert!(err.contains("step 1"));
    }

    #[test]
    fn drrs_report() {
        let dir = tempfile::tempdir().unwrap();
        let f = file(&dir, "f.qdimacs", EUR);
        let (code, report, _) = call(&["analyze", "drrs", &f]);
        assert_eq!(code, 0);
        assert_eq!(report["result"]["drrs"], json!([[2, 3], [2, 4]]));
    }

    #[test]
    fn reports_are_deterministic_modulo_time() {
        let dir = tempfile::tempdir().unwrap();
        let f = file(&dir, "f.qdimacs", EUR);
        let strip = |mut v: Value| {
            v["wall_ms"] = Value::Null;
            v
        };
        let a = strip(call(&["analyze", "reduce", &f, "--clause", "0", "--lit", "2"]).1);
        let b = strip(call(&["analyze", "reduce", &f, "--clause", "0", "--lit", "2"]).1);
        assert_eq!(a, b);
        assert_eq!(a["result"]["certifiable"], true);
    }
}
