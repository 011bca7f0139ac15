use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use subcircuit::cost::{simulation_cost, table_benchmark, CostConfig, Decomposition, ErrorModel, TableConfig};
use subcircuit::dense::MAX_DENSE_QUBITS;
use subcircuit::encoding::{encode, lambda_global, Encoding, FermiHubbardSpec};
use subcircuit::noise::{
    feasible_time_table, max_q_search, run_monte_carlo, FeasibleConfig, NoiseModel, NoiseSchedule, SyndromeMap,
};
use subcircuit::sim::{bound_inputs, numeric_epsilon, SectorProblem};
use subcircuit::synthesis::{synthesize_term, Strategy};
use subcircuit::trotter::bounds::bound;
use subcircuit::trotter::{invert_for_delta, tightest_bound, BoundFamily, BoundQuery};

mod config;

use config::{ExperimentConfig, OrderSetting, SpecArgs};

const SCHEMA: &str = "# schema=1";
const VERIFY_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "subcircuit", version, about = "Trotter cost, synthesis and noise pipelines for encoded Fermi-Hubbard lattices")]
struct Cli {
    /// TOML experiment config; flags override its keys
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Emit JSON instead of CSV / text
    #[arg(long, global = true)]
    json: bool,

    /// Print the resolved plan and stop
    #[arg(long, global = true)]
    dry_run: bool,

    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write results here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compile exp(i delta c P) into pulses and verify it
    Synth {
        #[arg(long)]
        pauli: String,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        coefficient: f64,
        /// standard | subcircuit | auto
        #[arg(long, default_value = "auto")]
        strategy: Strategy,
    },
    /// Sweep analytic Trotter error bounds over step sizes
    Bounds {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        encoding: Option<Encoding>,
        /// Order, or a comma list
        #[arg(long, value_delimiter = ',')]
        p: Vec<usize>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        /// Bound family name or `all`
        #[arg(long, default_value = "all")]
        family: String,
        /// Override the layer norm bound
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Total cost of simulating time T at a target error
    Cost {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        encoding: Option<Encoding>,
        /// standard | subcircuit
        #[arg(long)]
        strategy: Option<Decomposition>,
        /// per_gate | per_time
        #[arg(long)]
        error_model: Option<ErrorModel>,
        /// Order or `auto`
        #[arg(long)]
        p: Option<OrderSetting>,
        #[arg(long = "T", value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long)]
        eps_target: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Monte Carlo noise classification with syndrome post-selection
    Noise {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        strategy: Option<Decomposition>,
        #[arg(long)]
        error_model: Option<ErrorModel>,
        #[arg(long)]
        p: Option<usize>,
        /// Trotter step; derived from T and eps_target when absent
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        eps_target: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Search the largest tolerable q instead of a fixed grid
        #[arg(long)]
        max_q: bool,
        /// Write the error-to-syndrome map for this lattice and stop
        #[arg(long)]
        write_mapping: Option<PathBuf>,
    },
    /// Numeric Trotter error on a small lattice, next to the analytic bound
    Simulate {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        encoding: Option<Encoding>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<usize>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        delta: Vec<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Benchmark cost table, or the feasible-time table with --feasible
    Table {
        #[arg(long)]
        feasible: bool,
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        eps_target: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        q: Vec<f64>,
    },
}

/// Flags, then file, then default.
fn pick<T: Clone>(flag: Option<T>, file: &Option<T>, default: T) -> T {
    flag.or_else(|| file.clone()).unwrap_or(default)
}

fn pick_list(flag: Vec<f64>, file: &Option<Vec<f64>>, default: &[f64]) -> Vec<f64> {
    if !flag.is_empty() {
        flag
    } else {
        file.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// Explicit seed, or one drawn from the clock and echoed in the output.
fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> u64 {
    flag.or(file).unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_nanos() as u64)
            .unwrap_or(0)
    })
}

struct Out {
    sink: Box<dyn Write>,
    json: bool,
}

impl Out {
    fn json<T: Serialize>(&mut self, v: &T) -> Result<()> {
        writeln!(self.sink, "{}", serde_json::to_string_pretty(v)?)?;
        Ok(())
    }

    fn csv(&mut self, header: &str, rows: &[String]) -> Result<()> {
        writeln!(self.sink, "{SCHEMA}")?;
        writeln!(self.sink, "{header}")?;
        for r in rows {
            writeln!(self.sink, "{r}")?;
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct Plan {
    command: &'static str,
    #[serde(rename = "L")]
    l: usize,
    encoding: Encoding,
    layers: usize,
    lambda: f64,
    n_terms: usize,
    n_tilde: usize,
    p: Vec<usize>,
    family: String,
    /// `(p, T, delta0)` from the analytic bound.
    delta0: Vec<(usize, f64, f64)>,
}

fn plan(
    command: &'static str,
    spec: &FermiHubbardSpec,
    encoding: Encoding,
    ps: &[usize],
    ts: &[f64],
    eps: f64,
    lambda: Option<f64>,
) -> Result<Plan> {
    let (_, layers) = encode(spec, encoding)?;
    let lam = lambda.unwrap_or_else(|| lambda_global(spec, &layers));
    let (n_terms, n_tilde) = subcircuit::cost::layer_structure(&layers)?;
    let mut delta0 = Vec::new();
    for &p in ps {
        for &t in ts {
            let q = BoundQuery::new(p, layers.len(), lam, t, 0.0, n_terms, n_tilde);
            delta0.push((p, t, invert_for_delta(&q, None, eps)?));
        }
    }
    Ok(Plan {
        command,
        l: spec.l,
        encoding,
        layers: layers.len(),
        lambda: lam,
        n_terms,
        n_tilde,
        p: ps.to_vec(),
        family: "tightest".into(),
        delta0,
    })
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let file = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let output = cli.output.clone().or_else(|| file.output.clone().map(PathBuf::from));
    let sink: Box<dyn Write> = match &output {
        Some(p) => Box::new(std::io::BufWriter::new(
            std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut out = Out { sink, json: cli.json };
    run(cli, &file, &mut out)?;
    out.sink.flush()?;
    Ok(())
}

fn run(cli: Cli, file: &ExperimentConfig, out: &mut Out) -> Result<()> {
    let dry = cli.dry_run;
    match cli.cmd {
        Cmd::Synth { pauli, delta, coefficient, strategy } => {
            let mut r = synthesize_term(&pauli, coefficient, delta, strategy)?;
            if dry {
                return out.json(&serde_json::json!({
                    "command": "synth",
                    "pauli": pauli,
                    "delta": delta,
                    "strategy": strategy,
                    "method": r.method,
                }));
            }
            if r.target.n_qubits() <= MAX_DENSE_QUBITS {
                r.verify()?;
            }
            if out.json {
                out.json(&r)?;
            } else {
                writeln!(
                    out.sink,
                    "{pauli} delta={delta} method={:?} runtime={:.6} depth={} error={}",
                    r.method,
                    r.runtime_cost,
                    r.depth_cost,
                    r.verification_error.map_or("unverified".into(), |e| format!("{e:.3e}")),
                )?;
            }
            if let Some(e) = r.verification_error {
                if !(e <= VERIFY_TOL) {
                    bail!("verification failed: distance {e:e} exceeds {VERIFY_TOL:e}");
                }
            }
            Ok(())
        }
        Cmd::Bounds { spec, encoding, p, t, delta, family, lambda } => {
            let spec = spec.resolve(&file.spec)?;
            let enc = pick(encoding, &file.encoding, Encoding::Compact);
            let ps = if p.is_empty() {
                file.p.and_then(OrderSetting::fixed).map_or(vec![1, 2, 4], |p| vec![p])
            } else {
                p
            };
            let t = pick(t, &file.t, 1.0);
            let deltas = pick_list(delta, &file.delta, &[0.01, 0.02, 0.05, 0.1, 0.2]);
            let families: Vec<BoundFamily> = if family == "all" {
                BoundFamily::ALL.to_vec()
            } else {
                vec![family.parse()?]
            };
            let lambda = lambda.or(file.lambda);
            if dry {
                return out.json(&plan("bounds", &spec, enc, &ps, &[t], pick(None, &file.eps_target, 0.1), lambda)?);
            }
            let (_, layers) = encode(&spec, enc)?;
            let lam = lambda.unwrap_or_else(|| lambda_global(&spec, &layers));
            let (n, nt) = subcircuit::cost::layer_structure(&layers)?;
            let mut rows = Vec::new();
            let mut recs = Vec::new();
            for &p in &ps {
                for &d in &deltas {
                    let q = BoundQuery::new(p, layers.len(), lam, t, d, n, nt);
                    for &f in &families {
                        let b = bound(f, &q)?;
                        rows.push(format!("{},{p},{},{lam},{t},{d},{:.10e}", f.name(), layers.len(), b.epsilon));
                        recs.push(b);
                    }
                    let tight = tightest_bound(&q)?;
                    rows.push(format!("tightest,{p},{},{lam},{t},{d},{:.10e}", layers.len(), tight.epsilon));
                }
            }
            if out.json {
                out.json(&recs)
            } else {
                out.csv("family,p,M,lambda,T,delta,epsilon", &rows)
            }
        }
        Cmd::Cost { spec, encoding, strategy, error_model, p, t, eps_target, lambda } => {
            let spec = spec.resolve(&file.spec)?;
            let enc = pick(encoding, &file.encoding, Encoding::Compact);
            let d = pick(strategy, &file.strategy, Decomposition::Subcircuit);
            let model = pick(error_model, &file.error_model, ErrorModel::PerTime);
            let p = p.or(file.p).and_then(OrderSetting::fixed);
            let ts = if !t.is_empty() {
                t
            } else if let Some(s) = &file.t_sweep {
                s.clone()
            } else {
                vec![pick(None, &file.t, 1.0)]
            };
            let eps = pick(eps_target, &file.eps_target, 0.1);
            let lambda = lambda.or(file.lambda);
            if dry {
                let ps = p.map_or(vec![1, 2, 4], |p| vec![p]);
                return out.json(&plan("cost", &spec, enc, &ps, &ts, eps, lambda)?);
            }
            let mut reports = Vec::new();
            for &t in &ts {
                let mut cc = CostConfig::new(t, eps);
                cc.lambda = lambda;
                reports.push(simulation_cost(&spec, enc, p, d, model, &cc)?);
            }
            if out.json {
                return out.json(&reports);
            }
            let rows: Vec<String> = reports
                .iter()
                .map(|r| {
                    format!(
                        "{:?},{:?},{:?},{},{},{},{},{:.8},{},{:.6},{:.3},{}",
                        r.encoding, r.decomposition, r.error_model, r.p, r.t, r.eps_target, r.lambda,
                        r.delta0, r.steps, r.per_step, r.cost, r.infeasible
                    )
                })
                .collect();
            out.csv("encoding,strategy,error_model,p,T,eps_target,lambda,delta0,steps,per_step,cost,infeasible", &rows)
        }
        Cmd::Noise {
            spec,
            strategy,
            error_model,
            p,
            delta,
            steps,
            t,
            eps_target,
            q,
            trials,
            seed,
            max_q,
            write_mapping,
        } => {
            let spec = spec.resolve(&file.spec)?;
            let map = SyndromeMap::generate(spec.l, Encoding::Compact)?;
            if let Some(path) = write_mapping {
                std::fs::write(&path, map.to_json() + "\n").with_context(|| format!("writing {}", path.display()))?;
                return writeln!(out.sink, "wrote {}", path.display()).map_err(Into::into);
            }
            let d = pick(strategy, &file.strategy, Decomposition::Subcircuit);
            let model = pick(error_model, &file.error_model, ErrorModel::PerTime);
            let eps = pick(eps_target, &file.eps_target, 0.1);
            let t = pick(t, &file.t, 1.0);
            let seed = resolve_seed(seed, file.seed);
            let trials = pick(trials, &file.trials, 10_000);
            let qs = pick_list(q, &file.q, &[1e-3, 1e-4]);
            let file_p = file.p.and_then(OrderSetting::fixed);
            let (p, delta, steps) = match (delta.or(file.delta.as_ref().and_then(|v| v.first().copied())), p.or(file_p)) {
                (Some(dl), p) => {
                    let p = p.unwrap_or(2);
                    (p, dl, steps.unwrap_or((t / dl - 1e-9).ceil().max(1.0) as u64))
                }
                (None, p) => {
                    let r = simulation_cost(&spec, Encoding::Compact, p, d, model, &CostConfig::new(t, eps))?;
                    (r.p, r.delta0, steps.unwrap_or(r.steps))
                }
            };
            let sched = NoiseSchedule::build(&spec, Encoding::Compact, d, model, p, delta, steps)?;
            if dry {
                return out.json(&serde_json::json!({
                    "command": "noise",
                    "L": spec.l,
                    "n_qubits": sched.n_qubits,
                    "p": p,
                    "delta": delta,
                    "steps": steps,
                    "slots_per_step": sched.step_slots.len(),
                    "total_slots": sched.total_slots(),
                    "checks": map.n_bits,
                    "q": qs,
                    "trials": trials,
                    "seed": seed,
                }));
            }
            if max_q {
                let r = max_q_search(&sched, model, &map, eps, 0.0, trials, seed)?;
                return if out.json {
                    out.json(&serde_json::json!({ "seed": seed, "result": r }))
                } else {
                    out.csv(
                        "q_max,at_floor,at_ceiling,eps_s,eps_s_hi,overhead,seed",
                        &[format!(
                            "{:.6e},{},{},{:.6e},{:.6e},{:.4},{seed}",
                            r.q_max, r.at_floor, r.at_ceiling, r.eps_s.value, r.eps_s.hi, r.post_selection_overhead
                        )],
                    )
                };
            }
            let mut sums = Vec::new();
            for &qq in &qs {
                sums.push(run_monte_carlo(&sched, &NoiseModel::new(qq, model)?, &map, trials, seed)?);
            }
            if out.json {
                return out.json(&sums);
            }
            let rows: Vec<String> = sums
                .iter()
                .map(|s| {
                    format!(
                        "{:e},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6e},{:.6e},{}",
                        s.model.q,
                        s.trials,
                        steps,
                        s.clean.value,
                        s.clean_expected,
                        s.detectable.value,
                        s.undetectable_phase.value,
                        s.undetectable_nonphase.value,
                        s.intra_decomposition.value,
                        s.accept_rate.value,
                        s.eps_s.value,
                        s.eps_c,
                        s.seed
                    )
                })
                .collect();
            out.csv(
                "q,trials,steps,clean,clean_expected,detectable,undetectable_phase,undetectable_nonphase,intra_decomposition,accept_rate,eps_s,eps_c,seed",
                &rows,
            )
        }
        Cmd::Simulate { spec, encoding, p, t, delta, seed } => {
            let spec = {
                let mut s = spec;
                s.l = s.l.or(file.spec.l).or(Some(2));
                s.resolve(&file.spec)?
            };
            let enc = pick(encoding, &file.encoding, Encoding::Compact);
            let ps = if p.is_empty() {
                file.p.and_then(OrderSetting::fixed).map_or(vec![1, 2, 4], |p| vec![p])
            } else {
                p
            };
            let t = pick(t, &file.t, 1.0);
            let deltas = pick_list(delta, &file.delta, &[0.02, 0.05, 0.1]);
            let seed = resolve_seed(seed, file.seed);
            if dry {
                return out.json(&plan("simulate", &spec, enc, &ps, &[t], pick(None, &file.eps_target, 0.1), None)?);
            }
            let mut problem = SectorProblem::new(&spec, enc)?;
            let (lam, n, nt) = bound_inputs(&problem);
            let m = problem.layers.len();
            let mut pts = Vec::new();
            let mut rows = Vec::new();
            for &p in &ps {
                for &d in &deltas {
                    let e = numeric_epsilon(&mut problem, p, t, d, seed)?;
                    let b = tightest_bound(&BoundQuery::new(p, m, lam, t, d, n, nt))?;
                    rows.push(format!(
                        "{},{:?},{p},{t},{d},{:.10e},{:.10e},{:?},{:.3e},{},{seed}",
                        spec.l, enc, e.epsilon, b.epsilon, e.norm_method, e.residual, e.converged
                    ));
                    pts.push(serde_json::json!({ "point": e, "bound": b.epsilon, "seed": seed }));
                }
            }
            if out.json {
                out.json(&pts)
            } else {
                out.csv("L,encoding,p,T,delta,epsilon,bound,norm_method,residual,converged,seed", &rows)
            }
        }
        Cmd::Table { feasible, spec, eps_target, q } => {
            if !feasible {
                let cfg = TableConfig::benchmark()?;
                if dry {
                    return out.json(&plan("table", &cfg.spec, Encoding::Compact, &cfg.cost.p_set, &[cfg.cost.t], cfg.cost.eps_target, cfg.cost.lambda)?);
                }
                let cells = table_benchmark(&cfg)?;
                if out.json {
                    return out.json(&cells);
                }
                let rows: Vec<String> = cells
                    .iter()
                    .map(|c| {
                        format!(
                            "{:?},{:?},{:?},{},{:.8},{},{:.1},{},{}",
                            c.error_model,
                            c.encoding,
                            c.decomposition,
                            c.report.p,
                            c.report.delta0,
                            c.report.steps,
                            c.report.cost,
                            c.target.map_or(String::new(), |t| format!("{t}")),
                            c.relative_error().map_or(String::new(), |e| format!("{e:.4}")),
                        )
                    })
                    .collect();
                return out.csv("error_model,encoding,strategy,p,delta0,steps,cost,target,relative_error", &rows);
            }
            let spec = spec.resolve(&file.spec)?;
            let eps = pick(eps_target, &file.eps_target, 0.1);
            let qs = pick_list(q, &file.q, &[1e-3, 1e-4, 1e-5]);
            let mut cfg = FeasibleConfig::full(spec.l, eps, &qs);
            cfg.lambda = file.lambda;
            if dry {
                return out.json(&cfg);
            }
            let rows = feasible_time_table(&spec, &cfg)?;
            if out.json {
                return out.json(&rows);
            }
            let lines: Vec<String> = rows
                .iter()
                .map(|e| {
                    format!(
                        "{:?},{:?},{:?},{},{:e},{:.4},{:.6},{},{:.1},{:.4e},{:.4e},{:.4e},{},{}",
                        e.row.error_model,
                        e.row.encoding,
                        e.row.decomposition,
                        e.row.mitigation,
                        e.row.q,
                        e.t_tar,
                        e.delta,
                        e.steps,
                        e.cost,
                        e.eps_t,
                        e.eps_s,
                        e.eps_c,
                        e.post_selection_overhead.map_or(String::new(), |o| format!("{o:.3}")),
                        e.notes.join("; "),
                    )
                })
                .collect();
            out.csv(
                "error_model,encoding,strategy,mitigation,q,T_tar,delta,steps,cost,eps_t,eps_s,eps_c,overhead,notes",
                &lines,
            )
        }
    }
}
