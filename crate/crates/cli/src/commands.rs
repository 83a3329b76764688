use std::fs::File;
use std::io::{BufReader, Write};

use rcm_core::asymptotics::{classify_regime, cumulant_order};
use rcm_core::census::{census, census_generated, CensusRow};
use rcm_core::graph6::read_graph6;
use rcm_core::hull::{sigma_set, to_csv, to_svg, upper_hull};
use rcm_core::partitions::{count_by_blocks, enumerate, PartitionClass};
use rcm_core::rcm_sim::{exact_moment, poisson_gof, run_experiment, Kernel, MomentKind, SimConfig, SimError};
use rcm_core::{EndpointGraph, GraphError, Rational};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::{
    CensusArgs, ClassArg, ClassifyArgs, Cli, Command, EnumerateArgs, Format, GraphSource, HullArgs, KindArg, ModelArgs,
    MomentsArgs, SimulateArgs,
};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

fn domain(e: impl std::fmt::Display) -> CliError {
    CliError::Domain(e.to_string())
}

fn q(r: Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn json_text(v: &impl Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serialisable") + "\n"
}

fn unsupported(cmd: &str, f: Format) -> CliError {
    CliError::Usage(format!("--format {f:?} is not available for `{cmd}`").to_lowercase())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--threads: {e}")))?;
    }
    let text = match &cli.command {
        Command::Enumerate(a) => enumerate_cmd(a, cli)?,
        Command::Hull(a) => hull_cmd(a, cli)?,
        Command::Census(a) => census_cmd(a, cli)?,
        Command::Classify(a) => classify_cmd(a, cli)?,
        Command::Simulate(a) => simulate_cmd(a, cli)?,
        Command::Moments(a) => moments_cmd(a, cli)?,
    };
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn load_graph(src: &GraphSource) -> Result<EndpointGraph, CliError> {
    let text = match (&src.graph, &src.graph_file) {
        (Some(s), _) => s.clone(),
        (None, Some(path)) => {
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        (None, None) => return Err(CliError::Usage("one of --graph or --graph-file is required".into())),
    };
    text.trim().parse().map_err(|e: GraphError| match e {
        GraphError::Malformed(_) => CliError::Usage(e.to_string()),
        GraphError::Assumption(_) => CliError::Domain(e.to_string()),
    })
}

fn enumerate_cmd(a: &EnumerateArgs, cli: &Cli) -> Result<String, CliError> {
    let (class, name) = match a.class {
        ClassArg::All => (PartitionClass::All, "all"),
        ClassArg::Nonflat => (PartitionClass::NonFlat, "nonflat"),
        ClassArg::Cnf => (PartitionClass::ConnectedNonFlat, "cnf"),
    };
    if a.n == 0 || a.r == 0 {
        return Err(CliError::Usage("--n and --r must be at least 1".into()));
    }
    let format = cli.format.unwrap_or(Format::Json);
    if a.counts {
        let counts = count_by_blocks(a.n, a.r, class, cli.budget).map_err(domain)?;
        let rows: Vec<(usize, u64)> = counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect();
        return match format {
            Format::Csv => Ok(std::iter::once("blocks,count".to_string())
                .chain(rows.iter().map(|(k, c)| format!("{k},{c}")))
                .map(|l| l + "\n")
                .collect()),
            Format::Json => Ok(json_text(&json!({
                "n": a.n,
                "r": a.r,
                "class": name,
                "total": rows.iter().map(|r| r.1).sum::<u64>(),
                "by_blocks": rows.iter().map(|(k, c)| json!({"blocks": k, "count": c})).collect::<Vec<_>>(),
            }))),
            f => Err(unsupported("enumerate", f)),
        };
    }
    let parts = enumerate(a.n, a.r, class, cli.budget).map_err(domain)?;
    match format {
        Format::Csv => Ok(parts.iter().map(|p| format!("{p}\n")).collect()),
        Format::Json => Ok(json_text(&json!({
            "n": a.n,
            "r": a.r,
            "class": name,
            "count": parts.len(),
            "partitions": parts.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        }))),
        f => Err(unsupported("enumerate", f)),
    }
}

fn hull_cmd(a: &HullArgs, cli: &Cli) -> Result<String, CliError> {
    let g = load_graph(&a.source)?;
    let s = sigma_set(&g, a.n, cli.budget).map_err(domain)?;
    let chain = upper_hull(&s);
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => Ok(to_csv(&s, &chain)),
        Format::Svg => Ok(to_svg(&s, &chain)),
        Format::Json => {
            let points: Vec<Value> = s
                .points()
                .into_iter()
                .map(|(x, y)| {
                    json!({
                        "x": x,
                        "y": y,
                        "multiplicity": s.multiplicity((x, y)),
                        "on_boundary": chain.boundary.contains(&(x, y)),
                    })
                })
                .collect();
            Ok(json_text(&json!({
                "graph": g.to_string(),
                "n": a.n,
                "points": points,
                "vertices": chain.vertices,
                "is_segment": chain.is_segment(),
                "slopes": chain.slopes().into_iter().map(q).collect::<Vec<_>>(),
            })))
        }
    }
}

fn census_cmd(a: &CensusArgs, cli: &Cli) -> Result<String, CliError> {
    let row: CensusRow = match &a.graph6 {
        Some(path) => {
            let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let graphs = read_graph6(BufReader::new(file)).map_err(domain)?;
            census(a.r, a.m, &graphs).map_err(domain)?
        }
        None => census_generated(a.r, a.m).map_err(domain)?,
    };
    match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(row.csv() + "\n"),
        Format::Json => Ok(json_text(&row)),
        f => Err(unsupported("census", f)),
    }
}

fn classify_cmd(a: &ClassifyArgs, cli: &Cli) -> Result<String, CliError> {
    let g = load_graph(&a.source)?;
    let rep = classify_regime(&g, a.alpha).map_err(domain)?;
    let order = match a.n {
        Some(n) => Some(cumulant_order(&g, n, a.alpha).map_err(domain)?),
        None => None,
    };
    match cli.format.unwrap_or(Format::Json) {
        Format::Json => {
            let mut v = serde_json::to_value(&rep).expect("serialisable");
            if let (Some(n), Some(o)) = (a.n, order) {
                v["n"] = json!(n);
                v["cumulant_order"] = json!(q(o));
            }
            Ok(json_text(&v))
        }
        Format::Csv => {
            let opt = |x: Option<Rational>| x.map(q).unwrap_or_default();
            let mut head = "alpha,alpha_star,threshold,phase,delta_exponent,kolmogorov_exponent".to_string();
            let mut row = format!(
                "{},{},{},{:?},{},{}",
                q(rep.alpha),
                q(rep.alpha_star),
                q(rep.threshold),
                rep.phase,
                opt(rep.delta_exponent),
                opt(rep.kolmogorov_exponent)
            );
            if let (Some(n), Some(o)) = (a.n, order) {
                head += ",n,cumulant_order";
                row += &format!(",{n},{}", q(o));
            }
            Ok(format!("{head}\n{row}\n"))
        }
        f => Err(unsupported("classify", f)),
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::InvalidConfig(_) | SimError::EndpointMismatch { .. } => CliError::Usage(e.to_string()),
        SimError::Partition(_) => CliError::Domain(e.to_string()),
    }
}

fn config(m: &ModelArgs, reps: usize) -> SimConfig {
    let c = match (m.c, m.alpha) {
        (Some(c), _) => c,
        (None, Some(alpha)) => SimConfig::scale_for(m.lambda, alpha),
        (None, None) => unreachable!("clap requires --c or --alpha"),
    };
    let mut cfg = SimConfig::new(m.d, m.l, m.lambda, m.kernel, c);
    cfg.endpoints = m.endpoints.clone().unwrap_or_default();
    cfg.reps = reps;
    cfg.seed = m.seed;
    cfg
}

fn kernel_label(k: Kernel) -> String {
    match k {
        Kernel::Constant => "constant".into(),
        Kernel::Indicator { r0 } => format!("indicator:{r0}"),
        Kernel::Exponential { s } => format!("exponential:{s}"),
    }
}

fn simulate_cmd(a: &SimulateArgs, cli: &Cli) -> Result<String, CliError> {
    let g = load_graph(&a.source)?;
    let cfg = config(&a.model, a.reps);
    let st = run_experiment(&cfg, &g).map_err(sim_error)?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => Ok(std::iter::once("rep,count".to_string())
            .chain(st.counts.iter().enumerate().map(|(i, c)| format!("{i},{c}")))
            .map(|l| l + "\n")
            .collect()),
        Format::Json => {
            let mut v = json!({
                "graph": g.to_string(),
                "d": cfg.d,
                "l": cfg.l,
                "lambda": cfg.lambda,
                "kernel": kernel_label(cfg.kernel),
                "c": cfg.c,
                "reps": cfg.reps,
                "seed": cfg.seed,
                "automorphisms": st.automorphisms,
                "mean": st.mean,
                "variance": st.variance,
                "k3": st.k3,
                "k4": st.k4,
                "se_mean": st.se_mean,
                "se_variance": st.se_variance,
                "se_k3": st.se_k3,
                "se_k4": st.se_k4,
                "skewness": st.skewness(),
                "prob_positive": st.prob_positive(),
                "histogram": st.histogram,
                "rounding_flags": st.rounding_flags,
            });
            if a.gof {
                let mean = exact_moment(&g, 1, &cfg, a.samples, MomentKind::Cumulant, cli.budget).map_err(sim_error)?;
                let mu = mean.value / st.automorphisms as f64;
                v["poisson_mean"] = json!(mu);
                v["poisson_tv"] = json!(poisson_gof(&st, mu));
            }
            Ok(json_text(&v))
        }
        f => Err(unsupported("simulate", f)),
    }
}

fn moments_cmd(a: &MomentsArgs, cli: &Cli) -> Result<String, CliError> {
    let g = load_graph(&a.source)?;
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let cfg = config(&a.model, 1);
    let (kind, name) = match a.kind {
        KindArg::Moment => (MomentKind::Moment, "moment"),
        KindArg::Cumulant => (MomentKind::Cumulant, "cumulant"),
    };
    let est = exact_moment(&g, a.n, &cfg, a.samples, kind, cli.budget).map_err(sim_error)?;
    match cli.format.unwrap_or(Format::Json) {
        Format::Csv => Ok(format!("n,kind,value,se\n{},{name},{},{}\n", a.n, est.value, est.se)),
        Format::Json => Ok(json_text(&json!({
            "graph": g.to_string(),
            "n": a.n,
            "kind": name,
            "value": est.value,
            "se": est.se,
        }))),
        f => Err(unsupported("moments", f)),
    }
}
