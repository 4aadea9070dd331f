use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::{json, Value};
use xplab::distortion::{
    distortion_bound, h_comparability, measure_distortion, snowflake_bound, EmbeddingCandidate, GridSpec, PairSample,
};
use xplab::inequality::{EvalOptions, Evaluator, Registry, Witness};
use xplab::search::{extremal_witness, maximize_ratio, random_witness, sharpness_scan, SearchConfig, WitnessSpec};
use xplab::ResourceCaps;

use crate::config::{DistortionSection, ExperimentConfig, WitnessChoice, DISTORTION, SCAN, SEARCH};
use crate::output::{num, opt_bool, opt_num, output_dir, to_json, write_atomic, Table};
use crate::CliError;

/// Command-line settings that sit outside the config file.
#[derive(Debug, Clone, Default)]
pub struct RunArgs {
    pub config: PathBuf,
    pub overrides: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub force_caps: bool,
}

/// What one experiment produced.
pub struct Outcome {
    pub result: Value,
    pub table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Written {
    pub json: PathBuf,
    pub csv: Option<PathBuf>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn eval_options(cfg: &ExperimentConfig, force_caps: bool) -> Result<EvalOptions, CliError> {
    Ok(EvalOptions {
        subsets: cfg.subset_policy()?,
        route: cfg.route,
        caps: if force_caps {
            ResourceCaps::unlimited()
        } else {
            cfg.caps
        },
        validation: if cfg.validate_family {
            EvalOptions::default().validation
        } else {
            None
        },
    })
}

fn load_witness(path: &Path) -> Result<Witness, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Witness(e.to_string()))?;
    let inner = value.pointer("/result/witness").cloned().unwrap_or(value);
    serde_json::from_value(inner).map_err(|e| CliError::Witness(e.to_string()))
}

fn evaluate(cfg: &ExperimentConfig, ev: &dyn Evaluator, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let params = cfg.params()?;
    let domain = ev.domain(params)?;
    let witness = match &cfg.witness {
        WitnessChoice::ExtremalExponential => extremal_witness(&domain)?,
        WitnessChoice::Random {
            support,
            dense_limit,
            max_word_len,
        } => {
            let d = WitnessSpec::default();
            let spec = WitnessSpec {
                support: support.unwrap_or(d.support),
                dense_limit: dense_limit.unwrap_or(d.dense_limit),
                max_word_len: max_word_len.unwrap_or(d.max_word_len),
            };
            random_witness(&domain, &spec, ev.requires_mean_zero(), cfg.seed, &opts.caps)?
        }
        WitnessChoice::File { path } => load_witness(path)?,
    };
    let report = ev.evaluate(&witness, params, opts)?;
    Ok(Outcome {
        result: json!({ "report": to_value(&report), "witness": to_value(&witness) }),
        table: None,
    })
}

fn search(cfg: &ExperimentConfig, registry: &Registry, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let s = cfg.search.as_ref().expect("validated");
    let mut sc = SearchConfig::new(&s.evaluator, cfg.params()?.clone(), s.budget, cfg.seed);
    sc.strategy = s.strategy;
    sc.witness = s.witness;
    sc.keep_trace = s.keep_trace;
    if let Some(p) = s.perturbation {
        sc.perturbation = p;
    }
    if let Some(steps) = s.max_climb_steps {
        sc.max_climb_steps = steps;
    }
    let r = maximize_ratio(&sc, registry, opts)?;
    let table = r.trace.as_ref().map(|trace| {
        let mut t = Table::new(&["trial", "ratio", "error"]);
        for rec in trace {
            t.push(vec![
                rec.trial.to_string(),
                opt_num(rec.ratio),
                rec.error.clone().unwrap_or_default(),
            ]);
        }
        t
    });
    Ok(Outcome {
        result: to_value(&r),
        table,
    })
}

fn scan(cfg: &ExperimentConfig, registry: &Registry, opts: &EvalOptions) -> Result<Outcome, CliError> {
    let s = cfg.scan.as_ref().expect("validated");
    let base = cfg
        .params
        .clone()
        .unwrap_or_else(|| xplab::inequality::EvalParams::new(s.n[0], s.k, 4.0));
    let t = sharpness_scan(registry, &s.evaluator, &base, &s.n, s.k, &s.m, s.witness, opts)?;
    let mut table = Table::new(&[
        "n",
        "k",
        "m",
        "ratio",
        "lhs",
        "rhs_derivative_term",
        "rhs_full_term",
        "m_factor",
        "threshold_met",
    ]);
    for r in &t.rows {
        table.push(vec![
            r.n.to_string(),
            r.k.to_string(),
            r.m.to_string(),
            opt_num(r.ratio),
            num(r.lhs),
            num(r.rhs_derivative_term),
            num(r.rhs_full_term),
            num(r.m_factor),
            opt_bool(r.threshold_met),
        ]);
    }
    Ok(Outcome {
        result: to_value(&t),
        table: Some(table),
    })
}

fn distortion(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    match cfg.distortion.as_ref().expect("validated") {
        DistortionSection::Bound { n, m, p, q } => {
            let mut rows = Vec::new();
            let mut table = Table::new(&[
                "n",
                "m",
                "p",
                "q",
                "bound",
                "dimension_term",
                "scale_term",
                "k_choice",
                "m_choice",
                "choices_meet_threshold",
            ]);
            for &nv in n {
                for &mv in m {
                    let b = distortion_bound(nv, mv, *p, *q)?;
                    table.push(vec![
                        nv.to_string(),
                        mv.to_string(),
                        num(*p),
                        num(*q),
                        num(b.bound),
                        num(b.dimension_term),
                        num(b.scale_term),
                        b.k_choice.to_string(),
                        b.m_choice.to_string(),
                        b.choices_meet_threshold.to_string(),
                    ]);
                    rows.push(json!({ "n": nv, "m": mv, "bound": to_value(&b) }));
                }
            }
            Ok(Outcome {
                result: json!({ "p": p, "q": q, "snowflake_bound": snowflake_bound(*p, *q)?, "rows": rows }),
                table: Some(table),
            })
        }
        DistortionSection::HComparability { m, n, q } => {
            let mut rows = Vec::new();
            let mut table = Table::new(&["m", "n", "q", "c1", "c2", "spread", "pairs"]);
            for &mv in m {
                for &qv in q {
                    let c = h_comparability(mv, *n, qv)?;
                    table.push(vec![
                        mv.to_string(),
                        n.to_string(),
                        num(qv),
                        num(c.c1),
                        num(c.c2),
                        num(c.spread),
                        c.pairs.to_string(),
                    ]);
                    rows.push(to_value(&c));
                }
            }
            Ok(Outcome {
                result: json!({ "comparability": rows }),
                table: Some(table),
            })
        }
        DistortionSection::Identity { m, n, q, p, sample } => {
            let spec = GridSpec::new(*m, *n, *q)?;
            let emb = EmbeddingCandidate::scaled_identity(&spec, *p, 1.0)?;
            let sample = sample.unwrap_or(PairSample::Auto { seed: cfg.seed });
            let r = measure_distortion(&emb, &spec, sample)?;
            Ok(Outcome {
                result: json!({ "grid": to_value(&spec), "target_p": p, "sample": to_value(&sample), "report": to_value(&r) }),
                table: None,
            })
        }
    }
}

/// Runs one validated experiment on the current thread pool.
pub fn execute(cfg: &ExperimentConfig, registry: &Registry, force_caps: bool) -> Result<Outcome, CliError> {
    let opts = eval_options(cfg, force_caps)?;
    match cfg.kind.as_str() {
        SEARCH => search(cfg, registry, &opts),
        SCAN => scan(cfg, registry, &opts),
        DISTORTION => distortion(cfg),
        id => evaluate(cfg, registry.get(id)?, &opts),
    }
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Loads, validates, runs and writes one experiment.
pub fn run(args: &RunArgs) -> Result<Written, CliError> {
    let mut overrides = args.overrides.clone();
    if let Some(seed) = args.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = ExperimentConfig::load(&args.config, &overrides)?;
    let registry = Registry::standard();
    cfg.validate(&registry)?;
    let workers = match args.workers {
        Some(0) => return Err(CliError::Workers),
        Some(w) => w,
        None => rayon::current_num_threads(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Pool(e.to_string()))?;
    let started = now();
    let outcome = pool.install(|| execute(&cfg, &registry, args.force_caps))?;
    let finished = now();

    let dir = output_dir(args.out.as_deref(), cfg.output.dir.as_deref());
    let stem = cfg.output.name.clone().unwrap_or_else(|| cfg.kind.clone());
    let doc = json!({
        "provenance": {
            "tool": "xplab",
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "workers": workers,
            "force_caps": args.force_caps,
            "started": started,
            "finished": finished,
        },
        "config": to_value(&cfg),
        "result": outcome.result,
    });
    let json_path = dir.join(format!("{stem}.json"));
    let bytes = to_json(&doc).map_err(|e| CliError::Witness(e.to_string()))?;
    write_atomic(&json_path, &bytes).map_err(|e| CliError::Io(json_path.clone(), e))?;
    let csv = match &outcome.table {
        Some(t) => {
            let p = dir.join(format!("{stem}.csv"));
            let bytes = t.to_csv().map_err(|e| CliError::Io(p.clone(), e.into()))?;
            write_atomic(&p, &bytes).map_err(|e| CliError::Io(p.clone(), e))?;
            Some(p)
        }
        None => None,
    };
    Ok(Written { json: json_path, csv })
}

/// Stable listing of every experiment kind with its parameters, sorted by id.
pub fn list(registry: &Registry) -> String {
    let mut entries: Vec<(&str, &str, String)> = registry
        .iter()
        .map(|ev| (ev.id(), ev.summary(), ev.parameters().join(", ")))
        .collect();
    entries.extend([
        (
            DISTORTION,
            "grid distortion, circle map comparability and closed-form bounds",
            "op, n, m, p, q, sample".to_string(),
        ),
        (
            SEARCH,
            "ratio maximisation over random witnesses with hill climbing",
            "evaluator, budget, strategy, perturbation, max_climb_steps, keep_trace, witness, params".to_string(),
        ),
        (
            SCAN,
            "ratio table over n x m at fixed k",
            "evaluator, n, k, m, witness, params".to_string(),
        ),
    ]);
    entries.sort_by(|a, b| a.0.cmp(b.0));
    let mut out = String::new();
    for (id, summary, params) in entries {
        out.push_str(&format!("{id:<16} {summary}\n{:<16} params: {params}\n", ""));
    }
    out
}
