//! Experiment configuration files.
//!
//! Line-oriented `key=value`; `#` starts a comment. Values may carry short
//! (`-k 5`) and long (`--rand-seed 1`) options. A later line with the same key
//! replaces the earlier one. Unknown keys and options are reported as warnings.
//!
//! ```text
//! dataset.ratings.lins=data/ratings.txt
//! ratings.setup=-threshold -1 -datatransformation 1
//! recommender=usersplitting -traditional biasedmf -minlength 2
//! item.ranking=off -topN 10
//! evaluation.setup=cv -k 5 -p on --rand-seed 1 --test-view all --early-stop RMSE
//! output.setup=-folder CARSKit.Workspace -verbose on, off --to-file results.txt
//! num.factors=10
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use indexmap::IndexMap;

use crate::engine::{Algorithm, EarlyStopMetric, HyperParams};
use crate::error::{Error, Result};
use crate::eval::{EvalOptions, Protocol, Task, TestView, MPE_DELTA};
use crate::ingest::WORKSPACE_DIR;

pub const RESULTS_FILE: &str = "results.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSetup {
    pub folder: String,
    pub verbose: bool,
    pub results_file: String,
}

impl Default for OutputSetup {
    fn default() -> Self {
        Self {
            folder: WORKSPACE_DIR.to_string(),
            verbose: false,
            results_file: RESULTS_FILE.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data_path_wins: Option<String>,
    pub data_path_lins: Option<String>,
    /// Binarization threshold; negative keeps ratings as they are.
    pub threshold: f64,
    pub data_transformation: i64,
    pub recommender: Algorithm,
    pub item_ranking: bool,
    pub relevance_threshold: Option<f64>,
    pub protocol: Protocol,
    pub output: OutputSetup,
    /// Includes topN, seed, early stopping and splitting options.
    pub hp: HyperParams,
}

impl ExperimentConfig {
    pub fn new(recommender: Algorithm) -> Self {
        Self {
            data_path_wins: None,
            data_path_lins: None,
            threshold: -1.0,
            data_transformation: 1,
            recommender,
            item_ranking: false,
            relevance_threshold: None,
            protocol: Protocol::default(),
            output: OutputSetup::default(),
            hp: HyperParams::default(),
        }
    }

    pub fn task(&self) -> Task {
        if self.item_ranking {
            Task::Ranking
        } else {
            Task::Rating
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            task: self.task(),
            top_n: self.hp.top_n,
            relevance_threshold: self.relevance_threshold,
            mpe_delta: MPE_DELTA,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Platform {
    Windows,
    Other,
}

impl Platform {
    pub fn current() -> Self {
        if cfg!(windows) {
            Platform::Windows
        } else {
            Platform::Other
        }
    }
}

/// The platform's data path, falling back to the other one.
pub fn resolve_data_path(config: &ExperimentConfig, platform: Platform) -> Result<PathBuf> {
    let (preferred, other) = match platform {
        Platform::Windows => (&config.data_path_wins, &config.data_path_lins),
        Platform::Other => (&config.data_path_lins, &config.data_path_wins),
    };
    preferred
        .as_ref()
        .or(other.as_ref())
        .map(PathBuf::from)
        .ok_or(Error::NoDataPath)
}

/// Words before the first option, then options in order.
#[derive(Debug, Default)]
struct Options {
    words: Vec<String>,
    flags: Vec<(String, Option<String>)>,
}

fn is_flag(token: &str) -> bool {
    let rest = token.trim_start_matches('-');
    token.starts_with('-') && rest.starts_with(|c: char| c.is_ascii_alphabetic())
}

fn tokenize(value: &str) -> Options {
    let tokens: Vec<&str> = value.split_whitespace().collect();
    let mut out = Options::default();
    let mut k = 0;
    while k < tokens.len() {
        let token = tokens[k];
        k += 1;
        if !is_flag(token) {
            if out.flags.is_empty() {
                out.words.push(token.to_string());
            } else if let Some((_, v)) = out.flags.last_mut() {
                // stray word after a flag value: append it
                let v = v.get_or_insert_with(String::new);
                v.push(' ');
                v.push_str(token);
            }
            continue;
        }
        let name = token.trim_start_matches('-').to_string();
        let mut val: Option<String> = None;
        while k < tokens.len() && !is_flag(tokens[k]) {
            let piece = tokens[k];
            k += 1;
            let cont = piece.ends_with(',');
            let v = val.get_or_insert_with(String::new);
            v.push_str(piece);
            if !cont {
                break;
            }
        }
        out.flags.push((name, val));
    }
    out
}

fn parse_value<T: FromStr>(line: usize, flag: &str, value: Option<&str>) -> Result<T> {
    let v = value.ok_or_else(|| Error::Config {
        line,
        message: format!("option -{flag} needs a value"),
    })?;
    v.parse().map_err(|_| Error::Config {
        line,
        message: format!("bad value `{v}` for -{flag}"),
    })
}

fn parse_switch(line: usize, what: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("expected on/off for {what}, got `{value}`"),
        }),
    }
}

fn wrap<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ Error::Config { .. } => e,
        e => Error::Config {
            line,
            message: e.to_string(),
        },
    })
}

/// [`parse_config_with_warnings`] with the warnings sent to the log.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let (config, warnings) = parse_config_with_warnings(text)?;
    for w in warnings {
        log::warn!("{w}");
    }
    Ok(config)
}

pub fn parse_config_with_warnings(text: &str) -> Result<(ExperimentConfig, Vec<String>)> {
    let mut entries: IndexMap<String, (usize, String)> = IndexMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::Config {
                line,
                message: format!("expected key=value, got `{content}`"),
            });
        };
        let key = key.trim().to_ascii_lowercase();
        entries.shift_remove(&key);
        entries.insert(key, (line, value.trim().to_string()));
    }

    let mut warnings = Vec::new();
    let Some((line, value)) = entries.get("recommender") else {
        return Err(Error::RecommenderNotSet);
    };
    let rec = tokenize(value);
    let name = rec.words.first().ok_or(Error::RecommenderNotSet)?;
    let mut config = ExperimentConfig::new(wrap(*line, name.parse())?);
    for (flag, v) in &rec.flags {
        match flag.to_ascii_lowercase().as_str() {
            "traditional" => {
                let name: String = parse_value(*line, flag, v.as_deref())?;
                config.hp.traditional = wrap(*line, name.parse())?;
            }
            "minlength" => config.hp.split.min_length = parse_value(*line, flag, v.as_deref())?,
            "alpha" => config.hp.split.alpha = parse_value(*line, flag, v.as_deref())?,
            _ => warnings.push(format!("line {line}: unknown recommender option -{flag}")),
        }
    }

    for (key, (line, value)) in &entries {
        let line = *line;
        let hp = &mut config.hp;
        let number = |v: &str| -> Result<f64> {
            v.parse().map_err(|_| Error::Config {
                line,
                message: format!("bad number `{v}` for {key}"),
            })
        };
        let count = |v: &str| -> Result<usize> {
            v.parse().map_err(|_| Error::Config {
                line,
                message: format!("bad count `{v}` for {key}"),
            })
        };
        match key.as_str() {
            "recommender" => {}
            "dataset.ratings.wins" => config.data_path_wins = Some(value.clone()),
            "dataset.ratings.lins" => config.data_path_lins = Some(value.clone()),
            "ratings.setup" => {
                for (flag, v) in tokenize(value).flags {
                    match flag.to_ascii_lowercase().as_str() {
                        "threshold" => config.threshold = parse_value(line, &flag, v.as_deref())?,
                        "datatransformation" => {
                            config.data_transformation = parse_value(line, &flag, v.as_deref())?
                        }
                        _ => warnings.push(format!("line {line}: unknown ratings option -{flag}")),
                    }
                }
            }
            "item.ranking" => {
                let opts = tokenize(value);
                if let Some(w) = opts.words.first() {
                    config.item_ranking = parse_switch(line, "item.ranking", w)?;
                }
                for (flag, v) in opts.flags {
                    match flag.to_ascii_lowercase().as_str() {
                        "topn" => hp.top_n = parse_value(line, &flag, v.as_deref())?,
                        "relevance" => {
                            config.relevance_threshold =
                                Some(parse_value(line, &flag, v.as_deref())?)
                        }
                        _ => warnings.push(format!("line {line}: unknown ranking option -{flag}")),
                    }
                }
            }
            "evaluation.setup" => {
                let opts = tokenize(value);
                let kind = opts
                    .words
                    .first()
                    .map(|w| w.to_ascii_lowercase())
                    .unwrap_or_else(|| "cv".into());
                let (mut k, mut parallel, mut ratio, mut seed, mut view) =
                    (5, false, 0.8, 1u64, TestView::All);
                for (flag, v) in opts.flags {
                    let v = v.as_deref();
                    match flag.to_ascii_lowercase().as_str() {
                        "k" => k = parse_value(line, &flag, v)?,
                        "p" => {
                            parallel =
                                parse_switch(line, "-p", &parse_value::<String>(line, &flag, v)?)?
                        }
                        "r" => ratio = parse_value(line, &flag, v)?,
                        "rand-seed" => seed = parse_value(line, &flag, v)?,
                        "test-view" => {
                            view = wrap(line, parse_value::<String>(line, &flag, v)?.parse())?
                        }
                        "early-stop" => {
                            let m: String = parse_value(line, &flag, v)?;
                            hp.early_stop = Some(wrap(line, m.parse::<EarlyStopMetric>())?);
                        }
                        _ => {
                            warnings.push(format!("line {line}: unknown evaluation option -{flag}"))
                        }
                    }
                }
                hp.rand_seed = seed;
                config.protocol = match kind.as_str() {
                    "cv" => Protocol::CrossValidation {
                        k,
                        seed,
                        parallel,
                        test_view: view,
                    },
                    "given-ratio" | "ratio" => Protocol::GivenRatio { ratio, seed },
                    other => {
                        return Err(Error::Config {
                            line,
                            message: format!("unknown evaluation protocol `{other}`"),
                        })
                    }
                };
            }
            "output.setup" => {
                for (flag, v) in tokenize(value).flags {
                    match flag.to_ascii_lowercase().as_str() {
                        "folder" => config.output.folder = parse_value(line, &flag, v.as_deref())?,
                        "verbose" => {
                            let v: String = parse_value(line, &flag, v.as_deref())?;
                            let first = v.split(',').next().unwrap_or("").trim().to_string();
                            config.output.verbose = parse_switch(line, "-verbose", &first)?;
                            hp.verbose = config.output.verbose;
                        }
                        "to-file" => {
                            config.output.results_file = parse_value(line, &flag, v.as_deref())?
                        }
                        "to-clipboard" => warnings.push(format!(
                            "line {line}: --to-clipboard is not supported and is ignored"
                        )),
                        _ => warnings.push(format!("line {line}: unknown output option -{flag}")),
                    }
                }
            }
            "num.factors" => hp.num_factors = count(value)?,
            "learn.rate" => hp.learn_rate = number(value)?,
            "reg.user" => hp.reg_user = number(value)?,
            "reg.item" => hp.reg_item = number(value)?,
            "reg.context" => hp.reg_context = number(value)?,
            "reg.l1" => hp.l1_reg = number(value)?,
            "reg.l2" => hp.l2_reg = number(value)?,
            "num.max.iter" => hp.num_iterations = count(value)?,
            "init.std" => hp.init_std = number(value)?,
            "knn.k" => hp.knn_k = count(value)?,
            "knn.shrinkage" => hp.knn_shrinkage = number(value)?,
            other => warnings.push(format!("line {line}: unknown key `{other}`")),
        }
    }
    Ok((config, warnings))
}

/// Canonical text form; [`parse_config`] reads it back to an equal config.
pub fn render(config: &ExperimentConfig) -> String {
    let hp = &config.hp;
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        out.push_str(k);
        out.push('=');
        out.push_str(&v);
        out.push('\n');
    };
    if let Some(p) = &config.data_path_wins {
        put("dataset.ratings.wins", p.clone());
    }
    if let Some(p) = &config.data_path_lins {
        put("dataset.ratings.lins", p.clone());
    }
    put(
        "ratings.setup",
        format!(
            "-threshold {} -datatransformation {}",
            config.threshold, config.data_transformation
        ),
    );
    put(
        "recommender",
        format!(
            "{} -traditional {} -minlength {} -alpha {}",
            config.recommender.name(),
            hp.traditional.name(),
            hp.split.min_length,
            hp.split.alpha
        ),
    );
    let mut ranking = format!(
        "{} -topN {}",
        if config.item_ranking { "on" } else { "off" },
        hp.top_n
    );
    if let Some(r) = config.relevance_threshold {
        ranking.push_str(&format!(" -relevance {r}"));
    }
    put("item.ranking", ranking);
    let mut eval = match config.protocol {
        Protocol::CrossValidation {
            k,
            seed,
            parallel,
            test_view,
        } => format!(
            "cv -k {k} -p {} --rand-seed {seed} --test-view {test_view}",
            if parallel { "on" } else { "off" }
        ),
        Protocol::GivenRatio { ratio, seed } => {
            format!("given-ratio -r {ratio} --rand-seed {seed}")
        }
    };
    if let Some(m) = hp.early_stop {
        eval.push_str(&format!(" --early-stop {m}"));
    }
    put("evaluation.setup", eval);
    put(
        "output.setup",
        format!(
            "-folder {} -verbose {} --to-file {}",
            config.output.folder,
            if config.output.verbose { "on" } else { "off" },
            config.output.results_file
        ),
    );
    put("num.factors", hp.num_factors.to_string());
    put("learn.rate", hp.learn_rate.to_string());
    put("reg.user", hp.reg_user.to_string());
    put("reg.item", hp.reg_item.to_string());
    put("reg.context", hp.reg_context.to_string());
    put("reg.l1", hp.l1_reg.to_string());
    put("reg.l2", hp.l2_reg.to_string());
    put("num.max.iter", hp.num_iterations.to_string());
    put("init.std", hp.init_std.to_string());
    put("knn.k", hp.knn_k.to_string());
    put("knn.shrinkage", hp.knn_shrinkage.to_string());
    out
}
