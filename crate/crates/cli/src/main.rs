use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use phonoblocks::layout::{phoneme_keyboard, GridConfig, LayoutGrid, MdsMethod};
use phonoblocks::lexicon::{
    join_phonemes, load_artifacts, load_dictionary, parse_phonemes, write_artifacts, Lexicon, LexiconConfig,
    WordFrequencies,
};
use phonoblocks::scaffold::{plan, simulate, EventKind, LearnerPolicy};
use phonoblocks::session::replay;
use phonoblocks::study::{
    child_ids, descriptives, design_trials, fit_model, read_draws_csv, read_trials_jsonl, simulate_minigame,
    virtual_population, write_draws_csv, write_trials_jsonl, GenParams, McmcConfig, ModelFit, QuartileMethod,
    Response, DEFAULT_THRESHOLDS, PARAMETER_NAMES,
};
use phonoblocks::wordplay::{interpret_with, pronounce_letters, render_detailed, Block};
use phonoblocks_service::Config;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "phonoblocks", version, about = "Phoneme blocks: lexicon, scaffolds, keyboards and minigame statistics")]
struct Cli {
    /// JSON config file; PHONOBLOCKS_CONFIG takes precedence when set.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Lexicon artifact directory, overriding the config.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Align a CMU-format dictionary and write lexicon artifacts.
    BuildLexicon {
        #[arg(long)]
        dict: Option<PathBuf>,
        /// WORD<TAB>log10freq list used as the interpreter's word prior.
        #[arg(long)]
        freq: Option<PathBuf>,
        #[arg(long)]
        no_freq: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        max_chunk: usize,
        /// Size of the top pair table that defines the creatures.
        #[arg(long = "top", default_value_t = 80)]
        top_pairs: usize,
    },
    /// Spell a phoneme sequence, e.g. `render --phonemes "K AE T"`.
    Render {
        #[arg(long)]
        phonemes: String,
        /// One line of text instead of JSON.
        #[arg(long)]
        plain: bool,
    },
    /// Read a letter string aloud as phonemes.
    Pronounce {
        #[arg(long)]
        word: String,
        #[arg(long)]
        plain: bool,
    },
    /// Rank words for a block sequence given as letters, phonemes, or mixed
    /// blocks where `/SH/` is a phoneme block and other tokens split into
    /// letter blocks.
    #[command(group = clap::ArgGroup::new("input").required(true))]
    Interpret {
        #[arg(long, group = "input")]
        letters: Option<String>,
        #[arg(long, group = "input")]
        phonemes: Option<String>,
        #[arg(long, group = "input", num_args = 1.., allow_hyphen_values = false)]
        blocks: Option<Vec<String>>,
        #[arg(long, short = 'k', default_value_t = 10)]
        top: usize,
        #[arg(long)]
        plain: bool,
    },
    /// Run a simulated learner through scaffolds for the given words.
    ScaffoldSim {
        /// Repeat for several words.
        #[arg(long = "word", required = true)]
        words: Vec<String>,
        #[arg(long, default_value_t = 0.7)]
        knowledge: f64,
        #[arg(long, default_value_t = 0.0)]
        slip: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Print every event as one JSON line.
        #[arg(long)]
        json: bool,
    },
    /// Scale the phoneme inventory and place it on the keyboard grid.
    Layout {
        /// COLSxROWS, overriding the config.
        #[arg(long)]
        grid: Option<GridConfig>,
        #[arg(long, value_enum)]
        method: Option<Method>,
        #[arg(long)]
        json: bool,
    },
    /// Simulate minigame trials and write them as JSON lines.
    MinigameSim {
        #[arg(long, default_value_t = 26)]
        children: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// JSON generating parameters; defaults to the built-in values.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        replicates: Option<u32>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit the time or error model and write posterior draws as CSV.
    Fit {
        #[arg(long, value_parser = parse_response)]
        model: Response,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "fit.csv")]
        out: PathBuf,
        /// Where to write the JSON summary; `<out>.summary.json` by default.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        chains: usize,
        #[arg(long, default_value_t = 4000)]
        iters: usize,
        #[arg(long, default_value_t = 1000)]
        warmup: usize,
        #[arg(long, default_value_t = 11)]
        seed: u64,
        #[arg(long)]
        no_item_slopes: bool,
    },
    /// Virtual-population fractions from saved posterior draws.
    Fractions {
        /// Draws CSV written by `fit`.
        #[arg(long)]
        fit: PathBuf,
        #[arg(long, value_parser = parse_response)]
        model: Response,
        #[arg(short = 'M', long = "population", visible_alias = "M", default_value_t = 100_000)]
        population: usize,
        #[arg(long, value_delimiter = ',')]
        thresholds: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Thin the posterior to at most this many draws.
        #[arg(long)]
        max_draws: Option<usize>,
        #[arg(long, default_value_t = 1.05)]
        rhat_threshold: f64,
        #[arg(long)]
        json: bool,
    },
    /// Per-condition summaries of errors and seconds.
    Descriptives {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Quartiles::Type7)]
        quartiles: Quartiles,
        #[arg(long)]
        json: bool,
    },
    /// Rebuild a session from its log and print the final state.
    Replay {
        log: PathBuf,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Classical,
    Smacof,
}

#[derive(Clone, Copy, ValueEnum)]
enum Quartiles {
    Type7,
    MedianExclusive,
}

fn parse_response(s: &str) -> Result<Response, String> {
    s.parse()
}

fn main() -> Result<()> {
    tracing_subscriber::fmt().with_writer(std::io::stderr).init();
    let cli = Cli::parse();
    let mut config = Config::resolve(cli.config.as_deref())?;
    if let Some(dir) = cli.lexicon {
        config.lexicon_dir = dir;
    }
    run(cli.command, config)
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn lexicon(config: &Config) -> Result<Lexicon> {
    Ok(load_artifacts(&config.lexicon_dir)?)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("opening {}", path.display()))?))
}

fn run(command: Cmd, mut config: Config) -> Result<()> {
    match command {
        Cmd::BuildLexicon {
            dict,
            freq,
            no_freq,
            out,
            max_chunk,
            top_pairs,
        } => {
            let dict = dict.unwrap_or(config.dictionary.clone());
            let out = out.unwrap_or(config.lexicon_dir.clone());
            let freq = if no_freq { None } else { freq.or(config.frequencies.clone()) };
            let dict_text = std::fs::read_to_string(&dict).with_context(|| format!("reading {}", dict.display()))?;
            let parsed = load_dictionary(&dict)?;
            if !parsed.errors.is_empty() {
                eprintln!("{}: skipped {} malformed lines", dict.display(), parsed.errors.len());
            }
            let mut cfg = LexiconConfig {
                top_pairs,
                ..LexiconConfig::default()
            };
            cfg.alignment.max_chunk = max_chunk;
            let (mut lex, report) = Lexicon::build(parsed.entries, &cfg)?;
            let freq_text = match &freq {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    lex = lex.with_frequencies(WordFrequencies::parse(&text));
                    Some(text)
                }
                None => None,
            };
            let manifest = write_artifacts(&out, &lex, &report, &dict_text, freq_text.as_deref())?;
            println!(
                "{} entries ({} trained, {} excluded), {} words, {} EM iterations -> {}",
                manifest.entries,
                manifest.trained_entries,
                manifest.excluded_entries,
                manifest.words,
                manifest.em_iterations,
                out.display()
            );
        }
        Cmd::Render { phonemes, plain } => {
            let lex = lexicon(&config)?;
            let p = parse_phonemes(&phonemes)?;
            let r = render_detailed(&p, &lex);
            if plain {
                println!("{}  ({})", r.spelling(), r.chunks.join("|"));
            } else {
                print_json(&r)?;
            }
        }
        Cmd::Pronounce { word, plain } => {
            if !word.bytes().all(|b| b.is_ascii_alphabetic()) {
                bail!("--word must be letters A-Z, got {word:?}");
            }
            let lex = lexicon(&config)?;
            let p = pronounce_letters(&word, &lex);
            if plain {
                println!("{}", join_phonemes(&p));
            } else {
                print_json(&serde_json::json!({ "word": word.to_ascii_uppercase(), "phonemes": p }))?;
            }
        }
        Cmd::Interpret {
            letters,
            phonemes,
            blocks,
            top,
            plain,
        } => {
            let lex = lexicon(&config)?;
            let blocks = match (letters, phonemes, blocks) {
                (Some(l), _, _) => parse_blocks(&[l])?,
                (_, Some(p), _) => parse_phonemes(&p)?
                    .into_iter()
                    .enumerate()
                    .map(|(i, p)| Block::phoneme(i as u32, p))
                    .collect(),
                (_, _, Some(b)) => parse_blocks(&b)?,
                _ => unreachable!("clap requires one input"),
            };
            let results = interpret_with(&blocks, &lex, top, &config.interpreter);
            if !plain {
                print_json(&results)?;
            } else {
                for (i, r) in results.iter().enumerate() {
                    println!("{:>3}  {:<16} {:>9.3}  {:?}  {}", i + 1, r.word, r.score, r.channel, join_phonemes(&r.phonemes));
                }
            }
        }
        Cmd::ScaffoldSim {
            words,
            knowledge,
            slip,
            seed,
            json,
        } => {
            let lex = lexicon(&config)?;
            let mut policy = LearnerPolicy::with_knowledge(knowledge, seed);
            policy.slip_rate = slip;
            policy.validate().map_err(anyhow::Error::msg)?;
            for (i, word) in words.iter().enumerate() {
                let p = plan(word, &lex, &config.scaffold)?;
                policy.seed = seed.wrapping_add(i as u64);
                let t = simulate(&p, &policy);
                if json {
                    for e in &t.events {
                        let mut line = serde_json::to_value(e)?;
                        line["word"] = word.to_uppercase().into();
                        println!("{line}");
                    }
                    continue;
                }
                let count = |k: EventKind| t.events.iter().filter(|e| e.kind == k).count();
                println!(
                    "{:<14} {:<20} actions {:>3}/{:<3} cues {} auto {} preassembled {}",
                    word.to_uppercase(),
                    t.placed.join("|"),
                    t.actions,
                    p.action_bound(),
                    count(EventKind::Cue),
                    count(EventKind::AutoPlace),
                    count(EventKind::Preassemble)
                );
            }
        }
        Cmd::Layout { grid, method, json } => {
            if let Some(g) = grid {
                config.grid = g;
            }
            if let Some(m) = method {
                config.mds.method = match m {
                    Method::Classical => MdsMethod::Classical,
                    Method::Smacof => MdsMethod::Smacof,
                };
            }
            let kb = phoneme_keyboard(&config.mds, config.grid)?;
            if json {
                print_json(&kb)?;
            } else {
                print!("{}", grid_text(&kb.grid));
                println!("stress {:.6} after {} iterations", kb.mds.stress, kb.mds.iterations);
            }
        }
        Cmd::MinigameSim {
            children,
            seed,
            params,
            replicates,
            out,
        } => {
            let mut gen: GenParams = match params {
                Some(p) => serde_json::from_reader(open(&p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => GenParams::default(),
            };
            if let Some(r) = replicates {
                gen.replicates = r;
            }
            let specs = design_trials(&child_ids(children), seed)?;
            let records = simulate_minigame(&specs, &gen, seed)?;
            match out {
                Some(p) => {
                    let mut w = create(&p)?;
                    write_trials_jsonl(&mut w, &records)?;
                    w.flush()?;
                    eprintln!("{} records -> {}", records.len(), p.display());
                }
                None => write_trials_jsonl(std::io::stdout().lock(), &records)?,
            }
        }
        Cmd::Fit {
            model,
            input,
            out,
            summary,
            chains,
            iters,
            warmup,
            seed,
            no_item_slopes,
        } => {
            let records = read_trials_jsonl(open(&input)?)?;
            let cfg = McmcConfig {
                chains,
                iters,
                warmup,
                seed,
                item_slopes: !no_item_slopes,
                ..McmcConfig::default()
            };
            let fit = fit_model(&records, model, &cfg)?;
            let mut w = create(&out)?;
            write_draws_csv(&mut w, &fit.draws)?;
            w.flush()?;
            let s = FitSummary::of(&fit);
            let summary = summary.unwrap_or_else(|| PathBuf::from(format!("{}.summary.json", out.display())));
            let mut w = create(&summary)?;
            serde_json::to_writer_pretty(&mut w, &s)?;
            w.flush()?;
            print!("{}", s.to_text());
            if !fit.converged {
                eprintln!("warning: max R-hat {:.3} exceeds {}", fit.max_rhat(), cfg.rhat_threshold);
            }
        }
        Cmd::Fractions {
            fit,
            model,
            population,
            thresholds,
            seed,
            max_draws,
            rhat_threshold,
            json,
        } => {
            let draws = read_draws_csv(open(&fit)?)?;
            let fit = ModelFit::from_draws(model, draws, rhat_threshold)?;
            if !fit.converged {
                bail!("draws have not converged (max R-hat {:.3})", fit.max_rhat());
            }
            let t = thresholds.unwrap_or_else(|| DEFAULT_THRESHOLDS.to_vec());
            let table = virtual_population(&fit, &t, population, seed, max_draws)?;
            if json {
                print_json(&table)?;
            } else {
                print!("{}", table.to_text());
            }
        }
        Cmd::Descriptives { input, quartiles, json } => {
            let records = read_trials_jsonl(open(&input)?)?;
            let method = match quartiles {
                Quartiles::Type7 => QuartileMethod::Interpolated,
                Quartiles::MedianExclusive => QuartileMethod::MedianExclusive,
            };
            let table = descriptives(&records, method)?;
            if json {
                print_json(&table)?;
            } else {
                print!("{}", table.to_text());
            }
        }
        Cmd::Replay { log } => {
            let lex = lexicon(&config)?;
            let r = replay(&log, &lex)?;
            if r.truncated_tail {
                eprintln!("note: ignored a truncated last line");
            }
            print_json(&serde_json::json!({
                "sessionId": r.header.session_id,
                "commands": r.commands,
                "state": r.state,
            }))?;
        }
        Cmd::Serve { port } => {
            if let Some(p) = port {
                config.port = p;
            }
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(phonoblocks_service::serve(config))?;
        }
    }
    Ok(())
}

fn parse_blocks(tokens: &[String]) -> Result<Vec<Block>> {
    let mut blocks = Vec::new();
    for tok in tokens {
        if let Some(inner) = tok.strip_prefix('/').and_then(|t| t.strip_suffix('/')) {
            let p = inner.trim_end_matches(['0', '1', '2']).parse()?;
            blocks.push(Block::phoneme(blocks.len() as u32, p));
        } else {
            for c in tok.chars() {
                if !c.is_ascii_alphabetic() {
                    bail!("letter blocks must be A-Z, got {c:?}");
                }
                blocks.push(Block::letter(blocks.len() as u32, c));
            }
        }
    }
    Ok(blocks)
}

fn grid_text(grid: &LayoutGrid) -> String {
    let mut rows = vec![vec![String::from("."); grid.cols]; grid.rows];
    for c in &grid.cells {
        let tag = c.group.map_or(String::new(), |g| g.to_string());
        rows[c.row][c.col] = format!("{}{}", c.symbol, tag);
    }
    rows.iter()
        .map(|r| r.iter().map(|s| format!("{s:<5}")).collect::<String>().trim_end().to_string() + "\n")
        .collect()
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ParamSummary {
    name: String,
    mean: f64,
    low95: f64,
    high95: f64,
    rhat: Option<f64>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FitSummary {
    response: Response,
    n_obs: usize,
    n_children: usize,
    n_items: usize,
    chains: usize,
    kept_per_chain: usize,
    converged: bool,
    acceptance: f64,
    parameters: Vec<ParamSummary>,
}

impl FitSummary {
    fn of(fit: &ModelFit) -> Self {
        let parameters = PARAMETER_NAMES
            .iter()
            .filter_map(|&name| {
                let (low95, high95) = fit.interval(name, 0.95)?;
                Some(ParamSummary {
                    name: name.to_string(),
                    mean: fit.mean(name)?,
                    low95,
                    high95,
                    rhat: fit.rhat.get(name).copied(),
                })
            })
            .collect();
        Self {
            response: fit.response,
            n_obs: fit.n_obs,
            n_children: fit.n_children,
            n_items: fit.n_items,
            chains: fit.chains,
            kept_per_chain: fit.kept_per_chain,
            converged: fit.converged,
            acceptance: fit.acceptance,
            parameters,
        }
    }

    fn to_text(&self) -> String {
        let mut out = format!(
            "{:?} model: {} obs, {} children, {} items, {} chains x {} draws\n",
            self.response, self.n_obs, self.n_children, self.n_items, self.chains, self.kept_per_chain
        );
        out += &format!("{:<13} {:>8} {:>8} {:>8} {:>6}\n", "parameter", "mean", "2.5%", "97.5%", "R-hat");
        for p in &self.parameters {
            out += &format!(
                "{:<13} {:>8.3} {:>8.3} {:>8.3} {:>6}\n",
                p.name,
                p.mean,
                p.low95,
                p.high95,
                p.rhat.map_or("-".into(), |r| format!("{r:.3}"))
            );
        }
        out
    }
}
