use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rm_recursive::analysis::{table1_entries, threshold_report, Regime, DEFAULT_C};
use rm_recursive::channel::{ChannelModel, MetricForm, MetricVector, SnrConvention};
use rm_recursive::decoder::Decoder;
use rm_recursive::harness::{
    compare_soft_hard_with, csv_row, reproduce_table2, run_montecarlo_with, theorem1_check,
    ChannelSpec, Decision, FrozenChoice, RunOptions, SimConfig, Table2Options, CSV_HEADER,
    DEFAULT_MAX_SYMBOLS,
};
use rm_recursive::rm_code::{bits_to_string, parse_bit_lines, CodeParams, Encoder, NodePath};
use rm_recursive::{Error, Result};

#[derive(Parser)]
#[command(
    name = "rmrec",
    version,
    about = "Recursive decoding of Reed-Muller codes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print n, k, d and rate of RM(r, m).
    Params {
        m: usize,
        r: usize,
        #[arg(long)]
        json: bool,
    },
    /// Encode information vectors, one 0/1 string per line.
    Encode {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        info_file: PathBuf,
    },
    /// Decode channel outputs, one vector of numbers (or a 0/1 string on a BSC) per line.
    Decode {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        metrics_file: PathBuf,
        /// Channel as JSON, e.g. '{"kind":"awgn","sigma2":0.5}' or '{"kind":"bsc","p":0.05}'.
        #[arg(long)]
        channel: String,
        #[arg(long, value_enum, default_value_t = Form::Received)]
        form: Form,
        /// Also write decoded information bits here.
        #[arg(long)]
        info_out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo simulation and print a CSV row (or JSON).
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// none, leftmost, leftmost2 or custom.
        #[arg(long)]
        frozen: Option<String>,
        /// Comma-separated node paths for --frozen custom, e.g. VVV,VVUV.
        #[arg(long, value_delimiter = ',')]
        frozen_paths: Vec<NodePath>,
        /// Run soft and hard decisions on the same noise.
        #[arg(long)]
        compare_hard: bool,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
        /// Write 0 in the wall_ms column.
        #[arg(long)]
        no_timing: bool,
    },
    /// Simulate the length-512 comparison table.
    Table2 {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Trials at 4 dB; defaults to --trials.
        #[arg(long)]
        trials_4db: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "eb_n0")]
        convention: SnrConvention,
        /// Frozen set for the subcode rows: leftmost or leftmost2.
        #[arg(long, default_value = "leftmost")]
        subcode: FrozenChoice,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the closed-form estimates for one code.
    Analyze {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long, value_enum, default_value_t = RegimeArg::FixedRate)]
        regime: RegimeArg,
        #[arg(long)]
        json: bool,
    },
    /// Compare simulated hard-decision BER with Q(mu) on a BSC.
    Theorem1 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    workers: Option<usize>,
    /// Refuse runs with more than this many channel symbols.
    #[arg(long, default_value_t = DEFAULT_MAX_SYMBOLS)]
    max_symbols: u128,
}

impl RunArgs {
    fn options(&self) -> RunOptions {
        RunOptions {
            workers: self.workers,
            max_symbols: self.max_symbols,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Received,
    Likelihood,
    Spread,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    FixedOrder,
    FixedRate,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("result serializes")
}

fn parse_numbers(line: &str) -> Result<Vec<f64>> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number {s:?}")))
        })
        .collect()
}

fn decode_file(
    params: CodeParams,
    metrics: &str,
    channel: &str,
    form: Form,
    info_out: Option<&Path>,
) -> Result<String> {
    let spec: ChannelSpec =
        serde_json::from_str(channel).map_err(|e| Error::Config(e.to_string()))?;
    let channel = spec.resolve(&params)?;
    let mut decoder = Decoder::new(params, &Default::default())?;
    let (mut words, mut infos) = (String::new(), String::new());
    for line in metrics
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
    {
        let is_bits = line.chars().all(|c| c == '0' || c == '1') && line.len() == params.n;
        let result = match channel {
            ChannelModel::Bsc { p } if is_bits => decoder.decode_hard(&line.parse()?, p)?,
            _ => {
                let form = match form {
                    Form::Received => MetricForm::ReceivedY,
                    Form::Likelihood => MetricForm::LikelihoodG,
                    Form::Spread => MetricForm::SpreadH,
                };
                decoder.decode(&MetricVector::new(form, parse_numbers(line)?), &channel)?
            }
        };
        words.push_str(&result.codeword.to_string());
        words.push('\n');
        infos.push_str(&bits_to_string(&result.info));
        infos.push('\n');
    }
    if let Some(path) = info_out {
        write(path, &infos)?;
    }
    Ok(words)
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Params { m, r, json } => {
            let p = CodeParams::new(m, r)?;
            Ok(if json {
                to_json(&p)
            } else {
                format!("n={} k={} d={} rate={}", p.n, p.k, p.d, p.rate())
            })
        }
        Command::Encode { m, r, info_file } => {
            let mut encoder = Encoder::new(CodeParams::new(m, r)?);
            let mut out = String::new();
            let mut word = vec![0; encoder.params().n];
            for info in parse_bit_lines(&read(&info_file)?)? {
                encoder.encode_into(&info, &mut word)?;
                out.push_str(&bits_to_string(&word));
                out.push('\n');
            }
            Ok(out.trim_end().to_string())
        }
        Command::Decode {
            m,
            r,
            metrics_file,
            channel,
            form,
            info_out,
        } => {
            let words = decode_file(
                CodeParams::new(m, r)?,
                &read(&metrics_file)?,
                &channel,
                form,
                info_out.as_deref(),
            )?;
            Ok(words.trim_end().to_string())
        }
        Command::Simulate {
            config,
            trials,
            seed,
            frozen,
            frozen_paths,
            compare_hard,
            run,
            json,
            no_timing,
        } => {
            let mut config = SimConfig::from_json(&read(&config)?)?;
            if let Some(t) = trials {
                config.trials = t;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            match frozen.as_deref() {
                Some("custom") => config.frozen = FrozenChoice::Custom(frozen_paths),
                Some(name) if frozen_paths.is_empty() => config.frozen = name.parse()?,
                Some(_) => {
                    return Err(Error::Config("--frozen-paths needs --frozen custom".into()))
                }
                None if !frozen_paths.is_empty() => {
                    config.frozen = FrozenChoice::Custom(frozen_paths)
                }
                None => {}
            }
            config.validate()?;
            let results = if compare_hard {
                let pair = compare_soft_hard_with(&config, &run.options())?;
                vec![
                    (config.clone(), pair.soft),
                    (
                        SimConfig {
                            decision: Decision::Hard,
                            ..config
                        },
                        pair.hard,
                    ),
                ]
            } else {
                let res = run_montecarlo_with(&config, &run.options())?;
                vec![(config, res)]
            };
            if json {
                let items: Vec<_> = results
                    .iter()
                    .map(|(c, r)| serde_json::json!({ "config": c, "result": r }))
                    .collect();
                return Ok(to_json(&items));
            }
            let mut out = String::from(CSV_HEADER);
            for (c, r) in &results {
                out.push('\n');
                out.push_str(&csv_row(c, r, !no_timing));
            }
            Ok(out)
        }
        Command::Table2 {
            trials,
            trials_4db,
            seed,
            convention,
            subcode,
            run,
            json,
        } => {
            let opts = Table2Options {
                trials,
                trials_4db: trials_4db.unwrap_or(trials),
                seed,
                convention,
                subcode,
                run: run.options(),
            };
            let table = reproduce_table2(&opts)?;
            Ok(if json {
                to_json(&table)
            } else {
                table.to_text().trim_end().to_string()
            })
        }
        Command::Analyze {
            m,
            r,
            p,
            c,
            regime,
            json,
        } => {
            let regime = match regime {
                RegimeArg::FixedOrder => Regime::FixedOrder,
                RegimeArg::FixedRate => Regime::FixedRate,
            };
            let report = threshold_report(m, r, regime, c, p)?;
            let table = table1_entries(m, r)?;
            if json {
                return Ok(to_json(
                    &serde_json::json!({ "report": report, "table1": table }),
                ));
            }
            Ok(format!("{}\n{}", to_json(&report), to_json(&table)))
        }
        Command::Theorem1 {
            m,
            r,
            p,
            trials,
            seed,
        } => Ok(to_json(&theorem1_check(m, r, &p, trials, seed)?)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(out) => {
            println!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::ResourceCap { .. } => 2,
                _ => 1,
            })
        }
    }
}
