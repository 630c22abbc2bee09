//! The `corpusforge` command line.
//!
//! Exit codes: 0 on success, 1 for usage errors (unknown subcommand or flag,
//! bad option values), 2 for data, parse and i/o errors, including a refused
//! overwrite.

pub mod commands;
pub mod config;
pub mod files;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::demo::{self, DemoArgs};
use crate::error::Error;
use crate::text::TokenizationProfile;
use commands::*;

#[derive(Debug, Parser)]
#[command(
    name = "corpusforge",
    version,
    about = "Parallel-data mining, data selection and evaluation for SMT pipelines"
)]
#[command(args_override_self = true, propagate_version = true)]
pub struct Cli {
    /// Seed for every sampled operation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for mining and selection scoring.
    #[arg(long, global = true, default_value_t = 1)]
    pub workers: usize,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
    /// `key = value` file of flag defaults; flags on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Keep the original casing when tokenizing.
    #[arg(long, global = true)]
    pub no_lowercase: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
#[command(args_override_self = true)]
pub enum Command {
    /// Extract segments from TED-style XML.
    IngestTed(IngestTedArgs),
    /// Drop duplicate, badly length-matched, empty and control-character pairs.
    Clean(CleanArgs),
    /// Sentence, token and vocabulary counts.
    Stats(StatsArgs),
    /// Train an IBM Model 1 lexicon.
    TrainLex(TrainLexArgs),
    /// Word-align sentence pairs with trained lexicons.
    Align(AlignArgs),
    /// Mine parallel sentences from comparable document pairs.
    Mine(MineArgs),
    /// Grid-search the mining threshold and gap penalty against gold links.
    TuneMine(TuneMineArgs),
    /// Train a Kneser-Ney language model and write it as ARPA.
    TrainLm(TrainLmArgs),
    /// Perplexity of a text under an ARPA model.
    Ppl(PplArgs),
    /// Rank candidates by in-domain similarity and keep the best share.
    Select(SelectArgs),
    /// BLEU, NIST and TER, overall and per document.
    Score(ScoreArgs),
    /// Run the whole pipeline on generated toy data.
    Demo(DemoArgs),
}

impl Cli {
    pub fn globals(&self) -> Globals {
        Globals {
            seed: self.seed,
            workers: self.workers,
            force: self.force,
            profile: TokenizationProfile {
                lowercase: !self.no_lowercase,
            },
        }
    }
}

pub fn execute(cli: &Cli) -> crate::Result<String> {
    let g = cli.globals();
    match &cli.command {
        Command::IngestTed(a) => ingest_ted(&g, a),
        Command::Clean(a) => clean(&g, a),
        Command::Stats(a) => stats(&g, a),
        Command::TrainLex(a) => train_lex(&g, a),
        Command::Align(a) => align(&g, a),
        Command::Mine(a) => mine(&g, a),
        Command::TuneMine(a) => tune_mine(&g, a),
        Command::TrainLm(a) => train_lm(&g, a),
        Command::Ppl(a) => ppl(&g, a),
        Command::Select(a) => select(&g, a),
        Command::Score(a) => score(&g, a),
        Command::Demo(a) => demo::run(&g, a),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => 1,
        Error::Stage { source, .. } => exit_code(source),
        _ => 2,
    }
}

fn parse(argv: Vec<OsString>) -> Result<(Cli, String), i32> {
    let cmd = Cli::command();
    let argv = config::merge_config_file(argv, &cmd).map_err(|e| {
        eprintln!("error: {e}");
        exit_code(&e)
    })?;
    let matches = cmd.clone().try_get_matches_from(argv).map_err(|e| {
        let _ = e.print();
        if e.use_stderr() {
            1
        } else {
            0
        }
    })?;
    let cli = Cli::from_arg_matches(&matches).map_err(|e| {
        let _ = e.print();
        1
    })?;
    Ok((cli, config::resolved_config(&cmd, &matches)))
}

/// Parse `args` (program name first), run the subcommand and return the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let (cli, resolved) = match parse(args.into_iter().map(Into::into).collect()) {
        Ok(p) => p,
        Err(code) => return code,
    };
    eprint!("{resolved}");
    match execute(&cli) {
        Ok(out) => {
            print!("{out}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
