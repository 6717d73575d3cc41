use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "gbx",
    version,
    about = "Goldbach ellipse sequences, randomness statistics and partition-based session keys"
)]
pub struct Cli {
    /// Output format; each command has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,

    /// Write results to FILE instead of standard output.
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Table,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum CenterBoundArg {
    /// Centers 2n <= N.
    #[default]
    #[value(name = "2n")]
    TwoN,
    /// Indices n <= N, i.e. centers 2n <= 2N.
    #[value(name = "4n")]
    FourN,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[default]
    Circular,
    Linear,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SourceArg {
    /// b-sequence of the (1,k) ellipse m-sequence.
    #[default]
    Ellipse,
    /// Parity of the Goldbach partition count of each even n >= 4.
    Parity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count or list primes up to a limit.
    Sieve {
        #[arg(long)]
        limit: u64,
        #[arg(long, conflicts_with = "list")]
        count: bool,
        #[arg(long)]
        list: bool,
    },
    /// Goldbach partitions of an even number.
    Partitions { n: u64 },
    /// Partition-count parity bits for even n = 4..=MAX.
    Parity {
        #[arg(long)]
        max: u64,
    },
    /// Goldbach circle of a given radius.
    Circle {
        #[arg(long)]
        radius: u64,
        #[arg(long)]
        max: u64,
        #[arg(long, default_value_t = 4)]
        min: u64,
    },
    /// (1,k) ellipse table and m-sequence.
    Mseq(SequenceArgs),
    /// Autocorrelation of a b-sequence.
    Autocorr {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long)]
        max_lag: usize,
        #[arg(long, value_enum, default_value_t)]
        mode: ModeArg,
    },
    /// Sliding-window pattern counts of a b-sequence.
    Windows {
        #[command(flatten)]
        seq: SequenceArgs,
        #[arg(long, default_value_t = 2)]
        w_min: usize,
        #[arg(long, default_value_t = 20)]
        w_max: usize,
        /// Emit w,unique_count (windows occurring exactly once) instead of every pattern.
        #[arg(long)]
        unique: bool,
    },
    /// Positions of a bit pattern inside a b-sequence.
    Locate {
        #[arg(long)]
        pattern: String,
        /// Search this bit string instead of a generated sequence.
        #[arg(long, conflicts_with_all = ["k", "max"])]
        bits: Option<String>,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Binary expansion of 1/p as a keystream.
    Dseq {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 64)]
        bits: usize,
    },
    /// Published tables against computed values.
    CompareTables {
        /// Only this table (1-4).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        table: Option<u8>,
    },
    /// Substring-count table diagnostic (same as compare-tables --table 2).
    CompareTable2,
    /// Certification authority service.
    #[command(subcommand)]
    Ca(CaCommand),
    /// Party side of the key-establishment protocol.
    #[command(subcommand)]
    Party(PartyCommand),
    /// Run the whole key-establishment exchange in-process and print every frame.
    DemoHandshake {
        #[arg(long, default_value_t = 11)]
        a: u64,
        #[arg(long, default_value_t = 23)]
        b: u64,
        /// Attach replay-hardening nonces.
        #[arg(long)]
        nonce: bool,
    },
}

#[derive(Debug, Args)]
pub struct SequenceArgs {
    #[arg(long, default_value_t = 5)]
    pub k: u64,
    #[arg(long, default_value_t = 2000)]
    pub max: u64,
    #[arg(long, value_enum, default_value_t)]
    pub center_bound: CenterBoundArg,
    #[arg(long, value_enum, default_value_t)]
    pub source: SourceArg,
}

#[derive(Debug, Subcommand)]
pub enum CaCommand {
    Serve {
        /// id,prime lines.
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        addr: String,
        /// JSON-lines audit file, appended to.
        #[arg(long)]
        audit: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct PartyArgs {
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub peer: String,
    #[arg(long)]
    pub secret: u64,
    #[arg(long)]
    pub ca: String,
    /// Session id as 32 hex digits.
    #[arg(long)]
    pub session: Option<String>,
    /// Attach a replay-hardening nonce.
    #[arg(long)]
    pub nonce: bool,
    /// Largest session key this party will accept.
    #[arg(long, default_value_t = 1 << 24)]
    pub key_bound: u64,
    /// Seconds to wait for the CA's answer.
    #[arg(long, default_value_t = 60)]
    pub timeout: u64,
}

#[derive(Debug, Subcommand)]
pub enum PartyCommand {
    /// Ask the CA for a session key shared with PEER.
    Request(PartyArgs),
    /// Agree to a session PEER requested.
    Agree(PartyArgs),
}
