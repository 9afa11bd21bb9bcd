//! Settings shared by every subcommand. Precedence is flag, then
//! environment variable, then the built-in default; clap resolves all three.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use sepgen::{CacheStore, Oracle, DEFAULT_GUARD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Args)]
pub struct Config {
    /// Largest number of tuples an exhaustive count may visit.
    #[arg(
        long,
        global = true,
        env = "SEPGEN_GUARD",
        default_value_t = DEFAULT_GUARD,
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    pub guard: u64,

    /// Directory for cached oracle results.
    #[arg(long, global = true, env = "SEPGEN_CACHE", default_value = ".sepgen-cache")]
    pub cache_dir: PathBuf,

    /// Neither read nor write the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,

    #[arg(long, global = true, env = "SEPGEN_FORMAT", value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Monte-Carlo sample count.
    #[arg(
        long,
        global = true,
        env = "SEPGEN_SAMPLES",
        default_value_t = 10_000,
        value_parser = clap::value_parser!(u64).range(1..)
    )]
    pub samples: u64,

    /// Seed for Monte-Carlo runs and random pairs.
    #[arg(long, global = true, env = "SEPGEN_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl Config {
    pub fn oracle(&self) -> Oracle {
        let oracle = Oracle::new(self.guard);
        if self.no_cache {
            oracle
        } else {
            oracle.with_cache(CacheStore::new(&self.cache_dir))
        }
    }
}
