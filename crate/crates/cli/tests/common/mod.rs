#![allow(dead_code)]

use std::path::{Path, PathBuf};

use clap::Parser;
use privf_cli::Cli;

/// Writes a small three-column survey and a hamming config reading it.
pub fn toy(dir: &Path, extra: &str) -> PathBuf {
    let mut csv = String::from("party,news,sport\n");
    for i in 0..240u32 {
        let party = if i % 3 == 0 { "R" } else { "D" };
        let news = if (i * 7 + u32::from(party == "R") * 3) % 5 < 2 { "yes" } else { "no" };
        let sport = ["low", "mid", "high"][(i as usize * 5 + usize::from(party == "R")) % 3];
        csv.push_str(&format!("{party},{news},{sport}\n"));
    }
    std::fs::write(dir.join("toy.csv"), csv).unwrap();
    let config = format!(
        "seed = 3\nout = \"out\"\n\n[data]\npath = \"toy.csv\"\nprivate = \"party\"\npublic = [\"news\", \"sport\"]\n\n\
         [distortion]\nmetric = \"hamming\"\ndeltas = [0.0, 0.2, 0.5]\n\n[evaluate]\nfolds = 4\niterations = 300\n{extra}"
    );
    let path = dir.join("toy.toml");
    std::fs::write(&path, config).unwrap();
    path
}

pub fn run(args: &[&str]) -> Result<Vec<String>, privf_cli::CliError> {
    let cli = Cli::try_parse_from(std::iter::once("privf").chain(args.iter().copied())).unwrap();
    privf_cli::run(&cli)
}

pub fn code(args: &[&str]) -> i32 {
    privf_cli::main_with(std::iter::once("privf").chain(args.iter().copied()))
}
