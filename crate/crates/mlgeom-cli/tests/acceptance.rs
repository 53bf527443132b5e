//! Acceptance suite: one line per criterion. `LG_TIER` selects the
//! highest tier to run (fast, standard or extended; default standard)
//! and `LG_SEED` the master seed.

use std::process::ExitCode;

use mlgeom_cli::harness::{run, Status, Tier};

fn main() -> ExitCode {
    let tier = std::env::var("LG_TIER").ok().and_then(|s| Tier::parse(&s)).unwrap_or(Tier::Standard);
    let seed = std::env::var("LG_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1);
    println!("acceptance: tier {tier:?}, seed {seed}");
    let out = run(tier, seed, |o| println!("{o}"));
    let count = |s| out.iter().filter(|o| o.status == s).count();
    println!("acceptance: {} passed, {} failed, {} skipped", count(Status::Pass), count(Status::Fail), count(Status::Skip));
    if count(Status::Fail) == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
