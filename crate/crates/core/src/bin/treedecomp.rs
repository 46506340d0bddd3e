use clap::Parser;
use treedecomp::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TREE_DECOMP_LOG", "warn")).init();
    let cli = Cli::parse();
    let out = run(&cli);
    if cli.json {
        print!("{}", out.report.to_json());
    } else {
        print!("{}", out.report.to_text());
    }
    std::process::exit(out.code);
}
