use clap::Parser;

fn main() {
    let args = ordfix::cli::Args::parse();
    std::process::exit(ordfix::cli::run(&args).code());
}
