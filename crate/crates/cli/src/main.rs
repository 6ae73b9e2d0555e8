use clap::Parser;

fn main() {
    let code = hetkern_cli::main_with(hetkern_cli::Cli::parse());
    std::process::exit(code);
}
