use std::io;

fn main() {
    let seed = std::env::var(cbdenoise::cli::SEED_ENV).ok();
    let code = cbdenoise::cli::main_with(
        std::env::args_os(),
        seed.as_deref(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
