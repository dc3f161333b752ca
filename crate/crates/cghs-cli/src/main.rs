use clap::Parser;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let cli = cghs_cli::Cli::parse();
    match cghs_cli::run(&cli, argv) {
        Ok(manifest) => {
            eprintln!(
                "done in {} ms; outputs: {}",
                manifest.wall_ms,
                manifest
                    .outputs
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(cghs_cli::exit_code_for(&e));
        }
    }
}
