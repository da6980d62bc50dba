//! Drives the command-line layer in-process: writes an input file, runs the
//! `evolve` subcommand, and prints the CSV it produces.
//!
//! ```text
//! cargo run --example protocol_file
//! ```

use resonance_dynamics::cli::{execute, Command, CommonArgs, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("resdyn-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let input = dir.join("protocol.txt");
    std::fs::write(
        &input,
        "# three segments, gap duration\n\
         lambda = 0.3\n\
         beta = 1\n\
         observable = pauli_z\n\
         rho0 = plus\n\
         segment 0.05 1.0\n\
         segment -0.1 1.5\n\
         segment 0.2 0.5\n",
    )?;
    let args = CommonArgs {
        input,
        output: None,
        grid: Some(Grid::new(0.0, 3.0, 7)?),
        max_jumps: Some(1),
        regime: None,
        oracle: true,
    };
    print!("{}", execute(&Command::Evolve(args))?);
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
