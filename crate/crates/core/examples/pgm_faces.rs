//! Writes a few synthetic PGM images to a temporary directory, loads them
//! back as one image per row and factorizes with FastHALS-RP.

use std::fs;

use rpnmf::data::load_pgm_directory;
use rpnmf::{run, Algorithm, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join(format!("rpnmf-pgm-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let (w, h) = (16, 16);
    for img in 0..12 {
        let mut bytes = format!("P5\n{w} {h}\n255\n").into_bytes();
        for y in 0..h {
            for x in 0..w {
                // blend of a horizontal and a vertical bar pattern
                let bar_h = if (y / 4 + img) % 2 == 0 { 200 } else { 20 };
                let bar_v = if (x / 4 + img / 2) % 2 == 0 { 50 } else { 0 };
                bytes.push((bar_h + bar_v).min(255) as u8);
            }
        }
        fs::write(dir.join(format!("face{img:02}.pgm")), bytes)?;
    }

    let x = load_pgm_directory(&dir)?;
    fs::remove_dir_all(&dir)?;
    println!("loaded {} images of {} pixels", x.rows(), x.cols());

    let cfg = SolverConfig::new(Algorithm::FastHalsRp, 4)
        .with_sketch(8, 2)
        .with_iterations(200)
        .with_seed(1);
    let (_, trace) = run(&x, &cfg)?;
    println!(
        "error {:.4e} -> {:.4e} in {} iterations",
        trace.initial_error(),
        trace.final_error(),
        trace.iterations_run
    );
    Ok(())
}
