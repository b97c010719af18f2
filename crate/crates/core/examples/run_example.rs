//! Runs the bundled example pipeline and prints the text report.

use mmx_core::pipeline::{run_pipeline, PipelineConfig};

fn main() {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(2011);
    match run_pipeline(&PipelineConfig::example(seed)) {
        Ok(out) => {
            print!("{}", out.report.render_text());
            print!("{}", out.dot);
        }
        Err(f) => {
            eprintln!("{}", f.error);
            std::process::exit(f.error.exit_code());
        }
    }
}
