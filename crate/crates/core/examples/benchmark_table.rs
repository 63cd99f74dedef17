//! Regenerates the 2-D rows of the trial and hyperinterval tables: DIRECT,
//! DIRECT-l and the diagonal method on a simple and a hard class.
//!
//! ```text
//! cargo run --release --example benchmark_table [seed]
//! ```

use lipgo::gkls::{preset_delta, GklsClass, GklsClassSpec, Preset};
use lipgo::harness::{render_csv, run_benchmark, summarize, BenchmarkConfig, Method, DEFAULT_CAP};

fn main() -> lipgo::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(1), |s| s.parse()).expect("seed must be an integer");
    let methods = [Method::Direct, Method::DirectL, Method::DiagNew];
    let delta = preset_delta(2).expect("2-D preset");
    let mut records = Vec::new();
    for preset in [Preset::Simple, Preset::Hard] {
        let class = GklsClass::generate(GklsClassSpec::preset(2, preset, seed)?)?;
        records.extend(run_benchmark(&methods, &class, &BenchmarkConfig::new(delta, DEFAULT_CAP))?);
    }
    print!("{}", render_csv(&summarize(&records)?));
    Ok(())
}
