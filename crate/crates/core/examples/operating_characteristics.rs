//! Operating characteristics on the 2-D hard class: `P(k)`, the number of
//! functions solved within `k` trials, for each method at a few budgets.

use lipgo::gkls::{GklsClass, GklsClassSpec, Preset};
use lipgo::harness::{operating_characteristics, run_benchmark, BenchmarkConfig, Method, DEFAULT_CAP};

fn main() -> lipgo::Result<()> {
    let class = GklsClass::generate(GklsClassSpec::preset(2, Preset::Hard, 1)?)?;
    let methods = [Method::DiagNew, Method::Direct, Method::DirectL];
    let records = run_benchmark(&methods, &class, &BenchmarkConfig::new(1e-4, DEFAULT_CAP))?;
    let grid: Vec<usize> = (1..=10).map(|i| i * 500).collect();

    print!("{:>8}", "k");
    for m in &methods {
        print!(" {:>9}", m.to_string());
    }
    println!();
    let curves: Vec<_> = methods
        .iter()
        .map(|m| {
            let mine: Vec<_> = records.iter().filter(|r| r.method == m.to_string()).cloned().collect();
            operating_characteristics(&mine, &grid)
        })
        .collect();
    for (row, k) in grid.iter().enumerate() {
        print!("{k:>8}");
        for c in &curves {
            print!(" {:>9}", c.points[row].1);
        }
        println!();
    }
    Ok(())
}
