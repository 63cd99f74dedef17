//! The univariate geometric method with a known constant, a single adaptive
//! estimate, and local tuning, on `sin(x) + sin(10x/3)` over `[2.7, 7.5]`.

use lipgo::geometric1d::solve_piyavskij;
use lipgo::testfns::builtin;
use lipgo::{LipschitzSpec, Objective, StoppingCriteria};

fn main() -> lipgo::Result<()> {
    let problem = builtin("sine1d")?;
    let l = problem.lipschitz.expect("closed-form constant");
    let stop = StoppingCriteria::trials(60);
    println!("{:<16} {:>8} {:>22} {:>12}", "estimate", "trials", "best x", "gap");
    for (name, spec) in [
        ("a priori L", LipschitzSpec::APriori { l }),
        ("adaptive", LipschitzSpec::adaptive_global()),
        ("local tuning", LipschitzSpec::local_tuning()),
    ] {
        let mut objective = Objective::new(problem.domain.clone(), problem.f);
        let r = solve_piyavskij(&mut objective, spec, &stop)?;
        println!(
            "{:<16} {:>8} {:>22.15} {:>12.3e}",
            name,
            r.trials_used,
            r.best_point[0],
            r.best_value - problem.global_value
        );
    }
    Ok(())
}
