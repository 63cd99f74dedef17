//! DIRECT splits every longest side of a selected box, DIRECT-l only one and
//! keeps one box per size; compare them on the Branin function.

use lipgo::direct::{run_direct, DirectParams, DirectVariant};
use lipgo::testfns::builtin;
use lipgo::{Objective, StoppingCriteria};

fn main() -> lipgo::Result<()> {
    let problem = builtin("branin")?;
    println!("{:<9} {:>7} {:>6} {:>6} {:>12}", "variant", "budget", "boxes", "iters", "gap");
    for budget in [50, 200, 800] {
        for variant in [DirectVariant::Direct, DirectVariant::DirectL] {
            let mut objective = Objective::new(problem.domain.clone(), problem.f);
            let (r, state) = run_direct(&mut objective, DirectParams::new(variant), &StoppingCriteria::trials(budget))?;
            println!(
                "{:<9} {:>7} {:>6} {:>6} {:>12.3e}",
                variant.to_string(),
                budget,
                state.len(),
                r.iterations,
                r.best_value - problem.global_value
            );
        }
    }
    Ok(())
}
