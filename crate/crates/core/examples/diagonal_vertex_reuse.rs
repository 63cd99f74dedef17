//! Runs the diagonal method on a 2-D GKLS function and reports how often a
//! vertex value was read back from the store instead of re-evaluated.

use lipgo::diagonal::{run_multidim_diagonal, DiagonalParams};
use lipgo::gkls::{generate_function, GklsClassSpec, Preset};
use lipgo::{Objective, StoppingCriteria};

fn main() -> lipgo::Result<()> {
    let spec = GklsClassSpec::preset(2, Preset::Simple, 1)?;
    let f = generate_function(&spec, 1)?;
    let mut objective = Objective::new(f.domain.clone(), |x| f.value(x));
    let run = run_multidim_diagonal(&mut objective, DiagonalParams::default(), &StoppingCriteria::trials(1000))?;

    let store = run.search.store();
    let corners = 2 * run.result.cells_created;
    println!("trials               {}", run.result.trials_used);
    println!("live hyperintervals  {}", run.result.hyperintervals_generated);
    println!("cells ever created   {}", run.result.cells_created);
    println!("corner reads         {corners}");
    println!("store misses         {}", store.misses());
    println!("store hits           {}", store.hits());
    println!("max vertex incidence {} (bound 2^N = 4)", run.search.max_incidence());
    println!("best value           {:.9} (global {})", run.result.best_value, f.global().value);
    Ok(())
}
