//! Generates a GKLS class, prints the minima census of its first function,
//! and checks that the manifest text reproduces the class exactly.

use lipgo::gkls::{gkls_minima, read_manifest, GklsClass, GklsClassSpec, Preset};

fn main() -> lipgo::Result<()> {
    let spec = GklsClassSpec::preset(2, Preset::Hard, 7)?;
    let class = GklsClass::generate(spec)?;
    let f = &class.functions[0];
    println!("function 1 of {} ({} class, N = {})", class.functions.len(), class.spec.name, class.spec.dim);
    println!("{:>3} {:>22} {:>10} {:>8}", "idx", "point", "value", "radius");
    for (i, m) in gkls_minima(f).iter().enumerate() {
        let p = format!("({:.4}, {:.4})", m.point[0], m.point[1]);
        println!("{i:>3} {p:>22} {:>10.4} {:>8.4}", m.value, m.radius);
    }

    let text = class.to_manifest_string();
    let back = read_manifest(text.as_bytes())?;
    println!("manifest: {} lines, round trip exact: {}", text.lines().count(), back == class);
    Ok(())
}
