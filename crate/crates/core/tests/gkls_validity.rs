mod common;

use common::{grid_minimum_2d, multistart_2d};
use lipgo::gkls::{generate_function, GklsClassSpec, Preset};

fn four_minima(preset: Preset) -> GklsClassSpec {
    GklsClassSpec::preset(2, preset, 2024).unwrap().with_minima(4).unwrap()
}

#[test]
fn multistart_finds_exactly_the_recorded_minima() {
    for preset in [Preset::Simple, Preset::Hard] {
        for index in [1, 7, 50] {
            let f = generate_function(&four_minima(preset), index).unwrap();
            let ms = multistart_2d(&f, 200, 1e-3);
            assert!(ms.strays.is_empty(), "{preset} #{index}: stray end {:?}", ms.strays.first());
            assert!(ms.hits.iter().all(|&h| h > 0), "{preset} #{index}: hits {:?}", ms.hits);
        }
    }
}

#[test]
fn nothing_below_the_global_value() {
    let spec = four_minima(Preset::Hard);
    for index in 1..=5 {
        let f = generate_function(&spec, index).unwrap();
        assert!(grid_minimum_2d(&f, 500) >= spec.global_value - 1e-9);
    }
}
