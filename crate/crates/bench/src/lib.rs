//! Fixed inputs for the benchmarks in `benches/`.

use kisinram::corpus;
use kisinram::KisinModule;

/// Curated modules covering rank one to three, gluings and a non-prime field.
pub const FIXTURES: [&str; 5] =
    ["r2-p3-e2-jordan", "r2-p3-e3-glued", "r3-p3-e3-lower", "r3-p3-e2-mixed-heights", "r2-f9-e2-jordan"];

/// Mixed-side fixtures; `p` divides `e` for each of these.
pub const MIXED_FIXTURES: [&str; 2] = ["r2-p3-e3-diag", "r2-p3-e6-jordan"];

pub fn fixture(name: &str) -> KisinModule {
    corpus::curated()
        .into_iter()
        .find(|i| i.name == name)
        .unwrap_or_else(|| panic!("no curated instance named {name}"))
        .module
}
