//! Writes the bundled contaminated demo: Pareto(1, 2), n = 500, top 15 exponentiated with L = 3.
//!
//! cargo run -p trimhill --example make_demo > data/demo_contaminated.csv

use std::io::{self, Write};

use trimhill::{inject, sample, ModelSpec, OutlierSpec};

const SEED: u64 = 0;

fn main() -> io::Result<()> {
    let s = sample(
        &ModelSpec::Pareto {
            sigma: 1.0,
            xi: 2.0,
        },
        500,
        SEED,
    )
    .expect("valid model");
    let s = inject(&s, &OutlierSpec::Exponentiated { k0: 15, power: 3.0 })
        .expect("valid outliers")
        .sample;
    let mut out = io::stdout().lock();
    writeln!(out, "x")?;
    for v in s.values() {
        writeln!(out, "{v}")?;
    }
    Ok(())
}
