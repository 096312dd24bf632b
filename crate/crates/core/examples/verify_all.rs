//! Runs every property suite and prints one line per check.

use fio_butterfly::verify::{run_suite, Suite};

fn main() -> fio_butterfly::Result<()> {
    let mut ok = true;
    for suite in Suite::ALL {
        let report = run_suite(suite)?;
        print!("{report}");
        ok &= report.passed();
    }
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}
