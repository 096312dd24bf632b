//! Shape of the frequency split and the per-corona traversal schedule.

use fio_butterfly::geometry::{build_corona_decomposition, corona_bounding_tree, level_schedule};

fn main() -> fio_butterfly::Result<()> {
    let (n, s, b) = (512, 5, 8);
    let dec = build_corona_decomposition::<2>(n, s)?;
    println!("N = {n}, s = {s}: center holds {} frequencies", dec.center().len());
    for j in 1..=dec.count() {
        let n_j = dec.scale(j);
        let tree = corona_bounding_tree(j, &dec)?;
        print!("corona {j}: N_j = {n_j:>3}, {:>6} frequencies", dec.corona(j).len());
        match level_schedule(n_j, b) {
            Ok(sch) => {
                let occ = tree.occupancy(sch.start_level_b);
                println!(
                    ", levels {}..{} (switch {}), {}/{} leaf boxes occupied",
                    sch.start_level_b,
                    sch.stop_level_b,
                    sch.switch_level_b,
                    occ.nonempty.len(),
                    occ.side * occ.side
                );
                for lb in sch.levels() {
                    println!(
                        "    level {lb}: w_B = {:>3}, w_A = 1/{:<3} {}",
                        sch.width_b(lb),
                        1.0 / sch.width_a(lb),
                        if sch.is_frequency_side(lb) { "frequency grids" } else { "spatial grids" }
                    );
                }
            }
            Err(e) => println!(", summed directly ({e})"),
        }
    }
    Ok(())
}
