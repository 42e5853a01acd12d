use expanders::profile::{line_profile, residual_selfexpander_with};

fn main() {
    let line = line_profile(0.3, 6.0, 1e-2).unwrap();
    for na in [64usize, 256, 1024, 4096, 8192] {
        let r = residual_selfexpander_with(&line, na).unwrap();
        println!("n_alpha {na}: residual {r:.3e}");
    }
    // where is it? recompute with per-sample印 via a quick local copy is overkill;
    // instead probe different angles
    for phi in [0.0f64, 0.3, 1.0, std::f64::consts::FRAC_PI_2] {
        let l = line_profile(phi, 6.0, 1e-2).unwrap();
        let r = residual_selfexpander_with(&l, 4096).unwrap();
        println!("phi {phi}: residual {r:.3e}");
    }
}
