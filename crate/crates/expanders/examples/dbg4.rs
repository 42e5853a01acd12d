use expanders::density::*;
use expanders::profile::line_profile;
use expanders::c2::C2;

fn main() {
    let line = line_profile(0.4, 6.0, 1e-2).unwrap();
    let first = line.samples().first().unwrap();
    let last = line.samples().last().unwrap();
    println!("ends: r_first={} r_last={} n={}", first.r, last.r, line.len());
    let tau = 1.0;
    // exact truncated integral of the double-covered line: 2*(1 - e^{-S^2/4tau})
    let s_end = last.r;
    let exact_trunc = 2.0 * (1.0 - (-s_end * s_end / (4.0 * tau)).exp());
    println!("exact trunc (if symmetric ends) = {exact_trunc:.12}");
    let exact_tail = 2.0 * (-s_end * s_end / (4.0 * tau)).exp();
    println!("exact tails = {exact_tail:.12}");
    let surf = SurfaceMeasure::from_curve(line.clone());
    let q = DensityQuery::new(C2::ZERO, tau).unwrap();
    println!("surface_density = {:.12}", surface_density(&surf, &q).unwrap());
    // vary n_alpha to see alpha contribution
    if let SurfaceMeasure::Equivariant { curves, .. } = surf {
        for na in [64usize, 256, 1024] {
            let s2 = SurfaceMeasure::Equivariant { curves: curves.clone(), n_alpha: na };
            println!("n_alpha {na}: {:.12}", surface_density(&s2, &q).unwrap());
        }
    }
}
