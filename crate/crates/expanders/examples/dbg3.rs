use expanders::linop::*;

fn main() {
    for h in [0.08, 0.04, 0.02, 0.01] {
        let g = OperatorGrid::flat_plane(0, h, 6.0).unwrap();
        println!("flat k=0 h={h}: sigma = {:.6}", smallest_singular_value(&g).unwrap());
    }
    for k in [0u32, 1, 2, 3, 4] {
        let g = OperatorGrid::flat_plane(k, 0.02, 6.0).unwrap();
        println!("mode {k}: sigma {:.6}", smallest_singular_value(&g).unwrap());
    }
}
