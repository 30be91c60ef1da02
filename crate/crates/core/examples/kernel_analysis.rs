//! Structural analysis of single-scout automata: classes, exact drift,
//! degeneracy and rays.

use scoutgrid::automaton::{analyze, reduce_kernel};
use scoutgrid::protocol::parse_protocol;
use scoutgrid::stream::SeedSpec;

const LAZY_RIGHT: &str = "\
dim 2
scouts 1
states go rest
init 1 go
trans go * -> 2/3 go (1,0) | 1/3 rest (0,1)
trans rest * -> 1/2 go (0,0) | 1/2 rest (-1,0)
";

const SHUTTLE: &str = "\
dim 1
scouts 1
states a b
init 1 a
trans a * -> 1 b (+1)
trans b * -> 1 a (-1)
";

fn main() {
    for (name, text) in [("lazy right", LAZY_RIGHT), ("shuttle", SHUTTLE)] {
        let p = parse_protocol(text).expect("protocol");
        let k = reduce_kernel(&p, 0).expect("kernel");
        let report = analyze(&k, SeedSpec::new(1, 0)).expect("analysis");
        println!("{name}:");
        for c in &report.classes {
            let Some(a) = &c.analysis else { continue };
            println!("  class {:?}: stationary {:?}, drift {:?}", c.states, a.stationary, a.drift);
            println!("  degenerate {} offsets {:?}", a.degeneracy.degenerate, a.degeneracy.offsets);
            if let Some(r) = &a.ray {
                println!("  ray {:?} width {:.1} (estimate: {})", r.direction, r.width, r.width_is_estimate);
            }
        }
    }
}
