//! Run three independent walkers for a few steps and print the trace.

use scoutgrid::protocol::independent_walks;
use scoutgrid::sim::run;
use scoutgrid::stream::SeedSpec;

fn main() {
    let p = independent_walks(2, 3).expect("protocol");
    let t = run(&p, 12, SeedSpec::new(42, 0)).expect("trace");
    print!("{}", t.to_csv(&p));

    // same seed, same trace
    let again = run(&p, 12, SeedSpec::new(42, 0)).expect("trace");
    assert_eq!(t.path(0), again.path(0));
    println!("scout 1 ends at {:?}", t.positions_at(t.len() - 1)[0]);
}
