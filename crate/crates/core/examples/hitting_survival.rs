//! Hitting-time survival curves and mean verdicts for one walker and for the
//! anchored three-scout protocol on the plane.

use scoutgrid::protocol::{anchored_geometric, srw};
use scoutgrid::renewal::divergence_flag;
use scoutgrid::scalar::Scalar;
use scoutgrid::sim::monte_carlo_hitting_many;

fn main() {
    let walker = srw(1).expect("srw");
    let s = &monte_carlo_hitting_many(&walker, &[[1, 0]], 20_000, 1 << 20, 7)[0];
    let flag = divergence_flag(&s.curve).expect("flag");
    let slope = flag.fit.as_ref().map_or(f64::NAN, |f| f.slope);
    println!("srw, target 1: {:?} (log-log slope {slope:.3}, censored {:.4})", flag.verdict, s.censored_fraction);

    let anchored = anchored_geometric(2, &Scalar::ratio(1, 2)).expect("anchored");
    let targets = [[2, 1], [-3, 0], [0, 4]];
    for s in monte_carlo_hitting_many(&anchored, &targets, 2_000, 1 << 22, 7) {
        let flag = divergence_flag(&s.curve).expect("flag");
        let mean = s.mean.map_or(f64::NAN, |m| m.mean);
        println!("anchored, target {:?}: {:?}, mean {mean:.1}", s.target, flag.verdict);
    }
}
