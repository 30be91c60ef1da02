//! Meeting renewals of two scouts: gap bound, Markov homogeneity, traps,
//! explorer cover times and the gap tail.

use scoutgrid::protocol::{anchored_geometric, independent_walks};
use scoutgrid::renewal::{explorer_cover_time, extract_renewal, homogeneity_test, meeting_tail, trap_detect};
use scoutgrid::scalar::Scalar;
use scoutgrid::sim::run;
use scoutgrid::stream::SeedSpec;

fn main() {
    let anchored = anchored_geometric(1, &Scalar::ratio(1, 2)).expect("anchored");
    let renewals: Vec<_> =
        (0..300).map(|r| extract_renewal(&run(&anchored, 2_000, SeedSpec::new(5, r)).expect("trace")).expect("gap bound")).collect();
    let first = &renewals[0];
    println!("trace 0: {} meetings, first gaps {:?}", first.entries.len(), first.entries.iter().take(6).map(|e| e.r).collect::<Vec<_>>());

    let h = homogeneity_test(&renewals, None, 0.01);
    println!("homogeneity split at k={}: chi² {:.2} on {} dof, p={:.3}", h.split, h.statistic, h.dof, h.p_value);

    let ys: Vec<_> = first.entries.iter().map(|e| e.y).collect();
    let trap = trap_detect(&ys, None, 0.5);
    println!("trap on meeting points: found={} radius={:?}", trap.found, trap.radius);
    for x in [3, -6, 12] {
        println!("explorer covers {x:>3} at meeting index {:?}", explorer_cover_time(first, [x, 0]));
    }

    let walkers = independent_walks(1, 2).expect("walkers");
    for (name, p) in [("anchored", &anchored), ("independent", &walkers)] {
        let tail = meeting_tail(p, 1..=20, 1_000, 1 << 16, 9).expect("tail");
        let r2 = tail.fit.as_ref().map_or(f64::NAN, |f| f.r_squared);
        println!("{name}: gap tail {} (R² {r2:.3}, {} gaps, {} censored)", tail.verdict, tail.gaps, tail.censored_gaps);
    }
}
