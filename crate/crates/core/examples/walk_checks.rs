//! Desk-scale checks of the look-around walk estimates.

use scoutgrid::scalar::Scalar;
use scoutgrid::walks::{check_lemma17, check_lemma50, check_lemma6, check_lemma7, check_prop22, LookAroundWalk, StepLaw};

fn show(r: &scoutgrid::walks::CheckResult) {
    println!("{:8} {:4} {}", r.lemma, r.verdict.to_string(), r.criterion);
}

fn main() {
    let srw = LookAroundWalk::new(StepLaw::srw(), 0.0);
    let drifted = StepLaw::simple(&[(1, Scalar::ratio(2, 3)), (-1, Scalar::ratio(1, 3))]).expect("law");

    show(&check_lemma6(&LookAroundWalk::new(drifted.clone(), 0.0), -20.0, 5_000, 4_000, 1).expect("lemma6"));
    show(&check_lemma7(&srw, 10.0, None, 10_000, 2).expect("lemma7"));
    show(&check_lemma17(&srw, 5.0, 10_000, 1 << 16, 3).expect("lemma17"));
    show(&check_lemma50(&srw, 0.1, 400, 60.0, 20_000, 4).expect("lemma50"));
    let law = StepLaw::srw();
    show(&check_prop22([&law, &law], [20.0, -20.0], (-5.0, 5.0), 5_000, 1 << 16, 5).expect("prop22"));

    match check_lemma6(&srw, -20.0, 100, 100, 6) {
        Err(e) => println!("lemma6 on a driftless walk: {e}"),
        Ok(_) => unreachable!("zero drift violates the precondition"),
    }
}
