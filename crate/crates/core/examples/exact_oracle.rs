//! Exact event probabilities from dynamic programming, next to Monte Carlo.

use scoutgrid::scalar::rational_to_f64;
use scoutgrid::walks::{estimate_event, exact_dp_oracle, Event, LookAroundWalk, StepLaw, Target};

fn main() {
    let w = LookAroundWalk::new(StepLaw::srw(), 0.0);
    let events = [
        ("tau_1 > 9", Event::NotHitBy { target: Target::Visit(1.0), n: 9 }),
        ("S_6 = 2", Event::PositionAt { n: 6, y: 2.0 }),
        ("no meeting by 10 from 4", Event::NoMeetingBy { other: StepLaw::srw(), other_start: 4.0, n: 10 }),
    ];
    for (name, ev) in &events {
        let p = exact_dp_oracle(&w, ev).expect("oracle");
        let mc = estimate_event(&w, ev, 200_000, 3);
        println!("{name:24} exact {p} = {:.5}, simulated {:.5}", rational_to_f64(&p), mc.frequency);
    }
}
