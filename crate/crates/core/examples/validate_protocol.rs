//! Parse a protocol from text, list validation problems, then dump a builtin
//! in canonical form.

use std::collections::BTreeMap;

use scoutgrid::protocol::{builtin, parse_draft, parse_protocol, validate};

const BROKEN: &str = "\
dim 1
scouts 2
states walk wait
init 1 walk
init 2 wait
trans walk * -> 1/2 walk (+1) | 1/4 walk (-1)
trans wait {walk} -> 1 wait (0)
";

fn main() {
    let report = validate(&parse_draft(BROKEN).expect("draft parses"));
    println!("broken protocol: {} violation(s)", report.violations.len());
    for v in &report.violations {
        println!("  {v}");
    }

    let mut params = BTreeMap::new();
    params.insert("d".to_string(), "2".to_string());
    let p = builtin("anchored_geometric", &params).expect("builtin");
    let text = p.to_canonical_string();
    let again = parse_protocol(&text).expect("canonical text parses");
    assert_eq!(again.content_hash(), p.content_hash());
    println!("\nanchored_geometric d=2, hash {}:\n{text}", p.content_hash());
}
