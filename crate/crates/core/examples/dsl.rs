//! Parsing, printing and compiling function expressions.

use radnorm::dsl::GRAMMAR;
use radnorm::{compile, parse, print, DiscPoint};

fn main() {
    println!("{GRAMMAR}");
    for src in ["z^2 + 3 (z - 1)", "2 K(0.5, 1.5) - U(1e-3; 2, 1.25; 0.4)", "z +", "K(1.5, 2)", "z^99999"] {
        match parse(src) {
            Ok(e) => {
                let f = compile(src).unwrap();
                let z = DiscPoint::from_polar(0.5, 0.3).unwrap();
                println!("{src:<40} -> {:<44} f(0.5 e^0.3i) = {:.6}", print(&e), f.evaluate(&z));
            }
            Err(err) => println!("{src:<40} -> error at byte {}: {err}", err.offset()),
        }
    }
}
