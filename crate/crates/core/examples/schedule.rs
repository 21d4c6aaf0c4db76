//! The counterexample schedule and where it stops fitting in a double.

use radnorm::{build_schedule, ExponentPair};

fn main() -> radnorm::Result<()> {
    let e = ExponentPair::new(2.0, 1.25)?;
    let s = build_schedule(e, 5)?;
    for n in 1..=s.len() {
        let a = s.region(n)?;
        let (lo, hi) = a.x_bounds();
        println!(
            "n={n}  log10 delta {:>12.4}  theta {:.6}  1-r in [{lo:.3e}, {hi:.3e}]  half-width {:.3e}",
            s.ln_delta(n)? / std::f64::consts::LN_10,
            s.theta(n)?,
            a.half_width()
        );
    }
    match build_schedule(e, 7) {
        Ok(_) => println!("m = 7 fits"),
        Err(err) => println!("m = 7: {err}"),
    }
    println!("{}", serde_json::to_string_pretty(&s.to_document()).unwrap());
    Ok(())
}
