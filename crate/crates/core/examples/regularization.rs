//! The entropy, its cut-off extension, and the cut-off functions.

use active_doi::regularization::{entropy, Cutoff};

fn main() -> active_doi::Result<()> {
    let cut = Cutoff::new(10.0)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>8} {:>8}", "s", "F", "F^L", "(F^L)''", "Q^L", "Q0^L");
    for s in [0.0, 0.5, 1.0, 5.0, 10.0, 20.0, 50.0] {
        let d2 = if s > 0.0 { format!("{:.6}", cut.entropy_d2(s)?) } else { "-".into() };
        println!(
            "{s:>8.2} {:>12.6} {:>12.6} {d2:>12} {:>8.2} {:>8.2}",
            entropy(s)?,
            cut.entropy(s)?,
            cut.q(s),
            cut.q0(s)
        );
    }
    println!("Q0^L(-3) = {}, Q^L(-3) = {}", cut.q0(-3.0), cut.q(-3.0));
    Ok(())
}
