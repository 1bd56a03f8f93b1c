//! Association probabilities and per-BS loads, both combination modes, and
//! how the macro share moves with the bias ratio.

use mcp_hetnet::association::{assoc_report, AssocMode};
use mcp_hetnet::NetworkParams;

fn main() -> mcp_hetnet::Result<()> {
    let p = NetworkParams::baseline();
    for mode in [AssocMode::PaperFaithful, AssocMode::Consistent] {
        let a = assoc_report(&p, mode)?;
        println!(
            "{mode:<15} A_m = {:.4}  A_s = {:.4}  sum = {:.4}  loads {:.2} / {:.2} users per BS ({})",
            a.a_macro,
            a.a_small,
            a.sum(),
            a.load_macro,
            a.load_small,
            a.closure
        );
    }

    println!("\nbias ratio  A_m (consistent)");
    for ratio in [0.1, 0.3, 1.0, 3.0, 10.0] {
        let q = NetworkParams { b_macro: ratio, ..p };
        println!("{ratio:>10}  {:.4}", assoc_report(&q, AssocMode::Consistent)?.a_macro);
    }
    Ok(())
}
