//! Per-tier and network ergodic rate, with the one-shot cross-check.

use mcp_hetnet::rate::{rate_total, z_factor};
use mcp_hetnet::NetworkParams;

fn main() -> mcp_hetnet::Result<()> {
    println!("Z(gamma, 4, 1) vs sqrt(gamma) atan(sqrt(gamma))");
    for g in [0.1f64, 1.0, 25.0] {
        println!(
            "  {g:>5}: {:.10} {:.10}",
            z_factor(g, 4.0, 1.0)?,
            g.sqrt() * g.sqrt().atan()
        );
    }

    for c in [2.0, 4.0, 8.0] {
        let p = NetworkParams {
            c_bar: c,
            ..NetworkParams::baseline()
        };
        let r = rate_total(&p)?;
        let x = r.cross_check.expect("filled by rate_total");
        println!(
            "c = {c}: macro {:.4}  small {:.4}  network {:.4} nats (one-shot {:.4}, as typeset {:.4})",
            r.rate_macro, r.rate_small, r.rate_total, x.direct, x.direct_as_printed
        );
    }
    Ok(())
}
