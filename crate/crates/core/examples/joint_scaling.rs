//! Association depends on macro density and cluster radius only through
//! lambda_m R^2.

use mcp_hetnet::association::{assoc_report, AssocMode};
use mcp_hetnet::NetworkParams;

fn main() -> mcp_hetnet::Result<()> {
    let p = NetworkParams::baseline();
    println!("       lambda_m      R [m]   pi lambda_m R^2    A_m          A_s");
    for k in [0.5, 1.0, 2.0, 10.0] {
        let q = NetworkParams {
            lambda_m: k * k * p.lambda_m,
            cluster_radius: p.cluster_radius / k,
            ..p
        };
        let a = assoc_report(&q, AssocMode::PaperFaithful)?;
        println!(
            "{:>14.4e} {:>10.2} {:>17.6} {:.10} {:.10}",
            q.lambda_m,
            q.cluster_radius,
            q.disk_load(),
            a.a_macro,
            a.a_small
        );
    }
    Ok(())
}
