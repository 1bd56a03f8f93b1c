//! Monte Carlo association and rate next to the analytical values, and the
//! clustered deployment against independent small cells.

use mcp_hetnet::association::{assoc_report, AssocMode};
use mcp_hetnet::montecarlo::{association_from_records, rate_from_records, run_all, SimConfig, SmallLayout};
use mcp_hetnet::rate::rate_assembled;
use mcp_hetnet::NetworkParams;

fn main() -> mcp_hetnet::Result<()> {
    let reps = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2000);
    let p = NetworkParams {
        c_bar: 10.0,
        ..NetworkParams::baseline()
    };
    let sim = SimConfig::for_params(&p, reps, 42);
    println!(
        "window half-width {} m, guard {} m, {} replications",
        sim.window_half_width, sim.guard_width, reps
    );

    let records = run_all(&p, &sim)?;
    let (am, as_) = association_from_records(&records, sim.master_seed)?;
    let rate = rate_from_records(&records, sim.master_seed)?;
    let consistent = assoc_report(&p, AssocMode::Consistent)?;
    println!(
        "A_s  simulated {:.4} ± {:.4}, analytical {:.4}",
        as_.mean, as_.stderr, consistent.a_small
    );
    println!(
        "A_m  simulated {:.4} ± {:.4}, analytical {:.4}",
        am.mean, am.stderr, consistent.a_macro
    );
    println!(
        "rate simulated {:.4} ± {:.4}, analytical {:.4}",
        rate.mean,
        rate.stderr,
        rate_assembled(&p)?.rate_total
    );

    let ppp = SimConfig {
        small_layout: SmallLayout::IndependentPpp,
        ..sim
    };
    let base = rate_from_records(&run_all(&p, &ppp)?, ppp.master_seed)?;
    println!(
        "independent small cells, uniform user: {:.4} ± {:.4}",
        base.mean, base.stderr
    );
    Ok(())
}
