//! Contact and serving distance laws, checked against samplers.

use mcp_hetnet::association::ServingDistance;
use mcp_hetnet::distributions::{ccdf_dm_conditional, ccdf_dm_truncated, ContactLaw};
use mcp_hetnet::montecarlo::{empirical_ccdf, sample_dm_conditional, sample_intracluster_min, sample_ppp_contact};
use mcp_hetnet::{NetworkParams, Tier};

fn main() -> mcp_hetnet::Result<()> {
    let p = NetworkParams::baseline();
    let n = 50_000;

    let ppp = ContactLaw::ppp(p.lambda_m);
    let ks = empirical_ccdf(&sample_ppp_contact(p.lambda_m, n, 1))?.ks_distance(|r| ppp.cdf(r));
    println!("macro contact distance          KS = {ks:.4}");

    let dm = empirical_ccdf(&sample_dm_conditional(&p, n, 2))?;
    println!(
        "conditional macro distance      KS = {:.4} (truncated contact law {:.4})",
        dm.ks_distance(|r| 1.0 - ccdf_dm_conditional(r, &p)),
        dm.ks_distance(|r| 1.0 - ccdf_dm_truncated(r, &p)),
    );

    for c in [1usize, 4] {
        let law = ContactLaw::intra_cluster(c as f64, p.cluster_radius)?;
        let ks = empirical_ccdf(&sample_intracluster_min(c, p.cluster_radius, n, 3))?.ks_distance(|r| law.cdf(r));
        println!("nearest own-cluster SBS, c = {c}  KS = {ks:.4}");
    }

    println!("\n   x [m]   f_Xm(x)      f_Xs(x)");
    let xm = ServingDistance::new(Tier::Macro, &p)?;
    let xs = ServingDistance::new(Tier::Small, &p)?;
    for x in [5.0, 25.0, 50.0, 75.0, 100.0, 150.0] {
        println!("{x:>8.1}   {:.4e}   {:.4e}", xm.pdf(x), xs.pdf(x));
    }
    Ok(())
}
