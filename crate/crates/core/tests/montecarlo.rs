use mcp_hetnet::distributions::{ccdf_contact_ppp, ccdf_dm_truncated};
use mcp_hetnet::montecarlo::{
    association_from_records, empirical_ccdf, estimate_association, run_all, run_replication, sample_dm_conditional,
    sample_ppp_contact, with_workers, SimConfig,
};
use mcp_hetnet::NetworkParams;

#[test]
fn ppp_contact_sampler_matches_law() {
    let lambda = 1e-4;
    let e = empirical_ccdf(&sample_ppp_contact(lambda, 100_000, 21)).unwrap();
    assert!(e.ks_distance(|r| 1.0 - ccdf_contact_ppp(r, lambda)) < 0.01);
}

#[test]
fn conditional_macro_sampler_matches_truncated_law() {
    let p = NetworkParams {
        lambda_m: 2e-5,
        ..NetworkParams::baseline()
    };
    let e = empirical_ccdf(&sample_dm_conditional(&p, 100_000, 22)).unwrap();
    assert!(e.ks_distance(|r| 1.0 - ccdf_dm_truncated(r, &p)) < 0.01);
}

#[test]
fn records_do_not_depend_on_order_or_workers() {
    let p = NetworkParams::baseline();
    let sim = SimConfig::for_params(&p, 200, 5);
    let one = with_workers(1, || run_all(&p, &sim)).unwrap();
    let many = with_workers(4, || run_all(&p, &sim)).unwrap();
    assert_eq!(one, many);
    for i in (0..200u64).rev().step_by(17) {
        assert_eq!(run_replication(&p, &sim, i).unwrap(), one[i as usize]);
    }
    let mut shuffled = one.clone();
    shuffled.reverse();
    let (a, _) = association_from_records(&one, 5).unwrap();
    let (b, _) = association_from_records(&shuffled, 5).unwrap();
    assert!((a.mean - b.mean).abs() < 1e-15);
}

#[test]
fn guard_region_is_wide_enough() {
    let p = NetworkParams::baseline();
    let sim = SimConfig::for_params(&p, 4000, 9);
    let wide = SimConfig {
        window_half_width: 2.0 * sim.window_half_width,
        guard_width: sim.guard_width + sim.window_half_width,
        ..sim
    };
    let (a, _) = estimate_association(&p, &sim).unwrap();
    let (b, _) = estimate_association(&p, &wide).unwrap();
    assert!(
        (a.mean - b.mean).abs() < 2.0 * a.combined_stderr(&b),
        "{} vs {}",
        a.mean,
        b.mean
    );
}
