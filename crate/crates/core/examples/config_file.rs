//! Params files: parse, override, convert, render.

use mcp_hetnet::Config;

const TEXT: &str = "\
# macro tier 10 dB louder in association
b_macro_db = 10
c_bar = 6
cluster_radius_m = 80
";

fn main() -> mcp_hetnet::Result<()> {
    let mut cfg = Config::parse(TEXT)?;
    cfg.set("lambda_u", "2e-4")?;
    let p = cfg.to_params()?;
    println!(
        "P_m = {:.2} W, B_m = {}, lambda_s = {:.3e} per m^2",
        p.p_macro,
        p.b_macro,
        p.lambda_s()
    );
    print!("{}", cfg.render());

    match Config::parse("c_bar = 4\nradius = 3\n") {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
