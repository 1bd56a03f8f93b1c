//! The adaptive Gauss-Kronrod integrator on its own.

use mcp_hetnet::numerics::{integrate_adaptive, integrate_semi_infinite, QuadSpec};

fn main() -> mcp_hetnet::Result<()> {
    let spec = QuadSpec::default();
    let r = integrate_adaptive(|x| 1.0 / x.sqrt(), 0.0, 1.0, &spec)?;
    println!(
        "int_0^1 x^-1/2 dx = {:.12} (error {:.1e}, {} panels)",
        r.value, r.abs_error, r.subdivisions
    );
    let v = integrate_semi_infinite(|u| 1.0 / (1.0 + u * u), 0.0, &spec)?;
    println!(
        "int_0^inf du/(1+u^2) = {v:.12}, pi/2 = {:.12}",
        std::f64::consts::FRAC_PI_2
    );

    let tight = QuadSpec {
        max_subdivisions: 3,
        ..spec
    };
    if let Err(e) = integrate_adaptive(|x| (1.0 / x).sin(), 1e-6, 1.0, &tight) {
        println!("budget of 3 panels: {e}");
    }
    Ok(())
}
