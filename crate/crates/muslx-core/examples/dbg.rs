use muslx_core::grid::{Domain, GridFunction};
use muslx_core::operators::{plaplace_flux, ExponentField};
use muslx_core::rng::SampleStream;
use muslx_core::solver::{step_implicit, NewtonParams};

fn main() {
    let dom = Domain::unit_interval(64);
    let flux = plaplace_flux(ExponentField::constant(4.0), 0.0, &dom).unwrap();
    let mut stream = SampleStream::new(77);
    let u_prev = GridFunction::from_values(
        dom,
        (0..dom.node_count()).map(|_| stream.range(-0.3, 0.3)).collect(),
    )
    .unwrap();
    let zero = GridFunction::zeros(dom);
    let params = NewtonParams { tol: 1e-10, max_iter: 50 };
    match step_implicit(&u_prev, 0.3, 1e-2, &flux, &zero, &params) {
        Ok(u) => println!("ok norm {}", u.l2_norm()),
        Err(e) => println!("err {e}"),
    }
}
