//! The countable-Lebesgue signature of an affine Furstenberg system:
//! vanishing correlations, flat density, bounded partial norm, positive
//! Toeplitz kernel.
//!
//! ```bash
//! cargo run --release -p paraspec --example furstenberg_spectrum
//! ```

use num_complex::Complex64;
use paraspec::grid::{correlation_map, CharacterSystem};
use paraspec::spectral::{bochner_check, l2_partial_norm, spectral_density, Window};
use paraspec::torus::{FourierObservable, FurstenbergSpec, GOLDEN_ROTATION};

fn main() {
    let spec = FurstenbergSpec::dim2(GOLDEN_ROTATION, 1, FourierObservable::zero(1), 1).unwrap();
    let sys = CharacterSystem::Furstenberg(spec);
    let psi = FourierObservable::constant(1, Complex64::new(1.0, 0.0));

    let series = correlation_map(&sys, &psi, 1024, 14, 2).unwrap();
    println!("c_0 = {} (norm of psi squared)", series.c0());
    let max_tail = series.values[1..]
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    println!("max |c_n| for 1 <= n <= 1024: {max_tail:.2e}");

    let pn = l2_partial_norm(&series);
    println!("partial-norm verdict: {:?}", pn.verdict);
    println!("decade increments: {:?}", pn.decade_increments);

    let density = spectral_density(&series, Window::Hann, 4).unwrap();
    println!(
        "density: mass = {:.6} (c0 check), ripple = {:.2e}, min = {:.2e}",
        density.mass, density.ripple, density.min_raw
    );

    let min_eig = bochner_check(&series, 128);
    println!("Toeplitz (m = 128) minimum eigenvalue: {min_eig:.3e}");

    // The pure-point control for contrast.
    let control = CharacterSystem::ControlRotation {
        rotation: GOLDEN_ROTATION,
    };
    let psi1 = FourierObservable::character(1, vec![1]);
    let ctrl = correlation_map(&control, &psi1, 1024, 12, 2).unwrap();
    let pn_ctrl = l2_partial_norm(&ctrl);
    println!(
        "\nrotation control: |c_1024| = {:.12}, verdict {:?}",
        ctrl.values[1024].norm(),
        pn_ctrl.verdict
    );
}
