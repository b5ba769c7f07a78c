//! Tour of the simplex geometry: closure, perturbation, powering, the
//! Aitchison inner product, and the clr/ilr transforms.
//!
//! Run with: cargo run --example aitchison_geometry

use reyes::geometry::{closure, ilr_inverse, Composition, ContrastMatrix, ContrastScheme};

fn main() -> reyes::Result<()> {
    // closure rescales positive parts to a constant sum, keeping ratios
    let x = closure(&[30.0, 50.0, 20.0], 1.0)?;
    println!("closed:        {:?}", x.parts());

    // perturbation and powering are the simplex analogues of + and *
    let y = Composition::new(&[0.25, 0.25, 0.5])?;
    println!("x (+) y:       {:?}", x.perturb(&y)?.parts());
    println!("x (-) y:       {:?}", x.perturb_inverse(&y)?.parts());
    println!("2 (.) x:       {:?}", x.power(2.0)?.parts());

    // the inner product sees only log-ratios; the neutral element is
    // orthogonal to everything
    let neutral = Composition::neutral(3);
    println!("<x, y>_a:      {:.6}", x.aitchison_inner(&y)?);
    println!("<1, y>_a:      {:.6}", neutral.aitchison_inner(&y)?);
    println!("||x||_a:       {:.6}", x.aitchison_norm());

    // clr maps to the zero-sum hyperplane; ilr to orthonormal coordinates
    let clr = x.clr();
    println!("clr(x):        {clr:?}  (sums to {:.2e})", clr.iter().sum::<f64>());

    let psi = ContrastMatrix::new(3, ContrastScheme::HelmertLike)?;
    let coords = x.ilr(&psi)?;
    let back = ilr_inverse(&coords, &psi)?;
    println!("ilr(x):        {coords:?}");
    println!("ilr round trip {:?}", back.parts());

    // the coordinates preserve the inner product regardless of the basis
    let pivot = ContrastMatrix::new(3, ContrastScheme::Pivot)?;
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(p, q)| p * q).sum() };
    println!(
        "isometry:      helmert {:.10}, pivot {:.10}, direct {:.10}",
        dot(&x.ilr(&psi)?, &y.ilr(&psi)?),
        dot(&x.ilr(&pivot)?, &y.ilr(&pivot)?),
        x.aitchison_inner(&y)?
    );
    Ok(())
}
