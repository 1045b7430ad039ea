use damflow::degenerate::{solve_degenerate, w_tilde};
use damflow::flow::{degenerate_potential, potential_setup};
use damflow::lattice::wp_at;
use damflow::mapping::{abel_inverse, q_map, solve_report, SolveOptions};
use damflow::region::RegionSpec;
use damflow::sigma::SeriesTable;
use num_complex::Complex64;
use std::f64::consts::PI;

fn main() {
    let t = SeriesTable::build(60);
    // degenerate case
    let r = RegionSpec::new(PI + 0.5, PI, 0.5, 0.0).unwrap();
    let p = solve_degenerate(&r).unwrap();
    println!("deg params: v- = {}, v+ = {}, x- = {}, x+ = {}", p.im_z_minus(), p.im_z_plus(), p.x_minus, p.x_plus);
    let pot = degenerate_potential(&p, &t).unwrap();
    println!("pot: omega2 = {}, W2' = {}, shift = {}", pot.hp.omega, pot.hp.im_omega_prime(), pot.shift);
    let h2 = pot.hp.im_omega_prime();
    let c = 0.02 * h2;
    let n = 50;
    for i in 0..n {
        let re_u = -pot.hp.omega + pot.hp.omega * i as f64 / (n - 1) as f64;
        let u = Complex64::new(re_u, c);
        let x = wp_at(u, pot.inv, &pot.hp, &t).unwrap() + pot.shift;
        let w = w_tilde(x, &p, &r);
        if i < 3 || i > n - 4 || w.is_err() || { let w = w.clone().unwrap(); r.excursion(w) > 1e-5 } {
            println!("i={i} u=({:.4},{:.4}) x=({:.6},{:.3e}) w={:?} exc={:?}", u.re, u.im, x.re, x.im, w, w.clone().map(|w| r.excursion(w)));
        }
    }

    // elliptic boundary line c=0
    let r = RegionSpec::new(PI + 0.5, PI, 0.5, 0.2).unwrap();
    let report = solve_report(&r, &SolveOptions::default(), &t).unwrap();
    let pot = potential_setup(&report.params, &report.lattice, &t).unwrap();
    println!("elliptic pot: omega2 = {}, W2' = {}", pot.hp.omega, pot.hp.im_omega_prime());
    let n = 400;
    let mut nerr = 0;
    for i in 0..n {
        let re_u = -pot.hp.omega + pot.hp.omega * i as f64 / (n - 1) as f64;
        let u = Complex64::new(re_u, 0.0);
        let x = wp_at(u, pot.inv, &pot.hp, &t);
        let x = match x { Ok(v) => Complex64::new(v.re + pot.shift, 0.0), Err(e) => { println!("i={i} wp2 err {e}"); nerr+=1; if nerr > 5 { break } continue } };
        let z = abel_inverse(x, &report.lattice, &t);
        let z = match z { Ok(v) => v, Err(e) => { println!("i={i} x=({:.6}) abel err {e}", x.re); nerr+=1; if nerr>5 {break} continue } };
        let w = q_map(z, &report.params, &r, &report.lattice, &t);
        match w {
            Ok(w) => if r.excursion(w) > 1e-5 { println!("i={i} x={:.5} z=({:.5},{:.5}) w=({:.5},{:.5}) exc={:.2e}", x.re, z.re, z.im, w.re, w.im, r.excursion(w)); nerr+=1; if nerr>5 {break} },
            Err(e) => { println!("i={i} x={:.6} z=({:.6},{:.6}) qmap err {e}", x.re, z.re, z.im); nerr+=1; if nerr>5 {break} }
        }
    }
    println!("done");
}
