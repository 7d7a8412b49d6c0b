use cutdg::assembly1d::*;
use cutdg::basis::{gauss_rule, IntervalBasis};
use cutdg::geometry1d::*;
use std::f64::consts::PI;

fn main() {
    let tpi = 2.0 * PI;
    let (n, r) = (40usize, 2usize);
    let xg = 1e-4;
    let mesh = build_mesh(-1.0, 1.0, n).unwrap();
    let (t1, t2) = classify(&mesh, xg).unwrap();
    let basis = IntervalBasis::new(r);
    let h = mesh.h();
    let f = |x: f64| 2.0 * (2.0 * tpi * (x - xg / 2.0)).sin();

    // Plain full-element projections of side-2 f on elements 20, 21.
    let mut proj = |elem: usize| -> Vec<f64> {
        let ext = mesh.element_extent(elem);
        let rule = gauss_rule(r + 4, ext).unwrap();
        let mut c = vec![0.0; r + 1];
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let phi = basis.eval(ext, x, 0).unwrap();
            for k in 0..=r { c[k] += w * f(x) * phi[k]; }
        }
        c
    };
    let c20 = proj(20);
    let c21 = proj(21);

    // Hand-computed J1 = sum_k w_k h^{2k+1} [d^k u]^2 at the face x = 0.05.
    let omegas = standard_omegas(r);
    let xf = mesh.nodes[21];
    let mut j1_hand = 0.0;
    for k in 0..=r {
        let dl = basis.eval(mesh.element_extent(20), xf, k).unwrap();
        let dr = basis.eval(mesh.element_extent(21), xf, k).unwrap();
        let vl: f64 = dl.iter().zip(&c20).map(|(p, c)| p * c).sum();
        let vr: f64 = dr.iter().zip(&c21).map(|(p, c)| p * c).sum();
        let jump = vr - vl;
        println!("k={k}: jump = {:.4e}, term = {:.4e}", jump, omegas[k] * h.powi(2 * k as i32 + 1) * jump * jump);
        j1_hand += omegas[k] * h.powi(2 * k as i32 + 1) * jump * jump;
    }
    // Assembled J1 on the same pair.
    let j1 = ghost_penalty(&mesh, (&t1, &t2), &basis, 1, 1);
    let dof_map = DofMap::new(&t1, &t2, r + 1, 1);
    let mut u = vec![0.0; dof_map.n_dofs()];
    for k in 0..=r {
        u[dof_map.global(Side::Two, 20, k, 0)] = c20[k];
        u[dof_map.global(Side::Two, 21, k, 0)] = c21[k];
    }
    // also fill side-1 pair to see its face contribution separately = 0 here
    let j1_val = j1.bilinear(&u, &u);
    println!("J1 hand = {:.5e}, assembled (side-2 face only since side-1 dofs are 0... plus face at x=0 uses elems 19,20 side ONE) = {:.5e}", j1_hand, j1_val);

    // element L2 error^2 of the plain projection on element 21:
    let ext = mesh.element_extent(21);
    let rule = gauss_rule(r + 4, ext).unwrap();
    let mut e2 = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let phi = basis.eval(ext, x, 0).unwrap();
        let v: f64 = phi.iter().zip(&c21).map(|(p, c)| p * c).sum();
        e2 += w * (v - f(x)) * (v - f(x));
    }
    println!("plain projection err^2 on elem 21 = {:.4e}", e2);
    println!("gamma_M * J1_hand = {:.4e}  (tilt scale vs err^2)", 0.25 * j1_hand);
}
