use cutdg::harness::*;
fn main() {
    // Table-1-style check at r=1: expect errors ~2.64e-1 (N=20) .. 5.40e-4 (N=320)
    for n in [20usize, 40, 80] {
        let rep = run_stationary_accuracy(n, 1, (0.1, -0.9));
        println!("r=1 N={n}: L2={:.4e} Linf={:.4e} wall={:.2}s", rep.norms[0].l2, rep.norms[0].linf, rep.wall_seconds);
    }
    for n in [20usize, 40] {
        let rep = run_stationary_accuracy(n, 2, (0.1, -0.9));
        println!("r=2 N={n}: L2={:.4e} Linf={:.4e}", rep.norms[0].l2, rep.norms[0].linf);
    }
    for n in [20usize, 40] {
        let rep = run_stationary_accuracy(n, 3, (0.1, -0.9));
        println!("r=3 N={n}: L2={:.4e} Linf={:.4e}", rep.norms[0].l2, rep.norms[0].linf);
    }
}
