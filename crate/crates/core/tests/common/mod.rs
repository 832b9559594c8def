#![allow(clippy::needless_range_loop)]

use strainlim::material::apply_a;
use strainlim::{MaterialLaw, SymTensor};

/// Damped Newton on the three Mandel components of `T/tau + A(T) = r`,
/// with a central-difference Jacobian.
pub fn newton_oracle(r: &SymTensor, tau: f64, law: &MaterialLaw) -> SymTensor {
    let f = |m: [f64; 3]| {
        let t = SymTensor::from_mandel2(m);
        ((1.0 / tau) * t + apply_a(&t, law) - *r).to_mandel2()
    };
    let norm = |v: [f64; 3]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut x = [0.0; 3];
    let mut fx = f(x);
    for _ in 0..200 {
        if norm(fx) < 1e-14 * (1.0 + r.norm()) {
            break;
        }
        let mut jac = [[0.0; 3]; 3];
        for j in 0..3 {
            let h = 1e-7 * (1.0 + x[j].abs());
            let (mut xp, mut xm) = (x, x);
            xp[j] += h;
            xm[j] -= h;
            let (fp, fm) = (f(xp), f(xm));
            for i in 0..3 {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let dx = solve3(jac, fx.map(|v| -v));
        let mut step = 1.0;
        loop {
            let trial = [x[0] + step * dx[0], x[1] + step * dx[1], x[2] + step * dx[2]];
            let ft = f(trial);
            if norm(ft) < (1.0 - 1e-4 * step) * norm(fx) || step < 1e-10 {
                x = trial;
                fx = ft;
                break;
            }
            step *= 0.5;
        }
    }
    SymTensor::from_mandel2(x)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let m = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= m * a[c][k];
            }
            b[r] -= m * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}
