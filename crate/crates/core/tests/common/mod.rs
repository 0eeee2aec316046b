#![allow(dead_code)]

//! Independent reference computations used only by the test suites.

/// Eigenvalue `-E_j` of `-φ'' + Vφ = λφ`, `φ(0) = φ(r_max) = 0`, by
/// second-order finite-difference shooting with bisection on `E`, then
/// Richardson extrapolation over two grid spacings.
pub fn shooting_eigenvalue(v: impl Fn(f64) -> f64 + Copy, r_max: f64, j: usize, h: f64) -> f64 {
    let coarse = shooting_fd(v, r_max, j, h);
    let fine = shooting_fd(v, r_max, j, 0.5 * h);
    (4.0 * fine - coarse) / 3.0
}

fn shooting_fd(v: impl Fn(f64) -> f64, r_max: f64, j: usize, h: f64) -> f64 {
    let n = (r_max / h).round() as usize;
    let h = r_max / n as f64;
    let pot: Vec<f64> = (0..=n).map(|i| v(i as f64 * h)).collect();
    // Sign changes of the shooting solution on (0, r_max], counting a
    // sign flip at the final node as a zero.
    let zeros = |e: f64| -> usize {
        let (mut prev, mut cur) = (0.0f64, h);
        let mut count = 0;
        for i in 1..n {
            let next = (2.0 + h * h * (pot[i] + e)) * cur - prev;
            if next.signum() != cur.signum() {
                count += 1;
            }
            prev = cur;
            cur = next;
            if cur.abs() > 1e250 {
                prev *= 1e-250;
                cur *= 1e-250;
            }
        }
        count
    };
    // zeros(E) > j  <=>  E < E_j
    let (mut lo, mut hi) = (1e-12, 1.0);
    while zeros(hi) > j {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if zeros(mid) > j {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    -0.5 * (lo + hi)
}

/// `V(r) = e^{-r}/2 - (1 - e^{-r})/r`, evaluated without library code.
pub fn smoothed_v(r: f64) -> f64 {
    if r < 1e-4 {
        -0.5 + r * r / 12.0
    } else {
        0.5 * (-r).exp() - (1.0 - (-r).exp()) / r
    }
}
