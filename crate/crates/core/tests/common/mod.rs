#![allow(dead_code)]

/// Composite Simpson rule with `n` (even) panels on `[a, b]`.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let x = a + k as f64 * h;
        s += if k % 2 == 1 { 4.0 * f(x) } else { 2.0 * f(x) };
    }
    s * h / 3.0
}

/// Simpson on each piece between consecutive sorted `breaks`, so kinks at
/// the breakpoints do not spoil the order.
pub fn simpson_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], n: usize) -> f64 {
    breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| simpson(&f, w[0], w[1], n))
        .sum()
}

/// Breakpoints `lo, positions..., hi` (positions deduplicated).
pub fn breaks(lo: f64, positions: &[f64], hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    for &x in positions {
        if x > *b.last().unwrap() {
            b.push(x);
        }
    }
    b.push(hi);
    b
}

/// Classical RK4 with `n` substeps, used as a high-accuracy reference.
pub fn rk4<F: Fn(&[f64]) -> Vec<f64>>(f: F, y0: &[f64], t: f64, n: usize) -> Vec<f64> {
    let h = t / n as f64;
    let mut y = y0.to_vec();
    let axpy = |y: &[f64], k: &[f64], s: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    for _ in 0..n {
        let k1 = f(&y);
        let k2 = f(&axpy(&y, &k1, h / 2.0));
        let k3 = f(&axpy(&y, &k2, h / 2.0));
        let k4 = f(&axpy(&y, &k3, h));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
