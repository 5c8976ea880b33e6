/// One classical fourth-order Runge-Kutta step for an autonomous system.
pub(crate) fn rk4_step<const N: usize, F>(state: [f64; N], h: f64, f: F) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let offset = |base: &[f64; N], k: &[f64; N], scale: f64| {
        let mut out = *base;
        for (o, d) in out.iter_mut().zip(k) {
            *o += scale * d;
        }
        out
    };

    let k1 = f(&state);
    let k2 = f(&offset(&state, &k1, 0.5 * h));
    let k3 = f(&offset(&state, &k2, 0.5 * h));
    let k4 = f(&offset(&state, &k3, h));

    let mut next = state;
    for i in 0..N {
        next[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    next
}
