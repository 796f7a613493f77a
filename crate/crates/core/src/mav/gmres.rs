//! Restarted GMRES with right preconditioning.

pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `A x = b` for `x = M^{-1} y`, starting from zero.
pub(crate) fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precondition: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    rtol: f64,
    restart: usize,
    max_restarts: usize,
) -> GmresOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            relative_residual: 0.0,
        };
    }
    let mut iterations = 0;
    let mut rel = 1.0;
    for _ in 0..max_restarts {
        let ax = apply(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let beta = norm(&r);
        rel = beta / bnorm;
        if !rel.is_finite() || rel <= rtol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k_used = 0;
        for k in 0..restart {
            iterations += 1;
            let mut w = apply(&precondition(&basis[k]));
            for (j, v) in basis.iter().enumerate() {
                let hjk = dot(&w, v);
                h[j][k] = hjk;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hjk * vi);
            }
            let wn = norm(&w);
            h[k + 1][k] = wn;
            for j in 0..k {
                let tmp = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = tmp;
            }
            let denom = h[k][k].hypot(h[k + 1][k]);
            if denom == 0.0 {
                k_used = k;
                break;
            }
            cs[k] = h[k][k] / denom;
            sn[k] = h[k + 1][k] / denom;
            h[k][k] = denom;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k_used = k + 1;
            rel = g[k + 1].abs() / bnorm;
            if rel <= rtol || wn == 0.0 || !rel.is_finite() {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        let mut y = vec![0.0; k_used];
        for i in (0..k_used).rev() {
            let s: f64 = (i + 1..k_used).map(|j| h[i][j] * y[j]).sum();
            y[i] = (g[i] - s) / h[i][i];
        }
        let mut z = vec![0.0; n];
        for (yi, v) in y.iter().zip(&basis) {
            z.iter_mut().zip(v).for_each(|(zi, vi)| *zi += yi * vi);
        }
        let dx = precondition(&z);
        x.iter_mut().zip(&dx).for_each(|(xi, di)| *xi += di);
        if rel <= rtol || !rel.is_finite() {
            break;
        }
    }
    let ax = apply(&x);
    let true_rel = norm(
        &b.iter()
            .zip(&ax)
            .map(|(bi, ai)| bi - ai)
            .collect::<Vec<_>>(),
    ) / bnorm;
    GmresOutcome {
        x,
        iterations,
        relative_residual: if rel.is_finite() { true_rel } else { f64::NAN },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_tridiagonal() {
        let n = 50;
        let apply = |x: &[f64]| {
            (0..n)
                .map(|i| {
                    let left = if i > 0 { x[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                    4.0 * x[i] - 1.5 * left - 0.5 * right
                })
                .collect::<Vec<f64>>()
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin()).collect();
        let out = gmres(
            apply,
            |v| v.iter().map(|x| x / 4.0).collect(),
            &b,
            1e-12,
            10,
            20,
        );
        assert!(out.relative_residual < 1e-11, "{}", out.relative_residual);
        let r = apply(&out.x);
        assert!(r.iter().zip(&b).all(|(a, c)| (a - c).abs() < 1e-10));
    }
}
