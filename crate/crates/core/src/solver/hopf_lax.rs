//! Brute-force Hopf-Lax oracle for `u_t = |Du|^2` on the periodic box.

use rayon::prelude::*;

use super::grid::GridFunction;

/// `u(x) = max_y (u0(y) - |x - y|^2 / (4 s))` over all nodes `y`, with the
/// minimum-image distance on the box.
pub fn hopf_lax_flat(u0: &GridFunction, s: f64) -> GridFunction {
    assert!(s >= 0.0, "hopf_lax_flat needs s >= 0");
    if s == 0.0 {
        return u0.clone();
    }
    let g = &u0.grid;
    let nodes: Vec<Vec<f64>> = (0..g.len()).map(|k| g.node(k)).collect();
    let values = nodes
        .par_iter()
        .map(|x| {
            nodes
                .iter()
                .zip(&u0.values)
                .map(|(y, v)| {
                    let d2: f64 = x
                        .iter()
                        .zip(y)
                        .map(|(a, b)| g.periodic_delta(*a, *b).powi(2))
                        .sum();
                    v - d2 / (4.0 * s)
                })
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    GridFunction {
        grid: g.clone(),
        values,
        time: u0.time + s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::grid::Grid;

    #[test]
    fn zero_time_and_constants() {
        let g = Grid::new(1, 20, 2.0).unwrap();
        let u = GridFunction::from_fn(&g, |x| x[0].cos());
        assert_eq!(hopf_lax_flat(&u, 0.0).values, u.values);
        let c = GridFunction::constant(&g, 3.0);
        assert_eq!(hopf_lax_flat(&c, 0.7).values, c.values);
    }

    #[test]
    fn negative_abs_closed_form() {
        // Closed form on the line: -x^2/(4t) for |x| <= 2t, t - |x| beyond.
        let g = Grid::new(1, 400, 2.0).unwrap();
        let t = 0.2;
        let u0 = GridFunction::from_fn(&g, |x| -x[0].abs());
        let u = hopf_lax_flat(&u0, t);
        let h = g.spacing();
        for k in 0..g.len() {
            let x = g.coordinate(k);
            if x.abs() > 1.0 - 2.0 * t {
                continue;
            }
            let exact = if x.abs() <= 2.0 * t {
                -x * x / (4.0 * t)
            } else {
                t - x.abs()
            };
            // Maximizing over nodes only loses at most h^2/(4t)-order.
            assert!(u.values[k] <= exact + 1e-14);
            assert!(exact - u.values[k] <= h * h / (4.0 * t) + 1e-14);
        }
    }

    #[test]
    fn lipschitz_does_not_grow() {
        let g = Grid::new(2, 16, 3.0).unwrap();
        let u0 = GridFunction::from_fn(&g, |x| (2.0 * x[0]).sin() * 0.5 + x[1].cos());
        let u = hopf_lax_flat(&u0, 0.3);
        assert!(u.lipschitz() <= u0.lipschitz() + 1e-12);
        assert!(u.values.iter().zip(&u0.values).all(|(a, b)| a >= b));
    }
}
