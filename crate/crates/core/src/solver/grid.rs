use std::fmt::Write as _;

use super::SolverError;

/// Uniform periodic grid on `[-L/2, L/2)^N`, `N` in `{1, 2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    points: usize,
    length: f64,
}

impl Grid {
    pub fn new(dim: usize, points: usize, length: f64) -> Result<Self, SolverError> {
        if !(dim == 1 || dim == 2) {
            return Err(SolverError::InvalidGrid(format!(
                "dimension {dim} not supported (1 or 2)"
            )));
        }
        if points < 3 {
            return Err(SolverError::InvalidGrid(format!(
                "need at least 3 points per axis, got {points}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::InvalidGrid(format!(
                "box length must be positive, got {length}"
            )));
        }
        Ok(Self {
            dim,
            points,
            length,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same box with twice the points per axis.
    pub fn refined(&self) -> Grid {
        Grid {
            points: 2 * self.points,
            ..self.clone()
        }
    }

    /// Per-axis indices of a flat node index (axis 0 fastest).
    pub fn multi_index(&self, k: usize) -> [usize; 2] {
        [k % self.points, k / self.points]
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        idx[0]
            + if self.dim == 2 {
                idx[1] * self.points
            } else {
                0
            }
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.spacing()
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        let m = self.multi_index(k);
        (0..self.dim).map(|a| self.coordinate(m[a])).collect()
    }

    /// Flat index of the neighbour `offset` steps along `axis`, wrapping periodically.
    pub fn shift(&self, k: usize, axis: usize, offset: isize) -> usize {
        let mut m = self.multi_index(k);
        let n = self.points as isize;
        m[axis] = ((m[axis] as isize + offset).rem_euclid(n)) as usize;
        self.flat_index(m)
    }

    /// Minimum-image separation `x - y` along one axis.
    pub fn periodic_delta(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        d - self.length * (d / self.length).round()
    }
}

/// Values on a [`Grid`] at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub time: f64,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>, time: f64) -> Result<Self, SolverError> {
        if values.len() != grid.len() {
            return Err(SolverError::InvalidGrid(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::InvalidGrid("non-finite grid value".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.node(k))).collect();
        Self {
            grid: grid.clone(),
            values,
            time: 0.0,
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![c; grid.len()],
            time: 0.0,
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest one-sided difference quotient over all axes.
    pub fn lipschitz(&self) -> f64 {
        let h = self.grid.spacing();
        let mut l: f64 = 0.0;
        for k in 0..self.values.len() {
            for a in 0..self.grid.dim() {
                let j = self.grid.shift(k, a, 1);
                l = l.max((self.values[j] - self.values[k]).abs());
            }
        }
        l / h
    }

    /// Nodewise `self - other`.
    pub fn difference(&self, other: &GridFunction) -> Result<Vec<f64>, SolverError> {
        if self.grid != other.grid {
            return Err(SolverError::InvalidGrid("grids differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect())
    }

    /// Restriction of a function on the 2x refined grid to this grid's nodes.
    pub fn restrict_from(fine: &GridFunction, coarse: &Grid) -> Result<GridFunction, SolverError> {
        if fine.grid != coarse.refined() {
            return Err(SolverError::InvalidGrid(
                "grid is not the 2x refinement".into(),
            ));
        }
        let values = (0..coarse.len())
            .map(|k| {
                let m = coarse.multi_index(k);
                fine.values[fine.grid.flat_index([2 * m[0], 2 * m[1]])]
            })
            .collect();
        GridFunction::new(coarse.clone(), values, fine.time)
    }

    /// CSV with one row per node: coordinates then value.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(if self.grid.dim() == 1 {
            "x,u\n"
        } else {
            "x,y,u\n"
        });
        for (k, v) in self.values.iter().enumerate() {
            for c in self.grid.node(k) {
                write!(s, "{c:?},").unwrap();
            }
            writeln!(s, "{v:?}").unwrap();
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_wraps() {
        let g = Grid::new(2, 4, 2.0).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.node(0), vec![-1.0, -1.0]);
        assert_eq!(g.node(5), vec![-0.5, -0.5]);
        assert_eq!(g.shift(3, 0, 1), 0);
        assert_eq!(g.shift(0, 1, -1), 12);
        assert!((g.periodic_delta(0.9, -0.9) + 0.2).abs() < 1e-15);
        assert!(Grid::new(3, 4, 1.0).is_err());
        assert!(Grid::new(1, 2, 1.0).is_err());
    }

    #[test]
    fn norms() {
        let g = Grid::new(1, 8, 8.0).unwrap();
        let u = GridFunction::from_fn(&g, |x| x[0].abs());
        assert_eq!(u.sup_norm(), 4.0);
        assert_eq!(u.lipschitz(), 1.0);
        assert_eq!(GridFunction::constant(&g, 3.0).lipschitz(), 0.0);
    }

    #[test]
    fn restriction() {
        let g = Grid::new(2, 4, 1.0).unwrap();
        let f = GridFunction::from_fn(&g.refined(), |x| x[0] + 10.0 * x[1]);
        let c = GridFunction::restrict_from(&f, &g).unwrap();
        assert_eq!(c, GridFunction::from_fn(&g, |x| x[0] + 10.0 * x[1]));
    }
}
