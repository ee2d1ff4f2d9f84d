//! Joint probability over two occupation numbers `(x, y)` with `x + y <= total`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::QuantumState;

/// Dense `(total+1) x (total+1)` array indexed `[x][y]`; cells with `x + y > total` stay zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexGrid {
    total: u32,
    values: Vec<f64>,
}

impl SimplexGrid {
    pub fn zeros(total: u32) -> Self {
        let side = total as usize + 1;
        Self {
            total,
            values: vec![0.0; side * side],
        }
    }

    /// Marginal `P(occ[0], occ[1])` of `|amplitude|²` over a three-mode state.
    pub fn from_three_mode_state(state: &QuantumState) -> Result<Self> {
        if state.n_modes() != 3 {
            return Err(Error::InvalidArgument(format!(
                "joint distribution needs 3 modes, state has {}",
                state.n_modes()
            )));
        }
        let mut grid = Self::zeros(state.total_atoms());
        for (occ, a) in state.basis().iter().zip(state.amplitudes()) {
            *grid.get_mut(occ[0], occ[1]) += a.norm_sqr();
        }
        Ok(grid)
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn side(&self) -> usize {
        self.total as usize + 1
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        if x + y > self.total {
            return 0.0;
        }
        self.values[x as usize * self.side() + y as usize]
    }

    #[inline]
    pub fn get_mut(&mut self, x: u32, y: u32) -> &mut f64 {
        assert!(x + y <= self.total, "({x}, {y}) outside the simplex");
        let side = self.side();
        &mut self.values[x as usize * side + y as usize]
    }

    /// Row-major values including the zero cells outside the simplex.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `(x, y, p)` over the simplex, `x` ascending then `y` ascending.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..=self.total).flat_map(move |x| (0..=self.total - x).map(move |y| (x, y, self.get(x, y))))
    }

    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        if self.total != other.total {
            return Err(Error::BasisMismatch(format!(
                "grids over {} and {} atoms",
                self.total, other.total
            )));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum())
    }

    pub fn max_abs_difference(&self, other: &Self) -> Result<f64> {
        if self.total != other.total {
            return Err(Error::BasisMismatch("grid totals differ".into()));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Cell of the largest value.
    pub fn argmax(&self) -> (u32, u32) {
        let mut best = (0, 0, f64::NEG_INFINITY);
        for (x, y, p) in self.cells() {
            if p > best.2 {
                best = (x, y, p);
            }
        }
        (best.0, best.1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_cover_the_simplex_in_order() {
        let g = SimplexGrid::zeros(2);
        let cells: Vec<_> = g.cells().map(|(x, y, _)| (x, y)).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]);
        assert_eq!(SimplexGrid::zeros(60).cells().count(), 1891);
    }

    #[test]
    fn outside_cells_read_zero() {
        let g = SimplexGrid::zeros(3);
        assert_eq!(g.get(3, 3), 0.0);
    }

    #[test]
    fn fock_state_is_a_delta() {
        let s = QuantumState::fock(&[2, 1, 4]).unwrap();
        let g = SimplexGrid::from_three_mode_state(&s).unwrap();
        assert_eq!(g.get(2, 1), 1.0);
        assert_eq!(g.sum(), 1.0);
        assert_eq!(g.argmax(), (2, 1));
        assert!(SimplexGrid::from_three_mode_state(&QuantumState::fock(&[1, 1]).unwrap()).is_err());
    }
}
