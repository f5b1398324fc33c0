//! Periodic momentum grid, spin labels and mode enumeration.
//!
//! Single-particle basis functions are plane waves `exp(i q_n·x) ⊗ ξ_s` on a
//! cubic box of side `L`, with `q_n = (2π/L)·n` and the integer tuple `n`
//! restricted to `|n_i| ≤ n_max` per axis. The grid is symmetric about
//! `n = 0`, so `q` and `−q` always coexist; the hermiticity pairings
//! `ρ(k)† = ρ(−k)` and `j(k)† = j(−k)` rely on that.
//!
//! Sums over momenta that leave the finite grid are handled by a
//! [`BoundaryMode`]: `Truncate` drops such terms (mimics the infinite
//! lattice, breaks exact algebra closure near the cutoff), `Wrap` reduces
//! them modulo the grid period (exact closure of every commutator identity
//! on the finite grid). Identity suites run in wrap mode; truncate-mode
//! violations are measured and reported, never asserted away.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Maximum spatial dimension supported by the fixed-size tuple types.
pub const MAX_DIM: usize = 3;

/// Integer momentum tuple in grid units. Axes beyond `GridSpec::dim` are 0.
pub type IntTuple = [i32; MAX_DIM];

/// Boundary handling for momentum sums that leave the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Drop bilinear terms whose shifted momentum leaves the grid.
    Truncate,
    /// Reduce shifted momenta componentwise modulo `2·n_max + 1`.
    Wrap,
}

/// Finite symmetric momentum grid over a periodic box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Spatial dimension, 1 to 3.
    pub dim: usize,
    /// Box side length `L` (length units). Momentum step is `2π/L`.
    pub box_length: f64,
    /// Per-axis cutoff: grid points satisfy `|n_i| ≤ n_max`.
    pub n_max: i32,
    pub boundary_mode: BoundaryMode,
}

impl GridSpec {
    pub fn new(dim: usize, box_length: f64, n_max: i32, boundary_mode: BoundaryMode) -> Result<Self> {
        let grid = GridSpec { dim, box_length, n_max, boundary_mode };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dim must be 1..=3, got {}", self.dim)));
        }
        if !(self.box_length > 0.0) || !self.box_length.is_finite() {
            return Err(Error::InvalidGrid(format!("box_length must be > 0, got {}", self.box_length)));
        }
        if self.n_max < 0 {
            return Err(Error::InvalidGrid(format!("n_max must be >= 0, got {}", self.n_max)));
        }
        Ok(())
    }

    /// Number of grid points along one axis, `2·n_max + 1`.
    pub fn width(&self) -> i32 {
        2 * self.n_max + 1
    }

    /// Grid points per spin, `(2·n_max + 1)^dim`.
    pub fn modes_per_spin(&self) -> usize {
        (self.width() as usize).pow(self.dim as u32)
    }

    /// Total mode count, two spins per grid point.
    pub fn mode_count(&self) -> usize {
        2 * self.modes_per_spin()
    }

    /// Momentum step `2π/L`.
    pub fn momentum_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.box_length
    }

    pub fn contains(&self, n: &IntTuple) -> bool {
        for axis in 0..MAX_DIM {
            if axis < self.dim {
                if n[axis].abs() > self.n_max {
                    return false;
                }
            } else if n[axis] != 0 {
                return false;
            }
        }
        true
    }

    /// Reduce a tuple componentwise modulo the grid period into range.
    pub fn wrap_tuple(&self, n: &IntTuple) -> IntTuple {
        let w = self.width();
        let mut out = [0i32; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = (n[axis] + self.n_max).rem_euclid(w) - self.n_max;
        }
        out
    }

    /// Reduce per the boundary mode: `None` means the tuple left a
    /// truncated grid.
    pub fn reduce(&self, n: &IntTuple) -> Option<IntTuple> {
        match self.boundary_mode {
            BoundaryMode::Wrap => Some(self.wrap_tuple(n)),
            BoundaryMode::Truncate => {
                if self.contains(n) {
                    Some(*n)
                } else {
                    None
                }
            }
        }
    }

    /// Physical momentum `(2π/L)·n`.
    pub fn momentum(&self, n: &IntTuple) -> [f64; MAX_DIM] {
        let step = self.momentum_step();
        let mut q = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            q[axis] = step * n[axis] as f64;
        }
        q
    }

    /// All grid tuples in lexicographic order (first axis slowest).
    pub fn tuples(&self) -> Vec<IntTuple> {
        let mut out = Vec::with_capacity(self.modes_per_spin());
        let mut n = [0i32; MAX_DIM];
        self.tuples_rec(0, &mut n, &mut out);
        out
    }

    fn tuples_rec(&self, axis: usize, n: &mut IntTuple, out: &mut Vec<IntTuple>) {
        if axis == self.dim {
            out.push(*n);
            return;
        }
        for v in -self.n_max..=self.n_max {
            n[axis] = v;
            self.tuples_rec(axis + 1, n, out);
        }
        n[axis] = 0;
    }

    /// Index of a tuple within [`GridSpec::tuples`] order.
    pub fn tuple_index(&self, n: &IntTuple) -> Option<usize> {
        if !self.contains(n) {
            return None;
        }
        let w = self.width() as usize;
        let mut idx = 0usize;
        for axis in 0..self.dim {
            idx = idx * w + (n[axis] + self.n_max) as usize;
        }
        Some(idx)
    }

    pub fn with_boundary(&self, boundary_mode: BoundaryMode) -> GridSpec {
        GridSpec { boundary_mode, ..*self }
    }
}

/// Spin-1/2 label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub const ALL: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn index(&self) -> usize {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn other(&self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Spin::Up => write!(f, "up"),
            Spin::Down => write!(f, "down"),
        }
    }
}

/// A single-particle mode: a grid point plus a spin label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub n: IntTuple,
    pub spin: Spin,
}

impl Mode {
    pub fn new(n: IntTuple, spin: Spin) -> Mode {
        Mode { n, spin }
    }
}

/// Enumerate all modes in the deterministic order used everywhere else:
/// spin-major, grid tuples lexicographic within each spin block.
pub fn enumerate_modes(grid: &GridSpec) -> Vec<Mode> {
    let tuples = grid.tuples();
    let mut out = Vec::with_capacity(grid.mode_count());
    for spin in Spin::ALL {
        for n in &tuples {
            out.push(Mode::new(*n, spin));
        }
    }
    out
}

/// Position of a mode within [`enumerate_modes`] order.
pub fn mode_index(grid: &GridSpec, mode: &Mode) -> Option<usize> {
    let within = grid.tuple_index(&mode.n)?;
    Some(mode.spin.index() * grid.modes_per_spin() + within)
}

/// Shift a mode's momentum by an integer tuple. `None` marks a shift that
/// leaves a truncated grid; wrap mode never returns `None`.
pub fn momentum_shift(mode: &Mode, k: &IntTuple, grid: &GridSpec) -> Option<Mode> {
    let mut shifted = [0i32; MAX_DIM];
    for axis in 0..MAX_DIM {
        shifted[axis] = mode.n[axis] + k[axis];
    }
    grid.reduce(&shifted).map(|n| Mode::new(n, mode.spin))
}

/// Componentwise negation of an integer tuple.
pub fn neg_tuple(k: &IntTuple) -> IntTuple {
    [-k[0], -k[1], -k[2]]
}

/// Embed a 1D integer into a tuple; convenience for 1D call sites.
pub fn tuple1(k: i32) -> IntTuple {
    [k, 0, 0]
}
