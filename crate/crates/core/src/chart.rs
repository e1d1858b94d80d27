//! Coordinate frames of dimension `4n`, split into four blocks of size `n`.

use std::fmt;

/// One of the four coordinate blocks `x_i`, `x_{n+i}`, `x_{2n+i}`, `x_{3n+i}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    X,
    Xn,
    X2n,
    X3n,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::X, Block::Xn, Block::X2n, Block::X3n];

    /// Multiple of `n` at which the block starts.
    pub fn offset(self) -> usize {
        match self {
            Block::X => 0,
            Block::Xn => 1,
            Block::X2n => 2,
            Block::X3n => 3,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Block::X => "i",
            Block::Xn => "n+i",
            Block::X2n => "2n+i",
            Block::X3n => "3n+i",
        }
    }
}

/// A `4n`-dimensional chart. Coordinates are `x_0 .. x_{4n-1}`; velocity
/// symbols used by the mechanics layer occupy the reserved indices
/// `4n .. 8n-1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    n: usize,
}

impl Chart {
    /// Returns `None` for `n == 0`.
    pub fn new(n: usize) -> Option<Self> {
        (n > 0).then_some(Chart { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        4 * self.n
    }

    pub fn block(&self, k: usize) -> Block {
        debug_assert!(k < self.dim());
        Block::ALL[k / self.n]
    }

    /// Position of `k` inside its block.
    pub fn within(&self, k: usize) -> usize {
        k % self.n
    }

    pub fn index(&self, block: Block, i: usize) -> usize {
        debug_assert!(i < self.n);
        block.offset() * self.n + i
    }

    /// Expression variable index carrying the velocity `ẋ_k`.
    pub fn velocity(&self, k: usize) -> usize {
        debug_assert!(k < self.dim());
        self.dim() + k
    }

    pub fn is_velocity(&self, var: usize) -> bool {
        (self.dim()..2 * self.dim()).contains(&var)
    }

    /// Name used when rendering documents: `x3` for coordinates, `ẋ3` for
    /// velocity symbols, and the raw `x{index}` for anything beyond.
    pub fn var_name(&self, var: usize) -> String {
        if self.is_velocity(var) {
            format!("ẋ{}", var - self.dim())
        } else {
            format!("x{var}")
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart(n={}, dim={})", self.n, self.dim())
    }
}
